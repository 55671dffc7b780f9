//! Eliminates a strongly damped auxiliary cavity and compares the reduced
//! two-mode model with the full three-mode one.
//!
//! cargo run --release --example reservoir_elimination

use kerrnet::effective::{adiabatic_eliminate, effective_observables};
use kerrnet::fockspace::{build_basis, TruncationPolicy};
use kerrnet::model::preset;
use kerrnet::observables::{measure, PortPair};

fn main() -> kerrnet::Result<()> {
    let net = preset("fig5_reservoir")?;
    let eff = adiabatic_eliminate(&net)?;
    println!("J' = {}, gamma'_a = {}, gamma'_b = {}", eff.j_induced, eff.gamma_a_induced, eff.gamma_b_induced);
    println!("forward hopping {:.3e}, backward hopping {:.3e}", eff.j_forward, eff.j_backward);
    for w in &eff.warnings {
        println!("warning: {w}");
    }

    let scan: Vec<f64> = (0..=8).map(|k| -2.0 + 0.5 * k as f64).collect();
    let basis = build_basis(2, &TruncationPolicy::uniform(2, 3, Some(3))?)?;
    let reduced = effective_observables(&eff, &basis, &scan)?;
    let ab = PortPair::new("a", "b");
    let ba = ab.reversed();
    let (t_ab, t_ba) = (reduced.transmissions(&ab)?, reduced.transmissions(&ba)?);

    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "detuning", "T_ab full", "T_ab eff", "T_ba full", "T_ba eff");
    for (k, &delta) in scan.iter().enumerate() {
        let at = net.clone().with_detuning(delta);
        let full_ab = measure(&at)?.t(&ab)?;
        let full_ba = measure(&at.with_drive_target("b")?)?.t(&ba)?;
        println!("{delta:>8.2} {full_ab:>10.2e} {:>10.2e} {full_ba:>10.5} {:>10.5}", t_ab[k], t_ba[k]);
    }
    Ok(())
}
