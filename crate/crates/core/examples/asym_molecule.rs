//! Two coupled cavities, only one of them nonlinear: transmission is the same
//! both ways, but the photon statistics are not.
//!
//! cargo run --release --example asym_molecule

use kerrnet::model::preset;
use kerrnet::observables::{measure_both, nonreciprocity_summary, PortPair};

fn main() -> kerrnet::Result<()> {
    let net = preset("fig2_asym_molecule")?;
    let pair = PortPair::new("a", "b");
    println!("{:>8} {:>10} {:>10} {:>12} {:>12}", "detuning", "T_ab", "T_ba", "g2_ab", "g2_ba");
    for k in 0..=24 {
        let delta = -6.0 + 0.5 * k as f64;
        let (fwd, bwd) = measure_both(&net.clone().with_detuning(delta), &pair)?;
        let s = nonreciprocity_summary(&fwd, &bwd, &pair)?;
        println!(
            "{delta:>8.2} {:>10.5} {:>10.5} {:>12.4e} {:>12.4e}",
            s.t_fwd,
            s.t_bwd,
            s.g2_fwd.unwrap_or(f64::NAN),
            s.g2_bwd.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
