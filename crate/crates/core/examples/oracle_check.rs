//! Three routes to the same steady state: direct solve, time evolution from
//! vacuum, and the weak-drive expansion.
//!
//! cargo run --release --example oracle_check

use kerrnet::dynamics::{amplitude_oracle, build_liouvillian, evolve, solve_network, DensityMatrix};
use kerrnet::fockspace::{build_basis, number};
use kerrnet::model::{build_hamiltonian, preset};

fn main() -> kerrnet::Result<()> {
    let net = preset("fig4_cyclic3")?.with_drive_target("b")?;
    let basis = build_basis(3, net.truncation())?;
    let l = build_liouvillian(&build_hamiltonian(&net, &basis)?, &net, &basis)?;

    let ss = solve_network(&net)?;
    let rho = evolve(&l, &DensityMatrix::projector(basis.dimension(), 0), 50.0, 0.01)?;
    let oracle = amplitude_oracle(&net)?;

    println!("{:>5} {:>14} {:>14} {:>14}", "mode", "steady", "evolved", "expansion");
    for (k, m) in net.modes().iter().enumerate() {
        let evolved = rho.expectation(&number(&basis, k)?)?.re;
        println!(
            "{:>5} {:>14.8e} {:>14.8e} {:>14.8e}",
            m.label,
            ss.mean_photon(&m.label)?,
            evolved,
            oracle.mean_photon(&m.label)?
        );
    }
    let g2 = ss.pair_moment("a")? / ss.mean_photon("a")?.powi(2);
    println!("g2 at a: steady {g2:.6}, expansion {:.6}", oracle.g2("a")?);
    println!("residual {:.1e}, trace drift after evolution {:.1e}", ss.residual(), (rho.trace() - 1.0).norm());
    Ok(())
}
