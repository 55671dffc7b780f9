//! Builds a network by hand: Kerr strength from material constants, a loop
//! with its phases spread over several links, and the checks run on it.
//!
//! cargo run --release --example custom_network

use std::f64::consts::FRAC_PI_2;

use kerrnet::fockspace::TruncationPolicy;
use kerrnet::model::{
    gauge_canonicalize, kerr_from_material, validate_timescales, CouplingSpec, DriveSpec, ModeSpec, NetworkModel,
};
use kerrnet::observables::{measure, PortPair};

fn main() -> kerrnet::Result<()> {
    // Silicon-like microring at 1.55 um, in rad/s.
    let omega = 2.0 * std::f64::consts::PI * 193.4e12;
    let u = kerr_from_material(omega, 4.5e-18, 3.48, 1e-18)?;
    let gamma = 2.0 * u;
    println!("U = {u:.4e} rad/s; using gamma = 2U = {gamma:.4e} rad/s, everything below in units of gamma");

    let net = NetworkModel::new(
        vec![
            ModeSpec::new("in", 0.5, 1.0),
            ModeSpec::new("out", 0.5, 1.0),
            ModeSpec::new("aux", 0.0, 3.0),
        ],
        vec![
            CouplingSpec::new("in", "out", 0.5, 0.3),
            CouplingSpec::new("out", "aux", 0.7, FRAC_PI_2 - 0.3),
            CouplingSpec::new("aux", "in", 0.7, 0.0),
        ],
        DriveSpec::new("in", 0.01, 0.0),
        TruncationPolicy::uniform(3, 3, Some(3))?,
    )?;
    for w in validate_timescales(&net) {
        println!("warning: {w}");
    }
    let canonical = gauge_canonicalize(&net);
    for c in canonical.couplings() {
        println!("{} -> {}: g = {}, phase = {:.4}", c.from_mode, c.to_mode, c.strength, c.phase);
    }
    println!("loop flux {:.4}", net.flux().unwrap_or(0.0));

    let pair = PortPair::new("in", "out");
    let a = measure(&net)?;
    let b = measure(&canonical)?;
    println!("T = {:.6} as built, {:.6} after canonicalizing", a.t(&pair)?, b.t(&pair)?);
    Ok(())
}
