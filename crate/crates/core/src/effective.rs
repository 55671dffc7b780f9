//! Two-mode effective model of a three-mode ring whose most lossy mode is
//! eliminated adiabatically.
//!
//! The eliminated mode `c` leaves behind a dissipative hopping `J′` with the
//! loop flux attached and extra decay on both ports. Both effects come from a
//! single collective jump operator `L = √(4/γ_c)(G_qc·q + G_pc·e^{-iφ}·p)`
//! next to the ordinary port losses, which keeps the reduced dynamics in
//! Lindblad form.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cli::{PairCell, RowStatus, ScanVariable, SweepResult, SweepRow};
use crate::dynamics::{steady_state, JumpChannel, Liouvillian};
use crate::error::{Error, Result};
use crate::fockspace::{self, FockBasis, SparseOperator, TruncationPolicy};
use crate::model::{
    build_hamiltonian, elimination_margin, is_simple_ring, normalize_phase, CouplingSpec, ModeSpec,
    NetworkModel, TimescaleWarning, TIMESCALE_MARGIN,
};
use crate::observables::{g2_zero, transmission, PortPair};

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModel {
    /// Hopping that moves a photon from the first port to the second, `J − iJ′e^{-iφ}`.
    pub j_forward: Complex64,
    /// Hopping from the second port to the first, `J − iJ′e^{iφ}`.
    pub j_backward: Complex64,
    /// `J′ = 2 G_pc G_qc / γ_c`.
    pub j_induced: f64,
    /// `4 G_pc² / γ_c`.
    pub gamma_a_induced: f64,
    /// `4 G_qc² / γ_c`.
    pub gamma_b_induced: f64,
    pub flux: f64,
    pub gamma_aux: f64,
    pub g_a_aux: f64,
    pub g_b_aux: f64,
    /// Reduced two-mode network with the bare port losses and the direct hopping.
    pub base: NetworkModel,
    pub warnings: Vec<TimescaleWarning>,
}

impl EffectiveModel {
    /// `(first port, second port)` labels.
    pub fn ports(&self) -> (&str, &str) {
        let m = self.base.modes();
        (&m[0].label, &m[1].label)
    }

    /// Port damping including the induced part, `γ_a + γ_a′`.
    pub fn total_gamma_a(&self) -> f64 {
        self.base.modes()[0].gamma + self.gamma_a_induced
    }

    pub fn total_gamma_b(&self) -> f64 {
        self.base.modes()[1].gamma + self.gamma_b_induced
    }

    /// `√(4/γ_c)(G_qc·q + G_pc·e^{-iφ}·p)` on a two-mode basis.
    pub fn collective_jump(&self, basis: &FockBasis) -> Result<SparseOperator> {
        let p = fockspace::annihilation(basis, 0)?;
        let q = fockspace::annihilation(basis, 1)?;
        let scale = (4.0 / self.gamma_aux).sqrt();
        let cp = Complex64::from_polar(scale * self.g_a_aux, -self.flux);
        let cq = Complex64::new(scale * self.g_b_aux, 0.0);
        q.scale(cq).add(&p.scale(cp))
    }
}

/// `J − iJ′e^{-iφ}`.
pub fn forward_hopping(j: f64, j_induced: f64, flux: f64) -> Complex64 {
    Complex64::new(j, 0.0) - Complex64::i() * j_induced * Complex64::from_polar(1.0, -flux)
}

/// `J − iJ′e^{iφ}`.
pub fn backward_hopping(j: f64, j_induced: f64, flux: f64) -> Complex64 {
    forward_hopping(j, j_induced, -flux)
}

fn coupling_between<'a>(network: &'a NetworkModel, a: &str, b: &str) -> Option<&'a CouplingSpec> {
    network
        .couplings()
        .iter()
        .find(|c| (c.from_mode == a && c.to_mode == b) || (c.from_mode == b && c.to_mode == a))
}

// Phase picked up by traversing the coupling from `a` to `b`.
fn traversal_phase(c: &CouplingSpec, a: &str) -> f64 {
    if c.from_mode == a {
        c.phase
    } else {
        -c.phase
    }
}

/// Eliminates the most lossy mode of a three-mode ring.
///
/// The remaining modes keep their declaration order as (first, second) port;
/// the flux is the loop phase along first → second → auxiliary → first.
pub fn adiabatic_eliminate(network: &NetworkModel) -> Result<EffectiveModel> {
    if network.modes().len() != 3 || !is_simple_ring(network) {
        return Err(Error::Usage(
            "adiabatic elimination needs a three-mode ring".into(),
        ));
    }
    let (aux, ratio) = elimination_margin(network).expect("three-mode ring");
    let aux_mode = &network.modes()[aux];
    if ratio <= 1.0 {
        return Err(Error::Elimination(format!(
            "mode \"{}\" (gamma {}) is not faster than the other rates and couplings (ratio {ratio:.3})",
            aux_mode.label, aux_mode.gamma
        )));
    }
    if aux_mode.kerr_u != 0.0 {
        return Err(Error::Elimination(format!(
            "auxiliary mode \"{}\" must be linear",
            aux_mode.label
        )));
    }
    let omega0 = network.modes()[0].omega;
    if network.modes().iter().any(|m| m.omega != omega0) {
        return Err(Error::Elimination("mode frequencies must be degenerate".into()));
    }
    if network.drive().target_mode == aux_mode.label {
        return Err(Error::Usage(format!(
            "the drive sits on the auxiliary mode \"{}\"",
            aux_mode.label
        )));
    }
    let mut warnings = Vec::new();
    if ratio < TIMESCALE_MARGIN {
        warnings.push(TimescaleWarning {
            condition: format!(
                "gamma_{} >> max(other decay rates, couplings) (adiabatic elimination of \"{}\")",
                aux_mode.label, aux_mode.label
            ),
            ratio,
        });
    }

    let ports: Vec<&ModeSpec> = network
        .modes()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != aux)
        .map(|(_, m)| m)
        .collect();
    let (p, q, c) = (&ports[0].label, &ports[1].label, &aux_mode.label);
    let missing = || Error::Internal("ring is missing a link".into());
    let pq = coupling_between(network, p, q).ok_or_else(missing)?;
    let qc = coupling_between(network, q, c).ok_or_else(missing)?;
    let cp = coupling_between(network, c, p).ok_or_else(missing)?;
    let flux = normalize_phase(traversal_phase(pq, p) + traversal_phase(qc, q) + traversal_phase(cp, c));

    let (j, g_p, g_q, gamma_c) = (pq.strength, cp.strength, qc.strength, aux_mode.gamma);
    let j_induced = 2.0 * g_p * g_q / gamma_c;

    let caps = network.truncation().per_mode_caps();
    let port_caps: Vec<u32> = (0..3).filter(|&k| k != aux).map(|k| caps[k]).collect();
    let total = network
        .truncation()
        .total_cap()
        .map(|t| t.min(port_caps.iter().sum()));
    let base = NetworkModel::new(
        ports.iter().map(|m| (*m).clone()).collect(),
        vec![CouplingSpec::new(p.clone(), q.clone(), j, 0.0)],
        network.drive().clone(),
        TruncationPolicy::new(port_caps, total)?,
    )?;

    Ok(EffectiveModel {
        j_forward: forward_hopping(j, j_induced, flux),
        j_backward: backward_hopping(j, j_induced, flux),
        j_induced,
        gamma_a_induced: 4.0 * g_p * g_p / gamma_c,
        gamma_b_induced: 4.0 * g_q * g_q / gamma_c,
        flux,
        gamma_aux: gamma_c,
        g_a_aux: g_p,
        g_b_aux: g_q,
        base,
        warnings,
    })
}

/// Reduced master equation for one drive port and detuning.
fn effective_liouvillian(eff: &EffectiveModel, basis: &Arc<FockBasis>, network: &NetworkModel) -> Result<Liouvillian> {
    let h = build_hamiltonian(network, basis)?;
    let mut channels = network
        .modes()
        .iter()
        .enumerate()
        .map(|(k, m)| {
            Ok(JumpChannel {
                label: m.label.clone(),
                rate: m.gamma,
                operator: fockspace::annihilation(basis, k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    channels.push(JumpChannel {
        label: "collective".into(),
        rate: 1.0,
        operator: eff.collective_jump(basis)?,
    });
    Liouvillian::from_parts(
        &h,
        &channels,
        Arc::clone(basis),
        network.drive().clone(),
        network.modes().iter().map(|m| m.label.clone()).collect(),
    )
}

/// Solves the effective model in both directions at every detuning of `scan`.
pub fn effective_observables(eff: &EffectiveModel, basis: &FockBasis, scan: &[f64]) -> Result<SweepResult> {
    if basis.mode_count() != 2 {
        return Err(Error::Internal(format!(
            "effective model needs a two-mode basis, got {} modes",
            basis.mode_count()
        )));
    }
    let base = eff.base.clone().with_truncation(basis.policy().clone())?;
    let basis = Arc::new(basis.clone());
    let (p, q) = eff.ports();
    let pairs = vec![PortPair::new(p, q), PortPair::new(q, p)];
    let rows = scan
        .par_iter()
        .map(|&delta| {
            let cells = pairs
                .iter()
                .map(|pair| {
                    let network = base.clone().with_detuning(delta).with_drive_target(&pair.input_mode)?;
                    let ss = steady_state(&effective_liouvillian(eff, &basis, &network)?)?;
                    let g2 = match g2_zero(&ss, pair) {
                        Ok(v) => Some(v),
                        Err(Error::UndefinedCorrelation { .. }) => None,
                        Err(e) => return Err(e),
                    };
                    Ok(PairCell {
                        t: transmission(&ss, pair, &network)?,
                        g2,
                        n_out: ss.mean_photon(&pair.output_mode)?,
                        residual: ss.residual(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow {
                value: delta,
                cells,
                status: RowStatus::Ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        variable: ScanVariable::Detuning,
        pairs,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preset;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn reservoir_preset_rates() {
        let eff = adiabatic_eliminate(&preset("fig5_reservoir").unwrap()).unwrap();
        assert_eq!(eff.j_induced, 0.5);
        assert_eq!(eff.gamma_a_induced, 1.0);
        assert_eq!(eff.gamma_b_induced, 1.0);
        assert_eq!(eff.total_gamma_a(), 2.0);
        assert!(eff.warnings.is_empty());
        assert_eq!(eff.ports(), ("a", "b"));
    }

    #[test]
    fn directional_hoppings_at_quarter_flux() {
        let net = preset("fig5_reservoir").unwrap();
        let eff = adiabatic_eliminate(&net).unwrap();
        assert!(eff.j_forward.norm() < 1e-16);
        assert!((eff.j_backward - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let eff = adiabatic_eliminate(&net.with_flux(3.0 * FRAC_PI_2).unwrap()).unwrap();
        assert!((eff.j_forward - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(eff.j_backward.norm() < 1e-15);
    }

    #[test]
    fn slow_auxiliary_mode_is_refused() {
        assert!(matches!(
            adiabatic_eliminate(&preset("fig4_cyclic3").unwrap()),
            Err(Error::Elimination(_))
        ));
        assert!(matches!(
            adiabatic_eliminate(&preset("fig2_asym_molecule").unwrap()),
            Err(Error::Usage(_))
        ));
        let marginal = preset("fig5_reservoir").unwrap().with_gamma("c", 15.0).unwrap();
        assert_eq!(adiabatic_eliminate(&marginal).unwrap().warnings.len(), 1);
    }

    #[test]
    fn collective_jump_reproduces_induced_rates() {
        let eff = adiabatic_eliminate(&preset("fig5_reservoir").unwrap()).unwrap();
        let basis = fockspace::build_basis(2, eff.base.truncation()).unwrap();
        let l = eff.collective_jump(&basis).unwrap();
        let ldl = l.adjoint().mul(&l).unwrap();
        let ka = basis.index_of(&[1, 0]).unwrap();
        let kb = basis.index_of(&[0, 1]).unwrap();
        assert!((ldl.get(ka, ka).re - eff.gamma_a_induced).abs() < 1e-12);
        assert!((ldl.get(kb, kb).re - eff.gamma_b_induced).abs() < 1e-12);
        // The anti-Hermitian part -(i/2)L†L carries -iJ′e^{-iφ} on a→b.
        let hop = ldl.get(kb, ka) * Complex64::new(0.0, -0.5);
        assert!((hop - (eff.j_forward - Complex64::new(0.5, 0.0))).norm() < 1e-12);
    }

    #[test]
    fn linear_effective_model_is_coherent() {
        let net = preset("fig5_reservoir").unwrap().with_kerr("a", 0.0).unwrap().with_flux(0.7).unwrap();
        let eff = adiabatic_eliminate(&net).unwrap();
        let basis = fockspace::build_basis(2, eff.base.truncation()).unwrap();
        let sweep = effective_observables(&eff, &basis, &[-0.5, 0.3]).unwrap();
        for row in &sweep.rows {
            for cell in &row.cells {
                assert!((cell.g2.unwrap() - 1.0).abs() < 1e-6);
            }
        }
    }

    fn zero_flux_gap(net: NetworkModel) -> Vec<f64> {
        let eff = adiabatic_eliminate(&net.with_flux(0.0).unwrap()).unwrap();
        let basis = fockspace::build_basis(2, eff.base.truncation()).unwrap();
        let sweep = effective_observables(&eff, &basis, &[-1.0, 0.0, 0.8]).unwrap();
        sweep.rows.iter().map(|r| (r.cells[0].t - r.cells[1].t).abs()).collect()
    }

    #[test]
    fn zero_flux_is_reciprocal() {
        let linear = preset("fig5_reservoir").unwrap().with_kerr("a", 0.0).unwrap();
        assert!(zero_flux_gap(linear).iter().all(|&d| d < 1e-6));
        // With a Kerr port the gap is a finite-drive effect of order ε².
        let full = zero_flux_gap(preset("fig5_reservoir").unwrap());
        let half = zero_flux_gap(preset("fig5_reservoir").unwrap().with_epsilon(0.005).unwrap());
        for (f, h) in full.iter().zip(&half) {
            assert!(*f < 1e-4);
            assert!((f / h - 4.0).abs() < 0.1, "{f} {h}");
        }
    }

    proptest! {
        #[test]
        fn hopping_identities(j in 0.0..3.0f64, jp in 0.0..3.0f64, phi in -10.0..10.0f64) {
            let f = forward_hopping(j, jp, phi);
            let b = backward_hopping(j, jp, phi);
            prop_assert_eq!(f, backward_hopping(j, jp, -phi));
            let expanded = ((j - jp * phi.sin()).powi(2) + (jp * phi.cos()).powi(2)).sqrt();
            prop_assert!((f.norm() - expanded).abs() < 1e-12);
            let sum = f.norm_sqr() + b.norm_sqr();
            prop_assert!((sum - 2.0 * (j * j + jp * jp)).abs() < 1e-10);
            if (phi / PI).fract().abs() < 1e-12 {
                prop_assert!((f - b.conj()).norm() < 1e-12);
            }
        }
    }
}
