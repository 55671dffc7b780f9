//! Network description, Hamiltonian assembly, gauge handling and presets.
//!
//! All rates, couplings and detunings are plain `f64` multiples of a common
//! unit (the port loss rate in every preset). Couplings are directed only in
//! the sense that they fix which way the phase is counted: a coupling from
//! `i` to `j` with strength `g` and phase `p` contributes
//! `g e^{ip} o_i o_j† + h.c.`, so `<1_j| H |1_i> = g e^{ip}`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{self, Factor, FockBasis, SparseOperator, Term, TruncationPolicy};

/// Per-mode photon cap used by every preset.
pub const DEFAULT_PER_MODE_CAP: u32 = 3;
/// Total-excitation cap used by every preset.
pub const DEFAULT_TOTAL_CAP: u32 = 3;
/// Probe amplitude of every preset.
pub const DEFAULT_EPSILON: f64 = 0.01;
/// Separated-timescale inequalities closer than this factor are flagged.
pub const TIMESCALE_MARGIN: f64 = 5.0;
/// Coupling-to-frequency ratio above which the rotating-wave check fails.
pub const RWA_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    pub label: String,
    /// Resonance frequency; only differences between modes matter.
    pub omega: f64,
    pub kerr_u: f64,
    pub gamma: f64,
}

impl ModeSpec {
    pub fn new(label: impl Into<String>, kerr_u: f64, gamma: f64) -> Self {
        Self {
            label: label.into(),
            omega: 0.0,
            kerr_u,
            gamma,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }
}

/// Map a phase into `[0, 2π)`.
pub fn normalize_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub from_mode: String,
    pub to_mode: String,
    pub strength: f64,
    /// Radians in `[0, 2π)`.
    pub phase: f64,
}

impl CouplingSpec {
    pub fn new(from: impl Into<String>, to: impl Into<String>, strength: f64, phase: f64) -> Self {
        Self {
            from_mode: from.into(),
            to_mode: to.into(),
            strength,
            phase: normalize_phase(phase),
        }
    }

    fn pair_key(&self) -> (String, String) {
        if self.from_mode <= self.to_mode {
            (self.from_mode.clone(), self.to_mode.clone())
        } else {
            (self.to_mode.clone(), self.from_mode.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    pub target_mode: String,
    pub epsilon: f64,
    /// Detuning of the target mode from the probe, `ω_target - ω_p`.
    pub detuning: f64,
}

impl DriveSpec {
    pub fn new(target: impl Into<String>, epsilon: f64, detuning: f64) -> Self {
        Self {
            target_mode: target.into(),
            epsilon,
            detuning,
        }
    }
}

/// A validated network of modes, couplings and one coherent drive.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    modes: Vec<ModeSpec>,
    couplings: Vec<CouplingSpec>,
    drive: DriveSpec,
    truncation: TruncationPolicy,
    absolute_frequencies: bool,
}

impl NetworkModel {
    /// Builds and validates a network whose frequencies are given relative
    /// to each other (the rotating-wave check is skipped).
    pub fn new(
        modes: Vec<ModeSpec>,
        couplings: Vec<CouplingSpec>,
        drive: DriveSpec,
        truncation: TruncationPolicy,
    ) -> Result<Self> {
        let network = Self {
            modes,
            couplings,
            drive,
            truncation,
            absolute_frequencies: false,
        };
        network.validate()?;
        Ok(network)
    }

    /// Marks mode frequencies as absolute, enabling the rotating-wave check.
    pub fn with_absolute_frequencies(mut self) -> Result<Self> {
        self.absolute_frequencies = true;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else if problems.len() == 1 {
            Err(Error::Config(problems.remove(0)))
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Every invariant violation, in a stable order.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.modes.is_empty() {
            out.push("network has no modes".to_string());
        }
        let mut labels = HashSet::new();
        for m in &self.modes {
            if !labels.insert(m.label.as_str()) {
                out.push(format!("mode \"{}\" declared twice", m.label));
            }
            if !(m.gamma > 0.0 && m.gamma.is_finite()) {
                out.push(format!("mode \"{}\" needs gamma > 0, got {}", m.label, m.gamma));
            }
            if !(m.kerr_u >= 0.0 && m.kerr_u.is_finite()) {
                out.push(format!("mode \"{}\" needs kerr >= 0, got {}", m.label, m.kerr_u));
            }
            if !m.omega.is_finite() {
                out.push(format!("mode \"{}\" has non-finite omega", m.label));
            }
        }
        let mut pairs = HashSet::new();
        for c in &self.couplings {
            for end in [&c.from_mode, &c.to_mode] {
                if !labels.contains(end.as_str()) {
                    out.push(format!("coupling references undeclared mode \"{end}\""));
                }
            }
            if c.from_mode == c.to_mode {
                out.push(format!("coupling connects mode \"{}\" to itself", c.from_mode));
            }
            if !(c.strength >= 0.0 && c.strength.is_finite()) {
                out.push(format!(
                    "coupling {}-{} needs strength >= 0, got {}",
                    c.from_mode, c.to_mode, c.strength
                ));
            }
            if !(0.0..TAU).contains(&c.phase) {
                out.push(format!(
                    "coupling {}-{} phase {} outside [0, 2pi)",
                    c.from_mode, c.to_mode, c.phase
                ));
            }
            if !pairs.insert(c.pair_key()) {
                out.push(format!(
                    "more than one coupling between \"{}\" and \"{}\"",
                    c.from_mode, c.to_mode
                ));
            }
        }
        if !labels.contains(self.drive.target_mode.as_str()) {
            out.push(format!(
                "drive targets undeclared mode \"{}\"",
                self.drive.target_mode
            ));
        }
        if !(self.drive.epsilon >= 0.0 && self.drive.epsilon.is_finite()) {
            out.push(format!("drive epsilon must be >= 0, got {}", self.drive.epsilon));
        }
        if !self.drive.detuning.is_finite() {
            out.push("drive detuning is not finite".to_string());
        }
        if self.truncation.mode_count() != self.modes.len() {
            out.push(format!(
                "truncation covers {} modes but the network declares {}",
                self.truncation.mode_count(),
                self.modes.len()
            ));
        }
        if self.absolute_frequencies {
            let min_omega = self
                .modes
                .iter()
                .map(|m| m.omega.abs())
                .fold(f64::INFINITY, f64::min);
            for c in &self.couplings {
                if c.strength * RWA_MARGIN > min_omega {
                    out.push(format!(
                        "coupling {}-{} strength {} is not small against mode frequency {} (rotating-wave approximation)",
                        c.from_mode, c.to_mode, c.strength, min_omega
                    ));
                }
            }
        }
        out
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn couplings(&self) -> &[CouplingSpec] {
        &self.couplings
    }

    pub fn drive(&self) -> &DriveSpec {
        &self.drive
    }

    pub fn truncation(&self) -> &TruncationPolicy {
        &self.truncation
    }

    pub fn absolute_frequencies(&self) -> bool {
        self.absolute_frequencies
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.label == label)
    }

    pub fn mode(&self, label: &str) -> Option<&ModeSpec> {
        self.modes.iter().find(|m| m.label == label)
    }

    pub(crate) fn require_mode(&self, label: &str) -> Result<usize> {
        self.mode_index(label)
            .ok_or_else(|| Error::Config(format!("undeclared mode \"{label}\"")))
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.drive.detuning = detuning;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.drive.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    /// Moves the drive to another mode, keeping amplitude and detuning.
    pub fn with_drive_target(mut self, label: &str) -> Result<Self> {
        self.require_mode(label)?;
        self.drive.target_mode = label.to_string();
        Ok(self)
    }

    pub fn with_truncation(mut self, truncation: TruncationPolicy) -> Result<Self> {
        self.truncation = truncation;
        self.validate()?;
        Ok(self)
    }

    pub fn with_coupling_phase(mut self, index: usize, phase: f64) -> Result<Self> {
        let coupling = self
            .couplings
            .get_mut(index)
            .ok_or_else(|| Error::Config(format!("no coupling with index {index}")))?;
        coupling.phase = normalize_phase(phase);
        Ok(self)
    }

    pub fn with_kerr(mut self, label: &str, kerr_u: f64) -> Result<Self> {
        let k = self.require_mode(label)?;
        self.modes[k].kerr_u = kerr_u;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, label: &str, gamma: f64) -> Result<Self> {
        let k = self.require_mode(label)?;
        self.modes[k].gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    /// Replaces the strength of the coupling between two modes (either direction).
    pub fn with_coupling_strength(mut self, a: &str, b: &str, strength: f64) -> Result<Self> {
        let coupling = self
            .couplings
            .iter_mut()
            .find(|c| (c.from_mode == a && c.to_mode == b) || (c.from_mode == b && c.to_mode == a))
            .ok_or_else(|| Error::Config(format!("no coupling between \"{a}\" and \"{b}\"")))?;
        coupling.strength = strength;
        self.validate()?;
        Ok(self)
    }

    /// Sets the synthetic flux of the network's single loop.
    ///
    /// The network is first brought to canonical gauge; the loop's flux then
    /// sits on one link and is replaced by `flux`.
    pub fn with_flux(self, flux: f64) -> Result<Self> {
        let canonical = gauge_canonicalize(&self);
        let chords = flux_links(&canonical);
        match chords.as_slice() {
            [chord] => canonical.with_coupling_phase(*chord, flux),
            [] => Err(Error::Config(
                "network has no closed loop, so it carries no flux".into(),
            )),
            _ => Err(Error::Config(format!(
                "network has {} independent loops; a single flux value is ambiguous",
                chords.len()
            ))),
        }
    }

    /// Total flux of the single loop, if there is exactly one.
    pub fn flux(&self) -> Option<f64> {
        let canonical = gauge_canonicalize(self);
        match flux_links(&canonical).as_slice() {
            [chord] => Some(canonical.couplings[*chord].phase),
            _ => None,
        }
    }
}

/// Assembles the rotating-frame Hamiltonian
/// `Σ Δ_o n_o + Σ U_o n_o(n_o-1) + Σ (g e^{ip} o_i o_j† + h.c.) + ε(o_d† + o_d)`
/// where `Δ_o = ω_o - ω_p` and the probe frequency follows from the drive's
/// detuning of its target mode.
pub fn build_hamiltonian(network: &NetworkModel, basis: &FockBasis) -> Result<SparseOperator> {
    network.validate()?;
    if basis.policy() != network.truncation() {
        return Err(Error::Internal(
            "basis was not built from this network's truncation policy".into(),
        ));
    }
    let dim = basis.dimension();
    let ladders = (0..basis.mode_count())
        .map(|k| fockspace::annihilation(basis, k))
        .collect::<Result<Vec<_>>>()?;
    let target = network.require_mode(&network.drive.target_mode)?;
    let probe = network.modes[target].omega - network.drive.detuning;

    let mut diag = vec![Complex64::new(0.0, 0.0); dim];
    for (k, mode) in network.modes.iter().enumerate() {
        let detuning = mode.omega - probe;
        for (slot, state) in diag.iter_mut().zip(basis.states()) {
            let n = f64::from(state[k]);
            *slot += detuning * n + mode.kerr_u * n * (n - 1.0);
        }
    }
    let diagonal = SparseOperator::diagonal(&diag);

    let mut terms = vec![Term::new(Complex64::new(1.0, 0.0), vec![Factor::plain(&diagonal)])];
    for c in &network.couplings {
        let i = network.require_mode(&c.from_mode)?;
        let j = network.require_mode(&c.to_mode)?;
        let amp = Complex64::from_polar(c.strength, c.phase);
        // Lower before raising so products never step outside the truncated space.
        terms.push(Term::new(amp, vec![Factor::dagger(&ladders[j]), Factor::plain(&ladders[i])]));
        terms.push(Term::new(amp.conj(), vec![Factor::dagger(&ladders[i]), Factor::plain(&ladders[j])]));
    }
    let eps = Complex64::new(network.drive.epsilon, 0.0);
    terms.push(Term::new(eps, vec![Factor::dagger(&ladders[target])]));
    terms.push(Term::new(eps, vec![Factor::plain(&ladders[target])]));
    fockspace::compose(dim, &terms)
}

// Spanning forest over couplings in declaration order; a coupling that closes
// a loop is a chord. Returns (tree flags, per-mode component root).
fn spanning_forest(network: &NetworkModel) -> Vec<bool> {
    let n = network.modes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    network
        .couplings
        .iter()
        .map(|c| {
            let i = network.mode_index(&c.from_mode).expect("validated network");
            let j = network.mode_index(&c.to_mode).expect("validated network");
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri == rj {
                false
            } else {
                parent[ri] = rj;
                true
            }
        })
        .collect()
}

/// Indices of the couplings that carry loop flux after [`gauge_canonicalize`].
pub fn flux_links(network: &NetworkModel) -> Vec<usize> {
    spanning_forest(network)
        .iter()
        .enumerate()
        .filter(|(_, &tree)| !tree)
        .map(|(k, _)| k)
        .collect()
}

/// Redefines mode phases so every spanning-tree link is real and each loop's
/// flux sits on the link that closes it. Loop fluxes are preserved.
pub fn gauge_canonicalize(network: &NetworkModel) -> NetworkModel {
    let tree = spanning_forest(network);
    let n = network.modes.len();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, c) in network.couplings.iter().enumerate() {
        if tree[k] {
            let i = network.mode_index(&c.from_mode).expect("validated network");
            let j = network.mode_index(&c.to_mode).expect("validated network");
            adjacency[i].push((j, k));
            adjacency[j].push((i, k));
        }
    }

    // Mode o picks up e^{iθ_o}; a link i→j then has phase p + θ_i - θ_j.
    let mut theta: Vec<Option<f64>> = vec![None; n];
    for root in 0..n {
        if theta[root].is_some() {
            continue;
        }
        theta[root] = Some(0.0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let tu = theta[u].expect("visited");
            for &(v, k) in &adjacency[u] {
                if theta[v].is_some() {
                    continue;
                }
                let c = &network.couplings[k];
                let forward = network.mode_index(&c.from_mode) == Some(u);
                theta[v] = Some(if forward { tu + c.phase } else { tu - c.phase });
                queue.push_back(v);
            }
        }
    }

    let mut out = network.clone();
    for (k, c) in out.couplings.iter_mut().enumerate() {
        if tree[k] {
            c.phase = 0.0;
        } else {
            let i = network.mode_index(&c.from_mode).expect("validated network");
            let j = network.mode_index(&c.to_mode).expect("validated network");
            let ti = theta[i].expect("every mode visited");
            let tj = theta[j].expect("every mode visited");
            c.phase = normalize_phase(c.phase + ti - tj);
        }
    }
    out
}

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 6.626_070_15e-34 / TAU;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Kerr strength `U = ħ ω² c n₂ / (n² V_eff)` in SI units (rad/s in, rad/s out).
pub fn kerr_from_material(omega: f64, n2: f64, n: f64, v_eff: f64) -> Result<f64> {
    for (name, value) in [("omega", omega), ("n2", n2), ("n", n), ("v_eff", v_eff)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Config(format!("{name} must be positive, got {value}")));
        }
    }
    Ok(HBAR * omega * omega * SPEED_OF_LIGHT * n2 / (n * n * v_eff))
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 7] = [
    "fig2_asym_molecule",
    "fig4_cyclic3",
    "fig5_reservoir",
    "fig6_sym_molecule",
    "fig7_circulator",
    "fig8_fourmode_asym",
    "fig9_fourmode_sym",
];

fn preset_truncation(modes: usize) -> TruncationPolicy {
    TruncationPolicy::uniform(modes, DEFAULT_PER_MODE_CAP, Some(DEFAULT_TOTAL_CAP))
        .expect("preset truncation is valid")
}

fn ring3(kerr: [f64; 3], gamma_c: f64, g: f64, flux: f64) -> NetworkModel {
    NetworkModel::new(
        vec![
            ModeSpec::new("a", kerr[0], 1.0),
            ModeSpec::new("b", kerr[1], 1.0),
            ModeSpec::new("c", kerr[2], gamma_c),
        ],
        vec![
            CouplingSpec::new("a", "b", 0.5, 0.0),
            CouplingSpec::new("b", "c", g, 0.0),
            CouplingSpec::new("c", "a", g, flux),
        ],
        DriveSpec::new("a", DEFAULT_EPSILON, 0.0),
        preset_truncation(3),
    )
    .expect("preset is valid")
}

fn ring4(kerr_b: f64, flux: f64) -> NetworkModel {
    NetworkModel::new(
        vec![
            ModeSpec::new("a", 5.0, 1.0),
            ModeSpec::new("b", kerr_b, 1.0),
            ModeSpec::new("c", 0.0, 1e-3),
            ModeSpec::new("d", 0.0, 16.0),
        ],
        vec![
            CouplingSpec::new("a", "d", 2.0, 0.0),
            CouplingSpec::new("d", "b", 2.0, 0.0),
            CouplingSpec::new("b", "c", 0.5, 0.0),
            CouplingSpec::new("c", "a", 0.5, flux),
        ],
        DriveSpec::new("a", DEFAULT_EPSILON, 0.0),
        preset_truncation(4),
    )
    .expect("preset is valid")
}

/// Parameter sets of the reference scenarios, in units of the port loss rate.
///
/// Every preset is driven at mode `a` with zero detuning; looped presets
/// carry flux π/2 on the `c → a` link.
pub fn preset(name: &str) -> Result<NetworkModel> {
    Ok(match name {
        "fig2_asym_molecule" => NetworkModel::new(
            vec![ModeSpec::new("a", 5.0, 1.0), ModeSpec::new("b", 0.0, 1.0)],
            vec![CouplingSpec::new("a", "b", 0.5, 0.0)],
            DriveSpec::new("a", DEFAULT_EPSILON, 0.0),
            preset_truncation(2),
        )?,
        "fig4_cyclic3" => ring3([5.0, 0.0, 0.0], 1.0, 0.5, FRAC_PI_2),
        "fig5_reservoir" => ring3([5.0, 0.0, 0.0], 100.0, 5.0, FRAC_PI_2),
        "fig6_sym_molecule" => ring3([5.0, 5.0, 0.0], 1.0, 0.5, FRAC_PI_2),
        "fig7_circulator" => ring3([5.0, 5.0, 5.0], 1.0, 0.5, FRAC_PI_2),
        "fig8_fourmode_asym" => ring4(0.0, FRAC_PI_2),
        "fig9_fourmode_sym" => ring4(5.0, FRAC_PI_2),
        other => {
            return Err(Error::Config(format!(
                "unknown preset \"{other}\"; valid presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}

/// A separated-timescale condition that holds by less than [`TIMESCALE_MARGIN`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimescaleWarning {
    pub condition: String,
    /// How many times larger the fast side is than the slow side.
    pub ratio: f64,
}

impl std::fmt::Display for TimescaleWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} holds only by a factor {:.3} (< {TIMESCALE_MARGIN})",
            self.condition, self.ratio
        )
    }
}

/// Single loop through every mode, each mode on exactly two links.
pub(crate) fn is_simple_ring(network: &NetworkModel) -> bool {
    let n = network.modes.len();
    if n < 3 || network.couplings.len() != n {
        return false;
    }
    let mut degree: HashMap<&str, usize> = HashMap::new();
    for c in &network.couplings {
        *degree.entry(c.from_mode.as_str()).or_default() += 1;
        *degree.entry(c.to_mode.as_str()).or_default() += 1;
    }
    degree.len() == n && degree.values().all(|&d| d == 2) && flux_links(network).len() == 1
}

// Index of the largest (or smallest) decay rate; ties resolve to the mode
// declared last, which is where presets put their auxiliary modes.
fn extreme_gamma(network: &NetworkModel, largest: bool) -> usize {
    let mut best = 0;
    for (k, m) in network.modes.iter().enumerate() {
        let g = m.gamma;
        let b = network.modes[best].gamma;
        if (largest && g >= b) || (!largest && g <= b) {
            best = k;
        }
    }
    best
}

/// Fast auxiliary mode of a three-mode ring and the ratio
/// `γ_aux / max{other decay rates, couplings}`.
pub fn elimination_margin(network: &NetworkModel) -> Option<(usize, f64)> {
    if !is_simple_ring(network) || network.modes.len() != 3 {
        return None;
    }
    let aux = extreme_gamma(network, true);
    let others = network
        .modes
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != aux)
        .map(|(_, m)| m.gamma)
        .chain(network.couplings.iter().map(|c| c.strength))
        .fold(0.0, f64::max);
    Some((aux, network.modes[aux].gamma / others))
}

/// Flags separated-timescale conditions that hold by less than a factor 5.
///
/// Three-mode rings are checked for eliminating their most lossy mode;
/// four-mode rings for one strongly and one weakly damped auxiliary mode
/// around the port modes. Other topologies produce no warnings.
pub fn validate_timescales(network: &NetworkModel) -> Vec<TimescaleWarning> {
    let mut warnings = Vec::new();
    if let Some((aux, ratio)) = elimination_margin(network) {
        if ratio < TIMESCALE_MARGIN {
            let label = &network.modes[aux].label;
            warnings.push(TimescaleWarning {
                condition: format!(
                    "gamma_{label} >> max(other decay rates, couplings) (adiabatic elimination of \"{label}\")"
                ),
                ratio,
            });
        }
    } else if is_simple_ring(network) && network.modes.len() == 4 {
        let fast = extreme_gamma(network, true);
        let slow = extreme_gamma(network, false);
        let middle = network
            .modes
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != fast && *k != slow)
            .map(|(_, m)| m.gamma)
            .chain(network.couplings.iter().map(|c| c.strength))
            .fold(f64::INFINITY, f64::min);
        let fast_ratio = network.modes[fast].gamma / middle;
        let slow_ratio = middle / network.modes[slow].gamma;
        let (fl, sl) = (&network.modes[fast].label, &network.modes[slow].label);
        if fast_ratio < TIMESCALE_MARGIN {
            warnings.push(TimescaleWarning {
                condition: format!("gamma_{fl} >> min(couplings, port decay rates)"),
                ratio: fast_ratio,
            });
        }
        if slow_ratio < TIMESCALE_MARGIN {
            warnings.push(TimescaleWarning {
                condition: format!("min(couplings, port decay rates) >> gamma_{sl}"),
                ratio: slow_ratio,
            });
        }
    }
    warnings
}

/// `φ` expressed as a multiple of π, for display.
pub fn phase_in_pi(phase: f64) -> f64 {
    phase / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{build_basis, number, total_number};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hamiltonian(network: &NetworkModel) -> (FockBasis, SparseOperator) {
        let basis = build_basis(network.modes().len(), network.truncation()).unwrap();
        let h = build_hamiltonian(network, &basis).unwrap();
        (basis, h)
    }

    #[test]
    fn molecule_matrix_elements() {
        let network = preset("fig2_asym_molecule").unwrap().with_detuning(0.7);
        let (basis, h) = hamiltonian(&network);
        let k10 = basis.index_of(&[1, 0]).unwrap();
        let k01 = basis.index_of(&[0, 1]).unwrap();
        let k20 = basis.index_of(&[2, 0]).unwrap();
        let k00 = basis.index_of(&[0, 0]).unwrap();
        assert_eq!(h.get(k10, k01), c(0.5, 0.0));
        assert!((h.get(k20, k20) - c(2.0 * 0.7 + 2.0 * 5.0, 0.0)).norm() < 1e-14);
        assert_eq!(h.get(k10, k00), c(0.01, 0.0));
        assert_eq!(h.get(k01, k00), c(0.0, 0.0));
    }

    #[test]
    fn flux_link_carries_phase() {
        let network = preset("fig4_cyclic3").unwrap();
        let (basis, h) = hamiltonian(&network);
        let ka = basis.index_of(&[1, 0, 0]).unwrap();
        let kc = basis.index_of(&[0, 0, 1]).unwrap();
        // G_ac e^{iφ} c a† moves a photon from c to a.
        assert!((h.get(ka, kc) - c(0.0, 0.5)).norm() < 1e-15);
        assert!((h.get(kc, ka) - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn unequal_frequencies_shift_diagonals() {
        let network = NetworkModel::new(
            vec![ModeSpec::new("a", 0.0, 1.0), ModeSpec::new("b", 0.0, 1.0).with_omega(0.3)],
            vec![CouplingSpec::new("a", "b", 0.5, 0.0)],
            DriveSpec::new("a", 0.01, -0.2),
            TruncationPolicy::uniform(2, 2, Some(2)).unwrap(),
        )
        .unwrap();
        let (basis, h) = hamiltonian(&network);
        let ka = basis.index_of(&[1, 0]).unwrap();
        let kb = basis.index_of(&[0, 1]).unwrap();
        assert!((h.get(ka, ka).re + 0.2).abs() < 1e-15);
        assert!((h.get(kb, kb).re - 0.1).abs() < 1e-15);
    }

    #[test]
    fn hamiltonians_are_hermitian_and_conserve_number_without_drive() {
        for name in PRESET_NAMES {
            let network = preset(name).unwrap().with_detuning(-0.3);
            let (basis, h) = hamiltonian(&network);
            assert_eq!(h.hermiticity_error(), 0.0, "{name}");
            let undriven = network.clone().with_epsilon(0.0).unwrap();
            let h0 = build_hamiltonian(&undriven, &basis).unwrap();
            for (r, col, _) in h0.entries() {
                assert_eq!(basis.total_photons(r), basis.total_photons(col), "{name}");
            }
            let n = total_number(&basis);
            let comm = h0.mul(&n).unwrap().add(&n.mul(&h0).unwrap().scale(c(-1.0, 0.0))).unwrap();
            assert!(comm.is_empty());
        }
    }

    #[test]
    fn mismatched_basis_is_internal_error() {
        let network = preset("fig2_asym_molecule").unwrap();
        let other = TruncationPolicy::uniform(2, 2, Some(2)).unwrap();
        let basis = build_basis(2, &other).unwrap();
        assert!(matches!(build_hamiltonian(&network, &basis), Err(Error::Internal(_))));
    }

    #[test]
    fn validation_catches_bad_networks() {
        let trunc = TruncationPolicy::uniform(2, 2, Some(2)).unwrap();
        let modes = vec![ModeSpec::new("a", 0.0, 1.0), ModeSpec::new("b", 0.0, 1.0)];
        let drive = DriveSpec::new("a", 0.01, 0.0);
        let bad = NetworkModel::new(
            modes.clone(),
            vec![CouplingSpec::new("a", "q", 0.5, 0.0)],
            drive.clone(),
            trunc.clone(),
        );
        assert!(matches!(&bad, Err(Error::Config(m)) if m.contains("\"q\"")));
        let dup = NetworkModel::new(
            modes.clone(),
            vec![CouplingSpec::new("a", "b", 0.5, 0.0), CouplingSpec::new("b", "a", 0.2, 0.0)],
            drive.clone(),
            trunc.clone(),
        );
        assert!(dup.is_err());
        let mut lossless = modes.clone();
        lossless[1].gamma = 0.0;
        assert!(NetworkModel::new(lossless, vec![], drive.clone(), trunc.clone()).is_err());
        let wrong_target = NetworkModel::new(modes.clone(), vec![], DriveSpec::new("z", 0.01, 0.0), trunc);
        assert!(wrong_target.is_err());
    }

    #[test]
    fn rotating_wave_check_only_with_absolute_frequencies() {
        let trunc = TruncationPolicy::uniform(2, 1, None).unwrap();
        let net = NetworkModel::new(
            vec![
                ModeSpec::new("a", 0.0, 1.0).with_omega(100.0),
                ModeSpec::new("b", 0.0, 1.0).with_omega(100.0),
            ],
            vec![CouplingSpec::new("a", "b", 50.0, 0.0)],
            DriveSpec::new("a", 0.01, 0.0),
            trunc,
        )
        .unwrap();
        assert!(net.clone().with_absolute_frequencies().is_err());
        let weak = net.with_coupling_strength("a", "b", 1.0).unwrap();
        assert!(weak.with_absolute_frequencies().is_ok());
    }

    #[test]
    fn canonical_gauge_examples() {
        let ring = NetworkModel::new(
            vec![ModeSpec::new("a", 0.0, 1.0), ModeSpec::new("b", 0.0, 1.0), ModeSpec::new("c", 0.0, 1.0)],
            vec![
                CouplingSpec::new("a", "b", 0.5, 0.3),
                CouplingSpec::new("b", "c", 0.5, 0.5),
                CouplingSpec::new("c", "a", 0.5, FRAC_PI_2 - 0.8),
            ],
            DriveSpec::new("a", 0.01, 0.0),
            TruncationPolicy::uniform(3, 2, Some(2)).unwrap(),
        )
        .unwrap();
        let canon = gauge_canonicalize(&ring);
        let phases: Vec<f64> = canon.couplings().iter().map(|c| c.phase).collect();
        assert_eq!(phases[0], 0.0);
        assert_eq!(phases[1], 0.0);
        assert!((phases[2] - FRAC_PI_2).abs() < 1e-15);
        assert!((ring.flux().unwrap() - FRAC_PI_2).abs() < 1e-15);

        let chain = NetworkModel::new(
            vec![ModeSpec::new("a", 0.0, 1.0), ModeSpec::new("b", 0.0, 1.0)],
            vec![CouplingSpec::new("a", "b", 0.5, 1.1)],
            DriveSpec::new("a", 0.01, 0.0),
            TruncationPolicy::uniform(2, 2, Some(2)).unwrap(),
        )
        .unwrap();
        assert_eq!(gauge_canonicalize(&chain).couplings()[0].phase, 0.0);
        assert!(chain.flux().is_none());
        assert!(chain.with_flux(1.0).is_err());

        let four = preset("fig8_fourmode_asym").unwrap();
        assert_eq!(gauge_canonicalize(&four), four);
    }

    #[test]
    fn reversed_link_counts_phase_backwards() {
        // b→a with phase p is the same as a→b with phase -p.
        let mk = |c0: CouplingSpec| {
            NetworkModel::new(
                vec![ModeSpec::new("a", 0.0, 1.0), ModeSpec::new("b", 0.0, 1.0), ModeSpec::new("c", 0.0, 1.0)],
                vec![c0, CouplingSpec::new("b", "c", 0.5, 0.0), CouplingSpec::new("c", "a", 0.5, 0.0)],
                DriveSpec::new("a", 0.01, 0.0),
                TruncationPolicy::uniform(3, 1, Some(1)).unwrap(),
            )
            .unwrap()
        };
        let forward = mk(CouplingSpec::new("a", "b", 0.5, 0.4)).flux().unwrap();
        let backward = mk(CouplingSpec::new("b", "a", 0.5, TAU - 0.4)).flux().unwrap();
        assert!((forward - 0.4).abs() < 1e-14);
        assert!((forward - backward).abs() < 1e-14);
    }

    #[test]
    fn with_flux_moves_only_the_loop_phase() {
        let network = preset("fig4_cyclic3").unwrap().with_flux(1.2).unwrap();
        assert_eq!(network.couplings()[0].phase, 0.0);
        assert_eq!(network.couplings()[2].phase, 1.2);
        assert_eq!(network.with_flux(TAU + 0.5).unwrap().couplings()[2].phase, normalize_phase(TAU + 0.5));
    }

    #[test]
    fn kerr_formula() {
        let base = kerr_from_material(1e15, 2.4e-19, 1.9, 1e-16).unwrap();
        let half_v = kerr_from_material(1e15, 2.4e-19, 1.9, 2e-16).unwrap();
        let double_w = kerr_from_material(2e15, 2.4e-19, 1.9, 1e-16).unwrap();
        assert!((half_v / base - 0.5).abs() < 1e-14);
        assert!((double_w / base - 4.0).abs() < 1e-14);
        // Si3N4 ring at 1550 nm: n2 = 2.4e-19 m²/W, n = 1.9, V_eff = 100 µm³.
        // Hand evaluation: ħω² = 1.5575e-4, ·c·n2 = 1.12063e-14, /(n²V) = 31.041 rad/s.
        let omega = TAU * SPEED_OF_LIGHT / 1.55e-6;
        let u = kerr_from_material(omega, 2.4e-19, 1.9, 1e-16).unwrap();
        assert!((u - 31.041_210_581_380_67).abs() < 1e-9);
        assert!(kerr_from_material(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(kerr_from_material(1.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn preset_parameters() {
        let fig2 = preset("fig2_asym_molecule").unwrap();
        assert_eq!(fig2.modes().len(), 2);
        assert_eq!(fig2.mode("a").unwrap().kerr_u, 5.0);
        assert_eq!(fig2.mode("b").unwrap().kerr_u, 0.0);
        assert_eq!(fig2.couplings()[0].strength, 0.5);
        assert_eq!(fig2.drive().epsilon, 0.01);
        assert!(fig2.modes().iter().all(|m| m.gamma == 1.0));

        let fig5 = preset("fig5_reservoir").unwrap();
        assert_eq!(fig5.mode("c").unwrap().gamma, 100.0);
        assert_eq!(fig5.couplings()[1].strength, 5.0);
        assert_eq!(fig5.couplings()[2].strength, 5.0);
        assert_eq!(fig5.flux(), Some(FRAC_PI_2));

        let fig8 = preset("fig8_fourmode_asym").unwrap();
        assert_eq!(fig8.modes().len(), 4);
        assert_eq!(fig8.mode("c").unwrap().gamma, 1e-3);
        assert_eq!(fig8.mode("d").unwrap().gamma, 16.0);
        assert_eq!(fig8.mode("a").unwrap().kerr_u, 5.0);
        assert_eq!(fig8.mode("b").unwrap().kerr_u, 0.0);
        let strength = |a: &str, b: &str| {
            fig8.couplings()
                .iter()
                .find(|c| (c.from_mode == a && c.to_mode == b) || (c.from_mode == b && c.to_mode == a))
                .unwrap()
                .strength
        };
        assert_eq!(strength("a", "c"), 0.5);
        assert_eq!(strength("b", "c"), 0.5);
        assert_eq!(strength("a", "d"), 2.0);
        assert_eq!(strength("b", "d"), 2.0);
        assert_eq!(preset("fig9_fourmode_sym").unwrap().mode("b").unwrap().kerr_u, 5.0);

        match preset("fig3") {
            Err(Error::Config(msg)) => assert!(msg.contains("fig7_circulator")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn timescale_warnings() {
        assert!(validate_timescales(&preset("fig5_reservoir").unwrap()).is_empty());
        assert!(validate_timescales(&preset("fig8_fourmode_asym").unwrap()).is_empty());
        let w = validate_timescales(&preset("fig4_cyclic3").unwrap());
        assert_eq!(w.len(), 1);
        assert!(w[0].condition.contains("\"c\""));
        assert!((w[0].ratio - 1.0).abs() < 1e-15);
        assert!(validate_timescales(&preset("fig2_asym_molecule").unwrap()).is_empty());
        let squeezed = preset("fig8_fourmode_asym").unwrap().with_gamma("d", 2.0).unwrap();
        assert_eq!(validate_timescales(&squeezed).len(), 1);
    }

    #[test]
    fn number_operator_matches_diagonal_photon_counts() {
        let network = preset("fig4_cyclic3").unwrap();
        let basis = build_basis(3, network.truncation()).unwrap();
        let n = number(&basis, 2).unwrap();
        for (k, s) in basis.states().iter().enumerate() {
            assert_eq!(n.get(k, k).re, f64::from(s[2]));
        }
    }
}
