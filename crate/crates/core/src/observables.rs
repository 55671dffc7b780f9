//! Directional transmission, equal-time photon correlations and
//! nonreciprocity figures of merit.

use std::collections::BTreeMap;
use std::fmt;

use crate::dynamics::{solve_network, SteadyState};
use crate::error::{Error, Result};
use crate::model::NetworkModel;

/// Output populations below this make `g²(0)` undefined.
pub const POPULATION_FLOOR: f64 = 1e-14;
/// Denominators below this turn ratios into `+∞`.
pub const RATIO_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortPair {
    pub input_mode: String,
    pub output_mode: String,
}

impl PortPair {
    pub fn new(input: impl Into<String>, output: impl Into<String>) -> Self {
        Self {
            input_mode: input.into(),
            output_mode: output.into(),
        }
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.output_mode.clone(), self.input_mode.clone())
    }
}

impl fmt::Display for PortPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_to_{}", self.input_mode, self.output_mode)
    }
}

fn check_drive(ss: &SteadyState, pair: &PortPair) -> Result<()> {
    let drive = ss.drive();
    if drive.target_mode != pair.input_mode {
        return Err(Error::Usage(format!(
            "steady state was solved with the drive on \"{}\"; it cannot give {} (drive \"{}\" instead)",
            drive.target_mode, pair, pair.input_mode
        )));
    }
    if !(drive.epsilon > 0.0) {
        return Err(Error::Usage("steady state was solved without a drive (epsilon = 0)".into()));
    }
    ss.mode_index(&pair.output_mode)?;
    Ok(())
}

/// `T = γ_in γ_out ⟨o_out† o_out⟩ / ε²`.
pub fn transmission(ss: &SteadyState, pair: &PortPair, network: &NetworkModel) -> Result<f64> {
    check_drive(ss, pair)?;
    if network.drive() != ss.drive() {
        return Err(Error::Usage(format!(
            "network drive {:?} differs from the drive the state was solved with {:?}",
            network.drive(),
            ss.drive()
        )));
    }
    let gamma = |label: &str| {
        network
            .mode(label)
            .map(|m| m.gamma)
            .ok_or_else(|| Error::Usage(format!("network has no mode \"{label}\"")))
    };
    let eps = ss.drive().epsilon;
    let n_out = ss.mean_photon(&pair.output_mode)?;
    Ok(gamma(&pair.input_mode)? * gamma(&pair.output_mode)? * n_out / (eps * eps))
}

/// `⟨o†o†oo⟩ / ⟨o†o⟩²` at the output mode.
pub fn g2_zero(ss: &SteadyState, pair: &PortPair) -> Result<f64> {
    check_drive(ss, pair)?;
    let n = ss.mean_photon(&pair.output_mode)?;
    if n < POPULATION_FLOOR {
        return Err(Error::UndefinedCorrelation {
            population: n,
            threshold: POPULATION_FLOOR,
        });
    }
    Ok(ss.pair_moment(&pair.output_mode)? / (n * n))
}

/// Everything measured from one steady state driven at one port.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    pub drive_port: String,
    pub detuning: f64,
    pub flux: Option<f64>,
    pub residual: f64,
    pub mean_photon: BTreeMap<String, f64>,
    pub pair_moment: BTreeMap<String, f64>,
    pub transmission: BTreeMap<PortPair, f64>,
    /// `None` where the output population is below [`POPULATION_FLOOR`].
    pub g2: BTreeMap<PortPair, Option<f64>>,
}

impl ObservableSet {
    /// Collects populations and every pair leaving the drive port.
    pub fn from_steady_state(ss: &SteadyState, network: &NetworkModel) -> Result<Self> {
        let drive_port = ss.drive().target_mode.clone();
        let mut set = Self {
            drive_port: drive_port.clone(),
            detuning: ss.drive().detuning,
            flux: network.flux(),
            residual: ss.residual(),
            mean_photon: BTreeMap::new(),
            pair_moment: BTreeMap::new(),
            transmission: BTreeMap::new(),
            g2: BTreeMap::new(),
        };
        for m in network.modes() {
            set.mean_photon.insert(m.label.clone(), ss.mean_photon(&m.label)?);
            set.pair_moment.insert(m.label.clone(), ss.pair_moment(&m.label)?);
            if m.label == drive_port {
                continue;
            }
            let pair = PortPair::new(drive_port.clone(), m.label.clone());
            set.transmission.insert(pair.clone(), transmission(ss, &pair, network)?);
            let g2 = match g2_zero(ss, &pair) {
                Ok(v) => Some(v),
                Err(Error::UndefinedCorrelation { .. }) => None,
                Err(e) => return Err(e),
            };
            set.g2.insert(pair, g2);
        }
        Ok(set)
    }

    pub fn t(&self, pair: &PortPair) -> Result<f64> {
        self.transmission
            .get(pair)
            .copied()
            .ok_or_else(|| Error::Usage(format!("no transmission {pair} in a solve driven at \"{}\"", self.drive_port)))
    }

    pub fn g2(&self, pair: &PortPair) -> Result<Option<f64>> {
        self.g2
            .get(pair)
            .copied()
            .ok_or_else(|| Error::Usage(format!("no correlation {pair} in a solve driven at \"{}\"", self.drive_port)))
    }
}

/// Solves `network` as given and measures it.
pub fn measure(network: &NetworkModel) -> Result<ObservableSet> {
    let ss = solve_network(network)?;
    ObservableSet::from_steady_state(&ss, network)
}

/// Measures `pair` and its reverse with the drive moved to each end.
pub fn measure_both(network: &NetworkModel, pair: &PortPair) -> Result<(ObservableSet, ObservableSet)> {
    let forward = measure(&network.clone().with_drive_target(&pair.input_mode)?)?;
    let backward = measure(&network.clone().with_drive_target(&pair.output_mode)?)?;
    Ok((forward, backward))
}

fn ratio(num: f64, den: f64) -> f64 {
    if den.abs() < RATIO_FLOOR {
        f64::INFINITY
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonreciprocitySummary {
    pub t_fwd: f64,
    pub t_bwd: f64,
    pub isolation_db: f64,
    pub g2_fwd: Option<f64>,
    pub g2_bwd: Option<f64>,
    /// `g2_bwd / g2_fwd`, `None` when either correlation is undefined.
    pub contrast: Option<f64>,
}

/// Forward is `pair`, backward is its reverse; each set must come from a
/// solve driven at the respective input and at the same scan point.
pub fn nonreciprocity_summary(
    forward: &ObservableSet,
    backward: &ObservableSet,
    pair: &PortPair,
) -> Result<NonreciprocitySummary> {
    if forward.detuning != backward.detuning || forward.flux != backward.flux {
        return Err(Error::Usage(format!(
            "forward (detuning {}, flux {:?}) and backward (detuning {}, flux {:?}) solves are at different scan points",
            forward.detuning, forward.flux, backward.detuning, backward.flux
        )));
    }
    let back = pair.reversed();
    let t_fwd = forward.t(pair)?;
    let t_bwd = backward.t(&back)?;
    let g2_fwd = forward.g2(pair)?;
    let g2_bwd = backward.g2(&back)?;
    let t_ratio = ratio(t_fwd, t_bwd);
    Ok(NonreciprocitySummary {
        t_fwd,
        t_bwd,
        isolation_db: if t_ratio.is_infinite() { f64::INFINITY } else { 10.0 * t_ratio.log10() },
        g2_fwd,
        g2_bwd,
        contrast: match (g2_fwd, g2_bwd) {
            (Some(f), Some(b)) => Some(ratio(b, f)),
            _ => None,
        },
    })
}

/// Mean and relative spread of one orientation's three values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub values: [f64; 3],
    pub mean: f64,
    /// Largest pairwise difference divided by the largest magnitude.
    pub relative_spread: f64,
}

impl Triple {
    fn new(values: [f64; 3]) -> Self {
        let mean = values.iter().sum::<f64>() / 3.0;
        let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut spread: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                spread = spread.max((values[i] - values[j]).abs());
            }
        }
        Self {
            values,
            mean,
            relative_spread: if scale > 0.0 { spread / scale } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirculatorSummary {
    /// Port order `p0 → p1 → p2 → p0`, the counter-clockwise orientation.
    pub ports: [String; 3],
    pub t_cw: Triple,
    pub t_ccw: Triple,
    /// `None` when any correlation of the orientation is undefined.
    pub g2_cw: Option<Triple>,
    pub g2_ccw: Option<Triple>,
}

impl CirculatorSummary {
    /// Largest relative spread across the four triples; `+∞` if a
    /// correlation is undefined.
    pub fn symmetry_diagnostic(&self) -> f64 {
        let g = |t: &Option<Triple>| t.map_or(f64::INFINITY, |t| t.relative_spread);
        self.t_cw
            .relative_spread
            .max(self.t_ccw.relative_spread)
            .max(g(&self.g2_cw))
            .max(g(&self.g2_ccw))
    }
}

/// Aggregates one solve per drive port of a three-port ring.
///
/// Ports are taken in key order `p0, p1, p2`; counter-clockwise means
/// `p0 → p1 → p2 → p0` and clockwise the reverse.
pub fn circulator_summary(solves: &BTreeMap<String, ObservableSet>) -> Result<CirculatorSummary> {
    if solves.len() != 3 {
        return Err(Error::Usage(format!(
            "a circulator summary needs one solve per port of a three-port ring, got {}",
            solves.len()
        )));
    }
    let ports: Vec<String> = solves.keys().cloned().collect();
    for (port, set) in solves {
        if &set.drive_port != port {
            return Err(Error::Usage(format!(
                "solve filed under \"{port}\" was driven at \"{}\"",
                set.drive_port
            )));
        }
    }
    let first = &solves[&ports[0]];
    if solves.values().any(|s| s.detuning != first.detuning || s.flux != first.flux) {
        return Err(Error::Usage("circulator solves are at different scan points".into()));
    }
    let directed = |from: usize, to: usize| PortPair::new(ports[from].clone(), ports[to].clone());
    let ccw = [directed(0, 1), directed(1, 2), directed(2, 0)];
    let cw = [directed(1, 0), directed(2, 1), directed(0, 2)];
    let t = |pairs: &[PortPair; 3]| -> Result<Triple> {
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(pairs) {
            *slot = solves[&p.input_mode].t(p)?;
        }
        Ok(Triple::new(v))
    };
    let g = |pairs: &[PortPair; 3]| -> Result<Option<Triple>> {
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(pairs) {
            match solves[&p.input_mode].g2(p)? {
                Some(x) => *slot = x,
                None => return Ok(None),
            }
        }
        Ok(Some(Triple::new(v)))
    };
    Ok(CirculatorSummary {
        ports: [ports[0].clone(), ports[1].clone(), ports[2].clone()],
        t_cw: t(&cw)?,
        t_ccw: t(&ccw)?,
        g2_cw: g(&cw)?,
        g2_ccw: g(&ccw)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preset;

    #[test]
    fn wrong_port_is_loud() {
        let net = preset("fig2_asym_molecule").unwrap();
        let ss = solve_network(&net).unwrap();
        let pair = PortPair::new("b", "a");
        assert!(matches!(transmission(&ss, &pair, &net), Err(Error::Usage(_))));
        assert!(matches!(g2_zero(&ss, &pair), Err(Error::Usage(_))));
    }

    #[test]
    fn undriven_transmission_is_usage_error() {
        let net = preset("fig2_asym_molecule").unwrap().with_epsilon(0.0).unwrap();
        let ss = solve_network(&net).unwrap();
        let pair = PortPair::new("a", "b");
        assert!(matches!(transmission(&ss, &pair, &net), Err(Error::Usage(_))));
    }

    #[test]
    fn impedance_matched_transmission() {
        let net = preset("fig2_asym_molecule").unwrap();
        let ss = solve_network(&net).unwrap();
        let t = transmission(&ss, &PortPair::new("a", "b"), &net).unwrap();
        assert!((t - 1.0).abs() < 1e-3, "{t}");
    }

    #[test]
    fn isolation_sentinel() {
        let mk = |port: &str, other: &str, t: f64| {
            let pair = PortPair::new(port, other);
            ObservableSet {
                drive_port: port.into(),
                detuning: 0.0,
                flux: None,
                residual: 0.0,
                mean_photon: BTreeMap::new(),
                pair_moment: BTreeMap::new(),
                transmission: BTreeMap::from([(pair.clone(), t)]),
                g2: BTreeMap::from([(pair, None)]),
            }
        };
        let pair = PortPair::new("a", "b");
        let s = nonreciprocity_summary(&mk("a", "b", 0.5), &mk("b", "a", 0.0), &pair).unwrap();
        assert_eq!(s.isolation_db, f64::INFINITY);
        assert_eq!(s.contrast, None);
        let mut shifted = mk("b", "a", 0.5);
        shifted.detuning = 1.0;
        assert!(matches!(
            nonreciprocity_summary(&mk("a", "b", 0.5), &shifted, &pair),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn circulator_needs_three_solves() {
        let net = preset("fig7_circulator").unwrap();
        let one = measure(&net).unwrap();
        let map = BTreeMap::from([("a".to_string(), one)]);
        assert!(matches!(circulator_summary(&map), Err(Error::Usage(_))));
    }
}
