//! Configuration documents, parameter sweeps and CSV output.
//!
//! A configuration is a line-oriented document:
//!
//! ```text
//! # two coupled cavities
//! [mode]
//! label = a
//! kerr = 5
//! gamma = 1
//!
//! [coupling]
//! from = a
//! to = b
//! g = 0.5
//! phase = 0.5pi
//! ```
//!
//! Every `[mode]` and `[coupling]` header opens a new record; `[drive]`,
//! `[sweep]` and `[truncation]` may appear once. Reals accept a `pi` suffix.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use crate::dynamics::solve_network;
use crate::error::{ConfigIssue, Error, Result};
use crate::fockspace::TruncationPolicy;
use crate::model::{self, flux_links, gauge_canonicalize, CouplingSpec, DriveSpec, ModeSpec, NetworkModel};
use crate::observables::{g2_zero, transmission, PortPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVariable {
    Detuning,
    Phase,
}

impl ScanVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::Detuning => "detuning",
            Self::Phase => "phase",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: ScanVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub drive_ports: Vec<String>,
}

impl SweepSpec {
    /// Detuning −10..10 with 401 points, or flux 0..2π with 201 points.
    pub fn default_for(variable: ScanVariable, drive_ports: Vec<String>) -> Self {
        match variable {
            ScanVariable::Detuning => Self { variable, start: -10.0, stop: 10.0, points: 401, drive_ports },
            ScanVariable::Phase => Self { variable, start: 0.0, stop: TAU, points: 201, drive_ports },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("sweep needs at least one point".into()));
        }
        if self.points > 1 && !(self.start < self.stop) {
            return Err(Error::Config(format!(
                "sweep start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.drive_ports.is_empty() {
            return Err(Error::Config("sweep lists no drive ports".into()));
        }
        Ok(())
    }

    /// Evenly spaced values; the last one is exactly `stop`.
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.stop } else { self.start + step * k as f64 })
            .collect()
    }
}

/// Observables of one ordered port pair at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCell {
    pub t: f64,
    /// `None` where the output population is too small.
    pub g2: Option<f64>,
    pub n_out: f64,
    pub residual: f64,
}

impl PairCell {
    fn failed() -> Self {
        Self { t: f64::NAN, g2: None, n_out: f64::NAN, residual: f64::NAN }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// One cell per entry of [`SweepResult::pairs`].
    pub cells: Vec<PairCell>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: ScanVariable,
    pub pairs: Vec<PortPair>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn pair_index(&self, pair: &PortPair) -> Result<usize> {
        self.pairs
            .iter()
            .position(|p| p == pair)
            .ok_or_else(|| Error::Usage(format!("sweep has no pair {pair}")))
    }

    pub fn cells(&self, pair: &PortPair) -> Result<Vec<PairCell>> {
        let k = self.pair_index(pair)?;
        Ok(self.rows.iter().map(|r| r.cells[k]).collect())
    }

    pub fn transmissions(&self, pair: &PortPair) -> Result<Vec<f64>> {
        Ok(self.cells(pair)?.iter().map(|c| c.t).collect())
    }

    pub fn correlations(&self, pair: &PortPair) -> Result<Vec<Option<f64>>> {
        Ok(self.cells(pair)?.iter().map(|c| c.g2).collect())
    }

    /// `(grid value, message)` of every failed row.
    pub fn failures(&self) -> Vec<(f64, &str)> {
        self.rows
            .iter()
            .filter_map(|r| match &r.status {
                RowStatus::Ok => None,
                RowStatus::Failed(m) => Some((r.value, m.as_str())),
            })
            .collect()
    }
}

/// Ordered pairs measured by a sweep: each drive port to every other mode.
pub fn sweep_pairs(network: &NetworkModel, drive_ports: &[String]) -> Vec<PortPair> {
    drive_ports
        .iter()
        .flat_map(|port| {
            network
                .modes()
                .iter()
                .filter(move |m| &m.label != port)
                .map(move |m| PortPair::new(port.clone(), m.label.clone()))
        })
        .collect()
}

fn check_sweep_against(network: &NetworkModel, sweep: &SweepSpec) -> Result<()> {
    sweep.validate()?;
    for port in &sweep.drive_ports {
        network.require_mode(port)?;
    }
    if sweep.variable == ScanVariable::Phase && flux_links(&gauge_canonicalize(network)).len() != 1 {
        return Err(Error::Config("a phase sweep needs a network with exactly one loop".into()));
    }
    Ok(())
}

/// The network at one grid value.
pub fn network_at(network: &NetworkModel, variable: ScanVariable, value: f64) -> Result<NetworkModel> {
    match variable {
        ScanVariable::Detuning => Ok(network.clone().with_detuning(value)),
        ScanVariable::Phase => network.clone().with_flux(value),
    }
}

fn solve_row(network: &NetworkModel, sweep: &SweepSpec, value: f64) -> Result<Vec<PairCell>> {
    let at = network_at(network, sweep.variable, value)?;
    let mut cells = Vec::new();
    for port in &sweep.drive_ports {
        let driven = at.clone().with_drive_target(port)?;
        let ss = solve_network(&driven)?;
        for pair in sweep_pairs(&driven, std::slice::from_ref(port)) {
            let g2 = match g2_zero(&ss, &pair) {
                Ok(v) => Some(v),
                Err(Error::UndefinedCorrelation { .. }) => None,
                Err(e) => return Err(e),
            };
            cells.push(PairCell {
                t: transmission(&ss, &pair, &driven)?,
                g2,
                n_out: ss.mean_photon(&pair.output_mode)?,
                residual: ss.residual(),
            });
        }
    }
    Ok(cells)
}

/// Solves every grid point for every drive port.
///
/// Points run concurrently on `workers` threads (all cores when `None`);
/// rows come back in grid order. A failing point is marked and the sweep
/// continues.
pub fn run_sweep(network: &NetworkModel, sweep: &SweepSpec, workers: Option<usize>) -> Result<SweepResult> {
    check_sweep_against(network, sweep)?;
    let pairs = sweep_pairs(network, &sweep.drive_ports);
    let grid = sweep.grid();
    let work = || {
        grid.par_iter()
            .map(|&value| match solve_row(network, sweep, value) {
                Ok(cells) => SweepRow { value, cells, status: RowStatus::Ok },
                Err(e) => SweepRow {
                    value,
                    cells: vec![PairCell::failed(); pairs.len()],
                    status: RowStatus::Failed(format!("{} = {value}: {e}", sweep.variable.name())),
                },
            })
            .collect::<Vec<_>>()
    };
    let rows = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(SweepResult { variable: sweep.variable, pairs, rows })
}

fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Writes a sweep as CSV: scan value, then `T`, `g2`, `n_out` and
/// `residual` per pair, then a `status` column.
pub fn write_csv(result: &SweepResult, sink: &mut impl Write) -> Result<()> {
    let mut out = String::new();
    out.push_str(result.variable.name());
    for p in &result.pairs {
        let _ = write!(out, ",T_{p},g2_{p},n_out_{p},residual_{p}");
    }
    out.push_str(",status\n");
    for row in &result.rows {
        out.push_str(&format_float(row.value));
        for c in &row.cells {
            for v in [c.t, c.g2.unwrap_or(f64::NAN), c.n_out, c.residual] {
                out.push(',');
                out.push_str(&format_float(v));
            }
        }
        match &row.status {
            RowStatus::Ok => out.push_str(",ok\n"),
            RowStatus::Failed(m) => {
                let clean: String = m
                    .chars()
                    .map(|ch| if ch == ',' { ';' } else if ch.is_control() { ' ' } else { ch })
                    .collect();
                let _ = writeln!(out, ",failed: {clean}");
            }
        }
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Configuration documents

/// A parsed configuration plus informational notes (e.g. normalized phases).
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub network: NetworkModel,
    pub sweep: SweepSpec,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SectionKind {
    Mode,
    Coupling,
    Drive,
    Sweep,
    Truncation,
}

impl SectionKind {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "mode" => Self::Mode,
            "coupling" => Self::Coupling,
            "drive" => Self::Drive,
            "sweep" => Self::Sweep,
            "truncation" => Self::Truncation,
            _ => return None,
        })
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Self::Mode => &["label", "omega", "kerr", "gamma"],
            Self::Coupling => &["from", "to", "g", "phase"],
            Self::Drive => &["target", "epsilon", "detuning"],
            Self::Sweep => &["variable", "start", "stop", "points", "drive_ports"],
            Self::Truncation => &["total_cap", "per_mode_cap"],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Mode => "mode",
            Self::Coupling => "coupling",
            Self::Drive => "drive",
            Self::Sweep => "sweep",
            Self::Truncation => "truncation",
        }
    }
}

struct Section {
    kind: SectionKind,
    line: usize,
    entries: HashMap<String, (usize, String)>,
}

/// Collects issues while reading one section.
struct Reader<'a> {
    section: &'a Section,
    issues: &'a mut Vec<ConfigIssue>,
}

impl Reader<'_> {
    fn issue(&mut self, line: usize, message: String) {
        self.issues.push(ConfigIssue { line: Some(line), message });
    }

    fn raw(&mut self, key: &str, required: bool) -> Option<(usize, String)> {
        let found = self.section.entries.get(key).cloned();
        if found.is_none() && required {
            let (line, name) = (self.section.line, self.section.kind.name());
            self.issue(line, format!("[{name}] is missing required key \"{key}\""));
        }
        found
    }

    fn text(&mut self, key: &str, required: bool) -> Option<(usize, String)> {
        let (line, v) = self.raw(key, required)?;
        if v.is_empty() {
            self.issue(line, format!("\"{key}\" is empty"));
            return None;
        }
        Some((line, v))
    }

    fn real(&mut self, key: &str, required: bool) -> Option<(usize, f64)> {
        let (line, v) = self.raw(key, required)?;
        match parse_real(&v) {
            Some(x) => Some((line, x)),
            None => {
                self.issue(line, format!("\"{key}\" expects a number, got \"{v}\""));
                None
            }
        }
    }

    fn integer(&mut self, key: &str) -> Option<(usize, u64)> {
        let (line, v) = self.raw(key, false)?;
        match v.parse::<u64>() {
            Ok(x) => Some((line, x)),
            Err(_) => {
                self.issue(line, format!("\"{key}\" expects a nonnegative integer, got \"{v}\""));
                None
            }
        }
    }
}

/// Decimal real, optionally followed by `pi` (`0.5pi`, `-pi`, `2pi`).
pub fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim();
    let value = if let Some(coef) = t.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse::<f64>().ok()?,
        };
        c * PI
    } else {
        t.parse::<f64>().ok()?
    };
    value.is_finite().then_some(value)
}

fn split_document(text: &str, issues: &mut Vec<ConfigIssue>) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            match SectionKind::parse(name.trim()) {
                Some(kind) => {
                    let repeated = matches!(kind, SectionKind::Drive | SectionKind::Sweep | SectionKind::Truncation)
                        && sections.iter().any(|s| s.kind == kind);
                    if repeated {
                        issues.push(ConfigIssue {
                            line: Some(line),
                            message: format!("[{}] may appear only once", kind.name()),
                        });
                    }
                    sections.push(Section { kind, line, entries: HashMap::new() });
                }
                None => issues.push(ConfigIssue {
                    line: Some(line),
                    message: format!("unknown section [{}]", name.trim()),
                }),
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            issues.push(ConfigIssue {
                line: Some(line),
                message: format!("expected \"key = value\" or a [section] header, got \"{content}\""),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(section) = sections.last_mut() else {
            issues.push(ConfigIssue {
                line: Some(line),
                message: format!("key \"{key}\" appears before any section header"),
            });
            continue;
        };
        if !section.kind.keys().contains(&key) {
            issues.push(ConfigIssue {
                line: Some(line),
                message: format!(
                    "unknown key \"{key}\" in [{}] (expected one of: {})",
                    section.kind.name(),
                    section.kind.keys().join(", ")
                ),
            });
            continue;
        }
        if let Some((first, _)) = section.entries.get(key) {
            issues.push(ConfigIssue {
                line: Some(line),
                message: format!("key \"{key}\" repeats line {first}"),
            });
            continue;
        }
        section.entries.insert(key.to_string(), (line, value.to_string()));
    }
    sections
}

/// Parses and validates a configuration document, reporting every problem
/// found with its line number.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let mut issues = Vec::new();
    let mut notes = Vec::new();
    let sections = split_document(text, &mut issues);

    let mut modes: Vec<(usize, ModeSpec)> = Vec::new();
    let mut couplings: Vec<(usize, usize, CouplingSpec)> = Vec::new();
    let mut drive: Option<(usize, DriveSpec, usize)> = None;
    let mut sweep_section: Option<&Section> = None;
    let mut truncation_section: Option<&Section> = None;

    for section in &sections {
        let mut r = Reader { section, issues: &mut issues };
        match section.kind {
            SectionKind::Mode => {
                let label = r.text("label", true);
                let omega = r.real("omega", false).map_or(0.0, |v| v.1);
                let kerr = r.real("kerr", true);
                let gamma = r.real("gamma", true);
                if let Some((line, k)) = kerr {
                    if k < 0.0 {
                        r.issue(line, format!("kerr must be >= 0, got {k}"));
                    }
                }
                if let Some((line, g)) = gamma {
                    if g <= 0.0 {
                        r.issue(line, format!("gamma must be > 0, got {g}"));
                    }
                }
                if let (Some((line, label)), Some((_, k)), Some((_, g))) = (label, kerr, gamma) {
                    if let Some((first, _)) = modes.iter().find(|(_, m)| m.label == label) {
                        r.issue(line, format!("mode \"{label}\" already declared on line {first}"));
                    } else {
                        modes.push((line, ModeSpec::new(label, k, g).with_omega(omega)));
                    }
                }
            }
            SectionKind::Coupling => {
                let from = r.text("from", true);
                let to = r.text("to", true);
                let g = r.real("g", true);
                let phase = r.real("phase", false);
                if let Some((line, v)) = g {
                    if v < 0.0 {
                        r.issue(line, format!("coupling g must be >= 0, got {v}"));
                    }
                }
                let phase_value = match phase {
                    Some((line, p)) => {
                        let n = model::normalize_phase(p);
                        if n != p {
                            notes.push(format!("line {line}: phase {p} normalized to {n}"));
                        }
                        n
                    }
                    None => 0.0,
                };
                if let (Some((lf, f)), Some((lt, t)), Some((_, g))) = (from, to, g) {
                    couplings.push((lf, lt, CouplingSpec::new(f, t, g, phase_value)));
                }
            }
            SectionKind::Drive => {
                let target = r.text("target", true);
                let eps = r.real("epsilon", true);
                let det = r.real("detuning", false).map_or(0.0, |v| v.1);
                if let Some((line, e)) = eps {
                    if e <= 0.0 {
                        r.issue(line, format!("epsilon must be > 0, got {e}"));
                    }
                }
                if let (Some((lt, t)), Some((_, e))) = (target, eps) {
                    drive = Some((lt, DriveSpec::new(t, e, det), section.line));
                }
            }
            SectionKind::Sweep => sweep_section = sweep_section.or(Some(section)),
            SectionKind::Truncation => truncation_section = truncation_section.or(Some(section)),
        }
    }

    if modes.is_empty() {
        issues.push(ConfigIssue { line: None, message: "document declares no [mode]".into() });
    }
    if drive.is_none() && !sections.iter().any(|s| s.kind == SectionKind::Drive) {
        issues.push(ConfigIssue { line: None, message: "document has no [drive] section".into() });
    }
    let declared = |label: &str| modes.iter().any(|(_, m)| m.label == label);
    let mut seen_pairs: Vec<(String, String, usize)> = Vec::new();
    for (lf, lt, c) in &couplings {
        for (line, end) in [(lf, &c.from_mode), (lt, &c.to_mode)] {
            if !declared(end) {
                issues.push(ConfigIssue {
                    line: Some(*line),
                    message: format!("coupling references undeclared mode \"{end}\""),
                });
            }
        }
        if c.from_mode == c.to_mode {
            issues.push(ConfigIssue {
                line: Some(*lt),
                message: format!("coupling connects \"{}\" to itself", c.from_mode),
            });
        }
        let key = if c.from_mode <= c.to_mode {
            (c.from_mode.clone(), c.to_mode.clone())
        } else {
            (c.to_mode.clone(), c.from_mode.clone())
        };
        if let Some((_, _, first)) = seen_pairs.iter().find(|(a, b, _)| (a, b) == (&key.0, &key.1)) {
            issues.push(ConfigIssue {
                line: Some(*lf),
                message: format!(
                    "second coupling between \"{}\" and \"{}\" (first on line {first})",
                    key.0, key.1
                ),
            });
        } else {
            seen_pairs.push((key.0, key.1, *lf));
        }
    }
    if let Some((line, d, _)) = &drive {
        if !declared(&d.target_mode) {
            issues.push(ConfigIssue {
                line: Some(*line),
                message: format!("drive targets undeclared mode \"{}\"", d.target_mode),
            });
        }
    }

    // Truncation: caps default to 3 photons per mode and in total.
    let mut per_mode = vec![model::DEFAULT_PER_MODE_CAP; modes.len()];
    let mut total = Some(model::DEFAULT_TOTAL_CAP);
    if let Some(section) = truncation_section {
        let mut r = Reader { section, issues: &mut issues };
        if let Some((line, v)) = r.raw("per_mode_cap", false) {
            let parsed: Option<Vec<u32>> = v.split(',').map(|s| s.trim().parse::<u32>().ok()).collect();
            match parsed {
                Some(caps) if caps.len() == 1 => per_mode = vec![caps[0]; modes.len()],
                Some(caps) if caps.len() == modes.len() => per_mode = caps,
                Some(caps) => r.issue(
                    line,
                    format!("per_mode_cap lists {} caps for {} modes", caps.len(), modes.len()),
                ),
                None => r.issue(line, format!("per_mode_cap expects integers, got \"{v}\"")),
            }
        }
        if let Some((line, v)) = r.raw("total_cap", false) {
            if v == "none" {
                total = None;
            } else {
                match v.parse::<u32>() {
                    Ok(t) => total = Some(t),
                    Err(_) => r.issue(line, format!("total_cap expects an integer or \"none\", got \"{v}\"")),
                }
            }
        }
    }
    let truncation = if modes.is_empty() {
        None
    } else {
        match TruncationPolicy::new(per_mode, total) {
            Ok(t) => Some(t),
            Err(e) => {
                issues.push(ConfigIssue {
                    line: truncation_section.map(|s| s.line),
                    message: e.to_string(),
                });
                None
            }
        }
    };

    // Sweep.
    let default_ports = drive.as_ref().map(|(_, d, _)| vec![d.target_mode.clone()]).unwrap_or_default();
    let mut sweep = SweepSpec::default_for(ScanVariable::Detuning, default_ports.clone());
    if let Some(section) = sweep_section {
        let mut r = Reader { section, issues: &mut issues };
        if let Some((line, v)) = r.raw("variable", false) {
            match v.as_str() {
                "detuning" => {}
                "phase" => sweep = SweepSpec::default_for(ScanVariable::Phase, default_ports.clone()),
                other => r.issue(line, format!("sweep variable must be \"detuning\" or \"phase\", got \"{other}\"")),
            }
        }
        let start = r.real("start", false);
        let stop = r.real("stop", false);
        if let Some((_, v)) = start {
            sweep.start = v;
        }
        if let Some((_, v)) = stop {
            sweep.stop = v;
        }
        if let Some((line, p)) = r.integer("points") {
            if p == 0 {
                r.issue(line, "points must be >= 1".into());
            } else {
                sweep.points = p as usize;
            }
        }
        if sweep.points > 1 && !(sweep.start < sweep.stop) {
            let line = stop.or(start).map_or(section.line, |v| v.0);
            r.issue(line, format!("sweep start {} must be below stop {}", sweep.start, sweep.stop));
        }
        if let Some((line, v)) = r.raw("drive_ports", false) {
            let ports: Vec<String> = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            if ports.is_empty() {
                r.issue(line, "drive_ports is empty; list at least one mode".into());
            }
            for p in &ports {
                if !declared(p) {
                    r.issue(line, format!("drive port \"{p}\" is not a declared mode"));
                }
            }
            sweep.drive_ports = ports;
        }
    }

    if !issues.is_empty() {
        issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        return Err(Error::ConfigDocument(issues));
    }
    let (_, drive, _) = drive.expect("checked above");
    let network = NetworkModel::new(
        modes.into_iter().map(|(_, m)| m).collect(),
        couplings.into_iter().map(|(_, _, c)| c).collect(),
        drive,
        truncation.expect("checked above"),
    )
    .map_err(|e| Error::ConfigDocument(vec![ConfigIssue { line: None, message: e.to_string() }]))?;
    if let Err(e) = check_sweep_against(&network, &sweep) {
        let line = sweep_section.map(|s| s.line);
        return Err(Error::ConfigDocument(vec![ConfigIssue { line, message: e.to_string() }]));
    }
    Ok(ParsedConfig { network, sweep, notes })
}

/// Writes a real exactly: as a multiple of π when that is exact and short,
/// otherwise in shortest round-trip decimal form.
fn format_real(x: f64, prefer_pi: bool) -> String {
    if prefer_pi && x != 0.0 {
        let c = x / PI;
        let text = format!("{c}");
        if text.len() <= 6 && text.parse::<f64>().ok().map(|c| c * PI) == Some(x) {
            return format!("{text}pi");
        }
    }
    format!("{x}")
}

/// Serializes a network and sweep to a document that parses back equal.
pub fn emit_config(network: &NetworkModel, sweep: &SweepSpec) -> String {
    let mut out = String::new();
    for m in network.modes() {
        let _ = writeln!(out, "[mode]\nlabel = {}", m.label);
        if m.omega != 0.0 {
            let _ = writeln!(out, "omega = {}", format_real(m.omega, false));
        }
        let _ = writeln!(out, "kerr = {}\ngamma = {}\n", format_real(m.kerr_u, false), format_real(m.gamma, false));
    }
    for c in network.couplings() {
        let _ = writeln!(
            out,
            "[coupling]\nfrom = {}\nto = {}\ng = {}\nphase = {}\n",
            c.from_mode,
            c.to_mode,
            format_real(c.strength, false),
            format_real(c.phase, true)
        );
    }
    let d = network.drive();
    let _ = writeln!(
        out,
        "[drive]\ntarget = {}\nepsilon = {}\ndetuning = {}\n",
        d.target_mode,
        format_real(d.epsilon, false),
        format_real(d.detuning, false)
    );
    let t = network.truncation();
    let caps = t.per_mode_caps();
    let caps_text = if caps.iter().all(|&c| c == caps[0]) {
        caps[0].to_string()
    } else {
        caps.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")
    };
    let total = t.total_cap().map_or("none".to_string(), |c| c.to_string());
    let _ = writeln!(out, "[truncation]\nper_mode_cap = {caps_text}\ntotal_cap = {total}\n");
    let pi = sweep.variable == ScanVariable::Phase;
    let _ = writeln!(
        out,
        "[sweep]\nvariable = {}\nstart = {}\nstop = {}\npoints = {}\ndrive_ports = {}",
        sweep.variable.name(),
        format_real(sweep.start, pi),
        format_real(sweep.stop, pi),
        sweep.points,
        sweep.drive_ports.join(", ")
    );
    out
}

/// Scan variable and drive ports used when a preset is run directly.
pub fn preset_sweep(name: &str) -> Result<SweepSpec> {
    let ports = |p: &[&str]| p.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    Ok(match name {
        "fig2_asym_molecule" | "fig5_reservoir" | "fig8_fourmode_asym" | "fig9_fourmode_sym" => {
            SweepSpec::default_for(ScanVariable::Detuning, ports(&["a", "b"]))
        }
        "fig4_cyclic3" | "fig6_sym_molecule" => SweepSpec::default_for(ScanVariable::Phase, ports(&["a", "b"])),
        "fig7_circulator" => SweepSpec::default_for(ScanVariable::Phase, ports(&["a", "b", "c"])),
        other => {
            model::preset(other)?;
            unreachable!("preset() rejects unknown names")
        }
    })
}

/// A preset together with its default sweep.
pub fn preset_config(name: &str) -> Result<(NetworkModel, SweepSpec)> {
    Ok((model::preset(name)?, preset_sweep(name)?))
}
