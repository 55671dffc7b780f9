//! Lindblad generator, steady-state solve, time evolution and a weak-drive
//! perturbative oracle.
//!
//! Density matrices are vectorized by stacking columns: `vec(ρ)[i + D·j] = ρ_ij`,
//! so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{self, FockBasis, SparseOperator, TruncationPolicy};
use crate::model::{build_hamiltonian, DriveSpec, NetworkModel};

pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
pub const POSITIVITY_TOLERANCE: f64 = -1e-8;
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Step-halving discrepancy allowed per checked RK4 step.
pub const STEP_TOLERANCE: f64 = 1e-8;
/// Largest generator for which a dense SVD is attempted to estimate the kernel.
const KERNEL_ESTIMATE_MAX_DIM: usize = 2500;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A dissipation channel `rate · D[operator]`.
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub label: String,
    pub rate: f64,
    pub operator: SparseOperator,
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    hilbert_dimension: usize,
    generator: SparseOperator,
    decay_channels: Vec<(String, f64)>,
    basis: Arc<FockBasis>,
    drive: DriveSpec,
    mode_labels: Vec<String>,
}

impl Liouvillian {
    /// Assembles `-i[H, ·] + Σ rate·D[L]` for arbitrary jump operators.
    pub fn from_parts(
        hamiltonian: &SparseOperator,
        channels: &[JumpChannel],
        basis: Arc<FockBasis>,
        drive: DriveSpec,
        mode_labels: Vec<String>,
    ) -> Result<Self> {
        let d = basis.dimension();
        if hamiltonian.dim() != d {
            return Err(Error::Internal(format!(
                "Hamiltonian has dimension {} but the basis has {d}",
                hamiltonian.dim()
            )));
        }
        let id = SparseOperator::identity(d);
        let minus_i = Complex64::new(0.0, -1.0);
        let mut generator = id
            .kron(hamiltonian)
            .add(&hamiltonian.transpose().kron(&id).scale(-ONE))?
            .scale(minus_i);
        for ch in channels {
            if ch.operator.dim() != d {
                return Err(Error::Internal(format!(
                    "jump operator \"{}\" has dimension {} but the basis has {d}",
                    ch.label,
                    ch.operator.dim()
                )));
            }
            if !(ch.rate >= 0.0 && ch.rate.is_finite()) {
                return Err(Error::Internal(format!("channel \"{}\" has rate {}", ch.label, ch.rate)));
            }
            let l = &ch.operator;
            let ldl = l.adjoint().mul(l)?;
            let rate = Complex64::new(ch.rate, 0.0);
            let half = Complex64::new(-0.5 * ch.rate, 0.0);
            generator = generator
                .add(&l.conj().kron(l).scale(rate))?
                .add(&id.kron(&ldl).scale(half))?
                .add(&ldl.transpose().kron(&id).scale(half))?;
        }
        Ok(Self {
            hilbert_dimension: d,
            generator,
            decay_channels: channels.iter().map(|c| (c.label.clone(), c.rate)).collect(),
            basis,
            drive,
            mode_labels,
        })
    }

    pub fn hilbert_dimension(&self) -> usize {
        self.hilbert_dimension
    }

    pub fn generator(&self) -> &SparseOperator {
        &self.generator
    }

    pub fn decay_channels(&self) -> &[(String, f64)] {
        &self.decay_channels
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn drive(&self) -> &DriveSpec {
        &self.drive
    }

    pub fn mode_labels(&self) -> &[String] {
        &self.mode_labels
    }

    /// Largest entry of `vec(1)ᵀ · generator`, zero for an exact Lindblad form.
    pub fn trace_defect(&self) -> f64 {
        let d = self.hilbert_dimension;
        let mut row = vec![ZERO; d * d];
        for (r, c, v) in self.generator.entries() {
            if r % (d + 1) == 0 {
                row[c] += v;
            }
        }
        row.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Standard generator for a network: each mode decays at its own rate.
pub fn build_liouvillian(
    hamiltonian: &SparseOperator,
    network: &NetworkModel,
    basis: &FockBasis,
) -> Result<Liouvillian> {
    if basis.mode_count() != network.modes().len() {
        return Err(Error::Internal(format!(
            "basis has {} modes but the network has {}",
            basis.mode_count(),
            network.modes().len()
        )));
    }
    let channels = network
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
    Liouvillian::from_parts(
        hamiltonian,
        &channels,
        Arc::new(basis.clone()),
        network.drive().clone(),
        network.modes().iter().map(|m| m.label.clone()).collect(),
    )
}

/// A `D × D` density matrix stored column-stacked.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_vectorized(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Internal(format!(
                "vectorized state has length {} but dimension {dim} needs {}",
                data.len(),
                dim * dim
            )));
        }
        Ok(Self { dim, data })
    }

    /// `|k⟩⟨k|`.
    pub fn projector(dim: usize, k: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        data[k + dim * k] = ONE;
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectorized(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row + self.dim * col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let m = Mat::<c64>::from_fn(self.dim, self.dim, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        });
        let values = m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Solver {
                message: format!("eigenvalue solve failed: {e:?}"),
                kernel_dimension: None,
            })?;
        Ok(values.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// `tr(O ρ)`.
    pub fn expectation(&self, op: &SparseOperator) -> Result<Complex64> {
        if op.dim() != self.dim {
            return Err(Error::Internal("operator and state dimensions differ".into()));
        }
        Ok(op.entries().map(|(r, c, v)| v * self.get(c, r)).sum())
    }

    /// `Σ_k f(state_k) ρ_kk` for a function of occupation numbers.
    pub fn diagonal_expectation(&self, basis: &FockBasis, f: impl Fn(&[u32]) -> f64) -> f64 {
        basis
            .states()
            .iter()
            .enumerate()
            .map(|(k, s)| f(s) * self.get(k, k).re)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverInfo {
    pub method: String,
    pub iterations: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    rho: DensityMatrix,
    residual: f64,
    solver_info: SolverInfo,
    basis: Arc<FockBasis>,
    drive: DriveSpec,
    mode_labels: Vec<String>,
}

impl SteadyState {
    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    /// `‖L vec(ρ)‖₂` with the unconstrained generator.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn solver_info(&self) -> &SolverInfo {
        &self.solver_info
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// The drive the state was solved under.
    pub fn drive(&self) -> &DriveSpec {
        &self.drive
    }

    pub fn mode_labels(&self) -> &[String] {
        &self.mode_labels
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.mode_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Usage(format!("state has no mode \"{label}\"")))
    }

    /// `⟨o†o⟩`.
    pub fn mean_photon(&self, label: &str) -> Result<f64> {
        let k = self.mode_index(label)?;
        Ok(self.rho.diagonal_expectation(&self.basis, |s| f64::from(s[k])))
    }

    /// `⟨o†o†oo⟩`.
    pub fn pair_moment(&self, label: &str) -> Result<f64> {
        let k = self.mode_index(label)?;
        Ok(self.rho.diagonal_expectation(&self.basis, |s| {
            let n = f64::from(s[k]);
            n * (n - 1.0)
        }))
    }

    /// Checks trace, Hermiticity, positivity and residual bounds.
    pub fn check_physical(&self) -> Result<()> {
        let fail = |message: String| Err(Error::Solver { message, kernel_dimension: None });
        let trace = self.rho.trace();
        if (trace - ONE).norm() > TRACE_TOLERANCE {
            return fail(format!("trace {trace} differs from 1"));
        }
        let herm = self.rho.hermiticity_error();
        if herm > HERMITICITY_TOLERANCE {
            return fail(format!("density matrix not Hermitian (error {herm:e})"));
        }
        let min_eig = self.rho.min_eigenvalue()?;
        if min_eig < POSITIVITY_TOLERANCE {
            return fail(format!("density matrix has eigenvalue {min_eig:e}"));
        }
        if !(self.residual <= RESIDUAL_TOLERANCE) {
            return fail(format!("residual {:e} above {RESIDUAL_TOLERANCE:e}", self.residual));
        }
        Ok(())
    }
}

fn kernel_dimension(generator: &SparseOperator) -> Option<usize> {
    let n = generator.dim();
    if n > KERNEL_ESTIMATE_MAX_DIM {
        return None;
    }
    let mut dense = Mat::<c64>::zeros(n, n);
    for (r, c, v) in generator.entries() {
        dense[(r, c)] = v;
    }
    let sv = dense.singular_values().ok()?;
    let largest = sv.first().copied().unwrap_or(0.0);
    Some(sv.iter().filter(|&&s| s <= 1e-10 * largest.max(1.0)).count())
}

/// Solves `L vec(ρ) = 0` with the first equation replaced by `tr ρ = 1`.
///
/// Unknowns are rescaled as `ρ_ij = σ^{N_i+N_j} ρ'_ij` with `σ = min(ε, 1)`
/// and `N` the photon number, so that every unknown is of order one in the
/// weak-drive expansion. Without this, tiny two-photon populations at
/// isolated ports drown in round-off from the vacuum entries.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let start = Instant::now();
    let d = l.hilbert_dimension;
    let n = d * d;
    let eps = l.drive.epsilon;
    let sigma = if eps > 0.0 { eps.min(1.0) } else { 1.0 };
    let grade_scale: Vec<f64> = (0..d)
        .map(|k| sigma.powi(l.basis.total_photons(k) as i32))
        .collect();
    let scale = |v: usize| grade_scale[v % d] * grade_scale[v / d];
    let mut triplets: Vec<Triplet<usize, usize, c64>> = l
        .generator
        .entries()
        .filter(|(r, _, _)| *r != 0)
        .map(|(r, c, v)| Triplet::new(r, c, v * (scale(c) / scale(r))))
        .collect();
    triplets.extend((0..d).map(|k| Triplet::new(0, k + d * k, ONE * scale(k + d * k))));
    let singular = |message: String| Error::Solver {
        message,
        kernel_dimension: kernel_dimension(&l.generator),
    };
    let matrix = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Internal(format!("sparse assembly failed: {e:?}")))?;
    let lu = matrix
        .sp_lu()
        .map_err(|e| singular(format!("constrained system is singular: {e:?}")))?;
    let rhs = Col::<c64>::from_fn(n, |k| if k == 0 { ONE } else { ZERO });
    let x = lu.solve(&rhs);
    let data: Vec<Complex64> = (0..n).map(|k| x[k] * scale(k)).collect();
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(singular("constrained system is singular (non-finite solution)".into()));
    }
    let residual = l
        .generator
        .apply(&data)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(singular(format!("residual {residual:e} above {RESIDUAL_TOLERANCE:e}")));
    }
    let ss = SteadyState {
        rho: DensityMatrix::from_vectorized(d, data)?,
        residual,
        solver_info: SolverInfo {
            method: "sparse LU (trace-constrained)".into(),
            iterations: 1,
            wall_time: start.elapsed(),
        },
        basis: Arc::clone(&l.basis),
        drive: l.drive.clone(),
        mode_labels: l.mode_labels.clone(),
    };
    ss.check_physical()?;
    Ok(ss)
}

/// Basis, Hamiltonian, generator and steady state for one network.
pub fn solve_network(network: &NetworkModel) -> Result<SteadyState> {
    let basis = fockspace::build_basis(network.modes().len(), network.truncation())?;
    let h = build_hamiltonian(network, &basis)?;
    steady_state(&build_liouvillian(&h, network, &basis)?)
}

fn rk4_step(g: &SparseOperator, x: &[Complex64], h: f64, scratch: &mut [Vec<Complex64>; 5]) -> Vec<Complex64> {
    let n = x.len();
    let [k1, k2, k3, k4, tmp] = scratch;
    let hc = Complex64::new(h, 0.0);
    g.matvec_into(x, k1);
    for i in 0..n {
        tmp[i] = x[i] + k1[i] * (hc * 0.5);
    }
    g.matvec_into(tmp, k2);
    for i in 0..n {
        tmp[i] = x[i] + k2[i] * (hc * 0.5);
    }
    g.matvec_into(tmp, k3);
    for i in 0..n {
        tmp[i] = x[i] + k3[i] * hc;
    }
    g.matvec_into(tmp, k4);
    (0..n)
        .map(|i| x[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (hc / 6.0))
        .collect()
}

/// Steps between step-halving and Hermiticity checks.
const CHECK_INTERVAL: usize = 50;

/// Fixed-step RK4 integration of `dρ/dt = L ρ` from `rho0` to `t_final`.
///
/// Every [`CHECK_INTERVAL`] steps the step is repeated as two half steps; a
/// disagreement above [`STEP_TOLERANCE`] aborts with a request for a smaller
/// step. The same steps are checked for Hermiticity, and the trace is checked
/// at the end.
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    let d = l.hilbert_dimension;
    if rho0.dim() != d {
        return Err(Error::Internal("initial state dimension differs from the generator".into()));
    }
    if !(dt > 0.0 && t_final >= 0.0 && dt.is_finite() && t_final.is_finite()) {
        return Err(Error::Integrator(format!("need dt > 0 and t_final >= 0, got dt={dt}, t_final={t_final}")));
    }
    let steps = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    let trace0 = rho0.trace();
    let mut x = rho0.vectorized().to_vec();
    if steps == 0 {
        return Ok(rho0.clone());
    }
    let h = t_final / steps as f64;
    let n = x.len();
    let mut scratch: [Vec<Complex64>; 5] = std::array::from_fn(|_| vec![ZERO; n]);
    for step in 0..steps {
        let full = rk4_step(&l.generator, &x, h, &mut scratch);
        if step % CHECK_INTERVAL == 0 || step + 1 == steps {
            let half = rk4_step(&l.generator, &x, 0.5 * h, &mut scratch);
            let twice = rk4_step(&l.generator, &half, 0.5 * h, &mut scratch);
            let err = full.iter().zip(&twice).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if err > STEP_TOLERANCE {
                return Err(Error::Integrator(format!(
                    "step-halving estimate {err:e} at t={:.4} exceeds {STEP_TOLERANCE:e}; use a smaller dt than {h}",
                    step as f64 * h
                )));
            }
            let state = DensityMatrix { dim: d, data: twice };
            let herm = state.hermiticity_error();
            if herm > HERMITICITY_TOLERANCE {
                return Err(Error::Integrator(format!(
                    "state lost Hermiticity (error {herm:e}) at t={:.4}",
                    step as f64 * h
                )));
            }
            x = state.data;
        } else {
            x = full;
        }
    }
    let out = DensityMatrix { dim: d, data: x };
    let drift = (out.trace() - trace0).norm();
    if drift > STEP_TOLERANCE {
        return Err(Error::Integrator(format!("trace drifted by {drift:e}")));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Weak-drive oracle

/// Perturbative order (in the drive amplitude) of the density-matrix expansion.
pub const ORACLE_ORDER: u32 = 4;

/// Weak-drive steady state computed order by order in `ε`.
///
/// `amplitudes` are the pure-state amplitudes of the non-Hermitian
/// Schrödinger problem (vacuum normalized to 1). Photon moments come from
/// the density-matrix expansion, which also keeps the jump terms that refill
/// lower photon numbers and dominate at isolated ports.
#[derive(Debug, Clone)]
pub struct AmplitudeSolution {
    pub amplitudes: BTreeMap<Vec<u32>, Complex64>,
    pub drive_order: u32,
    pub epsilon: f64,
    pub drive_target: String,
    pub mode_labels: Vec<String>,
    pub gammas: Vec<f64>,
    /// `⟨o†o⟩` through order `ε⁴`.
    pub mean_photon: Vec<f64>,
    /// `⟨o†o†oo⟩` at leading order `ε⁴`.
    pub pair_moment: Vec<f64>,
    pub warnings: Vec<String>,
}

impl AmplitudeSolution {
    fn index(&self, label: &str) -> Result<usize> {
        self.mode_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Usage(format!("no mode \"{label}\"")))
    }

    pub fn amplitude(&self, occupation: &[u32]) -> Complex64 {
        self.amplitudes.get(occupation).copied().unwrap_or(ZERO)
    }

    pub fn mean_photon(&self, label: &str) -> Result<f64> {
        Ok(self.mean_photon[self.index(label)?])
    }

    pub fn pair_moment(&self, label: &str) -> Result<f64> {
        Ok(self.pair_moment[self.index(label)?])
    }

    pub fn g2(&self, label: &str) -> Result<f64> {
        let k = self.index(label)?;
        let n = self.mean_photon[k];
        if n < crate::observables::POPULATION_FLOOR {
            return Err(Error::UndefinedCorrelation {
                population: n,
                threshold: crate::observables::POPULATION_FLOOR,
            });
        }
        Ok(self.pair_moment[k] / (n * n))
    }

    pub fn transmission(&self, input: &str, output: &str) -> Result<f64> {
        if input != self.drive_target {
            return Err(Error::Usage(format!(
                "oracle was solved with the drive on \"{}\", not \"{input}\"",
                self.drive_target
            )));
        }
        let (i, o) = (self.index(input)?, self.index(output)?);
        Ok(self.gammas[i] * self.gammas[o] * self.mean_photon[o] / (self.epsilon * self.epsilon))
    }

    /// `2|c_2|² / |c_1|⁴` from the pure-state amplitudes alone.
    pub fn pure_state_g2(&self, label: &str) -> Result<f64> {
        let k = self.index(label)?;
        let mut one = vec![0u32; self.mode_labels.len()];
        one[k] = 1;
        let mut two = vec![0u32; self.mode_labels.len()];
        two[k] = 2;
        let c1 = self.amplitude(&one).norm_sqr();
        let c2 = self.amplitude(&two).norm_sqr();
        Ok(2.0 * c2 / (c1 * c1))
    }
}

/// Row-major dense square matrix helpers for the oracle.
fn dense(op: &SparseOperator) -> Vec<Complex64> {
    op.to_dense()
}

fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for l in 0..n {
            let ail = a[i * n + l];
            if ail == ZERO {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += ail * b[l * n + j];
            }
        }
    }
    out
}

/// Gaussian elimination with partial pivoting; an exactly zero pivot is an error.
fn solve_dense(mut a: Vec<Complex64>, mut b: Vec<Complex64>, n: usize) -> Result<Vec<Complex64>> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
            .expect("non-empty range");
        if a[pivot * n + col] == ZERO {
            return Err(Error::Oracle(
                "resonant amplitude equations are singular (zero determinant)".into(),
            ));
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f == ZERO {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[r * n + j] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for j in col + 1..n {
            s -= a[col * n + j] * b[j];
        }
        b[col] = s / a[col * n + col];
    }
    Ok(b)
}

/// Solves the weak-drive hierarchy through order `ε⁴`.
pub fn amplitude_oracle(network: &NetworkModel) -> Result<AmplitudeSolution> {
    let mode_count = network.modes().len();
    let epsilon = network.drive().epsilon;
    if !(epsilon > 0.0) {
        return Err(Error::Oracle("the oracle needs a nonzero drive".into()));
    }
    let min_gamma = network.modes().iter().map(|m| m.gamma).fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    if epsilon > 0.1 * min_gamma {
        warnings.push(format!(
            "drive {epsilon} is not weak against the smallest decay rate {min_gamma}"
        ));
    }

    let policy = TruncationPolicy::uniform(mode_count, 2, Some(2))?;
    let reduced = network.clone().with_truncation(policy.clone())?.with_epsilon(0.0)?;
    let basis = fockspace::build_basis(mode_count, &policy)?;
    let d = basis.dimension();
    let target = network.require_mode(&network.drive().target_mode)?;

    let mut k = dense(&build_hamiltonian(&reduced, &basis)?);
    for (idx, state) in basis.states().iter().enumerate() {
        let loss: f64 = network
            .modes()
            .iter()
            .zip(state)
            .map(|(m, &n)| m.gamma * f64::from(n))
            .sum();
        k[idx * d + idx] -= I * (0.5 * loss);
    }
    let lowering: Vec<Vec<Complex64>> = (0..mode_count)
        .map(|m| Ok(dense(&fockspace::annihilation(&basis, m)?)))
        .collect::<Result<_>>()?;
    let raising: Vec<Vec<Complex64>> = (0..mode_count)
        .map(|m| Ok(dense(&fockspace::creation(&basis, m)?)))
        .collect::<Result<_>>()?;
    let v: Vec<Complex64> = lowering[target]
        .iter()
        .zip(&raising[target])
        .map(|(a, b)| a + b)
        .collect();

    // Index ranges of each photon-number grade.
    let grade = |g: u32| -> std::ops::Range<usize> {
        let idx: Vec<usize> = (0..d).filter(|&i| basis.total_photons(i) == g).collect();
        idx[0]..idx[idx.len() - 1] + 1
    };
    let grades = [grade(0), grade(1), grade(2)];

    let jump = |rho: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![ZERO; d * d];
        for (m, mode) in network.modes().iter().enumerate() {
            let t = matmul(&matmul(&lowering[m], rho, d), &raising[m], d);
            for (o, x) in out.iter_mut().zip(t) {
                *o += x * mode.gamma;
            }
        }
        out
    };

    // ρ^{(k)} for k = 0..=4, each a dense D×D matrix in row-major order.
    let mut orders: Vec<Vec<Complex64>> = Vec::with_capacity(ORACLE_ORDER as usize + 1);
    let mut rho0 = vec![ZERO; d * d];
    rho0[0] = ONE;
    orders.push(rho0);
    for order in 1..=ORACLE_ORDER as usize {
        let prev = &orders[order - 1];
        let vr = matmul(&v, prev, d);
        let rv = matmul(prev, &v, d);
        let drive: Vec<Complex64> = vr.iter().zip(&rv).map(|(a, b)| -I * (a - b)).collect();
        let mut cur = vec![ZERO; d * d];
        let top = order.min(4);
        for s in (1..=top).rev().filter(|s| (order - s) % 2 == 0) {
            let jumped = jump(&cur);
            for n in 0..=s.min(2) {
                let m = s - n;
                if m > 2 {
                    continue;
                }
                let (rn, rm) = (grades[n].clone(), grades[m].clone());
                let (p, q) = (rn.len(), rm.len());
                let mut a = vec![ZERO; p * q * p * q];
                let mut rhs = vec![ZERO; p * q];
                for i in 0..p {
                    for j in 0..q {
                        let row = i * q + j;
                        let (gi, gj) = (rn.start + i, rm.start + j);
                        rhs[row] = -I * (drive[gi * d + gj] + jumped[gi * d + gj]);
                        for l in 0..p {
                            a[row * p * q + l * q + j] += k[gi * d + rn.start + l];
                        }
                        for l in 0..q {
                            a[row * p * q + i * q + l] -= k[gj * d + rm.start + l].conj();
                        }
                    }
                }
                let x = solve_dense(a, rhs, p * q)?;
                for i in 0..p {
                    for j in 0..q {
                        cur[(rn.start + i) * d + rm.start + j] = x[i * q + j];
                    }
                }
            }
        }
        if order % 2 == 0 {
            let excited: Complex64 = (1..d).map(|i| cur[i * d + i]).sum();
            cur[0] = -excited;
        }
        orders.push(cur);
    }

    let moment = |rho: &[Complex64], f: &dyn Fn(f64) -> f64, m: usize| -> f64 {
        basis
            .states()
            .iter()
            .enumerate()
            .map(|(i, s)| f(f64::from(s[m])) * rho[i * d + i].re)
            .sum()
    };
    let e2 = epsilon * epsilon;
    let mean_photon = (0..mode_count)
        .map(|m| e2 * moment(&orders[2], &|n| n, m) + e2 * e2 * moment(&orders[4], &|n| n, m))
        .collect();
    let pair_moment = (0..mode_count)
        .map(|m| e2 * e2 * moment(&orders[4], &|n| n * (n - 1.0), m))
        .collect();

    // Pure-state amplitudes: K_1 c_1 = -ε a†|0⟩, K_2 c_2 = -ε a† c_1.
    let mut psi = vec![ZERO; d];
    psi[0] = ONE;
    for g in 1..=2usize {
        let range = grades[g].clone();
        let src: Vec<Complex64> = (0..d)
            .map(|i| (0..d).map(|j| raising[target][i * d + j] * psi[j]).sum::<Complex64>())
            .collect();
        let n = range.len();
        let a: Vec<Complex64> = range
            .clone()
            .flat_map(|i| range.clone().map(move |j| (i, j)))
            .map(|(i, j)| k[i * d + j])
            .collect();
        let b: Vec<Complex64> = range.clone().map(|i| -src[i] * epsilon).collect();
        let x = solve_dense(a, b, n)?;
        for (off, i) in range.enumerate() {
            psi[i] = x[off];
        }
    }
    let amplitudes = basis
        .states()
        .iter()
        .zip(&psi)
        .map(|(s, &c)| (s.clone(), c))
        .collect();

    Ok(AmplitudeSolution {
        amplitudes,
        drive_order: ORACLE_ORDER,
        epsilon,
        drive_target: network.drive().target_mode.clone(),
        mode_labels: network.modes().iter().map(|m| m.label.clone()).collect(),
        gammas: network.modes().iter().map(|m| m.gamma).collect(),
        mean_photon,
        pair_moment,
        warnings,
    })
}
