//! Truncated multimode Fock bases and sparse operators acting on them.
//!
//! States are enumerated in graded order: ascending total photon number, and
//! within one grade in descending lexicographic order of the occupation
//! vector, so `(2,0)` precedes `(1,1)` precedes `(0,2)`. The order is fixed so
//! that operator matrices and everything derived from them are reproducible
//! bit for bit.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entries with magnitude below this are dropped when an operator is assembled.
pub const DROP_TOLERANCE: f64 = 1e-15;

/// Which occupation vectors are kept in a truncated basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationPolicy {
    per_mode_caps: Vec<u32>,
    total_cap: Option<u32>,
}

impl TruncationPolicy {
    pub fn new(per_mode_caps: Vec<u32>, total_cap: Option<u32>) -> Result<Self> {
        if per_mode_caps.is_empty() {
            return Err(Error::Config("truncation needs at least one mode".into()));
        }
        if let Some(pos) = per_mode_caps.iter().position(|&c| c == 0) {
            return Err(Error::Config(format!(
                "per-mode cap of mode {pos} is 0; every mode needs at least |0> and |1>"
            )));
        }
        if let Some(total) = total_cap {
            let sum: u32 = per_mode_caps.iter().sum();
            if total == 0 {
                return Err(Error::Config("total photon cap must be at least 1".into()));
            }
            if total > sum {
                return Err(Error::Config(format!(
                    "total photon cap {total} exceeds the sum of per-mode caps {sum}"
                )));
            }
        }
        Ok(Self {
            per_mode_caps,
            total_cap,
        })
    }

    /// Same cap on every mode plus a total-excitation cap.
    pub fn uniform(mode_count: usize, per_mode_cap: u32, total_cap: Option<u32>) -> Result<Self> {
        Self::new(vec![per_mode_cap; mode_count], total_cap)
    }

    pub fn per_mode_caps(&self) -> &[u32] {
        &self.per_mode_caps
    }

    pub fn total_cap(&self) -> Option<u32> {
        self.total_cap
    }

    pub fn mode_count(&self) -> usize {
        self.per_mode_caps.len()
    }

    /// Largest total photon number that any admitted state can carry.
    pub fn max_total(&self) -> u32 {
        let sum = self.per_mode_caps.iter().sum();
        self.total_cap.map_or(sum, |t| t.min(sum))
    }

    pub fn admits(&self, occupation: &[u32]) -> bool {
        occupation.len() == self.per_mode_caps.len()
            && occupation
                .iter()
                .zip(&self.per_mode_caps)
                .all(|(n, cap)| n <= cap)
            && occupation.iter().sum::<u32>() <= self.max_total()
    }
}

/// Enumerated multimode number states.
#[derive(Debug, Clone)]
pub struct FockBasis {
    policy: TruncationPolicy,
    states: Vec<Vec<u32>>,
    index_of: HashMap<Vec<u32>, usize>,
}

impl FockBasis {
    pub fn mode_count(&self) -> usize {
        self.policy.mode_count()
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &[u32] {
        &self.states[index]
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index_of.get(occupation).copied()
    }

    pub fn total_photons(&self, index: usize) -> u32 {
        self.states[index].iter().sum()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count() {
            return Err(Error::Config(format!(
                "mode index {mode} out of range for a {}-mode basis",
                self.mode_count()
            )));
        }
        Ok(())
    }
}

/// Enumerates every occupation vector admitted by `policy`.
pub fn build_basis(mode_count: usize, policy: &TruncationPolicy) -> Result<FockBasis> {
    if mode_count == 0 {
        return Err(Error::Config("a basis needs at least one mode".into()));
    }
    if policy.mode_count() != mode_count {
        return Err(Error::Config(format!(
            "truncation policy describes {} modes, basis requested for {mode_count}",
            policy.mode_count()
        )));
    }
    let mut states = Vec::new();
    for grade in 0..=policy.max_total() {
        let mut current = vec![0; mode_count];
        push_grade(policy.per_mode_caps(), 0, grade, &mut current, &mut states);
    }
    let index_of = states
        .iter()
        .enumerate()
        .map(|(k, s)| (s.clone(), k))
        .collect();
    Ok(FockBasis {
        policy: policy.clone(),
        states,
        index_of,
    })
}

// Fills modes `mode..` with exactly `remaining` photons, highest occupation first.
fn push_grade(
    caps: &[u32],
    mode: usize,
    remaining: u32,
    current: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if mode + 1 == caps.len() {
        if remaining <= caps[mode] {
            current[mode] = remaining;
            out.push(current.clone());
        }
        return;
    }
    for n in (0..=remaining.min(caps[mode])).rev() {
        current[mode] = n;
        push_grade(caps, mode + 1, remaining - n, current, out);
    }
    current[mode] = 0;
}

/// Square complex sparse matrix in compressed-row form.
#[derive(Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseOperator")
            .field("dim", &self.dim)
            .field("nnz", &self.nnz())
            .finish()
    }
}

impl SparseOperator {
    /// Assembles from coordinate entries. Duplicates are summed and entries
    /// below [`DROP_TOLERANCE`] in magnitude are dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut entries: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::Internal(format!(
                "entry ({r}, {c}) outside a {dim}x{dim} operator"
            )));
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0; dim + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if (r2, c2) != (r, c) {
                    break;
                }
                v += v2;
                iter.next();
            }
            if v.norm() >= DROP_TOLERANCE {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(k, &v)| (k, k, v)))
            .expect("diagonal entries are always in range")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[span.clone()].binary_search(&col) {
            Ok(k) => self.values[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    fn map_entries<F>(&self, f: F) -> Self
    where
        F: Fn(usize, usize, Complex64) -> (usize, usize, Complex64),
    {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| f(r, c, v)))
            .expect("permuted entries stay in range")
    }

    pub fn adjoint(&self) -> Self {
        self.map_entries(|r, c, v| (c, r, v.conj()))
    }

    pub fn transpose(&self) -> Self {
        self.map_entries(|r, c, v| (c, r, v))
    }

    pub fn conj(&self) -> Self {
        self.map_entries(|r, c, v| (r, c, v.conj()))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map_entries(|r, c, v| (r, c, v * factor))
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Internal(format!(
                "operator dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Self::from_triplets(self.dim, self.entries().chain(other.entries()))
    }

    /// Sparse matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = vec![zero; self.dim];
        let mut marker = vec![usize::MAX; self.dim];
        let mut touched = Vec::new();
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = zero;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for c in touched.drain(..) {
                triplets.push((r, c, acc[c]));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    /// Kronecker product with `self` as the outer (slow) factor.
    pub fn kron(&self, inner: &Self) -> Self {
        let n = inner.dim;
        let triplets = self.entries().flat_map(|(r, c, a)| {
            inner
                .entries()
                .map(move |(r2, c2, b)| (r * n + r2, c * n + c2, a * b))
        });
        Self::from_triplets(self.dim * n, triplets).expect("kronecker indices stay in range")
    }

    /// `y = self * x`.
    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *out = self.col_idx[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    /// Largest entry-wise deviation between `self` and its adjoint.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut dense = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for (r, c, v) in self.entries() {
            dense[r * self.dim + c] = v;
        }
        dense
    }
}

/// Lowering operator of `mode`. Transitions leaving the basis are omitted.
pub fn annihilation(basis: &FockBasis, mode: usize) -> Result<SparseOperator> {
    basis.check_mode(mode)?;
    let mut lowered = vec![0; basis.mode_count()];
    let mut triplets = Vec::new();
    for (col, state) in basis.states().iter().enumerate() {
        let n = state[mode];
        if n == 0 {
            continue;
        }
        lowered.copy_from_slice(state);
        lowered[mode] -= 1;
        if let Some(row) = basis.index_of(&lowered) {
            triplets.push((row, col, Complex64::new(f64::from(n).sqrt(), 0.0)));
        }
    }
    SparseOperator::from_triplets(basis.dimension(), triplets)
}

pub fn creation(basis: &FockBasis, mode: usize) -> Result<SparseOperator> {
    Ok(annihilation(basis, mode)?.adjoint())
}

fn diagonal_in_occupation(
    basis: &FockBasis,
    mode: usize,
    f: impl Fn(f64) -> f64,
) -> Result<SparseOperator> {
    basis.check_mode(mode)?;
    let diag: Vec<Complex64> = basis
        .states()
        .iter()
        .map(|s| Complex64::new(f(f64::from(s[mode])), 0.0))
        .collect();
    Ok(SparseOperator::diagonal(&diag))
}

/// `a†a` for `mode`, built directly on the diagonal.
pub fn number(basis: &FockBasis, mode: usize) -> Result<SparseOperator> {
    diagonal_in_occupation(basis, mode, |n| n)
}

/// `a†a†aa = n(n-1)` for `mode`.
pub fn kerr_term(basis: &FockBasis, mode: usize) -> Result<SparseOperator> {
    diagonal_in_occupation(basis, mode, |n| n * (n - 1.0))
}

/// Total photon number over all modes.
pub fn total_number(basis: &FockBasis) -> SparseOperator {
    let diag: Vec<Complex64> = (0..basis.dimension())
        .map(|k| Complex64::new(f64::from(basis.total_photons(k)), 0.0))
        .collect();
    SparseOperator::diagonal(&diag)
}

/// One operator in a product, optionally daggered.
#[derive(Debug, Clone, Copy)]
pub struct Factor<'a> {
    pub op: &'a SparseOperator,
    pub adjoint: bool,
}

impl<'a> Factor<'a> {
    pub fn plain(op: &'a SparseOperator) -> Self {
        Self { op, adjoint: false }
    }

    pub fn dagger(op: &'a SparseOperator) -> Self {
        Self { op, adjoint: true }
    }
}

/// `coefficient * f1 * f2 * ...`; an empty factor list is the identity.
#[derive(Debug, Clone)]
pub struct Term<'a> {
    pub coefficient: Complex64,
    pub factors: Vec<Factor<'a>>,
}

impl<'a> Term<'a> {
    pub fn new(coefficient: Complex64, factors: Vec<Factor<'a>>) -> Self {
        Self {
            coefficient,
            factors,
        }
    }
}

/// Sum of scaled operator products, all on a space of dimension `dim`.
pub fn compose(dim: usize, terms: &[Term<'_>]) -> Result<SparseOperator> {
    let mut triplets = Vec::new();
    for term in terms {
        if term.coefficient == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut product = SparseOperator::identity(dim);
        for factor in &term.factors {
            if factor.op.dim() != dim {
                return Err(Error::Internal(format!(
                    "factor of dimension {} in a composition of dimension {dim}",
                    factor.op.dim()
                )));
            }
            product = if factor.adjoint {
                product.mul(&factor.op.adjoint())?
            } else {
                product.mul(factor.op)?
            };
        }
        triplets.extend(
            product
                .entries()
                .map(|(r, c, v)| (r, c, v * term.coefficient)),
        );
    }
    SparseOperator::from_triplets(dim, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_mode() -> FockBasis {
        let policy = TruncationPolicy::new(vec![2, 2], Some(2)).unwrap();
        build_basis(2, &policy).unwrap()
    }

    #[test]
    fn two_mode_basis_order() {
        let basis = two_mode();
        let expected: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(basis.states(), expected.as_slice());
        for (k, s) in basis.states().iter().enumerate() {
            assert_eq!(basis.index_of(s), Some(k));
        }
    }

    #[test]
    fn basis_dimensions() {
        let p = TruncationPolicy::uniform(4, 3, Some(3)).unwrap();
        assert_eq!(build_basis(4, &p).unwrap().dimension(), 35);
        let p = TruncationPolicy::new(vec![3], None).unwrap();
        assert_eq!(build_basis(1, &p).unwrap().dimension(), 4);
        let p = TruncationPolicy::uniform(3, 4, Some(4)).unwrap();
        assert_eq!(build_basis(3, &p).unwrap().dimension(), 35);
        // Per-mode caps below the total cap restrict each grade.
        let p = TruncationPolicy::new(vec![1, 2], None).unwrap();
        assert_eq!(build_basis(2, &p).unwrap().dimension(), 6);
    }

    #[test]
    fn invalid_policies() {
        assert!(matches!(
            TruncationPolicy::new(vec![2, 0], None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            TruncationPolicy::new(vec![2, 2], Some(0)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            TruncationPolicy::new(vec![1, 1], Some(3)),
            Err(Error::Config(_))
        ));
        let p = TruncationPolicy::uniform(2, 2, None).unwrap();
        assert!(build_basis(3, &p).is_err());
    }

    #[test]
    fn ladder_elements() {
        let basis = two_mode();
        let a = annihilation(&basis, 0).unwrap();
        let from = basis.index_of(&[2, 0]).unwrap();
        let to = basis.index_of(&[1, 0]).unwrap();
        assert!((a.get(to, from) - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        // a|0,1> = 0: the column of |0,1> is empty.
        let vac_b = basis.index_of(&[0, 1]).unwrap();
        assert!(a.entries().all(|(_, col, _)| col != vac_b));
        assert!(annihilation(&basis, 2).is_err());
        assert!(kerr_term(&basis, 5).is_err());
    }

    #[test]
    fn number_and_kerr_diagonals() {
        let p = TruncationPolicy::new(vec![3], None).unwrap();
        let basis = build_basis(1, &p).unwrap();
        let a = annihilation(&basis, 0).unwrap();
        let n = compose(
            basis.dimension(),
            &[Term::new(c(1.0, 0.0), vec![Factor::dagger(&a), Factor::plain(&a)])],
        )
        .unwrap();
        for k in 0..4 {
            assert!((n.get(k, k) - c(k as f64, 0.0)).norm() < 1e-14);
        }
        let diff = n.add(&number(&basis, 0).unwrap().scale(c(-1.0, 0.0))).unwrap();
        assert!(diff.entries().all(|(_, _, v)| v.norm() < 1e-14));
        let kerr = kerr_term(&basis, 0).unwrap();
        assert_eq!(kerr.get(3, 3), c(6.0, 0.0));

        let basis = two_mode();
        let kerr_a = kerr_term(&basis, 0).unwrap();
        let k20 = basis.index_of(&[2, 0]).unwrap();
        let k11 = basis.index_of(&[1, 1]).unwrap();
        assert_eq!(kerr_a.get(k20, k20), c(2.0, 0.0));
        assert_eq!(kerr_a.get(k11, k11), c(0.0, 0.0));
        assert_eq!(kerr_term(&basis, 1).unwrap().get(k11, k11), c(0.0, 0.0));
    }

    #[test]
    fn hopping_element() {
        let basis = two_mode();
        let a = annihilation(&basis, 0).unwrap();
        let b = annihilation(&basis, 1).unwrap();
        let j = c(0.5, 0.0);
        let h = compose(
            basis.dimension(),
            &[
                Term::new(j, vec![Factor::plain(&a), Factor::dagger(&b)]),
                Term::new(j, vec![Factor::dagger(&a), Factor::plain(&b)]),
            ],
        )
        .unwrap();
        let k10 = basis.index_of(&[1, 0]).unwrap();
        let k01 = basis.index_of(&[0, 1]).unwrap();
        assert_eq!(h.get(k01, k10), j);
        assert_eq!(h.get(k10, k01), j);
    }

    #[test]
    fn zero_coefficients_give_empty_operator() {
        let basis = two_mode();
        let a = annihilation(&basis, 0).unwrap();
        let id = SparseOperator::identity(basis.dimension());
        let out = compose(
            basis.dimension(),
            &[
                Term::new(c(0.0, 0.0), vec![Factor::plain(&id)]),
                Term::new(c(0.0, 0.0), vec![Factor::plain(&a)]),
            ],
        )
        .unwrap();
        assert!(out.is_empty());
        // Cancellation below the drop threshold also leaves nothing behind.
        let out = a.add(&a.scale(c(-1.0, 0.0))).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn dimension_mismatch_is_internal_error() {
        let a = SparseOperator::identity(3);
        let b = SparseOperator::identity(4);
        assert!(matches!(a.mul(&b), Err(Error::Internal(_))));
        assert!(matches!(
            compose(3, &[Term::new(c(1.0, 0.0), vec![Factor::plain(&b)])]),
            Err(Error::Internal(_))
        ));
        assert!(SparseOperator::from_triplets(2, [(2, 0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn graded_order_and_ladder_consistency() {
        for (modes, cap, total) in [(2, 3, Some(3)), (3, 2, Some(4)), (4, 3, Some(3)), (2, 2, None)] {
            let policy = TruncationPolicy::uniform(modes, cap, total).unwrap();
            let basis = build_basis(modes, &policy).unwrap();
            let totals: Vec<u32> = (0..basis.dimension()).map(|k| basis.total_photons(k)).collect();
            assert!(totals.windows(2).all(|w| w[0] <= w[1]));
            for mode in 0..modes {
                let a = annihilation(&basis, mode).unwrap();
                let ad = creation(&basis, mode).unwrap();
                for r in 0..basis.dimension() {
                    for col in 0..basis.dimension() {
                        assert_eq!(ad.get(r, col), a.get(col, r).conj());
                    }
                }
                // [a, a†] = 1 away from the truncation boundary.
                let comm = a.mul(&ad).unwrap().add(&ad.mul(&a).unwrap().scale(c(-1.0, 0.0))).unwrap();
                let n = number(&basis, mode).unwrap();
                let max_total = policy.max_total();
                for (k, s) in basis.states().iter().enumerate() {
                    if s[mode] < cap && basis.total_photons(k) < max_total {
                        assert!((comm.get(k, k) - c(1.0, 0.0)).norm() < 1e-12, "state {s:?}");
                    }
                    assert_eq!(n.get(k, k), c(f64::from(s[mode]), 0.0));
                }
            }
        }
    }

    fn arb_operator(dim: usize) -> impl Strategy<Value = SparseOperator> {
        proptest::collection::vec(
            (0..dim, 0..dim, -2.0f64..2.0, -2.0f64..2.0),
            0..(dim * dim),
        )
        .prop_map(move |entries| {
            SparseOperator::from_triplets(
                dim,
                entries.into_iter().map(|(r, c, re, im)| (r, c, Complex64::new(re, im))),
            )
            .unwrap()
        })
    }

    fn max_diff(a: &SparseOperator, b: &SparseOperator) -> f64 {
        a.to_dense()
            .iter()
            .zip(b.to_dense())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    proptest! {
        #[test]
        fn compose_is_associative_and_adjoint_distributes(
            (a, b, cc) in (1usize..=10).prop_flat_map(|d| (arb_operator(d), arb_operator(d), arb_operator(d))),
            re in -1.0f64..1.0,
            im in -1.0f64..1.0,
        ) {
            let dim = a.dim();
            let one = Complex64::new(1.0, 0.0);
            let left = compose(dim, &[Term::new(one, vec![Factor::plain(&a.mul(&b).unwrap()), Factor::plain(&cc)])]).unwrap();
            let right = compose(dim, &[Term::new(one, vec![Factor::plain(&a), Factor::plain(&b.mul(&cc).unwrap())])]).unwrap();
            prop_assert!(max_diff(&left, &right) < 1e-11);

            // (z a b + c)† = conj(z) b† a† + c†
            let z = Complex64::new(re, im);
            let sum = compose(dim, &[
                Term::new(z, vec![Factor::plain(&a), Factor::plain(&b)]),
                Term::new(one, vec![Factor::plain(&cc)]),
            ]).unwrap();
            let expanded = compose(dim, &[
                Term::new(z.conj(), vec![Factor::dagger(&b), Factor::dagger(&a)]),
                Term::new(one, vec![Factor::dagger(&cc)]),
            ]).unwrap();
            prop_assert!(max_diff(&sum.adjoint(), &expanded) < 1e-11);
        }
    }
}
