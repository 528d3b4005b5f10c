//! Truncated multi-mode bosonic Fock spaces with a weighted total-excitation
//! constraint, bijective state ranking, and sparse operator algebra.
//!
//! A basis state is an occupation vector `(n_1, ..., n_M)`; it is admissible
//! when `sum_m w_m n_m <= K` and every per-mode cap holds. The basis is stored
//! in lexicographic order of the occupation vector, which makes ranks
//! deterministic across platforms.

use num_complex::Complex64;
use thiserror::Error;

/// Matrix elements with modulus below this are dropped on construction.
pub const AMPLITUDE_CUTOFF: f64 = 1e-15;

/// Default cap on the number of basis states a [`ModeSpace`] may enumerate.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FockError {
    #[error("basis would contain {required} states, exceeding the cap of {cap} (DimensionOverflow)")]
    DimensionOverflow { required: u128, cap: usize },
    #[error("state is not admissible in this mode space (InadmissibleState)")]
    InadmissibleState,
    #[error("index {index} out of range for basis of dimension {dim} (IndexOutOfRange)")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("operator dimensions differ: {left} vs {right} (DimMismatch)")]
    DimMismatch { left: usize, right: usize },
    #[error("invalid mode space: {0}")]
    InvalidSpace(&'static str),
}

/// Occupation-number basis state of a [`ModeSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub occupations: Vec<u32>,
}

impl BasisState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self { occupations }
    }

    pub fn occupation(&self, mode: usize) -> u32 {
        self.occupations[mode]
    }
}

/// Truncated bosonic Fock space over `M` modes with per-mode excitation
/// weights and a weighted total cap `K`.
#[derive(Debug, Clone)]
pub struct ModeSpace {
    weights: Vec<u32>,
    max_total: u32,
    caps: Option<Vec<u32>>,
    basis: Vec<BasisState>,
}

impl ModeSpace {
    /// Space with the given per-mode weights and weighted cap, no per-mode caps.
    pub fn new(weights: Vec<u32>, max_total: u32) -> Result<Self, FockError> {
        Self::with_options(weights, max_total, None, DEFAULT_STATE_CAP)
    }

    /// Space with uniform unit weights.
    pub fn uniform(n_modes: usize, max_total: u32) -> Result<Self, FockError> {
        Self::new(vec![1; n_modes], max_total)
    }

    /// Space with per-mode occupation caps in addition to the weighted cap.
    pub fn with_caps(
        weights: Vec<u32>,
        max_total: u32,
        caps: Vec<u32>,
    ) -> Result<Self, FockError> {
        Self::with_options(weights, max_total, Some(caps), DEFAULT_STATE_CAP)
    }

    /// Full constructor; `state_cap` bounds the enumerated basis size.
    pub fn with_options(
        weights: Vec<u32>,
        max_total: u32,
        caps: Option<Vec<u32>>,
        state_cap: usize,
    ) -> Result<Self, FockError> {
        if weights.is_empty() {
            return Err(FockError::InvalidSpace("a mode space needs at least one mode"));
        }
        if weights.iter().any(|&w| w == 0) {
            return Err(FockError::InvalidSpace("mode weights must be positive"));
        }
        if let Some(c) = &caps {
            if c.len() != weights.len() {
                return Err(FockError::InvalidSpace("caps length must match the number of modes"));
            }
        }
        let required = count_states(&weights, max_total, caps.as_deref());
        if required > state_cap as u128 {
            return Err(FockError::DimensionOverflow { required, cap: state_cap });
        }
        let mut basis = Vec::with_capacity(required as usize);
        let mut occ = vec![0u32; weights.len()];
        enumerate_rec(&weights, max_total, caps.as_deref(), 0, 0, &mut occ, &mut basis);
        // recursion emits lexicographic order directly; keep the sort as a guard
        debug_assert!(basis.windows(2).all(|w| w[0] < w[1]));
        Ok(Self { weights, max_total, caps, basis })
    }

    pub fn n_modes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn max_total(&self) -> u32 {
        self.max_total
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// All admissible states in lexicographic order.
    pub fn basis(&self) -> &[BasisState] {
        &self.basis
    }

    pub fn admissible(&self, occupations: &[u32]) -> bool {
        if occupations.len() != self.n_modes() {
            return false;
        }
        if let Some(caps) = &self.caps {
            if occupations.iter().zip(caps).any(|(&n, &c)| n > c) {
                return false;
            }
        }
        let total: u64 = occupations
            .iter()
            .zip(&self.weights)
            .map(|(&n, &w)| n as u64 * w as u64)
            .sum();
        total <= self.max_total as u64
    }

    /// Position of an admissible state in the lexicographic basis order.
    pub fn rank(&self, state: &BasisState) -> Result<usize, FockError> {
        if !self.admissible(&state.occupations) {
            return Err(FockError::InadmissibleState);
        }
        self.basis
            .binary_search(state)
            .map_err(|_| FockError::InadmissibleState)
    }

    /// Inverse of [`rank`](Self::rank).
    pub fn unrank(&self, index: usize) -> Result<&BasisState, FockError> {
        self.basis
            .get(index)
            .ok_or(FockError::IndexOutOfRange { index, dim: self.dim() })
    }

    /// Weighted total excitation of a basis state.
    pub fn weighted_total(&self, state: &BasisState) -> u64 {
        state
            .occupations
            .iter()
            .zip(&self.weights)
            .map(|(&n, &w)| n as u64 * w as u64)
            .sum()
    }
}

fn count_states(weights: &[u32], max_total: u32, caps: Option<&[u32]>) -> u128 {
    // memoized over (mode index, remaining weighted budget)
    let m = weights.len();
    let mut memo = vec![vec![None::<u128>; max_total as usize + 1]; m];
    fn rec(
        weights: &[u32],
        caps: Option<&[u32]>,
        mode: usize,
        budget: u32,
        memo: &mut [Vec<Option<u128>>],
    ) -> u128 {
        if mode == weights.len() {
            return 1;
        }
        if let Some(v) = memo[mode][budget as usize] {
            return v;
        }
        let w = weights[mode];
        let mut nmax = budget / w;
        if let Some(caps) = caps {
            nmax = nmax.min(caps[mode]);
        }
        let mut total: u128 = 0;
        for n in 0..=nmax {
            total += rec(weights, caps, mode + 1, budget - n * w, memo);
        }
        memo[mode][budget as usize] = Some(total);
        total
    }
    rec(weights, caps, 0, max_total, &mut memo)
}

fn enumerate_rec(
    weights: &[u32],
    max_total: u32,
    caps: Option<&[u32]>,
    mode: usize,
    used: u32,
    occ: &mut Vec<u32>,
    out: &mut Vec<BasisState>,
) {
    if mode == weights.len() {
        out.push(BasisState::new(occ.clone()));
        return;
    }
    let w = weights[mode];
    let mut nmax = (max_total - used) / w;
    if let Some(caps) = caps {
        nmax = nmax.min(caps[mode]);
    }
    for n in 0..=nmax {
        occ[mode] = n;
        enumerate_rec(weights, max_total, caps, mode + 1, used + n * w, occ, out);
    }
    occ[mode] = 0;
}

/// Raising or lowering selector for [`ladder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

/// Sparse complex operator on a fixed-dimension Hilbert space, stored CSR.
///
/// Entries with modulus below [`AMPLITUDE_CUTOFF`] are dropped on
/// construction, and duplicate `(row, col)` pairs are accumulated.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    pub fn zero(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let triplets = (0..dim as u32).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect();
        Self::from_triplets(dim, triplets)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let triplets = diag
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as u32, i as u32, Complex64::new(v, 0.0)))
            .collect();
        Self::from_triplets(diag.len(), triplets)
    }

    /// Builds from (row, col, amplitude) triplets, accumulating duplicates.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(u32, u32, Complex64)>) -> Self {
        triplets.retain(|&(r, c, _)| (r as usize) < dim && (c as usize) < dim);
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut rows = Vec::with_capacity(triplets.len());
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        // drop negligible entries after accumulation
        let mut row_ptr = vec![0usize; dim + 1];
        let mut kept_cols = Vec::with_capacity(cols.len());
        let mut kept_vals = Vec::with_capacity(vals.len());
        let mut k = 0usize;
        for row in 0..dim {
            while k < rows.len() && rows[k] as usize == row {
                if vals[k].norm() >= AMPLITUDE_CUTOFF {
                    kept_cols.push(cols[k]);
                    kept_vals.push(vals[k]);
                }
                k += 1;
            }
            row_ptr[row + 1] = kept_cols.len();
        }
        Self { dim, row_ptr, cols: kept_cols, vals: kept_vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Row slice as parallel (cols, vals).
    pub fn row(&self, i: usize) -> (&[u32], &[Complex64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let (cols, vals) = self.row(row);
        match cols.binary_search(&(col as u32)) {
            Ok(k) => vals[k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// All stored entries as (row, col, amplitude).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c as usize, v))
        })
    }

    /// Matrix-vector product `self * x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim, "vector length must match operator dimension");
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c as usize];
            }
            y[i] = acc;
        }
        y
    }

    pub fn add(&self, other: &Self) -> Result<Self, FockError> {
        if self.dim != other.dim {
            return Err(FockError::DimMismatch { left: self.dim, right: other.dim });
        }
        let mut triplets: Vec<(u32, u32, Complex64)> =
            self.entries().map(|(r, c, v)| (r as u32, c as u32, v)).collect();
        triplets.extend(other.entries().map(|(r, c, v)| (r as u32, c as u32, v)));
        Ok(Self::from_triplets(self.dim, triplets))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let triplets = self
            .entries()
            .map(|(r, c, v)| (r as u32, c as u32, v * factor))
            .collect();
        Self::from_triplets(self.dim, triplets)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let triplets = self
            .entries()
            .map(|(r, c, v)| (c as u32, r as u32, v.conj()))
            .collect();
        Self::from_triplets(self.dim, triplets)
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self, FockError> {
        if self.dim != other.dim {
            return Err(FockError::DimMismatch { left: self.dim, right: other.dim });
        }
        let mut triplets = Vec::new();
        let mut acc: Vec<(u32, Complex64)> = Vec::new();
        for i in 0..self.dim {
            acc.clear();
            let (xc, xv) = self.row(i);
            for (&k, &v) in xc.iter().zip(xv) {
                let (yc, yv) = other.row(k as usize);
                for (&j, &w) in yc.iter().zip(yv) {
                    acc.push((j, v * w));
                }
            }
            acc.sort_by_key(|&(j, _)| j);
            let mut it = acc.iter().peekable();
            while let Some(&(j, v)) = it.next() {
                let mut total = v;
                while let Some(&&(j2, v2)) = it.peek() {
                    if j2 == j {
                        total += v2;
                        it.next();
                    } else {
                        break;
                    }
                }
                triplets.push((i as u32, j, total));
            }
        }
        Ok(Self::from_triplets(self.dim, triplets))
    }

    /// `XY - YX`.
    pub fn commutator(&self, other: &Self) -> Result<Self, FockError> {
        let xy = self.compose(other)?;
        let yx = other.compose(self)?;
        xy.add(&yx.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, FockError> {
        Ok(self.add(&other.scale(Complex64::new(-1.0, 0.0)))?.max_abs())
    }

    /// Max-norm of `self - self^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint()).expect("same dimension")
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }
}

/// Bosonic ladder operator on one mode, with hard truncation at the basis
/// boundary: raising out of the admissible set produces no matrix element.
pub fn ladder(space: &ModeSpace, mode: usize, direction: Ladder) -> SparseOperator {
    assert!(mode < space.n_modes(), "mode index out of range");
    let mut triplets = Vec::with_capacity(space.dim());
    let mut target = vec![0u32; space.n_modes()];
    for (col, state) in space.basis().iter().enumerate() {
        let n = state.occupations[mode];
        target.copy_from_slice(&state.occupations);
        match direction {
            Ladder::Lower => {
                if n == 0 {
                    continue;
                }
                target[mode] = n - 1;
                let row = space
                    .rank(&BasisState::new(target.clone()))
                    .expect("lowering an admissible state stays admissible");
                triplets.push((row as u32, col as u32, Complex64::new((n as f64).sqrt(), 0.0)));
            }
            Ladder::Raise => {
                target[mode] = n + 1;
                if !space.admissible(&target) {
                    continue;
                }
                let row = space.rank(&BasisState::new(target.clone())).expect("admissible");
                triplets.push((
                    row as u32,
                    col as u32,
                    Complex64::new(((n + 1) as f64).sqrt(), 0.0),
                ));
            }
        }
    }
    SparseOperator::from_triplets(space.dim(), triplets)
}

/// Occupation-number operator of one mode (diagonal).
pub fn number_op(space: &ModeSpace, mode: usize) -> SparseOperator {
    assert!(mode < space.n_modes(), "mode index out of range");
    let diag: Vec<f64> = space
        .basis()
        .iter()
        .map(|s| s.occupations[mode] as f64)
        .collect();
    SparseOperator::from_diagonal(&diag)
}

/// Diagonal operator from an arbitrary per-state function.
pub fn diagonal_op<F: Fn(&BasisState) -> f64>(space: &ModeSpace, f: F) -> SparseOperator {
    let diag: Vec<f64> = space.basis().iter().map(f).collect();
    SparseOperator::from_diagonal(&diag)
}
