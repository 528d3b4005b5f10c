//! Exact unitary time evolution of state vectors under sparse Hamiltonians,
//! with a dense eigendecomposition backend and a Krylov (Lanczos) backend,
//! plus extraction of the per-cavity species observables.
//!
//! The two backends are independent numerical paths; they are cross-validated
//! against each other in the test suites.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{FockError, SparseOperator};
use crate::models::{ModelError, ModelSpec, Species, StateVector};

type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    #[error("Hamiltonian fails the Hermiticity precheck: max |H - H^+| = {error:.3e} (NonHermitian)")]
    NonHermitian { error: f64 },
    #[error("Krylov propagation cannot meet the local error tolerance {tolerance:.3e} at dimension {krylov_dim}: step {step:.3e} still estimates {estimate:.3e} (ConvergenceFailure)")]
    ConvergenceFailure { step: f64, estimate: f64, tolerance: f64, krylov_dim: usize },
    #[error("sample times must be finite, non-negative and strictly increasing")]
    InvalidTimes,
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Propagation backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Eigendecomposition of the dense Hermitian matrix; exact at every
    /// sample time, preferred for small dimensions.
    Dense,
    /// Lanczos approximation of the matrix exponential action with adaptive
    /// sub-stepping.
    Krylov,
}

/// Settings for [`evolve`] and [`expm_multiply`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub method: Method,
    /// Largest Krylov sub-step attempted, in `1/g13` units.
    pub time_step: f64,
    /// Krylov subspace dimension.
    pub krylov_dim: usize,
    /// Target local error per accepted sub-step.
    pub tolerance: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { method: Method::Dense, time_step: 1.0, krylov_dim: 30, tolerance: 1e-10 }
    }
}

impl PropagatorConfig {
    pub fn krylov() -> Self {
        Self { method: Method::Krylov, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        if !(self.time_step > 0.0) || self.krylov_dim < 2 || !(self.tolerance > 0.0) {
            return Err(EvolveError::InvalidTimes);
        }
        Ok(())
    }
}

/// Sampled observable records along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    /// One record per time, keyed by observable name.
    pub records: Vec<BTreeMap<String, f64>>,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if self.records.iter().any(|r| !r.contains_key(name)) {
            return None;
        }
        Some(self.records.iter().map(|r| r[name]).collect())
    }

    pub fn names(&self) -> Vec<String> {
        self.records
            .first()
            .map(|r| r.keys().cloned().collect())
            .unwrap_or_default()
    }
}

/// Number fluctuations `<n^2> - <n>^2` from the two sampled moments.
pub fn fluctuation(n: &[f64], n_sq: &[f64]) -> Vec<f64> {
    n.iter().zip(n_sq).map(|(&m, &m2)| m2 - m * m).collect()
}

fn densify(op: &SparseOperator) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(op.dim(), op.dim(), C64::new(0.0, 0.0));
    for (r, c, v) in op.entries() {
        m[(r, c)] += v;
    }
    m
}

/// Dense Hermitian eigendecomposition `(eigenvalues, eigenvectors)`.
pub fn dense_eigen(op: &SparseOperator) -> (DVector<f64>, DMatrix<C64>) {
    let eig = densify(op).symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

fn hermiticity_precheck(h: &SparseOperator) -> Result<(), EvolveError> {
    let err = h.hermiticity_error();
    if err > 1e-12 * h.max_abs().max(1.0) {
        return Err(EvolveError::NonHermitian { error: err });
    }
    Ok(())
}

/// Evolves `psi0` under `exp(-i H t)` and records `<psi(t)|O|psi(t)>` for
/// every named observable at each requested time.
pub fn evolve(
    h: &SparseOperator,
    psi0: &StateVector,
    times: &[f64],
    observables: &[(String, SparseOperator)],
    config: &PropagatorConfig,
) -> Result<TimeSeries, EvolveError> {
    config.validate()?;
    hermiticity_precheck(h)?;
    if psi0.dim() != h.dim() {
        return Err(FockError::DimMismatch { left: h.dim(), right: psi0.dim() }.into());
    }
    for (_, op) in observables {
        if op.dim() != h.dim() {
            return Err(FockError::DimMismatch { left: h.dim(), right: op.dim() }.into());
        }
    }
    if times.is_empty()
        || times.iter().any(|t| !t.is_finite() || *t < 0.0)
        || times.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(EvolveError::InvalidTimes);
    }

    let mut records = Vec::with_capacity(times.len());
    let mut final_norm = 1.0;
    match config.method {
        Method::Dense => {
            let (vals, vecs) = dense_eigen(h);
            let coeffs = vecs.adjoint() * DVector::from_column_slice(&psi0.amplitudes);
            for &t in times {
                let phased = DVector::from_iterator(
                    vals.len(),
                    vals.iter().zip(coeffs.iter()).map(|(&l, c)| {
                        c * C64::new(0.0, -l * t).exp()
                    }),
                );
                let psi_t = &vecs * phased;
                let psi = StateVector { amplitudes: psi_t.as_slice().to_vec() };
                records.push(record_observables(&psi, observables)?);
                final_norm = psi.norm();
            }
        }
        Method::Krylov => {
            let mut psi = psi0.amplitudes.clone();
            let mut cursor = 0.0;
            let span = *times.last().unwrap();
            for &t in times {
                krylov_advance(h, &mut psi, t - cursor, span.max(1.0), config)?;
                cursor = t;
                let sv = StateVector { amplitudes: psi.clone() };
                records.push(record_observables(&sv, observables)?);
                final_norm = sv.norm();
            }
        }
    }
    if (final_norm - 1.0).abs() > 1e-8 * psi0.norm().max(1.0) {
        return Err(EvolveError::ConvergenceFailure {
            step: 0.0,
            estimate: (final_norm - 1.0).abs(),
            tolerance: 1e-8,
            krylov_dim: config.krylov_dim,
        });
    }
    Ok(TimeSeries { times: times.to_vec(), records })
}

fn record_observables(
    psi: &StateVector,
    observables: &[(String, SparseOperator)],
) -> Result<BTreeMap<String, f64>, EvolveError> {
    let mut record = BTreeMap::new();
    for (name, op) in observables {
        let v = psi.expectation(op).map_err(EvolveError::Model)?;
        record.insert(name.clone(), v.re);
    }
    Ok(record)
}

/// Applies `exp(-i H t)` to a vector with the configured backend.
pub fn expm_multiply(
    h: &SparseOperator,
    psi: &[C64],
    t: f64,
    config: &PropagatorConfig,
) -> Result<Vec<C64>, EvolveError> {
    config.validate()?;
    hermiticity_precheck(h)?;
    if psi.len() != h.dim() {
        return Err(FockError::DimMismatch { left: h.dim(), right: psi.len() }.into());
    }
    match config.method {
        Method::Dense => {
            let (vals, vecs) = dense_eigen(h);
            let coeffs = vecs.adjoint() * DVector::from_column_slice(psi);
            let phased = DVector::from_iterator(
                vals.len(),
                vals.iter()
                    .zip(coeffs.iter())
                    .map(|(&l, c)| c * C64::new(0.0, -l * t).exp()),
            );
            Ok((&vecs * phased).as_slice().to_vec())
        }
        Method::Krylov => {
            let mut out = psi.to_vec();
            krylov_advance(h, &mut out, t, t.abs().max(1.0), config)?;
            Ok(out)
        }
    }
}

/// Advances `psi` by `exp(-i H dt_total)` with adaptive Lanczos sub-steps.
fn krylov_advance(
    h: &SparseOperator,
    psi: &mut Vec<C64>,
    dt_total: f64,
    _span: f64,
    config: &PropagatorConfig,
) -> Result<(), EvolveError> {
    if dt_total == 0.0 {
        return Ok(());
    }
    let sign = dt_total.signum();
    let mut remaining = dt_total.abs();
    let mut dt = config.time_step.min(remaining);
    let dt_floor = remaining.max(1.0) * 1e-14;
    while remaining > 0.0 {
        dt = dt.min(remaining);
        let (candidate, err) = lanczos_step(h, psi, sign * dt, config.krylov_dim);
        if err <= config.tolerance || dt <= dt_floor {
            if err > config.tolerance {
                return Err(EvolveError::ConvergenceFailure {
                    step: dt,
                    estimate: err,
                    tolerance: config.tolerance,
                    krylov_dim: config.krylov_dim,
                });
            }
            *psi = candidate;
            remaining -= dt;
            // grow cautiously after an accepted step
            if err < 0.1 * config.tolerance {
                dt = (dt * 1.5).min(config.time_step);
            }
        } else {
            dt *= 0.5;
        }
    }
    Ok(())
}

/// One Lanczos approximation of `exp(-i H dt) psi` with full
/// reorthogonalization; returns the candidate and a local error estimate.
fn lanczos_step(h: &SparseOperator, psi: &[C64], dt: f64, m: usize) -> (Vec<C64>, f64) {
    let dim = h.dim();
    let beta0 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if beta0 == 0.0 {
        return (psi.to_vec(), 0.0);
    }
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m);
    basis.push(psi.iter().map(|a| a / beta0).collect());
    let mut alphas: Vec<f64> = Vec::with_capacity(m);
    let mut betas: Vec<f64> = Vec::with_capacity(m);
    let mut next_beta = 0.0;
    for j in 0..m {
        let mut w = h.apply(&basis[j]);
        let alpha = basis[j]
            .iter()
            .zip(&w)
            .map(|(v, x)| (v.conj() * x).re)
            .sum::<f64>();
        alphas.push(alpha);
        // two-pass full reorthogonalization keeps the basis numerically
        // orthonormal over long runs
        for _ in 0..2 {
            for v in &basis {
                let overlap: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= overlap * vi;
                }
            }
        }
        let beta = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if j + 1 == m || beta < 1e-13 {
            next_beta = beta;
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|a| a / beta).collect());
    }
    let k = alphas.len();
    // exp(-i dt T) e1 through the real symmetric tridiagonal eigenproblem
    let mut t_mat = DMatrix::<f64>::zeros(k, k);
    for (i, &a) in alphas.iter().enumerate() {
        t_mat[(i, i)] = a;
    }
    for (i, &b) in betas.iter().enumerate() {
        t_mat[(i, i + 1)] = b;
        t_mat[(i + 1, i)] = b;
    }
    let eig = t_mat.symmetric_eigen();
    let mut w_small = vec![C64::new(0.0, 0.0); k];
    for col in 0..k {
        let phase = C64::new(0.0, -eig.eigenvalues[col] * dt).exp();
        let weight = eig.eigenvectors[(0, col)];
        for (row, w) in w_small.iter_mut().enumerate() {
            *w += eig.eigenvectors[(row, col)] * phase * weight;
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (j, coeff) in w_small.iter().enumerate() {
        let c = coeff * beta0;
        for (o, v) in out.iter_mut().zip(&basis[j]) {
            *o += c * v;
        }
    }
    let err = next_beta * dt.abs() * w_small.last().map(|w| w.norm()).unwrap_or(0.0) * beta0;
    (out, err)
}

/// The four per-cavity species observables: occupation numbers and their
/// squares (the fluctuation precursors).
pub fn observables_bc(
    spec: &ModelSpec,
    site: usize,
) -> Result<Vec<(String, SparseOperator)>, ModelError> {
    let n_b = spec.species_number_op(Species::B, site)?;
    let n_c = spec.species_number_op(Species::C, site)?;
    let n_b_sq = n_b.compose(&n_b)?;
    let n_c_sq = n_c.compose(&n_c)?;
    Ok(vec![
        ("n_b".to_string(), n_b),
        ("n_c".to_string(), n_c),
        ("n_b_sq".to_string(), n_b_sq),
        ("n_c_sq".to_string(), n_c_sq),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SparseOperator;
    use crate::models::{
        EffectiveModelSpec, LatticeSpec, ModelSpec, Species, StateVector,
    };
    use crate::params::EffectiveParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn zero_effective() -> EffectiveParams {
        EffectiveParams {
            mu_b: 0.0,
            mu_c: 0.0,
            u_b: 0.0,
            u_c: 0.0,
            u_bc: 0.0,
            j_bb: 0.0,
            j_cc: 0.0,
            j_bc: 0.0,
            eps_b: 0.0,
            eps_c: 0.0,
            eps_bc: 0.0,
            pair_conv: 0.0,
            pair_conv_active: false,
        }
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize, nnz_per_row: usize) -> SparseOperator {
        let mut triplets = Vec::new();
        for i in 0..dim as u32 {
            triplets.push((i, i, c(rng.gen_range(-1.0..1.0), 0.0)));
            for _ in 0..nnz_per_row {
                let j = rng.gen_range(0..dim as u32);
                if j == i {
                    continue;
                }
                let v = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                triplets.push((i, j, v));
                triplets.push((j, i, v.conj()));
            }
        }
        SparseOperator::from_triplets(dim, triplets)
    }

    fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateVector {
        StateVector {
            amplitudes: (0..dim)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        }
        .normalized()
    }

    #[test]
    fn zero_hamiltonian_freezes_observables() {
        let dim = 6;
        let h = SparseOperator::zero(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_state(&mut rng, dim);
        let obs = vec![("n".to_string(), SparseOperator::from_diagonal(&[0., 1., 2., 3., 4., 5.]))];
        for config in [PropagatorConfig::default(), PropagatorConfig::krylov()] {
            let series = evolve(&h, &psi, &[0.5, 1.0, 7.0], &obs, &config).unwrap();
            let col = series.column("n").unwrap();
            assert!((col[0] - col[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn two_site_hopping_rabi_oscillation() {
        let j = 0.2;
        let mut params = zero_effective();
        params.j_bb = j;
        let spec = EffectiveModelSpec {
            params,
            lattice: LatticeSpec::chain(2),
            max_particles: 1,
            include_eq6: false,
            include_pair_conversion: false,
        };
        let model = ModelSpec::Effective(spec.clone());
        let h = model.hamiltonian().unwrap();
        let psi0 = model.prepare_state(&[(Species::B, 0)]).unwrap();
        let obs = vec![(
            "n_b0".to_string(),
            model.species_number_op(Species::B, 0).unwrap(),
        )];
        let times: Vec<f64> = (1..40).map(|k| k as f64 * 0.37).collect();
        for config in [PropagatorConfig::default(), PropagatorConfig::krylov()] {
            let series = evolve(&h, &psi0, &times, &obs, &config).unwrap();
            let col = series.column("n_b0").unwrap();
            for (t, v) in times.iter().zip(col) {
                let expect = (j * t).cos().powi(2);
                assert!((v - expect).abs() < 1e-9, "t={t}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn dense_and_krylov_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..3 {
            let dim = 200;
            let h = random_hermitian(&mut rng, dim, 4);
            let psi = random_state(&mut rng, dim);
            let obs: Vec<(String, SparseOperator)> = (0..3)
                .map(|k| (format!("o{k}"), random_hermitian(&mut rng, dim, 2)))
                .collect();
            let times = [0.3, 1.1, 2.9];
            let dense = evolve(&h, &psi, &times, &obs, &PropagatorConfig::default()).unwrap();
            let krylov = evolve(&h, &psi, &times, &obs, &PropagatorConfig::krylov()).unwrap();
            for (rd, rk) in dense.records.iter().zip(&krylov.records) {
                for (name, vd) in rd {
                    assert!(
                        (vd - rk[name]).abs() <= 1e-8,
                        "{name}: dense {vd} krylov {}",
                        rk[name]
                    );
                }
            }
        }
    }

    #[test]
    fn evolution_composes_in_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dim = 80;
        let h = random_hermitian(&mut rng, dim, 3);
        let psi = random_state(&mut rng, dim);
        for config in [PropagatorConfig::default(), PropagatorConfig::krylov()] {
            let direct = expm_multiply(&h, &psi.amplitudes, 2.0, &config).unwrap();
            let half = expm_multiply(&h, &psi.amplitudes, 0.8, &config).unwrap();
            let stitched = expm_multiply(&h, &half, 1.2, &config).unwrap();
            let fidelity: C64 = direct
                .iter()
                .zip(&stitched)
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!((fidelity.norm() - 1.0).abs() < 1e-9, "fidelity {}", fidelity.norm());
            let dist: f64 = direct
                .iter()
                .zip(&stitched)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(dist < 1e-8, "distance {dist}");
        }
    }

    #[test]
    fn norm_and_energy_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dim = 120;
        let h = random_hermitian(&mut rng, dim, 4);
        let psi = random_state(&mut rng, dim);
        let idn = SparseOperator::identity(dim);
        let obs = vec![("norm_sq".to_string(), idn), ("energy".to_string(), h.clone())];
        let times: Vec<f64> = (1..=30).map(|k| k as f64).collect();
        let mut config = PropagatorConfig::krylov();
        config.tolerance = 1e-12;
        let series = evolve(&h, &psi, &times, &obs, &config).unwrap();
        let norms = series.column("norm_sq").unwrap();
        let energies = series.column("energy").unwrap();
        let e0 = psi.expectation(&h).unwrap().re;
        for (n, e) in norms.iter().zip(energies) {
            assert!((n - 1.0).abs() < 1e-8);
            assert!((e - e0).abs() < 1e-8 * h.max_abs().max(1.0));
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let h = SparseOperator::from_triplets(2, vec![(0, 1, c(1.0, 0.0))]);
        let psi = StateVector::basis_state(2, 0);
        let err = evolve(&h, &psi, &[1.0], &[], &PropagatorConfig::default()).unwrap_err();
        assert!(matches!(err, EvolveError::NonHermitian { .. }));
    }

    #[test]
    fn impossible_tolerance_reports_convergence_failure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(&mut rng, 60, 4).scale(c(1e6, 0.0));
        let psi = random_state(&mut rng, 60);
        let mut config = PropagatorConfig::krylov();
        config.krylov_dim = 2;
        config.tolerance = 1e-300;
        let err = evolve(&h, &psi, &[1.0], &[], &config).unwrap_err();
        assert!(matches!(err, EvolveError::ConvergenceFailure { .. }), "{err:?}");
    }

    #[test]
    fn invalid_times_rejected() {
        let h = SparseOperator::zero(2);
        let psi = StateVector::basis_state(2, 0);
        for times in [vec![1.0, 0.5], vec![-1.0], vec![]] {
            let err = evolve(&h, &psi, &times, &[], &PropagatorConfig::default()).unwrap_err();
            assert!(matches!(err, EvolveError::InvalidTimes));
        }
    }

    #[test]
    fn species_observables_on_fock_and_superposition_states() {
        let spec = EffectiveModelSpec {
            params: zero_effective(),
            lattice: LatticeSpec::chain(1),
            max_particles: 2,
            include_eq6: false,
            include_pair_conversion: false,
        };
        let model = ModelSpec::Effective(spec.clone());
        let obs = observables_bc(&model, 0).unwrap();
        assert_eq!(obs.len(), 4);
        // Fock state |n_b = 1>: N_b = 1, F_b = 0
        let fock = model.prepare_state(&[(Species::B, 0)]).unwrap();
        let nb = fock.expectation(&obs[0].1).unwrap().re;
        let nb2 = fock.expectation(&obs[2].1).unwrap().re;
        assert!((nb - 1.0).abs() < 1e-14);
        assert!((nb2 - nb * nb).abs() < 1e-14);
        // (|0> + |1>)/sqrt(2) in n_b: N_b = 0.5, F_b = 0.25
        let space = spec.mode_space().unwrap();
        let i0 = space.rank(&crate::fock::BasisState::new(vec![0, 0])).unwrap();
        let i1 = space.rank(&crate::fock::BasisState::new(vec![1, 0])).unwrap();
        let mut sup = StateVector::zero(space.dim());
        sup.amplitudes[i0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        sup.amplitudes[i1] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let nb = sup.expectation(&obs[0].1).unwrap().re;
        let nb2 = sup.expectation(&obs[2].1).unwrap().re;
        assert!((nb - 0.5).abs() < 1e-14);
        assert!((nb2 - nb * nb - 0.25).abs() < 1e-14);
        // vacuum: all four vanish
        let vac = model.prepare_state(&[]).unwrap();
        for (_, op) in &obs {
            assert!(vac.expectation(op).unwrap().re.abs() < 1e-15);
        }
        let f = fluctuation(&[0.5], &[0.5]);
        assert!((f[0] - 0.25).abs() < 1e-15);
    }
}
