//! The two bundled numerical studies: a sweep of the effective parameters
//! over the driving strength, and the three-cavity comparison between the
//! full bosonized model and the effective two-species model.

use rayon::prelude::*;
use thiserror::Error;

use crate::evolve::{self, EvolveError, PropagatorConfig};
use crate::models::{
    EffectiveModelSpec, FullModelSpec, LatticeSpec, ModelError, ModelSpec, Species,
};
use crate::params::{
    check_validity, crossover_region, map_effective, EffectiveParams, ParamsError,
    PhysicalParams,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error("invalid sweep request: {0}")]
    Invalid(&'static str),
}

/// One sweep point. A `degenerate` row marks a driving strength where a
/// perturbative denominator vanishes exactly; the sweep continues past it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub effective: Option<EffectiveParams>,
    pub degenerate: bool,
    /// `|mu_c - mu_b| = B^2/delta`.
    pub mu_gap: f64,
    pub validity_overall: bool,
    pub tunnel_mixing_pass: bool,
}

/// Effective parameters over a driving-strength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Crossover window `(omega_low, omega_high)` where species mixing
    /// dominates the splitting, when it exists inside the grid range.
    pub crossover: Option<(f64, f64)>,
    pub threshold: f64,
}

/// Evaluates the effective-parameter map and the validity report pointwise
/// over `omega_grid`. Degenerate rows are flagged, never fatal.
pub fn sweep_omega(
    p: &PhysicalParams,
    omega_grid: &[f64],
    threshold: f64,
) -> Result<SweepResult, SweepError> {
    if omega_grid.is_empty() || omega_grid.iter().any(|&w| !(w > 0.0)) {
        return Err(SweepError::Invalid("omega grid must be positive"));
    }
    if omega_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SweepError::Invalid("omega grid must be strictly increasing"));
    }
    let rows: Vec<SweepRow> = omega_grid
        .par_iter()
        .map(|&omega| {
            let mut q = *p;
            q.omega = omega;
            let scales = crate::params::derive_scales(&q);
            let b2 = scales.b_scale * scales.b_scale;
            let report = check_validity(&q, threshold);
            let (effective, degenerate) = match map_effective(&q) {
                Ok(e) => (Some(e), false),
                Err(_) => (None, true),
            };
            SweepRow {
                omega,
                effective,
                degenerate,
                mu_gap: (b2 / q.delta).abs(),
                validity_overall: report.overall_pass,
                tunnel_mixing_pass: report
                    .condition("tunnel_mixing")
                    .map(|c| c.pass)
                    .unwrap_or(false),
            }
        })
        .collect();
    let crossover = crossover_region(p, (omega_grid[0], *omega_grid.last().unwrap())).ok();
    Ok(SweepResult { rows, crossover, threshold })
}

/// Logarithmically spaced grid, endpoints included.
pub fn log_grid(min: f64, max: f64, n_points: usize) -> Vec<f64> {
    assert!(min > 0.0 && max > min && n_points >= 2);
    let (l0, l1) = (min.ln(), max.ln());
    (0..n_points)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (n_points - 1) as f64).exp())
        .collect()
}

/// Linearly spaced grid, endpoints included.
pub fn linear_grid(min: f64, max: f64, n_points: usize) -> Vec<f64> {
    assert!(n_points >= 2);
    (0..n_points)
        .map(|k| min + (max - min) * k as f64 / (n_points - 1) as f64)
        .collect()
}

/// The four per-cavity observable tracks.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTrack {
    pub n_b: Vec<f64>,
    pub n_c: Vec<f64>,
    pub f_b: Vec<f64>,
    pub f_c: Vec<f64>,
}

/// Per-cavity full, effective, and difference tracks; the difference columns
/// are exactly `full - effective`.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityComparison {
    pub full: ObservableTrack,
    pub effective: ObservableTrack,
    pub diff: ObservableTrack,
}

/// Per-cavity maxima of `|full - effective|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxDiffs {
    pub n_b: f64,
    pub n_c: f64,
    pub f_b: f64,
    pub f_c: f64,
}

impl MaxDiffs {
    pub fn overall(&self) -> f64 {
        self.n_b.max(self.n_c).max(self.f_b).max(self.f_c)
    }
}

/// Outcome of the full-vs-effective dynamics comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub times: Vec<f64>,
    pub cavities: Vec<CavityComparison>,
    pub max_abs_diff: Vec<MaxDiffs>,
    /// Largest drift of the weighted excitation number of the full model.
    pub charge_drift_full: f64,
    /// Largest drift of the total particle number of the effective model.
    pub charge_drift_effective: f64,
    /// Whether every validity inequality passed at threshold 0.1; callers
    /// should warn on `false` but the comparison proceeds regardless.
    pub validity_overall: bool,
}

/// Builds both models from the same microscopic parameters, prepares matched
/// initial states (effective: Fock placement; full: exact polariton-rotation
/// products), evolves both, and tabulates per-cavity differences.
///
/// The truncation equals the number of placed polaritons, which both models
/// conserve. The two-photon-detuning on-site term is included whenever
/// `epsilon` is nonzero, and the pair-conversion term whenever its resonance
/// condition marks it active.
pub fn compare_full_vs_effective(
    p: &PhysicalParams,
    lattice: &LatticeSpec,
    placements: &[(Species, usize)],
    t_max: f64,
    n_samples: usize,
    config: &PropagatorConfig,
) -> Result<ComparisonResult, SweepError> {
    if n_samples < 2 || !(t_max > 0.0) {
        return Err(SweepError::Invalid("need t_max > 0 and at least two samples"));
    }
    if placements.is_empty() {
        return Err(SweepError::Invalid("place at least one polariton"));
    }
    let eff_params = map_effective(p)?;
    let validity_overall = check_validity(p, 0.1).overall_pass;
    let cap = placements.len() as u32;
    let eff_spec = EffectiveModelSpec {
        params: eff_params,
        lattice: lattice.clone(),
        max_particles: cap,
        include_eq6: p.epsilon != 0.0,
        include_pair_conversion: eff_params.pair_conv_active,
    };
    let full_spec = FullModelSpec {
        params: *p,
        lattice: lattice.clone(),
        max_excitations: cap,
    };
    let times = linear_grid(0.0, t_max, n_samples);
    let n_sites = lattice.n_sites;

    let run = |model: ModelSpec| -> Result<evolve::TimeSeries, SweepError> {
        let h = model.hamiltonian()?;
        let psi0 = model.prepare_state(placements)?;
        let mut observables = Vec::new();
        for site in 0..n_sites {
            for (name, op) in evolve::observables_bc(&model, site)? {
                observables.push((format!("{}_{}", name, site + 1), op));
            }
        }
        observables.push(("charge".to_string(), model.charge_op()?));
        Ok(evolve::evolve(&h, &psi0, &times, &observables, config)?)
    };

    let (full_series, eff_series) = rayon::join(
        || run(ModelSpec::Full(full_spec.clone())),
        || run(ModelSpec::Effective(eff_spec.clone())),
    );
    let full_series = full_series?;
    let eff_series = eff_series?;

    let track = |series: &evolve::TimeSeries, site: usize| -> ObservableTrack {
        let n_b = series.column(&format!("n_b_{}", site + 1)).expect("recorded");
        let n_c = series.column(&format!("n_c_{}", site + 1)).expect("recorded");
        let n_b_sq = series.column(&format!("n_b_sq_{}", site + 1)).expect("recorded");
        let n_c_sq = series.column(&format!("n_c_sq_{}", site + 1)).expect("recorded");
        ObservableTrack {
            f_b: evolve::fluctuation(&n_b, &n_b_sq),
            f_c: evolve::fluctuation(&n_c, &n_c_sq),
            n_b,
            n_c,
        }
    };
    let drift = |series: &evolve::TimeSeries| -> f64 {
        let q = series.column("charge").expect("recorded");
        q.iter().map(|v| (v - q[0]).abs()).fold(0.0, f64::max)
    };

    let mut cavities = Vec::with_capacity(n_sites);
    let mut max_abs_diff = Vec::with_capacity(n_sites);
    for site in 0..n_sites {
        let full = track(&full_series, site);
        let effective = track(&eff_series, site);
        let sub = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x - y).collect()
        };
        let diff = ObservableTrack {
            n_b: sub(&full.n_b, &effective.n_b),
            n_c: sub(&full.n_c, &effective.n_c),
            f_b: sub(&full.f_b, &effective.f_b),
            f_c: sub(&full.f_c, &effective.f_c),
        };
        let max_abs = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        max_abs_diff.push(MaxDiffs {
            n_b: max_abs(&diff.n_b),
            n_c: max_abs(&diff.n_c),
            f_b: max_abs(&diff.f_b),
            f_c: max_abs(&diff.f_c),
        });
        cavities.push(CavityComparison { full, effective, diff });
    }

    Ok(ComparisonResult {
        times,
        cavities,
        max_abs_diff,
        charge_drift_full: drift(&full_series),
        charge_drift_effective: drift(&eff_series),
        validity_overall,
    })
}
