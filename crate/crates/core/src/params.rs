//! Microscopic and effective model parameters, the closed-form mapping
//! between them, validity inequalities, decay rates, and the scalar solvers
//! built on top of them (interaction-to-decay optimization, crossover window).
//!
//! Every energy and rate is measured in units of the bare dipole coupling
//! `g13`; times are in units of `1/g13` and `hbar = 1`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("degenerate detuning: {denominator} vanishes, the perturbative mapping breaks down (DegenerateDetuning)")]
    DegenerateDetuning { denominator: &'static str },
    #[error("no interior maximum: the optimum over the detuning sits on a bound (NoInteriorMaximum)")]
    NoInteriorMaximum,
    #[error("no crossover: the species-mixing condition never holds inside the bracket (NoCrossover)")]
    NoCrossover,
    #[error("invalid physical parameters: {0}")]
    Invalid(&'static str),
}

/// Microscopic knobs of the atom-cavity array, in units of `g13`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Dipole coupling of the cavity mode to the 1-3 transition (the unit).
    pub g13: f64,
    /// Dipole coupling of the cavity mode to the 2-4 transition.
    pub g24: f64,
    /// Number of atoms per cavity; enters only through `g = sqrt(N) g13`.
    pub n_atoms: u64,
    /// Detuning of atomic level 3.
    pub delta: f64,
    /// Detuning of atomic level 4 (may be negative).
    pub big_delta: f64,
    /// Two-photon detuning of level 2.
    pub epsilon: f64,
    /// Rabi frequency of the driving laser (>= 0).
    pub omega: f64,
    /// Photon tunneling rate between neighboring cavities (may be negative).
    pub alpha: f64,
    /// Cavity decay rate (>= 0).
    pub kappa: f64,
    /// Spontaneous emission rate of level 3 (>= 0).
    pub gamma3: f64,
    /// Spontaneous emission rate of level 4 (>= 0).
    pub gamma4: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        let all = [
            self.g13, self.g24, self.delta, self.big_delta, self.epsilon, self.omega,
            self.alpha, self.kappa, self.gamma3, self.gamma4,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ParamsError::Invalid("all parameters must be finite"));
        }
        if self.g13 <= 0.0 {
            return Err(ParamsError::Invalid("g13 must be positive"));
        }
        if self.n_atoms == 0 {
            return Err(ParamsError::Invalid("n_atoms must be at least 1"));
        }
        if self.omega < 0.0 {
            return Err(ParamsError::Invalid("omega must be non-negative"));
        }
        if self.kappa < 0.0 || self.gamma3 < 0.0 || self.gamma4 < 0.0 {
            return Err(ParamsError::Invalid("decay rates must be non-negative"));
        }
        Ok(())
    }

    /// Parameters of the bundled three-cavity dynamics benchmark:
    /// `g24 = g13`, `N = 1000`, `Omega = 1.5 sqrt(N) g13`, `delta = 1e4 g13`,
    /// `Delta = -46 g13`, `alpha = -2.2e-3 g13`, lossless.
    pub fn dynamics_benchmark() -> Self {
        Self {
            g13: 1.0,
            g24: 1.0,
            n_atoms: 1000,
            delta: 1.0e4,
            big_delta: -46.0,
            epsilon: 0.0,
            omega: 1.5 * 1000f64.sqrt(),
            alpha: -2.2e-3,
            kappa: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
        }
    }

    /// Parameters of the bundled driving-strength sweep benchmark:
    /// `g24 = g13`, `N = 1000`, `Delta = -g13/20`, `delta = 2000 sqrt(N) g13`,
    /// `alpha = g13/10`; `omega` is set to the collective coupling `g`.
    pub fn sweep_benchmark() -> Self {
        Self {
            g13: 1.0,
            g24: 1.0,
            n_atoms: 1000,
            delta: 2000.0 * 1000f64.sqrt(),
            big_delta: -0.05,
            epsilon: 0.0,
            omega: 1000f64.sqrt(),
            alpha: 0.1,
            kappa: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
        }
    }
}

/// Collective coupling scales and polariton frequencies derived from
/// [`PhysicalParams`] in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Collective coupling `g = sqrt(N) g13`.
    pub g: f64,
    /// `B = sqrt(g^2 + Omega^2)`.
    pub b_scale: f64,
    /// `A = sqrt(4 B^2 + delta^2)`.
    pub a_scale: f64,
    /// Dark-polariton frequency, exactly zero.
    pub mu_0: f64,
    /// Upper bright-polariton frequency `(delta + A)/2`.
    pub mu_plus: f64,
    /// Lower bright-polariton frequency `(delta - A)/2`.
    pub mu_minus: f64,
    /// First order in `1/delta`: `delta + B^2/delta`.
    pub mu_plus_approx: f64,
    /// First order in `1/delta`: `-B^2/delta`.
    pub mu_minus_approx: f64,
}

/// Closed-form evaluation of the collective scales; total on valid input.
pub fn derive_scales(p: &PhysicalParams) -> DerivedScales {
    let g = (p.n_atoms as f64).sqrt() * p.g13;
    let b2 = g * g + p.omega * p.omega;
    let b = b2.sqrt();
    let a = (4.0 * b2 + p.delta * p.delta).sqrt();
    DerivedScales {
        g,
        b_scale: b,
        a_scale: a,
        mu_0: 0.0,
        mu_plus: (p.delta + a) / 2.0,
        mu_minus: (p.delta - a) / 2.0,
        mu_plus_approx: p.delta + b2 / p.delta,
        mu_minus_approx: -b2 / p.delta,
    }
}

/// Coefficients of the effective two-species lattice Hamiltonian.
///
/// The tunneling amplitudes are the ones the photon hopping induces on each
/// species: `b` carries photonic weight `Omega/B` and `c` carries `g/B`, so
/// `j_bb = alpha Omega^2/B^2`, `j_cc = alpha g^2/B^2` and the species-swapping
/// `j_bc = alpha g Omega/B^2` (which enters the Hamiltonian with a minus
/// sign). They satisfy `j_bb * j_cc = j_bc^2` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// Energy of the `b` species, exactly zero in the rotating frame.
    pub mu_b: f64,
    /// Energy of the `c` species, `-B^2/delta`.
    pub mu_c: f64,
    /// On-site `b`-`b` interaction.
    pub u_b: f64,
    /// On-site `c`-`c` interaction.
    pub u_c: f64,
    /// On-site cross-species interaction.
    pub u_bc: f64,
    /// Tunneling amplitude of the `b` species.
    pub j_bb: f64,
    /// Tunneling amplitude of the `c` species.
    pub j_cc: f64,
    /// Species-converting tunneling amplitude.
    pub j_bc: f64,
    /// Two-photon-detuning on-site coefficient for `n_b`.
    pub eps_b: f64,
    /// Two-photon-detuning on-site coefficient for `n_c`.
    pub eps_c: f64,
    /// Two-photon-detuning on-site `b`-`c` conversion coefficient.
    pub eps_bc: f64,
    /// Coefficient of the on-site pair-conversion term
    /// `pair_conv (c^+ c^+ b b + b^+ b^+ c c)`.
    pub pair_conv: f64,
    /// Whether the pair-conversion term is resonant enough to matter:
    /// `|g24 g Omega/B^2| > |B^2/delta|`.
    pub pair_conv_active: bool,
}

/// Closed-form map from microscopic to effective parameters.
///
/// Fails with [`ParamsError::DegenerateDetuning`] when any of the
/// perturbative denominators `delta`, `Delta`, `Delta + B^2/delta`,
/// `Delta + 2 B^2/delta` vanishes exactly.
pub fn map_effective(p: &PhysicalParams) -> Result<EffectiveParams, ParamsError> {
    let scales = derive_scales(p);
    let g = scales.g;
    let b2 = scales.b_scale * scales.b_scale;
    if p.delta == 0.0 {
        return Err(ParamsError::DegenerateDetuning { denominator: "delta" });
    }
    if p.big_delta == 0.0 {
        return Err(ParamsError::DegenerateDetuning { denominator: "big_delta" });
    }
    let shift = b2 / p.delta;
    let den_c = p.big_delta + 2.0 * shift;
    let den_bc = p.big_delta + shift;
    if den_c == 0.0 {
        return Err(ParamsError::DegenerateDetuning { denominator: "big_delta + 2 B^2/delta" });
    }
    if den_bc == 0.0 {
        return Err(ParamsError::DegenerateDetuning { denominator: "big_delta + B^2/delta" });
    }
    let g24_2 = p.g24 * p.g24;
    let om2 = p.omega * p.omega;
    let g2 = g * g;
    let b4 = b2 * b2;
    let kerr = g24_2 * g2 * om2 / b4;
    let u_b = -kerr / p.big_delta;
    let u_c = -kerr / den_c;
    let u_bc = -g24_2 * (g2 - om2) * (g2 - om2) / b4 / den_bc;
    let pair_conv = -kerr / p.big_delta;
    let pair_conv_active = (p.g24 * g * p.omega / b2).abs() > shift.abs();
    Ok(EffectiveParams {
        mu_b: 0.0,
        mu_c: -shift,
        u_b,
        u_c,
        u_bc,
        j_bb: p.alpha * om2 / b2,
        j_cc: p.alpha * g2 / b2,
        j_bc: p.alpha * g * p.omega / b2,
        eps_b: p.epsilon * g2 / b2,
        eps_c: p.epsilon * om2 / b2,
        eps_bc: p.epsilon * g * p.omega / b2,
        pair_conv,
        pair_conv_active,
    })
}

/// One "much less than" condition of the effective-model derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityCondition {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; infinite when the right-hand scale vanishes.
    pub ratio: f64,
    pub pass: bool,
}

/// Full set of derivation inequalities with their raw ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub conditions: Vec<ValidityCondition>,
    pub overall_pass: bool,
    pub threshold: f64,
}

impl ValidityReport {
    pub fn condition(&self, name: &str) -> Option<&ValidityCondition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Evaluates every approximation inequality as `lhs << rhs`, declaring a
/// condition failed when `lhs/rhs >= threshold`. Failures are reported,
/// never thrown.
///
/// Panics if `threshold` is outside `(0, 1)`.
pub fn check_validity(p: &PhysicalParams, threshold: f64) -> ValidityReport {
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "validity threshold must lie strictly between 0 and 1"
    );
    let s = derive_scales(p);
    let g = s.g;
    let b2 = s.b_scale * s.b_scale;
    let mu_c = -b2 / p.delta;
    let gap = (s.mu_plus - 0.0).abs().min((s.mu_plus - mu_c).abs());
    let splitting = (b2 / p.delta).abs();
    let level4_coupling = (p.g24 * g * p.omega / b2).abs();
    let level4_pair = (p.g24 * (g * g - p.omega * p.omega) / b2).abs();
    let j_bc = (p.alpha * g * p.omega / b2).abs();

    let raw = [
        ("rwa_g24", p.g24.abs(), gap),
        ("rwa_eps", p.epsilon.abs(), gap),
        ("rwa_Delta", p.big_delta.abs(), gap),
        ("pert_level4", level4_coupling.max(level4_pair), p.big_delta.abs()),
        ("shift_vs_splitting", level4_coupling, splitting),
        ("eps_mixing", (p.epsilon * g * p.omega / b2).abs(), splitting),
        ("tunnel_mixing", j_bc, splitting),
        ("dispersive", p.omega.max(g), p.delta.abs()),
        ("tunnel_vs_delta", p.alpha.abs(), p.delta.abs()),
    ];
    let conditions: Vec<ValidityCondition> = raw
        .into_iter()
        .map(|(name, lhs, rhs)| {
            let ratio = if rhs == 0.0 {
                if lhs == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                lhs / rhs
            };
            ValidityCondition { name, lhs, rhs, ratio, pass: ratio < threshold }
        })
        .collect();
    let overall_pass = conditions.iter().all(|c| c.pass);
    ValidityReport { conditions, overall_pass, threshold }
}

/// Named contributions to an effective decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayComponents {
    pub photonic: f64,
    pub level3: f64,
    pub level4: f64,
}

impl DecayComponents {
    pub fn total(&self) -> f64 {
        self.photonic + self.level3 + self.level4
    }
}

/// Occupation-dependent effective decay rates of the two species.
///
/// The level-4 channel carries a Heaviside gate: it contributes only from
/// double occupancy upward, which is what lets low-occupancy states survive
/// in bad cavities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    photonic_b: f64,
    photonic_c: f64,
    level3_c: f64,
    level4: f64,
}

impl DecayRates {
    pub fn from_params(p: &PhysicalParams) -> Self {
        let s = derive_scales(p);
        let g = s.g;
        let b2 = s.b_scale * s.b_scale;
        let level4 = if p.big_delta == 0.0 {
            f64::INFINITY * 0.0 // NaN only when gamma4 > 0 over a vanishing detuning
        } else {
            p.g24 * p.g24 * g * g * p.omega * p.omega / (p.big_delta * p.big_delta * b2 * b2)
        } * p.gamma4;
        Self {
            photonic_b: p.omega * p.omega / b2 * p.kappa,
            photonic_c: g * g / b2 * p.kappa,
            level3_c: b2 / (p.delta * p.delta) * p.gamma3,
            level4,
        }
    }

    pub fn gamma_b(&self, n_b: u32) -> f64 {
        self.photonic_b + if n_b >= 2 { self.level4 } else { 0.0 }
    }

    pub fn gamma_c(&self, n_c: u32) -> f64 {
        self.photonic_c + self.level3_c + if n_c >= 2 { self.level4 } else { 0.0 }
    }

    pub fn components_b(&self, n_b: u32) -> DecayComponents {
        DecayComponents {
            photonic: self.photonic_b,
            level3: 0.0,
            level4: if n_b >= 2 { self.level4 } else { 0.0 },
        }
    }

    pub fn components_c(&self, n_c: u32) -> DecayComponents {
        DecayComponents {
            photonic: self.photonic_c,
            level3: self.level3_c,
            level4: if n_c >= 2 { self.level4 } else { 0.0 },
        }
    }
}

/// `(Gamma_b(n_b), Gamma_c(n_c))` for the given occupations.
pub fn decay_rates(p: &PhysicalParams, n_b: u32, n_c: u32) -> (f64, f64) {
    let rates = DecayRates::from_params(p);
    (rates.gamma_b(n_b), rates.gamma_c(n_c))
}

/// Interaction-to-decay figures of merit that [`optimize_ratio`] can maximize
/// over the level-4 detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioObjective {
    /// `|U_b| / Gamma_b(2)`
    UbOverGammaB,
    /// `|U_c| / Gamma_c(2)`
    UcOverGammaC,
    /// `|U_bc| / max(Gamma_b(2), Gamma_c(2))`
    UbcOverMaxGamma,
}

impl RatioObjective {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UbOverGammaB => "u_b_over_gamma_b",
            Self::UcOverGammaC => "u_c_over_gamma_c",
            Self::UbcOverMaxGamma => "u_bc_over_max_gamma",
        }
    }
}

/// Result of [`optimize_ratio`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOptimum {
    /// Maximizing level-4 detuning.
    pub big_delta: f64,
    /// Maximum of the objective, absolute.
    pub ratio: f64,
    /// Same, in units of the cooperativity `zeta = g13 / sqrt(kappa gamma4)`.
    pub ratio_in_zeta: f64,
}

fn ratio_objective(p: &PhysicalParams, objective: RatioObjective, big_delta: f64) -> f64 {
    let mut q = *p;
    q.big_delta = big_delta;
    let eff = match map_effective(&q) {
        Ok(e) => e,
        Err(_) => return f64::NEG_INFINITY,
    };
    // worst case occupation: the level-4 channel is active
    let rates = DecayRates::from_params(&q);
    let value = match objective {
        RatioObjective::UbOverGammaB => eff.u_b.abs() / rates.gamma_b(2),
        RatioObjective::UcOverGammaC => eff.u_c.abs() / rates.gamma_c(2),
        RatioObjective::UbcOverMaxGamma => {
            eff.u_bc.abs() / rates.gamma_b(2).max(rates.gamma_c(2))
        }
    };
    if value.is_finite() {
        value
    } else {
        f64::NEG_INFINITY
    }
}

/// Maximizes `|objective|` over the level-4 detuning inside `bounds` by a
/// coarse scan plus golden-section refinement to relative tolerance `1e-6`.
///
/// The bounds must not contain the degenerate-detuning points. Fails with
/// [`ParamsError::NoInteriorMaximum`] when the best value sits on a bound,
/// which signals that the bounds rather than the physics limit the answer.
pub fn optimize_ratio(
    p: &PhysicalParams,
    objective: RatioObjective,
    bounds: (f64, f64),
) -> Result<RatioOptimum, ParamsError> {
    let (lo, hi) = bounds;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(ParamsError::Invalid("optimizer bounds must be a finite increasing interval"));
    }
    const GRID: usize = 1024;
    // log-spaced magnitudes when the interval avoids zero, linear otherwise
    let grid_point = |k: usize| -> f64 {
        let t = k as f64 / (GRID - 1) as f64;
        if lo > 0.0 {
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        } else if hi < 0.0 {
            -((-hi).ln() + (1.0 - t) * ((-lo).ln() - (-hi).ln())).exp()
        } else {
            lo + t * (hi - lo)
        }
    };
    let mut best_k = 0;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..GRID {
        let v = ratio_objective(p, objective, grid_point(k));
        if v > best_v {
            best_v = v;
            best_k = k;
        }
    }
    if best_k == 0 || best_k == GRID - 1 || !best_v.is_finite() {
        return Err(ParamsError::NoInteriorMaximum);
    }
    // golden-section refinement inside the bracketing cells
    let mut a = grid_point(best_k - 1);
    let mut b = grid_point(best_k + 1);
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = ratio_objective(p, objective, x1);
    let mut f2 = ratio_objective(p, objective, x2);
    while (b - a).abs() > 1e-6 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = ratio_objective(p, objective, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = ratio_objective(p, objective, x1);
        }
    }
    let big_delta = if f1 > f2 { x1 } else { x2 };
    let ratio = ratio_objective(p, objective, big_delta);
    let zeta = p.g13 / (p.kappa * p.gamma4).sqrt();
    let ratio_in_zeta = if zeta.is_finite() { ratio / zeta } else { 0.0 };
    Ok(RatioOptimum { big_delta, ratio, ratio_in_zeta })
}

/// Cooperativity figure of merit `zeta = g13 / sqrt(kappa gamma4)`.
pub fn cooperativity(p: &PhysicalParams) -> f64 {
    p.g13 / (p.kappa * p.gamma4).sqrt()
}

/// Solves the species-mixing crossover condition `B^4 = |alpha| delta g Omega`
/// for the two driving strengths where `|mu_c - mu_b| = |j_bc|`, by bisection
/// on the quartic `(1 + x^2)^2 = (|alpha| delta / g^2) x` in `x = Omega/g`
/// to relative tolerance `1e-9`.
pub fn crossover_region(
    p: &PhysicalParams,
    omega_bracket: (f64, f64),
) -> Result<(f64, f64), ParamsError> {
    let g = (p.n_atoms as f64).sqrt() * p.g13;
    let c = p.alpha.abs() * p.delta / (g * g);
    if c <= 0.0 {
        return Err(ParamsError::NoCrossover);
    }
    let (olo, ohi) = omega_bracket;
    if !(0.0 < olo && olo < ohi) {
        return Err(ParamsError::Invalid("omega bracket must satisfy 0 < low < high"));
    }
    let f = |x: f64| {
        let q = 1.0 + x * x;
        q * q - c * x
    };
    let xlo = olo / g;
    let xhi = ohi / g;
    const CELLS: usize = 4096;
    let mut roots = Vec::new();
    let mut prev_x = xlo;
    let mut prev_f = f(prev_x);
    for k in 1..=CELLS {
        let x = xlo + (xhi - xlo) * k as f64 / CELLS as f64;
        let fx = f(x);
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if prev_f * fx < 0.0 {
            // bisect to relative tolerance 1e-9
            let (mut a, mut b) = (prev_x, x);
            let (mut fa, _) = (prev_f, fx);
            while (b - a) > 1e-9 * b.abs().max(1e-300) {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_f = fx;
        if roots.len() == 2 {
            break;
        }
    }
    if roots.len() < 2 {
        return Err(ParamsError::NoCrossover);
    }
    Ok((roots[0] * g, roots[1] * g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_collapse_when_laser_off() {
        let p = PhysicalParams {
            g13: 1.0,
            g24: 1.0,
            n_atoms: 1,
            delta: 10.0,
            big_delta: -1.0,
            epsilon: 0.0,
            omega: 0.0,
            alpha: 0.0,
            kappa: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
        };
        let s = derive_scales(&p);
        assert_eq!(s.g, 1.0);
        assert_eq!(s.b_scale, 1.0);
        assert!((s.a_scale - 104f64.sqrt()).abs() < 1e-15);
        assert!((s.mu_minus_approx + 0.1).abs() < 1e-15);
        assert!((s.mu_plus_approx - 10.1).abs() < 1e-15);
        assert_eq!(s.mu_0, 0.0);
    }

    #[test]
    fn sweep_benchmark_scales() {
        let p = PhysicalParams::sweep_benchmark();
        let s = derive_scales(&p);
        assert!((s.g - 1000f64.sqrt()).abs() < 1e-12);
        assert!((s.b_scale * s.b_scale - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn bright_polariton_first_order_accuracy() {
        // far-dispersive regime: exact and first-order frequencies agree
        let mut p = PhysicalParams::sweep_benchmark();
        p.omega = derive_scales(&p).g;
        let s = derive_scales(&p);
        let rel = ((s.mu_minus - s.mu_minus_approx) / s.mu_minus).abs();
        assert!(rel < 1e-6, "relative error {rel}");
        let rel_plus = ((s.mu_plus - s.mu_plus_approx) / s.mu_plus).abs();
        assert!(rel_plus < 1e-6);
    }

    #[test]
    fn balanced_driving_collapses_tunneling() {
        let mut p = PhysicalParams::sweep_benchmark();
        p.omega = derive_scales(&p).g;
        let eff = map_effective(&p).unwrap();
        assert_eq!(eff.u_bc, 0.0);
        assert!((eff.j_bb - p.alpha / 2.0).abs() < 1e-15);
        assert!((eff.j_cc - p.alpha / 2.0).abs() < 1e-15);
        assert!((eff.j_bc - p.alpha / 2.0).abs() < 1e-15);
    }

    #[test]
    fn laser_off_limit() {
        // With the laser off, b is a pure collective spin excitation (no
        // photonic weight, so it cannot tunnel) and c is the bare photon.
        let p = PhysicalParams {
            g13: 1.0,
            g24: 0.7,
            n_atoms: 4,
            delta: 50.0,
            big_delta: -3.0,
            epsilon: 0.0,
            omega: 0.0,
            alpha: 0.25,
            kappa: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
        };
        let eff = map_effective(&p).unwrap();
        assert_eq!(eff.u_b, 0.0);
        assert_eq!(eff.u_c, 0.0);
        assert_eq!(eff.j_bb, 0.0);
        assert_eq!(eff.j_bc, 0.0);
        assert!((eff.j_cc - p.alpha).abs() < 1e-15);
        let g2 = 4.0;
        let expected_ubc = -p.g24 * p.g24 / (p.big_delta + g2 / p.delta);
        assert!((eff.u_bc - expected_ubc).abs() < 1e-12);
    }

    #[test]
    fn sweep_benchmark_interactions_at_balanced_driving() {
        // frozen against an independent closed-form evaluation
        let mut p = PhysicalParams::sweep_benchmark();
        p.omega = derive_scales(&p).g;
        let eff = map_effective(&p).unwrap();
        assert!((eff.u_b - 5.0).abs() < 1e-12);
        assert!((eff.u_c - (-18.87425886722794)).abs() < 1e-10);
        assert_eq!(eff.u_bc, 0.0);
        assert!((eff.mu_c - (-0.03162277660168379)).abs() < 1e-15);
    }

    #[test]
    fn tunneling_identity_and_sign_table() {
        let mut p = PhysicalParams::dynamics_benchmark();
        p.epsilon = 0.3;
        let eff = map_effective(&p).unwrap();
        assert!((eff.j_bb * eff.j_cc - eff.j_bc * eff.j_bc).abs() < 1e-18);
        // Delta < 0 with |Delta| > 2 B^2/delta: all three interactions positive
        assert!(eff.u_b > 0.0 && eff.u_c > 0.0 && eff.u_bc > 0.0);
        // repulsive and attractive at the same time: Delta < 0, |Delta| < B^2/delta
        let mut q = p;
        q.big_delta = -0.1;
        q.delta = 1e3;
        let s = derive_scales(&q);
        assert!(q.big_delta.abs() < s.b_scale * s.b_scale / q.delta);
        let eff2 = map_effective(&q).unwrap();
        assert!(eff2.u_b > 0.0 && eff2.u_c < 0.0 && eff2.u_bc < 0.0);
    }

    #[test]
    fn degenerate_detunings_are_rejected() {
        let mut p = PhysicalParams::dynamics_benchmark();
        p.big_delta = 0.0;
        assert_eq!(
            map_effective(&p),
            Err(ParamsError::DegenerateDetuning { denominator: "big_delta" })
        );
        let mut p = PhysicalParams::dynamics_benchmark();
        p.delta = 0.0;
        assert!(matches!(map_effective(&p), Err(ParamsError::DegenerateDetuning { .. })));
        let mut p = PhysicalParams::dynamics_benchmark();
        let s = derive_scales(&p);
        p.big_delta = -s.b_scale * s.b_scale / p.delta;
        assert_eq!(
            map_effective(&p),
            Err(ParamsError::DegenerateDetuning { denominator: "big_delta + B^2/delta" })
        );
        p.big_delta *= 2.0;
        assert_eq!(
            map_effective(&p),
            Err(ParamsError::DegenerateDetuning { denominator: "big_delta + 2 B^2/delta" })
        );
    }

    #[test]
    fn dynamics_benchmark_validity() {
        // Every inequality passes at threshold 0.1 except shift_vs_splitting,
        // whose violation is exactly what turns the pair-conversion term on.
        let p = PhysicalParams::dynamics_benchmark();
        let report = check_validity(&p, 0.1);
        for cond in &report.conditions {
            if cond.name == "shift_vs_splitting" {
                assert!(!cond.pass);
                assert!((cond.ratio - 1.42012).abs() < 1e-3, "ratio {}", cond.ratio);
            } else {
                assert!(cond.pass, "{} unexpectedly failed: ratio {}", cond.name, cond.ratio);
            }
        }
        assert!(!report.overall_pass);
        let eff = map_effective(&p).unwrap();
        assert!(eff.pair_conv_active);
    }

    #[test]
    fn equal_tunneling_and_detuning_fails() {
        let mut p = PhysicalParams::dynamics_benchmark();
        p.alpha = p.delta;
        let report = check_validity(&p, 0.1);
        let cond = report.condition("tunnel_vs_delta").unwrap();
        assert!((cond.ratio - 1.0).abs() < 1e-15);
        assert!(!cond.pass);
        assert!(!report.overall_pass);
    }

    #[test]
    fn sweep_benchmark_sits_inside_mixing_window() {
        let mut p = PhysicalParams::sweep_benchmark();
        p.omega = derive_scales(&p).g;
        let report = check_validity(&p, 0.1);
        let cond = report.condition("tunnel_mixing").unwrap();
        assert!(!cond.pass, "mixing should bind at balanced driving, ratio {}", cond.ratio);
        assert!((cond.ratio - 1.5811388300841898).abs() < 1e-9);
    }

    #[test]
    fn condition_set_is_fixed() {
        let p = PhysicalParams::dynamics_benchmark();
        let names: Vec<_> = check_validity(&p, 0.5)
            .conditions
            .iter()
            .map(|c| c.name)
            .collect();
        assert_eq!(
            names,
            vec![
                "rwa_g24",
                "rwa_eps",
                "rwa_Delta",
                "pert_level4",
                "shift_vs_splitting",
                "eps_mixing",
                "tunnel_mixing",
                "dispersive",
                "tunnel_vs_delta"
            ]
        );
    }

    #[test]
    fn lossless_cavity_does_not_decay() {
        let p = PhysicalParams::dynamics_benchmark();
        assert_eq!(decay_rates(&p, 3, 3), (0.0, 0.0));
    }

    #[test]
    fn level4_channel_gated_by_occupancy() {
        let mut p = PhysicalParams::dynamics_benchmark();
        p.kappa = 1e-3;
        p.gamma3 = 1e-4;
        p.gamma4 = 1e-2;
        let s = derive_scales(&p);
        let b2 = s.b_scale * s.b_scale;
        let rates = DecayRates::from_params(&p);
        // single occupancy: photonic (and level-3 for c) only
        let expect_b1 = p.omega * p.omega / b2 * p.kappa;
        assert!((rates.gamma_b(1) - expect_b1).abs() < 1e-18);
        assert_eq!(rates.components_b(1).level4, 0.0);
        let expect_c1 = s.g * s.g / b2 * p.kappa + b2 / (p.delta * p.delta) * p.gamma3;
        assert!((rates.gamma_c(1) - expect_c1).abs() < 1e-18);
        // double occupancy switches the level-4 channel on for both species
        let level4 = p.g24 * p.g24 * s.g * s.g * p.omega * p.omega
            / (p.big_delta * p.big_delta * b2 * b2)
            * p.gamma4;
        assert!((rates.gamma_b(2) - (expect_b1 + level4)).abs() < 1e-18);
        assert!((rates.gamma_c(5) - (expect_c1 + level4)).abs() < 1e-18);
        // monotone non-decreasing in occupation
        assert!(rates.gamma_b(2) >= rates.gamma_b(1));
        assert!(rates.gamma_c(2) >= rates.gamma_c(1));
    }

    fn lossy_balanced_params() -> PhysicalParams {
        PhysicalParams {
            g13: 1.0,
            g24: 1.0,
            n_atoms: 1,
            delta: 1e9,
            big_delta: -1.0,
            epsilon: 0.0,
            omega: 1.0,
            alpha: 0.0,
            kappa: 1e-3,
            gamma3: 0.0,
            gamma4: 1e-2,
        }
    }

    #[test]
    fn balanced_interaction_to_decay_optimum() {
        // g = Omega, g24 = g13, gamma3 = 0: the maximum of |U_b|/Gamma_b(2)
        // over Delta is zeta/(2 sqrt(2)) at |Delta| = sqrt(g13^2 gamma4 / (2 kappa)).
        let p = lossy_balanced_params();
        let zeta = cooperativity(&p);
        let expect_ratio = zeta / (2.0 * 2f64.sqrt());
        let expect_delta = (p.g13 * p.g13 * p.gamma4 / (2.0 * p.kappa)).sqrt();
        let opt = optimize_ratio(&p, RatioObjective::UbOverGammaB, (1e-3, 1e3)).unwrap();
        assert!(
            ((opt.ratio - expect_ratio) / expect_ratio).abs() < 1e-8,
            "ratio {} vs {}",
            opt.ratio,
            expect_ratio
        );
        assert!(((opt.big_delta - expect_delta) / expect_delta).abs() < 1e-5);
        assert!((opt.ratio_in_zeta - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-8);
        // same maximum on the negative side
        let opt_neg = optimize_ratio(&p, RatioObjective::UbOverGammaB, (-1e3, -1e-3)).unwrap();
        assert!(((opt_neg.ratio - expect_ratio) / expect_ratio).abs() < 1e-8);
        // the huge delta makes the c-species optimum coincide
        let opt_c = optimize_ratio(&p, RatioObjective::UcOverGammaC, (-1e3, -1e-3)).unwrap();
        assert!(((opt_c.ratio - expect_ratio) / expect_ratio).abs() < 2e-2);
    }

    #[test]
    fn single_component_limit() {
        // Omega -> 0 at fixed g: the achievable |U_b|/Gamma_b approaches zeta/2.
        let mut p = lossy_balanced_params();
        p.omega = 1e-3;
        let opt = optimize_ratio(&p, RatioObjective::UbOverGammaB, (1e-3, 1e3)).unwrap();
        let zeta = cooperativity(&p);
        assert!(
            ((opt.ratio - zeta / 2.0) / (zeta / 2.0)).abs() < 2e-2,
            "ratio {} vs zeta/2 = {}",
            opt.ratio,
            zeta / 2.0
        );
        let expect_delta = p.g13 * (p.gamma4 / p.kappa).sqrt();
        assert!(((opt.big_delta - expect_delta) / expect_delta).abs() < 1e-3);
    }

    #[test]
    fn undamped_cavity_has_no_interior_optimum() {
        let mut p = lossy_balanced_params();
        p.kappa = 0.0;
        assert_eq!(
            optimize_ratio(&p, RatioObjective::UbOverGammaB, (1e-3, 1e3)),
            Err(ParamsError::NoInteriorMaximum)
        );
    }

    #[test]
    fn ratio_in_zeta_invariant_under_loss_rescaling() {
        let p = lossy_balanced_params();
        let opt = optimize_ratio(&p, RatioObjective::UbOverGammaB, (1e-4, 1e4)).unwrap();
        let mut q = p;
        q.kappa *= 9.0;
        q.gamma4 /= 9.0;
        assert!((cooperativity(&p) - cooperativity(&q)).abs() < 1e-9);
        let opt2 = optimize_ratio(&q, RatioObjective::UbOverGammaB, (1e-4, 1e4)).unwrap();
        assert!(
            (opt.ratio_in_zeta - opt2.ratio_in_zeta).abs() < 1e-7,
            "{} vs {}",
            opt.ratio_in_zeta,
            opt2.ratio_in_zeta
        );
    }

    #[test]
    fn crossover_window_of_the_sweep_benchmark() {
        let p = PhysicalParams::sweep_benchmark();
        let g = derive_scales(&p).g;
        let (lo, hi) = crossover_region(&p, (1.0, 1000.0)).unwrap();
        // frozen against an independent quartic root-finder
        assert!(((lo / g) - 0.16706297820414973).abs() < 1e-6, "x_low {}", lo / g);
        assert!(((hi / g) - 1.4089424551839969).abs() < 1e-6, "x_high {}", hi / g);
        // the window brackets the balanced point and stays within +-20% of
        // the quoted 0.16 g .. 1.6 g span
        assert!(lo < g && g < hi);
        assert!((lo / g - 0.16).abs() / 0.16 < 0.2);
        assert!((hi / g - 1.6).abs() / 1.6 < 0.2);
        // both returned omegas satisfy the defining quartic
        let c = p.alpha.abs() * p.delta / (g * g);
        for x in [lo / g, hi / g] {
            let q = 1.0 + x * x;
            assert!((q * q - c * x).abs() < 1e-6 * c * x);
        }
    }

    #[test]
    fn no_tunneling_means_no_crossover() {
        let mut p = PhysicalParams::sweep_benchmark();
        p.alpha = 0.0;
        assert_eq!(crossover_region(&p, (1.0, 1000.0)), Err(ParamsError::NoCrossover));
    }

    #[test]
    fn scale_covariance() {
        let base = PhysicalParams {
            g13: 1.0,
            g24: 0.8,
            n_atoms: 50,
            delta: 400.0,
            big_delta: -2.5,
            epsilon: 0.15,
            omega: 6.0,
            alpha: -0.02,
            kappa: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
        };
        let s = 3.7;
        let scaled = PhysicalParams {
            g13: base.g13 * s,
            g24: base.g24 * s,
            delta: base.delta * s,
            big_delta: base.big_delta * s,
            epsilon: base.epsilon * s,
            omega: base.omega * s,
            alpha: base.alpha * s,
            ..base
        };
        let e1 = map_effective(&base).unwrap();
        let e2 = map_effective(&scaled).unwrap();
        let pairs = [
            (e1.mu_c, e2.mu_c),
            (e1.u_b, e2.u_b),
            (e1.u_c, e2.u_c),
            (e1.u_bc, e2.u_bc),
            (e1.j_bb, e2.j_bb),
            (e1.j_cc, e2.j_cc),
            (e1.j_bc, e2.j_bc),
            (e1.eps_b, e2.eps_b),
            (e1.eps_c, e2.eps_c),
            (e1.eps_bc, e2.eps_bc),
            (e1.pair_conv, e2.pair_conv),
        ];
        for (v1, v2) in pairs {
            assert!((v2 - s * v1).abs() <= 1e-12 * v2.abs().max(1.0), "{v1} {v2}");
        }
        assert_eq!(e1.pair_conv_active, e2.pair_conv_active);
    }
}
