//! Compilation of lattice plus parameters into sparse Hamiltonians for the
//! effective two-species model and for the full bosonized atom-cavity model,
//! together with polariton creation operators and initial-state preparation.
//!
//! Bosonization: the collective atomic operators are represented as
//! independent bosonic modes per cavity (`s12`, `s13` with weight 1, `s14`
//! with weight 2, alongside the photon `a`), the leading order of the
//! collective-boson expansion. The atom number enters the couplings only
//! through `g = sqrt(N) g13`.

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{
    diagonal_op, ladder, number_op, FockError, Ladder, ModeSpace, SparseOperator,
};
use crate::params::{derive_scales, EffectiveParams, PhysicalParams};

type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("preparing {required} excitations exceeds the truncation cap {cap} (TruncationExceeded)")]
    TruncationExceeded { required: u64, cap: u32 },
    #[error("invalid lattice: {0}")]
    InvalidLattice(&'static str),
    #[error("species {0:?} is not tracked by this model")]
    UnsupportedSpecies(Species),
}

/// Cavity lattice as an explicit edge list. Sites are 0-based internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    pub n_sites: usize,
    /// Unordered site pairs; no duplicates, no self-loops.
    pub edges: Vec<(usize, usize)>,
}

impl LatticeSpec {
    /// Open one-dimensional chain.
    pub fn chain(n_sites: usize) -> Self {
        Self {
            n_sites,
            edges: (1..n_sites).map(|s| (s - 1, s)).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_sites == 0 {
            return Err(ModelError::InvalidLattice("lattice needs at least one site"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(u, v) in &self.edges {
            if u >= self.n_sites || v >= self.n_sites {
                return Err(ModelError::InvalidLattice("edge endpoint out of range"));
            }
            if u == v {
                return Err(ModelError::InvalidLattice("self-loops are not allowed"));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(ModelError::InvalidLattice("duplicate edge"));
            }
        }
        Ok(())
    }
}

/// Effective two-species lattice model: two weight-1 modes per site
/// (`b`, `c`) under a total particle cap.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModelSpec {
    pub params: EffectiveParams,
    pub lattice: LatticeSpec,
    /// Total boson cap `K`.
    pub max_particles: u32,
    /// Include the two-photon-detuning on-site term.
    pub include_eq6: bool,
    /// Include the on-site pair-conversion term.
    pub include_pair_conversion: bool,
}

impl EffectiveModelSpec {
    pub fn mode_space(&self) -> Result<ModeSpace, ModelError> {
        self.lattice.validate()?;
        Ok(ModeSpace::uniform(2 * self.lattice.n_sites, self.max_particles)?)
    }

    pub fn mode_b(&self, site: usize) -> usize {
        2 * site
    }

    pub fn mode_c(&self, site: usize) -> usize {
        2 * site + 1
    }
}

/// Full bosonized atom-cavity model: per site a photon mode `a` (weight 1),
/// collective modes `s12` and `s13` (weight 1) and `s14` (weight 2, since a
/// level-4 excitation stores two quanta of the conserved charge).
#[derive(Debug, Clone, PartialEq)]
pub struct FullModelSpec {
    pub params: PhysicalParams,
    pub lattice: LatticeSpec,
    /// Weighted excitation cap `K`.
    pub max_excitations: u32,
}

/// Mode roles within one cavity of the full model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullMode {
    Photon,
    S12,
    S13,
    S14,
}

impl FullModelSpec {
    pub fn mode_space(&self) -> Result<ModeSpace, ModelError> {
        self.lattice.validate()?;
        let mut weights = Vec::with_capacity(4 * self.lattice.n_sites);
        for _ in 0..self.lattice.n_sites {
            weights.extend_from_slice(&[1, 1, 1, 2]);
        }
        Ok(ModeSpace::new(weights, self.max_excitations)?)
    }

    pub fn mode(&self, site: usize, which: FullMode) -> usize {
        4 * site
            + match which {
                FullMode::Photon => 0,
                FullMode::S12 => 1,
                FullMode::S13 => 2,
                FullMode::S14 => 3,
            }
    }
}

/// Polariton species labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    B,
    C,
    P0,
    PPlus,
    PMinus,
}

impl Species {
    pub fn label(&self) -> &'static str {
        match self {
            Species::B => "b",
            Species::C => "c",
            Species::P0 => "p0",
            Species::PPlus => "p+",
            Species::PMinus => "p-",
        }
    }
}

/// Complex amplitude vector over a [`ModeSpace`] basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn zero(dim: usize) -> Self {
        Self { amplitudes: vec![C64::new(0.0, 0.0); dim] }
    }

    /// Unit vector on one basis state.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut v = Self::zero(dim);
        v.amplitudes[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `<self|op|self>`.
    pub fn expectation(&self, op: &SparseOperator) -> Result<C64, ModelError> {
        if op.dim() != self.dim() {
            return Err(ModelError::Fock(FockError::DimMismatch {
                left: op.dim(),
                right: self.dim(),
            }));
        }
        let applied = op.apply(&self.amplitudes);
        Ok(self
            .amplitudes
            .iter()
            .zip(&applied)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

fn add_hermitian(h: SparseOperator, term: SparseOperator) -> Result<SparseOperator, FockError> {
    let adj = term.adjoint();
    h.add(&term)?.add(&adj)
}

/// Effective lattice Hamiltonian.
///
/// Per site: `mu_b n_b + mu_c n_c + U_b n_b(n_b-1) + U_c n_c(n_c-1)
/// + U_bc n_b n_c`, optionally the two-photon-detuning term
/// `eps_b n_b + eps_c n_c + eps_bc (b^+ c + c^+ b)` and the pair-conversion
/// term `pair_conv (c^+ c^+ b b + h.c.)`.
///
/// Per edge the photon hopping rotated into the species basis:
/// `j_bb b^+_R b_R' + j_cc c^+_R c_R' - j_bc (b^+_R c_R' + c^+_R b_R') + h.c.`
/// (the species-converting term enters with a sign opposite to the diagonal
/// ones). An equivalent form is `-sum_{j,l} J'_{jl} (j^+_R l_R' + h.c.)` with
/// `J'_bb = -j_bb`, `J'_cc = -j_cc`, `J'_bc = +j_bc`.
pub fn build_effective_hamiltonian(
    spec: &EffectiveModelSpec,
) -> Result<SparseOperator, ModelError> {
    let space = spec.mode_space()?;
    let p = &spec.params;
    let n_sites = spec.lattice.n_sites;
    let mut h = diagonal_op(&space, |state| {
        let mut e = 0.0;
        for s in 0..n_sites {
            let nb = state.occupations[2 * s] as f64;
            let nc = state.occupations[2 * s + 1] as f64;
            e += p.mu_b * nb + p.mu_c * nc;
            e += p.u_b * nb * (nb - 1.0) + p.u_c * nc * (nc - 1.0) + p.u_bc * nb * nc;
            if spec.include_eq6 {
                e += p.eps_b * nb + p.eps_c * nc;
            }
        }
        e
    });

    for s in 0..n_sites {
        let raise_b = ladder(&space, spec.mode_b(s), Ladder::Raise);
        let raise_c = ladder(&space, spec.mode_c(s), Ladder::Raise);
        let lower_b = ladder(&space, spec.mode_b(s), Ladder::Lower);
        let lower_c = ladder(&space, spec.mode_c(s), Ladder::Lower);
        if spec.include_eq6 && p.eps_bc != 0.0 {
            let t = raise_b.compose(&lower_c)?.scale(C64::new(p.eps_bc, 0.0));
            h = add_hermitian(h, t)?;
        }
        if spec.include_pair_conversion && p.pair_conv != 0.0 {
            let t = raise_c
                .compose(&raise_c)?
                .compose(&lower_b)?
                .compose(&lower_b)?
                .scale(C64::new(p.pair_conv, 0.0));
            h = add_hermitian(h, t)?;
        }
    }

    for &(r, rp) in &spec.lattice.edges {
        let raise_b_r = ladder(&space, spec.mode_b(r), Ladder::Raise);
        let raise_c_r = ladder(&space, spec.mode_c(r), Ladder::Raise);
        let lower_b_rp = ladder(&space, spec.mode_b(rp), Ladder::Lower);
        let lower_c_rp = ladder(&space, spec.mode_c(rp), Ladder::Lower);
        let mut t = raise_b_r.compose(&lower_b_rp)?.scale(C64::new(p.j_bb, 0.0));
        t = t.add(&raise_c_r.compose(&lower_c_rp)?.scale(C64::new(p.j_cc, 0.0)))?;
        t = t.add(&raise_b_r.compose(&lower_c_rp)?.scale(C64::new(-p.j_bc, 0.0)))?;
        t = t.add(&raise_c_r.compose(&lower_b_rp)?.scale(C64::new(-p.j_bc, 0.0)))?;
        h = add_hermitian(h, t)?;
    }
    Ok(h)
}

/// Full bosonized Hamiltonian.
///
/// Per site: `eps n_s12 + delta n_s13 + (Delta + eps) n_s14` plus
/// `Omega s12^+ s13 + g a^+ s13 + g24 a^+ s12^+ s14 + h.c.` with
/// `g = sqrt(N) g13`; per edge `alpha (a^+_R a_R' + h.c.)`.
/// Commutes with the weighted excitation number
/// `N_exc = sum (n_a + n_s12 + n_s13 + 2 n_s14)`.
pub fn build_full_hamiltonian(spec: &FullModelSpec) -> Result<SparseOperator, ModelError> {
    let space = spec.mode_space()?;
    let p = &spec.params;
    let g = derive_scales(p).g;
    let n_sites = spec.lattice.n_sites;

    let mut h = diagonal_op(&space, |state| {
        let mut e = 0.0;
        for s in 0..n_sites {
            let n12 = state.occupations[4 * s + 1] as f64;
            let n13 = state.occupations[4 * s + 2] as f64;
            let n14 = state.occupations[4 * s + 3] as f64;
            e += p.epsilon * n12 + p.delta * n13 + (p.big_delta + p.epsilon) * n14;
        }
        e
    });

    for s in 0..n_sites {
        let raise_a = ladder(&space, spec.mode(s, FullMode::Photon), Ladder::Raise);
        let raise_s12 = ladder(&space, spec.mode(s, FullMode::S12), Ladder::Raise);
        let lower_s13 = ladder(&space, spec.mode(s, FullMode::S13), Ladder::Lower);
        let lower_s14 = ladder(&space, spec.mode(s, FullMode::S14), Ladder::Lower);
        let mut t = raise_s12.compose(&lower_s13)?.scale(C64::new(p.omega, 0.0));
        t = t.add(&raise_a.compose(&lower_s13)?.scale(C64::new(g, 0.0)))?;
        t = t.add(
            &raise_a
                .compose(&raise_s12)?
                .compose(&lower_s14)?
                .scale(C64::new(p.g24, 0.0)),
        )?;
        h = add_hermitian(h, t)?;
    }

    for &(r, rp) in &spec.lattice.edges {
        let t = ladder(&space, spec.mode(r, FullMode::Photon), Ladder::Raise)
            .compose(&ladder(&space, spec.mode(rp, FullMode::Photon), Ladder::Lower))?
            .scale(C64::new(p.alpha, 0.0));
        h = add_hermitian(h, t)?;
    }
    Ok(h)
}

/// Weighted excitation-number operator of the full model (diagonal).
pub fn excitation_number_op(spec: &FullModelSpec) -> Result<SparseOperator, ModelError> {
    let space = spec.mode_space()?;
    Ok(diagonal_op(&space, |state| {
        let mut n = 0.0;
        for s in 0..spec.lattice.n_sites {
            n += state.occupations[4 * s] as f64
                + state.occupations[4 * s + 1] as f64
                + state.occupations[4 * s + 2] as f64
                + 2.0 * state.occupations[4 * s + 3] as f64;
        }
        n
    }))
}

/// Total particle-number operator of the effective model (diagonal).
pub fn particle_number_op(spec: &EffectiveModelSpec) -> Result<SparseOperator, ModelError> {
    let space = spec.mode_space()?;
    Ok(diagonal_op(&space, |state| {
        state.occupations.iter().map(|&n| n as f64).sum()
    }))
}

/// Creation operator of a polariton species in one cavity of the full model.
///
/// `b^+ = (g s12^+ - Omega a^+)/B`, `c^+ = (Omega s12^+ + g a^+)/B`,
/// `p0^+ = b^+`, and the exact bright branches
/// `p±^+ = sqrt(2/(A(A±delta))) (Omega s12^+ + g a^+ ± (A±delta)/2 s13^+)`.
pub fn polariton_creation(
    spec: &FullModelSpec,
    species: Species,
    site: usize,
) -> Result<SparseOperator, ModelError> {
    let space = spec.mode_space()?;
    let s = derive_scales(&spec.params);
    let (g, b, a, delta) = (s.g, s.b_scale, s.a_scale, spec.params.delta);
    let omega = spec.params.omega;
    // coefficients over (a^+, s12^+, s13^+)
    let (ca, c12, c13) = match species {
        Species::B | Species::P0 => (-omega / b, g / b, 0.0),
        Species::C => (g / b, omega / b, 0.0),
        Species::PPlus => {
            let f = (2.0 / (a * (a + delta))).sqrt();
            (f * g, f * omega, f * (a + delta) / 2.0)
        }
        Species::PMinus => {
            let f = (2.0 / (a * (a - delta))).sqrt();
            (f * g, f * omega, -f * (a - delta) / 2.0)
        }
    };
    let mut op = ladder(&space, spec.mode(site, FullMode::Photon), Ladder::Raise)
        .scale(C64::new(ca, 0.0));
    op = op.add(
        &ladder(&space, spec.mode(site, FullMode::S12), Ladder::Raise).scale(C64::new(c12, 0.0)),
    )?;
    if c13 != 0.0 {
        op = op.add(
            &ladder(&space, spec.mode(site, FullMode::S13), Ladder::Raise)
                .scale(C64::new(c13, 0.0)),
        )?;
    }
    Ok(op)
}

/// Number operator `s^+ s` of a polariton species at one site of the full
/// model. Hermitian and positive semidefinite with integer spectrum for the
/// `b`/`c` rotation.
pub fn species_number_op(
    spec: &FullModelSpec,
    species: Species,
    site: usize,
) -> Result<SparseOperator, ModelError> {
    let create = polariton_creation(spec, species, site)?;
    Ok(create.compose(&create.adjoint())?)
}

/// Vacuum of the full model.
pub fn full_vacuum(spec: &FullModelSpec) -> Result<StateVector, ModelError> {
    let space = spec.mode_space()?;
    Ok(StateVector::basis_state(space.dim(), 0))
}

/// Normalized product of polariton creation operators applied to the vacuum
/// of the full model.
pub fn prepare_full_state(
    spec: &FullModelSpec,
    placements: &[(Species, usize)],
) -> Result<StateVector, ModelError> {
    let required = placements.len() as u64;
    if required > spec.max_excitations as u64 {
        return Err(ModelError::TruncationExceeded {
            required,
            cap: spec.max_excitations,
        });
    }
    let mut state = full_vacuum(spec)?;
    for &(species, site) in placements {
        let op = polariton_creation(spec, species, site)?;
        state = StateVector { amplitudes: op.apply(&state.amplitudes) };
    }
    Ok(state.normalized())
}

/// Fock initial state of the effective model: the normalized product of the
/// listed `b^+`/`c^+` operators on the vacuum.
pub fn prepare_effective_state(
    spec: &EffectiveModelSpec,
    placements: &[(Species, usize)],
) -> Result<StateVector, ModelError> {
    let required = placements.len() as u64;
    if required > spec.max_particles as u64 {
        return Err(ModelError::TruncationExceeded {
            required,
            cap: spec.max_particles,
        });
    }
    let space = spec.mode_space()?;
    let mut occ = vec![0u32; space.n_modes()];
    for &(species, site) in placements {
        let mode = match species {
            Species::B | Species::P0 => spec.mode_b(site),
            Species::C => spec.mode_c(site),
            other => return Err(ModelError::UnsupportedSpecies(other)),
        };
        occ[mode] += 1;
    }
    let index = space.rank(&crate::fock::BasisState::new(occ)).map_err(ModelError::Fock)?;
    Ok(StateVector::basis_state(space.dim(), index))
}

/// Either model kind, for call sites that work with both.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Effective(EffectiveModelSpec),
    Full(FullModelSpec),
}

impl ModelSpec {
    pub fn n_sites(&self) -> usize {
        match self {
            ModelSpec::Effective(s) => s.lattice.n_sites,
            ModelSpec::Full(s) => s.lattice.n_sites,
        }
    }

    pub fn mode_space(&self) -> Result<ModeSpace, ModelError> {
        match self {
            ModelSpec::Effective(s) => s.mode_space(),
            ModelSpec::Full(s) => s.mode_space(),
        }
    }

    pub fn hamiltonian(&self) -> Result<SparseOperator, ModelError> {
        match self {
            ModelSpec::Effective(s) => build_effective_hamiltonian(s),
            ModelSpec::Full(s) => build_full_hamiltonian(s),
        }
    }

    pub fn prepare_state(&self, placements: &[(Species, usize)]) -> Result<StateVector, ModelError> {
        match self {
            ModelSpec::Effective(s) => prepare_effective_state(s, placements),
            ModelSpec::Full(s) => prepare_full_state(s, placements),
        }
    }

    /// Number operator of a tracked species at one site.
    pub fn species_number_op(
        &self,
        species: Species,
        site: usize,
    ) -> Result<SparseOperator, ModelError> {
        match self {
            ModelSpec::Effective(s) => {
                let space = s.mode_space()?;
                let mode = match species {
                    Species::B | Species::P0 => s.mode_b(site),
                    Species::C => s.mode_c(site),
                    other => return Err(ModelError::UnsupportedSpecies(other)),
                };
                Ok(number_op(&space, mode))
            }
            ModelSpec::Full(s) => species_number_op(s, species, site),
        }
    }

    /// Conserved-charge operator: total particle number for the effective
    /// model, weighted excitation number for the full model.
    pub fn charge_op(&self) -> Result<SparseOperator, ModelError> {
        match self {
            ModelSpec::Effective(s) => particle_number_op(s),
            ModelSpec::Full(s) => excitation_number_op(s),
        }
    }
}
