//! Finite-mode Hilbert-space machinery.
//!
//! Product states |{n}, φ_N⟩ of an atom level and a finite Fock occupation
//! table, the Hermitian transformation operator z that eliminates the
//! first-order atom–field coupling, and the matrix elements of the
//! resulting second-order effective Hamiltonian
//!
//!   H_eff = (i/2ħ) [z, μ·E(R)],
//!
//! with z_ab = iħ ⟨a|μ·E|b⟩ / (E_b − E_a) off the energy shell. The
//! coupling constant is absorbed into the transition dipoles, so μ·E plays
//! the role of the full interaction. Two independent evaluation paths are
//! provided: the explicit double sum over intermediate states
//! ([`heff_matrix_element`]) and the commutator with a resolution of
//! identity ([`heff_via_commutator`]); they must agree on every off-shell
//! pair.
//!
//! Photon-number selection rules: an effective-Hamiltonian element vanishes
//! unless the two occupation tables are identical, differ by ±2 in a single
//! mode, or differ by ±1 in exactly two modes with the same sign.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{MqedError, Result};
use crate::model::{AtomModel, PhysicalConstants};
use crate::response::{alpha_dynamic, beta_state};

/// Cap on enumerated basis sizes; this module exists for validation, not
/// production-scale diagonalization.
pub const BASIS_CAP: usize = 20_000;

/// Relative tolerance below which an energy denominator counts as on-shell.
pub const ON_SHELL_REL_TOL: f64 = 1e-10;

/// A finite photon-occupation table; index s labels modes of a
/// [`DiscreteModeSet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockOccupation {
    counts: Vec<u32>,
}

impl FockOccupation {
    pub fn vacuum(num_modes: usize) -> Self {
        Self { counts: vec![0; num_modes] }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn count(&self, mode: usize) -> u32 {
        self.counts.get(mode).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn num_modes(&self) -> usize {
        self.counts.len()
    }

    /// Copy with mode `s` set to `n`.
    pub fn with_count(&self, mode: usize, n: u32) -> Self {
        let mut counts = self.counts.clone();
        counts[mode] = n;
        Self { counts }
    }
}

/// An atom level paired with a field occupation: the basis element of the
/// discrete machinery.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductState {
    pub atom_level: usize,
    pub field: FockOccupation,
}

impl ProductState {
    pub fn new(atom_level: usize, field: FockOccupation) -> Self {
        Self { atom_level, field }
    }

    /// Unperturbed energy E_N + Σ_s n_s ħω_s.
    pub fn energy(&self, modes: &DiscreteModeSet, model: &AtomModel, pc: &PhysicalConstants) -> f64 {
        let photons: f64 = (0..self.field.num_modes())
            .map(|s| self.field.count(s) as f64 * pc.hbar * modes.omega(s))
            .sum();
        model.energy(self.atom_level) + photons
    }
}

/// One discrete field mode: angular frequency plus the complex
/// mode-function value at each relevant atom position.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMode {
    pub omega: f64,
    /// f_s(R_p) for each atom position p handled by the containing set.
    pub amplitudes: Vec<Vector3<Complex64>>,
    pub label: String,
}

impl DiscreteMode {
    pub fn new(omega: f64, amplitudes: Vec<Vector3<Complex64>>, label: impl Into<String>) -> Self {
        Self { omega, amplitudes, label: label.into() }
    }

    pub fn single_position(omega: f64, amplitude: Vector3<Complex64>) -> Self {
        Self { omega, amplitudes: vec![amplitude], label: String::new() }
    }
}

/// An ordered set of discrete modes sharing a common list of atom positions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModeSet {
    modes: Vec<DiscreteMode>,
}

impl DiscreteModeSet {
    pub fn new(modes: Vec<DiscreteMode>) -> Result<Self> {
        let positions = modes.first().map(|m| m.amplitudes.len()).unwrap_or(0);
        for (s, m) in modes.iter().enumerate() {
            if !(m.omega > 0.0) {
                return Err(MqedError::InvalidArgument(format!(
                    "mode {s}: frequency must be > 0, got {}",
                    m.omega
                )));
            }
            if m.amplitudes.len() != positions {
                return Err(MqedError::InvalidArgument(format!(
                    "mode {s}: expected {positions} position amplitudes, got {}",
                    m.amplitudes.len()
                )));
            }
        }
        Ok(Self { modes })
    }

    pub fn empty() -> Self {
        Self { modes: Vec::new() }
    }

    pub fn single(omega: f64, amplitude: Vector3<Complex64>) -> Self {
        Self { modes: vec![DiscreteMode::single_position(omega, amplitude)] }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[DiscreteMode] {
        &self.modes
    }

    pub fn omega(&self, s: usize) -> f64 {
        self.modes[s].omega
    }

    pub fn amplitude(&self, s: usize, position: usize) -> &Vector3<Complex64> {
        &self.modes[s].amplitudes[position]
    }
}

/// All product states with total photon number ≤ `max_total_photons`,
/// ordered lexicographically in (total photons, occupations, atom level).
pub fn enumerate_states(
    modes: &DiscreteModeSet,
    max_total_photons: u32,
    model: &AtomModel,
) -> Result<Vec<ProductState>> {
    let num_modes = modes.len();
    let mut out = Vec::new();
    for total in 0..=max_total_photons {
        let mut occs = Vec::new();
        compositions(total, num_modes, &mut Vec::new(), &mut occs);
        occs.sort();
        for occ in occs {
            for level in 0..model.num_levels() {
                out.push(ProductState::new(level, FockOccupation::from_counts(occ.clone())));
                if out.len() > BASIS_CAP {
                    return Err(MqedError::BasisTooLarge { size: out.len(), cap: BASIS_CAP });
                }
            }
        }
    }
    Ok(out)
}

fn compositions(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slots == 0 {
        if remaining == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    for n in 0..=remaining {
        prefix.push(n);
        compositions(remaining - n, slots - 1, prefix, out);
        prefix.pop();
    }
}

/// Photon-number selection-rule case for an effective-Hamiltonian element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonCase {
    /// Identical occupations.
    Diagonal,
    /// Exactly one mode differs by ±2.
    SameModePair,
    /// Exactly two modes differ by ±1 with the same sign.
    TwoModePair,
    /// Anything else: the element vanishes identically.
    Forbidden,
}

pub fn classify_photon_transition(from: &FockOccupation, to: &FockOccupation) -> PhotonCase {
    let n = from.num_modes().max(to.num_modes());
    let diffs: Vec<i64> = (0..n)
        .map(|s| to.count(s) as i64 - from.count(s) as i64)
        .filter(|&d| d != 0)
        .collect();
    match diffs.as_slice() {
        [] => PhotonCase::Diagonal,
        [2] | [-2] => PhotonCase::SameModePair,
        [a, b] if a.abs() == 1 && b.abs() == 1 && a.signum() == b.signum() => {
            PhotonCase::TwoModePair
        }
        _ => PhotonCase::Forbidden,
    }
}

/// ⟨bra| μ·E(R_p) |ket⟩ with E(R) = Σ_s [f_s(R) a_s + f*_s(R) a†_s];
/// nonzero only when the occupations differ by one photon in one mode.
pub fn dipole_field_element(
    bra: &ProductState,
    ket: &ProductState,
    modes: &DiscreteModeSet,
    model: &AtomModel,
    position: usize,
) -> Complex64 {
    let mu = model.coupling_dipole(bra.atom_level, ket.atom_level);
    if mu == Vector3::zeros() {
        return Complex64::new(0.0, 0.0);
    }
    let mut changed = None;
    for s in 0..modes.len() {
        let d = bra.field.count(s) as i64 - ket.field.count(s) as i64;
        if d != 0 {
            if changed.is_some() || d.abs() != 1 {
                return Complex64::new(0.0, 0.0);
            }
            changed = Some((s, d));
        }
    }
    let Some((s, d)) = changed else {
        return Complex64::new(0.0, 0.0);
    };
    let f = modes.amplitude(s, position);
    let n_ket = ket.field.count(s) as f64;
    let (amp, ladder) = if d == 1 {
        // bra has one more photon: creation, picks up f* √(n+1)
        (f.map(|c| c.conj()), (n_ket + 1.0).sqrt())
    } else {
        (*f, n_ket.sqrt())
    };
    ladder * (amp.x * mu.x + amp.y * mu.y + amp.z * mu.z)
}

fn pair_energy_scale(
    bra: &ProductState,
    ket: &ProductState,
    modes: &DiscreteModeSet,
    model: &AtomModel,
    pc: &PhysicalConstants,
) -> f64 {
    let ea = bra.energy(modes, model, pc).abs();
    let eb = ket.energy(modes, model, pc).abs();
    model.energy_scale().max(ea).max(eb).max(f64::MIN_POSITIVE)
}

fn format_state(state: &ProductState, model: &AtomModel) -> String {
    format!("|{:?}; {}⟩", state.field.counts(), model.label(state.atom_level))
}

/// Matrix element of the transformation operator z (off-shell only):
/// z_ab = iħ ⟨a|μ·E|b⟩ / (E_b − E_a).
pub fn z_matrix_element(
    bra: &ProductState,
    ket: &ProductState,
    modes: &DiscreteModeSet,
    model: &AtomModel,
    position: usize,
    pc: &PhysicalConstants,
) -> Result<Complex64> {
    let de = ket.energy(modes, model, pc) - bra.energy(modes, model, pc);
    let scale = pair_energy_scale(bra, ket, modes, model, pc);
    if de.abs() < ON_SHELL_REL_TOL * scale {
        return Err(MqedError::EnergyShell(format!(
            "z element between degenerate states {} and {}",
            format_state(bra, model),
            format_state(ket, model)
        )));
    }
    let g = dipole_field_element(bra, ket, modes, model, position);
    Ok(Complex64::new(0.0, pc.hbar) * g / de)
}

/// Occupations reachable from both `a` and `b` by one application of μ·E
/// (photon number ±1 in a single mode); all other intermediate terms vanish
/// by operator linearity.
fn shared_one_photon_neighbors(a: &FockOccupation, b: &FockOccupation) -> Vec<FockOccupation> {
    let mut out = Vec::new();
    for s in 0..a.num_modes() {
        let n = a.count(s);
        let mut push = |occ: FockOccupation| {
            if one_photon_apart(&occ, b) && !out.contains(&occ) {
                out.push(occ);
            }
        };
        push(a.with_count(s, n + 1));
        if n > 0 {
            push(a.with_count(s, n - 1));
        }
    }
    out
}

fn one_photon_apart(a: &FockOccupation, b: &FockOccupation) -> bool {
    let mut seen = 0i64;
    for s in 0..a.num_modes().max(b.num_modes()) {
        seen += (a.count(s) as i64 - b.count(s) as i64).abs();
    }
    seen == 1
}

/// Direct double-sum evaluation of the effective-Hamiltonian element:
///
/// ⟨a|H_eff|b⟩ = −(1/2) Σ_c ⟨a|μ·E|c⟩⟨c|μ·E|b⟩ [1/(E_c−E_a) + 1/(E_c−E_b)]
///
/// Being quadratic in the ladder operators, this vanishes identically
/// unless the photon totals are equal or differ by two. Besides the three
/// cases enumerated by [`classify_photon_transition`], the equal-total
/// sector also carries one-photon-exchanged (Kramers–Heisenberg
/// scattering) elements, −(1/2) f*_i f'_j [α_ij(ω) + α_ij(ω')], which the
/// double sum produces and which the three-body dispersion path relies on.
pub fn heff_matrix_element(
    bra: &ProductState,
    ket: &ProductState,
    modes: &DiscreteModeSet,
    model: &AtomModel,
    position: usize,
    pc: &PhysicalConstants,
) -> Result<Complex64> {
    let dt = (bra.field.total() as i64 - ket.field.total() as i64).abs();
    if dt != 0 && dt != 2 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let ea = bra.energy(modes, model, pc);
    let eb = ket.energy(modes, model, pc);
    let scale = pair_energy_scale(bra, ket, modes, model, pc);
    let mut total = Complex64::new(0.0, 0.0);
    for occ in shared_one_photon_neighbors(&bra.field, &ket.field) {
        for level in 0..model.num_levels() {
            let mid = ProductState::new(level, occ.clone());
            let g1 = dipole_field_element(bra, &mid, modes, model, position);
            let g2 = dipole_field_element(&mid, ket, modes, model, position);
            if g1 == Complex64::new(0.0, 0.0) || g2 == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ec = mid.energy(modes, model, pc);
            let d1 = ec - ea;
            let d2 = ec - eb;
            if d1.abs() < ON_SHELL_REL_TOL * scale || d2.abs() < ON_SHELL_REL_TOL * scale {
                return Err(MqedError::EnergyShell(format!(
                    "vanishing denominator at intermediate state {}",
                    format_state(&mid, model)
                )));
            }
            total += g1 * g2 * (1.0 / d1 + 1.0 / d2);
        }
    }
    Ok(-0.5 * total)
}

/// Independent evaluation path: H_eff = (i/2ħ)[z, μ·E] with a resolution of
/// identity over one-photon-reachable intermediates between the factors.
pub fn heff_via_commutator(
    bra: &ProductState,
    ket: &ProductState,
    modes: &DiscreteModeSet,
    model: &AtomModel,
    position: usize,
    pc: &PhysicalConstants,
) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for occ in shared_one_photon_neighbors(&bra.field, &ket.field) {
        for level in 0..model.num_levels() {
            let mid = ProductState::new(level, occ.clone());
            let g1 = dipole_field_element(bra, &mid, modes, model, position);
            let g2 = dipole_field_element(&mid, ket, modes, model, position);
            // z is proportional to the coupling, so each product needs both
            // factors nonzero; z elements with vanishing coupling complete
            // to zero even on shell.
            if g1 != Complex64::new(0.0, 0.0) && g2 != Complex64::new(0.0, 0.0) {
                let z1 = z_matrix_element(bra, &mid, modes, model, position, pc)?;
                let z2 = z_matrix_element(&mid, ket, modes, model, position, pc)?;
                total += z1 * g2 - g1 * z2;
            }
        }
    }
    Ok(Complex64::new(0.0, 0.5 / pc.hbar) * total)
}

/// Diagonal energy of atom state N with one mode populated by n photons
/// (all others in vacuum): −(1/2) Σ_ij Re(f*_i f_j) [2n α_ij(ω) + β^N_ij(ω)].
pub fn heff_diagonal_nphoton(
    mode: &DiscreteMode,
    position: usize,
    n_photons: u32,
    model: &AtomModel,
    state_index: usize,
    pc: &PhysicalConstants,
) -> Result<f64> {
    let omega = mode.omega;
    let alpha = alpha_dynamic(model, state_index, omega, 0.0, pc)?;
    let beta = beta_state(model, state_index, omega, 0.0, pc)?;
    let f = &mode.amplitudes[position];
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            let weight = 2.0 * n_photons as f64 * alpha.components[(i, j)]
                + beta.components[(i, j)];
            total += f[i].conj() * f[j] * weight;
        }
    }
    Ok(-0.5 * total.re)
}

/// Two-photon emission element ⟨1_a 1_b| H'_eff |vac⟩ for two distinct
/// modes: −(1/2) f*_{a,i} f*_{b,j} [α_ij(ω_a) + α_ij(ω_b)].
pub fn heff_offdiag_two_photon(
    mode_a: &DiscreteMode,
    mode_b: &DiscreteMode,
    position: usize,
    model: &AtomModel,
    state_index: usize,
    pc: &PhysicalConstants,
) -> Result<Complex64> {
    let alpha_a = alpha_dynamic(model, state_index, mode_a.omega, 0.0, pc)?;
    let alpha_b = alpha_dynamic(model, state_index, mode_b.omega, 0.0, pc)?;
    let fa = &mode_a.amplitudes[position];
    let fb = &mode_b.amplitudes[position];
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            total += fa[i].conj()
                * fb[j].conj()
                * (alpha_a.components[(i, j)] + alpha_b.components[(i, j)]);
        }
    }
    Ok(-0.5 * total)
}

/// Same-mode variant ⟨2_a| H'_eff |vac⟩ = −(√2/2) f*_i f*_j α_ij(ω_a); the
/// √2 is the bosonic double-occupation factor.
pub fn heff_two_photon_same_mode(
    mode: &DiscreteMode,
    position: usize,
    model: &AtomModel,
    state_index: usize,
    pc: &PhysicalConstants,
) -> Result<Complex64> {
    let alpha = alpha_dynamic(model, state_index, mode.omega, 0.0, pc)?;
    let f = &mode.amplitudes[position];
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            total += f[i].conj() * f[j].conj() * alpha.components[(i, j)];
        }
    }
    Ok(-0.5 * std::f64::consts::SQRT_2 * total)
}
