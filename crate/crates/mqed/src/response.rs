//! Frequency-dependent atomic response tensors.
//!
//! Two distinct response functions appear in second-order effective
//! Hamiltonians, and they are not interchangeable:
//!
//! * `β_ij^N(ω) = Σ_L 2 μ_i^{NL} μ_j^{LN} / (E_LN + ħω)` — the response to
//!   vacuum field fluctuations. For the ground state every E_Lg is
//!   positive, so β^g is real and pole-free at any ω ≥ 0.
//! * `α_ij(ω) = Σ_L 2 E_LN μ_i^{NL} μ_j^{LN} / (E_LN² − (ħω)²)` — the
//!   dynamic polarizability, the response to real photons, with poles on
//!   the real axis at ħω = E_LN.
//!
//! Optional phenomenological damping replaces ω by ω + iγ, moving the
//! poles into the lower complex half-plane; the damped α then satisfies
//! the Kramers–Krönig relations (checked numerically in the tests).

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{MqedError, Result};
use crate::model::{AtomModel, PhysicalConstants};

/// Relative window around a transition energy that triggers the pole error
/// at zero damping.
pub const POLE_REL_TOL: f64 = 1e-12;

/// Which response function a tensor holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    BetaGround,
    BetaState,
    Alpha,
}

impl std::fmt::Display for ResponseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::BetaGround => write!(f, "beta-ground"),
            Self::BetaState => write!(f, "beta-state"),
            Self::Alpha => write!(f, "alpha"),
        }
    }
}

/// A 3×3 response tensor evaluated at a single angular frequency.
///
/// The frequency is stored with the components so downstream contractions
/// (e.g. [`induced_dipole`]) cannot silently mix frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTensor {
    pub omega: f64,
    pub components: Matrix3<Complex64>,
    pub kind: ResponseKind,
    /// Phenomenological damping rate γ ≥ 0 (angular frequency).
    pub damping: f64,
}

impl ResponseTensor {
    /// Real part of the components. Exact for undamped tensors, whose
    /// imaginary parts are identically zero.
    pub fn real(&self) -> Matrix3<f64> {
        self.components.map(|c| c.re)
    }

    /// Mean of the diagonal, i.e. trace/3.
    pub fn isotropic_average(&self) -> Complex64 {
        (self.components[(0, 0)] + self.components[(1, 1)] + self.components[(2, 2)]) / 3.0
    }
}

fn check_pole(
    model: &AtomModel,
    state: usize,
    hw: f64,
    gamma: f64,
    squared: bool,
    omega: f64,
) -> Result<()> {
    if gamma > 0.0 {
        return Ok(());
    }
    for l in 0..model.num_levels() {
        if model.coupling_dipole(state, l) == Vector3::zeros() {
            continue;
        }
        let e_ln = model.transition_energy(l, state);
        // `squared` denominators vanish at hw = |E_LN|, plain ones at hw = -E_LN.
        let resonant = if squared { e_ln.abs() } else { -e_ln };
        if resonant > 0.0 && (hw - resonant).abs() < POLE_REL_TOL * resonant {
            return Err(MqedError::Pole {
                transition: format!("{} -> {}", model.label(state), model.label(l)),
                omega,
            });
        }
    }
    Ok(())
}

fn sum_over_states(
    model: &AtomModel,
    state: usize,
    denom: impl Fn(f64) -> Complex64,
    weight: impl Fn(f64) -> f64,
) -> Matrix3<Complex64> {
    let mut out = Matrix3::<Complex64>::zeros();
    for l in 0..model.num_levels() {
        let mu = model.coupling_dipole(state, l);
        if mu == Vector3::zeros() {
            continue;
        }
        let e_ln = model.transition_energy(l, state);
        let d = denom(e_ln);
        let w = weight(e_ln);
        for i in 0..3 {
            for j in 0..3 {
                out[(i, j)] += Complex64::new(2.0 * w * mu[i] * mu[j], 0.0) / d;
            }
        }
    }
    out
}

/// Ground-state β function, Σ_L 2 μ^{gL} ⊗ μ^{Lg} / (E_Lg + ħω).
/// Real, symmetric and pole-free for every ω ≥ 0.
pub fn beta_ground(model: &AtomModel, omega: f64, pc: &PhysicalConstants) -> ResponseTensor {
    assert!(omega >= 0.0, "beta_ground requires omega >= 0");
    let g = model.ground_index();
    let hw = pc.hbar * omega;
    let components =
        sum_over_states(model, g, |e| Complex64::new(e + hw, 0.0), |_| 1.0);
    ResponseTensor { omega, components, kind: ResponseKind::BetaGround, damping: 0.0 }
}

/// Dynamic polarizability of state `state_index`,
/// Σ_L 2 E_LN μ ⊗ μ / (E_LN² − (ħω)²), with optional damping ω → ω + iγ.
pub fn alpha_dynamic(
    model: &AtomModel,
    state_index: usize,
    omega: f64,
    gamma: f64,
    pc: &PhysicalConstants,
) -> Result<ResponseTensor> {
    let hw = pc.hbar * omega;
    check_pole(model, state_index, hw.abs(), gamma, true, omega)?;
    let hw_c = Complex64::new(hw, pc.hbar * gamma);
    let components = sum_over_states(
        model,
        state_index,
        |e| Complex64::new(e * e, 0.0) - hw_c * hw_c,
        |e| e,
    );
    Ok(ResponseTensor { omega, components, kind: ResponseKind::Alpha, damping: gamma })
}

/// β function of a generic state N, Σ_L 2 μ ⊗ μ / (E_LN + ħω). Identical
/// to [`beta_ground`] when N is the ground state; can have poles otherwise.
pub fn beta_state(
    model: &AtomModel,
    state_index: usize,
    omega: f64,
    gamma: f64,
    pc: &PhysicalConstants,
) -> Result<ResponseTensor> {
    let hw = pc.hbar * omega;
    check_pole(model, state_index, hw, gamma, false, omega)?;
    let hw_c = Complex64::new(hw, pc.hbar * gamma);
    let components =
        sum_over_states(model, state_index, |e| Complex64::new(e, 0.0) + hw_c, |_| 1.0);
    Ok(ResponseTensor { omega, components, kind: ResponseKind::BetaState, damping: gamma })
}

/// Isotropic average of the ground-state β function,
/// (2/3) Σ_L |μ^{Lg}|² / (E_Lg + ħω) = trace(β^g)/3.
pub fn beta_isotropic_avg(model: &AtomModel, omega: f64, pc: &PhysicalConstants) -> f64 {
    beta_ground(model, omega, pc).isotropic_average().re
}

/// Dipole moment induced by a field component at the tensor's frequency:
/// (μ_ind)_i = β_ij E_j.
pub fn induced_dipole(beta: &ResponseTensor, field: &Vector3<f64>) -> Vector3<Complex64> {
    beta.components * field.map(|x| Complex64::new(x, 0.0))
}

/// Isotropic-averaged polarizability on the imaginary frequency axis,
/// (1/3) Σ_L 2 E_LN |μ^{NL}|² / (E_LN² + (ħξ)²). Positive and smooth for
/// ground-state atoms; used by the continuum dispersion integrals.
pub fn alpha_imaginary_avg(
    model: &AtomModel,
    state_index: usize,
    xi: f64,
    pc: &PhysicalConstants,
) -> f64 {
    let hx2 = (pc.hbar * xi).powi(2);
    let mut sum = 0.0;
    for l in 0..model.num_levels() {
        let mu = model.coupling_dipole(state_index, l);
        if mu == Vector3::zeros() {
            continue;
        }
        let e = model.transition_energy(l, state_index);
        sum += 2.0 * e * mu.norm_squared() / (e * e + hx2);
    }
    sum / 3.0
}

/// Whether the ground-state polarizability tensor is a scalar multiple of
/// the identity (checked at a handful of frequencies below the first pole).
pub fn is_isotropic(model: &AtomModel, pc: &PhysicalConstants) -> bool {
    let gap = lowest_transition_energy(model);
    let gap = if gap.is_finite() { gap } else { 1.0 };
    for &f in &[0.0, 0.37, 0.71] {
        // stay below the lowest transition
        let omega = f * gap / pc.hbar * 0.9;
        let t = match alpha_dynamic(model, model.ground_index(), omega, 0.0, pc) {
            Ok(t) => t.real(),
            Err(_) => return false,
        };
        let avg = (t[(0, 0)] + t[(1, 1)] + t[(2, 2)]) / 3.0;
        let scale = avg.abs().max(1e-300);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { avg } else { 0.0 };
                if (t[(i, j)] - want).abs() > 1e-9 * scale {
                    return false;
                }
            }
        }
    }
    true
}

/// Smallest positive transition energy out of the ground state with a
/// nonzero dipole. Infinity if there is none.
pub fn lowest_transition_energy(model: &AtomModel) -> f64 {
    let g = model.ground_index();
    (0..model.num_levels())
        .filter(|&l| model.coupling_dipole(g, l) != Vector3::zeros())
        .map(|l| model.transition_energy(l, g))
        .filter(|&e| e > 0.0)
        .fold(f64::INFINITY, f64::min)
}
