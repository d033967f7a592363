//! Field geometries, mode functions and the continuum-limit quadrature.
//!
//! Free-space modes are plane waves, f_kλ(r) = i√(2πħω_k/V) ê_kλ e^{ik·r},
//! with a deterministic right-handed polarization dyad per direction:
//! ê₁ ∝ ẑ × k̂ (x̂ when k̂ ∥ ẑ) and ê₂ = k̂ × ê₁.
//!
//! The conducting-plane geometry (perfect mirror filling z < 0) uses the
//! standard half-space traveling-wave set: one incident plus one specularly
//! reflected wave per polarization, with a sign flip for TE (ê₁) and
//! component-wise reflection for TM (ê₂), so tangential electric components
//! vanish at z = 0. Modes are labeled by wavevectors in the k_z > 0
//! hemisphere and normalized per half-space box; only volume-independent
//! observables are reported.
//!
//! The continuum limit Σ_k → (V/(2π)³) ∫d³k is realized by
//! [`continuum_integrate`]: composite Gauss–Legendre panels in the radial
//! and polar directions, a trapezoid rule in azimuth (exact for the low
//! harmonics that occur here), and node-doubling refinement for the error
//! estimate.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{MqedError, Result};
use crate::model::PhysicalConstants;

/// Boundary-condition family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    FreeSpace,
    /// Perfect conductor filling z < 0; atoms live in the half-space z > 0.
    ConductingPlane,
}

/// A field geometry: the boundary-condition family plus the quantization
/// volume. The plane sits at z = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    pub volume: f64,
}

impl GeometrySpec {
    pub fn free_space(volume: f64) -> Self {
        Self { kind: GeometryKind::FreeSpace, volume }
    }

    pub fn conducting_plane(volume: f64) -> Self {
        Self { kind: GeometryKind::ConductingPlane, volume }
    }

    fn check(&self) -> Result<()> {
        if self.volume <= 0.0 {
            return Err(MqedError::InvalidArgument("quantization volume must be > 0".into()));
        }
        Ok(())
    }
}

/// A mode-function value f_kλ(r) at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunctionValue {
    pub k: Vector3<f64>,
    /// Polarization index λ ∈ {0, 1} (TE/ê₁, TM/ê₂).
    pub polarization: usize,
    pub value: Vector3<Complex64>,
}

/// Deterministic orthonormal polarization dyad for a direction k̂.
pub fn polarization_vectors(khat: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let z = Vector3::z();
    let cross = z.cross(khat);
    let e1 = if cross.norm() < 1e-12 { Vector3::x() } else { cross.normalize() };
    let e2 = khat.cross(&e1);
    (e1, e2)
}

fn unit_and_norm(k: &Vector3<f64>) -> Result<(Vector3<f64>, f64)> {
    let norm = k.norm();
    if norm == 0.0 {
        return Err(MqedError::InvalidArgument("mode functions undefined at k = 0".into()));
    }
    Ok((k / norm, norm))
}

/// Free-space mode function i√(2πħω_k/V) ê_kλ e^{ik·r}.
pub fn mode_function_free(
    geometry: &GeometrySpec,
    k: &Vector3<f64>,
    lambda: usize,
    r: &Vector3<f64>,
    pc: &PhysicalConstants,
) -> Result<ModeFunctionValue> {
    geometry.check()?;
    if geometry.kind != GeometryKind::FreeSpace {
        return Err(MqedError::InvalidArgument("mode_function_free needs free-space geometry".into()));
    }
    let (khat, knorm) = unit_and_norm(k)?;
    let omega = pc.c * knorm;
    let amp = (2.0 * std::f64::consts::PI * pc.hbar * omega / geometry.volume).sqrt();
    let (e1, e2) = polarization_vectors(&khat);
    let e = if lambda == 0 { e1 } else { e2 };
    let phase = Complex64::new(0.0, 1.0) * Complex64::new(0.0, k.dot(r)).exp();
    Ok(ModeFunctionValue { k: *k, polarization: lambda, value: e.map(|x| phase * amp * x) })
}

/// Half-space mode function for the conducting plane: incident wave (label
/// k, k_z > 0) plus its specular reflection off z = 0.
pub fn mode_function_plane(
    geometry: &GeometrySpec,
    k: &Vector3<f64>,
    lambda: usize,
    r: &Vector3<f64>,
    pc: &PhysicalConstants,
) -> Result<ModeFunctionValue> {
    geometry.check()?;
    if geometry.kind != GeometryKind::ConductingPlane {
        return Err(MqedError::InvalidArgument(
            "mode_function_plane needs conducting-plane geometry".into(),
        ));
    }
    if r.z <= 0.0 {
        return Err(MqedError::InvalidArgument(
            "position must be in the half-space z > 0".into(),
        ));
    }
    let (khat, knorm) = unit_and_norm(k)?;
    if k.z <= 0.0 {
        return Err(MqedError::InvalidArgument(
            "plane modes are labeled by wavevectors with k_z > 0".into(),
        ));
    }
    let omega = pc.c * knorm;
    let amp = (2.0 * std::f64::consts::PI * pc.hbar * omega / geometry.volume).sqrt();

    let k_refl = Vector3::new(k.x, k.y, -k.z);
    let khat_refl = k_refl / knorm;
    let (e1, e2) = polarization_vectors(&khat);
    let (e1r, e2r) = polarization_vectors(&khat_refl);
    // TE reflects with a sign flip, TM component-wise (tangential E cancels
    // at z = 0 either way).
    let (e, er, refl_sign) =
        if lambda == 0 { (e1, e1r, -1.0) } else { (e2, e2r, 1.0) };

    let i = Complex64::new(0.0, 1.0);
    let ph_inc = (i * k.dot(r)).exp();
    let ph_refl = (i * k_refl.dot(r)).exp();
    let value = Vector3::from_fn(|j, _| {
        i * amp * (ph_inc * e[j] + refl_sign * ph_refl * er[j])
    });
    Ok(ModeFunctionValue { k: *k, polarization: lambda, value })
}

/// Transverse projector Σ_λ ê_kλ ⊗ ê_kλ = δ_ij − k̂_i k̂_j.
pub fn polarization_sum(k: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let (khat, _) = unit_and_norm(k)?;
    Ok(Matrix3::identity() - khat * khat.transpose())
}

/// Mode-density dyad f*_i f_j of a single mode, with the quantization
/// volume scaled out (computed at V = 1; the continuum measure cancels V).
pub fn density_dyad(f: &ModeFunctionValue) -> Matrix3<Complex64> {
    Matrix3::from_fn(|i, j| f.value[i].conj() * f.value[j])
}

/// Difference between the conducting-plane mode density and the matching
/// free-space density (the incident plus reflected directions at the same
/// |k| and polarization), at height z. This is the single integrand whose
/// k-integral gives the Casimir–Polder difference energy; the divergent
/// free-space part cancels inside it.
pub fn plane_minus_free_density(
    k: &Vector3<f64>,
    lambda: usize,
    z: f64,
    pc: &PhysicalConstants,
) -> Result<Matrix3<Complex64>> {
    let r = Vector3::new(0.0, 0.0, z);
    let plane_geom = GeometrySpec::conducting_plane(1.0);
    let free_geom = GeometrySpec::free_space(1.0);
    let fp = mode_function_plane(&plane_geom, k, lambda, &r, pc)?;
    let fi = mode_function_free(&free_geom, k, lambda, &r, pc)?;
    let k_refl = Vector3::new(k.x, k.y, -k.z);
    let fr = mode_function_free(&free_geom, &k_refl, lambda, &r, pc)?;
    Ok(density_dyad(&fp) - density_dyad(&fi) - density_dyad(&fr))
}

/// Ultraviolet regularization of mode sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// Hard cutoff: integrate k ∈ [0, k_max].
    Hard(f64),
    /// Exponential cutoff scale k_c; the caller multiplies its integrand by
    /// e^{−k/k_c} and the engine truncates where that factor is negligible.
    Exponential(f64),
}

impl Cutoff {
    pub fn scale(&self) -> f64 {
        match self {
            Cutoff::Hard(k) | Cutoff::Exponential(k) => *k,
        }
    }

    fn k_max(&self) -> f64 {
        match self {
            Cutoff::Hard(k) => *k,
            Cutoff::Exponential(kc) => 35.0 * kc,
        }
    }
}

/// Quadrature configuration for continuum mode integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Radial node budget (composite 16-point Gauss–Legendre panels).
    pub radial_nodes: usize,
    /// Polar (cos θ) node budget.
    pub angular_nodes: usize,
    pub cutoff: Cutoff,
    /// Target relative tolerance for the refinement loop.
    pub tol: f64,
}

impl QuadratureSpec {
    pub fn new(radial_nodes: usize, angular_nodes: usize, cutoff: Cutoff, tol: f64) -> Result<Self> {
        if radial_nodes < 2 || angular_nodes < 2 {
            return Err(MqedError::InvalidArgument("node counts must be >= 2".into()));
        }
        if cutoff.scale() <= 0.0 {
            return Err(MqedError::InvalidArgument("cutoff must be > 0".into()));
        }
        Ok(Self { radial_nodes, angular_nodes, cutoff, tol })
    }

    /// A reasonable default for smooth, exponentially cut-off integrands.
    pub fn default_exponential(k_c: f64) -> Self {
        Self { radial_nodes: 128, angular_nodes: 32, cutoff: Cutoff::Exponential(k_c), tol: 1e-6 }
    }
}

/// Result of a continuum integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Relative error estimate from node-doubling (Richardson-style).
    pub error_estimate: f64,
    pub radial_nodes_used: usize,
    pub angular_nodes_used: usize,
}

const MAX_REFINEMENTS: usize = 3;
const PHI_NODES: usize = 12;

/// (1/(2π)³) ∫d³k Σ_λ integrand(|k|, k̂, λ) over the full sphere of
/// directions. The integrand must be finite everywhere on the domain and
/// should include the regularizing cutoff factor itself.
pub fn continuum_integrate(
    integrand: impl Fn(f64, &Vector3<f64>, usize) -> Complex64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    continuum_integrate_polar_range(integrand, spec, -1.0, 1.0)
}

/// Same as [`continuum_integrate`] but restricted to directions with
/// cos θ ∈ [u_lo, u_hi] (e.g. the k_z > 0 hemisphere for the plane geometry).
pub fn continuum_integrate_polar_range(
    integrand: impl Fn(f64, &Vector3<f64>, usize) -> Complex64,
    spec: &QuadratureSpec,
    u_lo: f64,
    u_hi: f64,
) -> Result<QuadratureResult> {
    let k_max = spec.cutoff.k_max();
    // Budgets quantize up to whole 16-node panels; refinement doubles the
    // panel counts so every step genuinely changes the grid.
    let mut pr = spec.radial_nodes.div_ceil(16).max(1);
    let mut pa = spec.angular_nodes.div_ceil(16).max(1);
    let mut prev = eval_grid(&integrand, k_max, pr * 16, pa * 16, u_lo, u_hi);
    let mut err = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        pr *= 2;
        pa *= 2;
        let cur = eval_grid(&integrand, k_max, pr * 16, pa * 16, u_lo, u_hi);
        let diff = (cur - prev).norm();
        err = if diff == 0.0 { 0.0 } else { diff / cur.norm().max(1e-300) };
        if err <= spec.tol {
            return Ok(QuadratureResult {
                value: cur,
                error_estimate: err,
                radial_nodes_used: pr * 16,
                angular_nodes_used: pa * 16,
            });
        }
        prev = cur;
    }
    Err(MqedError::NonConvergence { estimate: err, target: spec.tol })
}

fn eval_grid(
    integrand: &impl Fn(f64, &Vector3<f64>, usize) -> Complex64,
    k_max: f64,
    n_rad: usize,
    n_ang: usize,
    u_lo: f64,
    u_hi: f64,
) -> Complex64 {
    let radial = composite_gauss(0.0, k_max, n_rad);
    let polar = composite_gauss(u_lo, u_hi, n_ang);
    let dphi = 2.0 * std::f64::consts::PI / PHI_NODES as f64;
    let phis: Vec<(f64, f64)> =
        (0..PHI_NODES).map(|i| i as f64 * dphi).map(|p| (p.cos(), p.sin())).collect();

    let mut total = Complex64::new(0.0, 0.0);
    for &(k, wk) in &radial {
        let mut shell = Complex64::new(0.0, 0.0);
        for &(u, wu) in &polar {
            let s = (1.0 - u * u).max(0.0).sqrt();
            for &(cp, sp) in &phis {
                let khat = Vector3::new(s * cp, s * sp, u);
                let mut v = integrand(k, &khat, 0) + integrand(k, &khat, 1);
                v *= wu * dphi;
                shell += v;
            }
        }
        total += shell * wk * k * k;
    }
    total / (2.0 * std::f64::consts::PI).powi(3)
}

/// Composite 16-point Gauss–Legendre nodes and weights on [a, b], with a
/// total node budget of at least `n`.
pub(crate) fn composite_gauss(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let panels = n.div_ceil(16).max(1);
    let base = gauss_legendre_16();
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        for &(x, w) in base {
            out.push((mid + half * x, half * w));
        }
    }
    out
}

/// Nodes/weights of the 16-point Gauss–Legendre rule on [-1, 1], computed
/// once by Newton iteration on P_16.
fn gauss_legendre_16() -> &'static [(f64, f64); 16] {
    use std::sync::OnceLock;
    static RULE: OnceLock<[(f64, f64); 16]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 16usize;
        let mut rule = [(0.0, 0.0); 16];
        for i in 0..n {
            // Chebyshev-based initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_and_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_and_derivative(n, x);
            rule[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
