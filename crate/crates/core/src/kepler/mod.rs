//! The curved Kepler problem: a particle of mass `m` attracted by a fixed
//! sun of mass `M` through the `cot φ` (sphere) or `coth φ` (hyperbolic
//! plane) potential,
//!
//! ```text
//! Kep_κ = (p_φ² + p_θ² / sin_k² φ) / (2 m ρ²) − (m M / ρ) cot_k φ.
//! ```
//!
//! Bounded orbits are conics on the surface with a focus at the sun. Their
//! central projection to the tangent plane at the sun is a planar Kepler
//! conic, which is what the Delaunay chart `(L, ℓ, G, g)` is built on.

mod anomaly;
mod conic;

pub use anomaly::{
    anomaly_convert, curved_kepler_equation, solve_curved_kepler, Anomaly, OrbitPoint,
};
pub use conic::{ConicGeometry, EllipticPoint, FlatEccentricPoint};
pub(crate) use anomaly::{flat_rate, true_of_flat};

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::space::{Curvature, CurvedSpace};

/// Closest admissible approach to the sun or the antipode, in angle.
pub const COLLISION_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerParams {
    /// Particle mass.
    pub m: f64,
    /// Sun mass.
    pub big_m: f64,
    pub space: CurvedSpace,
}

impl KeplerParams {
    pub fn new(m: f64, big_m: f64, space: CurvedSpace) -> Result<Self> {
        if !(m.is_finite() && m > 0.0 && big_m.is_finite() && big_m > 0.0) {
            return Err(Error::domain(format!("masses must be positive (m={m}, M={big_m})")));
        }
        Ok(Self { m, big_m, space })
    }

    /// `m² M`, the recurring scale of actions squared per length.
    fn m2m(&self) -> f64 {
        self.m * self.m * self.big_m
    }
}

/// Energy and squared angular momentum of the orbit with curved semi-axes
/// `α ≥ β > 0`.
pub fn energy_momentum_from_axes(alpha: f64, beta: f64, params: &KeplerParams) -> Result<(f64, f64)> {
    let s = &params.space;
    s.require_curved("energy from curved axes")?;
    if !(beta > 0.0 && beta <= alpha) {
        return Err(Error::domain(format!("need 0 < beta <= alpha (alpha={alpha}, beta={beta})")));
    }
    let rho = s.rho();
    let two_x = 2.0 * alpha / rho;
    if s.curvature() == Curvature::Spherical && two_x >= PI {
        return Err(Error::domain(format!("2 alpha / rho = {two_x} must be below pi")));
    }
    let h = -(params.m * params.big_m / rho) * s.cot_k(two_x);
    let g_sq = params.m2m() * rho * s.tan_k(beta / rho).powi(2) * s.cot_k(alpha / rho);
    Ok((h, g_sq))
}

/// Delaunay action `L = √(m² M ρ tan_k(α/ρ))` of a conic with semi-major axis `α`.
pub fn delaunay_l_from_alpha(alpha: f64, params: &KeplerParams) -> Result<f64> {
    let s = &params.space;
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("semi-major axis {alpha} must be positive")));
    }
    if !s.is_curved() {
        return Ok((params.m2m() * alpha).sqrt());
    }
    let x = alpha / s.rho();
    if s.curvature() == Curvature::Spherical && x >= 0.5 * PI {
        return Err(Error::domain(format!("alpha / rho = {x} must be below pi/2")));
    }
    Ok((params.m2m() * s.rho() * s.tan_k(x)).sqrt())
}

/// Inverse of [`delaunay_l_from_alpha`].
pub fn alpha_from_delaunay_l(l: f64, params: &KeplerParams) -> Result<f64> {
    let s = &params.space;
    if !(l > 0.0) {
        return Err(Error::domain(format!("L = {l} must be positive")));
    }
    if !s.is_curved() {
        return Ok(l * l / params.m2m());
    }
    Ok(s.rho() * s.atan_k(l * l / (params.m2m() * s.rho()))?)
}

/// Energy `h(L)` and mean motion `n(L) = dh/dL`.
pub fn kepler_energy_and_mean_motion(l: f64, params: &KeplerParams) -> (f64, f64) {
    let (m, big_m) = (params.m, params.big_m);
    let kappa = params.space.kappa();
    let c = m * m * m * big_m * big_m;
    let h = -c / (2.0 * l * l) + kappa * l * l / (2.0 * m);
    let n = c / (l * l * l) + kappa * l / m;
    (h, n)
}

/// Inverse of the energy relation on the bounded branch.
pub fn delaunay_l_from_energy(h: f64, params: &KeplerParams) -> Result<f64> {
    let (m, big_m) = (params.m, params.big_m);
    let kappa = params.space.kappa();
    let disc = h * h + kappa * m * m * big_m * big_m;
    if !(disc >= 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("energy {h} admits no bounded orbit")));
    }
    let denom = disc.sqrt() - h;
    if !(denom > 0.0) {
        return Err(Error::domain(format!("energy {h} admits no bounded orbit")));
    }
    let l = (m * m * m * big_m * big_m / denom).sqrt();
    if kepler_energy_and_mean_motion(l, params).1 <= 0.0 {
        return Err(Error::domain(format!("energy {h} is above the bounded range")));
    }
    Ok(l)
}

/// Delaunay action-angle state. `G` is signed: positive for counterclockwise
/// motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaunayState {
    pub l: f64,
    pub ell: f64,
    pub g_action: f64,
    pub g: f64,
}

impl DelaunayState {
    pub fn new(l: f64, ell: f64, g_action: f64, g: f64) -> Result<Self> {
        if !(l > 0.0) || g_action.abs() > l || !ell.is_finite() || !g.is_finite() {
            return Err(Error::domain(format!(
                "invalid Delaunay state (L={l}, G={g_action})"
            )));
        }
        Ok(Self { l, ell, g_action, g })
    }
}

/// Poincaré chart, regular across circular orbits. It covers the
/// counterclockwise orbits `G > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareState {
    pub big_lambda: f64,
    pub lambda: f64,
    pub xi: f64,
    pub eta: f64,
}

pub fn delaunay_to_poincare(state: &DelaunayState) -> PoincareState {
    let rad = (2.0 * (state.l - state.g_action.abs())).max(0.0).sqrt();
    let (sg, cg) = state.g.sin_cos();
    PoincareState {
        big_lambda: state.l,
        lambda: state.ell + state.g,
        xi: rad * cg,
        eta: rad * sg,
    }
}

/// Inverse chart. The second value is `true` when `ξ = η = 0`, where `g` is
/// undefined and set to zero.
pub fn poincare_to_delaunay(p: &PoincareState) -> Result<(DelaunayState, bool)> {
    let rad_sq = p.xi * p.xi + p.eta * p.eta;
    let g_action = p.big_lambda - 0.5 * rad_sq;
    if !(g_action >= 0.0) {
        return Err(Error::domain("xi² + eta² exceeds 2 Lambda"));
    }
    let degenerate = rad_sq == 0.0;
    let g = if degenerate { 0.0 } else { p.eta.atan2(p.xi) };
    let state = DelaunayState::new(p.big_lambda, p.lambda - g, g_action, g)?;
    Ok((state, degenerate))
}

/// Exact propagation: only the mean anomaly moves, at rate `n(L)`.
pub fn kepler_flow(state: &DelaunayState, dt: f64, params: &KeplerParams) -> DelaunayState {
    let (_, n) = kepler_energy_and_mean_motion(state.l, params);
    DelaunayState {
        ell: (state.ell + n * dt).rem_euclid(TAU),
        ..*state
    }
}

/// Cotangent state on the surface: angular distance `φ` from the sun, polar
/// angle `θ`, and their momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub phi: f64,
    pub p_phi: f64,
    pub theta: f64,
    pub p_theta: f64,
}

impl PolarState {
    pub fn new(phi: f64, p_phi: f64, theta: f64, p_theta: f64) -> Self {
        Self { phi, p_phi, theta, p_theta }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.phi, self.p_phi, self.theta, self.p_theta]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        Self::new(y[0], y[1], y[2], y[3])
    }
}

pub(crate) fn check_phi(phi: f64, space: &CurvedSpace) -> Result<()> {
    let far = space.curvature() == Curvature::Spherical && PI - phi <= COLLISION_GUARD;
    if !(phi > COLLISION_GUARD) || far {
        return Err(Error::NearCollision { phi, t: f64::NAN });
    }
    Ok(())
}

/// `Kep_κ` in the cotangent chart.
pub fn kepler_hamiltonian(state: &PolarState, params: &KeplerParams) -> Result<f64> {
    let s = &params.space;
    s.require_curved("cotangent-chart Kepler Hamiltonian")?;
    check_phi(state.phi, s)?;
    let rho = s.rho();
    let sn = s.sin_k(state.phi);
    let kin = (state.p_phi.powi(2) + (state.p_theta / sn).powi(2)) / (2.0 * params.m * rho * rho);
    Ok(kin - params.m * params.big_m / rho * s.cot_k(state.phi))
}

/// Hamilton's equations of `Kep_κ` in the cotangent chart.
pub fn kepler_vector_field(state: &PolarState, params: &KeplerParams) -> Result<PolarState> {
    let s = &params.space;
    s.require_curved("cotangent-chart Kepler field")?;
    check_phi(state.phi, s)?;
    let (m, rho) = (params.m, s.rho());
    let sn = s.sin_k(state.phi);
    let cs = s.cos_k(state.phi);
    let mr2 = m * rho * rho;
    let pt2 = state.p_theta * state.p_theta;
    Ok(PolarState {
        phi: state.p_phi / mr2,
        p_phi: pt2 * cs / (mr2 * sn * sn * sn) - m * params.big_m / (rho * sn * sn),
        theta: state.p_theta / (mr2 * sn * sn),
        p_theta: 0.0,
    })
}

/// Cotangent state of the orbit point with Delaunay coordinates `state`.
pub fn delaunay_to_polar(state: &DelaunayState, params: &KeplerParams) -> Result<PolarState> {
    let conic = ConicGeometry::from_actions(state.l, state.g_action, params)?;
    let nu = anomaly_convert(state.ell, Anomaly::Mean, Anomaly::True, &conic)?;
    Ok(conic.polar_state(nu, state.g))
}

/// Delaunay coordinates of a cotangent state with bounded, non-circular motion.
pub fn polar_to_delaunay(state: &PolarState, params: &KeplerParams) -> Result<DelaunayState> {
    let h = kepler_hamiltonian(state, params)?;
    let l = delaunay_l_from_energy(h, params)?;
    // Rounding in h can push |G| a hair above L on circular orbits.
    let g_action = state.p_theta.clamp(-l, l);
    let conic = ConicGeometry::from_actions(l, g_action, params)?;
    let nu = conic.true_anomaly_of(state)?;
    let sign = g_action.signum();
    let g = state.theta - sign * nu;
    let ell = anomaly_convert(nu, Anomaly::True, Anomaly::Mean, &conic)?;
    Ok(DelaunayState { l, ell: ell.rem_euclid(TAU), g_action, g })
}
