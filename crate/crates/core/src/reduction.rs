//! The curved two-body problem after reduction by rotations.
//!
//! Two masses `m₁ + m₂ = 1` on a surface of radius `ρ`, at angular distance
//! `φ`, with total angular momentum of length `C`. The reduced phase space is
//! `T*(0, π) × {coadjoint orbit}`, charted by `(φ, p_φ, θ, p_θ)` with
//!
//! ```text
//! ν = (w sin θ, w cos θ, p_θ),   w = √(C² − s p_θ²),
//! ```
//!
//! `s = ±1` the curvature sign. With `m = m₁m₂`, `S = sin_k φ` and
//!
//! ```text
//! A = m₁ sin_k²(m₂φ) + m₂ sin_k²(m₁φ)
//! B = m₁ cos_k²(m₂φ) + m₂ cos_k²(m₁φ)
//! D = (m₂ sin_k(2m₁φ) − m₁ sin_k(2m₂φ)) / 2
//! ```
//!
//! the reduced Hamiltonian is
//!
//! ```text
//! F = p_φ²/(2mρ²) − (m/ρ) cot_k φ + ν₁²/(2ρ²)
//!     + (ν₂² A + ν₃² B)/(2mρ²S²) + ν₂ν₃ D/(mρ²S²).
//! ```
//!
//! The relative motion is a Kepler problem with particle mass `m` and sun
//! mass `1`, perturbed by terms that vanish with `φ`.


use crate::error::{Error, Result};
use crate::integrate::VectorField;
use crate::kepler::{
    self, anomaly_convert, kepler_energy_and_mean_motion, Anomaly, ConicGeometry, DelaunayState,
    KeplerParams, PolarState,
};
use crate::space::CurvedSpace;

/// Reduced states share the cotangent chart of the Kepler problem.
pub type ReducedState = PolarState;

/// Two masses normalized to `m₁ + m₂ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassPair {
    m1: f64,
    m2: f64,
}

impl MassPair {
    /// Normalizes `(m₁, m₂)` to unit total mass.
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        if !(m1 > 0.0 && m2 > 0.0 && m1.is_finite() && m2.is_finite()) {
            return Err(Error::domain(format!("masses must be positive ({m1}, {m2})")));
        }
        let m1 = m1 / (m1 + m2);
        Ok(Self { m1, m2: 1.0 - m1 })
    }

    pub fn equal() -> Self {
        Self { m1: 0.5, m2: 0.5 }
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// `m = m₁ m₂`.
    pub fn m(&self) -> f64 {
        self.m1 * self.m2
    }

    /// `m_Δ = m₁ − m₂`.
    pub fn m_delta(&self) -> f64 {
        self.m1 - self.m2
    }

    /// `σ = (1 − m₁³ − m₂³) / 6`.
    pub fn sigma(&self) -> f64 {
        (1.0 - self.m1.powi(3) - self.m2.powi(3)) / 6.0
    }

    /// `m̃ = (1 − m₁³ − m₂³) / (12 m⁴)`.
    pub fn m_tilde(&self) -> f64 {
        (1.0 - self.m1.powi(3) - self.m2.powi(3)) / (12.0 * self.m().powi(4))
    }

    pub fn is_equal(&self) -> bool {
        self.m1 == self.m2
    }

    /// Kepler problem of the relative motion: particle mass `m`, sun mass 1.
    pub fn kepler_params(&self, space: CurvedSpace) -> Result<KeplerParams> {
        KeplerParams::new(self.m(), 1.0, space)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoadjointPoint {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
}

impl CoadjointPoint {
    /// `ν₁² + ν₂² + s ν₃²`, equal to `C²` on the orbit.
    pub fn casimir(&self, space: &CurvedSpace) -> f64 {
        self.nu1 * self.nu1 + self.nu2 * self.nu2 + space.sign() * self.nu3 * self.nu3
    }
}

/// `(w sin θ, w cos θ, p_θ)` with `w = √(C² − s p_θ²)`.
pub fn coadjoint_embed(p_theta: f64, theta: f64, c: f64, space: &CurvedSpace) -> Result<CoadjointPoint> {
    let w = chart_radius(p_theta, c, space)?;
    let (s, co) = theta.sin_cos();
    Ok(CoadjointPoint { nu1: w * s, nu2: w * co, nu3: p_theta })
}

fn chart_radius(p_theta: f64, c: f64, space: &CurvedSpace) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain(format!("total momentum C = {c} must be positive")));
    }
    let sign = space.sign();
    if sign > 0.0 && p_theta.abs() > c {
        return Err(Error::domain(format!("|p_theta| = {} exceeds C = {c}", p_theta.abs())));
    }
    let p = p_theta.abs();
    Ok(if sign > 0.0 {
        ((c - p) * (c + p)).max(0.0).sqrt()
    } else {
        (c * c + p * p).sqrt()
    })
}

/// Angle-dependent coefficients of the reduced Hamiltonian.
#[derive(Debug, Clone, Copy)]
struct Coefficients {
    /// `A / (2 m S²)` and its `φ`-derivative.
    a: f64,
    da: f64,
    /// `B / (2 m S²)`.
    b: f64,
    db: f64,
    /// `D / (m S²)`.
    d: f64,
    dd: f64,
}

fn coefficients(phi: f64, masses: &MassPair, space: &CurvedSpace) -> Coefficients {
    let (m1, m2, m) = (masses.m1, masses.m2, masses.m());
    let sign = space.sign();
    let sk = |x: f64| space.sin_k(x);
    let ck = |x: f64| space.cos_k(x);
    let big_a = m1 * sk(m2 * phi).powi(2) + m2 * sk(m1 * phi).powi(2);
    let big_b = m1 * ck(m2 * phi).powi(2) + m2 * ck(m1 * phi).powi(2);
    let big_d = 0.5 * (m2 * sk(2.0 * m1 * phi) - m1 * sk(2.0 * m2 * phi));
    let d_a = m * (sk(2.0 * m2 * phi) + sk(2.0 * m1 * phi));
    let d_b = -sign * d_a;
    let d_d = m * (ck(2.0 * m1 * phi) - ck(2.0 * m2 * phi));
    let s2 = sk(phi).powi(2);
    let ds2 = sk(2.0 * phi);
    let quot = |f: f64, df: f64, scale: f64| (f / (scale * s2), (df * s2 - f * ds2) / (scale * s2 * s2));
    let (a, da) = quot(big_a, d_a, 2.0 * m);
    let (b, db) = quot(big_b, d_b, 2.0 * m);
    let (d, dd) = quot(big_d, d_d, m);
    Coefficients { a, da, b, db, d, dd }
}

/// Which Hamiltonian a [`ReducedSystem`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// All terms of the reduced Hamiltonian.
    Full,
    /// Kepler part plus the leading curvature correction, `O(φ)` dropped:
    /// `Kep_κ + (C²/2 − s p_θ²)/ρ²`.
    Truncated,
}

/// The reduced two-body problem at fixed total angular momentum `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSystem {
    pub masses: MassPair,
    pub space: CurvedSpace,
    pub c: f64,
    pub model: Model,
}

impl ReducedSystem {
    pub fn new(masses: MassPair, space: CurvedSpace, c: f64, model: Model) -> Result<Self> {
        space.require_curved("reduced two-body problem")?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("total momentum C = {c} must be positive")));
        }
        Ok(Self { masses, space, c, model })
    }

    pub fn kepler_params(&self) -> KeplerParams {
        KeplerParams { m: self.masses.m(), big_m: 1.0, space: self.space }
    }

    fn check(&self, state: &ReducedState) -> Result<f64> {
        kepler::check_phi(state.phi, &self.space)?;
        if self.space.sign() > 0.0 && state.p_theta.abs() >= self.c {
            return Err(Error::chart(format!(
                "|p_theta| = {} must stay below C = {}",
                state.p_theta.abs(),
                self.c
            )));
        }
        chart_radius(state.p_theta, self.c, &self.space)
    }

    pub fn hamiltonian(&self, state: &ReducedState) -> Result<f64> {
        let w = self.check(state)?;
        let kep = kepler::kepler_hamiltonian(state, &self.kepler_params())?;
        let rho2 = self.space.rho().powi(2);
        let p = state.p_theta;
        match self.model {
            Model::Truncated => Ok(kep + (0.5 * self.c * self.c - self.space.sign() * p * p) / rho2),
            Model::Full => {
                let m = self.masses.m();
                let co = coefficients(state.phi, &self.masses, &self.space);
                let (st, ct) = state.theta.sin_cos();
                let s2 = self.space.sin_k(state.phi).powi(2);
                // Kep_κ already holds p²/(2mρ²S²); add ν₃²(B − 1)/(2mρ²S²).
                let extra = (w * st).powi(2) / 2.0
                    + (w * ct).powi(2) * co.a
                    + p * p * (co.b - 1.0 / (2.0 * m * s2))
                    + w * ct * p * co.d;
                Ok(kep + extra / rho2)
            }
        }
    }

    /// Hamilton's equations `(φ̇, ṗ_φ, θ̇, ṗ_θ)`.
    pub fn vector_field(&self, state: &ReducedState) -> Result<ReducedState> {
        let w = self.check(state)?;
        let kep = kepler::kepler_vector_field(state, &self.kepler_params())?;
        let rho2 = self.space.rho().powi(2);
        let sign = self.space.sign();
        let p = state.p_theta;
        match self.model {
            Model::Truncated => Ok(ReducedState {
                theta: kep.theta - 2.0 * sign * p / rho2,
                ..kep
            }),
            Model::Full => {
                let m = self.masses.m();
                let co = coefficients(state.phi, &self.masses, &self.space);
                let (st, ct) = state.theta.sin_cos();
                let sk = self.space.sin_k(state.phi);
                let s2 = sk * sk;
                let ds2 = self.space.sin_k(2.0 * state.phi);
                // Correction terms relative to the Kepler part, as in `hamiltonian`.
                let b_rel = co.b - 1.0 / (2.0 * m * s2);
                let db_rel = co.db + ds2 / (2.0 * m * s2 * s2);
                let w2 = w * w;
                let dh_dphi = (w2 * ct * ct * co.da + p * p * db_rel + w * ct * p * co.dd) / rho2;
                let dh_dtheta = (w2 * st * ct * (1.0 - 2.0 * co.a) - w * p * st * co.d) / rho2;
                let dw2_dp = -2.0 * sign * p;
                let dh_dp = (0.5 * dw2_dp * st * st
                    + dw2_dp * ct * ct * co.a
                    + 2.0 * p * b_rel
                    + ct * co.d * (w + p * 0.5 * dw2_dp / w))
                    / rho2;
                Ok(ReducedState {
                    phi: kep.phi,
                    p_phi: kep.p_phi - dh_dphi,
                    theta: kep.theta + dh_dp,
                    p_theta: -dh_dtheta,
                })
            }
        }
    }
}

impl VectorField for ReducedSystem {
    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let d = self.vector_field(&ReducedState::from_slice(y))?;
        dy[..4].copy_from_slice(&d.to_array());
        Ok(())
    }
}

/// Equal-mass form in the half angle `ψ = φ/2`, `p_ψ = 2 p_φ` (sphere):
///
/// ```text
/// F = (p_ψ² + p_θ²/sin²ψ)/(2ρ²) − cot ψ/(8ρ) + tan ψ/(8ρ)
///     + κ (C² − p_θ²)/2 · (1 + tan²ψ cos²θ).
/// ```
pub fn equal_mass_hamiltonian(state: &ReducedState, space: &CurvedSpace, c: f64) -> Result<f64> {
    space.require_spherical("equal-mass reduced Hamiltonian")?;
    kepler::check_phi(state.phi, space)?;
    if state.p_theta.abs() > c {
        return Err(Error::chart("|p_theta| exceeds C"));
    }
    let rho = space.rho();
    let psi = 0.5 * state.phi;
    let p_psi = 2.0 * state.p_phi;
    let (sp, cp) = psi.sin_cos();
    let tp = sp / cp;
    let kep = (p_psi * p_psi + (state.p_theta / sp).powi(2)) / (2.0 * rho * rho) - cp / sp / (8.0 * rho);
    let tc = tp * state.theta.cos();
    Ok(kep + tp / (8.0 * rho) + space.kappa() * (c * c - state.p_theta.powi(2)) / 2.0 * (1.0 + tc * tc))
}

/// Delaunay state in the scaled chart `L² = ρ𝐞L̂²`, `G² = ρ𝐞Ĝ²`, `C² = ρ𝐞Ĉ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledDelaunay {
    pub l_hat: f64,
    pub g_hat: f64,
    pub ell: f64,
    pub g: f64,
    pub c_hat: f64,
    pub eps: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("small parameter {eps} must be positive")));
    }
    Ok(())
}

/// Scales a Delaunay state and total momentum by `√(ρ𝐞)`.
pub fn scale(state: &DelaunayState, c: f64, rho: f64, eps: f64) -> Result<ScaledDelaunay> {
    check_eps(eps)?;
    let f = (rho * eps).sqrt();
    Ok(ScaledDelaunay {
        l_hat: state.l / f,
        g_hat: state.g_action / f,
        ell: state.ell,
        g: state.g,
        c_hat: c / f,
        eps,
    })
}

/// Inverse of [`scale`]: the Delaunay state and `C`.
pub fn unscale(s: &ScaledDelaunay, rho: f64) -> Result<(DelaunayState, f64)> {
    check_eps(s.eps)?;
    let f = (rho * s.eps).sqrt();
    let state = DelaunayState::new(s.l_hat * f, s.ell, s.g_hat * f, s.g)?;
    Ok((state, s.c_hat * f))
}

/// `t = (ρ𝐞)^{3/2} t̂`.
pub fn time_factor(rho: f64, eps: f64) -> f64 {
    (rho * eps).powf(1.5)
}

/// Scaled Kepler Hamiltonian `−m³/(2L̂²) + s 𝐞² L̂²/(2m)` and its
/// `L̂`-derivative.
pub fn scaled_kepler(l_hat: f64, masses: &MassPair, sign: f64, eps: f64) -> (f64, f64) {
    let m = masses.m();
    let e2 = eps * eps;
    let h = -m.powi(3) / (2.0 * l_hat * l_hat) + sign * e2 * l_hat * l_hat / (2.0 * m);
    let n = m.powi(3) / l_hat.powi(3) + sign * e2 * l_hat / m;
    (h, n)
}

/// How [`per_term`] evaluates the perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerRoute {
    /// `F̂_red − Kep_{𝐞²}`, the difference of the two Hamiltonians.
    Difference,
    /// The same quantity written term by term, without cancellation.
    Direct,
}

/// A fixed osculating orbit in the scaled chart, for evaluating the
/// perturbation along it.
#[derive(Debug, Clone, Copy)]
pub struct ScaledOrbit {
    pub l_hat: f64,
    pub g_hat: f64,
    pub c_hat: f64,
    pub eps: f64,
    pub masses: MassPair,
    pub space: CurvedSpace,
    pub conic: ConicGeometry,
}

impl ScaledOrbit {
    pub fn new(l_hat: f64, g_hat: f64, c_hat: f64, masses: MassPair, space: CurvedSpace, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        space.require_curved("scaled orbit")?;
        if space.sign() > 0.0 && g_hat.abs() > c_hat {
            return Err(Error::domain(format!("|G^| = {} exceeds C^ = {c_hat}", g_hat.abs())));
        }
        let f = (space.rho() * eps).sqrt();
        let params = masses.kepler_params(space)?;
        let conic = ConicGeometry::from_actions(l_hat * f, g_hat * f, &params)?;
        Ok(Self { l_hat, g_hat, c_hat, eps, masses, space, conic })
    }

    pub fn from_scaled(s: &ScaledDelaunay, masses: MassPair, space: CurvedSpace) -> Result<Self> {
        Self::new(s.l_hat, s.g_hat, s.c_hat, masses, space, s.eps)
    }

    /// `√(ρ𝐞)`.
    pub fn action_scale(&self) -> f64 {
        (self.space.rho() * self.eps).sqrt()
    }

    pub fn reduced_system(&self, model: Model) -> Result<ReducedSystem> {
        ReducedSystem::new(self.masses, self.space, self.c_hat * self.action_scale(), model)
    }

    /// Unscaled reduced state at mean anomaly `ℓ` and pericenter argument `g`.
    pub fn reduced_state(&self, ell: f64, g: f64) -> Result<ReducedState> {
        let nu = anomaly_convert(ell, Anomaly::Mean, Anomaly::True, &self.conic)?;
        Ok(self.conic.polar_state(nu, g))
    }

    /// The perturbation at an orbit point given by `(φ, θ)`.
    pub fn per_at(&self, phi: f64, theta: f64) -> Result<f64> {
        per_direct(phi, theta, self.g_hat, self.c_hat, &self.masses, &self.space, self.eps)
    }

    /// The perturbation at mean anomaly `ℓ`.
    pub fn per(&self, ell: f64, g: f64, route: PerRoute) -> Result<f64> {
        let state = self.reduced_state(ell, g)?;
        match route {
            PerRoute::Direct => self.per_at(state.phi, state.theta),
            PerRoute::Difference => {
                let sys = self.reduced_system(Model::Full)?;
                let f_hat = self.space.rho() * self.eps * sys.hamiltonian(&state)?;
                let (kep, _) = scaled_kepler(self.l_hat, &self.masses, self.space.sign(), self.eps);
                Ok(f_hat - kep)
            }
        }
    }
}

/// `Per = 𝐞²[ν̂₁²/2 + (ν̂₂² − s ν̂₃²) A/(2mS²) + ν̂₂ν̂₃ D/(mS²)]` with
/// `ν̂ = (ŵ sin θ, ŵ cos θ, Ĝ)`.
pub fn per_direct(phi: f64, theta: f64, g_hat: f64, c_hat: f64, masses: &MassPair, space: &CurvedSpace, eps: f64) -> Result<f64> {
    kepler::check_phi(phi, space)?;
    let w = chart_radius(g_hat, c_hat, space)?;
    let co = coefficients(phi, masses, space);
    let (st, ct) = theta.sin_cos();
    let (n1, n2, n3) = (w * st, w * ct, g_hat);
    Ok(eps * eps * (0.5 * n1 * n1 + (n2 * n2 - space.sign() * n3 * n3) * co.a + n2 * n3 * co.d))
}

/// `Per = F̂_red − Kep_{𝐞²}` at a scaled Delaunay state.
pub fn per_term(state: &ScaledDelaunay, masses: &MassPair, space: &CurvedSpace, route: PerRoute) -> Result<f64> {
    ScaledOrbit::from_scaled(state, *masses, *space)?.per(state.ell, state.g, route)
}

/// Mean motion of the Kepler part, `∂Kep_κ/∂L`, at the unscaled action.
pub fn kepler_mean_motion(l: f64, masses: &MassPair, space: &CurvedSpace) -> Result<f64> {
    Ok(kepler_energy_and_mean_motion(l, &masses.kepler_params(*space)?).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sphere() -> CurvedSpace {
        CurvedSpace::sphere(1.0).unwrap()
    }

    #[test]
    fn mass_coefficients() {
        let eq = MassPair::new(2.0, 2.0).unwrap();
        assert_eq!(eq.m1() + eq.m2(), 1.0);
        assert_eq!(eq.m(), 0.25);
        assert_eq!(eq.m_delta(), 0.0);
        assert!((eq.sigma() - 0.125).abs() < 1e-16);
        let p = MassPair::new(0.3, 0.7).unwrap();
        assert!((p.sigma() - p.m() / 2.0).abs() < 1e-16);
        assert!((p.m_tilde() - 1.0 / (4.0 * p.m().powi(3))).abs() < 1e-10);
        assert!(MassPair::new(0.0, 1.0).is_err());
    }

    #[test]
    fn coadjoint_chart() {
        let s = sphere();
        let pole = coadjoint_embed(1.5, 0.7, 1.5, &s).unwrap();
        assert_eq!((pole.nu1, pole.nu2, pole.nu3), (0.0, 0.0, 1.5));
        let eq = coadjoint_embed(0.0, 0.0, 2.0, &s).unwrap();
        assert_eq!((eq.nu1, eq.nu2, eq.nu3), (0.0, 2.0, 0.0));
        assert!(coadjoint_embed(2.1, 0.0, 2.0, &s).is_err());
        let h = CurvedSpace::hyperbolic(1.0).unwrap();
        let pt = coadjoint_embed(3.0, 0.4, 2.0, &h).unwrap();
        assert!((pt.casimir(&h) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn only_nu1_term_survives() {
        let sys = ReducedSystem::new(MassPair::new(0.3, 0.7).unwrap(), sphere(), 1.3, Model::Full).unwrap();
        let state = ReducedState::new(0.4, 0.2, 0.5 * PI, 0.0);
        let m = 0.21;
        let expect = 0.2f64.powi(2) / (2.0 * m) - m / 0.4f64.tan() + 1.3f64.powi(2) / 2.0;
        assert!((sys.hamiltonian(&state).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn truncated_precession() {
        let sys = ReducedSystem::new(MassPair::equal(), sphere(), 1.0, Model::Truncated).unwrap();
        let state = ReducedState::new(0.3, 0.0, 0.0, 0.5);
        let kep = kepler::kepler_vector_field(&state, &sys.kepler_params()).unwrap();
        let d = sys.vector_field(&state).unwrap();
        assert!((d.theta - kep.theta + 1.0).abs() < 1e-14);
    }

    #[test]
    fn scaling_round_trip() {
        let d = DelaunayState::new(0.1, 0.3, 0.05, 1.0).unwrap();
        let s = scale(&d, 0.2, 1.0, 0.01).unwrap();
        assert!((s.l_hat - 1.0).abs() < 1e-15);
        let (back, c) = unscale(&s, 1.0).unwrap();
        assert!((back.l - 0.1).abs() < 1e-16 && (back.g_action - 0.05).abs() < 1e-16);
        assert!((c - 0.2).abs() < 1e-16);
        let id = scale(&d, 0.2, 1.0, 1.0).unwrap();
        assert_eq!((id.l_hat, id.g_hat, id.c_hat), (0.1, 0.05, 0.2));
        assert_eq!(time_factor(1.0, 1.0), 1.0);
    }

    #[test]
    fn per_routes_agree() {
        let masses = MassPair::new(0.3, 0.7).unwrap();
        for space in [sphere(), CurvedSpace::hyperbolic(2.0).unwrap()] {
            let orbit = ScaledOrbit::new(1.0, 0.6, 1.2, masses, space, 0.02).unwrap();
            for &ell in &[0.0, 1.0, 2.5, 4.0] {
                let a = orbit.per(ell, 0.7, PerRoute::Difference).unwrap();
                let b = orbit.per(ell, 0.7, PerRoute::Direct).unwrap();
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn per_is_independent_of_radius() {
        let masses = MassPair::new(0.4, 0.6).unwrap();
        let a = ScaledOrbit::new(1.0, 0.5, 1.1, masses, sphere(), 0.03).unwrap();
        let b = ScaledOrbit::new(1.0, 0.5, 1.1, masses, CurvedSpace::sphere(7.0).unwrap(), 0.03).unwrap();
        let pa = a.per(1.3, 0.2, PerRoute::Direct).unwrap();
        let pb = b.per(1.3, 0.2, PerRoute::Direct).unwrap();
        assert!((pa - pb).abs() < 1e-15);
    }
}
