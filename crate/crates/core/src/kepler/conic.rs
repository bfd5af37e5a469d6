use std::f64::consts::PI;

use super::{KeplerParams, PolarState};
use crate::elliptic::{jacobi_sn_cn_dn, EllipticModulus};
use crate::error::{Error, Result};
use crate::space::{Curvature, CurvedSpace};

/// Below this curved eccentricity an orbit is treated as circular.
pub const CIRCULAR_EPS: f64 = 1e-8;

/// A bounded curved Kepler orbit: its conic on the surface and the planar
/// conic it projects to centrally.
///
/// On the sphere the projected conic is an ellipse only while the orbit
/// stays in the open hemisphere around the sun. Orbits crossing the equator
/// project to hyperbolas (`e > 1`, `a < 0`); everything except the flat
/// eccentric anomaly still works for them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicGeometry {
    /// Curved semi-major axis.
    pub alpha: f64,
    /// Curved semi-minor axis.
    pub beta: f64,
    /// Curved eccentricity.
    pub epsilon: f64,
    /// Projected semi-major axis; negative for a projected hyperbola.
    pub a: f64,
    /// Projected eccentricity.
    pub e: f64,
    /// Projected semi-minor axis `√(|a| p²)`.
    pub b: f64,
    /// Projected semi-latus rectum `G² / (m² M)` (a length).
    pub p_sq: f64,
    /// `sin(αε/ρ)` (sphere) or `sinh(αε/ρ)` (hyperbolic plane).
    pub k: f64,
    /// `cos(αε/ρ)` or `cosh(αε/ρ)`.
    pub k_prime: f64,
    /// Delaunay action `L`.
    pub l: f64,
    /// Signed angular momentum `G`.
    pub g_action: f64,
    params: KeplerParams,
    /// `α / ρ`.
    x: f64,
    /// `αε / ρ`.
    y: f64,
    /// `1 − e` without cancellation for nearly radial orbits.
    one_minus_e: f64,
}

/// Central projection coordinates for the flat eccentric anomaly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatEccentricPoint {
    pub r: f64,
    pub x: f64,
    pub y: f64,
}

/// Orthogonal projection coordinates for the elliptic parameter `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPoint {
    /// `ρ sin φ`.
    pub big_r: f64,
    pub big_x: f64,
    pub big_y: f64,
}

impl ConicGeometry {
    /// Conic of the orbit with actions `L > 0` and `0 < |G| ≤ L`.
    pub fn from_actions(l: f64, g_action: f64, params: &KeplerParams) -> Result<Self> {
        let space = params.space;
        space.require_curved("conic geometry")?;
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::domain(format!("L = {l} must be positive")));
        }
        let g_abs = g_action.abs();
        if !(g_abs > 0.0) {
            return Err(Error::domain("G = 0 is a radial collision orbit"));
        }
        if g_abs > l {
            return Err(Error::domain(format!("|G| = {g_abs} exceeds L = {l}")));
        }
        let rho = space.rho();
        let scale = params.m2m() * rho;
        // A = tan_k x, B = tan_k(β/ρ).
        let big_a = l * l / scale;
        let big_b = g_abs * l / scale;
        let diff = l * l * (l - g_abs) * (l + g_abs) / (scale * scale);
        let s = space.sign();
        let (x, y, b_ang) = match space.curvature() {
            Curvature::Spherical => {
                let y = diff.sqrt().atan2((1.0 + big_b * big_b).sqrt());
                (big_a.atan(), y, big_b.atan())
            }
            _ => {
                if big_a >= 1.0 {
                    return Err(Error::domain(format!(
                        "L² = {} reaches m² M ρ: no bounded orbit",
                        l * l
                    )));
                }
                let y = (diff.sqrt() / (1.0 - big_b * big_b).sqrt()).atanh();
                (big_a.atanh(), y, big_b.atanh())
            }
        };
        let e = (diff / (big_a * big_a) * (1.0 + s * big_b * big_b)).sqrt();
        let ratio = g_abs / l;
        let one_minus_e = ratio * ratio * (1.0 - s * diff) / (1.0 + e);
        let p_sq = rho * big_b * big_b / big_a;
        let a = rho * big_a / (1.0 - s * diff);
        Ok(Self {
            alpha: rho * x,
            beta: rho * b_ang,
            epsilon: y / x,
            a,
            e,
            b: (a.abs() * p_sq).sqrt(),
            p_sq,
            k: space.sin_k(y),
            k_prime: space.cos_k(y),
            l,
            g_action,
            params: *params,
            x,
            y,
            one_minus_e,
        })
    }

    /// Counterclockwise orbit with curved semi-axes `α ≥ β`.
    pub fn from_axes(alpha: f64, beta: f64, params: &KeplerParams) -> Result<Self> {
        let (_, g_sq) = super::energy_momentum_from_axes(alpha, beta, params)?;
        let l = super::delaunay_l_from_alpha(alpha, params)?;
        Self::from_actions(l, g_sq.sqrt().min(l), params)
    }

    pub fn params(&self) -> &KeplerParams {
        &self.params
    }

    pub fn space(&self) -> &CurvedSpace {
        &self.params.space
    }

    pub fn is_circular(&self) -> bool {
        self.epsilon < CIRCULAR_EPS
    }

    pub fn mean_motion(&self) -> f64 {
        super::kepler_energy_and_mean_motion(self.l, &self.params).1
    }

    /// Orientation sign: `θ = g + sign · ν`.
    pub fn orientation(&self) -> f64 {
        self.g_action.signum()
    }

    pub fn modulus(&self) -> Result<EllipticModulus> {
        self.space().require_spherical("elliptic parametrization")?;
        EllipticModulus::from_angle(self.y)
    }

    /// `α / ρ`.
    pub fn x_angle(&self) -> f64 {
        self.x
    }

    /// Pericenter and apocenter angular distances.
    pub fn apsides(&self) -> (f64, f64) {
        (self.x - self.y, self.x + self.y)
    }

    /// Angular distance from the sun at true anomaly `ν`.
    /// `1 + e cos ν`, accurate near apocenter when `e` is close to 1.
    fn focal_factor(&self, nu: f64) -> f64 {
        let c = (0.5 * nu).cos();
        self.one_minus_e + 2.0 * self.e * c * c
    }

    pub fn phi_of_nu(&self, nu: f64) -> f64 {
        let q = self.focal_factor(nu);
        let rho = self.space().rho();
        match self.space().curvature() {
            Curvature::Spherical => self.p_sq.atan2(rho * q),
            _ => (self.p_sq / (rho * q)).atanh(),
        }
    }

    /// `(r, φ, θ)` at true anomaly `ν` for argument of pericenter `g`.
    /// `r = ρ tan φ` is infinite on the equator and negative beyond it.
    pub fn position_from_true_anomaly(&self, nu: f64, g: f64) -> (f64, f64, f64) {
        let r = self.p_sq / self.focal_factor(nu);
        (r, self.phi_of_nu(nu), g + self.orientation() * nu)
    }

    /// Cotangent state at true anomaly `ν`.
    pub fn polar_state(&self, nu: f64, g: f64) -> PolarState {
        let p = &self.params;
        let (_, phi, theta) = self.position_from_true_anomaly(nu, g);
        let p_phi = p.m2m() * self.space().rho() * self.e * nu.sin() / self.g_action.abs();
        PolarState { phi, p_phi, theta, p_theta: self.g_action }
    }

    /// True anomaly of a cotangent state lying on this orbit.
    pub fn true_anomaly_of(&self, state: &PolarState) -> Result<f64> {
        let s = self.space();
        crate::kepler::check_phi(state.phi, s)?;
        let rho = s.rho();
        let e_cos = self.p_sq * s.cot_k(state.phi) / rho - 1.0;
        let e_sin = self.g_action.abs() * state.p_phi / (self.params.m2m() * rho);
        Ok(e_sin.atan2(e_cos))
    }

    /// Central projection parametrized by the flat eccentric anomaly.
    pub fn flat_eccentric_parametrization(&self, u_o: f64) -> Result<FlatEccentricPoint> {
        self.require_projected_ellipse()?;
        let (s, c) = u_o.sin_cos();
        Ok(FlatEccentricPoint {
            r: self.a * (1.0 - self.e * c),
            x: self.a * (c - self.e),
            y: self.b * s,
        })
    }

    pub(crate) fn require_projected_ellipse(&self) -> Result<()> {
        if self.e < 1.0 && self.a > 0.0 {
            Ok(())
        } else {
            Err(Error::unsupported(format!(
                "projected conic is not an ellipse (e = {})",
                self.e
            )))
        }
    }

    /// Orthogonal projection of the orbit parametrized by Jacobi functions
    /// of `w` (sphere only).
    pub fn elliptic_parametrization(&self, w: f64) -> Result<EllipticPoint> {
        let modulus = self.modulus()?;
        let t = jacobi_sn_cn_dn(w, &modulus);
        let rho = self.space().rho();
        let (sx, cx) = self.x.sin_cos();
        let (k, kp) = (modulus.k(), modulus.k_prime());
        let tan_b = (self.beta / rho).tan();
        Ok(EllipticPoint {
            big_r: rho * (sx * kp * t.nd() - cx * k * t.cd()),
            big_x: rho * (sx * kp * t.cd() - cx * k * t.nd()),
            big_y: rho * tan_b * cx * t.sd(),
        })
    }

    /// Angular distance of an orthogonal-projection point, valid on both
    /// sides of the equator.
    pub fn phi_of_elliptic_point(&self, pt: &EllipticPoint) -> f64 {
        let rho = self.space().rho();
        (pt.big_r / rho).atan2((pt.big_r + self.e * pt.big_x) / self.p_sq)
    }

    /// Curved semi-axes check: `cos(β/ρ) = cos(α/ρ) / cos(αε/ρ)` and its
    /// hyperbolic analogue. Returns the residual.
    pub fn triangle_residual(&self) -> f64 {
        let s = self.space();
        let rho = s.rho();
        s.cos_k(self.beta / rho) - s.cos_k(self.x) / s.cos_k(self.y)
    }

    /// Closed forms of the spherical cosine rule for `(e, p²)`, used as an
    /// independent check of the action-based values.
    pub fn cosine_rule_e_p(&self) -> (f64, f64) {
        let s = self.space();
        let rho = s.rho();
        let (two_x, two_y) = (2.0 * self.x, 2.0 * self.y);
        let e = s.sin_k(two_y) / s.sin_k(two_x);
        let p = rho * s.sign() * (s.cos_k(two_y) - s.cos_k(two_x)) / s.sin_k(two_x);
        (e, p)
    }

    /// Apocenter lies past the equator.
    pub fn crosses_equator(&self) -> bool {
        self.space().curvature() == Curvature::Spherical && self.x + self.y >= 0.5 * PI
    }
}
