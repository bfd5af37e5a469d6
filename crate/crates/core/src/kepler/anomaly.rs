//! Anomalies along a curved Kepler orbit and the curved Kepler equation.
//!
//! On the sphere everything is routed through the elliptic parameter `w` of
//! the orthogonal projection, for which the mean anomaly has the closed form
//!
//! ```text
//! ℓ(w) = arccos(cd w) − cot(α/ρ) · atanh(k sn w).
//! ```
//!
//! On the hyperbolic plane the route is the flat eccentric anomaly `u_o` of
//! the (always elliptic) projected conic, with `ℓ(u_o)` integrated by
//! Gauss–Legendre quadrature.

use std::f64::consts::{PI, TAU};

use super::ConicGeometry;
use crate::elliptic::{inverse_amplitude, jacobi_sn_cn_dn, EllipticModulus};
use crate::error::{Error, Result};
use crate::quad;
use crate::space::Curvature;

const NEWTON_MAX: usize = 100;
const ELL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Anomaly {
    Mean,
    True,
    FlatEccentric,
    EllipticW,
    GeometricU,
}

/// Wraps into `(-π, π]`.
fn wrap_pi(x: f64) -> f64 {
    x - TAU * ((x + PI) / TAU).ceil() + TAU
}

/// Newton iteration for an increasing `f` on `[lo, hi]` with `f(lo) ≤ 0 ≤ f(hi)`,
/// bisecting whenever a step leaves the bracket.
fn safeguarded_newton<F>(mut f: F, mut lo: f64, mut hi: f64, x0: f64, tol: f64, what: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let mut x = if x0 >= lo && x0 <= hi { x0 } else { 0.5 * (lo + hi) };
    let mut last = f64::INFINITY;
    for _ in 0..NEWTON_MAX {
        let (v, dv) = f(x)?;
        last = v;
        if v.abs() <= tol {
            return Ok(x);
        }
        if v > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mut next = x - v / dv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence { what, iterations: NEWTON_MAX, residual: last.abs() })
}

struct SphereRoute<'a> {
    conic: &'a ConicGeometry,
    modulus: EllipticModulus,
    quarter: f64,
}

impl<'a> SphereRoute<'a> {
    fn new(conic: &'a ConicGeometry) -> Result<Self> {
        let modulus = conic.modulus()?;
        Ok(Self { conic, modulus, quarter: modulus.quarter_period() })
    }

    /// `(ℓ, dℓ/dw)`.
    fn mean(&self, w: f64) -> (f64, f64) {
        let t = jacobi_sn_cn_dn(w, &self.modulus);
        let (k, kp) = (self.modulus.k(), self.modulus.k_prime());
        // arccos(cd) continued: same quadrant as the amplitude.
        let psi = t.am + wrap_pi((kp * t.sn).atan2(t.cn) - t.am);
        let x = self.conic.x_angle();
        let ell = psi - (k * t.sn).atanh() / x.tan();
        let dl = kp * t.nd() - k * t.cd() / x.tan();
        (ell, dl)
    }

    fn w_of_mean(&self, ell: f64) -> Result<f64> {
        let turns = (ell / TAU).floor();
        let target = ell - TAU * turns;
        let period = 4.0 * self.quarter;
        let w = safeguarded_newton(
            |w| {
                let (l, dl) = self.mean(w);
                Ok((l - target, dl))
            },
            0.0,
            period,
            2.0 * self.quarter * target / PI,
            ELL_TOL,
            "curved Kepler equation",
        )?;
        Ok(w + period * turns)
    }

    /// `(ν, dν/dw)`.
    fn true_anomaly(&self, w: f64) -> Result<(f64, f64)> {
        let pt = self.conic.elliptic_parametrization(w)?;
        let base = PI * w / (2.0 * self.quarter);
        let nu = base + wrap_pi(pt.big_y.atan2(pt.big_x) - base);
        let c = self.conic;
        let p = c.params();
        let rho = p.space.rho();
        let dnu = c.g_action.abs() / (c.mean_motion() * p.m * rho * pt.big_r * c.x_angle().sin());
        Ok((nu, dnu))
    }

    fn w_of_true(&self, nu: f64) -> Result<f64> {
        let turns = (nu / TAU).floor();
        let target = nu - TAU * turns;
        let period = 4.0 * self.quarter;
        let w = safeguarded_newton(
            |w| {
                let (v, dv) = self.true_anomaly(w)?;
                Ok((v - target, dv))
            },
            0.0,
            period,
            2.0 * self.quarter * target / PI,
            1e-14,
            "true anomaly inversion",
        )?;
        Ok(w + period * turns)
    }
}

/// Flat eccentric anomaly to true anomaly, continuous in `u_o`.
pub(crate) fn true_of_flat(u_o: f64, e: f64) -> f64 {
    let beta = e / (1.0 + ((1.0 - e) * (1.0 + e)).sqrt());
    let (s, c) = u_o.sin_cos();
    u_o + 2.0 * (beta * s / (1.0 - beta * c)).atan()
}

fn flat_of_true(nu: f64, e: f64) -> f64 {
    let beta = e / (1.0 + ((1.0 - e) * (1.0 + e)).sqrt());
    let (s, c) = nu.sin_cos();
    nu - 2.0 * (beta * s / (1.0 + beta * c)).atan()
}

/// `dℓ/du_o = n √(a/M) r / (1 + κ r²)` with `r = a(1 − e cos u_o)`.
pub(crate) fn flat_rate(conic: &ConicGeometry, u_o: f64) -> f64 {
    let p = conic.params();
    let r = conic.a * (1.0 - conic.e * u_o.cos());
    conic.mean_motion() * (conic.a / p.big_m).sqrt() * r / (1.0 + p.space.kappa() * r * r)
}

fn mean_of_flat(conic: &ConicGeometry, u_o: f64) -> f64 {
    let turns = (u_o / TAU).floor();
    let rest = u_o - TAU * turns;
    let panels = ((rest / (PI / 16.0)).ceil() as usize).max(1);
    TAU * turns + quad::integrate(|u| flat_rate(conic, u), 0.0, rest, panels)
}

fn flat_of_mean(conic: &ConicGeometry, ell: f64) -> Result<f64> {
    let turns = (ell / TAU).floor();
    let target = ell - TAU * turns;
    let u = safeguarded_newton(
        |u| Ok((mean_of_flat(conic, u) - target, flat_rate(conic, u))),
        0.0,
        TAU,
        target,
        ELL_TOL,
        "flat eccentric Kepler equation",
    )?;
    Ok(u + TAU * turns)
}

/// Mean anomaly at elliptic parameter `w` (sphere). Continuous and increasing,
/// with `ℓ(w + 4K) = ℓ(w) + 2π`.
pub fn curved_kepler_equation(w: f64, conic: &ConicGeometry) -> Result<f64> {
    Ok(SphereRoute::new(conic)?.mean(w).0)
}

/// Inverse of [`curved_kepler_equation`].
pub fn solve_curved_kepler(ell: f64, conic: &ConicGeometry) -> Result<f64> {
    if !ell.is_finite() {
        return Err(Error::domain("non-finite mean anomaly"));
    }
    SphereRoute::new(conic)?.w_of_mean(ell)
}

/// Converts between anomalies of the same orbit point. All anomalies vanish
/// at pericenter and are unwrapped (they advance by `2π`, or `4K` for `w`, per
/// revolution).
pub fn anomaly_convert(value: f64, from: Anomaly, to: Anomaly, conic: &ConicGeometry) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::domain("non-finite anomaly"));
    }
    if from == to {
        return Ok(value);
    }
    if conic.is_circular() {
        return convert_circular(value, from, to, conic);
    }
    let needs_flat = from == Anomaly::FlatEccentric || to == Anomaly::FlatEccentric;
    if needs_flat {
        conic.require_projected_ellipse()?;
    }
    match conic.space().curvature() {
        Curvature::Spherical => {
            let route = SphereRoute::new(conic)?;
            let w = match from {
                Anomaly::EllipticW => value,
                Anomaly::Mean => route.w_of_mean(value)?,
                Anomaly::True => route.w_of_true(value)?,
                Anomaly::FlatEccentric => route.w_of_true(true_of_flat(value, conic.e))?,
                Anomaly::GeometricU => inverse_amplitude(value, &route.modulus)?,
            };
            Ok(match to {
                Anomaly::EllipticW => w,
                Anomaly::Mean => route.mean(w).0,
                Anomaly::True => route.true_anomaly(w)?.0,
                Anomaly::FlatEccentric => flat_of_true(route.true_anomaly(w)?.0, conic.e),
                Anomaly::GeometricU => jacobi_sn_cn_dn(w, &route.modulus).am,
            })
        }
        _ => {
            let elliptic = [Anomaly::EllipticW, Anomaly::GeometricU];
            if elliptic.contains(&from) || elliptic.contains(&to) {
                return Err(Error::unsupported(
                    "elliptic anomalies are defined on the sphere only",
                ));
            }
            let e = conic.e;
            let u_o = match from {
                Anomaly::Mean => flat_of_mean(conic, value)?,
                Anomaly::True => flat_of_true(value, e),
                _ => value,
            };
            Ok(match to {
                Anomaly::Mean => mean_of_flat(conic, u_o),
                Anomaly::True => true_of_flat(u_o, e),
                _ => u_o,
            })
        }
    }
}

fn convert_circular(value: f64, from: Anomaly, to: Anomaly, conic: &ConicGeometry) -> Result<f64> {
    let w_scale = |c: &ConicGeometry| -> Result<f64> { Ok(c.modulus()?.quarter_period() * 2.0 / PI) };
    let angle = match from {
        Anomaly::EllipticW => value / w_scale(conic)?,
        _ => value,
    };
    match to {
        Anomaly::EllipticW => Ok(angle * w_scale(conic)?),
        Anomaly::GeometricU if conic.space().curvature() != Curvature::Spherical => Err(
            Error::unsupported("elliptic anomalies are defined on the sphere only"),
        ),
        _ => Ok(angle),
    }
}

/// One sample along an orbit with all of its anomalies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitPoint {
    pub ell: f64,
    pub nu: f64,
    /// `NaN` when the projected conic is not an ellipse.
    pub u_o: f64,
    /// `NaN` off the sphere.
    pub w: f64,
    /// `NaN` off the sphere.
    pub u: f64,
    pub phi: f64,
    pub theta: f64,
    /// `ρ tan φ`.
    pub r: f64,
}

impl ConicGeometry {
    /// The orbit point at mean anomaly `ℓ`, for argument of pericenter `g`.
    pub fn orbit_point(&self, ell: f64, g: f64) -> Result<OrbitPoint> {
        let nu = anomaly_convert(ell, Anomaly::Mean, Anomaly::True, self)?;
        let optional = |to| match anomaly_convert(ell, Anomaly::Mean, to, self) {
            Ok(v) => Ok(v),
            Err(Error::Unsupported(_)) => Ok(f64::NAN),
            Err(e) => Err(e),
        };
        let (r, phi, theta) = self.position_from_true_anomaly(nu, g);
        Ok(OrbitPoint {
            ell,
            nu,
            u_o: optional(Anomaly::FlatEccentric)?,
            w: optional(Anomaly::EllipticW)?,
            u: optional(Anomaly::GeometricU)?,
            phi,
            theta,
            r,
        })
    }
}
