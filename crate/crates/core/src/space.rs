//! Surfaces of constant curvature: the round sphere and the hyperbolic plane
//! of radius `ρ`, plus the flat plane as a limit.
//!
//! Angular quantities on the surface (the angular distance `φ`, the
//! curved axes `α/ρ`, ...) go through the trigonometric family matching the
//! curvature sign: circular functions on the sphere, hyperbolic ones on the
//! hyperbolic plane.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Curvature {
    Spherical,
    Hyperbolic,
    Flat,
}

impl Curvature {
    /// `+1`, `-1` or `0`.
    pub fn sign(self) -> f64 {
        match self {
            Curvature::Spherical => 1.0,
            Curvature::Hyperbolic => -1.0,
            Curvature::Flat => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvedSpace {
    curvature: Curvature,
    rho: f64,
}

impl CurvedSpace {
    pub fn new(curvature: Curvature, rho: f64) -> Result<Self> {
        if curvature != Curvature::Flat && !(rho.is_finite() && rho > 0.0) {
            return Err(Error::domain(format!("radius {rho} must be positive")));
        }
        Ok(Self { curvature, rho })
    }

    pub fn sphere(rho: f64) -> Result<Self> {
        Self::new(Curvature::Spherical, rho)
    }

    pub fn hyperbolic(rho: f64) -> Result<Self> {
        Self::new(Curvature::Hyperbolic, rho)
    }

    pub fn flat() -> Self {
        Self {
            curvature: Curvature::Flat,
            rho: f64::INFINITY,
        }
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn sign(&self) -> f64 {
        self.curvature.sign()
    }

    /// Radius; infinite for the flat plane.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `κ = sign / ρ²`.
    pub fn kappa(&self) -> f64 {
        match self.curvature {
            Curvature::Flat => 0.0,
            _ => self.sign() / (self.rho * self.rho),
        }
    }

    pub fn is_curved(&self) -> bool {
        self.curvature != Curvature::Flat
    }

    pub(crate) fn require_curved(&self, what: &str) -> Result<()> {
        if self.is_curved() {
            Ok(())
        } else {
            Err(Error::unsupported(format!(
                "{what} needs a curved surface; use a large radius for the flat limit"
            )))
        }
    }

    pub(crate) fn require_spherical(&self, what: &str) -> Result<()> {
        if self.curvature == Curvature::Spherical {
            Ok(())
        } else {
            Err(Error::unsupported(format!("{what} is implemented on the sphere only")))
        }
    }

    pub fn sin_k(&self, x: f64) -> f64 {
        match self.curvature {
            Curvature::Spherical => x.sin(),
            Curvature::Hyperbolic => x.sinh(),
            Curvature::Flat => x,
        }
    }

    pub fn cos_k(&self, x: f64) -> f64 {
        match self.curvature {
            Curvature::Spherical => x.cos(),
            Curvature::Hyperbolic => x.cosh(),
            Curvature::Flat => 1.0,
        }
    }

    pub fn tan_k(&self, x: f64) -> f64 {
        match self.curvature {
            Curvature::Spherical => x.tan(),
            Curvature::Hyperbolic => x.tanh(),
            Curvature::Flat => x,
        }
    }

    pub fn cot_k(&self, x: f64) -> f64 {
        1.0 / self.tan_k(x)
    }

    /// Inverse of [`tan_k`](Self::tan_k); errors outside `(-1, 1)` on the
    /// hyperbolic plane.
    pub fn atan_k(&self, y: f64) -> Result<f64> {
        match self.curvature {
            Curvature::Spherical => Ok(y.atan()),
            Curvature::Hyperbolic if y.abs() < 1.0 => Ok(y.atanh()),
            Curvature::Hyperbolic => Err(Error::domain(format!(
                "tanh argument {y} outside (-1, 1)"
            ))),
            Curvature::Flat => Ok(y),
        }
    }

    /// Projected radius `r = ρ tan_k φ` of a point at angular distance `φ`.
    pub fn projected_radius(&self, phi: f64) -> f64 {
        match self.curvature {
            Curvature::Flat => phi,
            _ => self.rho * self.tan_k(phi),
        }
    }

    /// Angular distance of a point whose central projection lies at `r`.
    pub fn angle_from_projected(&self, r: f64) -> Result<f64> {
        match self.curvature {
            Curvature::Flat => Ok(r),
            _ => self.atan_k(r / self.rho),
        }
    }
}
