//! Jacobi elliptic functions of real argument and the complete elliptic
//! integral of the first kind.
//!
//! Everything is evaluated through the descending Landen (AGM) scale
//! `a₀ = 1, b₀ = k', c₀ = k`. The same scale gives `K = π / (2 a_N)` and the
//! amplitude `am(w)` by backward recursion, so `sn`, `cn` and `am` are
//! mutually consistent to rounding. Moduli below [`SERIES_CUTOFF`] use the
//! first-order expansion in `k²` around the circular functions.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Below this modulus the trigonometric expansion is used.
pub const SERIES_CUTOFF: f64 = 1e-7;

/// Largest admissible modulus is `1 - MODULUS_GUARD`.
pub const MODULUS_GUARD: f64 = 1e-12;

const MAX_AGM_STEPS: usize = 64;

/// Elliptic modulus `k ∈ [0, 1)` and its complement `k' = √(1 − k²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    k: f64,
    k_prime: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        check_modulus(k)?;
        Ok(Self {
            k,
            k_prime: ((1.0 - k) * (1.0 + k)).sqrt(),
        })
    }

    /// Modulus `k = sin y`, `k' = cos y`. Computing both from the angle keeps
    /// `k'` accurate when `k` is close to one.
    pub fn from_angle(y: f64) -> Result<Self> {
        if !y.is_finite() || !(0.0..FRAC_PI_2).contains(&y) {
            return Err(Error::domain(format!(
                "modular angle {y} outside [0, pi/2)"
            )));
        }
        let (k, k_prime) = y.sin_cos();
        check_modulus(k)?;
        Ok(Self { k, k_prime })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_prime(&self) -> f64 {
        self.k_prime
    }

    /// Quarter period `K(k)`.
    pub fn quarter_period(&self) -> f64 {
        if self.k < SERIES_CUTOFF {
            return FRAC_PI_2 * (1.0 + 0.25 * self.k * self.k);
        }
        let scale = LandenScale::new(self);
        FRAC_PI_2 / scale.a_last()
    }
}

fn check_modulus(k: f64) -> Result<()> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::domain(format!("elliptic modulus {k} must be >= 0")));
    }
    if k >= 1.0 - MODULUS_GUARD {
        return Err(Error::domain(format!(
            "elliptic modulus {k} too close to 1 (K diverges)"
        )));
    }
    Ok(())
}

/// Complete elliptic integral of the first kind, `K(k) = ∫₀^{π/2} dt / √(1 − k² sin² t)`.
pub fn complete_k(k: f64) -> Result<f64> {
    Ok(EllipticModulus::new(k)?.quarter_period())
}

/// `(sn, cn, dn)` at one argument, with the amplitude that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    /// Unwrapped amplitude `am(w)`.
    pub am: f64,
}

impl JacobiTriple {
    pub fn cd(&self) -> f64 {
        self.cn / self.dn
    }

    pub fn nd(&self) -> f64 {
        1.0 / self.dn
    }

    pub fn sd(&self) -> f64 {
        self.sn / self.dn
    }
}

struct LandenScale {
    a: [f64; MAX_AGM_STEPS + 1],
    c: [f64; MAX_AGM_STEPS + 1],
    n: usize,
}

impl LandenScale {
    fn new(modulus: &EllipticModulus) -> Self {
        let mut a = [0.0; MAX_AGM_STEPS + 1];
        let mut c = [0.0; MAX_AGM_STEPS + 1];
        a[0] = 1.0;
        c[0] = modulus.k;
        let mut b = modulus.k_prime;
        let mut n = 0;
        while n < MAX_AGM_STEPS && c[n].abs() > f64::EPSILON * a[n] {
            let (an, bn) = (a[n], b);
            a[n + 1] = 0.5 * (an + bn);
            c[n + 1] = 0.5 * (an - bn);
            b = (an * bn).sqrt();
            n += 1;
        }
        Self { a, c, n }
    }

    fn a_last(&self) -> f64 {
        self.a[self.n]
    }

    fn amplitude(&self, w: f64) -> f64 {
        let mut phi = (1u64 << self.n) as f64 * self.a[self.n] * w;
        for i in (1..=self.n).rev() {
            phi = 0.5 * (phi + (self.c[i] / self.a[i] * phi.sin()).asin());
        }
        phi
    }
}

/// `sn, cn, dn` and the amplitude at `w` for modulus `k`.
pub fn jacobi_sn_cn_dn(w: f64, modulus: &EllipticModulus) -> JacobiTriple {
    let k = modulus.k;
    let am = jacobi_amplitude(w, modulus);
    let (sn, cn) = if k < SERIES_CUTOFF {
        let m = k * k;
        let (s, c) = w.sin_cos();
        let drift = 0.25 * m * (w - s * c);
        (s - drift * c, c + drift * s)
    } else {
        am.sin_cos()
    };
    // k'² + k² cn² has no cancellation, unlike 1 − k² sn².
    let kp = modulus.k_prime;
    let dn = (kp * kp + k * k * cn * cn).sqrt();
    JacobiTriple { sn, cn, dn, am }
}

/// Jacobi amplitude, continuous and strictly increasing in `w`.
pub fn jacobi_amplitude(w: f64, modulus: &EllipticModulus) -> f64 {
    let k = modulus.k;
    if k < SERIES_CUTOFF {
        let (s, c) = w.sin_cos();
        return w - 0.25 * k * k * (w - s * c);
    }
    LandenScale::new(modulus).amplitude(w)
}

/// Inverse of the amplitude: the `w` with `am(w) = u` (incomplete integral of
/// the first kind `F(u | k)`).
pub fn inverse_amplitude(u: f64, modulus: &EllipticModulus) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::domain("non-finite amplitude"));
    }
    if u < 0.0 {
        return inverse_amplitude(-u, modulus).map(|w| -w);
    }
    // k' w <= am(w) <= w for w >= 0.
    let (mut lo, mut hi) = (u, u / modulus.k_prime);
    let quarter = modulus.quarter_period();
    let mut w = u * quarter / FRAC_PI_2;
    if !(lo..=hi).contains(&w) {
        w = 0.5 * (lo + hi);
    }
    for _ in 0..100 {
        let t = jacobi_sn_cn_dn(w, modulus);
        let f = t.am - u;
        if f.abs() <= 4.0 * f64::EPSILON * u.max(1.0) {
            return Ok(w);
        }
        if f > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        let mut next = w - f / t.dn;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= f64::EPSILON * w.abs().max(1.0) {
            return Ok(next);
        }
        w = next;
    }
    Err(Error::NonConvergence {
        what: "inverse amplitude",
        iterations: 100,
        residual: (jacobi_amplitude(w, modulus) - u).abs(),
    })
}
