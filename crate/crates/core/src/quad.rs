//! Gauss–Legendre quadrature on composite panels.

use std::f64::consts::PI;
use std::sync::OnceLock;

const ORDER: usize = 20;

fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(ORDER))
}

/// Nodes on `[-1, 1]` and weights of the `n`-point rule, by Newton on `P_n`.
fn legendre_rule<const N: usize>(n: usize) -> ([f64; N], [f64; N]) {
    let mut x = [0.0; N];
    let mut w = [0.0; N];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `∫_a^b f` with `panels` equal Gauss–Legendre panels.
pub(crate) fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = rule();
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for i in 0..ORDER {
            s += w[i] * f(mid + 0.5 * h * x[i]);
        }
        total += 0.5 * h * s;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = integrate(|t| t.cos(), 0.0, 1.0, 1);
        assert!((v - 1f64.sin()).abs() < 1e-15);
        let v = integrate(|t| t.powi(30), -1.0, 1.0, 4);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }
}
