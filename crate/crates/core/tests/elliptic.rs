use curved2body::elliptic::{complete_k, jacobi_amplitude, jacobi_sn_cn_dn, EllipticModulus};
use curved2body::integrate::{integrate, Sampling};
use curved2body::Result;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

/// Midpoint rule for K(k) with 10⁶ nodes.
fn k_by_midpoint(k: f64) -> f64 {
    let n = 1_000_000;
    let h = FRAC_PI_2 / n as f64;
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            1.0 / (1.0 - (k * t.sin()).powi(2)).sqrt()
        })
        .sum::<f64>()
        * h
}

#[test]
fn complete_integral_matches_quadrature() {
    let agm = complete_k(0.8).unwrap();
    let quad = k_by_midpoint(0.8);
    assert!((agm - quad).abs() < 1e-12, "{agm} vs {quad}");
    assert_eq!(complete_k(0.0).unwrap(), FRAC_PI_2);
    assert!(complete_k(1.0).is_err());
    assert!(complete_k(-0.2).is_err());
}

#[test]
fn complete_integral_is_increasing() {
    let mut prev = 0.0;
    for i in 0..100 {
        let v = complete_k(i as f64 / 100.0).unwrap();
        assert!(v > prev);
        prev = v;
    }
}

/// `sn' = cn dn, cn' = −sn dn, dn' = −k² sn cn, am' = dn` from `(0, 1, 1, 0)`.
fn ode_triple(w: f64, k: f64) -> Vec<f64> {
    let field = move |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy[0] = y[1] * y[2];
        dy[1] = -y[0] * y[2];
        dy[2] = -k * k * y[0] * y[1];
        dy[3] = y[2];
        Ok(())
    };
    let traj = integrate(&field, &[0.0, 1.0, 1.0, 0.0], (0.0, w), 1e-14, Sampling::Steps).unwrap();
    traj.states.last().unwrap().clone()
}

#[test]
fn triple_matches_defining_ode() {
    let m = EllipticModulus::new(0.3).unwrap();
    let t = jacobi_sn_cn_dn(0.5, &m);
    let y = ode_triple(0.5, 0.3);
    assert!((t.sn - y[0]).abs() < 1e-12);
    assert!((t.cn - y[1]).abs() < 1e-12);
    assert!((t.dn - y[2]).abs() < 1e-12);
    assert!((t.am - y[3]).abs() < 1e-12);
}

#[test]
fn amplitude_at_half_period_by_integration() {
    for &k in &[0.2, 0.6, 0.9] {
        let m = EllipticModulus::new(k).unwrap();
        let kk = m.quarter_period();
        let y = ode_triple(2.0 * kk, k);
        assert!((y[3] - PI).abs() < 1e-11, "k={k}: {}", y[3]);
        assert!((jacobi_amplitude(2.0 * kk, &m) - PI).abs() < 1e-13);
    }
}

#[test]
fn ratio_accessors() {
    let m = EllipticModulus::new(0.7).unwrap();
    let t = jacobi_sn_cn_dn(1.1, &m);
    assert_eq!(t.cd(), t.cn / t.dn);
    assert_eq!(t.nd(), 1.0 / t.dn);
    assert_eq!(t.sd(), t.sn / t.dn);
}

proptest! {
    #[test]
    fn pythagorean_identities(w in -50.0f64..50.0, k in 0.0f64..0.999) {
        let m = EllipticModulus::new(k).unwrap();
        let t = jacobi_sn_cn_dn(w, &m);
        prop_assert!((t.sn * t.sn + t.cn * t.cn - 1.0).abs() < 1e-13);
        prop_assert!((t.dn * t.dn + k * k * t.sn * t.sn - 1.0).abs() < 1e-13);
        prop_assert!((t.am.sin() - t.sn).abs() < 1e-13);
    }

    #[test]
    fn modulus_complement(k in 0.0f64..0.999) {
        let m = EllipticModulus::new(k).unwrap();
        prop_assert!((m.k().powi(2) + m.k_prime().powi(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn four_quarter_periodicity(w in -10.0f64..10.0, k in 0.0f64..0.95) {
        let m = EllipticModulus::new(k).unwrap();
        let kk = m.quarter_period();
        let a = jacobi_sn_cn_dn(w, &m);
        let b = jacobi_sn_cn_dn(w + 4.0 * kk, &m);
        prop_assert!((a.sn - b.sn).abs() < 1e-12);
        prop_assert!((a.cn - b.cn).abs() < 1e-12);
        prop_assert!((b.am - a.am - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn amplitude_is_increasing(w in -20.0f64..20.0, dw in 1e-6f64..1.0, k in 0.0f64..0.99) {
        let m = EllipticModulus::new(k).unwrap();
        prop_assert!(jacobi_amplitude(w + dw, &m) > jacobi_amplitude(w, &m));
    }
}
