use curved2body::integrate::{integrate, Propagator, Sampling};
use curved2body::kepler::*;
use curved2body::{CurvedSpace, Result};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

fn params(space: CurvedSpace) -> KeplerParams {
    KeplerParams::new(1.0, 1.0, space).unwrap()
}

fn sphere() -> CurvedSpace {
    CurvedSpace::sphere(1.0).unwrap()
}

fn hyperbolic() -> CurvedSpace {
    CurvedSpace::hyperbolic(1.0).unwrap()
}

fn field(p: KeplerParams) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<()> {
    move |_t, y, dy| {
        let d = kepler_vector_field(&PolarState::from_slice(y), &p)?;
        dy.copy_from_slice(&d.to_array());
        Ok(())
    }
}

/// Focal half-distance from the conic triangle
/// `cos_k(α/ρ) = cos_k(c/ρ) cos_k(β/ρ)`.
fn focal(alpha: f64, beta: f64, space: &CurvedSpace) -> f64 {
    let ratio = space.cos_k(alpha) / space.cos_k(beta);
    if space.sign() > 0.0 {
        ratio.acos()
    } else {
        ratio.acosh()
    }
}

#[test]
fn energy_from_axes_against_integration() {
    for space in [sphere(), hyperbolic()] {
        let p = params(space);
        let (alpha, beta) = (0.3, 0.2);
        let (h, g_sq) = energy_momentum_from_axes(alpha, beta, &p).unwrap();
        let c = focal(alpha, beta, &space);
        let peri = PolarState::new(alpha - c, 0.0, 0.0, g_sq.sqrt());
        assert!((kepler_hamiltonian(&peri, &p).unwrap() - h).abs() < 1e-13, "{space:?}");
        // Apocenter by event on p_φ.
        let f = field(p);
        let mut prop = Propagator::new(&f, 0.0, &peri.to_array(), 1e-3, 1e-13).unwrap();
        prop.step(1.0).unwrap();
        let (_, y) = prop.advance_to_event(100.0, |_, y| y[1]).unwrap().unwrap();
        assert!((y[0] - (alpha + c)).abs() < 1e-11, "{space:?}: {} vs {}", y[0], alpha + c);
    }
}

#[test]
fn conic_from_axes_matches_triangle() {
    for space in [sphere(), hyperbolic()] {
        let c = ConicGeometry::from_axes(0.4, 0.25, &params(space)).unwrap();
        assert!(c.triangle_residual().abs() < 1e-14);
        let f = focal(0.4, 0.25, &space);
        let (peri, apo) = c.apsides();
        assert!((peri - (0.4 - f)).abs() < 1e-13);
        assert!((apo - (0.4 + f)).abs() < 1e-13);
        let (e, p) = c.cosine_rule_e_p();
        assert!((e - c.e).abs() < 1e-13);
        assert!((p - c.p_sq).abs() < 1e-13);
    }
}

#[test]
fn energy_action_relations() {
    for space in [sphere(), hyperbolic(), CurvedSpace::sphere(3.0).unwrap()] {
        let p = KeplerParams::new(0.21, 1.0, space).unwrap();
        for &l in &[0.05, 0.1, 0.2] {
            let (h, n) = kepler_energy_and_mean_motion(l, &p);
            let dl = 1e-6;
            let fd = (kepler_energy_and_mean_motion(l + dl, &p).0 - kepler_energy_and_mean_motion(l - dl, &p).0) / (2.0 * dl);
            assert!((fd - n).abs() < 1e-7 * n);
            assert!((delaunay_l_from_energy(h, &p).unwrap() - l).abs() < 1e-12 * l);
            let alpha = alpha_from_delaunay_l(l, &p).unwrap();
            assert!((delaunay_l_from_alpha(alpha, &p).unwrap() - l).abs() < 1e-13);
            // Energy of the curved conic equals h(L).
            let c = ConicGeometry::from_actions(l, 0.6 * l, &p).unwrap();
            let (h_axes, g_sq) = energy_momentum_from_axes(c.alpha, c.beta, &p).unwrap();
            assert!((h_axes - h).abs() < 1e-10 * h.abs());
            assert!((g_sq - 0.36 * l * l).abs() < 1e-12 * l * l);
        }
    }
}

#[test]
fn bounded_energy_on_hyperbolic_plane() {
    let p = params(hyperbolic());
    assert!(delaunay_l_from_energy(-0.5, &p).is_err());
    assert!(delaunay_l_from_energy(-2.0, &p).is_ok());
}

#[test]
fn period_is_two_pi_over_n() {
    for space in [sphere(), hyperbolic()] {
        let p = params(space);
        let d = DelaunayState::new(0.5, 0.0, 0.35, 0.0).unwrap();
        let y0 = delaunay_to_polar(&d, &p).unwrap();
        let (_, n) = kepler_energy_and_mean_motion(0.5, &p);
        let f = field(p);
        let mut prop = Propagator::new(&f, 0.0, &y0.to_array(), 1e-3, 1e-13).unwrap();
        prop.step(1.0).unwrap();
        // Apocenter then pericenter.
        let (_, _) = prop.advance_to_event(100.0, |_, y| y[1]).unwrap().unwrap();
        prop.step(100.0).unwrap();
        let (t, _) = prop.advance_to_event(100.0, |_, y| y[1]).unwrap().unwrap();
        assert!((t - TAU / n).abs() < 1e-10, "{space:?}: {t} vs {}", TAU / n);
    }
}

#[test]
fn mean_anomaly_advances_uniformly() {
    for space in [sphere(), hyperbolic()] {
        let p = params(space);
        let d = DelaunayState::new(0.5, 0.4, -0.3, 1.1).unwrap();
        let y0 = delaunay_to_polar(&d, &p).unwrap();
        let (_, n) = kepler_energy_and_mean_motion(0.5, &p);
        let traj = integrate(&field(p), &y0.to_array(), (0.0, 20.0), 1e-12, Sampling::Uniform(40)).unwrap();
        for (t, y) in traj.times.iter().zip(&traj.states) {
            let back = polar_to_delaunay(&PolarState::from_slice(y), &p).unwrap();
            let expect = (0.4 + n * t).rem_euclid(TAU);
            let diff = (back.ell - expect + PI).rem_euclid(TAU) - PI;
            assert!(diff.abs() < 1e-8, "{space:?} t={t}: {diff}");
            assert!(((back.g - 1.1 + PI).rem_euclid(TAU) - PI).abs() < 1e-8);
            assert!((back.l - 0.5).abs() < 1e-10);
        }
    }
}

fn position(s: &PolarState) -> [f64; 3] {
    let (sp, cp) = s.phi.sin_cos();
    let (st, ct) = s.theta.sin_cos();
    [sp * ct, sp * st, cp]
}

#[test]
fn exact_and_numeric_propagation_agree() {
    let p = KeplerParams::new(0.21, 1.0, sphere()).unwrap();
    let d = DelaunayState::new(0.08, 0.2, 0.05, 0.7).unwrap();
    let (_, n) = kepler_energy_and_mean_motion(d.l, &p);
    let t_end = 10.0 * TAU / n;
    let y0 = delaunay_to_polar(&d, &p).unwrap();
    let traj = integrate(&field(p), &y0.to_array(), (0.0, t_end), 1e-12, Sampling::Uniform(100)).unwrap();
    let mut worst = 0.0f64;
    for (t, y) in traj.times.iter().zip(&traj.states) {
        let exact = delaunay_to_polar(&kepler_flow(&d, *t, &p), &p).unwrap();
        let (a, b) = (position(&exact), position(&PolarState::from_slice(y)));
        for k in 0..3 {
            worst = worst.max((a[k] - b[k]).abs());
        }
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn kepler_equation_landmarks_and_round_trip() {
    let p = KeplerParams::new(0.21, 1.0, sphere()).unwrap();
    let c = ConicGeometry::from_actions(0.08, 0.05, &p).unwrap();
    let kk = c.modulus().unwrap().quarter_period();
    assert!((curved_kepler_equation(2.0 * kk, &c).unwrap() - PI).abs() < 1e-12);
    assert_eq!(curved_kepler_equation(0.0, &c).unwrap(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..256 {
        let ell: f64 = rng.gen_range(-10.0..10.0);
        let w = solve_curved_kepler(ell, &c).unwrap();
        assert!((curved_kepler_equation(w, &c).unwrap() - ell).abs() < 1e-11);
    }
}

#[test]
fn kepler_equation_is_monotone_and_quasi_periodic() {
    let c = ConicGeometry::from_actions(0.6, 0.35, &params(sphere())).unwrap();
    let kk = c.modulus().unwrap().quarter_period();
    let mut prev = f64::NEG_INFINITY;
    for i in 0..400 {
        let w = -4.0 * kk + i as f64 * 0.02 * kk;
        let l = curved_kepler_equation(w, &c).unwrap();
        assert!(l > prev);
        prev = l;
        let shifted = curved_kepler_equation(w + 4.0 * kk, &c).unwrap();
        assert!((shifted - l - TAU).abs() < 1e-12);
    }
}

#[test]
fn classical_kepler_equation_in_flat_limit() {
    let space = CurvedSpace::sphere(1e6).unwrap();
    let p = params(space);
    let c = ConicGeometry::from_actions(1.0, 0.8, &p).unwrap();
    for i in 0..32 {
        let u = i as f64 * TAU / 32.0;
        let beta = c.e / (1.0 + (1.0 - c.e * c.e).sqrt());
        let nu = u + 2.0 * (beta * u.sin() / (1.0 - beta * u.cos())).atan();
        let ell = anomaly_convert(nu, Anomaly::True, Anomaly::Mean, &c).unwrap();
        assert!((ell - (u - c.e * u.sin())).abs() < 1e-8, "u={u}");
    }
}

#[test]
fn flat_limit_matches_flat_energetics() {
    let flat = params(CurvedSpace::flat());
    let big = params(CurvedSpace::sphere(1e6).unwrap());
    let (hf, nf) = kepler_energy_and_mean_motion(1.0, &flat);
    let (hb, nb) = kepler_energy_and_mean_motion(1.0, &big);
    assert!((hf - hb).abs() < 1e-6 && (nf - nb).abs() < 1e-6);
    assert!(ConicGeometry::from_actions(1.0, 0.5, &flat).is_err());
}

#[test]
fn anomaly_routes_agree_on_the_sphere() {
    // The flat eccentric route integrates dℓ/du_o; the w route is closed form.
    let c = ConicGeometry::from_actions(0.5, 0.3, &params(sphere())).unwrap();
    for i in 0..16 {
        let u = 0.1 + i as f64 * 0.4;
        let via_w = anomaly_convert(u, Anomaly::FlatEccentric, Anomaly::Mean, &c).unwrap();
        let nu = anomaly_convert(u, Anomaly::FlatEccentric, Anomaly::True, &c).unwrap();
        let via_nu = anomaly_convert(nu, Anomaly::True, Anomaly::Mean, &c).unwrap();
        assert!((via_w - via_nu).abs() < 1e-12);
    }
}

#[test]
fn elliptic_parametrization_geometry() {
    let c = ConicGeometry::from_actions(0.5, 0.3, &params(sphere())).unwrap();
    let kk = c.modulus().unwrap().quarter_period();
    let (peri, apo) = c.apsides();
    let p0 = c.elliptic_parametrization(0.0).unwrap();
    assert!((p0.big_r - peri.sin()).abs() < 1e-14);
    let p2 = c.elliptic_parametrization(2.0 * kk).unwrap();
    assert!((p2.big_r - apo.sin()).abs() < 1e-14);
    let kappa = c.space().kappa();
    for i in 0..128 {
        let w = i as f64 * 4.0 * kk / 128.0;
        let pt = c.elliptic_parametrization(w).unwrap();
        let lhs = (pt.big_r + c.e * pt.big_x).powi(2);
        let rhs = c.p_sq * c.p_sq * (1.0 - kappa * pt.big_r * pt.big_r);
        assert!((lhs - rhs).abs() < 1e-13);
        let nu = anomaly_convert(w, Anomaly::EllipticW, Anomaly::True, &c).unwrap();
        assert!((c.phi_of_elliptic_point(&pt) - c.phi_of_nu(nu)).abs() < 1e-12);
    }
}

#[test]
fn orbits_crossing_the_equator() {
    let c = ConicGeometry::from_actions(1.3, 0.5, &params(sphere())).unwrap();
    assert!(c.crosses_equator());
    assert!(c.e > 1.0 && c.a < 0.0);
    assert!(anomaly_convert(0.3, Anomaly::FlatEccentric, Anomaly::Mean, &c).is_err());
    let w = solve_curved_kepler(2.0, &c).unwrap();
    assert!((curved_kepler_equation(w, &c).unwrap() - 2.0).abs() < 1e-12);
    let d = DelaunayState::new(1.3, 2.0, 0.5, 0.0).unwrap();
    let back = polar_to_delaunay(&delaunay_to_polar(&d, &params(sphere())).unwrap(), &params(sphere())).unwrap();
    assert!((back.ell - 2.0).abs() < 1e-10);
}

#[test]
fn hyperbolic_plane_rejects_elliptic_anomalies() {
    let c = ConicGeometry::from_actions(0.5, 0.3, &params(hyperbolic())).unwrap();
    assert!(anomaly_convert(0.3, Anomaly::Mean, Anomaly::EllipticW, &c).is_err());
    let pt = c.orbit_point(1.0, 0.0).unwrap();
    assert!(pt.w.is_nan() && pt.u.is_nan() && pt.u_o.is_finite());
    // ℓ(2π) = 2π along the flat eccentric route.
    let l = anomaly_convert(TAU, Anomaly::FlatEccentric, Anomaly::Mean, &c).unwrap();
    assert!((l - TAU).abs() < 1e-13);
}

#[test]
fn circular_orbits_short_circuit() {
    let c = ConicGeometry::from_actions(0.5, 0.5, &params(sphere())).unwrap();
    assert!(c.is_circular());
    assert_eq!(anomaly_convert(1.2, Anomaly::Mean, Anomaly::True, &c).unwrap(), 1.2);
    let kk = c.modulus().unwrap().quarter_period();
    let w = anomaly_convert(PI, Anomaly::Mean, Anomaly::EllipticW, &c).unwrap();
    assert!((w - 2.0 * kk).abs() < 1e-14);
}

#[test]
fn poincare_chart_at_circular_orbits() {
    let d = DelaunayState::new(1.0, 0.3, 1.0, 0.7).unwrap();
    let pc = delaunay_to_poincare(&d);
    assert_eq!((pc.xi, pc.eta), (0.0, 0.0));
    let (back, degenerate) = poincare_to_delaunay(&pc).unwrap();
    assert!(degenerate);
    assert!((back.ell + back.g - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn poincare_round_trip(l in 0.1f64..2.0, frac in 0.05f64..0.95, ell in 0.0f64..6.2, g in -3.0f64..3.0) {
        let d = DelaunayState::new(l, ell, frac * l, g).unwrap();
        let (back, deg) = poincare_to_delaunay(&delaunay_to_poincare(&d)).unwrap();
        prop_assert!(!deg);
        prop_assert!((back.g_action - d.g_action).abs() < 1e-12);
        prop_assert!((back.g - g).abs() < 1e-12);
        prop_assert!((back.ell - ell).abs() < 1e-12);
    }

    #[test]
    fn polar_round_trip(l in 0.05f64..0.6, frac in 0.1f64..0.95, ell in 0.0f64..6.2, g in -3.0f64..3.0, hyp in any::<bool>()) {
        let space = if hyp { hyperbolic() } else { sphere() };
        let p = params(space);
        let d = DelaunayState::new(l, ell, frac * l, g).unwrap();
        let back = polar_to_delaunay(&delaunay_to_polar(&d, &p).unwrap(), &p).unwrap();
        prop_assert!((back.l - l).abs() < 1e-11);
        prop_assert!((back.g_action - frac * l).abs() < 1e-12);
        let dl = (back.ell - ell + PI).rem_euclid(TAU) - PI;
        let dg = (back.g - g + PI).rem_euclid(TAU) - PI;
        prop_assert!(dl.abs() < 1e-9 && dg.abs() < 1e-9, "dl={} dg={}", dl, dg);
    }

    #[test]
    fn anomaly_cycle(ell in -7.0f64..7.0, l in 0.1f64..0.8, frac in 0.2f64..0.95) {
        let c = ConicGeometry::from_actions(l, frac * l, &params(sphere())).unwrap();
        let w = anomaly_convert(ell, Anomaly::Mean, Anomaly::EllipticW, &c).unwrap();
        let u = anomaly_convert(w, Anomaly::EllipticW, Anomaly::GeometricU, &c).unwrap();
        let nu = anomaly_convert(u, Anomaly::GeometricU, Anomaly::True, &c).unwrap();
        let back = anomaly_convert(nu, Anomaly::True, Anomaly::Mean, &c).unwrap();
        prop_assert!((back - ell).abs() < 1e-11);
    }
}

#[test]
fn nearly_radial_apocenter_is_accurate() {
    for space in [sphere(), hyperbolic()] {
        let p = params(space);
        for k in 2..=9 {
            let l = 0.1;
            let c = ConicGeometry::from_actions(l, l * 10f64.powi(-k), &p).unwrap();
            let (_, apo) = c.apsides();
            let got = c.phi_of_nu(PI);
            assert!((got - apo).abs() <= 1e-12 * apo, "G/L = 1e-{k}: {got} vs {apo}");
        }
    }
}
