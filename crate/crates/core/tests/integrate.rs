use curved2body::integrate::*;
use curved2body::kepler::*;
use curved2body::{CurvedSpace, Error, Result};
use std::f64::consts::TAU;

fn kepler_field(p: KeplerParams) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<()> {
    move |_t, y, dy| {
        dy.copy_from_slice(&kepler_vector_field(&PolarState::from_slice(y), &p)?.to_array());
        Ok(())
    }
}

fn position(s: &PolarState) -> [f64; 3] {
    let (sp, cp) = s.phi.sin_cos();
    let (st, ct) = s.theta.sin_cos();
    [sp * ct, sp * st, cp]
}

/// Worst position error over ten periods of an eccentric spherical orbit.
fn kepler_error(tol: f64) -> f64 {
    let p = KeplerParams::new(0.21, 1.0, CurvedSpace::sphere(1.0).unwrap()).unwrap();
    let d = DelaunayState::new(0.08, 0.2, 0.05, 0.7).unwrap();
    let (_, n) = kepler_energy_and_mean_motion(d.l, &p);
    let y0 = delaunay_to_polar(&d, &p).unwrap();
    let traj = integrate(&kepler_field(p), &y0.to_array(), (0.0, 10.0 * TAU / n), tol, Sampling::Uniform(100)).unwrap();
    let mut worst = 0.0f64;
    for (t, y) in traj.times.iter().zip(&traj.states) {
        let exact = position(&delaunay_to_polar(&kepler_flow(&d, *t, &p), &p).unwrap());
        let got = position(&PolarState::from_slice(y));
        for k in 0..3 {
            worst = worst.max((exact[k] - got[k]).abs());
        }
    }
    worst
}

#[test]
fn global_error_follows_tolerance() {
    // Two decades of tolerance buy at least one decade of accuracy until the
    // error reaches the 1e-12 floor.
    let tols: Vec<f64> = (6..=13).map(|k| 10f64.powi(-k)).collect();
    let errs: Vec<f64> = tols.iter().map(|&t| kepler_error(t)).collect();
    for i in 0..errs.len() - 2 {
        if errs[i + 2] > 1e-12 {
            assert!(errs[i] / errs[i + 2] >= 10.0, "{:e} -> {:e}: {errs:?}", tols[i], tols[i + 2]);
        }
    }
    assert!(errs[tols.len() - 2] < 1e-10);
}

#[test]
fn ten_kepler_periods_at_working_tolerance() {
    assert!(kepler_error(1e-12) < 1e-8);
}

#[test]
fn loosest_tolerance_runs() {
    assert!(kepler_error(1e-3).is_finite());
}

#[test]
fn runs_are_bit_identical() {
    let p = KeplerParams::new(0.21, 1.0, CurvedSpace::hyperbolic(1.0).unwrap()).unwrap();
    let y0 = delaunay_to_polar(&DelaunayState::new(0.08, 0.2, 0.05, 0.7).unwrap(), &p).unwrap().to_array();
    let run = || integrate(&kepler_field(p), &y0, (0.0, 30.0), 1e-11, Sampling::Steps).unwrap();
    assert_eq!(run(), run());
    let dense = |ts: Vec<f64>| integrate(&kepler_field(p), &y0, (0.0, 30.0), 1e-11, Sampling::Dense(ts)).unwrap();
    assert_eq!(dense(vec![1.0, 7.5, 30.0]), dense(vec![1.0, 7.5, 30.0]));
}

#[test]
fn energy_and_momentum_monitors() {
    let p = KeplerParams::new(0.21, 1.0, CurvedSpace::sphere(1.0).unwrap()).unwrap();
    let d = DelaunayState::new(0.08, 0.2, 0.05, 0.7).unwrap();
    let (_, n) = kepler_energy_and_mean_motion(d.l, &p);
    let y0 = delaunay_to_polar(&d, &p).unwrap().to_array();
    let mut traj = integrate(&kepler_field(p), &y0, (0.0, 20.0 * TAU / n), 1e-12, Sampling::Stride(3)).unwrap();
    let energy = |y: &[f64]| kepler_hamiltonian(&PolarState::from_slice(y), &p).unwrap();
    let momentum = |y: &[f64]| y[3];
    let zero = |_: &[f64]| 0.0;
    let report = traj.monitor(&[("energy", &energy), ("p_theta", &momentum), ("zero", &zero)]).to_vec();
    assert!(report[0].1 < 1e-10, "{report:?}");
    assert!(report[1].1 < 1e-12);
    assert_eq!(report[2], ("zero".to_string(), 0.0));
}

#[test]
fn stride_keeps_the_end_point() {
    let osc = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy[0] = y[1];
        dy[1] = -y[0];
        Ok(())
    };
    let all = integrate(&osc, &[1.0, 0.0], (0.0, 10.0), 1e-10, Sampling::Steps).unwrap();
    let some = integrate(&osc, &[1.0, 0.0], (0.0, 10.0), 1e-10, Sampling::Stride(4)).unwrap();
    assert!(some.len() < all.len());
    assert_eq!(some.last().unwrap().0, 10.0);
    assert_eq!(some.last(), all.last());
}

#[test]
fn near_collision_is_reported_with_time() {
    // Radial infall: no angular momentum, φ reaches zero in finite time.
    let p = KeplerParams::new(0.21, 1.0, CurvedSpace::sphere(1.0).unwrap()).unwrap();
    let y0 = PolarState::new(0.5, 0.0, 0.0, 0.0).to_array();
    match integrate(&kepler_field(p), &y0, (0.0, 100.0), 1e-10, Sampling::Steps) {
        Err(Error::NearCollision { t, .. }) | Err(Error::StepUnderflow { t, .. }) => assert!(t > 0.0 && t < 100.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn dense_times_must_be_ordered() {
    let zero = |_t: f64, _y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy.fill(0.0);
        Ok(())
    };
    assert!(integrate(&zero, &[1.0], (0.0, 1.0), 1e-8, Sampling::Dense(vec![0.5, 0.2])).is_err());
    assert!(integrate(&zero, &[1.0], (0.0, 1.0), 1e-8, Sampling::Dense(vec![1.5])).is_err());
    assert!(integrate(&zero, &[1.0], (0.0, 1.0), 1e-2, Sampling::Steps).is_err());
}

#[test]
fn stormer_verlet_is_second_order() {
    let pendulum = |q: &[f64], p: &[f64], dq: &mut [f64], dp: &mut [f64]| -> Result<()> {
        dq[0] = q[0].sin();
        dp[0] = p[0];
        Ok(())
    };
    let reference = integrate(
        &|_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy[0] = y[1];
            dy[1] = -y[0].sin();
            Ok(())
        },
        &[1.0, 0.0],
        (0.0, 4.0),
        1e-13,
        Sampling::Steps,
    )
    .unwrap();
    let (_, exact) = reference.last().unwrap();
    let err = |steps: usize| {
        let traj = stormer_verlet(&pendulum, &[1.0], &[0.0], 4.0 / steps as f64, steps, steps).unwrap();
        let (_, y) = traj.last().unwrap();
        (y[0] - exact[0]).hypot(y[1] - exact[1])
    };
    let ratio = err(200) / err(400);
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
}
