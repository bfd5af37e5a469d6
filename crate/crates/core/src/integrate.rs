//! Adaptive Gragg–Bulirsch–Stoer integration with invariant monitoring.
//!
//! Each step runs the modified midpoint rule with `2, 4, …, 16` substeps and
//! extrapolates the results to zero step size in `h²` (Aitken–Neville), which
//! gives a local order of 16. The difference between the last two diagonal
//! entries drives step-size control. The state inside an accepted step is
//! recovered by re-stepping from its left end, so the dense output has the
//! full order of the scheme.
//!
//! A generalized (implicit midpoint-type) Störmer–Verlet scheme is provided
//! for fixed-step runs of non-separable Hamiltonians.

use crate::error::{Error, Result};

/// Substep counts of the extrapolation tableau.
const SEQUENCE: [usize; 8] = [2, 4, 6, 8, 10, 12, 14, 16];
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 4.0;
const EVENT_TIME_TOL: f64 = 1e-12;
/// The controller aims this far below the requested tolerance.
const MARGIN: f64 = 0.1;
const TARGET_FLOOR: f64 = 1e-15;

/// Right-hand side `dy/dt = f(t, y)`, writing into the last argument.
pub trait VectorField {
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl<F> VectorField for F
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        self(t, y, dy)
    }
}

fn eval_checked<F: VectorField + ?Sized>(f: &F, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    f.eval(t, y, dy).map_err(|e| match e {
        Error::NearCollision { phi, .. } => Error::NearCollision { phi, t },
        other => other,
    })?;
    if dy.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t, state: y.to_vec() });
    }
    Ok(())
}

/// One extrapolated step of size `h`. Returns the new state and the scaled
/// error estimate (accept when `≤ 1`).
fn gbs_step<F: VectorField + ?Sized>(f: &F, t: f64, y: &[f64], dy0: &[f64], h: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    let n = y.len();
    let k_max = SEQUENCE.len();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(k_max);
    let mut z0 = vec![0.0; n];
    let mut z1 = vec![0.0; n];
    let mut dz = vec![0.0; n];
    for (j, &steps) in SEQUENCE.iter().enumerate() {
        let sub = h / steps as f64;
        z0.copy_from_slice(y);
        for i in 0..n {
            z1[i] = y[i] + sub * dy0[i];
        }
        for s in 1..steps {
            eval_checked(f, t + s as f64 * sub, &z1, &mut dz)?;
            for i in 0..n {
                let next = z0[i] + 2.0 * sub * dz[i];
                z0[i] = z1[i];
                z1[i] = next;
            }
        }
        eval_checked(f, t + h, &z1, &mut dz)?;
        let smoothed: Vec<f64> = (0..n).map(|i| 0.5 * (z0[i] + z1[i] + sub * dz[i])).collect();
        // Neville update of row j in place.
        let mut row = smoothed;
        let mut new_table = Vec::with_capacity(j + 1);
        new_table.push(row.clone());
        for k in 1..=j {
            let ratio = (SEQUENCE[j] as f64 / SEQUENCE[j - k] as f64).powi(2);
            let lower = &table[k - 1];
            row = (0..n).map(|i| row[i] + (row[i] - lower[i]) / (ratio - 1.0)).collect();
            new_table.push(row.clone());
        }
        table = new_table;
    }
    let best = table.last().cloned().unwrap_or_default();
    // Last diagonal T_KK against T_K,K-1.
    let second = &table[table.len() - 2];
    let mut err: f64 = 0.0;
    for i in 0..n {
        let scale = tol * (1.0 + y[i].abs().max(best[i].abs()));
        err = err.max((best[i] - second[i]).abs() / scale);
    }
    if best.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: t + h, state: y.to_vec() });
    }
    Ok((best, err))
}

pub fn check_tolerance(tol: f64) -> Result<()> {
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::domain(format!("tolerance {tol} outside [1e-14, 1e-3]")));
    }
    Ok(())
}

/// Step-by-step adaptive integrator over one trajectory.
pub struct Propagator<'f, F: VectorField + ?Sized> {
    field: &'f F,
    tol: f64,
    t: f64,
    y: Vec<f64>,
    dy: Vec<f64>,
    h: f64,
    t_prev: f64,
    y_prev: Vec<f64>,
    dy_prev: Vec<f64>,
    steps: usize,
}

impl<'f, F: VectorField + ?Sized> Propagator<'f, F> {
    /// Starts at `(t0, y0)`; `h0` carries the direction of integration.
    pub fn new(field: &'f F, t0: f64, y0: &[f64], h0: f64, tol: f64) -> Result<Self> {
        check_tolerance(tol)?;
        if !(h0 != 0.0 && h0.is_finite()) {
            return Err(Error::domain("initial step must be finite and non-zero"));
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t0, state: y0.to_vec() });
        }
        let mut dy = vec![0.0; y0.len()];
        eval_checked(field, t0, y0, &mut dy)?;
        Ok(Self {
            field,
            tol: (MARGIN * tol).max(TARGET_FLOOR),
            t: t0,
            y: y0.to_vec(),
            dy: dy.clone(),
            h: h0,
            t_prev: t0,
            y_prev: y0.to_vec(),
            dy_prev: dy,
            steps: 0,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.y
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps
    }

    /// Takes one accepted step, not going past `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<()> {
        let dir = self.h.signum();
        loop {
            let remaining = t_stop - self.t;
            if remaining * dir <= 0.0 {
                return Ok(());
            }
            let mut h = self.h;
            let last = h.abs() >= remaining.abs();
            if last {
                h = remaining;
            }
            if h.abs() < 1e-14 * self.t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { t: self.t, h, state: self.y.clone() });
            }
            let (y_new, err) = match gbs_step(self.field, self.t, &self.y, &self.dy, h, self.tol) {
                Ok(v) => v,
                // Tried to step into a singular region: shrink and retry.
                Err(Error::NonFinite { .. }) | Err(Error::NearCollision { .. })
                    if h.abs() > 1e-14 * self.t.abs().max(1.0) =>
                {
                    self.h = h * MIN_FACTOR;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-1.0 / (2 * SEQUENCE.len() - 1) as f64)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= 1.0 {
                let t_new = if last { t_stop } else { self.t + h };
                let mut dy_new = vec![0.0; y_new.len()];
                eval_checked(self.field, t_new, &y_new, &mut dy_new)?;
                self.t_prev = self.t;
                std::mem::swap(&mut self.y_prev, &mut self.y);
                std::mem::swap(&mut self.dy_prev, &mut self.dy);
                self.t = t_new;
                self.y = y_new;
                self.dy = dy_new;
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
                self.steps += 1;
                return Ok(());
            }
            self.h = h * factor.min(0.9);
            if self.h.abs() < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t, h: self.h, state: self.y.clone() });
            }
        }
    }

    /// Integrates up to exactly `t_target`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while (t_target - self.t) * self.h.signum() > 0.0 {
            self.step(t_target)?;
        }
        Ok(())
    }

    /// State at a time inside the last accepted step, by re-stepping from its
    /// left end.
    pub fn state_at(&self, t: f64) -> Result<Vec<f64>> {
        let (lo, hi) = if self.t_prev <= self.t { (self.t_prev, self.t) } else { (self.t, self.t_prev) };
        if t < lo - 1e-12 * lo.abs().max(1.0) || t > hi + 1e-12 * hi.abs().max(1.0) {
            return Err(Error::domain(format!("time {t} outside the last step [{lo}, {hi}]")));
        }
        if t == self.t {
            return Ok(self.y.clone());
        }
        if t == self.t_prev {
            return Ok(self.y_prev.clone());
        }
        let h = t - self.t_prev;
        Ok(gbs_step(self.field, self.t_prev, &self.y_prev, &self.dy_prev, h, self.tol)?.0)
    }

    /// Advances until the scalar `event` changes sign (from the current
    /// state), or `t_stop`. Returns the located crossing time and state.
    pub fn advance_to_event<G>(&mut self, t_stop: f64, event: G) -> Result<Option<(f64, Vec<f64>)>>
    where
        G: Fn(f64, &[f64]) -> f64,
    {
        let mut g_prev = event(self.t, &self.y);
        while (t_stop - self.t) * self.h.signum() > 0.0 {
            self.step(t_stop)?;
            let g_new = event(self.t, &self.y);
            if g_prev == 0.0 {
                g_prev = g_new;
                continue;
            }
            if g_new == 0.0 {
                return Ok(Some((self.t, self.y.clone())));
            }
            if g_prev.signum() != g_new.signum() {
                let root = self.locate(&event, g_prev, g_new)?;
                return Ok(Some(root));
            }
            g_prev = g_new;
        }
        Ok(None)
    }

    /// Illinois false position on the dense output of the last step.
    fn locate<G>(&self, event: &G, g_lo: f64, g_hi: f64) -> Result<(f64, Vec<f64>)>
    where
        G: Fn(f64, &[f64]) -> f64,
    {
        let (mut a, mut b) = (self.t_prev, self.t);
        let (mut ga, mut gb) = (g_lo, g_hi);
        let mut side = 0i8;
        let mut best = (b, self.y.clone());
        for _ in 0..200 {
            if (b - a).abs() <= EVENT_TIME_TOL * a.abs().max(1.0) {
                break;
            }
            let mut c = (a * gb - b * ga) / (gb - ga);
            if !(c > a.min(b) && c < a.max(b)) {
                c = 0.5 * (a + b);
            }
            let yc = self.state_at(c)?;
            let gc = event(c, &yc);
            best = (c, yc);
            if gc == 0.0 {
                break;
            }
            if gc.signum() == ga.signum() {
                a = c;
                ga = gc;
                if side == -1 {
                    gb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                gb = gc;
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            }
        }
        Ok(best)
    }
}

/// A named scalar function of the state.
pub type Invariant<'a> = (&'a str, &'a dyn Fn(&[f64]) -> f64);

/// Which states a [`Trajectory`] records.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// Every accepted step.
    Steps,
    /// Every `stride`-th accepted step (and the end point).
    Stride(usize),
    /// `count + 1` equally spaced times including both ends; the integrator
    /// lands on each of them exactly.
    Uniform(usize),
    /// Dense output at the given increasing times inside the span.
    Dense(Vec<f64>),
}

/// A time-stamped sequence of states.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Filled by [`Trajectory::monitor`].
    pub invariant_drift: Vec<(String, f64)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.times.last().map(|&t| (t, self.states.last().unwrap().as_slice()))
    }

    /// Records the drift of each named invariant on this trajectory.
    pub fn monitor(&mut self, invariants: &[Invariant<'_>]) -> &[(String, f64)] {
        self.invariant_drift = monitor(self, invariants);
        &self.invariant_drift
    }
}

/// Per invariant, `max |f(y) − f(y₀)| / max(1, |f(y₀)|)` over the states.
pub fn monitor(traj: &Trajectory, invariants: &[Invariant<'_>]) -> Vec<(String, f64)> {
    invariants
        .iter()
        .map(|(name, f)| {
            let drift = match traj.states.first() {
                None => 0.0,
                Some(y0) => {
                    let f0 = f(y0);
                    let scale = f0.abs().max(1.0);
                    traj.states.iter().map(|y| (f(y) - f0).abs() / scale).fold(0.0, f64::max)
                }
            };
            (name.to_string(), drift)
        })
        .collect()
}

/// Integrates `field` from `t_span.0` to `t_span.1`.
pub fn integrate<F: VectorField + ?Sized>(field: &F, initial: &[f64], t_span: (f64, f64), tol: f64, sampling: Sampling) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::domain("time span must be finite and non-empty"));
    }
    let span = t1 - t0;
    let mut prop = Propagator::new(field, t0, initial, span * 1e-3, tol)?;
    let mut traj = Trajectory::default();
    traj.times.push(t0);
    traj.states.push(initial.to_vec());
    match sampling {
        Sampling::Steps | Sampling::Stride(_) => {
            let stride = match sampling {
                Sampling::Stride(s) => s.max(1),
                _ => 1,
            };
            while prop.t() != t1 {
                prop.step(t1)?;
                if prop.accepted_steps() % stride == 0 || prop.t() == t1 {
                    traj.times.push(prop.t());
                    traj.states.push(prop.state().to_vec());
                }
            }
        }
        Sampling::Uniform(count) => {
            let count = count.max(1);
            for i in 1..=count {
                let t = if i == count { t1 } else { t0 + span * i as f64 / count as f64 };
                prop.advance_to(t)?;
                traj.times.push(t);
                traj.states.push(prop.state().to_vec());
            }
        }
        Sampling::Dense(times) => {
            let dir = span.signum();
            let mut last = t0;
            for &t in &times {
                if (t - last) * dir < 0.0 || (t - t0) * dir < 0.0 || (t - t1) * dir > 0.0 {
                    return Err(Error::domain("dense output times must be ordered inside the span"));
                }
                while (t - prop.t()) * dir > 0.0 {
                    prop.step(t1)?;
                }
                if t != t0 {
                    traj.times.push(t);
                    traj.states.push(prop.state_at(t)?);
                }
                last = t;
            }
        }
    }
    Ok(traj)
}

/// Gradients of `H(q, p)`: writes `∂H/∂q` and `∂H/∂p`.
pub trait SplitGradient {
    fn grad(&self, q: &[f64], p: &[f64], dh_dq: &mut [f64], dh_dp: &mut [f64]) -> Result<()>;
}

impl<F> SplitGradient for F
where
    F: Fn(&[f64], &[f64], &mut [f64], &mut [f64]) -> Result<()>,
{
    fn grad(&self, q: &[f64], p: &[f64], dh_dq: &mut [f64], dh_dp: &mut [f64]) -> Result<()> {
        self(q, p, dh_dq, dh_dp)
    }
}

/// Fixed-step generalized Störmer–Verlet for a non-separable `H(q, p)`.
/// The implicit stages are solved by fixed-point iteration. States are stored
/// as `q` followed by `p`, every `stride` steps.
pub fn stormer_verlet<G: SplitGradient + ?Sized>(
    grad: &G,
    q0: &[f64],
    p0: &[f64],
    h: f64,
    steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    let d = q0.len();
    if p0.len() != d {
        return Err(Error::domain("q and p must have equal length"));
    }
    let stride = stride.max(1);
    let (mut q, mut p) = (q0.to_vec(), p0.to_vec());
    let (mut gq, mut gp) = (vec![0.0; d], vec![0.0; d]);
    let (mut gq1, mut gp1) = (vec![0.0; d], vec![0.0; d]);
    let mut traj = Trajectory::default();
    let record = |traj: &mut Trajectory, t: f64, q: &[f64], p: &[f64]| {
        traj.times.push(t);
        traj.states.push(q.iter().chain(p.iter()).copied().collect());
    };
    record(&mut traj, 0.0, &q, &p);
    let converged = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-15 * (1.0 + x.abs()));
    for step in 1..=steps {
        // p_{1/2} = p − h/2 ∂_q H(q, p_{1/2})
        let mut p_half = p.clone();
        for it in 0..100 {
            grad.grad(&q, &p_half, &mut gq, &mut gp)?;
            let next: Vec<f64> = (0..d).map(|i| p[i] - 0.5 * h * gq[i]).collect();
            let done = converged(&next, &p_half);
            p_half = next;
            if done {
                break;
            }
            if it == 99 {
                return Err(Error::NonConvergence { what: "Stormer-Verlet momentum stage", iterations: 100, residual: f64::NAN });
            }
        }
        grad.grad(&q, &p_half, &mut gq, &mut gp)?;
        let gp0 = gp.clone();
        // q_1 = q + h/2 (∂_p H(q, p_{1/2}) + ∂_p H(q_1, p_{1/2}))
        let mut q1: Vec<f64> = (0..d).map(|i| q[i] + h * gp0[i]).collect();
        for it in 0..100 {
            grad.grad(&q1, &p_half, &mut gq1, &mut gp1)?;
            let next: Vec<f64> = (0..d).map(|i| q[i] + 0.5 * h * (gp0[i] + gp1[i])).collect();
            let done = converged(&next, &q1);
            q1 = next;
            if done {
                break;
            }
            if it == 99 {
                return Err(Error::NonConvergence { what: "Stormer-Verlet position stage", iterations: 100, residual: f64::NAN });
            }
        }
        grad.grad(&q1, &p_half, &mut gq1, &mut gp1)?;
        for i in 0..d {
            p[i] = p_half[i] - 0.5 * h * gq1[i];
        }
        q = q1;
        if step % stride == 0 || step == steps {
            record(&mut traj, step as f64 * h, &q, &p);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = y[1];
        dy[1] = -y[0];
        Ok(())
    }

    #[test]
    fn harmonic_oscillator_period() {
        let traj = integrate(&oscillator, &[1.0, 0.0], (0.0, TAU), 1e-12, Sampling::Steps).unwrap();
        let (t, y) = traj.last().unwrap();
        assert_eq!(t, TAU);
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_field_is_constant() {
        let zero = |_t: f64, _y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy.fill(0.0);
            Ok(())
        };
        let traj = integrate(&zero, &[3.0, -2.0], (0.0, 5.0), 1e-10, Sampling::Uniform(5)).unwrap();
        assert!(traj.states.iter().all(|s| s == &vec![3.0, -2.0]));
        assert_eq!(traj.len(), 6);
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.37).collect();
        let traj = integrate(&oscillator, &[1.0, 0.0], (0.0, 14.8), 1e-12, Sampling::Dense(times)).unwrap();
        for (t, y) in traj.times.iter().zip(&traj.states) {
            assert!((y[0] - t.cos()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn backward_integration() {
        let traj = integrate(&oscillator, &[1.0, 0.0], (0.0, -TAU / 4.0), 1e-12, Sampling::Steps).unwrap();
        let (_, y) = traj.last().unwrap();
        assert!(y[0].abs() < 1e-10 && (y[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn event_location() {
        let mut prop = Propagator::new(&oscillator, 0.0, &[1.0, 0.0], 0.1, 1e-12).unwrap();
        let (t, _) = prop.advance_to_event(10.0, |_, y| y[0]).unwrap().unwrap();
        assert!((t - TAU / 4.0).abs() < 1e-11);
    }

    #[test]
    fn monitor_reports_drift() {
        let traj = integrate(&oscillator, &[1.0, 0.0], (0.0, 50.0), 1e-12, Sampling::Steps).unwrap();
        let energy = |y: &[f64]| 0.5 * (y[0] * y[0] + y[1] * y[1]);
        let one = |_: &[f64]| 1.0;
        let report = monitor(&traj, &[("energy", &energy), ("constant", &one)]);
        assert!(report[0].1 < 1e-10);
        assert_eq!(report[1].1, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate(&oscillator, &[1.0, 0.0], (0.0, 0.0), 1e-10, Sampling::Steps).is_err());
        assert!(integrate(&oscillator, &[1.0, 0.0], (0.0, 1.0), 1e-16, Sampling::Steps).is_err());
        let bad = |_t: f64, _y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy.fill(f64::NAN);
            Ok(())
        };
        assert!(matches!(
            integrate(&bad, &[1.0], (0.0, 1.0), 1e-10, Sampling::Steps),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn stormer_verlet_bounded_energy_error() {
        let grad = |q: &[f64], p: &[f64], dq: &mut [f64], dp: &mut [f64]| -> Result<()> {
            dq[0] = q[0];
            dp[0] = p[0];
            Ok(())
        };
        let traj = stormer_verlet(&grad, &[1.0], &[0.0], 0.01, 100_000, 100).unwrap();
        let drift = monitor(&traj, &[("energy", &|y: &[f64]| 0.5 * (y[0] * y[0] + y[1] * y[1]))]);
        assert!(drift[0].1 < 1e-4);
    }
}
