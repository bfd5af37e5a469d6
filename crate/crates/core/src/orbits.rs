//! Long-time return map of the secular flow, continuation of the periodic
//! precessing orbits, and reconstruction of two-body motions on the sphere
//! from reduced trajectories.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::{Error, Result};
use crate::integrate::{integrate, Propagator, Sampling, Trajectory, VectorField};
use crate::kepler::{polar_to_delaunay, PolarState};
use crate::reduction::{MassPair, Model, ReducedSystem, ScaledOrbit};
use crate::secular::{frak_m, secular_field, SecularState};
use crate::space::{Curvature, CurvedSpace};

/// Largest `𝐞` accepted by the return map.
pub const MAX_EPS: f64 = 0.2;

fn wrap_pi(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Continuity tracking of an angle known modulo `2π`.
pub fn unwrap_angle(prev: f64, raw: f64) -> f64 {
    prev + wrap_pi(raw - prev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnMode {
    /// The secular field in `ℓ`.
    Secular,
    /// The full reduced flow, read through osculating Delaunay elements.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMapResult {
    /// `ΔĜ/𝐞` over the window.
    pub delta_g_hat_scaled: f64,
    /// Unwrapped increment of `g`.
    pub delta_g: f64,
    /// `2π/𝐞²`.
    pub window: f64,
    pub final_g_hat: f64,
    pub final_g: f64,
}

impl ReturnMapResult {
    pub fn p_bar(&self) -> (f64, f64) {
        (self.delta_g_hat_scaled, self.delta_g)
    }
}

/// Inputs of the return map other than the starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMapSetup {
    pub l_hat: f64,
    pub c_hat: f64,
    pub masses: MassPair,
    pub space: CurvedSpace,
    pub eps: f64,
    pub tol: f64,
}

impl ReturnMapSetup {
    pub fn window(&self) -> f64 {
        TAU / (self.eps * self.eps)
    }

    fn state(&self, g_hat: f64, g: f64) -> Result<SecularState> {
        SecularState::new(self.l_hat, g_hat, g, self.c_hat, self.eps, self.masses, self.space)
    }
}

struct SecularFlow {
    base: SecularState,
    order: usize,
}

impl VectorField for SecularFlow {
    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let st = self.base.with(y[0], y[1]);
        if st.g_hat.abs() >= st.l_hat {
            return Err(Error::domain("secular orbit reached a circular state"));
        }
        let f = secular_field(&st, self.order)?;
        dy[0] = f.d_g_hat;
        dy[1] = f.d_g;
        Ok(())
    }
}

/// Secular orbit from `(Ĝ, g)` over `ℓ ∈ [0, ℓ_end]`.
pub fn secular_orbit(setup: &ReturnMapSetup, g_hat: f64, g: f64, ell_end: f64, sampling: Sampling) -> Result<Trajectory> {
    let base = setup.state(g_hat, g)?;
    let flow = SecularFlow { base, order: base.max_order() };
    integrate(&flow, &[g_hat, g], (0.0, ell_end), setup.tol, sampling)
}

/// `P̄_𝐞(Ĝ°, g°) = ∫₀^{2π/𝐞²} ((1/𝐞) dĜ/dℓ, dg/dℓ) dℓ`.
pub fn return_map(g_hat0: f64, g0: f64, setup: &ReturnMapSetup, mode: ReturnMode) -> Result<ReturnMapResult> {
    if !(setup.eps > 0.0 && setup.eps <= MAX_EPS) {
        return Err(Error::domain(format!("eps = {} outside (0, {MAX_EPS}]", setup.eps)));
    }
    if g_hat0.abs() >= setup.l_hat {
        return Err(Error::domain("return map needs a non-circular orbit"));
    }
    let window = setup.window();
    let (g_hat1, g1) = match mode {
        ReturnMode::Secular => {
            let traj = secular_orbit(setup, g_hat0, g0, window, Sampling::Stride(usize::MAX))?;
            let (_, y) = traj.last().expect("non-empty trajectory");
            (y[0], y[1])
        }
        ReturnMode::Full => full_return(g_hat0, g0, setup, window)?,
    };
    Ok(ReturnMapResult {
        delta_g_hat_scaled: (g_hat1 - g_hat0) / setup.eps,
        delta_g: g1 - g0,
        window,
        final_g_hat: g_hat1,
        final_g: g1,
    })
}

/// Osculating `(ℓ, Ĝ, g)` of a reduced state, with the angles unwrapped
/// against `prev`.
fn osculating(sys: &ReducedSystem, y: &[f64], scale: f64, prev: (f64, f64)) -> Result<(f64, f64, f64)> {
    let d = polar_to_delaunay(&PolarState::from_slice(y), &sys.kepler_params())?;
    Ok((unwrap_angle(prev.0, d.ell), d.g_action / scale, unwrap_angle(prev.1, d.g)))
}

fn full_return(g_hat0: f64, g0: f64, setup: &ReturnMapSetup, window: f64) -> Result<(f64, f64)> {
    let orbit = ScaledOrbit::new(setup.l_hat, g_hat0, setup.c_hat, setup.masses, setup.space, setup.eps)?;
    let sys = orbit.reduced_system(Model::Full)?;
    let scale = orbit.action_scale();
    let y0 = orbit.reduced_state(0.0, g0)?.to_array();
    let period = TAU / orbit.conic.mean_motion();
    let mut prop = Propagator::new(&sys, 0.0, &y0, period / 50.0, setup.tol)?;
    let (mut ell, _, mut g) = osculating(&sys, &y0, scale, (0.0, g0))?;
    let ell_target = ell + window;
    let t_max = 4.0 * window / orbit.conic.mean_motion();
    loop {
        let t0 = prop.t();
        prop.step(t_max)?;
        if prop.t() == t0 {
            return Err(Error::NonConvergence { what: "full return map window", iterations: prop.accepted_steps(), residual: ell_target - ell });
        }
        let (ell_new, _, g_new) = osculating(&sys, prop.state(), scale, (ell, g))?;
        if ell_new >= ell_target {
            // Secant on the dense output of the last step.
            let (mut a, mut b) = (t0, prop.t());
            let (mut fa, mut fb) = (ell - ell_target, ell_new - ell_target);
            let mut out = (ell_new, g_new, prop.state().to_vec());
            for _ in 0..100 {
                let c = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
                let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
                let yc = prop.state_at(c)?;
                let (lc, _, gc) = osculating(&sys, &yc, scale, (ell, g))?;
                out = (lc, gc, yc);
                let fc = lc - ell_target;
                if fc.abs() <= 1e-13 * ell_target || (b - a).abs() <= 1e-15 * b.abs() {
                    break;
                }
                if fc < 0.0 {
                    a = c;
                    fa = fc;
                } else {
                    b = c;
                    fb = fc;
                }
            }
            let (_, g_hat, _) = osculating(&sys, &out.2, scale, (ell, g))?;
            return Ok((g_hat, out.1));
        }
        ell = ell_new;
        g = g_new;
    }
}

/// `ω₀ = 2Ĝ°L̂³/m³`, the leading precession of `g` per revolution in units
/// of `−2π` over the window.
pub fn precession_number(g_hat: f64, l_hat: f64, masses: &MassPair) -> f64 {
    2.0 * g_hat * l_hat.powi(3) / masses.m().powi(3)
}

/// Leading-order return map
/// `P̄₀ = (𝔪 (cos(g° − 2πω₀) − cos g°)/ω₀, −2πω₀)`.
pub fn p_bar_zero(g_hat: f64, g: f64, l_hat: f64, c_hat: f64, masses: &MassPair) -> Result<(f64, f64)> {
    let w0 = precession_number(g_hat, l_hat, masses);
    let fm = frak_m(l_hat, g_hat, c_hat, masses)?;
    let first = if w0 == 0.0 {
        TAU * fm * g.sin()
    } else {
        fm * ((g - TAU * w0).cos() - g.cos()) / w0
    };
    Ok((first, -TAU * w0))
}

/// Seed `(Ĝ°, g°)` of the `n`-fold precessing orbit: `ω₀ = n`.
pub fn periodic_seed(n: u32, g0: f64, l_hat: f64, masses: &MassPair) -> (f64, f64) {
    (n as f64 * masses.m().powi(3) / (2.0 * l_hat.powi(3)), g0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOptions {
    /// `g°`, normally `0` or `π`.
    pub g0: f64,
    pub tol: f64,
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub fd_step: f64,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        Self { g0: 0.0, tol: 1e-13, max_iterations: 15, residual_tol: 1e-10, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub g_hat: f64,
    pub g: f64,
    pub eps: f64,
    pub seed: (f64, f64),
    pub iterations: usize,
    /// `|P̄₂ + 2πn|` before each Newton step and at the root.
    pub residual_history: Vec<f64>,
    /// 2-norm condition number of the Jacobian of `(P̄₂ + 2πn, g − g°)`.
    pub condition_number: f64,
    /// `P̄_𝐞` at the root.
    pub p_bar: (f64, f64),
    /// `max(|Ĝ(ℓ_end) − Ĝ|, |g(ℓ_end) + 2πn − g|)` on re-integration.
    pub closure_error: f64,
    /// `|Ĝ − Ĝ°| / 𝐞`.
    pub seed_offset_ratio: f64,
}

fn cond2(j: [[f64; 2]; 2]) -> f64 {
    let a = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let b = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let d = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    let tr = a + d;
    let disc = ((a - d) * (a - d) / 4.0 + b * b).sqrt();
    let big = tr / 2.0 + disc;
    let small = tr / 2.0 - disc;
    if small <= 0.0 {
        f64::INFINITY
    } else {
        (big / small).sqrt()
    }
}

/// Continues the orbit making `m` revolutions while its conic precesses `n`
/// times: `𝐞 = 1/√m`, and Newton solves `P̄_𝐞(Ĝ, g) = (0, −2πn)` with `g`
/// pinned at the seed phase.
pub fn find_periodic(m: u32, n: u32, l_hat: f64, c_hat: f64, masses: MassPair, space: CurvedSpace, opts: &PeriodicOptions) -> Result<PeriodicOrbit> {
    if space.curvature() != Curvature::Spherical {
        return Err(Error::unsupported("periodic continuation is implemented on the sphere only"));
    }
    if m == 0 || n == 0 {
        return Err(Error::domain("m and n must be positive"));
    }
    let eps = 1.0 / (m as f64).sqrt();
    if eps > MAX_EPS {
        return Err(Error::Infeasible(format!("m = {m} gives eps = {eps} above {MAX_EPS}")));
    }
    if masses.is_equal() {
        return Err(Error::Infeasible("equal masses: the cubic secular coefficient vanishes and the continuation degenerates".into()));
    }
    let seed = periodic_seed(n, opts.g0, l_hat, &masses);
    if seed.0 >= l_hat.min(c_hat) {
        return Err(Error::Infeasible(format!(
            "seed G^ = {} is not below min(L^, C^) = {}",
            seed.0,
            l_hat.min(c_hat)
        )));
    }
    let setup = ReturnMapSetup { l_hat, c_hat, masses, space, eps, tol: opts.tol };
    let target = -TAU * n as f64;
    let p2 = |u: f64, g: f64| -> Result<f64> { Ok(return_map(u, g, &setup, ReturnMode::Secular)?.delta_g - target) };

    let h = opts.fd_step;
    let mut u = seed.0;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let r = p2(u, seed.1)?;
        history.push(r.abs());
        if r.abs() < opts.residual_tol {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence { what: "periodic orbit Newton", iterations, residual: r.abs() });
        }
        let d = (p2(u + h, seed.1)? - p2(u - h, seed.1)?) / (2.0 * h);
        if !(d.is_finite() && d != 0.0) {
            return Err(Error::NonConvergence { what: "periodic orbit Newton (flat residual)", iterations, residual: r.abs() });
        }
        // Backtrack while the residual does not decrease.
        let mut step = -r / d;
        loop {
            let trial = u + step;
            if trial.abs() < l_hat.min(c_hat) {
                if let Ok(rt) = p2(trial, seed.1) {
                    if rt.abs() < r.abs() || step.abs() < 1e-14 {
                        u = trial;
                        break;
                    }
                }
            }
            step *= 0.5;
            if step.abs() < 1e-16 {
                return Err(Error::NonConvergence { what: "periodic orbit line search", iterations, residual: r.abs() });
            }
        }
        iterations += 1;
    }

    let d_u = (p2(u + h, seed.1)? - p2(u - h, seed.1)?) / (2.0 * h);
    let d_g = (p2(u, seed.1 + h)? - p2(u, seed.1 - h)?) / (2.0 * h);
    let condition_number = cond2([[d_u, d_g], [0.0, 1.0]]);
    let at_root = return_map(u, seed.1, &setup, ReturnMode::Secular)?;
    let closure_error = (at_root.final_g_hat - u).abs().max((at_root.final_g - target - seed.1).abs());
    Ok(PeriodicOrbit {
        g_hat: u,
        g: seed.1,
        eps,
        seed,
        iterations,
        residual_history: history,
        condition_number,
        p_bar: at_root.p_bar(),
        closure_error,
        seed_offset_ratio: (u - seed.0).abs() / eps,
    })
}

/// Reduced field augmented by the overall rotation angle `ω` about `C⃗`:
/// states `(φ, p_φ, θ, p_θ, ω)`.
#[derive(Debug, Clone, Copy)]
pub struct LiftingField {
    pub system: ReducedSystem,
}

impl LiftingField {
    pub fn new(system: ReducedSystem) -> Result<Self> {
        system.space.require_spherical("lifting")?;
        Ok(Self { system })
    }

    /// `ω̇ = (ν·∇_ν H − θ̇ p_θ)/C`; every `ν`-dependent term of `H` is
    /// quadratic, so `ν·∇_ν H = 2 T_ν`.
    pub fn omega_rate(&self, state: &PolarState, theta_dot: f64) -> Result<f64> {
        let sys = &self.system;
        let p = sys.kepler_params();
        let rho = sys.space.rho();
        let h = sys.hamiltonian(state)?;
        let t_nu = h - state.p_phi.powi(2) / (2.0 * p.m * rho * rho) + p.m * p.big_m / rho * sys.space.cot_k(state.phi);
        Ok((2.0 * t_nu - theta_dot * state.p_theta) / sys.c)
    }
}

impl VectorField for LiftingField {
    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let state = PolarState::from_slice(y);
        let d = self.system.vector_field(&state)?;
        dy[..4].copy_from_slice(&d.to_array());
        dy[4] = self.omega_rate(&state, d.theta)?;
        Ok(())
    }
}

/// Two-body motion on the sphere reconstructed from a reduced trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LiftedOrbit {
    pub times: Vec<f64>,
    pub body1: Vec<[f64; 3]>,
    pub body2: Vec<[f64; 3]>,
    pub velocity1: Vec<[f64; 3]>,
    pub velocity2: Vec<[f64; 3]>,
    pub omega: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `m₁ q₁ × q̇₁ + m₂ q₂ × q̇₂`.
    pub angular_momentum: Vec<[f64; 3]>,
    /// Largest `|∠(q₁, q₂) − φ|`.
    pub max_distance_error: f64,
    /// Largest `| |q|² − ρ² | / ρ²`.
    pub max_radius_error: f64,
}

fn arr(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn hat(v: Vector3<f64>) -> Matrix3<f64> {
    v.cross_matrix()
}

/// Lifts `(φ, p_φ, θ, p_θ[, ω])` samples to body positions
/// `q = R_k̂(ω) R_î(λ) R_k̂(θ) q°(φ)` with `cos λ = p_θ/C` and
/// `q°(φ) = ρ(0, ∓sin m₂φ / sin m₁φ, cos ·)`.
///
/// Without a fifth component the truncated model's `ω = κ C t` is used.
pub fn lift_orbit(traj: &Trajectory, system: &ReducedSystem) -> Result<LiftedOrbit> {
    let field = LiftingField::new(*system)?;
    let (m1, m2) = (system.masses.m1(), system.masses.m2());
    let rho = system.space.rho();
    let c = system.c;
    let mut out = LiftedOrbit::default();
    for (&t, y) in traj.times.iter().zip(&traj.states) {
        if y.len() < 4 {
            return Err(Error::domain("reduced states need four components"));
        }
        let state = PolarState::from_slice(y);
        let omega = match y.get(4) {
            Some(&w) => w,
            None if system.model == Model::Truncated => system.space.kappa() * c * t,
            None => return Err(Error::domain("full-model lifting needs the rotation angle as a fifth component")),
        };
        let cos_l = state.p_theta / c;
        if cos_l.abs() > 1.0 {
            return Err(Error::chart(format!("|G| = {} exceeds C = {c}", state.p_theta.abs())));
        }
        let lambda = cos_l.acos();
        let d = system.vector_field(&state)?;
        let omega_dot = field.omega_rate(&state, d.theta)?;
        let sin_l = lambda.sin();
        let lambda_dot = if sin_l > 1e-300 { -d.p_theta / (c * sin_l) } else { 0.0 };

        let rk = |a: f64| Rotation3::from_axis_angle(&Vector3::z_axis(), a);
        let rx = |a: f64| Rotation3::from_axis_angle(&Vector3::x_axis(), a);
        let r = rk(omega) * rx(lambda) * rk(state.theta);
        let k = Vector3::z();
        let (st, ct) = state.theta.sin_cos();
        let omega_body = omega_dot * (r.inverse() * k) + lambda_dot * Vector3::new(ct, -st, 0.0) + d.theta * k;

        let (a1, a2) = (m2 * state.phi, m1 * state.phi);
        let q1 = rho * Vector3::new(0.0, -a1.sin(), a1.cos());
        let q2 = rho * Vector3::new(0.0, a2.sin(), a2.cos());
        let dq1 = rho * m2 * Vector3::new(0.0, -a1.cos(), -a1.sin());
        let dq2 = rho * m1 * Vector3::new(0.0, a2.cos(), -a2.sin());
        let w = hat(omega_body);
        let p1 = r * q1;
        let p2 = r * q2;
        let v1 = r * (w * q1 + dq1 * d.phi);
        let v2 = r * (w * q2 + dq2 * d.phi);
        let j = m1 * p1.cross(&v1) + m2 * p2.cross(&v2);

        let dist = (p1.dot(&p2) / (p1.norm() * p2.norm())).clamp(-1.0, 1.0).acos();
        out.max_distance_error = out.max_distance_error.max((dist - state.phi).abs());
        for p in [&p1, &p2] {
            out.max_radius_error = out.max_radius_error.max((p.norm_squared() - rho * rho).abs() / (rho * rho));
        }
        out.times.push(t);
        out.body1.push(arr(&p1));
        out.body2.push(arr(&p2));
        out.velocity1.push(arr(&v1));
        out.velocity2.push(arr(&v2));
        out.omega.push(omega);
        out.lambda.push(lambda);
        out.angular_momentum.push(arr(&j));
    }
    Ok(out)
}

/// Precession of the osculating pericenter along a reduced trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecessionReport {
    /// Least-squares slope of the unwrapped `g(t)`.
    pub rate: f64,
    /// Time average of the osculating `G`.
    pub mean_g_action: f64,
    /// `−2κ⟨G⟩`.
    pub predicted: f64,
    pub times: Vec<f64>,
    pub g: Vec<f64>,
    pub g_action: Vec<f64>,
}

impl PrecessionReport {
    pub fn relative_error(&self) -> f64 {
        ((self.rate - self.predicted) / self.predicted).abs()
    }
}

/// Integrates the reduced flow over `[0, t_end]` and fits `g(t)`.
pub fn measure_precession(system: &ReducedSystem, y0: &PolarState, t_end: f64, samples: usize, tol: f64) -> Result<PrecessionReport> {
    let traj = integrate(system, &y0.to_array(), (0.0, t_end), tol, Sampling::Uniform(samples))?;
    let params = system.kepler_params();
    let mut g = Vec::with_capacity(traj.len());
    let mut g_action = Vec::with_capacity(traj.len());
    for y in &traj.states {
        let d = polar_to_delaunay(&PolarState::from_slice(y), &params)?;
        let prev = g.last().copied().unwrap_or(d.g);
        g.push(unwrap_angle(prev, d.g));
        g_action.push(d.g_action);
    }
    let n = traj.len() as f64;
    let mt = traj.times.iter().sum::<f64>() / n;
    let mg = g.iter().sum::<f64>() / n;
    let sxy: f64 = traj.times.iter().zip(&g).map(|(t, v)| (t - mt) * (v - mg)).sum();
    let sxx: f64 = traj.times.iter().map(|t| (t - mt) * (t - mt)).sum();
    let mean_g_action = g_action.iter().sum::<f64>() / n;
    Ok(PrecessionReport {
        rate: sxy / sxx,
        mean_g_action,
        predicted: crate::secular::precession_rate(mean_g_action, &system.space),
        times: traj.times,
        g,
        g_action,
    })
}
