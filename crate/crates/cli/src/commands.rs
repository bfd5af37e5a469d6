use std::f64::consts::TAU;

use curved2body::integrate::{integrate, Propagator, Sampling, Trajectory, VectorField};
use curved2body::kepler::{polar_to_delaunay, ConicGeometry};
use curved2body::orbits::{find_periodic, lift_orbit, secular_orbit, unwrap_angle, LiftedOrbit, LiftingField, PeriodicOptions, ReturnMapSetup};
use curved2body::reduction::{Model, ReducedState, ReducedSystem, ScaledOrbit};
use curved2body::secular::{
    average_consistency, average_per, log_log_slope, per_series, secular_phase_portrait, series_coefficients, FixedPointKind,
    PortraitGrid, SecularState,
};
use curved2body::{Curvature, CurvedSpace, Error};

use crate::config::{at_least, config_error, positive, ConicInput, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Output, Report, Table};
use crate::svg::{self, Series, Series3, PALETTE};

pub struct Context {
    pub cfg: RunConfig,
    pub out: Output,
    pub svg: bool,
}

impl Context {
    fn svg_file(&mut self, name: &str, body: String) -> Result<(), CliError> {
        if self.svg {
            self.out.text(name, &body)?;
        }
        Ok(())
    }
}

fn conic(cfg: &RunConfig, space: CurvedSpace) -> Result<ConicGeometry, CliError> {
    let params = cfg.masses()?.kepler_params(space).map_err(config_error)?;
    match cfg.kepler.conic {
        ConicInput::Actions { l, g_action } => ConicGeometry::from_actions(l, g_action, &params).map_err(config_error),
        ConicInput::Shape { alpha, epsilon } => {
            if !(0.0..1.0).contains(&epsilon) {
                return Err(CliError::Config(format!("kepler.conic.epsilon = {epsilon} must lie in [0, 1)")));
            }
            positive("kepler.conic.alpha", alpha)?;
            // Focal half-distance c = αε and cos_k(α/ρ) = cos_k(c/ρ) cos_k(β/ρ).
            let rho = space.rho();
            let ratio = space.cos_k(alpha / rho) / space.cos_k(alpha * epsilon / rho);
            let beta = match space.curvature() {
                Curvature::Spherical => ratio.clamp(-1.0, 1.0).acos() * rho,
                _ => ratio.max(1.0).acosh() * rho,
            };
            ConicGeometry::from_axes(alpha, beta.min(alpha), &params).map_err(config_error)
        }
    }
}

fn unit_vector(phi: f64, theta: f64, rho: f64) -> [f64; 3] {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    [rho * sp * ct, rho * sp * st, rho * cp]
}

pub fn kepler(ctx: &mut Context) -> Result<(), CliError> {
    let cfg = ctx.cfg.clone();
    positive("kepler.periods", cfg.kepler.periods)?;
    at_least("kepler.samples", cfg.kepler.samples, 1)?;
    let space = cfg.space()?;
    let c = conic(&cfg, space)?;
    let n = c.mean_motion();
    let t_end = cfg.kepler.periods * TAU / n;
    let mut table = Table::new(
        "kepler",
        &[
            ("t", "time"),
            ("ell", "rad"),
            ("nu", "rad"),
            ("u_o", "rad"),
            ("w", "1"),
            ("u", "rad"),
            ("phi", "rad"),
            ("theta", "rad"),
            ("r", "length"),
        ],
    );
    let mut theta_prev: Option<f64> = None;
    let mut track = Vec::new();
    for i in 0..=cfg.kepler.samples {
        let t = t_end * i as f64 / cfg.kepler.samples as f64;
        let p = c.orbit_point(n * t, cfg.kepler.g)?;
        let theta = match theta_prev {
            None => p.theta,
            Some(prev) => unwrap_angle(prev, p.theta),
        };
        theta_prev = Some(theta);
        table.push_nums(&[t, p.ell, p.nu, p.u_o, p.w, p.u, p.phi, theta, p.r]);
        track.push((p.phi, theta, p.r));
    }
    ctx.out.table(&table)?;

    let mut report = Report::default();
    report.add("curved semi-major axis alpha", c.alpha, "length");
    report.add("curved semi-minor axis beta", c.beta, "length");
    report.add("curved eccentricity", c.epsilon, "1");
    report.add("projected semi-major axis a", c.a, "length");
    report.add("projected eccentricity e", c.e, "1");
    report.add("Delaunay L", c.l, "action");
    report.add("Delaunay G", c.g_action, "action");
    report.add("mean motion", n, "1/time");
    report.add("period", TAU / n, "time");
    ctx.out.table(&report.into_table("kepler_report"))?;

    if ctx.svg {
        let digest = ctx.out.digest.clone();
        let projected: Vec<(f64, f64)> = track.iter().map(|&(_, th, r)| (r * th.cos(), r * th.sin())).collect();
        let plane = svg::line_plot(
            "central projection",
            "x",
            "y",
            &[Series::line("projected conic", projected, PALETTE[0]), Series::dots("attracting centre", vec![(0.0, 0.0)], PALETTE[1])],
            &digest,
        );
        ctx.svg_file("kepler_projection.svg", plane)?;
        let surface = match space.curvature() {
            Curvature::Spherical => {
                let pts = track.iter().map(|&(phi, th, _)| unit_vector(phi, th, space.rho())).collect();
                let centre = Series3 { label: "centre".into(), points: vec![[0.0, 0.0, space.rho()]; 2], color: PALETTE[1] };
                svg::sphere_plot(
                    "curved conic",
                    space.rho(),
                    &[Series3 { label: "orbit".into(), points: pts, color: PALETTE[0] }, centre],
                    [0.6, -0.9, 0.8],
                    &digest,
                )
            }
            _ => {
                let pts = track.iter().map(|&(phi, th, _)| (phi / space.rho(), th)).collect();
                svg::disk_plot("curved conic (Poincaré disk)", &[Series::line("orbit", pts, PALETTE[0])], &digest)
            }
        };
        ctx.svg_file("kepler_surface.svg", surface)?;
    }
    Ok(())
}

/// Least-squares slope of `y` against `x`.
fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn lifted_table(name: &str, lift: &LiftedOrbit, traj: &Trajectory) -> Table {
    let mut t = Table::new(
        name,
        &[
            ("t", "time"),
            ("x1", "length"),
            ("y1", "length"),
            ("z1", "length"),
            ("x2", "length"),
            ("y2", "length"),
            ("z2", "length"),
            ("omega", "rad"),
            ("lambda", "rad"),
            ("phi", "rad"),
            ("Jx", "action"),
            ("Jy", "action"),
            ("Jz", "action"),
        ],
    );
    for i in 0..lift.times.len() {
        let (a, b, j) = (lift.body1[i], lift.body2[i], lift.angular_momentum[i]);
        t.push_nums(&[lift.times[i], a[0], a[1], a[2], b[0], b[1], b[2], lift.omega[i], lift.lambda[i], traj.states[i][0], j[0], j[1], j[2]]);
    }
    t
}

fn lift_svg(ctx: &mut Context, name: &str, title: &str, lift: &LiftedOrbit, rho: f64) -> Result<(), CliError> {
    if !ctx.svg {
        return Ok(());
    }
    let curves = [
        Series3 { label: "body 1".into(), points: lift.body1.clone(), color: PALETTE[0] },
        Series3 { label: "body 2".into(), points: lift.body2.clone(), color: PALETTE[1] },
    ];
    let body = svg::sphere_plot(title, rho, &curves, [0.6, -0.9, 0.8], &ctx.out.digest);
    ctx.svg_file(name, body)
}

fn momentum_error(lift: &LiftedOrbit, c: f64) -> f64 {
    lift.angular_momentum.iter().map(|j| j[0].abs().max(j[1].abs()).max((j[2] - c).abs())).fold(0.0, f64::max)
}

/// Integrates the reduced flow, with the frame angle appended on the sphere
/// for the full model.
fn simulate_run(sys: &ReducedSystem, y0: &ReducedState, t_end: f64, samples: usize, tol: f64) -> (Trajectory, Option<Error>) {
    let lifting = match (sys.space.curvature(), sys.model) {
        (Curvature::Spherical, Model::Full) => LiftingField::new(*sys).ok(),
        _ => None,
    };
    let mut y = y0.to_array().to_vec();
    if lifting.is_some() {
        y.push(0.0);
    }
    let field: &dyn VectorField = match &lifting {
        Some(l) => l,
        None => sys,
    };
    let mut traj = Trajectory { times: vec![0.0], states: vec![y.clone()], invariant_drift: vec![] };
    let mut prop = match Propagator::new(field, 0.0, &y, t_end * 1e-3, tol) {
        Ok(p) => p,
        Err(e) => return (traj, Some(e)),
    };
    for i in 1..=samples {
        let t = if i == samples { t_end } else { t_end * i as f64 / samples as f64 };
        if let Err(e) = prop.advance_to(t) {
            return (traj, Some(e));
        }
        traj.times.push(t);
        traj.states.push(prop.state().to_vec());
    }
    (traj, None)
}

pub fn simulate(ctx: &mut Context) -> Result<(), CliError> {
    let cfg = ctx.cfg.clone();
    positive("simulate.periods", cfg.simulate.periods)?;
    at_least("simulate.samples", cfg.simulate.samples, 2)?;
    let orbit = cfg.scaled_orbit()?;
    let sys = orbit.reduced_system(cfg.simulate.model.into()).map_err(config_error)?;
    let y0 = orbit.reduced_state(cfg.orbit.ell, cfg.orbit.g)?;
    let fast_period = TAU / orbit.conic.mean_motion();
    let t_end = cfg.simulate.periods * fast_period;
    let (traj, failure) = simulate_run(&sys, &y0, t_end, cfg.simulate.samples, cfg.tol);

    let params = sys.kepler_params();
    let h0 = sys.hamiltonian(&y0)?;
    let mut table = Table::new(
        "simulate",
        &[
            ("t", "time"),
            ("phi", "rad"),
            ("p_phi", "action"),
            ("theta", "rad"),
            ("p_theta", "action"),
            ("energy", "energy"),
            ("G", "action"),
            ("g", "rad"),
            ("omega", "rad"),
        ],
    );
    let (mut g_prev, mut theta_prev, mut drift) = (None, None, 0.0f64);
    let (mut times, mut gs, mut g_actions) = (Vec::new(), Vec::new(), Vec::new());
    let kc = sys.space.kappa() * sys.c;
    for (t, y) in traj.times.iter().zip(&traj.states) {
        let s = ReducedState::from_slice(y);
        let h = sys.hamiltonian(&s).unwrap_or(f64::NAN);
        drift = drift.max((h - h0).abs() / h0.abs());
        let (big_g, g) = match polar_to_delaunay(&s, &params) {
            Ok(d) => {
                let g = g_prev.map_or(d.g, |p| unwrap_angle(p, d.g));
                g_prev = Some(g);
                times.push(*t);
                gs.push(g);
                g_actions.push(d.g_action);
                (d.g_action, g)
            }
            Err(_) => (f64::NAN, f64::NAN),
        };
        let omega = match (y.len(), sys.space.curvature()) {
            (5, _) => y[4],
            (_, Curvature::Spherical) => kc * t,
            _ => f64::NAN,
        };
        let theta = theta_prev.map_or(s.theta, |p| unwrap_angle(p, s.theta));
        theta_prev = Some(theta);
        table.push_nums(&[*t, s.phi, s.p_phi, theta, s.p_theta, h, big_g, g, omega]);
    }
    ctx.out.table(&table)?;

    let mut report = Report::default();
    report.add("model", format!("{:?}", sys.model).to_lowercase(), "-");
    report.add("fast period", fast_period, "time");
    report.add("t_end", *traj.times.last().unwrap(), "time");
    report.add("completed", if failure.is_none() { "yes" } else { "no" }, "-");
    report.add("energy drift max |dF|/|F|", drift, "1");
    if times.len() >= 2 {
        let rate = fit_slope(&times, &gs);
        let mean_g = g_actions.iter().sum::<f64>() / g_actions.len() as f64;
        let predicted = -2.0 * sys.space.kappa() * mean_g;
        report.add("mean dg/dt", rate, "rad/time");
        report.add("-2 kappa <G>", predicted, "rad/time");
        report.add("precession relative error", ((rate - predicted) / predicted).abs(), "1");
    }
    if let Some(e) = &failure {
        report.add("failure", e.to_string(), "-");
    }
    ctx.out.table(&report.into_table("simulate_report"))?;

    if ctx.svg {
        let scale = orbit.action_scale();
        let pts: Vec<(f64, f64)> = gs.iter().zip(&g_actions).map(|(g, big)| (*g, big / scale)).collect();
        let body = svg::line_plot("osculating (g, Ĝ)", "g [rad]", "Ĝ", &[Series::line("orbit", pts, PALETTE[0])], &ctx.out.digest);
        ctx.svg_file("simulate_secular.svg", body)?;
        if sys.space.curvature() == Curvature::Spherical {
            let lift = lift_orbit(&traj, &sys)?;
            lift_svg(ctx, "simulate_lift.svg", "lifted two-body orbit", &lift, sys.space.rho())?;
        }
    }
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn secular_state(cfg: &RunConfig) -> Result<SecularState, CliError> {
    let o = &cfg.orbit;
    SecularState::new(o.l_hat, o.g_hat, o.g, o.c_hat, cfg.eps, cfg.masses()?, cfg.space()?).map_err(config_error)
}

fn check_eps_list(name: &str, list: &[f64]) -> Result<(), CliError> {
    if list.len() < 2 {
        return Err(CliError::Config(format!("{name} needs at least two values")));
    }
    for &e in list {
        positive(name, e)?;
    }
    Ok(())
}

pub fn secular(ctx: &mut Context) -> Result<(), CliError> {
    let cfg = ctx.cfg.clone();
    let sc = &cfg.secular;
    check_eps_list("secular.eps_list", &sc.eps_list)?;
    at_least("secular.order", sc.order, 2)?;
    at_least("secular.nodes", sc.nodes, 8)?;
    at_least("secular.samples", sc.samples, 1)?;
    at_least("secular.seeds", sc.seeds, 1)?;
    positive("secular.g_hat_fraction", sc.g_hat_fraction)?;
    let state = secular_state(&cfg)?;
    let order = sc.order.min(state.max_order());

    let consistency = average_consistency(&state, &sc.eps_list, order, sc.nodes)?;
    let mut t = Table::new("secular_consistency", &[("eps", "1"), ("error", "1")]);
    for (e, err) in sc.eps_list.iter().zip(&consistency.errors) {
        t.push_nums(&[*e, *err]);
    }
    ctx.out.table(&t)?;

    let coeffs = series_coefficients(&state)?;
    let mut t = Table::new("secular_coefficients", &[("power", "1"), ("coefficient", "1")]);
    for (i, c) in coeffs.iter().enumerate() {
        t.push_nums(&[(i + 2) as f64, c.unwrap_or(f64::NAN)]);
    }
    ctx.out.table(&t)?;

    let grid = PortraitGrid::symmetric(state.l_hat, state.c_hat, sc.g_hat_fraction, sc.samples, sc.seeds);
    let portrait = secular_phase_portrait(&state, order, &grid)?;
    let mut t = Table::new("secular_portrait", &[("g_hat", "scaled action"), ("g", "rad"), ("dg_hat/dl", "1/rad"), ("dg/dl", "1")]);
    for s in &portrait.samples {
        t.push_nums(&[s.g_hat, s.g, s.d_g_hat, s.d_g]);
    }
    ctx.out.table(&t)?;
    let mut t = Table::new(
        "secular_fixed_points",
        &[
            ("g_hat", "scaled action"),
            ("g", "rad"),
            ("kind", "-"),
            ("eig1_re", "1"),
            ("eig1_im", "1"),
            ("eig2_re", "1"),
            ("eig2_im", "1"),
            ("residual", "1"),
        ],
    );
    for f in &portrait.fixed_points {
        let kind = match f.kind {
            FixedPointKind::Saddle => "saddle",
            FixedPointKind::Center => "center",
            FixedPointKind::Other => "other",
        };
        let [(a, b), (c, d)] = f.eigenvalues;
        t.push([f.g_hat.into(), f.g.into(), Cell::from(kind), a.into(), b.into(), c.into(), d.into(), f.residual.into()]);
    }
    ctx.out.table(&t)?;

    let mut report = Report::default();
    report.add("series order", order as f64, "1");
    report.add("consistency slope", consistency.slope, "1");
    report.add("fixed points", portrait.fixed_points.len() as f64, "1");
    report.add("saddles", portrait.fixed_points.iter().filter(|f| f.kind == FixedPointKind::Saddle).count() as f64, "1");
    report.add("seed failures", portrait.failures.len() as f64, "1");
    ctx.out.table(&report.into_table("secular_report"))?;

    if ctx.svg {
        let (gh_span, g_span) = (grid.g_hat_range.1 - grid.g_hat_range.0, grid.g_range.1 - grid.g_range.0);
        let len = 0.4 / sc.samples as f64;
        let mut arrows = Vec::new();
        for s in &portrait.samples {
            // Direction in normalized plot units.
            let (u, v) = (s.d_g / g_span, s.d_g_hat / gh_span);
            let n = u.hypot(v);
            if n > 0.0 && n.is_finite() {
                arrows.push((s.g, s.g_hat));
                arrows.push((s.g + len * g_span * u / n, s.g_hat + len * gh_span * v / n));
            }
        }
        let pick = |k: FixedPointKind| portrait.fixed_points.iter().filter(|f| f.kind == k).map(|f| (f.g, f.g_hat)).collect::<Vec<_>>();
        let body = svg::line_plot(
            "secular phase portrait",
            "g [rad]",
            "Ĝ",
            &[
                Series::segments("", arrows, PALETTE[0]),
                Series::dots("saddle", pick(FixedPointKind::Saddle), PALETTE[1]),
                Series::dots("center", pick(FixedPointKind::Center), PALETTE[2]),
            ],
            &ctx.out.digest,
        );
        ctx.svg_file("secular_portrait.svg", body)?;
    }
    Ok(())
}

fn lift_run(orbit: &ScaledOrbit, ell: f64, g: f64, periods: f64, samples: usize, tol: f64) -> Result<(Trajectory, LiftedOrbit, ReducedSystem), CliError> {
    let sys = orbit.reduced_system(Model::Full)?;
    let field = LiftingField::new(sys)?;
    let mut y0 = orbit.reduced_state(ell, g)?.to_array().to_vec();
    y0.push(0.0);
    let t_end = periods * TAU / orbit.conic.mean_motion();
    let traj = integrate(&field, &y0, (0.0, t_end), tol, Sampling::Uniform(samples))?;
    let lift = lift_orbit(&traj, &sys)?;
    Ok((traj, lift, sys))
}

pub fn periodic(ctx: &mut Context) -> Result<(), CliError> {
    let cfg = ctx.cfg.clone();
    let pc = &cfg.periodic;
    if pc.m == 0 || pc.n == 0 {
        return Err(CliError::Config("periodic.m and periodic.n must be positive".into()));
    }
    positive("periodic.lift_periods", pc.lift_periods)?;
    at_least("periodic.samples", pc.samples, 2)?;
    let (masses, space) = (cfg.masses()?, cfg.space()?);
    let (l, c) = (pc.l_hat, pc.c_hat);
    positive("periodic.l_hat", l)?;
    positive("periodic.c_hat", c)?;
    let opts = PeriodicOptions { g0: pc.g0, ..PeriodicOptions::default() };
    let po = find_periodic(pc.m, pc.n, l, c, masses, space, &opts)?;

    let mut t = Table::new("periodic_newton", &[("iteration", "1"), ("residual", "rad")]);
    for (i, r) in po.residual_history.iter().enumerate() {
        t.push_nums(&[i as f64, *r]);
    }
    ctx.out.table(&t)?;

    let setup = ReturnMapSetup { l_hat: l, c_hat: c, masses, space, eps: po.eps, tol: cfg.tol };
    let sec = secular_orbit(&setup, po.g_hat, po.g, setup.window(), Sampling::Uniform(pc.samples))?;
    let mut t = Table::new("periodic_secular", &[("ell", "rad"), ("g_hat", "scaled action"), ("g", "rad")]);
    for (ell, y) in sec.times.iter().zip(&sec.states) {
        t.push_nums(&[*ell, y[0], y[1]]);
    }
    ctx.out.table(&t)?;

    let orbit = ScaledOrbit::new(l, po.g_hat, c, masses, space, po.eps)?;
    let (traj, lift, sys) = lift_run(&orbit, 0.0, po.g, pc.lift_periods, pc.samples, cfg.tol)?;
    ctx.out.table(&lifted_table("periodic_lift", &lift, &traj))?;

    let mut report = Report::default();
    report.add("m", pc.m as f64, "1");
    report.add("n", pc.n as f64, "1");
    report.add("eps", po.eps, "1");
    report.add("seed g_hat", po.seed.0, "scaled action");
    report.add("seed g", po.seed.1, "rad");
    report.add("root g_hat", po.g_hat, "scaled action");
    report.add("root g", po.g, "rad");
    report.add("newton iterations", po.iterations as f64, "1");
    report.add("final residual", *po.residual_history.last().unwrap_or(&f64::NAN), "rad");
    report.add("condition number", po.condition_number, "1");
    report.add("P_bar first", po.p_bar.0, "scaled action");
    report.add("P_bar second", po.p_bar.1, "rad");
    report.add("closure error", po.closure_error, "1");
    report.add("seed offset ratio", po.seed_offset_ratio, "1");
    report.add("lift momentum error", momentum_error(&lift, sys.c), "action");
    report.add("lift distance error", lift.max_distance_error, "rad");
    ctx.out.table(&report.into_table("periodic_report"))?;

    if ctx.svg {
        let pts = sec.states.iter().map(|y| (y[1], y[0])).collect();
        let body = svg::line_plot("continued secular orbit", "g [rad]", "Ĝ", &[Series::line("periodic orbit", pts, PALETTE[0])], &ctx.out.digest);
        ctx.svg_file("periodic_secular.svg", body)?;
        lift_svg(ctx, "periodic_lift.svg", "lifted periodic two-body orbit", &lift, space.rho())?;
    }
    Ok(())
}

pub fn average(ctx: &mut Context) -> Result<(), CliError> {
    let cfg = ctx.cfg.clone();
    let ac = &cfg.average;
    check_eps_list("average.eps_list", &ac.eps_list)?;
    at_least("average.nodes", ac.nodes, 8)?;
    at_least("average.order", ac.order, 2)?;
    let base = secular_state(&cfg)?;
    let order = ac.order.min(base.max_order());
    let mut t = Table::new(
        "average",
        &[("eps", "1"), ("numeric", "scaled energy"), ("series", "scaled energy"), ("difference", "scaled energy"), ("numeric/eps^2", "scaled energy")],
    );
    let mut errs = Vec::new();
    for &eps in &ac.eps_list {
        let st = SecularState { eps, ..base };
        let num = average_per(&st, ac.nodes, ac.mode.into())?;
        let ser = per_series(&st, order)?;
        errs.push((num - ser).abs());
        t.push_nums(&[eps, num, ser, num - ser, num / (eps * eps)]);
    }
    ctx.out.table(&t)?;
    let slope = log_log_slope(&ac.eps_list, &errs);
    let mut report = Report::default();
    report.add("series order", order as f64, "1");
    report.add("log-log slope", slope, "1");
    report.add("leading coefficient C^2/2 - s G^2", base.c_hat.powi(2) / 2.0 - base.space.sign() * base.g_hat.powi(2), "scaled energy");
    ctx.out.table(&report.into_table("average_report"))?;
    if ctx.svg {
        let pts = ac.eps_list.iter().zip(&errs).map(|(e, d)| (e.log10(), d.log10())).collect();
        let body = svg::line_plot("average minus series", "log10 eps", "log10 |difference|", &[Series::line("error", pts, PALETTE[0])], &ctx.out.digest);
        ctx.svg_file("average.svg", body)?;
    }
    Ok(())
}

pub fn lift(ctx: &mut Context) -> Result<(), CliError> {
    let cfg = ctx.cfg.clone();
    positive("lift.periods", cfg.lift.periods)?;
    at_least("lift.samples", cfg.lift.samples, 2)?;
    let orbit = cfg.scaled_orbit()?;
    let (traj, lift, sys) = lift_run(&orbit, cfg.orbit.ell, cfg.orbit.g, cfg.lift.periods, cfg.lift.samples, cfg.tol)?;
    ctx.out.table(&lifted_table("lift", &lift, &traj))?;
    let mut report = Report::default();
    report.add("C", sys.c, "action");
    report.add("momentum error", momentum_error(&lift, sys.c), "action");
    report.add("distance error", lift.max_distance_error, "rad");
    report.add("radius error", lift.max_radius_error, "1");
    ctx.out.table(&report.into_table("lift_report"))?;
    lift_svg(ctx, "lift.svg", "lifted two-body orbit", &lift, sys.space.rho())
}

