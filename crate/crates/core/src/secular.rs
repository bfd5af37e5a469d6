//! First-order averaging over the fast mean anomaly.
//!
//! The averaged perturbation `⟨Per⟩(L̂, Ĝ, g)` is available two ways: by
//! quadrature along the osculating orbit ([`average_numeric`]) and as a
//! truncated series in `𝐞` ([`per_series`]). The secular system is
//!
//! ```text
//! dĜ/dℓ = −∂_g⟨Per⟩ / D,   dg/dℓ = ∂_Ĝ⟨Per⟩ / D,
//! D = ∂_L̂ (Kep_{𝐞²} + ⟨Per⟩),
//! ```
//!
//! with `L̂` a first integral.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kepler::{anomaly_convert, flat_rate, true_of_flat, Anomaly, PolarState};
use crate::reduction::{scaled_kepler, MassPair, ScaledOrbit};
use crate::space::{Curvature, CurvedSpace};

/// Smallest node count accepted by [`average_numeric`].
pub const MIN_NODES: usize = 64;

/// Point of the secular phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularState {
    pub l_hat: f64,
    pub g_hat: f64,
    pub g: f64,
    pub c_hat: f64,
    pub eps: f64,
    pub masses: MassPair,
    pub space: CurvedSpace,
}

impl SecularState {
    /// Negative `Ĝ` (retrograde orbits) is accepted.
    pub fn new(l_hat: f64, g_hat: f64, g: f64, c_hat: f64, eps: f64, masses: MassPair, space: CurvedSpace) -> Result<Self> {
        let state = Self { l_hat, g_hat, g, c_hat, eps, masses, space };
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<()> {
        self.space.require_curved("secular dynamics")?;
        let finite = [self.l_hat, self.g_hat, self.g, self.c_hat, self.eps].iter().all(|v| v.is_finite());
        if !finite || !(self.l_hat > 0.0) || !(self.eps > 0.0) || !(self.c_hat > 0.0) {
            return Err(Error::domain(format!("invalid secular state {self:?}")));
        }
        if self.g_hat.abs() > self.l_hat {
            return Err(Error::domain(format!("|G^| = {} exceeds L^ = {}", self.g_hat.abs(), self.l_hat)));
        }
        if self.space.sign() > 0.0 && self.g_hat.abs() > self.c_hat {
            return Err(Error::domain(format!("|G^| = {} exceeds C^ = {}", self.g_hat.abs(), self.c_hat)));
        }
        Ok(())
    }

    pub fn with(&self, g_hat: f64, g: f64) -> Self {
        Self { g_hat, g, ..*self }
    }

    pub fn orbit(&self) -> Result<ScaledOrbit> {
        ScaledOrbit::new(self.l_hat, self.g_hat, self.c_hat, self.masses, self.space, self.eps)
    }

    /// Highest series order available on this surface.
    pub fn max_order(&self) -> usize {
        match self.space.curvature() {
            Curvature::Spherical => 4,
            _ => 2,
        }
    }
}

/// Where the quadrature nodes of [`average_numeric`] are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMode {
    /// Equispaced in `ℓ`, each node placed by solving Kepler's equation.
    MeanAnomaly,
    /// Equispaced in the flat eccentric anomaly, weighted by `dℓ/du_o`.
    /// Needs the projected conic to be an ellipse.
    FlatEccentric,
}

/// `(1/2π) ∫ f dℓ` over one revolution of the osculating orbit, with the
/// integrand evaluated at the unscaled reduced state.
pub fn average_numeric<F>(orbit: &ScaledOrbit, g: f64, nodes: usize, mode: AverageMode, f: F) -> Result<f64>
where
    F: Fn(f64, &PolarState) -> Result<f64>,
{
    if nodes < MIN_NODES {
        return Err(Error::domain(format!("need at least {MIN_NODES} nodes, got {nodes}")));
    }
    let conic = &orbit.conic;
    let h = TAU / nodes as f64;
    let mut sum = 0.0;
    match mode {
        AverageMode::MeanAnomaly => {
            for j in 0..nodes {
                let ell = j as f64 * h;
                let nu = anomaly_convert(ell, Anomaly::Mean, Anomaly::True, conic)?;
                sum += f(ell, &conic.polar_state(nu, g))?;
            }
        }
        AverageMode::FlatEccentric => {
            if conic.is_circular() {
                return average_numeric(orbit, g, nodes, AverageMode::MeanAnomaly, f);
            }
            conic.require_projected_ellipse()?;
            for j in 0..nodes {
                let u_o = j as f64 * h;
                let nu = true_of_flat(u_o, conic.e);
                let ell = anomaly_convert(u_o, Anomaly::FlatEccentric, Anomaly::Mean, conic)?;
                sum += f(ell, &conic.polar_state(nu, g))? * flat_rate(conic, u_o);
            }
        }
    }
    Ok(sum / nodes as f64)
}

/// `⟨Per⟩` by quadrature.
pub fn average_per(state: &SecularState, nodes: usize, mode: AverageMode) -> Result<f64> {
    let orbit = state.orbit()?;
    average_numeric(&orbit, state.g, nodes, mode, |_, p| orbit.per_at(p.phi, p.theta))
}

/// `⟨Per⟩` and its first and second partial derivatives in `(L̂, Ĝ, g)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeriesJet {
    pub value: f64,
    pub d_l: f64,
    pub d_g_hat: f64,
    pub d_g: f64,
    pub d_l_g_hat: f64,
    pub d_l_g: f64,
    pub d_g_hat_g_hat: f64,
    pub d_g_hat_g: f64,
    pub d_g_g: f64,
}

impl SeriesJet {
    fn add(&mut self, o: &SeriesJet) {
        self.value += o.value;
        self.d_l += o.d_l;
        self.d_g_hat += o.d_g_hat;
        self.d_g += o.d_g;
        self.d_l_g_hat += o.d_l_g_hat;
        self.d_l_g += o.d_l_g;
        self.d_g_hat_g_hat += o.d_g_hat_g_hat;
        self.d_g_hat_g += o.d_g_hat_g;
        self.d_g_g += o.d_g_g;
    }
}

fn check_order(state: &SecularState, order: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::domain(format!("series order {order} below 2")));
    }
    if order > state.max_order() {
        return Err(Error::unsupported(format!(
            "series order {order} is not available on the {:?} surface",
            state.space.curvature()
        )));
    }
    Ok(())
}

/// The `𝐞^order` term alone.
fn series_term(state: &SecularState, order: usize) -> Result<SeriesJet> {
    let (l, u, c) = (state.l_hat, state.g_hat, state.c_hat);
    let e = state.eps;
    let s = state.space.sign();
    let m = state.masses.m();
    let (sg, cg) = state.g.sin_cos();
    let mut j = SeriesJet::default();
    match order {
        2 => {
            let e2 = e * e;
            j.value = e2 * (c * c / 2.0 - s * u * u);
            j.d_g_hat = -2.0 * s * e2 * u;
            j.d_g_hat_g_hat = -2.0 * s * e2;
        }
        3 => {
            let a = c * c - u * u;
            let b = l * l - u * u;
            let p = a * b;
            if !(a >= 0.0 && b >= 0.0) {
                return Err(Error::domain(format!(
                    "cubic term needs |G^| < L^ and |G^| <= C^ (G^={u}, L^={l}, C^={c})"
                )));
            }
            let k = e.powi(3) * state.masses.m_delta() / (m * m);
            let sp = p.sqrt();
            if sp == 0.0 {
                // Value only; the Ĝ-derivatives blow up on the boundary.
                let nan = f64::NAN;
                return Ok(SeriesJet { d_l: nan, d_g_hat: nan, d_l_g_hat: nan, d_l_g: nan, d_g_hat_g_hat: nan, d_g_hat_g: nan, ..j });
            }
            let p_u = 4.0 * u.powi(3) - 2.0 * (c * c + l * l) * u;
            let p_uu = 12.0 * u * u - 2.0 * (c * c + l * l);
            // f = Ĝ√P and its Ĝ-derivatives
            let f = u * sp;
            let f_u = sp + u * p_u / (2.0 * sp);
            let f_uu = p_u / sp + u * p_uu / (2.0 * sp) - u * p_u * p_u / (4.0 * p * sp);
            // h = L̂ f and its L̂-derivatives, with ∂P/∂L̂ = 2L̂A
            let h_l = u * (sp + l * l * a / sp);
            let h_lu = sp + u * p_u / (2.0 * sp) + l * l * (a / sp - 2.0 * u * u / sp - u * a * p_u / (2.0 * p * sp));
            j.value = k * l * f * cg;
            j.d_l = k * h_l * cg;
            j.d_g_hat = k * l * f_u * cg;
            j.d_g = -k * l * f * sg;
            j.d_l_g_hat = k * h_lu * cg;
            j.d_l_g = -k * h_l * sg;
            j.d_g_hat_g_hat = k * l * f_uu * cg;
            j.d_g_hat_g = -k * l * f_u * sg;
            j.d_g_g = -j.value;
        }
        4 => {
            let a = c * c - u * u;
            let b = l * l - u * u;
            let (s2, c2) = (2.0 * state.g).sin_cos();
            let cc = 3.0 + 5.0 * c2;
            let dcc = -10.0 * s2;
            let q = a * (2.0 * l * l + b * cc) / 2.0 - 5.0 * l * l * u * u + 3.0 * u.powi(4);
            let q_u = -u * (2.0 * l * l + b * cc) - a * u * cc - 10.0 * l * l * u + 12.0 * u.powi(3);
            let q_uu = -12.0 * l * l - (a + b) * cc + 4.0 * u * u * cc + 36.0 * u * u;
            let q_g = a * b * dcc / 2.0;
            let q_gg = -10.0 * a * b * c2;
            let q_ug = -u * dcc * (a + b);
            let q_l = a * l * (2.0 + cc) - 10.0 * l * u * u;
            let q_lu = -2.0 * u * l * (2.0 + cc) - 20.0 * l * u;
            let q_lg = a * l * dcc;
            let k = e.powi(4) * state.masses.m_tilde();
            j.value = k * l * l * q;
            j.d_l = k * (2.0 * l * q + l * l * q_l);
            j.d_g_hat = k * l * l * q_u;
            j.d_g = k * l * l * q_g;
            j.d_l_g_hat = k * (2.0 * l * q_u + l * l * q_lu);
            j.d_l_g = k * (2.0 * l * q_g + l * l * q_lg);
            j.d_g_hat_g_hat = k * l * l * q_uu;
            j.d_g_hat_g = k * l * l * q_ug;
            j.d_g_g = k * l * l * q_gg;
        }
        _ => return Err(Error::domain(format!("no series term of order {order}"))),
    }
    Ok(j)
}

/// The series of `⟨Per⟩` through `𝐞^order` with derivatives.
pub fn per_series_jet(state: &SecularState, order: usize) -> Result<SeriesJet> {
    check_order(state, order)?;
    let mut jet = SeriesJet::default();
    for k in 2..=order {
        jet.add(&series_term(state, k)?);
    }
    Ok(jet)
}

/// `⟨Per⟩` through `𝐞^order`: `order = 4` on the sphere, `2` on the
/// hyperbolic plane.
pub fn per_series(state: &SecularState, order: usize) -> Result<f64> {
    Ok(per_series_jet(state, order)?.value)
}

/// The `𝐞²`, `𝐞³`, `𝐞⁴` contributions separately (absent ones are `None`).
pub fn series_coefficients(state: &SecularState) -> Result<[Option<f64>; 3]> {
    let mut out = [None; 3];
    for (i, k) in (2..=state.max_order()).enumerate() {
        out[i] = Some(series_term(state, k)?.value);
    }
    Ok(out)
}

/// Errors of the series against quadrature and the fitted log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub eps: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `|⟨Per⟩_numeric − per_series|` over `eps_list` and its slope in `𝐞`.
pub fn average_consistency(state: &SecularState, eps_list: &[f64], order: usize, nodes: usize) -> Result<ConsistencyReport> {
    if eps_list.len() < 2 {
        return Err(Error::domain("need at least two values of eps"));
    }
    let errors = eps_list
        .iter()
        .map(|&eps| {
            let st = SecularState { eps, ..*state };
            st.validate()?;
            let numeric = average_per(&st, nodes, AverageMode::MeanAnomaly)?;
            Ok((numeric - per_series(&st, order)?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConsistencyReport {
        eps: eps_list.to_vec(),
        slope: log_log_slope(eps_list, &errors),
        errors,
    })
}

/// `(dĜ/dℓ, dg/dℓ)` with the Jacobian in `(Ĝ, g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularField {
    pub d_g_hat: f64,
    pub d_g: f64,
    /// `ℓ̇ = ∂F̂/∂L̂` in scaled time.
    pub ell_rate: f64,
    /// Rows `(dĜ/dℓ, dg/dℓ)`, columns `(Ĝ, g)`.
    pub jacobian: [[f64; 2]; 2],
}

/// Secular field from the series through `𝐞^order`.
pub fn secular_field(state: &SecularState, order: usize) -> Result<SecularField> {
    state.validate()?;
    let jet = per_series_jet(state, order)?;
    let (_, kep_rate) = scaled_kepler(state.l_hat, &state.masses, state.space.sign(), state.eps);
    let d = kep_rate + jet.d_l;
    if !(d > 0.0) {
        return Err(Error::domain(format!("mean anomaly rate {d} is not positive")));
    }
    let num = [-jet.d_g, jet.d_g_hat];
    let d_num = [[-jet.d_g_hat_g, -jet.d_g_g], [jet.d_g_hat_g_hat, jet.d_g_hat_g]];
    let d_den = [jet.d_l_g_hat, jet.d_l_g];
    let mut jacobian = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            jacobian[r][c] = d_num[r][c] / d - num[r] * d_den[c] / (d * d);
        }
    }
    Ok(SecularField { d_g_hat: num[0] / d, d_g: num[1] / d, ell_rate: d, jacobian })
}

/// The full secular field on the sphere (`𝐞⁴` series), `𝐞²` on the
/// hyperbolic plane. Rejects circular states.
pub fn secular_vector_field(state: &SecularState) -> Result<(f64, f64)> {
    if state.g_hat.abs() >= state.l_hat {
        return Err(Error::domain("secular field is degenerate on circular orbits"));
    }
    let f = secular_field(state, state.max_order())?;
    Ok((f.d_g_hat, f.d_g))
}

/// `𝔪 = m_Δ L̂⁴ Ĝ √((Ĉ² − Ĝ²)(L̂² − Ĝ²)) / m⁵`, so that
/// `dĜ/dℓ = 𝐞³ 𝔪 sin g + O(𝐞⁴)`.
pub fn frak_m(l_hat: f64, g_hat: f64, c_hat: f64, masses: &MassPair) -> Result<f64> {
    let p = (c_hat * c_hat - g_hat * g_hat) * (l_hat * l_hat - g_hat * g_hat);
    if !(p >= 0.0) {
        return Err(Error::domain(format!("G^ = {g_hat} outside min(L^, C^)")));
    }
    Ok(masses.m_delta() * l_hat.powi(4) * g_hat * p.sqrt() / masses.m().powi(5))
}

/// `ġ = −2κG` in the unscaled chart.
pub fn precession_rate(g_action: f64, space: &CurvedSpace) -> f64 {
    -2.0 * space.kappa() * g_action
}

/// Sampling window and Newton seeding of [`secular_phase_portrait`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitGrid {
    pub g_hat_range: (f64, f64),
    pub g_range: (f64, f64),
    pub samples: (usize, usize),
    pub seeds: (usize, usize),
}

impl PortraitGrid {
    /// `|Ĝ| ≤ frac · min(L̂, Ĉ)`, `g ∈ [−π, π)`.
    pub fn symmetric(l_hat: f64, c_hat: f64, frac: f64, samples: usize, seeds: usize) -> Self {
        let top = frac * l_hat.min(c_hat);
        Self {
            g_hat_range: (-top, top),
            g_range: (-PI, PI),
            samples: (samples, samples),
            seeds: (seeds, seeds),
        }
    }
}

fn grid_axis(range: (f64, f64), n: usize, closed: bool) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (range.0 + range.1)];
    }
    let div = if closed { n - 1 } else { n };
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / div as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub g_hat: f64,
    pub g: f64,
    pub d_g_hat: f64,
    pub d_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointKind {
    /// Real eigenvalues of opposite sign.
    Saddle,
    /// Purely imaginary pair.
    Center,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub g_hat: f64,
    pub g: f64,
    pub kind: FixedPointKind,
    /// `(re, im)` of both eigenvalues.
    pub eigenvalues: [(f64, f64); 2],
    pub jacobian: [[f64; 2]; 2],
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedFailure {
    pub seed: (f64, f64),
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePortrait {
    pub samples: Vec<FieldSample>,
    pub fixed_points: Vec<FixedPoint>,
    pub failures: Vec<SeedFailure>,
}

fn eigen2(j: &[[f64; 2]; 2]) -> [(f64, f64); 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(tr / 2.0 - r, 0.0), (tr / 2.0 + r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [(tr / 2.0, -r), (tr / 2.0, r)]
    }
}

fn classify(j: &[[f64; 2]; 2]) -> FixedPointKind {
    let ev = eigen2(j);
    let scale = j.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let small = 1e-9 * scale;
    if ev[0].1 == 0.0 && ev[0].0 < -small && ev[1].0 > small {
        FixedPointKind::Saddle
    } else if ev[0].1 != 0.0 && ev[0].0.abs() <= 1e-6 * ev[0].1.abs() {
        FixedPointKind::Center
    } else {
        FixedPointKind::Other
    }
}

fn wrap_angle(g: f64) -> f64 {
    let w = g.rem_euclid(TAU);
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Newton on the secular field from `(Ĝ, g)`.
pub fn secular_fixed_point(state: &SecularState, order: usize, g_hat: f64, g: f64) -> Result<FixedPoint> {
    let (mut u, mut a) = (g_hat, g);
    let mut last = f64::INFINITY;
    for _ in 0..60 {
        let st = state.with(u, a);
        st.validate()?;
        let f = secular_field(&st, order)?;
        let j = f.jacobian;
        last = f.d_g_hat.abs().max(f.d_g.abs());
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NonConvergence { what: "secular fixed point (singular Jacobian)", iterations: 0, residual: last });
        }
        let du = -(j[1][1] * f.d_g_hat - j[0][1] * f.d_g) / det;
        let da = -(-j[1][0] * f.d_g_hat + j[0][0] * f.d_g) / det;
        u += du;
        a += da;
        if du.abs() <= 1e-14 * state.l_hat && da.abs() <= 1e-14 {
            let st = state.with(u, wrap_angle(a));
            let f = secular_field(&st, order)?;
            return Ok(FixedPoint {
                g_hat: st.g_hat,
                g: st.g,
                kind: classify(&f.jacobian),
                eigenvalues: eigen2(&f.jacobian),
                jacobian: f.jacobian,
                residual: f.d_g_hat.abs().max(f.d_g.abs()),
            });
        }
    }
    Err(Error::NonConvergence { what: "secular fixed point", iterations: 60, residual: last })
}

/// Samples the secular field on a `(Ĝ, g)` grid and locates its fixed
/// points by Newton from a coarser seed grid.
pub fn secular_phase_portrait(state: &SecularState, order: usize, grid: &PortraitGrid) -> Result<PhasePortrait> {
    state.validate()?;
    check_order(state, order)?;
    let gh = grid_axis(grid.g_hat_range, grid.samples.0, true);
    let ga = grid_axis(grid.g_range, grid.samples.1, false);
    let nodes: Vec<(f64, f64)> = gh.iter().flat_map(|&u| ga.iter().map(move |&a| (u, a))).collect();
    let samples = nodes
        .par_iter()
        .map(|&(u, a)| {
            let f = secular_field(&state.with(u, a), order)?;
            Ok(FieldSample { g_hat: u, g: a, d_g_hat: f.d_g_hat, d_g: f.d_g })
        })
        .collect::<Result<Vec<_>>>()?;

    let sh = grid_axis(grid.g_hat_range, grid.seeds.0, true);
    let sa = grid_axis(grid.g_range, grid.seeds.1, false);
    let seeds: Vec<(f64, f64)> = sh.iter().flat_map(|&u| sa.iter().map(move |&a| (u, a))).collect();
    let outcomes: Vec<_> = seeds
        .par_iter()
        .map(|&(u, a)| (u, a, secular_fixed_point(state, order, u, a)))
        .collect();

    let mut fixed_points: Vec<FixedPoint> = Vec::new();
    let mut failures = Vec::new();
    for (u, a, out) in outcomes {
        match out {
            Ok(fp) => {
                let inside = fp.g_hat >= grid.g_hat_range.0 - 1e-12 && fp.g_hat <= grid.g_hat_range.1 + 1e-12;
                let seen = fixed_points.iter().any(|q| {
                    (q.g_hat - fp.g_hat).abs() < 1e-8 && wrap_angle(q.g - fp.g).abs() < 1e-8
                });
                if inside && !seen {
                    fixed_points.push(fp);
                }
            }
            Err(e) => failures.push(SeedFailure { seed: (u, a), reason: e.to_string() }),
        }
    }
    fixed_points.sort_by(|p, q| p.g.total_cmp(&q.g).then(p.g_hat.total_cmp(&q.g_hat)));
    Ok(PhasePortrait { samples, fixed_points, failures })
}
