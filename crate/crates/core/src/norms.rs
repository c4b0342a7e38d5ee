//! Norms for sampled fields: Lebesgue norms on intervals, Gagliardo
//! (fractional Sobolev) and Hölder seminorms, weighted space-time norms with
//! time-Hölder terms, a composite energy norm, and localized (windowed)
//! variants, plus the even/antisymmetric reflection constructions used by the
//! half-line estimates.
//!
//! Conventions shared by every norm here:
//!
//! * grid functions are piecewise linear between nodes, and `p = ∞` means the
//!   max of the interpolant over the requested interval;
//! * the Gagliardo seminorm treats the interpolant as extended by zero
//!   outside the grid, so that compactly supported data gets a
//!   translation-invariant value;
//! * weighted space-time norms take exact maxima over the sampled time mesh,
//!   including the `O(N_t²)` pair sweep for the time-Hölder terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, SpaceTimeField};
use crate::special::cutoff_window;

/// Default time-Hölder exponent α (must stay below γ).
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Default data-regularity parameter γ.
pub const DEFAULT_GAMMA: f64 = 0.1;

/// Which norm a [`NormSpec`] asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// `L^p` over an interval of a single slice.
    #[serde(rename = "Lp_space")]
    LpSpace,
    /// Gagliardo seminorm `Ẇ^{σ,p}` of a single slice.
    SobolevFrac,
    /// Hölder seminorm `Ċ^{2γ}` of a single slice.
    HolderC2gamma,
    /// Weighted sup-in-time plus time-Hölder seminorm `X_T^{σ,p}`.
    #[serde(rename = "XT")]
    Xt,
    /// Sup-norm-in-space variant `Y_T`.
    #[serde(rename = "YT")]
    Yt,
    /// Space-time Lebesgue norm `L^p((0,T) × E)`.
    LpT,
    /// Composite energy norm `Z_T` of a velocity/temperature pair.
    #[serde(rename = "ZT")]
    Zt,
    /// Localized `X_T`: sup of windowed norms over a lattice of cutoffs.
    #[serde(rename = "XT_tilde")]
    XtTilde,
    /// Localized `L^p_T`.
    #[serde(rename = "LpT_tilde")]
    LpTTilde,
}

/// Serializable description of a norm evaluation.
///
/// `p = None` (or JSON `null`) means `p = ∞`. Omitted `alpha`/`gamma` fall
/// back to [`DEFAULT_ALPHA`]/[`DEFAULT_GAMMA`]; an omitted horizon means the
/// last sampled time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub kind: NormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subdomain: Option<[f64; 2]>,
}

impl NormSpec {
    fn bare(kind: NormKind) -> NormSpec {
        NormSpec { kind, sigma: None, p: None, alpha: None, gamma: None, horizon: None, subdomain: None }
    }

    pub fn space_lp(p: f64) -> NormSpec {
        NormSpec { p: Some(p), ..NormSpec::bare(NormKind::LpSpace) }
    }

    pub fn sobolev(sigma: f64, p: f64) -> NormSpec {
        NormSpec { sigma: Some(sigma), p: Some(p), ..NormSpec::bare(NormKind::SobolevFrac) }
    }

    pub fn holder(gamma: f64) -> NormSpec {
        NormSpec { gamma: Some(gamma), ..NormSpec::bare(NormKind::HolderC2gamma) }
    }

    pub fn xt(sigma: f64, p: f64, horizon: f64) -> NormSpec {
        NormSpec {
            sigma: Some(sigma),
            p: if p.is_finite() { Some(p) } else { None },
            horizon: Some(horizon),
            ..NormSpec::bare(NormKind::Xt)
        }
    }

    pub fn yt(horizon: f64) -> NormSpec {
        NormSpec { horizon: Some(horizon), ..NormSpec::bare(NormKind::Yt) }
    }

    pub fn lpt(p: f64, horizon: f64) -> NormSpec {
        NormSpec {
            p: if p.is_finite() { Some(p) } else { None },
            horizon: Some(horizon),
            ..NormSpec::bare(NormKind::LpT)
        }
    }

    pub fn zt(horizon: f64) -> NormSpec {
        NormSpec { horizon: Some(horizon), ..NormSpec::bare(NormKind::Zt) }
    }

    pub fn with_window(mut self, a: f64, b: f64) -> NormSpec {
        self.subdomain = Some([a, b]);
        self
    }

    pub fn alpha_or_default(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_ALPHA)
    }

    pub fn gamma_or_default(&self) -> f64 {
        self.gamma.unwrap_or(DEFAULT_GAMMA)
    }

    /// `p` with `None` meaning `∞`.
    pub fn p_or_inf(&self) -> f64 {
        self.p.unwrap_or(f64::INFINITY)
    }

    pub fn window(&self) -> Option<(f64, f64)> {
        self.subdomain.map(|[a, b]| (a, b))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if let Some(p) = self.p {
            if !(p >= 1.0) {
                return fail(format!("norm spec: p must satisfy p >= 1, got {p}"));
            }
        }
        if let Some(s) = self.sigma {
            if !s.is_finite() || s < 0.0 {
                return fail(format!("norm spec: sigma must be finite and >= 0, got {s}"));
            }
        }
        if let Some(a) = self.alpha {
            if !(0.0..1.0).contains(&a) {
                return fail(format!("norm spec: alpha must lie in [0, 1), got {a}"));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return fail(format!("norm spec: gamma must lie in (0, 1), got {g}"));
            }
        }
        if let (Some(a), Some(g)) = (self.alpha, self.gamma) {
            if !(a > 0.0 && a < g) {
                return fail(format!("norm spec: need 0 < alpha < gamma, got alpha={a}, gamma={g}"));
            }
        }
        if let Some(t) = self.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return fail(format!("norm spec: horizon T must be positive, got {t}"));
            }
        }
        if let Some([a, b]) = self.subdomain {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return fail(format!("norm spec: subdomain must be a finite interval, got [{a}, {b}]"));
            }
        }
        match self.kind {
            NormKind::SobolevFrac => {
                let s = self.sigma.ok_or_else(|| Error::Config("norm spec: SobolevFrac needs sigma".into()))?;
                if !(s > 0.0 && s < 1.0) {
                    return fail(format!("norm spec: SobolevFrac needs sigma in (0, 1), got {s}"));
                }
                if self.p.is_none() {
                    return fail("norm spec: SobolevFrac needs a finite p".into());
                }
            }
            NormKind::Xt | NormKind::XtTilde => {
                if self.sigma.is_none() {
                    return fail("norm spec: XT norms need sigma".into());
                }
            }
            NormKind::HolderC2gamma => {
                if 2.0 * self.gamma_or_default() > 1.0 {
                    return fail("norm spec: HolderC2gamma needs 2*gamma <= 1".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Value of a norm together with its constituent terms and any non-fatal
/// evaluation notes (missing Hölder pairs, window fallbacks, truncation).
#[derive(Debug, Clone, Serialize)]
pub struct NormOutcome {
    pub value: f64,
    pub parts: Vec<(String, f64)>,
    pub flags: Vec<String>,
}

impl NormOutcome {
    fn scalar(value: f64) -> NormOutcome {
        NormOutcome { value, parts: Vec::new(), flags: Vec::new() }
    }
}

fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

fn interp(grid: &Grid, v: &[f64], x: f64) -> f64 {
    let h = grid.spacing();
    let s = ((x - grid.x_min()) / h).clamp(0.0, (v.len() - 1) as f64);
    let i = (s.floor() as usize).min(v.len() - 2);
    let w = s - i as f64;
    v[i] * (1.0 - w) + v[i + 1] * w
}

/// `∫_E |f|^p dx` for finite `p`, integrating the linear interpolant of the
/// powered nodal values (partial boundary cells included).
fn lp_pow_on(grid: &Grid, v: &[f64], p: f64, a: f64, b: f64) -> f64 {
    let h = grid.spacing();
    let pw: Vec<f64> = v.iter().map(|&x| pow_abs(x, p)).collect();
    let sa = (a - grid.x_min()) / h;
    let sb = (b - grid.x_min()) / h;
    let ia = sa.floor().max(0.0) as usize;
    let ib = (sb.ceil() as usize).min(v.len() - 1);
    let mut total = 0.0;
    for i in ia..ib {
        let cell_a = grid.node(i).max(a);
        let cell_b = grid.node(i + 1).min(b);
        if cell_b <= cell_a {
            continue;
        }
        total += 0.5 * (interp(grid, &pw, cell_a) + interp(grid, &pw, cell_b)) * (cell_b - cell_a);
    }
    total
}

fn clip_window(grid: &Grid, window: Option<(f64, f64)>) -> Result<(f64, f64)> {
    let (a, b) = window.unwrap_or((grid.x_min(), grid.x_max()));
    let a = a.max(grid.x_min());
    let b = b.min(grid.x_max());
    if a > b {
        return Err(Error::Domain(format!(
            "norm subdomain does not meet the grid [{}, {}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    Ok((a, b))
}

fn lp_of_slice(grid: &Grid, v: &[f64], p: f64, window: Option<(f64, f64)>) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("integrability exponent must satisfy p >= 1, got {p}")));
    }
    let (a, b) = clip_window(grid, window)?;
    if p.is_infinite() {
        let mut m = interp(grid, v, a).abs().max(interp(grid, v, b).abs());
        if let Some((lo, hi)) = grid.index_window(a, b) {
            for &x in &v[lo..=hi] {
                m = m.max(x.abs());
            }
        }
        return Ok(m);
    }
    if a == b {
        return Ok(0.0);
    }
    Ok(lp_pow_on(grid, v, p, a, b).powf(1.0 / p))
}

/// `L^p` norm of a slice over an interval (default: the whole grid);
/// `p = ∞` gives the max of the interpolant.
pub fn lp_norm(g: &GridFunction, p: f64, window: Option<(f64, f64)>) -> Result<f64> {
    lp_of_slice(&g.grid, &g.values, p, window)
}

/// Gagliardo seminorm `Ẇ^{σ,p}` of the zero-extended interpolant.
///
/// Three pieces, all documented because each is a quadrature decision:
/// the off-diagonal lattice double sum (trapezoid weights, `i = j` skipped);
/// a closed-form diagonal correction `2h^{(1-σ)p}/((1-σ)p) · Σ h|slope|^p`
/// that reinstates the `|x-y| < h` strip under a locally-linear model (the
/// raw sum misses it entirely, costing `O(h^{(1-σ)p})` accuracy otherwise);
/// and the exact exterior tail `2 Σ w|f|^p [(x_max-x)^{-σp} + (x-x_min)^{-σp}]/(σp)`
/// from the zero extension, which is what makes translates of compactly
/// supported data score equally. Exterior distances are floored at `h/2`,
/// which only matters when the data fails to vanish at the grid edge.
pub fn frac_sobolev_norm(g: &GridFunction, sigma: f64, p: f64) -> f64 {
    assert!(sigma > 0.0 && sigma < 1.0, "sigma must lie in (0, 1), got {sigma}");
    assert!(p >= 1.0 && p.is_finite(), "p must be finite and >= 1, got {p}");
    let n = g.values.len();
    let h = g.grid.spacing();
    let sp = sigma * p;
    let mut weights = vec![h; n];
    weights[0] = 0.5 * h;
    weights[n - 1] = 0.5 * h;

    let mut total = 0.0;
    for i in 0..n {
        let (fi, xi) = (g.values[i], g.grid.node(i));
        for j in i + 1..n {
            let d = g.values[j] - fi;
            if d == 0.0 {
                continue;
            }
            total += 2.0 * weights[i] * weights[j] * pow_abs(d, p) / (g.grid.node(j) - xi).powf(1.0 + sp);
        }
    }

    let diag_factor = 2.0 * h.powf((1.0 - sigma) * p) / ((1.0 - sigma) * p);
    for w in g.values.windows(2) {
        total += diag_factor * h * pow_abs((w[1] - w[0]) / h, p);
    }

    for i in 0..n {
        if g.values[i] == 0.0 {
            continue;
        }
        let dr = (g.grid.x_max() - g.grid.node(i)).max(0.5 * h);
        let dl = (g.grid.node(i) - g.grid.x_min()).max(0.5 * h);
        total += 2.0 * weights[i] * pow_abs(g.values[i], p) * (dr.powf(-sp) + dl.powf(-sp)) / sp;
    }

    total.powf(1.0 / p)
}

/// Hölder seminorm `sup_{x≠y} |f(x)-f(y)| / |x-y|^β` over the sampled nodes.
pub fn holder_seminorm(g: &GridFunction, beta: f64) -> f64 {
    assert!(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1], got {beta}");
    let n = g.values.len();
    let mut best = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            let r = (g.values[j] - g.values[i]).abs() / (g.grid.node(j) - g.grid.node(i)).powf(beta);
            best = best.max(r);
        }
    }
    best
}

fn check_horizon(f: &SpaceTimeField, horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon T must be positive, got {horizon}")));
    }
    let last = *f.times.last().unwrap();
    if last > horizon * (1.0 + 1e-9) {
        return Err(Error::Domain(format!("field sampled past the horizon: t = {last} > T = {horizon}")));
    }
    Ok(())
}

/// Weighted space-time norm
/// `sup_{s} s^σ ‖f(s)‖_{L^p(E)} + sup_{s<t} s^{σ+α} ‖f(t)-f(s)‖_{L^p(E)} / (t-s)^α`,
/// with both sups taken exactly over the sampled time mesh.
pub fn xt_norm(
    f: &SpaceTimeField,
    sigma: f64,
    p: f64,
    alpha: f64,
    horizon: f64,
    window: Option<(f64, f64)>,
) -> Result<NormOutcome> {
    check_horizon(f, horizon)?;
    let nt = f.num_times();
    let mut sup = 0.0_f64;
    for k in 0..nt {
        sup = sup.max(f.times[k].powf(sigma) * lp_of_slice(&f.grid, f.slice(k), p, window)?);
    }
    let mut holder = 0.0_f64;
    let mut flags = Vec::new();
    if nt < 2 {
        flags.push("fewer than two time slices: time-Hölder term reported as 0".into());
    } else {
        let n = f.grid.len();
        let mut diff = vec![0.0; n];
        for i in 0..nt {
            let wi = f.times[i].powf(sigma + alpha);
            for j in i + 1..nt {
                let (a, b) = (f.slice(i), f.slice(j));
                for (d, (x, y)) in diff.iter_mut().zip(a.iter().zip(b)) {
                    *d = y - x;
                }
                let norm = lp_of_slice(&f.grid, &diff, p, window)?;
                holder = holder.max(wi * norm / (f.times[j] - f.times[i]).powf(alpha));
            }
        }
    }
    Ok(NormOutcome {
        value: sup + holder,
        parts: vec![("weighted_sup".into(), sup), ("time_holder".into(), holder)],
        flags,
    })
}

/// Sup-norm space-time norm
/// `sup_s ‖f(s)‖_∞ + sup_{s<t} s^α ‖f(t)-f(s)‖_∞ / (t-s)^α`.
pub fn yt_norm(f: &SpaceTimeField, alpha: f64, horizon: f64) -> Result<NormOutcome> {
    check_horizon(f, horizon)?;
    let nt = f.num_times();
    let mut sup = 0.0_f64;
    for k in 0..nt {
        sup = sup.max(f.slice(k).iter().fold(0.0_f64, |m, &v| m.max(v.abs())));
    }
    let mut holder = 0.0_f64;
    let mut flags = Vec::new();
    if nt < 2 {
        flags.push("fewer than two time slices: time-Hölder term reported as 0".into());
    } else {
        for i in 0..nt {
            let wi = f.times[i].powf(alpha);
            for j in i + 1..nt {
                let d = f
                    .slice(i)
                    .iter()
                    .zip(f.slice(j))
                    .fold(0.0_f64, |m, (&x, &y)| m.max((y - x).abs()));
                holder = holder.max(wi * d / (f.times[j] - f.times[i]).powf(alpha));
            }
        }
    }
    Ok(NormOutcome {
        value: sup + holder,
        parts: vec![("sup".into(), sup), ("time_holder".into(), holder)],
        flags,
    })
}

/// Space-time Lebesgue norm `(∫_0^T ∫_E |f|^p dx dt)^{1/p}`; the leading time
/// cell `(0, t_1]` uses the first slice, and `p = ∞` is the sup over slices.
pub fn lpt_norm(f: &SpaceTimeField, p: f64, horizon: f64, window: Option<(f64, f64)>) -> Result<NormOutcome> {
    check_horizon(f, horizon)?;
    let mut flags = Vec::new();
    let last = *f.times.last().unwrap();
    if last < horizon * (1.0 - 1e-9) {
        flags.push(format!("field sampled only to t = {last}; integral truncated below T = {horizon}"));
    }
    if p.is_infinite() {
        let mut m = 0.0_f64;
        for k in 0..f.num_times() {
            m = m.max(lp_of_slice(&f.grid, f.slice(k), p, window)?);
        }
        return Ok(NormOutcome { value: m, parts: vec![("ess_sup".into(), m)], flags });
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("integrability exponent must satisfy p >= 1, got {p}")));
    }
    let (a, b) = clip_window(&f.grid, window)?;
    let slice_pow: Vec<f64> =
        (0..f.num_times()).map(|k| lp_pow_on(&f.grid, f.slice(k), p, a, b)).collect();
    let mut integral = f.times[0] * slice_pow[0];
    for k in 1..f.num_times() {
        integral += 0.5 * (slice_pow[k - 1] + slice_pow[k]) * (f.times[k] - f.times[k - 1]);
    }
    let value = integral.powf(1.0 / p);
    Ok(NormOutcome { value, parts: vec![("integral".into(), value)], flags })
}

/// Parameters shared by the seven constituents of [`zt_norm`].
#[derive(Debug, Clone, Copy)]
pub struct ZtParams {
    pub alpha: f64,
    pub horizon: f64,
    pub window: Option<(f64, f64)>,
}

/// Composite energy norm of a velocity/temperature pair `(w, ϑ)`:
/// the sum of `L²_T`, `X^{1/2,2}`, `X^{3/4,∞}` of `∂_x w`, `L²_T`, `X^{1/2,2}`
/// of `ϑ`, and `L^{6/5}_T`, `X^{5/6,6/5}` of `∂_x ϑ`.
///
/// Differentiates the inputs with the fourth-order stencils; solvers that
/// carry analytically differentiated slices should call [`zt_norm_parts`].
pub fn zt_norm(w: &SpaceTimeField, theta: &SpaceTimeField, params: &ZtParams) -> Result<NormOutcome> {
    zt_norm_parts(&w.dx(), theta, &theta.dx(), params)
}

/// [`zt_norm`] with the spatial derivatives supplied by the caller.
pub fn zt_norm_parts(
    wx: &SpaceTimeField,
    theta: &SpaceTimeField,
    thetax: &SpaceTimeField,
    params: &ZtParams,
) -> Result<NormOutcome> {
    if wx.grid != theta.grid || wx.times != theta.times {
        return Err(Error::Domain("energy norm needs both fields on one space-time mesh".into()));
    }
    let (al, t, win) = (params.alpha, params.horizon, params.window);
    let mut parts: Vec<(String, f64)> = Vec::with_capacity(7);
    let mut flags = Vec::new();
    let push = |name: &str, out: NormOutcome, parts: &mut Vec<(String, f64)>, flags: &mut Vec<String>| {
        parts.push((name.into(), out.value));
        for fl in out.flags {
            if !flags.contains(&fl) {
                flags.push(fl);
            }
        }
    };
    push("L2_T(dx w)", lpt_norm(wx, 2.0, t, win)?, &mut parts, &mut flags);
    push("X{1/2,2}(dx w)", xt_norm(wx, 0.5, 2.0, al, t, win)?, &mut parts, &mut flags);
    push("X{3/4,inf}(dx w)", xt_norm(wx, 0.75, f64::INFINITY, al, t, win)?, &mut parts, &mut flags);
    push("L2_T(theta)", lpt_norm(theta, 2.0, t, win)?, &mut parts, &mut flags);
    push("X{1/2,2}(theta)", xt_norm(theta, 0.5, 2.0, al, t, win)?, &mut parts, &mut flags);
    push("L6/5_T(dx theta)", lpt_norm(thetax, 1.2, t, win)?, &mut parts, &mut flags);
    push("X{5/6,6/5}(dx theta)", xt_norm(thetax, 5.0 / 6.0, 1.2, al, t, win)?, &mut parts, &mut flags);
    let value = parts.iter().map(|(_, v)| v).sum();
    Ok(NormOutcome { value, parts, flags })
}

fn require_symmetric(g: &GridFunction) -> Result<()> {
    let span = g.grid.x_max() - g.grid.x_min();
    if (g.grid.x_min() + g.grid.x_max()).abs() > 1e-9 * span {
        return Err(Error::Domain(format!(
            "reflection needs a grid symmetric about 0, got [{}, {}]",
            g.grid.x_min(),
            g.grid.x_max()
        )));
    }
    Ok(())
}

/// Even reflection `𝐡(x) = h(x) 1_{x≥0} + h(-x) 1_{x<0}` on a symmetric grid.
pub fn reflect_even(g: &GridFunction) -> Result<GridFunction> {
    require_symmetric(g)?;
    let n = g.values.len();
    let values = (0..n).map(|i| if 2 * i < n - 1 { g.values[n - 1 - i] } else { g.values[i] }).collect();
    GridFunction::new(g.grid, values)
}

/// Antisymmetric part `𝐡̄(x) = (h(x) - h(-x)) 1_{x≤0}` on a symmetric grid.
pub fn reflect_antisym(g: &GridFunction) -> Result<GridFunction> {
    require_symmetric(g)?;
    let n = g.values.len();
    let values = (0..n)
        .map(|i| if 2 * i <= n - 1 { g.values[i] - g.values[n - 1 - i] } else { 0.0 })
        .collect();
    GridFunction::new(g.grid, values)
}

/// Localized norm: the sup over cutoff centers `z` (lattice spacing 1/2) of
/// the norm of `f·χ_z`, where `χ_z` is the smooth window satisfying
/// `1_{[z-1,z+1]} ≤ χ_z ≤ 1_{[z-2,z+2]}`.
///
/// Window centers run over the grid itself; centers beyond the edges are
/// dominated by the edge windows because `χ` is monotone in `|x-z|`. Grids
/// narrower than one window fall back to the global norm with a flag.
pub fn tilde_norm(f: &SpaceTimeField, spec: &NormSpec) -> Result<NormOutcome> {
    spec.validate()?;
    let horizon = spec.horizon.unwrap_or_else(|| *f.times.last().unwrap());
    let evaluate = |field: &SpaceTimeField| -> Result<NormOutcome> {
        match spec.kind {
            NormKind::XtTilde => xt_norm(
                field,
                spec.sigma.expect("validated"),
                spec.p_or_inf(),
                spec.alpha_or_default(),
                horizon,
                None,
            ),
            NormKind::LpTTilde => lpt_norm(field, spec.p_or_inf(), horizon, None),
            other => Err(Error::Domain(format!("tilde_norm expects a tilde norm kind, got {other:?}"))),
        }
    };
    let span = f.grid.x_max() - f.grid.x_min();
    if span < 4.0 {
        let mut out = evaluate(f)?;
        out.flags.push("grid narrower than one cutoff window: returning the global norm".into());
        return Ok(out);
    }
    let centers = (0..=(2.0 * span).floor() as usize)
        .map(|k| f.grid.x_min() + 0.5 * k as f64)
        .chain(std::iter::once(f.grid.x_max()));
    let mut best: Option<(f64, f64, NormOutcome)> = None;
    for z in centers {
        let chi: Vec<f64> = (0..f.grid.len()).map(|i| cutoff_window(f.grid.node(i), z)).collect();
        let windowed = SpaceTimeField {
            grid: f.grid,
            times: f.times.clone(),
            values: f
                .values
                .iter()
                .map(|s| s.iter().zip(&chi).map(|(&v, &c)| v * c).collect())
                .collect(),
        };
        let out = evaluate(&windowed)?;
        if best.as_ref().map_or(true, |(v, _, _)| out.value > *v) {
            best = Some((out.value, z, out));
        }
    }
    let (_, z, mut out) = best.expect("at least one window center");
    out.flags.push(format!("sup attained at window center z = {z}"));
    Ok(out)
}

/// Evaluate any [`NormSpec`] against a field (plus an optional second field
/// for the energy norm's temperature component; omitted means zero).
pub fn evaluate_norm(
    f: &SpaceTimeField,
    theta: Option<&SpaceTimeField>,
    spec: &NormSpec,
) -> Result<NormOutcome> {
    spec.validate()?;
    let horizon = spec.horizon.unwrap_or_else(|| *f.times.last().unwrap());
    let single_slice = || -> Result<GridFunction> {
        if f.num_times() != 1 {
            return Err(Error::Domain(format!(
                "space-only norm expects exactly one time slice, got {}",
                f.num_times()
            )));
        }
        Ok(f.slice_fn(0))
    };
    match spec.kind {
        NormKind::LpSpace => {
            Ok(NormOutcome::scalar(lp_norm(&single_slice()?, spec.p_or_inf(), spec.window())?))
        }
        NormKind::SobolevFrac => {
            let g = single_slice()?;
            Ok(NormOutcome::scalar(frac_sobolev_norm(&g, spec.sigma.expect("validated"), spec.p_or_inf())))
        }
        NormKind::HolderC2gamma => {
            let g = single_slice()?;
            Ok(NormOutcome::scalar(holder_seminorm(&g, 2.0 * spec.gamma_or_default())))
        }
        NormKind::Xt => xt_norm(
            f,
            spec.sigma.expect("validated"),
            spec.p_or_inf(),
            spec.alpha_or_default(),
            horizon,
            spec.window(),
        ),
        NormKind::Yt => yt_norm(f, spec.alpha_or_default(), horizon),
        NormKind::LpT => lpt_norm(f, spec.p_or_inf(), horizon, spec.window()),
        NormKind::Zt => {
            let zeros;
            let th = match theta {
                Some(t) => t,
                None => {
                    zeros = SpaceTimeField::zeros(f.grid, &f.times);
                    &zeros
                }
            };
            zt_norm(f, th, &ZtParams { alpha: spec.alpha_or_default(), horizon, window: spec.window() })
        }
        NormKind::XtTilde | NormKind::LpTTilde => tilde_norm(f, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::graded_times;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hat(center: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| (1.0 - (x - center).abs()).max(0.0)
    }

    #[test]
    fn lp_examples() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let one = GridFunction::constant(g, 1.0);
        assert_abs_diff_eq!(lp_norm(&one, 2.0, None).unwrap(), 1.0, epsilon = 1e-12);

        let g = Grid::new(-2.0, 2.0, 401).unwrap();
        let h = GridFunction::from_fn(g, hat(0.0));
        assert_abs_diff_eq!(lp_norm(&h, 1.0, None).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(lp_norm(&h, 2.0, None).unwrap(), (2.0f64 / 3.0).sqrt(), max_relative = 1e-4);
        assert_abs_diff_eq!(lp_norm(&h, f64::INFINITY, None).unwrap(), 1.0, epsilon = 1e-12);
        // Window with off-node endpoints; |f| = f is piecewise linear, so the
        // windowed L¹ value is exact.
        let exact = {
            let a: f64 = 0.305;
            (1.0 - a) * (1.0 - a) / 2.0
        };
        assert_abs_diff_eq!(lp_norm(&h, 1.0, Some((0.305, 3.0))).unwrap(), exact, epsilon = 1e-12);
        assert!(lp_norm(&h, 2.0, Some((5.0, 6.0))).is_err());
        assert!(lp_norm(&h, 0.5, None).is_err());
    }

    #[test]
    fn gagliardo_translation_invariance() {
        let g = Grid::new(-4.0, 4.0, 801).unwrap();
        let a = frac_sobolev_norm(&GridFunction::from_fn(g, hat(0.0)), 1.0 / 3.0, 1.2);
        let b = frac_sobolev_norm(&GridFunction::from_fn(g, hat(0.5)), 1.0 / 3.0, 1.2);
        assert_relative_eq!(a, b, max_relative = 1e-6);
        assert_eq!(frac_sobolev_norm(&GridFunction::zeros(g), 1.0 / 3.0, 1.2), 0.0);
    }

    #[test]
    fn holder_of_linear_is_span_power() {
        let g = Grid::new(-1.0, 3.0, 65).unwrap();
        let f = GridFunction::from_fn(g, |x| 0.5 * x);
        // |f(x)-f(y)|/|x-y|^β = 0.5 |x-y|^{1-β}, maximized at the full span 4.
        assert_relative_eq!(holder_seminorm(&f, 0.2), 0.5 * 4.0f64.powf(0.8), max_relative = 1e-12);
    }

    #[test]
    fn xt_of_time_constant_field() {
        let g = Grid::new(-2.0, 2.0, 201).unwrap();
        let times = graded_times(0.7, 48, 2.0);
        let f = SpaceTimeField::from_fn(g, &times, |_t, x| hat(0.0)(x));
        let out = xt_norm(&f, 0.35, 1.0, 0.05, 0.7, None).unwrap();
        assert_relative_eq!(out.value, 0.7f64.powf(0.35) * 1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(out.parts[1].1, 0.0, epsilon = 1e-300);
    }

    #[test]
    fn xt_single_slice_flags_missing_holder_term() {
        let g = Grid::new(0.0, 1.0, 9).unwrap();
        let f = SpaceTimeField::from_fn(g, &[0.5], |_, x| x);
        let out = xt_norm(&f, 0.0, f64::INFINITY, 0.05, 1.0, None).unwrap();
        assert!(!out.flags.is_empty());
        assert_abs_diff_eq!(out.value, 1.0, epsilon = 1e-12);
        assert!(xt_norm(&f, 0.0, 2.0, 0.05, 0.4, None).is_err(), "field past horizon");
    }

    #[test]
    fn xt_with_alpha_zero_matches_direct_sweep() {
        let g = Grid::new(0.0, 1.0, 33).unwrap();
        let times = graded_times(1.0, 24, 2.0);
        let f = SpaceTimeField::from_fn(g, &times, |t, x| (-3.0 * t).exp() * (2.0 * x).sin());
        let out = xt_norm(&f, 0.4, 2.0, 0.0, 1.0, None).unwrap();
        let mut sup = 0.0_f64;
        let mut diff_sup = 0.0_f64;
        for i in 0..times.len() {
            let gi = f.slice_fn(i);
            sup = sup.max(times[i].powf(0.4) * lp_norm(&gi, 2.0, None).unwrap());
            for j in i + 1..times.len() {
                let d = f.slice_fn(j).zip_with(&gi, |a, b| a - b);
                diff_sup = diff_sup.max(times[i].powf(0.4) * lp_norm(&d, 2.0, None).unwrap());
            }
        }
        assert_relative_eq!(out.value, sup + diff_sup, max_relative = 1e-12);
    }

    #[test]
    fn yt_examples() {
        let g = Grid::new(0.0, 1.0, 17).unwrap();
        let times = graded_times(1.0, 32, 2.0);
        let c = SpaceTimeField::from_fn(g, &times, |_, _| -2.5);
        assert_relative_eq!(yt_norm(&c, 0.05, 1.0).unwrap().value, 2.5, max_relative = 1e-12);

        let f = SpaceTimeField::from_fn(g, &times, |t, _| t);
        let mut pair = 0.0_f64;
        for i in 0..times.len() {
            for j in i + 1..times.len() {
                pair = pair.max(times[i].powf(0.05) * (times[j] - times[i]).powf(0.95));
            }
        }
        assert_relative_eq!(yt_norm(&f, 0.05, 1.0).unwrap().value, 1.0 + pair, max_relative = 1e-12);
    }

    #[test]
    fn lpt_of_constant_field() {
        let g = Grid::new(0.0, 2.0, 33).unwrap();
        let times = graded_times(0.5, 40, 2.0);
        let f = SpaceTimeField::from_fn(g, &times, |_, _| 3.0);
        // ∫_0^T ∫_0^2 3^p dx dt = 9·2·0.5 for p = 2.
        let out = lpt_norm(&f, 2.0, 0.5, None).unwrap();
        assert_relative_eq!(out.value, 3.0, max_relative = 1e-12);
        let sup = lpt_norm(&f, f64::INFINITY, 0.5, None).unwrap();
        assert_relative_eq!(sup.value, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn zt_of_linear_velocity() {
        let g = Grid::new(0.0, 2.0, 33).unwrap();
        let t_end = 0.5;
        let times = graded_times(t_end, 24, 2.0);
        let w = SpaceTimeField::from_fn(g, &times, |_, x| x);
        let theta = SpaceTimeField::zeros(g, &times);
        let out = zt_norm(&w, &theta, &ZtParams { alpha: 0.05, horizon: t_end, window: None }).unwrap();
        // ∂_x w ≡ 1: L²_T = √(T·|E|), X^{1/2,2} = √T·√|E|, X^{3/4,∞} = T^{3/4}.
        let expect = 2.0 * (t_end * 2.0).sqrt() + t_end.powf(0.75);
        assert_relative_eq!(out.value, expect, max_relative = 1e-10);
        assert_eq!(out.parts.len(), 7);
        assert_abs_diff_eq!(out.parts[3].1, 0.0, epsilon = 1e-300);
    }

    #[test]
    fn reflections() {
        let g = Grid::symmetric(2.0, 32).unwrap();
        let f = GridFunction::from_fn(g, |x| x);
        let even = reflect_even(&f).unwrap();
        for (i, &v) in even.values.iter().enumerate() {
            assert_abs_diff_eq!(v, g.node(i).abs(), epsilon = 1e-12);
        }
        let e = GridFunction::from_fn(g, |x| (x * x).cos());
        assert_eq!(reflect_even(&e).unwrap().values, e.values);
        assert_eq!(reflect_antisym(&e).unwrap().max_abs(), 0.0);

        let assym = Grid::new(0.0, 1.0, 5).unwrap();
        assert!(reflect_even(&GridFunction::zeros(assym)).is_err());
    }

    #[test]
    fn reflection_half_integrals_bounded_by_full_seminorm() {
        // The half-line estimates say the even/antisymmetric reflections cost
        // at most a constant factor in the Gagliardo seminorm. Record the
        // empirical constant over a random family and check refinement
        // stability.
        let (sigma, p) = (1.0 / 3.0, 1.2);
        let ratio_at = |n: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let g = Grid::symmetric(6.0, n).unwrap();
            let mut worst = 0.0_f64;
            for _ in 0..50 {
                let (a, b, c): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
                let f = GridFunction::from_fn(g, |x| {
                    (-x * x / 4.0).exp() * ((2.0 + 3.0 * a) * x + b).sin() * (1.0 + c * x)
                });
                let full = frac_sobolev_norm(&f, sigma, p).powf(p);
                let lhs = 0.5 * frac_sobolev_norm(&reflect_even(&f).unwrap(), sigma, p).powf(p)
                    + 0.5 * frac_sobolev_norm(&reflect_antisym(&f).unwrap(), sigma, p).powf(p);
                worst = worst.max(lhs / full);
            }
            worst
        };
        let coarse = ratio_at(150);
        let fine = ratio_at(300);
        assert!(coarse < 8.0, "empirical reflection constant {coarse}");
        assert!((coarse - fine).abs() / coarse < 0.25, "constant drifts: {coarse} vs {fine}");
    }

    #[test]
    fn tilde_norm_of_localized_field_matches_global() {
        let g = Grid::new(-8.0, 8.0, 257).unwrap();
        let times = graded_times(0.3, 16, 2.0);
        let f = SpaceTimeField::from_fn(g, &times, |t, x| {
            if x.abs() < 0.5 {
                (1.0 + t) * (1.0 - 2.0 * x.abs())
            } else {
                0.0
            }
        });
        let spec = NormSpec { p: Some(1.2), ..NormSpec::bare(NormKind::LpTTilde) };
        let local = tilde_norm(&f, &spec).unwrap();
        let global = lpt_norm(&f, 1.2, 0.3, None).unwrap();
        assert_relative_eq!(local.value, global.value, max_relative = 1e-12);

        let zero = SpaceTimeField::zeros(g, &times);
        assert_eq!(tilde_norm(&zero, &spec).unwrap().value, 0.0);

        // Narrow grid: falls back to the global norm and says so.
        let narrow = Grid::new(-1.0, 1.0, 33).unwrap();
        let fnarrow = SpaceTimeField::from_fn(narrow, &times, |_, x| 1.0 - x.abs());
        let out = tilde_norm(&fnarrow, &spec).unwrap();
        assert!(out.flags.iter().any(|f| f.contains("global")));
        assert_relative_eq!(
            out.value,
            lpt_norm(&fnarrow, 1.2, 0.3, None).unwrap().value,
            max_relative = 1e-12
        );
    }

    #[test]
    fn norms_are_homogeneous_and_subadditive() {
        let g = Grid::new(-3.0, 3.0, 121).unwrap();
        let times = graded_times(0.8, 20, 2.0);
        let lam = -3.7_f64;
        let f = SpaceTimeField::from_fn(g, &times, |t, x| (-(x * x) - t).exp() * (3.0 * x).sin());
        let h = SpaceTimeField::from_fn(g, &times, |t, x| (x - t).cos() * (-(x * x) / 2.0).exp());
        let scaled = f.map(|v| lam * v);
        for (sigma, p) in [(0.5, 2.0), (5.0 / 6.0, 1.2), (0.75, f64::INFINITY)] {
            let nf = xt_norm(&f, sigma, p, 0.05, 0.8, None).unwrap().value;
            let ns = xt_norm(&scaled, sigma, p, 0.05, 0.8, None).unwrap().value;
            assert_relative_eq!(ns, lam.abs() * nf, max_relative = 1e-12);
            let nh = xt_norm(&h, sigma, p, 0.05, 0.8, None).unwrap().value;
            let nsum = xt_norm(&f.zip_with(&h, |a, b| a + b), sigma, p, 0.05, 0.8, None).unwrap().value;
            assert!(nsum <= nf + nh + 1e-12 * (nf + nh));
        }
        let slice = f.slice_fn(3);
        let gag = frac_sobolev_norm(&slice, 0.4, 1.5);
        let gag_s = frac_sobolev_norm(&slice.map(|v| lam * v), 0.4, 1.5);
        assert_relative_eq!(gag_s, lam.abs() * gag, max_relative = 1e-12);
    }

    #[test]
    fn norms_stable_under_refinement() {
        let mut values = Vec::new();
        for (nx, nt) in [(129, 64), (257, 128)] {
            let g = Grid::new(-4.0, 4.0, nx).unwrap();
            let times = graded_times(0.6, nt, 2.0);
            let f = SpaceTimeField::from_fn(g, &times, |t, x| (-(x * x) / 2.0 - t).exp());
            values.push(xt_norm(&f, 0.5, 2.0, 0.05, 0.6, None).unwrap().value);
        }
        assert!(
            (values[0] - values[1]).abs() / values[1] < 0.01,
            "norm drifts under refinement: {values:?}"
        );
    }

    #[test]
    fn spec_validation_and_dispatch() {
        let mut spec = NormSpec::xt(0.5, 2.0, 1.0);
        spec.alpha = Some(0.2);
        spec.gamma = Some(0.1);
        assert!(spec.validate().is_err(), "alpha >= gamma must fail");
        assert!(NormSpec::sobolev(1.4, 2.0).validate().is_err());
        assert!(NormSpec { horizon: Some(-1.0), ..NormSpec::bare(NormKind::Yt) }.validate().is_err());

        let json = r#"{"kind":"XT","sigma":0.5,"p":2.0,"T":1.0}"#;
        let parsed: NormSpec = serde_json::from_str(json).unwrap();
        assert_eq!(parsed.kind, NormKind::Xt);
        assert_eq!(parsed.p, Some(2.0));
        assert!(parsed.alpha.is_none());

        let g = Grid::new(-2.0, 2.0, 101).unwrap();
        let times = graded_times(1.0, 8, 2.0);
        let f = SpaceTimeField::from_fn(g, &times, |_, x| hat(0.0)(x));
        // Space-only norm on a multi-slice field must refuse.
        assert!(evaluate_norm(&f, None, &NormSpec::space_lp(1.0)).is_err());
        let single = SpaceTimeField::from_fn(g, &[1.0], |_, x| hat(0.0)(x));
        let out = evaluate_norm(&single, None, &NormSpec::space_lp(1.0)).unwrap();
        assert_abs_diff_eq!(out.value, 1.0, epsilon = 1e-12);
        // ZT with no temperature component: the three θ-terms vanish.
        let w = SpaceTimeField::from_fn(g, &times, |_, x| x);
        let zt = evaluate_norm(&w, None, &NormSpec::zt(1.0)).unwrap();
        assert_eq!(zt.parts.len(), 7);
        assert_abs_diff_eq!(zt.parts[3].1 + zt.parts[4].1 + zt.parts[5].1 + zt.parts[6].1, 0.0, epsilon = 1e-300);
    }
}
