//! Independent finite-difference reference for every solver path, plus
//! brute-force norm oracles.
//!
//! The schemes here are deliberately conventional: backward Euler in time,
//! second-order conservative flux differencing with harmonic-mean face
//! coefficients (the standard discrete transmission treatment), Thomas
//! tridiagonal solves, constant-extension boundaries, and per-step Picard
//! relaxation of nonlinear terms. This module never imports the
//! kernel-based solver machinery — independence is the point — so all of
//! its discrete operators are built locally.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, SpaceTimeField};
use crate::model::{InitialData, LinearProblem, PressureModel};

/// Space/time resolution of a finite-difference reference run. Diffusion is
/// implicit (no CFL restriction); nonlinear couplings are relaxed per step,
/// and a step whose relaxation stalls is halved before the run is declared
/// fatal.
#[derive(Clone, Copy, Debug)]
pub struct FDConfig {
    pub nx: usize,
    pub nt: usize,
}

impl FDConfig {
    pub fn new(nx: usize, nt: usize) -> Result<FDConfig> {
        if nx < 5 || nt < 1 {
            return Err(Error::Config(format!(
                "reference run needs nx >= 5 and nt >= 1, got ({nx}, {nt})"
            )));
        }
        Ok(FDConfig { nx, nt })
    }
}

/// Per-step relaxation tolerance for nonlinear couplings.
const RELAX_TOL: f64 = 1e-10;
/// Relaxation sweep cap per attempted step.
const MAX_SWEEPS: usize = 200;
/// How many times a stalled step is halved before giving up.
const MAX_HALVINGS: u32 = 8;

/// Solve the linear jump-coefficient problem
/// `∂_t f − ∂_x(φ ∂_x f) = ∂_x F + R`, `f(0) = ∂_x f̄0`
/// by backward Euler on a uniform mesh. Output is on the reference's own
/// uniform grid and time mesh (`k·T/nt`).
pub fn fd_solve_linear(p: &LinearProblem, cfg: &FDConfig) -> Result<SpaceTimeField> {
    let span = p.grid();
    let grid = Grid::new(span.x_min(), span.x_max(), cfg.nx)?;
    let h = grid.spacing();
    let phi = resample(p.coefficient.values(), grid);
    let faces = harmonic_faces(&phi);

    let fbar = resample(&p.fbar0, grid);
    let mut f = grad_centered(&fbar, h);

    let dt = p.horizon / cfg.nt as f64;
    let mut times = Vec::with_capacity(cfg.nt);
    let mut slices = Vec::with_capacity(cfg.nt);
    for k in 1..=cfg.nt {
        let t = dt * k as f64;
        let forcing_grad = resample_slice(&p.forcing_grad, t, grid);
        let forcing_bulk = resample_slice(&p.forcing_bulk, t, grid);
        let div_f = grad_centered(&forcing_grad, h);
        let rhs: Vec<f64> = (0..grid.len())
            .map(|i| f[i] + dt * (div_f[i] + forcing_bulk[i]))
            .collect();
        f = implicit_diffusion_step(&faces, dt, h, rhs)?;
        times.push(t);
        slices.push(f.clone());
    }
    SpaceTimeField::new(grid, times, slices)
}

/// Solve the isentropic system `v_t − u_x = 0`,
/// `u_t + p(v)_x = (μ u_x / v)_x` by backward Euler: `v` is updated by
/// exact time integration of the piecewise-linear-in-time `u_x`, `u` by
/// implicit diffusion with lagged coefficients, and the coupling is
/// Picard-relaxed each step.
pub fn fd_solve_psystem(
    data: &InitialData,
    pressure: &PressureModel,
    mu: f64,
    horizon: f64,
    cfg: &FDConfig,
) -> Result<(SpaceTimeField, SpaceTimeField)> {
    if matches!(pressure, PressureModel::PolytropicIdeal { .. }) {
        return Err(Error::Domain(
            "the isentropic system needs a temperature-free pressure law".into(),
        ));
    }
    if !(mu > 0.0 && horizon > 0.0) {
        return Err(Error::Domain(format!(
            "viscosity and horizon must be positive, got mu={mu}, T={horizon}"
        )));
    }
    let span = data.grid();
    let grid = Grid::new(span.x_min(), span.x_max(), cfg.nx)?;
    let mut v = resample(&data.v0, grid);
    let mut u = resample(&data.velocity(), grid);

    let dt = horizon / cfg.nt as f64;
    let mut times = Vec::with_capacity(cfg.nt);
    let mut v_slices = Vec::with_capacity(cfg.nt);
    let mut u_slices = Vec::with_capacity(cfg.nt);
    for k in 1..=cfg.nt {
        advance_psystem(&mut v, &mut u, pressure, mu, grid.spacing(), dt, MAX_HALVINGS)?;
        times.push(dt * k as f64);
        v_slices.push(v.clone());
        u_slices.push(u.clone());
    }
    let grid2 = grid;
    Ok((
        SpaceTimeField::new(grid, times.clone(), v_slices)?,
        SpaceTimeField::new(grid2, times, u_slices)?,
    ))
}

/// Solve the full polytropic system (`p = Kθ/v`, `e = 𝐜θ`):
/// `v_t = u_x`, `u_t + p_x = (μ u_x / v)_x`,
/// `θ_t + (p/𝐜)u_x − (μ/(𝐜v))(u_x)² = ((κ/(𝐜v))θ_x)_x`,
/// with the same implicit/relaxed stepping as the isentropic path.
pub fn fd_solve_full(
    data: &InitialData,
    pressure: &PressureModel,
    mu: f64,
    kappa: f64,
    horizon: f64,
    cfg: &FDConfig,
) -> Result<(SpaceTimeField, SpaceTimeField, SpaceTimeField)> {
    let heat_capacity = pressure.heat_capacity()?;
    if !(mu > 0.0 && kappa > 0.0 && horizon > 0.0) {
        return Err(Error::Domain(format!(
            "viscosity, conductivity and horizon must be positive, got mu={mu}, kappa={kappa}, T={horizon}"
        )));
    }
    let span = data.grid();
    let grid = Grid::new(span.x_min(), span.x_max(), cfg.nx)?;
    let mut v = resample(&data.v0, grid);
    let mut u = resample(&data.velocity(), grid);
    let mut theta = resample(&data.temperature(), grid);
    if theta.iter().any(|&t| t <= 0.0) {
        return Err(Error::Domain("the full system needs strictly positive temperature".into()));
    }

    let dt = horizon / cfg.nt as f64;
    let mut times = Vec::with_capacity(cfg.nt);
    let mut slices = (Vec::new(), Vec::new(), Vec::new());
    for k in 1..=cfg.nt {
        advance_full(
            &mut v,
            &mut u,
            &mut theta,
            pressure,
            mu,
            kappa,
            heat_capacity,
            grid.spacing(),
            dt,
            MAX_HALVINGS,
        )?;
        times.push(dt * k as f64);
        slices.0.push(v.clone());
        slices.1.push(u.clone());
        slices.2.push(theta.clone());
    }
    Ok((
        SpaceTimeField::new(grid, times.clone(), slices.0)?,
        SpaceTimeField::new(grid, times.clone(), slices.1)?,
        SpaceTimeField::new(grid, times, slices.2)?,
    ))
}

fn advance_psystem(
    v: &mut Vec<f64>,
    u: &mut Vec<f64>,
    pressure: &PressureModel,
    mu: f64,
    h: f64,
    dt: f64,
    halvings_left: u32,
) -> Result<()> {
    match picard_psystem(v, u, pressure, mu, h, dt) {
        Ok((v_new, u_new)) => {
            *v = v_new;
            *u = u_new;
            Ok(())
        }
        Err(e) if halvings_left > 0 => {
            let _ = e;
            advance_psystem(v, u, pressure, mu, h, dt / 2.0, halvings_left - 1)?;
            advance_psystem(v, u, pressure, mu, h, dt / 2.0, halvings_left - 1)
        }
        Err(e) => Err(Error::Domain(format!(
            "reference step relaxation failed even after halving to dt={dt}: {e}"
        ))),
    }
}

fn picard_psystem(
    v_old: &[f64],
    u_old: &[f64],
    pressure: &PressureModel,
    mu: f64,
    h: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = v_old.len();
    let ux_old = grad_centered(u_old, h);
    let scale = 1.0 + sup_abs(u_old);
    let mut u_guess = u_old.to_vec();
    for _ in 0..MAX_SWEEPS {
        let ux = grad_centered(&u_guess, h);
        let v_new: Vec<f64> =
            (0..n).map(|i| v_old[i] + 0.5 * dt * (ux_old[i] + ux[i])).collect();
        if v_new.iter().any(|&vi| vi <= 1e-12) {
            return Err(Error::Domain("specific volume lost positivity".into()));
        }
        let p_nodes: Vec<f64> = v_new.iter().map(|&vi| pressure.pressure_thermal(vi, 0.0)).collect();
        let grad_p = grad_centered(&p_nodes, h);
        let coeff: Vec<f64> = v_new.iter().map(|&vi| mu / vi).collect();
        let faces = harmonic_faces(&coeff);
        let rhs: Vec<f64> = (0..n).map(|i| u_old[i] - dt * grad_p[i]).collect();
        let u_next = implicit_diffusion_step(&faces, dt, h, rhs)?;
        let delta = u_next
            .iter()
            .zip(&u_guess)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        u_guess = u_next;
        if delta <= RELAX_TOL * scale {
            let ux = grad_centered(&u_guess, h);
            let v_new: Vec<f64> =
                (0..n).map(|i| v_old[i] + 0.5 * dt * (ux_old[i] + ux[i])).collect();
            return Ok((v_new, u_guess));
        }
    }
    Err(Error::InnerStall("per-step relaxation did not reach tolerance".into()))
}

#[allow(clippy::too_many_arguments)]
fn advance_full(
    v: &mut Vec<f64>,
    u: &mut Vec<f64>,
    theta: &mut Vec<f64>,
    pressure: &PressureModel,
    mu: f64,
    kappa: f64,
    heat_capacity: f64,
    h: f64,
    dt: f64,
    halvings_left: u32,
) -> Result<()> {
    match picard_full(v, u, theta, pressure, mu, kappa, heat_capacity, h, dt) {
        Ok((v_new, u_new, t_new)) => {
            *v = v_new;
            *u = u_new;
            *theta = t_new;
            Ok(())
        }
        Err(e) if halvings_left > 0 => {
            let _ = e;
            advance_full(v, u, theta, pressure, mu, kappa, heat_capacity, h, dt / 2.0, halvings_left - 1)?;
            advance_full(v, u, theta, pressure, mu, kappa, heat_capacity, h, dt / 2.0, halvings_left - 1)
        }
        Err(e) => Err(Error::Domain(format!(
            "reference step relaxation failed even after halving to dt={dt}: {e}"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn picard_full(
    v_old: &[f64],
    u_old: &[f64],
    theta_old: &[f64],
    pressure: &PressureModel,
    mu: f64,
    kappa: f64,
    heat_capacity: f64,
    h: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = v_old.len();
    let ux_old = grad_centered(u_old, h);
    let scale = 1.0 + sup_abs(u_old) + sup_abs(theta_old);
    let mut u_guess = u_old.to_vec();
    let mut theta_guess = theta_old.to_vec();
    for _ in 0..MAX_SWEEPS {
        let ux = grad_centered(&u_guess, h);
        let v_new: Vec<f64> =
            (0..n).map(|i| v_old[i] + 0.5 * dt * (ux_old[i] + ux[i])).collect();
        if v_new.iter().any(|&vi| vi <= 1e-12) {
            return Err(Error::Domain("specific volume lost positivity".into()));
        }
        let p_nodes: Vec<f64> = (0..n)
            .map(|i| pressure.pressure_thermal(v_new[i], theta_guess[i]))
            .collect();
        let grad_p = grad_centered(&p_nodes, h);
        let visc: Vec<f64> = v_new.iter().map(|&vi| mu / vi).collect();
        let rhs_u: Vec<f64> = (0..n).map(|i| u_old[i] - dt * grad_p[i]).collect();
        let u_next = implicit_diffusion_step(&harmonic_faces(&visc), dt, h, rhs_u)?;

        let ux_next = grad_centered(&u_next, h);
        let conduct: Vec<f64> = v_new.iter().map(|&vi| kappa / (heat_capacity * vi)).collect();
        let rhs_theta: Vec<f64> = (0..n)
            .map(|i| {
                theta_old[i]
                    + dt * (-p_nodes[i] / heat_capacity * ux_next[i]
                        + mu / (heat_capacity * v_new[i]) * ux_next[i] * ux_next[i])
            })
            .collect();
        let theta_next = implicit_diffusion_step(&harmonic_faces(&conduct), dt, h, rhs_theta)?;
        if theta_next.iter().any(|&t| t <= 0.0) {
            return Err(Error::Domain("temperature lost positivity".into()));
        }

        let delta = u_next
            .iter()
            .zip(&u_guess)
            .chain(theta_next.iter().zip(&theta_guess))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        u_guess = u_next;
        theta_guess = theta_next;
        if delta <= RELAX_TOL * scale {
            let ux = grad_centered(&u_guess, h);
            let v_new: Vec<f64> =
                (0..n).map(|i| v_old[i] + 0.5 * dt * (ux_old[i] + ux[i])).collect();
            return Ok((v_new, u_guess, theta_guess));
        }
    }
    Err(Error::InnerStall("per-step relaxation did not reach tolerance".into()))
}

/// One backward-Euler diffusion step: solve `(I − dt·D) f = rhs` where `D`
/// is the conservative flux difference with the given face coefficients and
/// zero-flux (constant-extension) outer faces. Vertex-centered boundary
/// cells have width `h/2`, which keeps the no-flux rows second-order
/// consistent.
fn implicit_diffusion_step(faces: &[f64], dt: f64, h: f64, rhs: Vec<f64>) -> Result<Vec<f64>> {
    let n = rhs.len();
    debug_assert_eq!(faces.len(), n - 1);
    let r = dt / (h * h);
    let mut sub = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n - 1];
    for i in 0..n {
        let boundary = i == 0 || i == n - 1;
        let cell = if boundary { 2.0 * r } else { r };
        let left = if i > 0 { faces[i - 1] } else { 0.0 };
        let right = if i + 1 < n { faces[i] } else { 0.0 };
        diag[i] = 1.0 + cell * (left + right);
        if i > 0 {
            sub[i - 1] = -cell * left;
        }
        if i + 1 < n {
            sup[i] = -cell * right;
        }
    }
    thomas(&sub, &diag, &sup, rhs)
}

/// Harmonic-mean face coefficients `2 a_i a_{i+1} / (a_i + a_{i+1})`.
fn harmonic_faces(nodes: &[f64]) -> Vec<f64> {
    nodes
        .windows(2)
        .map(|w| 2.0 * w[0] * w[1] / (w[0] + w[1]))
        .collect()
}

/// Second-order gradient: centered interior, one-sided at the ends.
fn grad_centered(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    out
}

/// Thomas algorithm for a tridiagonal system.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], mut rhs: Vec<f64>) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n - 1];
    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 {
        return Err(Error::Domain("tridiagonal solve hit a zero pivot".into()));
    }
    c[0] = sup[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i - 1] * c[i - 1];
        if pivot.abs() < 1e-300 {
            return Err(Error::Domain("tridiagonal solve hit a zero pivot".into()));
        }
        if i < n - 1 {
            c[i] = sup[i] / pivot;
        }
        rhs[i] = (rhs[i] - sub[i - 1] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(rhs)
}

fn resample(f: &GridFunction, grid: Grid) -> Vec<f64> {
    grid.nodes().into_iter().map(|x| f.value_at(x)).collect()
}

fn resample_slice(field: &SpaceTimeField, t: f64, grid: Grid) -> Vec<f64> {
    let slice = field.sample_time(t);
    let on_problem_grid =
        GridFunction::new(field.grid, slice).expect("sampled slice matches its own grid");
    resample(&on_problem_grid, grid)
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
}

// --- Brute-force norm oracles -------------------------------------------
//
// Raw quadrature with no shared code: trapezoid weights, full pair sums,
// explicit zero-extension tails. These exist so the production norm
// implementations can be checked against an independent computation.

/// Trapezoid `L^p` norm of the sampled values.
pub fn brute_lp(f: &GridFunction, p: f64) -> f64 {
    assert!(p >= 1.0, "Lebesgue exponent must be at least 1");
    let h = f.grid.spacing();
    let n = f.grid.len();
    let mut sum = 0.0;
    for (i, &x) in f.values.iter().enumerate() {
        let w = if i == 0 || i == n - 1 { h / 2.0 } else { h };
        sum += w * x.abs().powf(p);
    }
    sum.powf(1.0 / p)
}

/// Fractional Sobolev seminorm of order `σ` in `L^p` by a raw trapezoid
/// pair sum over the grid plus the explicit zero-extension tail (distances
/// to the domain ends floored at `h/2`).
pub fn brute_frac_sobolev(f: &GridFunction, sigma: f64, p: f64) -> f64 {
    assert!(sigma > 0.0 && sigma < 1.0 && p >= 1.0);
    let grid = f.grid;
    let n = grid.len();
    let h = grid.spacing();
    let sp = sigma * p;
    let weight = |i: usize| if i == 0 || i == n - 1 { h / 2.0 } else { h };
    let mut pair_sum = 0.0;
    let mut pair_comp = 0.0;
    for i in 0..n {
        let (xi, fi, wi) = (grid.node(i), f.values[i], weight(i));
        for j in 0..n {
            let d = (xi - grid.node(j)).abs();
            if d <= 1e-14 {
                continue;
            }
            let term = wi * weight(j) * (fi - f.values[j]).abs().powf(p) / d.powf(1.0 + sp);
            let y = term - pair_comp;
            let t = pair_sum + y;
            pair_comp = (t - pair_sum) - y;
            pair_sum = t;
        }
    }
    let mut tail = 0.0;
    for i in 0..n {
        let x = grid.node(i);
        let right = (grid.x_max() - x).max(h / 2.0);
        let left = (x - grid.x_min()).max(h / 2.0);
        tail += 2.0 * weight(i) * f.values[i].abs().powf(p)
            * (right.powf(-sp) + left.powf(-sp))
            / sp;
    }
    (pair_sum + tail).powf(1.0 / p)
}

/// Weighted sup part of the parabolic norm: `sup_k t_k^σ ‖f(t_k)‖_{L^p}`.
pub fn brute_weighted_sup(f: &SpaceTimeField, sigma: f64, p: f64) -> f64 {
    f.times
        .iter()
        .zip(&f.values)
        .fold(0.0_f64, |m, (&t, slice)| {
            let g = GridFunction::new(f.grid, slice.clone()).expect("aligned slice");
            m.max(t.powf(sigma) * brute_lp(&g, p))
        })
}

/// Weighted Hölder part of the parabolic norm:
/// `sup_{s<t} s^{σ+α} ‖f(t)−f(s)‖_{L^p} / (t−s)^α` over all mesh pairs.
pub fn brute_holder_quotient(f: &SpaceTimeField, sigma: f64, alpha: f64, p: f64) -> f64 {
    let nt = f.times.len();
    let mut best = 0.0_f64;
    for i in 0..nt {
        let s = f.times[i];
        let weight = s.powf(sigma + alpha);
        for j in i + 1..nt {
            let diff: Vec<f64> = f.values[j]
                .iter()
                .zip(&f.values[i])
                .map(|(a, b)| a - b)
                .collect();
            let g = GridFunction::new(f.grid, diff).expect("aligned slice");
            best = best.max(weight * brute_lp(&g, p) / (f.times[j] - s).powf(alpha));
        }
    }
    best
}

/// Full weighted parabolic norm: weighted sup plus weighted Hölder
/// quotient, both by raw sweeps over the time mesh.
pub fn brute_xt(f: &SpaceTimeField, sigma: f64, alpha: f64, p: f64) -> f64 {
    brute_weighted_sup(f, sigma, p) + brute_holder_quotient(f, sigma, alpha, p)
}

/// Space-time `L^p` norm `(∫_0^T ‖f(t)‖_p^p dt)^{1/p}`; the leading cell
/// `[0, t_1]` uses the first slice.
pub fn brute_space_time_lp(f: &SpaceTimeField, p: f64) -> f64 {
    let mut total = 0.0;
    let mut prev_t = 0.0;
    let mut prev_val: Option<f64> = None;
    for (&t, slice) in f.times.iter().zip(&f.values) {
        let g = GridFunction::new(f.grid, slice.clone()).expect("aligned slice");
        let val = brute_lp(&g, p).powf(p);
        total += match prev_val {
            None => t * val,
            Some(pv) => 0.5 * (t - prev_t) * (pv + val),
        };
        prev_t = t;
        prev_val = Some(val);
    }
    total.powf(1.0 / p)
}
