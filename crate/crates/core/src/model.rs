//! Problem records shared across solver paths: piecewise diffusion
//! coefficients, the linear jump-coefficient problem, pressure laws, and
//! gas-dynamics initial data. The kernel-based solvers and the independent
//! finite-difference reference both consume these records; they share no
//! algorithm code.

use crate::error::{Error, Result};
use crate::grid::{derivative4, Grid, GridFunction, SpaceTimeField};

/// Diffusion coefficient `φ(x)` that is uniformly elliptic, Lipschitz away
/// from finitely many jumps, and exactly constant on a one-sided plateau of
/// radius `ε` on each side of every jump (the left plateau covers
/// `[a−ε, a)`, the right one `[a, a+ε]`, so the jump sits between the node
/// at `a` and its left neighbor).
#[derive(Clone, Debug)]
pub struct PiecewiseCoefficient {
    values: GridFunction,
    jumps: Vec<f64>,
    epsilon: f64,
    /// `(left, right)` plateau values per jump.
    plateau: Vec<(f64, f64)>,
    /// Uniform ellipticity bound: `c0 ≤ φ ≤ 1/c0`.
    c0: f64,
    /// Lipschitz bound of φ off the plateaus.
    lipschitz: f64,
}

impl PiecewiseCoefficient {
    /// Validates the plateau structure: jumps separated by at least `10ε`,
    /// the sampled values exactly constant on each one-sided plateau, and
    /// `φ` positive and bounded.
    pub fn new(values: GridFunction, jumps: Vec<f64>, epsilon: f64) -> Result<PiecewiseCoefficient> {
        let grid = values.grid;
        let low = values.min();
        if !(low > 0.0) {
            return Err(Error::Domain(format!("coefficient must be positive, min is {low}")));
        }
        let mut jumps = jumps;
        jumps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if !jumps.is_empty() && !(epsilon > 0.0) {
            return Err(Error::Domain("jump plateaus need a positive radius".into()));
        }
        for pair in jumps.windows(2) {
            if pair[1] - pair[0] < 10.0 * epsilon {
                return Err(Error::Domain(format!(
                    "jumps at {} and {} are closer than 10 plateau radii",
                    pair[0], pair[1]
                )));
            }
        }
        let mut plateau = Vec::with_capacity(jumps.len());
        let scale = values.max_abs();
        for &a in &jumps {
            if a - epsilon < grid.x_min() || a + epsilon > grid.x_max() {
                return Err(Error::Domain(format!(
                    "plateau around jump at {a} leaves the grid"
                )));
            }
            let half = grid.spacing() / 2.0;
            let left = plateau_value(&values, a - epsilon, a - half, scale)?;
            let right = plateau_value(&values, a, a + epsilon, scale)?;
            plateau.push((left, right));
        }
        let high = values.values.iter().fold(0.0_f64, |m, &v| m.max(v));
        let c0 = low.min(1.0 / high);
        let lipschitz = off_plateau_slope(&values, &jumps, epsilon);
        Ok(PiecewiseCoefficient { values, jumps, epsilon, plateau, c0, lipschitz })
    }

    /// Spatially constant coefficient (no jumps).
    pub fn constant(grid: Grid, c: f64) -> Result<PiecewiseCoefficient> {
        PiecewiseCoefficient::new(GridFunction::constant(grid, c), Vec::new(), 0.0)
    }

    /// Smooth coefficient (no jumps).
    pub fn smooth(values: GridFunction) -> Result<PiecewiseCoefficient> {
        PiecewiseCoefficient::new(values, Vec::new(), 0.0)
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn grid(&self) -> Grid {
        self.values.grid
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.values.value_at(x)
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(left, right)` constant values on the plateaus around jump `n`.
    pub fn plateau_limits(&self, n: usize) -> (f64, f64) {
        self.plateau[n]
    }

    /// Uniform ellipticity constant: `c0 ≤ φ ≤ 1/c0`.
    pub fn ellipticity(&self) -> f64 {
        self.c0
    }

    /// Lipschitz bound of the coefficient away from the jump plateaus.
    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    /// The two-phase frozen coefficient near jump `n`: the plateau value of
    /// the matching side everywhere on that side.
    pub fn frozen_at_jump(&self, n: usize, x: f64) -> f64 {
        let (left, right) = self.plateau[n];
        if x < self.jumps[n] {
            left
        } else {
            right
        }
    }
}

fn plateau_value(values: &GridFunction, from: f64, to: f64, scale: f64) -> Result<f64> {
    let (lo, hi) = values
        .grid
        .index_window(from, to)
        .ok_or_else(|| Error::Domain("plateau contains no grid nodes".into()))?;
    let v = values.values[lo];
    for i in lo..=hi {
        if (values.values[i] - v).abs() > 1e-10 * scale.max(1.0) {
            return Err(Error::Domain(format!(
                "coefficient is not constant on the plateau [{from}, {to}]: {} vs {v}",
                values.values[i]
            )));
        }
    }
    Ok(v)
}

fn off_plateau_slope(values: &GridFunction, jumps: &[f64], epsilon: f64) -> f64 {
    let grid = values.grid;
    let h = grid.spacing();
    let mut worst = 0.0_f64;
    'cells: for i in 0..grid.len() - 1 {
        let (a, b) = (grid.node(i), grid.node(i + 1));
        for &jump in jumps {
            if b > jump - epsilon && a < jump + epsilon {
                continue 'cells;
            }
        }
        worst = worst.max((values.values[i + 1] - values.values[i]).abs() / h);
    }
    worst
}

/// The linear jump-coefficient problem
/// `∂_t f − ∂_x(φ ∂_x f) = ∂_x F + R`, `f(0) = ∂_x f̄0`,
/// posed on the coefficient's grid over the forcing fields' time mesh.
#[derive(Clone, Debug)]
pub struct LinearProblem {
    pub coefficient: PiecewiseCoefficient,
    /// Antiderivative initial data: `f(0) = ∂_x f̄0`.
    pub fbar0: GridFunction,
    /// Divergence-form forcing `F` (enters as `∂_x F`).
    pub forcing_grad: SpaceTimeField,
    /// Bulk forcing `R`.
    pub forcing_bulk: SpaceTimeField,
    pub horizon: f64,
}

impl LinearProblem {
    pub fn new(
        coefficient: PiecewiseCoefficient,
        fbar0: GridFunction,
        forcing_grad: SpaceTimeField,
        forcing_bulk: SpaceTimeField,
    ) -> Result<LinearProblem> {
        let grid = coefficient.grid();
        if fbar0.grid != grid || forcing_grad.grid != grid || forcing_bulk.grid != grid {
            return Err(Error::Domain("problem fields must share the coefficient's grid".into()));
        }
        if forcing_grad.times != forcing_bulk.times {
            return Err(Error::Domain("forcing fields must share one time mesh".into()));
        }
        let horizon = *forcing_grad.times.last().ok_or_else(|| {
            Error::Domain("problem needs at least one output time".into())
        })?;
        Ok(LinearProblem { coefficient, fbar0, forcing_grad, forcing_bulk, horizon })
    }

    /// Problem with zero forcing on the given output mesh.
    pub fn without_forcing(
        coefficient: PiecewiseCoefficient,
        fbar0: GridFunction,
        times: &[f64],
    ) -> Result<LinearProblem> {
        let grid = coefficient.grid();
        let zero = SpaceTimeField::zeros(grid, times);
        LinearProblem::new(coefficient, fbar0, zero.clone(), zero)
    }

    pub fn grid(&self) -> Grid {
        self.coefficient.grid()
    }

    pub fn times(&self) -> &[f64] {
        &self.forcing_grad.times
    }

    /// `f(0) = ∂_x f̄0` by fourth-order differences.
    pub fn initial_value(&self) -> GridFunction {
        self.fbar0.derivative()
    }
}

/// Pressure law: either a general tabulated `p(v)` with certified
/// `W^{2,∞}` bounds, or the polytropic ideal law `p(v,θ) = Kθ/v` with heat
/// capacity `𝐜` (so `e = 𝐜θ`).
#[derive(Clone, Debug)]
pub enum PressureModel {
    GeneralW2Inf {
        v_min: f64,
        v_max: f64,
        values: Vec<f64>,
        /// Tabulated `p'` (fourth-order differences of the values).
        slopes: Vec<f64>,
        /// `max |p'|` over the table.
        slope_bound: f64,
        /// `max |p''|` over the table.
        curvature_bound: f64,
    },
    PolytropicIdeal { gas_constant: f64, heat_capacity: f64 },
}

impl PressureModel {
    /// Tabulate a general pressure law on `[v_min, v_max]`, certifying its
    /// first- and second-derivative bounds from the table.
    pub fn tabulate(p: impl Fn(f64) -> f64, v_min: f64, v_max: f64, n: usize) -> Result<PressureModel> {
        if !(v_min > 0.0 && v_max > v_min) || n < 5 {
            return Err(Error::Domain(format!(
                "pressure table needs 0 < v_min < v_max and at least 5 samples, got [{v_min}, {v_max}] with {n}"
            )));
        }
        let dv = (v_max - v_min) / (n - 1) as f64;
        let values: Vec<f64> = (0..n).map(|i| p(v_min + dv * i as f64)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("pressure law produced non-finite values".into()));
        }
        let slopes = derivative4(&values, dv);
        let slope_bound = slopes.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        let mut curvature_bound = ((2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2]
            - values[3])
            / (dv * dv))
            .abs()
            .max(
                ((2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4])
                    / (dv * dv))
                    .abs(),
            );
        for i in 1..n - 1 {
            curvature_bound =
                curvature_bound.max(((values[i - 1] - 2.0 * values[i] + values[i + 1]) / (dv * dv)).abs());
        }
        Ok(PressureModel::GeneralW2Inf { v_min, v_max, values, slopes, slope_bound, curvature_bound })
    }

    /// Polytropic ideal gas `p = Kθ/v`, `e = 𝐜θ`.
    pub fn polytropic(gas_constant: f64, heat_capacity: f64) -> Result<PressureModel> {
        if !(gas_constant > 0.0 && heat_capacity > 0.0) {
            return Err(Error::Domain(format!(
                "polytropic law needs K > 0 and 𝐜 > 0, got K={gas_constant}, c={heat_capacity}"
            )));
        }
        Ok(PressureModel::PolytropicIdeal { gas_constant, heat_capacity })
    }

    /// Constant pressure (a degenerate general law with zero derivatives).
    pub fn constant(value: f64) -> PressureModel {
        PressureModel::GeneralW2Inf {
            v_min: 1e-6,
            v_max: 1e6,
            values: vec![value; 5],
            slopes: vec![0.0; 5],
            slope_bound: 0.0,
            curvature_bound: 0.0,
        }
    }

    /// Isentropic pressure `p(v)`; the polytropic law has no
    /// temperature-free form.
    pub fn pressure(&self, v: f64) -> Result<f64> {
        match self {
            PressureModel::GeneralW2Inf { .. } => Ok(self.interpolate(v)),
            PressureModel::PolytropicIdeal { .. } => Err(Error::Domain(
                "the polytropic law needs a temperature; use pressure_thermal".into(),
            )),
        }
    }

    /// Thermal pressure `p(v, θ)`: `Kθ/v` for the ideal law. A general law
    /// is temperature-independent.
    pub fn pressure_thermal(&self, v: f64, theta: f64) -> f64 {
        match self {
            PressureModel::GeneralW2Inf { .. } => self.interpolate(v),
            PressureModel::PolytropicIdeal { gas_constant, .. } => gas_constant * theta / v,
        }
    }

    pub fn heat_capacity(&self) -> Result<f64> {
        match self {
            PressureModel::PolytropicIdeal { heat_capacity, .. } => Ok(*heat_capacity),
            PressureModel::GeneralW2Inf { .. } => {
                Err(Error::Domain("general pressure law carries no heat capacity".into()))
            }
        }
    }

    /// `max |p'|` over the certified range (0 for the degenerate constant
    /// law; the paper-level `W^{2,∞}` requirement).
    pub fn slope_bound(&self) -> f64 {
        match self {
            PressureModel::GeneralW2Inf { slope_bound, .. } => *slope_bound,
            PressureModel::PolytropicIdeal { .. } => f64::INFINITY,
        }
    }

    pub fn curvature_bound(&self) -> f64 {
        match self {
            PressureModel::GeneralW2Inf { curvature_bound, .. } => *curvature_bound,
            PressureModel::PolytropicIdeal { .. } => f64::INFINITY,
        }
    }

    /// Certified range of a tabulated law.
    pub fn table_range(&self) -> Option<(f64, f64)> {
        match self {
            PressureModel::GeneralW2Inf { v_min, v_max, .. } => Some((*v_min, *v_max)),
            PressureModel::PolytropicIdeal { .. } => None,
        }
    }

    /// Cubic Hermite interpolation of the table (fourth-order slopes),
    /// extended linearly beyond the ends.
    fn interpolate(&self, v: f64) -> f64 {
        let PressureModel::GeneralW2Inf { v_min, v_max, values, slopes, .. } = self else {
            unreachable!("interpolate is only called on the tabulated law")
        };
        let n = values.len();
        let dv = (v_max - v_min) / (n - 1) as f64;
        if v <= *v_min {
            return values[0] + slopes[0] * (v - v_min);
        }
        if v >= *v_max {
            return values[n - 1] + slopes[n - 1] * (v - v_max);
        }
        let s = (v - v_min) / dv;
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * w) * (1.0 - w) * (1.0 - w),
            w * (1.0 - w) * (1.0 - w),
            w * w * (3.0 - 2.0 * w),
            w * w * (w - 1.0),
        );
        h00 * values[i] + h10 * dv * slopes[i] + h01 * values[i + 1] + h11 * dv * slopes[i + 1]
    }
}

/// Initial data for the gas systems: specific volume with its jump list and
/// positivity floor, velocity given directly or through a potential
/// (`u0 = ∂_x ū0`), and optionally temperature data for the full system.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub v0: GridFunction,
    pub jumps: Vec<f64>,
    pub lambda0: f64,
    ubar0: Option<GridFunction>,
    u0_raw: Option<GridFunction>,
    thetabar0: Option<GridFunction>,
    theta0_raw: Option<GridFunction>,
}

impl InitialData {
    pub fn new(v0: GridFunction, jumps: Vec<f64>, lambda0: f64) -> Result<InitialData> {
        if !(lambda0 > 0.0) {
            return Err(Error::Domain(format!("positivity floor must be positive, got {lambda0}")));
        }
        let low = v0.min();
        if low < lambda0 {
            return Err(Error::Domain(format!(
                "initial volume dips to {low}, below the floor {lambda0}"
            )));
        }
        let mut jumps = jumps;
        jumps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &a in &jumps {
            if a <= v0.grid.x_min() || a >= v0.grid.x_max() {
                return Err(Error::Domain(format!("jump at {a} is outside the grid")));
            }
        }
        Ok(InitialData {
            v0,
            jumps,
            lambda0,
            ubar0: None,
            u0_raw: None,
            thetabar0: None,
            theta0_raw: None,
        })
    }

    /// Supply velocity through its potential: `u0 = ∂_x ū0`.
    pub fn with_velocity_potential(mut self, ubar0: GridFunction) -> Result<InitialData> {
        check_grid(&self.v0, &ubar0)?;
        self.ubar0 = Some(ubar0);
        self.u0_raw = None;
        Ok(self)
    }

    /// Supply velocity directly; the potential is then a numerical
    /// antiderivative.
    pub fn with_velocity(mut self, u0: GridFunction) -> Result<InitialData> {
        check_grid(&self.v0, &u0)?;
        self.u0_raw = Some(u0);
        self.ubar0 = None;
        Ok(self)
    }

    pub fn with_temperature_potential(mut self, thetabar0: GridFunction) -> Result<InitialData> {
        check_grid(&self.v0, &thetabar0)?;
        self.thetabar0 = Some(thetabar0);
        self.theta0_raw = None;
        Ok(self)
    }

    pub fn with_temperature(mut self, theta0: GridFunction) -> Result<InitialData> {
        check_grid(&self.v0, &theta0)?;
        self.theta0_raw = Some(theta0);
        self.thetabar0 = None;
        Ok(self)
    }

    pub fn grid(&self) -> Grid {
        self.v0.grid
    }

    pub fn velocity(&self) -> GridFunction {
        match (&self.ubar0, &self.u0_raw) {
            (Some(ubar), _) => ubar.derivative(),
            (None, Some(u)) => u.clone(),
            (None, None) => GridFunction::zeros(self.v0.grid),
        }
    }

    pub fn velocity_potential(&self) -> GridFunction {
        match (&self.ubar0, &self.u0_raw) {
            (Some(ubar), _) => ubar.clone(),
            (None, Some(u)) => u.antiderivative(),
            (None, None) => GridFunction::zeros(self.v0.grid),
        }
    }

    pub fn temperature(&self) -> GridFunction {
        match (&self.thetabar0, &self.theta0_raw) {
            (Some(tbar), _) => tbar.derivative(),
            (None, Some(t)) => t.clone(),
            (None, None) => GridFunction::zeros(self.v0.grid),
        }
    }

    pub fn temperature_potential(&self) -> GridFunction {
        match (&self.thetabar0, &self.theta0_raw) {
            (Some(tbar), _) => tbar.clone(),
            (None, Some(t)) => t.antiderivative(),
            (None, None) => GridFunction::zeros(self.v0.grid),
        }
    }

    /// Largest one-sided oscillation of `v0`: the sup of `|v0(x) − v0(y)|`
    /// over `|x−y| ≤ ε` with `x, y` strictly on the same side of every
    /// jump. This is the roughness modulus the admissibility condition
    /// bounds.
    pub fn oscillation(&self, epsilon: f64) -> f64 {
        let grid = self.v0.grid;
        let h = grid.spacing();
        let reach = (epsilon / h).floor() as usize;
        let mut worst = 0.0_f64;
        let side = |x: f64| self.jumps.iter().filter(|&&a| x >= a).count();
        for i in 0..grid.len() {
            let xi = grid.node(i);
            for j in i + 1..(i + reach + 1).min(grid.len()) {
                if side(grid.node(j)) != side(xi) {
                    break;
                }
                worst = worst.max((self.v0.values[j] - self.v0.values[i]).abs());
            }
        }
        worst
    }
}

fn check_grid(reference: &GridFunction, candidate: &GridFunction) -> Result<()> {
    if candidate.grid != reference.grid {
        return Err(Error::Domain("initial data fields must share one grid".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn plateau_structure_is_validated() {
        let grid = Grid::symmetric(4.0, 256).unwrap();
        let eps = 0.25;
        let phi = GridFunction::from_fn(grid, |x| {
            if x >= -eps && x < 0.0 {
                1.0
            } else if x >= 0.0 && x <= eps {
                2.0
            } else if x < 0.0 {
                1.0 + 0.05 * (x + eps).sin()
            } else {
                2.0 + 0.05 * (x - eps).sin()
            }
        });
        let coeff = PiecewiseCoefficient::new(phi, vec![0.0], eps).unwrap();
        assert_eq!(coeff.plateau_limits(0), (1.0, 2.0));
        assert!(coeff.ellipticity() > 0.0 && coeff.ellipticity() <= 0.5);
        assert!(coeff.lipschitz_bound() < 0.06);
        assert_eq!(coeff.frozen_at_jump(0, -3.0), 1.0);
        assert_eq!(coeff.frozen_at_jump(0, 3.0), 2.0);

        // A ramp through the plateau is rejected.
        let bad = GridFunction::from_fn(grid, |x| 1.5 + 0.3 * x.tanh());
        assert!(PiecewiseCoefficient::new(bad, vec![0.0], eps).is_err());
        // Two jumps too close together are rejected.
        let ok = GridFunction::constant(grid, 1.0);
        assert!(PiecewiseCoefficient::new(ok, vec![0.0, 1.0], eps).is_err());
    }

    #[test]
    fn tabulated_pressure_matches_smooth_law() {
        let p = PressureModel::tabulate(|v| v.powf(-1.4), 0.4, 3.0, 801).unwrap();
        for &v in &[0.45, 0.7, 1.0, 1.37, 2.9] {
            assert_relative_eq!(p.pressure(v).unwrap(), v.powf(-1.4), max_relative = 1e-8);
        }
        // Certified bounds are close to the analytic ones on the range.
        let dp = 1.4 * 0.4_f64.powf(-2.4);
        let d2p = 1.4 * 2.4 * 0.4_f64.powf(-3.4);
        assert_relative_eq!(p.slope_bound(), dp, max_relative = 1e-2);
        assert_relative_eq!(p.curvature_bound(), d2p, max_relative = 1e-2);
        // Linear extension beyond the table keeps values finite.
        assert!(p.pressure(0.2).unwrap().is_finite());

        let ideal = PressureModel::polytropic(0.8, 2.5).unwrap();
        assert_abs_diff_eq!(ideal.pressure_thermal(2.0, 3.0), 1.2, epsilon = 1e-15);
        assert!(ideal.pressure(1.0).is_err());
        assert_eq!(ideal.heat_capacity().unwrap(), 2.5);
        assert_abs_diff_eq!(
            PressureModel::constant(7.0).pressure(123.0).unwrap(),
            7.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn initial_data_accessors_and_oscillation() {
        let grid = Grid::symmetric(2.0, 200).unwrap();
        let v0 = GridFunction::from_fn(grid, |x| if x >= 0.0 { 1.1 } else { 1.0 });
        let data = InitialData::new(v0, vec![0.0], 0.9).unwrap();
        // The jump itself does not count toward the one-sided oscillation.
        assert_abs_diff_eq!(data.oscillation(0.3), 0.0, epsilon = 1e-15);

        let ubar = GridFunction::from_fn(grid, |x| (-x * x).exp());
        let with_pot = data.clone().with_velocity_potential(ubar.clone()).unwrap();
        let u = with_pot.velocity();
        for yard in [-1.0, 0.0, 0.5] {
            let i = grid.nearest_index(yard);
            let x = grid.node(i);
            assert_abs_diff_eq!(u.values[i], -2.0 * x * (-x * x).exp(), epsilon = 1e-6);
        }
        // Raw-velocity path: potential is a numerical antiderivative.
        let with_raw = data.clone().with_velocity(u.clone()).unwrap();
        let pot = with_raw.velocity_potential();
        let base = pot.value_at(0.0) - 1.0;
        assert_abs_diff_eq!(pot.value_at(1.0) - base, (-1.0_f64).exp(), epsilon = 1e-4);

        assert!(InitialData::new(GridFunction::constant(grid, 0.5), vec![], 0.9).is_err());

        let rough = GridFunction::from_fn(grid, |x| 1.0 + 0.2 * (40.0 * x).sin());
        let rough_data = InitialData::new(rough, vec![], 0.5).unwrap();
        assert!(rough_data.oscillation(0.1) > 0.3);
    }

    #[test]
    fn linear_problem_wiring() {
        let grid = Grid::symmetric(3.0, 64).unwrap();
        let coeff = PiecewiseCoefficient::constant(grid, 2.0).unwrap();
        let fbar = GridFunction::from_fn(grid, |x| (-x * x).exp());
        let times = [0.1, 0.2, 0.4];
        let p = LinearProblem::without_forcing(coeff, fbar, &times).unwrap();
        assert_eq!(p.horizon, 0.4);
        assert_eq!(p.times(), &times);
        let f0 = p.initial_value();
        let i = grid.nearest_index(0.5);
        let x = grid.node(i);
        assert_abs_diff_eq!(f0.values[i], -2.0 * x * (-x * x).exp(), epsilon = 1e-5);
    }
}
