//! Uniform spatial grids, grid functions, and time-indexed stacks of slices.
//!
//! Everything downstream (norms, convolutions, solvers, oracles) shares these
//! containers; they carry no solver semantics of their own.

use crate::error::{Error, Result};

/// Uniform 1-D grid: `n` nodes from `x_min` to `x_max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Grid> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::Domain(format!(
                "grid endpoints must be finite with x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 nodes, got {n}")));
        }
        Ok(Grid { x_min, x_max, n })
    }

    /// Symmetric grid `[-half_width, half_width]` with a node exactly at 0.
    pub fn symmetric(half_width: f64, nodes_per_side: usize) -> Result<Grid> {
        if half_width <= 0.0 || !half_width.is_finite() {
            return Err(Error::Domain(format!("half width must be positive, got {half_width}")));
        }
        Grid::new(-half_width, half_width, 2 * nodes_per_side + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.x_min + self.spacing() * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the node nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.spacing()).round();
        (i.max(0.0) as usize).min(self.n - 1)
    }

    /// Index of a node coinciding with `x` (to a relative tolerance), if any.
    pub fn node_at(&self, x: f64) -> Option<usize> {
        let i = self.nearest_index(x);
        if (self.node(i) - x).abs() <= 1e-9 * self.spacing().max(1.0) {
            Some(i)
        } else {
            None
        }
    }

    /// Inclusive index range of nodes lying inside `[a, b]`.
    pub fn index_window(&self, a: f64, b: f64) -> Option<(usize, usize)> {
        let h = self.spacing();
        let lo = ((a - self.x_min) / h).ceil().max(0.0) as usize;
        let hi_f = ((b - self.x_min) / h).floor();
        if hi_f < 0.0 {
            return None;
        }
        let hi = (hi_f as usize).min(self.n - 1);
        if lo > hi {
            None
        } else {
            Some((lo, hi))
        }
    }
}

/// Scalar function sampled on a [`Grid`], interpreted piecewise-linearly
/// between nodes whenever an off-node value or an integral is needed.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid function contains non-finite values".into()));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> GridFunction {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        GridFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> GridFunction {
        GridFunction { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> GridFunction {
        GridFunction { grid, values: vec![c; grid.len()] }
    }

    /// Piecewise-linear evaluation; clamps outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let h = self.grid.spacing();
        let s = (x - self.grid.x_min()) / h;
        if s <= 0.0 {
            return self.values[0];
        }
        let n = self.values.len();
        if s >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = s.floor() as usize;
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        GridFunction { grid: self.grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Trapezoid integral over the whole grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.spacing())
    }

    /// Exact integral of the piecewise-linear interpolant over
    /// `[a, b] ∩ [x_min, x_max]`.
    pub fn integral_on(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.grid.x_min());
        let b = b.min(self.grid.x_max());
        if b <= a {
            return 0.0;
        }
        let h = self.grid.spacing();
        let sa = (a - self.grid.x_min()) / h;
        let sb = (b - self.grid.x_min()) / h;
        let ia = sa.floor() as usize;
        let ib = (sb.ceil() as usize).min(self.values.len() - 1);
        let mut total = 0.0;
        for i in ia..ib {
            let cell_a = (self.grid.node(i)).max(a);
            let cell_b = (self.grid.node(i + 1)).min(b);
            if cell_b <= cell_a {
                continue;
            }
            let va = self.value_at(cell_a);
            let vb = self.value_at(cell_b);
            total += 0.5 * (va + vb) * (cell_b - cell_a);
        }
        total
    }

    /// First derivative by fourth-order centered differences (one-sided
    /// fourth-order stencils at the boundary nodes).
    pub fn derivative(&self) -> GridFunction {
        GridFunction { grid: self.grid, values: derivative4(&self.values, self.grid.spacing()) }
    }

    /// Cumulative trapezoid antiderivative vanishing at the left endpoint.
    pub fn antiderivative(&self) -> GridFunction {
        let h = self.grid.spacing();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 1..self.values.len() {
            acc += 0.5 * (self.values[i - 1] + self.values[i]) * h;
            out.push(acc);
        }
        GridFunction { grid: self.grid, values: out }
    }
}

/// Fourth-order first derivative of uniformly sampled values.
pub fn derivative4(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 5, "fourth-order differences need at least 5 nodes");
    let mut d = vec![0.0; n];
    let c = 1.0 / (12.0 * h);
    d[0] = c * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
    d[1] = c * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
    for i in 2..n - 2 {
        d[i] = c * (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]);
    }
    d[n - 2] = c * (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5]);
    d[n - 1] = c * (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4] + 3.0 * v[n - 5]);
    d
}

/// Graded time mesh `t_k = T (k/n)^q` for `k = 1..=n`: nodes accumulate at
/// `t = 0` (for `q > 1`), where weighted space-time norms put their weight.
pub fn graded_times(horizon: f64, n: usize, q: f64) -> Vec<f64> {
    assert!(horizon > 0.0 && n >= 1 && q > 0.0, "bad graded mesh parameters");
    (1..=n).map(|k| horizon * (k as f64 / n as f64).powf(q)).collect()
}

pub fn trapezoid(v: &[f64], h: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let interior: f64 = v[1..v.len() - 1].iter().sum();
    h * (interior + 0.5 * (v[0] + v[v.len() - 1]))
}

/// Function of `(t, x)` sampled on a shared grid at strictly increasing
/// positive times (typically a graded mesh accumulating at `t = 0`).
#[derive(Clone, Debug)]
pub struct SpaceTimeField {
    pub grid: Grid,
    pub times: Vec<f64>,
    /// `values[k][i]` is the sample at `(times[k], grid.node(i))`.
    pub values: Vec<Vec<f64>>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<SpaceTimeField> {
        if times.is_empty() || values.len() != times.len() {
            return Err(Error::Domain("times and slices must be non-empty and aligned".into()));
        }
        if times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("times must be strictly increasing and positive".into()));
        }
        for s in &values {
            if s.len() != grid.len() {
                return Err(Error::Domain("slice length does not match grid".into()));
            }
        }
        Ok(SpaceTimeField { grid, times, values })
    }

    pub fn from_fn(grid: Grid, times: &[f64], f: impl Fn(f64, f64) -> f64) -> SpaceTimeField {
        let values = times
            .iter()
            .map(|&t| (0..grid.len()).map(|i| f(t, grid.node(i))).collect())
            .collect();
        SpaceTimeField { grid, times: times.to_vec(), values }
    }

    pub fn zeros(grid: Grid, times: &[f64]) -> SpaceTimeField {
        SpaceTimeField {
            grid,
            times: times.to_vec(),
            values: vec![vec![0.0; grid.len()]; times.len()],
        }
    }

    pub fn num_times(&self) -> usize {
        self.times.len()
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn slice_fn(&self, k: usize) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values[k].clone() }
    }

    pub fn final_slice(&self) -> GridFunction {
        self.slice_fn(self.times.len() - 1)
    }

    /// Linear interpolation in time; clamps to the first/last slice outside
    /// the sampled range (in particular on `(0, times[0])`).
    pub fn sample_time(&self, t: f64) -> Vec<f64> {
        if t <= self.times[0] {
            return self.values[0].clone();
        }
        let last = self.times.len() - 1;
        if t >= self.times[last] {
            return self.values[last].clone();
        }
        let k = self.times.partition_point(|&s| s < t) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        self.values[k]
            .iter()
            .zip(&self.values[k + 1])
            .map(|(&a, &b)| a * (1.0 - w) + b * w)
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpaceTimeField {
        SpaceTimeField {
            grid: self.grid,
            times: self.times.clone(),
            values: self.values.iter().map(|s| s.iter().map(|&v| f(v)).collect()).collect(),
        }
    }

    pub fn zip_with(&self, other: &SpaceTimeField, f: impl Fn(f64, f64) -> f64) -> SpaceTimeField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.times.len(), other.times.len(), "time mesh mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        SpaceTimeField { grid: self.grid, times: self.times.clone(), values }
    }

    /// Slice-wise fourth-order spatial derivative.
    pub fn dx(&self) -> SpaceTimeField {
        SpaceTimeField {
            grid: self.grid,
            times: self.times.clone(),
            values: self.values.iter().map(|s| derivative4(s, self.grid.spacing())).collect(),
        }
    }

    /// Running time integral `∫_0^{t_k} f(s, ·) ds` on the field's own mesh:
    /// the leading cell `(0, t_0]` uses the first slice, later cells the
    /// trapezoid rule.
    pub fn time_integral(&self) -> SpaceTimeField {
        let n = self.grid.len();
        let mut out = Vec::with_capacity(self.times.len());
        let mut acc: Vec<f64> = self.values[0].iter().map(|v| v * self.times[0]).collect();
        out.push(acc.clone());
        for k in 1..self.times.len() {
            let dt = self.times[k] - self.times[k - 1];
            for i in 0..n {
                acc[i] += 0.5 * (self.values[k - 1][i] + self.values[k][i]) * dt;
            }
            out.push(acc.clone());
        }
        SpaceTimeField { grid: self.grid, times: self.times.clone(), values: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_basics() {
        let g = Grid::new(-2.0, 2.0, 5).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.node(3), 1.0);
        assert_eq!(g.nearest_index(0.6), 3);
        assert_eq!(g.node_at(1.0), Some(3));
        assert_eq!(g.node_at(0.5), None);
        assert_eq!(g.index_window(-0.5, 1.7), Some((2, 3)));
        assert!(Grid::new(0.0, 0.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn symmetric_grid_has_zero_node() {
        let g = Grid::symmetric(3.0, 64).unwrap();
        assert_eq!(g.node_at(0.0), Some(64));
        assert_abs_diff_eq!(g.node(64), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn interpolation_and_integrals() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let f = GridFunction::from_fn(g, |x| 3.0 * x);
        assert_abs_diff_eq!(f.value_at(0.505), 1.515, epsilon = 1e-12);
        // Linear functions integrate exactly under the trapezoid rule.
        assert_abs_diff_eq!(f.integral(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.integral_on(0.25, 0.75), 0.75, epsilon = 1e-12);
        // Off-node cut points.
        assert_abs_diff_eq!(f.integral_on(0.101, 0.899), 1.5 * (0.899f64.powi(2) - 0.101f64.powi(2)), epsilon = 1e-12);
    }

    #[test]
    fn derivative_is_fourth_order() {
        // Interior order from the centered stencil; the one-sided edge
        // stencils are also fourth order but with a larger constant, so the
        // boundary check is a plain accuracy bound at the finer grid.
        let mut interior_errs = Vec::new();
        let mut edge_err = 0.0_f64;
        for &n in &[33usize, 65] {
            let g = Grid::new(-1.0, 1.0, n).unwrap();
            let f = GridFunction::from_fn(g, |x| (2.0 * x).sin());
            let d = f.derivative();
            let err_at = |i: usize| (d.values[i] - 2.0 * (2.0 * g.node(i)).cos()).abs();
            interior_errs.push((2..n - 2).map(err_at).fold(0.0_f64, f64::max));
            edge_err = [0, 1, n - 2, n - 1].iter().map(|&i| err_at(i)).fold(0.0_f64, f64::max);
        }
        let order = (interior_errs[0] / interior_errs[1]).log2();
        assert!(order > 3.7, "observed order {order}, errors {interior_errs:?}");
        assert!(edge_err < 1e-4, "edge error {edge_err}");
    }

    #[test]
    fn time_integral_accumulates() {
        let g = Grid::new(0.0, 1.0, 8).unwrap();
        let times = vec![0.25, 0.5, 1.0];
        let f = SpaceTimeField::from_fn(g, &times, |_t, _x| 1.0);
        let v = f.time_integral();
        assert_abs_diff_eq!(v.values[2][3], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.values[0][0], 0.25, epsilon = 1e-14);
    }

    #[test]
    fn sample_time_interpolates_and_clamps() {
        let g = Grid::new(0.0, 1.0, 4).unwrap();
        let times = vec![0.5, 1.0];
        let f = SpaceTimeField::from_fn(g, &times, |t, _x| t * t);
        assert_abs_diff_eq!(f.sample_time(0.75)[0], 0.625, epsilon = 1e-14);
        assert_abs_diff_eq!(f.sample_time(0.1)[0], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(f.sample_time(2.0)[0], 1.0, epsilon = 1e-14);
    }
}
