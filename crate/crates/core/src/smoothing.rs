//! Spatial convolution of grid profiles against the heat-kernel family.
//!
//! Five kernel shapes cover everything the solvers need: `K(s,·)` and its
//! first two spatial derivatives for data terms, and the exact time
//! integrals `E(u,z) = ∫_0^u K(s,z) ds`, `J(u,z) = ∫_0^u ∂_zK(s,z) ds` that
//! product integration of Duhamel terms produces on each time subinterval.
//!
//! Profiles are piecewise linear with constant tails, and convolutions
//! integrate the interpolant against the kernel exactly, cell by cell, via
//! closed-form antiderivatives — node evaluation amortizes the kernel
//! evaluations into a lattice table, so the exactness costs no more than
//! sampling. Tail contributions beyond the stored data are integrated in
//! closed form, and the truncation radius is 12 standard deviations
//! throughout.

use crate::grid::Grid;
use crate::kernel::heat_kernel;
use crate::special::{erf, erfc};

/// Kernel shape for a convolution pass.
#[derive(Clone, Copy, Debug)]
pub enum KernelShape {
    /// `K(s, z)`
    Gauss { s: f64 },
    /// `∂_z K(s, z)`
    DGauss { s: f64 },
    /// `∂_z² K(s, z)`
    D2Gauss { s: f64 },
    /// `E(u, z) = ∫_0^u K(s, z) ds`
    TimeGauss { u: f64 },
    /// `J(u, z) = ∫_0^u ∂_z K(s, z) ds` (jump of height −1 across z = 0)
    TimeDGauss { u: f64 },
}

fn dgauss(s: f64, z: f64) -> f64 {
    -z / (2.0 * s) * heat_kernel(s, z)
}

fn d2gauss(s: f64, z: f64) -> f64 {
    (z * z / (4.0 * s * s) - 0.5 / s) * heat_kernel(s, z)
}

impl KernelShape {
    fn time_scale(&self) -> f64 {
        match *self {
            KernelShape::Gauss { s } | KernelShape::DGauss { s } | KernelShape::D2Gauss { s } => s,
            KernelShape::TimeGauss { u } | KernelShape::TimeDGauss { u } => u,
        }
    }

    /// Standard deviation of the underlying Gaussian scale.
    pub fn width(&self) -> f64 {
        (2.0 * self.time_scale()).sqrt()
    }

    /// Kernel value; odd kernels use the principal-value convention 0 at z=0.
    pub fn value(&self, z: f64) -> f64 {
        match *self {
            KernelShape::Gauss { s } => heat_kernel(s, z),
            KernelShape::DGauss { s } => dgauss(s, z),
            KernelShape::D2Gauss { s } => d2gauss(s, z),
            KernelShape::TimeGauss { u } => {
                let beta = 0.5 / u.sqrt();
                (u / std::f64::consts::PI).sqrt() * (-beta * beta * z * z).exp()
                    - 0.5 * z.abs() * erfc(z.abs() * beta)
            }
            KernelShape::TimeDGauss { u } => {
                if z == 0.0 {
                    0.0
                } else {
                    let beta = 0.5 / u.sqrt();
                    -0.5 * z.signum() * erfc(z.abs() * beta)
                }
            }
        }
    }

    /// Antiderivative `A(z) = ∫ κ` (defined up to a constant; differences and
    /// the explicit tail limits below are what get used).
    fn integral(&self, z: f64) -> f64 {
        match *self {
            KernelShape::Gauss { s } => 0.5 * erf(z * 0.5 / s.sqrt()),
            KernelShape::DGauss { s } => heat_kernel(s, z),
            KernelShape::D2Gauss { s } => dgauss(s, z),
            KernelShape::TimeGauss { u } => {
                let beta = 0.5 / u.sqrt();
                0.5 * u * erf(beta * z) - z.signum() * 0.25 * z * z * erfc(z.abs() * beta)
                    + 0.5 * z * (u / std::f64::consts::PI).sqrt() * (-beta * beta * z * z).exp()
            }
            KernelShape::TimeDGauss { u } => {
                let beta = 0.5 / u.sqrt();
                -0.5 * z.abs() * erfc(z.abs() * beta)
                    + (u / std::f64::consts::PI).sqrt() * (-beta * beta * z * z).exp()
            }
        }
    }

    /// First-moment antiderivative `B(z) = ∫ z κ(z) dz`.
    fn first_moment(&self, z: f64) -> f64 {
        match *self {
            KernelShape::Gauss { s } => -2.0 * s * heat_kernel(s, z),
            KernelShape::DGauss { s } => z * heat_kernel(s, z) - 0.5 * erf(z * 0.5 / s.sqrt()),
            KernelShape::D2Gauss { s } => z * dgauss(s, z) - heat_kernel(s, z),
            KernelShape::TimeGauss { u } => {
                // z ↦ z·E is odd, so its antiderivative is even: no sign factor.
                let beta = 0.5 / u.sqrt();
                let za = z.abs();
                -za.powi(3) / 6.0 * erfc(za * beta)
                    + (u / std::f64::consts::PI).sqrt() / 3.0
                        * (z * z - 2.0 * u)
                        * (-beta * beta * z * z).exp()
            }
            KernelShape::TimeDGauss { u } => {
                let beta = 0.5 / u.sqrt();
                -z.signum() * 0.25 * z * z * erfc(z.abs() * beta) - 0.5 * u * erf(beta * z)
                    + 0.5 * z * (u / std::f64::consts::PI).sqrt() * (-beta * beta * z * z).exp()
            }
        }
    }

    /// `∫_{z1}^{∞} κ(z) dz` in cancellation-free form.
    fn upper_tail(&self, z1: f64) -> f64 {
        match *self {
            KernelShape::Gauss { s } => 0.5 * erfc(z1 * 0.5 / s.sqrt()),
            KernelShape::DGauss { s } => -heat_kernel(s, z1),
            KernelShape::D2Gauss { s } => -dgauss(s, z1),
            KernelShape::TimeGauss { u } => {
                // A(∞) = u/2.
                let beta = 0.5 / u.sqrt();
                0.5 * u * erfc(beta * z1) + z1.signum() * 0.25 * z1 * z1 * erfc(z1.abs() * beta)
                    - 0.5 * z1 * (u / std::f64::consts::PI).sqrt() * (-beta * beta * z1 * z1).exp()
            }
            KernelShape::TimeDGauss { .. } => -self.integral(z1), // A(∞) = 0
        }
    }

    /// `∫_{-∞}^{z1} κ(z) dz` in cancellation-free form.
    fn lower_tail(&self, z1: f64) -> f64 {
        match *self {
            KernelShape::Gauss { s } => 0.5 * erfc(-z1 * 0.5 / s.sqrt()),
            KernelShape::DGauss { s } => heat_kernel(s, z1),
            KernelShape::D2Gauss { s } => dgauss(s, z1),
            KernelShape::TimeGauss { u } => {
                // A(-∞) = -u/2.
                let beta = 0.5 / u.sqrt();
                0.5 * u * erfc(-beta * z1) - z1.signum() * 0.25 * z1 * z1 * erfc(z1.abs() * beta)
                    + 0.5 * z1 * (u / std::f64::consts::PI).sqrt() * (-beta * beta * z1 * z1).exp()
            }
            KernelShape::TimeDGauss { .. } => self.integral(z1), // A(-∞) = 0
        }
    }

}

/// Piecewise-linear profile on a grid, constant beyond both ends.
#[derive(Clone, Copy, Debug)]
pub struct Profile<'a> {
    pub grid: Grid,
    pub values: &'a [f64],
    pub tail_left: f64,
    pub tail_right: f64,
}

impl<'a> Profile<'a> {
    pub fn new(grid: Grid, values: &'a [f64]) -> Profile<'a> {
        assert_eq!(grid.len(), values.len(), "profile length mismatch");
        Profile { grid, values, tail_left: values[0], tail_right: values[values.len() - 1] }
    }

    pub fn with_tails(grid: Grid, values: &'a [f64], tail_left: f64, tail_right: f64) -> Profile<'a> {
        assert_eq!(grid.len(), values.len(), "profile length mismatch");
        Profile { grid, values, tail_left, tail_right }
    }
}

/// Where to evaluate a convolution.
#[derive(Clone, Debug)]
pub enum EvalSet {
    AllNodes,
    /// Inclusive node index range.
    Window(usize, usize),
    /// Arbitrary points (always evaluated by the exact cell-by-cell path).
    Points(Vec<f64>),
}

/// Truncation radius: 12 standard deviations of the kernel scale, never less
/// than a few cells.
fn cutoff_radius(kernel: &KernelShape, h: f64) -> f64 {
    (12.0 * kernel.width()).max(4.0 * h)
}

/// `(κ * profile)(x)` for every requested evaluation point.
pub fn convolve(kernel: KernelShape, profile: &Profile, eval: &EvalSet) -> Vec<f64> {
    match eval {
        EvalSet::Points(points) => points.iter().map(|&x| convolve_exact_at(kernel, profile, x)).collect(),
        EvalSet::AllNodes => convolve_nodes(kernel, profile, 0, profile.grid.len() - 1),
        EvalSet::Window(lo, hi) => convolve_nodes(kernel, profile, *lo, *hi),
    }
}

fn convolve_nodes(kernel: KernelShape, profile: &Profile, lo: usize, hi: usize) -> Vec<f64> {
    assert!(hi < profile.grid.len() && lo <= hi, "evaluation window out of range");
    convolve_lattice(kernel, profile, lo, hi)
}

/// Exact convolution of the piecewise-linear interpolant (plus tails) with
/// the kernel, via closed-form cell integrals. Used for narrow kernels and
/// off-node evaluation points.
fn convolve_exact_at(kernel: KernelShape, profile: &Profile, x: f64) -> f64 {
    let g = profile.grid;
    let h = g.spacing();
    let n = g.len();
    let radius = cutoff_radius(&kernel, h);
    let y0 = g.x_min();
    let y_last = g.x_max();

    let mut total = 0.0;
    // Tails: y < y0 contributes tail_left over z ∈ (x - y0, ∞), y > y_last
    // contributes tail_right over z ∈ (-∞, x - y_last).
    total += profile.tail_left * kernel.upper_tail(x - y0);
    total += profile.tail_right * kernel.lower_tail(x - y_last);

    // Cells overlapping [x - radius, x + radius].
    let first = (((x - radius) - y0) / h).floor().max(0.0) as usize;
    let last = ((((x + radius) - y0) / h).ceil() as usize).min(n - 1);
    if first >= last {
        return total;
    }
    let mut a_hi = kernel.integral(x - g.node(first));
    let mut b_hi = kernel.first_moment(x - g.node(first));
    for i in first..last {
        let z_lo = x - g.node(i + 1);
        let a_lo = kernel.integral(z_lo);
        let b_lo = kernel.first_moment(z_lo);
        let slope = (profile.values[i + 1] - profile.values[i]) / h;
        let base = profile.values[i] + slope * (x - g.node(i));
        total += base * (a_hi - a_lo) - slope * (b_hi - b_lo);
        a_hi = a_lo;
        b_hi = b_lo;
    }
    total
}

/// Exact convolution at grid nodes. Node evaluation only ever needs the
/// kernel antiderivatives at lattice offsets `o·h`, so they are tabulated
/// once and every node becomes a short dot product over the cells within the
/// truncation radius. The result equals [`convolve_exact_at`] to rounding,
/// at sampling cost.
fn convolve_lattice(kernel: KernelShape, profile: &Profile, lo: usize, hi: usize) -> Vec<f64> {
    let g = profile.grid;
    let h = g.spacing();
    let n = g.len();
    let w = (cutoff_radius(&kernel, h) / h).ceil() as i64;

    // integral / first_moment at offsets o·h for o in [-w-1, w+1].
    let table: Vec<(f64, f64)> = (-w - 1..=w + 1)
        .map(|o| {
            let z = o as f64 * h;
            (kernel.integral(z), kernel.first_moment(z))
        })
        .collect();
    let at = |o: i64| table[(o + w + 1) as usize];

    let mut out = Vec::with_capacity(hi - lo + 1);
    for q in lo..=hi {
        let x = g.node(q);
        let qi = q as i64;
        let mut total = profile.tail_left * kernel.upper_tail(x - g.x_min())
            + profile.tail_right * kernel.lower_tail(x - g.x_max());
        // Cell i spans z ∈ [(q-i-1)h, (q-i)h]; keep cells within the radius.
        let i_lo = (qi - w - 1).max(0) as usize;
        let i_hi = (qi + w).min(n as i64 - 2) as usize;
        for i in i_lo..=i_hi {
            let o = qi - i as i64;
            let (a_hi, b_hi) = at(o);
            let (a_lo, b_lo) = at(o - 1);
            let slope = (profile.values[i + 1] - profile.values[i]) / h;
            let base = profile.values[i] + slope * (o as f64 * h);
            total += base * (a_hi - a_lo) - slope * (b_hi - b_lo);
        }
        out.push(total);
    }
    out
}

/// Convenience wrapper: `(∂^m K(s,·) * profile)` at all nodes.
pub fn gauss_smooth(profile: &Profile, s: f64, m: usize) -> Vec<f64> {
    let kernel = match m {
        0 => KernelShape::Gauss { s },
        1 => KernelShape::DGauss { s },
        2 => KernelShape::D2Gauss { s },
        _ => panic!("gauss_smooth supports m <= 2"),
    };
    convolve(kernel, profile, &EvalSet::AllNodes)
}
