//! Small special-function helpers shared across the crate.

use std::sync::OnceLock;

pub use libm::{erf, erfc};


/// `exp(-1/s)` for `s > 0`, extended by `0` for `s <= 0`; the standard
/// building block for compactly supported smooth functions.
pub fn bump_seed(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Smooth monotone transition: `0` for `s <= 0`, `1` for `s >= 1`.
pub fn smoothstep(s: f64) -> f64 {
    let a = bump_seed(s);
    let b = bump_seed(1.0 - s);
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

/// Smooth cutoff equal to `1` on `[z-1, z+1]`, `0` outside `[z-2, z+2]`.
pub fn cutoff_window(x: f64, z: f64) -> f64 {
    smoothstep(2.0 - (x - z).abs())
}

fn mollifier_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        // ∫_{-1}^{1} exp(-1/(1-r^2)) dr by a fine midpoint rule; the integrand
        // is smooth and vanishes to all orders at the endpoints.
        let n = 200_000;
        let h = 2.0 / n as f64;
        (0..n).map(|i| bump_seed(1.0 - (-1.0 + (i as f64 + 0.5) * h).powi(2))).sum::<f64>() * h
    })
}

/// Standard mollifier of width `eta`: supported on `[-eta, eta]`, unit mass.
pub fn mollifier(x: f64, eta: f64) -> f64 {
    assert!(eta > 0.0);
    let r = x / eta;
    bump_seed(1.0 - r * r) / (mollifier_mass() * eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn smoothstep_endpoints_and_monotonicity() {
        assert_eq!(smoothstep(-0.2), 0.0);
        assert_eq!(smoothstep(1.3), 1.0);
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = smoothstep(i as f64 / 100.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert_abs_diff_eq!(smoothstep(0.5), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn cutoff_plateau_and_support() {
        assert_eq!(cutoff_window(0.3, 0.0), 1.0);
        assert_eq!(cutoff_window(-1.0, 0.0), 1.0);
        assert_eq!(cutoff_window(2.5, 0.0), 0.0);
        let v = cutoff_window(1.5, 0.0);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn mollifier_has_unit_mass() {
        let eta = 0.37;
        let n = 40_000;
        let h = 2.0 * eta / n as f64;
        let mass: f64 =
            (0..n).map(|i| mollifier(-eta + (i as f64 + 0.5) * h, eta)).sum::<f64>() * h;
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);
    }
}
