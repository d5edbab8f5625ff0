//! Classical fixed-step fourth-order Runge–Kutta for autonomous systems.

use nalgebra::{Matrix4, Vector2};
use num_complex::Complex64;

/// State vector of an autonomous ODE `y' = f(y)`.
pub trait OdeState: Clone {
    /// Returns `self + h * k`.
    fn add_scaled(&self, k: &Self, h: f64) -> Self;
}

impl OdeState for Matrix4<Complex64> {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        self + k * Complex64::from(h)
    }
}

impl OdeState for Vector2<Complex64> {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        self + k * Complex64::from(h)
    }
}

/// Advances `y` by one RK4 step of size `h`.
pub fn rk4_step<S, F>(f: &F, y: &S, h: f64) -> S
where
    S: OdeState,
    F: Fn(&S) -> S,
{
    let k1 = f(y);
    let k2 = f(&y.add_scaled(&k1, 0.5 * h));
    let k3 = f(&y.add_scaled(&k2, 0.5 * h));
    let k4 = f(&y.add_scaled(&k3, h));
    y.add_scaled(&k1, h / 6.0)
        .add_scaled(&k2, h / 3.0)
        .add_scaled(&k3, h / 3.0)
        .add_scaled(&k4, h / 6.0)
}

/// Splits `[0, span]` into the smallest number of equal steps no longer than
/// `max_step`. Returns `(count, step)`; a zero span yields no steps.
pub fn uniform_steps(span: f64, max_step: f64) -> (usize, f64) {
    if span <= 0.0 {
        return (0, 0.0);
    }
    // Tolerate rounding in span/max_step so that e.g. 30 / 1e-3 is 30000 steps.
    let ratio = span / max_step;
    let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    };
    let n = (n as usize).max(1);
    (n, span / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        // y' = λy with complex λ; compare global errors at two step sizes.
        let lambda = Complex64::new(-0.7, 2.0);
        let f = |y: &Vector2<Complex64>| y * lambda;
        let y0 = Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0));
        let exact = y0 * (lambda * 2.0).exp();
        let mut errors = Vec::new();
        for &n in &[100usize, 200] {
            let h = 2.0 / n as f64;
            let mut y = y0;
            for _ in 0..n {
                y = rk4_step(&f, &y, h);
            }
            errors.push((y - exact).norm());
        }
        let ratio = errors[0] / errors[1];
        assert!((ratio - 16.0).abs() < 1.0, "convergence ratio {ratio}");
    }

    #[test]
    fn step_partition() {
        assert_eq!(uniform_steps(0.0, 0.1), (0, 0.0));
        let (n, h) = uniform_steps(30.0, 1e-3);
        assert_eq!(n, 30_000);
        assert!((h - 1e-3).abs() < 1e-15);
        let (n, h) = uniform_steps(1.0, 0.3);
        assert_eq!(n, 4);
        assert!((h - 0.25).abs() < 1e-15);
    }
}
