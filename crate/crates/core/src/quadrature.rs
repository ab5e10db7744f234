//! Numerical quadrature: adaptive Gauss-Legendre on an interval and the
//! periodic trapezoid rule.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::{Error, Result};

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Roots of P_n are found by Newton iteration from the Chebyshev guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n(x) and P_{n-1}(x).
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const PANEL_ORDER: usize = 10;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

fn panel<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> T {
    let (nodes, weights) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = T::zero();
    for (x, w) in nodes.iter().zip(weights) {
        acc = acc + f(mid + half * x) * (w * half);
    }
    acc
}

/// Options for [`adaptive_gauss_legendre`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Absolute error tolerance on the whole integral.
    pub abs_tol: f64,
    /// Maximum number of accepted plus pending panels.
    pub max_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            max_panels: 1 << 14,
        }
    }
}

/// Integral estimate with the number of panels used.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Integrates `f` over `[a, b]` by recursive bisection of 10-point
/// Gauss-Legendre panels.
///
/// A panel is accepted when the single-panel estimate and the sum over its
/// two halves differ by less than its share of `abs_tol` (proportional to its
/// width).
pub fn adaptive_gauss_legendre<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
) -> Result<Integral<T>> {
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            error_estimate: 0.0,
            panels: 0,
        });
    }
    let span = (b - a).abs();
    let mut total = T::zero();
    let mut err_total = 0.0;
    let mut accepted = 0usize;
    // Stack of (a, b, estimate over [a, b]).
    let whole = panel(&mut f, a, b);
    let mut stack = vec![(a, b, whole)];
    while let Some((lo, hi, coarse)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(&mut f, lo, mid);
        let right = panel(&mut f, mid, hi);
        let fine = left + right;
        let diff = (fine - coarse).magnitude();
        let share = opts.abs_tol * (hi - lo).abs() / span;
        // Stop splitting once the panel width is at floating-point resolution.
        let unsplittable = mid <= lo.min(hi) || mid >= lo.max(hi);
        if diff <= share || unsplittable {
            total = total + fine;
            err_total += diff;
            accepted += 1;
            continue;
        }
        if accepted + stack.len() + 2 > opts.max_panels {
            return Err(Error::QuadratureNonConvergence {
                tolerance: opts.abs_tol,
                max_panels: opts.max_panels,
                estimate: err_total + diff,
            });
        }
        stack.push((mid, hi, right));
        stack.push((lo, mid, left));
    }
    Ok(Integral {
        value: total,
        error_estimate: err_total,
        panels: accepted,
    })
}

/// Trapezoid rule for a `2π`-periodic integrand over one period with `n`
/// equally spaced nodes. Exact for trigonometric polynomials of degree < `n`.
pub fn periodic_trapezoid<T: QuadValue>(mut f: impl FnMut(f64) -> T, n: usize) -> T {
    let h = std::f64::consts::TAU / n as f64;
    let mut acc = T::zero();
    for k in 0..n {
        acc = acc + f(k as f64 * h);
    }
    acc * h
}

/// Periodic trapezoid with node doubling from 8 until two successive
/// estimates agree to `abs_tol` (at most 1024 nodes).
pub fn periodic_trapezoid_converged<T: QuadValue>(mut f: impl FnMut(f64) -> T, abs_tol: f64) -> T {
    let mut n = 8;
    let mut prev = periodic_trapezoid(&mut f, n);
    while n < 1024 {
        n *= 2;
        let next = periodic_trapezoid(&mut f, n);
        if (next - prev).magnitude() <= abs_tol {
            return next;
        }
        prev = next;
    }
    prev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 10, 20] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}: {s}");
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        // n points integrate x^(2n-1) and x^(2n-2) exactly.
        let (x, w) = gauss_legendre(5);
        let i8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((i8 - 2.0 / 9.0).abs() < 1e-14);
        let i9: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!(i9.abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫_0^1 1/(1e-4 + x^2) dx = atan(100)/1e-2
        let exact = (100.0f64).atan() * 100.0;
        let r = adaptive_gauss_legendre(|x: f64| 1.0 / (1e-4 + x * x), 0.0, 1.0, AdaptiveOptions::default()).unwrap();
        assert!((r.value - exact).abs() < 1e-8, "{} vs {}", r.value, exact);
        assert!(r.panels > 1);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let opts = AdaptiveOptions {
            abs_tol: 1e-14,
            max_panels: 4,
        };
        let r = adaptive_gauss_legendre(|x: f64| (1.0 / (x + 1e-9)).sin(), 0.0, 1.0, opts);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn adaptive_complex_and_reversed_bounds() {
        let r = adaptive_gauss_legendre(|x: f64| Complex64::new(x.cos(), x.sin()), 0.0, 1.0, AdaptiveOptions::default()).unwrap();
        assert!((r.value.re - 1f64.sin()).abs() < 1e-12);
        assert!((r.value.im - (1.0 - 1f64.cos())).abs() < 1e-12);
        let back = adaptive_gauss_legendre(|x: f64| x, 1.0, 0.0, AdaptiveOptions::default()).unwrap();
        assert!((back.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn periodic_trapezoid_is_spectral() {
        let v = periodic_trapezoid(|p: f64| p.cos().powi(2), 8);
        assert!((v - std::f64::consts::PI).abs() < 1e-14);
        let z = periodic_trapezoid(|p: f64| Complex64::new(p.cos(), p.sin()), 8);
        assert!(z.norm() < 1e-14);
    }
}
