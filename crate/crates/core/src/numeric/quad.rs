//! Thin wrappers around double-exponential quadrature for the ranges the physics needs.

use quadrature::double_exponential;

/// ∫_a^b f.
pub fn finite(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    double_exponential::integrate(f, a, b, tol).integral
}

/// ∫_a^∞ f via x = a + s/(1 − s).
pub fn to_infinity(f: impl Fn(f64) -> f64, a: f64, tol: f64) -> f64 {
    let g = |s: f64| {
        let one_m = 1.0 - s;
        let v = f(a + s / one_m) / (one_m * one_m);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    double_exponential::integrate(g, 0.0, 1.0, tol).integral
}

/// ∫_{−∞}^{∞} f split at `center`.
pub fn real_line(f: impl Fn(f64) -> f64, center: f64, tol: f64) -> f64 {
    to_infinity(&f, center, tol) + to_infinity(|x| f(2.0 * center - x), center, tol)
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(ys: &[f64], h: f64) -> f64 {
    match ys.len() {
        0 | 1 => 0.0,
        n => h * (ys[1..n - 1].iter().sum::<f64>() + 0.5 * (ys[0] + ys[n - 1])),
    }
}

/// Trapezoid rule for `f` on `n` uniform points over `[a, b]`.
pub fn trapezoid_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2);
    let h = (b - a) / (n - 1) as f64;
    let ys: Vec<f64> = (0..n).map(|k| f(a + h * k as f64)).collect();
    trapezoid(&ys, h)
}
