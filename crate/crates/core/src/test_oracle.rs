// Independent quadrature oracle for tests: tanh-sinh (double exponential)
// integration with step halving. Shares no code with `quad`.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh quadrature of `f` on `[a, b]`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let t_max = 4.0;
    let eval_pair = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        // distance from the endpoint, 1 - tanh(u), without cancellation
        let delta = 2.0 / (1.0 + (2.0 * u).exp());
        if delta * half == 0.0 {
            return 0.0;
        }
        let lo = a + half * delta;
        let hi = b - half * delta;
        w * (f(lo) + f(hi))
    };
    let mut h = 0.5;
    let mut sum = f(mid) * FRAC_PI_2;
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += eval_pair(k as f64 * h);
        k += 1;
    }
    let mut estimate = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            sum += eval_pair(k as f64 * h);
            k += 2;
        }
        let next = sum * h * half;
        if (next - estimate).abs() <= tol * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}

pub fn tanh_sinh_complex<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    let re = tanh_sinh(|x| f(x).re, a, b, tol);
    let im = tanh_sinh(|x| f(x).im, a, b, tol);
    Complex64::new(re, im)
}

/// `∫ₐ^∞ f` via `y = a + t/(1-t)`.
pub fn tanh_sinh_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    tanh_sinh(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        },
        0.0,
        1.0,
        tol,
    )
}
