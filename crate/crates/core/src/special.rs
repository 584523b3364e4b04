//! Special functions used by the GTS formulas: gamma, the upper incomplete
//! gamma function for orders in (-1, 1), and a few complex helpers that keep
//! small-argument differences like `(1+z)^b - 1` accurate.

use num_complex::Complex64;
use statrs::function::gamma as sgamma;

use crate::error::{GtsError, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Coefficients of `1/Γ(z) = Σ c_k z^k` (k = 1..26).
const RECIP_GAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

pub fn gamma(x: f64) -> f64 {
    sgamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

/// `(Γ(1+s) - 1) / s`, accurate as `s -> 0` (limit `-γ_E`).
fn gamma1p_m1_over_s(s: f64) -> f64 {
    if s.abs() < 0.5 {
        // 1/Γ(1+s) = 1 + s·q(s)
        let mut q = 0.0;
        for c in RECIP_GAMMA[1..].iter().rev() {
            q = q * s + c;
        }
        -q * gamma(1.0 + s)
    } else {
        (gamma(1.0 + s) - 1.0) / s
    }
}

/// Upper incomplete gamma `Γ(s, x) = ∫ₓ^∞ y^{s-1} e^{-y} dy` for `s ∈ (-1, 1)`
/// and `x > 0`. `s = 0` gives the exponential integral `E₁(x)`.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(GtsError::Domain(format!("incomplete gamma needs x > 0, got {x}")));
    }
    if !(s > -1.0 && s < 1.0) {
        return Err(GtsError::Domain(format!(
            "incomplete gamma order must lie in (-1, 1), got {s}"
        )));
    }
    Ok(upper_gamma_unchecked(s, x))
}

fn upper_gamma_unchecked(s: f64, x: f64) -> f64 {
    if x >= 1.5 {
        return upper_gamma_cf(s, x);
    }
    if s < -0.5 {
        // upward recurrence from Γ(s+1, x)
        let next = upper_gamma_series(s + 1.0, x);
        return (next - x.powf(s) * (-x).exp()) / s;
    }
    upper_gamma_series(s, x)
}

/// Small-x series, written so that every piece stays finite and accurate as
/// `s -> 0`:
/// `Γ(s,x) = (Γ(1+s)-1)/s - (x^s-1)/s - x^s Σ_{n≥1} (-x)^n / (n! (s+n))`.
fn upper_gamma_series(s: f64, x: f64) -> f64 {
    let lx = x.ln();
    let xs = (s * lx).exp();
    let xs_m1_over_s = if s == 0.0 { lx } else { lx * exprel_real(s * lx) };
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..200 {
        let nf = n as f64;
        term *= -x / nf;
        let add = term / (s + nf);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    gamma1p_m1_over_s(s) - xs_m1_over_s - xs * sum
}

/// Legendre continued fraction, evaluated with the modified Lentz method.
fn upper_gamma_cf(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let fi = i as f64;
        let an = -fi * (fi - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + s * x.ln()).exp() * h
}

/// Lower incomplete gamma `γ(a, x)` for `a ∈ (0, 2)` and `x ≥ 0`.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a < 2.0) || !(x >= 0.0) {
        return Err(GtsError::Domain(format!("lower incomplete gamma at a={a}, x={x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        Ok(sum * (-x + a * x.ln()).exp())
    } else {
        Ok(gamma(a) - upper_gamma_cf(a, x))
    }
}

/// `(e^x - 1) / x` with the removable point at zero.
pub fn exprel_real(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x / 2.0 + x * x / 6.0
    } else {
        x.exp_m1() / x
    }
}

/// `ln(1 + z)` without cancellation for small `|z|`.
pub fn ln_1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * z.re + z.re * z.re + z.im * z.im).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

/// `e^z - 1` without cancellation for small `|z|`.
pub fn exp_m1(z: Complex64) -> Complex64 {
    let half = (0.5 * z.im).sin();
    let re = z.re.exp_m1() * z.im.cos() - 2.0 * half * half;
    let im = z.re.exp() * z.im.sin();
    Complex64::new(re, im)
}

/// `(e^z - 1) / z`, equal to 1 at the origin.
pub fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) + z / 2.0 + z2 / 6.0 + z2 * z / 24.0 + z2 * z2 / 120.0
    } else {
        exp_m1(z) / z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quad_oracle(s: f64, x: f64) -> f64 {
        crate::test_oracle::tanh_sinh_to_inf(|y| y.powf(s - 1.0) * (-y).exp(), x, 1e-14)
    }

    #[test]
    fn half_order_matches_erfc() {
        let v = upper_incomplete_gamma(0.5, 1.0).unwrap();
        assert_relative_eq!(v, 0.278_805_585_280_662_0, max_relative = 1e-12);
        assert_relative_eq!(v, quad_oracle(0.5, 1.0), max_relative = 1e-12);
    }

    #[test]
    fn negative_half_from_recurrence() {
        let v = upper_incomplete_gamma(-0.5, 1.0).unwrap();
        let expected = (0.278_805_585_280_662_0 - (-1.0f64).exp()) / -0.5;
        assert_relative_eq!(v, expected, max_relative = 1e-12);
        assert!((v - 0.178148).abs() < 1e-6);
    }

    #[test]
    fn matches_quadrature_over_order_and_argument() {
        for &s in &[-0.95, -0.75, -0.5, -0.3, -0.01, -1e-7, 0.0, 1e-7, 0.2, 0.5, 0.9] {
            for &x in &[1e-4, 0.05, 0.3, 0.9, 1.4, 1.6, 3.0, 10.0, 40.0] {
                let v = upper_incomplete_gamma(s, x).unwrap();
                let o = quad_oracle(s, x);
                assert_relative_eq!(v, o, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn zero_order_is_exponential_integral() {
        // E1(1) = 0.219383934395520...
        assert_relative_eq!(
            upper_incomplete_gamma(0.0, 1.0).unwrap(),
            0.219_383_934_395_520_3,
            max_relative = 1e-13
        );
    }

    #[test]
    fn leading_asymptotic_term_for_large_x() {
        for &s in &[-0.7, 0.0, 0.4] {
            let x = 500.0;
            let ratio = upper_incomplete_gamma(s, x).unwrap() / (x.powf(s - 1.0) * (-x).exp());
            assert!((ratio - 1.0).abs() < 4.0 / x, "s={s} ratio={ratio}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(upper_incomplete_gamma(0.5, 0.0).is_err());
        assert!(upper_incomplete_gamma(0.5, -1.0).is_err());
        assert!(upper_incomplete_gamma(1.0, 1.0).is_err());
        assert!(upper_incomplete_gamma(-1.0, 1.0).is_err());
    }

    #[test]
    fn lower_plus_upper_is_complete() {
        for &a in &[0.3, 0.75, 1.0] {
            for &x in &[0.2, 0.8, 2.5, 7.0] {
                let lo = lower_incomplete_gamma(a, x).unwrap();
                let hi = if a < 1.0 {
                    upper_incomplete_gamma(a, x).unwrap()
                } else {
                    (-x).exp()
                };
                assert_relative_eq!(lo + hi, gamma(a), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn complex_helpers_small_arguments() {
        let z = Complex64::new(1e-9, -2e-9);
        assert_relative_eq!(ln_1p(z).re, 1e-9, max_relative = 1e-6);
        let e = exprel(z);
        assert!((e - Complex64::new(1.0, 0.0)).norm() < 2e-9);
        let big = Complex64::new(0.3, 1.2);
        assert!((exprel(big) * big - (big.exp() - 1.0)).norm() < 1e-15);
        assert!((ln_1p(big) - (big + 1.0).ln()).norm() < 1e-15);
    }
}
