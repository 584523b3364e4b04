//! Characteristic exponents of the GTS law, of its background driving Lévy
//! process (BDLP), and of the self-decomposable law that a GTS BDLP drives.
//!
//! All exponents are `log E[e^{iξX}]` of the time-one law, vanish at the
//! origin and satisfy `E(-ξ) = conj(E(ξ))`.

use num_complex::Complex64;

use crate::error::Result;
use crate::exec::{self, Execution};
use crate::params::{GtsParams, Side};
use crate::quad::{self, QuadOptions};
use crate::special::{exprel, gamma, ln_1p};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Quadrature tolerance for the self-decomposable exponent.
pub const SD_QUAD: QuadOptions = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-13, max_intervals: 400 };

/// `log((λ - iξ)/λ)` on the principal branch.
fn log_ratio(xi: f64, lambda: f64) -> Complex64 {
    ln_1p(Complex64::new(0.0, -xi / lambda))
}

/// One-sided tempered stable exponent `αΓ(-β)((λ-iξ)^β - λ^β)`.
///
/// Evaluated as `-αΓ(1-β)λ^β L·exprel(βL)` with `L = log(1 - iξ/λ)`, which
/// is exact at `β = 0` where it reduces to the bilateral-gamma form
/// `α log(λ/(λ-iξ))`, and continuous across it.
pub fn psi_one_sided(xi: f64, side: Side) -> Complex64 {
    if side.alpha == 0.0 || xi == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let l = log_ratio(xi, side.lambda);
    let scale = -side.alpha * gamma(1.0 - side.beta) * side.lambda.powf(side.beta);
    l * exprel(l * side.beta) * scale
}

/// GTS exponent `Ψ(ξ) = iμξ + Ψ⁺(ξ) + Ψ⁻(-ξ)`.
pub fn psi_gts(xi: f64, p: &GtsParams) -> Complex64 {
    I * (p.mu * xi) + psi_one_sided(xi, p.plus()) + psi_one_sided(-xi, p.minus())
}

fn bdlp_one_sided(y: f64, side: Side) -> Complex64 {
    if side.alpha == 0.0 || y == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // (λ - iy)^{β-1} = λ^{β-1} exp((β-1) log(1 - iy/λ))
    let pow = (log_ratio(y, side.lambda) * (side.beta - 1.0)).exp()
        * side.lambda.powf(side.beta - 1.0);
    I * y * pow * (side.alpha * gamma(1.0 - side.beta))
}

/// Exponent of the BDLP of a GTS law:
/// `iμy + α₊Γ(1-β₊) iy/(λ₊-iy)^{1-β₊} + α₋Γ(1-β₋)(-iy)/(λ₋+iy)^{1-β₋}`.
///
/// Equals `ξ·Ψ'(ξ)`.
pub fn bdlp_exponent(y: f64, p: &GtsParams) -> Complex64 {
    I * (p.mu * y) + bdlp_one_sided(y, p.plus()) + bdlp_one_sided(-y, p.minus())
}

/// `Ψ(u)/u` without the drift, with its limit at `u = 0`.
fn psi_jump_over_u(u: f64, p: &GtsParams, limit: Complex64) -> Complex64 {
    if u == 0.0 {
        return limit;
    }
    (psi_one_sided(u, p.plus()) + psi_one_sided(-u, p.minus())) / u
}

/// Limit of the jump part of `Ψ(u)/u` at the origin: `i(κ₁ - μ)`.
fn jump_slope_at_zero(p: &GtsParams) -> Complex64 {
    let side_mean = |s: Side| {
        if s.alpha == 0.0 {
            0.0
        } else {
            s.alpha * gamma(1.0 - s.beta) * s.lambda.powf(s.beta - 1.0)
        }
    };
    I * (side_mean(p.plus()) - side_mean(p.minus()))
}

/// `∫_{from}^{to} Ψ(u)/u du` by adaptive Gauss–Kronrod. The drift term is
/// integrated analytically.
pub fn integrate_psi_over_u(from: f64, to: f64, p: &GtsParams) -> Result<Complex64> {
    if from == to {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let limit = jump_slope_at_zero(p);
    let r = quad::integrate(|u| psi_jump_over_u(u, p, limit), from, to, SD_QUAD)?;
    Ok(I * (p.mu * (to - from)) + r.value)
}

/// Exponent of the self-decomposable law whose BDLP is `GTS(p)`:
/// `φ(ξ) = ∫₀^ξ Ψ(u)/u du`.
pub fn sd_exponent(xi: f64, p: &GtsParams) -> Result<Complex64> {
    integrate_psi_over_u(0.0, xi, p)
}

/// Same law as [`sd_exponent`], through the one-sided inner integrals
/// `γ⁺(ξ) = αΓ(-β)∫₀¹((λ - iξu)^β - λ^β)/u du` evaluated with plain complex
/// powers. Serves as the second route for cross-checking.
pub fn sd_exponent_inner_form(xi: f64, p: &GtsParams) -> Result<Complex64> {
    let side_part = |xi: f64, s: Side| -> Result<Complex64> {
        if s.alpha == 0.0 || xi == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let lam = Complex64::new(s.lambda, 0.0);
        if s.beta < 1e-9 {
            // Γ(-β)((λ-z)^β - λ^β) -> -log(1 - z/λ)
            let r = quad::integrate(
                |u| {
                    if u == 0.0 {
                        return I * xi / s.lambda;
                    }
                    -((lam - I * (xi * u)) / lam).ln() / u
                },
                0.0,
                1.0,
                SD_QUAD,
            )?;
            return Ok(r.value * s.alpha);
        }
        let base = s.lambda.powf(s.beta);
        let coef = s.alpha * gamma(-s.beta);
        let r = quad::integrate(
            |u| {
                if u == 0.0 {
                    return -I * (xi * s.beta * s.lambda.powf(s.beta - 1.0));
                }
                ((lam - I * (xi * u)).powf(s.beta) - base) / u
            },
            0.0,
            1.0,
            SD_QUAD,
        )?;
        Ok(r.value * coef)
    };
    Ok(I * (p.mu * xi) + side_part(xi, p.plus())? + side_part(-xi, p.minus())?)
}

/// A characteristic exponent that can be inverted into a density.
pub trait CharExponent: Sync {
    fn exponent(&self, xi: f64) -> Result<Complex64>;

    /// Values on an ascending grid. Implementations may exploit the ordering.
    fn exponent_grid(&self, xis: &[f64], exec: Execution) -> Result<Vec<Complex64>> {
        exec::map(xis.len(), exec, |j| self.exponent(xis[j])).into_iter().collect()
    }
}

impl<F> CharExponent for F
where
    F: Fn(f64) -> Complex64 + Sync,
{
    fn exponent(&self, xi: f64) -> Result<Complex64> {
        Ok(self(xi))
    }
}

/// The GTS exponent as a [`CharExponent`].
#[derive(Debug, Clone, Copy)]
pub struct GtsExponent(pub GtsParams);

impl CharExponent for GtsExponent {
    fn exponent(&self, xi: f64) -> Result<Complex64> {
        Ok(psi_gts(xi, &self.0))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BdlpExponent(pub GtsParams);

impl CharExponent for BdlpExponent {
    fn exponent(&self, xi: f64) -> Result<Complex64> {
        Ok(bdlp_exponent(xi, &self.0))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SdExponent(pub GtsParams);

impl CharExponent for SdExponent {
    fn exponent(&self, xi: f64) -> Result<Complex64> {
        sd_exponent(xi, &self.0)
    }

    /// Integrates `Ψ(u)/u` piecewise between consecutive nodes and
    /// accumulates, instead of restarting from zero at every node.
    fn exponent_grid(&self, xis: &[f64], exec: Execution) -> Result<Vec<Complex64>> {
        if xis.is_empty() {
            return Ok(Vec::new());
        }
        let p = self.0;
        let first = sd_exponent(xis[0], &p)?;
        let pieces: Vec<Complex64> = exec::map(xis.len() - 1, exec, |j| {
            integrate_psi_over_u(xis[j], xis[j + 1], &p)
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(xis.len());
        let mut acc = first;
        out.push(acc);
        for piece in pieces {
            acc += piece;
            out.push(acc);
        }
        Ok(out)
    }
}
