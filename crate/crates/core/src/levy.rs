//! Lévy densities of the three laws and the activity/variation diagnostics.

use serde::Serialize;

use crate::error::{GtsError, Result};
use crate::params::{GtsParams, Side};
use crate::special::{lower_incomplete_gamma, upper_incomplete_gamma};

fn side_for(x: f64, p: &GtsParams) -> Result<(Side, f64)> {
    if x == 0.0 || !x.is_finite() {
        return Err(GtsError::Domain(format!("Lévy density undefined at x = {x}")));
    }
    Ok(if x > 0.0 { (p.plus(), x) } else { (p.minus(), -x) })
}

/// GTS Lévy density `α e^{-λ|x|} |x|^{-1-β}` on the side of `x`.
pub fn levy_density_gts(x: f64, p: &GtsParams) -> Result<f64> {
    let (s, y) = side_for(x, p)?;
    Ok(s.alpha * (-s.lambda * y).exp() * y.powf(-1.0 - s.beta))
}

/// Lévy density of the BDLP of a GTS law, `α(β + λ|x|)|x|^{-1-β} e^{-λ|x|}`.
pub fn levy_density_bdlp(x: f64, p: &GtsParams) -> Result<f64> {
    let (s, y) = side_for(x, p)?;
    Ok(s.alpha * (s.beta + s.lambda * y) * y.powf(-1.0 - s.beta) * (-s.lambda * y).exp())
}

/// Lévy density of the self-decomposable law driven by a GTS BDLP,
/// `αλ^β Γ(-β, λ|x|)/|x|`.
pub fn levy_density_sd(x: f64, p: &GtsParams) -> Result<f64> {
    let (s, y) = side_for(x, p)?;
    if s.alpha == 0.0 {
        return Ok(0.0);
    }
    let g = upper_incomplete_gamma(-s.beta, s.lambda * y)?;
    Ok(s.alpha * s.lambda.powf(s.beta) * g / y)
}

/// GTS tail mass `M((u, ∞))` for `u > 0` (or `M((-∞, u))` for `u < 0`):
/// `αλ^β Γ(-β, λ|u|)`.
pub fn levy_tail_gts(u: f64, p: &GtsParams) -> Result<f64> {
    let (s, y) = side_for(u, p)?;
    if s.alpha == 0.0 {
        return Ok(0.0);
    }
    Ok(s.alpha * s.lambda.powf(s.beta) * upper_incomplete_gamma(-s.beta, s.lambda * y)?)
}

/// BDLP tail mass `α|u|^{-β} e^{-λ|u|}`.
pub fn levy_tail_bdlp(u: f64, p: &GtsParams) -> Result<f64> {
    let (s, y) = side_for(u, p)?;
    Ok(s.alpha * y.powf(-s.beta) * (-s.lambda * y).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Activity {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VariationDiagnostics {
    pub activity: Activity,
    /// `∫ min(1, |y|) M(dy)`.
    pub variation_integral: f64,
}

/// Activity of the GTS Lévy measure and its variation integral
/// `Σ± αλ^β [Γ(-β, λ) + λ^{-1} γ(1-β, λ)]`.
///
/// With `β ≥ 0` every side carrying mass has infinite activity; a side with
/// `α = 0` contributes nothing.
pub fn variation_diagnostics(p: &GtsParams) -> Result<VariationDiagnostics> {
    p.validate()?;
    let mut total = 0.0;
    let mut infinite = false;
    for s in [p.plus(), p.minus()] {
        if s.alpha == 0.0 {
            continue;
        }
        infinite |= s.beta >= 0.0;
        let big = upper_incomplete_gamma(-s.beta, s.lambda)?;
        let small = lower_incomplete_gamma(1.0 - s.beta, s.lambda)?;
        total += s.alpha * s.lambda.powf(s.beta) * (big + small / s.lambda);
    }
    Ok(VariationDiagnostics {
        activity: if infinite { Activity::Infinite } else { Activity::Finite },
        variation_integral: total,
    })
}
