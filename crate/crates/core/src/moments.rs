//! Closed-form cumulants of the GTS law and the first four moments of the two
//! stationary marginals.

use serde::Serialize;

use crate::error::{GtsError, Result};
use crate::params::{GtsParams, Marginal, Side};
use crate::special::ln_gamma;

/// Cumulants `κ₁..κ_K`; `kappa[k - 1]` holds `κ_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cumulants {
    pub kappa: Vec<f64>,
}

impl Cumulants {
    /// `κ_k` for `1 ≤ k ≤ K`.
    pub fn get(&self, k: usize) -> f64 {
        self.kappa[k - 1]
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }
}

// α Γ(k - β) / λ^{k - β}
fn side_term(s: Side, k: usize) -> f64 {
    if s.alpha == 0.0 {
        return 0.0;
    }
    let e = k as f64 - s.beta;
    s.alpha * (ln_gamma(e) - e * s.lambda.ln()).exp()
}

/// GTS cumulants
/// `κ₁ = μ + α₊Γ(1-β₊)/λ₊^{1-β₊} - α₋Γ(1-β₋)/λ₋^{1-β₋}` and
/// `κ_k = α₊Γ(k-β₊)/λ₊^{k-β₊} + (-1)^k α₋Γ(k-β₋)/λ₋^{k-β₋}`.
pub fn cumulants(p: &GtsParams, k_max: usize) -> Result<Cumulants> {
    if k_max == 0 {
        return Err(GtsError::Domain("cumulant order must be at least 1".into()));
    }
    p.validate()?;
    let kappa = (1..=k_max)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let c = side_term(p.plus(), k) + sign * side_term(p.minus(), k);
            if k == 1 {
                p.mu + c
            } else {
                c
            }
        })
        .collect();
    Ok(Cumulants { kappa })
}

/// Cumulants of the stationary marginal: `κ_k` for the GTS law and `κ_k / k`
/// for the self-decomposable law.
pub fn marginal_cumulants(p: &GtsParams, mode: Marginal, k_max: usize) -> Result<Cumulants> {
    let mut c = cumulants(p, k_max)?;
    if mode == Marginal::Sd {
        for (i, k) in c.kappa.iter_mut().enumerate() {
            *k /= (i + 1) as f64;
        }
    }
    Ok(c)
}

/// First four moments of a sample or a tabulated density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl MomentSummary {
    /// From the mean and the second to fourth central moments. A zero
    /// variance leaves skewness and kurtosis NaN.
    pub fn from_central(mean: f64, m2: f64, m3: f64, m4: f64) -> Self {
        let (skewness, kurtosis) =
            if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2)) } else { (f64::NAN, f64::NAN) };
        Self { mean, variance: m2, std_dev: m2.max(0.0).sqrt(), skewness, kurtosis }
    }

    /// Plain (biased, `1/n`) sample moments.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        Self::from_central(mean, m2 / n, m3 / n, m4 / n)
    }
}

/// Mean, variance, skewness and kurtosis of a stationary marginal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryMoments {
    pub mode: Marginal,
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub skewness: f64,
    /// Non-excess kurtosis, `3 + κ₄/κ₂²`.
    pub kurtosis: f64,
}

impl StationaryMoments {
    /// Moments of any law from its first four cumulants.
    pub fn from_cumulants(mode: Marginal, c: &Cumulants) -> Result<Self> {
        if c.len() < 4 {
            return Err(GtsError::Domain("four cumulants are required".into()));
        }
        let var = c.get(2);
        if !(var > 0.0) {
            return Err(GtsError::InvalidParams(format!("variance {var} is not positive")));
        }
        Ok(Self {
            mode,
            mean: c.get(1),
            variance: var,
            std_dev: var.sqrt(),
            skewness: c.get(3) / var.powf(1.5),
            kurtosis: 3.0 + c.get(4) / (var * var),
        })
    }
}

/// Stationary moments for `mode`. For the self-decomposable marginal
/// `m_k = κ_k/k`, so skewness is `(2^{3/2}/3) κ₃/κ₂^{3/2}` and the kurtosis
/// equals that of the GTS law.
pub fn stationary_moments(p: &GtsParams, mode: Marginal) -> Result<StationaryMoments> {
    p.validate_nondegenerate()?;
    StationaryMoments::from_cumulants(mode, &marginal_cumulants(p, mode, 4)?)
}
