use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};

/// The seven GTS parameters. Returns are measured in percent.
///
/// Each side of the Lévy measure is `α e^{-λ|y|} |y|^{-1-β}`; `mu` is the
/// location. The admitted domain is `0 ≤ β < 1`, `α ≥ 0`, `λ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtsParams {
    pub mu: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

/// One side (positive or reflected negative jumps) of a GTS law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Side {
    pub beta: f64,
    pub alpha: f64,
    pub lambda: f64,
}

/// Which stationary law an OU-type process carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Marginal {
    /// The GTS law itself is the stationary marginal (GTS-OU).
    Gts,
    /// The self-decomposable law driven by a GTS BDLP (OU-GTS).
    Sd,
}

/// Parameter names in vector order, matching the fit-trace columns.
pub const PARAM_NAMES: [&str; 7] =
    ["mu", "beta_plus", "beta_minus", "alpha_plus", "alpha_minus", "lambda_plus", "lambda_minus"];

impl GtsParams {
    pub fn new(
        mu: f64,
        beta_plus: f64,
        beta_minus: f64,
        alpha_plus: f64,
        alpha_minus: f64,
        lambda_plus: f64,
        lambda_minus: f64,
    ) -> Self {
        Self { mu, beta_plus, beta_minus, alpha_plus, alpha_minus, lambda_plus, lambda_minus }
    }

    /// S&P 500 daily-return estimate.
    pub fn sp500() -> Self {
        Self::new(-0.693477, 0.682290, 0.242579, 0.458582, 0.414443, 0.822222, 0.727607)
    }

    /// Bitcoin daily-return estimate, as rounded in the parameter table.
    pub fn bitcoin() -> Self {
        Self::new(-0.736924, 0.461378, 0.267178, 0.810017, 0.517347, 0.215628, 0.191937)
    }

    /// Bitcoin parameter set used for the published moment tables; it
    /// differs from [`GtsParams::bitcoin`] in the fourth decimal.
    pub fn bitcoin_moment_tables() -> Self {
        Self::new(-0.737459, 0.461722, 0.267500, 0.810017, 0.517386, 0.215545, 0.191874)
    }

    pub fn plus(&self) -> Side {
        Side { beta: self.beta_plus, alpha: self.alpha_plus, lambda: self.lambda_plus }
    }

    pub fn minus(&self) -> Side {
        Side { beta: self.beta_minus, alpha: self.alpha_minus, lambda: self.lambda_minus }
    }

    pub fn is_symmetric(&self) -> bool {
        self.plus() == self.minus()
    }

    pub fn to_vec(&self) -> [f64; 7] {
        [
            self.mu,
            self.beta_plus,
            self.beta_minus,
            self.alpha_plus,
            self.alpha_minus,
            self.lambda_plus,
            self.lambda_minus,
        ]
    }

    pub fn from_vec(v: &[f64; 7]) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6])
    }

    /// Checks the admitted domain. `β = 1` (pole of `Γ(-β)`) and `λ = 0`
    /// (untempered) are rejected.
    pub fn validate(&self) -> Result<()> {
        let v = self.to_vec();
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(GtsError::InvalidParams(format!("{} is not finite", PARAM_NAMES[i])));
        }
        for (name, beta) in [("beta_plus", self.beta_plus), ("beta_minus", self.beta_minus)] {
            if !(0.0..1.0).contains(&beta) {
                return Err(GtsError::InvalidParams(format!(
                    "{name} = {beta} outside [0, 1)"
                )));
            }
        }
        for (name, alpha) in [("alpha_plus", self.alpha_plus), ("alpha_minus", self.alpha_minus)] {
            if alpha < 0.0 {
                return Err(GtsError::InvalidParams(format!("{name} = {alpha} is negative")));
            }
        }
        for (name, lambda) in
            [("lambda_plus", self.lambda_plus), ("lambda_minus", self.lambda_minus)]
        {
            if lambda <= 0.0 {
                return Err(GtsError::InvalidParams(format!("{name} = {lambda} must be > 0")));
            }
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate) but also rejects the point mass
    /// `α₊ = α₋ = 0`, which has no density.
    pub fn validate_nondegenerate(&self) -> Result<()> {
        self.validate()?;
        if self.alpha_plus == 0.0 && self.alpha_minus == 0.0 {
            return Err(GtsError::InvalidParams(
                "alpha_plus = alpha_minus = 0 is a point mass".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for p in [GtsParams::sp500(), GtsParams::bitcoin(), GtsParams::bitcoin_moment_tables()] {
            p.validate_nondegenerate().unwrap();
        }
    }

    #[test]
    fn rejects_boundary_values() {
        let mut p = GtsParams::sp500();
        p.beta_plus = 1.0;
        assert!(p.validate().is_err());
        let mut p = GtsParams::sp500();
        p.lambda_minus = 0.0;
        assert!(p.validate().is_err());
        let mut p = GtsParams::sp500();
        p.alpha_plus = -1e-3;
        assert!(p.validate().is_err());
        let mut p = GtsParams::sp500();
        p.alpha_plus = 0.0;
        p.alpha_minus = 0.0;
        assert!(p.validate().is_ok());
        assert!(p.validate_nondegenerate().is_err());
    }

    #[test]
    fn json_uses_table_field_names() {
        let s = serde_json::to_string(&GtsParams::sp500()).unwrap();
        for name in PARAM_NAMES {
            assert!(s.contains(name), "{s}");
        }
        let back: GtsParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, GtsParams::sp500());
    }
}
