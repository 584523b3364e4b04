//! Exact simulation of the stationary OU-type processes with GTS or
//! self-decomposable marginals, and moment reports against the closed forms.

use num_complex::Complex64;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};
use crate::exec::{self, Execution};
use crate::exponent::{integrate_psi_over_u, psi_gts, CharExponent, GtsExponent, SdExponent};
use crate::moments::{marginal_cumulants, stationary_moments, Cumulants, MomentSummary, StationaryMoments};
use crate::params::{GtsParams, Marginal};
use crate::spectral::{invert_cf, DensityGrid, GridSpec, DEFAULT_N};

/// Where a path starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    /// A fixed value; moments discard a burn-in.
    Value(f64),
    /// A draw from the stationary marginal; no burn-in.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuConfig {
    /// Mean-reversion rate λ.
    pub lambda_rate: f64,
    /// Time step Δt.
    pub dt: f64,
    pub mode: Marginal,
    pub start: Start,
    pub n_steps: usize,
    pub seed: u64,
}

impl OuConfig {
    pub fn new(mode: Marginal, n_steps: usize, seed: u64) -> Self {
        Self { lambda_rate: 1.0, dt: 1.0, mode, start: Start::Value(0.0), n_steps, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_rate > 0.0 && self.dt > 0.0)
            || !(self.lambda_rate * self.dt).is_finite()
        {
            return Err(GtsError::Domain(format!(
                "lambda_rate = {} and dt = {} must be positive",
                self.lambda_rate, self.dt
            )));
        }
        if self.n_steps == 0 {
            return Err(GtsError::Domain("n_steps must be at least 1".into()));
        }
        if let Start::Value(x) = self.start {
            if !x.is_finite() {
                return Err(GtsError::Domain(format!("x0 = {x} is not finite")));
            }
        }
        Ok(())
    }

    /// Autoregressive coefficient `a = e^{-λΔt}`.
    pub fn decay(&self) -> f64 {
        (-self.lambda_rate * self.dt).exp()
    }

    /// Steps discarded before computing moments: `max(100, 10/(λΔt))` for a
    /// fixed start, none for a stationary one.
    pub fn burn_in(&self) -> usize {
        match self.start {
            Start::Stationary => 0,
            Start::Value(_) => 100usize.max((10.0 / (self.lambda_rate * self.dt)).ceil() as usize),
        }
    }
}

/// Marginal exponent `φ`: the GTS exponent or the self-decomposable one.
pub fn marginal_exponent(xi: f64, p: &GtsParams, mode: Marginal) -> Result<Complex64> {
    match mode {
        Marginal::Gts => Ok(psi_gts(xi, p)),
        Marginal::Sd => SdExponent(*p).exponent(xi),
    }
}

/// Exponent of the one-step increment, `φ(ξ) − φ(aξ)` with `a = e^{-λΔt}`.
pub fn increment_exponent(xi: f64, p: &GtsParams, c: &OuConfig) -> Result<Complex64> {
    IncrementExponent::new(*p, c).exponent(xi)
}

/// The increment exponent as a [`CharExponent`].
#[derive(Debug, Clone, Copy)]
pub struct IncrementExponent {
    pub params: GtsParams,
    pub mode: Marginal,
    pub decay: f64,
}

impl IncrementExponent {
    pub fn new(params: GtsParams, c: &OuConfig) -> Self {
        Self { params, mode: c.mode, decay: c.decay() }
    }
}

impl CharExponent for IncrementExponent {
    fn exponent(&self, xi: f64) -> Result<Complex64> {
        let p = &self.params;
        match self.mode {
            Marginal::Gts => Ok(psi_gts(xi, p) - psi_gts(self.decay * xi, p)),
            // ∫_{aξ}^{ξ} Ψ(u)/u du directly, rather than a difference of two
            // integrals from the origin
            Marginal::Sd => integrate_psi_over_u(self.decay * xi, xi, p),
        }
    }
}

/// Cumulants of the increment: `κ_k(Y) = κ_k(X)(1 − a^k)`.
pub fn increment_cumulants(p: &GtsParams, c: &OuConfig, k_max: usize) -> Result<Cumulants> {
    let mut k = marginal_cumulants(p, c.mode, k_max)?;
    let a = c.decay();
    for (i, v) in k.kappa.iter_mut().enumerate() {
        *v *= 1.0 - a.powi(i as i32 + 1);
    }
    Ok(k)
}

/// Draws `y = F⁻¹(U)` with `U` uniform on the open interval.
pub fn draw<R: Rng>(grid: &DensityGrid, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    grid.quantile_unchecked(u)
}

/// The generator for path `index` of the run seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` independent draws from `grid`.
pub fn sample_iid(grid: &DensityGrid, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = path_rng(seed, 0);
    (0..n).map(|_| draw(grid, &mut rng)).collect()
}

/// Inverse-CDF sampler for the one-step increment, plus the marginal grid
/// when paths start from the stationary law.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    params: GtsParams,
    config: OuConfig,
    increment: DensityGrid,
    marginal: Option<DensityGrid>,
}

/// Builds the increment grid once (default grid when `g` is `None`).
pub fn build_increment_sampler(
    p: &GtsParams,
    c: &OuConfig,
    g: Option<GridSpec>,
    exec: Execution,
) -> Result<IncrementSampler> {
    p.validate_nondegenerate()?;
    c.validate()?;
    let e = IncrementExponent::new(*p, c);
    let g = match g {
        Some(g) => g,
        None => GridSpec::for_law(&e, &increment_cumulants(p, c, 2)?, DEFAULT_N)?,
    };
    let increment = invert_cf(&e, &g, exec)?;
    let marginal = match c.start {
        Start::Stationary => Some(marginal_grid(p, c.mode, DEFAULT_N, exec)?),
        Start::Value(_) => None,
    };
    Ok(IncrementSampler { params: *p, config: *c, increment, marginal })
}

/// Default density grid of the stationary marginal.
pub fn marginal_grid(p: &GtsParams, mode: Marginal, n: usize, exec: Execution) -> Result<DensityGrid> {
    let c = marginal_cumulants(p, mode, 2)?;
    match mode {
        Marginal::Gts => {
            let e = GtsExponent(*p);
            invert_cf(&e, &GridSpec::for_law(&e, &c, n)?, exec)
        }
        Marginal::Sd => {
            let e = SdExponent(*p);
            invert_cf(&e, &GridSpec::for_law(&e, &c, n)?, exec)
        }
    }
}

impl IncrementSampler {
    pub fn params(&self) -> &GtsParams {
        &self.params
    }

    pub fn config(&self) -> &OuConfig {
        &self.config
    }

    pub fn increment_grid(&self) -> &DensityGrid {
        &self.increment
    }

    pub fn marginal_grid(&self) -> Option<&DensityGrid> {
        self.marginal.as_ref()
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        draw(&self.increment, rng)
    }
}

/// Cumulative-return path; `x[0]` is the starting value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePath {
    pub x: Vec<f64>,
}

/// `x[k] = a·x[k-1] + y[k-1]`.
pub fn run_recursion(x0: f64, a: f64, increments: &[f64]) -> SamplePath {
    let mut x = Vec::with_capacity(increments.len() + 1);
    x.push(x0);
    let mut cur = x0;
    for y in increments {
        cur = a * cur + y;
        x.push(cur);
    }
    SamplePath { x }
}

/// Path from stream `index` of `seed`, overriding the configured seed.
pub fn simulate_seeded(sampler: &IncrementSampler, seed: u64, index: u64) -> SamplePath {
    let c = sampler.config;
    let mut rng = path_rng(seed, index);
    let x0 = match (c.start, &sampler.marginal) {
        (Start::Value(x), _) => x,
        (Start::Stationary, Some(m)) => draw(m, &mut rng),
        (Start::Stationary, None) => unreachable!("stationary sampler holds a marginal grid"),
    };
    let ys: Vec<f64> = (0..c.n_steps).map(|_| sampler.draw(&mut rng)).collect();
    run_recursion(x0, c.decay(), &ys)
}

/// One path from stream 0 of the configured seed.
pub fn simulate_path(sampler: &IncrementSampler) -> SamplePath {
    simulate_seeded(sampler, sampler.config.seed, 0)
}

/// `n_paths` paths, path `i` using stream `i` of the configured seed.
pub fn simulate_ensemble(sampler: &IncrementSampler, n_paths: usize, exec: Execution) -> Vec<SamplePath> {
    exec::map(n_paths, exec, |i| simulate_seeded(sampler, sampler.config.seed, i as u64))
}

/// Relative errors in percent, `100·(empirical − exact)/|exact|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorPct {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub n_samples: usize,
    pub exact: StationaryMoments,
    pub empirical: MomentSummary,
    pub relative_error_pct: ErrorPct,
    /// The sample has zero variance.
    pub degenerate: bool,
}

fn pct(emp: f64, exact: f64) -> f64 {
    100.0 * (emp - exact) / exact.abs()
}

impl MomentReport {
    pub fn new(samples: &[f64], exact: StationaryMoments) -> Result<Self> {
        if samples.is_empty() {
            return Err(GtsError::Domain("moment report of an empty sample".into()));
        }
        let e = MomentSummary::from_samples(samples);
        Ok(Self {
            n_samples: samples.len(),
            exact,
            relative_error_pct: ErrorPct {
                mean: pct(e.mean, exact.mean),
                variance: pct(e.variance, exact.variance),
                std_dev: pct(e.std_dev, exact.std_dev),
                skewness: pct(e.skewness, exact.skewness),
                kurtosis: pct(e.kurtosis, exact.kurtosis),
            },
            degenerate: !(e.variance > 0.0),
            empirical: e,
        })
    }

    /// Rows `{indicator, Exact value, Empirical, Error %}` in table order.
    pub fn table(&self) -> serde_json::Value {
        let e = &self.relative_error_pct;
        let rows = [
            ("Mean", self.exact.mean, self.empirical.mean, e.mean),
            ("Std dev", self.exact.std_dev, self.empirical.std_dev, e.std_dev),
            ("Variance", self.exact.variance, self.empirical.variance, e.variance),
            ("Skewness", self.exact.skewness, self.empirical.skewness, e.skewness),
            ("Kurtosis", self.exact.kurtosis, self.empirical.kurtosis, e.kurtosis),
        ];
        serde_json::Value::Array(
            rows.iter()
                .map(|(name, exact, emp, err)| {
                    serde_json::json!({
                        "indicator": name,
                        "Exact value": exact,
                        "Empirical": emp,
                        "Error %": err,
                    })
                })
                .collect(),
        )
    }
}

/// Sample moments of `path` after burn-in, against the stationary moments.
pub fn path_moments(path: &SamplePath, p: &GtsParams, c: &OuConfig) -> Result<MomentReport> {
    if c.n_steps < 100 || path.x.len() != c.n_steps + 1 {
        return Err(GtsError::Domain(format!(
            "path moments need at least 100 steps of the configured path (got {})",
            path.x.len().saturating_sub(1)
        )));
    }
    let burn = c.burn_in();
    if burn + 2 > path.x.len() {
        return Err(GtsError::Domain(format!(
            "burn-in of {burn} steps leaves no sample from {} steps",
            c.n_steps
        )));
    }
    MomentReport::new(&path.x[burn..], stationary_moments(p, c.mode)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sampler(mode: Marginal, start: Start, seed: u64) -> IncrementSampler {
        let mut c = OuConfig::new(mode, 200, seed);
        c.start = start;
        build_increment_sampler(&GtsParams::sp500(), &c, None, Execution::default()).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut c = OuConfig::new(Marginal::Sd, 10, 1);
        assert!(c.validate().is_ok());
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let mut c = OuConfig::new(Marginal::Sd, 0, 1);
        assert!(c.validate().is_err());
        c.n_steps = 5;
        c.start = Start::Value(f64::NAN);
        assert!(c.validate().is_err());
    }

    #[test]
    fn burn_in_policy() {
        let mut c = OuConfig::new(Marginal::Gts, 1000, 0);
        assert_eq!(c.burn_in(), 100);
        c.dt = 0.01;
        assert_eq!(c.burn_in(), 1000);
        c.start = Start::Stationary;
        assert_eq!(c.burn_in(), 0);
    }

    #[test]
    fn increment_exponent_limits() {
        let p = GtsParams::sp500();
        for mode in [Marginal::Gts, Marginal::Sd] {
            let mut c = OuConfig::new(mode, 1, 0);
            c.dt = 1e-14;
            for xi in [-3.0, 0.5, 4.0] {
                assert!(increment_exponent(xi, &p, &c).unwrap().norm() < 1e-12);
            }
            c.dt = 1e3;
            for xi in [-3.0, 0.5, 4.0] {
                let full = marginal_exponent(xi, &p, mode).unwrap();
                assert!((increment_exponent(xi, &p, &c).unwrap() - full).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn recursion_closed_form() {
        let ys = [0.3, -1.2, 0.0, 2.5, 0.7];
        let a = 0.6;
        let path = run_recursion(1.5, a, &ys);
        for k in 0..=ys.len() {
            let mut want = a.powi(k as i32) * 1.5;
            for i in 1..=k {
                want += a.powi((k - i) as i32) * ys[i - 1];
            }
            assert!((path.x[k] - want).abs() < 1e-14);
        }
        let zero = run_recursion(2.0, a, &[0.0; 6]);
        for k in 0..=6 {
            assert!((zero.x[k] - a.powi(k as i32) * 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn seeded_paths_are_reproducible() {
        let s = small_sampler(Marginal::Gts, Start::Value(0.0), 42);
        let a = simulate_path(&s);
        let b = simulate_path(&small_sampler(Marginal::Gts, Start::Value(0.0), 42));
        assert_eq!(a, b);
        assert_eq!(a.x[0], 0.0);
        assert_eq!(a.x.len(), 201);
        let c = simulate_path(&small_sampler(Marginal::Gts, Start::Value(0.0), 43));
        assert_ne!(a, c);
        let seq = simulate_ensemble(&s, 4, Execution::Sequential);
        let par = simulate_ensemble(&s, 4, Execution::Parallel);
        assert_eq!(seq, par);
        assert_eq!(seq[0], a);
        assert_ne!(seq[1], seq[0]);
    }

    #[test]
    fn stationary_start_draws_x0() {
        let s = small_sampler(Marginal::Sd, Start::Stationary, 7);
        let p = simulate_path(&s);
        assert_ne!(p.x[0], 0.0);
        assert!(s.marginal_grid().is_some());
    }

    #[test]
    fn constant_path_is_degenerate() {
        let c = OuConfig::new(Marginal::Sd, 150, 0);
        let path = SamplePath { x: vec![0.25; 151] };
        let r = path_moments(&path, &GtsParams::sp500(), &c).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.empirical.variance, 0.0);
        let short = OuConfig::new(Marginal::Sd, 50, 0);
        assert!(path_moments(&SamplePath { x: vec![0.0; 51] }, &GtsParams::sp500(), &short).is_err());
    }

    #[test]
    fn report_theoretical_column() {
        let c = OuConfig::new(Marginal::Sd, 200, 0);
        let path = simulate_path(&small_sampler(Marginal::Sd, Start::Value(0.0), 1));
        let r = path_moments(&path, &GtsParams::sp500(), &c).unwrap();
        assert!((r.exact.mean - 0.04013).abs() < 5e-5);
        assert!((r.exact.kurtosis - 8.92320).abs() < 1e-3);
        assert_eq!(r.n_samples, 101);
        let want = 100.0 * (r.empirical.mean - r.exact.mean) / r.exact.mean.abs();
        assert_eq!(r.relative_error_pct.mean, want);
        let rows = r.table();
        assert_eq!(rows.as_array().unwrap().len(), 5);
        assert!(rows[0].get("Exact value").is_some());
    }

    #[test]
    fn increment_cumulant_scaling() {
        let p = GtsParams::sp500();
        let c = OuConfig::new(Marginal::Gts, 1, 0);
        let k = increment_cumulants(&p, &c, 4).unwrap();
        let full = marginal_cumulants(&p, Marginal::Gts, 4).unwrap();
        let a = (-1.0f64).exp();
        assert!((k.get(2) - full.get(2) * (1.0 - a * a)).abs() < 1e-15);
    }
}
