//! Fractional FFT and characteristic-function inversion onto a uniform grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{GtsError, Result};
use crate::exec::{self, Execution};
use crate::exponent::CharExponent;
use crate::interp::Pchip;
use crate::moments::{Cumulants, MomentSummary};

/// Fractional DFT `G_k = Σ_j x_j e^{-2πi·j·k·a}` for `k < N`, via Bluestein's
/// chirp-z decomposition and a zero-padded circular convolution.
pub fn frft(seq: &[Complex64], a: f64) -> Vec<Complex64> {
    let n = seq.len();
    if n == 0 {
        return Vec::new();
    }
    // e^{-iπ j² a}
    let chirp: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, -PI * turns_mod2(j as u64 * j as u64, a)))
        .collect();
    let m = (2 * n - 1).next_power_of_two();
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n {
        y[j] = seq[j] * chirp[j];
    }
    let mut z = vec![Complex64::new(0.0, 0.0); m];
    z[0] = chirp[0].conj();
    for j in 1..n {
        z[j] = chirp[j].conj();
        z[m - j] = chirp[j].conj();
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    fwd.process(&mut y);
    fwd.process(&mut z);
    for (a, b) in y.iter_mut().zip(&z) {
        *a *= b;
    }
    inv.process(&mut y);
    let scale = 1.0 / m as f64;
    (0..n).map(|k| y[k] * chirp[k] * scale).collect()
}

/// `m·a` reduced to `[0, 2)`. The rounding error of the product is recovered
/// with a fused multiply-add, so large `m` does not cost phase accuracy.
pub(crate) fn turns_mod2(m: u64, a: f64) -> f64 {
    let m = m as f64;
    let p = m * a;
    let err = m.mul_add(a, -p);
    (p.rem_euclid(2.0) + err).rem_euclid(2.0)
}

/// Uniform grid for [`invert_cf`]: `n_points` abscissae spanning
/// `[x_min, x_max]` and the same number of frequencies on `[0, xi_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub xi_max: f64,
}

/// Default number of grid points.
pub const DEFAULT_N: usize = 16384;
/// Half-width of the default x range in standard deviations.
pub const DEFAULT_SD_SPAN: f64 = 15.0;
/// `|φ(xi_max)|` targeted by the default frequency cutoff.
pub const CF_CUTOFF: f64 = 1e-12;
const XI_SEARCH_LIMIT: f64 = 1e7;

impl GridSpec {
    pub fn new(n_points: usize, x_min: f64, x_max: f64, xi_max: f64) -> Result<Self> {
        let g = Self { n_points, x_min, x_max, xi_max };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 256 || !self.n_points.is_power_of_two() {
            return Err(GtsError::Domain(format!(
                "n_points = {} must be a power of two ≥ 256",
                self.n_points
            )));
        }
        if !(self.x_min < self.x_max) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(GtsError::Domain(format!(
                "x range [{}, {}] is empty",
                self.x_min, self.x_max
            )));
        }
        if !(self.xi_max > 0.0 && self.xi_max.is_finite()) {
            return Err(GtsError::Domain(format!("xi_max = {} must be > 0", self.xi_max)));
        }
        Ok(())
    }

    /// Default grid for a law with the given cumulants: `mean ± 15 sd` and the
    /// frequency where the characteristic function falls below `1e-12`.
    pub fn for_law<E: CharExponent + ?Sized>(
        exponent: &E,
        cumulants: &Cumulants,
        n_points: usize,
    ) -> Result<Self> {
        let mean = cumulants.get(1);
        let sd = cumulants.get(2).sqrt();
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(GtsError::Domain(format!("law has standard deviation {sd}")));
        }
        let xi_max = cutoff_frequency(exponent, 1.0 / sd)?;
        Self::new(n_points, mean - DEFAULT_SD_SPAN * sd, mean + DEFAULT_SD_SPAN * sd, xi_max)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Period `2π/Δξ` of the inversion in x; mass beyond it wraps around.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.panels().1
    }

    /// The same ranges with `n_points` doubled until the period is at least
    /// four times the x range. Slowly decaying characteristic functions need
    /// this at the default size.
    pub fn unaliased(mut self) -> Self {
        while self.period() < 4.0 * (self.x_max - self.x_min) {
            self.n_points *= 2;
        }
        self
    }

    /// Grid abscissae.
    pub fn xs(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_points).map(|k| self.x_min + k as f64 * dx).collect()
    }

    /// Number of composite 7-point panels and the frequency step.
    fn panels(&self) -> (usize, f64) {
        let m = (self.n_points - 1) / 6;
        (m, self.xi_max / (6 * m) as f64)
    }
}

/// Smallest `ξ` (to bisection accuracy) with `Re E(ξ) ≤ ln 1e-12`, searching
/// upward from `start` by doubling.
pub fn cutoff_frequency<E: CharExponent + ?Sized>(exponent: &E, start: f64) -> Result<f64> {
    let target = CF_CUTOFF.ln();
    let below = |xi: f64| -> Result<bool> { Ok(exponent.exponent(xi)?.re <= target) };
    let mut hi = start.max(1e-8);
    let mut lo = 0.0;
    while !below(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > XI_SEARCH_LIMIT {
            return Err(GtsError::Domain(format!(
                "characteristic function does not fall below {CF_CUTOFF:e} before ξ = {XI_SEARCH_LIMIT:e}"
            )));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-10 * hi {
            break;
        }
    }
    Ok(hi)
}

// Closed 7-point Newton–Cotes weights in units of h/140.
const NC7: [f64; 7] = [41.0, 216.0, 27.0, 272.0, 27.0, 216.0, 41.0];

/// Composite 7-point Newton–Cotes weights for `m` panels (`6m + 1` nodes).
fn newton_cotes_weights(m: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; 6 * m + 1];
    for panel in 0..m {
        for (i, c) in NC7.iter().enumerate() {
            w[6 * panel + i] += c * h / 140.0;
        }
    }
    w
}

/// Density, distribution function and quantile table on a uniform grid.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    spec: GridSpec,
    x: Vec<f64>,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
    mass: f64,
    pdf_interp: Pchip,
    cdf_interp: Pchip,
    quantile_interp: Pchip,
}

/// Maximum tolerated `|∫pdf − 1|` before inversion is rejected.
pub const MASS_TOLERANCE: f64 = 1e-3;

/// Inverts the characteristic function `exp(E(ξ))` onto `g`.
///
/// `f(x_k) = (1/π) Re Σ_j w_j φ(ξ_j) e^{-iξ_j x_k}` with composite 7-point
/// Newton–Cotes weights `w_j` on `ξ_j = j·h`, evaluated for all `k` at once
/// by [`frft`] with `a = h·Δx / 2π`. Negative lobes are clipped to zero; the
/// CDF is the cumulative trapezoid, rescaled to end at 1.
pub fn invert_cf<E: CharExponent + ?Sized>(
    exponent: &E,
    g: &GridSpec,
    exec: Execution,
) -> Result<DensityGrid> {
    g.validate()?;
    let n = g.n_points;
    let (m, h) = g.panels();
    let nodes = 6 * m + 1;
    let xis: Vec<f64> = (0..nodes).map(|j| j as f64 * h).collect();
    let values = exponent.exponent_grid(&xis, exec)?;
    let w = newton_cotes_weights(m, h);
    let x_min = g.x_min;
    let mut seq: Vec<Complex64> = exec::map(nodes, exec, |j| {
        let phase = Complex64::from_polar(1.0, -xis[j] * x_min);
        values[j].exp() * phase * w[j]
    });
    seq.resize(n, Complex64::new(0.0, 0.0));
    let dx = g.dx();
    let out = frft(&seq, h * dx / (2.0 * PI));
    let pdf: Vec<f64> = out.iter().map(|z| (z.re / PI).max(0.0)).collect();
    DensityGrid::from_pdf(*g, pdf)
}

impl DensityGrid {
    /// Builds the CDF and interpolants from pdf values on `g`.
    pub fn from_pdf(g: GridSpec, pdf: Vec<f64>) -> Result<Self> {
        let x = g.xs();
        let dx = g.dx();
        let mut cdf = Vec::with_capacity(pdf.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in pdf.windows(2) {
            acc += 0.5 * dx * (w[0] + w[1]);
            cdf.push(acc);
        }
        let mass = acc;
        if !((mass - 1.0).abs() <= MASS_TOLERANCE) {
            return Err(GtsError::Normalization { mass, tolerance: MASS_TOLERANCE });
        }
        for c in cdf.iter_mut() {
            *c = (*c / mass).min(1.0);
        }
        let (qu, qx) = strictly_increasing(&cdf, &x);
        Ok(Self {
            spec: g,
            pdf_interp: Pchip::new(x.clone(), pdf.clone()),
            cdf_interp: Pchip::new(x.clone(), cdf.clone()),
            quantile_interp: Pchip::new(qu, qx),
            x,
            pdf,
            cdf,
            mass,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn pdf(&self) -> &[f64] {
        &self.pdf
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Trapezoid mass of the clipped pdf before the CDF was rescaled.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dx(&self) -> f64 {
        self.spec.dx()
    }

    /// Monotone-cubic interpolated density; zero outside the grid.
    pub fn pdf_at(&self, x: f64) -> f64 {
        if x < self.spec.x_min || x > self.spec.x_max {
            return 0.0;
        }
        self.pdf_interp.eval(x).max(0.0)
    }

    pub fn cdf_at(&self, x: f64) -> f64 {
        self.cdf_interp.eval(x)
    }

    /// Inverse CDF by monotone-cubic interpolation of `(cdf, x)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(GtsError::Domain(format!("quantile level {u} outside (0, 1)")));
        }
        Ok(self.quantile_unchecked(u))
    }

    /// [`quantile`](Self::quantile) for `u` already known to be in `(0, 1)`.
    pub fn quantile_unchecked(&self, u: f64) -> f64 {
        self.quantile_interp.eval(u)
    }

    /// Moments of the tabulated density by the trapezoid rule.
    pub fn moments(&self) -> MomentSummary {
        let dx = self.dx();
        let trap = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
            let n = self.x.len();
            let mut s = 0.0;
            for i in 0..n {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                s += w * f(self.x[i], self.pdf[i]);
            }
            s * dx
        };
        let mass = trap(&|_, p| p);
        let mean = trap(&|x, p| x * p) / mass;
        let m2 = trap(&|x, p| (x - mean).powi(2) * p) / mass;
        let m3 = trap(&|x, p| (x - mean).powi(3) * p) / mass;
        let m4 = trap(&|x, p| (x - mean).powi(4) * p) / mass;
        MomentSummary::from_central(mean, m2, m3, m4)
    }
}

// Knots for the inverse CDF: the last point of the leading zero plateau, then
// every point where the CDF strictly increases.
fn strictly_increasing(cdf: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let start = cdf.iter().rposition(|&c| c <= cdf[0]).unwrap_or(0);
    let mut u = vec![cdf[start]];
    let mut xs = vec![x[start]];
    for j in start + 1..cdf.len() {
        if cdf[j] > *u.last().unwrap() {
            u.push(cdf[j]);
            xs.push(x[j]);
        }
    }
    (u, xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::GtsExponent;
    use crate::moments::cumulants;
    use crate::params::GtsParams;
    use proptest::prelude::*;

    fn direct(seq: &[Complex64], a: f64) -> Vec<Complex64> {
        let n = seq.len();
        (0..n)
            .map(|k| {
                seq.iter()
                    .enumerate()
                    .map(|(j, x)| x * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 * a))
                    .sum()
            })
            .collect()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn frft_matches_direct_sum() {
        let x = pseudo_random(64, 7);
        let a = frft(&x, 0.0137);
        let b = direct(&x, 0.0137);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn frft_degenerate_cases() {
        let x = pseudo_random(100, 3);
        let total: Complex64 = x.iter().sum();
        for g in frft(&x, 0.0) {
            assert!((g - total).norm() < 1e-12);
        }
        let mut planner = FftPlanner::new();
        let mut dft = x.clone();
        planner.plan_fft_forward(100).process(&mut dft);
        for (u, v) in frft(&x, 0.01).iter().zip(&dft) {
            assert!((u - v).norm() < 1e-10);
        }
        assert!(frft(&[], 0.3).is_empty());
        assert_eq!(frft(&[Complex64::new(2.0, 1.0)], 0.3), vec![Complex64::new(2.0, 1.0)]);
    }

    proptest! {
        #[test]
        fn frft_is_linear(seed in 0u64..1000, a in -0.5f64..0.5, s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let x = pseudo_random(48, seed);
            let y = pseudo_random(48, seed + 1);
            let combo: Vec<Complex64> = x.iter().zip(&y).map(|(u, v)| u * s + v * t).collect();
            let (fx, fy, fc) = (frft(&x, a), frft(&y, a), frft(&combo, a));
            for k in 0..48 {
                prop_assert!((fc[k] - (fx[k] * s + fy[k] * t)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(255, -1.0, 1.0, 1.0).is_err());
        assert!(GridSpec::new(300, -1.0, 1.0, 1.0).is_err());
        assert!(GridSpec::new(256, 1.0, 1.0, 1.0).is_err());
        assert!(GridSpec::new(256, -1.0, 1.0, 0.0).is_err());
        assert!(GridSpec::new(256, -1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn newton_cotes_integrates_polynomials() {
        let w = newton_cotes_weights(5, 0.1);
        let s: f64 = w.iter().enumerate().map(|(j, w)| w * (j as f64 * 0.1).powi(7)).sum();
        assert!((s - 3f64.powi(8) / 8.0).abs() < 1e-11);
    }

    fn gaussian_grid() -> DensityGrid {
        let g = GridSpec::new(4096, -12.0, 12.0, 8.0).unwrap();
        invert_cf(&|xi: f64| Complex64::new(-0.5 * xi * xi, 0.0), &g, Execution::default())
            .unwrap()
    }

    #[test]
    fn gaussian_inversion() {
        let d = gaussian_grid();
        let sup = d
            .x()
            .iter()
            .zip(d.pdf())
            .map(|(x, p)| (p - (-0.5 * x * x).exp() / (2.0 * PI).sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-8, "{sup}");
        assert!((d.mass() - 1.0).abs() < 1e-4);
        assert!((d.quantile(0.5).unwrap()).abs() < d.dx());
    }

    #[test]
    fn quantile_nodes_and_domain() {
        let d = gaussian_grid();
        for j in [1000, 2048, 2500, 3000] {
            assert_eq!(d.quantile(d.cdf()[j]).unwrap(), d.x()[j]);
        }
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(f64::NAN).is_err());
    }

    #[test]
    fn truncated_spectrum_fails_normalization() {
        let g = GridSpec::new(1024, -3.0, 3.0, 8.0).unwrap();
        let r = invert_cf(&|xi: f64| Complex64::new(-0.5 * xi * xi, 0.0), &g, Execution::Sequential);
        assert!(matches!(r, Err(GtsError::Normalization { .. })));
    }

    #[test]
    fn symmetric_gts_is_symmetric() {
        let p = GtsParams::new(0.0, 0.5, 0.5, 0.6, 0.6, 1.2, 1.2);
        let c = cumulants(&p, 4).unwrap();
        let mut g = GridSpec::for_law(&GtsExponent(p), &c, 4096).unwrap();
        // centre the grid on zero so mirrored nodes coincide
        g.x_max = -g.x_min;
        let d = invert_cf(&GtsExponent(p), &g, Execution::default()).unwrap();
        let n = d.pdf().len();
        for k in 0..n {
            assert!((d.pdf()[k] - d.pdf()[n - 1 - k]).abs() < 1e-8);
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let p = GtsParams::sp500();
        let g = GridSpec::new(4096, -15.0, 15.0, 150.0).unwrap();
        let a = invert_cf(&GtsExponent(p), &g, Execution::Sequential).unwrap();
        let b = invert_cf(&GtsExponent(p), &g, Execution::Parallel).unwrap();
        assert_eq!(a.pdf(), b.pdf());
    }
}
