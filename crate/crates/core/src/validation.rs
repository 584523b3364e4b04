//! The acceptance checks behind `gts validate`.
//!
//! Each check returns a [`CheckResult`]; failures are report content, not
//! errors. The cumulant routine is injectable so that a perturbed formula can
//! be shown to fail the suite.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GtsError, Result};
use crate::estimation::{fit, moment_init, FitOptions};
use crate::exec::Execution;
use crate::exponent::{
    bdlp_exponent, psi_gts, psi_one_sided, sd_exponent, sd_exponent_inner_form, GtsExponent,
};
use crate::levy::levy_density_sd;
use crate::moments::{cumulants, Cumulants, StationaryMoments};
use crate::ou::{build_increment_sampler, marginal_grid, sample_iid, simulate_seeded, OuConfig, Start};
use crate::params::{GtsParams, Marginal, Side};
use crate::spectral::{cutoff_frequency, frft, invert_cf, GridSpec};

pub type CumulantFn = fn(&GtsParams, usize) -> Result<Cumulants>;

/// Every check, by id and name.
pub const CHECKS: [(u8, &str); 9] = [
    (1, "cumulant mean reproduction"),
    (2, "skewness and kurtosis reproduction"),
    (3, "standard deviation columns"),
    (4, "exponent identities"),
    (5, "SD Levy density asymptotics"),
    (6, "inversion fidelity"),
    (7, "simulation convergence"),
    (8, "MLE round trip"),
    (9, "FRFT kernel"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{}] {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub results: Vec<CheckResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        let passed = self.results.iter().filter(|r| r.passed).count();
        write!(f, "{passed}/{} checks passed", self.results.len())
    }
}

// Collects named sub-checks into one verdict.
#[derive(Default)]
struct Tally {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        let line = format!("{what} {got:.6} vs {want} (tol {tol:e})");
        if ok {
            self.notes.push(line);
        } else {
            self.failures.push(line);
        }
    }

    fn require(&mut self, what: String, ok: bool) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn finish(self, id: u8) -> CheckResult {
        let passed = self.failures.is_empty();
        let detail = if passed { self.notes.join("; ") } else { self.failures.join("; ") };
        result(id, passed, detail)
    }
}

fn result(id: u8, passed: bool, detail: String) -> CheckResult {
    let name = CHECKS.iter().find(|(i, _)| *i == id).map_or("unknown", |(_, n)| n);
    CheckResult { id, name, passed, detail }
}

fn failed(id: u8, e: GtsError) -> CheckResult {
    result(id, false, format!("error: {e}"))
}

/// The grid of 201 frequencies on `[-10, 10]`.
pub fn xi_grid() -> Vec<f64> {
    (0..=200).map(|k| -10.0 + 0.1 * k as f64).collect()
}

/// Configuration of the suite.
#[derive(Debug, Clone, Copy)]
pub struct Suite {
    pub cumulants: CumulantFn,
    pub exec: Execution,
    /// Seeds for the simulation check.
    pub n_seeds: u64,
    /// Likelihood grid size for the MLE check.
    pub fit_grid_n: usize,
}

impl Default for Suite {
    fn default() -> Self {
        Self { cumulants, exec: Execution::default(), n_seeds: 50, fit_grid_n: 65536 }
    }
}

impl Suite {
    fn moments(&self, p: &GtsParams, mode: Marginal) -> Result<StationaryMoments> {
        let mut c = (self.cumulants)(p, 4)?;
        if mode == Marginal::Sd {
            for (i, k) in c.kappa.iter_mut().enumerate() {
                *k /= (i + 1) as f64;
            }
        }
        StationaryMoments::from_cumulants(mode, &c)
    }

    /// Runs the checks with the given ids, in order. Unknown ids are ignored.
    pub fn run(&self, ids: &[u8]) -> Report {
        let results = ids
            .iter()
            .filter_map(|&id| match id {
                1 => Some(self.cumulant_means()),
                2 => Some(self.shape_moments()),
                3 => Some(self.std_devs()),
                4 => Some(exponent_identities()),
                5 => Some(sd_asymptotics()),
                6 => Some(self.inversion()),
                7 => Some(self.simulation()),
                8 => Some(self.mle_round_trip()),
                9 => Some(frft_kernel()),
                _ => None,
            })
            .collect();
        Report { results }
    }

    pub fn run_all(&self) -> Report {
        let ids: Vec<u8> = CHECKS.iter().map(|(i, _)| *i).collect();
        self.run(&ids)
    }

    pub fn cumulant_means(&self) -> CheckResult {
        let mut t = Tally::default();
        for (label, p, want) in
            [("S&P", GtsParams::sp500(), 0.04013), ("Bitcoin", GtsParams::bitcoin(), 0.14890)]
        {
            match (self.cumulants)(&p, 1) {
                Ok(c) => t.close(&format!("{label} k1"), c.get(1), want, 2e-4),
                Err(e) => return failed(1, e),
            }
        }
        t.finish(1)
    }

    pub fn shape_moments(&self) -> CheckResult {
        let mut t = Tally::default();
        let cases = [
            ("S&P", GtsParams::sp500(), -0.57964, -0.54649, 8.92320),
            ("Bitcoin", GtsParams::bitcoin_moment_tables(), -0.31987, -0.30158, 9.74634),
        ];
        for (label, p, skew_gts, skew_sd, kurt) in cases {
            for (mode, skew) in [(Marginal::Gts, skew_gts), (Marginal::Sd, skew_sd)] {
                let m = match self.moments(&p, mode) {
                    Ok(m) => m,
                    Err(e) => return failed(2, e),
                };
                t.close(&format!("{label} {mode:?} skewness"), m.skewness, skew, 1e-3);
                t.close(&format!("{label} {mode:?} kurtosis"), m.kurtosis, kurt, 2e-3);
            }
        }
        t.finish(2)
    }

    pub fn std_devs(&self) -> CheckResult {
        let mut t = Tally::default();
        let cases = [
            ("S&P", GtsParams::sp500(), 1.09475, 0.77410, 2e-3),
            ("Bitcoin", GtsParams::bitcoin_moment_tables(), 3.98664, 2.81898, 5e-3),
        ];
        for (label, p, sd_gts, sd_sd, tol) in cases {
            for (mode, want) in [(Marginal::Gts, sd_gts), (Marginal::Sd, sd_sd)] {
                match self.moments(&p, mode) {
                    Ok(m) => t.close(&format!("{label} {mode:?} std dev"), m.std_dev, want, tol),
                    Err(e) => return failed(3, e),
                }
            }
        }
        t.finish(3)
    }

    /// The Gaussian inversion plus grid moments of the S&P law on a ±25 sd
    /// grid, wide enough that truncation stays far below the tolerance.
    pub fn inversion(&self) -> CheckResult {
        let mut t = Tally::default();
        let gauss = |xi: f64| Complex64::new(-0.5 * xi * xi, 0.0);
        let g = match GridSpec::new(4096, -12.0, 12.0, 8.0) {
            Ok(g) => g,
            Err(e) => return failed(6, e),
        };
        match invert_cf(&gauss, &g, self.exec) {
            Ok(d) => {
                let norm = (2.0 * std::f64::consts::PI).sqrt();
                let sup = d
                    .x()
                    .iter()
                    .zip(d.pdf())
                    .map(|(x, f)| (f - (-0.5 * x * x).exp() / norm).abs())
                    .fold(0.0, f64::max);
                t.require(format!("Gaussian sup error {sup:.2e} (tol 1e-8)"), sup < 1e-8);
            }
            Err(e) => return failed(6, e),
        }
        let p = GtsParams::sp500();
        let run = || -> Result<(Cumulants, crate::moments::MomentSummary)> {
            let c = (self.cumulants)(&p, 4)?;
            let sd = c.get(2).sqrt();
            let e = GtsExponent(p);
            let xi_max = cutoff_frequency(&e, 1.0 / sd)?;
            let g = GridSpec::new(16384, c.get(1) - 25.0 * sd, c.get(1) + 25.0 * sd, xi_max)?;
            Ok((c, invert_cf(&e, &g, self.exec)?.moments()))
        };
        let (c, m) = match run() {
            Ok(v) => v,
            Err(e) => return failed(6, e),
        };
        let k2 = c.get(2);
        let want = [
            ("mean", m.mean, c.get(1)),
            ("variance", m.variance, k2),
            ("skewness", m.skewness, c.get(3) / k2.powf(1.5)),
            ("kurtosis", m.kurtosis, 3.0 + c.get(4) / (k2 * k2)),
        ];
        for (what, got, exact) in want {
            let rel = ((got - exact) / exact).abs();
            t.require(format!("grid {what} rel error {rel:.2e} (tol 1e-3)"), rel <= 1e-3);
        }
        t.finish(6)
    }

    /// One 5000-step stationary-start path per seed, S&P parameters, SD
    /// marginal. Mean and std dev within 3% and skewness and kurtosis within
    /// 10% for at least 90% of seeds; the median over seeds of the largest
    /// absolute error must not increase across prefixes of 1000, 1500, 2500
    /// and 5000 steps.
    pub fn simulation(&self) -> CheckResult {
        let p = GtsParams::sp500();
        let mut c = OuConfig::new(Marginal::Sd, 5000, 0);
        c.start = Start::Stationary;
        let exact = match self.moments(&p, Marginal::Sd) {
            Ok(m) => m,
            Err(e) => return failed(7, e),
        };
        let sampler = match build_increment_sampler(&p, &c, None, self.exec) {
            Ok(s) => s,
            Err(e) => return failed(7, e),
        };
        let sizes = [1000usize, 1500, 2500, 5000];
        let rows: Vec<(bool, [f64; 4])> =
            crate::exec::map(self.n_seeds as usize, self.exec, |i| {
                let path = simulate_seeded(&sampler, i as u64 + 1, 0);
                let mut worst = [0.0; 4];
                let mut ok = false;
                for (j, &n) in sizes.iter().enumerate() {
                    let m = crate::moments::MomentSummary::from_samples(&path.x[..=n]);
                    let e = [
                        rel_pct(m.mean, exact.mean),
                        rel_pct(m.std_dev, exact.std_dev),
                        rel_pct(m.skewness, exact.skewness),
                        rel_pct(m.kurtosis, exact.kurtosis),
                    ];
                    worst[j] = e.iter().copied().fold(0.0, f64::max);
                    if n == 5000 {
                        ok = e[0] <= 3.0 && e[1] <= 3.0 && e[2] <= 10.0 && e[3] <= 10.0;
                    }
                }
                (ok, worst)
            });
        let passing = rows.iter().filter(|r| r.0).count();
        let medians: Vec<f64> = (0..sizes.len())
            .map(|j| median(rows.iter().map(|r| r.1[j]).collect()))
            .collect();
        let trend = medians.windows(2).all(|w| w[1] <= w[0]);
        let mut t = Tally::default();
        let need = (0.9 * self.n_seeds as f64).ceil() as usize;
        t.require(
            format!("{passing}/{} seeds within tolerance (need {need})", self.n_seeds),
            passing >= need,
        );
        t.require(
            format!(
                "median max error % by size {:?}: {}",
                sizes,
                medians.iter().map(|m| format!("{m:.1}")).collect::<Vec<_>>().join(", ")
            ),
            trend,
        );
        t.finish(7)
    }

    /// Fits 5000 draws from the S&P law, starting from the moment match.
    pub fn mle_round_trip(&self) -> CheckResult {
        let p = GtsParams::sp500();
        let run = || -> Result<crate::estimation::FitTrace> {
            let g = marginal_grid(&p, Marginal::Gts, 16384, self.exec)?;
            let data = sample_iid(&g, 5000, 2024);
            let init = moment_init(&data)?;
            let opts = FitOptions {
                grad_tol: 1e-3,
                grid_n: self.fit_grid_n,
                exec: self.exec,
                ..FitOptions::default()
            };
            fit(&data, &init, &opts)
        };
        let trace = match run() {
            Ok(t) => t,
            Err(e) => return failed(8, e),
        };
        let last = trace.last();
        let mut t = Tally::default();
        t.require(
            format!(
                "stop {:?} after {} iterations, |g| {:.2e} (tol 1e-3)",
                trace.reason, last.iteration, last.gradient_norm
            ),
            trace.converged && last.gradient_norm <= 1e-3,
        );
        t.require(format!("max eigenvalue {:.3}", last.max_eigenvalue), last.max_eigenvalue < 0.0);
        let monotone =
            trace.states.windows(2).all(|w| w[1].log_likelihood >= w[0].log_likelihood);
        t.require(format!("Log(ML) nondecreasing over {} states", trace.states.len()), monotone);
        let sup = (0..=200)
            .map(|k| -5.0 + 0.05 * k as f64)
            .map(|xi| (psi_gts(xi, &last.params) - psi_gts(xi, &p)).norm())
            .fold(0.0, f64::max);
        t.require(format!("sup |dPsi| on [-5, 5] {sup:.4} (tol 0.05)"), sup < 0.05);
        t.finish(8)
    }
}

fn rel_pct(got: f64, exact: f64) -> f64 {
    (100.0 * (got - exact) / exact.abs()).abs()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Hermitian symmetry, origin normalization, `ξΨ'(ξ) = BDLP(ξ)`, the two SD
/// routes and the β → 0 limit over [`xi_grid`].
pub fn exponent_identities() -> CheckResult {
    let mut t = Tally::default();
    let grid = xi_grid();
    for (label, p) in [("S&P", GtsParams::sp500()), ("Bitcoin", GtsParams::bitcoin())] {
        let run = || -> Result<[f64; 5]> {
            let mut herm: f64 = 0.0;
            let mut link: f64 = 0.0;
            let mut two_form: f64 = 0.0;
            for &xi in &grid {
                let sd = sd_exponent(xi, &p)?;
                for (a, b) in [
                    (psi_gts(-xi, &p), psi_gts(xi, &p)),
                    (bdlp_exponent(-xi, &p), bdlp_exponent(xi, &p)),
                    (sd_exponent(-xi, &p)?, sd),
                ] {
                    herm = herm.max((a - b.conj()).norm() / (1.0 + b.norm()));
                }
                if xi != 0.0 {
                    let h = 1e-5;
                    let d = (psi_gts(xi + h, &p) - psi_gts(xi - h, &p)) / (2.0 * h);
                    link = link.max((d * xi - bdlp_exponent(xi, &p)).norm());
                }
                two_form = two_form.max((sd - sd_exponent_inner_form(xi, &p)?).norm());
            }
            let origin = psi_gts(0.0, &p).norm()
                + bdlp_exponent(0.0, &p).norm()
                + sd_exponent(0.0, &p)?.norm();
            let mut limit: f64 = 0.0;
            for side in [p.plus(), p.minus()] {
                let near = Side { beta: 1e-8, ..side };
                for &xi in &grid {
                    let exact =
                        side.alpha * (side.lambda / Complex64::new(side.lambda, -xi)).ln();
                    limit = limit.max((psi_one_sided(xi, near) - exact).norm());
                }
            }
            Ok([herm, origin, link, two_form, limit])
        };
        let [herm, origin, link, two_form, limit] = match run() {
            Ok(v) => v,
            Err(e) => return failed(4, e),
        };
        t.require(format!("{label} Hermitian rel error {herm:.1e}"), herm <= 1e-12);
        t.require(format!("{label} |E(0)| {origin:.1e}"), origin == 0.0);
        t.require(format!("{label} BDLP link {link:.1e} (tol 1e-6)"), link < 1e-6);
        t.require(format!("{label} SD two forms {two_form:.1e} (tol 1e-9)"), two_form < 1e-9);
        t.require(format!("{label} beta->0 {limit:.1e} (tol 1e-6)"), limit < 1e-6);
    }
    t.finish(4)
}

/// `U(x)x^{1+β}` against `α/β` at `x = 1e-6` and `U(x)x^{2+β}e^{λx}` against
/// `α/λ` at `x = 50`, both sides, within 1%.
pub fn sd_asymptotics() -> CheckResult {
    let mut t = Tally::default();
    for (label, p) in [("S&P", GtsParams::sp500()), ("Bitcoin", GtsParams::bitcoin())] {
        for (side_label, side, sign) in [("+", p.plus(), 1.0), ("-", p.minus(), -1.0)] {
            let ratios = (|| -> Result<(f64, f64)> {
                let x0 = 1e-6;
                let near = levy_density_sd(sign * x0, &p)? * x0.powf(1.0 + side.beta)
                    / (side.alpha / side.beta);
                let x1 = 50.0;
                let far = levy_density_sd(sign * x1, &p)?
                    * x1.powf(2.0 + side.beta)
                    * (side.lambda * x1).exp()
                    / (side.alpha / side.lambda);
                Ok((near, far))
            })();
            let (near, far) = match ratios {
                Ok(r) => r,
                Err(e) => return failed(5, e),
            };
            t.require(format!("{label} {side_label} ratio at 1e-6 {near:.5}"), (near - 1.0).abs() <= 0.01);
            t.require(format!("{label} {side_label} ratio at 50 {far:.5}"), (far - 1.0).abs() <= 0.01);
        }
    }
    t.finish(5)
}

/// Bluestein FRFT against direct summation, 20 random trials at N = 64 and
/// N = 256.
pub fn frft_kernel() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for n in [64usize, 256] {
        for _ in 0..20 {
            let seq: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let a: f64 = rng.random_range(-0.5..0.5);
            let fast = frft(&seq, a);
            for (k, f) in fast.iter().enumerate() {
                let direct: Complex64 = seq
                    .iter()
                    .enumerate()
                    .map(|(j, s)| {
                        // j·k·a split into the rounded product and its exact error
                        let m = (j * k) as f64;
                        let p = m * a;
                        let turns = p.fract() + m.mul_add(a, -p);
                        let phase = -2.0 * std::f64::consts::PI * turns;
                        s * Complex64::from_polar(1.0, phase)
                    })
                    .sum();
                worst = worst.max((f - direct).norm());
            }
        }
    }
    result(9, worst <= 1e-10, format!("max abs error {worst:.2e} over 40 trials (tol 1e-10)"))
}
