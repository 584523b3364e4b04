use gts::exec::Execution;
use gts::error::GtsError;
use gts::exponent::{psi_gts, BdlpExponent, GtsExponent};
use gts::moments::{cumulants, Cumulants};
use gts::params::GtsParams;
use gts::spectral::{invert_cf, DensityGrid, GridSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn sp500_grid() -> &'static DensityGrid {
    static GRID: OnceLock<DensityGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let p = GtsParams::sp500();
        let e = GtsExponent(p);
        let g = GridSpec::for_law(&e, &cumulants(&p, 2).unwrap(), 16384).unwrap();
        invert_cf(&e, &g, Execution::default()).unwrap()
    })
}

#[test]
fn grid_invariants() {
    let d = sp500_grid();
    assert!((d.mass() - 1.0).abs() < 1e-4);
    assert!(d.pdf().iter().all(|&f| f >= 0.0));
    assert!(d.cdf().windows(2).all(|w| w[1] >= w[0]));
    let last = *d.cdf().last().unwrap();
    assert!((1.0 - 1e-3..=1.0).contains(&last));
}

// Trapezoid re-transform of the tabulated pdf against exp(Ψ).
#[test]
fn round_trip_recovers_characteristic_function() {
    let d = sp500_grid();
    let p = GtsParams::sp500();
    let dx = d.dx();
    let half = d.spec().xi_max / 2.0;
    let mut worst: f64 = 0.0;
    for k in 0..=400 {
        let xi = -half + k as f64 * half / 200.0;
        let n = d.x().len();
        let mut s = Complex64::new(0.0, 0.0);
        for (i, (&x, &f)) in d.x().iter().zip(d.pdf()).enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            s += Complex64::from_polar(w * f, xi * x);
        }
        worst = worst.max((s * dx - psi_gts(xi, &p).exp()).norm());
    }
    assert!(worst < 1e-6, "worst {worst:e}");
}

#[test]
fn grid_moments_track_cumulants_on_a_wide_grid() {
    let p = GtsParams::sp500();
    let c: Cumulants = cumulants(&p, 4).unwrap();
    let sd = c.get(2).sqrt();
    let e = GtsExponent(p);
    let base = GridSpec::for_law(&e, &c, 16384).unwrap();
    let g = GridSpec::new(16384, c.get(1) - 30.0 * sd, c.get(1) + 30.0 * sd, base.xi_max).unwrap();
    let m = invert_cf(&e, &g, Execution::default()).unwrap().moments();
    let k2 = c.get(2);
    assert!((m.mean / c.get(1) - 1.0).abs() < 1e-4);
    assert!((m.variance / k2 - 1.0).abs() < 1e-4);
    assert!((m.skewness / (c.get(3) / k2.powf(1.5)) - 1.0).abs() < 1e-4);
    assert!((m.kurtosis / (3.0 + c.get(4) / (k2 * k2)) - 1.0).abs() < 1e-4);
}

// Bisection on the tabulated CDF brackets the interpolated quantile.
#[test]
fn tail_quantiles_bracketed_by_bisection() {
    let d = sp500_grid();
    for u in [0.01, 0.99] {
        let (mut lo, mut hi) = (0usize, d.cdf().len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if d.cdf()[mid] < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = d.quantile(u).unwrap();
        assert!(d.x()[lo] <= q && q <= d.x()[hi], "u {u}: {q} not in [{}, {}]", d.x()[lo], d.x()[hi]);
    }
}

#[test]
fn quantile_inverts_cdf_within_a_cell() {
    let d = sp500_grid();
    for k in 0..=998 {
        let u = 1e-3 + k as f64 * (1.0 - 2e-3) / 998.0;
        let x = d.quantile(u).unwrap();
        assert!((d.cdf_at(x) - u).abs() < 1e-6, "u {u}");
        assert!((d.quantile(d.cdf_at(x)).unwrap() - x).abs() <= d.dx());
    }
    assert!(d.quantile(0.0).is_err() && d.quantile(1.0).is_err());
}

#[test]
fn symmetric_law_is_centered() {
    let p = GtsParams::new(0.0, 0.5, 0.5, 0.6, 0.6, 1.0, 1.0);
    let e = GtsExponent(p);
    let g = GridSpec::for_law(&e, &cumulants(&p, 2).unwrap(), 4096).unwrap();
    let d = invert_cf(&e, &g, Execution::default()).unwrap();
    assert!(d.quantile(0.5).unwrap().abs() <= d.dx());
    let n = d.pdf().len();
    for i in 0..n {
        assert!((d.pdf()[i] - d.pdf()[n - 1 - i]).abs() < 1e-8);
    }
}

// The BDLP law decays slowly in frequency; at the default size its grid wraps.
#[test]
fn slow_decay_needs_a_larger_grid() {
    let p = GtsParams::bitcoin();
    let mut c = cumulants(&p, 2).unwrap();
    for (i, k) in c.kappa.iter_mut().enumerate() {
        *k *= (i + 1) as f64;
    }
    let e = BdlpExponent(p);
    let g = GridSpec::for_law(&e, &c, 16384).unwrap();
    assert!(g.period() < g.x_max - g.x_min);
    assert!(matches!(invert_cf(&e, &g, Execution::default()), Err(GtsError::Normalization { .. })));
    let wide = g.unaliased();
    assert!(wide.n_points > 16384 && wide.period() >= 4.0 * (wide.x_max - wide.x_min));
    assert_eq!((wide.x_min, wide.x_max, wide.xi_max), (g.x_min, g.x_max, g.xi_max));
    let d = invert_cf(&e, &wide, Execution::default()).unwrap();
    assert!((d.mass() - 1.0).abs() < 1e-6);
    let k = d.moments();
    assert!((k.mean / c.get(1) - 1.0).abs() < 1e-4);
    let sp = GridSpec::for_law(&GtsExponent(GtsParams::sp500()), &cumulants(&GtsParams::sp500(), 2).unwrap(), 16384).unwrap();
    assert_eq!(sp.unaliased(), sp);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_is_monotone(a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
        prop_assume!(a < 1.0 && b < 1.0);
        let d = sp500_grid();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(d.quantile(lo).unwrap() <= d.quantile(hi).unwrap());
    }

    #[test]
    fn pdf_at_nodes_is_exact(i in 0usize..16384) {
        let d = sp500_grid();
        prop_assert_eq!(d.pdf_at(d.x()[i]), d.pdf()[i]);
    }
}
