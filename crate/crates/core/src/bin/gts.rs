use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use gts::estimation::{fit, moment_init, FitOptions};
use gts::exec::Execution;
use gts::exponent::{psi_gts, BdlpExponent, CharExponent, GtsExponent, SdExponent};
use gts::io::{ingest, write_columns, SeriesKind};
use gts::levy::{levy_density_bdlp, levy_density_gts, levy_density_sd};
use gts::moments::{cumulants, marginal_cumulants, stationary_moments, Cumulants};
use gts::ou::{
    build_increment_sampler, increment_cumulants, path_moments, simulate_ensemble, IncrementExponent,
    OuConfig, Start,
};
use gts::params::{GtsParams, Marginal};
use gts::spectral::{invert_cf, DensityGrid, GridSpec, DEFAULT_N};
use gts::validation::{Suite, CHECKS};

#[derive(Parser)]
#[command(name = "gts", version, about = "Generalized tempered stable laws: densities, fits, OU simulation")]
struct Cli {
    /// Directory for outputs written without an explicit --out.
    #[arg(long, global = true, env = "GTS_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Run every loop sequentially.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum-likelihood fit of a return series.
    Fit(FitArgs),
    /// Density, CDF and Lévy density tables plus the characteristic exponent.
    Density(DensityArgs),
    /// Simulate OU-type paths and report their moments.
    Simulate(SimulateArgs),
    /// Cumulants and stationary moments of a parameter set.
    Moments(MomentsArgs),
    /// Run the acceptance checks; exits with status 1 on any failure.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Sp500,
    Bitcoin,
}

#[derive(Args)]
struct ParamArgs {
    /// JSON file with mu, beta_plus, beta_minus, alpha_plus, alpha_minus,
    /// lambda_plus, lambda_minus.
    #[arg(long, conflicts_with = "preset")]
    params: Option<PathBuf>,

    /// Published parameter set, used when --params is absent.
    #[arg(long, value_enum, default_value = "sp500")]
    preset: Preset,
}

impl ParamArgs {
    fn load(&self) -> anyhow::Result<GtsParams> {
        let p = match &self.params {
            Some(path) => read_params(path)?,
            None => match self.preset {
                Preset::Sp500 => GtsParams::sp500(),
                Preset::Bitcoin => GtsParams::bitcoin(),
            },
        };
        p.validate()?;
        Ok(p)
    }
}

fn read_params(path: &Path) -> anyhow::Result<GtsParams> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading parameters from {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Args)]
struct FitArgs {
    /// One-column CSV of prices or percent returns.
    #[arg(long)]
    data: PathBuf,

    #[arg(long, value_enum, default_value = "prices")]
    kind: SeriesKind,

    /// Starting point; the moment match of the data when absent.
    #[arg(long)]
    params: Option<PathBuf>,

    #[arg(long, default_value_t = DEFAULT_N)]
    grid_n: usize,

    #[arg(long, default_value_t = 1e-4)]
    grad_tol: f64,

    #[arg(long, default_value_t = 200)]
    max_iter: usize,

    /// Trace CSV; a JSON copy is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Law {
    Gts,
    Bdlp,
    Sd,
    Increment,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    params: ParamArgs,

    #[arg(long, value_enum, default_value = "gts")]
    law: Law,

    /// Stationary marginal of the OU process, for the increment law.
    #[arg(long, value_enum, default_value = "sd")]
    mode: Marginal,

    #[arg(long, default_value_t = 1.0)]
    lambda_rate: f64,

    #[arg(long, default_value_t = 1.0)]
    dt: f64,

    /// Grid size; by default 16384, raised where the default would alias.
    #[arg(long)]
    grid_n: Option<usize>,

    /// Exponent table covers [-xi_max, xi_max].
    #[arg(long, default_value_t = 10.0)]
    xi_max: f64,

    #[arg(long, default_value_t = 401)]
    xi_points: usize,

    /// Density CSV; the exponent table goes to `<stem>_exponent.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,

    #[arg(long, value_enum, default_value = "sd")]
    mode: Marginal,

    #[arg(long, default_value_t = 5000)]
    steps: usize,

    #[arg(long, default_value_t = 1)]
    paths: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, default_value_t = 1.0)]
    lambda_rate: f64,

    #[arg(long, default_value_t = 1.0)]
    dt: f64,

    /// Fixed starting value; the default draws it from the stationary law.
    #[arg(long)]
    x0: Option<f64>,

    #[arg(long)]
    grid_n: Option<usize>,

    /// Paths CSV; the moment report goes to `<stem>_report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    params: ParamArgs,

    /// Only this marginal; both when absent.
    #[arg(long, value_enum)]
    mode: Option<Marginal>,

    /// JSON file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Comma-separated check ids; all checks when absent.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,

    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

fn output_path(explicit: &Option<PathBuf>, out_dir: &Path, default: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| out_dir.join(default))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let outcome = match &cli.command {
        Command::Fit(a) => cmd_fit(a, &cli.out_dir, exec).map(|_| true),
        Command::Density(a) => cmd_density(a, &cli.out_dir, exec).map(|_| true),
        Command::Simulate(a) => cmd_simulate(a, &cli.out_dir, exec).map(|_| true),
        Command::Moments(a) => cmd_moments(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a, exec),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_fit(a: &FitArgs, out_dir: &Path, exec: Execution) -> anyhow::Result<()> {
    let series = ingest(&a.data, a.kind)?;
    let init = match &a.params {
        Some(path) => read_params(path)?,
        None => moment_init(&series.values)?,
    };
    let opts = FitOptions {
        grad_tol: a.grad_tol,
        max_iter: a.max_iter,
        grid_n: a.grid_n,
        exec,
        ..FitOptions::default()
    };
    let trace = fit(&series.values, &init, &opts)?;
    let path = output_path(&a.out, out_dir, "fit_trace.csv");
    let mut w = create(&path)?;
    trace.write_csv(&mut w)?;
    w.flush()?;
    write_json(&sibling(&path, ".json"), &trace.to_json())?;
    let last = trace.last();
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "converged": trace.converged,
            "reason": trace.reason,
            "iterations": last.iteration,
            "log_likelihood": last.log_likelihood,
            "gradient_norm": last.gradient_norm,
            "max_eigenvalue": last.max_eigenvalue,
            "params": last.params,
        }))?
    );
    Ok(())
}

// BDLP cumulants are k·κ_k since its exponent is ξΨ'(ξ).
fn bdlp_cumulants(p: &GtsParams) -> gts::error::Result<Cumulants> {
    let mut c = cumulants(p, 2)?;
    for (i, k) in c.kappa.iter_mut().enumerate() {
        *k *= (i + 1) as f64;
    }
    Ok(c)
}

fn invert_default<E: CharExponent>(
    e: &E,
    c: &Cumulants,
    n: Option<usize>,
    exec: Execution,
) -> gts::error::Result<DensityGrid> {
    let g = match n {
        Some(n) => GridSpec::for_law(e, c, n)?,
        None => GridSpec::for_law(e, c, DEFAULT_N)?.unaliased(),
    };
    invert_cf(e, &g, exec)
}

fn cmd_density(a: &DensityArgs, out_dir: &Path, exec: Execution) -> anyhow::Result<()> {
    let p = a.params.load()?;
    p.validate_nondegenerate()?;
    if a.xi_points < 2 || !(a.xi_max > 0.0) {
        bail!("the exponent table needs --xi-points ≥ 2 and --xi-max > 0");
    }
    let mut c = OuConfig::new(a.mode, 1, 0);
    c.lambda_rate = a.lambda_rate;
    c.dt = a.dt;
    c.validate()?;
    let inc = IncrementExponent::new(p, &c);
    let (grid, exponent): (DensityGrid, Box<dyn Fn(f64) -> gts::error::Result<Complex64>>) = match a.law {
        Law::Gts => (
            invert_default(&GtsExponent(p), &cumulants(&p, 2)?, a.grid_n, exec)?,
            Box::new(move |xi| Ok(psi_gts(xi, &p))),
        ),
        Law::Bdlp => (
            invert_default(&BdlpExponent(p), &bdlp_cumulants(&p)?, a.grid_n, exec)?,
            Box::new(move |xi| BdlpExponent(p).exponent(xi)),
        ),
        Law::Sd => (
            invert_default(&SdExponent(p), &marginal_cumulants(&p, Marginal::Sd, 2)?, a.grid_n, exec)?,
            Box::new(move |xi| SdExponent(p).exponent(xi)),
        ),
        Law::Increment => (
            invert_default(&inc, &increment_cumulants(&p, &c, 2)?, a.grid_n, exec)?,
            Box::new(move |xi| inc.exponent(xi)),
        ),
    };
    let levy = |x: f64| -> f64 {
        let v = match a.law {
            Law::Gts => levy_density_gts(x, &p),
            Law::Bdlp => levy_density_bdlp(x, &p),
            Law::Sd => levy_density_sd(x, &p),
            Law::Increment => return f64::NAN,
        };
        v.unwrap_or(f64::NAN)
    };
    let levy_col: Vec<f64> = grid.x().iter().map(|&x| levy(x)).collect();
    let path = output_path(&a.out, out_dir, "density.csv");
    let mut w = create(&path)?;
    write_columns(&mut w, &["x", "pdf", "cdf", "levy_density"], &[grid.x(), grid.pdf(), grid.cdf(), &levy_col])?;
    w.flush()?;

    let step = 2.0 * a.xi_max / (a.xi_points - 1) as f64;
    let xis: Vec<f64> = (0..a.xi_points).map(|k| -a.xi_max + k as f64 * step).collect();
    let values = xis.iter().map(|&xi| exponent(xi)).collect::<gts::error::Result<Vec<_>>>()?;
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    let mut w = create(&sibling(&path, "_exponent.csv"))?;
    write_columns(&mut w, &["xi", "re", "im"], &[&xis, &re, &im])?;
    w.flush()?;
    eprintln!("wrote {} (mass {:.6})", path.display(), grid.mass());
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, out_dir: &Path, exec: Execution) -> anyhow::Result<()> {
    if a.paths == 0 {
        bail!("--paths must be at least 1");
    }
    let p = a.params.load()?;
    let mut c = OuConfig::new(a.mode, a.steps, a.seed);
    c.lambda_rate = a.lambda_rate;
    c.dt = a.dt;
    c.start = a.x0.map_or(Start::Stationary, Start::Value);
    let spec = match a.grid_n {
        Some(n) => {
            let e = IncrementExponent::new(p, &c);
            Some(GridSpec::for_law(&e, &increment_cumulants(&p, &c, 2)?, n)?)
        }
        None => None,
    };
    let sampler = build_increment_sampler(&p, &c, spec, exec)?;
    let paths = simulate_ensemble(&sampler, a.paths, exec);

    let path = output_path(&a.out, out_dir, "paths.csv");
    let steps: Vec<f64> = (0..=a.steps).map(|k| k as f64).collect();
    let mut header = vec!["step".to_string()];
    header.extend((0..a.paths).map(|i| format!("path_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut cols: Vec<&[f64]> = vec![&steps];
    cols.extend(paths.iter().map(|s| s.x.as_slice()));
    let mut w = create(&path)?;
    write_columns(&mut w, &header_refs, &cols)?;
    w.flush()?;

    let exact = stationary_moments(&p, a.mode)?;
    let reports: Vec<serde_json::Value> = if a.steps >= 100 {
        paths
            .iter()
            .enumerate()
            .map(|(i, s)| -> anyhow::Result<serde_json::Value> {
                let r = path_moments(s, &p, &c)?;
                Ok(json!({ "path": i, "n_samples": r.n_samples, "rows": r.table() }))
            })
            .collect::<anyhow::Result<_>>()?
    } else {
        Vec::new()
    };
    let report = json!({
        "params": p,
        "config": c,
        "burn_in": c.burn_in(),
        "exact": exact,
        "reports": reports,
    });
    write_json(&sibling(&path, "_report.json"), &report)?;
    eprintln!("wrote {} paths to {}", a.paths, path.display());
    Ok(())
}

fn cmd_moments(a: &MomentsArgs) -> anyhow::Result<()> {
    let p = a.params.load()?;
    let modes = match a.mode {
        Some(m) => vec![m],
        None => vec![Marginal::Gts, Marginal::Sd],
    };
    let stationary = modes
        .iter()
        .map(|&m| stationary_moments(&p, m))
        .collect::<gts::error::Result<Vec<_>>>()?;
    let value = json!({
        "params": p,
        "cumulants": cumulants(&p, 4)?.kappa,
        "stationary": stationary,
    });
    let text = serde_json::to_string_pretty(&value)?;
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_validate(a: &ValidateArgs, exec: Execution) -> anyhow::Result<bool> {
    let known: Vec<u8> = CHECKS.iter().map(|c| c.0).collect();
    if let Some(bad) = a.only.iter().find(|id| !known.contains(id)) {
        bail!("unknown check id {bad}; known ids are 1 to {}", known.len());
    }
    let suite = Suite { exec, ..Suite::default() };
    let report = if a.only.is_empty() { suite.run_all() } else { suite.run(&a.only) };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{report}");
    }
    Ok(report.all_passed())
}
