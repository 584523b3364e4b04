//! Maximum-likelihood fitting of the seven GTS parameters by damped
//! Newton–Raphson on an FRFT likelihood.

use serde::Serialize;

use crate::error::{GtsError, Result};
use crate::exec::{self, Execution};
use crate::exponent::GtsExponent;
use crate::moments::{cumulants, MomentSummary};
use crate::params::{GtsParams, PARAM_NAMES};
use crate::special::gamma;
use crate::spectral::{invert_cf, GridSpec, DEFAULT_N};

pub type Vec7 = [f64; 7];
pub type Mat7 = [[f64; 7]; 7];

/// Lower bound applied to interpolated densities before taking logs.
pub const PDF_FLOOR: f64 = 1e-300;

/// `Σ ln f(x_j)` with `f` obtained by inverting the GTS characteristic
/// function on `g` (widened first if any observation falls outside it).
pub fn log_likelihood(data: &[f64], p: &GtsParams, g: &GridSpec, exec: Execution) -> Result<f64> {
    if data.is_empty() {
        return Err(GtsError::Domain("log-likelihood of an empty sample".into()));
    }
    p.validate_nondegenerate()?;
    let g = covering_grid(g, data);
    let d = invert_cf(&GtsExponent(*p), &g, exec)?;
    Ok(exec::sum(data.len(), exec, |i| d.pdf_at(data[i]).max(PDF_FLOOR).ln()))
}

/// `g` widened by a tenth of the data range on any side the data overflow.
pub fn covering_grid(g: &GridSpec, data: &[f64]) -> GridSpec {
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.1 * (hi - lo).max(g.x_max - g.x_min);
    let mut out = *g;
    if lo < g.x_min {
        out.x_min = lo - pad;
    }
    if hi > g.x_max {
        out.x_max = hi + pad;
    }
    out
}

/// Default likelihood grid for `p`: the default density grid, widened to
/// cover `data`.
pub fn likelihood_grid(data: &[f64], p: &GtsParams, n_points: usize) -> Result<GridSpec> {
    let c = cumulants(p, 2)?;
    let g = GridSpec::for_law(&GtsExponent(*p), &c, n_points)?;
    Ok(covering_grid(&g, data))
}

fn in_domain(v: &Vec7) -> bool {
    GtsParams::from_vec(v).validate_nondegenerate().is_ok()
}

// in the domain and far enough from its edge for a central stencil
fn admissible(v: &Vec7) -> bool {
    in_domain(v) && fd_steps(v).is_ok()
}

/// Finite-difference steps `1e-4·max(|V_j|, 1e-2)`, halved (at most five
/// times) until both `V_j ± h_j` stay in the domain.
pub fn fd_steps(v: &Vec7) -> Result<Vec7> {
    let mut h = [0.0; 7];
    for j in 0..7 {
        let mut step = 1e-4 * v[j].abs().max(1e-2);
        let mut ok = false;
        for _ in 0..=5 {
            let mut up = *v;
            let mut down = *v;
            up[j] += step;
            down[j] -= step;
            if in_domain(&up) && in_domain(&down) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if !ok {
            return Err(GtsError::StepCollision { param: PARAM_NAMES[j] });
        }
        h[j] = step;
    }
    Ok(h)
}

/// Central-difference gradient and symmetrized Hessian of `f` at `v`.
///
/// The 1 + 2·7 + 4·21 stencil evaluations are independent and run under
/// `exec`.
pub fn fd_score_and_hessian<F>(f: F, v: &Vec7, h: &Vec7, exec: Execution) -> Result<(Vec7, Mat7)>
where
    F: Fn(&Vec7) -> Result<f64> + Sync + Send,
{
    let mut points: Vec<Vec7> = vec![*v];
    for j in 0..7 {
        for s in [1.0, -1.0] {
            let mut u = *v;
            u[j] += s * h[j];
            points.push(u);
        }
    }
    for i in 0..7 {
        for j in i + 1..7 {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut u = *v;
                u[i] += si * h[i];
                u[j] += sj * h[j];
                points.push(u);
            }
        }
    }
    let values: Vec<f64> =
        exec::map(points.len(), exec, |k| f(&points[k])).into_iter().collect::<Result<_>>()?;
    let f0 = values[0];
    let mut grad = [0.0; 7];
    let mut hess = [[0.0; 7]; 7];
    for j in 0..7 {
        let (fp, fm) = (values[1 + 2 * j], values[2 + 2 * j]);
        grad[j] = (fp - fm) / (2.0 * h[j]);
        hess[j][j] = (fp - 2.0 * f0 + fm) / (h[j] * h[j]);
    }
    let mut k = 15;
    for i in 0..7 {
        for j in i + 1..7 {
            let (pp, pm, mp, mm) = (values[k], values[k + 1], values[k + 2], values[k + 3]);
            k += 4;
            let d = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            hess[i][j] = d;
            hess[j][i] = d;
        }
    }
    Ok((grad, symmetrize(&hess)))
}

fn symmetrize(h: &Mat7) -> Mat7 {
    let mut s = *h;
    for i in 0..7 {
        for j in 0..7 {
            s[i][j] = 0.5 * (h[i][j] + h[j][i]);
        }
    }
    s
}

/// Gradient and Hessian of [`log_likelihood`] in the parameter vector
/// `[μ, β₊, β₋, α₊, α₋, λ₊, λ₋]`.
pub fn score_and_hessian(
    data: &[f64],
    p: &GtsParams,
    g: &GridSpec,
    exec: Execution,
) -> Result<(Vec7, Mat7)> {
    let v = p.to_vec();
    let h = fd_steps(&v)?;
    let g = covering_grid(g, data);
    // the stencil runs in parallel, so each likelihood stays sequential
    let f = |u: &Vec7| log_likelihood(data, &GtsParams::from_vec(u), &g, Execution::Sequential);
    fd_score_and_hessian(f, &v, &h, exec)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations,
/// swept until the off-diagonal norm is below `1e-12·max(1, ‖H‖_F)`.
/// Returns eigenvalues ascending and the matching eigenvectors as columns.
pub fn symmetric_eigen(h: &Mat7) -> (Vec7, Mat7) {
    let mut a = symmetrize(h);
    let mut q = [[0.0; 7]; 7];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frob = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-12 * frob.max(1.0);
    for _ in 0..100 {
        let off = (0..7)
            .flat_map(|i| (0..7).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off < tol {
            break;
        }
        for p in 0..6 {
            for r in p + 1..7 {
                if a[p][r] == 0.0 {
                    continue;
                }
                let theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..7 {
                    let (akp, akr) = (a[k][p], a[k][r]);
                    a[k][p] = c * akp - s * akr;
                    a[k][r] = s * akp + c * akr;
                }
                for k in 0..7 {
                    let (apk, ark) = (a[p][k], a[r][k]);
                    a[p][k] = c * apk - s * ark;
                    a[r][k] = s * apk + c * ark;
                }
                for row in q.iter_mut() {
                    let (qp, qr) = (row[p], row[r]);
                    row[p] = c * qp - s * qr;
                    row[r] = s * qp + c * qr;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..7).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let mut values = [0.0; 7];
    let mut vectors = [[0.0; 7]; 7];
    for (col, &i) in order.iter().enumerate() {
        values[col] = a[i][i];
        for k in 0..7 {
            vectors[k][col] = q[k][i];
        }
    }
    (values, vectors)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(h: &Mat7) -> Vec7 {
    symmetric_eigen(h).0
}

/// Largest eigenvalue of a symmetric 7×7 matrix.
pub fn max_eigenvalue(h: &Mat7) -> f64 {
    symmetric_eigenvalues(h)[6]
}

/// Smallest absolute pivot accepted by [`solve`].
pub const PIVOT_TOL: f64 = 1e-12;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Mat7, b: &Vec7) -> Option<Vec7> {
    let mut m = *a;
    let mut x = *b;
    for col in 0..7 {
        let piv = (col..7).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < PIVOT_TOL {
            return None;
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..7 {
            let f = m[r][col] / m[col][col];
            for c in col..7 {
                m[r][c] -= f * m[col][c];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..7).rev() {
        let mut s = x[col];
        for c in col + 1..7 {
            s -= m[col][c] * x[c];
        }
        x[col] = s / m[col][col];
    }
    Some(x)
}

fn norm(v: &Vec7) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &Vec7, b: &Vec7) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Serialize)]
pub struct FitState {
    pub iteration: usize,
    pub params: GtsParams,
    pub log_likelihood: f64,
    pub gradient: Vec7,
    pub hessian: Mat7,
    pub gradient_norm: f64,
    pub max_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    GradientTol,
    MaxIter,
    LineSearchFail,
    SingularHessian,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitTrace {
    pub states: Vec<FitState>,
    pub converged: bool,
    pub reason: StopReason,
    pub grid: GridSpec,
}

impl FitTrace {
    pub fn last(&self) -> &FitState {
        self.states.last().expect("a trace holds at least the initial state")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub grid_n: usize,
    /// Fixed likelihood grid; derived from the initial guess when `None`.
    pub grid: Option<GridSpec>,
    pub exec: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-4,
            max_iter: 200,
            max_halvings: 20,
            grid_n: DEFAULT_N,
            grid: None,
            exec: Execution::default(),
        }
    }
}

fn evaluate_state(
    data: &[f64],
    v: &Vec7,
    ll: f64,
    g: &GridSpec,
    iteration: usize,
    exec: Execution,
) -> Result<FitState> {
    let p = GtsParams::from_vec(v);
    let (gradient, hessian) = score_and_hessian(data, &p, g, exec)?;
    Ok(FitState {
        iteration,
        params: p,
        log_likelihood: ll,
        gradient_norm: norm(&gradient),
        max_eigenvalue: max_eigenvalue(&hessian),
        gradient,
        hessian,
    })
}

/// Ascent direction. A negative definite Hessian gives the Newton step
/// `−H⁻¹g`; otherwise each eigenvalue `e` of `H` is replaced by
/// `−max(|e|, 1e-8·max|e|)` before inverting, which keeps the Newton step
/// along directions of negative curvature and reverses it along the others.
/// `None` means the Newton solve met a pivot below [`PIVOT_TOL`].
fn newton_direction(s: &FitState) -> Option<Vec7> {
    if s.max_eigenvalue < 0.0 {
        let d = solve(&s.hessian, &s.gradient.map(|x| -x))?;
        if dot(&d, &s.gradient) > 0.0 {
            return Some(d);
        }
    }
    let (values, q) = symmetric_eigen(&s.hessian);
    let top = values.iter().map(|e| e.abs()).fold(0.0, f64::max);
    if top == 0.0 {
        return None;
    }
    let mut d = [0.0; 7];
    for col in 0..7 {
        let e = values[col].abs().max(1e-8 * top);
        let proj: f64 = (0..7).map(|k| q[k][col] * s.gradient[k]).sum();
        for k in 0..7 {
            d[k] += q[k][col] * proj / e;
        }
    }
    Some(d)
}

/// Sufficient-increase constant of the backtracking line search.
pub const ARMIJO: f64 = 1e-4;

/// Damped Newton–Raphson maximization of the log-likelihood from `init`.
///
/// Each iteration records a [`FitState`]. A step `t·d` is accepted at the
/// first of `t = 1, 1/2, 1/4, …` (at most `max_halvings` halvings) that stays
/// in the parameter domain, leaves room for the finite-difference stencil and
/// raises the likelihood by at least
/// `ARMIJO·t·g·d`. Where the Hessian has a positive eigenvalue the same search
/// is also run along the matching eigenvector in both directions, and the
/// better of the two candidates is kept. If neither search succeeds, a
/// steepest-ascent search scaled by the largest Hessian entry is tried, which
/// lets iterates leave the `β = 0` face where the Newton step points outward.
/// Convergence requires
/// `gradient_norm ≤ grad_tol` and a non-positive largest Hessian eigenvalue.
/// The likelihood grid is fixed for the whole fit.
pub fn fit(data: &[f64], init: &GtsParams, opts: &FitOptions) -> Result<FitTrace> {
    init.validate_nondegenerate()?;
    let grid = match opts.grid {
        Some(g) => covering_grid(&g, data),
        None => likelihood_grid(data, init, opts.grid_n)?,
    };
    let ll_at = |v: &Vec7| log_likelihood(data, &GtsParams::from_vec(v), &grid, opts.exec);
    let mut v = init.to_vec();
    let mut ll = ll_at(&v)?;
    let mut states = vec![evaluate_state(data, &v, ll, &grid, 0, opts.exec)?];
    let finish = |states: Vec<FitState>, converged: bool, reason: StopReason| FitTrace {
        states,
        converged,
        reason,
        grid,
    };
    for iter in 1..=opts.max_iter {
        let s = states.last().unwrap();
        if s.gradient_norm <= opts.grad_tol && s.max_eigenvalue <= 0.0 {
            return Ok(finish(states, true, StopReason::GradientTol));
        }
        let curvature = |s: &FitState| -> Result<Option<(Vec7, f64)>> {
            if s.max_eigenvalue <= 0.0 {
                return Ok(None);
            }
            let (values, q) = symmetric_eigen(&s.hessian);
            let mut e = [0.0; 7];
            for k in 0..7 {
                e[k] = q[k][6];
            }
            if dot(&e, &s.gradient) < 0.0 {
                e = e.map(|x| -x);
            }
            for sign in [1.0, -1.0] {
                let mut t = 1.0;
                for _ in 0..=opts.max_halvings {
                    let mut cand = v;
                    for j in 0..7 {
                        cand[j] += sign * t * e[j];
                    }
                    if admissible(&cand) {
                        match ll_at(&cand) {
                            Ok(l) if l > ll + ARMIJO * 0.5 * values[6] * t * t => {
                                return Ok(Some((cand, l)))
                            }
                            Ok(_) | Err(GtsError::Normalization { .. }) => {}
                            Err(e) => return Err(e),
                        }
                    }
                    t *= 0.5;
                }
            }
            Ok(None)
        };
        let (direction, singular) = match newton_direction(s) {
            Some(d) => (d, false),
            None => {
                let scale = s.hessian.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
                (s.gradient.map(|x| x / scale.max(1.0)), true)
            }
        };
        let search = |direction: &Vec7| -> Result<Option<(Vec7, f64)>> {
            let slope = dot(&s.gradient, direction);
            let mut t = 1.0;
            for _ in 0..=opts.max_halvings {
                let mut cand = v;
                for j in 0..7 {
                    cand[j] += t * direction[j];
                }
                if admissible(&cand) {
                    match ll_at(&cand) {
                        Ok(l) if l >= ll + ARMIJO * t * slope => return Ok(Some((cand, l))),
                        Ok(_) | Err(GtsError::Normalization { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                t *= 0.5;
            }
            Ok(None)
        };
        let mut accepted = search(&direction)?;
        if let Some((cand, l)) = curvature(s)? {
            if accepted.as_ref().map_or(true, |a: &(Vec7, f64)| l > a.1) {
                accepted = Some((cand, l));
            }
        }
        if accepted.is_none() && !singular {
            // steepest ascent, kept only if the gain is above rounding level
            let scale = s.hessian.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
            accepted = search(&s.gradient.map(|x| x / scale.max(1.0)))?
                .filter(|(_, l)| l - ll > 64.0 * f64::EPSILON * ll.abs());
        }
        let Some((cand, l)) = accepted else {
            let reason =
                if singular { StopReason::SingularHessian } else { StopReason::LineSearchFail };
            return Ok(finish(states, false, reason));
        };
        v = cand;
        ll = l;
        match evaluate_state(data, &v, ll, &grid, iter, opts.exec) {
            Ok(state) => states.push(state),
            Err(GtsError::StepCollision { .. }) => {
                return Ok(finish(states, false, StopReason::LineSearchFail))
            }
            Err(e) => return Err(e),
        }
    }
    let s = states.last().unwrap();
    let converged = s.gradient_norm <= opts.grad_tol && s.max_eigenvalue <= 0.0;
    let reason = if converged { StopReason::GradientTol } else { StopReason::MaxIter };
    Ok(finish(states, converged, reason))
}

/// Method-of-moments starting point from the sample cumulants of `data`.
/// See [`moment_init_from_cumulants`].
pub fn moment_init(data: &[f64]) -> Result<GtsParams> {
    if data.len() < 4 {
        return Err(GtsError::Domain("moment initialization needs at least 4 points".into()));
    }
    let m = MomentSummary::from_samples(data);
    if !(m.variance > 0.0) {
        return Err(GtsError::Domain("sample has zero variance".into()));
    }
    let k2 = m.variance;
    moment_init_from_cumulants([
        m.mean,
        k2,
        m.skewness * k2.powf(1.5),
        (m.kurtosis - 3.0) * k2 * k2,
    ])
}

/// Parameters with `β₊ = β₋ = 1/2` and `λ₊ = λ₋` matching `κ₁..κ₄`.
///
/// With `β = 1/2` and `A± = α±Γ(3/2)/λ^{3/2}`: `κ₂ = A₊ + A₋`,
/// `κ₃ = 1.5 (A₊ − A₋)/λ`, `κ₄ = 3.75 κ₂/λ²`. The asymmetry is clamped so
/// both sides keep at least 5% of the variance; a non-positive `κ₄` falls
/// back to `λ = 3/sd`.
pub fn moment_init_from_cumulants(k: [f64; 4]) -> Result<GtsParams> {
    let [k1, k2, k3, k4] = k;
    if !(k2 > 0.0) {
        return Err(GtsError::Domain(format!("variance {k2} is not positive")));
    }
    let lambda = if k4 > 0.0 { (3.75 * k2 / k4).sqrt() } else { 3.0 / k2.sqrt() };
    let diff = (k3 * lambda / 1.5).clamp(-0.9 * k2, 0.9 * k2);
    let conv = lambda.powf(1.5) / gamma(1.5);
    let alpha_plus = 0.5 * (k2 + diff) * conv;
    let alpha_minus = 0.5 * (k2 - diff) * conv;
    let mu = k1 - gamma(0.5) / lambda.sqrt() * (alpha_plus - alpha_minus);
    let p = GtsParams::new(mu, 0.5, 0.5, alpha_plus, alpha_minus, lambda, lambda);
    p.validate_nondegenerate()?;
    Ok(p)
}

/// Column names of the trace table.
pub const TRACE_COLUMNS: [&str; 11] = [
    "Iterations",
    "mu",
    "beta_plus",
    "beta_minus",
    "alpha_plus",
    "alpha_minus",
    "lambda_plus",
    "lambda_minus",
    "Log(ML)",
    "||dLog(ML)/dV||",
    "Max Eigen Value",
];

impl FitTrace {
    /// One row per iterate, columns as in [`TRACE_COLUMNS`].
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(TRACE_COLUMNS)?;
        for s in &self.states {
            let mut row = vec![s.iteration.to_string()];
            row.extend(s.params.to_vec().iter().map(|x| format!("{x:e}")));
            row.push(format!("{:e}", s.log_likelihood));
            row.push(format!("{:e}", s.gradient_norm));
            row.push(format!("{:e}", s.max_eigenvalue));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// JSON with one object per iterate keyed by [`TRACE_COLUMNS`], plus the
    /// convergence flag and stop reason.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .states
            .iter()
            .map(|s| {
                let mut obj = serde_json::Map::new();
                obj.insert(TRACE_COLUMNS[0].into(), s.iteration.into());
                for (name, x) in PARAM_NAMES.iter().zip(s.params.to_vec()) {
                    obj.insert((*name).into(), x.into());
                }
                obj.insert(TRACE_COLUMNS[8].into(), s.log_likelihood.into());
                obj.insert(TRACE_COLUMNS[9].into(), s.gradient_norm.into());
                obj.insert(TRACE_COLUMNS[10].into(), s.max_eigenvalue.into());
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({
            "converged": self.converged,
            "reason": self.reason,
            "iterations": rows,
        })
    }
}
