//! Drivers for convergence studies, maximum-principle scans and the
//! experimental λ bound.

use std::time::Instant;

use rayon::prelude::*;

use dgsem_core::mesh::SpaceTimeError;
use dgsem_core::scheme::{run_steady, Limiter, Scheme, SteadyControl, SteadyStop};
use dgsem_core::{bounds, Basis, Field, Mesh, Space};

use crate::error::{HarnessError, Result};
use crate::problems::Problem;
use crate::spec::{ExperimentSpec, LimiterKind, Stop};

/// Slack on the bounds when deciding whether a state preserves them.
pub const PRESERVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStop {
    Converged,
    Stagnated,
    StepLimit,
    /// Fixed number of steps or final time reached.
    Done,
}

impl RunStop {
    pub fn name(self) -> &'static str {
        match self {
            RunStop::Converged => "converged",
            RunStop::Stagnated => "stagnated",
            RunStop::StepLimit => "step-limit",
            RunStop::Done => "done",
        }
    }
}

/// One solved case.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub field: Field,
    /// Final-state errors, or `Σ Δt‖e(tⁿ)‖` for [`Stop::Time`].
    pub l2: f64,
    pub linf: f64,
    pub avg: (f64, f64),
    pub dof: (f64, f64),
    pub steps: usize,
    pub stop: RunStop,
    pub seconds: f64,
}

pub fn limiter(kind: LimiterKind, problem: &Problem) -> Limiter {
    let b = problem.bounds;
    match kind {
        LimiterKind::None => Limiter::None,
        LimiterKind::Scaling => Limiter::Scaling(b),
        LimiterKind::ScalingLenient => Limiter::ScalingLenient(b),
        LimiterKind::Fct => Limiter::Fct(b),
    }
}

pub fn scheme(problem: &Problem, p: usize, cells: usize, lambda: f64) -> Result<Scheme> {
    let mesh = Mesh::uniform(problem.dim, problem.a, problem.b, cells)?;
    let space = Space::new(mesh, Basis::new(p)?);
    Ok(Scheme::new(space, problem.config(cells, lambda))?)
}

/// Runs one `(p, N, λ)` case of `problem` to the given stop rule.
pub fn run_case(
    problem: &Problem,
    p: usize,
    cells: usize,
    lambda: f64,
    stop: Stop,
    kind: LimiterKind,
    steady: &SteadyControl,
) -> Result<Outcome> {
    let context = |e| HarnessError::Run { context: format!("{} p={} N={} λ={}", problem.id, p, cells, lambda), source: e };
    let start = Instant::now();
    let mut s = scheme(problem, p, cells, lambda).map_err(|e| match e {
        HarnessError::Core(c) => context(c),
        other => other,
    })?;
    let lim = limiter(kind, problem);
    let init = problem.initial.clone();
    let u0 = Field::project(s.space().clone(), |x| init(x, 0.0));
    let dt = s.config().dt;
    let exact = problem.exact.clone();
    let errors = |u: &Field, t: f64| match &exact {
        Some(f) => (u.l2_error(|x| f(x, t)), u.linf_error(|x| f(x, t))),
        None => (f64::NAN, f64::NAN),
    };

    let (field, l2, linf, steps, how) = match stop {
        Stop::Steady => {
            let out = run_steady(&mut s, u0, &lim, steady).map_err(context)?;
            let (l2, linf) = errors(&out.field, 0.0);
            let how = match out.stop {
                SteadyStop::Converged => RunStop::Converged,
                SteadyStop::Stagnated => RunStop::Stagnated,
                SteadyStop::StepLimit => RunStop::StepLimit,
            };
            (out.field, l2, linf, out.steps, how)
        }
        Stop::Steps(n) => {
            let mut u = u0;
            for _ in 0..n {
                u = s.step(&u, &lim).map_err(context)?.field;
            }
            let (l2, linf) = errors(&u, n as f64 * dt);
            (u, l2, linf, n, RunStop::Done)
        }
        Stop::Time(t_final) => {
            let n = (t_final / dt).round() as usize;
            let mut acc = SpaceTimeError::default();
            let mut u = u0;
            for k in 1..=n {
                u = s.step(&u, &lim).map_err(context)?.field;
                let (l2, linf) = errors(&u, k as f64 * dt);
                acc.add(dt, l2, linf);
            }
            (u, acc.l2, acc.linf, n, RunStop::Done)
        }
    };
    Ok(Outcome {
        avg: field.minmax_averages(),
        dof: field.minmax_dofs(),
        field,
        l2,
        linf,
        steps,
        stop: how,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// A row of a convergence table.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub p: usize,
    pub cells: usize,
    pub l2: f64,
    pub order2: Option<f64>,
    pub linf: f64,
    pub order_inf: Option<f64>,
    pub avg: (f64, f64),
    pub dof: (f64, f64),
    pub runtime: f64,
    pub stop: RunStop,
}

/// `log2(e_N / e_2N)` scaled for non-doubling mesh pairs.
pub fn order(e_coarse: f64, e_fine: f64, n_coarse: usize, n_fine: usize) -> f64 {
    (e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln()
}

/// Every `(p, N)` run of `spec` with one limiter, rows ordered by p then N.
pub fn run_convergence(spec: &ExperimentSpec, kind: LimiterKind) -> Result<(Vec<ConvergenceRow>, Vec<Outcome>)> {
    let problem = Problem::new(spec.problem);
    if problem.exact.is_none() {
        return Err(HarnessError::Spec(format!("{} has no exact solution; use scan", problem.id.name())));
    }
    for &p in &spec.degrees {
        if spec.lambdas(p).len() != 1 {
            return Err(HarnessError::Spec(format!("run needs exactly one λ for p={}", p)));
        }
    }
    let jobs: Vec<(usize, usize)> = spec.degrees.iter().flat_map(|&p| spec.meshes.iter().map(move |&n| (p, n))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(p, n)| run_case(&problem, p, n, spec.lambdas(p)[0], spec.stop, kind, &spec.steady))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(jobs.len());
    for (i, (&(p, n), o)) in jobs.iter().zip(&outcomes).enumerate() {
        let prev = if i > 0 && jobs[i - 1].0 == p { Some(&rows[i - 1]) } else { None };
        rows.push(ConvergenceRow {
            p,
            cells: n,
            l2: o.l2,
            order2: prev.map(|r| order(r.l2, o.l2, r.cells, n)),
            linf: o.linf,
            order_inf: prev.map(|r| order(r.linf, o.linf, r.cells, n)),
            avg: o.avg,
            dof: o.dof,
            runtime: o.seconds,
            stop: o.stop,
        });
    }
    Ok((rows, outcomes))
}

/// A row of a maximum-principle scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub p: usize,
    pub lambda: f64,
    pub cells: usize,
    pub avg: (f64, f64),
    pub dof: (f64, f64),
    pub steps: usize,
    pub stop: RunStop,
    pub runtime: f64,
}

/// Every `(p, λ, N)` case of `spec` with one limiter.
pub fn run_scan(spec: &ExperimentSpec, kind: LimiterKind) -> Result<(Vec<ScanRow>, Vec<Outcome>)> {
    let problem = Problem::new(spec.problem);
    let jobs: Vec<(usize, f64, usize)> =
        spec.degrees.iter().flat_map(|&p| spec.lambdas(p).iter().flat_map(move |&l| spec.meshes.iter().map(move |&n| (p, l, n)))).collect();
    let outcomes =
        jobs.par_iter().map(|&(p, l, n)| run_case(&problem, p, n, l, spec.stop, kind, &spec.steady)).collect::<Result<Vec<_>>>()?;
    let rows = jobs
        .iter()
        .zip(&outcomes)
        .map(|(&(p, lambda, cells), o)| ScanRow {
            p,
            lambda,
            cells,
            avg: o.avg,
            dof: o.dof,
            steps: o.steps,
            stop: o.stop,
            runtime: o.seconds,
        })
        .collect();
    Ok((rows, outcomes))
}

/// Experimental lower bound on λ for one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct BisectRow {
    pub p: usize,
    /// Smallest grid value above every failing λ; 0 when none fails.
    pub lambda_exp: f64,
    /// Largest failing grid value, if any.
    pub largest_failing: Option<f64>,
    pub lambda_min: f64,
}

/// True when every mesh of `spec` keeps the cell averages in the problem
/// bounds (up to [`PRESERVE_TOL`]) at this λ.
pub fn preserves(spec: &ExperimentSpec, problem: &Problem, p: usize, lambda: f64) -> Result<bool> {
    for &n in &spec.meshes {
        let o = run_case(problem, p, n, lambda, spec.stop, LimiterKind::None, &spec.steady)?;
        let b = problem.bounds;
        if o.avg.0 < b.lower - PRESERVE_TOL || o.avg.1 > b.upper + PRESERVE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Tests every λ of the grid `lambda_lo + k·resolution` in
/// `(0, lambda_hi]` and reports the smallest grid value above the largest
/// failing one.
pub fn run_bisect(spec: &ExperimentSpec) -> Result<Vec<BisectRow>> {
    let problem = Problem::new(spec.problem);
    let res = spec.resolution;
    let count = ((spec.lambda_hi - spec.lambda_lo) / res + 1e-9).floor() as usize;
    let grid: Vec<f64> =
        (0..=count).map(|k| spec.lambda_lo + k as f64 * res).map(|l| (l / res).round() * res).filter(|&l| l > 0.0).collect();
    spec.degrees
        .iter()
        .map(|&p| {
            let ok = grid.par_iter().map(|&l| preserves(spec, &problem, p, l)).collect::<Result<Vec<_>>>()?;
            let largest_failing = grid.iter().zip(&ok).filter(|(_, ok)| !**ok).map(|(l, _)| *l).next_back();
            let lambda_exp = largest_failing.map_or(0.0, |l| ((l + res) / res).round() * res);
            Ok(BisectRow { p, lambda_exp, largest_failing, lambda_min: bounds::lambda_min(&Basis::new(p)?)? })
        })
        .collect()
}

/// `(p, λ_min, d_min)` for `p = 1..=p_max`.
pub fn bounds_table(p_max: usize) -> Result<Vec<(usize, f64, f64)>> {
    (1..=p_max)
        .map(|p| {
            let b = Basis::new(p)?;
            Ok((p, bounds::lambda_min(&b)?, bounds::d_min(&b)))
        })
        .collect()
}

/// Failed order checks, one message each.
pub fn check_orders(spec: &ExperimentSpec, rows: &[ConvergenceRow]) -> Vec<String> {
    let Some(c) = spec.expect_order else { return Vec::new() };
    rows.windows(2)
        .filter(|w| w[0].p == w[1].p && w[1].p <= c.p_max && w[0].cells >= c.min_cells)
        .filter_map(|w| {
            let r = &w[1];
            let o = r.order2?;
            let want = r.p as f64 + c.offset;
            ((o - want).abs() > c.tol).then(|| format!("p={} N={}: L2 order {:.3} not within {} of {}", r.p, r.cells, o, c.tol, want))
        })
        .collect()
}

/// Failed bound checks for limited runs, one message each.
pub fn check_bounded(spec: &ExperimentSpec, kind: LimiterKind, cases: &[(usize, usize, (f64, f64))]) -> Vec<String> {
    if !spec.expect_bounded || kind == LimiterKind::None {
        return Vec::new();
    }
    let b = Problem::new(spec.problem).bounds;
    cases
        .iter()
        .filter(|(_, _, (lo, hi))| *lo < b.lower - PRESERVE_TOL || *hi > b.upper + PRESERVE_TOL)
        .map(|(p, n, (lo, hi))| format!("p={} N={} {}: DOFs [{:e}, {:e}] leave [{}, {}]", p, n, kind.name(), lo, hi, b.lower, b.upper))
        .collect()
}

pub fn check_lambdas(spec: &ExperimentSpec, rows: &[BisectRow]) -> Vec<String> {
    rows.iter()
        .filter_map(|r| {
            let want = *spec.expect_lambda.get(&r.p)?;
            ((r.lambda_exp - want).abs() > spec.resolution + 1e-12)
                .then(|| format!("p={}: λ_exp {} not within {} of {}", r.p, r.lambda_exp, spec.resolution, want))
        })
        .collect()
}
