//! Plain-text experiment specs.
//!
//! One `key = value` pair per line, `#` starts a comment, lists are comma
//! separated. Recognised keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `problem` | problem id, see [`ProblemId`] |
//! | `p` | degrees |
//! | `N` | cells per axis |
//! | `lambda` | `Δt = λh` values (every degree) |
//! | `lambda.<p>` | values for one degree, overriding `lambda` |
//! | `stop` | `steady`, `steps:<n>` or `time:<T>` |
//! | `limiters` | any of `none`, `scaling`, `scaling-lenient`, `fct` |
//! | `steady_tol`, `max_steps`, `patience` | steady-state control |
//! | `runtime` | `false` writes 0 in the runtime column |
//! | `dump` | `true` writes a field CSV per run next to the report |
//! | `out` | default report path |
//! | `lambda_lo`, `lambda_hi`, `resolution` | bisection range and grid |
//! | `expect.order` | expected order offset: order ≈ p + offset |
//! | `expect.order_tol`, `expect.order_pmax` | tolerance and largest checked p |
//! | `expect.order_from` | smallest coarse mesh of a checked pair |
//! | `expect.bounded` | limited runs must stay in the problem bounds |
//! | `expect.lambda.<p>` | bisection result, checked to `resolution` |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dgsem_core::scheme::SteadyControl;

use crate::error::{HarnessError, Result};
use crate::problems::ProblemId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    Steady,
    Steps(usize),
    /// March to a final time; errors are accumulated over the steps.
    Time(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LimiterKind {
    None,
    Scaling,
    ScalingLenient,
    Fct,
}

impl LimiterKind {
    pub fn name(self) -> &'static str {
        match self {
            LimiterKind::None => "none",
            LimiterKind::Scaling => "scaling",
            LimiterKind::ScalingLenient => "scaling-lenient",
            LimiterKind::Fct => "fct",
        }
    }
}

impl FromStr for LimiterKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => LimiterKind::None,
            "scaling" => LimiterKind::Scaling,
            "scaling-lenient" => LimiterKind::ScalingLenient,
            "fct" => LimiterKind::Fct,
            _ => return Err(HarnessError::Spec(format!("unknown limiter '{}'", s))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderCheck {
    pub offset: f64,
    pub tol: f64,
    pub p_max: usize,
    /// Pairs whose coarse mesh is below this are not checked.
    pub min_cells: usize,
}

impl OrderCheck {
    const DEFAULT: Self = Self { offset: 1.0, tol: 0.1, p_max: usize::MAX, min_cells: 0 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemId,
    pub degrees: Vec<usize>,
    pub meshes: Vec<usize>,
    pub lambda: Vec<f64>,
    pub lambda_by_p: BTreeMap<usize, Vec<f64>>,
    pub stop: Stop,
    pub limiters: Vec<LimiterKind>,
    pub steady: SteadyControl,
    pub runtime: bool,
    pub dump: bool,
    pub out: Option<PathBuf>,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub resolution: f64,
    pub expect_order: Option<OrderCheck>,
    pub expect_bounded: bool,
    pub expect_lambda: BTreeMap<usize, f64>,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        text.parse()
    }

    /// λ values for degree `p`.
    pub fn lambdas(&self, p: usize) -> &[f64] {
        self.lambda_by_p.get(&p).map(Vec::as_slice).unwrap_or(&self.lambda)
    }
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| HarnessError::Spec(format!("{}: cannot parse '{}'", key, s))))
        .collect()
}

fn one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| HarnessError::Spec(format!("{}: cannot parse '{}'", key, v)))
}

fn parse_stop(v: &str) -> Result<Stop> {
    if v == "steady" {
        return Ok(Stop::Steady);
    }
    if let Some(n) = v.strip_prefix("steps:") {
        return Ok(Stop::Steps(one("stop", n.trim())?));
    }
    if let Some(t) = v.strip_prefix("time:") {
        return Ok(Stop::Time(one("stop", t.trim())?));
    }
    Err(HarnessError::Spec(format!("stop: expected steady, steps:<n> or time:<T>, got '{}'", v)))
}

impl FromStr for ExperimentSpec {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self> {
        let mut problem = None;
        let mut degrees = Vec::new();
        let mut meshes = Vec::new();
        let mut lambda = vec![1.0];
        let mut lambda_by_p = BTreeMap::new();
        let mut stop = Stop::Steady;
        let mut limiters = vec![LimiterKind::None];
        let mut steady = SteadyControl::default();
        let mut runtime = true;
        let mut dump = false;
        let mut out = None;
        let (mut lambda_lo, mut lambda_hi, mut resolution) = (0.0, 1.0, 0.01);
        let mut order: Option<OrderCheck> = None;
        let mut expect_bounded = false;
        let mut expect_lambda = BTreeMap::new();

        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Spec(format!("line {}: expected key = value", ln + 1)))?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "problem" => problem = Some(v.parse()?),
                "p" => degrees = list(key, v)?,
                "N" => meshes = list(key, v)?,
                "lambda" => lambda = list(key, v)?,
                "stop" => stop = parse_stop(v)?,
                "limiters" => limiters = list(key, v)?,
                "steady_tol" => steady.tolerance = one(key, v)?,
                "max_steps" => steady.max_steps = one(key, v)?,
                "patience" => steady.patience = one(key, v)?,
                "runtime" => runtime = one(key, v)?,
                "dump" => dump = one(key, v)?,
                "out" => out = Some(PathBuf::from(v)),
                "lambda_lo" => lambda_lo = one(key, v)?,
                "lambda_hi" => lambda_hi = one(key, v)?,
                "resolution" => resolution = one(key, v)?,
                "expect.order" => order.get_or_insert(OrderCheck::DEFAULT).offset = one(key, v)?,
                "expect.order_tol" => order.get_or_insert(OrderCheck::DEFAULT).tol = one(key, v)?,
                "expect.order_pmax" => order.get_or_insert(OrderCheck::DEFAULT).p_max = one(key, v)?,
                "expect.order_from" => order.get_or_insert(OrderCheck::DEFAULT).min_cells = one(key, v)?,
                "expect.bounded" => expect_bounded = one(key, v)?,
                _ => {
                    if let Some(p) = key.strip_prefix("lambda.") {
                        lambda_by_p.insert(one(key, p)?, list(key, v)?);
                    } else if let Some(p) = key.strip_prefix("expect.lambda.") {
                        expect_lambda.insert(one(key, p)?, one(key, v)?);
                    } else {
                        return Err(HarnessError::Spec(format!("line {}: unknown key '{}'", ln + 1, key)));
                    }
                }
            }
        }
        let problem = problem.ok_or_else(|| HarnessError::Spec("missing 'problem'".into()))?;
        if degrees.is_empty() || meshes.is_empty() {
            return Err(HarnessError::Spec("'p' and 'N' must be non-empty".into()));
        }
        if degrees.contains(&0) || meshes.contains(&0) {
            return Err(HarnessError::Spec("degrees and meshes must be positive".into()));
        }
        if lambda.iter().chain(lambda_by_p.values().flatten()).any(|l| !(*l > 0.0)) {
            return Err(HarnessError::Spec("λ values must be positive".into()));
        }
        if limiters.is_empty() {
            return Err(HarnessError::Spec("'limiters' must be non-empty".into()));
        }
        if !(resolution > 0.0) || !(lambda_lo < lambda_hi) {
            return Err(HarnessError::Spec("bisection needs lambda_lo < lambda_hi and resolution > 0".into()));
        }
        Ok(Self {
            problem,
            degrees,
            meshes,
            lambda,
            lambda_by_p,
            stop,
            limiters,
            steady,
            runtime,
            dump,
            out,
            lambda_lo,
            lambda_hi,
            resolution,
            expect_order: order,
            expect_bounded,
            expect_lambda,
        })
    }
}
