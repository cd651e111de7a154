//! Timings of one diagonal-block solve: dense LU against the fast inverse.

use std::fs;
use std::hint::black_box;
use std::path::Path;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dgsem_core::linalg::Lu;
use dgsem_core::tensor::{BlockParams, CellOps};
use dgsem_core::{bounds, Basis};

use crate::error::{HarnessError, Result};
use crate::report::sig6;

/// Relative agreement required between the fast and the dense solve.
pub const GATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub dims: [bool; 3],
    pub p_min: usize,
    pub p_max: usize,
    pub reps: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { dims: [false, true, true], p_min: 1, p_max: 6, reps: 20, warmup: 3, seed: 7 }
    }
}

/// Reads `p_min`, `p_max`, `reps`, `warmup`, `seed` and `dims` (e.g. `2, 3`)
/// from `key = value` lines; missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<BenchConfig> {
    let mut cfg = BenchConfig::default();
    let bad = |k: &str, v: &str| HarnessError::Spec(format!("{}: cannot parse '{}'", k, v));
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| HarnessError::Spec(format!("expected key = value, got '{}'", line)))?;
        let (k, v) = (k.trim(), v.trim());
        match k {
            "p_min" => cfg.p_min = v.parse().map_err(|_| bad(k, v))?,
            "p_max" => cfg.p_max = v.parse().map_err(|_| bad(k, v))?,
            "reps" => cfg.reps = v.parse().map_err(|_| bad(k, v))?,
            "warmup" => cfg.warmup = v.parse().map_err(|_| bad(k, v))?,
            "seed" => cfg.seed = v.parse().map_err(|_| bad(k, v))?,
            "dims" => {
                cfg.dims = [false; 3];
                for d in v.split(',').map(str::trim) {
                    match d.parse::<usize>() {
                        Ok(d @ 1..=3) => cfg.dims[d - 1] = true,
                        _ => return Err(bad(k, d)),
                    }
                }
            }
            _ => return Err(HarnessError::Spec(format!("unknown bench key '{}'", k))),
        }
    }
    if cfg.p_min == 0 || cfg.p_min > cfg.p_max || cfg.reps == 0 {
        return Err(HarnessError::Spec("bench needs 1 <= p_min <= p_max and reps >= 1".into()));
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    High,
    Low,
}

impl BlockKind {
    pub fn name(self) -> &'static str {
        match self {
            BlockKind::High => "HO",
            BlockKind::Low => "LO",
        }
    }
}

/// Median and interquartile range in microseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub median: f64,
    pub iqr: f64,
}

impl Timing {
    fn from_samples(mut s: Vec<f64>) -> Self {
        s.sort_by(f64::total_cmp);
        let q = |f: f64| {
            let x = f * (s.len() - 1) as f64;
            let (i, t) = (x.floor() as usize, x.fract());
            if i + 1 < s.len() {
                s[i] * (1.0 - t) + s[i + 1] * t
            } else {
                s[i]
            }
        };
        Self { median: q(0.5), iqr: q(0.75) - q(0.25) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dim: usize,
    pub kind: BlockKind,
    pub p: usize,
    pub nodes: usize,
    pub reps: usize,
    /// LU factorization and solve per call.
    pub dense: Timing,
    /// Solve with a stored LU factorization.
    pub dense_factored: Timing,
    /// Setup of the fast inverse.
    pub fast_setup: Timing,
    /// Solve with the stored fast inverse.
    pub fast: Timing,
    pub rel_err: f64,
}

impl BenchRow {
    pub fn passes(&self) -> bool {
        self.rel_err <= GATE
    }

    pub fn speedup(&self) -> f64 {
        self.dense.median / self.fast.median
    }

    pub fn speedup_factored(&self) -> f64 {
        self.dense_factored.median / self.fast.median
    }

    /// The low-order fast path loses to a stored dense factorization.
    pub fn woodbury_slower(&self) -> bool {
        self.kind == BlockKind::Low && self.fast.median > self.dense_factored.median
    }
}

fn time_us(reps: usize, warmup: usize, mut f: impl FnMut()) -> Timing {
    for _ in 0..warmup {
        f();
    }
    let samples = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64() * 1e6
        })
        .collect();
    Timing::from_samples(samples)
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let den = b.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    num / den.max(f64::MIN_POSITIVE)
}

/// Runs one configuration with a random λ per axis and a random right-hand side.
pub fn bench_block(dim: usize, p: usize, kind: BlockKind, cfg: &BenchConfig, rng: &mut StdRng) -> Result<BenchRow> {
    let basis = Basis::new(p)?;
    let ops = CellOps::new(&basis, dim)?;
    let mut lambda = [0.0; 3];
    for l in lambda.iter_mut().take(dim) {
        *l = rng.gen_range(0.1..5.0);
    }
    let d = match kind {
        BlockKind::High => 0.0,
        BlockKind::Low => bounds::d_min(&basis),
    };
    let prm = BlockParams { lambda, d, shift: 1.0 };
    let npc = ops.nodes_per_cell();
    let b: Vec<f64> = (0..npc).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let a = ops.dense_block(&prm);

    let lu = Lu::new(&a, 1e-300)?;
    let reference = lu.solve(&b);
    let solver = ops.factor(&prm)?;
    let mut x = vec![0.0; npc];
    solver.solve(&ops, &b, &mut x)?;
    let err = rel_err(&x, &reference);

    let (reps, warmup) = (cfg.reps, cfg.warmup);
    let dense = time_us(reps, warmup, || {
        let lu = Lu::new(black_box(&a), 1e-300).expect("factored once already");
        black_box(lu.solve(black_box(&b)));
    });
    let dense_factored = time_us(reps, warmup, || {
        black_box(lu.solve(black_box(&b)));
    });
    let fast_setup = time_us(reps, warmup, || {
        black_box(ops.factor(black_box(&prm)).expect("factored once already"));
    });
    let fast = time_us(reps, warmup, || {
        solver.solve(&ops, black_box(&b), &mut x).expect("solved once already");
        black_box(&x);
    });
    Ok(BenchRow { dim, kind, p, nodes: npc, reps, dense, dense_factored, fast_setup, fast, rel_err: err })
}

/// Every configuration of `cfg`, ordered by dimension, block kind and p.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for dim in 1..=3 {
        if !cfg.dims[dim - 1] {
            continue;
        }
        for kind in [BlockKind::High, BlockKind::Low] {
            for p in cfg.p_min..=cfg.p_max {
                rows.push(bench_block(dim, p, kind, cfg, &mut rng)?);
            }
        }
    }
    Ok(rows)
}

pub const BENCH_HEADER: [&str; 17] = [
    "dim",
    "block",
    "p",
    "nodes",
    "reps",
    "dense_median_us",
    "dense_iqr_us",
    "dense_factored_median_us",
    "dense_factored_iqr_us",
    "fast_setup_median_us",
    "fast_median_us",
    "fast_iqr_us",
    "speedup",
    "speedup_factored",
    "rel_err",
    "gate",
    "woodbury_slower",
];

pub fn write_bench(path: &Path, rows: &[BenchRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.write_record([
            r.dim.to_string(),
            r.kind.name().to_string(),
            r.p.to_string(),
            r.nodes.to_string(),
            r.reps.to_string(),
            sig6(r.dense.median),
            sig6(r.dense.iqr),
            sig6(r.dense_factored.median),
            sig6(r.dense_factored.iqr),
            sig6(r.fast_setup.median),
            sig6(r.fast.median),
            sig6(r.fast.iqr),
            sig6(r.speedup()),
            sig6(r.speedup_factored()),
            sig6(r.rel_err),
            if r.passes() { "pass" } else { "fail" }.to_string(),
            r.woodbury_slower().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles() {
        let t = Timing::from_samples(vec![4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!(t.median, 3.0);
        assert_eq!(t.iqr, 2.0);
    }

    #[test]
    fn small_blocks_pass_the_gate() {
        let cfg = BenchConfig { reps: 2, warmup: 0, ..Default::default() };
        let mut rng = StdRng::seed_from_u64(1);
        for (dim, kind) in [(1, BlockKind::High), (2, BlockKind::Low), (3, BlockKind::High)] {
            let r = bench_block(dim, 2, kind, &cfg, &mut rng).unwrap();
            assert!(r.passes(), "{:?}", r);
        }
    }
}
