use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dgsem_cli::bench::{self, BenchConfig};
use dgsem_cli::experiments::{self, Outcome};
use dgsem_cli::report::{self, sig6};
use dgsem_cli::spec::{ExperimentSpec, LimiterKind};
use dgsem_cli::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "dgsem", version, about = "Backward-Euler DGSEM experiments")]
struct Cli {
    /// Worker threads for independent runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print λ_min and d_min per degree as CSV.
    Bounds {
        #[arg(long, default_value_t = 6)]
        p_max: usize,
        /// key = value file with `p_max`; overrides --p-max.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence study: one row per (p, N).
    Run(SpecArgs),
    /// Maximum-principle scan: one row per (p, λ, N).
    Scan(SpecArgs),
    /// Experimental lower bound on λ per degree.
    Bisect(SpecArgs),
    /// Dense against fast diagonal-block solves.
    Bench {
        /// key = value file with p_min, p_max, reps, warmup, seed, dims.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value = "results/bench.csv")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Report path; several limiters write `<stem>-<limiter>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(1);
        }
    }
    match execute(cli.command) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in &failures {
                eprintln!("check failed: {}", f);
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}

fn report_path(args: &SpecArgs, spec: &ExperimentSpec) -> PathBuf {
    args.out.clone().or_else(|| spec.out.clone()).unwrap_or_else(|| {
        let stem = args.spec.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
        Path::new("results").join(format!("{}.csv", stem))
    })
}

fn limiter_path(base: &Path, spec: &ExperimentSpec, kind: LimiterKind) -> PathBuf {
    if spec.limiters.len() == 1 {
        base.to_path_buf()
    } else {
        report::suffixed(base, kind.name())
    }
}

fn dump(base: &Path, tag: &str, o: &Outcome) -> Result<()> {
    report::write_field(&report::suffixed(base, tag), &o.field)
}

fn bounds_p_max(text: &str) -> Result<usize> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .find_map(|l| l.split_once('=').filter(|(k, _)| k.trim() == "p_max").map(|(_, v)| v.trim().to_string()))
        .ok_or_else(|| HarnessError::Spec("bounds spec needs p_max".into()))?
        .parse()
        .map_err(|_| HarnessError::Spec("p_max: not an integer".into()))
}

fn execute(command: Command) -> Result<Vec<String>> {
    let mut failures = Vec::new();
    match command {
        Command::Bounds { p_max, spec, out } => {
            let p_max = match spec {
                Some(path) => bounds_p_max(&std::fs::read_to_string(path)?)?,
                None => p_max,
            };
            if p_max == 0 {
                return Err(HarnessError::Spec("--p-max must be positive".into()));
            }
            let rows = experiments::bounds_table(p_max)?;
            report::write_bounds(&mut io::stdout().lock(), &rows)?;
            if let Some(path) = out {
                report::write_bounds(&mut std::fs::File::create(path)?, &rows)?;
            }
        }
        Command::Run(args) => {
            let spec = ExperimentSpec::load(&args.spec)?;
            let base = report_path(&args, &spec);
            for &kind in &spec.limiters {
                let path = limiter_path(&base, &spec, kind);
                let (rows, outcomes) = experiments::run_convergence(&spec, kind)?;
                report::write_convergence(&path, &rows, spec.runtime)?;
                println!("wrote {}", path.display());
                if spec.dump {
                    for (r, o) in rows.iter().zip(&outcomes) {
                        dump(&path, &format!("p{}-N{}", r.p, r.cells), o)?;
                    }
                }
                failures.extend(experiments::check_orders(&spec, &rows).into_iter().map(|m| format!("{}: {}", kind.name(), m)));
                let cases: Vec<_> = rows.iter().map(|r| (r.p, r.cells, r.dof)).collect();
                failures.extend(experiments::check_bounded(&spec, kind, &cases));
            }
        }
        Command::Scan(args) => {
            let spec = ExperimentSpec::load(&args.spec)?;
            let base = report_path(&args, &spec);
            for &kind in &spec.limiters {
                let path = limiter_path(&base, &spec, kind);
                let (rows, outcomes) = experiments::run_scan(&spec, kind)?;
                report::write_scan(&path, &rows, spec.runtime)?;
                println!("wrote {}", path.display());
                if spec.dump {
                    for (r, o) in rows.iter().zip(&outcomes) {
                        dump(&path, &format!("p{}-N{}-lambda{}", r.p, r.cells, sig6(r.lambda)), o)?;
                    }
                }
                let cases: Vec<_> = rows.iter().map(|r| (r.p, r.cells, r.dof)).collect();
                failures.extend(experiments::check_bounded(&spec, kind, &cases));
            }
        }
        Command::Bisect(args) => {
            let spec = ExperimentSpec::load(&args.spec)?;
            let path = report_path(&args, &spec);
            let rows = experiments::run_bisect(&spec)?;
            report::write_bisect(&path, &rows)?;
            println!("wrote {}", path.display());
            failures.extend(experiments::check_lambdas(&spec, &rows));
        }
        Command::Bench { spec, out } => {
            let cfg = match spec {
                Some(path) => bench::parse_config(&std::fs::read_to_string(path)?)?,
                None => BenchConfig::default(),
            };
            let rows = bench::run_bench(&cfg)?;
            bench::write_bench(&out, &rows)?;
            println!("wrote {}", out.display());
            for r in rows.iter().filter(|r| !r.passes()) {
                failures.push(format!(
                    "bench {}D {} p={}: relative error {:e} above {:e}",
                    r.dim,
                    r.kind.name(),
                    r.p,
                    r.rel_err,
                    bench::GATE
                ));
            }
        }
    }
    Ok(failures)
}
