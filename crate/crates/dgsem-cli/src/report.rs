//! CSV output. Numbers carry 6 significant digits.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use dgsem_core::Field;

use crate::error::Result;
use crate::experiments::{BisectRow, ConvergenceRow, ScanRow};

/// `%g`-style formatting with 6 significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // The exponent after rounding, so 9.999999e-5 counts as 1e-4.
    let sci = format!("{:.5e}", x);
    let exp: i32 = sci.split_once('e').and_then(|(_, k)| k.parse().ok()).expect("scientific format");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let (m, k) = sci.split_once('e').expect("scientific format");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{}e{}", m, k)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

fn runtime(x: f64, enabled: bool) -> String {
    if enabled {
        sig6(x)
    } else {
        "0".into()
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

pub const RUN_HEADER: [&str; 11] = ["p", "N", "L2", "order2", "Linf", "orderInf", "minavg", "maxavg", "mindof", "maxdof", "runtime"];

pub fn write_convergence(path: &Path, rows: &[ConvergenceRow], with_runtime: bool) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RUN_HEADER)?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.cells.to_string(),
            sig6(r.l2),
            opt(r.order2),
            sig6(r.linf),
            opt(r.order_inf),
            sig6(r.avg.0),
            sig6(r.avg.1),
            sig6(r.dof.0),
            sig6(r.dof.1),
            runtime(r.runtime, with_runtime),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const SCAN_HEADER: [&str; 10] = ["p", "lambda", "N", "minavg", "maxavg", "mindof", "maxdof", "steps", "stop", "runtime"];

pub fn write_scan(path: &Path, rows: &[ScanRow], with_runtime: bool) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SCAN_HEADER)?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            sig6(r.lambda),
            r.cells.to_string(),
            sig6(r.avg.0),
            sig6(r.avg.1),
            sig6(r.dof.0),
            sig6(r.dof.1),
            r.steps.to_string(),
            r.stop.name().to_string(),
            runtime(r.runtime, with_runtime),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bisect(path: &Path, rows: &[BisectRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["p", "lambda_exp", "largest_failing", "lambda_min"])?;
    for r in rows {
        w.write_record([r.p.to_string(), sig6(r.lambda_exp), opt(r.largest_failing), sig6(r.lambda_min)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bounds(out: &mut impl Write, rows: &[(usize, f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["quantity".to_string()];
    head.extend(rows.iter().map(|(p, _, _)| format!("p={}", p)));
    w.write_record(&head)?;
    let mut lam = vec!["lambda_min".to_string()];
    lam.extend(rows.iter().map(|r| sig6(r.1)));
    w.write_record(&lam)?;
    let mut d = vec!["d_min".to_string()];
    d.extend(rows.iter().map(|r| sig6(r.2)));
    w.write_record(&d)?;
    w.flush()?;
    Ok(())
}

/// Nodal dump: cell indices, node indices, coordinates and value.
pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    let space = field.space();
    let dim = space.dim();
    let axes = ["i", "j", "k"];
    let nodes = ["a", "b", "c"];
    let coords = ["x", "y", "z"];
    let mut w = writer(path)?;
    let head: Vec<&str> = axes[..dim].iter().chain(&nodes[..dim]).chain(&coords[..dim]).copied().chain(["u"]).collect();
    w.write_record(&head)?;
    let npc = space.nodes_per_cell();
    for c in 0..space.mesh().cells() {
        let ci = space.mesh().cell_coords(c);
        for n in 0..npc {
            let ni = space.node_coords(n);
            let x = space.position(c, n);
            let mut rec: Vec<String> = Vec::with_capacity(3 * dim + 1);
            rec.extend(ci[..dim].iter().map(usize::to_string));
            rec.extend(ni[..dim].iter().map(usize::to_string));
            rec.extend(x[..dim].iter().map(|v| sig6(*v)));
            rec.push(sig6(field.values()[c * npc + n]));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `<stem>-<suffix>.<ext>` next to `path`.
pub fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{}-{}.{}", stem, suffix, ext))
}
