use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use super::report::RunReport;
use crate::error::{Error, Result};
use crate::spectral::WavenumberLattice;

pub const EIGENVALUES_FILE: &str = "eigenvalues.csv";
pub const BASELINE_FILE: &str = "baseline_eigenvalues.csv";
pub const REPORT_FILE: &str = "report.json";

/// Plain decimal with 17 significant digits, which round-trips any `f64`.
pub fn format_decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// `index,eigenvalue` rows, index from 1.
pub fn eigenvalues_csv(values: &[f64]) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, format_decimal(*v)).unwrap();
    }
    out
}

pub fn parse_eigenvalues_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    if lines.next() != Some("index,eigenvalue") {
        return Err(Error::invalid("eigenvalue CSV must start with `index,eigenvalue`"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::invalid(format!("eigenvalue CSV row {}: `{line}`", i + 1));
            let (idx, val) = line.split_once(',').ok_or_else(bad)?;
            if idx.parse::<usize>().ok() != Some(i + 1) {
                return Err(bad());
            }
            val.parse::<f64>().map_err(|_| bad())
        })
        .collect()
}

/// `ell,m,gamma,var_plus,var_minus`, one row per mode in lattice order.
pub fn lattice_csv(lattice: &WavenumberLattice) -> String {
    let mut out = String::from("ell,m,gamma,var_plus,var_minus\n");
    for p in lattice.modes() {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.ell,
            p.m,
            format_decimal(p.gamma),
            format_decimal(p.var_plus),
            format_decimal(p.var_minus)
        )
        .unwrap();
    }
    out
}

/// Writes `eigenvalues.csv`, `report.json` and, when the baseline ran,
/// `baseline_eigenvalues.csv` into `outdir`. Existing files are only
/// replaced with `force`. Every file goes to a temporary name first, so a
/// failure leaves none of the outputs behind.
pub fn emit_results(report: &RunReport, outdir: &Path, force: bool) -> Result<Vec<PathBuf>> {
    let mut files = vec![
        (EIGENVALUES_FILE, eigenvalues_csv(report.eigenvalues())),
        (
            REPORT_FILE,
            serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ),
    ];
    if let Some(b) = &report.baseline {
        files.push((BASELINE_FILE, eigenvalues_csv(&b.eigenvalues)));
    }
    let files: Vec<(PathBuf, String)> = files.into_iter().map(|(n, c)| (outdir.join(n), c)).collect();
    write_all_atomic(outdir, &files, force)?;
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// Atomic write of one file, honouring `force`.
pub fn write_file(path: &Path, contents: &str, force: bool) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    write_all_atomic(dir, &[(path.to_path_buf(), contents.to_string())], force)
}

fn write_all_atomic(dir: &Path, files: &[(PathBuf, String)], force: bool) -> Result<()> {
    if !force {
        if let Some((p, _)) = files.iter().find(|(p, _)| p.exists()) {
            return Err(Error::AlreadyExists { path: p.clone() });
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut temps: Vec<PathBuf> = Vec::new();
    let cleanup = |temps: &[PathBuf]| {
        for t in temps {
            let _ = fs::remove_file(t);
        }
    };
    for (path, contents) in files {
        let tmp = temp_name(path);
        let written = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(contents.as_bytes())?;
            f.sync_all()
        });
        temps.push(tmp.clone());
        if let Err(e) = written {
            cleanup(&temps);
            return Err(Error::io(&tmp, e));
        }
    }
    let mut renamed: Vec<&Path> = Vec::new();
    for ((path, _), tmp) in files.iter().zip(&temps) {
        if let Err(e) = fs::rename(tmp, path) {
            cleanup(&temps);
            for p in renamed {
                let _ = fs::remove_file(p);
            }
            return Err(Error::io(path, e));
        }
        renamed.push(path);
    }
    Ok(())
}

fn temp_name(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}
