//! CSV and gnuplot output. Every file is written to a temporary sibling and
//! renamed into place, so readers never see a partial file.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::BenchError;
use crate::run::RunResult;

pub const VERSION: &str = concat!("grp-bench ", env!("CARGO_PKG_VERSION"));

/// Number of markers drawn per curve in the generated plots.
pub const DISPLAY_POINTS: usize = 66;

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), BenchError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| BenchError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| BenchError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| BenchError::io(path, e.error))?;
    Ok(())
}

/// Shortest round-trip representation, switching to exponent notation for
/// very large or small magnitudes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn run_stem(result: &RunResult) -> String {
    format!("{}_{}_{}", sanitize(&result.problem), sanitize(&result.scheme), result.n_cells)
}

/// Per-run CSV: `#` metadata lines, then the column header and one row per cell.
///
/// Floats use the shortest representation that round-trips exactly.
pub fn run_csv(result: &RunResult) -> Result<Vec<u8>, BenchError> {
    let mut out = Vec::new();
    let meta = [
        ("problem", result.problem.clone()),
        ("scheme", result.scheme.clone()),
        ("n_cells", result.n_cells.to_string()),
        ("cfl", fmt_f64(result.cfl)),
        ("t_end", fmt_f64(result.t_end)),
        ("version", VERSION.to_string()),
        ("steps", result.steps.to_string()),
        ("dt_retries", result.retries.to_string()),
        ("grp_fallbacks", result.paths.fallbacks().to_string()),
    ];
    for (k, v) in meta {
        writeln!(out, "# {k} = {v}").expect("write to Vec");
    }
    let with_exact = result.exact.is_some() && result.riemann;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["x", "rho", "u", "p", "e", "S"];
        if with_exact {
            header.extend(["rho_exact", "u_exact", "p_exact"]);
        }
        w.write_record(&header)?;
        for j in 0..result.n_cells {
            let s = result.state[j];
            let mut row = vec![
                fmt_f64(result.x[j]),
                fmt_f64(s.rho),
                fmt_f64(s.u),
                fmt_f64(s.p),
                fmt_f64(result.e[j]),
                fmt_f64(result.entropy[j]),
            ];
            if with_exact {
                let ex = result.exact.as_ref().expect("checked")[j];
                row.extend([fmt_f64(ex.rho), fmt_f64(ex.u), fmt_f64(ex.p)]);
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| BenchError::io("<csv buffer>", e))?;
    }
    Ok(out)
}

pub fn write_run_csv(dir: &Path, result: &RunResult) -> Result<PathBuf, BenchError> {
    let path = dir.join(format!("{}.csv", run_stem(result)));
    write_atomic(&path, &run_csv(result)?)?;
    Ok(path)
}

/// One row of the sweep summary.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub problem: String,
    pub scheme: String,
    pub n_cells: usize,
    pub outcome: Result<RunResult, String>,
    pub csv: Option<PathBuf>,
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>, BenchError> {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record([
            "problem", "scheme", "n_cells", "status", "cfl", "t_end", "l1_rho", "l1_u", "l1_p", "linf_rho", "linf_u",
            "linf_p", "steps", "grp_fallbacks", "wall_time_s", "csv", "error",
        ])?;
        for row in rows {
            let mut rec = vec![row.problem.clone(), row.scheme.clone(), row.n_cells.to_string()];
            match &row.outcome {
                Ok(r) => {
                    let l1 = r.l1.unwrap_or_default();
                    let linf = r.linf.unwrap_or_default();
                    rec.extend([
                        "ok".to_string(),
                        fmt_f64(r.cfl),
                        fmt_f64(r.t_end),
                        fmt_f64(l1.rho),
                        fmt_f64(l1.u),
                        fmt_f64(l1.p),
                        fmt_f64(linf.rho),
                        fmt_f64(linf.u),
                        fmt_f64(linf.p),
                        r.steps.to_string(),
                        r.paths.fallbacks().to_string(),
                        r.wall_time.as_secs_f64().to_string(),
                        row.csv.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                        String::new(),
                    ]);
                }
                Err(msg) => {
                    rec.push("failed".to_string());
                    rec.extend(std::iter::repeat_n(String::new(), 12));
                    rec.push(msg.clone());
                }
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| BenchError::io("<csv buffer>", e))?;
    }
    Ok(out)
}

/// Gnuplot script: one density panel per resolution, every scheme as markers
/// over the exact solution drawn as a line. Markers are thinned to about
/// `display_points` per curve; the data files keep every cell.
pub fn gnuplot_script(title: &str, rows: &[SummaryRow], display_points: usize, output_png: &str) -> String {
    let mut resolutions: Vec<usize> = rows.iter().filter(|r| r.csv.is_some()).map(|r| r.n_cells).collect();
    resolutions.sort_unstable();
    resolutions.dedup();
    let mut s = String::new();
    let _ = writeln!(s, "# generated by {VERSION}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size {},{}", 600 * resolutions.len().max(1), 450);
    let _ = writeln!(s, "set output '{output_png}'");
    let _ = writeln!(s, "set xlabel 'x'");
    let _ = writeln!(s, "set ylabel 'density'");
    if resolutions.len() > 1 {
        let _ = writeln!(s, "set multiplot layout 1,{} title '{title}'", resolutions.len());
    }
    for n in &resolutions {
        let panel: Vec<&SummaryRow> = rows.iter().filter(|r| r.n_cells == *n && r.csv.is_some()).collect();
        let every = (n / display_points.max(1)).max(1);
        let _ = writeln!(s, "set title '{title}, {n} cells'");
        let mut parts = Vec::new();
        if let Some(first) = panel.first() {
            let has_exact = first.outcome.as_ref().map(|r| r.riemann).unwrap_or(false);
            if has_exact {
                let file = file_name(first);
                parts.push(format!("'{file}' every ::1 using 1:7 with lines lw 2 lc rgb 'black' title 'exact'"));
            }
        }
        for (k, r) in panel.iter().enumerate() {
            parts.push(format!(
                "'{}' every {every}::1 using 1:2 with points pt {} title '{}'",
                file_name(r),
                k + 4,
                r.scheme
            ));
        }
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    }
    if resolutions.len() > 1 {
        let _ = writeln!(s, "unset multiplot");
    }
    s
}

fn file_name(row: &SummaryRow) -> String {
    row.csv
        .as_ref()
        .and_then(|p| p.file_name())
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default()
}
