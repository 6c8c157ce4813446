//! Scheme-by-resolution sweeps.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use grp_core::scheme::SchemeSpec;

use crate::error::BenchError;
use crate::output::{gnuplot_script, summary_csv, write_atomic, write_run_csv, SummaryRow};
use crate::problem::ProblemSpec;
use crate::run::{run, Overrides};

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SummaryRow>,
    pub summary: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl SweepReport {
    pub fn failures(&self) -> impl Iterator<Item = &SummaryRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }
}

/// Runs every scheme at every resolution. Runs execute in parallel; a failed
/// run is recorded in its summary row and the sweep carries on.
///
/// With `out_dir`, writes one CSV per successful run, `<problem>_summary.csv`
/// and (when `plot` is set) `<problem>_sweep.gp`.
pub fn sweep(
    problem: &ProblemSpec,
    schemes: &[SchemeSpec],
    resolutions: &[usize],
    overrides: &Overrides,
    out_dir: Option<&Path>,
    plot: Option<usize>,
) -> Result<SweepReport, BenchError> {
    let jobs: Vec<(SchemeSpec, usize)> = schemes.iter().flat_map(|s| resolutions.iter().map(move |&n| (*s, n))).collect();
    let rows: Vec<SummaryRow> = jobs
        .par_iter()
        .map(|(spec, n)| {
            let outcome = run(problem, spec, *n, overrides);
            let (outcome, csv) = match outcome {
                Ok(r) => {
                    let csv = match out_dir {
                        Some(dir) => match write_run_csv(dir, &r) {
                            Ok(p) => Some(p),
                            Err(e) => return row(problem, spec, *n, Err(e.to_string()), None),
                        },
                        None => None,
                    };
                    (Ok(r), csv)
                }
                Err(e) => {
                    log::warn!("{}/{}/{n}: {e}", problem.name, spec.label());
                    (Err(e.to_string()), None)
                }
            };
            row(problem, spec, *n, outcome, csv)
        })
        .collect();

    let (mut summary, mut plot_path) = (None, None);
    if let Some(dir) = out_dir {
        let path = dir.join(format!("{}_summary.csv", problem.name));
        write_atomic(&path, &summary_csv(&rows)?)?;
        summary = Some(path);
        if let Some(points) = plot {
            let path = dir.join(format!("{}_sweep.gp", problem.name));
            let png = format!("{}_sweep.png", problem.name);
            write_atomic(&path, gnuplot_script(&problem.name, &rows, points, &png).as_bytes())?;
            plot_path = Some(path);
        }
    }
    Ok(SweepReport { rows, summary, plot: plot_path })
}

fn row(problem: &ProblemSpec, spec: &SchemeSpec, n: usize, outcome: Result<crate::RunResult, String>, csv: Option<PathBuf>) -> SummaryRow {
    SummaryRow { problem: problem.name.clone(), scheme: spec.label(), n_cells: n, outcome, csv }
}
