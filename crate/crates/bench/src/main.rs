use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use grp_bench::config::RawConfig;
use grp_bench::output::{gnuplot_script, run_stem, write_atomic, write_run_csv, SummaryRow};
use grp_bench::{run, sweep, BenchError, Config};

/// Finite-volume shock-tube benchmarks for the GRP Euler solvers.
///
/// Flags mirror the configuration keys and override values from --config.
#[derive(Debug, Parser)]
#[command(name = "grp-bench", version)]
struct Cli {
    /// Configuration file (`key = value` with [problem], [scheme], [output] sections).
    #[arg(long)]
    config: Option<PathBuf>,

    /// sod | leblanc_tangliu | smooth
    #[arg(long)]
    problem: Option<String>,

    /// Scheme name (comma-separated list with --sweep), e.g. grp-nonlinear, godunov, hllc, roe, muscl-hllc.
    #[arg(long)]
    scheme: Option<String>,

    /// Cell count (comma-separated list with --sweep).
    #[arg(long)]
    cells: Option<String>,

    #[arg(long)]
    cfl: Option<String>,

    /// Final time.
    #[arg(long)]
    tend: Option<String>,

    /// minmod | vanleer
    #[arg(long)]
    limiter: Option<String>,

    #[arg(long)]
    gamma: Option<String>,

    #[arg(long)]
    output_dir: Option<PathBuf>,

    /// Run every scheme at every cell count and write a summary table.
    #[arg(long)]
    sweep: bool,

    /// Skip gnuplot script generation.
    #[arg(long)]
    no_plot: bool,

    /// List configuration keys and exit.
    #[arg(long)]
    list_keys: bool,
}

impl Cli {
    fn config(&self) -> Result<Config, BenchError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        let flags = [
            ("problem", self.problem.clone()),
            ("scheme", self.scheme.clone()),
            ("cells", self.cells.clone()),
            ("cfl", self.cfl.clone()),
            ("t_end", self.tend.clone()),
            ("limiter", self.limiter.clone()),
            ("gamma", self.gamma.clone()),
            ("output_dir", self.output_dir.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(key, v)?;
            }
        }
        if self.no_plot {
            raw.set("plot", "false")?;
        }
        raw.resolve()
    }
}

fn execute(cli: &Cli) -> Result<(), BenchError> {
    let cfg = cli.config()?;
    let multi = cfg.schemes.len() > 1 || cfg.cells.len() > 1;
    if multi && !cli.sweep {
        return Err(BenchError::Validation {
            key: if cfg.cells.len() > 1 { "cells" } else { "scheme" }.into(),
            message: "lists need --sweep".into(),
        });
    }
    let plot = cfg.output.plot.then_some(cfg.output.display_points);

    if cli.sweep {
        let report = sweep(&cfg.problem, &cfg.schemes, &cfg.cells, &cfg.overrides, Some(&cfg.output.dir), plot)?;
        println!("{:<24} {:>7} {:>14} {:>10} {:>9}", "scheme", "cells", "L1(rho)", "steps", "time[s]");
        for row in &report.rows {
            match &row.outcome {
                Ok(r) => println!(
                    "{:<24} {:>7} {:>14.6e} {:>10} {:>9.3}",
                    row.scheme,
                    row.n_cells,
                    r.l1.unwrap_or_default().rho,
                    r.steps,
                    r.wall_time.as_secs_f64()
                ),
                Err(_) => println!("{:<24} {:>7} {:>14}", row.scheme, row.n_cells, "FAILED"),
            }
        }
        if let Some(p) = &report.summary {
            println!("summary: {}", p.display());
        }
        let failed: Vec<_> = report.failures().collect();
        for row in &failed {
            eprintln!("run failed: {}/{}/{}: {}", row.problem, row.scheme, row.n_cells, row.outcome.as_ref().err().unwrap());
        }
        if !failed.is_empty() {
            return Err(BenchError::SweepFailures { failed: failed.len(), total: report.rows.len() });
        }
        return Ok(());
    }

    let result = run(&cfg.problem, &cfg.schemes[0], cfg.cells[0], &cfg.overrides)?;
    let csv = write_run_csv(&cfg.output.dir, &result)?;
    if let Some(points) = plot {
        let stem = run_stem(&result);
        let rows = [SummaryRow {
            problem: result.problem.clone(),
            scheme: result.scheme.clone(),
            n_cells: result.n_cells,
            outcome: Ok(result.clone()),
            csv: Some(csv.clone()),
        }];
        let script = gnuplot_script(&result.problem, &rows, points, &format!("{stem}.png"));
        write_atomic(&cfg.output.dir.join(format!("{stem}.gp")), script.as_bytes())?;
    }
    let l1 = result.l1.unwrap_or_default();
    println!(
        "{} {} cells: L1(rho) = {:.6e}, L1(u) = {:.6e}, L1(p) = {:.6e}, {} steps",
        result.scheme, result.n_cells, l1.rho, l1.u, l1.p, result.steps
    );
    println!("wrote {}", csv.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.list_keys {
        for (key, section, doc) in grp_bench::config::KEYS {
            println!("[{section}] {key}: {doc}");
        }
        return ExitCode::SUCCESS;
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
