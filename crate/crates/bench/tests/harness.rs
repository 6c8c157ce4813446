use std::fs;

use grp_bench::config::parse_config;
use grp_bench::output::{gnuplot_script, run_csv, summary_csv, SummaryRow};
use grp_bench::reference::{cell_average_reference, observed_orders, steepest_density_jump};
use grp_bench::{exact_reference, l1_error, run, sweep, Overrides, ProblemSpec};
use grp_core::riemann::{solve_star, RiemannOptions};
use grp_core::scheme::{FluxSolver, Grid, SchemeSpec};
use grp_core::{GasModel, PrimitiveState};

fn godunov() -> SchemeSpec {
    SchemeSpec::first_order(FluxSolver::ExactGodunov)
}

#[test]
fn reference_before_waves_arrive_is_initial_data() {
    let p = ProblemSpec::sod(1.4);
    let xs = [0.0, 0.05, 0.95, 1.0];
    let r = exact_reference(&p, &xs, 0.01).unwrap();
    assert_eq!(r[0], PrimitiveState::new(1.0, 0.0, 1.0));
    assert_eq!(r[1], PrimitiveState::new(1.0, 0.0, 1.0));
    assert_eq!(r[2], PrimitiveState::new(0.125, 0.0, 0.1));
    assert_eq!(r[3], PrimitiveState::new(0.125, 0.0, 0.1));
    assert!(exact_reference(&p, &xs, 0.0).is_err());
}

#[test]
fn reference_at_interface_is_star_state() {
    let p = ProblemSpec::sod(1.4);
    let gas = GasModel::air();
    let fan = solve_star(&PrimitiveState::new(1.0, 0.0, 1.0), &PrimitiveState::new(0.125, 0.0, 0.1), &gas, &RiemannOptions::default())
        .unwrap();
    for t in [0.01, 0.1, 0.25] {
        let s = exact_reference(&p, &[0.5], t).unwrap()[0];
        assert_eq!(s, fan.star_left());
    }
}

#[test]
fn leblanc_reference_spans_the_exact_wave_strengths() {
    let p = ProblemSpec::leblanc_tangliu(1.4).unwrap();
    let grid = Grid::new(20_000, p.x_min, p.x_max).unwrap();
    let r = exact_reference(&p, &grid.centers(), p.t_end).unwrap();
    let max = r.iter().map(|s| s.rho).fold(0.0, f64::max);
    assert_eq!(max, 1e4);
    // fan tail plateau at about 105.5 and post-shock plateau at about 4.48
    let plateau = |a: f64, b: f64| {
        r.iter().zip(grid.centers()).filter(|(_, x)| *x > a && *x < b).map(|(s, _)| s.rho).collect::<Vec<_>>()
    };
    let tail = plateau(4.1, 4.5);
    let post = plateau(4.8, 5.9);
    assert!(tail.iter().all(|&d| (d - 105.518218772269404).abs() < 1e-9));
    assert!(post.iter().all(|&d| (d - 4.48397623609000523).abs() < 1e-9));
}

#[test]
fn l1_examples() {
    let a = vec![PrimitiveState::new(1.0, 0.0, 1.0); 10];
    assert_eq!(l1_error(&a, &a, 0.1).rho, 0.0);
    let shifted: Vec<_> = a.iter().map(|s| PrimitiveState::new(s.rho + 0.3, s.u, s.p)).collect();
    let e = l1_error(&shifted, &a, 0.2);
    assert!((e.rho - 0.3 * 2.0).abs() < 1e-14);
    assert_eq!((e.u, e.p), (0.0, 0.0));
}

#[test]
fn sod_godunov_accuracy_and_refinement() {
    let p = ProblemSpec::sod(1.4);
    let mut errs = Vec::new();
    for n in [100, 200, 400, 800] {
        let r = run(&p, &godunov(), n, &Overrides::default()).unwrap();
        errs.push(r.l1.unwrap().rho);
    }
    assert!(errs[0] < 2e-2, "{errs:?}");
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.2..=2.5).contains(&ratio), "ratio {ratio}: {errs:?}");
    }
    assert!(observed_orders(&errs).iter().all(|&o| o > 0.0));
}

#[test]
fn sod_godunov_profile_is_monotone_between_waves() {
    let p = ProblemSpec::sod(1.4);
    let r = run(&p, &godunov(), 100, &Overrides::default()).unwrap();
    // the exact density never increases from left to right; the only rise in
    // the Godunov profile is the start-up dip left where the diaphragm was
    let mut rise = 0.0;
    for (j, w) in r.state.windows(2).enumerate() {
        let inc = w[1].rho - w[0].rho;
        if inc > 1e-12 {
            let x = r.grid.center(j);
            assert!((x - 0.5).abs() < 0.05, "density rises at x = {x}");
            rise += inc;
        }
    }
    assert!(rise < 5e-3, "start-up rise {rise}");
}

#[test]
fn reference_cell_averages_match_center_sampling_on_smooth_data() {
    let p = ProblemSpec::smooth(1.4);
    let mut diffs = Vec::new();
    for n in [50, 100, 200] {
        let grid = Grid::new(n, 0.0, 1.0).unwrap();
        let avg = cell_average_reference(&p, &grid, 0.15, 10).unwrap();
        let pts = exact_reference(&p, &grid.centers(), 0.15).unwrap();
        diffs.push(avg.iter().zip(&pts).map(|(a, b)| (a.rho - b.rho).abs()).fold(0.0, f64::max));
    }
    let orders = observed_orders(&diffs);
    assert!(orders.iter().all(|&o| o > 1.9), "{diffs:?} {orders:?}");
}

#[test]
fn csv_is_deterministic_and_round_trips() {
    let p = ProblemSpec::sod(1.4);
    let spec = SchemeSpec::grp(FluxSolver::GrpNonlinear);
    let a = run(&p, &spec, 64, &Overrides::default()).unwrap();
    let b = run(&p, &spec, 64, &Overrides { parallel: Some(true), ..Overrides::default() }).unwrap();
    let (ca, cb) = (run_csv(&a).unwrap(), run_csv(&b).unwrap());
    assert_eq!(ca, cb);

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(ca.as_slice());
    let header = reader.headers().unwrap().clone();
    assert_eq!(header.iter().collect::<Vec<_>>(), ["x", "rho", "u", "p", "e", "S", "rho_exact", "u_exact", "p_exact"]);
    let mut n = 0;
    for (j, rec) in reader.records().enumerate() {
        let rec = rec.unwrap();
        assert_eq!(rec[1].parse::<f64>().unwrap(), a.state[j].rho);
        assert_eq!(rec[3].parse::<f64>().unwrap(), a.state[j].p);
        assert_eq!(rec[6].parse::<f64>().unwrap(), a.exact.as_ref().unwrap()[j].rho);
        n += 1;
    }
    assert_eq!(n, 64);
    let text = String::from_utf8(ca).unwrap();
    for key in ["problem = sod", "scheme = grp-nonlinear", "n_cells = 64", "cfl = 0.32", "t_end = 0.25", "version = "] {
        assert!(text.contains(key), "missing `{key}`");
    }
}

#[test]
fn smooth_csv_has_no_exact_columns() {
    let p = ProblemSpec::smooth(1.4);
    let r = run(&p, &godunov(), 20, &Overrides::default()).unwrap();
    let text = String::from_utf8(run_csv(&r).unwrap()).unwrap();
    assert!(text.lines().any(|l| l == "x,rho,u,p,e,S"));
}

#[test]
fn empty_sweep_succeeds() {
    let p = ProblemSpec::sod(1.4);
    let report = sweep(&p, &[], &[100], &Overrides::default(), None, None).unwrap();
    assert!(report.rows.is_empty());
    let csv = summary_csv(&report.rows).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1);
}

#[test]
fn sweep_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = ProblemSpec::leblanc_tangliu(1.4).unwrap();
    let schemes = [godunov(), SchemeSpec::first_order(FluxSolver::Hllc), SchemeSpec::first_order(FluxSolver::RoeEfix)];
    let report = sweep(&p, &schemes, &[40, 80], &Overrides::default(), Some(dir.path()), Some(66)).unwrap();
    assert_eq!(report.rows.len(), 6);
    assert_eq!(report.failures().count(), 0);
    let summary = fs::read_to_string(report.summary.unwrap()).unwrap();
    assert_eq!(summary.lines().count(), 1 + 6);
    let script = fs::read_to_string(report.plot.unwrap()).unwrap();
    assert!(script.contains("leblanc_tangliu_hllc_80.csv"));
    assert!(script.contains("multiplot layout 1,2"));
    let csvs = fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "csv").count();
    assert_eq!(csvs, 7);
}

#[test]
fn sweep_records_failures_and_continues() {
    let p = ProblemSpec::sod(1.4);
    // t_end override that no run can reach without an error is hard to build,
    // so use an invalid scheme: the run fails validation and is recorded
    let mut bad = godunov();
    bad.cfl = 2.0;
    let report = sweep(&p, &[bad, godunov()], &[20], &Overrides::default(), None, None).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.failures().count(), 1);
    let csv = String::from_utf8(summary_csv(&report.rows).unwrap()).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains("failed"));
}

#[test]
fn display_subsampling_leaves_errors_alone() {
    let p = ProblemSpec::sod(1.4);
    let r = run(&p, &godunov(), 660, &Overrides::default()).unwrap();
    let row = SummaryRow {
        problem: r.problem.clone(),
        scheme: r.scheme.clone(),
        n_cells: r.n_cells,
        outcome: Ok(r.clone()),
        csv: Some("sod_exact-godunov_660.csv".into()),
    };
    let script = gnuplot_script("sod", &[row], 66, "x.png");
    assert!(script.contains("every 10::1"));
    let full = l1_error(&r.state, r.exact.as_ref().unwrap(), r.grid.dx);
    assert_eq!(full, r.l1.unwrap());
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "[problem]\nproblem = leblanc_tangliu\ngamma = 1.4\n[scheme]\nscheme = grp-nonlinear\ncfl = 0.32\n").unwrap();
    let cfg = parse_config(&path).unwrap();
    assert_eq!(cfg.problem, ProblemSpec::leblanc_tangliu(1.4).unwrap());
    assert_eq!(cfg.schemes[0], SchemeSpec::grp(FluxSolver::GrpNonlinear));
    assert!(matches!(parse_config(&dir.path().join("missing.cfg")), Err(grp_bench::BenchError::Io { .. })));
}

#[test]
fn shock_locator_finds_the_steepest_jump() {
    let grid = Grid::new(10, 0.0, 1.0).unwrap();
    let prims: Vec<_> = (0..10).map(|j| PrimitiveState::new(if j < 6 { 2.0 } else { 1.0 }, 0.0, 1.0)).collect();
    assert_eq!(steepest_density_jump(&grid, &prims, 0.0, 1.0), Some(grid.x_min + 6.0 * grid.dx));
    assert!((steepest_density_jump(&grid, &prims, 0.0, 1.0).unwrap() - 0.6).abs() < 1e-14);
    assert_eq!(steepest_density_jump(&grid, &prims, 0.7, 1.0).map(|x| x > 0.7), Some(true));
}
