use std::path::Path;
use std::process::{Command, Output};

use graphon_cli::record::parse_rows;
use graphon_cli::sweep::SWEEP_FILE;

fn graphon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphon")).args(args).output().expect("running graphon")
}

fn graphon_env(args: &[&str], workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphon"))
        .args(args)
        .env("GRAPHON_WORKERS", workers)
        .output()
        .expect("running graphon")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn sweep_args_tau<'a>(dir: &'a str, tau: [&'a str; 2], extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["sweep", "--quiet", "--output", dir, "--eps-min", "0.3", "--eps-max", "0.7", "--eps-count", "3"];
    v.extend(["--tau-min", tau[0], "--tau-max", tau[1], "--tau-count", "3"]);
    v.extend_from_slice(extra);
    v
}

fn sweep_args<'a>(dir: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    sweep_args_tau(dir, ["0.1", "0.9"], extra)
}

fn read(dir: &Path) -> String {
    std::fs::read_to_string(dir.join(SWEEP_FILE)).unwrap()
}

#[test]
fn classify_reports_labels() {
    for (e, t, label) in [("0.3", "0.0957", "I"), ("0.5", "0.125", "ER"), ("0.9", "0.95", "infeasible"), ("0.8", "0.508", "III")] {
        let o = graphon(&["classify", e, t]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        assert_eq!(text.lines().next(), Some(format!("label={label}").as_str()), "({e},{t})");
        assert!(text.contains("distance_er="));
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(graphon(&[]).status.code(), Some(2));
    assert_eq!(graphon(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(graphon(&["classify", "0.3"]).status.code(), Some(2));
    assert_eq!(graphon(&["classify", "1.5", "0.1"]).status.code(), Some(2));
    assert_eq!(graphon(&["sweep", "--eps-count", "0", "--output", "/nonexistent/x"]).status.code(), Some(2));
    assert_eq!(graphon(&["render", "x.csv", "--field", "colour"]).status.code(), Some(2));
    assert_eq!(graphon_env(&["sweep", "--output", "/nonexistent/x"], "lots").status.code(), Some(2));
    assert_eq!(graphon(&["--help"]).status.code(), Some(0));
}

#[test]
fn benchmark_detects_injected_sign_bug() {
    let o = graphon(&["benchmark", "--inject-sign-bug"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn benchmark_passes_nominally() {
    let o = graphon(&["benchmark"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("global minimum"));
    assert!(text.contains("rate=-0.346573590"));
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let da = a.path().to_str().unwrap();
    let db = b.path().to_str().unwrap();
    assert_eq!(graphon_env(&sweep_args(da, &[]), "1").status.code(), Some(0));
    assert_eq!(graphon_env(&sweep_args(db, &[]), "3").status.code(), Some(0));
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn sweep_rows_are_complete_and_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = graphon(&sweep_args_tau(d, ["0.02", "0.3"], &["--tau-mode", "absolute_range"]));
    assert_eq!(o.status.code(), Some(0));
    let text = read(dir.path());
    assert!(text.starts_with("#schema=graphon-sweep-v1\n"));
    let rows = parse_rows(&text).unwrap();
    assert_eq!(rows.len(), 9);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r.idx, k);
        match &r.graphon {
            Some(g) => {
                assert!((g.edge_density() - r.eps).abs() <= 1e-8, "row {k}");
                assert!((g.triangle_density() - r.tau).abs() <= 1e-8, "row {k}");
                assert_eq!(r.rate, g.rate().rate);
            }
            // only targets outside the feasible region carry no graphon
            None => assert_eq!(r.label.as_str(), "infeasible", "row {k}"),
        }
    }
    // e = 0.3, t = 0.3 lies above e^{3/2}
    assert_eq!(rows[2].label.as_str(), "infeasible");
    assert!(!rows[2].converged);
}

#[test]
fn interrupted_sweep_resumes_to_identical_file() {
    let full = tempfile::tempdir().unwrap();
    let part = tempfile::tempdir().unwrap();
    let df = full.path().to_str().unwrap();
    let dp = part.path().to_str().unwrap();
    assert_eq!(graphon(&sweep_args(df, &[])).status.code(), Some(0));
    let reference = read(full.path());

    // keep the preamble, four rows and a torn fifth line
    let lines: Vec<&str> = reference.split_inclusive('\n').collect();
    let mut torn: String = lines[..7].concat();
    torn.push_str(&lines[7][..lines[7].len() / 2]);
    std::fs::write(part.path().join(SWEEP_FILE), torn).unwrap();
    let o = graphon(&sweep_args(dp, &[]));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(4 resumed)"), "{}", stdout(&o));
    assert_eq!(read(part.path()), reference);

    // a completed file is left alone
    let o = graphon(&sweep_args(dp, &[]));
    assert!(stdout(&o).contains("(9 resumed)"));
    assert_eq!(read(part.path()), reference);

    // a different grid refuses to append
    let o = graphon(&sweep_args(dp, &["--seed", "5"]));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        "seed = 3\nn_blocks = [2]\ntau_mode = \"absolute_range\"\n[eps]\nmin = 0.4\nmax = 0.4\ncount = 1\n[tau]\nmin = 0.01\nmax = 0.05\ncount = 2\n",
    )
    .unwrap();
    let o = graphon(&["sweep", "-q", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--tau-count", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_rows(&read(&out)).unwrap();
    assert_eq!(rows.iter().map(|r| r.tau).collect::<Vec<_>>(), vec![0.01, 0.03, 0.05]);
    assert!(rows.iter().all(|r| r.eps == 0.4 && r.converged));
    std::fs::write(&cfg, "sed = 3\n").unwrap();
    assert_eq!(graphon(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn single_point_sweep_equals_solve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        "sweep", "-q", "--output", d, "--eps-min", "0.6", "--eps-count", "1", "--tau-mode", "absolute_range", "--tau-min",
        "0.184", "--tau-count", "1",
    ];
    assert_eq!(graphon(&args).status.code(), Some(0));
    let swept = read(dir.path());
    let solved = stdout(&graphon(&["solve", "0.6", "0.184"]));
    assert_eq!(swept.lines().last(), solved.lines().last());
    assert_eq!(parse_rows(&solved).unwrap().len(), 1);
}

#[test]
fn boundary_table_contains_the_phase23_roots() {
    let o = graphon(&["boundary"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let roots: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("0.6,") && l.ends_with(",phase23"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(roots.len(), 2);
    assert!((roots[0] - 0.152704753).abs() < 1e-6 && (roots[1] - 0.20651775).abs() < 1e-6);
    let pinch = text.lines().find(|l| l.ends_with(",pinch_off")).unwrap();
    let e: f64 = pinch.split(',').next().unwrap().parse().unwrap();
    assert!((e - 0.629497839).abs() < 1e-5);
}

#[test]
fn render_outputs_svg() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let o = graphon(&["render", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    let table = dir.path().join("b.csv");
    let b = graphon(&["boundary", "--eps-count", "51", "--output", table.to_str().unwrap()]);
    assert_eq!(b.status.code(), Some(0));
    let svg_path = dir.path().join("b.svg");
    let args = ["render", table.to_str().unwrap(), "--output", svg_path.to_str().unwrap()];
    assert_eq!(graphon(&args).status.code(), Some(0));
    let first = std::fs::read(&svg_path).unwrap();
    assert_eq!(graphon(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(&svg_path).unwrap(), first);
    assert!(String::from_utf8(first).unwrap().contains("<polyline"));

    let sweep_dir = dir.path().join("s");
    assert_eq!(graphon(&sweep_args(sweep_dir.to_str().unwrap(), &[])).status.code(), Some(0));
    let o = graphon(&["render", sweep_dir.join(SWEEP_FILE).to_str().unwrap(), "--field", "label"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("<rect").count(), 2 + 9);
}

#[test]
fn sample_reports_a_feasible_minimum() {
    let o = graphon(&["sample", "0.4", "0.05", "--samples", "500", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rate: f64 = text.lines().find_map(|l| l.strip_prefix("best_rate=")).unwrap().parse().unwrap();
    assert!(rate < 0.0 && rate > -0.35);
}

/// Ten by ten relative grid covering all three phases.
#[test]
fn ten_by_ten_sweep_converges_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let o = graphon(&["sweep", "-q", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_rows(&read(dir.path())).unwrap();
    assert_eq!(rows.len(), 100);
    let bad: Vec<_> = rows.iter().filter(|r| !r.converged).map(|r| (r.eps, r.tau)).collect();
    assert!(bad.is_empty(), "{bad:?}");
    for phase in ["I", "II", "III"] {
        assert!(rows.iter().any(|r| r.label.as_str() == phase), "no {phase} point");
    }
}
