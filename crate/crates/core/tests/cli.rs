use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use delaymatch::config::ScenarioFile;
use delaymatch::report::{read_csv, CSV_COLUMNS};
use delaymatch::sim::integrate_closed_loop;
use tempfile::TempDir;

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/reference.toml")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaymatch"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn variant(dir: &TempDir, name: &str, edit: impl Fn(String) -> String) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, edit(fs::read_to_string(reference_config()).unwrap())).unwrap();
    path
}

#[test]
fn synth_reference() {
    let cfg = reference_config();
    let o = run(&["synth", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let out = text(&o.stdout);
    assert!(out.contains("tau_max = 0.4999999908642113"), "{out}");
    assert!(out.contains("tau_cross = 0.4999999908642114"), "{out}");
    assert!(!out.contains("= fail"), "{out}");
    assert!(out.contains("g_num_degree = 3"));
}

#[test]
fn synth_boundary_names_failed_constraint() {
    let dir = TempDir::new().unwrap();
    let quarter = 217.2061f64 * 217.2061 / 4.0;
    let cfg = variant(&dir, "b.toml", |t| {
        t.replace("chi3 = 676.2171", &format!("chi3 = {quarter}"))
    });
    let o = run(&["synth", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("chi3_below_quarter_chi2_squared"));
}

#[test]
fn synth_missing_key_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "m.toml", |t| {
        t.lines()
            .filter(|l| !l.starts_with("chi3"))
            .collect::<Vec<_>>()
            .join("\n")
    });
    let o = run(&["synth", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stderr).contains("chi3"), "{}", text(&o.stderr));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&["synth"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["synth", "--config", "/nonexistent/x.toml"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn simulate_writes_exact_csv_and_report() {
    let out = TempDir::new().unwrap();
    let cfg = reference_config();
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));

    let (header, rows) = read_csv(std::io::BufReader::new(
        fs::File::open(out.path().join("trajectory.csv")).unwrap(),
    ))
    .unwrap();
    assert_eq!(header, CSV_COLUMNS.to_vec());

    // the file reproduces the library trajectory bit for bit
    let sc = ScenarioFile::load(&cfg).unwrap().to_scenario().unwrap();
    let traj = integrate_closed_loop(&sc).unwrap();
    assert_eq!(rows.len(), traj.samples.len());
    for (row, s) in rows.iter().zip(&traj.samples) {
        let want = [
            s.t, s.r, s.w1, s.w_tilde2, s.w2, s.y1, s.y2, s.y2dot, s.psi5, s.psi6, s.g_out,
            s.y2_ref, s.err,
        ];
        for (a, b) in row.iter().zip(want) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
    let first = &rows[0];
    let last = rows.last().unwrap();
    assert_eq!(first[6], 0.5);
    assert!((last[6] - 0.6).abs() < 1e-3 * 0.6);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    let err = report["trajectory"]["max_matching_error"].as_f64().unwrap();
    assert_eq!(err.to_bits(), traj.max_matching_error().to_bits());
    assert!(err <= 1e-3 * 0.1);
    assert_eq!(
        report["delay_bound"]["tau_max"].as_f64().unwrap(),
        0.4999999908642113
    );
}

#[test]
fn simulate_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = reference_config();
    for d in [&a, &b] {
        let o = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    let read = |d: &TempDir| fs::read(d.path().join("trajectory.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn simulate_beyond_margin() {
    let out = TempDir::new().unwrap();
    let cfg = reference_config();
    let base = [
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--tau",
        "0.55",
    ];
    let o = run(&base);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("--allow-unstable"));

    let mut args = base.to_vec();
    args.push("--allow-unstable");
    let o = run(&args);
    match code(&o) {
        3 => {}
        0 => assert!(
            text(&o.stdout).contains("growing envelope"),
            "{}",
            text(&o.stdout)
        ),
        c => panic!("exit {c}: {}", text(&o.stderr)),
    }
}

#[test]
fn simulate_step_override_is_capped() {
    let out = TempDir::new().unwrap();
    let cfg = reference_config();
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--tau",
        "0.01",
        "--step",
        "0.001",
    ]);
    // 1e-3 equals τ/10 and stays below T_min/20 = 2e-3
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("h = 0.001"));
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--tau",
        "0.005",
        "--step",
        "0.001",
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("h = 0.0005"));
}

fn sweep_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sweep_brackets_the_margin() {
    let out = TempDir::new().unwrap();
    let cfg = reference_config();
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--tau",
        "0:0.6:0.1",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let file = fs::read_to_string(out.path().join("sweep.csv")).unwrap();
    let rows = sweep_rows(&file);
    let taus: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(taus, ["0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6"]);
    // τ_max = 0.49999999…, so the grid point 0.5 is already past the crossing
    for r in &rows {
        let tau: f64 = r[0].parse().unwrap();
        let stable = r[1] == "true";
        let decays = r[4] == "true";
        assert_eq!(stable, tau < 0.5, "{r:?}");
        assert_eq!(decays, stable, "{r:?}");
        assert!(r[7].is_empty(), "{r:?}");
    }
}

#[test]
fn sweep_single_zero_matches_simulate() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = reference_config();
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--tau",
        "0",
        "--out",
        a.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = sweep_rows(&fs::read_to_string(a.path().join("sweep.csv")).unwrap());
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--tau",
        "0",
        "--out",
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(b.path().join("report.json")).unwrap()).unwrap();
    let sweep_err: f64 = rows[0][5].parse().unwrap();
    assert_eq!(
        sweep_err,
        report["trajectory"]["max_matching_error"].as_f64().unwrap()
    );
}

#[test]
fn sweep_rejects_empty_and_malformed_lists() {
    let cfg = reference_config();
    for tau in ["", " , ", "0.6:0:0.1", "a"] {
        let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--tau", tau]);
        assert_eq!(code(&o), 1, "{tau:?}");
    }
}

#[test]
fn sweep_records_row_failures_and_continues() {
    let dir = TempDir::new().unwrap();
    // a horizon shorter than ten slowest time constants makes every simulation invalid
    let cfg = variant(&dir, "short.toml", |t| {
        t.replace("horizon = 1.5 ", "horizon = 0.3 ")
    });
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--tau",
        "0.1,0.6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let rows = sweep_rows(&fs::read_to_string(dir.path().join("sweep.csv")).unwrap());
    assert_eq!(rows.len(), 2);
    for (r, stable) in rows.iter().zip(["true", "false"]) {
        assert_eq!(r[1], stable);
        assert_eq!(r[5], "-");
        assert!(r[7].contains("horizon"), "{r:?}");
    }
}
