use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: &str, envs: &[(&str, &str)]) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_brittle-limit"));
    cmd.args(args).arg("--config").arg(&cfg).arg("--out").arg(dir.join("out"));
    cmd.env_remove("BRITTLE_LIMIT_JOBS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn zero_strain_row() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["density"], r#"{"eps": 0.25, "points": [[0, 0, 0]]}"#, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("out/density.csv"));
    let r = &rows[0];
    for name in ["f", "w_eps", "g", "h", "support_k", "w_bar"] {
        assert_eq!(r[col(&h, name)].parse::<f64>().unwrap(), 0.0, "{name}");
    }
    assert_eq!(r[col(&h, "g_eps")].parse::<f64>().unwrap(), 0.7 / 0.25);
}

#[test]
fn strain_columns_round_trip() {
    let dir = TempDir::new().unwrap();
    let pts = [[0.1f64, -1.0 / 3.0, 2.0f64.sqrt()], [std::f64::consts::PI, 1e-300, -7.25]];
    let cfg = format!(r#"{{"eps": 0.1, "points": [[{:e}, {:e}, {:e}], [{:e}, {:e}, {:e}]]}}"#,
        pts[0][0], pts[0][1], pts[0][2], pts[1][0], pts[1][1], pts[1][2]);
    let out = run(dir.path(), &["density"], &cfg, &[]);
    assert!(out.status.success());
    let (h, rows) = read_csv(&dir.path().join("out/density.csv"));
    for (r, p) in rows.iter().zip(&pts) {
        let back = [col(&h, "xi_11"), col(&h, "xi_22"), col(&h, "xi_12")].map(|c| r[c].parse::<f64>().unwrap());
        assert_eq!(back.map(f64::to_bits), p.map(f64::to_bits));
        assert_eq!(r[col(&h, "xi_33")], "");
    }
}

#[test]
fn shear_sweep_reports_kink() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"eps": 0.1, "sweep": {"direction": [0, 0, 1], "t_min": 0, "t_max": 10, "steps": 101}}"#;
    assert!(run(dir.path(), &["density"], cfg, &[]).status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/density_summary.json")).unwrap()).unwrap();
    let kink = summary["kink_t"].as_f64().unwrap();
    let (h, rows) = read_csv(&dir.path().join("out/density.csv"));
    for r in &rows {
        let t: f64 = r[col(&h, "t")].parse().unwrap();
        let (f, w): (f64, f64) = (r[col(&h, "f")].parse().unwrap(), r[col(&h, "w_bar")].parse().unwrap());
        if t <= kink {
            assert!((w - f).abs() <= 1e-12 * (1.0 + f), "quadratic below the kink at t={t}");
        } else {
            assert!(w < f, "W_bar below f past the kink at t={t}");
        }
    }
}

#[test]
fn converge_gap_decreases() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["converge"], r#"{"points": [[0.3, -0.2, 0.4], [1, 2, 3, 0.1, 0.2, 0.3]]}"#, &[]);
    assert!(out.status.success());
    let (h, rows) = read_csv(&dir.path().join("out/converge.csv"));
    let (p, g) = (col(&h, "point"), col(&h, "gap"));
    for pair in rows.windows(2) {
        if pair[0][p] == pair[1][p] {
            assert!(pair[1][g].parse::<f64>().unwrap() < pair[0][g].parse::<f64>().unwrap());
        }
    }
}

#[test]
fn laminate_case_one_bound() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"params": {"lambda_w": 1, "mu_w": 1, "lambda_s": 1, "mu_s": 1, "kappa": 1},
                  "case": {"one": {"xi1": 1, "xi2": 1}}}"#;
    assert!(run(dir.path(), &["laminate"], cfg, &[]).status.success());
    let (h, rows) = read_csv(&dir.path().join("out/laminate.csv"));
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let b: f64 = r[col(&h, "limit_bound")].parse().unwrap();
        assert!((b - 2.0 * 6f64.sqrt()).abs() < 1e-14);
    }
    let last: f64 = rows[3][col(&h, "relative_gap")].parse().unwrap();
    assert!(last.abs() <= 0.03);
    let (_, bands) = read_csv(&dir.path().join("out/bands.csv"));
    assert!(!bands.is_empty());
}

const SOLVE: &str = r#"{"grid": {"nx": 12, "ny": 12}, "regime": "trivial", "xi_bc": [0.2, -0.1, 0.8],
    "eps_list": [0.3, 0.2], "init": {"random": {"fraction": 0.4}}, "seed": 3}"#;

fn solve_outputs(dir: &Path) -> Vec<Vec<u8>> {
    ["energy.csv", "damage.csv", "solve_summary.json"]
        .iter()
        .map(|f| std::fs::read(dir.join("out").join(f)).unwrap())
        .collect()
}

#[test]
fn solve_is_byte_identical_across_runs_and_jobs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let c = TempDir::new().unwrap();
    assert!(run(a.path(), &["solve", "--jobs", "1"], SOLVE, &[]).status.success());
    assert!(run(b.path(), &["solve"], SOLVE, &[("BRITTLE_LIMIT_JOBS", "3")]).status.success());
    assert!(run(c.path(), &["solve", "--jobs", "1"], SOLVE, &[]).status.success());
    assert_eq!(solve_outputs(a.path()), solve_outputs(b.path()));
    assert_eq!(solve_outputs(a.path()), solve_outputs(c.path()));

    let (h, rows) = read_csv(&a.path().join("out/energy.csv"));
    assert_eq!(h, ["eps", "eta", "iters", "energy", "damaged_volume", "limit_reference"]);
    assert_eq!(rows.len(), 2);
    let (h, rows) = read_csv(&a.path().join("out/damage.csv"));
    assert_eq!(h, ["eps", "cell", "chi"]);
    assert_eq!(rows.len(), 2 * 144);
}

#[test]
fn seed_flag_overrides_config() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert!(run(a.path(), &["solve", "--seed", "3"], SOLVE, &[]).status.success());
    assert!(run(b.path(), &["solve"], SOLVE, &[]).status.success());
    assert_eq!(solve_outputs(a.path()), solve_outputs(b.path()));
    let summary = std::fs::read_to_string(a.path().join("out/solve_summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 3"));
}

#[test]
fn schema_violations_exit_2() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("density", r#"{"eps": 0.1, "points": [[0, 0, 0]], "colour": 1}"#),
        ("density", r#"{"eps": 0.1, "params": {"lambda_w": 1, "mu_w": 1, "lambda_s": 1, "mu_s": 1, "kappa": 1, "extra": 0}, "points": [[0,0,0]]}"#),
        ("density", r#"{"eps": -0.1, "points": [[0, 0, 0]]}"#),
        ("density", r#"{"eps": 0.1, "points": [[0, 0]]}"#),
        ("converge", r#"{"points": [[1, 0, 0]], "params": {"lambda_w": 1, "mu_w": 1, "lambda_s": 1, "mu_s": 1, "kappa": -1}}"#),
        ("laminate", r#"{"case": {"one": {"xi1": 1, "xi2": -1}}}"#),
        ("solve", r#"{"grid": {"nx": 4, "ny": 4}, "regime": "plastic", "xi_bc": [0, 0, 1], "eps_list": [0.1]}"#),
        ("solve", r#"{"grid": {"nx": 4, "ny": 4}, "regime": "hencky", "xi_bc": [0, 0, 1], "eps_list": [0.1], "init": {"random": {"fraction": 2}}}"#),
        ("verify", r#"{"samples": 0}"#),
        ("verify", "not json"),
    ];
    for (cmd, cfg) in cases {
        let out = run(dir.path(), &[cmd], cfg, &[]);
        assert_eq!(out.status.code(), Some(2), "{cmd} {cfg}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn numeric_failure_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"grid": {"nx": 16, "ny": 16}, "regime": "hencky", "xi_bc": [0, 0, 1], "eps_list": [0.1],
                  "init": {"random": {"fraction": 0.5}}, "tolerances": {"cg_max_iter": 1}}"#;
    let out = run(dir.path(), &["solve"], cfg, &[]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_passes_on_small_budget() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["verify"], r#"{"samples": 20, "seed": 5}"#, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("out/verify.csv"));
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[col(&h, "pass")] == "1"));
    assert_eq!(rows[0][col(&h, "code")], "10");
}
