use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const DISK: &str = r#"{"shape": "disk", "center": [0, 0], "radius": 1}"#;
const SQUARE: &str = r#"{"shape": "polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schwarz-stab"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn basic(domain: &str, h: f64) -> String {
    format!(r#"{{"domain": {domain}, "source": {{"expr": "1"}}, "h": {h}}}"#)
}

fn read_grid(p: &Path) -> (usize, usize, f64, [f64; 2], Vec<f64>) {
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "nx,ny,h,ox,oy");
    let d: Vec<&str> = lines.next().unwrap().split(',').collect();
    let vals: Vec<f64> = lines.flat_map(|l| l.split(',').map(|t| t.parse::<f64>().unwrap()).collect::<Vec<_>>()).collect();
    (d[0].parse().unwrap(), d[1].parse().unwrap(), d[2].parse().unwrap(), [d[3].parse().unwrap(), d[4].parse().unwrap()], vals)
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn solve_reproduces_torsion_centre_value() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "c.json", &basic(DISK, 1.0 / 64.0));
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", "out"], t.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (nx, _, h, origin, vals) = read_grid(&t.path().join("out/solve.csv"));
    // the cell whose centre is nearest the origin
    let (i, j) = (((0.0 - origin[0]) / h - 0.5).round() as usize, ((0.0 - origin[1]) / h - 0.5).round() as usize);
    let centre = vals[j * nx + i];
    assert!((centre - 0.25).abs() < 1e-3, "{centre}");
    let diag: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(t.path().join("out/solve.json")).unwrap()).unwrap();
    assert_eq!(diag["diagnostics"]["converged"], true);
}

#[test]
fn malformed_config_exits_2() {
    let t = TempDir::new().unwrap();
    let good = basic(DISK, 0.125);
    // every proper prefix of a valid config is malformed
    for cut in (1..good.len()).step_by(7) {
        let cfg = write_config(t.path(), "c.json", &good[..cut]);
        let o = run(&["audit", "--config", cfg.to_str().unwrap(), "--out", "o"], t.path());
        assert_eq!(code(&o), 2, "prefix {:?}", &good[..cut]);
    }
    let cfg = write_config(t.path(), "c.json", r#"{"domain": 3}"#);
    assert_eq!(code(&run(&["solve", "--config", cfg.to_str().unwrap()], t.path())), 2);
    assert_eq!(code(&run(&["solve", "--config", "missing.json"], t.path())), 2);
    assert_eq!(code(&run(&["solve", "--h", "abc"], t.path())), 2);
    // no domain
    let cfg = write_config(t.path(), "c.json", r#"{"h": 0.1}"#);
    assert_eq!(code(&run(&["solve", "--config", cfg.to_str().unwrap(), "--out", "o"], t.path())), 2);
}

#[test]
fn unwritable_output_exits_3() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "c.json", &basic(DISK, 0.125));
    std::fs::write(t.path().join("file"), "").unwrap();
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", "file/sub"], t.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn empty_rasterization_exits_4() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "c.json", &basic(r#"{"shape": "disk", "center": [0, 0], "radius": 0.01}"#, 0.5));
    assert_eq!(code(&run(&["solve", "--config", cfg.to_str().unwrap(), "--out", "o"], t.path())), 4);
}

#[test]
fn audits_of_rigid_and_square_instances_pass() {
    let t = TempDir::new().unwrap();
    for (name, dom) in [("disk", DISK), ("square", SQUARE)] {
        let cfg = write_config(t.path(), &format!("{name}.json"), &basic(dom, 1.0 / 32.0));
        let o = run(&["audit", "--config", cfg.to_str().unwrap(), "--out", name], t.path());
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(t.path().join(name).join("audit.json")).unwrap()).unwrap();
        for key in ["instance", "quantities", "verdicts", "solver"] {
            assert!(report.get(key).is_some(), "{name}: missing {key}");
        }
        let csv = std::fs::read_to_string(t.path().join(name).join("audit.csv")).unwrap();
        assert_eq!(csv_column(&csv, "pass"), ["true"]);
    }
}

#[test]
fn corrupted_solution_fails_talenti() {
    // at h = 1/32 the Talenti tolerance 5h̃‖v‖∞ would absorb a 20% inflation
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "c.json", &basic(SQUARE, 1.0 / 64.0));
    assert_eq!(code(&run(&["solve", "--config", cfg.to_str().unwrap(), "--out", "s"], t.path())), 0);
    let text = std::fs::read_to_string(t.path().join("s/solve.csv")).unwrap();
    for factor in [1.2, 1.5, 3.0] {
        let mut out = Vec::new();
        for (k, line) in text.lines().enumerate() {
            if k < 2 {
                out.push(line.to_string());
            } else {
                let row: Vec<String> = line
                    .split(',')
                    .map(|v| {
                        let x: f64 = v.parse().unwrap();
                        if x.is_nan() { "NaN".to_string() } else { format!("{:e}", x * factor) }
                    })
                    .collect();
                out.push(row.join(","));
            }
        }
        std::fs::write(t.path().join("u_bad.csv"), out.join("\n")).unwrap();
        let cfg = write_config(
            t.path(),
            "bad.json",
            &format!(r#"{{"domain": {SQUARE}, "source": {{"expr": "1"}}, "solution": {{"grid_file": "u_bad.csv"}}, "h": {}}}"#, 1.0 / 64.0),
        );
        let o = run(&["audit", "--config", cfg.to_str().unwrap(), "--out", "b"], t.path());
        assert_eq!(code(&o), 1, "factor {factor}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("talenti"), "factor {factor}");
    }
}

#[test]
fn counterexample_columns_and_fit() {
    let t = TempDir::new().unwrap();
    let o = run(&["counterexample", "--sigma", "0.25,0.125", "--out", "ce"], t.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(t.path().join("ce/counterexample.csv")).unwrap();
    for v in csv_column(&csv, "l2_diff") {
        let x: f64 = v.parse().unwrap();
        assert!((x / (2.0 * std::f64::consts::PI).sqrt() - 1.0).abs() < 0.05, "{x}");
    }
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(t.path().join("ce/counterexample.json")).unwrap()).unwrap();
    assert!((rep["fit"]["l1_slope"].as_f64().unwrap() - 1.0).abs() < 0.1);

    // a single σ gives columns only
    let o = run(&["counterexample", "--sigma", "0.25", "--out", "one"], t.path());
    assert_eq!(code(&o), 0);
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(t.path().join("one/counterexample.json")).unwrap()).unwrap();
    assert!(rep["fit"]["l1_slope"].is_null());

    // too coarse for the bump
    assert_eq!(code(&run(&["counterexample", "--sigma", "0.1", "--h", "0.1", "--out", "c"], t.path())), 2);
}

#[test]
fn h_sweep_converges_and_is_deterministic() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(
        t.path(),
        "c.json",
        &format!(
            r#"{{"domain": {DISK}, "source": {{"expr": "1"}}, "exact": "(1 - x^2 - y^2)/4",
                "sweep": {{"h": [0.03125, 0.015625, 0.0078125]}}}}"#
        ),
    );
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&run(&["sweep", "--config", c, "--out", "a", "--workers", "1"], t.path())), 0);
    assert_eq!(code(&run(&["sweep", "--config", c, "--out", "b", "--workers", "3"], t.path())), 0);
    let a = std::fs::read(t.path().join("a/sweep.csv")).unwrap();
    let b = std::fs::read(t.path().join("b/sweep.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let hs: Vec<f64> = csv_column(&text, "h").iter().map(|s| s.parse().unwrap()).collect();
    let errs: Vec<f64> = csv_column(&text, "max_err").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(hs, [0.03125, 0.015625, 0.0078125]);
    let order = (errs[0] / errs[2]).ln() / (hs[0] / hs[2]).ln();
    assert!(order >= 1.8, "{errs:?}");
}

#[test]
fn rectangle_family_asymmetry_grows_with_aspect() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(
        t.path(),
        "c.json",
        r#"{"source": {"expr": "1"}, "h": 0.0625, "sweep": {"rect_aspect": [1, 2, 4]}}"#,
    );
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", "r"], t.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(t.path().join("r/sweep.csv")).unwrap();
    let alpha: Vec<f64> = csv_column(&text, "alpha_omega").iter().map(|s| s.parse().unwrap()).collect();
    assert!(alpha.windows(2).all(|w| w[1] > w[0]), "{alpha:?}");
}

#[test]
fn sweep_rows_record_partial_failures() {
    let t = TempDir::new().unwrap();
    // the coarsest spacing leaves the small disk without cells
    let cfg = write_config(
        t.path(),
        "c.json",
        r#"{"domain": {"shape": "disk", "center": [0, 0], "radius": 0.2}, "source": {"expr": "1"},
            "sweep": {"h": [0.5, 0.05]}}"#,
    );
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", "p"], t.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(t.path().join("p/sweep.csv")).unwrap();
    assert_eq!(csv_column(&text, "status"), ["error", "pass"]);
    let widths: Vec<usize> = text.lines().map(|l| l.split(',').count()).collect();
    assert!(widths.iter().all(|&w| w == widths[0]), "{widths:?}");

    let cfg = write_config(
        t.path(),
        "all.json",
        r#"{"domain": {"shape": "disk", "center": [0, 0], "radius": 0.2}, "source": {"expr": "1"}, "sweep": {"h": [0.5]}}"#,
    );
    assert_eq!(code(&run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", "q"], t.path())), 1);

    let cfg = write_config(t.path(), "empty.json", r#"{"domain": {"shape": "disk", "center": [0, 0], "radius": 1}, "source": {"expr": "1"}, "sweep": {"h": []}}"#);
    assert_eq!(code(&run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", "e"], t.path())), 2);
}

#[test]
fn rearrange_dumps_a_decreasing_profile() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(
        t.path(),
        "c.json",
        &format!(r#"{{"domain": {SQUARE}, "source": {{"expr": "1 + x^2"}}, "h": 0.0625}}"#),
    );
    let o = run(&["rearrange", "--config", cfg.to_str().unwrap(), "--out", "r"], t.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(t.path().join("r/rearrange.csv")).unwrap();
    let v: Vec<f64> = csv_column(&text, "value").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(v.len(), 256);
    assert!(v.windows(2).all(|w| w[0] >= w[1]));
    let end: f64 = csv_column(&text, "s_end").last().unwrap().parse().unwrap();
    assert!((end - 1.0).abs() < 1e-12);
}

#[test]
fn gamma_flag_overrides_config() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "c.json", &basic(SQUARE, 0.0625));
    let o = run(&["audit", "--config", cfg.to_str().unwrap(), "--gamma-n", "7.5", "--out", "g"], t.path());
    assert!(code(&o) <= 1);
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(t.path().join("g/audit.json")).unwrap()).unwrap();
    assert_eq!(rep["constants"]["config"]["gamma_n"], 7.5);
    assert_eq!(code(&run(&["audit", "--config", cfg.to_str().unwrap(), "--gamma-n", "-1", "--out", "g"], t.path())), 2);
}
