use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ltpmor"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Four-state chain with `N = 0`.
fn lti_chain() -> Value {
    json!({
        "n": 4, "m": 1, "p": 1,
        "A": {"re": [[-1.0, 0.5, 0.0, 0.0], [0.0, -2.0, 0.3, 0.0], [0.0, 0.0, -3.0, 0.2], [0.0, 0.0, 0.0, -4.0]]},
        "B": {"re": [[1.0], [0.5], [0.25], [1.0]]},
        "C": {"re": [[1.0, -0.5, 0.3, 0.7]]}
    })
}

/// `x' = -x + cos(t) u`, `y = x`: `b_{+-1} = 1/2`.
fn cosine_input(q_im: f64) -> Value {
    json!({
        "omega0": 1.0, "n": 1, "N": 1,
        "Q": {"re": [[-1.0]], "im": [[q_im]]},
        "b_coeffs": [{"k": -1, "re": [0.5]}, {"k": 0, "re": [0.0]}, {"k": 1, "re": [0.5]}],
        "c_coeffs": [{"k": -1, "re": [0.0]}, {"k": 0, "re": [1.0]}, {"k": 1, "re": [0.0]}]
    })
}

fn small_ltp() -> Value {
    json!({
        "omega0": 3.0, "n": 3, "N": 1,
        "Q": {"re": [[-1.0, 0.4, 0.0], [-0.4, -1.0, 0.2], [0.0, 0.0, -2.5]]},
        "b_coeffs": [
            {"k": -1, "re": [0.2, 0.1, 0.0], "im": [0.1, 0.0, -0.3]},
            {"k": 0, "re": [1.0, 0.5, 0.7]},
            {"k": 1, "re": [0.2, 0.1, 0.0], "im": [-0.1, 0.0, 0.3]}
        ],
        "c_coeffs": [
            {"k": -1, "re": [0.3, 0.0, 0.1]},
            {"k": 0, "re": [1.0, -0.2, 0.4]},
            {"k": 1, "re": [0.3, 0.0, 0.1]}
        ]
    })
}

fn error_category(out: &Output) -> String {
    let err: Value = serde_json::from_slice(&out.stderr).expect("machine-readable error");
    err["error"]["category"].as_str().unwrap().to_string()
}

#[test]
fn reduce_order_zero_bound_equals_mimo_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "sys.json", &lti_chain());
    let report = dir.path().join("report.json");
    let out = run(&["reduce", "--input", input.to_str().unwrap(), "--order", "2", "--method", "irka", "--output", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["N"], 0);
    assert_eq!(rep["r"], 2);
    assert_eq!(rep["method"], "irka");
    assert_eq!(rep["bound"], rep["mimo_error"]);
    assert!(rep["irka"]["iterations"].as_u64().unwrap() >= 1);
    let reduced: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.reduced.json")).unwrap()).unwrap();
    assert_eq!(reduced["n"], 2);
}

#[test]
fn reduce_rejects_order_at_least_n() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "sys.json", &lti_chain());
    let out = run(&["reduce", "--input", input.to_str().unwrap(), "-r", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_category(&out), "usage");
}

#[test]
fn missing_file_is_io_error() {
    let out = run(&["h2norm", "--input", "/nonexistent/sys.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_category(&out), "io");
}

#[test]
fn malformed_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\"omega0\": 1.0}").unwrap();
    let out = run(&["h2norm", "--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_method_is_usage_error() {
    let out = run(&["reduce", "--input", "x.json", "-r", "2", "--method", "hankel"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn h2norm_of_lti_file_matches_gramian() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "lag.json", &json!({"n": 1, "m": 1, "p": 1, "A": {"re": [[-1.0]]}, "B": {"re": [[1.0]]}, "C": {"re": [[1.0]]}}));
    let rep = stdout_json(&run(&["h2norm", "--input", input.to_str().unwrap()]));
    assert_eq!(rep["kind"], "lti");
    assert!((rep["value"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn h2norm_paths_agree_on_demo_system() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ltp.json", &small_ltp());
    let rep = stdout_json(&run(&["h2norm", "--input", input.to_str().unwrap()]));
    for path in ["subsystem_sum", "zhou_hagiwara", "pole_residue"] {
        assert_eq!(rep["paths"][path]["status"], "ok", "{path}");
    }
    for (pair, d) in rep["discrepancies"].as_object().unwrap() {
        assert!(d.as_f64().unwrap() <= 1e-5, "{pair}: {d}");
    }
    assert!(!rep["paths"]["zhou_hagiwara"]["trace"].as_array().unwrap().is_empty());
}

#[test]
fn h2norm_refuses_pole_residue_without_spectral_gap() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "gap.json", &cosine_input(1.5));
    let rep = stdout_json(&run(&["h2norm", "--input", input.to_str().unwrap()]));
    assert_eq!(rep["paths"]["pole_residue"]["status"], "refused: spectral gap");
    assert_eq!(rep["paths"]["subsystem_sum"]["status"], "ok");
    assert_eq!(rep["paths"]["zhou_hagiwara"]["status"], "ok");
}

#[test]
fn simulate_zero_input_gives_zero_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ltp.json", &cosine_input(0.0));
    let signal = dir.path().join("u.csv");
    let mut text = String::from("time,u\n");
    for i in 0..=100 {
        text.push_str(&format!("{},0\n", i as f64 * 0.1));
    }
    fs::write(&signal, text).unwrap();
    let csv = dir.path().join("trace.csv");
    let spec = format!("file:{}", signal.display());
    let out = run(&["simulate", "--input", input.to_str().unwrap(), "--signal", &spec, "--dt", "0.1", "--tfinal", "10", "--output", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,u,y"));
    let ys: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(ys.len(), 101);
    assert!(ys.iter().all(|&y| y == 0.0));
}

#[test]
fn simulate_with_reference_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ltp.json", &small_ltp());
    let out = run(&["simulate", "--input", input.to_str().unwrap(), "--reference", input.to_str().unwrap(), "--signal", "sine:2", "--dt", "0.01", "--tfinal", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("time,u,y,y_ref,abs_err\n"));
    for line in text.lines().skip(1) {
        let err: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(err, 0.0);
    }
}

#[test]
fn reports_are_byte_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ltp.json", &small_ltp());
    let mut reports = Vec::new();
    for jobs in ["1", "3"] {
        let out = bin()
            .args(["reduce", "--input", input.to_str().unwrap(), "-r", "2", "--seed", "7"])
            .env("LTPMOR_JOBS", jobs)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        reports.push(out.stdout);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn bound_matches_reduce_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ltp.json", &small_ltp());
    let report = dir.path().join("rep.json");
    let reduced = dir.path().join("red.json");
    let out = run(&["reduce", "--input", input.to_str().unwrap(), "-r", "2", "--method", "bt", "--output", report.to_str().unwrap(), "--reduced", reduced.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(rep["irka"].is_null());
    let b = stdout_json(&run(&["bound", "--input", input.to_str().unwrap(), "--reduced", reduced.to_str().unwrap()]));
    assert!(b["fourier_truncation"].is_null());
    let (mb, mr) = (b["mimo_error"].as_f64().unwrap(), rep["mimo_error"].as_f64().unwrap());
    assert!((mb - mr).abs() <= 1e-8 * mr, "{mb} vs {mr}");
    assert!(rep["ltp_error"].as_f64().unwrap() <= rep["bound"].as_f64().unwrap());
}

#[test]
fn bench_heat_rows_and_ordering() {
    let out = run(&["bench", "heat", "--n", "30", "--grid", "16", "--rmin", "4", "--rmax", "8", "--methods", "irka,pod"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,method,mimo_error,ltp_error,bound,wall_time_s"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 6);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][1], "irka");
        assert_eq!(pair[1][1], "pod");
        let e = |row: &Vec<String>| row[3].parse::<f64>().unwrap();
        assert!(e(&pair[0]) < e(&pair[1]));
    }
}

#[test]
fn floquet_command_produces_ltp_file() {
    let dir = tempfile::tempdir().unwrap();
    let grid = 16;
    let period = 2.0;
    let samples: Vec<Value> = (0..grid)
        .map(|i| {
            let t = period * i as f64 / grid as f64;
            json!([[-1.0 + 0.3 * (std::f64::consts::PI * t).cos(), 0.2], [0.0, -2.0]])
        })
        .collect();
    let input = write(
        dir.path(),
        "periodic.json",
        &json!({"T": period, "grid": grid, "A_samples": samples, "b_samples": vec![json!([1.0, 1.0]); grid], "c_samples": vec![json!([1.0, 0.0]); grid]}),
    );
    let out_path = dir.path().join("ff.json");
    let out = run(&["floquet", "--input", input.to_str().unwrap(), "-N", "4", "--output", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ff: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(ff["N"], 4);
    assert!((ff["omega0"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-15);
    assert_eq!(ff["b_coeffs"].as_array().unwrap().len(), 9);
    let norm = stdout_json(&run(&["h2norm", "--input", out_path.to_str().unwrap()]));
    assert_eq!(norm["paths"]["zhou_hagiwara"]["status"], "ok");
}
