//! End-to-end runs of the `matsl` binary: artifact layout, numeric content,
//! exit codes, and byte-level determinism across thread counts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CLASSICAL: &str = r#"{"N": 1, "alpha": 1.0, "a": 1.0, "potential": {"type": "zero"}}"#;

fn matsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matsl")).args(args).output().expect("binary runs")
}

fn write_problem(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("problem.json");
    fs::write(&path, json).expect("problem file written");
    path
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

/// Data rows of a CSV artifact with the `# config:` comment and the header
/// stripped; fields stay as strings so mixed-type columns parse per test.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    read(path)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn field(row: &[String], idx: usize) -> f64 {
    row[idx].parse::<f64>().unwrap_or_else(|e| panic!("numeric field {idx} in {row:?}: {e}"))
}

#[test]
fn classical_spectrum_lists_the_square_integers() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(dir.path(), CLASSICAL);
    let out_dir = dir.path().join("out");
    let out = matsl(&[
        "spectrum",
        "--problem",
        problem.to_str().unwrap(),
        "--count",
        "6",
        "--mesh",
        "256",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    for name in ["spectrum_shooting.csv", "spectrum_fd.csv", "spectrum_diff.csv"] {
        let text = read(&out_dir.join(name));
        assert!(
            text.starts_with("# config: {"),
            "{name} must open with the resolved configuration"
        );
        assert!(text.contains("\"command\":\"spectrum\""), "{name} names its command");
    }

    let rows = csv_rows(&out_dir.join("spectrum_shooting.csv"));
    assert_eq!(rows.len(), 6);
    for (k, row) in rows.iter().enumerate() {
        let expected = (k * k) as f64;
        assert!(
            (field(row, 1) - expected).abs() <= 1e-8 * expected.max(1.0),
            "eigenvalue {k}: got {}, want {expected}",
            row[1]
        );
        assert_eq!(row[2], "1", "classical eigenvalues are simple");
    }

    let report: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("spectrum.json"))).unwrap();
    assert_eq!(report["shared_indices"], 6);
    assert!(report["max_abs_difference"].as_f64().unwrap() < 1e-5);
    assert_eq!(report["config"]["problem"]["N"], 1);
}

#[test]
fn rejects_alpha_outside_the_unit_interval() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(
        dir.path(),
        r#"{"N": 1, "alpha": 1.5, "a": 1.0, "potential": {"type": "zero"}}"#,
    );
    let out = matsl(&["spectrum", "--problem", problem.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("alpha"), "stderr names the field: {}", stderr_of(&out));
}

#[test]
fn rejects_a_missing_problem_file() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let out = matsl(&["spectrum", "--problem", missing.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("cannot read"));
}

#[test]
fn rejects_unknown_problem_keys() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(
        dir.path(),
        r#"{"N": 1, "alpha": 1.0, "a": 1.0, "potential": {"type": "zero"}, "extra": 1}"#,
    );
    let out = matsl(&["spectrum", "--problem", problem.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("unknown"), "stderr: {}", stderr_of(&out));
}

#[test]
fn rejects_an_empty_s_grid() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(dir.path(), CLASSICAL);
    let out = matsl(&[
        "charfn",
        "--problem",
        problem.to_str().unwrap(),
        "--s-max",
        "0.05",
        "--s-step",
        "0.1",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("s-max"), "stderr: {}", stderr_of(&out));
}

#[test]
fn rejects_a_zero_eigenvalue_count() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(dir.path(), CLASSICAL);
    let out = matsl(&["spectrum", "--problem", problem.to_str().unwrap(), "--count", "0"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("count"), "stderr: {}", stderr_of(&out));
}

#[test]
fn rejects_zero_worker_threads() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(dir.path(), CLASSICAL);
    let out = matsl(&["spectrum", "--problem", problem.to_str().unwrap(), "--threads", "0"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("threads"), "stderr: {}", stderr_of(&out));
}

#[test]
fn charfn_log_sign_reconstruction_matches_the_closed_form() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(dir.path(), CLASSICAL);
    let out_dir = dir.path().join("out");
    let out = matsl(&[
        "charfn",
        "--problem",
        problem.to_str().unwrap(),
        "--s-max",
        "10",
        "--s-step",
        "0.25",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let rows = csv_rows(&out_dir.join("charfn.csv"));
    assert_eq!(rows.len(), 40);
    let mut checked = 0usize;
    for row in &rows {
        // Columns: lambda, s, log_abs_omega, sign, omega0_power_sum,
        // omega0_exact, G.
        let (log_mag, sign) = (field(row, 2), field(row, 3));
        let (power_sum, exact) = (field(row, 4), field(row, 5));
        assert!(
            (power_sum - exact).abs() <= 1e-12 * exact.abs().max(1e-300),
            "single-channel reference forms must coincide: {row:?}"
        );
        if exact.abs() > 1e-6 {
            let reconstructed = sign * log_mag.exp();
            assert!(
                (reconstructed - exact).abs() <= 1e-8 * exact.abs(),
                "sign·exp(log|ω|) = {reconstructed} vs closed form {exact} at s = {}",
                row[1]
            );
            checked += 1;
        }
    }
    assert!(checked >= 30, "only {checked} rows were off the zero set");
}

#[test]
fn charfn_sign_alternates_between_consecutive_zeros() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(dir.path(), CLASSICAL);
    let out_dir = dir.path().join("out");
    let out = matsl(&[
        "charfn",
        "--problem",
        problem.to_str().unwrap(),
        "--s-max",
        "9.5",
        "--s-step",
        "0.5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    // Zeros sit at integer s; midpoints s = k + 1/2 must alternate in sign.
    for row in csv_rows(&out_dir.join("charfn.csv")) {
        let s = field(row.as_slice(), 1);
        let k = (s - 0.5).round();
        if (s - 0.5 - k).abs() < 1e-12 {
            let expected = if (k as i64) % 2 == 0 { -1.0 } else { 1.0 };
            assert_eq!(
                field(row.as_slice(), 3),
                expected,
                "sign between zeros {k} and {} at s = {s}",
                k + 1.0
            );
        }
    }
}

#[test]
fn verify_zero_potential_reports_consistency() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(dir.path(), CLASSICAL);
    let out_dir = dir.path().join("out");
    let out = matsl(&[
        "verify",
        "--problem",
        problem.to_str().unwrap(),
        "--count",
        "12",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let report: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("verify.json"))).unwrap();
    assert_eq!(report["verdict"], "consistent-with-zero-potential");
    assert_eq!(report["diagnostics_pass"], true);
    assert_eq!(report["comparison"]["consistent"], true);
    assert!(report["comparison"]["trace_q1"].as_f64().unwrap().abs() <= 1e-12);
    assert!(report["comparison"]["trace_q2"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(report["hadamard"]["tail_check_pass"], true);
    for row in report["asymptotics"].as_array().unwrap() {
        assert_eq!(row["first_order_in_band"], true, "ratio off at κ = {}", row["kappa"]);
    }

    let txt = read(&out_dir.join("verify.txt"));
    assert!(txt.starts_with("# config: {"));
    assert!(txt.contains("verdict: consistent-with-zero-potential"));
}

#[test]
fn verify_flags_a_scaled_identity_shift() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(
        dir.path(),
        r#"{"N": 1, "alpha": 0.8, "a": 0.5,
            "potential": {"type": "builtin", "name": "scaled-identity", "params": {"c": 0.4}}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = matsl(&[
        "verify",
        "--problem",
        problem.to_str().unwrap(),
        "--count",
        "12",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let report: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("verify.json"))).unwrap();
    assert_eq!(report["verdict"], "distinct-from-zero-potential");
    // Half-interval average of tr[cI] integrates to c·π/4 per half.
    let expected_trace = 0.4 * std::f64::consts::FRAC_PI_4;
    for key in ["trace_q1", "trace_q2"] {
        let t = report["comparison"][key].as_f64().unwrap();
        assert!((t - expected_trace).abs() <= 1e-9, "{key} = {t}");
    }
    assert!(report["comparison"]["max_distance"].as_f64().unwrap() > 1e-3);
    // The spectral shift is a genuine potential effect, not a numerical
    // artifact: the first-order-corrected ratios must stay in band.
    assert_eq!(report["diagnostics_pass"], true);
}

#[test]
fn oracle_compare_succeeds_on_the_classical_problem() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(dir.path(), CLASSICAL);
    let out_dir = dir.path().join("out");
    let out = matsl(&[
        "oracle-compare",
        "--problem",
        problem.to_str().unwrap(),
        "--count",
        "6",
        "--mesh",
        "256",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("6/6"), "stdout: {stdout}");

    let rows = csv_rows(&out_dir.join("oracle_compare.csv"));
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert_eq!(row[5], "1", "index {} must agree within max(tol, band)", row[0]);
    }
}

#[test]
fn oracle_compare_exits_nonzero_when_the_mesh_cannot_track_high_modes() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(dir.path(), CLASSICAL);
    let out_dir = dir.path().join("out");
    // At 64 subintervals per half, λ ≈ 1156 has √λ·h ≈ 0.8: the second-order
    // stencil is far outside its asymptotic regime, the Richardson band
    // underestimates the true error, and the disagreement must surface as a
    // numeric failure rather than a silent pass.
    let out = matsl(&[
        "oracle-compare",
        "--problem",
        problem.to_str().unwrap(),
        "--count",
        "40",
        "--mesh",
        "64",
        "--tol",
        "1e-10",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(err.contains("methods disagree"), "stderr: {err}");
    assert!(err.contains("lambda"), "stderr names the region: {err}");

    // The artifact is still written, with the offending indices marked.
    let rows = csv_rows(&out_dir.join("oracle_compare.csv"));
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().any(|r| r[5] == "0"));
}

#[test]
fn outputs_are_byte_identical_across_reruns_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let problem = write_problem(
        dir.path(),
        r#"{"N": 2, "alpha": 0.8, "a": 0.5,
            "potential": {"type": "constant", "matrix": [0.6, 0.2, 0.2, -0.4]}}"#,
    );
    let run = |out_dir: &Path, threads: &str| {
        let out = matsl(&[
            "spectrum",
            "--problem",
            problem.to_str().unwrap(),
            "--count",
            "8",
            "--mesh",
            "128",
            "--threads",
            threads,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
        let out = matsl(&[
            "charfn",
            "--problem",
            problem.to_str().unwrap(),
            "--s-max",
            "6",
            "--s-step",
            "0.1",
            "--threads",
            threads,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    };
    let (d1, d2, d3) = (dir.path().join("t1"), dir.path().join("t2"), dir.path().join("t2_again"));
    run(&d1, "1");
    run(&d2, "2");
    run(&d3, "2");

    for name in
        ["spectrum_shooting.csv", "spectrum_fd.csv", "spectrum_diff.csv", "spectrum.json", "charfn.csv"]
    {
        let b1 = fs::read(d1.join(name)).unwrap();
        let b2 = fs::read(d2.join(name)).unwrap();
        let b3 = fs::read(d3.join(name)).unwrap();
        assert_eq!(b1, b2, "{name} differs between 1 and 2 worker threads");
        assert_eq!(b2, b3, "{name} differs between reruns");
    }
}

#[test]
fn shipped_problem_configurations_all_parse() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0usize;
    for entry in fs::read_dir(&configs).expect("configs directory is shipped") {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = read(&path);
            matsl_core::ProblemSpec::from_json_str(&text)
                .unwrap_or_else(|e| panic!("{} must parse: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4, "expected the shipped sample set, found {seen} files");
}
