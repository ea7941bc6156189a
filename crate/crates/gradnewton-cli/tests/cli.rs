//! End-to-end tests of the binary: exit codes, file outputs, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradnewton"))
}

fn meshes() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../meshes")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gradnewton-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_quadratic_exits_zero_with_outputs() {
    let dir = tmpdir("solve");
    let trace = dir.join("trace.csv");
    let summary = dir.join("summary.json");
    let out = bin()
        .args([
            "solve",
            "--problem",
            "quadratic-diag",
            "--variant",
            "energy-free",
        ])
        .arg("--trace-out")
        .arg(&trace)
        .arg("--summary-out")
        .arg(&summary)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("converged"));

    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("k,grad_norm,lambda_sq,step,halvings,exit_condition,energy"));
    assert_eq!(csv.lines().count(), 2); // header + single iteration

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(json["status"], "converged");
    assert_eq!(json["counters"]["energy_evals"], 0);
    assert_eq!(json["diagnostics"]["L"], 0.0);
    assert!(json["diagnostics"]["m"].as_f64().unwrap() > 0.0);
    assert!(json["diagnostics"]["k0"].is_number());
    assert!(json["diagnostics"]["violations"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn solve_cubic_sign_only_shows_persistent_half_steps() {
    let dir = tmpdir("cubic");
    let trace = dir.join("trace.csv");
    let out = bin()
        .args([
            "solve",
            "--problem",
            "cubic-0.1",
            "--x0",
            "-0.5",
            "--variant",
            "energy-free-no-first-cond",
        ])
        .arg("--trace-out")
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&trace).unwrap();
    let steps: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert!(steps.len() > 20);
    assert!(steps.iter().all(|s| *s == "0.5"));
}

#[test]
fn solve_mesh_with_uniform_curvature() {
    let out = bin()
        .args([
            "solve",
            "--variant",
            "energy-free",
            "--curvature",
            "uniform",
        ])
        .arg("--mesh")
        .arg(meshes().join("tet.obj"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("converged after 0 iterations"), "{text}");
    assert!(text.contains("energy 0 /"));
}

#[test]
fn solve_mesh_with_perturbed_curvature_and_seed() {
    let out = bin()
        .args([
            "solve",
            "--curvature",
            "perturbed:0.2",
            "--seed",
            "3",
            "--epsilon",
            "1e-10",
        ])
        .arg("--mesh")
        .arg(meshes().join("icosahedron.obj"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("max angle-sum deviation"));
}

#[test]
fn exit_codes_follow_contract() {
    // 2: iteration budget exhausted
    let out = bin()
        .args([
            "solve",
            "--problem",
            "cubic-0.1",
            "--x0",
            "-0.5",
            "--variant",
            "energy-free-no-first-cond",
            "--max-iter",
            "3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // 5: start outside the oracle domain
    let out = bin()
        .args(["solve", "--problem", "cubic-0.1", "--x0", "-5.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));

    // 64: usage errors
    let out = bin().args(["solve"]).output().unwrap();
    assert_eq!(out.status.code(), Some(64));
    let out = bin()
        .args(["solve", "--problem", "no-such-fixture"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(64));
    let out = bin()
        .args(["solve", "--problem", "quadratic-diag", "--alpha", "0.7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(64));

    // armijo needs an energy-bearing oracle
    let out = bin()
        .args(["solve", "--variant", "armijo", "--curvature", "uniform"])
        .arg("--mesh")
        .arg(meshes().join("tet.obj"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn identical_runs_produce_bit_identical_files() {
    let dir = tmpdir("determinism");
    let run = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let trace = dir.join(format!("trace-{tag}.csv"));
        let summary = dir.join(format!("summary-{tag}.json"));
        let out = bin()
            .args([
                "solve",
                "--problem",
                "logsumexp-std",
                "--seed",
                "42",
                "--x0",
                "1.5,1.5,1.5,1.5,1.5,1.5,1.5,1.5,1.5,1.5",
            ])
            .arg("--trace-out")
            .arg(&trace)
            .arg("--summary-out")
            .arg(&summary)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        (
            std::fs::read(&trace).unwrap(),
            std::fs::read(&summary).unwrap(),
        )
    };
    let (t1, s1) = run("a");
    let (t2, s2) = run("b");
    assert_eq!(t1, t2, "trace files differ between identical runs");
    assert_eq!(s1, s2, "summary files differ between identical runs");
}

#[test]
fn trace_round_trips_through_the_library_parser() {
    let dir = tmpdir("roundtrip");
    let trace = dir.join("trace.csv");
    let out = bin()
        .args(["solve", "--problem", "logsumexp-2"])
        .arg("--trace-out")
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    let parsed = gradnewton::trace::parse_csv(&text).unwrap();
    assert!(!parsed.is_empty());
    assert_eq!(gradnewton::trace::write_csv(&parsed), text);
}

#[test]
fn compare_shows_energy_free_contrast() {
    let dir = tmpdir("compare");
    let csv_path = dir.join("compare.csv");
    let out = bin()
        .args(["compare", "--problem", "cubic-0.1", "--x0", "-0.5"])
        .arg("--trace-out")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("energy-free"));
    assert!(text.contains("armijo"));

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("variant,status,iterations,energy_evals"));
    let mut rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    rows.sort_by_key(|r| r[0].to_string());
    for row in &rows {
        assert_eq!(row[1], "converged");
        if row[0].starts_with("energy-free") {
            assert_eq!(row[3], "0", "energy-free variant evaluated energy");
        } else {
            assert_ne!(row[3], "0", "armijo should evaluate energy");
        }
    }
    // sign-only takes more iterations than the first-condition search
    let iters = |name: &str| -> usize {
        rows.iter().find(|r| r[0] == name).unwrap()[2]
            .parse()
            .unwrap()
    };
    assert!(iters("energy-free-no-first-cond") > iters("energy-free"));
}

#[test]
fn validate_passes_on_good_problems_and_fails_on_infeasible_targets() {
    let out = bin()
        .args(["validate", "--problem", "logsumexp-std"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS gradient vs energy finite differences"));
    assert!(text.contains("PASS hessian vs gradient finite differences"));
    assert!(!text.contains("FAIL"));

    let out = bin()
        .args(["validate", "--curvature", "uniform"])
        .arg("--mesh")
        .arg(meshes().join("tet.obj"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("PASS Gauss-Bonnet feasibility"));

    // infeasible curvature file: Gauss-Bonnet check fails, nonzero exit
    let dir = tmpdir("validate");
    let bad = dir.join("bad-curvature.txt");
    let theta = std::f64::consts::PI + 0.1;
    std::fs::write(&bad, format!("{theta}\n{theta}\n{theta}\n{theta}\n")).unwrap();
    let out = bin()
        .args(["validate"])
        .arg("--mesh")
        .arg(meshes().join("tet.obj"))
        .arg("--curvature")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL Gauss-Bonnet feasibility"));
}

#[test]
fn demo_counterexample_contrasts_the_two_searches() {
    let out = bin()
        .args([
            "demo-counterexample",
            "--eps",
            "0.1",
            "--x0",
            "-0.5",
            "--alpha",
            "0.1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("t = 1 from here"));
    // the sign-only column shows the persistent half step and a ratio
    // settling at 0.5
    assert!(text.contains("0.5000"));

    // very close to the minimum the full step is still rejected
    let out = bin()
        .args(["demo-counterexample", "--eps", "0.1", "--x0", "-0.001"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let first_sign_row = text
        .lines()
        .find(|l| l.trim_start().starts_with("0 |"))
        .unwrap();
    let sign_columns = first_sign_row.split('|').nth(1).unwrap().trim_start();
    assert!(
        sign_columns.starts_with("0.5"),
        "expected a rejected full step at k=0: {first_sign_row}"
    );

    // positive start warns but proceeds
    let out = bin()
        .args(["demo-counterexample", "--x0", "0.4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn lenmesh_input_is_accepted() {
    let dir = tmpdir("lenmesh");
    let path = dir.join("tet.lenmesh");
    // regular tetrahedron given as pure connectivity + lengths
    let l = (8.0_f64).sqrt();
    let mut text = String::from("lenmesh 4 4\n");
    for f in [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]] {
        text.push_str(&format!("{} {} {} {l} {l} {l}\n", f[0], f[1], f[2]));
    }
    std::fs::write(&path, text).unwrap();
    let out = bin()
        .args(["solve", "--curvature", "uniform"])
        .arg("--mesh")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("converged after 0 iterations"));
}

#[test]
fn env_var_enables_iteration_logging() {
    let out = bin()
        .args(["solve", "--problem", "cubic-0.1", "--x0", "-0.5"])
        .env("GRADNEWTON_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let err = stderr(&out);
    assert!(err.contains("iter"), "no iteration log on stderr: {err}");
    assert!(err.contains("lambda^2"));

    let out = bin()
        .args(["solve", "--problem", "cubic-0.1", "--x0", "-0.5"])
        .env_remove("GRADNEWTON_LOG")
        .output()
        .unwrap();
    assert!(!stderr(&out).contains("iter"));
}

#[test]
fn quad_face_mesh_is_a_parse_error() {
    let dir = tmpdir("quadface");
    let path = dir.join("quad.obj");
    std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
    let out = bin()
        .args(["solve", "--curvature", "uniform"])
        .arg("--mesh")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("triangles"));
}
