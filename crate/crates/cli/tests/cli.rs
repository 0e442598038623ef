//! End-to-end runs of the `fracflow` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracflow::geometry::fixtures;
use fracflow::geometry::io::write_fixture;
use fracflow::FractionalOrder;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../golden")
}

fn fracflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracflow"))
        .args(args)
        .env_remove("FRACFLOW_OUTPUT_DIR")
        .env_remove("FRACFLOW_GOLDEN_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn run_scenario(scenario: &Path, out: &Path) -> Output {
    fracflow(&["run", scenario.to_str().unwrap(), "--output-dir", out.to_str().unwrap()])
}

#[test]
fn verify_all_passes_on_shipped_golden_files() {
    let o = fracflow(&["verify", "all", "--golden-dir", golden_dir().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("0 failed"));
    for group in ["hierarchy.", "geometry.", "klein."] {
        assert!(text.lines().any(|l| l.contains(group)), "{group} missing");
    }
}

#[test]
fn verify_detects_every_golden_perturbation() {
    let original = std::fs::read_to_string(golden_dir().join("hierarchy_h.txt")).unwrap();
    let perturbations: Vec<(&str, Box<dyn Fn(&str) -> Option<String>>)> = vec![
        ("coefficient", Box::new(|s: &str| Some(s.replacen("3/2*<v0,v0>*v1", "3/4*<v0,v0>*v1", 1)))),
        ("sign", Box::new(|s: &str| Some(s.replacen("-1/2*<v1,v1>", "1/2*<v1,v1>", 1)))),
        ("dropped line", Box::new(|s: &str| Some(s.lines().filter(|l| !l.starts_with("covector = v2")).map(|l| format!("{l}\n")).collect()))),
        ("trailing space", Box::new(|s: &str| Some(s.replacen("flow = v1\n", "flow = v1 \n", 1)))),
        ("truncated", Box::new(|s: &str| Some(s[..s.len() / 2].to_string()))),
        ("appended", Box::new(|s: &str| Some(format!("{s}\n[level 5]\n")))),
        ("missing file", Box::new(|_: &str| None)),
    ];
    for (name, perturb) in perturbations {
        let dir = tempfile::tempdir().unwrap();
        std::fs::copy(golden_dir().join("hierarchy_v.txt"), dir.path().join("hierarchy_v.txt")).unwrap();
        if let Some(text) = perturb(&original) {
            assert_ne!(text, original, "{name}: perturbation did nothing");
            write(dir.path(), "hierarchy_h.txt", &text);
        }
        let o = fracflow(&["verify", "hierarchy", "--golden-dir", dir.path().to_str().unwrap()]);
        assert_eq!(code(&o), 1, "{name}: {}", stdout(&o));
        let fail: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("FAIL")).map(String::from).collect();
        assert_eq!(fail.len(), 1, "{name}: {fail:?}");
        assert!(fail[0].contains("hierarchy.h.golden"), "{name}: {fail:?}");
        if name != "missing file" {
            assert!(fail[0].contains("mismatch at line"), "{name}: {fail:?}");
        }
    }
}

#[test]
fn verify_kind_filters_checks() {
    let o = fracflow(&["verify", "klein"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|l| l.contains(" klein.")), "{checks:?}");
}

#[test]
fn hierarchy_scenario_matches_shipped_golden_text() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "h.toml", "schema_version = 1\nkind = \"hierarchy\"\n[hierarchy]\nlevels = 2\n");
    let out = dir.path().join("out");
    let o = run_scenario(&s, &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["hierarchy_h.txt", "hierarchy_v.txt"] {
        let emitted = std::fs::read_to_string(out.join(f)).unwrap();
        let shipped = std::fs::read_to_string(golden_dir().join(f)).unwrap();
        assert!(shipped.starts_with(&emitted), "{f} is not a prefix of the golden file");
        assert!(emitted.contains("[level 2]") && !emitted.contains("[level 3]"));
    }
    assert!(out.join("scalar_h.txt").exists());
    let m = manifest(&out);
    assert_eq!(m["kind"], "hierarchy");
    assert_eq!(m["library_version"], fracflow::VERSION);
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 4);
}

#[test]
fn hierarchy_subcommand_prints_text() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracflow(&["hierarchy", "--levels", "1", "--sector", "v", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("flow = w3 + 3/2*<w0,w0>*w1"));
    assert!(!dir.path().join("hierarchy_h.txt").exists());
}

const ZERO_FLOW: &str = r#"
schema_version = 1
kind = "flow"
[output]
record_every = 10
[solver]
flow_level = 1
node_count = 64
domain_length = 6.283185307179586
dt = 5e-5
t_end = 0.002
[profile]
kind = "zero"
"#;

#[test]
fn zero_initial_data_gives_zero_frames() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "zero.toml", ZERO_FLOW);
    let out = dir.path().join("out");
    assert_eq!(code(&run_scenario(&s, &out)), 0);
    let frames = std::fs::read_to_string(out.join("frames.csv")).unwrap();
    let mut lines = frames.lines();
    assert_eq!(lines.next(), Some("tau,node,l,v0"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64 * 5);
    assert!(rows.iter().all(|r| r.rsplit(',').next() == Some("0")));
    assert!(out.join("conserved.csv").exists());
}

#[test]
fn flat_geometry_scenario_reports_zero_curvature() {
    let dir = tempfile::tempdir().unwrap();
    for alpha in ["1.0", "0.6"] {
        let s = write(
            dir.path(),
            "flat.toml",
            &format!("schema_version = 1\nkind = \"geometry\"\nalpha = {alpha}\n[geometry]\nfixture = \"flat\"\n"),
        );
        let out = dir.path().join(format!("out{alpha}"));
        assert_eq!(code(&run_scenario(&s, &out)), 0);
        let sum = &manifest(&out)["summary"];
        for key in ["torsion_h_max", "torsion_v_max", "torsion_mixed_max", "riemann_max", "einstein_max"] {
            assert!(sum[key].as_f64().unwrap() <= 1e-8, "{key} = {}", sum[key]);
        }
        let table = std::fs::read_to_string(out.join("curvature.txt")).unwrap();
        assert!(table.lines().any(|l| l.starts_with("x1 x2 y1 y2 hR vR sR")));
    }
}

#[test]
fn geometry_subcommand_reads_fixture_files() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures::twisted(FractionalOrder::new(0.7).unwrap()).unwrap();
    let path = write(dir.path(), "twisted.txt", &write_fixture(&fx));
    let out = dir.path().join("out");
    let run = |alpha: &str| {
        fracflow(&[
            "geometry",
            "--fixture",
            path.to_str().unwrap(),
            "--alpha",
            alpha,
            "--output-dir",
            out.to_str().unwrap(),
        ])
    };
    let o = run("0.7");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sum = &manifest(&out)["summary"];
    assert!(sum["torsion_h_max"].as_f64().unwrap() <= 1e-8);
    assert!(sum["torsion_mixed_max"].as_f64().unwrap() > 0.1);
    // The file's own order disagrees with the requested one.
    assert_eq!(code(&run("1.0")), 2);
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = |name: &str, text: String| write(dir.path(), name, &text);
    // Schema violations: 2.
    for (name, text) in [
        ("unknown.toml", ZERO_FLOW.replace("kind = \"flow\"", "kind = \"flow\"\ncolour = 1")),
        ("version.toml", ZERO_FLOW.replace("schema_version = 1", "schema_version = 9")),
        ("cfl.toml", ZERO_FLOW.replace("dt = 5e-5", "dt = 1e-3")),
        ("syntax.toml", "schema_version = = 1".to_string()),
    ] {
        assert_eq!(code(&run_scenario(&bad(name, text), &out)), 2, "{name}");
    }
    // Numeric failure: 3 (the frame-norm guard at zero tolerance).
    let kink = r#"
schema_version = 1
kind = "flow"
[solver]
flow_level = -1
node_count = 400
domain_length = 40.0
dt = 1e-2
t_end = 0.1
drift_tol = 1e-300
[profile]
kind = "kink"
center = 20.0
"#;
    let o = run_scenario(&bad("drift.toml", kink.to_string()), &out);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    // I/O failures: 4.
    assert_eq!(code(&run_scenario(&dir.path().join("missing.toml"), &out)), 4);
    let blocker = write(dir.path(), "file", "");
    let s = bad("ok.toml", ZERO_FLOW.to_string());
    assert_eq!(code(&run_scenario(&s, &blocker.join("sub"))), 4);
    // Usage errors from the argument parser: 2.
    assert_eq!(code(&fracflow(&["verify", "everything"])), 2);
}

#[test]
fn outputs_are_reproducible_across_runs_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let base = r#"
schema_version = 1
kind = "flow"
seed = 5
[output]
record_every = 20
[solver]
flow_level = 1
curvature_const = 0.0
node_count = 128
domain_length = 25.132741228718345
component_count = 2
dt = 5e-4
t_end = 0.1
exec = "MODE"
[profile]
kind = "gaussian"
amplitude = 0.8
width = 2.0
center = 12.0
"#;
    let mut frames = Vec::new();
    let mut hashes = Vec::new();
    for (i, mode) in ["sequential", "sequential", "parallel"].iter().enumerate() {
        let s = write(dir.path(), &format!("s{i}.toml"), &base.replace("MODE", mode));
        let out = dir.path().join(format!("out{i}"));
        assert_eq!(code(&run_scenario(&s, &out)), 0);
        frames.push(std::fs::read(out.join("frames.csv")).unwrap());
        hashes.push(manifest(&out)["config_hash"].as_str().unwrap().to_string());
    }
    assert_eq!(frames[0], frames[1]);
    assert_eq!(frames[0], frames[2]);
    assert_eq!(hashes[0], hashes[1]);
    assert_ne!(hashes[0], hashes[2], "the execution mode is part of the configuration");
}

#[test]
fn environment_overrides_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "zero.toml", &ZERO_FLOW.replace("record_every = 10", "record_every = 10\ndir = \"from-file\""));
    let env_dir = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_fracflow"))
        .args(["run", s.to_str().unwrap()])
        .env("FRACFLOW_OUTPUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(env_dir.join("manifest.json").exists());
    assert!(!dir.path().join("from-file").exists());
    // Without the override the scenario's own directory is used.
    assert_eq!(code(&fracflow(&["run", s.to_str().unwrap()])), 0);
    assert!(dir.path().join("from-file/frames.csv").exists());
}

#[test]
fn flow_subcommand_runs_a_short_soliton() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracflow(&[
        "flow",
        "--profile",
        "soliton",
        "--alpha",
        "1",
        "--t-end",
        "0.05",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sum = &manifest(dir.path())["summary"];
    assert!(sum["conserved"]["relative_drift"][1].as_f64().unwrap() < 1e-8);
    assert!((sum["final_tau"].as_f64().unwrap() - 0.05).abs() < 1e-12);
}

#[test]
fn klein_scenario_writes_residual_table() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "k.toml", "schema_version = 1\nkind = \"klein-check\"\nseed = 1\n[klein]\ndims = [2, 5]\nsamples = 20\n");
    let out = dir.path().join("out");
    assert_eq!(code(&run_scenario(&s, &out)), 0);
    let csv = std::fs::read_to_string(out.join("klein.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 6);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    // An impossible tolerance turns the same run into a failure.
    let s = write(dir.path(), "k.toml", "schema_version = 1\nkind = \"klein-check\"\n[klein]\ndims = [5]\ntolerance = 1e-300\n");
    assert_eq!(code(&run_scenario(&s, &out)), 1);
}
