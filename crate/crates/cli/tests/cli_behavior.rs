//! End-to-end behavior of the binary: exit codes, artifact shapes, and
//! report merging.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn betamix(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betamix"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(format!("{name}.scn"));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn seq_validate_rejects_slow_growth_citing_the_condition() {
    let tmp = tempfile::tempdir().unwrap();
    let out = betamix(&["seq", "validate", "--sequence", "explicit:2,3"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("quadratic-sum growth condition"),
        "stderr: {stderr}"
    );
}

#[test]
fn seq_validate_accepts_delta_rules_with_late_growth() {
    let tmp = tempfile::tempdir().unwrap();
    let out = betamix(
        &["seq", "validate", "--sequence", "delta:0.25", "--levels", "3"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("hold from level 2"), "stderr: {stderr}");
}

#[test]
fn seq_build_reports_capacity_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = betamix(
        &["seq", "build", "--sequence", "delta:0.1", "--levels", "6"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("level 4"), "stderr: {stderr}");
}

#[test]
fn verify_writes_summary_and_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write_scenario(
        tmp.path(),
        "quick-nontight",
        "name = quick-nontight\nsuite = nontight\nsequence = explicit:2,64,65600\n\
         truncation = 3\nseed = 5\nmode = level\nfocus_level = 2\nthreshold = 1\ntrials = 200\n",
    );
    let out = betamix(
        &[
            "verify",
            "nontight",
            "--scenario",
            sc.to_str().unwrap(),
            "--out",
            tmp.path().join("out").to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let dir = tmp.path().join("out/quick-nontight");
    assert!(dir.join("summary.json").exists());
    assert!(dir.join("nontight.csv").exists());
    let csv = std::fs::read_to_string(dir.join("nontight.csv")).unwrap();
    assert!(csv.starts_with("mode,level,scale,threshold,trials,estimate"));
}

#[test]
fn verify_uses_the_scenario_suite_by_default() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write_scenario(
        tmp.path(),
        "quick-div",
        "name = quick-div\nsuite = divergence\nsequence = explicit:2,64\n\
         truncation = 2\nseed = 5\n",
    );
    let out = betamix(
        &[
            "verify",
            "--scenario",
            sc.to_str().unwrap(),
            "--out",
            tmp.path().join("out").to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    assert!(tmp.path().join("out/quick-div/divergence.csv").exists());
}

#[test]
fn malformed_scenarios_exit_with_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write_scenario(tmp.path(), "broken", "name = broken\nnot a pair\n");
    let out = betamix(
        &["verify", "all", "--scenario", sc.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn scenario_with_bad_sequence_fails_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write_scenario(
        tmp.path(),
        "badseq",
        "name = badseq\nsuite = divergence\nsequence = explicit:2,3\nseed = 1\n",
    );
    let out = betamix(
        &["verify", "divergence", "--scenario", sc.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("quadratic-sum growth condition"),
        "stderr: {stderr}"
    );
}

#[test]
fn simulate_writes_path_and_functional_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write_scenario(
        tmp.path(),
        "quick-sim",
        "name = quick-sim\nsequence = explicit:2,64\ntruncation = 2\nseed = 9\n\
         n_lo = 1\nn_hi = 64\nfocus_level = 2\npaths = 2\nt_points = 8\ndump_fields = true\n",
    );
    let out = betamix(
        &[
            "simulate",
            "--scenario",
            sc.to_str().unwrap(),
            "--out",
            tmp.path().join("sim").to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let dir = tmp.path().join("sim/quick-sim");
    for name in [
        "path-0.csv",
        "path-1.csv",
        "functional-0.csv",
        "fields-0.csv",
    ] {
        assert!(dir.join(name).exists(), "missing {name}");
    }
    let path_csv = std::fs::read_to_string(dir.join("path-0.csv")).unwrap();
    assert!(path_csv.starts_with("N,S_h,S_m,S_Y\n"));
    assert_eq!(path_csv.lines().count(), 65);
    let func = std::fs::read_to_string(dir.join("functional-0.csv")).unwrap();
    assert!(func.starts_with("t,polygonal,step\n"));
    assert_eq!(func.lines().count(), 10);
    let fields = std::fs::read_to_string(dir.join("fields-0.csv")).unwrap();
    assert!(fields.starts_with("level,index,value\n"));
}

#[test]
fn report_merges_and_groups_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    for (file, name) in [
        ("moments-grid.scn", "moments-grid"),
        ("divergence-k3.scn", "divergence-k3"),
    ] {
        let out = betamix(
            &[
                "verify",
                "--scenario",
                scenario_dir().join(file).to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
            ],
            tmp.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{name}: {:?}", out);
    }
    let report_base = tmp.path().join("combined");
    let out = betamix(
        &[
            "report",
            out_dir.join("moments-grid/summary.json").to_str().unwrap(),
            out_dir.join("divergence-k3/summary.json").to_str().unwrap(),
            "--out",
            report_base.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let md = std::fs::read_to_string(report_base.with_extension("md")).unwrap();
    assert!(md.contains("## Moment bounds hold at every order"));
    assert!(md.contains("## Transfer-function mass does not decay across levels"));
    assert!(md.contains("| moments-grid |"));

    // identity merge: a single summary reformats to the same content
    let single_base = tmp.path().join("single");
    let out = betamix(
        &[
            "report",
            out_dir.join("moments-grid/summary.json").to_str().unwrap(),
            "--out",
            single_base.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let combined: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(single_base.with_extension("json")).unwrap())
            .unwrap();
    let original: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("moments-grid/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(combined["scenarios"][0], original);

    // rerunning the report is byte-identical
    let again_base = tmp.path().join("again");
    betamix(
        &[
            "report",
            out_dir.join("moments-grid/summary.json").to_str().unwrap(),
            "--out",
            again_base.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(
        std::fs::read(single_base.with_extension("json")).unwrap(),
        std::fs::read(again_base.with_extension("json")).unwrap()
    );
    assert_eq!(
        std::fs::read(single_base.with_extension("md")).unwrap(),
        std::fs::read(again_base.with_extension("md")).unwrap()
    );
}
