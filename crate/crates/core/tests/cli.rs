use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn distexplore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distexplore"))
        .args(args)
        .output()
        .expect("spawn distexplore")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_CUBE: &str = r#"
[environment]
kind = "cube"
cubes = 2
width = 4
breadth = 4
depth = 2

[agent.bonusmax]
kind = "bonusmax"
alpha = 0.3
gamma = 0.99

[run]
episodes = 40
horizon = 30
trials = 2
base_seed = 3

[report]
target = "cubeAtLeast(1)"
"#;

#[test]
fn validate_reports_missing_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[environment]\nkind = \"cube\"\n[agent.r]\nkind = \"random\"\n[run]\nepisodes = 5\n",
    );
    let out = distexplore(&["validate", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizon"));
}

#[test]
fn validate_prints_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ok.toml", SMALL_CUBE);
    let out = distexplore(&["validate", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("significance = 0.05"), "{text}");
    assert!(text.contains("epsilon = 0.05"), "{text}");
}

#[test]
fn unknown_predicate_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "pred.toml",
        &SMALL_CUBE.replace("cubeAtLeast(1)", "cubeAtMost(1)"),
    );
    let out = distexplore(&["validate", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cubeAtMost"));
}

#[test]
fn run_needs_exactly_one_agent() {
    let dir = tempfile::tempdir().unwrap();
    let two = SMALL_CUBE.replace("[run]", "[agent.random]\nkind = \"random\"\n\n[run]");
    let cfg = write(dir.path(), "two.toml", &two);
    let out = distexplore(&["run", &cfg, "-o", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(distexplore(&["frobnicate"]).status.code(), Some(1));
    assert!(distexplore(&["--help"]).status.success());
}

#[test]
fn unreadable_config_is_a_config_error() {
    let out = distexplore(&["validate", "/nonexistent/cfg.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/cfg.toml"));
}

#[test]
fn run_writes_report_and_heatmaps_rerender_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cube.toml", SMALL_CUBE);
    let run_dir = dir.path().join("out");
    let out = distexplore(&["run", &cfg, "-o", run_dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "config.resolved",
        "summary.csv",
        "series_bonusmax_0.csv",
        "visits_bonusmax_1.csv",
    ] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let heat = run_dir.join("heatmaps").join("bonusmax_0");
    let before: Vec<(String, Vec<u8>)> = read_dir_sorted(&heat);
    assert!(before.iter().any(|(n, _)| n == "cube0_top.csv"));
    fs::remove_dir_all(run_dir.join("heatmaps")).unwrap();

    let out = distexplore(&["heatmap", run_dir.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(read_dir_sorted(&heat), before);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cube.toml", SMALL_CUBE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(distexplore(&["run", &cfg, "-o", d.to_str().unwrap()])
            .status
            .success());
    }
    for f in [
        "summary.csv",
        "series_bonusmax_0.csv",
        "series_bonusmax_1.csv",
        "visits_bonusmax_0.csv",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cube.toml", SMALL_CUBE);
    let blocker = write(dir.path(), "file", "");
    let out = distexplore(&["run", &cfg, "-o", &format!("{blocker}/out")]);
    assert_eq!(out.status.code(), Some(2));
}
