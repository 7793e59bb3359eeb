use std::collections::HashSet;
use std::fs;

use distexplore::harness::{
    run_comparison, series_csv, write_report, ExperimentConfig, SeriesBuilder,
};
use distexplore::mdp::EpisodeRecord;

const RAFT: &str = r#"
[environment]
kind = "raft"

[agent.waypoint]
kind = "waypoint"
target = "commitEntries(1)"

[agent.random]
kind = "random"

[run]
episodes = 150
horizon = 25
trials = 2
base_seed = 11

[report]
baseline = "random"
target = "commitEntries(1)"
episode_logs = "trace"
"#;

#[test]
fn series_rebuilt_from_episode_logs_matches() {
    let config = ExperimentConfig::from_toml(RAFT).unwrap();
    let report = run_comparison(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_report(dir.path(), &config, &report).unwrap();

    for o in &report.outcomes {
        let stem = format!("{}_{}", o.agent, o.trial);
        let log = fs::read_to_string(dir.path().join(format!("episodes_{stem}.log"))).unwrap();
        let records: Vec<EpisodeRecord> = log
            .lines()
            .map(|l| EpisodeRecord::from_log_line(l).unwrap())
            .collect();
        assert_eq!(records.len(), 150);

        let mut series = SeriesBuilder::new(Some(2));
        for r in &records {
            series.push(r);
        }
        let rebuilt = series_csv(o.trial, series.rows(), 1);
        let written = fs::read_to_string(dir.path().join(format!("series_{stem}.csv"))).unwrap();
        assert_eq!(rebuilt, written, "{stem}");

        // Independent recount straight from the visited states.
        let mut all = HashSet::new();
        let mut target = HashSet::new();
        for r in &records {
            for (k, active) in r.visited() {
                all.insert(k.clone());
                if active == 2 {
                    target.insert(k.clone());
                }
            }
        }
        assert_eq!(o.final_unique, all.len());
        assert_eq!(o.final_target, Some(target.len()));
        assert_eq!(o.safety_violations, 0);
    }
}

#[test]
fn comparison_is_deterministic_and_tested_against_baseline() {
    let config = ExperimentConfig::from_toml(RAFT).unwrap();
    let a = run_comparison(&config).unwrap();
    let b = run_comparison(&config).unwrap();
    assert_eq!(a.summaries, b.summaries);
    assert_eq!(a.significance, b.significance);
    let sig = a.significance_of("waypoint", "target").unwrap();
    assert_eq!(sig.baseline, "random");
    assert!((0.0..=1.0).contains(&sig.p));
}

#[test]
fn resolved_config_round_trips() {
    let config = ExperimentConfig::from_toml(RAFT).unwrap();
    let again = ExperimentConfig::from_toml(&config.to_toml()).unwrap();
    assert_eq!(again.to_toml(), config.to_toml());
}
