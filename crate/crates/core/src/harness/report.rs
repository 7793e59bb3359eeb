use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{EnvironmentSpec, ExperimentConfig};
use super::coverage::series_csv;
use super::experiment::Report;
use crate::cube::{read_visits_csv, write_heatmaps, write_visits_csv};
use crate::error::{Error, Result};

pub const RESOLVED_CONFIG: &str = "config.resolved";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.3}"))
}

pub fn summary_csv(report: &Report) -> String {
    let mut out =
        String::from("agent,policy,trials,failed,unique_mean,unique_sd,target_mean,target_sd\n");
    for s in &report.summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.3},{:.3},{},{}",
            s.agent,
            s.policy,
            s.trials,
            s.failed,
            s.unique_mean,
            s.unique_sd,
            opt(s.target_mean),
            opt(s.target_sd)
        );
    }
    out
}

pub fn significance_csv(report: &Report) -> String {
    let mut out = String::from("agent,baseline,metric,agent_mean,baseline_mean,u,p,significant\n");
    for s in &report.significance {
        let _ = writeln!(
            out,
            "{},{},{},{:.3},{:.3},{},{:.6},{}",
            s.agent, s.baseline, s.metric, s.agent_mean, s.baseline_mean, s.u, s.p, s.significant
        );
    }
    out
}

/// Human-readable table: `agent  policy  unique mean ± sd  target mean ± sd  p`.
pub fn summary_table(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<12} {:>22} {:>22} {:>10}",
        "agent", "policy", "unique states", "target states", "p(target)"
    );
    for s in &report.summaries {
        let target = match (s.target_mean, s.target_sd) {
            (Some(m), Some(sd)) => format!("{m:.1} ± {sd:.2}"),
            _ => "-".into(),
        };
        let p = report
            .significance_of(&s.agent, "target")
            .or_else(|| report.significance_of(&s.agent, "unique"))
            .map_or_else(|| "baseline".to_string(), |x| format!("{:.4}", x.p));
        let _ = writeln!(
            out,
            "{:<14} {:<12} {:>22} {:>22} {:>10}",
            s.agent,
            s.policy,
            format!("{:.1} ± {:.2}", s.unique_mean, s.unique_sd),
            target,
            p
        );
    }
    for f in &report.failures {
        let _ = writeln!(out, "excluded: {} trial {}: {}", f.agent, f.trial, f.error);
    }
    out
}

/// Writes every report artifact into `dir`.
pub fn write_report(dir: &Path, config: &ExperimentConfig, report: &Report) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(RESOLVED_CONFIG), config.to_toml())?;
    fs::write(dir.join("summary.csv"), summary_csv(report))?;
    fs::write(dir.join("significance.csv"), significance_csv(report))?;
    if !report.failures.is_empty() {
        let lines: Vec<String> = report
            .failures
            .iter()
            .map(|f| format!("{}\t{}\t{}", f.agent, f.trial, f.error))
            .collect();
        fs::write(dir.join("failures.txt"), lines.join("\n") + "\n")?;
    }
    for o in &report.outcomes {
        let stem = format!("{}_{}", o.agent, o.trial);
        fs::write(
            dir.join(format!("series_{stem}.csv")),
            series_csv(o.trial, &o.rows, config.report.series_stride),
        )?;
        if let Some(log) = &o.episode_log {
            fs::write(dir.join(format!("episodes_{stem}.log")), log)?;
        }
        if let (EnvironmentSpec::Cube(cube), Some(visits)) = (&config.environment, &o.visits) {
            write_visits_csv(&dir.join(format!("visits_{stem}.csv")), visits, cube)?;
            if config.report.heatmaps {
                write_heatmaps(&dir.join("heatmaps").join(&stem), visits, cube)?;
            }
        }
    }
    Ok(())
}

/// Re-renders heatmaps from the `visits_*.csv` files of a cube run directory.
/// Returns the rendered directories.
pub fn render_heatmaps(run_dir: &Path) -> Result<Vec<PathBuf>> {
    let config = ExperimentConfig::load(&run_dir.join(RESOLVED_CONFIG))?;
    let EnvironmentSpec::Cube(cube) = &config.environment else {
        return Err(Error::Config(format!(
            "{} is not a cube-world run",
            run_dir.display()
        )));
    };
    let mut inputs: Vec<PathBuf> = fs::read_dir(run_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("visits_") && n.ends_with(".csv"))
        })
        .collect();
    inputs.sort();
    let mut rendered = Vec::new();
    for path in inputs {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        let out = run_dir
            .join("heatmaps")
            .join(name.trim_start_matches("visits_"));
        write_heatmaps(&out, &read_visits_csv(&path, cube)?, cube)?;
        rendered.push(out);
    }
    Ok(rendered)
}
