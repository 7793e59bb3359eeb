use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{BonusMaxAgent, NegVisitsAgent, WaypointAgent};
use crate::cube::CubeConfig;
use crate::error::{Error, Result};
use crate::mdp::TieBreak;
use crate::raft::RaftParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EnvironmentSpec {
    Cube(CubeConfig),
    Raft(RaftParams),
}

fn bm_alpha() -> f64 {
    BonusMaxAgent::DEFAULT_ALPHA
}
fn bm_gamma() -> f64 {
    BonusMaxAgent::DEFAULT_GAMMA
}
fn bm_epsilon() -> f64 {
    BonusMaxAgent::DEFAULT_EPSILON
}
fn nv_alpha() -> f64 {
    NegVisitsAgent::DEFAULT_ALPHA
}
fn nv_gamma() -> f64 {
    NegVisitsAgent::DEFAULT_GAMMA
}
fn progress_reward() -> f64 {
    WaypointAgent::<()>::DEFAULT_PROGRESS_REWARD
}
fn final_reward() -> f64 {
    WaypointAgent::<()>::DEFAULT_FINAL_REWARD
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AgentSpec {
    Random,
    NegVisits {
        #[serde(default = "nv_alpha")]
        alpha: f64,
        #[serde(default = "nv_gamma")]
        gamma: f64,
    },
    BonusMax {
        #[serde(default = "bm_alpha")]
        alpha: f64,
        #[serde(default = "bm_gamma")]
        gamma: f64,
        #[serde(default = "bm_epsilon")]
        epsilon: f64,
        #[serde(default)]
        tie_break: TieBreak,
    },
    Waypoint {
        #[serde(default = "bm_alpha")]
        alpha: f64,
        #[serde(default = "bm_gamma")]
        gamma: f64,
        #[serde(default = "bm_epsilon")]
        epsilon: f64,
        #[serde(default)]
        tie_break: TieBreak,
        /// Defaults to the report target.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
        /// Omitted: the default chain for the target. Empty: `[true, target]`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        waypoints: Option<Vec<String>>,
        #[serde(default = "yes")]
        one_time: bool,
        #[serde(default = "progress_reward")]
        progress_reward: f64,
        #[serde(default = "final_reward")]
        final_reward: f64,
    },
}

impl AgentSpec {
    fn validate(&self, name: &str) -> Result<()> {
        let unit = |what: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "agent.{name}.{what} must be in [0, 1], got {v}"
                )))
            }
        };
        match *self {
            AgentSpec::Random => Ok(()),
            AgentSpec::NegVisits { alpha, gamma } => unit("alpha", alpha).and(unit("gamma", gamma)),
            AgentSpec::BonusMax {
                alpha,
                gamma,
                epsilon,
                ..
            }
            | AgentSpec::Waypoint {
                alpha,
                gamma,
                epsilon,
                ..
            } => {
                unit("alpha", alpha)?;
                unit("gamma", gamma)?;
                unit("epsilon", epsilon)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub episodes: usize,
    pub horizon: usize,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Wall-clock budget per trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_secs: Option<f64>,
    /// Worker threads; 0 uses one per core.
    #[serde(default)]
    pub workers: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpisodeLogs {
    #[default]
    None,
    Summary,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Agent the others are tested against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    pub significance: f64,
    pub series_stride: usize,
    /// Predicate defining target coverage.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub one_time: bool,
    pub heatmaps: bool,
    pub episode_logs: EpisodeLogs,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self {
            baseline: None,
            significance: 0.05,
            series_stride: 1,
            target: None,
            one_time: true,
            heatmaps: true,
            episode_logs: EpisodeLogs::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub agent: BTreeMap<String, AgentSpec>,
    pub run: RunSection,
    #[serde(default)]
    pub report: ReportSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        match &self.environment {
            EnvironmentSpec::Cube(c) => c.validate()?,
            EnvironmentSpec::Raft(r) => r.validate()?,
        }
        if self.agent.is_empty() {
            return Err(Error::Config(
                "at least one [agent.<name>] section is required".into(),
            ));
        }
        for (name, spec) in &self.agent {
            spec.validate(name)?;
            if let AgentSpec::Waypoint { target: None, .. } = spec {
                if self.report.target.is_none() {
                    return Err(Error::Config(format!(
                        "agent.{name} needs a target (or set report.target)"
                    )));
                }
            }
        }
        if self.run.episodes == 0 {
            return Err(Error::Config("run.episodes must be at least 1".into()));
        }
        if self.run.trials == 0 {
            return Err(Error::Config("run.trials must be at least 1".into()));
        }
        if self
            .run
            .time_budget_secs
            .is_some_and(|t| t.is_nan() || t < 0.0)
        {
            return Err(Error::Config(
                "run.time_budget_secs must be nonnegative".into(),
            ));
        }
        if self.report.series_stride == 0 {
            return Err(Error::Config(
                "report.series_stride must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.report.significance) {
            return Err(Error::Config(
                "report.significance must be in [0, 1]".into(),
            ));
        }
        if let Some(b) = &self.report.baseline {
            if !self.agent.contains_key(b) {
                return Err(Error::Config(format!(
                    "report.baseline `{b}` is not a configured agent"
                )));
            }
        }
        // Surface predicate errors now rather than inside a worker.
        super::experiment::check_predicates(self)
    }

    /// The measurement target: `report.target`, else the first waypoint
    /// agent's target.
    pub fn measurement_target(&self) -> Option<&str> {
        self.report.target.as_deref().or_else(|| {
            self.agent.values().find_map(|a| match a {
                AgentSpec::Waypoint {
                    target: Some(t), ..
                } => Some(t.as_str()),
                _ => None,
            })
        })
    }

    /// `report.baseline`, else an agent named `random`, else the first agent.
    pub fn baseline(&self) -> &str {
        self.report
            .baseline
            .as_deref()
            .or_else(|| self.agent.get_key_value("random").map(|(k, _)| k.as_str()))
            .unwrap_or_else(|| self.agent.keys().next().expect("validated").as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: &str = r#"
[environment]
kind = "cube"

[agent.random]
kind = "random"

[agent.bonusmax]
kind = "bonusmax"
alpha = 0.3
gamma = 0.99

[agent.waypoint]
kind = "waypoint"
target = "cubeAtLeast(3)"

[run]
episodes = 10
horizon = 80
trials = 2
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml(CUBE).unwrap();
        assert_eq!(c.environment, EnvironmentSpec::Cube(CubeConfig::default()));
        assert_eq!(
            c.agent["bonusmax"],
            AgentSpec::BonusMax {
                alpha: 0.3,
                gamma: 0.99,
                epsilon: 0.05,
                tie_break: TieBreak::Random,
            }
        );
        assert_eq!(c.baseline(), "random");
        assert_eq!(c.measurement_target(), Some("cubeAtLeast(3)"));
        assert_eq!(c.report.significance, 0.05);
    }

    #[test]
    fn resolved_round_trips() {
        let c = ExperimentConfig::from_toml(CUBE).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_field() {
        let missing = CUBE.replace("horizon = 80\n", "");
        let err = ExperimentConfig::from_toml(&missing)
            .unwrap_err()
            .to_string();
        assert!(err.contains("horizon"), "{err}");
        let unknown = CUBE.replace("trials = 2", "trials = 2\nbogus = 1");
        assert!(ExperimentConfig::from_toml(&unknown)
            .unwrap_err()
            .to_string()
            .contains("bogus"));
        let bad_env = CUBE.replace("kind = \"cube\"", "kind = \"cube\"\nnodes = 3");
        assert!(ExperimentConfig::from_toml(&bad_env).is_err());
        let bad_pred = CUBE.replace("cubeAtLeast(3)", "logDiff(1)");
        assert!(ExperimentConfig::from_toml(&bad_pred).is_err());
        let zero = CUBE.replace("trials = 2", "trials = 0");
        assert!(ExperimentConfig::from_toml(&zero).is_err());
    }

    #[test]
    fn raft_environment() {
        let text = r#"
[environment]
kind = "raft"
nodes = 5
election_timeout = [8, 12]

[agent.w]
kind = "waypoint"
waypoints = []

[run]
episodes = 1
horizon = 25

[report]
target = "commitEntries(2)"
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        let EnvironmentSpec::Raft(p) = &c.environment else {
            panic!()
        };
        assert_eq!((p.nodes, p.ticks, p.election_timeout), (5, 4, [8, 12]));
    }
}
