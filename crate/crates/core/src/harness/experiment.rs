use std::sync::mpsc;
use std::time::{Duration, Instant};

use log::{info, warn};

use super::config::{AgentSpec, EnvironmentSpec, EpisodeLogs, ExperimentConfig};
use super::coverage::{SeriesBuilder, SeriesRow};
use super::stats::{mann_whitney_u, mean_sd};
use crate::agents::{BonusMaxAgent, NegVisitsAgent, RandomAgent, WaypointAgent};
use crate::cube::{cube_at_least, parse_cube_predicate, CubeEnv, CubeState};
use crate::error::{Error, Result};
use crate::mdp::{derive_seed, run_experiment, Agent, Environment, RunConfig};
use crate::predicate::raft::{default_waypoints, parse_raft_predicate};
use crate::predicate::{Predicate, PredicateSequence};
use crate::raft::{RaftEnv, RaftParams, SystemSnapshot};

/// An environment the harness knows how to parse predicates for.
pub trait World: Environment
where
    Self::Snapshot: 'static,
{
    fn parse_predicate(text: &str) -> Result<Predicate<Self::Snapshot>>;

    /// Waypoints used when an agent names a target but no chain.
    fn default_waypoints(target: &str) -> Result<Vec<Predicate<Self::Snapshot>>>;

    /// Concrete per-cell visit counts, when the environment keeps them.
    fn cell_visits(&self) -> Option<Vec<u64>> {
        None
    }

    fn safety_violations(&self) -> usize {
        0
    }
}

impl World for CubeEnv {
    fn parse_predicate(text: &str) -> Result<Predicate<CubeState>> {
        parse_cube_predicate(text)
    }

    /// `cubeAtLeast(i)` gets `cubeAtLeast(1) .. cubeAtLeast(i - 1)`.
    fn default_waypoints(target: &str) -> Result<Vec<Predicate<CubeState>>> {
        let call = crate::predicate::parse_call(target)?;
        parse_cube_predicate(target)?;
        let i = call.int_arg(0)? as usize;
        Ok((1..i).map(cube_at_least).collect())
    }

    fn cell_visits(&self) -> Option<Vec<u64>> {
        Some(self.visits().to_vec())
    }
}

impl World for RaftEnv {
    fn parse_predicate(text: &str) -> Result<Predicate<SystemSnapshot>> {
        parse_raft_predicate(text)
    }

    fn default_waypoints(target: &str) -> Result<Vec<Predicate<SystemSnapshot>>> {
        default_waypoints(target)
    }

    fn safety_violations(&self) -> usize {
        self.violations().len()
    }
}

/// Builds the predicate sequence a waypoint agent follows.
pub fn waypoint_sequence<E: World>(
    target: &str,
    waypoints: Option<&[String]>,
    one_time: bool,
) -> Result<PredicateSequence<E::Snapshot>>
where
    E::Snapshot: 'static,
{
    let chain = match waypoints {
        None => E::default_waypoints(target)?,
        Some(list) => list
            .iter()
            .map(|w| E::parse_predicate(w))
            .collect::<Result<_>>()?,
    };
    Ok(PredicateSequence::new(
        chain,
        E::parse_predicate(target)?,
        one_time,
    ))
}

pub fn build_agent<E: World>(
    spec: &AgentSpec,
    default_target: Option<&str>,
) -> Result<Box<dyn Agent<E::Snapshot>>>
where
    E::Snapshot: 'static,
{
    Ok(match spec {
        AgentSpec::Random => Box::new(RandomAgent::new()),
        AgentSpec::NegVisits { alpha, gamma } => Box::new(NegVisitsAgent::new(*alpha, *gamma)),
        AgentSpec::BonusMax {
            alpha,
            gamma,
            epsilon,
            tie_break,
        } => Box::new(BonusMaxAgent::new(*alpha, *gamma, *epsilon).with_tie_break(*tie_break)),
        AgentSpec::Waypoint {
            alpha,
            gamma,
            epsilon,
            tie_break,
            target,
            waypoints,
            one_time,
            progress_reward,
            final_reward,
        } => {
            let target = target
                .as_deref()
                .or(default_target)
                .ok_or_else(|| Error::Config("waypoint agent without a target".into()))?;
            let sequence = waypoint_sequence::<E>(target, waypoints.as_deref(), *one_time)?;
            Box::new(
                WaypointAgent::new(sequence, *alpha, *gamma, *epsilon)
                    .with_rewards(*progress_reward, *final_reward)
                    .with_tie_break(*tie_break),
            )
        }
    })
}

pub(super) fn check_predicates(config: &ExperimentConfig) -> Result<()> {
    fn check<E: World>(config: &ExperimentConfig) -> Result<()>
    where
        E::Snapshot: 'static,
    {
        if let Some(t) = config.measurement_target() {
            E::parse_predicate(t)?;
        }
        for spec in config.agent.values() {
            build_agent::<E>(spec, config.measurement_target())?;
        }
        Ok(())
    }
    match config.environment {
        EnvironmentSpec::Cube(_) => check::<CubeEnv>(config),
        EnvironmentSpec::Raft(_) => check::<RaftEnv>(config),
    }
}

/// Result of one (agent, trial) cell.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub agent: String,
    /// Display name of the policy, e.g. `BonusMaxRL`.
    pub policy: String,
    pub trial: usize,
    pub seed: u64,
    pub episodes: usize,
    pub timesteps: u64,
    pub final_unique: usize,
    /// `None` without a measurement target.
    pub final_target: Option<usize>,
    pub rows: Vec<SeriesRow>,
    pub visits: Option<Vec<u64>>,
    pub episode_log: Option<String>,
    pub safety_violations: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct TrialFailure {
    pub agent: String,
    pub trial: usize,
    pub error: String,
}

fn run_trial<E: World>(
    mut env: E,
    config: &ExperimentConfig,
    agent_name: &str,
    trial: usize,
) -> Result<TrialOutcome>
where
    E::Snapshot: 'static,
{
    let started = Instant::now();
    let seed = derive_seed(config.run.base_seed, trial as u64);
    let target = config.measurement_target();
    let measure = match target {
        Some(t) => {
            PredicateSequence::new(Vec::new(), E::parse_predicate(t)?, config.report.one_time)
        }
        None => PredicateSequence::trivial(),
    };
    let mut agent = build_agent::<E>(&config.agent[agent_name], target)?;
    let mut run = RunConfig::new(config.run.episodes, config.run.horizon, seed)?;
    if let Some(secs) = config.run.time_budget_secs {
        run = run.with_time_budget(Duration::from_secs_f64(secs));
    }
    let records = run_experiment(&mut env, &mut agent, &run, Some(&measure))?;

    let mut series = SeriesBuilder::new(target.map(|_| measure.len()));
    let mut log = match config.report.episode_logs {
        EpisodeLogs::None => None,
        _ => Some(String::new()),
    };
    let trace = config.report.episode_logs == EpisodeLogs::Trace;
    for r in &records {
        series.push(r);
        if let Some(log) = log.as_mut() {
            log.push_str(&r.to_log_line(trace));
            log.push('\n');
        }
    }
    let outcome = TrialOutcome {
        agent: agent_name.to_string(),
        policy: agent.name().to_string(),
        trial,
        seed,
        episodes: records.len(),
        timesteps: records.last().map_or(0, |r| r.cumulative_timesteps),
        final_unique: series.unique_states(),
        final_target: target.map(|_| series.target_states()),
        rows: series.into_rows(),
        visits: env.cell_visits(),
        episode_log: log,
        safety_violations: env.safety_violations(),
        elapsed: started.elapsed(),
    };
    if outcome.safety_violations > 0 {
        warn!(
            "{agent_name} trial {trial}: {} safety violation(s) in the simulator",
            outcome.safety_violations
        );
    }
    info!(
        "{agent_name} trial {trial}: {} episodes, {} unique, target {:?} in {:.1?}",
        outcome.episodes, outcome.final_unique, outcome.final_target, outcome.elapsed
    );
    Ok(outcome)
}

/// Runs one cell in a fresh environment.
pub fn run_cell(config: &ExperimentConfig, agent: &str, trial: usize) -> Result<TrialOutcome> {
    match &config.environment {
        EnvironmentSpec::Cube(c) => run_trial(CubeEnv::new(c.clone())?, config, agent, trial),
        EnvironmentSpec::Raft(p) => {
            let params = RaftParams {
                seed: derive_seed(p.seed, trial as u64),
                ..p.clone()
            };
            run_trial(RaftEnv::new(params)?, config, agent, trial)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    pub agent: String,
    pub policy: String,
    pub trials: usize,
    pub failed: usize,
    pub unique_mean: f64,
    pub unique_sd: f64,
    pub target_mean: Option<f64>,
    pub target_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Significance {
    pub agent: String,
    pub baseline: String,
    /// `unique` or `target`.
    pub metric: &'static str,
    pub agent_mean: f64,
    pub baseline_mean: f64,
    pub u: f64,
    pub p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub outcomes: Vec<TrialOutcome>,
    pub failures: Vec<TrialFailure>,
    pub summaries: Vec<AgentSummary>,
    pub significance: Vec<Significance>,
}

impl Report {
    /// Final values of `metric` (`unique` or `target`) for `agent`, by trial.
    pub fn finals(&self, agent: &str, metric: &str) -> Vec<f64> {
        self.outcomes
            .iter()
            .filter(|o| o.agent == agent)
            .filter_map(|o| match metric {
                "unique" => Some(o.final_unique as f64),
                _ => o.final_target.map(|t| t as f64),
            })
            .collect()
    }

    pub fn significance_of(&self, agent: &str, metric: &str) -> Option<&Significance> {
        self.significance
            .iter()
            .find(|s| s.agent == agent && s.metric == metric)
    }
}

/// Runs every (agent, trial) cell on a bounded worker pool. Failed cells are
/// logged and excluded from the statistics.
pub fn run_comparison(config: &ExperimentConfig) -> Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.run.workers)
        .build()
        .map_err(|e| Error::InvalidRun(e.to_string()))?;
    let cells: Vec<(String, usize)> = config
        .agent
        .keys()
        .flat_map(|a| (0..config.run.trials).map(move |t| (a.clone(), t)))
        .collect();
    let (tx, rx) = mpsc::channel();
    pool.scope(|scope| {
        for (agent, trial) in &cells {
            let tx = tx.clone();
            scope.spawn(move |_| {
                let result = run_cell(config, agent, *trial);
                let _ = tx.send((agent.clone(), *trial, result));
            });
        }
    });
    drop(tx);

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (agent, trial, result) in rx {
        match result {
            Ok(o) => outcomes.push(o),
            Err(e) => {
                warn!("{agent} trial {trial} failed and is excluded: {e}");
                failures.push(TrialFailure {
                    agent,
                    trial,
                    error: e.to_string(),
                });
            }
        }
    }
    outcomes.sort_by(|a, b| (&a.agent, a.trial).cmp(&(&b.agent, b.trial)));
    failures.sort_by(|a, b| (&a.agent, a.trial).cmp(&(&b.agent, b.trial)));
    Ok(summarize(config, outcomes, failures))
}

fn summarize(
    config: &ExperimentConfig,
    outcomes: Vec<TrialOutcome>,
    failures: Vec<TrialFailure>,
) -> Report {
    let mut report = Report {
        outcomes,
        failures,
        summaries: Vec::new(),
        significance: Vec::new(),
    };
    let has_target = config.measurement_target().is_some();
    for agent in config.agent.keys() {
        let unique = report.finals(agent, "unique");
        let target = report.finals(agent, "target");
        let (unique_mean, unique_sd) = mean_sd(&unique);
        let (target_mean, target_sd) = mean_sd(&target);
        let policy = report
            .outcomes
            .iter()
            .find(|o| &o.agent == agent)
            .map_or_else(String::new, |o| o.policy.clone());
        report.summaries.push(AgentSummary {
            agent: agent.clone(),
            policy,
            trials: unique.len(),
            failed: report.failures.iter().filter(|f| &f.agent == agent).count(),
            unique_mean,
            unique_sd,
            target_mean: has_target.then_some(target_mean),
            target_sd: has_target.then_some(target_sd),
        });
    }

    let baseline = config.baseline();
    let metrics: &[&'static str] = if has_target {
        &["unique", "target"]
    } else {
        &["unique"]
    };
    for agent in config.agent.keys().filter(|a| *a != baseline) {
        for &metric in metrics {
            let (a, b) = (
                report.finals(agent, metric),
                report.finals(baseline, metric),
            );
            match mann_whitney_u(&a, &b) {
                Ok(mw) => report.significance.push(Significance {
                    agent: agent.clone(),
                    baseline: baseline.to_string(),
                    metric,
                    agent_mean: mean_sd(&a).0,
                    baseline_mean: mean_sd(&b).0,
                    u: mw.u,
                    p: mw.p,
                    significant: mw.p < config.report.significance,
                }),
                Err(e) => warn!("no {metric} comparison of {agent} against {baseline}: {e}"),
            }
        }
    }
    report
}
