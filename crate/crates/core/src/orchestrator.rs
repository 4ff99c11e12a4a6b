//! The plan-first training loop: plan with the incumbent learned model,
//! follow the plan with expert masks, otherwise act with the policy, then
//! relearn the model from every trajectory so far.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::agent::{Agent, AgentError, PpoConfig};
use crate::env::{EnvConfig, EnvError, Environment, Trajectory, DEFAULT_T_MAX};
use crate::grounding::{encode_state, ground, GroundTask, GroundingError};
use crate::learning::{learn_with_cap, Datasets, LearnError, LearnedModel, DEFAULT_SAMPLE_CAP};
use crate::pddl::{LiftedDomain, Problem};
use crate::planner::{
    plan_external_model, plan_with, ExternalPlanner, PlanOutcome, PlannerConfig, PlannerError, DEFAULT_EXPANSION_CAP,
};

pub const ROLLING_WINDOW: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ramp,
    #[serde(alias = "ppo-baseline")]
    Ppo,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ramp" => Ok(Mode::Ramp),
            "ppo" | "ppo-baseline" => Ok(Mode::Ppo),
            _ => Err(format!("unknown mode {s} (expected ramp or ppo)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Ramp => "ramp",
            Mode::Ppo => "ppo",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub episodes: usize,
    pub t_max: usize,
    pub plan_budget_s: f64,
    pub expansion_cap: usize,
    pub seed: u64,
    pub ppo: PpoConfig,
    pub sample_cap: usize,
    pub external_planner: Option<PathBuf>,
    /// Rewrite `x = c` as two inequalities for the external planner.
    pub split_equalities: bool,
    /// Keep a copy of the exported model every this many episodes (0 = never).
    pub snapshot_every: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Ramp,
            episodes: 100,
            t_max: DEFAULT_T_MAX,
            plan_budget_s: 60.0,
            expansion_cap: DEFAULT_EXPANSION_CAP,
            seed: 0,
            ppo: PpoConfig::default(),
            sample_cap: DEFAULT_SAMPLE_CAP,
            external_planner: None,
            split_equalities: false,
            snapshot_every: 10,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Solved,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanSource {
    Planner,
    Policy,
    None,
}

/// One row of the per-episode metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub instance: String,
    pub outcome: Outcome,
    pub steps: usize,
    pub plan_source: PlanSource,
    pub planner_outcome: String,
    pub rolling_success: f64,
    pub cum_solution_len: usize,
    pub plan_time_s: f64,
    pub learn_time_s: f64,
    #[serde(skip)]
    pub act_time_s: f64,
    #[serde(skip)]
    pub plan_len: Option<usize>,
    #[serde(skip)]
    pub safety_violation: bool,
}

/// A planner action that failed on ground truth, or a plan that missed the goal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SafetyViolation {
    pub episode: usize,
    pub instance: String,
    pub step: usize,
    pub action: String,
    pub reason: String,
}

/// Called once per finished episode, e.g. to stream the trajectory dump.
pub trait EpisodeSink {
    fn on_episode(
        &mut self,
        _record: &EpisodeRecord,
        _task: &GroundTask,
        _traj: &Trajectory,
        _model: &LearnedModel,
    ) -> std::io::Result<()> {
        Ok(())
    }
}

pub struct NullSink;

impl EpisodeSink for NullSink {}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mode: Mode,
    pub seed: u64,
    pub episodes: usize,
    pub solved: usize,
    pub truncated: usize,
    pub final_rolling_success: f64,
    pub cum_solution_len: usize,
    pub planner_utilization: f64,
    pub safety_violations: usize,
    pub ppo_updates: usize,
    pub trajectories: usize,
    pub exported_actions: usize,
    pub total_steps: usize,
    pub wall_time_s: f64,
}

pub struct ExperimentResult {
    pub records: Vec<EpisodeRecord>,
    pub model: LearnedModel,
    pub datasets: Datasets,
    pub agent: Agent,
    pub violations: Vec<SafetyViolation>,
    /// (episode, exported model) every `snapshot_every` episodes.
    pub snapshots: Vec<(usize, LiftedDomain)>,
    pub summary: Summary,
}

/// Mutable state carried across episodes of one experiment.
pub struct ExperimentState {
    pub cfg: ExperimentConfig,
    pub domain: LiftedDomain,
    pub pool: Vec<Problem>,
    tasks: Vec<Arc<GroundTask>>,
    pub datasets: Datasets,
    pub model: LearnedModel,
    pub agent: Agent,
    pub rng: ChaCha8Rng,
    pub violations: Vec<SafetyViolation>,
    work_dir: PathBuf,
}

fn same_layout(a: &GroundTask, b: &GroundTask) -> bool {
    a.fluents == b.fluents && a.functions == b.functions && a.actions.iter().map(|x| x.label()).eq(b.actions.iter().map(|x| x.label()))
}

impl ExperimentState {
    pub fn new(domain: &LiftedDomain, pool: Vec<Problem>, cfg: ExperimentConfig) -> Result<Self, ExperimentError> {
        if cfg.episodes == 0 {
            return Err(ExperimentError::Config("episodes must be positive".into()));
        }
        if pool.is_empty() {
            return Err(ExperimentError::Config("problem set is empty".into()));
        }
        if cfg.t_max == 0 {
            return Err(ExperimentError::Config("t_max must be positive".into()));
        }
        if !(cfg.plan_budget_s >= 0.0 && cfg.plan_budget_s.is_finite()) {
            return Err(ExperimentError::Config("plan budget must be a non-negative number".into()));
        }
        let tasks = pool
            .iter()
            .map(|p| ground(domain, p).map(Arc::new))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(bad) = tasks.iter().position(|t| !same_layout(t, &tasks[0])) {
            return Err(ExperimentError::Config(format!(
                "instance {} grounds to a different layout than {}",
                pool[bad].name, pool[0].name
            )));
        }
        let agent = Agent::new(tasks[0].obs_len(false), tasks[0].num_actions(), cfg.ppo.clone(), cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
        let work_dir = std::env::temp_dir().join(format!("ramp-{}-{}", std::process::id(), cfg.seed));
        Ok(ExperimentState {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            datasets: Datasets::new(&domain.signature()),
            model: LearnedModel::empty(domain),
            domain: domain.clone(),
            pool,
            tasks,
            agent,
            violations: Vec::new(),
            work_dir,
            cfg,
        })
    }

    pub fn task(&self, instance: usize) -> &Arc<GroundTask> {
        &self.tasks[instance]
    }

    fn plan(&self, instance: usize) -> PlanOutcome {
        let model = self.model.export();
        if model.actions.is_empty() {
            return PlanOutcome::NoModel;
        }
        let budget = Duration::from_secs_f64(self.cfg.plan_budget_s);
        let problem = &self.pool[instance];
        if let Some(exe) = &self.cfg.external_planner {
            let mut planner = ExternalPlanner::new(exe);
            planner.split_equalities = self.cfg.split_equalities;
            let r = std::fs::create_dir_all(&self.work_dir)
                .map_err(PlannerError::from)
                .and_then(|_| plan_external_model(&model, problem, &planner, budget, &self.work_dir));
            match r {
                Ok(out) => return out,
                Err(e) => log::warn!("external planner failed ({e}), using the internal planner"),
            }
        }
        plan_with(
            &model,
            problem,
            &PlannerConfig {
                budget,
                expansion_cap: self.cfg.expansion_cap,
            },
        )
    }

    /// Runs one episode on `instance` without touching the learned model.
    pub fn run_episode(&mut self, episode: usize, instance: usize) -> Result<(EpisodeRecord, Trajectory), ExperimentError> {
        let task = self.tasks[instance].clone();
        let n_actions = task.num_actions();
        let t0 = Instant::now();
        let outcome = match self.cfg.mode {
            Mode::Ramp => Some(self.plan(instance)),
            Mode::Ppo => None,
        };
        let plan_time_s = if outcome.is_some() { t0.elapsed().as_secs_f64() } else { 0.0 };

        let t1 = Instant::now();
        let mut env = Environment::new(
            task.clone(),
            EnvConfig {
                t_max: self.cfg.t_max,
                terminate_on_inapplicable: false,
            },
        );
        let mut traj = Trajectory::new(env.reset());
        let mut policy_steps = 0;
        let mut violation = false;
        let goal_at_start = crate::env::goal_satisfied(&task, &traj.init);
        if goal_at_start {
            traj.solved = true;
        }

        let plan = outcome.as_ref().and_then(|o| o.plan()).map(|p| p.actions.clone());
        if let (Some(plan), false) = (&plan, goal_at_start) {
            for (k, label) in plan.iter().enumerate() {
                if env.is_finished() {
                    break;
                }
                let Some(a) = task.action_index(label) else {
                    self.violate(episode, instance, k, label, "action not in the task");
                    violation = true;
                    break;
                };
                let applicable = self.step(&mut env, &mut traj, Some(a))?;
                if !applicable {
                    self.violate(episode, instance, k, label, "inapplicable on ground truth");
                    violation = true;
                    break;
                }
            }
            if !violation && !traj.solved && !env.is_finished() {
                let last = plan.last().cloned().unwrap_or_default();
                self.violate(episode, instance, plan.len(), &last, "plan ends outside the goal");
                violation = true;
            }
        }
        while !env.is_finished() && !goal_at_start {
            self.step(&mut env, &mut traj, None)?;
            policy_steps += 1;
        }
        debug_assert!(n_actions == self.agent.net.num_actions());
        let act_time_s = t1.elapsed().as_secs_f64();

        let plan_source = if traj.is_empty() {
            PlanSource::None
        } else if policy_steps == 0 && plan.is_some() {
            PlanSource::Planner
        } else {
            PlanSource::Policy
        };
        let record = EpisodeRecord {
            episode,
            instance: self.pool[instance].name.clone(),
            outcome: if traj.solved { Outcome::Solved } else { Outcome::Truncated },
            steps: traj.len(),
            plan_source,
            planner_outcome: outcome.as_ref().map(|o| o.tag().to_string()).unwrap_or_else(|| "skipped".into()),
            rolling_success: 0.0,
            cum_solution_len: 0,
            plan_time_s,
            learn_time_s: 0.0,
            act_time_s,
            plan_len: plan.as_ref().map(Vec::len),
            safety_violation: violation,
        };
        Ok((record, traj))
    }

    fn violate(&mut self, episode: usize, instance: usize, step: usize, action: &str, reason: &str) {
        log::error!(
            "safety violation in episode {episode} on {}: step {step} {action}: {reason}",
            self.pool[instance].name
        );
        self.violations.push(SafetyViolation {
            episode,
            instance: self.pool[instance].name.clone(),
            step,
            action: action.to_string(),
            reason: reason.to_string(),
        });
    }

    /// One environment step chosen by the agent (or forced by `expert`).
    fn step(&mut self, env: &mut Environment, traj: &mut Trajectory, expert: Option<usize>) -> Result<bool, ExperimentError> {
        let task = env.task().clone();
        let before = env.state().clone();
        let obs = encode_state(&task, &before, false);
        let mut s = self.agent.act(&obs, &before, expert)?;
        let r = env.step(s.action)?;
        if !r.applicable {
            self.agent.memory.record(&before, s.action);
        }
        traj.record(s.action, before, &r);
        s.reward = r.reward;
        s.done = r.terminated || r.truncated;
        let next_obs = encode_state(&task, &r.next, false);
        if let Some(Err(e)) = self.agent.push(s, &next_obs) {
            log::warn!("policy update skipped: {e}");
        }
        Ok(r.applicable)
    }

    /// Adds the trajectory and relearns if it brought new successes.
    /// Returns the learning time in seconds.
    pub fn absorb(&mut self, instance: usize, traj: &Trajectory) -> Result<f64, ExperimentError> {
        let t = Instant::now();
        let fresh = self.datasets.add_trajectory(&self.tasks[instance], traj)?;
        if self.cfg.mode == Mode::Ramp && fresh > 0 {
            match learn_with_cap(&self.datasets, self.cfg.sample_cap) {
                Ok(m) => self.model = m,
                Err(e) => log::error!("relearning failed, keeping the previous model: {e}"),
            }
        } else {
            // no new distinct successes: the model is unchanged, only the counters move
            for (name, a) in self.model.actions.iter_mut() {
                if let Some(d) = self.datasets.actions.get(name) {
                    a.observed_count = d.success_count;
                }
            }
        }
        self.model.trajectories = self.datasets.trajectories;
        Ok(t.elapsed().as_secs_f64())
    }
}

/// Rolling success rate (window 25, shorter at the start).
pub fn rolling_success(outcomes: &[bool]) -> Vec<f64> {
    (0..outcomes.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(ROLLING_WINDOW);
            let w = &outcomes[lo..=i];
            w.iter().filter(|&&s| s).count() as f64 / w.len() as f64
        })
        .collect()
}

/// Running total of steps over solved episodes.
pub fn cumulative_length(records: &[EpisodeRecord]) -> Vec<usize> {
    records
        .iter()
        .scan(0, |acc, r| {
            if r.outcome == Outcome::Solved {
                *acc += r.steps;
            }
            Some(*acc)
        })
        .collect()
}

/// Fraction of solved episodes whose actions all came from the planner.
pub fn planner_utilization(records: &[EpisodeRecord]) -> f64 {
    let solved: Vec<&EpisodeRecord> = records.iter().filter(|r| r.outcome == Outcome::Solved).collect();
    if solved.is_empty() {
        return 0.0;
    }
    solved.iter().filter(|r| r.plan_source == PlanSource::Planner).count() as f64 / solved.len() as f64
}

/// Fills in the rolling and cumulative columns.
pub fn fill_metrics(records: &mut [EpisodeRecord]) {
    let outcomes: Vec<bool> = records.iter().map(|r| r.outcome == Outcome::Solved).collect();
    let roll = rolling_success(&outcomes);
    let cum = cumulative_length(records);
    for (i, r) in records.iter_mut().enumerate() {
        r.rolling_success = roll[i];
        r.cum_solution_len = cum[i];
    }
}

pub fn run_experiment(
    domain: &LiftedDomain,
    pool: Vec<Problem>,
    cfg: ExperimentConfig,
    sink: &mut dyn EpisodeSink,
) -> Result<ExperimentResult, ExperimentError> {
    let start = Instant::now();
    let mut st = ExperimentState::new(domain, pool, cfg)?;
    let mut records: Vec<EpisodeRecord> = Vec::new();
    let mut snapshots = Vec::new();
    let mut outcomes = Vec::new();
    let mut cum = 0;
    for episode in 0..st.cfg.episodes {
        let instance = st.rng.gen_range(0..st.pool.len());
        let (mut rec, traj) = st.run_episode(episode, instance)?;
        rec.learn_time_s = st.absorb(instance, &traj)?;
        outcomes.push(rec.outcome == Outcome::Solved);
        if rec.outcome == Outcome::Solved {
            cum += rec.steps;
        }
        rec.rolling_success = *rolling_success(&outcomes).last().expect("non-empty");
        rec.cum_solution_len = cum;
        log::info!(
            "episode {episode} {} {:?} steps={} source={:?} planner={} rolling={:.2}",
            rec.instance,
            rec.outcome,
            rec.steps,
            rec.plan_source,
            rec.planner_outcome,
            rec.rolling_success
        );
        sink.on_episode(&rec, &st.tasks[instance], &traj, &st.model)?;
        if st.cfg.snapshot_every > 0 && (episode + 1) % st.cfg.snapshot_every == 0 {
            snapshots.push((episode + 1, st.model.export()));
        }
        records.push(rec);
    }
    let _ = std::fs::remove_dir_all(&st.work_dir);
    let solved = outcomes.iter().filter(|&&s| s).count();
    let summary = Summary {
        mode: st.cfg.mode,
        seed: st.cfg.seed,
        episodes: records.len(),
        solved,
        truncated: records.len() - solved,
        final_rolling_success: records.last().map(|r| r.rolling_success).unwrap_or(0.0),
        cum_solution_len: cum,
        planner_utilization: planner_utilization(&records),
        safety_violations: st.violations.len(),
        ppo_updates: st.agent.updates,
        trajectories: st.datasets.trajectories,
        exported_actions: st.model.exportable_count(),
        total_steps: records.iter().map(|r| r.steps).sum(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(ExperimentResult {
        records,
        model: st.model,
        datasets: st.datasets,
        agent: st.agent,
        violations: st.violations,
        snapshots,
        summary,
    })
}

/// Per-episode mean and two-sided confidence interval across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub episode: usize,
    pub seeds: usize,
    pub rolling_success_mean: f64,
    pub rolling_success_lo: f64,
    pub rolling_success_hi: f64,
    pub cum_solution_len_mean: f64,
    pub cum_solution_len_lo: f64,
    pub cum_solution_len_hi: f64,
}

/// Mean and half-width of a Student-t confidence interval.
pub fn t_interval(xs: &[f64], level: f64) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid dof");
    let q = t.inverse_cdf(0.5 + level / 2.0);
    (mean, q * (var / n as f64).sqrt())
}

/// Aggregates per-seed record tables by episode index (95% intervals).
pub fn aggregate(runs: &[Vec<EpisodeRecord>]) -> Vec<AggregateRow> {
    let len = runs.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let rs: Vec<f64> = runs.iter().filter_map(|r| r.get(i)).map(|r| r.rolling_success).collect();
            let cl: Vec<f64> = runs.iter().filter_map(|r| r.get(i)).map(|r| r.cum_solution_len as f64).collect();
            let (rm, rh) = t_interval(&rs, 0.95);
            let (cm, ch) = t_interval(&cl, 0.95);
            AggregateRow {
                episode: i,
                seeds: rs.len(),
                rolling_success_mean: rm,
                rolling_success_lo: rm - rh,
                rolling_success_hi: rm + rh,
                cum_solution_len_mean: cm,
                cum_solution_len_lo: cm - ch,
                cum_solution_len_hi: cm + ch,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
