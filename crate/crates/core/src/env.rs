//! Episodic simulator over a ground task.
//!
//! Reward is 1 exactly when the next state satisfies the goal, which also
//! ends the episode. An action whose preconditions fail leaves the state
//! unchanged. Every `step` call counts toward the step cap.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::grounding::{GroundAction, GroundTask, State};

/// Tolerance for numeric `=` in preconditions and goals.
pub const EQ_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_T_MAX: usize = 1500;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("action index {index} out of range ({size} actions)")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("episode already finished; call reset")]
    EpisodeFinished,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub t_max: usize,
    /// End the episode with reward -1 on an inapplicable action instead of staying in place.
    pub terminate_on_inapplicable: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            t_max: DEFAULT_T_MAX,
            terminate_on_inapplicable: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next: State,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub applicable: bool,
    pub steps_taken: usize,
}

pub fn action_applicable(action: &GroundAction, s: &State) -> bool {
    action.pre_pos.iter().all(|&i| s.bools[i])
        && action.pre_neg.iter().all(|&i| !s.bools[i])
        && action.num_pre.iter().all(|c| c.holds(&s.nums, EQ_TOLERANCE))
}

pub fn is_applicable(task: &GroundTask, s: &State, a: usize) -> Result<bool, EnvError> {
    let action = task.actions.get(a).ok_or(EnvError::IndexOutOfRange {
        index: a,
        size: task.actions.len(),
    })?;
    Ok(action_applicable(action, s))
}

/// Applies the effects of an (applicable) action. Numeric right-hand sides
/// read the pre-state; deletes happen before adds.
pub fn apply(action: &GroundAction, s: &State) -> State {
    let mut next = s.clone();
    for &i in &action.del {
        next.bools[i] = false;
    }
    for &i in &action.add {
        next.bools[i] = true;
    }
    for e in &action.num_effects {
        next.nums[e.target] = e.value.eval(&s.nums);
    }
    next
}

pub fn goal_satisfied(task: &GroundTask, s: &State) -> bool {
    task.goal.pos.iter().all(|&i| s.bools[i])
        && task.goal.neg.iter().all(|&i| !s.bools[i])
        && task.goal.numeric.iter().all(|c| c.holds(&s.nums, EQ_TOLERANCE))
}

/// Gym-style wrapper holding the current state and step counter.
#[derive(Debug, Clone)]
pub struct Environment {
    task: Arc<GroundTask>,
    config: EnvConfig,
    state: State,
    steps: usize,
    finished: bool,
}

impl Environment {
    pub fn new(task: Arc<GroundTask>, config: EnvConfig) -> Self {
        let state = task.init.clone();
        Environment {
            task,
            config,
            state,
            steps: 0,
            finished: false,
        }
    }

    pub fn task(&self) -> &Arc<GroundTask> {
        &self.task
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn reset(&mut self) -> State {
        self.state = self.task.init.clone();
        self.steps = 0;
        self.finished = false;
        self.state.clone()
    }

    pub fn step(&mut self, a: usize) -> Result<StepResult, EnvError> {
        if self.finished {
            return Err(EnvError::EpisodeFinished);
        }
        let applicable = is_applicable(&self.task, &self.state, a)?;
        self.steps += 1;
        let (next, reward, terminated) = if applicable {
            let next = apply(&self.task.actions[a], &self.state);
            let goal = goal_satisfied(&self.task, &next);
            (next, if goal { 1.0 } else { 0.0 }, goal)
        } else if self.config.terminate_on_inapplicable {
            (self.state.clone(), -1.0, true)
        } else {
            (self.state.clone(), 0.0, false)
        };
        let truncated = !terminated && self.steps >= self.config.t_max;
        self.state = next.clone();
        self.finished = terminated || truncated;
        Ok(StepResult {
            next,
            reward,
            terminated,
            truncated,
            applicable,
            steps_taken: self.steps,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub action: usize,
    pub applicable: bool,
    pub reward: f64,
    pub before: State,
    pub after: State,
}

/// One episode: the initial state and every attempted action.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub init: State,
    pub transitions: Vec<Transition>,
    pub solved: bool,
    pub truncated: bool,
}

impl Trajectory {
    pub fn new(init: State) -> Self {
        Trajectory {
            init,
            transitions: Vec::new(),
            solved: false,
            truncated: false,
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn record(&mut self, action: usize, before: State, r: &StepResult) {
        self.transitions.push(Transition {
            action,
            applicable: r.applicable,
            reward: r.reward,
            before,
            after: r.next.clone(),
        });
        self.solved |= r.terminated && r.reward > 0.0;
        self.truncated |= r.truncated;
    }

    pub fn final_state(&self) -> &State {
        self.transitions.last().map(|t| &t.after).unwrap_or(&self.init)
    }
}

/// Resets and runs the action sequence, stopping at termination or truncation.
pub fn replay(task: &Arc<GroundTask>, config: EnvConfig, actions: &[usize]) -> Result<Trajectory, EnvError> {
    let mut env = Environment::new(task.clone(), config);
    let mut traj = Trajectory::new(env.reset());
    if goal_satisfied(task, &traj.init) {
        traj.solved = true;
        return Ok(traj);
    }
    for &a in actions {
        let before = env.state().clone();
        let r = env.step(a)?;
        traj.record(a, before, &r);
        if r.terminated || r.truncated {
            break;
        }
    }
    Ok(traj)
}

fn state_json(task: &GroundTask, s: &State) -> Value {
    let mut m = Map::new();
    for (atom, &b) in task.fluents.iter().zip(&s.bools) {
        m.insert(atom.to_string(), Value::Bool(b));
    }
    for (f, &x) in task.functions.iter().zip(&s.nums) {
        m.insert(f.to_string(), serde_json::json!(x));
    }
    Value::Object(m)
}

/// Writes one JSON object per transition.
pub fn write_jsonl(task: &GroundTask, traj: &Trajectory, out: &mut impl Write) -> std::io::Result<()> {
    for (k, tr) in traj.transitions.iter().enumerate() {
        let rec = serde_json::json!({
            "t": k,
            "action": task.actions[tr.action].label(),
            "applicable": tr.applicable,
            "reward": tr.reward,
            "state_before": state_json(task, &tr.before),
            "state_after": state_json(task, &tr.after),
        });
        writeln!(out, "{rec}")?;
    }
    Ok(())
}

/// State as read back from a dump, keyed by atom/function label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateMap {
    pub atoms: BTreeMap<String, bool>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpRecord {
    pub t: usize,
    pub action: String,
    pub applicable: bool,
    pub reward: f64,
    pub before: StateMap,
    pub after: StateMap,
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn state_map(v: &Value) -> Option<StateMap> {
    let mut out = StateMap::default();
    for (k, x) in v.as_object()? {
        match x {
            Value::Bool(b) => {
                out.atoms.insert(k.clone(), *b);
            }
            Value::Number(n) => {
                out.values.insert(k.clone(), n.as_f64()?);
            }
            _ => return None,
        }
    }
    Some(out)
}

/// Reads a transition dump; a record with `t == 0` starts a new episode.
pub fn read_jsonl(input: impl BufRead) -> Result<Vec<Vec<DumpRecord>>, DumpError> {
    let mut episodes: Vec<Vec<DumpRecord>> = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: &str| DumpError::Malformed {
            line: n + 1,
            message: message.to_string(),
        };
        let v: Value = serde_json::from_str(&line).map_err(|e| bad(&e.to_string()))?;
        let rec = DumpRecord {
            t: v["t"].as_u64().ok_or_else(|| bad("missing t"))? as usize,
            action: v["action"].as_str().ok_or_else(|| bad("missing action"))?.to_string(),
            applicable: v["applicable"].as_bool().ok_or_else(|| bad("missing applicable"))?,
            reward: v["reward"].as_f64().ok_or_else(|| bad("missing reward"))?,
            before: state_map(&v["state_before"]).ok_or_else(|| bad("bad state_before"))?,
            after: state_map(&v["state_after"]).ok_or_else(|| bad("bad state_after"))?,
        };
        if rec.t == 0 || episodes.is_empty() {
            episodes.push(Vec::new());
        }
        episodes.last_mut().expect("pushed above").push(rec);
    }
    Ok(episodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::ground;
    use crate::pddl::{parse_domain, parse_problem};
    use rand::{Rng, SeedableRng};

    fn example() -> Arc<GroundTask> {
        let d = parse_domain(include_str!("../../../domains/example/domain.pddl")).unwrap();
        let p = parse_problem(include_str!("../../../domains/example/problem.pddl"), &d).unwrap();
        Arc::new(ground(&d, &p).unwrap())
    }

    fn vec_of(t: &GroundTask, s: &State) -> Vec<f64> {
        crate::grounding::encode_state(t, s, false)
    }

    #[test]
    fn reset_returns_initial_state() {
        let t = example();
        let mut env = Environment::new(t.clone(), EnvConfig::default());
        assert_eq!(vec_of(&t, &env.reset()), vec![1.0, 0.0, 10.0]);
        assert_eq!(env.reset(), env.reset());
        assert_eq!(env.steps(), 0);
    }

    #[test]
    fn move_reaches_goal() {
        let t = example();
        assert!(is_applicable(&t, &t.init, 0).unwrap());
        assert!(!is_applicable(&t, &t.init, 1).unwrap());
        assert!(is_applicable(&t, &t.init, 5).is_err());
        let mut env = Environment::new(t.clone(), EnvConfig::default());
        env.reset();
        let r = env.step(0).unwrap();
        assert_eq!(vec_of(&t, &r.next), vec![0.0, 1.0, 9.0]);
        assert_eq!(r.reward, 1.0);
        assert!(r.terminated && !r.truncated && r.applicable);
        assert!(goal_satisfied(&t, &r.next));
        assert_eq!(env.step(0), Err(EnvError::EpisodeFinished));
        let again = env.reset();
        assert_eq!(again, t.init);
        assert_eq!(env.steps(), 0);
    }

    #[test]
    fn inapplicable_step_is_a_no_op() {
        let t = example();
        let mut env = Environment::new(t.clone(), EnvConfig::default());
        env.reset();
        let r = env.step(1).unwrap();
        assert_eq!(r.next, t.init);
        assert_eq!(r.reward, 0.0);
        assert!(!r.applicable && !r.terminated && !r.truncated);
        assert_eq!(r.steps_taken, 1);
    }

    #[test]
    fn terminate_flag_ends_episode_on_failure() {
        let t = example();
        let cfg = EnvConfig {
            terminate_on_inapplicable: true,
            ..EnvConfig::default()
        };
        let mut env = Environment::new(t, cfg);
        env.reset();
        let r = env.step(1).unwrap();
        assert!(r.terminated);
        assert_eq!(r.reward, -1.0);
    }

    #[test]
    fn truncates_at_step_cap() {
        let t = example();
        let mut env = Environment::new(t, EnvConfig::default());
        env.reset();
        for k in 1..=DEFAULT_T_MAX {
            let r = env.step(1).unwrap();
            assert_eq!(r.truncated, k == DEFAULT_T_MAX);
        }
        assert!(env.is_finished());
    }

    #[test]
    fn replay_records_transitions() {
        let t = example();
        let tr = replay(&t, EnvConfig::default(), &[0]).unwrap();
        assert_eq!(tr.len(), 1);
        assert!(tr.solved);
        let empty = replay(&t, EnvConfig::default(), &[]).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.init, t.init);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let seq: Vec<usize> = (0..20).map(|_| rng.gen_range(0..2)).collect();
        assert_eq!(
            replay(&t, EnvConfig::default(), &seq).unwrap(),
            replay(&t, EnvConfig::default(), &seq).unwrap()
        );
    }

    #[test]
    fn jsonl_round_trip() {
        let t = example();
        let tr = replay(&t, EnvConfig::default(), &[1, 0]).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&t, &tr, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let eps = read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(eps.len(), 1);
        assert_eq!(eps[0][1].action, "move(r1,loc_a,loc_b)");
        assert!(!eps[0][0].applicable);
        assert_eq!(eps[0][1].after.values["fuel(r1)"], 9.0);
        assert!(eps[0][1].after.atoms["at(r1,loc_b)"]);
        let bad = format!("{}\nnot json\n", text.lines().next().unwrap());
        match read_jsonl(bad.as_bytes()) {
            Err(DumpError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
