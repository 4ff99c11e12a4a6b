//! Learned-model quality: applicability precision/recall on harvested
//! states, effect agreement, and a plan-replay safety audit.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::env::{action_applicable, apply, goal_satisfied};
use crate::grounding::{ground, GroundAction, GroundTask, GroundingError, State, StateKey};
use crate::pddl::{rat, Comparator, LiftedDomain, NumericCondition, Problem, Rational};
use crate::planner::{plan_with, validate, PlanOutcome, PlannerConfig};

/// Tolerance for a predicted numeric value to count as exact.
pub const NUMERIC_MATCH_TOL: f64 = 1e-9;
pub const DEFAULT_WALKS: usize = 200;
pub const DEFAULT_WALK_LEN: usize = 50;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("the test set has no samples")]
    NoSamples,
    #[error("grounding failed: {0}")]
    Grounding(#[from] GroundingError),
    #[error("model and ground truth disagree on the state layout of {0}")]
    Layout(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub walks: usize,
    /// Step cap per walk; walks also stop at the goal.
    pub walk_len: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks: DEFAULT_WALKS,
            walk_len: DEFAULT_WALK_LEN,
            seed: 0,
        }
    }
}

/// Harvested states per ground-truth task; every (state, action) pair is a sample.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub tasks: Vec<Arc<GroundTask>>,
    pub problems: Vec<Problem>,
    /// (task index, state), unique by state key across the whole set.
    pub states: Vec<(usize, State)>,
}

impl TestSet {
    pub fn num_samples(&self) -> usize {
        self.states.iter().map(|(i, _)| self.tasks[*i].num_actions()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_samples() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectDelta {
    /// Signed fluent literals: (index, true for add).
    pub literals: BTreeSet<(usize, bool)>,
    pub next_nums: Vec<f64>,
}

fn delta(a: &GroundAction, s: &State) -> EffectDelta {
    let literals = a.add.iter().map(|&i| (i, true)).chain(a.del.iter().map(|&i| (i, false))).collect();
    EffectDelta {
        literals,
        next_nums: apply(a, s).nums,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSample {
    pub task: usize,
    pub state: usize,
    pub action: usize,
    pub truth_applicable: bool,
    pub learned_applicable: bool,
    pub truth_delta: Option<EffectDelta>,
    pub learned_delta: Option<EffectDelta>,
}

fn harvest(
    seen: &mut HashSet<StateKey>,
    states: &mut Vec<(usize, State)>,
    task: usize,
    s: &State,
) {
    if seen.insert(s.key()) {
        states.push((task, s.clone()));
    }
}

/// Harvests states from ground-truth plans (when `planner` is given) and
/// seeded random walks that pick uniformly among all actions.
pub fn build_test_set(
    truth: &LiftedDomain,
    instances: &[Problem],
    walks: &WalkConfig,
    planner: Option<&PlannerConfig>,
) -> Result<TestSet, EvalError> {
    let tasks = instances
        .iter()
        .map(|p| ground(truth, p).map(Arc::new))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(walks.seed);
    let mut seen = HashSet::new();
    let mut states = Vec::new();
    for (t, task) in tasks.iter().enumerate() {
        if let Some(cfg) = planner {
            if let PlanOutcome::Plan(p) = plan_with(truth, &instances[t], cfg) {
                let mut s = task.init.clone();
                harvest(&mut seen, &mut states, t, &s);
                for label in &p.actions {
                    let Some(a) = task.action_index(label) else { break };
                    s = apply(&task.actions[a], &s);
                    harvest(&mut seen, &mut states, t, &s);
                }
            }
        }
        if task.num_actions() == 0 {
            continue;
        }
        for _ in 0..walks.walks {
            let mut s = task.init.clone();
            harvest(&mut seen, &mut states, t, &s);
            for _ in 0..walks.walk_len {
                if goal_satisfied(task, &s) {
                    break;
                }
                let a = &task.actions[rng.gen_range(0..task.num_actions())];
                if action_applicable(a, &s) {
                    s = apply(a, &s);
                    harvest(&mut seen, &mut states, t, &s);
                }
            }
        }
    }
    Ok(TestSet {
        tasks,
        problems: instances.to_vec(),
        states,
    })
}

/// The model grounded on every instance, with truth action index -> model action.
struct Grounded {
    tasks: Vec<GroundTask>,
    maps: Vec<Vec<Option<usize>>>,
}

fn ground_model(model: &LiftedDomain, set: &TestSet) -> Result<Grounded, EvalError> {
    let mut tasks = Vec::new();
    let mut maps = Vec::new();
    for (truth, problem) in set.tasks.iter().zip(&set.problems) {
        let m = ground(model, problem)?;
        if m.fluents != truth.fluents || m.functions != truth.functions {
            return Err(EvalError::Layout(problem.name.clone()));
        }
        let index: HashMap<String, usize> = m.actions.iter().enumerate().map(|(i, a)| (a.label(), i)).collect();
        maps.push(truth.actions.iter().map(|a| index.get(&a.label()).copied()).collect());
        tasks.push(m);
    }
    Ok(Grounded { tasks, maps })
}

/// Every sample of the set judged by `model`, in state-major order.
pub fn samples(model: &LiftedDomain, set: &TestSet) -> Result<Vec<TestSample>, EvalError> {
    let g = ground_model(model, set)?;
    let mut out = Vec::with_capacity(set.num_samples());
    for_each_sample(&g, set, |x| out.push(x));
    Ok(out)
}

fn for_each_sample(g: &Grounded, set: &TestSet, mut f: impl FnMut(TestSample)) {
    for (si, (t, s)) in set.states.iter().enumerate() {
        let truth = &set.tasks[*t];
        for (a, ta) in truth.actions.iter().enumerate() {
            let la = g.maps[*t][a].map(|i| &g.tasks[*t].actions[i]);
            let truth_applicable = action_applicable(ta, s);
            let learned_applicable = la.is_some_and(|la| action_applicable(la, s));
            let both = truth_applicable && learned_applicable;
            f(TestSample {
                task: *t,
                state: si,
                action: a,
                truth_applicable,
                learned_applicable,
                truth_delta: both.then(|| delta(ta, s)),
                learned_delta: la.filter(|_| both).map(|la| delta(la, s)),
            });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    /// Nothing predicted applicable: precision is reported as 1.0.
    pub vacuous_precision: bool,
    /// Nothing truly applicable: recall is reported as 1.0.
    pub vacuous_recall: bool,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (1.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Applicability prediction scores; absent actions predict "inapplicable".
pub fn precondition_pr(model: &LiftedDomain, set: &TestSet) -> Result<PrecisionRecall, EvalError> {
    if set.is_empty() {
        return Err(EvalError::NoSamples);
    }
    let g = ground_model(model, set)?;
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (t, s) in &set.states {
        let truth = &set.tasks[*t];
        for (a, ta) in truth.actions.iter().enumerate() {
            let predicted = g.maps[*t][a].is_some_and(|i| action_applicable(&g.tasks[*t].actions[i], s));
            match (predicted, action_applicable(ta, s)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
    }
    let (precision, vacuous_precision) = ratio(tp, tp + fp);
    let (recall, vacuous_recall) = ratio(tp, tp + fn_);
    Ok(PrecisionRecall {
        precision,
        recall,
        tp,
        fp,
        fn_,
        tn,
        vacuous_precision,
        vacuous_recall,
    })
}

/// `None` fields mean no sample was applicable under both models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectScores {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub numeric_exact: Option<f64>,
    pub joint_samples: usize,
}

/// Micro-averaged Boolean effect literal agreement plus the rate of
/// samples whose predicted numeric successor is exact.
pub fn effect_pr(model: &LiftedDomain, set: &TestSet) -> Result<EffectScores, EvalError> {
    let g = ground_model(model, set)?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    let (mut joint, mut exact) = (0usize, 0usize);
    for_each_sample(&g, set, |x| {
        let (Some(t), Some(l)) = (x.truth_delta, x.learned_delta) else { return };
        joint += 1;
        tp += l.literals.intersection(&t.literals).count();
        fp += l.literals.difference(&t.literals).count();
        fn_ += t.literals.difference(&l.literals).count();
        if t.next_nums.iter().zip(&l.next_nums).all(|(a, b)| (a - b).abs() <= NUMERIC_MATCH_TOL) {
            exact += 1;
        }
    });
    if joint == 0 {
        return Ok(EffectScores {
            precision: None,
            recall: None,
            numeric_exact: None,
            joint_samples: 0,
        });
    }
    Ok(EffectScores {
        precision: Some(ratio(tp, tp + fp).0),
        recall: Some(ratio(tp, tp + fn_).0),
        numeric_exact: Some(exact as f64 / joint as f64),
        joint_samples: joint,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SafetyAudit {
    pub instances: usize,
    pub planned: usize,
    /// Plans that replay on ground truth and reach the goal.
    pub solved: usize,
    pub timeouts: usize,
    pub violations: usize,
    pub violating_instances: Vec<String>,
}

/// Plans every instance under `model` and replays each plan on `truth`.
pub fn safety_audit(model: &LiftedDomain, truth: &LiftedDomain, instances: &[Problem], cfg: &PlannerConfig) -> SafetyAudit {
    let mut audit = SafetyAudit {
        instances: instances.len(),
        ..SafetyAudit::default()
    };
    for p in instances {
        match plan_with(model, p, cfg) {
            PlanOutcome::Plan(plan) => {
                audit.planned += 1;
                if validate(truth, p, &plan.actions) {
                    audit.solved += 1;
                } else {
                    audit.violations += 1;
                    audit.violating_instances.push(p.name.clone());
                }
            }
            PlanOutcome::Timeout(_) => audit.timeouts += 1,
            PlanOutcome::NoPlan(_) | PlanOutcome::NoModel => {}
        }
    }
    audit
}

/// Loosens every inequality precondition by `fraction` of its bound
/// (at least `fraction` in absolute terms). Used for fault injection.
pub fn inflate_preconditions(model: &LiftedDomain, fraction: &Rational) -> LiftedDomain {
    let mut out = model.clone();
    for a in &mut out.actions {
        a.num_pre = a
            .num_pre
            .iter()
            .map(|c| {
                let slack: Rational = std::cmp::max(c.rhs.abs(), rat(1)) * fraction;
                let rhs = match c.comparator {
                    Comparator::Ge | Comparator::Gt => &c.rhs - slack,
                    Comparator::Le | Comparator::Lt => &c.rhs + slack,
                    Comparator::Eq => c.rhs.clone(),
                };
                NumericCondition {
                    lhs: c.lhs.clone(),
                    comparator: c.comparator,
                    rhs,
                }
            })
            .collect();
    }
    out
}

/// One row of the evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub domain: String,
    pub size: String,
    pub recall: f64,
    pub precision: f64,
    pub effect_precision: Option<f64>,
    pub effect_recall: Option<f64>,
    pub solved: usize,
    pub timeout: usize,
    pub numeric_exact: Option<f64>,
    pub samples: usize,
    pub vacuous_precision: bool,
    pub violations: usize,
}

/// Test set, both scores and the audit in one go.
pub fn evaluate(
    model: &LiftedDomain,
    truth: &LiftedDomain,
    instances: &[Problem],
    walks: &WalkConfig,
    planner: Option<&PlannerConfig>,
    audit_cfg: &PlannerConfig,
    size: &str,
) -> Result<EvalReport, EvalError> {
    let set = build_test_set(truth, instances, walks, planner)?;
    let pr = precondition_pr(model, &set)?;
    let eff = effect_pr(model, &set)?;
    let audit = safety_audit(model, truth, instances, audit_cfg);
    Ok(EvalReport {
        domain: truth.name.clone(),
        size: size.to_string(),
        recall: pr.recall,
        precision: pr.precision,
        effect_precision: eff.precision,
        effect_recall: eff.recall,
        solved: audit.solved,
        timeout: audit.timeouts,
        numeric_exact: eff.numeric_exact,
        samples: set.num_samples(),
        vacuous_precision: pr.vacuous_precision,
        violations: audit.violations,
    })
}
