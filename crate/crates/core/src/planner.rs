//! Greedy best-first search over ground states, plus an adapter for external
//! Metric-FF style planners.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::env::{action_applicable, apply, goal_satisfied, EQ_TOLERANCE};
use crate::grounding::{ground, GroundTask, State, StateKey};
use crate::pddl::{parse_domain, parse_problem, serialize_domain, serialize_problem, Comparator, LiftedDomain, NumericCondition, Problem};

pub const DEFAULT_BUDGET: Duration = Duration::from_secs(60);
pub const DEFAULT_EXPANSION_CAP: usize = 5_000_000;
/// Default plan-line pattern. Also accepts the `step` prefix Metric-FF puts on the first line.
pub const DEFAULT_STEP_PATTERN: &str = r"^\s*(?:step\s+)?\d+[.:]\s+(.+)$";
const PLAN_MARKER: &str = "found legal plan";
const EMPTY_PLAN_MARKERS: [&str; 2] = ["goal can be simplified to TRUE", "The empty plan solves it"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Internal,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    /// Ground action labels, e.g. `move(r1,loc_a,loc_b)`.
    pub actions: Vec<String>,
    pub provenance: Provenance,
    pub stats: SearchStats,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Plan(Plan),
    NoPlan(SearchStats),
    Timeout(SearchStats),
    NoModel,
}

impl PlanOutcome {
    /// Short tag used in logs and CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            PlanOutcome::Plan(_) => "plan",
            PlanOutcome::NoPlan(_) => "no_plan",
            PlanOutcome::Timeout(_) => "timeout",
            PlanOutcome::NoModel => "no_model",
        }
    }

    pub fn plan(&self) -> Option<&Plan> {
        match self {
            PlanOutcome::Plan(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub budget: Duration,
    pub expansion_cap: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            budget: DEFAULT_BUDGET,
            expansion_cap: DEFAULT_EXPANSION_CAP,
        }
    }
}

/// Goal distance: unsatisfied Boolean goal literals plus normalized numeric violations.
pub fn heuristic(task: &GroundTask, s: &State) -> f64 {
    let g = &task.goal;
    let bools = g.pos.iter().filter(|&&i| !s.bools[i]).count() + g.neg.iter().filter(|&&i| s.bools[i]).count();
    let nums: f64 = g
        .numeric
        .iter()
        .map(|c| c.violation(&s.nums, EQ_TOLERANCE) / c.rhs.abs().max(1.0))
        .sum();
    bools as f64 + nums
}

struct Node {
    parent: usize,
    action: usize,
    state: State,
}

#[derive(PartialEq)]
struct Entry {
    h: f64,
    g: usize,
    order: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // BinaryHeap is a max-heap, so smaller keys compare greater
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .h
            .total_cmp(&self.h)
            .then(other.g.cmp(&self.g))
            .then(other.order.cmp(&self.order))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn extract(task: &GroundTask, nodes: &[Node], mut i: usize) -> Vec<String> {
    let mut out = Vec::new();
    while i != 0 {
        out.push(task.actions[nodes[i].action].label());
        i = nodes[i].parent;
    }
    out.reverse();
    out
}

/// GBFS on an already grounded task. Tie-breaks by lower g, then insertion order.
pub fn search(task: &GroundTask, cfg: &PlannerConfig) -> PlanOutcome {
    let start = Instant::now();
    let mut stats = SearchStats::default();
    let done = |stats: &mut SearchStats| stats.wall_time_s = start.elapsed().as_secs_f64();
    let found = |actions: Vec<String>, mut stats: SearchStats| {
        stats.wall_time_s = start.elapsed().as_secs_f64();
        PlanOutcome::Plan(Plan {
            actions,
            provenance: Provenance::Internal,
            stats,
        })
    };

    if goal_satisfied(task, &task.init) {
        return found(Vec::new(), stats);
    }
    if cfg.budget.is_zero() {
        done(&mut stats);
        return PlanOutcome::Timeout(stats);
    }
    let mut nodes = vec![Node {
        parent: 0,
        action: usize::MAX,
        state: task.init.clone(),
    }];
    let mut seen: HashSet<StateKey> = HashSet::from([task.init.key()]);
    let mut open = BinaryHeap::new();
    open.push((
        Entry {
            h: heuristic(task, &task.init),
            g: 0,
            order: 0,
        },
        0usize,
    ));
    while let Some((entry, idx)) = open.pop() {
        if stats.expanded % 256 == 0 && start.elapsed() > cfg.budget {
            done(&mut stats);
            return PlanOutcome::Timeout(stats);
        }
        if stats.expanded >= cfg.expansion_cap {
            break;
        }
        stats.expanded += 1;
        for (a, action) in task.actions.iter().enumerate() {
            let s = &nodes[idx].state;
            if !action_applicable(action, s) {
                continue;
            }
            let next = apply(action, s);
            if next.nums.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let key = next.key();
            if !seen.insert(key) {
                continue;
            }
            stats.generated += 1;
            let is_goal = goal_satisfied(task, &next);
            let h = heuristic(task, &next);
            nodes.push(Node {
                parent: idx,
                action: a,
                state: next,
            });
            let child = nodes.len() - 1;
            if is_goal {
                let plan = extract(task, &nodes, child);
                debug_assert!(validate_ground(task, &plan));
                return found(plan, stats);
            }
            open.push((
                Entry {
                    h,
                    g: entry.g + 1,
                    order: child,
                },
                child,
            ));
        }
    }
    done(&mut stats);
    PlanOutcome::NoPlan(stats)
}

/// Plans for `problem` under `model`. A model without actions gives `NoModel`.
pub fn plan(model: &LiftedDomain, problem: &Problem, budget: Duration) -> PlanOutcome {
    plan_with(
        model,
        problem,
        &PlannerConfig {
            budget,
            ..PlannerConfig::default()
        },
    )
}

pub fn plan_with(model: &LiftedDomain, problem: &Problem, cfg: &PlannerConfig) -> PlanOutcome {
    if model.actions.is_empty() {
        return PlanOutcome::NoModel;
    }
    match ground(model, problem) {
        Ok(task) => search(&task, cfg),
        Err(e) => {
            log::warn!("cannot ground model for planning: {e}");
            PlanOutcome::NoPlan(SearchStats::default())
        }
    }
}

/// True iff every step is applicable in turn and the final state is a goal.
pub fn validate_ground(task: &GroundTask, plan: &[String]) -> bool {
    let mut s = task.init.clone();
    for label in plan {
        let Some(a) = task.action_index(label) else {
            return false;
        };
        let action = &task.actions[a];
        if !action_applicable(action, &s) {
            return false;
        }
        s = apply(action, &s);
    }
    goal_satisfied(task, &s)
}

pub fn validate(model: &LiftedDomain, problem: &Problem, plan: &[String]) -> bool {
    match ground(model, problem) {
        Ok(task) => validate_ground(&task, plan),
        Err(_) => false,
    }
}

/// Breadth-first reference search, bounded by `max_states`.
/// Returns `Some(None)` when the reachable space is exhausted without a goal.
pub fn breadth_first(task: &GroundTask, max_states: usize) -> Option<Option<Vec<String>>> {
    if goal_satisfied(task, &task.init) {
        return Some(Some(Vec::new()));
    }
    let mut nodes = vec![Node {
        parent: 0,
        action: usize::MAX,
        state: task.init.clone(),
    }];
    let mut seen: HashSet<StateKey> = HashSet::from([task.init.key()]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(idx) = queue.pop_front() {
        for (a, action) in task.actions.iter().enumerate() {
            if !action_applicable(action, &nodes[idx].state) {
                continue;
            }
            let next = apply(action, &nodes[idx].state);
            if !seen.insert(next.key()) {
                continue;
            }
            if seen.len() > max_states {
                return None;
            }
            let goal = goal_satisfied(task, &next);
            nodes.push(Node {
                parent: idx,
                action: a,
                state: next,
            });
            if goal {
                return Some(Some(extract(task, &nodes, nodes.len() - 1)));
            }
            queue.push_back(nodes.len() - 1);
        }
    }
    Some(None)
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("external planner {0} is not available")]
    ExternalUnavailable(String),
    #[error("cannot parse planner output: {0}")]
    ParseFailure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ExternalPlanner {
    pub executable: PathBuf,
    pub step_pattern: Regex,
    /// Rewrite `x = c` preconditions as `c <= x <= c` before handing the model over.
    pub split_equalities: bool,
}

impl ExternalPlanner {
    pub fn new(executable: impl Into<PathBuf>) -> Self {
        ExternalPlanner {
            executable: executable.into(),
            step_pattern: Regex::new(DEFAULT_STEP_PATTERN).expect("valid default pattern"),
            split_equalities: false,
        }
    }

    pub fn available(&self) -> bool {
        resolve_executable(&self.executable).is_some()
    }
}

fn resolve_executable(exe: &Path) -> Option<PathBuf> {
    if exe.components().count() > 1 {
        return exe.is_file().then(|| exe.to_path_buf());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join(exe)).find(|p| p.is_file())
}

/// Replaces each equality precondition with a pair of inequalities.
pub fn split_equalities(model: &LiftedDomain) -> LiftedDomain {
    let mut out = model.clone();
    for a in &mut out.actions {
        a.num_pre = std::mem::take(&mut a.num_pre)
            .into_iter()
            .flat_map(|c| {
                if c.comparator == Comparator::Eq {
                    vec![
                        NumericCondition::canonical(c.lhs.clone(), Comparator::Le, c.rhs.clone()),
                        NumericCondition::canonical(c.lhs, Comparator::Ge, c.rhs),
                    ]
                } else {
                    vec![c]
                }
            })
            .collect();
    }
    out
}

/// Extracts the plan lines from planner stdout. `Ok(None)` when no plan was reported.
pub fn parse_plan_output(stdout: &str, pattern: &Regex) -> Result<Option<Vec<String>>, PlannerError> {
    if EMPTY_PLAN_MARKERS.iter().any(|m| stdout.contains(m)) {
        return Ok(Some(Vec::new()));
    }
    let Some(pos) = stdout.find(PLAN_MARKER) else {
        return Ok(None);
    };
    let mut steps = Vec::new();
    for line in stdout[pos..].lines().skip(1) {
        if line.trim().is_empty() {
            if steps.is_empty() {
                continue;
            }
            break;
        }
        match pattern.captures(line) {
            Some(c) => steps.push(c[1].trim().to_string()),
            None => return Err(PlannerError::ParseFailure(format!("unexpected line {line:?}"))),
        }
    }
    Ok(Some(steps))
}

fn run_with_timeout(cmd: &mut Command, budget: Duration) -> Result<Option<String>, PlannerError> {
    let mut child = cmd.stdout(Stdio::piped()).stderr(Stdio::null()).spawn()?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let deadline = Instant::now() + budget;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            let _ = reader.join();
            return Ok(None);
        }
        std::thread::sleep(Duration::from_millis(5));
    }
    Ok(Some(reader.join().unwrap_or_default()))
}

/// Runs `<exe> -o <domain> -f <problem>` and maps its plan onto ground labels.
pub fn plan_external(
    model_file: &Path,
    problem_file: &Path,
    planner: &ExternalPlanner,
    budget: Duration,
) -> Result<PlanOutcome, PlannerError> {
    let exe = resolve_executable(&planner.executable)
        .ok_or_else(|| PlannerError::ExternalUnavailable(planner.executable.display().to_string()))?;
    let domain = parse_domain(&std::fs::read_to_string(model_file)?)
        .map_err(|e| PlannerError::ParseFailure(format!("model file: {e}")))?;
    if domain.actions.is_empty() {
        return Ok(PlanOutcome::NoModel);
    }
    let problem = parse_problem(&std::fs::read_to_string(problem_file)?, &domain)
        .map_err(|e| PlannerError::ParseFailure(format!("problem file: {e}")))?;
    let task = ground(&domain, &problem).map_err(|e| PlannerError::ParseFailure(e.to_string()))?;
    let start = Instant::now();
    let stats = |start: Instant| SearchStats {
        wall_time_s: start.elapsed().as_secs_f64(),
        ..SearchStats::default()
    };
    if budget.is_zero() {
        return Ok(PlanOutcome::Timeout(stats(start)));
    }
    let output = run_with_timeout(Command::new(exe).arg("-o").arg(model_file).arg("-f").arg(problem_file), budget)?;
    let Some(stdout) = output else {
        return Ok(PlanOutcome::Timeout(stats(start)));
    };
    let Some(steps) = parse_plan_output(&stdout, &planner.step_pattern)? else {
        return Ok(PlanOutcome::NoPlan(stats(start)));
    };
    let actions = steps
        .iter()
        .map(|s| {
            task.action_index_from_plan_step(s)
                .map(|i| task.actions[i].label())
                .map_err(|e| PlannerError::ParseFailure(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PlanOutcome::Plan(Plan {
        actions,
        provenance: Provenance::External,
        stats: stats(start),
    }))
}

/// Writes `model` and `problem` into `dir` and calls [`plan_external`].
pub fn plan_external_model(
    model: &LiftedDomain,
    problem: &Problem,
    planner: &ExternalPlanner,
    budget: Duration,
    dir: &Path,
) -> Result<PlanOutcome, PlannerError> {
    if model.actions.is_empty() {
        return Ok(PlanOutcome::NoModel);
    }
    let model = if planner.split_equalities {
        split_equalities(model)
    } else {
        model.clone()
    };
    let d = dir.join("model.pddl");
    let p = dir.join("problem.pddl");
    std::fs::write(&d, serialize_domain(&model))?;
    std::fs::write(&p, serialize_problem(problem))?;
    plan_external(&d, &p, planner, budget)
}

/// Prints a plan in the Metric-FF layout, so this planner can stand in for it.
pub fn format_ff_output(task: &GroundTask, outcome: &PlanOutcome) -> String {
    match outcome {
        PlanOutcome::Plan(p) if p.is_empty() => "ff: goal can be simplified to TRUE. The empty plan solves it\n".into(),
        PlanOutcome::Plan(p) => {
            let mut out = String::from("ff: found legal plan as follows\n\n");
            for (i, label) in p.actions.iter().enumerate() {
                let idx = task.action_index(label).expect("plan label from task");
                let a = &task.actions[idx];
                let mut words = vec![a.schema.to_uppercase()];
                words.extend(a.args.iter().map(|x| x.to_uppercase()));
                let prefix = if i == 0 { "step" } else { "" };
                out.push_str(&format!("{prefix:>4} {i:>4}: {}\n", words.join(" ")));
            }
            out.push_str(&format!("\ntime spent: {:.2} seconds total time\n", p.stats.wall_time_s));
            out
        }
        PlanOutcome::NoPlan(_) => "ff: goal can't be reached\nproblem proven unsolvable.\n".into(),
        PlanOutcome::Timeout(_) => "ff: search budget exhausted\n".into(),
        PlanOutcome::NoModel => "ff: domain has no actions\n".into(),
    }
}
