//! Grounding of a lifted domain and problem into fixed index tables.
//!
//! Ground atoms, ground function terms and ground actions are each ordered
//! lexicographically (name, then argument tuple). Observations lay out all
//! fluents as 0/1, then all function values, then the optional goal block.

use std::collections::{BTreeMap, HashMap};

use serde_json::json;
use thiserror::Error;

use crate::pddl::{
    for_each_binding, rat_to_f64, Atom, Comparator, FuncTerm, LiftedDomain, LinearExpr, Literal, NumericCondition,
    Problem,
};

/// Default cap on the number of ground actions and on the state size.
pub const DEFAULT_GROUNDING_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroundingError {
    #[error("grounding produces {count} {what}, above the cap of {cap}")]
    CombinatorialLimit { what: &'static str, count: u128, cap: usize },
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("unknown action label {0}")]
    UnknownLabel(String),
}

/// Linear expression over function indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundLinear {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl GroundLinear {
    pub fn eval(&self, nums: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, &(i, c)| acc + c * nums[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundCondition {
    pub lhs: GroundLinear,
    pub comparator: Comparator,
    pub rhs: f64,
}

impl GroundCondition {
    pub fn holds(&self, nums: &[f64], eq_tol: f64) -> bool {
        self.comparator.holds_f64(self.lhs.eval(nums), self.rhs, eq_tol)
    }

    /// How far the state is from satisfying the condition, 0 when it holds.
    pub fn violation(&self, nums: &[f64], eq_tol: f64) -> f64 {
        if self.holds(nums, eq_tol) {
            0.0
        } else {
            (self.lhs.eval(nums) - self.rhs).abs()
        }
    }
}

/// `nums[target] := value(pre-state)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundEffect {
    pub target: usize,
    pub value: GroundLinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<usize>,
    pub pre_neg: Vec<usize>,
    pub num_pre: Vec<GroundCondition>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
    pub num_effects: Vec<GroundEffect>,
}

impl GroundAction {
    pub fn label(&self) -> String {
        action_label_of(&self.schema, &self.args)
    }
}

pub fn action_label_of(schema: &str, args: &[String]) -> String {
    format!("{}({})", schema, args.join(","))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundGoal {
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
    pub numeric: Vec<GroundCondition>,
}

impl GroundGoal {
    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty() && self.numeric.is_empty()
    }
}

/// Assignment of every ground fluent and function.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub bools: Vec<bool>,
    pub nums: Vec<f64>,
}

/// Hashable identity of a state: fluent bits plus exact float bit patterns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Vec<u64>);

impl State {
    pub fn key(&self) -> StateKey {
        let mut words = vec![0u64; self.bools.len().div_ceil(64)];
        for (i, &b) in self.bools.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        // -0.0 and 0.0 are the same state
        words.extend(self.nums.iter().map(|x| (x + 0.0).to_bits()));
        StateKey(words)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTask {
    pub domain_name: String,
    pub problem_name: String,
    pub fluents: Vec<Atom>,
    pub functions: Vec<FuncTerm>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal: GroundGoal,
    /// One entry per Boolean goal literal: 1.0 for a positive literal, 0.0 for a negated one.
    pub goal_features: Vec<f64>,
    fluent_index: HashMap<Atom, usize>,
    function_index: HashMap<FuncTerm, usize>,
    label_index: HashMap<String, usize>,
}

fn binding_count(domain: &LiftedDomain, problem: &Problem, params: &[crate::pddl::Parameter]) -> u128 {
    params
        .iter()
        .map(|p| problem.objects_of_type(domain, &p.ty).count() as u128)
        .product()
}

fn bind(arg: &str, sub: &BTreeMap<&str, &str>) -> String {
    sub.get(arg).map(|s| s.to_string()).unwrap_or_else(|| arg.to_string())
}

impl GroundTask {
    pub fn num_fluents(&self) -> usize {
        self.fluents.len()
    }

    pub fn num_functions(&self) -> usize {
        self.functions.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn obs_len(&self, include_goal: bool) -> usize {
        self.fluents.len() + self.functions.len() + if include_goal { self.goal_features.len() } else { 0 }
    }

    pub fn fluent_index(&self, atom: &Atom) -> Option<usize> {
        self.fluent_index.get(atom).copied()
    }

    pub fn function_index(&self, term: &FuncTerm) -> Option<usize> {
        self.function_index.get(term).copied()
    }

    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    pub fn action_label(&self, i: usize) -> Result<String, GroundingError> {
        self.actions.get(i).map(GroundAction::label).ok_or(GroundingError::IndexOutOfRange {
            index: i,
            size: self.actions.len(),
        })
    }

    /// Index of the action named by a plan line such as `(MOVE R1 A B)` or `move r1 a b`.
    pub fn action_index_from_plan_step(&self, step: &str) -> Result<usize, GroundingError> {
        let cleaned = step.trim().trim_start_matches('(').trim_end_matches(')').to_lowercase();
        let mut parts = cleaned.split_whitespace();
        let name = parts.next().unwrap_or("");
        let args: Vec<String> = parts.map(str::to_string).collect();
        let label = action_label_of(name, &args);
        self.action_index(&label).ok_or(GroundingError::UnknownLabel(label))
    }

    /// Debug dump of the index tables.
    pub fn layout_json(&self) -> serde_json::Value {
        json!({
            "fluents": self.fluents.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "functions": self.functions.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "actions": self.actions.iter().map(GroundAction::label).collect::<Vec<_>>(),
        })
    }

    fn linear(&self, e: &LinearExpr) -> GroundLinear {
        GroundLinear {
            constant: rat_to_f64(&e.constant),
            terms: e
                .terms
                .iter()
                .map(|(t, c)| (self.function_index[t], rat_to_f64(c)))
                .collect(),
        }
    }

    fn condition(&self, c: &NumericCondition) -> GroundCondition {
        GroundCondition {
            lhs: self.linear(&c.lhs),
            comparator: c.comparator,
            rhs: rat_to_f64(&c.rhs),
        }
    }
}

/// Instantiates every type-consistent binding of every schema.
///
/// Bindings that violate a static (in)equality literal of the schema are
/// not instantiated, so the example `move` yields exactly its two
/// location-changing instances.
pub fn ground(domain: &LiftedDomain, problem: &Problem) -> Result<GroundTask, GroundingError> {
    ground_with_cap(domain, problem, DEFAULT_GROUNDING_CAP)
}

pub fn ground_with_cap(domain: &LiftedDomain, problem: &Problem, cap: usize) -> Result<GroundTask, GroundingError> {
    let mut state_size: u128 = 0;
    for p in &domain.predicates {
        state_size += binding_count(domain, problem, &p.params);
    }
    for f in &domain.functions {
        state_size += binding_count(domain, problem, &f.params);
    }
    if state_size > cap as u128 {
        return Err(GroundingError::CombinatorialLimit {
            what: "state variables",
            count: state_size,
            cap,
        });
    }
    let action_bound: u128 = domain
        .actions
        .iter()
        .map(|a| binding_count(domain, problem, &a.params))
        .sum();
    if action_bound > cap as u128 {
        return Err(GroundingError::CombinatorialLimit {
            what: "actions",
            count: action_bound,
            cap,
        });
    }

    let mut fluents = Vec::new();
    for p in &domain.predicates {
        let _ = for_each_binding::<()>(domain, problem, &p.params, &mut |args| {
            fluents.push(Atom::new(p.name.clone(), args.to_vec()));
            Ok(())
        });
    }
    fluents.sort();
    let mut functions = Vec::new();
    for f in &domain.functions {
        let _ = for_each_binding::<()>(domain, problem, &f.params, &mut |args| {
            functions.push(FuncTerm::new(f.name.clone(), args.to_vec()));
            Ok(())
        });
    }
    functions.sort();

    let fluent_index: HashMap<Atom, usize> = fluents.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    let function_index: HashMap<FuncTerm, usize> =
        functions.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();

    let init = State {
        bools: fluents.iter().map(|a| problem.init_atoms.contains(a)).collect(),
        nums: functions
            .iter()
            .map(|f| problem.init_values.get(f).map(rat_to_f64).unwrap_or(0.0))
            .collect(),
    };

    let mut task = GroundTask {
        domain_name: domain.name.clone(),
        problem_name: problem.name.clone(),
        fluents,
        functions,
        actions: Vec::new(),
        init,
        goal: GroundGoal::default(),
        goal_features: Vec::new(),
        fluent_index,
        function_index,
        label_index: HashMap::new(),
    };

    for l in &problem.goal_literals {
        match l {
            Literal::Atom { atom, positive } => {
                let i = task.fluent_index[atom];
                if *positive {
                    task.goal.pos.push(i);
                } else {
                    task.goal.neg.push(i);
                }
                task.goal_features.push(if *positive { 1.0 } else { 0.0 });
            }
            Literal::Equality { .. } => {}
        }
    }
    task.goal.numeric = problem.goal_numeric.iter().map(|c| task.condition(c)).collect();
    let static_goal_false = problem.goal_literals.iter().any(|l| match l {
        Literal::Equality { left, right, positive } => (left == right) != *positive,
        _ => false,
    });
    if static_goal_false {
        // unsatisfiable goal: encode as 0 >= 1
        task.goal.numeric.push(GroundCondition {
            lhs: GroundLinear::default(),
            comparator: Comparator::Ge,
            rhs: 1.0,
        });
    }

    let mut actions = Vec::new();
    for schema in &domain.actions {
        let _ = for_each_binding::<()>(domain, problem, &schema.params, &mut |args| {
            let sub: BTreeMap<&str, &str> = schema
                .params
                .iter()
                .map(|p| p.name.as_str())
                .zip(args.iter().map(String::as_str))
                .collect();
            let mut ga = GroundAction {
                schema: schema.name.clone(),
                args: args.to_vec(),
                pre_pos: Vec::new(),
                pre_neg: Vec::new(),
                num_pre: Vec::new(),
                add: Vec::new(),
                del: Vec::new(),
                num_effects: Vec::new(),
            };
            for l in &schema.bool_pre {
                match l {
                    Literal::Atom { atom, positive } => {
                        let i = task.fluent_index[&atom.map_args(|a| bind(a, &sub))];
                        if *positive {
                            ga.pre_pos.push(i);
                        } else {
                            ga.pre_neg.push(i);
                        }
                    }
                    Literal::Equality { left, right, positive } => {
                        if (bind(left, &sub) == bind(right, &sub)) != *positive {
                            return Ok(());
                        }
                    }
                }
            }
            for c in &schema.num_pre {
                let gc = c.map_terms(|t| t.map_args(|a| bind(a, &sub)));
                ga.num_pre.push(task.condition(&gc));
            }
            for a in &schema.add_effects {
                ga.add.push(task.fluent_index[&a.map_args(|x| bind(x, &sub))]);
            }
            for a in &schema.del_effects {
                let i = task.fluent_index[&a.map_args(|x| bind(x, &sub))];
                // delete-then-add: an atom both added and deleted ends up true
                if !ga.add.contains(&i) {
                    ga.del.push(i);
                }
            }
            let mut targets: BTreeMap<usize, LinearExpr> = BTreeMap::new();
            for e in &schema.num_effects {
                let ge = e.map_terms(|t| t.map_args(|a| bind(a, &sub)));
                let target = task.function_index[&ge.target];
                let value = ge.as_assignment();
                if let Some(prev) = targets.get(&target) {
                    if *prev != value {
                        log::warn!(
                            "{} assigns {} twice with different values; binding skipped",
                            action_label_of(&schema.name, args),
                            ge.target
                        );
                        return Ok(());
                    }
                }
                targets.insert(target, value);
            }
            ga.num_effects = targets
                .iter()
                .map(|(&target, value)| GroundEffect {
                    target,
                    value: task.linear(value),
                })
                .collect();
            for v in [&mut ga.pre_pos, &mut ga.pre_neg, &mut ga.add, &mut ga.del] {
                v.sort_unstable();
                v.dedup();
            }
            actions.push(ga);
            Ok(())
        });
    }
    actions.sort_by(|a, b| (&a.schema, &a.args).cmp(&(&b.schema, &b.args)));
    task.label_index = actions.iter().enumerate().map(|(i, a)| (a.label(), i)).collect();
    task.actions = actions;
    Ok(task)
}

/// Flat observation: fluents as 0/1, function values, then the goal block when requested.
pub fn encode_state(task: &GroundTask, s: &State, include_goal: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(task.obs_len(include_goal));
    out.extend(s.bools.iter().map(|&b| if b { 1.0 } else { 0.0 }));
    out.extend_from_slice(&s.nums);
    if include_goal {
        out.extend_from_slice(&task.goal_features);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem};

    const DOMAIN: &str = include_str!("../../../domains/example/domain.pddl");
    const PROBLEM: &str = include_str!("../../../domains/example/problem.pddl");

    fn example() -> GroundTask {
        let d = parse_domain(DOMAIN).unwrap();
        let p = parse_problem(PROBLEM, &d).unwrap();
        ground(&d, &p).unwrap()
    }

    #[test]
    fn example_has_two_move_actions() {
        let t = example();
        let labels: Vec<String> = t.actions.iter().map(GroundAction::label).collect();
        assert_eq!(labels, vec!["move(r1,loc_a,loc_b)", "move(r1,loc_b,loc_a)"]);
        assert_eq!(t.action_label(0).unwrap(), "move(r1,loc_a,loc_b)");
    }

    #[test]
    fn example_initial_observation() {
        let t = example();
        assert_eq!(encode_state(&t, &t.init, false), vec![1.0, 0.0, 10.0]);
        assert_eq!(encode_state(&t, &t.init, true), vec![1.0, 0.0, 10.0, 1.0]);
        let zero = State {
            bools: vec![false; 2],
            nums: vec![0.0],
        };
        assert_eq!(encode_state(&t, &zero, false), vec![0.0; 3]);
    }

    #[test]
    fn labels_round_trip() {
        let t = example();
        for i in 0..t.num_actions() {
            assert_eq!(t.action_index(&t.action_label(i).unwrap()), Some(i));
        }
        assert!(matches!(t.action_label(2), Err(GroundingError::IndexOutOfRange { .. })));
        assert_eq!(t.action_index_from_plan_step("(MOVE R1 LOC_B LOC_A)").unwrap(), 1);
    }

    #[test]
    fn no_actions_means_every_label_errors() {
        let d = parse_domain(DOMAIN).unwrap();
        let p = parse_problem(
            "(define (problem e) (:domain robot-fuel) (:objects r1 - robot) (:init (= (fuel r1) 1)) (:goal (and)))",
            &d,
        )
        .unwrap();
        let t = ground(&d, &p).unwrap();
        assert_eq!(t.num_actions(), 0);
        assert!(t.action_label(0).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let d = parse_domain(DOMAIN).unwrap();
        let p = parse_problem(PROBLEM, &d).unwrap();
        assert!(matches!(
            ground_with_cap(&d, &p, 2),
            Err(GroundingError::CombinatorialLimit { .. })
        ));
    }

    #[test]
    fn grounding_is_deterministic() {
        let a = example();
        let b = example();
        assert_eq!(a.layout_json().to_string(), b.layout_json().to_string());
        assert_eq!(a, b);
    }

    #[test]
    fn state_key_ignores_signed_zero() {
        let a = State {
            bools: vec![true],
            nums: vec![0.0],
        };
        let b = State {
            bools: vec![true],
            nums: vec![-0.0],
        };
        assert_eq!(a.key(), b.key());
    }
}
