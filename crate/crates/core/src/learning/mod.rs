//! Safe action-model learning from fully observed trajectories.
//!
//! Per action schema: Boolean preconditions are the literals true in every
//! observed pre-state, numeric preconditions are the exact convex hull of
//! the observed pre-state function values, and effects are read off state
//! differences (Boolean) or solved as exact linear maps (numeric). An action
//! is handed to the planner only when all of its numeric effects are
//! uniquely determined by the data.

pub mod hull;
pub mod linalg;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_traits::{One, Zero};
use serde_json::json;
use thiserror::Error;

use crate::env::{DumpRecord, StateMap, Trajectory};
use crate::grounding::{GroundTask, State};
use crate::pddl::{
    rat_from_f64, rat_to_f64, ActionSchema, Atom, Comparator, EffectOp, FuncTerm, LiftedDomain, LinearExpr, Literal,
    NumericCondition, NumericEffect, Parameter, Rational,
};
use hull::convex_hull;
use linalg::{RowBasis, Vector};

/// Maximum number of distinct pre-state vectors fed to the hull per action.
pub const DEFAULT_SAMPLE_CAP: usize = 2000;
/// Maximum number of failed attempts kept per action (all are counted).
pub const DEFAULT_FAILURE_CAP: usize = 10_000;
pub const EFFECT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("no successful execution of {0}")]
    NoSuccesses(String),
    #[error("inconsistent observations for {schema}: {detail}")]
    InconsistentData { schema: String, detail: String },
    #[error("trajectory does not match the domain: {0}")]
    DomainMismatch(String),
}

/// Read access to a full state by ground atom / function term.
pub trait StateLookup {
    fn atom(&self, a: &Atom) -> Option<bool>;
    fn value(&self, f: &FuncTerm) -> Option<f64>;
}

pub struct TaskState<'a> {
    pub task: &'a GroundTask,
    pub state: &'a State,
}

impl StateLookup for TaskState<'_> {
    fn atom(&self, a: &Atom) -> Option<bool> {
        self.task.fluent_index(a).map(|i| self.state.bools[i])
    }

    fn value(&self, f: &FuncTerm) -> Option<f64> {
        self.task.function_index(f).map(|i| self.state.nums[i])
    }
}

impl StateLookup for StateMap {
    fn atom(&self, a: &Atom) -> Option<bool> {
        self.atoms.get(&a.to_string()).copied()
    }

    fn value(&self, f: &FuncTerm) -> Option<f64> {
        self.values.get(&f.to_string()).copied()
    }
}

/// Every lifted atom and function term an action schema can refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    pub schema: String,
    pub params: Vec<Parameter>,
    pub atoms: Vec<Atom>,
    pub funcs: Vec<FuncTerm>,
    /// Parameter pairs whose types can bind the same object.
    pub eq_pairs: Vec<(usize, usize)>,
}

fn param_tuples(sig: &LiftedDomain, params: &[Parameter], slots: &[Parameter]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for slot in slots {
        let fits: Vec<&Parameter> = params.iter().filter(|p| sig.is_subtype(&p.ty, &slot.ty)).collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                fits.iter().map(move |p| {
                    let mut t = prefix.clone();
                    t.push(p.name.clone());
                    t
                })
            })
            .collect();
    }
    out
}

impl Vocabulary {
    pub fn new(sig: &LiftedDomain, schema: &ActionSchema) -> Self {
        let mut atoms = Vec::new();
        for p in &sig.predicates {
            for args in param_tuples(sig, &schema.params, &p.params) {
                atoms.push(Atom::new(p.name.clone(), args));
            }
        }
        let mut funcs = Vec::new();
        for f in &sig.functions {
            for args in param_tuples(sig, &schema.params, &f.params) {
                funcs.push(FuncTerm::new(f.name.clone(), args));
            }
        }
        atoms.sort();
        funcs.sort();
        let mut eq_pairs = Vec::new();
        for i in 0..schema.params.len() {
            for j in i + 1..schema.params.len() {
                let (a, b) = (&schema.params[i].ty, &schema.params[j].ty);
                if sig.is_subtype(a, b) || sig.is_subtype(b, a) {
                    eq_pairs.push((i, j));
                }
            }
        }
        Vocabulary {
            schema: schema.name.clone(),
            params: schema.params.clone(),
            atoms,
            funcs,
            eq_pairs,
        }
    }

    fn substitution<'a>(&'a self, binding: &'a [String]) -> HashMap<&'a str, &'a str> {
        self.params
            .iter()
            .map(|p| p.name.as_str())
            .zip(binding.iter().map(String::as_str))
            .collect()
    }

    pub fn ground_atom(&self, i: usize, binding: &[String]) -> Atom {
        let sub = self.substitution(binding);
        self.atoms[i].map_args(|a| sub.get(a.as_str()).map_or_else(|| a.clone(), |o| o.to_string()))
    }

    pub fn ground_func(&self, i: usize, binding: &[String]) -> FuncTerm {
        let sub = self.substitution(binding);
        self.funcs[i].map_args(|a| sub.get(a.as_str()).map_or_else(|| a.clone(), |o| o.to_string()))
    }

    fn eq_literal(&self, k: usize, positive: bool) -> Literal {
        let (i, j) = self.eq_pairs[k];
        Literal::Equality {
            left: self.params[i].name.clone(),
            right: self.params[j].name.clone(),
            positive,
        }
    }
}

/// Values of the vocabulary in one state under one binding.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub atoms: Vec<bool>,
    pub nums: Vec<f64>,
}

impl Projection {
    /// Readable form keyed by lifted atom / function term.
    pub fn describe(&self, vocab: &Vocabulary) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (a, v) in vocab.atoms.iter().zip(&self.atoms) {
            out.insert(a.to_string(), v.to_string());
        }
        for (f, v) in vocab.funcs.iter().zip(&self.nums) {
            out.insert(f.to_string(), v.to_string());
        }
        out
    }
}

/// Restricts a state to the atoms and functions whose arguments all come
/// from `binding`, renamed to the schema's parameters.
pub fn lift(vocab: &Vocabulary, binding: &[String], state: &dyn StateLookup) -> Result<Projection, LearnError> {
    let missing = |what: String| LearnError::DomainMismatch(format!("state has no value for {what}"));
    let atoms = (0..vocab.atoms.len())
        .map(|i| {
            let g = vocab.ground_atom(i, binding);
            state.atom(&g).ok_or_else(|| missing(g.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let nums = (0..vocab.funcs.len())
        .map(|i| {
            let g = vocab.ground_func(i, binding);
            state.value(&g).ok_or_else(|| missing(g.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Projection { atoms, nums })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedTransition {
    pub binding: Vec<String>,
    pub applicable: bool,
    /// Value of each equality pair of the vocabulary under the binding.
    pub eq: Vec<bool>,
    /// For each vocabulary atom, the first vocabulary atom naming the same ground atom.
    pub alias: Vec<usize>,
    pub pre: Projection,
    pub post: Projection,
}

type SampleKey = (Vec<bool>, Vec<usize>, Vec<bool>, Vec<bool>, Vec<u64>, Vec<u64>);

impl ObservedTransition {
    fn key(&self) -> SampleKey {
        let bits = |v: &[f64]| v.iter().map(|x| (x + 0.0).to_bits()).collect::<Vec<_>>();
        (
            self.eq.clone(),
            self.alias.clone(),
            self.pre.atoms.clone(),
            self.post.atoms.clone(),
            bits(&self.pre.nums),
            bits(&self.post.nums),
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ActionDataset {
    pub schema: String,
    /// Distinct successful transitions (as seen through the vocabulary).
    pub successes: Vec<ObservedTransition>,
    /// Failed attempts, kept up to the failure cap.
    pub failures: Vec<ObservedTransition>,
    pub success_count: usize,
    pub failure_count: usize,
    seen: HashSet<SampleKey>,
}

impl ActionDataset {
    pub fn new(schema: impl Into<String>) -> Self {
        ActionDataset {
            schema: schema.into(),
            ..Default::default()
        }
    }
}

/// Per-action datasets accumulated from the trajectory set.
#[derive(Debug, Clone)]
pub struct Datasets {
    pub signature: LiftedDomain,
    pub vocab: BTreeMap<String, Vocabulary>,
    pub actions: BTreeMap<String, ActionDataset>,
    pub trajectories: usize,
    pub failure_cap: usize,
}

impl Datasets {
    pub fn new(signature: &LiftedDomain) -> Self {
        let vocab = signature
            .actions
            .iter()
            .map(|a| (a.name.clone(), Vocabulary::new(signature, a)))
            .collect();
        let actions = signature
            .actions
            .iter()
            .map(|a| (a.name.clone(), ActionDataset::new(a.name.clone())))
            .collect();
        Datasets {
            signature: signature.signature(),
            vocab,
            actions,
            trajectories: 0,
            failure_cap: DEFAULT_FAILURE_CAP,
        }
    }

    pub fn total_successes(&self) -> usize {
        self.actions.values().map(|d| d.success_count).sum()
    }

    /// Records one attempt; returns true when it is a new distinct success.
    pub fn add_transition(
        &mut self,
        schema: &str,
        binding: &[String],
        applicable: bool,
        before: &dyn StateLookup,
        after: &dyn StateLookup,
    ) -> Result<bool, LearnError> {
        let vocab = self
            .vocab
            .get(schema)
            .ok_or_else(|| LearnError::DomainMismatch(format!("unknown action {schema}")))?;
        if vocab.params.len() != binding.len() {
            return Err(LearnError::DomainMismatch(format!(
                "{schema} takes {} arguments, got {}",
                vocab.params.len(),
                binding.len()
            )));
        }
        let pre = lift(vocab, binding, before)?;
        let post = if applicable { lift(vocab, binding, after)? } else { pre.clone() };
        let grounded: Vec<Atom> = (0..vocab.atoms.len()).map(|i| vocab.ground_atom(i, binding)).collect();
        let alias = grounded
            .iter()
            .map(|g| grounded.iter().position(|h| h == g).expect("present"))
            .collect();
        let eq = vocab.eq_pairs.iter().map(|&(i, j)| binding[i] == binding[j]).collect();
        let obs = ObservedTransition {
            binding: binding.to_vec(),
            applicable,
            eq,
            alias,
            pre,
            post,
        };
        let data = self.actions.get_mut(schema).expect("vocabulary and datasets share keys");
        if applicable {
            data.success_count += 1;
            if data.seen.insert(obs.key()) {
                data.successes.push(obs);
                return Ok(true);
            }
        } else {
            data.failure_count += 1;
            if data.failures.len() < self.failure_cap {
                data.failures.push(obs);
            }
        }
        Ok(false)
    }

    /// Adds every attempt of a trajectory; returns the number of new distinct successes.
    pub fn add_trajectory(&mut self, task: &GroundTask, traj: &Trajectory) -> Result<usize, LearnError> {
        for tr in &traj.transitions {
            let a = &task.actions[tr.action];
            match self.vocab.get(&a.schema) {
                Some(v) if v.params.len() == a.args.len() => {}
                _ => return Err(LearnError::DomainMismatch(format!("action {} not in the domain", a.label()))),
            }
        }
        let mut fresh = 0;
        for tr in &traj.transitions {
            let a = &task.actions[tr.action];
            let before = TaskState { task, state: &tr.before };
            let after = TaskState { task, state: &tr.after };
            fresh += usize::from(self.add_transition(&a.schema, &a.args, tr.applicable, &before, &after)?);
        }
        if !traj.is_empty() {
            self.trajectories += 1;
        }
        Ok(fresh)
    }

    /// Adds one episode read back from a transition dump.
    pub fn add_dump_episode(&mut self, records: &[DumpRecord]) -> Result<usize, LearnError> {
        let mut fresh = 0;
        for r in records {
            let (schema, args) = parse_label(&r.action)
                .ok_or_else(|| LearnError::DomainMismatch(format!("bad action label {}", r.action)))?;
            fresh += usize::from(self.add_transition(&schema, &args, r.applicable, &r.before, &r.after)?);
        }
        if !records.is_empty() {
            self.trajectories += 1;
        }
        Ok(fresh)
    }
}

/// Splits `name(a,b)` into its parts.
pub fn parse_label(label: &str) -> Option<(String, Vec<String>)> {
    let (name, rest) = label.split_once('(')?;
    let inner = rest.strip_suffix(')')?;
    let args = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|s| s.trim().to_string()).collect()
    };
    Some((name.trim().to_string(), args))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BooleanModel {
    pub pre: BTreeSet<Literal>,
    pub add: BTreeSet<Atom>,
    pub del: BTreeSet<Atom>,
    /// Some effect could not be attributed to a single lifted atom.
    pub ambiguous: bool,
}

fn no_successes(vocab: &Vocabulary, d: &ActionDataset) -> Result<(), LearnError> {
    if d.successes.is_empty() {
        Err(LearnError::NoSuccesses(vocab.schema.clone()))
    } else {
        Ok(())
    }
}

/// Intersection of pre-state literals; add/delete effects from state differences.
pub fn learn_boolean(vocab: &Vocabulary, d: &ActionDataset) -> Result<BooleanModel, LearnError> {
    no_successes(vocab, d)?;
    let s = &d.successes;
    let n = vocab.atoms.len();
    let mut pre = BTreeSet::new();
    for i in 0..n {
        let v = s[0].pre.atoms[i];
        if s.iter().all(|t| t.pre.atoms[i] == v) {
            pre.insert(Literal::Atom {
                atom: vocab.atoms[i].clone(),
                positive: v,
            });
        }
    }
    for k in 0..vocab.eq_pairs.len() {
        let v = s[0].eq[k];
        if s.iter().all(|t| t.eq[k] == v) {
            pre.insert(vocab.eq_literal(k, v));
        }
    }

    let group = |t: &ObservedTransition, i: usize| -> Vec<usize> { (0..n).filter(|&j| t.alias[j] == t.alias[i]).collect() };

    // An add effect is always true afterwards.
    let add: Vec<bool> = (0..n)
        .map(|i| s.iter().any(|t| !t.pre.atoms[i] && t.post.atoms[i]) && s.iter().all(|t| t.post.atoms[i]))
        .collect();
    // A delete effect is false afterwards unless an add effect names the same ground atom.
    let del: Vec<bool> = (0..n)
        .map(|i| {
            s.iter().any(|t| t.pre.atoms[i] && !t.post.atoms[i])
                && s.iter().all(|t| !t.post.atoms[i] || group(t, i).iter().any(|&j| add[j]))
        })
        .collect();

    let mut ambiguous = false;
    for (flags, pre_v, post_v) in [(&add, false, true), (&del, true, false)] {
        for i in (0..n).filter(|&i| flags[i]) {
            let confirmed = s.iter().any(|t| {
                t.pre.atoms[i] == pre_v
                    && t.post.atoms[i] == post_v
                    && group(t, i).iter().filter(|&&j| flags[j]).count() == 1
            });
            ambiguous |= !confirmed;
        }
    }

    for t in s {
        for i in 0..n {
            let g = group(t, i);
            let predicted = if g.iter().any(|&j| add[j]) {
                true
            } else if g.iter().any(|&j| del[j]) {
                false
            } else {
                t.pre.atoms[i]
            };
            if predicted != t.post.atoms[i] {
                return Err(LearnError::InconsistentData {
                    schema: vocab.schema.clone(),
                    detail: format!("{} changes inconsistently", vocab.atoms[i]),
                });
            }
        }
    }

    let pick = |flags: &[bool]| -> BTreeSet<Atom> { (0..n).filter(|&i| flags[i]).map(|i| vocab.atoms[i].clone()).collect() };
    Ok(BooleanModel {
        pre,
        add: pick(&add),
        del: pick(&del),
        ambiguous,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericPreconditions {
    pub conditions: BTreeSet<NumericCondition>,
    /// Dimension of the affine hull of the observed pre-states.
    pub dim: usize,
    pub cap_applied: bool,
}

fn linear_over(vocab: &Vocabulary, coeffs: &[Rational]) -> LinearExpr {
    let mut e = LinearExpr::default();
    for (f, c) in vocab.funcs.iter().zip(coeffs) {
        if !c.is_zero() {
            e.terms.insert(f.clone(), c.clone());
        }
    }
    e
}

/// Convex hull of the successful pre-states over the schema's functions.
pub fn learn_numeric_preconditions(
    vocab: &Vocabulary,
    d: &ActionDataset,
    sample_cap: usize,
) -> Result<NumericPreconditions, LearnError> {
    no_successes(vocab, d)?;
    if vocab.funcs.is_empty() {
        return Ok(NumericPreconditions {
            conditions: BTreeSet::new(),
            dim: 0,
            cap_applied: false,
        });
    }
    // Finite floats convert to rationals exactly and in order, so sorting and
    // deduplicating before the conversion gives the same points.
    let mut raw: Vec<Vec<f64>> = d
        .successes
        .iter()
        .map(|t| t.pre.nums.iter().map(|&x| x + 0.0).collect())
        .collect();
    raw.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    raw.dedup();
    let cap_applied = raw.len() > sample_cap.max(1);
    if cap_applied {
        // fewer points give a smaller hull, which stays safe
        let k = sample_cap.max(1);
        let len = raw.len();
        raw = (0..k).map(|i| raw[i * len / k].clone()).collect();
    }
    let points: Vec<Vector> = raw.iter().map(|p| p.iter().map(|&x| rat_from_f64(x)).collect()).collect();
    let poly = convex_hull(&points);

    // Canonical description of the affine hull: reduced basis of its normals.
    let mut normals: Vec<Vector> = poly.equalities.iter().map(|(a, _)| a.clone()).collect();
    linalg::rref(&mut normals);
    let mut conditions = BTreeSet::new();
    for a in normals {
        let c = linalg::dot(&a, &points[0]);
        conditions.insert(NumericCondition::canonical(linear_over(vocab, &a), Comparator::Eq, c));
    }
    for (a, c) in &poly.inequalities {
        conditions.insert(NumericCondition::canonical(linear_over(vocab, a), Comparator::Le, c.clone()));
    }
    Ok(NumericPreconditions {
        conditions,
        dim: poly.dim,
        cap_applied,
    })
}

/// Post-state value of a function as a linear map of the pre-state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EffectModel {
    Known { coeffs: Vec<Rational>, constant: Rational },
    /// The observations do not pin the map down.
    Unknown,
}

/// Solves `post(g) = w · pre + b` for every function that ever changed.
pub fn learn_numeric_effects(vocab: &Vocabulary, d: &ActionDataset) -> Result<BTreeMap<FuncTerm, EffectModel>, LearnError> {
    no_successes(vocab, d)?;
    let n = vocab.funcs.len();
    let mut out = BTreeMap::new();
    for g in 0..n {
        if d.successes.iter().all(|t| t.pre.nums[g] == t.post.nums[g]) {
            continue;
        }
        let inconsistent = || LearnError::InconsistentData {
            schema: vocab.schema.clone(),
            detail: format!("{} is not a linear function of the pre-state", vocab.funcs[g]),
        };
        let mut basis = RowBasis::default();
        let mut aug = RowBasis::default();
        let mut rows: Vec<Vector> = Vec::new();
        let mut rhs: Vec<Rational> = Vec::new();
        let mut solution: Option<Vector> = None;
        for t in &d.successes {
            if let Some(w) = &solution {
                let pred = w[..n]
                    .iter()
                    .zip(&t.pre.nums)
                    .fold(rat_to_f64(&w[n]), |acc, (c, x)| acc + rat_to_f64(c) * x);
                if (pred - t.post.nums[g]).abs() > EFFECT_TOLERANCE {
                    return Err(inconsistent());
                }
                continue;
            }
            let mut row: Vector = t.pre.nums.iter().map(|&x| rat_from_f64(x)).collect();
            row.push(Rational::one());
            let y = rat_from_f64(t.post.nums[g]);
            let mut full = row.clone();
            full.push(y.clone());
            if aug.insert(&full) {
                if !basis.insert(&row) {
                    return Err(inconsistent());
                }
                rows.push(row);
                rhs.push(y);
                if basis.rank() == n + 1 {
                    solution = Some(linalg::solve_square(&rows, &rhs).ok_or_else(inconsistent)?);
                }
            }
        }
        let model = match solution {
            Some(w) => EffectModel::Known {
                coeffs: w[..n].to_vec(),
                constant: w[n].clone(),
            },
            None => EffectModel::Unknown,
        };
        out.insert(vocab.funcs[g].clone(), model);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnedActionModel {
    pub name: String,
    pub params: Vec<Parameter>,
    pub bool_pre: BTreeSet<Literal>,
    pub num_pre: BTreeSet<NumericCondition>,
    pub add: BTreeSet<Atom>,
    pub del: BTreeSet<Atom>,
    pub num_effects: BTreeMap<FuncTerm, EffectModel>,
    pub observed_count: usize,
    pub distinct_samples: usize,
    pub hull_dim: usize,
    pub ambiguous_effects: bool,
    pub sample_cap_applied: bool,
    funcs: Vec<FuncTerm>,
}

impl LearnedActionModel {
    pub fn has_unknown_effect(&self) -> bool {
        self.num_effects.values().any(|e| *e == EffectModel::Unknown)
    }

    pub fn exportable(&self) -> bool {
        self.observed_count > 0 && !self.has_unknown_effect() && !self.ambiguous_effects
    }

    fn effect(&self, target: &FuncTerm, coeffs: &[Rational], constant: &Rational) -> NumericEffect {
        let is_target = |f: &FuncTerm, c: &Rational| if f == target { c.is_one() } else { c.is_zero() };
        if self.funcs.iter().zip(coeffs).all(|(f, c)| is_target(f, c)) {
            let (op, amount) = if *constant < Rational::zero() {
                (EffectOp::Decrease, -constant.clone())
            } else {
                (EffectOp::Increase, constant.clone())
            };
            return NumericEffect {
                target: target.clone(),
                op,
                expr: LinearExpr::constant(amount),
            };
        }
        let mut expr = LinearExpr::constant(constant.clone());
        for (f, c) in self.funcs.iter().zip(coeffs) {
            if !c.is_zero() {
                expr.terms.insert(f.clone(), c.clone());
            }
        }
        NumericEffect {
            target: target.clone(),
            op: EffectOp::Assign,
            expr,
        }
    }

    pub fn to_schema(&self) -> ActionSchema {
        let mut a = ActionSchema::new(self.name.clone(), self.params.clone());
        a.bool_pre = self.bool_pre.clone();
        a.num_pre = self.num_pre.clone();
        a.add_effects = self.add.clone();
        a.del_effects = self.del.clone();
        for (target, e) in &self.num_effects {
            if let EffectModel::Known { coeffs, constant } = e {
                a.num_effects.push(self.effect(target, coeffs, constant));
            }
        }
        a.num_effects.sort();
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnedModel {
    pub signature: LiftedDomain,
    pub actions: BTreeMap<String, LearnedActionModel>,
    pub trajectories: usize,
}

pub fn learn_action(
    vocab: &Vocabulary,
    d: &ActionDataset,
    sample_cap: usize,
) -> Result<LearnedActionModel, LearnError> {
    let b = learn_boolean(vocab, d)?;
    let p = learn_numeric_preconditions(vocab, d, sample_cap)?;
    let e = learn_numeric_effects(vocab, d)?;
    Ok(LearnedActionModel {
        name: vocab.schema.clone(),
        params: vocab.params.clone(),
        bool_pre: b.pre,
        num_pre: p.conditions,
        add: b.add,
        del: b.del,
        num_effects: e,
        observed_count: d.success_count,
        distinct_samples: d.successes.len(),
        hull_dim: p.dim,
        ambiguous_effects: b.ambiguous,
        sample_cap_applied: p.cap_applied,
        funcs: vocab.funcs.clone(),
    })
}

/// Learns every schema with at least one success from scratch.
pub fn learn(data: &Datasets) -> Result<LearnedModel, LearnError> {
    learn_with_cap(data, DEFAULT_SAMPLE_CAP)
}

pub fn learn_with_cap(data: &Datasets, sample_cap: usize) -> Result<LearnedModel, LearnError> {
    let mut actions = BTreeMap::new();
    for (name, d) in &data.actions {
        if d.successes.is_empty() {
            continue;
        }
        actions.insert(name.clone(), learn_action(&data.vocab[name], d, sample_cap)?);
    }
    Ok(LearnedModel {
        signature: data.signature.clone(),
        actions,
        trajectories: data.trajectories,
    })
}

impl LearnedModel {
    pub fn empty(signature: &LiftedDomain) -> Self {
        LearnedModel {
            signature: signature.signature(),
            actions: BTreeMap::new(),
            trajectories: 0,
        }
    }

    pub fn exportable_count(&self) -> usize {
        self.actions.values().filter(|a| a.exportable()).count()
    }

    /// Planning domain with the exportable schemas only.
    pub fn export(&self) -> LiftedDomain {
        let mut d = self.signature.without_actions();
        d.actions = self
            .actions
            .values()
            .filter(|a| a.exportable())
            .map(LearnedActionModel::to_schema)
            .collect();
        let uses_neg = d.actions.iter().any(|a| a.bool_pre.iter().any(|l| !l.is_positive()));
        let uses_eq = d
            .actions
            .iter()
            .any(|a| a.bool_pre.iter().any(|l| matches!(l, Literal::Equality { .. })));
        if uses_neg {
            d.requirements.insert(":negative-preconditions".into());
        }
        if uses_eq {
            d.requirements.insert(":equality".into());
        }
        d
    }

    pub fn meta_json(&self) -> serde_json::Value {
        let actions: serde_json::Map<String, serde_json::Value> = self
            .actions
            .iter()
            .map(|(name, a)| {
                let unknown: Vec<String> = a
                    .num_effects
                    .iter()
                    .filter(|(_, e)| **e == EffectModel::Unknown)
                    .map(|(f, _)| f.to_string())
                    .collect();
                (
                    name.clone(),
                    json!({
                        "samples": a.observed_count,
                        "distinct_samples": a.distinct_samples,
                        "hull_dim": a.hull_dim,
                        "unknown_effects": unknown,
                        "ambiguous_effects": a.ambiguous_effects,
                        "sample_cap_applied": a.sample_cap_applied,
                        "exported": a.exportable(),
                    }),
                )
            })
            .collect();
        json!({
            "domain": self.signature.name,
            "trajectories": self.trajectories,
            "actions": actions,
        })
    }
}
