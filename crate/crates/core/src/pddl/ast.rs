use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::linear::{LinearExpr, NumericCondition, Rational};

/// Root of every type hierarchy.
pub const OBJECT_TYPE: &str = "object";

/// Predicate applied to arguments; arguments starting with `?` are variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<String>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn map_args(&self, f: impl FnMut(&String) -> String) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(f).collect(),
        }
    }
}

/// Label form, e.g. `at(r1,loc_a)`.
impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

/// Function (numeric fluent) applied to arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncTerm {
    pub name: String,
    pub args: Vec<String>,
}

impl FuncTerm {
    pub fn new(name: impl Into<String>, args: Vec<String>) -> Self {
        FuncTerm {
            name: name.into(),
            args,
        }
    }

    pub fn map_args(&self, f: impl FnMut(&String) -> String) -> FuncTerm {
        FuncTerm {
            name: self.name.clone(),
            args: self.args.iter().map(f).collect(),
        }
    }
}

impl fmt::Display for FuncTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Atom { atom: Atom, positive: bool },
    /// Object (in)equality between two arguments.
    Equality { left: String, right: String, positive: bool },
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal::Atom { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal::Atom { atom, positive: false }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Literal::Atom { positive, .. } | Literal::Equality { positive, .. } => *positive,
        }
    }

    pub fn map_args(&self, mut f: impl FnMut(&String) -> String) -> Literal {
        match self {
            Literal::Atom { atom, positive } => Literal::Atom {
                atom: atom.map_args(f),
                positive: *positive,
            },
            Literal::Equality { left, right, positive } => Literal::Equality {
                left: f(left),
                right: f(right),
                positive: *positive,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EffectOp {
    Assign,
    Increase,
    Decrease,
    ScaleUp,
    ScaleDown,
}

impl EffectOp {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "assign" => EffectOp::Assign,
            "increase" => EffectOp::Increase,
            "decrease" => EffectOp::Decrease,
            "scale-up" => EffectOp::ScaleUp,
            "scale-down" => EffectOp::ScaleDown,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            EffectOp::Assign => "assign",
            EffectOp::Increase => "increase",
            EffectOp::Decrease => "decrease",
            EffectOp::ScaleUp => "scale-up",
            EffectOp::ScaleDown => "scale-down",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NumericEffect {
    pub target: FuncTerm,
    pub op: EffectOp,
    pub expr: LinearExpr,
}

impl NumericEffect {
    /// The effect as `target := expr'`, a single linear expression over pre-state values.
    pub fn as_assignment(&self) -> LinearExpr {
        let current = LinearExpr::term(self.target.clone());
        match self.op {
            EffectOp::Assign => self.expr.clone(),
            EffectOp::Increase => current.add(&self.expr),
            EffectOp::Decrease => current.sub(&self.expr),
            EffectOp::ScaleUp => current.scale(&self.expr.constant),
            EffectOp::ScaleDown => current.scale(&self.expr.constant.recip()),
        }
    }

    pub fn map_terms(&self, mut f: impl FnMut(&FuncTerm) -> FuncTerm) -> NumericEffect {
        NumericEffect {
            target: f(&self.target),
            op: self.op,
            expr: self.expr.map_terms(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Parameter {
    /// Variable name including the leading `?`.
    pub name: String,
    pub ty: String,
}

impl Parameter {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        Parameter {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    pub params: Vec<Parameter>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSchema {
    pub name: String,
    pub params: Vec<Parameter>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<Parameter>,
    pub bool_pre: BTreeSet<Literal>,
    pub num_pre: BTreeSet<NumericCondition>,
    pub add_effects: BTreeSet<Atom>,
    pub del_effects: BTreeSet<Atom>,
    /// Sorted by target.
    pub num_effects: Vec<NumericEffect>,
}

impl ActionSchema {
    pub fn new(name: impl Into<String>, params: Vec<Parameter>) -> Self {
        ActionSchema {
            name: name.into(),
            params,
            bool_pre: BTreeSet::new(),
            num_pre: BTreeSet::new(),
            add_effects: BTreeSet::new(),
            del_effects: BTreeSet::new(),
            num_effects: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedDomain {
    pub name: String,
    pub requirements: BTreeSet<String>,
    /// child type -> parent type; `object` is implicit.
    pub types: BTreeMap<String, String>,
    pub predicates: Vec<PredicateSchema>,
    pub functions: Vec<FunctionSchema>,
    pub actions: Vec<ActionSchema>,
}

impl LiftedDomain {
    pub fn has_type(&self, ty: &str) -> bool {
        ty == OBJECT_TYPE || self.types.contains_key(ty)
    }

    /// Reflexive-transitive subtype check.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        for _ in 0..=self.types.len() + 1 {
            if cur == ancestor {
                return true;
            }
            match self.types.get(cur) {
                Some(parent) => cur = parent,
                None => return ancestor == OBJECT_TYPE,
            }
        }
        false
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateSchema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSchema> {
        self.functions.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// What an agent is told about the domain: types, predicates, functions
    /// and action names with typed parameters, but no preconditions or effects.
    pub fn signature(&self) -> LiftedDomain {
        LiftedDomain {
            actions: self
                .actions
                .iter()
                .map(|a| ActionSchema::new(a.name.clone(), a.params.clone()))
                .collect(),
            ..self.clone()
        }
    }

    pub fn without_actions(&self) -> LiftedDomain {
        LiftedDomain {
            actions: Vec::new(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    /// object -> type
    pub objects: BTreeMap<String, String>,
    pub init_atoms: BTreeSet<Atom>,
    pub init_values: BTreeMap<FuncTerm, Rational>,
    pub goal_literals: BTreeSet<Literal>,
    pub goal_numeric: BTreeSet<NumericCondition>,
}

impl Problem {
    pub fn objects_of_type<'a>(&'a self, domain: &'a LiftedDomain, ty: &'a str) -> impl Iterator<Item = &'a String> + 'a {
        self.objects
            .iter()
            .filter(move |(_, t)| domain.is_subtype(t, ty))
            .map(|(o, _)| o)
    }
}
