//! PDDL 2.1 (linear numeric fragment) domain and problem parser.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::ast::*;
use super::error::PddlError;
use super::linear::{parse_number, validate_linear, Comparator, Expr, LinearExpr, NumericCondition};
use super::sexpr::{parse_sexpr, Pos, Sexpr};

/// Requirement flags this crate understands. `:strips` is implied and
/// `:numeric-fluents` is the PDDL 3.1 spelling of `:fluents`.
pub const SUPPORTED_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":fluents",
    ":numeric-fluents",
    ":negative-preconditions",
    ":equality",
];

enum Condition {
    Literal(Literal),
    Numeric(NumericCondition),
}

fn expect_list<'a>(e: &'a Sexpr, what: &str) -> Result<&'a [Sexpr], PddlError> {
    e.as_list()
        .ok_or_else(|| PddlError::syntax(e.pos(), format!("expected {what}")))
}

fn expect_atom<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, PddlError> {
    e.as_atom()
        .ok_or_else(|| PddlError::syntax(e.pos(), format!("expected {what}")))
}

/// Parses `a b - t c - u d` into (name, type) pairs; untyped names get `object`.
fn parse_typed_list(items: &[Sexpr]) -> Result<Vec<(String, String, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if let Some("-") = item.as_atom() {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| PddlError::syntax(item.pos(), "missing type after '-'"))?;
            let ty = match ty_expr {
                Sexpr::Atom(t, _) => t.clone(),
                Sexpr::List(..) => {
                    return Err(PddlError::UnsupportedFeature("either-types".into()));
                }
            };
            if pending.is_empty() {
                return Err(PddlError::syntax(item.pos(), "type annotation without names"));
            }
            for (name, pos) in pending.drain(..) {
                out.push((name, ty.clone(), pos));
            }
            i += 2;
            continue;
        }
        let name = expect_atom(item, "name")?;
        pending.push((name.to_string(), item.pos()));
        i += 1;
    }
    for (name, pos) in pending {
        out.push((name, OBJECT_TYPE.to_string(), pos));
    }
    Ok(out)
}

fn parse_expr(e: &Sexpr) -> Result<Expr, PddlError> {
    match e {
        Sexpr::Atom(s, pos) => parse_number(s)
            .map(Expr::Number)
            .ok_or_else(|| PddlError::syntax(*pos, format!("expected number or function term, found '{s}'"))),
        Sexpr::List(items, pos) => {
            let head = items
                .first()
                .and_then(Sexpr::as_atom)
                .ok_or_else(|| PddlError::syntax(*pos, "expected operator or function name"))?;
            let args = &items[1..];
            match head {
                "+" | "*" => {
                    if args.len() < 2 {
                        return Err(PddlError::syntax(*pos, format!("'{head}' needs at least two operands")));
                    }
                    let xs = args.iter().map(parse_expr).collect::<Result<Vec<_>, _>>()?;
                    Ok(if head == "+" { Expr::Add(xs) } else { Expr::Mul(xs) })
                }
                "-" => match args {
                    [a] => Ok(Expr::Neg(Box::new(parse_expr(a)?))),
                    [a, b] => Ok(Expr::Sub(Box::new(parse_expr(a)?), Box::new(parse_expr(b)?))),
                    _ => Err(PddlError::syntax(*pos, "'-' takes one or two operands")),
                },
                "/" => match args {
                    [a, b] => Ok(Expr::Div(Box::new(parse_expr(a)?), Box::new(parse_expr(b)?))),
                    _ => Err(PddlError::syntax(*pos, "'/' takes two operands")),
                },
                name if name.starts_with('?') || name.starts_with(':') || name == "#t" => {
                    Err(PddlError::UnsupportedFeature(format!("expression head '{name}'")))
                }
                name => {
                    let args = args
                        .iter()
                        .map(|a| expect_atom(a, "function argument").map(str::to_string))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Expr::Func(FuncTerm::new(name, args)))
                }
            }
        }
    }
}

fn linear(e: &Sexpr) -> Result<LinearExpr, PddlError> {
    validate_linear(&parse_expr(e)?).map_err(|err| match err {
        PddlError::NonLinear(m) => PddlError::UnsupportedFeature(format!("non-linear arithmetic: {m}")),
        other => other,
    })
}

fn parse_atom(items: &[Sexpr], pos: Pos) -> Result<Atom, PddlError> {
    let name = items
        .first()
        .and_then(Sexpr::as_atom)
        .ok_or_else(|| PddlError::syntax(pos, "expected predicate name"))?;
    let args = items[1..]
        .iter()
        .map(|a| expect_atom(a, "predicate argument").map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom::new(name, args))
}

fn is_term_atom(e: &Sexpr) -> bool {
    matches!(e.as_atom(), Some(s) if parse_number(s).is_none())
}

fn parse_condition(e: &Sexpr, out: &mut Vec<Condition>) -> Result<(), PddlError> {
    let items = expect_list(e, "condition")?;
    let Some(head) = items.first() else {
        return Ok(()); // `()` is the empty conjunction
    };
    let head = expect_atom(head, "condition keyword")?;
    match head {
        "and" => {
            for sub in &items[1..] {
                parse_condition(sub, out)?;
            }
            Ok(())
        }
        "not" => {
            let [inner] = &items[1..] else {
                return Err(PddlError::syntax(e.pos(), "'not' takes exactly one argument"));
            };
            let inner_items = expect_list(inner, "negated atom")?;
            match inner_items.first().and_then(Sexpr::as_atom) {
                Some("=") if inner_items.len() == 3 && is_term_atom(&inner_items[1]) && is_term_atom(&inner_items[2]) => {
                    out.push(Condition::Literal(Literal::Equality {
                        left: inner_items[1].as_atom().unwrap().to_string(),
                        right: inner_items[2].as_atom().unwrap().to_string(),
                        positive: false,
                    }));
                    Ok(())
                }
                Some(h) if Comparator::parse(h).is_some() => {
                    Err(PddlError::UnsupportedFeature("negated numeric condition".into()))
                }
                Some("and" | "or" | "not" | "imply" | "exists" | "forall") => {
                    Err(PddlError::UnsupportedFeature("negation of a compound condition".into()))
                }
                _ => {
                    out.push(Condition::Literal(Literal::neg(parse_atom(inner_items, inner.pos())?)));
                    Ok(())
                }
            }
        }
        "or" | "imply" | "exists" | "forall" | "preference" => {
            Err(PddlError::UnsupportedFeature(format!("'{head}' in conditions")))
        }
        "=" if items.len() == 3 && is_term_atom(&items[1]) && is_term_atom(&items[2]) => {
            out.push(Condition::Literal(Literal::Equality {
                left: items[1].as_atom().unwrap().to_string(),
                right: items[2].as_atom().unwrap().to_string(),
                positive: true,
            }));
            Ok(())
        }
        h if Comparator::parse(h).is_some() => {
            let cmp = Comparator::parse(h).unwrap();
            let [l, r] = &items[1..] else {
                return Err(PddlError::syntax(e.pos(), "comparison takes two operands"));
            };
            out.push(Condition::Numeric(NumericCondition::from_sides(&linear(l)?, cmp, &linear(r)?)));
            Ok(())
        }
        _ => {
            out.push(Condition::Literal(Literal::pos(parse_atom(items, e.pos())?)));
            Ok(())
        }
    }
}

struct Effects {
    add: BTreeSet<Atom>,
    del: BTreeSet<Atom>,
    num: Vec<NumericEffect>,
}

fn parse_effect(e: &Sexpr, out: &mut Effects) -> Result<(), PddlError> {
    let items = expect_list(e, "effect")?;
    let Some(head) = items.first() else {
        return Ok(());
    };
    let head = expect_atom(head, "effect keyword")?;
    match head {
        "and" => {
            for sub in &items[1..] {
                parse_effect(sub, out)?;
            }
            Ok(())
        }
        "not" => {
            let [inner] = &items[1..] else {
                return Err(PddlError::syntax(e.pos(), "'not' takes exactly one argument"));
            };
            let inner_items = expect_list(inner, "deleted atom")?;
            out.del.insert(parse_atom(inner_items, inner.pos())?);
            Ok(())
        }
        "when" => Err(PddlError::UnsupportedFeature("conditional effects".into())),
        "forall" => Err(PddlError::UnsupportedFeature("universal effects".into())),
        h if EffectOp::parse(h).is_some() => {
            let op = EffectOp::parse(h).unwrap();
            let [target, value] = &items[1..] else {
                return Err(PddlError::syntax(e.pos(), format!("'{h}' takes two operands")));
            };
            let target = match parse_expr(target)? {
                Expr::Func(t) => t,
                _ => return Err(PddlError::syntax(items[1].pos(), "effect target must be a function term")),
            };
            let expr = linear(value)?;
            if matches!(op, EffectOp::ScaleUp | EffectOp::ScaleDown) {
                if !expr.is_constant() {
                    return Err(PddlError::UnsupportedFeature(format!(
                        "non-linear arithmetic: {h} by a non-constant"
                    )));
                }
                if num_traits::Zero::is_zero(&expr.constant) && op == EffectOp::ScaleDown {
                    return Err(PddlError::InvalidDomain("scale-down by zero".into()));
                }
            }
            out.num.push(NumericEffect { target, op, expr });
            Ok(())
        }
        _ => {
            out.add.insert(parse_atom(items, e.pos())?);
            Ok(())
        }
    }
}

/// Parses a domain file into a validated [`LiftedDomain`].
pub fn parse_domain(text: &str) -> Result<LiftedDomain, PddlError> {
    let root = parse_sexpr(text)?;
    let items = expect_list(&root, "(define ...)")?;
    if items.first().and_then(Sexpr::as_atom) != Some("define") {
        return Err(PddlError::syntax(root.pos(), "expected 'define'"));
    }
    let header = items
        .get(1)
        .and_then(Sexpr::as_list)
        .ok_or_else(|| PddlError::syntax(root.pos(), "expected (domain <name>)"))?;
    let name = match header {
        [Sexpr::Atom(k, _), Sexpr::Atom(n, _)] if k == "domain" => n.clone(),
        _ => return Err(PddlError::syntax(items[1].pos(), "expected (domain <name>)")),
    };

    let mut domain = LiftedDomain {
        name,
        requirements: BTreeSet::new(),
        types: BTreeMap::new(),
        predicates: Vec::new(),
        functions: Vec::new(),
        actions: Vec::new(),
    };

    for section in &items[2..] {
        let sec = expect_list(section, "domain section")?;
        let key = sec
            .first()
            .and_then(Sexpr::as_atom)
            .ok_or_else(|| PddlError::syntax(section.pos(), "expected section keyword"))?;
        match key {
            ":requirements" => {
                for r in &sec[1..] {
                    let r = expect_atom(r, "requirement flag")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PddlError::UnsupportedFeature(format!("requirement {r}")));
                    }
                    domain.requirements.insert(r.to_string());
                }
            }
            ":types" => {
                for (child, parent, _) in parse_typed_list(&sec[1..])? {
                    if child != OBJECT_TYPE {
                        domain.types.insert(child, parent);
                    }
                }
            }
            ":predicates" => {
                for p in &sec[1..] {
                    let pl = expect_list(p, "predicate declaration")?;
                    let name = expect_atom(pl.first().ok_or_else(|| PddlError::syntax(p.pos(), "empty predicate"))?, "predicate name")?;
                    let params = parse_typed_list(&pl[1..])?
                        .into_iter()
                        .map(|(n, t, _)| Parameter::new(n, t))
                        .collect();
                    domain.predicates.push(PredicateSchema { name: name.to_string(), params });
                }
            }
            ":functions" => {
                let mut i = 1;
                while i < sec.len() {
                    let f = &sec[i];
                    if f.as_atom() == Some("-") {
                        match sec.get(i + 1).and_then(Sexpr::as_atom) {
                            Some("number") => {
                                i += 2;
                                continue;
                            }
                            _ => return Err(PddlError::UnsupportedFeature("non-numeric function types".into())),
                        }
                    }
                    let fl = expect_list(f, "function declaration")?;
                    let name = expect_atom(fl.first().ok_or_else(|| PddlError::syntax(f.pos(), "empty function"))?, "function name")?;
                    let params = parse_typed_list(&fl[1..])?
                        .into_iter()
                        .map(|(n, t, _)| Parameter::new(n, t))
                        .collect();
                    domain.functions.push(FunctionSchema { name: name.to_string(), params });
                    i += 1;
                }
            }
            ":action" => domain.actions.push(parse_action(sec, section.pos())?),
            ":constants" => return Err(PddlError::UnsupportedFeature("domain constants".into())),
            ":durative-action" => return Err(PddlError::UnsupportedFeature("durative actions".into())),
            ":derived" => return Err(PddlError::UnsupportedFeature("derived predicates".into())),
            other => return Err(PddlError::UnsupportedFeature(format!("section {other}"))),
        }
    }
    validate_domain(&domain)?;
    Ok(domain)
}

fn parse_action(sec: &[Sexpr], pos: Pos) -> Result<ActionSchema, PddlError> {
    let name = sec
        .get(1)
        .and_then(Sexpr::as_atom)
        .ok_or_else(|| PddlError::syntax(pos, "expected action name"))?;
    let mut action = ActionSchema::new(name, Vec::new());
    let mut i = 2;
    while i < sec.len() {
        let key = expect_atom(&sec[i], "action keyword")?;
        let value = sec
            .get(i + 1)
            .ok_or_else(|| PddlError::syntax(sec[i].pos(), format!("missing value for {key}")))?;
        match key {
            ":parameters" => {
                action.params = parse_typed_list(expect_list(value, "parameter list")?)?
                    .into_iter()
                    .map(|(n, t, _)| Parameter::new(n, t))
                    .collect();
            }
            ":precondition" => {
                let mut conds = Vec::new();
                parse_condition(value, &mut conds)?;
                for c in conds {
                    match c {
                        Condition::Literal(l) => {
                            action.bool_pre.insert(l);
                        }
                        Condition::Numeric(n) => {
                            action.num_pre.insert(n);
                        }
                    }
                }
            }
            ":effect" => {
                let mut eff = Effects {
                    add: BTreeSet::new(),
                    del: BTreeSet::new(),
                    num: Vec::new(),
                };
                parse_effect(value, &mut eff)?;
                action.add_effects = eff.add;
                action.del_effects = eff.del;
                eff.num.sort();
                action.num_effects = eff.num;
            }
            other => return Err(PddlError::syntax(sec[i].pos(), format!("unknown action keyword {other}"))),
        }
        i += 2;
    }
    Ok(action)
}

fn check_args(
    domain: &LiftedDomain,
    what: &str,
    declared: &[Parameter],
    args: &[String],
    type_of: &dyn Fn(&str) -> Result<String, PddlError>,
) -> Result<(), PddlError> {
    if declared.len() != args.len() {
        return Err(PddlError::Type(format!(
            "{what} expects {} arguments, got {}",
            declared.len(),
            args.len()
        )));
    }
    for (p, a) in declared.iter().zip(args) {
        let ty = type_of(a)?;
        if !domain.is_subtype(&ty, &p.ty) {
            return Err(PddlError::Type(format!("{what}: argument {a} of type {ty} is not a {}", p.ty)));
        }
    }
    Ok(())
}

pub(crate) fn check_atom(
    domain: &LiftedDomain,
    atom: &Atom,
    type_of: &dyn Fn(&str) -> Result<String, PddlError>,
) -> Result<(), PddlError> {
    let p = domain
        .predicate(&atom.predicate)
        .ok_or_else(|| PddlError::Type(format!("unknown predicate {}", atom.predicate)))?;
    check_args(domain, &format!("predicate {}", atom.predicate), &p.params, &atom.args, type_of)
}

pub(crate) fn check_func(
    domain: &LiftedDomain,
    f: &FuncTerm,
    type_of: &dyn Fn(&str) -> Result<String, PddlError>,
) -> Result<(), PddlError> {
    let s = domain
        .function(&f.name)
        .ok_or_else(|| PddlError::Type(format!("unknown function {}", f.name)))?;
    check_args(domain, &format!("function {}", f.name), &s.params, &f.args, type_of)
}

fn check_literal(
    domain: &LiftedDomain,
    lit: &Literal,
    type_of: &dyn Fn(&str) -> Result<String, PddlError>,
) -> Result<(), PddlError> {
    match lit {
        Literal::Atom { atom, .. } => check_atom(domain, atom, type_of),
        Literal::Equality { left, right, .. } => {
            type_of(left)?;
            type_of(right)?;
            Ok(())
        }
    }
}

fn check_unique<'a>(what: &str, names: impl Iterator<Item = &'a str>) -> Result<(), PddlError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(PddlError::InvalidDomain(format!("duplicate {what} {n}")));
        }
    }
    Ok(())
}

/// Checks the structural invariants of a domain (typing, naming, effect consistency).
pub fn validate_domain(domain: &LiftedDomain) -> Result<(), PddlError> {
    for (child, parent) in &domain.types {
        if !domain.has_type(parent) {
            return Err(PddlError::Type(format!("type {child} has unknown parent {parent}")));
        }
        if !domain.is_subtype(parent, OBJECT_TYPE) || domain.is_subtype(parent, child) {
            return Err(PddlError::Type(format!("cyclic type hierarchy at {child}")));
        }
    }
    check_unique("predicate", domain.predicates.iter().map(|p| p.name.as_str()))?;
    check_unique("function", domain.functions.iter().map(|p| p.name.as_str()))?;
    check_unique("action", domain.actions.iter().map(|p| p.name.as_str()))?;
    let all_params = domain
        .predicates
        .iter()
        .map(|p| &p.params)
        .chain(domain.functions.iter().map(|f| &f.params))
        .chain(domain.actions.iter().map(|a| &a.params));
    for params in all_params {
        for p in params {
            if !domain.has_type(&p.ty) {
                return Err(PddlError::Type(format!("unknown type {} for {}", p.ty, p.name)));
            }
            if !p.name.starts_with('?') {
                return Err(PddlError::Type(format!("parameter {} must start with '?'", p.name)));
            }
        }
    }
    for action in &domain.actions {
        check_unique("parameter", action.params.iter().map(|p| p.name.as_str()))?;
        let types: HashMap<&str, &str> = action.params.iter().map(|p| (p.name.as_str(), p.ty.as_str())).collect();
        let type_of = |v: &str| -> Result<String, PddlError> {
            types
                .get(v)
                .map(|t| t.to_string())
                .ok_or_else(|| PddlError::Type(format!("action {}: {v} is not a parameter", action.name)))
        };
        for l in &action.bool_pre {
            check_literal(domain, l, &type_of)?;
        }
        for c in &action.num_pre {
            for t in c.lhs.terms.keys() {
                check_func(domain, t, &type_of)?;
            }
        }
        for a in action.add_effects.iter().chain(&action.del_effects) {
            check_atom(domain, a, &type_of)?;
        }
        if let Some(a) = action.add_effects.intersection(&action.del_effects).next() {
            return Err(PddlError::InvalidDomain(format!(
                "action {}: {a} is both added and deleted",
                action.name
            )));
        }
        let mut targets = HashSet::new();
        for e in &action.num_effects {
            check_func(domain, &e.target, &type_of)?;
            for t in e.expr.terms.keys() {
                check_func(domain, t, &type_of)?;
            }
            if !targets.insert(&e.target) {
                return Err(PddlError::InvalidDomain(format!(
                    "action {}: conflicting numeric effects on {}",
                    action.name, e.target
                )));
            }
        }
    }
    Ok(())
}

/// Parses a problem file against an already parsed domain.
pub fn parse_problem(text: &str, domain: &LiftedDomain) -> Result<Problem, PddlError> {
    let root = parse_sexpr(text)?;
    let items = expect_list(&root, "(define ...)")?;
    if items.first().and_then(Sexpr::as_atom) != Some("define") {
        return Err(PddlError::syntax(root.pos(), "expected 'define'"));
    }
    let name = match items.get(1).and_then(Sexpr::as_list) {
        Some([Sexpr::Atom(k, _), Sexpr::Atom(n, _)]) if k == "problem" => n.clone(),
        _ => return Err(PddlError::syntax(root.pos(), "expected (problem <name>)")),
    };
    let mut problem = Problem {
        name,
        domain: String::new(),
        objects: BTreeMap::new(),
        init_atoms: BTreeSet::new(),
        init_values: BTreeMap::new(),
        goal_literals: BTreeSet::new(),
        goal_numeric: BTreeSet::new(),
    };
    let mut init_sexprs: &[Sexpr] = &[];
    let mut goal_sexpr: Option<&Sexpr> = None;
    for section in &items[2..] {
        let sec = expect_list(section, "problem section")?;
        let key = sec
            .first()
            .and_then(Sexpr::as_atom)
            .ok_or_else(|| PddlError::syntax(section.pos(), "expected section keyword"))?;
        match key {
            ":domain" => {
                problem.domain = sec
                    .get(1)
                    .and_then(Sexpr::as_atom)
                    .ok_or_else(|| PddlError::syntax(section.pos(), "expected domain name"))?
                    .to_string();
            }
            ":requirements" | ":metric" => {}
            ":objects" => {
                for (o, t, pos) in parse_typed_list(&sec[1..])? {
                    if !domain.has_type(&t) {
                        return Err(PddlError::UnknownObjectType(format!("type {t} of object {o}")));
                    }
                    if problem.objects.insert(o.clone(), t).is_some() {
                        return Err(PddlError::syntax(pos, format!("object {o} declared twice")));
                    }
                }
            }
            ":init" => init_sexprs = &sec[1..],
            ":goal" => {
                goal_sexpr = Some(
                    sec.get(1)
                        .ok_or_else(|| PddlError::syntax(section.pos(), "empty goal"))?,
                )
            }
            other => return Err(PddlError::UnsupportedFeature(format!("problem section {other}"))),
        }
    }

    let objects = problem.objects.clone();
    let type_of = move |o: &str| -> Result<String, PddlError> {
        objects
            .get(o)
            .cloned()
            .ok_or_else(|| PddlError::UnknownObjectType(format!("undeclared object {o}")))
    };

    for fact in init_sexprs {
        let fl = expect_list(fact, "initial fact")?;
        match fl.first().and_then(Sexpr::as_atom) {
            Some("=") => {
                let [target, value] = &fl[1..] else {
                    return Err(PddlError::syntax(fact.pos(), "'=' takes two operands"));
                };
                let target = match parse_expr(target)? {
                    Expr::Func(t) => t,
                    _ => return Err(PddlError::syntax(target.pos(), "expected function term")),
                };
                check_func(domain, &target, &type_of)?;
                let value = linear(value)?;
                if !value.is_constant() {
                    return Err(PddlError::syntax(fact.pos(), "initial value must be a constant"));
                }
                problem.init_values.insert(target, value.constant);
            }
            Some("not") => {} // closed world
            _ => {
                let atom = parse_atom(fl, fact.pos())?;
                check_atom(domain, &atom, &type_of)?;
                problem.init_atoms.insert(atom);
            }
        }
    }

    if let Some(goal) = goal_sexpr {
        let mut conds = Vec::new();
        parse_condition(goal, &mut conds)?;
        for c in conds {
            match c {
                Condition::Literal(l) => {
                    check_literal(domain, &l, &type_of)?;
                    problem.goal_literals.insert(l);
                }
                Condition::Numeric(n) => {
                    for t in n.lhs.terms.keys() {
                        check_func(domain, t, &type_of)?;
                    }
                    problem.goal_numeric.insert(n);
                }
            }
        }
    }

    for f in &domain.functions {
        for_each_binding(domain, &problem, &f.params, &mut |args| {
            let term = FuncTerm::new(f.name.clone(), args.to_vec());
            if problem.init_values.contains_key(&term) {
                Ok(())
            } else {
                Err(PddlError::UninitializedFunction(term.to_string()))
            }
        })?;
    }
    Ok(problem)
}

/// Visits every type-consistent object tuple for `params` in lexicographic order.
pub fn for_each_binding<E>(
    domain: &LiftedDomain,
    problem: &Problem,
    params: &[Parameter],
    visit: &mut dyn FnMut(&[String]) -> Result<(), E>,
) -> Result<(), E> {
    let choices: Vec<Vec<String>> = params
        .iter()
        .map(|p| problem.objects_of_type(domain, &p.ty).cloned().collect())
        .collect();
    if choices.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let mut idx = vec![0usize; params.len()];
    let mut current: Vec<String> = choices.iter().map(|c| c[0].clone()).collect();
    loop {
        visit(&current)?;
        let mut k = params.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                current[k] = choices[k][idx[k]].clone();
                break;
            }
            idx[k] = 0;
            current[k] = choices[k][0].clone();
        }
    }
}

