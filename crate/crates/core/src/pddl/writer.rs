//! Deterministic PDDL writer: lowercase keywords, 2-space indentation,
//! one condition or effect per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::ast::*;
use super::linear::{Comparator, LinearExpr, NumericCondition, Rational};

/// Renders a rational as a PDDL number, falling back to `(/ n d)` when the
/// value has no finite decimal expansion.
pub fn format_number(r: &Rational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let mut d = r.denom().clone();
    let mut twos = 0usize;
    let mut fives = 0usize;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while d.is_multiple_of(&two) {
        d /= &two;
        twos += 1;
    }
    while d.is_multiple_of(&five) {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("(/ {} {})", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    let scaled = (r.abs() * Rational::from_integer(num_traits::pow(BigInt::from(10), digits))).to_integer();
    let s = format!("{:0>width$}", scaled.to_string(), width = digits + 1);
    let (int_part, frac_part) = s.split_at(s.len() - digits);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

fn func_term(t: &FuncTerm) -> String {
    if t.args.is_empty() {
        format!("({})", t.name)
    } else {
        format!("({} {})", t.name, t.args.join(" "))
    }
}

fn atom(a: &Atom) -> String {
    if a.args.is_empty() {
        format!("({})", a.predicate)
    } else {
        format!("({} {})", a.predicate, a.args.join(" "))
    }
}

fn literal(l: &Literal) -> String {
    let inner = match l {
        Literal::Atom { atom: a, .. } => atom(a),
        Literal::Equality { left, right, .. } => format!("(= {left} {right})"),
    };
    if l.is_positive() {
        inner
    } else {
        format!("(not {inner})")
    }
}

fn weighted(t: &FuncTerm, c: &Rational) -> String {
    if c.is_one() {
        func_term(t)
    } else {
        format!("(* {} {})", format_number(c), func_term(t))
    }
}

fn sum(items: &[String]) -> String {
    match items {
        [] => "0".to_string(),
        [one] => one.clone(),
        [first, rest @ ..] => rest
            .iter()
            .fold(first.clone(), |acc, x| format!("(+ {acc} {x})")),
    }
}

/// Splits `expr` into sums of positive items: expr = pos - neg.
fn split_signs(expr: &LinearExpr) -> (Vec<String>, Vec<String>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (t, c) in &expr.terms {
        if c.is_positive() {
            pos.push(weighted(t, c));
        } else {
            neg.push(weighted(t, &-c));
        }
    }
    if expr.constant.is_positive() {
        pos.push(format_number(&expr.constant));
    } else if expr.constant.is_negative() {
        neg.push(format_number(&-expr.constant.clone()));
    }
    (pos, neg)
}

pub fn format_expr(expr: &LinearExpr) -> String {
    let (pos, neg) = split_signs(expr);
    match (pos.is_empty(), neg.is_empty()) {
        (_, true) => sum(&pos),
        (true, false) if expr.terms.is_empty() => format_number(&expr.constant),
        (true, false) => format!("(- {})", sum(&neg)),
        (false, false) => format!("(- {} {})", sum(&pos), sum(&neg)),
    }
}

pub fn format_condition(c: &NumericCondition) -> String {
    // Σ a_i t_i <cmp> r  rewritten with non-negative items on both sides.
    let mut left = LinearExpr::default();
    let mut right = LinearExpr::default();
    for (t, k) in &c.lhs.terms {
        if k.is_positive() {
            left.terms.insert(t.clone(), k.clone());
        } else {
            right.terms.insert(t.clone(), -k.clone());
        }
    }
    if c.rhs.is_negative() {
        left.constant = -c.rhs.clone();
    } else {
        right.constant = c.rhs.clone();
    }
    let (l, r) = (format_expr(&left), format_expr(&right));
    match c.comparator {
        Comparator::Ge => format!("(<= {r} {l})"),
        Comparator::Gt => format!("(< {r} {l})"),
        cmp => format!("({} {l} {r})", cmp.symbol()),
    }
}

fn typed_params(params: &[Parameter]) -> String {
    params
        .iter()
        .map(|p| format!("{} - {}", p.name, p.ty))
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_block(out: &mut String, indent: &str, lines: &[String]) {
    out.push_str("(and");
    if lines.is_empty() {
        out.push_str(")\n");
        return;
    }
    out.push('\n');
    for l in lines {
        let _ = writeln!(out, "{indent}  {l}");
    }
    let _ = writeln!(out, "{indent})");
}

pub fn serialize_domain(d: &LiftedDomain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let reqs: Vec<&str> = d.requirements.iter().map(String::as_str).collect();
        let _ = writeln!(out, "  (:requirements {})", reqs.join(" "));
    }
    if !d.types.is_empty() {
        let mut by_parent: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (child, parent) in &d.types {
            by_parent.entry(parent.as_str()).or_default().push(child.as_str());
        }
        out.push_str("  (:types\n");
        for (parent, children) in by_parent {
            let _ = writeln!(out, "    {} - {}", children.join(" "), parent);
        }
        out.push_str("  )\n");
    }
    if !d.predicates.is_empty() {
        out.push_str("  (:predicates\n");
        for p in &d.predicates {
            let params = typed_params(&p.params);
            if params.is_empty() {
                let _ = writeln!(out, "    ({})", p.name);
            } else {
                let _ = writeln!(out, "    ({} {})", p.name, params);
            }
        }
        out.push_str("  )\n");
    }
    if !d.functions.is_empty() {
        out.push_str("  (:functions\n");
        for f in &d.functions {
            let params = typed_params(&f.params);
            if params.is_empty() {
                let _ = writeln!(out, "    ({})", f.name);
            } else {
                let _ = writeln!(out, "    ({} {})", f.name, params);
            }
        }
        out.push_str("  )\n");
    }
    for a in &d.actions {
        let _ = writeln!(out, "  (:action {}", a.name);
        let _ = writeln!(out, "    :parameters ({})", typed_params(&a.params));
        let pre: Vec<String> = a
            .bool_pre
            .iter()
            .map(literal)
            .chain(a.num_pre.iter().map(format_condition))
            .collect();
        out.push_str("    :precondition ");
        write_block(&mut out, "    ", &pre);
        let eff: Vec<String> = a
            .add_effects
            .iter()
            .map(atom)
            .chain(a.del_effects.iter().map(|x| format!("(not {})", atom(x))))
            .chain(
                a.num_effects
                    .iter()
                    .map(|e| format!("({} {} {})", e.op.keyword(), func_term(&e.target), format_expr(&e.expr))),
            )
            .collect();
        out.push_str("    :effect ");
        write_block(&mut out, "    ", &eff);
        out.push_str("  )\n");
    }
    out.push_str(")\n");
    out
}

pub fn serialize_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain);
    if !p.objects.is_empty() {
        let mut by_type: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (o, t) in &p.objects {
            by_type.entry(t.as_str()).or_default().push(o.as_str());
        }
        out.push_str("  (:objects\n");
        for (t, objs) in by_type {
            let _ = writeln!(out, "    {} - {}", objs.join(" "), t);
        }
        out.push_str("  )\n");
    }
    out.push_str("  (:init\n");
    for a in &p.init_atoms {
        let _ = writeln!(out, "    {}", atom(a));
    }
    for (t, v) in &p.init_values {
        let _ = writeln!(out, "    (= {} {})", func_term(t), format_number(v));
    }
    out.push_str("  )\n");
    let goal: Vec<String> = p
        .goal_literals
        .iter()
        .map(literal)
        .chain(p.goal_numeric.iter().map(format_condition))
        .collect();
    out.push_str("  (:goal ");
    write_block(&mut out, "  ", &goal);
    out.push_str("  )\n)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::linear::{rat, rat_frac};

    #[test]
    fn numbers_render_as_decimals_when_possible() {
        assert_eq!(format_number(&rat(10)), "10");
        assert_eq!(format_number(&rat(-3)), "-3");
        assert_eq!(format_number(&rat_frac(3, 2)), "1.5");
        assert_eq!(format_number(&rat_frac(-1, 4)), "-0.25");
        assert_eq!(format_number(&rat_frac(1, 20)), "0.05");
        assert_eq!(format_number(&rat_frac(1, 3)), "(/ 1 3)");
    }

    #[test]
    fn conditions_keep_terms_on_positive_sides() {
        let v0 = FuncTerm::new("value", vec!["c0".into()]);
        let v1 = FuncTerm::new("value", vec!["c1".into()]);
        let c = NumericCondition::from_sides(
            &LinearExpr::term(v0).add(&LinearExpr::constant(rat(1))),
            Comparator::Le,
            &LinearExpr::term(v1),
        );
        assert_eq!(format_condition(&c), "(<= (+ (value c0) 1) (value c1))");
        let fuel = FuncTerm::new("fuel", vec!["?r".into()]);
        let ge = NumericCondition::from_sides(&LinearExpr::term(fuel.clone()), Comparator::Ge, &LinearExpr::constant(rat(7)));
        assert_eq!(format_condition(&ge), "(<= 7 (fuel ?r))");
        let le = NumericCondition::from_sides(&LinearExpr::term(fuel), Comparator::Le, &LinearExpr::constant(rat(10)));
        assert_eq!(format_condition(&le), "(<= (fuel ?r) 10)");
    }
}
