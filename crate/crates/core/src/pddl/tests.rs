use super::*;
use proptest::prelude::*;

const EXAMPLE_DOMAIN: &str = include_str!("../../../../domains/example/domain.pddl");
const EXAMPLE_PROBLEM: &str = include_str!("../../../../domains/example/problem.pddl");
const COUNTERS_DOMAIN: &str = include_str!("../../../../domains/counters/domain.pddl");
const SAILING_DOMAIN: &str = include_str!("../../../../domains/sailing/domain.pddl");
const DEPOT_DOMAIN: &str = include_str!("../../../../domains/depot/domain.pddl");

fn s(x: &str) -> String {
    x.to_string()
}

#[test]
fn example_move_decreases_fuel_by_one() {
    let d = parse_domain(EXAMPLE_DOMAIN).unwrap();
    assert_eq!(d.actions.len(), 1);
    let mv = &d.actions[0];
    assert_eq!(mv.name, "move");
    assert_eq!(mv.num_effects.len(), 1);
    let e = &mv.num_effects[0];
    assert_eq!(e.target, FuncTerm::new("fuel", vec![s("?r")]));
    assert_eq!(e.op, EffectOp::Decrease);
    assert_eq!(e.expr, LinearExpr::constant(rat(1)));
    assert!(mv.add_effects.contains(&Atom::new("at", vec![s("?r"), s("?to")])));
    assert!(mv.del_effects.contains(&Atom::new("at", vec![s("?r"), s("?from")])));
    assert!(mv.bool_pre.contains(&Literal::Equality {
        left: s("?from"),
        right: s("?to"),
        positive: false
    }));
}

#[test]
fn example_problem_init_and_goal() {
    let d = parse_domain(EXAMPLE_DOMAIN).unwrap();
    let p = parse_problem(EXAMPLE_PROBLEM, &d).unwrap();
    assert_eq!(p.init_atoms.len(), 1);
    assert!(p.init_atoms.contains(&Atom::new("at", vec![s("r1"), s("loc_a")])));
    assert_eq!(p.init_values[&FuncTerm::new("fuel", vec![s("r1")])], rat(10));
    assert_eq!(p.goal_literals.len(), 1);
    assert!(p.goal_literals.contains(&Literal::pos(Atom::new("at", vec![s("r1"), s("loc_b")]))));
    assert!(p.goal_numeric.is_empty());
}

#[test]
fn domain_without_actions() {
    let d = parse_domain("(define (domain empty) (:requirements :typing) (:types thing) (:predicates (p ?x - thing)))").unwrap();
    assert!(d.actions.is_empty());
    let text = serialize_domain(&d);
    assert_eq!(parse_domain(&text).unwrap(), d);
}

#[test]
fn minimal_domain_skeleton() {
    let d = parse_domain("(define (domain nothing))").unwrap();
    assert_eq!(serialize_domain(&d), "(define (domain nothing)\n)\n");
    assert_eq!(parse_domain(&serialize_domain(&d)).unwrap(), d);
}

#[test]
fn nonlinear_assign_is_rejected() {
    let text = "(define (domain nl) (:requirements :typing :fluents) (:types t)
      (:functions (f ?x - t) (g ?x - t))
      (:action a :parameters (?x - t) :precondition (and)
        :effect (and (assign (f ?x) (* (f ?x) (g ?x))))))";
    assert!(matches!(parse_domain(text), Err(PddlError::UnsupportedFeature(_))));
}

#[test]
fn unsupported_constructs() {
    let cond = "(define (domain c) (:requirements :typing) (:types t) (:predicates (p ?x - t) (q ?x - t))
      (:action a :parameters (?x - t) :precondition (and) :effect (and (when (p ?x) (q ?x)))))";
    assert!(matches!(parse_domain(cond), Err(PddlError::UnsupportedFeature(_))));
    let dur = "(define (domain c) (:requirements :durative-actions))";
    assert!(matches!(parse_domain(dur), Err(PddlError::UnsupportedFeature(_))));
}

#[test]
fn syntax_error_reports_position() {
    match parse_domain("(define (domain x)\n  (:predicates (p)") {
        Err(PddlError::Syntax { line, .. }) => assert!(line >= 1),
        other => panic!("expected syntax error, got {other:?}"),
    }
}

#[test]
fn unknown_parameter_type_is_a_type_error() {
    let text = "(define (domain c) (:requirements :typing) (:types t) (:predicates (p ?x - t))
      (:action a :parameters (?x - nosuch) :precondition (and) :effect (and)))";
    assert!(parse_domain(text).is_err());
}

#[test]
fn add_and_delete_of_same_atom_is_invalid() {
    let text = "(define (domain c) (:requirements :typing) (:types t) (:predicates (p ?x - t))
      (:action a :parameters (?x - t) :precondition (and) :effect (and (p ?x) (not (p ?x)))))";
    assert!(parse_domain(text).is_err());
}

#[test]
fn empty_goal_is_valid() {
    let d = parse_domain(EXAMPLE_DOMAIN).unwrap();
    let p = parse_problem(
        "(define (problem e) (:domain robot-fuel) (:objects r1 - robot a - location)
          (:init (at r1 a) (= (fuel r1) 3)) (:goal (and)))",
        &d,
    )
    .unwrap();
    assert!(p.goal_literals.is_empty() && p.goal_numeric.is_empty());
}

#[test]
fn missing_function_value_is_rejected() {
    let d = parse_domain(EXAMPLE_DOMAIN).unwrap();
    let r = parse_problem(
        "(define (problem e) (:domain robot-fuel) (:objects r1 r2 - robot a - location)
          (:init (at r1 a) (= (fuel r1) 3)) (:goal (and)))",
        &d,
    );
    assert!(matches!(r, Err(PddlError::UninitializedFunction(_))));
}

#[test]
fn undeclared_object_is_rejected() {
    let d = parse_domain(EXAMPLE_DOMAIN).unwrap();
    let r = parse_problem(
        "(define (problem e) (:domain robot-fuel) (:objects r1 - robot a - location)
          (:init (at r9 a) (= (fuel r1) 3)) (:goal (and)))",
        &d,
    );
    assert!(matches!(r, Err(PddlError::UnknownObjectType(_))));
}

#[test]
fn counters_numeric_goal() {
    let d = parse_domain(COUNTERS_DOMAIN).unwrap();
    let p = parse_problem(
        "(define (problem c2) (:domain fn-counters) (:objects c0 c1 - counter)
          (:init (= (max_int) 4) (= (value c0) 0) (= (value c1) 0))
          (:goal (and (<= (+ (value c0) 1) (value c1)))))",
        &d,
    )
    .unwrap();
    assert_eq!(p.goal_numeric.len(), 1);
    let g = p.goal_numeric.iter().next().unwrap();
    // hand-read: value(c0) - value(c1) <= -1
    let c0 = FuncTerm::new("value", vec![s("c0")]);
    let c1 = FuncTerm::new("value", vec![s("c1")]);
    assert_eq!(g.lhs.terms.len(), 2);
    assert_eq!(g.lhs.terms[&c0], rat(1));
    assert_eq!(g.lhs.terms[&c1], rat(-1));
    assert_eq!(g.comparator, Comparator::Le);
    assert_eq!(g.rhs, rat(-1));
    assert!(p.goal_literals.is_empty());
}

#[test]
fn bundled_domains_round_trip() {
    for text in [EXAMPLE_DOMAIN, COUNTERS_DOMAIN, SAILING_DOMAIN, DEPOT_DOMAIN] {
        let d = parse_domain(text).unwrap();
        let once = serialize_domain(&d);
        let d2 = parse_domain(&once).unwrap();
        assert_eq!(d, d2);
        assert_eq!(serialize_domain(&d2), once, "serializer must be a fixed point");
    }
}

#[test]
fn example_problem_round_trips() {
    let d = parse_domain(EXAMPLE_DOMAIN).unwrap();
    let p = parse_problem(EXAMPLE_PROBLEM, &d).unwrap();
    let text = serialize_problem(&p);
    assert_eq!(parse_problem(&text, &d).unwrap(), p);
}

#[test]
fn literals_are_read_exactly() {
    let d = parse_domain(SAILING_DOMAIN).unwrap();
    let ne = d.action("go_north_east").unwrap();
    assert_eq!(ne.num_effects[0].expr.constant, rat_frac(3, 2));
}

fn arb_term() -> impl Strategy<Value = FuncTerm> {
    (0..3usize, 0..3usize).prop_map(|(f, a)| FuncTerm::new(format!("f{f}"), vec![format!("?x{a}")]))
}

fn arb_linear() -> impl Strategy<Value = Vec<(i64, FuncTerm)>> {
    prop::collection::vec((-5i64..=5, arb_term()), 0..5)
}

fn as_expr(items: &[(i64, FuncTerm)], constant: i64) -> Expr {
    let mut parts: Vec<Expr> = items
        .iter()
        .map(|(c, t)| Expr::Mul(vec![Expr::Number(rat(*c)), Expr::Func(t.clone())]))
        .collect();
    parts.push(Expr::Number(rat(constant)));
    Expr::Add(parts)
}

proptest! {
    #[test]
    fn equal_expressions_normalize_identically(items in arb_linear(), constant in -9i64..9, seed in any::<u64>()) {
        let a = validate_linear(&as_expr(&items, constant)).unwrap();
        // Same sum written in a shuffled order, with each term split into two halves.
        let mut shuffled = items.clone();
        let n = shuffled.len();
        if n > 1 {
            shuffled.rotate_left((seed as usize) % n);
        }
        let mut parts = vec![Expr::Number(rat(constant))];
        for (c, t) in &shuffled {
            parts.push(Expr::Div(
                Box::new(Expr::Mul(vec![Expr::Func(t.clone()), Expr::Number(rat(*c))])),
                Box::new(Expr::Number(rat(2))),
            ));
            parts.push(Expr::Sub(
                Box::new(Expr::Mul(vec![Expr::Number(rat_frac(*c, 2)), Expr::Func(t.clone())])),
                Box::new(Expr::Number(rat(0))),
            ));
        }
        let b = validate_linear(&Expr::Add(parts)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.terms.values().all(|c| *c != rat(0)));
    }

    #[test]
    fn conditions_survive_serialization(items in arb_linear(), rhs in -9i64..9, cmp in 0..5usize) {
        let cmp = [Comparator::Lt, Comparator::Le, Comparator::Eq, Comparator::Ge, Comparator::Gt][cmp];
        let lhs = validate_linear(&as_expr(&items, 0)).unwrap();
        prop_assume!(!lhs.terms.is_empty());
        let c = NumericCondition::from_sides(&lhs, cmp, &LinearExpr::constant(rat(rhs)));
        let text = format!(
            "(define (domain p) (:requirements :typing :fluents) (:types t)
              (:functions (f0 ?x - t) (f1 ?x - t) (f2 ?x - t))
              (:action a :parameters (?x0 - t ?x1 - t ?x2 - t) :precondition (and {}) :effect (and)))",
            format_condition(&c)
        );
        let d = parse_domain(&text).unwrap();
        let got = d.actions[0].num_pre.iter().next().unwrap();
        prop_assert_eq!(got, &c);
    }
}
