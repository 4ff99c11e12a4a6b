//! Exact linear arithmetic over function terms.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ast::FuncTerm;
use super::error::PddlError;

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational value of a finite float.
pub fn rat_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses a PDDL numeric literal (`10`, `-3`, `1.5`, `.25`) exactly.
pub fn parse_number(text: &str) -> Option<Rational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(numer, denom);
    Some(if neg { -value } else { value })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinearExpr {
    pub constant: Rational,
    pub terms: BTreeMap<FuncTerm, Rational>,
}

impl LinearExpr {
    pub fn constant(c: Rational) -> Self {
        LinearExpr {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(t: FuncTerm) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(t, Rational::one());
        LinearExpr {
            constant: Rational::zero(),
            terms,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LinearExpr) -> LinearExpr {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (t, c) in &other.terms {
            let entry = out.terms.entry(t.clone()).or_insert_with(Rational::zero);
            *entry += c;
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn scale(&self, k: &Rational) -> LinearExpr {
        if k.is_zero() {
            return LinearExpr::default();
        }
        LinearExpr {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(t, c)| (t.clone(), c * k)).collect(),
        }
    }

    pub fn sub(&self, other: &LinearExpr) -> LinearExpr {
        self.add(&other.scale(&rat(-1)))
    }

    /// Renames every function term through `f` (e.g. variable → object substitution).
    pub fn map_terms(&self, mut f: impl FnMut(&FuncTerm) -> FuncTerm) -> LinearExpr {
        let mut out = LinearExpr::constant(self.constant.clone());
        for (t, c) in &self.terms {
            let entry = out.terms.entry(f(t)).or_insert_with(Rational::zero);
            *entry += c;
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn eval_exact(&self, mut value: impl FnMut(&FuncTerm) -> Rational) -> Rational {
        let mut acc = self.constant.clone();
        for (t, c) in &self.terms {
            acc += c * value(t);
        }
        acc
    }
}

impl fmt::Display for LinearExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (t, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "{t}")?;
            } else {
                write!(f, "{c}*{t}")?;
            }
        }
        if first || !self.constant.is_zero() {
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "{}", self.constant)?;
        }
        Ok(())
    }
}

/// Raw arithmetic expression as written in a PDDL source.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(Rational),
    Func(FuncTerm),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

/// Normalizes an arithmetic expression into canonical linear form.
///
/// Fails with [`PddlError::NonLinear`] on any product of two non-constant
/// factors or any division by a non-constant.
pub fn validate_linear(e: &Expr) -> Result<LinearExpr, PddlError> {
    match e {
        Expr::Number(r) => Ok(LinearExpr::constant(r.clone())),
        Expr::Func(t) => Ok(LinearExpr::term(t.clone())),
        Expr::Add(items) => items
            .iter()
            .try_fold(LinearExpr::default(), |acc, x| Ok(acc.add(&validate_linear(x)?))),
        Expr::Sub(a, b) => Ok(validate_linear(a)?.sub(&validate_linear(b)?)),
        Expr::Neg(a) => Ok(validate_linear(a)?.scale(&rat(-1))),
        Expr::Mul(items) => {
            let mut acc = LinearExpr::constant(Rational::one());
            for x in items {
                let v = validate_linear(x)?;
                acc = if acc.is_constant() {
                    v.scale(&acc.constant)
                } else if v.is_constant() {
                    acc.scale(&v.constant)
                } else {
                    return Err(PddlError::NonLinear(format!("product of ({acc}) and ({v})")));
                };
            }
            Ok(acc)
        }
        Expr::Div(a, b) => {
            let num = validate_linear(a)?;
            let den = validate_linear(b)?;
            if !den.is_constant() {
                return Err(PddlError::NonLinear(format!("division by ({den})")));
            }
            if den.constant.is_zero() {
                return Err(PddlError::NonLinear("division by zero".into()));
            }
            Ok(num.scale(&den.constant.recip()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "<" => Comparator::Lt,
            "<=" => Comparator::Le,
            "=" => Comparator::Eq,
            ">=" => Comparator::Ge,
            ">" => Comparator::Gt,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }

    /// Comparator after multiplying both sides by -1.
    pub fn flipped(self) -> Self {
        match self {
            Comparator::Lt => Comparator::Gt,
            Comparator::Le => Comparator::Ge,
            Comparator::Eq => Comparator::Eq,
            Comparator::Ge => Comparator::Le,
            Comparator::Gt => Comparator::Lt,
        }
    }

    pub fn holds_exact(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Gt => lhs > rhs,
        }
    }

    /// Float comparison; only `=` uses the tolerance.
    pub fn holds_f64(self, lhs: f64, rhs: f64, eq_tol: f64) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Eq => (lhs - rhs).abs() <= eq_tol,
            Comparator::Ge => lhs >= rhs,
            Comparator::Gt => lhs > rhs,
        }
    }
}

/// `lhs <cmp> rhs` where `lhs` carries no constant.
///
/// Canonical form: integer coefficients with gcd 1 (rhs included), leading
/// coefficient positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NumericCondition {
    pub lhs: LinearExpr,
    pub comparator: Comparator,
    pub rhs: Rational,
}

impl NumericCondition {
    /// Builds the canonical condition equivalent to `left <cmp> right`.
    pub fn from_sides(left: &LinearExpr, comparator: Comparator, right: &LinearExpr) -> Self {
        let diff = left.sub(right);
        let lhs = LinearExpr {
            constant: Rational::zero(),
            terms: diff.terms,
        };
        Self::canonical(lhs, comparator, -diff.constant)
    }

    pub fn canonical(mut lhs: LinearExpr, mut comparator: Comparator, mut rhs: Rational) -> Self {
        lhs.constant = Rational::zero();
        lhs.terms.retain(|_, c| !c.is_zero());
        let scale = integer_scale(lhs.terms.values().chain(std::iter::once(&rhs)));
        if let Some(k) = scale {
            lhs = lhs.scale(&k);
            rhs *= &k;
        }
        if lhs.terms.values().next().is_some_and(|c| c.is_negative()) {
            lhs = lhs.scale(&rat(-1));
            rhs = -rhs;
            comparator = comparator.flipped();
        }
        NumericCondition { lhs, comparator, rhs }
    }

    pub fn holds_exact(&self, value: impl FnMut(&FuncTerm) -> Rational) -> bool {
        let v = self.lhs.eval_exact(value);
        self.comparator.holds_exact(&v, &self.rhs)
    }

    pub fn map_terms(&self, f: impl FnMut(&FuncTerm) -> FuncTerm) -> NumericCondition {
        NumericCondition::canonical(self.lhs.map_terms(f), self.comparator, self.rhs.clone())
    }
}

impl fmt::Display for NumericCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.comparator.symbol(), self.rhs)
    }
}

/// Positive factor that makes every value an integer with overall gcd 1.
/// `None` when all values are zero.
pub fn integer_scale<'a>(values: impl Iterator<Item = &'a Rational> + Clone) -> Option<Rational> {
    let mut lcm = BigInt::one();
    let mut any = false;
    for v in values.clone() {
        if !v.is_zero() {
            any = true;
            lcm = lcm.lcm(v.denom());
        }
    }
    if !any {
        return None;
    }
    let mut gcd = BigInt::zero();
    for v in values {
        if !v.is_zero() {
            let n = (v * Rational::from_integer(lcm.clone())).to_integer();
            gcd = gcd.gcd(&n);
        }
    }
    Some(Rational::new(lcm, gcd))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(name: &str, args: &[&str]) -> FuncTerm {
        FuncTerm::new(name, args.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn numbers_parse_exactly() {
        assert_eq!(parse_number("10"), Some(rat(10)));
        assert_eq!(parse_number("1.5"), Some(rat_frac(3, 2)));
        assert_eq!(parse_number("-0.25"), Some(rat_frac(-1, 4)));
        assert_eq!(parse_number(".5"), Some(rat_frac(1, 2)));
        assert_eq!(parse_number("0.1"), Some(rat_frac(1, 10)));
        assert_eq!(parse_number("abc"), None);
        assert_eq!(parse_number("-"), None);
        assert_eq!(parse_number("1.2.3"), None);
    }

    #[test]
    fn plus_constant_normalizes() {
        let e = Expr::Add(vec![Expr::Func(f("f", &["?x"])), Expr::Number(rat(3))]);
        let l = validate_linear(&e).unwrap();
        assert_eq!(l.constant, rat(3));
        assert_eq!(l.terms.get(&f("f", &["?x"])), Some(&rat(1)));
        assert_eq!(l.terms.len(), 1);
    }

    #[test]
    fn difference_of_scaled_terms_normalizes() {
        let e = Expr::Sub(
            Box::new(Expr::Mul(vec![Expr::Number(rat(2)), Expr::Func(f("f", &["?x"]))])),
            Box::new(Expr::Func(f("g", &["?y"]))),
        );
        let l = validate_linear(&e).unwrap();
        assert_eq!(l.constant, rat(0));
        assert_eq!(l.terms.get(&f("f", &["?x"])), Some(&rat(2)));
        assert_eq!(l.terms.get(&f("g", &["?y"])), Some(&rat(-1)));
    }

    #[test]
    fn square_is_nonlinear() {
        let e = Expr::Mul(vec![Expr::Func(f("f", &["?x"])), Expr::Func(f("f", &["?x"]))]);
        assert!(matches!(validate_linear(&e), Err(PddlError::NonLinear(_))));
        let d = Expr::Div(Box::new(Expr::Number(rat(1))), Box::new(Expr::Func(f("f", &[]))));
        assert!(matches!(validate_linear(&d), Err(PddlError::NonLinear(_))));
    }

    #[test]
    fn cancelling_terms_drop_out() {
        let x = Expr::Func(f("f", &["?x"]));
        let e = Expr::Sub(Box::new(x.clone()), Box::new(x));
        assert!(validate_linear(&e).unwrap().terms.is_empty());
    }

    #[test]
    fn condition_canonical_form_flips_sign() {
        // 7 <= fuel  ==>  fuel >= 7
        let fuel = LinearExpr::term(f("fuel", &["?r"]));
        let c = NumericCondition::from_sides(&LinearExpr::constant(rat(7)), Comparator::Le, &fuel);
        assert_eq!(c.comparator, Comparator::Ge);
        assert_eq!(c.rhs, rat(7));
        assert_eq!(c.lhs, fuel);
        // 2*fuel <= 4  ==> fuel <= 2
        let c2 = NumericCondition::from_sides(&fuel.scale(&rat(2)), Comparator::Le, &LinearExpr::constant(rat(4)));
        assert_eq!(c2.rhs, rat(2));
        assert_eq!(c2.lhs, fuel);
        // x/2 + y/3 <= 1 ==> 3x + 2y <= 6
        let e = LinearExpr::term(f("x", &[]))
            .scale(&rat_frac(1, 2))
            .add(&LinearExpr::term(f("y", &[])).scale(&rat_frac(1, 3)));
        let c3 = NumericCondition::from_sides(&e, Comparator::Le, &LinearExpr::constant(rat(1)));
        assert_eq!(c3.rhs, rat(6));
        assert_eq!(c3.lhs.terms[&f("x", &[])], rat(3));
    }
}
