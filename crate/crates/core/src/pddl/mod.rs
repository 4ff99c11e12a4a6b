//! PDDL 2.1 numeric domains and problems: reading, validation and writing.
//!
//! Numbers are exact rationals throughout this module. Conversion to floats
//! happens at grounding time.

pub mod ast;
pub mod error;
pub mod linear;
pub mod parser;
pub mod sexpr;
pub mod writer;

pub use ast::*;
pub use error::PddlError;
pub use linear::{
    parse_number, rat, rat_frac, rat_from_f64, rat_to_f64, validate_linear, Comparator, Expr, LinearExpr,
    NumericCondition, Rational,
};
pub use parser::{for_each_binding, parse_domain, parse_problem, validate_domain};
pub use writer::{format_condition, format_expr, format_number, serialize_domain, serialize_problem};

#[cfg(test)]
mod tests;
