use thiserror::Error;

use super::sexpr::Pos;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unsupported PDDL feature: {0}")]
    UnsupportedFeature(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("non-linear expression: {0}")]
    NonLinear(String),
    #[error("unknown object or type: {0}")]
    UnknownObjectType(String),
    #[error("function instance {0} has no initial value")]
    UninitializedFunction(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

impl PddlError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        PddlError::Syntax {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}
