use serde::{Deserialize, Serialize};

use crate::lang::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalErrorKind {
    UnboundIdentifier,
    Arity,
    Type,
    /// An operation produced NaN or an infinity.
    NonFinite,
    /// A primitive was called outside its domain, e.g. `flip(1.5)`.
    Domain,
    NonBooleanCondition,
    RecursionLimit,
    Unsupported,
}

/// A runtime failure inside a trace, located at the responsible expression.
#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
#[error("eval error at {span}: {message}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub message: String,
    pub span: Span,
}

impl EvalError {
    pub fn new(kind: EvalErrorKind, message: impl Into<String>, span: Span) -> Self {
        EvalError {
            kind,
            message: message.into(),
            span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InferError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no model found: expected `Infer({{model: ...}})` or a top-level `model` function")]
    NoModel,
    #[error("unsupported inference method '{0}'; only 'rejection' is available")]
    UnsupportedMethod(String),
    #[error("{attempts} consecutive attempts rejected after {accepted} accepted samples")]
    MaxRejections { attempts: u64, accepted: usize },
    #[error("model result: {0}")]
    BadResult(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnumerateError {
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error("continuous primitive `{primitive}` at {span} cannot be enumerated")]
    UnsupportedContinuous { primitive: &'static str, span: Span },
    #[error("enumeration exceeded the limit of {limit} traces")]
    BudgetExceeded { limit: u64 },
    #[error("every execution path is rejected")]
    AllRejected,
}

impl From<EvalError> for EnumerateError {
    fn from(e: EvalError) -> Self {
        EnumerateError::Infer(InferError::Eval(e))
    }
}
