//! Evaluation and inference: the trace interpreter, the standard library,
//! rejection sampling and the exact enumeration oracle.

mod compile;
mod enumerate;
mod error;
mod eval;
mod rejection;
mod stdlib;
mod value;

pub use compile::CompiledProgram;
pub use enumerate::{enumerate_exact, enumerate_exact_with_limit, ExactDistribution, DEFAULT_MAX_TRACES};
pub use error::{EnumerateError, EvalError, EvalErrorKind, InferError};
pub use eval::{attempt_rng, Trace, MAX_CALL_DEPTH};
pub use rejection::{
    attempt, query_record, run_rejection, PosteriorEstimate, RejectionConfig, DEFAULT_MAX_ATTEMPTS_PER_SAMPLE,
};
pub use stdlib::{normal_cdf, Builtin};
pub use value::{Callable, Value};

use crate::lang::{parse_source, ParseDiagnostic};

/// Either stage of turning source text into a runnable program.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseDiagnostic),
    #[error(transparent)]
    Infer(#[from] InferError),
}

/// Parse and compile source text.
pub fn load(text: &str) -> Result<CompiledProgram, LoadError> {
    Ok(CompiledProgram::compile(&parse_source(text)?)?)
}
