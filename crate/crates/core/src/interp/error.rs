use thiserror::Error;

use crate::diagnostics::Diagnostic;
use crate::syntax::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct RuntimeError {
    pub span: Span,
    pub code: &'static str,
    pub message: String,
}

impl RuntimeError {
    pub fn new(span: Span, code: &'static str, message: impl Into<String>) -> Self {
        RuntimeError { span, code, message: message.into() }
    }

    pub fn type_mismatch(span: Span, message: impl Into<String>) -> Self {
        RuntimeError::new(span, "TypeMismatch", message)
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.span, self.code, self.message.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    /// Aborts the whole execution; never caught by statement-level recovery.
    #[error("step budget of {budget} exhausted")]
    BudgetExceeded { span: Span, budget: u64 },
}

impl EvalError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        match self {
            EvalError::Runtime(err) => err.to_diagnostic(),
            EvalError::BudgetExceeded { span, .. } => Diagnostic::error(*span, "BudgetExceeded", self.to_string()),
        }
    }
}
