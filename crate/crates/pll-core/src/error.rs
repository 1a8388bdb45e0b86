//! Error type shared by every engine operation.

use thiserror::Error;

/// Failures an engine run can surface.
///
/// "A parameter function is undefined at these arguments" is *not* an error —
/// partial functions return an undefined outcome as a value (see
/// [`crate::grammar::ParamFn::apply`]). Errors are reserved for contract
/// violations, caller bugs, and resource exhaustion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    /// A parameter function was applied to a tuple of the wrong length.
    /// This is a caller bug, never the "undefined" outcome.
    #[error("parameter function arity mismatch: expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    /// A lexer returned a token that fails the match condition: wrong
    /// terminal, wrong input parameter, characters that do not literally
    /// occur at the queried position, or a span past the end of input.
    #[error("lexer contract violation for terminal `{terminal}` at position {position}: {detail}")]
    LexerContract {
        terminal: String,
        position: usize,
        detail: String,
    },

    /// A selector returned a set that either dropped a required token or
    /// invented one outside the candidate set.
    #[error("selector contract violation: {detail}")]
    SelectorContract { detail: String },

    /// An internal invariant the engine maintains was observed broken —
    /// always a bug in the engine or in a hand-built component, never a
    /// property of the input string.
    #[error("internal invariant violated: {detail}")]
    InternalInvariant { detail: String },

    /// A configured limit was exceeded while closing a fixpoint.
    #[error("resource limit exceeded at position {position}: {detail}")]
    ResourceExhausted { position: usize, detail: String },

    /// During induction a parameter function produced a defined value outside
    /// the declared finite domain.
    #[error("parameter domain escape: {detail}")]
    DomainEscape { detail: String },

    /// Induction was requested but the grammar declares no finite domain.
    #[error("induction requires a finite parameter domain")]
    MissingDomain,
}
