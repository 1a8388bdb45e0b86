//! Parameterized local lexing.
//!
//! A recognizer for grammars whose symbols carry *parameters*: every rule
//! `N -> X1 .. Xk` is decorated with partial functions that compute the input
//! parameter handed to each right-hand-side symbol from everything derived so
//! far, plus one more function for the rule's own output. Lexing is local —
//! the set of tokens considered at a position depends on the parse state at
//! that position — and a selector resolves which candidate tokens survive.
//!
//! Module map:
//!
//! * [`grammar`] — symbols, partial parameter functions, rules, validation.
//! * [`lexing`] — tokens, lexer/selector wrappers with always-on contract
//!   checks, and the built-in lexer and selector families.
//! * [`pella`] — the engine: parameterized chart items and the
//!   position-by-position fixpoint driver.
//! * [`induced`] — the translation of a parameterized grammar over a finite
//!   parameter domain into a plain context-free grammar, lexer, and selector,
//!   plus the item translation used by correspondence checks.
//! * [`ella`] — the independent reference recognizer (classical chart parsing
//!   over the induced grammar) that the engine is differentially tested
//!   against.

pub mod ella;
pub mod error;
pub mod grammar;
pub mod induced;
pub mod lexing;
pub mod pella;

pub use error::EngineError;

#[cfg(test)]
pub(crate) mod fixtures;
