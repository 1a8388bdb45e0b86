//! Command-line front end for the parameterized recognizer: a small
//! grammar-description language, a compiler from it to executable
//! grammars, and engine-vs-oracle differential checking.

pub mod commands;
pub mod compile;
pub mod diff;
pub mod doc;
pub mod expr;
pub mod fuzz;
pub mod parse;

pub use commands::run;
