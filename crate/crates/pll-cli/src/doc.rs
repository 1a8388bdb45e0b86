//! The grammar file document model: what a `.pll` file says, structured but
//! uninterpreted, plus the canonical printer that writes it back out.
//!
//! Parsing produces this model (see [`crate::parse`]) and compiling turns it
//! into an executable grammar (see [`crate::compile`]). The printer and the
//! parser are inverses on well-formed documents: rendering a parsed document
//! and reparsing it yields the same document.

use std::fmt;

use crate::expr::{Expr, Guard};

/// One parsed grammar file, declarations in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarDoc {
    /// Inclusive parameter domain bounds.
    pub domain: (i64, i64),
    /// Start symbol name and start parameter.
    pub start: (String, i64),
    pub selector: SelectorDecl,
    pub terminals: Vec<TerminalDecl>,
    pub rules: Vec<RuleDecl>,
}

/// The token-selection policy declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectorDecl {
    /// Keep every candidate token.
    All,
    /// Keep only the widest candidates.
    Longest,
    /// Keep only the candidates of the best-ranked terminal, earlier names
    /// ranking higher.
    Priority(Vec<String>),
}

/// One `terminal` declaration.
#[derive(Debug, Clone, Eq)]
pub struct TerminalDecl {
    pub name: String,
    pub matcher: MatcherDecl,
    /// Output parameter expression, over `a` and `len`.
    pub out: Expr,
    /// Optional guard; a false or undefined guard means no token.
    pub guard: Option<Guard>,
    /// Source line, for compile diagnostics. Not part of document identity.
    pub line: usize,
}

impl PartialEq for TerminalDecl {
    fn eq(&self, other: &Self) -> bool {
        (&self.name, &self.matcher, &self.out, &self.guard)
            == (&other.name, &other.matcher, &other.out, &other.guard)
    }
}

/// How a terminal matches characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatcherDecl {
    /// Exactly one specific character.
    Char(char),
    /// An exact string, possibly empty (a zero-width token).
    Lit(String),
    /// A run of class characters: the maximal run, or every nonempty
    /// prefix of it.
    Span { class: ClassDecl, mode: SpanModeDecl },
    /// Exactly `by` class characters, where `by` is computed from `a`.
    Count { class: ClassDecl, by: Expr },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanModeDecl {
    Greedy,
    All,
}

/// A character class: inclusive ranges, as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub ranges: Vec<(char, char)>,
}

/// One `rule` declaration.
#[derive(Debug, Clone, Eq)]
pub struct RuleDecl {
    pub lhs: String,
    pub rhs: Vec<String>,
    /// The `in1 .. ink` and `out` clauses, in file order.
    pub clauses: Vec<ClauseDecl>,
    /// Source line, for compile diagnostics. Not part of document identity.
    pub line: usize,
}

impl PartialEq for RuleDecl {
    fn eq(&self, other: &Self) -> bool {
        (&self.lhs, &self.rhs, &self.clauses) == (&other.lhs, &other.rhs, &other.clauses)
    }
}

/// One parameter-function clause of a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseDecl {
    pub target: ClauseTarget,
    pub expr: Expr,
    pub guard: Option<Guard>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseTarget {
    /// `inN`: the input of the N-th right-hand-side symbol (1-based).
    In(usize),
    /// `out`: the rule's output.
    Out,
}

impl fmt::Display for ClauseTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseTarget::In(n) => write!(f, "in{n}"),
            ClauseTarget::Out => f.write_str("out"),
        }
    }
}

fn escape_char(c: char, quote: char, out: &mut String) {
    match c {
        '\\' => out.push_str("\\\\"),
        '\n' => out.push_str("\\n"),
        '\t' => out.push_str("\\t"),
        c if c == quote => {
            out.push('\\');
            out.push(c);
        }
        c => out.push(c),
    }
}

impl fmt::Display for ClassDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut text = String::from("[");
        for (lo, hi) in &self.ranges {
            escape_class_char(*lo, &mut text);
            if lo != hi {
                text.push('-');
                escape_class_char(*hi, &mut text);
            }
        }
        text.push(']');
        f.write_str(&text)
    }
}

fn escape_class_char(c: char, out: &mut String) {
    match c {
        '\\' | ']' | '-' => {
            out.push('\\');
            out.push(c);
        }
        '\n' => out.push_str("\\n"),
        '\t' => out.push_str("\\t"),
        c => out.push(c),
    }
}

impl fmt::Display for MatcherDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatcherDecl::Char(c) => {
                let mut text = String::new();
                escape_char(*c, '\'', &mut text);
                write!(f, "char '{text}'")
            }
            MatcherDecl::Lit(s) => {
                let mut text = String::new();
                for c in s.chars() {
                    escape_char(c, '"', &mut text);
                }
                write!(f, "lit \"{text}\"")
            }
            MatcherDecl::Span { class, mode } => {
                let mode = match mode {
                    SpanModeDecl::Greedy => "greedy",
                    SpanModeDecl::All => "all",
                };
                write!(f, "span {class} {mode}")
            }
            MatcherDecl::Count { class, by } => write!(f, "count {class} by {by}"),
        }
    }
}

impl GrammarDoc {
    /// The canonical text of the document: one declaration per line, in the
    /// fixed order domain, start, selector, terminals, rules (each group in
    /// file order). Reparsing the result reproduces the document.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("domain {}..{}\n", self.domain.0, self.domain.1));
        out.push_str(&format!("start {} {}\n", self.start.0, self.start.1));
        match &self.selector {
            SelectorDecl::All => out.push_str("selector all\n"),
            SelectorDecl::Longest => out.push_str("selector longest\n"),
            SelectorDecl::Priority(names) => {
                out.push_str(&format!("selector priority {}\n", names.join(" ")));
            }
        }
        for t in &self.terminals {
            out.push_str(&format!("terminal {} = {} out {}", t.name, t.matcher, t.out));
            if let Some(guard) = &t.guard {
                out.push_str(&format!(" when {guard}"));
            }
            out.push('\n');
        }
        for r in &self.rules {
            out.push_str(&format!("rule {} ->", r.lhs));
            for sym in &r.rhs {
                out.push(' ');
                out.push_str(sym);
            }
            let clauses: Vec<String> = r
                .clauses
                .iter()
                .map(|c| {
                    let mut s = format!("{} = {}", c.target, c.expr);
                    if let Some(guard) = &c.guard {
                        s.push_str(&format!(" when {guard}"));
                    }
                    s
                })
                .collect();
            out.push_str(&format!(" {{ {} }}\n", clauses.join(" ; ")));
        }
        out
    }
}
