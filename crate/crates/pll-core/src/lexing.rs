//! Tokens, lexers, and selectors, with always-on contract checks.
//!
//! A lexer answers "which tokens for terminal `t` with input parameter `a`
//! start at position `k`?", and may consult the whole input. Every answer
//! must satisfy the match condition: the token's characters occur literally
//! at the queried position and stay inside the input. A selector then
//! narrows the candidate tokens at a position; it may drop candidates but
//! must keep everything already selected earlier and may never invent
//! tokens. Both wrappers re-check these contracts on every call, so a
//! misbehaving user-supplied component surfaces as a typed error instead of
//! corrupting the chart.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::EngineError;
use crate::grammar::{Param, SymbolId};

/// One token: terminal, input parameter, output parameter, and the matched
/// characters (possibly empty — zero-width tokens are legal).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token<P> {
    pub terminal: SymbolId,
    pub in_param: P,
    pub out_param: P,
    pub chars: Vec<char>,
}

impl<P: Param> Token<P> {
    pub fn new(terminal: SymbolId, in_param: P, out_param: P, text: &str) -> Self {
        Token {
            terminal,
            in_param,
            out_param,
            chars: text.chars().collect(),
        }
    }

    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }

    pub fn width(&self) -> usize {
        self.chars.len()
    }
}

impl<P: Param + fmt::Display> fmt::Display for Token<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {:?})",
            self.terminal,
            self.in_param,
            self.out_param,
            self.text()
        )
    }
}

pub type TokenSet<P> = BTreeSet<Token<P>>;

/// A set of characters, kept as inclusive ranges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharClass {
    ranges: Vec<(char, char)>,
}

impl CharClass {
    pub fn single(c: char) -> Self {
        CharClass { ranges: vec![(c, c)] }
    }

    pub fn range(lo: char, hi: char) -> Self {
        assert!(lo <= hi, "empty character range {lo:?}..{hi:?}");
        CharClass { ranges: vec![(lo, hi)] }
    }

    pub fn from_ranges(ranges: Vec<(char, char)>) -> Self {
        assert!(!ranges.is_empty(), "character class needs at least one range");
        for (lo, hi) in &ranges {
            assert!(lo <= hi, "empty character range {lo:?}..{hi:?}");
        }
        CharClass { ranges }
    }

    pub fn contains(&self, c: char) -> bool {
        self.ranges.iter().any(|(lo, hi)| (*lo..=*hi).contains(&c))
    }

    pub fn ranges(&self) -> &[(char, char)] {
        &self.ranges
    }

    /// Every character of the class, in order (for alphabet collection;
    /// classes are expected to be small).
    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.ranges.iter().flat_map(|(lo, hi)| *lo..=*hi)
    }
}

/// How a span lexer picks match lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanMode {
    /// Only the maximal run.
    Greedy,
    /// Every length from 1 to the maximal run.
    AllLengths,
}

type MatcherFn<P> = dyn Fn(&P, &[char], usize) -> Vec<(P, Vec<char>)> + Send + Sync;

/// The per-terminal half of a lexer: given the input parameter and a
/// position, produce (output parameter, matched characters) pairs. The
/// built-in constructors below satisfy the match condition by construction.
#[derive(Clone)]
pub struct TerminalLexer<P> {
    matcher: Arc<MatcherFn<P>>,
}

impl<P: Param> TerminalLexer<P> {
    pub fn new(matcher: impl Fn(&P, &[char], usize) -> Vec<(P, Vec<char>)> + Send + Sync + 'static) -> Self {
        TerminalLexer {
            matcher: Arc::new(matcher),
        }
    }
}

impl<P> fmt::Debug for TerminalLexer<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TerminalLexer")
    }
}

/// Matches one exact literal (which may be empty — a zero-width token);
/// the output parameter is computed from the input parameter alone, and an
/// undefined result means "no token".
pub fn lexer_literal<P: Param>(
    literal: &str,
    out: impl Fn(&P) -> Option<P> + Send + Sync + 'static,
) -> TerminalLexer<P> {
    let lit: Vec<char> = literal.chars().collect();
    TerminalLexer::new(move |alpha, input, k| {
        if k > input.len() || k + lit.len() > input.len() {
            return Vec::new();
        }
        if input[k..k + lit.len()] != lit[..] {
            return Vec::new();
        }
        match out(alpha) {
            Some(beta) => vec![(beta, lit.clone())],
            None => Vec::new(),
        }
    })
}

/// Matches runs of class characters. `Greedy` offers only the maximal run,
/// `AllLengths` every nonempty prefix of it; either way at least one
/// character must match. The output parameter sees the input parameter and
/// the matched length.
pub fn lexer_charspan<P: Param>(
    class: CharClass,
    mode: SpanMode,
    out: impl Fn(&P, usize) -> Option<P> + Send + Sync + 'static,
) -> TerminalLexer<P> {
    TerminalLexer::new(move |alpha, input: &[char], k| {
        if k >= input.len() {
            return Vec::new();
        }
        let run = input[k..].iter().take_while(|c| class.contains(**c)).count();
        if run == 0 {
            return Vec::new();
        }
        let lengths: Vec<usize> = match mode {
            SpanMode::Greedy => vec![run],
            SpanMode::AllLengths => (1..=run).collect(),
        };
        lengths
            .into_iter()
            .filter_map(|len| {
                out(alpha, len).map(|beta| (beta, input[k..k + len].to_vec()))
            })
            .collect()
    })
}

/// Consumes exactly `count(alpha)` class characters — no token if the count
/// is undefined or that many class characters are not available. A count of
/// zero yields a zero-width token. The output parameter sees the input
/// parameter and the consumed length.
pub fn lexer_count<P: Param>(
    class: CharClass,
    count: impl Fn(&P) -> Option<usize> + Send + Sync + 'static,
    out: impl Fn(&P, usize) -> Option<P> + Send + Sync + 'static,
) -> TerminalLexer<P> {
    TerminalLexer::new(move |alpha, input: &[char], k| {
        let Some(n) = count(alpha) else {
            return Vec::new();
        };
        // Checked: n can be arbitrarily large, so `k + n` must not wrap.
        if k > input.len() || n > input.len() - k {
            return Vec::new();
        }
        if !input[k..k + n].iter().all(|c| class.contains(*c)) {
            return Vec::new();
        }
        match out(alpha, n) {
            Some(beta) => vec![(beta, input[k..k + n].to_vec())],
            None => Vec::new(),
        }
    })
}

type LexEval<P> = dyn Fn(&SymbolId, &P, &[char], usize) -> TokenSet<P> + Send + Sync;

/// The full lexer component: one function over (terminal, input parameter,
/// input, position). Use [`LexerFn::from_table`] to assemble it from
/// per-terminal matchers, or [`LexerFn::new`] for a hand-rolled function
/// (which the [`LexerFn::lex`] wrapper will police).
#[derive(Clone)]
pub struct LexerFn<P> {
    eval: Arc<LexEval<P>>,
}

impl<P: Param> LexerFn<P> {
    pub fn new(
        eval: impl Fn(&SymbolId, &P, &[char], usize) -> TokenSet<P> + Send + Sync + 'static,
    ) -> Self {
        LexerFn {
            eval: Arc::new(eval),
        }
    }

    /// Assemble a lexer from per-terminal matchers. Terminals absent from
    /// the table lex to the empty set.
    pub fn from_table(table: BTreeMap<SymbolId, TerminalLexer<P>>) -> Self {
        LexerFn::new(move |terminal, alpha, input, k| {
            let Some(rule) = table.get(terminal) else {
                return TokenSet::new();
            };
            (rule.matcher)(alpha, input, k)
                .into_iter()
                .map(|(beta, chars)| Token {
                    terminal: terminal.clone(),
                    in_param: alpha.clone(),
                    out_param: beta,
                    chars,
                })
                .collect()
        })
    }

    /// Run the lexer and re-check the match condition on every returned
    /// token: right terminal, right input parameter, characters literally
    /// present at `k`, span inside the input.
    pub fn lex(
        &self,
        terminal: &SymbolId,
        alpha: &P,
        input: &[char],
        k: usize,
    ) -> Result<TokenSet<P>, EngineError> {
        let tokens = (self.eval)(terminal, alpha, input, k);
        for token in &tokens {
            let violation = if &token.terminal != terminal {
                Some(format!(
                    "token reports terminal `{}` instead of the queried terminal",
                    token.terminal
                ))
            } else if &token.in_param != alpha {
                Some("token reports a different input parameter than queried".to_string())
            } else if k + token.width() > input.len() {
                Some(format!(
                    "token of width {} does not fit in the remaining input",
                    token.width()
                ))
            } else if input[k..k + token.width()] != token.chars[..] {
                Some(format!(
                    "token text {:?} does not occur at position {k}",
                    token.text()
                ))
            } else {
                None
            };
            if let Some(detail) = violation {
                return Err(EngineError::LexerContract {
                    terminal: terminal.name.clone(),
                    position: k,
                    detail,
                });
            }
        }
        Ok(tokens)
    }
}

impl<P> fmt::Debug for LexerFn<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LexerFn")
    }
}

type SelEval<P> = dyn Fn(&TokenSet<P>, &TokenSet<P>) -> TokenSet<P> + Send + Sync;

/// The selection component: narrows candidate tokens at a position. The
/// [`SelectorFn::select`] wrapper enforces required ⊆ result ⊆ candidates.
#[derive(Clone)]
pub struct SelectorFn<P> {
    eval: Arc<SelEval<P>>,
}

impl<P: Param> SelectorFn<P> {
    pub fn new(
        eval: impl Fn(&TokenSet<P>, &TokenSet<P>) -> TokenSet<P> + Send + Sync + 'static,
    ) -> Self {
        SelectorFn {
            eval: Arc::new(eval),
        }
    }

    /// Apply the selector. `required` must already be contained in
    /// `candidates` (the engine maintains this; a violation is an internal
    /// invariant failure, not a selector bug). The result is checked to
    /// contain `required` and stay inside `candidates`.
    pub fn select(
        &self,
        required: &TokenSet<P>,
        candidates: &TokenSet<P>,
    ) -> Result<TokenSet<P>, EngineError> {
        if !required.is_subset(candidates) {
            return Err(EngineError::InternalInvariant {
                detail: "selector precondition broken: required tokens are not among the candidates"
                    .to_string(),
            });
        }
        let result = (self.eval)(required, candidates);
        if !required.is_subset(&result) {
            return Err(EngineError::SelectorContract {
                detail: "selector dropped a token that was already selected".to_string(),
            });
        }
        if !result.is_subset(candidates) {
            return Err(EngineError::SelectorContract {
                detail: "selector returned a token outside the candidate set".to_string(),
            });
        }
        Ok(result)
    }
}

impl<P> fmt::Debug for SelectorFn<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SelectorFn")
    }
}

/// Keeps every candidate.
pub fn selector_all<P: Param>() -> SelectorFn<P> {
    SelectorFn::new(|_required, candidates| candidates.clone())
}

/// Keeps only the widest candidates (plus everything already required).
pub fn selector_longest<P: Param>() -> SelectorFn<P> {
    SelectorFn::new(|required, candidates| {
        let Some(max) = candidates.iter().map(Token::width).max() else {
            return required.clone();
        };
        let mut result: TokenSet<P> = candidates
            .iter()
            .filter(|t| t.width() == max)
            .cloned()
            .collect();
        result.extend(required.iter().cloned());
        result
    })
}

/// Keeps only the candidates whose terminal ranks best in `ranking`
/// (earlier is better; unranked terminals tie for last place), plus
/// everything already required.
pub fn selector_priority<P: Param>(ranking: Vec<SymbolId>) -> SelectorFn<P> {
    SelectorFn::new(move |required, candidates| {
        let rank = |t: &Token<P>| {
            ranking
                .iter()
                .position(|s| s == &t.terminal)
                .unwrap_or(ranking.len())
        };
        let Some(best) = candidates.iter().map(rank).min() else {
            return required.clone();
        };
        let mut result: TokenSet<P> = candidates
            .iter()
            .filter(|t| rank(t) == best)
            .cloned()
            .collect();
        result.extend(required.iter().cloned());
        result
    })
}
