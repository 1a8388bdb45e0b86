//! Flattening a parameterized grammar over a finite domain into a plain
//! context-free grammar, plus the machinery to compare the two recognizers
//! item by item.
//!
//! Every nonterminal or terminal `X` splits into tagged copies `X[a->b]`,
//! one per (input, output) parameter pair. A rule's parameter functions are
//! unrolled over the domain: each fully-defined evaluation chain becomes an
//! ordinary rule over tagged symbols, and each chain that runs into an
//! undefined function becomes a rule ending in the unmatchable symbol `BOT`,
//! recording that the engine can consume that symbol prefix but never finish
//! the rule. A fresh root `TOP` rewrites to the tagged start symbol, once
//! per possible output.
//!
//! The flattening only tells the truth about the engine when the domain is
//! closed under the grammar's functions and the lexer's outputs:
//! [`induce_grammar`] rejects a function that maps domain values outside the
//! domain, and the correspondence checker will expose an escaping lexer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::EngineError;
use crate::grammar::{Grammar, Param, ParamFn, RuleId, SymbolId};
use crate::lexing::{LexerFn, SelectorFn, Token, TokenSet};
use crate::pella::{ItemSet, ParameterizedItem};

/// A symbol of the flattened grammar.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InducedSymbol<P> {
    /// The fresh root symbol. Only ever a left-hand side.
    Top,
    /// The unmatchable dead-end symbol. Only ever the last right-hand-side
    /// entry: no rule rewrites it and no token matches it.
    Bot,
    /// A grammar symbol tagged with one (input, output) parameter pair.
    Tagged { base: SymbolId, input: P, output: P },
}

impl<P> InducedSymbol<P> {
    pub fn tagged(base: SymbolId, input: P, output: P) -> Self {
        InducedSymbol::Tagged { base, input, output }
    }

    pub fn is_tagged_terminal(&self) -> bool {
        matches!(self, InducedSymbol::Tagged { base, .. } if base.is_terminal())
    }
}

impl<P: fmt::Display> fmt::Display for InducedSymbol<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InducedSymbol::Top => f.write_str("TOP"),
            InducedSymbol::Bot => f.write_str("BOT"),
            InducedSymbol::Tagged { base, input, output } => {
                write!(f, "{base}[{input}->{output}]")
            }
        }
    }
}

/// Where a flattened rule came from. Documentation only: two structurally
/// equal rules are the same rule regardless of origin, so this field is
/// excluded from equality, ordering, and hashing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOrigin {
    /// One of the fresh root rules.
    TopRule,
    /// Unrolled from this source rule.
    Source(RuleId),
}

/// One rule of the flattened grammar.
#[derive(Debug, Clone)]
pub struct InducedRule<P> {
    pub lhs: InducedSymbol<P>,
    pub rhs: Vec<InducedSymbol<P>>,
    pub origin: RuleOrigin,
}

impl<P: PartialEq> PartialEq for InducedRule<P> {
    fn eq(&self, other: &Self) -> bool {
        self.lhs == other.lhs && self.rhs == other.rhs
    }
}

impl<P: Eq> Eq for InducedRule<P> {}

impl<P: Ord> PartialOrd for InducedRule<P> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<P: Ord> Ord for InducedRule<P> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.lhs, &self.rhs).cmp(&(&other.lhs, &other.rhs))
    }
}

impl<P: Hash> Hash for InducedRule<P> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.lhs.hash(state);
        self.rhs.hash(state);
    }
}

impl<P: fmt::Display> fmt::Display for InducedRule<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        for sym in &self.rhs {
            write!(f, " {sym}")?;
        }
        Ok(())
    }
}

/// The flattened grammar: deduplicated rules in canonical order, indexed by
/// left-hand side.
#[derive(Debug, Clone)]
pub struct InducedGrammar<P> {
    rules: Vec<Arc<InducedRule<P>>>,
    by_lhs: BTreeMap<InducedSymbol<P>, Vec<Arc<InducedRule<P>>>>,
    pub domain: BTreeSet<P>,
    pub start_base: SymbolId,
    pub start_param: P,
}

impl<P: Param> InducedGrammar<P> {
    /// All rules in canonical (sorted) order.
    pub fn rules(&self) -> &[Arc<InducedRule<P>>] {
        &self.rules
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn rules_with_lhs(&self, lhs: &InducedSymbol<P>) -> &[Arc<InducedRule<P>>] {
        self.by_lhs.get(lhs).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl<P: Param + fmt::Display> InducedGrammar<P> {
    /// Canonical listing: one rule per line, sorted, `LHS ->` for an empty
    /// right-hand side. Two grammars are equal iff their renderings are.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push_str(&rule.to_string());
            out.push('\n');
        }
        out
    }
}

/// How an evaluation walk treats a function value that is defined but lies
/// outside the domain.
#[derive(Clone, Copy)]
enum EscapePolicy {
    /// Drop the branch: the value sequence is simply not over the domain.
    Exclude,
    /// Report it: the caller requires the domain to be closed.
    Error,
}

/// A defined function value outside the domain, seen during a walk under
/// [`EscapePolicy::Error`].
struct Escape<P> {
    function: usize,
    value: P,
}

/// Enumerate parameter sequences for the function chain `fs` over `domain`,
/// starting from the consistent even-length prefix in `rho`.
///
/// Sequences alternate a freely chosen domain value with the value of the
/// next function applied to everything so far. A completed sequence (all
/// functions applied) lands in `completions`; a free choice `gamma` that
/// makes the next function undefined lands in `dead_ends` as
/// `(h, prefix, gamma)` where `prefix` is the consistent prefix of length
/// `2h` seen just before the choice.
fn hull_walk<P: Param>(
    fs: &[ParamFn<P>],
    domain: &BTreeSet<P>,
    rho: &mut Vec<P>,
    policy: EscapePolicy,
    out: &mut HullExtensions<P>,
) -> Result<(), Escape<P>> {
    if rho.len() == 2 * fs.len() {
        out.completions.insert(rho.clone());
        return Ok(());
    }
    let applied = rho.len() / 2;
    let next_fn = &fs[applied];
    for gamma in domain {
        rho.push(gamma.clone());
        let value = next_fn
            .apply(rho)
            .expect("hull walks apply each function to exactly its arity");
        match value {
            None => {
                let prefix = rho[..rho.len() - 1].to_vec();
                out.dead_ends.insert((applied, prefix, gamma.clone()));
            }
            Some(v) if domain.contains(&v) => {
                rho.push(v);
                let walked = hull_walk(fs, domain, rho, policy, out);
                rho.pop();
                if let Err(escape) = walked {
                    rho.pop();
                    return Err(escape);
                }
            }
            Some(v) => match policy {
                EscapePolicy::Exclude => {}
                EscapePolicy::Error => {
                    rho.pop();
                    return Err(Escape {
                        function: applied + 1,
                        value: v,
                    });
                }
            },
        }
        rho.pop();
    }
    Ok(())
}

/// All fully-defined parameter sequences of the function chain `fs` over
/// `domain`: length `2 * fs.len()`, even positions free, each odd position
/// the value of the next function applied to everything before it. Branches
/// whose computed value leaves the domain are dropped.
pub fn param_hull<P: Param>(fs: &[ParamFn<P>], domain: &BTreeSet<P>) -> BTreeSet<Vec<P>> {
    param_hull_extend(fs, &[], domain).completions
}

/// The two ways a consistent prefix can evolve: run to completion, or hit an
/// undefined function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullExtensions<P> {
    /// Full sequences of length `2 * fs.len()` extending the prefix.
    pub completions: BTreeSet<Vec<P>>,
    /// `(h, prefix, gamma)`: after the consistent prefix of length `2h`,
    /// choosing `gamma` makes function `h + 1` undefined.
    pub dead_ends: BTreeSet<(usize, Vec<P>, P)>,
}

impl<P> Default for HullExtensions<P> {
    fn default() -> Self {
        HullExtensions {
            completions: BTreeSet::new(),
            dead_ends: BTreeSet::new(),
        }
    }
}

/// Extend the consistent even-length prefix `rho` in every way the domain
/// allows. `rho` is trusted to be consistent (the engine's items are, by
/// construction); only the extension is evaluated. Branches whose computed
/// value leaves the domain are dropped.
pub fn param_hull_extend<P: Param>(
    fs: &[ParamFn<P>],
    rho: &[P],
    domain: &BTreeSet<P>,
) -> HullExtensions<P> {
    assert!(rho.len().is_multiple_of(2), "hull prefixes have even length");
    assert!(
        rho.len() <= 2 * fs.len(),
        "hull prefix of length {} exceeds the chain of {} functions",
        rho.len(),
        fs.len()
    );
    let mut out = HullExtensions::default();
    let mut rho = rho.to_vec();
    let walked = hull_walk(fs, domain, &mut rho, EscapePolicy::Exclude, &mut out);
    debug_assert!(walked.is_ok(), "the exclude policy never reports escapes");
    out
}

/// Build the induced rules of one source rule from its hull extensions:
/// completions become plain rules, dead ends become `BOT`-terminated rules
/// with a free left-hand-side output. A dead end at `h = 0` (the first
/// function undefined at some input) produces nothing — such an input
/// admits no rule at all.
fn rules_from_extensions<P: Param>(
    source: &crate::grammar::ParameterizedRule<P>,
    extensions: &HullExtensions<P>,
    domain: &BTreeSet<P>,
    out: &mut BTreeSet<InducedRule<P>>,
) {
    let k = source.rhs_len();
    for rho in &extensions.completions {
        let rhs = (0..k)
            .map(|i| {
                let (sym, _) = &source.rhs[i];
                InducedSymbol::tagged(sym.clone(), rho[2 * i + 1].clone(), rho[2 * i + 2].clone())
            })
            .collect();
        out.insert(InducedRule {
            lhs: InducedSymbol::tagged(source.lhs.clone(), rho[0].clone(), rho[2 * k + 1].clone()),
            rhs,
            origin: RuleOrigin::Source(source.id),
        });
    }
    for (h, prefix, gamma) in &extensions.dead_ends {
        if *h == 0 {
            continue;
        }
        let mut rhs: Vec<InducedSymbol<P>> = (0..h - 1)
            .map(|i| {
                let (sym, _) = &source.rhs[i];
                InducedSymbol::tagged(
                    sym.clone(),
                    prefix[2 * i + 1].clone(),
                    prefix[2 * i + 2].clone(),
                )
            })
            .collect();
        let (last_sym, _) = &source.rhs[h - 1];
        rhs.push(InducedSymbol::tagged(
            last_sym.clone(),
            prefix[2 * h - 1].clone(),
            gamma.clone(),
        ));
        rhs.push(InducedSymbol::Bot);
        for beta in domain {
            out.insert(InducedRule {
                lhs: InducedSymbol::tagged(source.lhs.clone(), prefix[0].clone(), beta.clone()),
                rhs: rhs.clone(),
                origin: RuleOrigin::Source(source.id),
            });
        }
    }
}

/// Flatten `g` over `domain`. Fails when the start parameter is outside the
/// domain or some rule function maps domain values to a defined value
/// outside it — in either case the flattened grammar could not describe the
/// engine's behavior.
pub fn induce_grammar<P: Param>(
    g: &Grammar<P>,
    domain: &BTreeSet<P>,
) -> Result<InducedGrammar<P>, EngineError> {
    if !domain.contains(&g.start_param) {
        return Err(EngineError::DomainEscape {
            detail: format!(
                "start parameter {:?} is outside the induction domain",
                g.start_param
            ),
        });
    }
    let mut rules: BTreeSet<InducedRule<P>> = BTreeSet::new();
    for beta in domain {
        rules.insert(InducedRule {
            lhs: InducedSymbol::Top,
            rhs: vec![InducedSymbol::tagged(
                g.start.clone(),
                g.start_param.clone(),
                beta.clone(),
            )],
            origin: RuleOrigin::TopRule,
        });
    }
    for source in &g.rules {
        let fs = source.fn_chain();
        let mut extensions = HullExtensions::default();
        let mut rho = Vec::new();
        hull_walk(&fs, domain, &mut rho, EscapePolicy::Error, &mut extensions).map_err(
            |escape| EngineError::DomainEscape {
                detail: format!(
                    "rule {}: f{} produces {:?}, which is outside the induction domain",
                    source.id, escape.function, escape.value
                ),
            },
        )?;
        rules_from_extensions(source, &extensions, domain, &mut rules);
    }
    let rules: Vec<Arc<InducedRule<P>>> = rules.into_iter().map(Arc::new).collect();
    let mut by_lhs: BTreeMap<InducedSymbol<P>, Vec<Arc<InducedRule<P>>>> = BTreeMap::new();
    for rule in &rules {
        by_lhs.entry(rule.lhs.clone()).or_default().push(rule.clone());
    }
    Ok(InducedGrammar {
        rules,
        by_lhs,
        domain: domain.clone(),
        start_base: g.start.clone(),
        start_param: g.start_param.clone(),
    })
}

/// A token of the flattened grammar: the base token's data, reinterpreted as
/// matching the tagged terminal [`InducedToken::symbol`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InducedToken<P> {
    pub base: SymbolId,
    pub in_param: P,
    pub out_param: P,
    pub chars: Vec<char>,
}

impl<P: Param> InducedToken<P> {
    /// The tagged terminal this token matches.
    pub fn symbol(&self) -> InducedSymbol<P> {
        InducedSymbol::tagged(self.base.clone(), self.in_param.clone(), self.out_param.clone())
    }

    pub fn width(&self) -> usize {
        self.chars.len()
    }

    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }
}

pub type InducedTokenSet<P> = BTreeSet<InducedToken<P>>;

/// Reinterpret a base token as a flattened-grammar token. Total, and
/// inverted exactly by [`token_bijection_inv`].
pub fn token_bijection<P: Param>(token: &Token<P>) -> InducedToken<P> {
    InducedToken {
        base: token.terminal.clone(),
        in_param: token.in_param.clone(),
        out_param: token.out_param.clone(),
        chars: token.chars.clone(),
    }
}

/// The exact inverse of [`token_bijection`].
pub fn token_bijection_inv<P: Param>(token: &InducedToken<P>) -> Token<P> {
    Token {
        terminal: token.base.clone(),
        in_param: token.in_param.clone(),
        out_param: token.out_param.clone(),
        chars: token.chars.clone(),
    }
}

/// [`token_bijection`] over a whole set.
pub fn lift_tokens<P: Param>(tokens: &TokenSet<P>) -> InducedTokenSet<P> {
    tokens.iter().map(token_bijection).collect()
}

/// [`token_bijection_inv`] over a whole set.
pub fn lower_tokens<P: Param>(tokens: &InducedTokenSet<P>) -> TokenSet<P> {
    tokens.iter().map(token_bijection_inv).collect()
}

/// The flattened grammar's lexer, defined through the base lexer: a tagged
/// terminal `t[a->b]` matches exactly the base tokens of `t` with input `a`
/// whose output parameter is `b`. `TOP` and `BOT` match nothing.
#[derive(Debug, Clone)]
pub struct InducedLexer<P> {
    base: LexerFn<P>,
}

impl<P: Param> InducedLexer<P> {
    pub fn new(base: LexerFn<P>) -> Self {
        InducedLexer { base }
    }

    pub fn lex(
        &self,
        symbol: &InducedSymbol<P>,
        input: &[char],
        k: usize,
    ) -> Result<InducedTokenSet<P>, EngineError> {
        let InducedSymbol::Tagged { base, input: alpha, output } = symbol else {
            return Ok(InducedTokenSet::new());
        };
        if !base.is_terminal() {
            return Ok(InducedTokenSet::new());
        }
        Ok(self
            .base
            .lex(base, alpha, input, k)?
            .iter()
            .filter(|token| &token.out_param == output)
            .map(token_bijection)
            .collect())
    }
}

/// The flattened grammar's selector, defined through the base selector via
/// the token bijection. The base wrapper's contract checks carry over.
#[derive(Debug, Clone)]
pub struct InducedSelector<P> {
    base: SelectorFn<P>,
}

impl<P: Param> InducedSelector<P> {
    pub fn new(base: SelectorFn<P>) -> Self {
        InducedSelector { base }
    }

    pub fn select(
        &self,
        required: &InducedTokenSet<P>,
        candidates: &InducedTokenSet<P>,
    ) -> Result<InducedTokenSet<P>, EngineError> {
        let result = self
            .base
            .select(&lower_tokens(required), &lower_tokens(candidates))?;
        Ok(lift_tokens(&result))
    }
}

/// A classical recognition state over the flattened grammar. The rule is
/// carried by value (shared), so items from [`induce_item`] need no housing
/// grammar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EllaItem<P> {
    pub rule: Arc<InducedRule<P>>,
    pub dot: usize,
    pub start: usize,
    pub end: usize,
}

impl<P: Ord> PartialOrd for EllaItem<P> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<P: Ord> Ord for EllaItem<P> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.rule, self.dot, self.start, self.end).cmp(&(
            &other.rule,
            other.dot,
            other.start,
            other.end,
        ))
    }
}

impl<P: Param> EllaItem<P> {
    pub fn next_symbol(&self) -> Option<&InducedSymbol<P>> {
        self.rule.rhs.get(self.dot)
    }

    pub fn is_complete(&self) -> bool {
        self.dot == self.rule.rhs.len()
    }

    /// The right-hand-side symbols still to be consumed.
    pub fn remainder(&self) -> &[InducedSymbol<P>] {
        &self.rule.rhs[self.dot..]
    }
}

impl<P: Param + fmt::Display> fmt::Display for EllaItem<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} @ dot {}, span {}..{}]", self.rule, self.dot, self.start, self.end)
    }
}

pub type EllaItemSet<P> = BTreeSet<EllaItem<P>>;

/// Translate one engine item into the flattened-grammar items it stands
/// for: one per hull completion of its parameter sequence (a plain rule at
/// the same dot and span) and one per dead end and left-hand-side output (a
/// `BOT` rule at the same dot and span).
///
/// For a nonempty domain closed under the rule functions, the result is
/// never empty — every branch of the extension walk ends in a completion or
/// a dead end.
pub fn induce_item<P: Param>(
    g: &Grammar<P>,
    item: &ParameterizedItem<P>,
    domain: &BTreeSet<P>,
) -> EllaItemSet<P> {
    let source = g.rule(item.rule);
    let extensions = param_hull_extend(&source.fn_chain(), &item.params, domain);
    let mut rules = BTreeSet::new();
    rules_from_extensions(source, &extensions, domain, &mut rules);
    rules
        .into_iter()
        .map(|rule| EllaItem {
            rule: Arc::new(rule),
            dot: item.dot,
            start: item.start,
            end: item.end,
        })
        .collect()
}

/// Strip oracle items that have no engine counterpart by construction:
/// items of the fresh root rules, and items whose whole remainder is the
/// unmatchable `BOT` (the engine discards such states the moment the
/// undefined function is reached).
pub fn norm<P: Param>(items: &EllaItemSet<P>) -> EllaItemSet<P> {
    items
        .iter()
        .filter(|item| {
            item.rule.lhs != InducedSymbol::Top
                && !matches!(item.remainder(), [InducedSymbol::Bot])
        })
        .cloned()
        .collect()
}

/// The outcome of one item-level comparison: what each side has that the
/// other lacks. The engine and the oracle agree exactly when both sets are
/// empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence<P> {
    pub only_engine: EllaItemSet<P>,
    pub only_oracle: EllaItemSet<P>,
}

impl<P: Param> Correspondence<P> {
    pub fn holds(&self) -> bool {
        self.only_engine.is_empty() && self.only_oracle.is_empty()
    }
}

impl<P: Param + fmt::Display> Correspondence<P> {
    /// A readable account of the disagreement (empty when none).
    pub fn report(&self) -> String {
        if self.holds() {
            return String::new();
        }
        let mut out = String::new();
        if !self.only_engine.is_empty() {
            out.push_str("translated engine items missing from the oracle:\n");
            for item in &self.only_engine {
                out.push_str("  ");
                out.push_str(&item.to_string());
                out.push('\n');
            }
        }
        if !self.only_oracle.is_empty() {
            out.push_str("oracle items no engine item translates to:\n");
            for item in &self.only_oracle {
                out.push_str("  ");
                out.push_str(&item.to_string());
                out.push('\n');
            }
        }
        out
    }
}

/// Compare an engine item set against an oracle item set: translate every
/// engine item with [`induce_item`], strip the oracle's engine-less items
/// with [`norm`], and report the symmetric difference.
pub fn corresponds<P: Param>(
    g: &Grammar<P>,
    domain: &BTreeSet<P>,
    items: &ItemSet<P>,
    oracle: &EllaItemSet<P>,
) -> Correspondence<P> {
    let mut translated = EllaItemSet::new();
    for item in items {
        translated.extend(induce_item(g, item, domain));
    }
    let normed = norm(oracle);
    Correspondence {
        only_engine: translated.difference(&normed).cloned().collect(),
        only_oracle: normed.difference(&translated).cloned().collect(),
    }
}
