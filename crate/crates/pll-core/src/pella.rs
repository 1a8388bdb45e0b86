//! The engine: parameterized chart items and the position-by-position
//! fixpoint driver.
//!
//! An item records progress through one rule: how many rhs symbols are
//! consumed (`dot`), which input span they cover (`start..end`), and the
//! parameter sequence seen so far. The sequence always holds the rule input,
//! one input/output pair per consumed symbol, and finally the input
//! parameter of the symbol after the dot (or the rule output once the item
//! is complete), so its length is `2 * (dot + 1)`.
//!
//! Four building blocks grow an item set — `pella_predict`,
//! `pella_complete`, `pella_scan` (all extensive, pure set maps) and
//! `pella_tokens` (the lexing/selection step). [`pella_pi`] closes the first
//! three into a fixpoint at one position, and [`pella_run`] alternates that
//! closure with token selection rounds, position by position. The driver is
//! a direct transcription of the defining equations: a cheap size check is
//! the fixpoint test, valid because every block only ever adds items.

use std::collections::{BTreeSet, HashMap};

use crate::error::EngineError;
use crate::grammar::{eval_rule_fn, Grammar, Param, RuleId, SymbolId};
use crate::lexing::{LexerFn, SelectorFn, TokenSet};

/// One recognition state. See the module docs for the parameter layout.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParameterizedItem<P> {
    pub rule: RuleId,
    pub dot: usize,
    pub start: usize,
    pub end: usize,
    pub params: Vec<P>,
}

impl<P: Param> ParameterizedItem<P> {
    /// The rule's own input parameter.
    pub fn in_param(&self) -> &P {
        &self.params[0]
    }

    /// The last parameter: input for the symbol after the dot, or the rule
    /// output when the item is complete.
    pub fn next_input(&self) -> &P {
        self.params.last().expect("item parameter sequences are never empty")
    }
}

pub type ItemSet<P> = BTreeSet<ParameterizedItem<P>>;

/// Caps on fixpoint work, so that a grammar with unbounded parameter flow
/// fails loudly instead of spinning. Both must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineLimits {
    /// Maximum number of distinct items alive in one run.
    pub max_items: usize,
    /// Maximum iterations for any single fixpoint loop.
    pub max_fixpoint_rounds: usize,
}

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits {
            max_items: 1_000_000,
            max_fixpoint_rounds: 10_000,
        }
    }
}

/// Knobs for a full run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunConfig {
    pub limits: EngineLimits,
    /// Re-check the parameter-chain invariant of every item and the
    /// idempotence of every closed fixpoint. Costs time, catches engine
    /// bugs at the moment they happen.
    pub verify: bool,
}

/// The finished parse state: every item grouped by end position, plus the
/// final selected token set of each position.
#[derive(Debug, Clone)]
pub struct Chart<P> {
    bins: Vec<ItemSet<P>>,
    tokens: Vec<TokenSet<P>>,
    input: Vec<char>,
}

impl<P: Param> Chart<P> {
    fn build(input: Vec<char>, items: ItemSet<P>, tokens: Vec<TokenSet<P>>) -> Self {
        let mut bins = vec![ItemSet::new(); input.len() + 1];
        for item in items {
            let end = item.end;
            bins[end].insert(item);
        }
        Chart { bins, tokens, input }
    }

    pub fn input(&self) -> &[char] {
        &self.input
    }

    /// Number of chart positions: input length + 1.
    pub fn positions(&self) -> usize {
        self.bins.len()
    }

    pub fn items_ending_at(&self, end: usize) -> &ItemSet<P> {
        &self.bins[end]
    }

    /// The final selected token set at a position.
    pub fn tokens_at(&self, k: usize) -> &TokenSet<P> {
        &self.tokens[k]
    }

    pub fn iter_items(&self) -> impl Iterator<Item = &ParameterizedItem<P>> {
        self.bins.iter().flatten()
    }

    pub fn item_count(&self) -> usize {
        self.bins.iter().map(BTreeSet::len).sum()
    }

    /// All items as one flat set.
    pub fn all_items(&self) -> ItemSet<P> {
        self.iter_items().cloned().collect()
    }
}

/// Seed items: every start-symbol rule at position 0, provided its first
/// function is defined at the start parameter.
pub fn pella_init<P: Param>(g: &Grammar<P>) -> ItemSet<P> {
    let mut items = ItemSet::new();
    for rule in g.rules_with_lhs(&g.start) {
        if let Some(v) = eval_rule_fn(rule.param_fn(1), std::slice::from_ref(&g.start_param)) {
            items.insert(ParameterizedItem {
                rule: rule.id,
                dot: 0,
                start: 0,
                end: 0,
                params: vec![g.start_param.clone(), v],
            });
        }
    }
    items
}

/// Extend `item` past one more rhs symbol: append the consumed symbol's
/// output parameter, then the next function's value at the grown prefix.
/// `None` when that function is undefined there.
fn advanced<P: Param>(
    g: &Grammar<P>,
    item: &ParameterizedItem<P>,
    symbol_output: &P,
    new_end: usize,
) -> Option<ParameterizedItem<P>> {
    let rule = g.rule(item.rule);
    let mut params = item.params.clone();
    params.push(symbol_output.clone());
    let v = eval_rule_fn(rule.param_fn(item.dot + 2), &params)?;
    params.push(v);
    Some(ParameterizedItem {
        rule: item.rule,
        dot: item.dot + 1,
        start: item.start,
        end: new_end,
        params,
    })
}

/// One prediction pass at position `k`: for every item ending at `k` whose
/// dot faces a nonterminal `M` with pending input `a`, add a dot-0 item at
/// `k` for each `M`-rule whose first function is defined at `a`.
pub fn pella_predict<P: Param>(g: &Grammar<P>, k: usize, items: &ItemSet<P>) -> ItemSet<P> {
    let mut out = items.clone();
    let mut wanted: BTreeSet<(SymbolId, P)> = BTreeSet::new();
    for item in items {
        if item.end != k {
            continue;
        }
        if let Some(sym) = g.rule(item.rule).symbol_at(item.dot) {
            if sym.is_nonterminal() {
                wanted.insert((sym.clone(), item.next_input().clone()));
            }
        }
    }
    for (symbol, alpha) in wanted {
        for rule in g.rules_with_lhs(&symbol) {
            if let Some(v) = eval_rule_fn(rule.param_fn(1), std::slice::from_ref(&alpha)) {
                out.insert(ParameterizedItem {
                    rule: rule.id,
                    dot: 0,
                    start: k,
                    end: k,
                    params: vec![alpha.clone(), v],
                });
            }
        }
    }
    out
}

/// One completion pass at position `k`: every complete item ending at `k`
/// hands its output parameter back to every item whose dot faces its
/// left-hand side with the matching input parameter and whose end is the
/// child's start.
pub fn pella_complete<P: Param>(g: &Grammar<P>, k: usize, items: &ItemSet<P>) -> ItemSet<P> {
    let mut out = items.clone();
    // (child start, child lhs, child input) -> child outputs
    let mut children: HashMap<(usize, SymbolId, P), BTreeSet<P>> = HashMap::new();
    for item in items {
        let rule = g.rule(item.rule);
        if item.end == k && item.dot == rule.rhs_len() {
            children
                .entry((item.start, rule.lhs.clone(), item.in_param().clone()))
                .or_default()
                .insert(item.next_input().clone());
        }
    }
    if children.is_empty() {
        return out;
    }
    for item in items {
        let Some(sym) = g.rule(item.rule).symbol_at(item.dot) else {
            continue;
        };
        if !sym.is_nonterminal() {
            continue;
        }
        let key = (item.end, sym.clone(), item.next_input().clone());
        if let Some(outputs) = children.get(&key) {
            for output in outputs {
                if let Some(next) = advanced(g, item, output, k) {
                    out.insert(next);
                }
            }
        }
    }
    out
}

/// One scanning pass at position `k`: every item ending at `k` whose dot
/// faces a terminal consumes each matching token (same terminal, matching
/// input parameter) and lands after the token's width.
pub fn pella_scan<P: Param>(
    g: &Grammar<P>,
    tokens: &TokenSet<P>,
    k: usize,
    items: &ItemSet<P>,
) -> ItemSet<P> {
    let mut out = items.clone();
    if tokens.is_empty() {
        return out;
    }
    let mut by_query: HashMap<(&SymbolId, &P), Vec<(&P, usize)>> = HashMap::new();
    for token in tokens {
        by_query
            .entry((&token.terminal, &token.in_param))
            .or_default()
            .push((&token.out_param, token.width()));
    }
    for item in items {
        if item.end != k {
            continue;
        }
        let Some(sym) = g.rule(item.rule).symbol_at(item.dot) else {
            continue;
        };
        if !sym.is_terminal() {
            continue;
        }
        if let Some(matches) = by_query.get(&(sym, item.next_input())) {
            for (beta, width) in matches {
                if let Some(next) = advanced(g, item, beta, k + width) {
                    out.insert(next);
                }
            }
        }
    }
    out
}

/// The lexing/selection step at position `k`: lex every (terminal, input
/// parameter) pair the dotted items ask for, then let the selector narrow
/// the candidates while keeping everything in `selected`.
///
/// `selected` growing beyond the candidates would mean a previous round saw
/// tokens this round cannot reproduce — lexers are pure and item sets only
/// grow, so that is an engine bug and reported as an internal invariant
/// violation.
pub fn pella_tokens<P: Param>(
    g: &Grammar<P>,
    lexer: &LexerFn<P>,
    selector: &SelectorFn<P>,
    input: &[char],
    selected: &TokenSet<P>,
    k: usize,
    items: &ItemSet<P>,
) -> Result<TokenSet<P>, EngineError> {
    let mut candidates = TokenSet::new();
    let mut queried: BTreeSet<(SymbolId, P)> = BTreeSet::new();
    for item in items {
        if item.end != k {
            continue;
        }
        let Some(sym) = g.rule(item.rule).symbol_at(item.dot) else {
            continue;
        };
        if !sym.is_terminal() {
            continue;
        }
        let query = (sym.clone(), item.next_input().clone());
        if queried.insert(query) {
            candidates.extend(lexer.lex(sym, item.next_input(), input, k)?);
        }
    }
    if !selected.is_subset(&candidates) {
        return Err(EngineError::InternalInvariant {
            detail: format!(
                "selected tokens at position {k} are not among the lexed candidates"
            ),
        });
    }
    selector.select(selected, &candidates)
}

/// Close predict/complete/scan into a fixpoint at position `k` with a fixed
/// token set. Every pass is extensive, so the set is stable exactly when its
/// size stops growing.
pub fn pella_pi<P: Param>(
    g: &Grammar<P>,
    k: usize,
    tokens: &TokenSet<P>,
    items: &ItemSet<P>,
    limits: &EngineLimits,
) -> Result<ItemSet<P>, EngineError> {
    pi_impl(g, k, tokens, items, limits, false)
}

fn pi_impl<P: Param>(
    g: &Grammar<P>,
    k: usize,
    tokens: &TokenSet<P>,
    items: &ItemSet<P>,
    limits: &EngineLimits,
    verify: bool,
) -> Result<ItemSet<P>, EngineError> {
    let mut cur = items.clone();
    for _ in 0..limits.max_fixpoint_rounds {
        let next = pella_scan(g, tokens, k, &pella_complete(g, k, &pella_predict(g, k, &cur)));
        if next.len() > limits.max_items {
            return Err(EngineError::ResourceExhausted {
                position: k,
                detail: format!("item budget of {} exhausted", limits.max_items),
            });
        }
        if next.len() == cur.len() {
            if verify {
                verify_fixpoint(g, k, tokens, &next)?;
                for item in &next {
                    verify_item(g, item)?;
                }
            }
            return Ok(next);
        }
        cur = next;
    }
    Err(EngineError::ResourceExhausted {
        position: k,
        detail: format!(
            "fixpoint did not stabilize within {} rounds",
            limits.max_fixpoint_rounds
        ),
    })
}

/// Verify-mode check: applying the composed pass to a closed set must not
/// grow it (idempotence of the fixpoint).
fn verify_fixpoint<P: Param>(
    g: &Grammar<P>,
    k: usize,
    tokens: &TokenSet<P>,
    closed: &ItemSet<P>,
) -> Result<(), EngineError> {
    let again = pella_scan(g, tokens, k, &pella_complete(g, k, &pella_predict(g, k, closed)));
    if again.len() != closed.len() {
        return Err(EngineError::InternalInvariant {
            detail: format!(
                "fixpoint at position {k} is not idempotent: re-application added {} items",
                again.len() - closed.len()
            ),
        });
    }
    Ok(())
}

/// Verify-mode check: the parameter sequence of an item must have the length
/// dictated by its dot and recompute odd positions through the rule's
/// function chain.
fn verify_item<P: Param>(g: &Grammar<P>, item: &ParameterizedItem<P>) -> Result<(), EngineError> {
    let rule = g.rule(item.rule);
    let broken = |detail: String| EngineError::InternalInvariant { detail };
    if item.dot > rule.rhs_len() {
        return Err(broken(format!("item {item:?}: dot past the rule end")));
    }
    if item.params.len() != 2 * (item.dot + 1) {
        return Err(broken(format!(
            "item {item:?}: parameter sequence has length {}, expected {}",
            item.params.len(),
            2 * (item.dot + 1)
        )));
    }
    for m in 1..=item.dot + 1 {
        match eval_rule_fn(rule.param_fn(m), &item.params[..2 * m - 1]) {
            Some(v) if v == item.params[2 * m - 1] => {}
            Some(v) => {
                return Err(broken(format!(
                    "item {item:?}: f{m} recomputes to {v:?}, parameter sequence disagrees"
                )))
            }
            None => {
                return Err(broken(format!(
                    "item {item:?}: f{m} is undefined along the recorded parameters"
                )))
            }
        }
    }
    Ok(())
}

/// Run the engine over `input`: seed at position 0, then per position
/// alternate token selection with the item fixpoint until both stabilize,
/// and carry everything forward to the next position.
pub fn pella_run<P: Param>(
    g: &Grammar<P>,
    lexer: &LexerFn<P>,
    selector: &SelectorFn<P>,
    input: &[char],
    config: &RunConfig,
) -> Result<Chart<P>, EngineError> {
    let limits = &config.limits;
    let n = input.len();
    let mut tokens_by_pos: Vec<TokenSet<P>> = Vec::with_capacity(n + 1);
    let mut items = pi_impl(g, 0, &TokenSet::new(), &pella_init(g), limits, config.verify)?;
    for k in 0..=n {
        if k > 0 {
            items = pi_impl(g, k, &TokenSet::new(), &items, limits, config.verify)?;
        }
        let mut selected = TokenSet::new();
        let mut stable = false;
        for _ in 0..limits.max_fixpoint_rounds {
            let next_tokens = pella_tokens(g, lexer, selector, input, &selected, k, &items)?;
            let next_items = pi_impl(g, k, &next_tokens, &items, limits, config.verify)?;
            stable = next_tokens.len() == selected.len() && next_items.len() == items.len();
            selected = next_tokens;
            items = next_items;
            if stable {
                break;
            }
        }
        if !stable {
            return Err(EngineError::ResourceExhausted {
                position: k,
                detail: format!(
                    "token selection did not stabilize within {} rounds",
                    limits.max_fixpoint_rounds
                ),
            });
        }
        tokens_by_pos.push(selected);
    }
    Ok(Chart::build(input.to_vec(), items, tokens_by_pos))
}

/// The accepted outputs: final parameters of complete start-rule items that
/// span the whole input and started from the grammar's start parameter.
pub fn pella_outputs<P: Param>(g: &Grammar<P>, chart: &Chart<P>) -> BTreeSet<P> {
    let n = chart.positions() - 1;
    chart
        .items_ending_at(n)
        .iter()
        .filter(|item| {
            let rule = g.rule(item.rule);
            item.start == 0
                && item.dot == rule.rhs_len()
                && rule.lhs == g.start
                && item.in_param() == &g.start_param
        })
        .map(|item| item.next_input().clone())
        .collect()
}
