//! The oracle recognizer: a classical chart parser over the flattened
//! grammar, with the same driver shape as the engine but none of its
//! parameter threading.
//!
//! This is a deliberately independent second implementation. It never calls
//! into the engine's passes and never evaluates a parameter function — all
//! parameter behavior is already frozen into the flattened grammar's tagged
//! symbols. Agreement between the two recognizers is therefore meaningful
//! evidence, and the comparison machinery in [`crate::induced`] relates
//! their states item by item.

use std::collections::{BTreeSet, HashMap};

use crate::error::EngineError;
use crate::grammar::Param;
use crate::induced::{
    EllaItem, EllaItemSet, InducedGrammar, InducedLexer, InducedSelector, InducedSymbol,
    InducedTokenSet,
};
use crate::pella::EngineLimits;

/// The oracle's finished parse state, mirroring the engine's chart.
#[derive(Debug, Clone)]
pub struct EllaChart<P> {
    bins: Vec<EllaItemSet<P>>,
    tokens: Vec<InducedTokenSet<P>>,
    input: Vec<char>,
}

impl<P: Param> EllaChart<P> {
    fn build(input: Vec<char>, items: EllaItemSet<P>, tokens: Vec<InducedTokenSet<P>>) -> Self {
        let mut bins = vec![EllaItemSet::new(); input.len() + 1];
        for item in items {
            let end = item.end;
            bins[end].insert(item);
        }
        EllaChart { bins, tokens, input }
    }

    pub fn input(&self) -> &[char] {
        &self.input
    }

    pub fn positions(&self) -> usize {
        self.bins.len()
    }

    pub fn items_ending_at(&self, end: usize) -> &EllaItemSet<P> {
        &self.bins[end]
    }

    pub fn tokens_at(&self, k: usize) -> &InducedTokenSet<P> {
        &self.tokens[k]
    }

    pub fn iter_items(&self) -> impl Iterator<Item = &EllaItem<P>> {
        self.bins.iter().flatten()
    }

    pub fn item_count(&self) -> usize {
        self.bins.iter().map(BTreeSet::len).sum()
    }

    pub fn all_items(&self) -> EllaItemSet<P> {
        self.iter_items().cloned().collect()
    }
}

/// Seed items: every root rule at position 0.
pub fn ella_init<P: Param>(ig: &InducedGrammar<P>) -> EllaItemSet<P> {
    ig.rules_with_lhs(&InducedSymbol::Top)
        .iter()
        .map(|rule| EllaItem {
            rule: rule.clone(),
            dot: 0,
            start: 0,
            end: 0,
        })
        .collect()
}

/// One prediction pass at position `k`: for every item ending at `k`, add a
/// dot-0 item at `k` for each rule of the symbol after its dot. Symbols
/// heading no rules (tagged terminals, `BOT`) contribute nothing.
pub fn ella_predict<P: Param>(
    ig: &InducedGrammar<P>,
    k: usize,
    items: &EllaItemSet<P>,
) -> EllaItemSet<P> {
    let mut out = items.clone();
    let mut wanted: BTreeSet<&InducedSymbol<P>> = BTreeSet::new();
    for item in items {
        if item.end == k {
            if let Some(sym) = item.next_symbol() {
                wanted.insert(sym);
            }
        }
    }
    for symbol in wanted {
        for rule in ig.rules_with_lhs(symbol) {
            out.insert(EllaItem {
                rule: rule.clone(),
                dot: 0,
                start: k,
                end: k,
            });
        }
    }
    out
}

/// One completion pass at position `k`: every complete item ending at `k`
/// advances every item that ends at its start and awaits its left-hand
/// side.
pub fn ella_complete<P: Param>(k: usize, items: &EllaItemSet<P>) -> EllaItemSet<P> {
    let mut out = items.clone();
    let mut finished: BTreeSet<(usize, &InducedSymbol<P>)> = BTreeSet::new();
    for item in items {
        if item.end == k && item.is_complete() {
            finished.insert((item.start, &item.rule.lhs));
        }
    }
    if finished.is_empty() {
        return out;
    }
    for item in items {
        let Some(sym) = item.next_symbol() else {
            continue;
        };
        if finished.contains(&(item.end, sym)) {
            out.insert(EllaItem {
                rule: item.rule.clone(),
                dot: item.dot + 1,
                start: item.start,
                end: k,
            });
        }
    }
    out
}

/// One scanning pass at position `k`: every item ending at `k` whose dot
/// faces a token's symbol consumes that token and lands after its width.
pub fn ella_scan<P: Param>(
    tokens: &InducedTokenSet<P>,
    k: usize,
    items: &EllaItemSet<P>,
) -> EllaItemSet<P> {
    let mut out = items.clone();
    if tokens.is_empty() {
        return out;
    }
    let mut widths: HashMap<InducedSymbol<P>, Vec<usize>> = HashMap::new();
    for token in tokens {
        widths.entry(token.symbol()).or_default().push(token.width());
    }
    for item in items {
        if item.end != k {
            continue;
        }
        let Some(sym) = item.next_symbol() else {
            continue;
        };
        if let Some(ws) = widths.get(sym) {
            for w in ws {
                out.insert(EllaItem {
                    rule: item.rule.clone(),
                    dot: item.dot + 1,
                    start: item.start,
                    end: k + w,
                });
            }
        }
    }
    out
}

/// The lexing/selection step at position `k`, mirroring the engine's: lex
/// every tagged terminal the dotted items await, then let the selector
/// narrow the candidates while keeping everything in `selected`.
pub fn ella_tokens<P: Param>(
    lexer: &InducedLexer<P>,
    selector: &InducedSelector<P>,
    input: &[char],
    selected: &InducedTokenSet<P>,
    k: usize,
    items: &EllaItemSet<P>,
) -> Result<InducedTokenSet<P>, EngineError> {
    let mut candidates = InducedTokenSet::new();
    let mut queried: BTreeSet<&InducedSymbol<P>> = BTreeSet::new();
    for item in items {
        if item.end != k {
            continue;
        }
        let Some(sym) = item.next_symbol() else {
            continue;
        };
        if sym.is_tagged_terminal() && queried.insert(sym) {
            candidates.extend(lexer.lex(sym, input, k)?);
        }
    }
    if !selected.is_subset(&candidates) {
        return Err(EngineError::InternalInvariant {
            detail: format!(
                "selected oracle tokens at position {k} are not among the lexed candidates"
            ),
        });
    }
    selector.select(selected, &candidates)
}

/// Close predict/complete/scan into a fixpoint at position `k` with a fixed
/// token set. Every pass is extensive, so size stability is set stability.
pub fn ella_pi<P: Param>(
    ig: &InducedGrammar<P>,
    k: usize,
    tokens: &InducedTokenSet<P>,
    items: &EllaItemSet<P>,
    limits: &EngineLimits,
) -> Result<EllaItemSet<P>, EngineError> {
    let mut cur = items.clone();
    for _ in 0..limits.max_fixpoint_rounds {
        let next = ella_scan(tokens, k, &ella_complete(k, &ella_predict(ig, k, &cur)));
        if next.len() > limits.max_items {
            return Err(EngineError::ResourceExhausted {
                position: k,
                detail: format!("oracle item budget of {} exhausted", limits.max_items),
            });
        }
        if next.len() == cur.len() {
            return Ok(next);
        }
        cur = next;
    }
    Err(EngineError::ResourceExhausted {
        position: k,
        detail: format!(
            "oracle fixpoint did not stabilize within {} rounds",
            limits.max_fixpoint_rounds
        ),
    })
}

/// Run the oracle over `input` with the same position-by-position driver as
/// the engine.
pub fn ella_run<P: Param>(
    ig: &InducedGrammar<P>,
    lexer: &InducedLexer<P>,
    selector: &InducedSelector<P>,
    input: &[char],
    limits: &EngineLimits,
) -> Result<EllaChart<P>, EngineError> {
    let n = input.len();
    let mut tokens_by_pos: Vec<InducedTokenSet<P>> = Vec::with_capacity(n + 1);
    let mut items = ella_pi(ig, 0, &InducedTokenSet::new(), &ella_init(ig), limits)?;
    for k in 0..=n {
        if k > 0 {
            items = ella_pi(ig, k, &InducedTokenSet::new(), &items, limits)?;
        }
        let mut selected = InducedTokenSet::new();
        let mut stable = false;
        for _ in 0..limits.max_fixpoint_rounds {
            let next_tokens = ella_tokens(lexer, selector, input, &selected, k, &items)?;
            let next_items = ella_pi(ig, k, &next_tokens, &items, limits)?;
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
                    "oracle token selection did not stabilize within {} rounds",
                    limits.max_fixpoint_rounds
                ),
            });
        }
        tokens_by_pos.push(selected);
    }
    Ok(EllaChart::build(input.to_vec(), items, tokens_by_pos))
}

/// The accepted outputs: the output tags of tagged start symbols whose
/// complete items span the whole input.
pub fn ella_outputs<P: Param>(ig: &InducedGrammar<P>, chart: &EllaChart<P>) -> BTreeSet<P> {
    let n = chart.positions() - 1;
    chart
        .items_ending_at(n)
        .iter()
        .filter(|item| item.start == 0 && item.is_complete())
        .filter_map(|item| match &item.rule.lhs {
            InducedSymbol::Tagged { base, input, output }
                if base == &ig.start_base && input == &ig.start_param =>
            {
                Some(output.clone())
            }
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::grammar::SymbolId;
    use crate::induced::{induce_grammar, InducedToken};

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn count_setup() -> (InducedGrammar<i64>, InducedLexer<i64>, InducedSelector<i64>) {
        let g = fixtures::count_grammar();
        let domain: std::collections::BTreeSet<i64> = (0..=fixtures::COUNT_DOMAIN_MAX).collect();
        let ig = induce_grammar(&g, &domain).unwrap();
        (
            ig,
            InducedLexer::new(fixtures::count_lexer()),
            InducedSelector::new(fixtures::count_selector()),
        )
    }

    #[test]
    fn init_seeds_one_item_per_root_rule() {
        let g = fixtures::count_grammar();
        let domain: std::collections::BTreeSet<i64> = (0..=1).collect();
        let ig = induce_grammar(&g, &domain).unwrap();
        let got = ella_init(&ig);
        assert_eq!(got.len(), 2);
        assert!(got.iter().all(|item| {
            item.rule.lhs == InducedSymbol::Top && item.dot == 0 && item.start == 0 && item.end == 0
        }));
    }

    #[test]
    fn tokens_queries_every_awaited_tagged_terminal() {
        let (ig, lexer, selector) = count_setup();
        let limits = EngineLimits::default();
        let seed = ella_pi(&ig, 0, &InducedTokenSet::new(), &ella_init(&ig), &limits).unwrap();
        let got = ella_tokens(&lexer, &selector, &chars("aa"), &InducedTokenSet::new(), 0, &seed)
            .unwrap();
        let expected = InducedTokenSet::from([InducedToken {
            base: SymbolId::terminal("a"),
            in_param: 0,
            out_param: 1,
            chars: vec!['a'],
        }]);
        assert_eq!(got, expected);
    }

    #[test]
    fn run_counts_letters_like_the_engine() {
        let (ig, lexer, selector) = count_setup();
        let limits = EngineLimits::default();
        let chart = ella_run(&ig, &lexer, &selector, &chars("aaa"), &limits).unwrap();
        assert_eq!(ella_outputs(&ig, &chart), std::collections::BTreeSet::from([3]));
        let chart = ella_run(&ig, &lexer, &selector, &chars(""), &limits).unwrap();
        assert_eq!(ella_outputs(&ig, &chart), std::collections::BTreeSet::from([0]));
        let chart = ella_run(&ig, &lexer, &selector, &chars("ab"), &limits).unwrap();
        assert!(ella_outputs(&ig, &chart).is_empty());
    }

    #[test]
    fn engine_and_oracle_agree_across_counting_inputs() {
        let g = fixtures::count_grammar();
        let lexer = fixtures::count_lexer();
        let selector = fixtures::count_selector();
        let (ig, ilexer, iselector) = count_setup();
        let limits = EngineLimits::default();
        let mut inputs: Vec<String> = (0..=9).map(|n| "a".repeat(n)).collect();
        inputs.extend(["ab".to_string(), "ba".to_string(), "b".to_string()]);
        for text in inputs {
            let input = chars(&text);
            let engine_chart = crate::pella::pella_run(
                &g,
                &lexer,
                &selector,
                &input,
                &crate::pella::RunConfig::default(),
            )
            .unwrap();
            let engine = crate::pella::pella_outputs(&g, &engine_chart);
            let oracle_chart = ella_run(&ig, &ilexer, &iselector, &input, &limits).unwrap();
            let oracle = ella_outputs(&ig, &oracle_chart);
            assert_eq!(engine, oracle, "outputs diverge on input {text:?}");
        }
    }

    #[test]
    fn exhausted_round_budget_is_reported() {
        let (ig, _, _) = count_setup();
        let limits = EngineLimits {
            max_items: 1_000_000,
            max_fixpoint_rounds: 0,
        };
        let err = ella_pi(&ig, 0, &InducedTokenSet::new(), &ella_init(&ig), &limits).unwrap_err();
        assert!(matches!(err, EngineError::ResourceExhausted { position: 0, .. }));
    }
}
