//! Differential checking: run the engine and the flattened-grammar oracle
//! over the same inputs and compare. The shallow mode compares accepted
//! outputs per input; the deep mode runs both drivers in lockstep and
//! compares translated item sets and token sets at every internal
//! checkpoint, so a disagreement is caught at the first operation that
//! produces it rather than at the final answer.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use pll_core::ella::{ella_init, ella_outputs, ella_pi, ella_run, ella_tokens, EllaChart};
use pll_core::grammar::Grammar;
use pll_core::induced::{
    corresponds, induce_grammar, induce_item, lift_tokens, norm, Correspondence, EllaItemSet,
    InducedGrammar, InducedLexer, InducedSelector, InducedTokenSet,
};
use pll_core::lexing::TokenSet;
use pll_core::pella::{
    pella_init, pella_outputs, pella_pi, pella_run, pella_tokens, Chart, EngineLimits,
    ItemSet, ParameterizedItem, RunConfig,
};
use pll_core::EngineError;

use crate::compile::CompiledGrammar;

/// Every string over `alphabet` of length `0 ..= max_len`, shortest first,
/// lexicographic in the order given within each length.
pub fn enumerate_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * alphabet.len());
        for prefix in &frontier {
            for &c in alphabet {
                let mut s = prefix.clone();
                s.push(c);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn fmt_set(set: &BTreeSet<i64>) -> String {
    let inner: Vec<String> = set.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", inner.join(", "))
}

/// One shallow comparison: the outputs both sides accept for one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseResult {
    pub input: String,
    pub engine: BTreeSet<i64>,
    pub oracle: BTreeSet<i64>,
}

impl CaseResult {
    pub fn agree(&self) -> bool {
        self.engine == self.oracle
    }

    pub fn describe(&self) -> String {
        format!(
            "input {:?}: engine accepts {}, oracle accepts {}",
            self.input,
            fmt_set(&self.engine),
            fmt_set(&self.oracle)
        )
    }
}

/// Where and how a deep run diverged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoRunMismatch {
    pub position: usize,
    pub stage: String,
    pub detail: String,
}

/// The outcome of one deep lockstep run.
#[derive(Debug, Clone)]
pub struct CoRunOutcome {
    pub input: String,
    /// Item- and token-level comparisons that were performed.
    pub checkpoints: usize,
    pub mismatch: Option<CoRunMismatch>,
}

/// Everything needed to run engine-vs-oracle comparisons for one grammar.
pub struct DiffContext {
    grammar: Grammar<i64>,
    lexer: pll_core::lexing::LexerFn<i64>,
    selector: pll_core::lexing::SelectorFn<i64>,
    induced: InducedGrammar<i64>,
    induced_lexer: InducedLexer<i64>,
    induced_selector: InducedSelector<i64>,
    domain: BTreeSet<i64>,
    limits: EngineLimits,
}

impl DiffContext {
    /// Flatten the compiled grammar once; both checkers reuse the result.
    pub fn new(compiled: &CompiledGrammar, limits: EngineLimits) -> Result<Self, EngineError> {
        let domain = compiled.grammar.required_domain()?.clone();
        let induced = induce_grammar(&compiled.grammar, &domain)?;
        Ok(DiffContext {
            grammar: compiled.grammar.clone(),
            lexer: compiled.lexer.clone(),
            selector: compiled.selector.clone(),
            induced,
            induced_lexer: InducedLexer::new(compiled.lexer.clone()),
            induced_selector: InducedSelector::new(compiled.selector.clone()),
            domain,
            limits,
        })
    }

    pub fn induced(&self) -> &InducedGrammar<i64> {
        &self.induced
    }

    pub fn alphabet(&self) -> Vec<char> {
        self.grammar.alphabet.iter().copied().collect()
    }

    /// Run both recognizers independently and compare their accepted
    /// outputs.
    pub fn run_case(&self, input: &str) -> Result<CaseResult, EngineError> {
        let chars: Vec<char> = input.chars().collect();
        let config = RunConfig {
            limits: self.limits,
            ..RunConfig::default()
        };
        let engine_chart: Chart<i64> =
            pella_run(&self.grammar, &self.lexer, &self.selector, &chars, &config)?;
        let oracle_chart: EllaChart<i64> = ella_run(
            &self.induced,
            &self.induced_lexer,
            &self.induced_selector,
            &chars,
            &self.limits,
        )?;
        Ok(CaseResult {
            input: input.to_string(),
            engine: pella_outputs(&self.grammar, &engine_chart),
            oracle: ella_outputs(&self.induced, &oracle_chart),
        })
    }

    /// Run both drivers in lockstep, comparing translated engine items
    /// against the normalized oracle items after every fixpoint, and the
    /// token sets after every selection round. Stops at the first
    /// divergence — every later state would inherit it.
    pub fn co_run(&self, input: &str) -> Result<CoRunOutcome, EngineError> {
        let chars: Vec<char> = input.chars().collect();
        let n = chars.len();
        let mut translator = Translator {
            grammar: &self.grammar,
            domain: &self.domain,
            cache: HashMap::new(),
        };
        let mut checkpoints = 0usize;
        let mut mismatch: Option<CoRunMismatch> = None;

        let check_items = |k: usize,
                               stage: &str,
                               engine: &ItemSet<i64>,
                               oracle: &EllaItemSet<i64>,
                               translator: &mut Translator<'_>|
         -> Option<CoRunMismatch> {
            let translated = translator.translate(engine);
            let normed = norm(oracle);
            if translated == normed {
                return None;
            }
            let correspondence = Correspondence {
                only_engine: translated.difference(&normed).cloned().collect(),
                only_oracle: normed.difference(&translated).cloned().collect(),
            };
            Some(CoRunMismatch {
                position: k,
                stage: stage.to_string(),
                detail: correspondence.report(),
            })
        };

        let check_tokens = |k: usize,
                            stage: &str,
                            engine: &TokenSet<i64>,
                            oracle: &InducedTokenSet<i64>|
         -> Option<CoRunMismatch> {
            let lifted = lift_tokens(engine);
            if &lifted == oracle {
                return None;
            }
            let mut detail = String::new();
            for t in lifted.difference(oracle) {
                let _ = writeln!(detail, "engine-only token: {} {:?}", t.symbol(), t.text());
            }
            for t in oracle.difference(&lifted) {
                let _ = writeln!(detail, "oracle-only token: {} {:?}", t.symbol(), t.text());
            }
            Some(CoRunMismatch {
                position: k,
                stage: stage.to_string(),
                detail,
            })
        };

        let mut engine_items = pella_pi(
            &self.grammar,
            0,
            &TokenSet::new(),
            &pella_init(&self.grammar),
            &self.limits,
        )?;
        let mut oracle_items = ella_pi(
            &self.induced,
            0,
            &InducedTokenSet::new(),
            &ella_init(&self.induced),
            &self.limits,
        )?;
        checkpoints += 1;
        mismatch = mismatch
            .or_else(|| check_items(0, "seed", &engine_items, &oracle_items, &mut translator));

        'positions: for k in 0..=n {
            if mismatch.is_some() {
                break;
            }
            if k > 0 {
                engine_items =
                    pella_pi(&self.grammar, k, &TokenSet::new(), &engine_items, &self.limits)?;
                oracle_items = ella_pi(
                    &self.induced,
                    k,
                    &InducedTokenSet::new(),
                    &oracle_items,
                    &self.limits,
                )?;
                checkpoints += 1;
                mismatch = check_items(k, "carry-over", &engine_items, &oracle_items, &mut translator);
                if mismatch.is_some() {
                    break;
                }
            }
            let mut engine_selected = TokenSet::new();
            let mut oracle_selected = InducedTokenSet::new();
            for round in 0..self.limits.max_fixpoint_rounds {
                let engine_tokens = pella_tokens(
                    &self.grammar,
                    &self.lexer,
                    &self.selector,
                    &chars,
                    &engine_selected,
                    k,
                    &engine_items,
                )?;
                let oracle_tokens = ella_tokens(
                    &self.induced_lexer,
                    &self.induced_selector,
                    &chars,
                    &oracle_selected,
                    k,
                    &oracle_items,
                )?;
                checkpoints += 1;
                mismatch = check_tokens(
                    k,
                    &format!("token selection, round {round}"),
                    &engine_tokens,
                    &oracle_tokens,
                );
                if mismatch.is_some() {
                    break 'positions;
                }
                let engine_next =
                    pella_pi(&self.grammar, k, &engine_tokens, &engine_items, &self.limits)?;
                let oracle_next =
                    ella_pi(&self.induced, k, &oracle_tokens, &oracle_items, &self.limits)?;
                checkpoints += 1;
                mismatch = check_items(
                    k,
                    &format!("item fixpoint, round {round}"),
                    &engine_next,
                    &oracle_next,
                    &mut translator,
                );
                if mismatch.is_some() {
                    break 'positions;
                }
                let engine_stable = engine_tokens.len() == engine_selected.len()
                    && engine_next.len() == engine_items.len();
                let oracle_stable = oracle_tokens.len() == oracle_selected.len()
                    && oracle_next.len() == oracle_items.len();
                engine_selected = engine_tokens;
                engine_items = engine_next;
                oracle_selected = oracle_tokens;
                oracle_items = oracle_next;
                if engine_stable != oracle_stable {
                    mismatch = Some(CoRunMismatch {
                        position: k,
                        stage: format!("stabilization, round {round}"),
                        detail: format!(
                            "engine stable: {engine_stable}, oracle stable: {oracle_stable}\n"
                        ),
                    });
                    break 'positions;
                }
                if engine_stable {
                    break;
                }
            }
        }

        Ok(CoRunOutcome {
            input: input.to_string(),
            checkpoints,
            mismatch,
        })
    }

    /// One-shot correspondence of two final charts, as an extra belt over
    /// the incremental checks (used by tests).
    pub fn final_correspondence(
        &self,
        engine: &Chart<i64>,
        oracle: &EllaChart<i64>,
    ) -> Correspondence<i64> {
        corresponds(
            &self.grammar,
            &self.domain,
            &engine.all_items(),
            &oracle.all_items(),
        )
    }
}

/// Memoized engine-to-oracle item translation. Item sets only grow while a
/// run proceeds, so caching per engine item makes the per-checkpoint cost
/// proportional to the set size, not to the translation work.
struct Translator<'a> {
    grammar: &'a Grammar<i64>,
    domain: &'a BTreeSet<i64>,
    cache: HashMap<ParameterizedItem<i64>, EllaItemSet<i64>>,
}

impl Translator<'_> {
    fn translate(&mut self, items: &ItemSet<i64>) -> EllaItemSet<i64> {
        let mut out = EllaItemSet::new();
        for item in items {
            let translated = self
                .cache
                .entry(item.clone())
                .or_insert_with(|| induce_item(self.grammar, item, self.domain));
            out.extend(translated.iter().cloned());
        }
        out
    }
}

/// The aggregate of a differential sweep.
#[derive(Debug, Clone, Default)]
pub struct DiffSummary {
    pub cases: usize,
    pub checkpoints: usize,
    /// One human-readable entry per disagreeing input.
    pub mismatches: Vec<String>,
}

impl DiffSummary {
    pub fn agree(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Sweep every string over `alphabet` up to `max_len`, shallow-comparing
/// outputs and, when `deep` is set, also lockstep-checking every internal
/// state. Engine failures abort the sweep; disagreements are collected.
pub fn diff_grammar(
    compiled: &CompiledGrammar,
    alphabet: &[char],
    max_len: usize,
    deep: bool,
    limits: EngineLimits,
) -> Result<DiffSummary, EngineError> {
    let ctx = DiffContext::new(compiled, limits)?;
    let mut summary = DiffSummary::default();
    for input in enumerate_strings(alphabet, max_len) {
        summary.cases += 1;
        let case = ctx.run_case(&input)?;
        if !case.agree() {
            summary.mismatches.push(case.describe());
            continue;
        }
        if deep {
            let outcome = ctx.co_run(&input)?;
            summary.checkpoints += outcome.checkpoints;
            if let Some(m) = outcome.mismatch {
                summary.mismatches.push(format!(
                    "input {:?}: diverged at position {}, {}:\n{}",
                    outcome.input, m.position, m.stage, m.detail
                ));
            }
        }
    }
    Ok(summary)
}
