//! Acceptance suite. Each test checks one release criterion end to end and
//! prints a single PASS line on success (visible with `--nocapture`); a
//! failure carries the full evidence in its panic message.
//!
//! Criteria:
//! 1. Differential correctness: for 200 seeded random grammars and every
//!    string of length ≤ 4 over a two-character alphabet, the engine and
//!    the flattened-grammar oracle accept exactly the same output sets,
//!    within a 120-second budget.
//! 2. Stagewise simulation: on 50 of those grammars, lockstep co-runs
//!    agree at every internal checkpoint (translated items and lifted
//!    token sets), including the final charts.
//! 3. Item translation is total: every item in every final engine chart
//!    from criterion 1 translates to a nonempty set of flattened items.
//! 4. Counting-grammar ground truth: the bundled counting grammar accepts
//!    "a"×n with output set {n} for 0 ≤ n ≤ 8 and nothing else.
//! 5. Component contracts: built-in lexers and selectors never violate
//!    their contracts across ≥ 10⁴ randomized calls each, and no internal
//!    invariant fired anywhere in criteria 1–4.
//! 6. Fixpoint laws: the position closure is idempotent (verified-mode
//!    re-checks on live runs) and every chart pass is extensive.
//! 7. Determinism: machine-readable CLI output is byte-identical across
//!    repeated runs for every bundled grammar.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::LazyLock;
use std::time::{Duration, Instant};

use pll_core::ella::{ella_outputs, ella_run};
use pll_core::induced::{induce_grammar, induce_item, InducedLexer, InducedSelector};
use pll_core::lexing::{
    lexer_charspan, lexer_count, lexer_literal, selector_all, selector_longest, selector_priority,
    CharClass, LexerFn, SelectorFn, SpanMode, Token, TokenSet,
};
use pll_core::grammar::SymbolId;
use pll_core::pella::{
    pella_complete, pella_init, pella_outputs, pella_pi, pella_predict, pella_run, pella_scan,
    pella_tokens, Chart, EngineLimits, RunConfig,
};

use pll_cli::compile::compile_text;
use pll_cli::diff::{enumerate_strings, DiffContext};
use pll_cli::fuzz::{gen_case, FuzzBounds, FuzzCase, GEN_ALPHABET};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRAMMAR_COUNT: usize = 200;
const DEEP_GRAMMAR_COUNT: usize = 50;
const MAX_INPUT_LEN: usize = 4;
const TIME_BUDGET: Duration = Duration::from_secs(120);

fn grammars_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../grammars")
}

/// The shared corpus: 200 generated grammars swept over every input, with
/// the final engine charts' items translated as they are produced. Built
/// once; criteria 1, 3, and 5 read it, and criteria 2 and 6 reuse its
/// grammar cases.
struct Corpus {
    cases: Vec<FuzzCase>,
    inputs: Vec<String>,
    /// (seed, input, engine outputs, oracle outputs) for every mismatch.
    output_mismatches: Vec<String>,
    /// Engine items whose translation came back empty.
    untranslatable_items: Vec<String>,
    items_translated: usize,
    comparisons: usize,
    elapsed: Duration,
}

static CORPUS: LazyLock<Corpus> = LazyLock::new(|| {
    let bounds = FuzzBounds::default();
    let inputs = enumerate_strings(&GEN_ALPHABET, MAX_INPUT_LEN);
    let limits = EngineLimits::default();
    let config = RunConfig {
        limits,
        ..RunConfig::default()
    };
    let mut cases = Vec::with_capacity(GRAMMAR_COUNT);
    let mut output_mismatches = Vec::new();
    let mut untranslatable_items = Vec::new();
    let mut items_translated = 0usize;
    let mut comparisons = 0usize;
    let started = Instant::now();
    for seed in 0..GRAMMAR_COUNT as u64 {
        let case = gen_case(seed, &bounds);
        let domain = case
            .compiled
            .grammar
            .required_domain()
            .expect("generated grammars declare a domain")
            .clone();
        let induced = induce_grammar(&case.compiled.grammar, &domain)
            .expect("generated grammars flatten cleanly");
        let induced_lexer = InducedLexer::new(case.compiled.lexer.clone());
        let induced_selector = InducedSelector::new(case.compiled.selector.clone());
        for input in &inputs {
            let chars: Vec<char> = input.chars().collect();
            let engine_chart: Chart<i64> = pella_run(
                &case.compiled.grammar,
                &case.compiled.lexer,
                &case.compiled.selector,
                &chars,
                &config,
            )
            .unwrap_or_else(|e| panic!("engine error on seed {seed}, input {input:?}: {e}"));
            let oracle_chart = ella_run(&induced, &induced_lexer, &induced_selector, &chars, &limits)
                .unwrap_or_else(|e| panic!("oracle error on seed {seed}, input {input:?}: {e}"));
            let engine = pella_outputs(&case.compiled.grammar, &engine_chart);
            let oracle = ella_outputs(&induced, &oracle_chart);
            comparisons += 1;
            if engine != oracle {
                output_mismatches.push(format!(
                    "seed {seed}, input {input:?}: engine {engine:?}, oracle {oracle:?}\n{}",
                    case.text
                ));
            }
            for item in engine_chart.iter_items() {
                items_translated += 1;
                if induce_item(&case.compiled.grammar, item, &domain).is_empty() {
                    untranslatable_items.push(format!(
                        "seed {seed}, input {input:?}: item {item:?} translates to nothing"
                    ));
                }
            }
        }
        cases.push(case);
    }
    Corpus {
        cases,
        inputs,
        output_mismatches,
        untranslatable_items,
        items_translated,
        comparisons,
        elapsed: started.elapsed(),
    }
});

#[test]
fn criterion_1_differential_correctness_across_random_grammars() {
    let corpus = &*CORPUS;
    assert!(
        corpus.output_mismatches.is_empty(),
        "[acceptance] criterion 1 (differential correctness): FAIL\n{}",
        corpus.output_mismatches.join("\n")
    );
    assert!(
        corpus.elapsed <= TIME_BUDGET,
        "[acceptance] criterion 1 (differential correctness): FAIL — \
         {} grammars × {} inputs took {:?}, over the {:?} budget",
        GRAMMAR_COUNT,
        corpus.inputs.len(),
        corpus.elapsed,
        TIME_BUDGET
    );
    println!(
        "[acceptance] criterion 1 (differential correctness): PASS — \
         {} grammars × {} inputs, {} output comparisons all equal in {:?}",
        GRAMMAR_COUNT,
        corpus.inputs.len(),
        corpus.comparisons,
        corpus.elapsed
    );
}

#[test]
fn criterion_2_stagewise_simulation_at_every_checkpoint() {
    let corpus = &*CORPUS;
    let mut checkpoints = 0usize;
    let mut failures = Vec::new();
    for case in corpus.cases.iter().take(DEEP_GRAMMAR_COUNT) {
        let ctx = DiffContext::new(&case.compiled, EngineLimits::default())
            .unwrap_or_else(|e| panic!("seed {}: flattening failed: {e}", case.seed));
        for input in &corpus.inputs {
            let outcome = ctx
                .co_run(input)
                .unwrap_or_else(|e| panic!("seed {}, input {input:?}: {e}", case.seed));
            checkpoints += outcome.checkpoints;
            if let Some(m) = outcome.mismatch {
                failures.push(format!(
                    "seed {}, input {input:?}: diverged at position {}, {}:\n{}\n{}",
                    case.seed, m.position, m.stage, m.detail, case.text
                ));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "[acceptance] criterion 2 (stagewise simulation): FAIL\n{}",
        failures.join("\n")
    );
    println!(
        "[acceptance] criterion 2 (stagewise simulation): PASS — \
         {DEEP_GRAMMAR_COUNT} grammars co-run over {} inputs, {checkpoints} checkpoints agree",
        corpus.inputs.len()
    );
}

#[test]
fn criterion_3_every_final_chart_item_translates_nonempty() {
    let corpus = &*CORPUS;
    assert!(
        corpus.untranslatable_items.is_empty(),
        "[acceptance] criterion 3 (item translation totality): FAIL\n{}",
        corpus.untranslatable_items.join("\n")
    );
    assert!(corpus.items_translated > 0);
    println!(
        "[acceptance] criterion 3 (item translation totality): PASS — \
         {} chart items all translate to nonempty flattened-item sets",
        corpus.items_translated
    );
}

#[test]
fn criterion_4_counting_grammar_ground_truth() {
    let path = grammars_dir().join("count.pll");
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let compiled = compile_text(&text).unwrap_or_else(|diags| {
        panic!("bundled counting grammar does not compile: {diags:?}")
    });
    let config = RunConfig::default();
    let run = |input: &str| -> BTreeSet<i64> {
        let chars: Vec<char> = input.chars().collect();
        let chart = pella_run(
            &compiled.grammar,
            &compiled.lexer,
            &compiled.selector,
            &chars,
            &config,
        )
        .unwrap_or_else(|e| panic!("engine error on {input:?}: {e}"));
        pella_outputs(&compiled.grammar, &chart)
    };
    let mut checked = 0usize;
    for n in 0..=8usize {
        let input = "a".repeat(n);
        let got = run(&input);
        assert_eq!(
            got,
            BTreeSet::from([n as i64]),
            "[acceptance] criterion 4 (counting ground truth): FAIL on {input:?}"
        );
        checked += 1;
    }
    // Anything longer than the domain allows, or containing a foreign
    // character, is rejected.
    assert_eq!(run(&"a".repeat(9)), BTreeSet::new());
    checked += 1;
    for input in enumerate_strings(&['a', 'b'], 4) {
        if input.contains('b') {
            assert_eq!(
                run(&input),
                BTreeSet::new(),
                "[acceptance] criterion 4 (counting ground truth): FAIL on {input:?}"
            );
            checked += 1;
        }
    }
    println!(
        "[acceptance] criterion 4 (counting ground truth): PASS — {checked} inputs match the exact expected output sets"
    );
}

/// Random lexer calls: the wrapper re-checks the match condition (token
/// text appears literally at the position, fits the input, and carries the
/// queried terminal and input parameter) on every call; this test also
/// re-verifies the returned tokens independently.
fn lexer_contract_calls(rng: &mut ChaCha8Rng, calls: usize) -> usize {
    let t = SymbolId::terminal("t");
    let lexers: Vec<LexerFn<i64>> = vec![
        LexerFn::from_table([(t.clone(), lexer_literal("ab", |a: &i64| Some(a + 1)))].into()),
        LexerFn::from_table([(t.clone(), lexer_literal("", |a: &i64| Some(*a)))].into()),
        LexerFn::from_table(
            [(
                t.clone(),
                lexer_charspan(
                    CharClass::from_ranges(vec![('a', 'b')]),
                    SpanMode::Greedy,
                    |a: &i64, len| Some(a + len as i64),
                ),
            )]
            .into(),
        ),
        LexerFn::from_table(
            [(
                t.clone(),
                lexer_charspan(
                    CharClass::from_ranges(vec![('a', 'a')]),
                    SpanMode::AllLengths,
                    |a: &i64, len| (len % 2 == 0).then_some(*a),
                ),
            )]
            .into(),
        ),
        LexerFn::from_table(
            [(
                t.clone(),
                lexer_count(
                    CharClass::from_ranges(vec![('a', 'b')]),
                    |a: &i64| usize::try_from(*a).ok(),
                    |a: &i64, len| Some(a + len as i64),
                ),
            )]
            .into(),
        ),
    ];
    let mut performed = 0usize;
    for _ in 0..calls {
        let lexer = &lexers[rng.random_range(0..lexers.len())];
        let len = rng.random_range(0..8usize);
        let input: Vec<char> = (0..len)
            .map(|_| GEN_ALPHABET[rng.random_range(0..GEN_ALPHABET.len())])
            .collect();
        let k = rng.random_range(0..=input.len());
        let alpha: i64 = rng.random_range(-2..6);
        let tokens = lexer
            .lex(&t, &alpha, &input, k)
            .expect("built-in lexers must satisfy the match condition");
        for token in &tokens {
            assert_eq!(token.terminal, t);
            assert_eq!(token.in_param, alpha);
            assert!(k + token.width() <= input.len(), "token must fit the input");
            assert_eq!(
                &input[k..k + token.width()],
                token.text().chars().collect::<Vec<_>>().as_slice(),
                "token text must appear literally at the position"
            );
        }
        performed += 1;
    }
    performed
}

/// Random selector calls with `required ⊆ candidates`: the result must
/// contain everything required and add nothing beyond the candidates.
fn selector_contract_calls(rng: &mut ChaCha8Rng, calls: usize) -> usize {
    let terminals = [SymbolId::terminal("t"), SymbolId::terminal("u")];
    let selectors: Vec<SelectorFn<i64>> = vec![
        selector_all(),
        selector_longest(),
        selector_priority(vec![terminals[0].clone(), terminals[1].clone()]),
        selector_priority(vec![terminals[1].clone()]),
    ];
    let mut performed = 0usize;
    for _ in 0..calls {
        let selector = &selectors[rng.random_range(0..selectors.len())];
        let mut candidates = TokenSet::new();
        for _ in 0..rng.random_range(0..6usize) {
            let terminal = terminals[rng.random_range(0..terminals.len())].clone();
            let width = rng.random_range(0..3usize);
            let text: String = (0..width).map(|_| 'a').collect();
            candidates.insert(Token::new(
                terminal,
                rng.random_range(0..3),
                rng.random_range(0..3),
                &text,
            ));
        }
        let required: TokenSet<i64> = candidates
            .iter()
            .filter(|_| rng.random_bool(0.3))
            .cloned()
            .collect();
        let result = selector
            .select(&required, &candidates)
            .expect("built-in selectors must satisfy their contract");
        assert!(
            required.is_subset(&result),
            "selector dropped a required token"
        );
        assert!(
            result.is_subset(&candidates),
            "selector invented a token outside the candidates"
        );
        performed += 1;
    }
    performed
}

#[test]
fn criterion_5_component_contracts_hold_under_randomized_calls() {
    // Touch the corpus first: criteria 1–4 run entirely through the checked
    // wrappers, so reaching this point with a built corpus means no
    // internal-invariant error (selected ⊆ candidates at token time) fired
    // anywhere in those runs — any violation is a hard error, not a skip.
    let corpus = &*CORPUS;
    assert!(corpus.comparisons > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(0xC027AC7);
    let lexer_calls = lexer_contract_calls(&mut rng, 10_000);
    let selector_calls = selector_contract_calls(&mut rng, 10_000);
    assert!(lexer_calls >= 10_000 && selector_calls >= 10_000);
    println!(
        "[acceptance] criterion 5 (component contracts): PASS — \
         {lexer_calls} lexer calls and {selector_calls} selector calls within contract; \
         no internal invariant fired across {} corpus runs",
        corpus.comparisons
    );
}

#[test]
fn criterion_6_fixpoint_idempotent_and_passes_extensive() {
    let corpus = &*CORPUS;
    let limits = EngineLimits::default();
    let verify_config = RunConfig {
        limits,
        verify: true,
    };
    let sample = 20.min(corpus.cases.len());
    let mut verified_runs = 0usize;
    let mut extensivity_checks = 0usize;
    // Verified-mode runs recheck, inside every position-closure call, that
    // applying the closure again changes nothing (idempotence) and that
    // each item's parameter chain recomputes exactly.
    for case in corpus.cases.iter().take(sample) {
        for input in &corpus.inputs {
            let chars: Vec<char> = input.chars().collect();
            pella_run(
                &case.compiled.grammar,
                &case.compiled.lexer,
                &case.compiled.selector,
                &chars,
                &verify_config,
            )
            .unwrap_or_else(|e| {
                panic!(
                    "[acceptance] criterion 6: verified run failed on seed {}, input {input:?}: {e}",
                    case.seed
                )
            });
            verified_runs += 1;
        }
    }
    // Extensivity of each pass, observed on live mid-run states: drive the
    // engine by hand and compare every pass's output against its input.
    for case in corpus.cases.iter().take(5) {
        let g = &case.compiled.grammar;
        for input in corpus.inputs.iter().filter(|i| i.len() <= 2) {
            let chars: Vec<char> = input.chars().collect();
            let mut items = pella_init(g);
            for k in 0..=chars.len() {
                let predicted = pella_predict(g, k, &items);
                assert!(predicted.is_superset(&items), "predict must be extensive");
                let completed = pella_complete(g, k, &predicted);
                assert!(completed.is_superset(&predicted), "complete must be extensive");
                let tokens = pella_tokens(
                    g,
                    &case.compiled.lexer,
                    &case.compiled.selector,
                    &chars,
                    &TokenSet::new(),
                    k,
                    &completed,
                )
                .expect("token selection");
                let scanned = pella_scan(g, &tokens, k, &completed);
                assert!(scanned.is_superset(&completed), "scan must be extensive");
                let closed = pella_pi(g, k, &tokens, &scanned, &limits).expect("closure");
                assert!(closed.is_superset(&scanned), "the closure must be extensive");
                let reclosed = pella_pi(g, k, &tokens, &closed, &limits).expect("closure");
                assert_eq!(reclosed, closed, "the closure must be idempotent");
                extensivity_checks += 5;
                items = closed;
            }
        }
    }
    println!(
        "[acceptance] criterion 6 (fixpoint laws): PASS — \
         {verified_runs} verified-mode runs and {extensivity_checks} extensivity/idempotence checks"
    );
}

#[test]
fn criterion_7_cli_output_is_byte_identical_across_runs() {
    let bin = env!("CARGO_BIN_EXE_pll");
    let dir = grammars_dir();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("cannot list {}: {e}", dir.display()))
        .map(|entry| entry.expect("readable directory entry").path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "pll"))
        .collect();
    entries.sort();
    assert!(!entries.is_empty(), "no bundled grammars found");
    let sample_inputs = ["", "a", "abaa", "xxxyxx", "abab"];
    let mut runs = 0usize;
    for grammar in &entries {
        for input in sample_inputs {
            let mut outputs = Vec::new();
            for _ in 0..3 {
                let out = Command::new(bin)
                    .args(["parse", "--grammar"])
                    .arg(grammar)
                    .args(["--text", input, "--json"])
                    .output()
                    .expect("binary runs");
                assert!(
                    out.status.code().is_some_and(|c| c == 0 || c == 1),
                    "unexpected exit for {} on {input:?}: {:?}\nstderr: {}",
                    grammar.display(),
                    out.status,
                    String::from_utf8_lossy(&out.stderr)
                );
                outputs.push(out.stdout);
                runs += 1;
            }
            assert!(
                outputs.windows(2).all(|w| w[0] == w[1]),
                "[acceptance] criterion 7 (determinism): FAIL — \
                 {} on {input:?} produced differing bytes across runs",
                grammar.display()
            );
        }
    }
    println!(
        "[acceptance] criterion 7 (determinism): PASS — \
         {} grammars × {} inputs × 3 runs ({runs} invocations) byte-identical",
        entries.len(),
        sample_inputs.len()
    );
}
