//! The `pll` command-line interface.
//!
//! Exit codes: 0 — input accepted (or the requested check passed);
//! 1 — input rejected; 2 — usage or grammar errors; 3 — the engine
//! reported an internal error; 4 — the engine and the oracle disagreed.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use pll_core::induced::induce_grammar;
use pll_core::pella::{pella_outputs, pella_run, Chart, EngineLimits, RunConfig};

use crate::compile::{compile_text, CompiledGrammar};
use crate::diff::diff_grammar;
use crate::fuzz::{gen_case, FuzzBounds, GEN_ALPHABET};

pub const EXIT_ACCEPTED: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ENGINE_ERROR: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Parser)]
#[command(
    name = "pll",
    about = "Recognizer workbench for grammars with parameterized rules and local lexing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the recognizer over one input string.
    Parse {
        /// Grammar file.
        #[arg(long)]
        grammar: PathBuf,
        /// The input string, given inline.
        #[arg(long)]
        text: Option<String>,
        /// Read the input from a file instead (one trailing newline is
        /// trimmed).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Print a machine-readable report instead of prose.
        #[arg(long)]
        json: bool,
        /// Also print every chart item and selected token.
        #[arg(long)]
        dump_chart: bool,
        /// Recheck engine invariants while running (slower).
        #[arg(long)]
        verify: bool,
    },
    /// Print the grammar flattened over its parameter domain.
    Induce {
        /// Grammar file.
        #[arg(long)]
        grammar: PathBuf,
    },
    /// Compare the engine against the flattened-grammar oracle on every
    /// string up to a length bound.
    Diff {
        /// Grammar file.
        #[arg(long)]
        grammar: PathBuf,
        /// Longest input length to enumerate.
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Characters to build inputs from (default: the grammar's own
        /// alphabet).
        #[arg(long)]
        alphabet: Option<String>,
        /// Also compare all internal states, not just accepted outputs.
        #[arg(long)]
        deep: bool,
    },
    /// Generate random grammars and differentially test each one.
    Fuzz {
        /// Seed of the first generated grammar.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// How many grammars to generate (seeds seed, seed+1, ...).
        #[arg(long, default_value_t = 20)]
        count: u64,
        /// Longest input length to enumerate per grammar.
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Characters to build inputs from (default: the generator's
        /// alphabet).
        #[arg(long)]
        alphabet: Option<String>,
        /// Also compare all internal states, not just accepted outputs.
        #[arg(long)]
        deep: bool,
        /// Most rules per generated grammar.
        #[arg(long, default_value_t = FuzzBounds::default().max_rules)]
        max_rules: usize,
        /// Most terminals per generated grammar.
        #[arg(long, default_value_t = FuzzBounds::default().max_terminals)]
        max_terminals: usize,
        /// Most distinct nonterminals per generated grammar.
        #[arg(long, default_value_t = FuzzBounds::default().max_nonterminals)]
        max_nonterminals: usize,
        /// Most right-hand-side symbols per rule.
        #[arg(long, default_value_t = FuzzBounds::default().max_rhs)]
        max_rhs: usize,
        /// Largest domain upper bound (domains are 0..hi).
        #[arg(long, default_value_t = FuzzBounds::default().max_domain)]
        max_domain: i64,
        /// Regenerate grammars whose flattened form has more rules.
        #[arg(long, default_value_t = FuzzBounds::default().max_induced_rules)]
        max_induced_rules: usize,
    },
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    match Cli::parse().command {
        Command::Parse {
            grammar,
            text,
            input,
            json,
            dump_chart,
            verify,
        } => cmd_parse(&grammar, text, input, json, dump_chart, verify),
        Command::Induce { grammar } => cmd_induce(&grammar),
        Command::Diff {
            grammar,
            max_len,
            alphabet,
            deep,
        } => cmd_diff(&grammar, max_len, alphabet, deep),
        Command::Fuzz {
            seed,
            count,
            max_len,
            alphabet,
            deep,
            max_rules,
            max_terminals,
            max_nonterminals,
            max_rhs,
            max_domain,
            max_induced_rules,
        } => cmd_fuzz(
            seed,
            count,
            max_len,
            alphabet,
            deep,
            FuzzBounds {
                max_nonterminals,
                max_terminals,
                max_rules,
                max_rhs,
                max_domain,
                max_induced_rules,
            },
        ),
    }
}

fn load_grammar(path: &Path) -> Result<CompiledGrammar, i32> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return Err(EXIT_USAGE);
        }
    };
    compile_text(&text).map_err(|diags| {
        for diag in &diags {
            eprintln!("{}: {diag}", path.display());
        }
        EXIT_USAGE
    })
}

/// File inputs carry one trailing newline from most editors; strip exactly
/// one so the recognized string is what the file visibly contains.
fn trim_one_newline(s: &str) -> &str {
    s.strip_suffix("\r\n")
        .or_else(|| s.strip_suffix('\n'))
        .unwrap_or(s)
}

fn fmt_set(set: &BTreeSet<i64>) -> String {
    let inner: Vec<String> = set.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", inner.join(", "))
}

#[derive(Serialize)]
struct ParseReport {
    accepted: bool,
    outputs: Vec<i64>,
    stats: ParseStats,
}

#[derive(Serialize)]
struct ParseStats {
    items: usize,
    positions: usize,
}

fn render_chart(chart: &Chart<i64>) -> String {
    let mut out = String::new();
    out.push_str("tokens:\n");
    for k in 0..chart.positions() {
        for token in chart.tokens_at(k) {
            let _ = writeln!(
                out,
                "  @{k} {} in={} out={} text={:?}",
                token.terminal.name,
                token.in_param,
                token.out_param,
                token.text()
            );
        }
    }
    out.push_str("items:\n");
    let mut items: Vec<_> = chart.iter_items().collect();
    items.sort_by_key(|item| (item.start, item.end, item.rule, item.dot, item.params.clone()));
    for item in items {
        let params: Vec<String> = item.params.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(
            out,
            "  {}..{} {} dot={} params=[{}]",
            item.start,
            item.end,
            item.rule,
            item.dot,
            params.join(",")
        );
    }
    out
}

fn cmd_parse(
    grammar_path: &Path,
    text: Option<String>,
    input_path: Option<PathBuf>,
    json: bool,
    dump_chart: bool,
    verify: bool,
) -> i32 {
    let compiled = match load_grammar(grammar_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let input = match (text, input_path) {
        (Some(text), None) => text,
        (None, Some(path)) => match fs::read_to_string(&path) {
            Ok(contents) => trim_one_newline(&contents).to_string(),
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        _ => {
            eprintln!("exactly one of --text or --input is required");
            return EXIT_USAGE;
        }
    };
    let chars: Vec<char> = input.chars().collect();
    let config = RunConfig {
        verify,
        ..RunConfig::default()
    };
    let chart = match pella_run(
        &compiled.grammar,
        &compiled.lexer,
        &compiled.selector,
        &chars,
        &config,
    ) {
        Ok(chart) => chart,
        Err(e) => {
            eprintln!("engine error: {e}");
            return EXIT_ENGINE_ERROR;
        }
    };
    let outputs = pella_outputs(&compiled.grammar, &chart);
    let accepted = !outputs.is_empty();
    if json {
        let report = ParseReport {
            accepted,
            outputs: outputs.iter().copied().collect(),
            stats: ParseStats {
                items: chart.item_count(),
                positions: chart.positions(),
            },
        };
        println!(
            "{}",
            serde_json::to_string(&report).expect("report serialization cannot fail")
        );
    } else if accepted {
        println!("accepted, outputs {}", fmt_set(&outputs));
    } else {
        println!("rejected");
    }
    if dump_chart {
        print!("{}", render_chart(&chart));
    }
    if accepted {
        EXIT_ACCEPTED
    } else {
        EXIT_REJECTED
    }
}

fn cmd_induce(grammar_path: &Path) -> i32 {
    let compiled = match load_grammar(grammar_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let domain = match compiled.grammar.required_domain() {
        Ok(domain) => domain.clone(),
        Err(e) => {
            eprintln!("engine error: {e}");
            return EXIT_ENGINE_ERROR;
        }
    };
    match induce_grammar(&compiled.grammar, &domain) {
        Ok(induced) => {
            print!("{}", induced.render());
            EXIT_ACCEPTED
        }
        Err(e) => {
            eprintln!("engine error: {e}");
            EXIT_ENGINE_ERROR
        }
    }
}

fn parse_alphabet(alphabet: Option<String>, fallback: &[char]) -> Vec<char> {
    match alphabet {
        Some(s) => s.chars().collect(),
        None => fallback.to_vec(),
    }
}

fn cmd_diff(grammar_path: &Path, max_len: usize, alphabet: Option<String>, deep: bool) -> i32 {
    let compiled = match load_grammar(grammar_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let grammar_alphabet: Vec<char> = compiled.grammar.alphabet.iter().copied().collect();
    let alphabet = parse_alphabet(alphabet, &grammar_alphabet);
    match diff_grammar(&compiled, &alphabet, max_len, deep, EngineLimits::default()) {
        Ok(summary) if summary.agree() => {
            println!(
                "{} input(s) checked, engine and oracle agree ({} internal checkpoint(s))",
                summary.cases, summary.checkpoints
            );
            EXIT_ACCEPTED
        }
        Ok(summary) => {
            for mismatch in &summary.mismatches {
                println!("{mismatch}");
            }
            println!(
                "{} of {} input(s) disagree",
                summary.mismatches.len(),
                summary.cases
            );
            EXIT_MISMATCH
        }
        Err(e) => {
            eprintln!("engine error: {e}");
            EXIT_ENGINE_ERROR
        }
    }
}

fn cmd_fuzz(
    seed: u64,
    count: u64,
    max_len: usize,
    alphabet: Option<String>,
    deep: bool,
    bounds: FuzzBounds,
) -> i32 {
    let alphabet = parse_alphabet(alphabet, &GEN_ALPHABET);
    let mut cases_total = 0usize;
    for offset in 0..count {
        let case = gen_case(seed.wrapping_add(offset), &bounds);
        match diff_grammar(&case.compiled, &alphabet, max_len, deep, EngineLimits::default()) {
            Ok(summary) if summary.agree() => {
                cases_total += summary.cases;
            }
            Ok(summary) => {
                println!("grammar (seed {}):\n{}", case.seed, case.text);
                for mismatch in &summary.mismatches {
                    println!("{mismatch}");
                }
                println!(
                    "seed {}: {} of {} input(s) disagree",
                    case.seed,
                    summary.mismatches.len(),
                    summary.cases
                );
                return EXIT_MISMATCH;
            }
            Err(e) => {
                println!("grammar (seed {}):\n{}", case.seed, case.text);
                eprintln!("engine error on seed {}: {e}", case.seed);
                return EXIT_ENGINE_ERROR;
            }
        }
    }
    println!(
        "{count} grammar(s) from seed {seed}: {cases_total} input(s) checked, engine and oracle agree"
    );
    EXIT_ACCEPTED
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_trailing_newline_is_trimmed_from_file_input() {
        assert_eq!(trim_one_newline("abc\n"), "abc");
        assert_eq!(trim_one_newline("abc\r\n"), "abc");
        assert_eq!(trim_one_newline("abc\n\n"), "abc\n");
        assert_eq!(trim_one_newline("abc"), "abc");
        assert_eq!(trim_one_newline(""), "");
    }

    #[test]
    fn parse_reports_serialize_with_stable_field_order() {
        let report = ParseReport {
            accepted: true,
            outputs: vec![1, 3],
            stats: ParseStats {
                items: 10,
                positions: 4,
            },
        };
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            r#"{"accepted":true,"outputs":[1,3],"stats":{"items":10,"positions":4}}"#
        );
    }

    #[test]
    fn cli_definition_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
