//! Turning a parsed grammar document into an executable grammar: symbol
//! resolution, clause completeness and variable-scope checking, and the
//! construction of the parameter functions, terminal matchers, and
//! selector as closures over the declared expressions.
//!
//! All semantic rules live here; the parser only decides whether a file is
//! well-formed text. Every check reports a [`Diagnostic`], and compilation
//! reports all of them rather than stopping at the first.

use std::collections::{BTreeMap, BTreeSet};

use pll_core::grammar::{Grammar, ParamFn, ParameterizedRule, RuleId, SymbolId};
use pll_core::lexing::{
    lexer_charspan, lexer_count, lexer_literal, selector_all, selector_longest, selector_priority,
    CharClass, LexerFn, SelectorFn, SpanMode, TerminalLexer,
};

use crate::doc::{GrammarDoc, MatcherDecl, RuleDecl, SelectorDecl, SpanModeDecl, TerminalDecl};
use crate::expr::{scope_violation, Env, Expr, Guard, VarScope};
use crate::parse::Diagnostic;

/// Largest number of values a declared parameter domain may have. The
/// oracle construction enumerates the domain per rule position, so its
/// size is a real resource bound, not a parser nicety.
pub const MAX_DOMAIN_VALUES: u128 = 100_000;

/// A grammar document compiled into the three executable components the
/// recognizer needs.
#[derive(Debug, Clone)]
pub struct CompiledGrammar {
    pub grammar: Grammar<i64>,
    pub lexer: LexerFn<i64>,
    pub selector: SelectorFn<i64>,
}

/// Evaluate guard-then-expression under an environment, mapping guard
/// failure, arithmetic overflow, and out-of-domain results to "undefined".
fn guarded_value(
    expr: &Expr,
    guard: &Option<Guard>,
    env: &Env<'_>,
    lo: i64,
    hi: i64,
) -> Option<i64> {
    if let Some(g) = guard {
        if !g.eval(env)? {
            return None;
        }
    }
    let value = expr.eval(env)?;
    (lo..=hi).contains(&value).then_some(value)
}

/// Build the parameter function for one rule clause. `arity` is fixed by
/// the clause's position; the function is undefined whenever the guard is
/// false or undefined, the expression overflows, or the result escapes the
/// domain.
fn clause_param_fn(expr: &Expr, guard: &Option<Guard>, arity: usize, lo: i64, hi: i64) -> ParamFn<i64> {
    let expr = expr.clone();
    let guard = guard.clone();
    ParamFn::new(arity, move |args| {
        let env = Env { args, len: None };
        guarded_value(&expr, &guard, &env, lo, hi)
    })
}

/// Build a terminal's output map over (input parameter, matched length).
fn terminal_out_fn(
    expr: &Expr,
    guard: &Option<Guard>,
    lo: i64,
    hi: i64,
) -> impl Fn(&i64, usize) -> Option<i64> + Send + Sync + 'static {
    let expr = expr.clone();
    let guard = guard.clone();
    move |alpha, len| {
        let args = [*alpha];
        let env = Env {
            args: &args,
            len: Some(i64::try_from(len).ok()?),
        };
        guarded_value(&expr, &guard, &env, lo, hi)
    }
}

fn compile_terminal(decl: &TerminalDecl, lo: i64, hi: i64) -> TerminalLexer<i64> {
    let out = terminal_out_fn(&decl.out, &decl.guard, lo, hi);
    match &decl.matcher {
        MatcherDecl::Char(c) => {
            let text = c.to_string();
            lexer_literal(&text, move |alpha| out(alpha, 1))
        }
        MatcherDecl::Lit(s) => {
            let width = s.chars().count();
            lexer_literal(s, move |alpha| out(alpha, width))
        }
        MatcherDecl::Span { class, mode } => lexer_charspan(
            CharClass::from_ranges(class.ranges.clone()),
            match mode {
                SpanModeDecl::Greedy => SpanMode::Greedy,
                SpanModeDecl::All => SpanMode::AllLengths,
            },
            out,
        ),
        MatcherDecl::Count { class, by } => {
            let by = by.clone();
            lexer_count(
                CharClass::from_ranges(class.ranges.clone()),
                move |alpha| {
                    let args = [*alpha];
                    let env = Env {
                        args: &args,
                        len: None,
                    };
                    usize::try_from(by.eval(&env)?).ok()
                },
                out,
            )
        }
    }
}

/// The characters a terminal can ever consume, for the grammar's alphabet.
fn matcher_chars(matcher: &MatcherDecl) -> Vec<char> {
    match matcher {
        MatcherDecl::Char(c) => vec![*c],
        MatcherDecl::Lit(s) => s.chars().collect(),
        MatcherDecl::Span { class, .. } | MatcherDecl::Count { class, .. } => {
            CharClass::from_ranges(class.ranges.clone()).chars().collect()
        }
    }
}

/// Check one expression (plus optional guard) against its scope, citing
/// `line` and `what` in any diagnostic.
fn check_scope(
    expr: &Expr,
    guard: &Option<Guard>,
    scope: VarScope,
    line: usize,
    what: &str,
    diags: &mut Vec<Diagnostic>,
) {
    let mut vars = expr.vars();
    if let Some(g) = guard {
        vars.extend(g.vars());
    }
    if let Some(var) = scope_violation(&vars, scope) {
        diags.push(Diagnostic::at_line(
            line,
            format!("variable `{var}` is not in scope in {what}"),
        ));
    }
}

/// The clauses of one rule, split by target and checked for completeness:
/// exactly `in1 .. ink` plus `out`, each once.
struct RuleClauses<'a> {
    inputs: Vec<(&'a Expr, &'a Option<Guard>)>,
    output: (&'a Expr, &'a Option<Guard>),
}

fn split_clauses<'a>(rule: &'a RuleDecl, diags: &mut Vec<Diagnostic>) -> Option<RuleClauses<'a>> {
    use crate::doc::ClauseTarget;
    let k = rule.rhs.len();
    let mut inputs: Vec<Option<(&Expr, &Option<Guard>)>> = vec![None; k];
    let mut output = None;
    let mut bad = false;
    for clause in &rule.clauses {
        let slot = match clause.target {
            ClauseTarget::Out => &mut output,
            ClauseTarget::In(n) if (1..=k).contains(&n) => &mut inputs[n - 1],
            ClauseTarget::In(n) => {
                diags.push(Diagnostic::at_line(
                    rule.line,
                    format!("clause `in{n}` does not match the rule's {k} right-hand-side symbol(s)"),
                ));
                bad = true;
                continue;
            }
        };
        if slot.is_some() {
            diags.push(Diagnostic::at_line(
                rule.line,
                format!("duplicate `{}` clause", clause.target),
            ));
            bad = true;
        } else {
            *slot = Some((&clause.expr, &clause.guard));
        }
    }
    for (i, input) in inputs.iter().enumerate() {
        if input.is_none() {
            diags.push(Diagnostic::at_line(
                rule.line,
                format!("missing `in{}` clause", i + 1),
            ));
            bad = true;
        }
    }
    if output.is_none() {
        diags.push(Diagnostic::at_line(rule.line, "missing `out` clause"));
        bad = true;
    }
    if bad {
        return None;
    }
    Some(RuleClauses {
        inputs: inputs.into_iter().map(|c| c.expect("checked above")).collect(),
        output: output.expect("checked above"),
    })
}

/// Compile a grammar document. On failure every problem found is reported,
/// each citing the declaration's source line where one exists.
pub fn compile(doc: &GrammarDoc) -> Result<CompiledGrammar, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let (lo, hi) = doc.domain;

    if lo > hi {
        diags.push(Diagnostic::global(format!("domain {lo}..{hi} is empty")));
    } else {
        let size = (hi as i128 - lo as i128 + 1) as u128;
        if size > MAX_DOMAIN_VALUES {
            diags.push(Diagnostic::global(format!(
                "domain {lo}..{hi} has {size} values, more than the supported {MAX_DOMAIN_VALUES}"
            )));
        }
    }

    let mut terminal_names: BTreeSet<&str> = BTreeSet::new();
    for decl in &doc.terminals {
        if !terminal_names.insert(&decl.name) {
            diags.push(Diagnostic::at_line(
                decl.line,
                format!("terminal `{}` is declared twice", decl.name),
            ));
        }
    }

    let (start_name, start_param) = (&doc.start.0, doc.start.1);
    let mut nonterminal_names: BTreeSet<&str> = BTreeSet::from([start_name.as_str()]);
    for rule in &doc.rules {
        nonterminal_names.insert(&rule.lhs);
    }

    if terminal_names.contains(start_name.as_str()) {
        diags.push(Diagnostic::global(format!(
            "start symbol `{start_name}` is also declared as a terminal"
        )));
    }
    for rule in &doc.rules {
        if terminal_names.contains(rule.lhs.as_str()) {
            diags.push(Diagnostic::at_line(
                rule.line,
                format!("rule left-hand side `{}` is declared as a terminal", rule.lhs),
            ));
        }
        for name in &rule.rhs {
            if !terminal_names.contains(name.as_str()) && !nonterminal_names.contains(name.as_str())
            {
                diags.push(Diagnostic::at_line(
                    rule.line,
                    format!(
                        "unknown symbol `{name}` (not a terminal or the left-hand side of any rule)"
                    ),
                ));
            }
        }
    }

    if !(lo..=hi).contains(&start_param) {
        diags.push(Diagnostic::global(format!(
            "start parameter {start_param} is outside the domain {lo}..{hi}"
        )));
    }

    if let SelectorDecl::Priority(names) = &doc.selector {
        for name in names {
            if !terminal_names.contains(name.as_str()) {
                diags.push(Diagnostic::global(format!(
                    "selector priority names undeclared terminal `{name}`"
                )));
            }
        }
    }

    for decl in &doc.terminals {
        check_scope(
            &decl.out,
            &decl.guard,
            VarScope::TerminalOut,
            decl.line,
            &format!("terminal `{}`'s output", decl.name),
            &mut diags,
        );
        if let MatcherDecl::Count { by, .. } = &decl.matcher {
            check_scope(
                by,
                &None,
                VarScope::TerminalBy,
                decl.line,
                &format!("terminal `{}`'s count expression", decl.name),
                &mut diags,
            );
        }
    }

    let mut rule_clauses = Vec::new();
    for rule in &doc.rules {
        let clauses = split_clauses(rule, &mut diags);
        if let Some(clauses) = &clauses {
            let k = rule.rhs.len();
            for (i, (expr, guard)) in clauses.inputs.iter().enumerate() {
                check_scope(
                    expr,
                    guard,
                    VarScope::RuleFn { position: i + 1 },
                    rule.line,
                    &format!("clause `in{}`", i + 1),
                    &mut diags,
                );
            }
            let (expr, guard) = &clauses.output;
            check_scope(
                expr,
                guard,
                VarScope::RuleFn { position: k + 1 },
                rule.line,
                "clause `out`",
                &mut diags,
            );
        }
        rule_clauses.push(clauses);
    }

    if !diags.is_empty() {
        return Err(diags);
    }

    let rules: Vec<ParameterizedRule<i64>> = doc
        .rules
        .iter()
        .zip(&rule_clauses)
        .enumerate()
        .map(|(index, (rule, clauses))| {
            let clauses = clauses.as_ref().expect("diagnostics were empty");
            let rhs = rule
                .rhs
                .iter()
                .zip(&clauses.inputs)
                .enumerate()
                .map(|(i, (name, (expr, guard)))| {
                    let symbol = if terminal_names.contains(name.as_str()) {
                        SymbolId::terminal(name.as_str())
                    } else {
                        SymbolId::nonterminal(name.as_str())
                    };
                    (symbol, clause_param_fn(expr, guard, 2 * (i + 1) - 1, lo, hi))
                })
                .collect();
            let (out_expr, out_guard) = &clauses.output;
            ParameterizedRule {
                id: RuleId(index),
                lhs: SymbolId::nonterminal(rule.lhs.as_str()),
                rhs,
                out_fn: clause_param_fn(out_expr, out_guard, 2 * rule.rhs.len() + 1, lo, hi),
            }
        })
        .collect();

    let alphabet: BTreeSet<char> = doc
        .terminals
        .iter()
        .flat_map(|decl| matcher_chars(&decl.matcher))
        .collect();

    let grammar = Grammar {
        nonterminals: nonterminal_names.iter().map(|n| SymbolId::nonterminal(*n)).collect(),
        terminals: terminal_names.iter().map(|n| SymbolId::terminal(*n)).collect(),
        rules,
        start: SymbolId::nonterminal(start_name.as_str()),
        start_param,
        alphabet,
        param_domain: Some((lo..=hi).collect()),
    };

    // The checks above should make structural violations impossible; leave
    // the net in place anyway so a compiler bug surfaces as a diagnostic
    // instead of an engine panic.
    let violations = grammar.validate();
    if !violations.is_empty() {
        return Err(violations
            .into_iter()
            .map(|v| Diagnostic::global(format!("internal: compiled grammar is malformed: {v}")))
            .collect());
    }

    let table: BTreeMap<SymbolId, TerminalLexer<i64>> = doc
        .terminals
        .iter()
        .map(|decl| (SymbolId::terminal(decl.name.as_str()), compile_terminal(decl, lo, hi)))
        .collect();
    let lexer = LexerFn::from_table(table);

    let selector = match &doc.selector {
        SelectorDecl::All => selector_all(),
        SelectorDecl::Longest => selector_longest(),
        SelectorDecl::Priority(names) => {
            selector_priority(names.iter().map(|n| SymbolId::terminal(n.as_str())).collect())
        }
    };

    Ok(CompiledGrammar {
        grammar,
        lexer,
        selector,
    })
}

/// Parse and compile in one step, merging both diagnostic streams.
pub fn compile_text(text: &str) -> Result<CompiledGrammar, Vec<Diagnostic>> {
    compile(&crate::parse::parse_grammar(text)?)
}
