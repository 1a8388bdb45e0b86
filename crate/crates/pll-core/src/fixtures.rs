//! Shared test fixture: the counting grammar used across unit tests.
//!
//! Over the domain 0..=8 it accepts exactly the strings `a^n` and outputs n:
//! the lexer hands each `a` token the successor of its input parameter, and
//! the rules thread that running count through to the final output.
//!
//! ```text
//! r0:  S -> (empty)   out = a
//! r1:  S -> a S       in1 = a ; in2 = b1 ; out = b2
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::grammar::{Grammar, ParamFn, ParameterizedRule, RuleId, SymbolId};
use crate::lexing::{lexer_literal, selector_all, LexerFn, SelectorFn};

pub const COUNT_DOMAIN_MAX: i64 = 8;

pub fn count_grammar() -> Grammar<i64> {
    let s = SymbolId::nonterminal("S");
    let a = SymbolId::terminal("a");

    let empty_rule = ParameterizedRule {
        id: RuleId(0),
        lhs: s.clone(),
        rhs: vec![],
        out_fn: ParamFn::identity(),
    };
    let step_rule = ParameterizedRule {
        id: RuleId(1),
        lhs: s.clone(),
        rhs: vec![
            (a.clone(), ParamFn::identity()),
            (s.clone(), ParamFn::project(3, 2)),
        ],
        out_fn: ParamFn::project(5, 4),
    };

    Grammar {
        nonterminals: BTreeSet::from([s.clone()]),
        terminals: BTreeSet::from([a]),
        rules: vec![empty_rule, step_rule],
        start: s,
        start_param: 0,
        alphabet: BTreeSet::from(['a', 'b']),
        param_domain: Some((0..=COUNT_DOMAIN_MAX).collect()),
    }
}

pub fn count_lexer() -> LexerFn<i64> {
    let a = SymbolId::terminal("a");
    let table = BTreeMap::from([(
        a,
        lexer_literal("a", |alpha: &i64| {
            let beta = alpha + 1;
            (0..=COUNT_DOMAIN_MAX).contains(&beta).then_some(beta)
        }),
    )]);
    LexerFn::from_table(table)
}

pub fn count_selector() -> SelectorFn<i64> {
    selector_all()
}
