//! Parameterized grammars: symbols, partial parameter functions, and rules.
//!
//! A rule `N -> X1 .. Xk` carries k+1 partial functions `f1 .. f_{k+1}`.
//! Reading the rule left to right, `f_i` computes the input parameter handed
//! to `X_i` from everything visible to its left — the rule's own input
//! parameter plus the input/output pair of each already-consumed symbol — and
//! `f_{k+1}` computes the rule's output parameter from the full picture. The
//! visible prefix for `f_i` has exactly `2i - 1` entries, which fixes each
//! function's arity by position.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use crate::error::EngineError;

/// Parameter values threaded through a grammar.
///
/// Any type with equality, a canonical total order (used only for
/// deterministic iteration and serialization), and hashing qualifies; the
/// engine never interprets parameter values itself.
pub trait Param: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static {}

impl<T: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static> Param for T {}

/// Whether a symbol is rewritten by rules or matched by the lexer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Nonterminal,
    Terminal,
}

/// A grammar symbol. The kind is part of the identity, but grammars must
/// still keep the two name spaces disjoint (see [`Grammar::validate`]).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId {
    pub kind: SymbolKind,
    pub name: String,
}

impl SymbolId {
    pub fn nonterminal(name: impl Into<String>) -> Self {
        SymbolId {
            kind: SymbolKind::Nonterminal,
            name: name.into(),
        }
    }

    pub fn terminal(name: impl Into<String>) -> Self {
        SymbolId {
            kind: SymbolKind::Terminal,
            name: name.into(),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.kind == SymbolKind::Terminal
    }

    pub fn is_nonterminal(&self) -> bool {
        self.kind == SymbolKind::Nonterminal
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

type EvalFn<P> = dyn Fn(&[P]) -> Option<P> + Send + Sync;

/// A pure partial function over parameter tuples.
///
/// Undefinedness is a first-class outcome: [`ParamFn::apply`] returns
/// `Ok(None)` when the function is undefined at the given arguments. Applying
/// the function to a tuple of the wrong length is a distinct, hard error —
/// a caller bug, not a point outside the function's domain.
#[derive(Clone)]
pub struct ParamFn<P> {
    arity: usize,
    eval: Arc<EvalFn<P>>,
}

impl<P: Param> ParamFn<P> {
    pub fn new(arity: usize, eval: impl Fn(&[P]) -> Option<P> + Send + Sync + 'static) -> Self {
        ParamFn {
            arity,
            eval: Arc::new(eval),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Apply to an argument tuple: `Ok(Some(v))` when defined, `Ok(None)`
    /// when undefined at these arguments, `Err` on a wrong tuple length.
    pub fn apply(&self, args: &[P]) -> Result<Option<P>, EngineError> {
        if args.len() != self.arity {
            return Err(EngineError::ArityMismatch {
                expected: self.arity,
                got: args.len(),
            });
        }
        Ok((self.eval)(args))
    }

    /// The one-argument identity.
    pub fn identity() -> Self {
        ParamFn::project(1, 0)
    }

    /// Always returns `value`, defined everywhere.
    pub fn constant(arity: usize, value: P) -> Self {
        ParamFn::new(arity, move |_| Some(value.clone()))
    }

    /// Returns the `index`-th argument (0-based), defined everywhere.
    pub fn project(arity: usize, index: usize) -> Self {
        assert!(index < arity, "projection index {index} out of arity {arity}");
        ParamFn::new(arity, move |args: &[P]| Some(args[index].clone()))
    }

    /// Undefined at every tuple.
    pub fn undefined(arity: usize) -> Self {
        ParamFn::new(arity, |_| None)
    }
}

impl<P> fmt::Debug for ParamFn<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParamFn(arity={})", self.arity)
    }
}

/// Apply a rule function whose arity is guaranteed by construction.
///
/// Engine internals only call functions with the tuple length fixed by their
/// rule position, so an arity error here means the grammar was never
/// validated; that is a programming error, not a recoverable condition.
pub(crate) fn eval_rule_fn<P: Param>(f: &ParamFn<P>, args: &[P]) -> Option<P> {
    f.apply(args)
        .expect("rule function arity must match its position; validate the grammar first")
}

/// Stable identifier of a rule within its grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub usize);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// One parameterized rule `N -> X1^{f1} .. Xk^{fk}` with output function
/// `f_{k+1}`.
#[derive(Debug, Clone)]
pub struct ParameterizedRule<P> {
    pub id: RuleId,
    pub lhs: SymbolId,
    /// Right-hand-side symbols paired with their input functions `f1 .. fk`.
    pub rhs: Vec<(SymbolId, ParamFn<P>)>,
    /// `f_{k+1}`: the rule's output once every rhs symbol is consumed.
    pub out_fn: ParamFn<P>,
}

impl<P: Param> ParameterizedRule<P> {
    pub fn rhs_len(&self) -> usize {
        self.rhs.len()
    }

    /// The symbol at rhs position `d` (0-based), if any.
    pub fn symbol_at(&self, d: usize) -> Option<&SymbolId> {
        self.rhs.get(d).map(|(sym, _)| sym)
    }

    /// The m-th parameter function, 1-based: `f_m` for `m` in
    /// `1 ..= rhs_len() + 1`, where the last index is the output function.
    pub fn param_fn(&self, m: usize) -> &ParamFn<P> {
        assert!(
            m >= 1 && m <= self.rhs.len() + 1,
            "function index {m} out of range for a rule with {} rhs symbols",
            self.rhs.len()
        );
        if m <= self.rhs.len() {
            &self.rhs[m - 1].1
        } else {
            &self.out_fn
        }
    }

    /// All k+1 functions in positional order, cloned (cheap — shared
    /// closures).
    pub fn fn_chain(&self) -> Vec<ParamFn<P>> {
        let mut fs: Vec<ParamFn<P>> = self.rhs.iter().map(|(_, f)| f.clone()).collect();
        fs.push(self.out_fn.clone());
        fs
    }

    /// Expected arities `2i - 1` for `f_1 .. f_{k+1}`.
    pub fn arity_table(&self) -> Vec<usize> {
        (1..=self.rhs.len() + 1).map(|i| 2 * i - 1).collect()
    }
}

/// A parameterized grammar. The lexer and selector travel separately (see
/// [`crate::lexing`]); together the three form the full parsing setup.
#[derive(Debug, Clone)]
pub struct Grammar<P> {
    pub nonterminals: BTreeSet<SymbolId>,
    pub terminals: BTreeSet<SymbolId>,
    pub rules: Vec<ParameterizedRule<P>>,
    pub start: SymbolId,
    pub start_param: P,
    /// Characters the input alphabet is documented to range over. Metadata:
    /// input strings are not pre-checked against it — a character no lexer
    /// matches simply produces no token.
    pub alphabet: BTreeSet<char>,
    /// Finite parameter domain, required only for induction and the oracle.
    pub param_domain: Option<BTreeSet<P>>,
}

impl<P: Param> Grammar<P> {
    /// Resolve a rule id. Panics on a foreign id (ids are only meaningful
    /// within the grammar that issued them).
    pub fn rule(&self, id: RuleId) -> &ParameterizedRule<P> {
        self.rules
            .iter()
            .find(|r| r.id == id)
            .expect("rule id does not belong to this grammar")
    }

    pub fn rules_with_lhs<'a>(
        &'a self,
        lhs: &'a SymbolId,
    ) -> impl Iterator<Item = &'a ParameterizedRule<P>> + 'a {
        self.rules.iter().filter(move |r| &r.lhs == lhs)
    }

    /// The declared finite parameter domain, or an error for workflows
    /// (grammar induction, oracle runs) that cannot proceed without one.
    pub fn required_domain(&self) -> Result<&BTreeSet<P>, EngineError> {
        self.param_domain.as_ref().ok_or(EngineError::MissingDomain)
    }

    /// Check every structural invariant; the grammar is well-formed iff the
    /// result is empty. Never aborts early — all violations are reported.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();

        let nt_names: BTreeSet<&str> = self.nonterminals.iter().map(|s| s.name.as_str()).collect();
        for t in &self.terminals {
            if nt_names.contains(t.name.as_str()) {
                violations.push(Violation::NamespaceClash {
                    name: t.name.clone(),
                });
            }
        }

        if !(self.start.is_nonterminal() && self.nonterminals.contains(&self.start)) {
            violations.push(Violation::UnknownStart {
                start: self.start.name.clone(),
            });
        }

        if let Some(domain) = &self.param_domain {
            if !domain.contains(&self.start_param) {
                violations.push(Violation::StartParamOutsideDomain);
            }
        }

        let mut seen_ids = BTreeSet::new();
        for rule in &self.rules {
            if !seen_ids.insert(rule.id) {
                violations.push(Violation::DuplicateRuleId { id: rule.id });
            }
            if !rule.lhs.is_nonterminal() {
                violations.push(Violation::LhsNotNonterminal {
                    rule: rule.id,
                    symbol: rule.lhs.clone(),
                });
            } else if !self.nonterminals.contains(&rule.lhs) {
                violations.push(Violation::UndeclaredSymbol {
                    rule: rule.id,
                    symbol: rule.lhs.clone(),
                });
            }
            for (sym, _) in &rule.rhs {
                let declared = match sym.kind {
                    SymbolKind::Nonterminal => self.nonterminals.contains(sym),
                    SymbolKind::Terminal => self.terminals.contains(sym),
                };
                if !declared {
                    violations.push(Violation::UndeclaredSymbol {
                        rule: rule.id,
                        symbol: sym.clone(),
                    });
                }
            }
            for (i, expected) in rule.arity_table().into_iter().enumerate() {
                let got = rule.param_fn(i + 1).arity();
                if got != expected {
                    violations.push(Violation::ArityMismatch {
                        rule: rule.id,
                        function: i + 1,
                        expected,
                        got,
                    });
                }
            }
        }

        violations
    }
}

/// One structural defect found by [`Grammar::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A name is used both as a nonterminal and as a terminal.
    NamespaceClash { name: String },
    /// The start symbol is not a declared nonterminal.
    UnknownStart { start: String },
    /// A finite domain is declared but the start parameter is outside it.
    StartParamOutsideDomain,
    /// A rule mentions a symbol the grammar does not declare.
    UndeclaredSymbol { rule: RuleId, symbol: SymbolId },
    /// A rule's left-hand side is not a nonterminal.
    LhsNotNonterminal { rule: RuleId, symbol: SymbolId },
    /// A rule function's arity does not match its position.
    ArityMismatch {
        rule: RuleId,
        function: usize,
        expected: usize,
        got: usize,
    },
    /// Two rules share an id.
    DuplicateRuleId { id: RuleId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NamespaceClash { name } => {
                write!(f, "`{name}` is declared both as a nonterminal and as a terminal")
            }
            Violation::UnknownStart { start } => {
                write!(f, "unknown start: `{start}` is not a declared nonterminal")
            }
            Violation::StartParamOutsideDomain => {
                write!(f, "start parameter lies outside the declared domain")
            }
            Violation::UndeclaredSymbol { rule, symbol } => {
                write!(f, "rule {rule} mentions undeclared symbol `{symbol}`")
            }
            Violation::LhsNotNonterminal { rule, symbol } => {
                write!(f, "rule {rule} has non-nonterminal left-hand side `{symbol}`")
            }
            Violation::ArityMismatch {
                rule,
                function,
                expected,
                got,
            } => write!(
                f,
                "rule {rule}: arity of f{function} is {got}, expected {expected}"
            ),
            Violation::DuplicateRuleId { id } => write!(f, "duplicate rule id {id}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn apply_distinguishes_undefined_from_arity_errors() {
        let double_if_small: ParamFn<i64> =
            ParamFn::new(1, |args| if args[0] < 4 { Some(args[0] * 2) } else { None });
        assert_eq!(double_if_small.apply(&[3]), Ok(Some(6)));
        assert_eq!(double_if_small.apply(&[4]), Ok(None));
        assert_eq!(
            double_if_small.apply(&[1, 2]),
            Err(EngineError::ArityMismatch {
                expected: 1,
                got: 2
            })
        );
    }

    #[test]
    fn built_in_function_shapes() {
        assert_eq!(ParamFn::<i64>::identity().apply(&[7]), Ok(Some(7)));
        assert_eq!(ParamFn::constant(3, 9i64).apply(&[0, 1, 2]), Ok(Some(9)));
        assert_eq!(ParamFn::<i64>::project(5, 4).apply(&[0, 1, 2, 3, 4]), Ok(Some(4)));
        assert_eq!(ParamFn::<i64>::undefined(1).apply(&[0]), Ok(None));
    }

    #[test]
    fn arity_table_counts_the_visible_prefix() {
        let g = fixtures::count_grammar();
        // S -> a S: three functions seeing 1, 3, and 5 parameters.
        assert_eq!(g.rule(RuleId(1)).arity_table(), vec![1, 3, 5]);
        // S -> (empty): just the output function over the rule input.
        assert_eq!(g.rule(RuleId(0)).arity_table(), vec![1]);
    }

    #[test]
    fn count_grammar_validates_clean() {
        assert_eq!(fixtures::count_grammar().validate(), vec![]);
    }

    #[test]
    fn validation_reports_unknown_start() {
        let mut g = fixtures::count_grammar();
        g.start = SymbolId::nonterminal("Q");
        assert!(g
            .validate()
            .contains(&Violation::UnknownStart { start: "Q".into() }));
    }

    #[test]
    fn validation_reports_wrong_arity() {
        let mut g = fixtures::count_grammar();
        // f2 of S -> a S must see 3 parameters; an arity-2 function is broken.
        g.rules[1].rhs[1].1 = ParamFn::new(2, |args: &[i64]| Some(args[1]));
        assert!(g.validate().contains(&Violation::ArityMismatch {
            rule: RuleId(1),
            function: 2,
            expected: 3,
            got: 2,
        }));
    }

    #[test]
    fn validation_reports_namespace_clash() {
        let mut g = fixtures::count_grammar();
        g.terminals.insert(SymbolId::terminal("S"));
        assert!(g
            .validate()
            .contains(&Violation::NamespaceClash { name: "S".into() }));
    }

    #[test]
    fn validation_reports_undeclared_rhs_symbol() {
        let mut g = fixtures::count_grammar();
        g.rules[1].rhs[0].0 = SymbolId::terminal("z");
        assert!(g.validate().contains(&Violation::UndeclaredSymbol {
            rule: RuleId(1),
            symbol: SymbolId::terminal("z"),
        }));
    }

    #[test]
    fn validation_reports_start_param_outside_domain() {
        let mut g = fixtures::count_grammar();
        g.start_param = 99;
        assert!(g.validate().contains(&Violation::StartParamOutsideDomain));
    }

    #[test]
    fn validation_reports_duplicate_rule_ids() {
        let mut g = fixtures::count_grammar();
        g.rules[1].id = RuleId(0);
        assert!(g
            .validate()
            .contains(&Violation::DuplicateRuleId { id: RuleId(0) }));
    }

    #[test]
    fn domain_dependent_workflows_refuse_a_grammar_without_one() {
        let mut g = fixtures::count_grammar();
        g.param_domain = None;
        assert!(matches!(
            g.required_domain(),
            Err(crate::EngineError::MissingDomain)
        ));
        assert!(crate::induced::induce_grammar(&g, &BTreeSet::from([0])).is_ok());
    }
}
