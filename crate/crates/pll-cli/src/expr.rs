//! The little expression language of grammar files: integer arithmetic over
//! the parameter variables, with comparisons for guards.
//!
//! Variables: `a` is the enclosing function's first argument (the rule or
//! token input parameter), `aN`/`bN` are the input/output parameters of the
//! N-th right-hand-side symbol (1-based), and `len` is the matched length
//! inside a terminal's output expression. Which of these are in scope
//! depends on where the expression appears — see [`VarScope`].
//!
//! Evaluation is total-but-checked: arithmetic overflow makes the value
//! undefined (`None`), it never wraps or panics.

use std::fmt;

/// A parameter variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// The function's own input parameter.
    A,
    /// Input parameter of the N-th right-hand-side symbol (1-based).
    AIdx(usize),
    /// Output parameter of the N-th right-hand-side symbol (1-based).
    BIdx(usize),
    /// The matched length, inside terminal expressions.
    Len,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::A => f.write_str("a"),
            Var::AIdx(n) => write!(f, "a{n}"),
            Var::BIdx(n) => write!(f, "b{n}"),
            Var::Len => f.write_str("len"),
        }
    }
}

/// An integer expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(i64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

/// Comparison operators for guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

/// A guard: comparisons between expressions, combined with `and`, `or`,
/// and `not`. Evaluation is strict: if any comparison operand is undefined
/// the whole guard is undefined, regardless of the other branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    Cmp(Expr, CmpOp, Expr),
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
}

/// The values visible to an expression at evaluation time. `args` is laid
/// out like a rule function's argument tuple: the rule input first, then
/// one input/output pair per consumed symbol.
#[derive(Debug, Clone, Copy)]
pub struct Env<'a> {
    pub args: &'a [i64],
    pub len: Option<i64>,
}

impl Env<'_> {
    fn lookup(&self, var: Var) -> Option<i64> {
        match var {
            Var::A => self.args.first().copied(),
            Var::AIdx(n) => self.args.get(2 * n - 1).copied(),
            Var::BIdx(n) => self.args.get(2 * n).copied(),
            Var::Len => self.len,
        }
    }
}

impl Expr {
    /// Evaluate under `env`. `None` on arithmetic overflow or an
    /// out-of-scope variable (the latter is precluded by scope checking at
    /// compile time; this is the defensive runtime answer).
    pub fn eval(&self, env: &Env<'_>) -> Option<i64> {
        match self {
            Expr::Num(n) => Some(*n),
            Expr::Var(v) => env.lookup(*v),
            Expr::Neg(e) => e.eval(env)?.checked_neg(),
            Expr::Add(l, r) => l.eval(env)?.checked_add(r.eval(env)?),
            Expr::Sub(l, r) => l.eval(env)?.checked_sub(r.eval(env)?),
            Expr::Mul(l, r) => l.eval(env)?.checked_mul(r.eval(env)?),
            Expr::Min(l, r) => Some(l.eval(env)?.min(r.eval(env)?)),
            Expr::Max(l, r) => Some(l.eval(env)?.max(r.eval(env)?)),
        }
    }

    /// Every variable mentioned, in syntactic order (with repeats).
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Add(l, r)
            | Expr::Sub(l, r)
            | Expr::Mul(l, r)
            | Expr::Min(l, r)
            | Expr::Max(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            // min/max are self-delimiting calls, as tight as an atom.
            Expr::Num(_) | Expr::Var(_) | Expr::Min(_, _) | Expr::Max(_, _) => 3,
            Expr::Neg(_) => 2,
            Expr::Mul(_, _) => 1,
            Expr::Add(_, _) | Expr::Sub(_, _) => 0,
        }
    }
}

impl Guard {
    pub fn eval(&self, env: &Env<'_>) -> Option<bool> {
        match self {
            Guard::Cmp(lhs, op, rhs) => {
                let l = lhs.eval(env)?;
                let r = rhs.eval(env)?;
                Some(match op {
                    CmpOp::Eq => l == r,
                    CmpOp::Ne => l != r,
                    CmpOp::Lt => l < r,
                    CmpOp::Le => l <= r,
                    CmpOp::Gt => l > r,
                    CmpOp::Ge => l >= r,
                })
            }
            Guard::Not(g) => Some(!g.eval(env)?),
            Guard::And(l, r) => Some(l.eval(env)? & r.eval(env)?),
            Guard::Or(l, r) => Some(l.eval(env)? | r.eval(env)?),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Guard::Cmp(lhs, _, rhs) => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Guard::Not(g) => g.collect_vars(out),
            Guard::And(l, r) | Guard::Or(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Guard::Cmp(_, _, _) => 3,
            Guard::Not(_) => 2,
            Guard::And(_, _) => 1,
            Guard::Or(_, _) => 0,
        }
    }
}

/// Guards print with spaces around the word operators and parentheses
/// exactly where grouping demands them, mirroring the expression policy:
/// left-leaning chains print bare, a right operand or a lower-precedence
/// child is parenthesized, so the printed guard reparses to the same tree.
impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn side(f: &mut fmt::Formatter<'_>, g: &Guard, min: u8) -> fmt::Result {
            if g.precedence() < min {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        }
        match self {
            Guard::Cmp(lhs, op, rhs) => write!(f, "{lhs}{op}{rhs}"),
            Guard::Not(g) => {
                f.write_str("not ")?;
                side(f, g, 2)
            }
            Guard::And(l, r) => {
                side(f, l, 1)?;
                f.write_str(" and ")?;
                side(f, r, 2)
            }
            Guard::Or(l, r) => {
                side(f, l, 0)?;
                f.write_str(" or ")?;
                side(f, r, 1)
            }
        }
    }
}

/// Display prints the canonical form the grammar parser reads back:
/// no spaces, parentheses only where grouping demands them (the right
/// operand of a same-precedence chain is parenthesized, so the printed
/// tree reparses to exactly the same tree).
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn side(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                side(f, e, 2)
            }
            Expr::Add(l, r) => {
                side(f, l, 0)?;
                f.write_str("+")?;
                side(f, r, 1)
            }
            Expr::Sub(l, r) => {
                side(f, l, 0)?;
                f.write_str("-")?;
                side(f, r, 1)
            }
            Expr::Mul(l, r) => {
                side(f, l, 1)?;
                f.write_str("*")?;
                side(f, r, 2)
            }
            Expr::Min(l, r) => write!(f, "min({l},{r})"),
            Expr::Max(l, r) => write!(f, "max({l},{r})"),
        }
    }
}

/// Where an expression appears, which determines the variables in scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarScope {
    /// A rule clause for the function at 1-based position `position`:
    /// sees `a` and the pairs `a1,b1 .. aN,bN` for `N < position`.
    RuleFn { position: usize },
    /// A terminal's output expression or guard: sees `a` and `len`.
    TerminalOut,
    /// A `count` terminal's length expression: sees only `a`.
    TerminalBy,
}

/// The first out-of-scope variable, if any.
pub fn scope_violation(vars: &[Var], scope: VarScope) -> Option<Var> {
    vars.iter()
        .copied()
        .find(|var| !in_scope(*var, scope))
}

fn in_scope(var: Var, scope: VarScope) -> bool {
    match (var, scope) {
        (Var::A, _) => true,
        (Var::AIdx(n) | Var::BIdx(n), VarScope::RuleFn { position }) => n >= 1 && n < position,
        (Var::Len, VarScope::TerminalOut) => true,
        _ => false,
    }
}
