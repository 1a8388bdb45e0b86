//! Reading grammar files into the document model, with positioned
//! diagnostics and per-line recovery: one bad line never hides the errors
//! on the lines after it.
//!
//! The format is line-oriented. `#` starts a comment (outside quotes and
//! character classes), blank lines are ignored, and each declaration fits
//! on one line:
//!
//! ```text
//! domain 0..8
//! start S 0
//! selector all
//! terminal a = char 'a' out a+1
//! rule S -> { out = a }
//! rule S -> a S { in1 = a ; in2 = b1 ; out = b2 }
//! ```

use std::fmt;

use crate::doc::{
    ClassDecl, ClauseDecl, ClauseTarget, GrammarDoc, MatcherDecl, RuleDecl, SelectorDecl,
    SpanModeDecl, TerminalDecl,
};
use crate::expr::{CmpOp, Expr, Guard, Var};

/// One problem in a grammar file, tied to a source position (1-based).
/// A line of 0 means the problem concerns the document as a whole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    /// A problem not attributable to any single line.
    pub fn global(message: impl Into<String>) -> Self {
        Diagnostic {
            line: 0,
            col: 0,
            message: message.into(),
        }
    }

    /// A problem attributed to a whole line.
    pub fn at_line(line: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            line,
            col: 1,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}, col {}: {}", self.line, self.col, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(i64),
    CharLit(char),
    StrLit(String),
    Class(Vec<(char, char)>),
    Arrow,
    DotDot,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Cmp(CmpOp),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::CharLit(c) => format!("character literal {c:?}"),
            Tok::StrLit(s) => format!("string literal {s:?}"),
            Tok::Class(_) => "character class".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::DotDot => "`..`".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Assign => "`=`".to_string(),
            Tok::Plus => "`+`".to_string(),
            Tok::Minus => "`-`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Cmp(op) => format!("`{op}`"),
        }
    }
}

struct Lexed {
    tokens: Vec<(Tok, usize)>,
}

fn err(line: usize, col: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line,
        col,
        message: message.into(),
    }
}

/// Read one possibly-escaped character. `chars` is positioned after the
/// opening context; returns the decoded char.
fn read_escaped(
    chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>,
    line: usize,
    col_of: impl Fn(usize) -> usize,
) -> Result<char, Diagnostic> {
    let Some((i, c)) = chars.next() else {
        return Err(err(line, 0, "unexpected end of line in literal"));
    };
    if c != '\\' {
        return Ok(c);
    }
    match chars.next() {
        Some((_, 'n')) => Ok('\n'),
        Some((_, 't')) => Ok('\t'),
        Some((_, c @ ('\\' | '\'' | '"' | ']' | '-'))) => Ok(c),
        Some((j, c)) => Err(err(line, col_of(j), format!("unknown escape `\\{c}`"))),
        None => Err(err(line, col_of(i), "unterminated escape at end of line")),
    }
}

fn tokenize_line(text: &str, line: usize) -> Result<Lexed, Diagnostic> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    // Columns are 1-based counts of characters, not bytes.
    let cols: Vec<usize> = {
        let mut map = vec![1; text.len() + 1];
        for (n, (i, _)) in text.char_indices().enumerate() {
            map[i] = n + 1;
        }
        map
    };
    let col_of = |i: usize| cols[i];
    while let Some(&(i, c)) = chars.peek() {
        let col = col_of(i);
        match c {
            ' ' | '\t' | '\r' => {
                chars.next();
            }
            '#' => break,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push((Tok::Ident(ident), col));
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let value: i64 = digits
                    .parse()
                    .map_err(|_| err(line, col, format!("number `{digits}` is out of range")))?;
                tokens.push((Tok::Num(value), col));
            }
            '\'' => {
                chars.next();
                let value = read_escaped(&mut chars, line, col_of)?;
                match chars.next() {
                    Some((_, '\'')) => tokens.push((Tok::CharLit(value), col)),
                    _ => return Err(err(line, col, "unterminated character literal")),
                }
            }
            '"' => {
                chars.next();
                let mut value = String::new();
                loop {
                    match chars.peek() {
                        Some(&(_, '"')) => {
                            chars.next();
                            break;
                        }
                        Some(_) => value.push(read_escaped(&mut chars, line, col_of)?),
                        None => return Err(err(line, col, "unterminated string literal")),
                    }
                }
                tokens.push((Tok::StrLit(value), col));
            }
            '[' => {
                chars.next();
                let mut ranges = Vec::new();
                loop {
                    match chars.peek() {
                        Some(&(_, ']')) => {
                            chars.next();
                            break;
                        }
                        Some(&(j, '-')) => {
                            return Err(err(line, col_of(j), "unexpected `-` in character class"));
                        }
                        Some(_) => {
                            let lo = read_escaped(&mut chars, line, col_of)?;
                            let hi = if matches!(chars.peek(), Some(&(_, '-'))) {
                                chars.next();
                                if matches!(chars.peek(), Some(&(_, ']'))) {
                                    return Err(err(
                                        line,
                                        col,
                                        "character range is missing its upper end",
                                    ));
                                }
                                read_escaped(&mut chars, line, col_of)?
                            } else {
                                lo
                            };
                            if lo > hi {
                                return Err(err(
                                    line,
                                    col,
                                    format!("empty character range {lo:?}-{hi:?}"),
                                ));
                            }
                            ranges.push((lo, hi));
                        }
                        None => return Err(err(line, col, "unterminated character class")),
                    }
                }
                if ranges.is_empty() {
                    return Err(err(line, col, "empty character class"));
                }
                tokens.push((Tok::Class(ranges), col));
            }
            '-' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '>'))) {
                    chars.next();
                    tokens.push((Tok::Arrow, col));
                } else {
                    tokens.push((Tok::Minus, col));
                }
            }
            '.' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '.'))) {
                    chars.next();
                    tokens.push((Tok::DotDot, col));
                } else {
                    return Err(err(line, col, "expected `..`"));
                }
            }
            '=' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '='))) {
                    chars.next();
                    tokens.push((Tok::Cmp(CmpOp::Eq), col));
                } else {
                    tokens.push((Tok::Assign, col));
                }
            }
            '!' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '='))) {
                    chars.next();
                    tokens.push((Tok::Cmp(CmpOp::Ne), col));
                } else {
                    return Err(err(line, col, "expected `!=`"));
                }
            }
            '<' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '='))) {
                    chars.next();
                    tokens.push((Tok::Cmp(CmpOp::Le), col));
                } else {
                    tokens.push((Tok::Cmp(CmpOp::Lt), col));
                }
            }
            '>' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '='))) {
                    chars.next();
                    tokens.push((Tok::Cmp(CmpOp::Ge), col));
                } else {
                    tokens.push((Tok::Cmp(CmpOp::Gt), col));
                }
            }
            '{' => {
                chars.next();
                tokens.push((Tok::LBrace, col));
            }
            '}' => {
                chars.next();
                tokens.push((Tok::RBrace, col));
            }
            '(' => {
                chars.next();
                tokens.push((Tok::LParen, col));
            }
            ')' => {
                chars.next();
                tokens.push((Tok::RParen, col));
            }
            ';' => {
                chars.next();
                tokens.push((Tok::Semi, col));
            }
            ',' => {
                chars.next();
                tokens.push((Tok::Comma, col));
            }
            '+' => {
                chars.next();
                tokens.push((Tok::Plus, col));
            }
            '*' => {
                chars.next();
                tokens.push((Tok::Star, col));
            }
            c => return Err(err(line, col, format!("unexpected character {c:?}"))),
        }
    }
    Ok(Lexed { tokens })
}

/// A cursor over one line's tokens.
struct Cursor {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    /// Column just past the last token, for end-of-line errors.
    end_col: usize,
}

impl Cursor {
    fn new(lexed: Lexed, line: usize, text: &str) -> Self {
        Cursor {
            end_col: text.chars().count() + 1,
            tokens: lexed.tokens,
            pos: 0,
            line,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|&(_, c)| c)
            .unwrap_or(self.end_col)
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn error_here(&self, expected: &str) -> Diagnostic {
        let found = match self.peek() {
            Some(tok) => tok.describe(),
            None => "end of line".to_string(),
        };
        err(self.line, self.col(), format!("expected {expected}, found {found}"))
    }

    fn expect_ident(&mut self, expected: &str) -> Result<String, Diagnostic> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let Some(Tok::Ident(name)) = self.next() else {
                    unreachable!()
                };
                Ok(name)
            }
            _ => Err(self.error_here(expected)),
        }
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), Diagnostic> {
        match self.peek() {
            Some(Tok::Ident(name)) if name == keyword => {
                self.next();
                Ok(())
            }
            _ => Err(self.error_here(&format!("`{keyword}`"))),
        }
    }

    fn expect_tok(&mut self, tok: Tok, expected: &str) -> Result<(), Diagnostic> {
        if self.peek() == Some(&tok) {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(expected))
        }
    }

    fn expect_end(&self) -> Result<(), Diagnostic> {
        if self.peek().is_none() {
            Ok(())
        } else {
            Err(self.error_here("end of line"))
        }
    }

    /// A number with an optional leading minus.
    fn expect_signed_num(&mut self) -> Result<i64, Diagnostic> {
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.next();
            true
        } else {
            false
        };
        match self.peek() {
            Some(Tok::Num(_)) => {
                let Some(Tok::Num(n)) = self.next() else {
                    unreachable!()
                };
                if negative {
                    n.checked_neg()
                        .ok_or_else(|| self.error_here("a representable number"))
                } else {
                    Ok(n)
                }
            }
            _ => Err(self.error_here("a number")),
        }
    }

    fn parse_var(&self, name: &str) -> Result<Var, Diagnostic> {
        if name == "a" {
            return Ok(Var::A);
        }
        if name == "len" {
            return Ok(Var::Len);
        }
        let (head, digits) = name.split_at(1);
        if (head == "a" || head == "b") && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        {
            let n: usize = digits.parse().map_err(|_| {
                err(self.line, self.col(), format!("symbol index in `{name}` is out of range"))
            })?;
            if n == 0 {
                return Err(err(
                    self.line,
                    self.col(),
                    format!("`{name}`: symbol indices start at 1"),
                ));
            }
            return Ok(if head == "a" { Var::AIdx(n) } else { Var::BIdx(n) });
        }
        Err(err(
            self.line,
            self.col(),
            format!("unknown variable `{name}` (expected a, len, or aN/bN)"),
        ))
    }

    // expr := term (('+'|'-') term)*
    fn parse_expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.parse_term()?));
                }
                Some(Tok::Minus) => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.parse_term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // term := factor ('*' factor)*
    fn parse_term(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.parse_factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.next();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.parse_factor()?));
        }
        Ok(lhs)
    }

    // factor := '-' factor | Num | ('min'|'max') '(' expr ',' expr ')'
    //         | var | '(' expr ')'
    fn parse_factor(&mut self) -> Result<Expr, Diagnostic> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.next();
                Ok(Expr::Neg(Box::new(self.parse_factor()?)))
            }
            Some(Tok::Num(_)) => {
                let Some(Tok::Num(n)) = self.next() else {
                    unreachable!()
                };
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(name)) if name == "min" || name == "max" => {
                let make: fn(Box<Expr>, Box<Expr>) -> Expr =
                    if name == "min" { Expr::Min } else { Expr::Max };
                let expected_paren = format!("`(` after `{name}`");
                self.next();
                self.expect_tok(Tok::LParen, &expected_paren)?;
                let first = self.parse_expr()?;
                self.expect_tok(Tok::Comma, "`,`")?;
                let second = self.parse_expr()?;
                self.expect_tok(Tok::RParen, "`)`")?;
                Ok(make(Box::new(first), Box::new(second)))
            }
            Some(Tok::Ident(name)) => {
                let var = self.parse_var(name)?;
                self.next();
                Ok(Expr::Var(var))
            }
            Some(Tok::LParen) => {
                self.next();
                let inner = self.parse_expr()?;
                self.expect_tok(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error_here("an expression")),
        }
    }

    fn at_keyword(&self, keyword: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(name)) if name == keyword)
    }

    // guard := and_guard ('or' and_guard)*
    fn parse_guard(&mut self) -> Result<Guard, Diagnostic> {
        let mut lhs = self.parse_and_guard()?;
        while self.at_keyword("or") {
            self.next();
            lhs = Guard::Or(Box::new(lhs), Box::new(self.parse_and_guard()?));
        }
        Ok(lhs)
    }

    // and_guard := not_guard ('and' not_guard)*
    fn parse_and_guard(&mut self) -> Result<Guard, Diagnostic> {
        let mut lhs = self.parse_not_guard()?;
        while self.at_keyword("and") {
            self.next();
            lhs = Guard::And(Box::new(lhs), Box::new(self.parse_not_guard()?));
        }
        Ok(lhs)
    }

    // not_guard := 'not' not_guard | primary_guard
    fn parse_not_guard(&mut self) -> Result<Guard, Diagnostic> {
        if self.at_keyword("not") {
            self.next();
            return Ok(Guard::Not(Box::new(self.parse_not_guard()?)));
        }
        self.parse_primary_guard()
    }

    // primary_guard := '(' guard ')' | expr cmp expr
    //
    // A leading `(` is ambiguous: it may group a guard or open the
    // arithmetic left-hand side of a comparison (`(a==1) and …` versus
    // `(a+1)*2==b1`). Try the guard reading first and fall back to the
    // comparison; token cursors are cheap to rewind.
    fn parse_primary_guard(&mut self) -> Result<Guard, Diagnostic> {
        if self.peek() == Some(&Tok::LParen) {
            let rewind = self.pos;
            self.next();
            if let Ok(inner) = self.parse_guard() {
                if self.expect_tok(Tok::RParen, "`)`").is_ok() {
                    return Ok(inner);
                }
            }
            self.pos = rewind;
        }
        let lhs = self.parse_expr()?;
        let op = match self.peek() {
            Some(&Tok::Cmp(op)) => {
                self.next();
                op
            }
            _ => return Err(self.error_here("a comparison operator")),
        };
        let rhs = self.parse_expr()?;
        Ok(Guard::Cmp(lhs, op, rhs))
    }

    /// `out EXPR [when GUARD]`, shared by terminal declarations.
    fn parse_out_and_guard(&mut self) -> Result<(Expr, Option<Guard>), Diagnostic> {
        self.expect_keyword("out")?;
        let out = self.parse_expr()?;
        let guard = if matches!(self.peek(), Some(Tok::Ident(name)) if name == "when") {
            self.next();
            Some(self.parse_guard()?)
        } else {
            None
        };
        Ok((out, guard))
    }
}

/// What one line declared.
enum Line {
    Domain(i64, i64),
    Start(String, i64),
    Selector(SelectorDecl),
    Terminal(TerminalDecl),
    Rule(RuleDecl),
}

fn parse_line(text: &str, line: usize) -> Result<Option<Line>, Diagnostic> {
    let lexed = tokenize_line(text, line)?;
    if lexed.tokens.is_empty() {
        return Ok(None);
    }
    let mut cur = Cursor::new(lexed, line, text);
    let keyword = cur.expect_ident("a declaration keyword")?;
    let parsed = match keyword.as_str() {
        "domain" => {
            let lo = cur.expect_signed_num()?;
            cur.expect_tok(Tok::DotDot, "`..`")?;
            let hi = cur.expect_signed_num()?;
            Line::Domain(lo, hi)
        }
        "start" => {
            let name = cur.expect_ident("the start symbol name")?;
            let param = cur.expect_signed_num()?;
            Line::Start(name, param)
        }
        "selector" => {
            let which = cur.expect_ident("`all`, `longest`, or `priority`")?;
            match which.as_str() {
                "all" => Line::Selector(SelectorDecl::All),
                "longest" => Line::Selector(SelectorDecl::Longest),
                "priority" => {
                    let mut names = Vec::new();
                    while matches!(cur.peek(), Some(Tok::Ident(_))) {
                        names.push(cur.expect_ident("a terminal name")?);
                    }
                    if names.is_empty() {
                        return Err(cur.error_here("at least one terminal name"));
                    }
                    Line::Selector(SelectorDecl::Priority(names))
                }
                other => {
                    return Err(err(
                        line,
                        1,
                        format!("unknown selector `{other}` (expected all, longest, or priority)"),
                    ))
                }
            }
        }
        "terminal" => {
            let name = cur.expect_ident("the terminal name")?;
            cur.expect_tok(Tok::Assign, "`=`")?;
            let kind = cur.expect_ident("`char`, `lit`, `span`, or `count`")?;
            let matcher = match kind.as_str() {
                "char" => match cur.next() {
                    Some(Tok::CharLit(c)) => MatcherDecl::Char(c),
                    _ => return Err(err(line, cur.col(), "expected a character literal")),
                },
                "lit" => match cur.next() {
                    Some(Tok::StrLit(s)) => MatcherDecl::Lit(s),
                    _ => return Err(err(line, cur.col(), "expected a string literal")),
                },
                "span" => {
                    let class = match cur.next() {
                        Some(Tok::Class(ranges)) => ClassDecl { ranges },
                        _ => return Err(err(line, cur.col(), "expected a character class")),
                    };
                    let mode = match cur.expect_ident("`greedy` or `all`")?.as_str() {
                        "greedy" => SpanModeDecl::Greedy,
                        "all" => SpanModeDecl::All,
                        other => {
                            return Err(err(
                                line,
                                1,
                                format!("unknown span mode `{other}` (expected greedy or all)"),
                            ))
                        }
                    };
                    MatcherDecl::Span { class, mode }
                }
                "count" => {
                    let class = match cur.next() {
                        Some(Tok::Class(ranges)) => ClassDecl { ranges },
                        _ => return Err(err(line, cur.col(), "expected a character class")),
                    };
                    cur.expect_keyword("by")?;
                    let by = cur.parse_expr()?;
                    MatcherDecl::Count { class, by }
                }
                other => {
                    return Err(err(
                        line,
                        1,
                        format!("unknown matcher `{other}` (expected char, lit, span, or count)"),
                    ))
                }
            };
            let (out, guard) = cur.parse_out_and_guard()?;
            Line::Terminal(TerminalDecl {
                name,
                matcher,
                out,
                guard,
                line,
            })
        }
        "rule" => {
            let lhs = cur.expect_ident("the rule's left-hand side")?;
            cur.expect_tok(Tok::Arrow, "`->`")?;
            let mut rhs = Vec::new();
            while matches!(cur.peek(), Some(Tok::Ident(_))) {
                rhs.push(cur.expect_ident("a symbol name")?);
            }
            cur.expect_tok(Tok::LBrace, "`{`")?;
            let mut clauses = Vec::new();
            if cur.peek() != Some(&Tok::RBrace) {
                loop {
                    let target_name = cur.expect_ident("`inN` or `out`")?;
                    let target = if target_name == "out" {
                        ClauseTarget::Out
                    } else if let Some(digits) = target_name.strip_prefix("in") {
                        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                            return Err(err(
                                line,
                                1,
                                format!("unknown clause target `{target_name}`"),
                            ));
                        }
                        let n: usize = digits.parse().map_err(|_| {
                            err(line, 1, format!("clause index in `{target_name}` is out of range"))
                        })?;
                        if n == 0 {
                            return Err(err(line, 1, "`in0`: clause indices start at 1"));
                        }
                        ClauseTarget::In(n)
                    } else {
                        return Err(err(line, 1, format!("unknown clause target `{target_name}`")));
                    };
                    cur.expect_tok(Tok::Assign, "`=`")?;
                    let expr = cur.parse_expr()?;
                    let guard = if matches!(cur.peek(), Some(Tok::Ident(name)) if name == "when") {
                        cur.next();
                        Some(cur.parse_guard()?)
                    } else {
                        None
                    };
                    clauses.push(ClauseDecl { target, expr, guard });
                    if cur.peek() == Some(&Tok::Semi) {
                        cur.next();
                    } else {
                        break;
                    }
                }
            }
            cur.expect_tok(Tok::RBrace, "`}` or `;`")?;
            Line::Rule(RuleDecl {
                lhs,
                rhs,
                clauses,
                line,
            })
        }
        other => {
            return Err(err(
                line,
                1,
                format!(
                    "unknown declaration `{other}` (expected domain, start, selector, terminal, or rule)"
                ),
            ))
        }
    };
    cur.expect_end()?;
    Ok(Some(parsed))
}

/// Parse a whole grammar file. On failure, every diagnostic found is
/// returned, not just the first.
pub fn parse_grammar(text: &str) -> Result<GrammarDoc, Vec<Diagnostic>> {
    let mut diagnostics = Vec::new();
    let mut domain = None;
    let mut start = None;
    let mut selector = None;
    let mut terminals = Vec::new();
    let mut rules = Vec::new();
    for (idx, line_text) in text.lines().enumerate() {
        let line = idx + 1;
        match parse_line(line_text, line) {
            Ok(None) => {}
            Ok(Some(Line::Domain(lo, hi))) => {
                if domain.is_some() {
                    diagnostics.push(err(line, 1, "duplicate domain declaration"));
                } else {
                    domain = Some((lo, hi));
                }
            }
            Ok(Some(Line::Start(name, param))) => {
                if start.is_some() {
                    diagnostics.push(err(line, 1, "duplicate start declaration"));
                } else {
                    start = Some((name, param));
                }
            }
            Ok(Some(Line::Selector(decl))) => {
                if selector.is_some() {
                    diagnostics.push(err(line, 1, "duplicate selector declaration"));
                } else {
                    selector = Some(decl);
                }
            }
            Ok(Some(Line::Terminal(decl))) => terminals.push(decl),
            Ok(Some(Line::Rule(decl))) => rules.push(decl),
            Err(diag) => diagnostics.push(diag),
        }
    }
    if domain.is_none() {
        diagnostics.push(err(text.lines().count() + 1, 1, "missing domain declaration"));
    }
    if start.is_none() {
        diagnostics.push(err(text.lines().count() + 1, 1, "missing start declaration"));
    }
    if !diagnostics.is_empty() {
        return Err(diagnostics);
    }
    Ok(GrammarDoc {
        domain: domain.expect("checked above"),
        start: start.expect("checked above"),
        selector: selector.unwrap_or(SelectorDecl::All),
        terminals,
        rules,
    })
}
