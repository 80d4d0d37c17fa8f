//! Surface syntax: lexer, parsers for the team language and for
//! second-order formulas, and the canonical renderer.
//!
//! Connectives from tightest to loosest: `~` (atoms only in the team
//! language), `&`, then `|` and `||` at one level (left-associative), then
//! `->` and `-*` at one level (right-associative). Quantifier bodies extend
//! maximally to the right. The renderer parenthesizes every composite node,
//! so `parse(render(f))` is structurally `f`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{Atom, Formula, SOFormula, Signature, Term, RESERVED_WORDS};

/// Byte range in the source text; `start <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at {span}: {message}")]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError {
            message: message.into(),
            span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Eq,
    Tilde,
    Amp,
    Bar,
    BarBar,
    Arrow,
    Lollipop,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Tilde => write!(f, "`~`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Bar => write!(f, "`|`"),
            Tok::BarBar => write!(f, "`||`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Lollipop => write!(f, "`-*`"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, SourceSpan::new(start, i + 1)));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, SourceSpan::new(start, i + 1)));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, SourceSpan::new(start, i + 1)));
                i += 1;
            }
            b'.' => {
                toks.push((Tok::Dot, SourceSpan::new(start, i + 1)));
                i += 1;
            }
            b':' => {
                toks.push((Tok::Colon, SourceSpan::new(start, i + 1)));
                i += 1;
            }
            b'=' => {
                toks.push((Tok::Eq, SourceSpan::new(start, i + 1)));
                i += 1;
            }
            b'~' => {
                toks.push((Tok::Tilde, SourceSpan::new(start, i + 1)));
                i += 1;
            }
            b'&' => {
                toks.push((Tok::Amp, SourceSpan::new(start, i + 1)));
                i += 1;
            }
            b'|' => {
                if bytes.get(i + 1) == Some(&b'|') {
                    toks.push((Tok::BarBar, SourceSpan::new(start, i + 2)));
                    i += 2;
                } else {
                    toks.push((Tok::Bar, SourceSpan::new(start, i + 1)));
                    i += 1;
                }
            }
            b'-' => match bytes.get(i + 1) {
                Some(b'>') => {
                    toks.push((Tok::Arrow, SourceSpan::new(start, i + 2)));
                    i += 2;
                }
                Some(b'*') => {
                    toks.push((Tok::Lollipop, SourceSpan::new(start, i + 2)));
                    i += 2;
                }
                _ => {
                    return Err(ParseError::new(
                        "stray `-`; expected `->` or `-*`",
                        SourceSpan::new(start, i + 1),
                    ))
                }
            },
            b'0'..=b'9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let text = &src[i..j];
                let n: usize = text.parse().map_err(|_| {
                    ParseError::new("integer too large", SourceSpan::new(start, j))
                })?;
                toks.push((Tok::Int(n), SourceSpan::new(start, j)));
                i = j;
            }
            _ if b.is_ascii_alphabetic() || b == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                toks.push((Tok::Ident(src[i..j].to_owned()), SourceSpan::new(start, j)));
                i = j;
            }
            _ => {
                return Err(ParseError::new(
                    format!("unexpected character `{}`", &src[i..i + 1]),
                    SourceSpan::new(start, i + 1),
                ))
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    sig: &'a Signature,
    eof: usize,
    /// Function-variable binders in scope (second-order syntax only).
    fn_scope: Vec<(String, usize)>,
    /// Individual binders in scope; used for collision checks, shadowing of
    /// individual variables is allowed.
    ind_scope: Vec<String>,
}

impl<'a> Parser<'a> {
    fn new(src: &str, sig: &'a Signature) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            sig,
            eof: src.len(),
            fn_scope: Vec::new(),
            ind_scope: Vec::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn here(&self) -> SourceSpan {
        self.toks
            .get(self.pos)
            .map(|&(_, s)| s)
            .unwrap_or(SourceSpan::new(self.eof, self.eof))
    }

    fn bump(&mut self) -> Option<(Tok, SourceSpan)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<SourceSpan, ParseError> {
        match self.bump() {
            Some((t, s)) if t == want => Ok(s),
            Some((t, s)) => Err(ParseError::new(format!("expected {want}, found {t}"), s)),
            None => Err(ParseError::new(
                format!("expected {want}, found end of input"),
                SourceSpan::new(self.eof, self.eof),
            )),
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.bump() {
            Some((Tok::Ident(name), s)) => Ok((name, s)),
            Some((t, s)) => Err(ParseError::new(format!("expected {what}, found {t}"), s)),
            None => Err(ParseError::new(
                format!("expected {what}, found end of input"),
                SourceSpan::new(self.eof, self.eof),
            )),
        }
    }

    fn fn_arity(&self, name: &str) -> Option<usize> {
        self.fn_scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|&(_, a)| a)
    }

    fn check_binder(&self, name: &str, span: SourceSpan) -> Result<(), ParseError> {
        if RESERVED_WORDS.contains(&name) {
            return Err(ParseError::new(
                format!("`{name}` is reserved and cannot be a variable"),
                span,
            ));
        }
        if self.sig.has_symbol(name) {
            return Err(ParseError::new(
                format!("`{name}` is a signature symbol and cannot be bound"),
                span,
            ));
        }
        if self.fn_arity(name).is_some() {
            return Err(ParseError::new(
                format!("`{name}` is already bound as a function variable"),
                span,
            ));
        }
        Ok(())
    }

    // --- terms ---------------------------------------------------------

    fn term(&mut self, so: bool) -> Result<Term, ParseError> {
        let (name, span) = self.ident("a term")?;
        if RESERVED_WORDS.contains(&name.as_str()) {
            return Err(ParseError::new(
                format!("`{name}` cannot appear inside a term"),
                span,
            ));
        }
        if self.peek() == Some(&Tok::LParen) {
            let arity = if so {
                self.fn_arity(&name)
                    .or_else(|| self.sig.function_arity(&name))
            } else {
                self.sig.function_arity(&name)
            };
            let arity = arity.ok_or_else(|| {
                ParseError::new(format!("unknown function `{name}`"), span)
            })?;
            self.expect(Tok::LParen)?;
            let args = self.term_list(so)?;
            let close = self.expect(Tok::RParen)?;
            if args.len() != arity {
                return Err(ParseError::new(
                    format!(
                        "function `{name}` has arity {arity}, got {} arguments",
                        args.len()
                    ),
                    SourceSpan::new(span.start, close.end),
                ));
            }
            return Ok(Term::App(name, args));
        }
        if self.sig.has_constant(&name) {
            return Ok(Term::Const(name));
        }
        if self.sig.relation_arity(&name).is_some() || self.sig.function_arity(&name).is_some() {
            return Err(ParseError::new(
                format!("symbol `{name}` needs arguments"),
                span,
            ));
        }
        if self.fn_arity(&name).is_some() {
            return Err(ParseError::new(
                format!("function variable `{name}` needs arguments"),
                span,
            ));
        }
        Ok(Term::Var(name))
    }

    fn term_list(&mut self, so: bool) -> Result<Vec<Term>, ParseError> {
        let mut out = vec![self.term(so)?];
        while self.eat(&Tok::Comma) {
            out.push(self.term(so)?);
        }
        Ok(out)
    }

    // --- atoms ---------------------------------------------------------

    fn atom(&mut self, so: bool) -> Result<Atom, ParseError> {
        if let Some(Tok::Ident(name)) = self.peek() {
            if self.sig.relation_arity(name).is_some() && self.peek2() == Some(&Tok::LParen) {
                let (name, span) = self.ident("a relation")?;
                let arity = self.sig.relation_arity(&name).expect("checked");
                self.expect(Tok::LParen)?;
                let args = self.term_list(so)?;
                let close = self.expect(Tok::RParen)?;
                if args.len() != arity {
                    return Err(ParseError::new(
                        format!(
                            "relation `{name}` has arity {arity}, got {} arguments",
                            args.len()
                        ),
                        SourceSpan::new(span.start, close.end),
                    ));
                }
                return Ok(Atom::Rel(name, args));
            }
            if self.sig.relation_arity(name).is_some() {
                let (name, span) = self.ident("a relation")?;
                return Err(ParseError::new(
                    format!("relation `{name}` needs arguments"),
                    span,
                ));
            }
        }
        let l = self.term(so)?;
        self.expect(Tok::Eq)?;
        let r = self.term(so)?;
        Ok(Atom::Eq(l, r))
    }

    /// Atom possibly wrapped in parentheses, as in `~(x=y)`.
    fn atom_parens(&mut self, so: bool) -> Result<Atom, ParseError> {
        if self.eat(&Tok::LParen) {
            let a = self.atom_parens(so)?;
            self.expect(Tok::RParen)?;
            Ok(a)
        } else {
            self.atom(so)
        }
    }

    // --- team-language formulas -----------------------------------------

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.formula_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::impl_(lhs, rhs));
        }
        if self.eat(&Tok::Lollipop) {
            let rhs = self.formula()?;
            return Ok(Formula::limpl(lhs, rhs));
        }
        Ok(lhs)
    }

    fn formula_or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.formula_and()?;
        loop {
            if self.eat(&Tok::Bar) {
                let rhs = self.formula_and()?;
                lhs = Formula::tensor(lhs, rhs);
            } else if self.eat(&Tok::BarBar) {
                let rhs = self.formula_and()?;
                lhs = Formula::ivee(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn formula_and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.formula_unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.formula_unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn formula_unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) => match name.as_str() {
                "A" | "E" => {
                    let (q, _) = self.ident("a quantifier")?;
                    let (var, vspan) = self.ident("a variable")?;
                    self.check_binder(&var, vspan)?;
                    self.expect(Tok::Dot)?;
                    self.ind_scope.push(var.clone());
                    let body = self.formula();
                    self.ind_scope.pop();
                    let body = body?;
                    Ok(if q == "A" {
                        Formula::forall(var, body)
                    } else {
                        Formula::exists(var, body)
                    })
                }
                "Af" | "Ef" => {
                    let span = self.here();
                    Err(ParseError::new(
                        "function quantifiers belong to the second-order syntax (use --logic so)",
                        span,
                    ))
                }
                "bot" => {
                    self.bump();
                    Ok(Formula::Bottom)
                }
                "dep" | "ndep" => {
                    let (kw, _) = self.ident("dep")?;
                    self.expect(Tok::LParen)?;
                    let args = self.term_list(false)?;
                    self.expect(Tok::RParen)?;
                    Ok(if kw == "dep" {
                        Formula::Dep(args)
                    } else {
                        Formula::NegDep(args)
                    })
                }
                _ => Ok(Formula::Atom(self.atom(false)?)),
            },
            Some(Tok::Tilde) => {
                let tspan = self.here();
                self.bump();
                if let Some(Tok::Ident(name)) = self.peek() {
                    if name == "dep" || name == "ndep" {
                        return Err(ParseError::new(
                            "`~` applies only to atoms; write ndep(...) for a negated dependence atom",
                            tspan,
                        ));
                    }
                    if name == "bot" {
                        return Err(ParseError::new("`~` applies only to atoms", tspan));
                    }
                }
                let a = self.atom_parens(false)?;
                Ok(Formula::NegAtom(a))
            }
            Some(Tok::LParen) => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(t) => Err(ParseError::new(format!("expected a formula, found {t}"), self.here())),
            None => Err(ParseError::new(
                "expected a formula, found end of input",
                SourceSpan::new(self.eof, self.eof),
            )),
        }
    }

    // --- second-order formulas -------------------------------------------

    fn so_formula(&mut self) -> Result<SOFormula, ParseError> {
        let lhs = self.so_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.so_formula()?;
            return Ok(SOFormula::implies(lhs, rhs));
        }
        if self.peek() == Some(&Tok::Lollipop) {
            return Err(ParseError::new(
                "`-*` is not a second-order connective",
                self.here(),
            ));
        }
        Ok(lhs)
    }

    fn so_or(&mut self) -> Result<SOFormula, ParseError> {
        let mut lhs = self.so_and()?;
        loop {
            if self.eat(&Tok::Bar) {
                let rhs = self.so_and()?;
                lhs = SOFormula::or(lhs, rhs);
            } else if self.peek() == Some(&Tok::BarBar) {
                return Err(ParseError::new(
                    "`||` is not a second-order connective",
                    self.here(),
                ));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn so_and(&mut self) -> Result<SOFormula, ParseError> {
        let mut lhs = self.so_unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.so_unary()?;
            lhs = SOFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn so_unary(&mut self) -> Result<SOFormula, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) => match name.as_str() {
                "A" | "E" => {
                    let (q, _) = self.ident("a quantifier")?;
                    let (var, vspan) = self.ident("a variable")?;
                    self.check_binder(&var, vspan)?;
                    self.expect(Tok::Dot)?;
                    self.ind_scope.push(var.clone());
                    let body = self.so_formula();
                    self.ind_scope.pop();
                    let body = body?;
                    Ok(if q == "A" {
                        SOFormula::forall(var, body)
                    } else {
                        SOFormula::exists(var, body)
                    })
                }
                "Af" | "Ef" => {
                    let (q, _) = self.ident("a quantifier")?;
                    let (fvar, fspan) = self.ident("a function variable")?;
                    self.check_binder(&fvar, fspan)?;
                    if self.ind_scope.contains(&fvar) {
                        return Err(ParseError::new(
                            format!("`{fvar}` is already bound as an individual variable"),
                            fspan,
                        ));
                    }
                    self.expect(Tok::Colon)?;
                    let aspan = self.here();
                    let arity = match self.bump() {
                        Some((Tok::Int(n), _)) => n,
                        Some((t, s)) => {
                            return Err(ParseError::new(format!("expected an arity, found {t}"), s))
                        }
                        None => {
                            return Err(ParseError::new(
                                "expected an arity, found end of input",
                                aspan,
                            ))
                        }
                    };
                    if arity == 0 {
                        return Err(ParseError::new(
                            "function variables must have arity >= 1",
                            aspan,
                        ));
                    }
                    self.expect(Tok::Dot)?;
                    self.fn_scope.push((fvar.clone(), arity));
                    let body = self.so_formula();
                    self.fn_scope.pop();
                    let body = body?;
                    Ok(if q == "Af" {
                        SOFormula::forall_fn(fvar, arity, body)
                    } else {
                        SOFormula::exists_fn(fvar, arity, body)
                    })
                }
                "bot" | "dep" | "ndep" => Err(ParseError::new(
                    format!("`{name}` is not part of the second-order syntax"),
                    self.here(),
                )),
                _ => Ok(SOFormula::Atom(self.atom(true)?)),
            },
            Some(Tok::Tilde) => {
                self.bump();
                Ok(SOFormula::not(self.so_unary()?))
            }
            Some(Tok::LParen) => {
                self.bump();
                let f = self.so_formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(t) => Err(ParseError::new(format!("expected a formula, found {t}"), self.here())),
            None => Err(ParseError::new(
                "expected a formula, found end of input",
                SourceSpan::new(self.eof, self.eof),
            )),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.bump() {
            None => Ok(()),
            Some((t, s)) => Err(ParseError::new(format!("unexpected trailing {t}"), s)),
        }
    }
}

/// Parses a team-language formula.
pub fn parse_formula(src: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

/// Parses a second-order formula.
pub fn parse_so(src: &str, sig: &Signature) -> Result<SOFormula, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let f = p.so_formula()?;
    p.finish()?;
    Ok(f)
}

// --- rendering -----------------------------------------------------------

pub fn render_term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Const(c) => c.clone(),
        Term::App(f, args) => {
            let args: Vec<_> = args.iter().map(render_term).collect();
            format!("{f}({})", args.join(","))
        }
    }
}

pub fn render_atom(a: &Atom) -> String {
    match a {
        Atom::Rel(r, args) => {
            let args: Vec<_> = args.iter().map(render_term).collect();
            format!("{r}({})", args.join(","))
        }
        Atom::Eq(l, r) => format!("{}={}", render_term(l), render_term(r)),
    }
}

fn render_terms(ts: &[Term]) -> String {
    let ts: Vec<_> = ts.iter().map(render_term).collect();
    ts.join(",")
}

/// Canonical text: atoms are bare, every composite node is parenthesized,
/// quantifier bodies extend to the node's closing parenthesis.
pub fn render(f: &Formula) -> String {
    match f {
        Formula::Atom(a) => render_atom(a),
        Formula::NegAtom(a) => match a {
            Atom::Eq(..) => format!("~({})", render_atom(a)),
            Atom::Rel(..) => format!("~{}", render_atom(a)),
        },
        Formula::Dep(ts) => format!("dep({})", render_terms(ts)),
        Formula::NegDep(ts) => format!("ndep({})", render_terms(ts)),
        Formula::Bottom => "bot".to_owned(),
        Formula::And(l, r) => format!("({} & {})", render(l), render(r)),
        Formula::Tensor(l, r) => format!("({} | {})", render(l), render(r)),
        Formula::Ivee(l, r) => format!("({} || {})", render(l), render(r)),
        Formula::Impl(l, r) => format!("({} -> {})", render(l), render(r)),
        Formula::Limpl(l, r) => format!("({} -* {})", render(l), render(r)),
        Formula::Forall(x, b) => format!("(A {x}. {})", render(b)),
        Formula::Exists(x, b) => format!("(E {x}. {})", render(b)),
    }
}

/// Canonical text for second-order formulas; same conventions as [`render`].
pub fn render_so(f: &SOFormula) -> String {
    match f {
        SOFormula::Atom(a) => render_atom(a),
        SOFormula::Not(b) => match b.as_ref() {
            SOFormula::Atom(a @ Atom::Rel(..)) => format!("~{}", render_atom(a)),
            SOFormula::Atom(a @ Atom::Eq(..)) => format!("~({})", render_atom(a)),
            other => format!("~{}", render_so(other)),
        },
        SOFormula::And(l, r) => format!("({} & {})", render_so(l), render_so(r)),
        SOFormula::Or(l, r) => format!("({} | {})", render_so(l), render_so(r)),
        SOFormula::Implies(l, r) => format!("({} -> {})", render_so(l), render_so(r)),
        SOFormula::Forall(x, b) => format!("(A {x}. {})", render_so(b)),
        SOFormula::Exists(x, b) => format!("(E {x}. {})", render_so(b)),
        SOFormula::ForallFn(f_, q, b) => format!("(Af {f_}:{q}. {})", render_so(b)),
        SOFormula::ExistsFn(f_, q, b) => format!("(Ef {f_}:{q}. {})", render_so(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Fragment;

    fn sig() -> Signature {
        Signature::new(
            [("R".to_owned(), 2), ("P".to_owned(), 1)],
            [("f".to_owned(), 1)],
            ["c".to_owned()],
        )
        .unwrap()
    }

    #[test]
    fn precedence_and_before_or_before_impl() {
        let f = parse_formula("x=x & y=y | x=y -> dep(x)", &sig()).unwrap();
        // ((x=x & y=y) | x=y) -> dep(x)
        match f {
            Formula::Impl(l, _) => match *l {
                Formula::Tensor(ll, _) => assert!(matches!(*ll, Formula::And(..))),
                other => panic!("expected tensor, got {other:?}"),
            },
            other => panic!("expected impl, got {other:?}"),
        }
    }

    #[test]
    fn arrows_are_right_associative() {
        let f = parse_formula("x=x -> y=y -> x=y", &sig()).unwrap();
        match f {
            Formula::Impl(_, r) => assert!(matches!(*r, Formula::Impl(..))),
            other => panic!("expected impl, got {other:?}"),
        }
        let f = parse_formula("x=x -> y=y -* x=y", &sig()).unwrap();
        match f {
            Formula::Impl(_, r) => assert!(matches!(*r, Formula::Limpl(..))),
            other => panic!("expected impl, got {other:?}"),
        }
    }

    #[test]
    fn split_and_ivee_share_a_level() {
        let f = parse_formula("x=x | y=y || x=y", &sig()).unwrap();
        // (x=x | y=y) || x=y
        match f {
            Formula::Ivee(l, _) => assert!(matches!(*l, Formula::Tensor(..))),
            other => panic!("expected ivee, got {other:?}"),
        }
    }

    #[test]
    fn quantifier_extends_maximally_right() {
        let f = parse_formula("A x. x=c -> P(x)", &sig()).unwrap();
        assert!(matches!(f, Formula::Forall(_, b) if matches!(*b, Formula::Impl(..))));
    }

    #[test]
    fn terms_resolve_constants_functions_variables() {
        let f = parse_formula("f(c)=y", &sig()).unwrap();
        assert_eq!(
            f,
            Formula::Atom(Atom::Eq(
                Term::app("f", vec![Term::Const("c".to_owned())]),
                Term::var("y"),
            ))
        );
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let err = parse_formula("R(x)", &sig()).unwrap_err();
        assert!(err.message.contains("arity 2"));
        let err = parse_formula("f(x,y)=x", &sig()).unwrap_err();
        assert!(err.message.contains("arity 1"));
    }

    #[test]
    fn unknown_symbols_are_errors_with_spans() {
        let err = parse_formula("Q(x,y)", &sig()).unwrap_err();
        assert_eq!(err.span, SourceSpan::new(0, 1));
        // `Q(` looks like a function application inside a term.
        assert!(err.message.contains("unknown function `Q`"));
    }

    #[test]
    fn tilde_on_dep_suggests_ndep() {
        let err = parse_formula("~dep(x)", &sig()).unwrap_err();
        assert!(err.message.contains("ndep"));
    }

    #[test]
    fn dep_requires_at_least_one_term() {
        assert!(parse_formula("dep()", &sig()).is_err());
    }

    #[test]
    fn reserved_words_cannot_be_variables() {
        assert!(parse_formula("A bot. bot", &sig()).is_err());
        assert!(parse_formula("dep=x", &sig()).is_err());
    }

    #[test]
    fn render_parse_round_trip_examples() {
        let cases = [
            "dep(x,y)",
            "(dep(x) -> bot)",
            "(x=y & (P(x) | ~P(y)))",
            "(A x. (E y. R(x,y)))",
            "((x=x -* ~(x=x)) || ndep(x,y))",
            "~(f(c)=x)",
        ];
        for src in cases {
            let f = parse_formula(src, &sig()).unwrap();
            assert_eq!(render(&f), src);
            assert_eq!(parse_formula(&render(&f), &sig()).unwrap(), f);
        }
    }

    #[test]
    fn so_parses_function_quantifiers() {
        let f = parse_so("Af f2:1. Ef g:2. A x. f2(x)=g(x,x)", &sig()).unwrap();
        match &f {
            SOFormula::ForallFn(name, 1, _) => assert_eq!(name, "f2"),
            other => panic!("expected forall-fn, got {other:?}"),
        }
        assert_eq!(render_so(&f), "(Af f2:1. (Ef g:2. (A x. f2(x)=g(x,x))))");
        assert_eq!(parse_so(&render_so(&f), &sig()).unwrap(), f);
    }

    #[test]
    fn so_rejects_team_only_syntax() {
        assert!(parse_so("dep(x)", &sig()).is_err());
        assert!(parse_so("bot", &sig()).is_err());
        assert!(parse_so("x=x || y=y", &sig()).is_err());
        assert!(parse_so("x=x -* y=y", &sig()).is_err());
        let err = parse_so("Af g:0. x=x", &sig()).unwrap_err();
        assert!(err.message.contains("arity"));
        let err = parse_so("Af f:1. f(x)=x", &sig()).unwrap_err();
        assert!(err.message.contains("signature symbol"));
    }

    #[test]
    fn so_fn_var_arity_is_checked() {
        let err = parse_so("Ef g:2. A x. g(x)=x", &sig()).unwrap_err();
        assert!(err.message.contains("arity 2"));
    }

    #[test]
    fn team_grammar_rejects_fn_quantifiers() {
        let err = parse_formula("Ef g:1. g(x)=x", &sig()).unwrap_err();
        assert!(err.message.contains("second-order"));
    }

    #[test]
    fn so_negation_is_unrestricted() {
        let f = parse_so("~(A x. P(x) & P(x))", &sig()).unwrap();
        assert!(matches!(f, SOFormula::Not(_)));
    }

    #[test]
    fn spec_example_chain_renders_byte_exactly() {
        let sig = Signature::new(
            [
                ("a".to_owned(), 1),
                ("b".to_owned(), 1),
                ("c2".to_owned(), 1),
                ("d".to_owned(), 1),
            ],
            [],
            [],
        )
        .unwrap();
        let f = parse_formula(
            "((a(x) -> bot) -> (((b(x) -> bot) -> bot) -> c2(x))) & d(x)",
            &sig,
        )
        .unwrap();
        assert_eq!(
            render(&f),
            "(((a(x) -> bot) -> (((b(x) -> bot) -> bot) -> c2(x))) & d(x))"
        );
        assert_eq!(f.fragment().least, Fragment::Id);
    }
}
