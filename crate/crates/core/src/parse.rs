//! Text formats for signatures and formulas.
//!
//! Signature files hold one declaration per line:
//!
//! ```text
//! # comment
//! pred p 1
//! fun f 2
//! equality
//! ```
//!
//! Formulas and terms use a prefix s-expression grammar:
//!
//! ```text
//! formula := bot | top | NAME                      ; NAME a nullary predicate
//!          | (not F) | (and F F+) | (or F F+) | (imp F F)
//!          | (forall vN F) | (exists vN F)
//!          | (= T T) | (NAME T*)                   ; NAME a predicate
//! term    := vN | cN | NAME                        ; NAME a nullary function
//!          | (NAME T*)                             ; NAME a function
//! ```
//!
//! `and` / `or` with more than two arguments nest to the right.

use crate::error::SyntaxError;
use crate::syntax::{self, Expr, Signature, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(src: &str, first_line: usize) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let line_no = first_line + li;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let column = i + 1;
            if c == '(' || c == ')' {
                let tok = if c == '(' { Tok::Open } else { Tok::Close };
                out.push(Token { tok, line: line_no, column });
                i += 1;
                continue;
            }
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '(' && chars[i] != ')' && chars[i] != '#' {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Atom(word), line: line_no, column });
        }
    }
    Ok(out)
}

fn indexed(word: &str, prefix: char) -> Option<u32> {
    let rest = word.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

struct Parser<'a> {
    sig: &'a Signature,
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn err_at(&self, t: Option<&Token>, message: impl Into<String>) -> SyntaxError {
        let (line, column) = t.map(|t| (t.line, t.column)).unwrap_or(self.end);
        SyntaxError::Parse { line, column, message: message.into() }
    }

    fn next(&mut self) -> Result<Token, SyntaxError> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| self.err_at(None, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn expect_close(&mut self) -> Result<(), SyntaxError> {
        let t = self.next()?;
        if t.tok != Tok::Close {
            return Err(self.err_at(Some(&t), "expected `)`"));
        }
        Ok(())
    }

    fn variable(&mut self) -> Result<u32, SyntaxError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Atom(w) => indexed(w, 'v').ok_or_else(|| self.err_at(Some(&t), format!("expected a variable, found `{w}`"))),
            _ => Err(self.err_at(Some(&t), "expected a variable")),
        }
    }

    fn formula(&mut self) -> Result<Expr, SyntaxError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Close => Err(self.err_at(Some(&t), "unexpected `)`")),
            Tok::Atom(w) => match w.as_str() {
                "bot" => Ok(Expr::Bot),
                "top" => Ok(Expr::Top),
                name => match self.sig.predicate_index(name) {
                    Some(p) if self.sig.predicates()[p as usize].arity == 0 => Ok(Expr::Pred(p, vec![])),
                    Some(_) => Err(self.err_at(Some(&t), format!("predicate `{name}` needs arguments"))),
                    None => Err(self.err_at(Some(&t), format!("unknown formula `{name}`"))),
                },
            },
            Tok::Open => {
                let head = self.next()?;
                let Tok::Atom(h) = &head.tok else {
                    return Err(self.err_at(Some(&head), "expected an operator"));
                };
                let e = match h.as_str() {
                    "bot" => Expr::Bot,
                    "top" => Expr::Top,
                    "not" => syntax::not(self.formula()?),
                    "and" | "or" => {
                        let mut items = vec![self.formula()?, self.formula()?];
                        while matches!(self.peek(), Some(Token { tok: Tok::Open | Tok::Atom(_), .. })) {
                            items.push(self.formula()?);
                        }
                        if h == "and" { syntax::conjunction(items) } else { syntax::disjunction(items) }
                    }
                    "imp" => {
                        let a = self.formula()?;
                        syntax::imp(a, self.formula()?)
                    }
                    "forall" | "exists" => {
                        let v = self.variable()?;
                        let body = self.formula()?;
                        if h == "forall" { syntax::forall(v, body) } else { syntax::exists(v, body) }
                    }
                    "=" => {
                        if !self.sig.has_equality() {
                            return Err(self.err_at(Some(&head), "equality is not in the signature"));
                        }
                        let a = self.term()?;
                        syntax::eq(a, self.term()?)
                    }
                    name => {
                        let p = self
                            .sig
                            .predicate_index(name)
                            .ok_or_else(|| self.err_at(Some(&head), format!("unknown predicate `{name}`")))?;
                        let arity = self.sig.predicates()[p as usize].arity;
                        let mut args = Vec::with_capacity(arity);
                        for _ in 0..arity {
                            args.push(self.term()?);
                        }
                        Expr::Pred(p, args)
                    }
                };
                self.expect_close()?;
                Ok(e)
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Close => Err(self.err_at(Some(&t), "unexpected `)`")),
            Tok::Atom(w) => {
                if let Some(i) = indexed(w, 'v') {
                    return Ok(Expr::Var(i));
                }
                if let Some(n) = indexed(w, 'c') {
                    return Ok(Expr::Const(n));
                }
                match self.sig.function_index(w) {
                    Some(f) if self.sig.functions()[f as usize].arity == 0 => Ok(Expr::App(f, vec![])),
                    Some(_) => Err(self.err_at(Some(&t), format!("function `{w}` needs arguments"))),
                    None => Err(self.err_at(Some(&t), format!("unknown term `{w}`"))),
                }
            }
            Tok::Open => {
                let head = self.next()?;
                let Tok::Atom(name) = &head.tok else {
                    return Err(self.err_at(Some(&head), "expected a function symbol"));
                };
                let f = self
                    .sig
                    .function_index(name)
                    .ok_or_else(|| self.err_at(Some(&head), format!("unknown function `{name}`")))?;
                let arity = self.sig.functions()[f as usize].arity;
                let mut args = Vec::with_capacity(arity);
                for _ in 0..arity {
                    args.push(self.term()?);
                }
                self.expect_close()?;
                Ok(Expr::App(f, args))
            }
        }
    }
}

fn end_position(src: &str, first_line: usize) -> (usize, usize) {
    let lines: Vec<&str> = src.lines().collect();
    match lines.last() {
        Some(l) => (first_line + lines.len() - 1, l.chars().count() + 1),
        None => (first_line, 1),
    }
}

fn parse_with<T>(
    sig: &Signature,
    src: &str,
    first_line: usize,
    f: impl FnOnce(&mut Parser) -> Result<T, SyntaxError>,
) -> Result<T, SyntaxError> {
    let toks = tokenize(src, first_line)?;
    let mut p = Parser { sig, toks, pos: 0, end: end_position(src, first_line) };
    let out = f(&mut p)?;
    if let Some(t) = p.peek().cloned() {
        return Err(p.err_at(Some(&t), "trailing input"));
    }
    Ok(out)
}

pub fn formula(sig: &Signature, src: &str) -> Result<Expr, SyntaxError> {
    formula_at(sig, src, 1)
}

/// Parses a formula that starts on line `line` of a larger file.
pub fn formula_at(sig: &Signature, src: &str, line: usize) -> Result<Expr, SyntaxError> {
    parse_with(sig, src, line, |p| p.formula())
}

pub fn term(sig: &Signature, src: &str) -> Result<Expr, SyntaxError> {
    parse_with(sig, src, 1, |p| p.term())
}

/// Parses a signature file.
pub fn signature(src: &str) -> Result<Signature, SyntaxError> {
    let mut preds = Vec::new();
    let mut funs = Vec::new();
    let mut equality = false;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |column: usize, message: String| SyntaxError::Parse { line: i + 1, column, message };
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["equality"] => equality = true,
            [kind @ ("pred" | "fun"), name, arity] => {
                let arity: usize = arity
                    .parse()
                    .map_err(|_| err(raw.find(arity).map_or(1, |c| c + 1), format!("bad arity `{arity}`")))?;
                let sym = Symbol { name: name.to_string(), arity };
                if *kind == "pred" { preds.push(sym) } else { funs.push(sym) }
            }
            _ => return Err(err(raw.len() - raw.trim_start().len() + 1, format!("unrecognized declaration `{line}`"))),
        }
    }
    Signature::new(preds, funs, equality)
}

/// Renders a signature in the file format read by [`signature`].
pub fn render_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for p in sig.predicates() {
        out.push_str(&format!("pred {} {}\n", p.name, p.arity));
    }
    for f in sig.functions() {
        out.push_str(&format!("fun {} {}\n", f.name, f.arity));
    }
    if sig.has_equality() {
        out.push_str("equality\n");
    }
    out
}
