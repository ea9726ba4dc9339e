use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;

use crate::coding::Coder;
use crate::error::SyntaxError;
use crate::parse;
use crate::syntax::Expr;

/// Registered axiom schemes. Instances are sentences, admitted below a code bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Scheme {
    /// `φ ∨ ¬φ`
    Lem,
    /// `¬¬φ → φ`
    Dne,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Lem => "lem",
            Scheme::Dne => "dne",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "lem" => Some(Scheme::Lem),
            "dne" => Some(Scheme::Dne),
            _ => None,
        }
    }

    pub fn is_instance(self, e: &Expr) -> bool {
        if !e.is_closed() {
            return false;
        }
        match (self, e) {
            (Scheme::Lem, Expr::Or(a, b)) => matches!(b.as_ref(), Expr::Not(c) if c.alpha_eq(a)),
            (Scheme::Dne, Expr::Imp(a, b)) => {
                matches!(a.as_ref(), Expr::Not(x) if matches!(x.as_ref(), Expr::Not(y) if y.alpha_eq(b)))
            }
            _ => false,
        }
    }
}

/// A theory: finitely many sentences plus bounded scheme instances.
#[derive(Clone, Debug)]
pub struct TheoryHandle {
    name: String,
    coder: Arc<Coder>,
    axioms: Vec<Expr>,
    keys: HashSet<Expr>,
    schemes: Vec<(Scheme, u64)>,
}

impl TheoryHandle {
    pub fn new(name: impl Into<String>, coder: Arc<Coder>, axioms: Vec<Expr>) -> Result<Self, SyntaxError> {
        let mut t = TheoryHandle { name: name.into(), coder, axioms: Vec::new(), keys: HashSet::new(), schemes: Vec::new() };
        t.add_axioms(axioms)?;
        Ok(t)
    }

    fn add_axioms(&mut self, axioms: Vec<Expr>) -> Result<(), SyntaxError> {
        for a in axioms {
            self.coder.signature().check_formula(&a)?;
            if !a.is_closed() {
                return Err(SyntaxError::Precondition(format!("axiom {} is not closed", self.coder.signature().show(&a))));
            }
            if self.keys.insert(a.alpha_key()) {
                self.axioms.push(a);
            }
        }
        let coder = &self.coder;
        self.axioms.sort_by_cached_key(|a| coder.encode_unchecked(a));
        Ok(())
    }

    pub fn with_scheme(mut self, scheme: Scheme, bound: u64) -> Self {
        self.schemes.push((scheme, bound));
        self
    }

    /// A new theory with `extra` added to the explicit axioms.
    pub fn extend(&self, name: impl Into<String>, extra: Vec<Expr>) -> Result<Self, SyntaxError> {
        let mut t = self.clone();
        t.name = name.into();
        t.add_axioms(extra)?;
        Ok(t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coder(&self) -> &Arc<Coder> {
        &self.coder
    }

    /// Explicit axioms in increasing code order.
    pub fn axioms(&self) -> &[Expr] {
        &self.axioms
    }

    pub fn schemes(&self) -> &[(Scheme, u64)] {
        &self.schemes
    }

    pub fn is_axiom(&self, e: &Expr) -> bool {
        if self.keys.contains(&e.alpha_key()) {
            return true;
        }
        self.schemes.iter().any(|&(s, bound)| s.is_instance(e) && self.coder.encode_unchecked(e).below(bound))
    }

    /// Every axiom (explicit or scheme instance) with code below `bound`, in code order.
    pub fn enumerate_below(&self, bound: u64) -> Vec<Expr> {
        let scan = self.schemes.iter().map(|s| s.1).max().unwrap_or(0).min(bound);
        let mut seen = HashSet::new();
        let mut out: Vec<Expr> = Vec::new();
        for code in 0..scan {
            let e = self.coder.decode_u64(code);
            if self.schemes.iter().any(|&(s, b)| code < b && s.is_instance(&e)) && seen.insert(e.alpha_key()) {
                out.push(e);
            }
        }
        for a in &self.axioms {
            if self.coder.encode_unchecked(a).below(bound) && seen.insert(a.alpha_key()) {
                out.push(a.clone());
            }
        }
        out.sort_by_cached_key(|a| self.coder.encode_unchecked(a));
        out
    }
}

/// Parses a theory file: a `theory NAME` header, then axioms in the formula
/// grammar (an axiom continues across lines until its parentheses balance),
/// and `scheme lem|dne BOUND` lines.
pub fn parse_theory(coder: Arc<Coder>, src: &str) -> Result<TheoryHandle, SyntaxError> {
    let perr = |line: usize, column: usize, message: String| SyntaxError::Parse { line, column, message };
    let mut name: Option<String> = None;
    let mut axioms = Vec::new();
    let mut schemes = Vec::new();
    let mut pending: Option<(usize, String, i64)> = None;
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        if let Some((start, mut text, depth)) = pending.take() {
            text.push('\n');
            text.push_str(raw);
            let depth = depth + paren_balance(body);
            if depth > 0 {
                pending = Some((start, text, depth));
            } else {
                axioms.push(parse::formula_at(coder.signature(), &text, start)?);
            }
            continue;
        }
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len() + 1;
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        match words.as_slice() {
            ["theory", n] => {
                if name.is_some() {
                    return Err(perr(line_no, indent, "duplicate theory header".into()));
                }
                name = Some(n.to_string());
            }
            ["theory", ..] => return Err(perr(line_no, indent, "expected `theory NAME`".into())),
            ["scheme", s, b] => {
                let scheme = Scheme::from_name(s).ok_or_else(|| perr(line_no, indent, format!("unknown scheme `{s}`")))?;
                let bound = b.parse().map_err(|_| perr(line_no, indent, format!("bad scheme bound `{b}`")))?;
                schemes.push((scheme, bound));
            }
            ["scheme", ..] => return Err(perr(line_no, indent, "expected `scheme NAME BOUND`".into())),
            _ => {
                if name.is_none() {
                    return Err(perr(line_no, indent, "missing `theory NAME` header".into()));
                }
                let depth = paren_balance(body);
                if depth > 0 {
                    pending = Some((line_no, raw.to_string(), depth));
                } else {
                    axioms.push(parse::formula_at(coder.signature(), raw, line_no)?);
                }
            }
        }
    }
    if let Some((start, text, _)) = pending {
        parse::formula_at(coder.signature(), &text, start)?;
    }
    let name = name.ok_or_else(|| perr(1, 1, "missing `theory NAME` header".into()))?;
    let mut t = TheoryHandle::new(name, coder, axioms)?;
    for (s, b) in schemes {
        t = t.with_scheme(s, b);
    }
    Ok(t)
}

fn paren_balance(s: &str) -> i64 {
    s.chars().map(|c| match c {
        '(' => 1,
        ')' => -1,
        _ => 0,
    }).sum()
}

/// Renders a theory in the format read by [`parse_theory`].
pub fn render_theory(t: &TheoryHandle) -> String {
    let sig = t.coder.signature();
    let mut out = format!("theory {}\n", t.name);
    for a in &t.axioms {
        out.push_str(&sig.show(a));
        out.push('\n');
    }
    for (s, b) in &t.schemes {
        out.push_str(&format!("scheme {} {}\n", s.name(), b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Signature;

    fn coder() -> Arc<Coder> {
        Arc::new(Coder::new(Signature::from_arities(&[("p", 0), ("q", 0), ("r", 1)], &[], false).unwrap()))
    }

    #[test]
    fn parse_and_render() {
        let src = "# demo\ntheory T\n(p)\n(imp p\n     q)\n(forall v0 (r v0))\nscheme lem 200\n";
        let t = parse_theory(coder(), src).unwrap();
        assert_eq!(t.name(), "T");
        assert_eq!(t.axioms().len(), 3);
        let again = parse_theory(coder(), &render_theory(&t)).unwrap();
        assert_eq!(again.axioms(), t.axioms());
        assert_eq!(again.schemes(), t.schemes());
    }

    #[test]
    fn parse_errors_have_positions() {
        let err = parse_theory(coder(), "theory T\n(p)\n  (imp p zz)\n").unwrap_err();
        assert!(matches!(err, SyntaxError::Parse { line: 3, column: 10, .. }), "{err:?}");
        assert!(matches!(parse_theory(coder(), "(p)\n"), Err(SyntaxError::Parse { line: 1, .. })));
        assert!(matches!(parse_theory(coder(), "theory T\nscheme foo 3\n"), Err(SyntaxError::Parse { line: 2, .. })));
        assert!(matches!(parse_theory(coder(), "theory T\n(forall v0 (r v1))\n"), Err(SyntaxError::Precondition(_))));
    }

    #[test]
    fn scheme_membership_is_bounded() {
        let c = coder();
        let t = TheoryHandle::new("T", c.clone(), vec![]).unwrap().with_scheme(Scheme::Lem, 400);
        let p = crate::syntax::pred(0, vec![]);
        let inst = crate::syntax::or(p.clone(), crate::syntax::not(p.clone()));
        let code = c.encode(&inst).unwrap().to_u64().unwrap();
        assert!(code < 400);
        assert!(t.is_axiom(&inst));
        let small = TheoryHandle::new("T", c.clone(), vec![]).unwrap().with_scheme(Scheme::Lem, code);
        assert!(!small.is_axiom(&inst));
        let listed = t.enumerate_below(400);
        assert!(listed.contains(&inst));
        assert!(listed.iter().all(|e| t.is_axiom(e)));
        let codes: Vec<_> = listed.iter().map(|e| c.encode_unchecked(e)).collect();
        assert!(codes.windows(2).all(|w| w[0] < w[1]));
    }
}
