//! First-order syntax over a finite signature extended by the constants `c_n`.
//!
//! Terms and formulas share one AST, [`Expr`]. Variables are `v_i`, constants
//! are `c_n`; function and predicate symbols are referenced by their index in
//! the [`Signature`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SyntaxError;

/// Indices at or above this value are reserved for bound variables in
/// alpha-canonical keys.
pub(crate) const BOUND_BASE: u32 = 1 << 30;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    predicates: Vec<Symbol>,
    functions: Vec<Symbol>,
    equality: bool,
}

const RESERVED: &[&str] = &[
    "and", "or", "imp", "not", "forall", "exists", "bot", "top", "=", "pred", "fun",
];

fn is_indexed_name(name: &str, prefix: char) -> bool {
    let mut chars = name.chars();
    chars.next() == Some(prefix)
        && name.len() > 1
        && chars.all(|c| c.is_ascii_digit())
}

impl Signature {
    pub fn new(
        predicates: Vec<Symbol>,
        functions: Vec<Symbol>,
        equality: bool,
    ) -> Result<Self, SyntaxError> {
        if predicates.is_empty() {
            return Err(SyntaxError::Signature("at least one predicate symbol is required".into()));
        }
        let mut seen = BTreeSet::new();
        for sym in predicates.iter().chain(functions.iter()) {
            let valid_chars = !sym.name.is_empty()
                && sym
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
            if !valid_chars
                || RESERVED.contains(&sym.name.as_str())
                || is_indexed_name(&sym.name, 'v')
                || is_indexed_name(&sym.name, 'c')
            {
                return Err(SyntaxError::Signature(format!("invalid symbol name `{}`", sym.name)));
            }
            if !seen.insert(sym.name.clone()) {
                return Err(SyntaxError::Signature(format!("duplicate symbol `{}`", sym.name)));
            }
        }
        Ok(Signature { predicates, functions, equality })
    }

    /// Convenience constructor from `(name, arity)` pairs.
    pub fn from_arities(preds: &[(&str, usize)], funs: &[(&str, usize)], equality: bool) -> Result<Self, SyntaxError> {
        let mk = |xs: &[(&str, usize)]| {
            xs.iter()
                .map(|(n, a)| Symbol { name: n.to_string(), arity: *a })
                .collect()
        };
        Signature::new(mk(preds), mk(funs), equality)
    }

    pub fn predicates(&self) -> &[Symbol] {
        &self.predicates
    }

    pub fn functions(&self) -> &[Symbol] {
        &self.functions
    }

    pub fn has_equality(&self) -> bool {
        self.equality
    }

    pub fn predicate_index(&self, name: &str) -> Option<u32> {
        self.predicates.iter().position(|s| s.name == name).map(|i| i as u32)
    }

    pub fn function_index(&self, name: &str) -> Option<u32> {
        self.functions.iter().position(|s| s.name == name).map(|i| i as u32)
    }

    /// Checks arities, symbol indices, and term/formula sorting.
    pub fn check(&self, e: &Expr) -> Result<(), SyntaxError> {
        self.check_sorted(e, e.is_term())
    }

    pub fn check_formula(&self, e: &Expr) -> Result<(), SyntaxError> {
        if !e.is_formula() {
            return Err(SyntaxError::Malformed("expected a formula, found a term".into()));
        }
        self.check_sorted(e, false)
    }

    fn check_sorted(&self, e: &Expr, want_term: bool) -> Result<(), SyntaxError> {
        if e.is_term() != want_term {
            return Err(SyntaxError::Malformed(format!(
                "expected a {}",
                if want_term { "term" } else { "formula" }
            )));
        }
        match e {
            Expr::Var(_) | Expr::Const(_) | Expr::Bot | Expr::Top => Ok(()),
            Expr::App(f, args) => {
                let sym = self
                    .functions
                    .get(*f as usize)
                    .ok_or_else(|| SyntaxError::Malformed(format!("unknown function #{f}")))?;
                if sym.arity != args.len() {
                    return Err(SyntaxError::Arity { name: sym.name.clone(), expected: sym.arity, found: args.len() });
                }
                args.iter().try_for_each(|a| self.check_sorted(a, true))
            }
            Expr::Pred(p, args) => {
                let sym = self
                    .predicates
                    .get(*p as usize)
                    .ok_or_else(|| SyntaxError::Malformed(format!("unknown predicate #{p}")))?;
                if sym.arity != args.len() {
                    return Err(SyntaxError::Arity { name: sym.name.clone(), expected: sym.arity, found: args.len() });
                }
                args.iter().try_for_each(|a| self.check_sorted(a, true))
            }
            Expr::Eq(a, b) => {
                if !self.equality {
                    return Err(SyntaxError::Malformed("equality is not in the signature".into()));
                }
                self.check_sorted(a, true)?;
                self.check_sorted(b, true)
            }
            Expr::Not(a) | Expr::Exists(_, a) | Expr::Forall(_, a) => self.check_sorted(a, false),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Imp(a, b) => {
                self.check_sorted(a, false)?;
                self.check_sorted(b, false)
            }
        }
    }

    /// Renders `e` in the s-expression grammar accepted by [`crate::parse`].
    pub fn show(&self, e: &Expr) -> String {
        let mut out = String::new();
        self.write_expr(e, &mut out);
        out
    }

    fn write_expr(&self, e: &Expr, out: &mut String) {
        use std::fmt::Write;
        let sym_name = |syms: &[Symbol], i: u32| {
            syms.get(i as usize).map(|s| s.name.clone()).unwrap_or_else(|| format!("?{i}"))
        };
        match e {
            Expr::Var(i) => {
                let _ = write!(out, "v{i}");
            }
            Expr::Const(n) => {
                let _ = write!(out, "c{n}");
            }
            Expr::Bot => out.push_str("bot"),
            Expr::Top => out.push_str("top"),
            Expr::App(f, args) if args.is_empty() => out.push_str(&sym_name(&self.functions, *f)),
            Expr::App(f, args) => {
                out.push('(');
                out.push_str(&sym_name(&self.functions, *f));
                for a in args {
                    out.push(' ');
                    self.write_expr(a, out);
                }
                out.push(')');
            }
            Expr::Pred(p, args) => {
                out.push('(');
                out.push_str(&sym_name(&self.predicates, *p));
                for a in args {
                    out.push(' ');
                    self.write_expr(a, out);
                }
                out.push(')');
            }
            Expr::Eq(a, b) => self.write_node(out, "=", &[a, b]),
            Expr::Not(a) => self.write_node(out, "not", &[a]),
            Expr::And(a, b) => self.write_node(out, "and", &[a, b]),
            Expr::Or(a, b) => self.write_node(out, "or", &[a, b]),
            Expr::Imp(a, b) => self.write_node(out, "imp", &[a, b]),
            Expr::Exists(v, a) => {
                let _ = write!(out, "(exists v{v} ");
                self.write_expr(a, out);
                out.push(')');
            }
            Expr::Forall(v, a) => {
                let _ = write!(out, "(forall v{v} ");
                self.write_expr(a, out);
                out.push(')');
            }
        }
    }

    fn write_node(&self, out: &mut String, head: &str, kids: &[&Expr]) {
        out.push('(');
        out.push_str(head);
        for k in kids {
            out.push(' ');
            self.write_expr(k, out);
        }
        out.push(')');
    }
}

/// A term or formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expr {
    Var(u32),
    Const(u32),
    App(u32, Vec<Expr>),
    Pred(u32, Vec<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Bot,
    Top,
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Imp(Box<Expr>, Box<Expr>),
    Exists(u32, Box<Expr>),
    Forall(u32, Box<Expr>),
}

pub fn not(a: Expr) -> Expr {
    Expr::Not(Box::new(a))
}

pub fn and(a: Expr, b: Expr) -> Expr {
    Expr::And(Box::new(a), Box::new(b))
}

pub fn or(a: Expr, b: Expr) -> Expr {
    Expr::Or(Box::new(a), Box::new(b))
}

pub fn imp(a: Expr, b: Expr) -> Expr {
    Expr::Imp(Box::new(a), Box::new(b))
}

pub fn forall(v: u32, a: Expr) -> Expr {
    Expr::Forall(v, Box::new(a))
}

pub fn exists(v: u32, a: Expr) -> Expr {
    Expr::Exists(v, Box::new(a))
}

pub fn eq(a: Expr, b: Expr) -> Expr {
    Expr::Eq(Box::new(a), Box::new(b))
}

pub fn pred(p: u32, args: Vec<Expr>) -> Expr {
    Expr::Pred(p, args)
}

/// Right-nested disjunction; `bot` when empty.
pub fn disjunction(items: Vec<Expr>) -> Expr {
    let mut it = items.into_iter().rev();
    match it.next() {
        None => Expr::Bot,
        Some(last) => it.fold(last, |acc, x| or(x, acc)),
    }
}

/// Right-nested conjunction; `top` when empty.
pub fn conjunction(items: Vec<Expr>) -> Expr {
    let mut it = items.into_iter().rev();
    match it.next() {
        None => Expr::Top,
        Some(last) => it.fold(last, |acc, x| and(x, acc)),
    }
}

impl Expr {
    pub fn is_term(&self) -> bool {
        matches!(self, Expr::Var(_) | Expr::Const(_) | Expr::App(..))
    }

    pub fn is_formula(&self) -> bool {
        !self.is_term()
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Expr::Pred(..) | Expr::Eq(..))
    }

    /// Number of symbols, with `v_i` and `c_n` costing `i + 1` and `n + 1`.
    pub fn size(&self) -> u64 {
        match self {
            Expr::Var(i) | Expr::Const(i) => *i as u64 + 1,
            Expr::Bot | Expr::Top => 1,
            Expr::App(_, args) | Expr::Pred(_, args) => 1 + args.iter().map(Expr::size).sum::<u64>(),
            Expr::Eq(a, b) | Expr::And(a, b) | Expr::Or(a, b) | Expr::Imp(a, b) => 1 + a.size() + b.size(),
            Expr::Not(a) => 1 + a.size(),
            Expr::Exists(v, a) | Expr::Forall(v, a) => 2 + *v as u64 + a.size(),
        }
    }

    /// Immediate children (the bound variable of a quantifier is not a child).
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) | Expr::Const(_) | Expr::Bot | Expr::Top => vec![],
            Expr::App(_, args) | Expr::Pred(_, args) => args.iter().collect(),
            Expr::Eq(a, b) | Expr::And(a, b) | Expr::Or(a, b) | Expr::Imp(a, b) => vec![a, b],
            Expr::Not(a) | Expr::Exists(_, a) | Expr::Forall(_, a) => vec![a],
        }
    }

    /// All proper subexpressions, in preorder.
    pub fn proper_subexpressions(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        let mut stack: Vec<&Expr> = self.children().into_iter().rev().collect();
        while let Some(e) = stack.pop() {
            out.push(e);
            stack.extend(e.children().into_iter().rev());
        }
        out
    }

    pub fn free_vars(&self) -> BTreeSet<u32> {
        let mut acc = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut acc);
        acc
    }

    fn collect_free(&self, bound: &mut Vec<u32>, acc: &mut BTreeSet<u32>) {
        match self {
            Expr::Var(i) => {
                if !bound.contains(i) {
                    acc.insert(*i);
                }
            }
            Expr::Exists(v, a) | Expr::Forall(v, a) => {
                bound.push(*v);
                a.collect_free(bound, acc);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, acc);
                }
            }
        }
    }

    pub fn has_free(&self, v: u32) -> bool {
        match self {
            Expr::Var(i) => *i == v,
            Expr::Exists(w, a) | Expr::Forall(w, a) => *w != v && a.has_free(v),
            _ => self.children().into_iter().any(|c| c.has_free(v)),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn constants(&self) -> BTreeSet<u32> {
        let mut acc = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Const(n) = e {
                acc.insert(*n);
            }
        });
        acc
    }

    /// Largest variable index occurring anywhere (free or bound), if any.
    pub fn max_var(&self) -> Option<u32> {
        let mut m: Option<u32> = None;
        self.walk(&mut |e| match e {
            Expr::Var(i) | Expr::Exists(i, _) | Expr::Forall(i, _) => {
                m = Some(m.map_or(*i, |x| x.max(*i)));
            }
            _ => {}
        });
        m
    }

    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// A sentence of `L(C↾carrier)`: a closed formula whose constants all lie in `carrier`.
    pub fn is_sentence_over(&self, carrier: &BTreeSet<u32>) -> bool {
        self.is_formula() && self.is_closed() && self.constants().is_subset(carrier)
    }

    /// Quantifier nesting depth.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Expr::Exists(_, a) | Expr::Forall(_, a) => 1 + a.quantifier_depth(),
            _ => self.children().into_iter().map(Expr::quantifier_depth).max().unwrap_or(0),
        }
    }

    /// Replaces free occurrences of `v` by the closed term `t`.
    pub fn substitute(&self, v: u32, t: &Expr) -> Result<Expr, SyntaxError> {
        if !t.is_term() {
            return Err(SyntaxError::Precondition("substituted expression must be a term".into()));
        }
        if !t.is_closed() {
            return Err(SyntaxError::Precondition("substituted term must be closed".into()));
        }
        Ok(self.instantiate(v, t))
    }

    /// Capture-avoiding replacement of free `v` by any term `t`; binders that
    /// would capture a variable of `t` are renamed to fresh indices.
    pub fn instantiate(&self, v: u32, t: &Expr) -> Expr {
        let tvars = t.free_vars();
        if tvars.is_empty() {
            return self.subst_closed(v, t);
        }
        let mut fresh = self
            .max_var()
            .into_iter()
            .chain(tvars.iter().copied())
            .chain(std::iter::once(v))
            .max()
            .unwrap_or(0)
            + 1;
        self.subst_open(v, t, &tvars, &mut fresh)
    }

    fn subst_closed(&self, v: u32, t: &Expr) -> Expr {
        match self {
            Expr::Var(i) if *i == v => t.clone(),
            Expr::Var(_) | Expr::Const(_) | Expr::Bot | Expr::Top => self.clone(),
            Expr::Exists(w, _) | Expr::Forall(w, _) if *w == v => self.clone(),
            _ => self.map_children(|c| c.subst_closed(v, t)),
        }
    }

    fn subst_open(&self, v: u32, t: &Expr, tvars: &BTreeSet<u32>, fresh: &mut u32) -> Expr {
        match self {
            Expr::Var(i) if *i == v => t.clone(),
            Expr::Var(_) | Expr::Const(_) | Expr::Bot | Expr::Top => self.clone(),
            Expr::Exists(w, _) | Expr::Forall(w, _) if *w == v => self.clone(),
            Expr::Exists(w, body) | Expr::Forall(w, body) => {
                let is_forall = matches!(self, Expr::Forall(..));
                if tvars.contains(w) && body.has_free(v) {
                    let nw = *fresh;
                    *fresh += 1;
                    let renamed = body.subst_closed_var(*w, nw);
                    let inner = renamed.subst_open(v, t, tvars, fresh);
                    if is_forall { forall(nw, inner) } else { exists(nw, inner) }
                } else {
                    let inner = body.subst_open(v, t, tvars, fresh);
                    if is_forall { forall(*w, inner) } else { exists(*w, inner) }
                }
            }
            _ => self.map_children(|c| c.subst_open(v, t, tvars, fresh)),
        }
    }

    /// Renames free `from` to the (fresh) variable `to`.
    fn subst_closed_var(&self, from: u32, to: u32) -> Expr {
        self.subst_closed(from, &Expr::Var(to))
    }

    /// Rebuilds the node with each child mapped by `f`.
    pub fn map_children(&self, mut f: impl FnMut(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Var(_) | Expr::Const(_) | Expr::Bot | Expr::Top => self.clone(),
            Expr::App(s, args) => Expr::App(*s, args.iter().map(&mut f).collect()),
            Expr::Pred(s, args) => Expr::Pred(*s, args.iter().map(&mut f).collect()),
            Expr::Eq(a, b) => eq(f(a), f(b)),
            Expr::Not(a) => not(f(a)),
            Expr::And(a, b) => and(f(a), f(b)),
            Expr::Or(a, b) => or(f(a), f(b)),
            Expr::Imp(a, b) => imp(f(a), f(b)),
            Expr::Exists(v, a) => exists(*v, f(a)),
            Expr::Forall(v, a) => forall(*v, f(a)),
        }
    }

    /// Replaces every occurrence of the term `from` (outside binders of its
    /// variables) by `to`. Used for equality substitution on atoms.
    pub fn replace_term(&self, from: &Expr, to: &Expr) -> Expr {
        if self == from {
            return to.clone();
        }
        match self {
            Expr::App(..) | Expr::Pred(..) | Expr::Eq(..) => self.map_children(|c| c.replace_term(from, to)),
            _ => self.clone(),
        }
    }

    /// Canonical representative of the alpha-equivalence class: bound
    /// variables are renamed by binder depth.
    pub fn alpha_key(&self) -> Expr {
        self.alpha_rec(&mut Vec::new())
    }

    fn alpha_rec(&self, env: &mut Vec<(u32, u32)>) -> Expr {
        match self {
            Expr::Var(i) => match env.iter().rev().find(|(v, _)| v == i) {
                Some((_, k)) => Expr::Var(*k),
                None => self.clone(),
            },
            Expr::Exists(v, a) | Expr::Forall(v, a) => {
                let k = BOUND_BASE + env.len() as u32;
                env.push((*v, k));
                let body = a.alpha_rec(env);
                env.pop();
                if matches!(self, Expr::Forall(..)) { forall(k, body) } else { exists(k, body) }
            }
            _ => self.map_children(|c| c.alpha_rec(env)),
        }
    }

    pub fn alpha_eq(&self, other: &Expr) -> bool {
        self.alpha_key() == other.alpha_key()
    }

    /// Renames the single free variable (if any) to `v_0`, renaming inner
    /// binders of `v_0` away first.
    pub fn canonicalize_free_to_v0(&self) -> Expr {
        let fv = self.free_vars();
        match fv.iter().next() {
            Some(&x) if x != 0 => self.instantiate(x, &Expr::Var(0)),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Expr {
    /// Signature-free rendering; symbols appear as `P#i` / `f#i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(i) => write!(f, "v{i}"),
            Expr::Const(n) => write!(f, "c{n}"),
            Expr::Bot => write!(f, "bot"),
            Expr::Top => write!(f, "top"),
            Expr::App(s, args) => {
                write!(f, "(f#{s}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Expr::Pred(s, args) => {
                write!(f, "(P#{s}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Expr::Eq(a, b) => write!(f, "(= {a} {b})"),
            Expr::Not(a) => write!(f, "(not {a})"),
            Expr::And(a, b) => write!(f, "(and {a} {b})"),
            Expr::Or(a, b) => write!(f, "(or {a} {b})"),
            Expr::Imp(a, b) => write!(f, "(imp {a} {b})"),
            Expr::Exists(v, a) => write!(f, "(exists v{v} {a})"),
            Expr::Forall(v, a) => write!(f, "(forall v{v} {a})"),
        }
    }
}
