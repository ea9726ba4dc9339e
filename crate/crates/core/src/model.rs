//! Finite models, evaluation, atomic truth, and types.
//!
//! The constant `c_a` denotes the carrier element `a`. Model files read:
//!
//! ```text
//! carrier 0 1 2
//! table p: (0) (2)
//! table f: (0 1) (1 0) (2 2)    # graph of a unary function: (argument value)
//! table q: ()                   # a true nullary predicate
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::coding::Coder;
use crate::error::{ModelError, SyntaxError};
use crate::syntax::{eq, not, Expr, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    sig: Signature,
    carrier: BTreeSet<u32>,
    predicates: Vec<BTreeSet<Vec<u32>>>,
    functions: Vec<BTreeMap<Vec<u32>, u32>>,
}

fn tuples(carrier: &[u32], arity: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| carrier.iter().map(move |&a| {
                let mut t = t.clone();
                t.push(a);
                t
            }))
            .collect();
    }
    out
}

impl FiniteModel {
    pub fn new(
        sig: Signature,
        carrier: impl IntoIterator<Item = u32>,
        predicates: Vec<BTreeSet<Vec<u32>>>,
        functions: Vec<BTreeMap<Vec<u32>, u32>>,
    ) -> Result<Self, ModelError> {
        let carrier: BTreeSet<u32> = carrier.into_iter().collect();
        if carrier.is_empty() {
            return Err(ModelError::EmptyCarrier);
        }
        let table_err = |symbol: &str, message: String| ModelError::Table { symbol: symbol.to_string(), message };
        if predicates.len() != sig.predicates().len() || functions.len() != sig.functions().len() {
            return Err(table_err("*", "one table per symbol is required".into()));
        }
        for (sym, table) in sig.predicates().iter().zip(&predicates) {
            for t in table {
                if t.len() != sym.arity || !t.iter().all(|a| carrier.contains(a)) {
                    return Err(table_err(&sym.name, format!("bad tuple {t:?}")));
                }
            }
        }
        let elems: Vec<u32> = carrier.iter().copied().collect();
        for (sym, table) in sig.functions().iter().zip(&functions) {
            for (args, v) in table {
                if args.len() != sym.arity || !args.iter().chain([v]).all(|a| carrier.contains(a)) {
                    return Err(table_err(&sym.name, format!("bad entry {args:?} -> {v}")));
                }
            }
            if let Some(t) = tuples(&elems, sym.arity).into_iter().find(|t| !table.contains_key(t)) {
                return Err(table_err(&sym.name, format!("no value for {t:?}")));
            }
        }
        Ok(FiniteModel { sig, carrier, predicates, functions })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn carrier(&self) -> &BTreeSet<u32> {
        &self.carrier
    }

    pub fn elements(&self) -> Vec<u32> {
        self.carrier.iter().copied().collect()
    }

    pub fn predicate_table(&self, p: u32) -> &BTreeSet<Vec<u32>> {
        &self.predicates[p as usize]
    }

    pub fn function_table(&self, f: u32) -> &BTreeMap<Vec<u32>, u32> {
        &self.functions[f as usize]
    }

    fn term(&self, t: &Expr, env: &[(u32, u32)]) -> Result<u32, ModelError> {
        match t {
            Expr::Var(i) => env
                .iter()
                .rev()
                .find(|(v, _)| v == i)
                .map(|&(_, a)| a)
                .ok_or_else(|| ModelError::NotSentence(format!("free variable v{i}"))),
            Expr::Const(n) => {
                if self.carrier.contains(n) {
                    Ok(*n)
                } else {
                    Err(ModelError::OutsideCarrier(*n))
                }
            }
            Expr::App(f, args) => {
                let vals = args.iter().map(|a| self.term(a, env)).collect::<Result<Vec<_>, _>>()?;
                Ok(self.functions[*f as usize][&vals])
            }
            _ => Err(ModelError::Syntax(SyntaxError::Malformed("formula in term position".into()))),
        }
    }

    fn eval(&self, e: &Expr, env: &mut Vec<(u32, u32)>) -> Result<bool, ModelError> {
        Ok(match e {
            Expr::Bot => false,
            Expr::Top => true,
            Expr::Pred(p, args) => {
                let vals = args.iter().map(|a| self.term(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.predicates[*p as usize].contains(&vals)
            }
            Expr::Eq(a, b) => self.term(a, env)? == self.term(b, env)?,
            Expr::Not(a) => !self.eval(a, env)?,
            Expr::And(a, b) => self.eval(a, env)? & self.eval(b, env)?,
            Expr::Or(a, b) => self.eval(a, env)? | self.eval(b, env)?,
            Expr::Imp(a, b) => !self.eval(a, env)? | self.eval(b, env)?,
            Expr::Exists(v, a) | Expr::Forall(v, a) => {
                let want = matches!(e, Expr::Exists(..));
                let mut found = !want;
                for &x in &self.carrier {
                    env.push((*v, x));
                    let r = self.eval(a, env);
                    env.pop();
                    if r? == want {
                        found = want;
                        break;
                    }
                }
                found
            }
            _ => return Err(ModelError::Syntax(SyntaxError::Malformed("term in formula position".into()))),
        })
    }

    /// Truth value of a sentence of `L(C↾carrier)`.
    pub fn evaluate(&self, sentence: &Expr) -> Result<bool, ModelError> {
        self.sig.check_formula(sentence)?;
        self.eval(sentence, &mut Vec::new())
    }

    /// Truth value of a variable-free atom.
    pub fn atomic_truth(&self, atom: &Expr) -> Result<bool, ModelError> {
        if !atom.is_atomic() || atom.max_var().is_some() {
            return Err(ModelError::NotAtomic);
        }
        self.evaluate(atom)
    }

    /// The literal diagram: every atom over carrier constants, every graph
    /// equation `f(c_a…) = c_b` when the signature has equality, and every
    /// further variable-free atom with code below `bound`, each with its true sign.
    pub fn diagram(&self, coder: &Coder, bound: u64) -> Vec<Expr> {
        let elems = self.elements();
        let consts = |t: &[u32]| t.iter().map(|&a| Expr::Const(a)).collect::<Vec<_>>();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |atom: Expr, truth: bool| {
            let lit = if truth { atom } else { not(atom) };
            if seen.insert(lit.clone()) {
                out.push(lit);
            }
        };
        for (p, sym) in self.sig.predicates().iter().enumerate() {
            for t in tuples(&elems, sym.arity) {
                let truth = self.predicates[p].contains(&t);
                push(Expr::Pred(p as u32, consts(&t)), truth);
            }
        }
        if self.sig.has_equality() {
            for &a in &elems {
                for &b in &elems {
                    push(eq(Expr::Const(a), Expr::Const(b)), a == b);
                }
            }
            for (f, table) in self.functions.iter().enumerate() {
                for (args, v) in table {
                    push(eq(Expr::App(f as u32, consts(args)), Expr::Const(*v)), true);
                }
            }
        }
        for code in 0..bound {
            let e = coder.decode_u64(code);
            if e.is_atomic() && e.max_var().is_none() && e.constants().is_subset(&self.carrier) {
                let truth = self.evaluate(&e).expect("atom over the carrier evaluates");
                push(e, truth);
            }
        }
        out
    }

    pub fn satisfies_all(&self, sentences: &[Expr]) -> Result<bool, ModelError> {
        for s in sentences {
            if !self.evaluate(s)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Parses a model file against `sig`.
pub fn parse_model(sig: &Signature, src: &str) -> Result<FiniteModel, ModelError> {
    let perr = |line: usize, column: usize, message: String| ModelError::Syntax(SyntaxError::Parse { line, column, message });
    let mut carrier: Option<Vec<u32>> = None;
    let mut preds = vec![BTreeSet::new(); sig.predicates().len()];
    let mut funs = vec![BTreeMap::new(); sig.functions().len()];
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = body.len() - body.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix("carrier") {
            let elems = rest
                .split_whitespace()
                .map(|w| w.parse::<u32>().map_err(|_| perr(line, col, format!("bad carrier element `{w}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            carrier = Some(elems);
        } else if let Some(rest) = trimmed.strip_prefix("table") {
            let (name, entries) = rest
                .split_once(':')
                .ok_or_else(|| perr(line, col, "expected `table NAME: (…) …`".into()))?;
            let name = name.trim();
            let mut rows = Vec::new();
            let mut rest = entries.trim();
            while !rest.is_empty() {
                let inner = rest
                    .strip_prefix('(')
                    .and_then(|r| r.split_once(')'))
                    .ok_or_else(|| perr(line, col, format!("malformed tuple list in table `{name}`")))?;
                let tuple = inner
                    .0
                    .split_whitespace()
                    .map(|w| w.parse::<u32>().map_err(|_| perr(line, col, format!("bad element `{w}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push(tuple);
                rest = inner.1.trim_start();
            }
            if let Some(p) = sig.predicate_index(name) {
                preds[p as usize].extend(rows);
            } else if let Some(f) = sig.function_index(name) {
                for mut r in rows {
                    let v = r.pop().ok_or_else(|| perr(line, col, format!("empty graph entry for `{name}`")))?;
                    if funs[f as usize].insert(r.clone(), v).is_some() {
                        return Err(perr(line, col, format!("`{name}` has two values at {r:?}")));
                    }
                }
            } else {
                return Err(perr(line, col, format!("unknown symbol `{name}`")));
            }
        } else {
            return Err(perr(line, col, format!("unrecognized line `{trimmed}`")));
        }
    }
    let carrier = carrier.ok_or_else(|| perr(1, 1, "missing `carrier` line".into()))?;
    FiniteModel::new(sig.clone(), carrier, preds, funs)
}

/// Renders a model in the format read by [`parse_model`].
pub fn render_model(m: &FiniteModel) -> String {
    let show = |t: &[u32]| format!("({})", t.iter().map(u32::to_string).collect::<Vec<_>>().join(" "));
    let mut out = format!("carrier {}\n", m.elements().iter().map(u32::to_string).collect::<Vec<_>>().join(" "));
    for (p, sym) in m.sig.predicates().iter().enumerate() {
        let rows: Vec<String> = m.predicates[p].iter().map(|t| show(t)).collect();
        out.push_str(&format!("table {}: {}\n", sym.name, rows.join(" ")).replace(": \n", ":\n"));
    }
    for (f, sym) in m.sig.functions().iter().enumerate() {
        let rows: Vec<String> = m.functions[f]
            .iter()
            .map(|(args, v)| {
                let mut t = args.clone();
                t.push(*v);
                show(&t)
            })
            .collect();
        out.push_str(&format!("table {}: {}\n", sym.name, rows.join(" ")));
    }
    out
}

/// A sequence of conditions `φ_n(x)` on carrier elements.
pub trait RecursiveType {
    /// Whether the element `a` meets the `n`-th condition.
    fn satisfied(&self, m: &FiniteModel, n: usize, a: u32) -> bool;
}

/// A type given by formulas `φ_n` whose only free variable is `v_0`;
/// parameters appear in them as constants.
pub struct FormulaType<F: Fn(usize) -> Expr> {
    generator: F,
    pub parameters: Vec<u32>,
}

impl<F: Fn(usize) -> Expr> FormulaType<F> {
    pub fn new(generator: F, parameters: Vec<u32>) -> Self {
        FormulaType { generator, parameters }
    }

    pub fn formula(&self, n: usize) -> Expr {
        (self.generator)(n)
    }
}

impl<F: Fn(usize) -> Expr> RecursiveType for FormulaType<F> {
    fn satisfied(&self, m: &FiniteModel, n: usize, a: u32) -> bool {
        let phi = self.formula(n).instantiate(0, &Expr::Const(a));
        m.evaluate(&phi).unwrap_or(false)
    }
}

/// The least element meeting every condition `n ≤ n_max`, if any.
pub fn saturation_witness(m: &FiniteModel, t: &dyn RecursiveType, n_max: usize) -> Option<u32> {
    m.carrier.iter().copied().find(|&a| (0..=n_max).all(|n| t.satisfied(m, n, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;
    use crate::syntax::*;

    fn model(src: &str) -> FiniteModel {
        let sig = parse::signature("pred p 1\npred q 0\nfun f 1\nequality\n").unwrap();
        parse_model(&sig, src).unwrap()
    }

    fn m01() -> FiniteModel {
        model("carrier 0 1\ntable p: (0)\ntable q:\ntable f: (0 1) (1 0)\n")
    }

    #[test]
    fn nullary_and_quantifiers() {
        let m = m01();
        let s = m.signature().clone();
        let ev = |src: &str| m.evaluate(&parse::formula(&s, src).unwrap()).unwrap();
        assert!(ev("top"));
        assert!(!ev("bot"));
        assert!(ev("(exists v0 (p v0))"));
        assert!(!ev("(forall v0 (p v0))"));
        assert!(ev("(forall v0 (not (= v0 (f v0))))"));
        assert!(ev("(p (f c1))"));
        assert!(!ev("q"));
    }

    #[test]
    fn domain_errors() {
        let m = m01();
        assert_eq!(m.evaluate(&pred(0, vec![Expr::Const(5)])), Err(ModelError::OutsideCarrier(5)));
        assert!(matches!(m.evaluate(&pred(0, vec![Expr::Var(0)])), Err(ModelError::NotSentence(_))));
        assert_eq!(m.atomic_truth(&not(pred(1, vec![]))), Err(ModelError::NotAtomic));
    }

    #[test]
    fn atomic_truth_agrees_with_evaluate() {
        let m = m01();
        let coder = Coder::new(m.signature().clone());
        let mut seen = 0;
        for code in 0..3000 {
            let e = coder.decode_u64(code);
            if e.is_atomic() && e.max_var().is_none() && e.constants().is_subset(m.carrier()) {
                assert_eq!(m.atomic_truth(&e).unwrap(), m.evaluate(&e).unwrap());
                seen += 1;
            }
        }
        assert!(seen > 10);
        assert!(m.atomic_truth(&eq(Expr::Const(0), Expr::Const(0))).unwrap());
    }

    #[test]
    fn diagram_is_true_and_decides_base_atoms() {
        let m = m01();
        let coder = Coder::new(m.signature().clone());
        let d = m.diagram(&coder, 2000);
        assert!(m.satisfies_all(&d).unwrap());
        assert!(d.contains(&pred(0, vec![Expr::Const(0)])));
        assert!(d.contains(&not(pred(0, vec![Expr::Const(1)]))));
        assert!(d.contains(&eq(Expr::App(0, vec![Expr::Const(0)]), Expr::Const(1))));
        assert!(d.contains(&not(pred(1, vec![]))));
    }

    #[test]
    fn parse_render_round_trip() {
        let m = m01();
        let again = parse_model(m.signature(), &render_model(&m)).unwrap();
        assert_eq!(again, m);
        let sig = m.signature().clone();
        assert!(matches!(parse_model(&sig, "carrier\n"), Err(ModelError::EmptyCarrier)));
        assert!(matches!(parse_model(&sig, "carrier 0\ntable f:\n"), Err(ModelError::Table { .. })));
        assert!(matches!(parse_model(&sig, "carrier 0 1\ntable p: (2)\ntable f: (0 0) (1 1)\n"), Err(ModelError::Table { .. })));
        assert!(matches!(
            parse_model(&sig, "carrier 0\n  table z: (0)\n"),
            Err(ModelError::Syntax(SyntaxError::Parse { line: 2, column: 3, .. }))
        ));
    }

    #[test]
    fn saturation() {
        let m = model("carrier 0 1 2\ntable p: (1) (2)\ntable q: ()\ntable f: (0 1) (1 2) (2 2)\n");
        let p = |t: Expr| pred(0, vec![t]);
        let constant = FormulaType::new(|_| p(Expr::Var(0)), vec![]);
        assert_eq!(saturation_witness(&m, &constant, 5), Some(1));
        let impossible = FormulaType::new(|_| and(p(Expr::Var(0)), not(p(Expr::Var(0)))), vec![]);
        assert_eq!(saturation_witness(&m, &impossible, 0), None);
        // φ_n(x): p(f^n(x)) with x ≠ c_1 from n ≥ 1.
        let nested = FormulaType::new(
            |n| {
                let mut t = Expr::Var(0);
                for _ in 0..n {
                    t = Expr::App(0, vec![t]);
                }
                if n == 0 { p(t) } else { and(p(t), not(eq(Expr::Var(0), Expr::Const(1)))) }
            },
            vec![1],
        );
        let w = saturation_witness(&m, &nested, 4).unwrap();
        for n in 0..=4 {
            assert!(nested.satisfied(&m, n, w));
        }
        assert_eq!(w, 2);
        for n_max in 0..=4 {
            let prefix_ok = m.elements().iter().any(|&a| (0..=n_max).all(|n| nested.satisfied(&m, n, a)));
            assert_eq!(saturation_witness(&m, &nested, n_max).is_some(), prefix_ok);
        }
    }
}
