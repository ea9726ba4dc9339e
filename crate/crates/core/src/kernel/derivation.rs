use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::taut::is_tautology;
use super::theory::TheoryHandle;
use crate::coding::{decode_sequence, encode_sequence, pair, unpair, Coder, GodelCode};
use crate::error::DerivationDefect;
use crate::syntax::Expr;

/// Logical axiom schemata of the calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LogicalAxiom {
    /// Any propositional tautology, primes taken up to alpha-equivalence.
    Tautology,
    /// `∀x A → A[t/x]`
    UniversalInstance,
    /// `A[t/x] → ∃x A`
    ExistentialIntro,
    /// `∀x (C → A) → (C → ∀x A)` with `x` not free in `C`
    UniversalDistribution,
    /// `∀x (A → C) → (∃x A → C)` with `x` not free in `C`
    ExistentialElim,
    /// `t = t`
    EqualityRefl,
    /// `s = t → (A → A')` for an atom `A` and `A'` obtained by replacing some occurrences of `s` by `t`
    EqualitySubst,
}

impl LogicalAxiom {
    pub const ALL: [LogicalAxiom; 7] = [
        LogicalAxiom::Tautology,
        LogicalAxiom::UniversalInstance,
        LogicalAxiom::ExistentialIntro,
        LogicalAxiom::UniversalDistribution,
        LogicalAxiom::ExistentialElim,
        LogicalAxiom::EqualityRefl,
        LogicalAxiom::EqualitySubst,
    ];

    pub fn id(self) -> u32 {
        Self::ALL.iter().position(|&a| a == self).unwrap() as u32
    }

    pub fn from_id(id: u32) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn matches(self, e: &Expr) -> bool {
        match self {
            LogicalAxiom::Tautology => is_tautology(e),
            LogicalAxiom::UniversalInstance => match e {
                Expr::Imp(l, b) => match l.as_ref() {
                    Expr::Forall(x, a) => is_instance(a, *x, b),
                    _ => false,
                },
                _ => false,
            },
            LogicalAxiom::ExistentialIntro => match e {
                Expr::Imp(b, r) => match r.as_ref() {
                    Expr::Exists(x, a) => is_instance(a, *x, b),
                    _ => false,
                },
                _ => false,
            },
            LogicalAxiom::UniversalDistribution => {
                let Expr::Imp(l, r) = e else { return false };
                let (Expr::Forall(x, body), Expr::Imp(c2, d)) = (l.as_ref(), r.as_ref()) else { return false };
                let Expr::Imp(c, a) = body.as_ref() else { return false };
                !c.has_free(*x) && c.alpha_eq(c2) && d.alpha_eq(&Expr::Forall(*x, a.clone()))
            }
            LogicalAxiom::ExistentialElim => {
                let Expr::Imp(l, r) = e else { return false };
                let (Expr::Forall(x, body), Expr::Imp(d, c2)) = (l.as_ref(), r.as_ref()) else { return false };
                let Expr::Imp(a, c) = body.as_ref() else { return false };
                !c.has_free(*x) && c.alpha_eq(c2) && d.alpha_eq(&Expr::Exists(*x, a.clone()))
            }
            LogicalAxiom::EqualityRefl => matches!(e, Expr::Eq(a, b) if a == b),
            LogicalAxiom::EqualitySubst => {
                let Expr::Imp(l, r) = e else { return false };
                let (Expr::Eq(s, t), Expr::Imp(a, a2)) = (l.as_ref(), r.as_ref()) else { return false };
                a.is_atomic() && differs_by(a, a2, s, t)
            }
        }
    }
}

/// `b` is `a` with some occurrences of the term `s` replaced by `t`.
fn differs_by(a: &Expr, b: &Expr, s: &Expr, t: &Expr) -> bool {
    if a == b || (a == s && b == t) {
        return true;
    }
    match (a, b) {
        (Expr::App(f, xs), Expr::App(g, ys)) | (Expr::Pred(f, xs), Expr::Pred(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| differs_by(x, y, s, t))
        }
        (Expr::Eq(x1, x2), Expr::Eq(y1, y2)) => differs_by(x1, y1, s, t) && differs_by(x2, y2, s, t),
        _ => false,
    }
}

/// Whether `b` is alpha-equivalent to `a[t/x]` for some term `t`.
fn is_instance(a: &Expr, x: u32, b: &Expr) -> bool {
    match find_witness(a, x, b, &mut Vec::new(), &mut Vec::new()) {
        Some(t) => a.instantiate(x, &t).alpha_eq(b),
        None => a.alpha_eq(b),
    }
}

/// Walks `a` and `b` in parallel and returns the subterm of `b` sitting
/// where `a` has a free occurrence of `x`.
fn find_witness(a: &Expr, x: u32, b: &Expr, bound_a: &mut Vec<u32>, bound_b: &mut Vec<u32>) -> Option<Expr> {
    match (a, b) {
        (Expr::Var(v), _) if *v == x && !bound_a.contains(&x) => {
            if b.is_term() && b.free_vars().iter().all(|w| !bound_b.contains(w)) {
                Some(b.clone())
            } else {
                None
            }
        }
        (Expr::Exists(v, a1), Expr::Exists(w, b1)) | (Expr::Forall(v, a1), Expr::Forall(w, b1)) => {
            bound_a.push(*v);
            bound_b.push(*w);
            let r = find_witness(a1, x, b1, bound_a, bound_b);
            bound_a.pop();
            bound_b.pop();
            r
        }
        _ => {
            let (ca, cb) = (a.children(), b.children());
            if ca.len() != cb.len() || std::mem::discriminant(a) != std::mem::discriminant(b) {
                return None;
            }
            ca.into_iter().zip(cb).find_map(|(p, q)| find_witness(p, x, q, bound_a, bound_b))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Justification {
    Premise,
    Axiom(LogicalAxiom),
    /// `minor` proves `A`, `major` proves `A → B`.
    ModusPonens { minor: usize, major: usize },
    Generalization(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub formula: Expr,
    pub justification: Justification,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn conclusion(&self) -> Option<&Expr> {
        self.steps.last().map(|s| &s.formula)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, formula: Expr, justification: Justification) -> usize {
        self.steps.push(Step { formula, justification });
        self.steps.len() - 1
    }

    /// Distinct premise formulas, in order of first use.
    pub fn premises(&self) -> Vec<&Expr> {
        let mut out: Vec<&Expr> = Vec::new();
        for s in &self.steps {
            if s.justification == Justification::Premise && !out.contains(&&s.formula) {
                out.push(&s.formula);
            }
        }
        out
    }

    pub fn encode(&self, coder: &Coder) -> GodelCode {
        let steps: Vec<BigUint> = self
            .steps
            .iter()
            .map(|s| pair(&coder.encode_unchecked(&s.formula).0, &justification_code(&s.justification)))
            .collect();
        GodelCode(encode_sequence(&steps))
    }

    /// Decodes a derivation code; `None` when a step is not a formula or a
    /// justification code is not canonical. Steps are not checked.
    pub fn decode(coder: &Coder, code: &GodelCode) -> Option<Derivation> {
        let mut d = Derivation::default();
        for s in decode_sequence(&code.0) {
            let (f, j) = unpair(&s);
            let formula = coder.decode(&GodelCode(f));
            if !formula.is_formula() {
                return None;
            }
            let (tag, payload) = unpair(&j);
            let justification = match tag.to_u32()? {
                0 if payload == BigUint::from(0u32) => Justification::Premise,
                1 => Justification::Axiom(LogicalAxiom::from_id(payload.to_u32()?)?),
                2 => {
                    let (i, k) = unpair(&payload);
                    Justification::ModusPonens { minor: i.to_usize()?, major: k.to_usize()? }
                }
                3 => Justification::Generalization(payload.to_usize()?),
                _ => return None,
            };
            d.steps.push(Step { formula, justification });
        }
        Some(d)
    }
}

fn justification_code(j: &Justification) -> BigUint {
    let (tag, payload) = match j {
        Justification::Premise => (0u32, BigUint::from(0u32)),
        Justification::Axiom(a) => (1, BigUint::from(a.id())),
        Justification::ModusPonens { minor, major } => (2, pair(&BigUint::from(*minor), &BigUint::from(*major))),
        Justification::Generalization(i) => (3, BigUint::from(*i)),
    };
    pair(&BigUint::from(tag), &payload)
}

/// Checks every step of `d` against the calculus and the theory `s`.
pub fn check_derivation(d: &Derivation, s: &TheoryHandle) -> Result<(), DerivationDefect> {
    let sig = s.coder().signature();
    // Free variables of the premises each step depends on.
    let mut dep_free: Vec<BTreeSet<u32>> = Vec::with_capacity(d.steps.len());
    for (k, st) in d.steps.iter().enumerate() {
        let defect = |reason: String| DerivationDefect { step: k, reason };
        sig.check_formula(&st.formula).map_err(|e| defect(e.to_string()))?;
        let deps = match &st.justification {
            Justification::Premise => {
                if !s.is_axiom(&st.formula) {
                    return Err(defect("not an axiom of the theory".into()));
                }
                st.formula.free_vars()
            }
            Justification::Axiom(ax) => {
                if !ax.matches(&st.formula) {
                    return Err(defect(format!("not an instance of {ax:?}")));
                }
                BTreeSet::new()
            }
            Justification::ModusPonens { minor, major } => {
                if *minor >= k || *major >= k {
                    return Err(defect("modus ponens cites a later step".into()));
                }
                match &d.steps[*major].formula {
                    Expr::Imp(a, b) if a.alpha_eq(&d.steps[*minor].formula) && b.alpha_eq(&st.formula) => {}
                    _ => return Err(defect(format!("steps {minor}, {major} do not yield this formula"))),
                }
                dep_free[*minor].union(&dep_free[*major]).copied().collect()
            }
            Justification::Generalization(i) => {
                if *i >= k {
                    return Err(defect("generalization cites a later step".into()));
                }
                match &st.formula {
                    Expr::Forall(x, a) if a.alpha_eq(&d.steps[*i].formula) => {
                        if dep_free[*i].contains(x) {
                            return Err(defect(format!("v{x} is free in a premise")));
                        }
                    }
                    _ => return Err(defect(format!("not a generalization of step {i}"))),
                }
                dep_free[*i].clone()
            }
        };
        dep_free.push(deps);
    }
    Ok(())
}
