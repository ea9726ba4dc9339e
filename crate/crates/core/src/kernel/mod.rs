//! Hilbert-style predicate calculus, theories, and bounded proof search.
//!
//! The calculus has the logical axioms of [`LogicalAxiom`] with modus ponens
//! and generalization. Proof search runs a deterministic tableau whose size is
//! capped by a budget of rule applications; a closed tableau is turned into a
//! checked Hilbert derivation on request. Scheme instances are valid formulas,
//! so the search only loads the explicit axioms of a theory.

mod derivation;
mod tableau;
pub mod taut;
mod theory;

pub use derivation::{check_derivation, Derivation, Justification, LogicalAxiom, Step};
pub use theory::{parse_theory, render_theory, Scheme, TheoryHandle};

use crate::syntax::{not, Expr};
use tableau::{refute, Outcome, Prepared};

/// Result of one bounded search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Search {
    Found,
    /// Every branch saturated with one left open: no proof exists in this calculus fragment.
    Saturated,
    OutOfBudget,
}

/// A theory with its axioms preloaded into a tableau.
#[derive(Clone)]
pub struct Prover {
    prepared: Prepared,
    budget: usize,
}

impl Prover {
    pub fn new(theory: &TheoryHandle, budget: usize) -> Self {
        Prover { prepared: Prepared::new(theory.axioms()), budget }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Whether the axioms alone close the tableau before any split.
    pub fn trivially_inconsistent(&self) -> bool {
        self.prepared.axioms_closed()
    }

    pub fn search(&self, goal: &Expr) -> Search {
        if !goal.is_formula() || !goal.is_closed() {
            return Search::Saturated;
        }
        match refute(&self.prepared, &[not(goal.clone())], self.budget) {
            Outcome::Closed(_) => Search::Found,
            Outcome::Open => Search::Saturated,
            Outcome::Exhausted => Search::OutOfBudget,
        }
    }

    pub fn provable(&self, goal: &Expr) -> bool {
        self.search(goal) == Search::Found
    }

    pub fn prove(&self, goal: &Expr) -> Option<Derivation> {
        if !goal.is_formula() || !goal.is_closed() {
            return None;
        }
        let neg = not(goal.clone());
        match refute(&self.prepared, std::slice::from_ref(&neg), self.budget) {
            Outcome::Closed(r) => Some(r.derivation(&[neg], goal)),
            _ => None,
        }
    }
}

/// A derivation of the closed `goal` from `s`, if the search closes within `bound` rule applications.
pub fn prove_bounded(goal: &Expr, s: &TheoryHandle, bound: usize) -> Option<Derivation> {
    Prover::new(s, bound).prove(goal)
}

/// A derivation of `⊥` from the sentences `gamma`, if one is found within `bound`.
pub fn refute_bounded(gamma: &[Expr], bound: usize) -> Option<Derivation> {
    match refute(&Prepared::new(gamma), &[], bound) {
        Outcome::Closed(r) => Some(r.derivation(&[], &Expr::Bot)),
        _ => None,
    }
}

/// False when `gamma` is refuted: by the propositional skeleton, or by the
/// tableau within `bound` rule applications.
pub fn is_consistent_bounded(gamma: &[Expr], bound: usize) -> bool {
    let skeleton = taut::skeleton_satisfiable(gamma);
    let outcome = refute(&Prepared::new(gamma), &[], bound);
    if !skeleton {
        debug_assert!(!matches!(outcome, Outcome::Open), "tableau saturated on a propositionally unsatisfiable set");
        return false;
    }
    !matches!(outcome, Outcome::Closed(_))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::coding::Coder;
    use crate::parse;
    use crate::syntax::Signature;

    fn theory(axioms: &[&str]) -> TheoryHandle {
        let sig = parse::signature("pred p 0\npred q 0\npred r 1\npred s 1\nfun f 1\nequality\n").unwrap();
        let coder = Arc::new(Coder::new(sig));
        let ax = axioms.iter().map(|a| parse::formula(coder.signature(), a).unwrap()).collect();
        TheoryHandle::new("T", coder, ax).unwrap()
    }

    fn f(t: &TheoryHandle, src: &str) -> Expr {
        parse::formula(t.coder().signature(), src).unwrap()
    }

    fn proves(t: &TheoryHandle, goal: &str) -> bool {
        let g = f(t, goal);
        match prove_bounded(&g, t, 4096) {
            Some(d) => {
                check_derivation(&d, t).unwrap_or_else(|e| panic!("{goal}: {e}"));
                assert!(d.conclusion().unwrap().alpha_eq(&g));
                true
            }
            None => false,
        }
    }

    #[test]
    fn axiom_and_modus_ponens() {
        let t = theory(&["p", "(imp p q)"]);
        assert!(proves(&t, "p"));
        assert!(proves(&t, "q"));
        assert!(!proves(&t, "(not q)"));
        let t = theory(&["p"]);
        assert!(!proves(&t, "q"));
        assert_eq!(Prover::new(&t, 4096).search(&f(&t, "q")), Search::Saturated);
    }

    #[test]
    fn quantifier_reasoning() {
        let t = theory(&["(forall v0 (r v0))"]);
        assert!(proves(&t, "(r c0)"));
        assert!(proves(&t, "(exists v1 (r v1))"));
        assert!(proves(&t, "(not (exists v0 (not (r v0))))"));
        assert!(!proves(&t, "(s c0)"));
        let t = theory(&["(forall v0 (imp (r v0) (s v0)))", "(exists v0 (r v0))"]);
        assert!(proves(&t, "(exists v0 (s v0))"));
        assert!(!proves(&t, "(forall v0 (s v0))"));
        let t = theory(&[]);
        assert!(proves(&t, "(forall v0 (or (r v0) (not (r v0))))"));
        assert!(proves(&t, "(imp (forall v0 (r v0)) (exists v0 (r v0)))"));
        assert!(proves(&t, "(imp (exists v0 (forall v1 (= v0 v1))) (forall v1 (exists v0 (= v0 v1))))"));
        assert!(!proves(&t, "(imp (exists v0 (r v0)) (forall v0 (r v0)))"));
    }

    #[test]
    fn equality_reasoning() {
        let t = theory(&["(= c0 c1)", "(r c0)"]);
        assert!(proves(&t, "(r c1)"));
        assert!(proves(&t, "(= c1 c0)"));
        let t = theory(&["(= c1 c0)", "(not (r c0))"]);
        assert!(proves(&t, "(not (r c1))"));
        let t = theory(&["(= (f c0) c1)", "(r c1)"]);
        assert!(proves(&t, "(r (f c0))"));
        let t = theory(&["(= c0 (f c0))", "(not (s c0))"]);
        assert!(proves(&t, "(not (s (f (f c0))))"));
        assert!(proves(&theory(&[]), "(= c2 c2)"));
        assert!(!proves(&theory(&[]), "(= c2 c3)"));
    }

    #[test]
    fn inconsistent_theory_proves_everything() {
        let t = theory(&["bot"]);
        assert!(proves(&t, "q"));
        assert!(Prover::new(&t, 10).trivially_inconsistent());
        let t = theory(&["(forall v0 (r v0))", "(exists v0 (not (r v0)))"]);
        assert!(proves(&t, "bot"));
    }

    #[test]
    fn consistency() {
        let t = theory(&[]);
        let g = |s: &str| f(&t, s);
        assert!(!is_consistent_bounded(&[g("p"), g("(not p)")], 100));
        assert!(is_consistent_bounded(&[g("p"), g("q")], 1));
        assert!(is_consistent_bounded(&[g("p"), g("q")], 10_000));
        assert!(!is_consistent_bounded(&[g("(forall v0 (r v0))"), g("(not (r c3))")], 100));
        let d = refute_bounded(&[g("(forall v0 (r v0))"), g("(not (r c3))")], 100).unwrap();
        let as_theory = theory(&["(forall v0 (r v0))", "(not (r c3))"]);
        check_derivation(&d, &as_theory).unwrap();
        assert_eq!(d.conclusion(), Some(&Expr::Bot));
    }

    #[test]
    fn bound_is_monotone_and_result_stable() {
        let t = theory(&["(forall v0 (imp (r v0) (s v0)))", "(r c0)", "(or p q)", "(imp p (s c1))", "(imp q (s c1))"]);
        let goal = f(&t, "(and (s c0) (s c1))");
        let mut first: Option<Derivation> = None;
        for b in [1, 2, 5, 10, 20, 40, 80, 160, 1000] {
            match (prove_bounded(&goal, &t, b), &first) {
                (Some(d), None) => first = Some(d),
                (Some(d), Some(prev)) => assert_eq!(&d, prev),
                (None, Some(_)) => panic!("lost proof at bound {b}"),
                (None, None) => {}
            }
        }
        assert!(first.is_some());
    }

    #[test]
    fn unused_signature_symbols_are_harmless() {
        let sig = Signature::from_arities(&[("p", 0)], &[], false).unwrap();
        let coder = Arc::new(Coder::new(sig));
        let t = TheoryHandle::new("E", coder, vec![]).unwrap();
        assert!(prove_bounded(&Expr::Top, &t, 10).is_some());
        assert!(prove_bounded(&Expr::Bot, &t, 10).is_none());
    }
}
