//! Iterated ω-rule provability.
//!
//! `Γ_0[α]` is bounded provability. `Γ_{n+1}[α]` holds when some formula
//! `ψ(y)` with at most one free variable and code below the witness bound
//! satisfies `Γ_n[ψ(c)]` for every carrier constant `c` and `Γ_0[∀y ψ → α]`.
//! Witnesses are tried in code order; the first that works is reported.
//!
//! A reference model that satisfies every axiom and has the quantifier
//! carrier as its domain refutes any `α` it makes false, at every level.
//! The context uses such a model, when given one, to skip hopeless searches.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::OmegaError;
use crate::kernel::{check_derivation, prove_bounded, Prover, TheoryHandle};
use crate::model::{FiniteModel, RecursiveType};
use crate::syntax::{exists, forall, imp, not, or, Expr};

pub const DEFAULT_LEVEL_CAP: usize = 4;

/// Why `Γ_n[α]` holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Reason {
    Provable,
    /// The interpolant `ψ` and its variable `y`.
    Witness { psi: Expr, var: u32 },
}

pub struct OmegaContext {
    theory: TheoryHandle,
    prover: Prover,
    carrier: Vec<u32>,
    proof_bound: usize,
    witness_bound: u64,
    level_cap: usize,
    witnesses: Arc<Vec<(Expr, u32)>>,
    reference: Option<Arc<FiniteModel>>,
    memo: RwLock<HashMap<(usize, Expr), Option<Reason>>>,
}

impl std::fmt::Debug for OmegaContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OmegaContext")
            .field("theory", &self.theory.name())
            .field("carrier", &self.carrier)
            .field("proof_bound", &self.proof_bound)
            .field("witness_bound", &self.witness_bound)
            .field("filter", &self.reference.is_some())
            .finish()
    }
}

fn witness_list(theory: &TheoryHandle, carrier: &[u32], bound: u64) -> Vec<(Expr, u32)> {
    let carrier = carrier.iter().copied().collect();
    (0..bound)
        .map(|c| theory.coder().decode_u64(c))
        .filter(|e| e.is_formula() && e.constants().is_subset(&carrier))
        .filter_map(|e| {
            let fv = e.free_vars();
            match fv.len() {
                0 => Some((e, 0)),
                1 => {
                    let v = *fv.iter().next().unwrap();
                    Some((e, v))
                }
                _ => None,
            }
        })
        .collect()
}

impl OmegaContext {
    pub fn new(theory: TheoryHandle, carrier: Vec<u32>, proof_bound: usize, witness_bound: u64) -> Result<Self, OmegaError> {
        if carrier.is_empty() {
            return Err(OmegaError::EmptyCarrier);
        }
        if proof_bound == 0 {
            return Err(OmegaError::ZeroBound("proof_bound"));
        }
        if witness_bound == 0 {
            return Err(OmegaError::ZeroBound("witness_bound"));
        }
        let mut carrier = carrier;
        carrier.sort_unstable();
        carrier.dedup();
        let witnesses = Arc::new(witness_list(&theory, &carrier, witness_bound));
        Ok(OmegaContext {
            prover: Prover::new(&theory, proof_bound),
            theory,
            carrier,
            proof_bound,
            witness_bound,
            level_cap: DEFAULT_LEVEL_CAP,
            witnesses,
            reference: None,
            memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn with_level_cap(mut self, cap: usize) -> Self {
        self.level_cap = cap;
        self
    }

    /// Installs `m` as a refutation filter if its domain is the carrier and it
    /// satisfies every axiom; returns whether it was installed.
    pub fn use_reference_model(&mut self, m: Arc<FiniteModel>) -> bool {
        let ok = m.elements() == self.carrier && m.satisfies_all(self.theory.axioms()).unwrap_or(false);
        if ok {
            self.reference = Some(m);
        }
        ok
    }

    pub fn has_reference_model(&self) -> bool {
        self.reference.is_some()
    }

    pub fn reference_model(&self) -> Option<&FiniteModel> {
        self.reference.as_deref()
    }

    /// The same theory and carrier at other bounds; the reference model is kept.
    pub fn with_bounds(&self, proof_bound: usize, witness_bound: u64) -> Result<Self, OmegaError> {
        let mut c = OmegaContext::new(self.theory.clone(), self.carrier.clone(), proof_bound, witness_bound)?;
        c.level_cap = self.level_cap;
        c.reference = self.reference.clone();
        Ok(c)
    }

    /// The same context with the reference model removed.
    pub fn without_reference_model(&self) -> Self {
        OmegaContext {
            theory: self.theory.clone(),
            prover: self.prover.clone(),
            carrier: self.carrier.clone(),
            proof_bound: self.proof_bound,
            witness_bound: self.witness_bound,
            level_cap: self.level_cap,
            witnesses: self.witnesses.clone(),
            reference: None,
            memo: RwLock::new(self.memo.read().expect("memo poisoned").clone()),
        }
    }

    pub fn theory(&self) -> &TheoryHandle {
        &self.theory
    }

    pub fn prover(&self) -> &Prover {
        &self.prover
    }

    pub fn carrier(&self) -> &[u32] {
        &self.carrier
    }

    pub fn proof_bound(&self) -> usize {
        self.proof_bound
    }

    pub fn witness_bound(&self) -> u64 {
        self.witness_bound
    }

    pub fn level_cap(&self) -> usize {
        self.level_cap
    }

    pub fn witness_count(&self) -> usize {
        self.witnesses.len()
    }

    pub fn check_level(&self, n: usize) -> Result<(), OmegaError> {
        if n > self.level_cap {
            Err(OmegaError::LevelAboveCap { n, cap: self.level_cap })
        } else {
            Ok(())
        }
    }

    fn refuted_by_model(&self, a: &Expr) -> bool {
        match &self.reference {
            Some(m) => matches!(m.evaluate(a), Ok(false)),
            None => false,
        }
    }

    pub fn gamma_holds(&self, n: usize, a: &Expr) -> bool {
        self.gamma_reason(n, a).is_some()
    }

    pub fn gamma_reason(&self, n: usize, a: &Expr) -> Option<Reason> {
        if !a.is_formula() || !a.is_closed() {
            return None;
        }
        let key = (n, a.alpha_key());
        if let Some(r) = self.memo.read().expect("memo poisoned").get(&key) {
            return r.clone();
        }
        let r = self.compute(n, a);
        self.memo.write().expect("memo poisoned").entry(key).or_insert(r).clone()
    }

    /// `∀c ∈ carrier: Γ_n[ψ(c)]`.
    fn uniformly(&self, n: usize, psi: &Expr, var: u32) -> bool {
        if psi.is_closed() {
            return self.gamma_holds(n, psi);
        }
        self.carrier.iter().all(|&c| self.gamma_holds(n, &psi.instantiate(var, &Expr::Const(c))))
    }

    fn compute(&self, n: usize, a: &Expr) -> Option<Reason> {
        if self.refuted_by_model(a) {
            return None;
        }
        if n == 0 {
            return self.prover.provable(a).then_some(Reason::Provable);
        }
        let model_ok = |psi: &Expr, var: u32| match &self.reference {
            Some(m) => !matches!(m.evaluate(&forall(var, psi.clone())), Ok(false)),
            None => true,
        };
        self.witnesses
            .par_iter()
            .find_first(|(psi, var)| {
                model_ok(psi, *var)
                    && self.uniformly(n - 1, psi, *var)
                    && self.prover.provable(&imp(forall(*var, psi.clone()), a.clone()))
            })
            .map(|(psi, var)| Reason::Witness { psi: psi.clone(), var: *var })
    }

    /// `Γ_n[⊥]` for `n ≤ n_max`.
    pub fn q_axioms(&self, n_max: usize) -> Vec<(usize, bool)> {
        (0..=n_max).map(|n| (n, self.gamma_holds(n, &Expr::Bot))).collect()
    }

    /// Verifies the closure laws of `Γ` on `samples`, enlarging bounds when an
    /// instance does not close at the current ones.
    pub fn check_gamma_laws(&self, samples: &[Expr], n_max: usize) -> LawReport {
        let sig = self.theory.coder().signature();
        let mut report = LawReport::default();
        let show = |e: &Expr| sig.show(e);
        let samples: Vec<&Expr> = samples.iter().filter(|s| s.is_formula() && s.is_closed()).collect();

        for phi in &samples {
            if let Some(d) = prove_bounded(phi, &self.theory, self.proof_bound) {
                let checked = check_derivation(&d, &self.theory).is_ok();
                let held = checked && self.gamma_holds(0, phi);
                report.push(1, 0, vec![show(phi)], held, held.then_some((self.proof_bound, self.witness_bound)));
            }
        }

        let retry = |need: u64, test: &dyn Fn(&OmegaContext) -> bool| -> Option<(usize, u64)> {
            if test(self) {
                return Some((self.proof_bound, self.witness_bound));
            }
            let mut pb = self.proof_bound;
            let mut wb = self.witness_bound.max(need);
            for _ in 0..3 {
                pb *= 2;
                wb = wb.max(self.witness_bound * 2);
                let ctx = self.with_bounds(pb, wb).ok()?;
                if test(&ctx) {
                    return Some((pb, wb));
                }
                wb *= 2;
            }
            None
        };
        let code_of = |e: &Expr| self.theory.coder().encode_unchecked(e).to_u64().unwrap_or(u64::MAX - 1) + 1;

        for n in 0..n_max {
            for phi in &samples {
                if self.gamma_holds(n, phi) {
                    let closed = retry(code_of(phi), &|c| c.gamma_holds(n + 1, phi));
                    report.push(2, n, vec![show(phi)], closed.is_some(), closed);
                }
            }
        }

        for n in 0..=n_max {
            for a in &samples {
                if !self.gamma_holds(n, a) {
                    continue;
                }
                for b in &samples {
                    let ab = imp((*a).clone(), (*b).clone());
                    if !self.gamma_holds(n, &ab) {
                        continue;
                    }
                    let need = match (self.gamma_reason(n, &ab), self.gamma_reason(n, a)) {
                        (Some(Reason::Witness { psi: p1, var: v1 }), Some(Reason::Witness { psi: p2, var: v2 })) => {
                            let conj = crate::syntax::and(p1.instantiate(v1, &Expr::Var(0)), p2.instantiate(v2, &Expr::Var(0)));
                            code_of(&conj)
                        }
                        _ => 0,
                    };
                    let closed = retry(need, &|c| c.gamma_holds(n, b));
                    report.push(3, n, vec![show(a), show(b)], closed.is_some(), closed);
                }
            }
        }
        report
    }

    /// Tries to eliminate `∃x ψ` against `θ`: every carrier element `z` must
    /// have some `n ≤ n_max` with `Γ_n[θ ∨ ¬ψ(c_z)]`.
    pub fn eliminate_existential(&self, model: &FiniteModel, theta: &Expr, psi: &Expr, n_max: usize) -> Result<Elimination, OmegaError> {
        if !theta.is_closed() || !theta.is_formula() {
            return Err(OmegaError::Shape("a sentence θ"));
        }
        let fv = psi.free_vars();
        if fv.len() != 1 || !psi.is_formula() {
            return Err(OmegaError::Shape("a formula ψ with exactly one free variable"));
        }
        let x = *fv.iter().next().unwrap();
        let mut levels = Vec::new();
        for &z in &self.carrier {
            let inst = or(theta.clone(), not(psi.instantiate(x, &Expr::Const(z))));
            match (0..=n_max).find(|&n| self.gamma_holds(n, &inst)) {
                Some(n) => levels.push((z, n)),
                None => {
                    let model_sound = model.elements() == self.carrier && model.satisfies_all(self.theory.axioms()).unwrap_or(false);
                    let refuted = model_sound && matches!(model.evaluate(&inst), Ok(false));
                    return Ok(if refuted {
                        Elimination::LocallySatisfiable { element: z }
                    } else {
                        Elimination::BoundsExhausted { element: z }
                    });
                }
            }
        }
        let m_prime = levels.iter().map(|l| l.1).max().unwrap_or(0) + 1;
        let target = or(theta.clone(), not(exists(x, psi.clone())));
        let interpolant = or(theta.clone(), not(psi.clone()));
        let need = self.theory.coder().encode_unchecked(&interpolant).to_u64().unwrap_or(u64::MAX - 1) + 1;
        if self.witness_closes(m_prime, &interpolant, x, &target) {
            let witness = Some(interpolant);
            return Ok(Elimination::Eliminated { m_prime, levels, witness, verified_witness_bound: Some(need.max(self.witness_bound)) });
        }
        let mut wb = self.witness_bound;
        let mut verified_at = None;
        let mut witness = None;
        for _ in 0..4 {
            let ctx;
            let c = if wb == self.witness_bound {
                self
            } else {
                ctx = self.with_bounds(self.proof_bound, wb)?;
                &ctx
            };
            if let Some(Reason::Witness { psi, .. }) = c.gamma_reason(m_prime, &target) {
                verified_at = Some(wb);
                witness = Some(psi);
                break;
            }
            wb = (wb * 2).max(need);
        }
        Ok(Elimination::Eliminated { m_prime, levels, witness, verified_witness_bound: verified_at })
    }

    /// Whether `ψ(y)` witnesses `Γ_n[α]`: every carrier instance is
    /// `Γ_{n-1}`-provable and `∀y ψ → α` is provable. The witness bound is not
    /// consulted.
    pub fn witness_closes(&self, n: usize, psi: &Expr, var: u32, alpha: &Expr) -> bool {
        n > 0
            && psi.free_vars().iter().all(|&v| v == var)
            && self.uniformly(n - 1, psi, var)
            && self.prover.provable(&imp(forall(var, psi.clone()), alpha.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Elimination {
    /// `Γ_{m'}[θ ∨ ¬∃x ψ]` with per-element levels; the check of the
    /// conclusion succeeded with `witness` at the recorded witness bound
    /// (`None`: it did not).
    Eliminated { m_prime: usize, levels: Vec<(u32, usize)>, witness: Option<Expr>, verified_witness_bound: Option<u64> },
    /// The model makes `θ ∨ ¬ψ(c_z)` false, so no level can refute `z`.
    LocallySatisfiable { element: u32 },
    /// No refutation of `z` found at these bounds, and the model does not settle it.
    BoundsExhausted { element: u32 },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LawInstance {
    pub law: u8,
    pub n: usize,
    pub formulas: Vec<String>,
    pub held: bool,
    /// `(proof_bound, witness_bound)` at which the instance closed.
    pub closed_at: Option<(usize, u64)>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LawReport {
    pub instances: Vec<LawInstance>,
    pub counterexamples: usize,
}

impl LawReport {
    fn push(&mut self, law: u8, n: usize, formulas: Vec<String>, held: bool, closed_at: Option<(usize, u64)>) {
        if !held {
            self.counterexamples += 1;
        }
        self.instances.push(LawInstance { law, n, formulas, held, closed_at });
    }

    pub fn passed(&self) -> bool {
        self.counterexamples == 0
    }
}

/// The type `n ↦ ¬Γ_n[θ ∨ ¬ψ(x)]`.
pub struct UnprovabilityType<'a> {
    pub ctx: &'a OmegaContext,
    pub theta: Expr,
    pub psi: Expr,
    pub var: u32,
}

impl RecursiveType for UnprovabilityType<'_> {
    fn satisfied(&self, _m: &FiniteModel, n: usize, a: u32) -> bool {
        let inst = or(self.theta.clone(), not(self.psi.instantiate(self.var, &Expr::Const(a))));
        !self.ctx.gamma_holds(n, &inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::Coder;
    use crate::model::parse_model;
    use crate::parse;

    fn setup(axioms: &[&str]) -> (TheoryHandle, Arc<FiniteModel>) {
        let sig = parse::signature("pred p 1\n").unwrap();
        let coder = Arc::new(Coder::new(sig.clone()));
        let ax = axioms.iter().map(|a| parse::formula(&sig, a).unwrap()).collect();
        let t = TheoryHandle::new("T", coder, ax).unwrap();
        let m = parse_model(&sig, "carrier 0 1\ntable p: (0) (1)\n").unwrap();
        (t, Arc::new(m))
    }

    fn f(t: &TheoryHandle, s: &str) -> Expr {
        parse::formula(t.coder().signature(), s).unwrap()
    }

    #[test]
    fn rejects_degenerate_bounds() {
        let (t, _) = setup(&[]);
        assert!(matches!(OmegaContext::new(t.clone(), vec![], 10, 10), Err(OmegaError::EmptyCarrier)));
        assert!(matches!(OmegaContext::new(t.clone(), vec![0], 0, 10), Err(OmegaError::ZeroBound(_))));
        assert!(matches!(OmegaContext::new(t, vec![0], 10, 0), Err(OmegaError::ZeroBound(_))));
    }

    #[test]
    fn omega_rule_proves_universal_over_carrier() {
        let (t, m) = setup(&["(p c0)", "(p c1)"]);
        let ctx = OmegaContext::new(t.clone(), vec![0, 1], 512, 64).unwrap();
        let all = f(&t, "(forall v0 (p v0))");
        assert!(!ctx.gamma_holds(0, &all));
        let r = ctx.gamma_reason(1, &all).expect("one omega step suffices");
        match r {
            Reason::Witness { psi, var } => {
                for c in [0, 1] {
                    assert!(ctx.gamma_holds(0, &psi.instantiate(var, &Expr::Const(c))));
                }
                assert!(ctx.prover().provable(&imp(forall(var, psi), all.clone())));
            }
            Reason::Provable => panic!("not provable at level 0"),
        }
        let mut filtered = ctx.with_bounds(512, 64).unwrap();
        assert!(filtered.use_reference_model(m));
        assert!(filtered.gamma_holds(1, &all));
        assert!(!filtered.gamma_holds(3, &Expr::Bot));
    }

    #[test]
    fn filter_agrees_with_plain_search() {
        let (t, m) = setup(&["(p c0)"]);
        let plain = OmegaContext::new(t.clone(), vec![0, 1], 256, 40).unwrap();
        let mut filtered = plain.with_bounds(256, 40).unwrap();
        assert!(filtered.use_reference_model(m));
        let samples: Vec<Expr> = (0..60u64)
            .map(|c| t.coder().decode_u64(c))
            .filter(|e| e.is_formula() && e.is_closed() && e.constants().iter().all(|&c| c < 2))
            .collect();
        assert!(samples.len() > 10);
        for n in 0..=2 {
            for s in &samples {
                assert_eq!(plain.gamma_holds(n, s), filtered.gamma_holds(n, s), "level {n}: {:?}", s);
            }
        }
    }

    #[test]
    fn filter_requires_a_model_of_the_theory() {
        let (t, m) = setup(&["(not (p c0))"]);
        let mut ctx = OmegaContext::new(t, vec![0, 1], 64, 16).unwrap();
        assert!(!ctx.use_reference_model(m.clone()));
        let (t, _) = setup(&[]);
        let mut ctx2 = OmegaContext::new(t, vec![0, 1, 2], 64, 16).unwrap();
        assert!(!ctx2.use_reference_model(m));
        assert!(!ctx.has_reference_model() && !ctx2.has_reference_model());
    }

    #[test]
    fn levels_are_monotone_and_consistent() {
        let (t, _) = setup(&["(forall v0 (p v0))"]);
        let ctx = OmegaContext::new(t.clone(), vec![0, 1], 256, 32).unwrap();
        assert_eq!(ctx.q_axioms(2), vec![(0, false), (1, false), (2, false)]);
        for c in 0..48u64 {
            let e = t.coder().decode_u64(c);
            if !(e.is_formula() && e.is_closed()) {
                continue;
            }
            for n in 0..2 {
                if ctx.gamma_holds(n, &e) {
                    assert!(ctx.gamma_holds(n + 1, &e), "{:?} at {n}", e);
                }
            }
        }
        let inconsistent = OmegaContext::new(setup(&["bot"]).0, vec![0], 64, 8).unwrap();
        assert_eq!(inconsistent.q_axioms(1), vec![(0, true), (1, true)]);
    }

    #[test]
    fn gamma_laws_hold_on_samples() {
        let (t, m) = setup(&["(p c0)", "(p c1)"]);
        let mut ctx = OmegaContext::new(t.clone(), vec![0, 1], 512, 64).unwrap();
        ctx.use_reference_model(m);
        let samples = vec![
            f(&t, "(p c0)"),
            f(&t, "(forall v0 (p v0))"),
            f(&t, "(imp (forall v0 (p v0)) (p c1))"),
            f(&t, "(exists v0 (p v0))"),
            f(&t, "(not (p c0))"),
        ];
        let report = ctx.check_gamma_laws(&samples, 1);
        assert!(report.passed(), "{:?}", report);
        assert!(report.instances.iter().any(|i| i.law == 1));
        assert!(report.instances.iter().any(|i| i.law == 2));
        assert!(report.instances.iter().any(|i| i.law == 3 && i.n == 1));
    }

    #[test]
    fn existential_elimination() {
        let (t, m) = setup(&["(p c0)", "(p c1)"]);
        let ctx = OmegaContext::new(t.clone(), vec![0, 1], 512, 64).unwrap();
        let psi = f(&t, "(not (p v0))");
        match ctx.eliminate_existential(&m, &Expr::Bot, &psi, 2).unwrap() {
            Elimination::Eliminated { m_prime, levels, witness, verified_witness_bound } => {
                assert_eq!(m_prime, 1);
                assert_eq!(levels, vec![(0, 0), (1, 0)]);
                assert!(verified_witness_bound.is_some());
                let target = f(&t, "(or bot (not (exists v0 (not (p v0)))))");
                assert!(ctx.witness_closes(1, &witness.unwrap(), 0, &target));
            }
            other => panic!("{other:?}"),
        }
        let psi = f(&t, "(p v0)");
        assert_eq!(ctx.eliminate_existential(&m, &Expr::Bot, &psi, 1).unwrap(), Elimination::LocallySatisfiable { element: 0 });
        assert!(ctx.eliminate_existential(&m, &Expr::Bot, &f(&t, "(p c0)"), 1).is_err());
    }

    #[test]
    fn unprovability_type_is_realized_where_elimination_fails() {
        let (t, m) = setup(&["(p c0)", "(p c1)"]);
        let ctx = OmegaContext::new(t.clone(), vec![0, 1], 256, 32).unwrap();
        let ty = UnprovabilityType { ctx: &ctx, theta: Expr::Bot, psi: f(&t, "(p v0)"), var: 0 };
        assert_eq!(crate::model::saturation_witness(&m, &ty, 1), Some(0));
        let ty = UnprovabilityType { ctx: &ctx, theta: Expr::Bot, psi: f(&t, "(not (p v0))"), var: 0 };
        assert_eq!(crate::model::saturation_witness(&m, &ty, 1), None);
    }
}
