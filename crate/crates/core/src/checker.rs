//! Verification of the expanded model `(M, T)`.
//!
//! Tarski conditions over every sentence coded below the universe:
//! 1. members of `T` are sentences;
//! 2. a variable-free atom (and `⊤`, `⊥`) is in `T` iff it is true in `M`;
//! 3. `¬φ ∈ T` iff `φ ∉ T`;
//! 4. a binary compound is in `T` iff its truth function holds of the
//!    memberships of its parts;
//! 5. `∀x φ ∈ T` iff every `φ(c)` is in `T`, `∃x φ ∈ T` iff some is.
//!
//! Instances coded at or above the universe are skipped and counted. When an
//! existential is in `T`, the matching witness axiom `F_n` is looked up and
//! the disjunct it offers is recorded.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::Coder;
use crate::henkin::HenkinGrid;
use crate::model::FiniteModel;
use crate::omega::OmegaContext;
use crate::syntax::{not, Expr};
use crate::tree::Universe;

pub struct ExpandedModel<'a> {
    pub base: &'a FiniteModel,
    pub truth: BTreeSet<usize>,
    pub universe: &'a Universe,
}

impl<'a> ExpandedModel<'a> {
    pub fn new(base: &'a FiniteModel, truth: impl IntoIterator<Item = usize>, universe: &'a Universe) -> Self {
        ExpandedModel { base, truth: truth.into_iter().collect(), universe }
    }

    /// `N(T(φ))`.
    pub fn holds(&self, code: usize) -> bool {
        self.truth.contains(&code)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub checked: usize,
    pub failed: usize,
    pub skipped: usize,
    /// Codes of each failing instance, the sentence first.
    pub witnesses: Vec<Vec<usize>>,
}

impl ConditionReport {
    fn record(&mut self, ok: bool, codes: Vec<usize>) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            self.witnesses.push(codes);
        }
    }
}

/// How an existential in `T` meets the witness axiom for its matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HenkinRoute {
    pub sentence: usize,
    pub n: usize,
    pub j: u64,
    pub constant: u32,
    /// Code of the witnessing disjunct `ψ_n(c_{nj})`, when below the universe.
    pub disjunct: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TarskiReport {
    pub conditions: BTreeMap<u8, ConditionReport>,
    pub henkin_routes: Vec<HenkinRoute>,
    /// Existentials in `T` whose matrix is not among the built `ψ_n`.
    pub existentials_without_route: usize,
}

impl TarskiReport {
    pub fn passed(&self) -> bool {
        self.conditions.values().all(|c| c.failed == 0)
    }
}

fn henkin_route(em: &ExpandedModel<'_>, coder: &Coder, grid: &HenkinGrid, code: usize, matrix: &Expr) -> Option<HenkinRoute> {
    let canon = matrix.canonicalize_free_to_v0();
    let n = grid.psi.iter().take(grid.built_rows()).position(|p| p.alpha_eq(&canon))?;
    let row = grid.row(n).ok()?;
    let mut fallback = None;
    for cell in row {
        let inst = grid.psi[n].instantiate(0, &Expr::Const(cell.constant));
        let c = coder.encode_unchecked(&inst).to_usize().filter(|&c| c < em.universe.bound());
        let route = HenkinRoute { sentence: code, n, j: cell.j, constant: cell.constant, disjunct: c };
        match c {
            Some(c) if em.holds(c) => return Some(route),
            None if fallback.is_none() => fallback = Some(route),
            _ => {}
        }
    }
    fallback
}

pub fn check_tarski(em: &ExpandedModel<'_>, coder: &Coder, grid: &HenkinGrid) -> TarskiReport {
    let u = em.universe;
    let code_of = |e: &Expr| coder.encode_unchecked(e).to_usize().filter(|&c| c < u.bound());
    let carrier = em.base.elements();
    let mut r = TarskiReport::default();
    let [mut c1, mut c2, mut c3, mut c4, mut c5]: [ConditionReport; 5] = Default::default();
    let mut routes = Vec::new();
    let mut unrouted = 0;

    for &t in &em.truth {
        c1.record(u.is_sentence(t), vec![t]);
    }
    for s in u.sentences() {
        let e = u.expr(s);
        let inside = em.holds(s);
        match e {
            Expr::Top | Expr::Bot => c2.record(inside == (*e == Expr::Top), vec![s]),
            Expr::Pred(..) | Expr::Eq(..) => match em.base.atomic_truth(e) {
                Ok(v) => c2.record(inside == v, vec![s]),
                Err(_) => c2.record(false, vec![s]),
            },
            Expr::Not(a) => {
                let a = code_of(a).expect("subformula codes are smaller");
                c3.record(inside != em.holds(a), vec![s, a]);
            }
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Imp(a, b) => {
                let (a, b) = (code_of(a).expect("smaller"), code_of(b).expect("smaller"));
                let (x, y) = (em.holds(a), em.holds(b));
                let want = match e {
                    Expr::And(..) => x && y,
                    Expr::Or(..) => x || y,
                    _ => !x || y,
                };
                c4.record(inside == want, vec![s, a, b]);
            }
            Expr::Forall(v, body) | Expr::Exists(v, body) => {
                let insts: Option<Vec<usize>> = carrier.iter().map(|&c| code_of(&body.instantiate(*v, &Expr::Const(c)))).collect();
                let Some(insts) = insts else {
                    c5.skipped += 1;
                    continue;
                };
                let universal = matches!(e, Expr::Forall(..));
                let want = if universal { insts.iter().all(|&i| em.holds(i)) } else { insts.iter().any(|&i| em.holds(i)) };
                let mut codes = vec![s];
                codes.extend(&insts);
                c5.record(inside == want, codes);
                if !universal && inside {
                    match henkin_route(em, coder, grid, s, body) {
                        Some(route) => routes.push(route),
                        None => unrouted += 1,
                    }
                }
            }
            _ => {}
        }
    }
    r.conditions = [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5)].into_iter().collect();
    r.henkin_routes = routes;
    r.existentials_without_route = unrouted;
    r
}

/// A sentence outside `T` that is `Γ_n`-provable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionFailure {
    pub sentence: usize,
    pub shown: String,
    pub level: usize,
    /// Rendered steps of the level-0 derivation, when there is one.
    pub derivation: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub n_max: usize,
    pub sentences: usize,
    pub outside_t: usize,
    pub failures: Vec<ReflectionFailure>,
}

impl ReflectionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `Γ_n[α] → α ∈ T` for every sentence below the universe and `n ≤ n_max`.
/// Only sentences outside `T` can fail, so only those are searched.
pub fn check_reflection(em: &ExpandedModel<'_>, ctx: &OmegaContext, n_max: usize) -> ReflectionReport {
    let u = em.universe;
    let sig = ctx.theory().coder().signature();
    let outside: Vec<usize> = u.sentences().filter(|&s| !em.holds(s)).collect();
    let failures: Vec<ReflectionFailure> = outside
        .par_iter()
        .filter_map(|&s| {
            let e = u.expr(s);
            let level = (0..=n_max).find(|&n| ctx.gamma_holds(n, e))?;
            let derivation = if level == 0 {
                ctx.prover()
                    .prove(e)
                    .map(|d| d.steps.iter().map(|st| format!("{} [{:?}]", sig.show(&st.formula), st.justification)).collect())
                    .unwrap_or_default()
            } else {
                Vec::new()
            };
            Some(ReflectionFailure { sentence: s, shown: sig.show(e), level, derivation })
        })
        .collect();
    ReflectionReport { n_max, sentences: u.sentences().count(), outside_t: outside.len(), failures }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct QReport {
    pub bottom_in_t: bool,
    pub levels: Vec<(usize, bool)>,
    /// The least `n` with `Γ_n[⊥]`, if any.
    pub first_failure: Option<usize>,
}

impl QReport {
    pub fn passed(&self) -> bool {
        !self.bottom_in_t && self.first_failure.is_none()
    }
}

/// `⊥ ∉ T` and `¬Γ_n[⊥]` for `n ≤ n_max`.
pub fn check_q(truth: Option<&ExpandedModel<'_>>, ctx: &OmegaContext, n_max: usize) -> QReport {
    let levels = ctx.q_axioms(n_max);
    let first_failure = levels.iter().find(|l| l.1).map(|l| l.0);
    let bottom_in_t = truth.is_some_and(|em| em.truth.iter().any(|&c| *em.universe.expr(c) == Expr::Bot));
    QReport { bottom_in_t, levels, first_failure }
}

/// Agreement of `T`, and of `M` when it satisfies the theory, with every
/// sentence the level-0 search settles.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AgreementReport {
    pub settled: usize,
    pub truth_disagreements: Vec<usize>,
    pub model_checked: bool,
    pub model_disagreements: Vec<usize>,
}

impl AgreementReport {
    pub fn passed(&self) -> bool {
        self.truth_disagreements.is_empty() && self.model_disagreements.is_empty()
    }
}

pub fn check_agreement(em: &ExpandedModel<'_>, ctx: &OmegaContext) -> AgreementReport {
    let u = em.universe;
    let model_checked = em.base.satisfies_all(ctx.theory().axioms()).unwrap_or(false);
    let settled: Vec<(usize, bool)> = u
        .sentences()
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter_map(|s| {
            let e = u.expr(s);
            if ctx.gamma_holds(0, e) {
                Some((s, true))
            } else if ctx.gamma_holds(0, &not(e.clone())) {
                Some((s, false))
            } else {
                None
            }
        })
        .collect();
    let mut r = AgreementReport { settled: settled.len(), model_checked, ..Default::default() };
    for &(s, v) in &settled {
        if em.holds(s) != v {
            r.truth_disagreements.push(s);
        }
        if model_checked && em.base.evaluate(u.expr(s)).ok() != Some(v) {
            r.model_disagreements.push(s);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{omega_context, Bounds, Inputs};

    const SIG: &str = "pred p 1\npred q 1\n";
    const THY: &str = "theory t\n(forall v0 (p v0))\n";
    const MDL: &str = "carrier 0 1\ntable p: (0) (1)\ntable q: (1)\n";

    fn setup(k: usize) -> (Inputs, OmegaContext, Universe) {
        let inputs = Inputs::parse(SIG, THY, MDL).unwrap();
        let bounds = Bounds { universe: k, proof_bound: 512, witness_bound: 64, ..Bounds::default() };
        let ctx = omega_context(&inputs, &bounds).unwrap();
        let u = Universe::new(ctx.theory().coder(), ctx.carrier(), k);
        (inputs, ctx, u)
    }

    fn model_truth(m: &FiniteModel, u: &Universe) -> BTreeSet<usize> {
        u.sentences().filter(|&s| m.evaluate(u.expr(s)) == Ok(true)).collect()
    }

    fn code(ctx: &OmegaContext, s: &str) -> usize {
        let e = crate::parse::formula(ctx.theory().coder().signature(), s).unwrap();
        ctx.theory().coder().encode(&e).unwrap().to_usize().unwrap()
    }

    #[test]
    fn truth_of_the_model_meets_every_condition() {
        let (inputs, ctx, u) = setup(1024);
        let em = ExpandedModel::new(&inputs.model, model_truth(&inputs.model, &u), &u);
        let grid = HenkinGrid::new(Vec::new(), 0);
        let r = check_tarski(&em, ctx.theory().coder(), &grid);
        assert!(r.passed(), "{r:?}");
        assert!(r.conditions.values().all(|c| c.checked > 0));
        assert!(check_reflection(&em, &ctx, 1).passed());
        assert!(check_q(Some(&em), &ctx, 1).passed());
        let a = check_agreement(&em, &ctx);
        assert!(a.passed() && a.model_checked && a.settled > 0);
    }

    #[test]
    fn flipped_memberships_are_caught() {
        let (inputs, ctx, u) = setup(2048);
        let grid = HenkinGrid::new(Vec::new(), 0);
        let coder = ctx.theory().coder();
        let base = model_truth(&inputs.model, &u);

        let q0 = code(&ctx, "(q c0)");
        let mut t = base.clone();
        t.insert(q0);
        let r = check_tarski(&ExpandedModel::new(&inputs.model, t, &u), coder, &grid);
        assert_eq!(r.conditions[&2].witnesses, vec![vec![q0]]);
        assert!(r.conditions[&3].failed > 0);

        let (a, b) = (code(&ctx, "(p c0)"), code(&ctx, "(q c1)"));
        let both = code(&ctx, "(and (p c0) (q c1))");
        assert!(both < u.bound(), "{both}");
        let mut t = base.clone();
        t.remove(&both);
        let r = check_tarski(&ExpandedModel::new(&inputs.model, t, &u), coder, &grid);
        assert!(r.conditions[&4].witnesses.contains(&vec![both, a, b]));

        let all = code(&ctx, "(forall v0 (p v0))");
        let mut t = base.clone();
        t.remove(&all);
        let em = ExpandedModel::new(&inputs.model, t, &u);
        assert!(check_tarski(&em, coder, &grid).conditions[&5].witnesses.iter().any(|w| w[0] == all));
        let refl = check_reflection(&em, &ctx, 0);
        assert_eq!(refl.failures.iter().find(|f| f.sentence == all).map(|f| f.level), Some(0));
        assert!(!refl.failures[0].derivation.is_empty());
        assert!(check_agreement(&em, &ctx).truth_disagreements.contains(&all));
    }

    #[test]
    fn bottom_in_the_truth_set_fails_q() {
        let (inputs, ctx, u) = setup(256);
        let mut t = model_truth(&inputs.model, &u);
        t.insert(code(&ctx, "bot"));
        let r = check_q(Some(&ExpandedModel::new(&inputs.model, t, &u)), &ctx, 1);
        assert!(r.bottom_in_t && r.first_failure.is_none() && !r.passed());
    }

    #[test]
    fn existentials_in_t_find_their_henkin_row() {
        let (inputs, ctx, u) = setup(4096);
        let psi = crate::henkin::enumerate_psi(&ctx, 2);
        let grid = HenkinGrid::new(psi, 1).build(&ctx, 1).unwrap();
        let em = ExpandedModel::new(&inputs.model, model_truth(&inputs.model, &u), &u);
        let r = check_tarski(&em, ctx.theory().coder(), &grid);
        assert!(r.passed());
        assert!(!r.henkin_routes.is_empty());
        for route in &r.henkin_routes {
            assert!(em.holds(route.sentence) && route.n < grid.built_rows());
        }
    }
}
