//! The axiom set `A_M`, the tree `B_M` of truth assignments, and bounded
//! path search.
//!
//! A truth assignment is a bit string indexed by codes. It is a node of
//! `B_M` when
//! 1. only codes of sentences carry 1,
//! 2. every member of `A_M` below its length carries 1,
//! 3. `σ` and `¬σ` below its length carry complementary bits,
//! 4. for every derivation coded below its length whose premises carry 1,
//!    every sentence step below its length carries 1.
//!
//! Sentences are closed formulas whose constants lie in the carrier.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::{Coder, GodelCode};
use crate::error::TreeError;
use crate::henkin::HenkinGrid;
use crate::kernel::{check_derivation, is_consistent_bounded, Derivation, Justification, TheoryHandle};
use crate::model::FiniteModel;
use crate::omega::OmegaContext;
use crate::syntax::{not, Expr};

/// A derivation coded below the universe, reduced to the codes it relates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HornRule {
    pub code: usize,
    pub premises: Vec<usize>,
    pub conclusions: Vec<usize>,
}

/// Per-code syntax facts for all codes below a bound.
pub struct Universe {
    bound: usize,
    exprs: Vec<Expr>,
    sentence: Vec<bool>,
    negation: Vec<Option<usize>>,
    negated: Vec<Option<usize>>,
    rules: Vec<HornRule>,
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Universe").field("bound", &self.bound).field("rules", &self.rules.len()).finish()
    }
}

fn small(code: &GodelCode, bound: usize) -> Option<usize> {
    code.to_usize().filter(|&c| c < bound)
}

impl Universe {
    pub fn new(coder: &Arc<Coder>, carrier: &[u32], bound: usize) -> Self {
        let carrier: std::collections::BTreeSet<u32> = carrier.iter().copied().collect();
        let exprs: Vec<Expr> = (0..bound as u64).into_par_iter().map(|c| coder.decode_u64(c)).collect();
        let sentence: Vec<bool> = exprs.iter().map(|e| e.is_formula() && e.is_sentence_over(&carrier)).collect();
        let negation: Vec<Option<usize>> = exprs
            .iter()
            .zip(&sentence)
            .map(|(e, &s)| if s { small(&coder.encode_unchecked(&not(e.clone())), bound) } else { None })
            .collect();
        let mut negated = vec![None; bound];
        for (c, n) in negation.iter().enumerate() {
            if let Some(n) = n {
                negated[*n] = Some(c);
            }
        }
        let rules = (0..bound)
            .into_par_iter()
            .filter_map(|d| horn_rule(coder, d, bound, &sentence))
            .collect();
        Universe { bound, exprs, sentence, negation, negated, rules }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn expr(&self, code: usize) -> &Expr {
        &self.exprs[code]
    }

    pub fn is_sentence(&self, code: usize) -> bool {
        code < self.bound && self.sentence[code]
    }

    /// The code of `¬σ`, when it is below the bound.
    pub fn negation(&self, code: usize) -> Option<usize> {
        self.negation.get(code).copied().flatten()
    }

    /// `τ` when `code` is the code of `¬τ` for a sentence `τ`.
    pub fn negated(&self, code: usize) -> Option<usize> {
        self.negated.get(code).copied().flatten()
    }

    pub fn rules(&self) -> &[HornRule] {
        &self.rules
    }

    pub fn sentences(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.bound).filter(|&c| self.sentence[c])
    }
}

fn horn_rule(coder: &Arc<Coder>, d: usize, bound: usize, sentence: &[bool]) -> Option<HornRule> {
    let der = Derivation::decode(coder, &GodelCode::from_u64(d as u64))?;
    if der.is_empty() {
        return None;
    }
    let premises: Vec<Expr> = der.premises().into_iter().cloned().collect();
    if premises.iter().any(|p| !p.is_closed()) {
        return None;
    }
    let theory = TheoryHandle::new("premises", coder.clone(), premises.clone()).ok()?;
    check_derivation(&der, &theory).ok()?;
    let code_of = |e: &Expr| small(&coder.encode_unchecked(e), bound);
    let mut pcodes: Vec<usize> = premises.iter().map(&code_of).collect::<Option<_>>()?;
    if pcodes.iter().any(|&c| !sentence[c]) {
        return None;
    }
    pcodes.sort_unstable();
    pcodes.dedup();
    let mut conclusions: Vec<usize> = der
        .steps
        .iter()
        .filter(|s| s.justification != Justification::Premise)
        .filter_map(|s| code_of(&s.formula))
        .filter(|&c| sentence[c])
        .collect();
    conclusions.sort_unstable();
    conclusions.dedup();
    Some(HornRule { code: d, premises: pcodes, conclusions })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Provable,
    Witness { n: usize },
}

/// `A_M` below a universe bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomSetAM {
    pub universe: usize,
    pub members: BTreeMap<usize, Provenance>,
}

impl AxiomSetAM {
    pub fn contains(&self, code: usize) -> bool {
        self.members.contains_key(&code)
    }

    pub fn sentences(&self, u: &Universe) -> Vec<Expr> {
        self.members.keys().map(|&c| u.expr(c).clone()).collect()
    }
}

/// Members: sentences `Γ_0`-provable at the context's bound, and each built
/// `F_n` whose code lies below the universe.
pub fn build_am(ctx: &OmegaContext, grid: &HenkinGrid, u: &Universe) -> AxiomSetAM {
    let provable: Vec<usize> = u.sentences().collect::<Vec<_>>().into_par_iter().filter(|&c| ctx.gamma_holds(0, u.expr(c))).collect();
    let mut members: BTreeMap<usize, Provenance> = provable.into_iter().map(|c| (c, Provenance::Provable)).collect();
    for n in 0..grid.built_rows() {
        if let Ok(f) = grid.build_f(ctx, n) {
            if let Some(c) = small(&ctx.theory().coder().encode_unchecked(&f), u.bound) {
                members.entry(c).or_insert(Provenance::Witness { n });
            }
        }
    }
    AxiomSetAM { universe: u.bound, members }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthAssignment {
    pub bits: Vec<bool>,
}

impl TruthAssignment {
    pub fn zeros(length: usize) -> Self {
        TruthAssignment { bits: vec![false; length] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, code: usize) -> bool {
        self.bits.get(code).copied().unwrap_or(false)
    }

    pub fn prefix(&self, length: usize) -> TruthAssignment {
        TruthAssignment { bits: self.bits[..length.min(self.bits.len())].to_vec() }
    }

    pub fn ones(&self) -> Vec<usize> {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(c, _)| c).collect()
    }

    pub fn run_lengths(&self) -> Vec<(bool, usize)> {
        let mut out: Vec<(bool, usize)> = Vec::new();
        for &b in &self.bits {
            match out.last_mut() {
                Some((v, n)) if *v == b => *n += 1,
                _ => out.push((b, 1)),
            }
        }
        out
    }

    pub fn from_run_lengths(runs: &[(bool, usize)]) -> Self {
        TruthAssignment { bits: runs.iter().flat_map(|&(b, n)| std::iter::repeat_n(b, n)).collect() }
    }
}

/// The clause a node check failed, with the codes involved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: u8,
    pub codes: Vec<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {} at {:?}", self.clause, self.codes)
    }
}

/// The first violated clause, if any; `None` means `t` is a node.
pub fn node_violation(t: &TruthAssignment, am: &AxiomSetAM, u: &Universe) -> Option<Violation> {
    let len = t.len();
    assert!(len <= u.bound, "assignment longer than the universe");
    for c in 0..len {
        if t.bits[c] && !u.sentence[c] {
            return Some(Violation { clause: 1, codes: vec![c] });
        }
    }
    for &c in am.members.keys().take_while(|&&c| c < len) {
        if !t.bits[c] {
            return Some(Violation { clause: 2, codes: vec![c] });
        }
    }
    for c in 0..len {
        if let Some(n) = u.negation(c).filter(|&n| n < len) {
            if t.bits[c] == t.bits[n] {
                return Some(Violation { clause: 3, codes: vec![c, n] });
            }
        }
    }
    for r in u.rules.iter().take_while(|r| r.code < len) {
        if r.premises.iter().all(|&p| t.bits[p]) {
            if let Some(&c) = r.conclusions.iter().find(|&&c| c < len && !t.bits[c]) {
                return Some(Violation { clause: 4, codes: vec![r.code, c] });
            }
        }
    }
    None
}

pub fn is_node(t: &TruthAssignment, am: &AxiomSetAM, u: &Universe) -> bool {
    node_violation(t, am, u).is_none()
}

/// Why a bit of a constructed node has its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitReason {
    NotSentence,
    Seed,
    AxiomSet,
    Complement(usize),
    Derivation(usize),
    Choice,
}

/// How free bits are chosen.
#[derive(Clone, Copy, Debug)]
pub enum Preference<'a> {
    /// The lower-coded sentence of each complementary pair gets 1; a sentence
    /// whose negation is out of range gets 0.
    LowerFirst,
    /// The model's truth value.
    Model(&'a FiniteModel),
}

impl Preference<'_> {
    fn bit(&self, u: &Universe, code: usize, len: usize) -> bool {
        match self {
            Preference::LowerFirst => u.negation(code).is_some_and(|n| n < len),
            Preference::Model(m) => m.evaluate(u.expr(code)).unwrap_or(true),
        }
    }
}

struct Solver<'a> {
    u: &'a Universe,
    len: usize,
    val: Vec<Option<bool>>,
    why: Vec<Option<BitReason>>,
    trail: Vec<usize>,
    watch: Vec<Vec<usize>>,
    missing: Vec<usize>,
    active: Vec<usize>,
}

impl<'a> Solver<'a> {
    fn new(u: &'a Universe, len: usize) -> Self {
        let active: Vec<usize> = (0..u.rules.len()).filter(|&r| u.rules[r].code < len && u.rules[r].premises.iter().all(|&p| p < len)).collect();
        let mut watch = vec![Vec::new(); len];
        let mut missing = vec![usize::MAX; u.rules.len()];
        for &r in &active {
            missing[r] = u.rules[r].premises.len();
            for &p in &u.rules[r].premises {
                watch[p].push(r);
            }
        }
        Solver { u, len, val: vec![None; len], why: vec![None; len], trail: Vec::new(), watch, missing, active }
    }

    fn assign(&mut self, code: usize, v: bool, reason: BitReason) -> Result<(), usize> {
        let mut queue = vec![(code, v, reason)];
        while let Some((c, v, why)) = queue.pop() {
            match self.val[c] {
                Some(x) if x == v => continue,
                Some(_) => return Err(c),
                None => {}
            }
            if v && !self.u.sentence[c] {
                return Err(c);
            }
            self.val[c] = Some(v);
            self.why[c] = Some(why);
            self.trail.push(c);
            if let Some(n) = self.u.negation(c).filter(|&n| n < self.len) {
                queue.push((n, !v, BitReason::Complement(c)));
            }
            if let Some(t) = self.u.negated(c) {
                queue.push((t, !v, BitReason::Complement(c)));
            }
            if v {
                for k in 0..self.watch[c].len() {
                    let r = self.watch[c][k];
                    self.missing[r] -= 1;
                    if self.missing[r] == 0 {
                        let rule = &self.u.rules[r];
                        for &concl in rule.conclusions.iter().filter(|&&x| x < self.len) {
                            queue.push((concl, true, BitReason::Derivation(rule.code)));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let c = self.trail.pop().unwrap();
            if self.val[c] == Some(true) {
                for &r in &self.watch[c] {
                    self.missing[r] += 1;
                }
            }
            self.val[c] = None;
            self.why[c] = None;
        }
    }

    fn fire_unconditional(&mut self) -> Result<(), usize> {
        let empty: Vec<usize> = self.active.iter().copied().filter(|&r| self.u.rules[r].premises.is_empty()).collect();
        for r in empty {
            let rule = &self.u.rules[r];
            let (code, concl) = (rule.code, rule.conclusions.clone());
            let len = self.len;
            for c in concl.into_iter().filter(|&c| c < len) {
                self.assign(c, true, BitReason::Derivation(code))?;
            }
        }
        Ok(())
    }
}

/// A constructed node with the reason for each bit.
#[derive(Clone, Debug)]
pub struct Closure {
    pub node: TruthAssignment,
    pub reasons: Vec<BitReason>,
    pub backtracks: usize,
}

pub const BACKTRACK_LIMIT: usize = 1 << 20;

/// Builds a node of length `k`: zeros on non-sentences, `A_M` and `seed`
/// imposed, closure under derivations coded below `k`, then the free pairs
/// resolved in code order, preferred bit first, backtracking on conflict.
pub fn k_closure(k: usize, seed: &[(usize, bool)], am: &AxiomSetAM, u: &Universe, pref: Preference<'_>) -> Result<Closure, TreeError> {
    assert!(k <= u.bound, "length beyond the universe");
    let mut s = Solver::new(u, k);
    let no_node = |clause: &str| TreeError::NoNode { length: k, clause: clause.to_string() };
    for c in 0..k {
        if !u.sentence[c] {
            s.assign(c, false, BitReason::NotSentence).map_err(|_| no_node("1"))?;
        }
    }
    for &c in am.members.keys().take_while(|&&c| c < k) {
        s.assign(c, true, BitReason::AxiomSet).map_err(|_| no_node("2"))?;
    }
    for &(c, v) in seed {
        if c < k {
            s.assign(c, v, BitReason::Seed).map_err(|_| TreeError::InconsistentSeed(c))?;
        }
    }
    s.fire_unconditional().map_err(|_| no_node("4"))?;

    let roots: Vec<usize> = (0..k).filter(|&c| u.sentence[c] && u.negated(c).is_none()).collect();
    let mut stack: Vec<(usize, usize, bool)> = Vec::new();
    let mut backtracks = 0;
    let mut i = 0;
    while i < roots.len() {
        let r = roots[i];
        if s.val[r].is_some() {
            i += 1;
            continue;
        }
        let first = pref.bit(u, r, k);
        let mark = s.trail.len();
        let mut placed = false;
        for (second, v) in [(false, first), (true, !first)] {
            if s.assign(r, v, BitReason::Choice).is_ok() {
                stack.push((i, mark, second));
                placed = true;
                break;
            }
            s.undo(mark);
        }
        if placed {
            i += 1;
            continue;
        }
        loop {
            backtracks += 1;
            if backtracks > BACKTRACK_LIMIT {
                return Err(TreeError::BudgetExhausted(k));
            }
            let Some((j, mark, second)) = stack.pop() else {
                return Err(no_node("3/4"));
            };
            s.undo(mark);
            if second {
                continue;
            }
            let alt = !pref.bit(u, roots[j], k);
            if s.assign(roots[j], alt, BitReason::Choice).is_ok() {
                stack.push((j, mark, true));
                i = j + 1;
                break;
            }
            s.undo(mark);
        }
    }
    let node = TruthAssignment { bits: s.val.iter().map(|v| v.unwrap_or(false)).collect() };
    let reasons = s.why.iter().map(|w| w.unwrap_or(BitReason::Choice)).collect();
    if let Some(v) = node_violation(&node, am, u) {
        return Err(no_node(&v.to_string()));
    }
    Ok(Closure { node, reasons, backtracks })
}

/// A node of full length `u.bound()` after confirming `A_M` is not refuted
/// within `proof_bound`.
pub fn find_path(am: &AxiomSetAM, u: &Universe, pref: Preference<'_>, proof_bound: usize) -> Result<Closure, TreeError> {
    if !is_consistent_bounded(&am.sentences(u), proof_bound) {
        return Err(TreeError::InconsistentAxioms);
    }
    k_closure(u.bound, &[], am, u, pref)
}

pub fn extract_t(p: &TruthAssignment) -> Vec<usize> {
    p.ones()
}

/// Properties of an extracted truth set below the universe.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthSetReport {
    pub members: usize,
    pub inconsistent_pairs: Vec<(usize, usize)>,
    pub incomplete_pairs: Vec<(usize, usize)>,
    pub contains_bottom: bool,
    pub non_sentences: Vec<usize>,
    pub unclosed: Vec<(usize, usize)>,
    pub missing_axioms: Vec<usize>,
}

impl TruthSetReport {
    pub fn passed(&self) -> bool {
        self.inconsistent_pairs.is_empty()
            && self.incomplete_pairs.is_empty()
            && !self.contains_bottom
            && self.non_sentences.is_empty()
            && self.unclosed.is_empty()
            && self.missing_axioms.is_empty()
    }
}

pub fn verify_truth_set(t: &[usize], am: &AxiomSetAM, u: &Universe) -> TruthSetReport {
    let set: std::collections::BTreeSet<usize> = t.iter().copied().collect();
    let mut r = TruthSetReport { members: set.len(), ..Default::default() };
    for c in u.sentences() {
        if let Some(n) = u.negation(c) {
            match (set.contains(&c), set.contains(&n)) {
                (true, true) => r.inconsistent_pairs.push((c, n)),
                (false, false) => r.incomplete_pairs.push((c, n)),
                _ => {}
            }
        }
    }
    r.contains_bottom = t.iter().any(|&c| c < u.bound && *u.expr(c) == Expr::Bot);
    r.non_sentences = t.iter().copied().filter(|&c| !u.is_sentence(c)).collect();
    for rule in &u.rules {
        if rule.premises.iter().all(|p| set.contains(p)) {
            for &c in &rule.conclusions {
                if !set.contains(&c) {
                    r.unclosed.push((rule.code, c));
                }
            }
        }
    }
    r.missing_axioms = am.members.keys().copied().filter(|c| !set.contains(c)).collect();
    r
}

/// The path artifact: run-length-encoded bits and the reason for every bit
/// that was not a free choice or a non-sentence zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathArtifact {
    pub universe: usize,
    pub bits: Vec<(bool, usize)>,
    pub provenance: Vec<(usize, BitReason)>,
}

impl PathArtifact {
    pub fn new(c: &Closure) -> Self {
        let provenance = c
            .reasons
            .iter()
            .enumerate()
            .filter(|(_, r)| !matches!(r, BitReason::NotSentence | BitReason::Choice))
            .map(|(k, r)| (k, *r))
            .collect();
        PathArtifact { universe: c.node.len(), bits: c.node.run_lengths(), provenance }
    }

    pub fn assignment(&self) -> TruthAssignment {
        TruthAssignment::from_run_lengths(&self.bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::LogicalAxiom;
    use crate::model::parse_model;
    use crate::parse;

    fn fixture(axioms: &[&str], bound: usize) -> (OmegaContext, Universe, AxiomSetAM) {
        let sig = parse::signature("pred p 0\npred q 0\n").unwrap();
        let coder = Arc::new(Coder::new(sig.clone()));
        let ax = axioms.iter().map(|a| parse::formula(&sig, a).unwrap()).collect();
        let t = TheoryHandle::new("T", coder.clone(), ax).unwrap();
        let ctx = OmegaContext::new(t, vec![0], 512, 16).unwrap();
        let u = Universe::new(&coder, &[0], bound);
        let psi = crate::henkin::enumerate_psi(&ctx, 1);
        assert!(psi.is_empty());
        let grid = HenkinGrid::new(psi, 0);
        let am = build_am(&ctx, &grid, &u);
        (ctx, u, am)
    }

    fn code(ctx: &OmegaContext, s: &str) -> usize {
        let e = parse::formula(ctx.theory().coder().signature(), s).unwrap();
        ctx.theory().coder().encode(&e).unwrap().to_usize().unwrap()
    }

    #[test]
    fn vacuous_node() {
        let (_, u, am) = fixture(&["p"], 256);
        let first_member = *am.members.keys().next().unwrap();
        let t = TruthAssignment::zeros(2);
        assert!(first_member >= 2);
        assert!(is_node(&t, &am, &u));
    }

    #[test]
    fn closure_sets_axioms_and_resolves_pairs() {
        let (ctx, u, am) = fixture(&["p"], 256);
        let (p, np) = (code(&ctx, "p"), code(&ctx, "(not p)"));
        assert!(np < 256);
        let c = k_closure(256, &[], &am, &u, Preference::LowerFirst).unwrap();
        assert!(c.node.get(p) && !c.node.get(np));
        assert_eq!(c.reasons[p], BitReason::AxiomSet);
        let mut bad = c.node.clone();
        bad.bits[np] = true;
        assert_eq!(node_violation(&bad, &am, &u).unwrap().clause, 3);
        assert!(matches!(k_closure(256, &[(p, false)], &am, &u, Preference::LowerFirst), Err(TreeError::InconsistentSeed(_))));
    }

    #[test]
    fn every_length_has_a_node_and_prefixes_are_nodes() {
        let (ctx, u, am) = fixture(&["p", "(imp p q)"], 400);
        let path = find_path(&am, &u, Preference::LowerFirst, 512).unwrap();
        for k in 0..=400 {
            assert!(is_node(&path.node.prefix(k), &am, &u), "prefix {k}");
        }
        for k in (0..=400).step_by(37) {
            assert_eq!(k_closure(k, &[], &am, &u, Preference::LowerFirst).unwrap().node.len(), k);
        }
        let t = extract_t(&path.node);
        assert!(t.contains(&code(&ctx, "q")));
        assert!(!t.contains(&code(&ctx, "(not q)")));
        let report = verify_truth_set(&t, &am, &u);
        assert!(report.passed(), "{report:?}");
        let art = PathArtifact::new(&path);
        let back: PathArtifact = serde_json::from_str(&serde_json::to_string(&art).unwrap()).unwrap();
        assert_eq!(back.assignment(), path.node);
    }

    #[test]
    fn derivation_clause_is_enforced() {
        let (ctx, u, _) = fixture(&[], 128);
        let am = AxiomSetAM { universe: 128, members: BTreeMap::new() };
        let top = code(&ctx, "top");
        let not_top = u.negation(top).unwrap();
        let rule = u.rules().iter().find(|r| r.premises.is_empty() && r.conclusions == vec![top]).expect("one-step derivation of top");
        assert!(rule.code < 128);
        let mut t = k_closure(128, &[], &am, &u, Preference::LowerFirst).unwrap().node;
        assert!(t.get(top));
        let mut c = Some(top);
        while let Some(k) = c {
            t.bits[k] = !t.bits[k];
            c = u.negation(k);
        }
        assert!(t.get(not_top));
        assert_eq!(node_violation(&t, &am, &u), Some(Violation { clause: 4, codes: vec![rule.code, top] }));
        assert!(is_node(&t.prefix(rule.code), &am, &u));
    }

    #[test]
    fn multi_step_derivations_sit_far_beyond_desk_universes() {
        let (ctx, _, _) = fixture(&[], 8);
        let coder = ctx.theory().coder();
        let f = |s: &str| parse::formula(coder.signature(), s).unwrap();
        let mut d = Derivation::default();
        d.push(f("p"), Justification::Premise);
        d.push(f("(imp p (or p q))"), Justification::Axiom(LogicalAxiom::Tautology));
        d.push(f("(or p q)"), Justification::ModusPonens { minor: 0, major: 1 });
        assert!(d.encode(coder).to_u64().is_none());
    }

    #[test]
    fn inconsistent_axioms_are_reported() {
        let (_, u, am) = fixture(&["bot"], 64);
        assert!(matches!(find_path(&am, &u, Preference::LowerFirst, 512), Err(TreeError::InconsistentAxioms)));
    }

    #[test]
    fn model_preference_follows_the_model() {
        let (ctx, u, am) = fixture(&[], 256);
        let sig = ctx.theory().coder().signature().clone();
        let m = parse_model(&sig, "carrier 0\ntable q: ()\n").unwrap();
        let c = k_closure(256, &[], &am, &u, Preference::Model(&m)).unwrap();
        for s in u.sentences() {
            assert_eq!(c.node.get(s), m.evaluate(u.expr(s)).unwrap(), "{}", sig.show(u.expr(s)));
        }
    }
}
