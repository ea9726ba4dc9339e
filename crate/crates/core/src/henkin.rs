//! Henkin witness grid.
//!
//! `a_0 = 1`, `a_{i+1} = a_i (a_i + 1)`. Row `i` of the grid has the constants
//! `c_{i0} … c_{i a_i}`; the constant at `(i+1, j)` is allocated for the
//! disjunction built from the `j`-th tuple `(j_0, …, j_i)`, `0 ≤ j_k ≤ a_k`,
//! in ascending lexicographic order.
//!
//! Constants are carrier elements. The allocator `C(u)` returns an element
//! `a` at which `u(c_a)` is not `Γ_n`-provable for any `n ≤ n_max`: first
//! among the elements where the reference model refutes `u(c_a)`, then among
//! the rest, in carrier order. When no element qualifies it falls back to the
//! least element and records the allocation as unrealized.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::coding::GodelCode;
use crate::error::GridError;
use crate::omega::OmegaContext;
use crate::syntax::{disjunction, exists, imp, not, Expr};

pub const A_SEQUENCE_CAP: usize = 8;

pub fn a_sequence(i_max: usize) -> Result<Vec<BigUint>, GridError> {
    if i_max > A_SEQUENCE_CAP {
        return Err(GridError::Overflow(i_max));
    }
    let mut a = vec![BigUint::one()];
    for i in 0..i_max {
        let next = &a[i] * (&a[i] + 1u32);
        a.push(next);
    }
    Ok(a)
}

fn a_u64(i: usize) -> Result<u64, GridError> {
    a_sequence(i)?[i].to_u64().ok_or(GridError::Overflow(i))
}

/// A tuple `(j_0, …, j_i)` with `0 ≤ j_k ≤ a_k` and its lexicographic rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexTuple {
    pub components: Vec<u64>,
    pub rank: u64,
}

fn radices(i: usize) -> Result<Vec<u64>, GridError> {
    (0..=i).map(|k| a_u64(k).map(|a| a + 1)).collect()
}

/// The tuple of rank `r` among the `a_{i+1}` tuples of length `i + 1`.
pub fn tuple_of_rank(i: usize, r: u64) -> Result<IndexTuple, GridError> {
    let limit = a_u64(i + 1)?;
    if r >= limit {
        return Err(GridError::RankOutOfRange { level: i, rank: r, limit });
    }
    let mut components = vec![0; i + 1];
    let mut rest = r;
    for (k, radix) in radices(i)?.into_iter().enumerate().rev() {
        components[k] = rest % radix;
        rest /= radix;
    }
    Ok(IndexTuple { components, rank: r })
}

pub fn rank_of_tuple(components: &[u64]) -> Result<u64, GridError> {
    let Some(i) = components.len().checked_sub(1) else {
        return Err(GridError::RankOutOfRange { level: 0, rank: 0, limit: 0 });
    };
    let limit = a_u64(i + 1)?;
    let mut rank = 0u64;
    for (&j, radix) in components.iter().zip(radices(i)?) {
        if j >= radix {
            return Err(GridError::RankOutOfRange { level: i, rank: j, limit: radix });
        }
        rank = rank * radix + j;
    }
    debug_assert!(rank < limit);
    Ok(rank)
}

/// One use of `C(u)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub code: GodelCode,
    pub constant: u32,
    /// Whether `u(c_a)` was found unprovable at every level.
    pub realized: bool,
}

/// `C(u)`, memoized by formula code in order of first use.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Allocator {
    pub n_max: usize,
    pub log: Vec<Allocation>,
    #[serde(skip)]
    index: BTreeMap<GodelCode, usize>,
}

impl Allocator {
    pub fn new(n_max: usize) -> Self {
        Allocator { n_max, log: Vec::new(), index: BTreeMap::new() }
    }

    /// `C(u)` for a formula whose only free variable, if any, is `v0`.
    pub fn allocate(&mut self, ctx: &OmegaContext, u: &Expr) -> u32 {
        let code = ctx.theory().coder().encode_unchecked(u);
        if self.index.is_empty() && !self.log.is_empty() {
            self.index = self.log.iter().enumerate().map(|(k, a)| (a.code.clone(), k)).collect();
        }
        if let Some(&k) = self.index.get(&code) {
            return self.log[k].constant;
        }
        let inst = |a: u32| u.instantiate(0, &Expr::Const(a));
        let mut order: Vec<u32> = ctx.carrier().to_vec();
        if let Some(m) = ctx.reference_model() {
            order.sort_by_key(|&a| !matches!(m.evaluate(&inst(a)), Ok(false)));
        }
        let found = order.iter().copied().find(|&a| (0..=self.n_max).all(|n| !ctx.gamma_holds(n, &inst(a))));
        let alloc = Allocation { code: code.clone(), constant: found.unwrap_or(ctx.carrier()[0]), realized: found.is_some() };
        let constant = alloc.constant;
        self.index.insert(code, self.log.len());
        self.log.push(alloc);
        constant
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub i: usize,
    pub j: u64,
    pub constant: u32,
    pub formula: Expr,
    pub code: GodelCode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HenkinGrid {
    pub a: Vec<BigUint>,
    pub psi: Vec<Expr>,
    pub rows: Vec<Vec<GridCell>>,
    pub allocator: Allocator,
}

/// The first `count` formulas with exactly one free variable over the
/// carrier constants, renamed to `v0`, without repetition, in code order.
/// Empty when the signature has no place for a variable.
pub fn enumerate_psi(ctx: &OmegaContext, count: usize) -> Vec<Expr> {
    let coder = ctx.theory().coder();
    let sig = coder.signature();
    if count == 0 || (!sig.has_equality() && sig.predicates().iter().all(|p| p.arity == 0)) {
        return Vec::new();
    }
    let carrier = ctx.carrier().iter().copied().collect();
    let mut out: Vec<Expr> = Vec::new();
    let mut bound = 64u64;
    loop {
        out.clear();
        for f in coder.enumerate_one_free_variable_formulas(&carrier, bound) {
            let f = f.canonicalize_free_to_v0();
            if !out.contains(&f) {
                out.push(f);
            }
            if out.len() == count {
                return out;
            }
        }
        bound *= 2;
    }
}

impl HenkinGrid {
    pub fn new(psi: Vec<Expr>, n_max: usize) -> Self {
        HenkinGrid { a: vec![BigUint::one()], psi, rows: Vec::new(), allocator: Allocator::new(n_max) }
    }

    pub fn psi(&self, n: usize) -> Result<&Expr, GridError> {
        self.psi.get(n).ok_or(GridError::NotEnoughFormulas { row: n, available: self.psi.len() })
    }

    pub fn row(&self, i: usize) -> Result<&[GridCell], GridError> {
        self.rows.get(i).map(Vec::as_slice).ok_or(GridError::RowMissing(i))
    }

    pub fn constant(&self, i: usize, j: u64) -> Result<u32, GridError> {
        self.row(i)?.get(j as usize).map(|c| c.constant).ok_or(GridError::RowMissing(i))
    }

    fn cell(&mut self, ctx: &OmegaContext, i: usize, j: u64, formula: Expr) -> GridCell {
        let constant = self.allocator.allocate(ctx, &formula);
        let code = ctx.theory().coder().encode_unchecked(&formula);
        GridCell { i, j, constant, formula, code }
    }

    /// `(ψ_k)^{j}`: `None` for `⊤`, else `ψ_k(c_{k, j_k - 1})`.
    fn component(&self, k: usize, jk: u64) -> Result<Option<Expr>, GridError> {
        if jk == 0 {
            return Ok(None);
        }
        let c = self.constant(k, jk - 1)?;
        Ok(Some(self.psi(k)?.instantiate(0, &Expr::Const(c))))
    }

    /// Fills rows `0 ..= i_max`. Row 0 is `C(¬ψ_0)` throughout; index
    /// `j = a_{i+1}`, which has no tuple, reuses the tuple of rank 0.
    pub fn build(mut self, ctx: &OmegaContext, i_max: usize) -> Result<Self, GridError> {
        self.a = a_sequence(i_max)?;
        self.psi(i_max)?;
        while self.rows.len() <= i_max {
            let i = self.rows.len();
            let size = a_u64(i)?;
            let mut row = Vec::with_capacity(size as usize + 1);
            if i == 0 {
                let f = not(self.psi(0)?.clone());
                for j in 0..=size {
                    row.push(self.cell(ctx, 0, j, f.clone()));
                }
            } else {
                for j in 0..=size {
                    let t = tuple_of_rank(i - 1, j % size)?;
                    let mut parts = Vec::new();
                    for (k, &jk) in t.components.iter().enumerate() {
                        if let Some(inst) = self.component(k, jk)? {
                            parts.push(not(inst));
                        }
                    }
                    parts.push(not(self.psi(i)?.clone()));
                    row.push(self.cell(ctx, i, j, disjunction(parts)));
                }
            }
            self.rows.push(row);
        }
        Ok(self)
    }

    /// `F_n`: `∃v0 ψ_n → ⋁_{0 ≤ j ≤ a_n} ψ_n(c_{nj})`.
    pub fn build_f(&self, ctx: &OmegaContext, n: usize) -> Result<Expr, GridError> {
        let row = self.row(n)?;
        let psi = self.psi(n)?;
        let body = disjunction(row.iter().map(|c| psi.instantiate(0, &Expr::Const(c.constant))).collect());
        let f = imp(exists(0, psi.clone()), body);
        if ctx.theory().coder().encode_unchecked(&f).0 <= BigUint::from(n) {
            return Err(GridError::CodeTooSmall { n });
        }
        Ok(f)
    }

    pub fn built_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }

    pub fn from_json(src: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(src)
    }
}

fn check_increasing(ms: &[usize]) -> Result<(), GridError> {
    if ms.windows(2).any(|w| w[0] >= w[1]) {
        Err(GridError::NotIncreasing(ms.to_vec()))
    } else {
        Ok(())
    }
}

/// The correct sequence `¬φ*_{m_1}, …, ¬φ*_{m_v}` for 1-based indices `ms`
/// into `phis`, whose free variable is `v0`.
pub fn star_sequence(alloc: &mut Allocator, ctx: &OmegaContext, ms: &[usize], phis: &[Expr]) -> Result<Vec<Expr>, GridError> {
    check_increasing(ms)?;
    if ms.iter().any(|&m| m == 0 || m > phis.len()) {
        return Err(GridError::NotIncreasing(ms.to_vec()));
    }
    let mut out: Vec<Expr> = Vec::with_capacity(ms.len());
    for &m in ms {
        let phi = &phis[m - 1];
        let mut parts = out.clone();
        parts.push(not(phi.clone()));
        let c = alloc.allocate(ctx, &disjunction(parts));
        out.push(not(phi.instantiate(0, &Expr::Const(c))));
    }
    Ok(out)
}

/// The order on increasing sequences: at the first difference the smaller
/// entry comes first; a sequence precedes each of its proper prefixes.
pub fn prec(ms: &[usize], ls: &[usize]) -> Result<Ordering, GridError> {
    check_increasing(ms)?;
    check_increasing(ls)?;
    for (m, l) in ms.iter().zip(ls) {
        if m != l {
            return Ok(m.cmp(l));
        }
    }
    Ok(ls.len().cmp(&ms.len()))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::coding::Coder;
    use crate::kernel::TheoryHandle;
    use crate::model::parse_model;
    use crate::parse;

    fn ctx(axioms: &[&str], filter: bool) -> OmegaContext {
        let sig = parse::signature("pred p 1\npred q 1\n").unwrap();
        let coder = Arc::new(Coder::new(sig.clone()));
        let ax = axioms.iter().map(|a| parse::formula(&sig, a).unwrap()).collect();
        let t = TheoryHandle::new("T", coder, ax).unwrap();
        let mut c = OmegaContext::new(t, vec![0, 1], 256, 32).unwrap();
        if filter {
            let m = parse_model(&sig, "carrier 0 1\ntable p: (1)\ntable q: (0) (1)\n").unwrap();
            assert!(c.use_reference_model(Arc::new(m)));
        }
        c
    }

    #[test]
    fn a_sequence_prefix() {
        let a = a_sequence(6).unwrap();
        let small: Vec<u64> = a.iter().take(5).map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(small, vec![1, 2, 6, 42, 1806]);
        for i in 0..6 {
            let prod = a[..=i].iter().fold(BigUint::one(), |acc, x| acc * (x + 1u32));
            assert_eq!(prod, a[i + 1]);
        }
        assert!(a_sequence(9).is_err());
    }

    #[test]
    fn tuple_rank_round_trip() {
        assert_eq!(tuple_of_rank(0, 1).unwrap().components, vec![1]);
        assert_eq!(tuple_of_rank(2, 0).unwrap().components, vec![0, 0, 0]);
        assert!(tuple_of_rank(1, 6).is_err());
        for i in 0..=3 {
            let n = a_u64(i + 1).unwrap();
            let mut prev: Option<Vec<u64>> = None;
            for r in 0..n {
                let t = tuple_of_rank(i, r).unwrap();
                assert_eq!(rank_of_tuple(&t.components).unwrap(), r);
                if let Some(p) = prev {
                    assert!(p < t.components);
                }
                prev = Some(t.components);
            }
        }
        assert!(rank_of_tuple(&[2]).is_err());
    }

    #[test]
    fn grid_rows_and_witness_axioms() {
        let c = ctx(&[], true);
        let psi = enumerate_psi(&c, 3);
        assert!(psi.iter().all(|p| p.free_vars().into_iter().collect::<Vec<_>>() == vec![0]));
        let g = HenkinGrid::new(psi.clone(), 2).build(&c, 2).unwrap();
        assert_eq!(g.row(0).unwrap().len(), 2);
        assert_eq!(g.row(1).unwrap().len(), 3);
        assert_eq!(g.row(2).unwrap().len(), 7);
        assert_eq!(g.row(0).unwrap()[0].formula, not(psi[0].clone()));
        assert_eq!(g.row(1).unwrap()[0].formula, not(psi[1].clone()));
        let f0 = g.build_f(&c, 0).unwrap();
        let f1 = g.build_f(&c, 1).unwrap();
        let count = |f: &Expr| match f {
            Expr::Imp(_, b) => {
                let mut n = 1;
                let mut cur: &Expr = b;
                while let Expr::Or(_, r) = cur {
                    n += 1;
                    cur = r;
                }
                n
            }
            _ => 0,
        };
        assert_eq!(count(&f0), 2);
        assert_eq!(count(&f1), 3);
        let m = c.reference_model().unwrap();
        for n in 0..=2 {
            assert_eq!(m.evaluate(&g.build_f(&c, n).unwrap()), Ok(true), "F_{n}");
        }
        assert!(matches!(g.build_f(&c, 3), Err(GridError::RowMissing(3))));
        let back = HenkinGrid::from_json(&g.to_json()).unwrap();
        assert_eq!(back.rows, g.rows);
    }

    #[test]
    fn allocator_is_deterministic_and_realizes_the_type() {
        let c = ctx(&[], false);
        let sig = c.theory().coder().signature().clone();
        let u = parse::formula(&sig, "(not (p v0))").unwrap();
        let mut a1 = Allocator::new(1);
        let mut a2 = Allocator::new(1);
        assert_eq!(a1.allocate(&c, &u), a2.allocate(&c, &u));
        assert_eq!(a1.log.len(), 1);
        a1.allocate(&c, &u);
        assert_eq!(a1.log.len(), 1);
        assert!(a1.log[0].realized);
        let c = ctx(&["(p c0)", "(p c1)"], false);
        let mut a = Allocator::new(1);
        assert_eq!(a.allocate(&c, &u), 0);
        assert!(a.log[0].realized);
        let everywhere = parse::formula(&sig, "(p v0)").unwrap();
        assert_eq!(a.allocate(&c, &everywhere), 0);
        assert!(!a.log[1].realized);
        let c = ctx(&["(p c1)"], true);
        let mut a = Allocator::new(1);
        assert_eq!(a.allocate(&c, &u), 1);
    }

    #[test]
    fn star_sequences() {
        let c = ctx(&[], true);
        let sig = c.theory().coder().signature().clone();
        let phis: Vec<Expr> = ["(p v0)", "(q v0)", "(not (p v0))", "(and (p v0) (q v0))"]
            .iter()
            .map(|s| parse::formula(&sig, s).unwrap())
            .collect();
        let mut alloc = Allocator::new(1);
        assert!(star_sequence(&mut alloc, &c, &[], &phis).unwrap().is_empty());
        let one = star_sequence(&mut alloc, &c, &[2], &phis).unwrap();
        let k = alloc.allocate(&c, &not(phis[1].clone()));
        assert_eq!(one, vec![not(phis[1].instantiate(0, &Expr::Const(k)))]);
        assert!(star_sequence(&mut alloc, &c, &[2, 1], &phis).is_err());

        let w = phis.len();
        let seqs = increasing_sequences(w);
        for ms in &seqs {
            let sm = star_sequence(&mut alloc, &c, ms, &phis).unwrap();
            for ls in &seqs {
                if prec(ms, ls).unwrap() == Ordering::Less {
                    let r = ms.iter().zip(ls).take_while(|(a, b)| a == b).count();
                    let sl = star_sequence(&mut alloc, &c, ls, &phis).unwrap();
                    assert_eq!(sm[..r], sl[..r]);
                }
            }
        }
    }

    fn increasing_sequences(w: usize) -> Vec<Vec<usize>> {
        (0u32..1 << w).map(|mask| (1..=w).filter(|&k| mask >> (k - 1) & 1 == 1).collect()).collect()
    }

    #[test]
    fn prec_is_a_well_founded_total_order() {
        assert_eq!(prec(&[1, 2, 3], &[]).unwrap(), Ordering::Less);
        assert_eq!(prec(&[1, 3], &[2, 3]).unwrap(), Ordering::Less);
        assert_eq!(prec(&[1, 2, 3], &[1, 2]).unwrap(), Ordering::Less);
        assert!(prec(&[2, 2], &[1]).is_err());
        for w in 1..=5 {
            let mut seqs = increasing_sequences(w);
            for a in &seqs {
                for b in &seqs {
                    let ab = prec(a, b).unwrap();
                    assert_eq!(ab, prec(b, a).unwrap().reverse());
                    assert_eq!(ab == Ordering::Equal, a == b);
                    for c in &seqs {
                        if ab == Ordering::Less && prec(b, c).unwrap() == Ordering::Less {
                            assert_eq!(prec(a, c).unwrap(), Ordering::Less);
                        }
                    }
                }
            }
            seqs.sort_by(|a, b| prec(a, b).unwrap());
            assert_eq!(seqs.first().unwrap(), &(1..=w).collect::<Vec<_>>());
            assert!(seqs.last().unwrap().is_empty());
        }
    }
}
