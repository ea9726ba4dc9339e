//! Gödel numbering.
//!
//! Expressions are ranked densely: first by [`Expr::size`], then by
//! constructor, then by the ranks of their children. Every natural number is
//! the code of exactly one well-formed expression of the signature, and a
//! proper subexpression is always strictly smaller than the whole, because it
//! is strictly shorter.
//!
//! Finite sequences of naturals (derivations, steps) are coded with the Cantor
//! pairing function: `<> = 0`, `<x, rest> = 1 + pair(x, <rest>)`, so every
//! entry of a coded sequence is smaller than the sequence code.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::SyntaxError;
use crate::syntax::{Expr, Signature};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GodelCode(pub BigUint);

impl GodelCode {
    pub fn from_u64(v: u64) -> Self {
        GodelCode(BigUint::from(v))
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.0.to_usize()
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    /// True when the code is strictly below `bound`.
    pub fn below(&self, bound: u64) -> bool {
        self.0 < BigUint::from(bound)
    }
}

impl fmt::Display for GodelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for GodelCode {
    fn from(v: u64) -> Self {
        GodelCode::from_u64(v)
    }
}

pub fn pair(a: &BigUint, b: &BigUint) -> BigUint {
    let s = a + b;
    (&s * (&s + 1u32)) / 2u32 + b
}

pub fn unpair(z: &BigUint) -> (BigUint, BigUint) {
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let b = z - t;
    let a = w - &b;
    (a, b)
}

pub fn encode_sequence(items: &[BigUint]) -> BigUint {
    items
        .iter()
        .rev()
        .fold(BigUint::zero(), |rest, x| pair(x, &rest) + 1u32)
}

/// Decodes a sequence code. Every natural number decodes.
pub fn decode_sequence(code: &BigUint) -> Vec<BigUint> {
    let mut out = Vec::new();
    let mut cur = code.clone();
    while !cur.is_zero() {
        let (x, rest) = unpair(&(cur - 1u32));
        out.push(x);
        cur = rest;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Sort {
    Term,
    Formula,
}

#[derive(Default)]
struct Counts {
    // index = size; index 0 is the empty size (no expressions)
    term: Vec<BigUint>,
    formula: Vec<BigUint>,
    // cum[s] = number of expressions of size < s
    cum: Vec<BigUint>,
    tuples: HashMap<(Sort, usize, u64), BigUint>,
}

/// Encoder/decoder bound to one signature.
pub struct Coder {
    sig: Signature,
    counts: Mutex<Counts>,
}

impl fmt::Debug for Coder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coder").field("sig", &self.sig).finish()
    }
}

impl Coder {
    pub fn new(sig: Signature) -> Self {
        let counts = Counts {
            term: vec![BigUint::zero()],
            formula: vec![BigUint::zero()],
            cum: vec![BigUint::zero(), BigUint::zero()],
            tuples: HashMap::new(),
        };
        Coder { sig, counts: Mutex::new(counts) }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn encode(&self, e: &Expr) -> Result<GodelCode, SyntaxError> {
        self.sig.check(e)?;
        Ok(self.encode_unchecked(e))
    }

    /// Encodes without re-checking well-formedness.
    pub fn encode_unchecked(&self, e: &Expr) -> GodelCode {
        let mut c = self.counts.lock().expect("coder cache poisoned");
        let s = e.size();
        self.ensure(&mut c, s);
        let within = self.rank_in_size(&mut c, e);
        GodelCode(&c.cum[s as usize] + within)
    }

    pub fn decode(&self, code: &GodelCode) -> Expr {
        let mut c = self.counts.lock().expect("coder cache poisoned");
        let mut s = 1u64;
        loop {
            self.ensure(&mut c, s);
            if code.0 < c.cum[s as usize + 1] {
                break;
            }
            s += 1;
        }
        let r = &code.0 - &c.cum[s as usize];
        if r < c.term[s as usize] {
            self.unrank(&mut c, Sort::Term, s, r)
        } else {
            let r = r - &c.term[s as usize];
            self.unrank(&mut c, Sort::Formula, s, r)
        }
    }

    pub fn decode_u64(&self, code: u64) -> Expr {
        self.decode(&GodelCode::from_u64(code))
    }

    /// Number of expressions with code below the first expression of `size`.
    pub fn first_code_of_size(&self, size: u64) -> GodelCode {
        let mut c = self.counts.lock().expect("coder cache poisoned");
        self.ensure(&mut c, size);
        GodelCode(c.cum[size as usize].clone())
    }

    /// Largest size `s` such that some expression of size `s` has code below `bound`.
    pub fn max_size_below(&self, bound: u64) -> u64 {
        let b = BigUint::from(bound);
        let mut c = self.counts.lock().expect("coder cache poisoned");
        let mut s = 1u64;
        loop {
            self.ensure(&mut c, s + 1);
            if c.cum[s as usize + 1] >= b {
                return s;
            }
            s += 1;
        }
    }

    /// Formulas with exactly one free variable, constants drawn from
    /// `carrier`, and code below `bound`, in increasing code order.
    pub fn enumerate_one_free_variable_formulas(&self, carrier: &BTreeSet<u32>, bound: u64) -> Vec<Expr> {
        (0..bound)
            .map(|c| self.decode_u64(c))
            .filter(|e| e.is_formula() && e.free_vars().len() == 1 && e.constants().is_subset(carrier))
            .collect()
    }

    fn ensure(&self, c: &mut Counts, s: u64) {
        while (c.term.len() as u64) <= s {
            let size = c.term.len() as u64;
            let t = self.count_terms(c, size);
            c.term.push(t);
            let f = self.count_formulas(c, size);
            c.formula.push(f);
            let next = &c.cum[size as usize] + &c.term[size as usize] + &c.formula[size as usize];
            c.cum.push(next);
        }
    }

    fn count(c: &Counts, sort: Sort, size: u64) -> BigUint {
        match sort {
            Sort::Term => c.term[size as usize].clone(),
            Sort::Formula => c.formula[size as usize].clone(),
        }
    }

    /// Number of `k`-tuples of `sort` with total size `m`; needs counts for sizes ≤ m.
    fn tuples(&self, c: &mut Counts, sort: Sort, k: usize, m: u64) -> BigUint {
        if k == 0 {
            return if m == 0 { BigUint::one() } else { BigUint::zero() };
        }
        if m < k as u64 {
            return BigUint::zero();
        }
        if let Some(v) = c.tuples.get(&(sort, k, m)) {
            return v.clone();
        }
        let mut total = BigUint::zero();
        for a in 1..=(m - (k as u64 - 1)) {
            let first = Self::count(c, sort, a);
            if first.is_zero() {
                continue;
            }
            total += first * self.tuples(c, sort, k - 1, m - a);
        }
        c.tuples.insert((sort, k, m), total.clone());
        total
    }

    fn count_terms(&self, c: &mut Counts, s: u64) -> BigUint {
        // v_{s-1} and c_{s-1}
        let mut n = BigUint::from(2u32);
        for f in self.sig.functions().to_vec() {
            n += self.tuples(c, Sort::Term, f.arity, s - 1);
        }
        n
    }

    fn count_formulas(&self, c: &mut Counts, s: u64) -> BigUint {
        let mut n = BigUint::zero();
        if s == 1 {
            n += 2u32;
        }
        for p in self.sig.predicates().to_vec() {
            n += self.tuples(c, Sort::Term, p.arity, s - 1);
        }
        if self.sig.has_equality() {
            n += self.tuples(c, Sort::Term, 2, s - 1);
        }
        if s >= 2 {
            n += c.formula[s as usize - 1].clone();
            n += self.tuples(c, Sort::Formula, 2, s - 1) * 3u32;
        }
        if s >= 3 {
            let mut q = BigUint::zero();
            for i in 0..=(s - 3) {
                q += c.formula[(s - 2 - i) as usize].clone();
            }
            n += q * 2u32;
        }
        n
    }

    /// Rank of `e` among all expressions (terms first) of its size.
    fn rank_in_size(&self, c: &mut Counts, e: &Expr) -> BigUint {
        let s = e.size();
        if e.is_term() {
            self.rank_in_sort(c, e)
        } else {
            let terms = c.term[s as usize].clone();
            terms + self.rank_in_sort(c, e)
        }
    }

    /// Rank of `e` among expressions of the same sort and size.
    fn rank_in_sort(&self, c: &mut Counts, e: &Expr) -> BigUint {
        let s = e.size();
        let m = s - 1;
        let mut off = BigUint::zero();
        match e {
            Expr::Var(_) => return off,
            Expr::Const(_) => return BigUint::one(),
            Expr::App(f, args) => {
                off += 2u32;
                for g in 0..*f {
                    let ar = self.sig.functions()[g as usize].arity;
                    off += self.tuples(c, Sort::Term, ar, m);
                }
                let kids: Vec<&Expr> = args.iter().collect();
                return off + self.tuple_rank(c, Sort::Term, &kids, m);
            }
            _ => {}
        }
        // formulas
        if s == 1 {
            match e {
                Expr::Bot => return off,
                Expr::Top => return BigUint::one(),
                _ => off += 2u32,
            }
        }
        let preds = self.sig.predicates().to_vec();
        if let Expr::Pred(p, args) = e {
            for q in 0..*p {
                off += self.tuples(c, Sort::Term, preds[q as usize].arity, m);
            }
            let kids: Vec<&Expr> = args.iter().collect();
            return off + self.tuple_rank(c, Sort::Term, &kids, m);
        }
        for q in &preds {
            off += self.tuples(c, Sort::Term, q.arity, m);
        }
        if let Expr::Eq(a, b) = e {
            return off + self.tuple_rank(c, Sort::Term, &[a, b], m);
        }
        if self.sig.has_equality() {
            off += self.tuples(c, Sort::Term, 2, m);
        }
        if let Expr::Not(a) = e {
            return off + self.rank_in_sort(c, a);
        }
        if s >= 2 {
            off += c.formula[s as usize - 1].clone();
        }
        let binary = self.tuples(c, Sort::Formula, 2, m);
        match e {
            Expr::And(a, b) => return off + self.tuple_rank(c, Sort::Formula, &[a, b], m),
            Expr::Or(a, b) => return off + binary + self.tuple_rank(c, Sort::Formula, &[a, b], m),
            Expr::Imp(a, b) => return off + binary * 2u32 + self.tuple_rank(c, Sort::Formula, &[a, b], m),
            _ => {}
        }
        off += binary * 3u32;
        let quant_block = |c: &Counts| {
            let mut q = BigUint::zero();
            if s >= 3 {
                for i in 0..=(s - 3) {
                    q += c.formula[(s - 2 - i) as usize].clone();
                }
            }
            q
        };
        let (v, body, is_forall) = match e {
            Expr::Exists(v, b) => (*v, b, false),
            Expr::Forall(v, b) => (*v, b, true),
            _ => unreachable!("all constructors handled"),
        };
        if is_forall {
            off += quant_block(c);
        }
        for i in 0..v as u64 {
            off += c.formula[(s - 2 - i) as usize].clone();
        }
        off + self.rank_in_sort(c, body)
    }

    fn tuple_rank(&self, c: &mut Counts, sort: Sort, kids: &[&Expr], m: u64) -> BigUint {
        let Some((first, rest)) = kids.split_first() else {
            return BigUint::zero();
        };
        let k = kids.len();
        let a1 = first.size();
        let mut r = BigUint::zero();
        for a in 1..a1 {
            let cnt = Self::count(c, sort, a);
            if cnt.is_zero() {
                continue;
            }
            r += cnt * self.tuples(c, sort, k - 1, m - a);
        }
        let tail = self.tuples(c, sort, k - 1, m - a1);
        r += self.rank_in_sort(c, first) * tail;
        r + self.tuple_rank(c, sort, rest, m - a1)
    }

    fn unrank(&self, c: &mut Counts, sort: Sort, s: u64, mut r: BigUint) -> Expr {
        let m = s - 1;
        if sort == Sort::Term {
            if r.is_zero() {
                return Expr::Var(m as u32);
            }
            if r.is_one() {
                return Expr::Const(m as u32);
            }
            r -= 2u32;
            for (fi, f) in self.sig.functions().to_vec().iter().enumerate() {
                let block = self.tuples(c, Sort::Term, f.arity, m);
                if r < block {
                    let args = self.untuple(c, Sort::Term, f.arity, m, r);
                    return Expr::App(fi as u32, args);
                }
                r -= block;
            }
            unreachable!("term rank out of range");
        }
        if s == 1 {
            if r.is_zero() {
                return Expr::Bot;
            }
            if r.is_one() {
                return Expr::Top;
            }
            r -= 2u32;
        }
        for (pi, p) in self.sig.predicates().to_vec().iter().enumerate() {
            let block = self.tuples(c, Sort::Term, p.arity, m);
            if r < block {
                return Expr::Pred(pi as u32, self.untuple(c, Sort::Term, p.arity, m, r));
            }
            r -= block;
        }
        if self.sig.has_equality() {
            let block = self.tuples(c, Sort::Term, 2, m);
            if r < block {
                let mut ab = self.untuple(c, Sort::Term, 2, m, r).into_iter();
                let a = ab.next().expect("pair");
                let b = ab.next().expect("pair");
                return Expr::Eq(Box::new(a), Box::new(b));
            }
            r -= block;
        }
        if s >= 2 {
            let block = c.formula[s as usize - 1].clone();
            if r < block {
                return Expr::Not(Box::new(self.unrank(c, Sort::Formula, s - 1, r)));
            }
            r -= block;
        }
        let binary = self.tuples(c, Sort::Formula, 2, m);
        for kind in 0..3 {
            if r < binary {
                let mut ab = self.untuple(c, Sort::Formula, 2, m, r).into_iter();
                let a = Box::new(ab.next().expect("pair"));
                let b = Box::new(ab.next().expect("pair"));
                return match kind {
                    0 => Expr::And(a, b),
                    1 => Expr::Or(a, b),
                    _ => Expr::Imp(a, b),
                };
            }
            r -= &binary;
        }
        for is_forall in [false, true] {
            for i in 0..=(s.saturating_sub(3)) {
                if s < 3 {
                    break;
                }
                let bs = s - 2 - i;
                let block = c.formula[bs as usize].clone();
                if r < block {
                    let body = Box::new(self.unrank(c, Sort::Formula, bs, r));
                    return if is_forall { Expr::Forall(i as u32, body) } else { Expr::Exists(i as u32, body) };
                }
                r -= block;
            }
        }
        unreachable!("formula rank out of range");
    }

    fn untuple(&self, c: &mut Counts, sort: Sort, k: usize, m: u64, mut r: BigUint) -> Vec<Expr> {
        if k == 0 {
            return vec![];
        }
        for a in 1..=m {
            let cnt = Self::count(c, sort, a);
            let tail = self.tuples(c, sort, k - 1, m - a);
            let block = &cnt * &tail;
            if r < block {
                let first_rank = &r / &tail;
                let rest_rank = &r % &tail;
                let first = self.unrank(c, sort, a, first_rank);
                let mut out = vec![first];
                out.extend(self.untuple(c, sort, k - 1, m - a, rest_rank));
                return out;
            }
            r -= block;
        }
        unreachable!("tuple rank out of range");
    }
}
