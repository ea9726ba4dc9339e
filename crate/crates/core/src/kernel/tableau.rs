//! Ground semantic tableau with eigenvariables.
//!
//! The search is deterministic: formulas are expanded in the order they enter
//! the branch (alpha and delta rules), then equality rewriting, then the first
//! open beta formula is split, then gamma instances are added term-major over
//! the terms occurring on the branch that are nested at most one level deeper
//! than any term of the input. Every rule application costs one unit of
//! budget. A closed tableau is translated into a Hilbert derivation in which
//! every node proves the negated conjunction of the formulas it used.

use std::collections::{HashMap, HashSet};

use super::derivation::{Derivation, Justification, LogicalAxiom};
use crate::syntax::{conjunction, eq, forall, imp, not, Expr};

#[derive(Clone, Debug)]
enum Closure {
    Bot,
    NotTop,
    NotRefl(Expr),
    /// A formula and the negation of an alpha-equivalent one.
    Pair(Expr, Expr),
}

#[derive(Clone, Debug)]
enum Rule {
    Alpha { src: Expr },
    Gamma { src: Expr },
    Delta { src: Expr, var: u32 },
    Rewrite { equation: Expr, literal: Expr, lhs: Expr, rhs: Expr },
}

/// Linear rule applications followed by a closure or a split.
#[derive(Clone, Debug)]
struct Node {
    steps: Vec<(Rule, Vec<Expr>)>,
    end: End,
}

#[derive(Clone, Debug)]
enum End {
    Closed(Closure),
    Split { src: Expr, left: (Expr, Box<Node>), right: (Expr, Box<Node>) },
}

enum Kind {
    Alpha(Vec<Expr>),
    Beta(Expr, Expr),
    Gamma,
    Delta,
    Literal,
    Inert,
}

fn classify(f: &Expr) -> Kind {
    match f {
        Expr::And(a, b) => Kind::Alpha(vec![(**a).clone(), (**b).clone()]),
        Expr::Or(a, b) => Kind::Beta((**a).clone(), (**b).clone()),
        Expr::Imp(a, b) => Kind::Beta(not((**a).clone()), (**b).clone()),
        Expr::Forall(..) => Kind::Gamma,
        Expr::Exists(..) => Kind::Delta,
        Expr::Pred(..) | Expr::Eq(..) => Kind::Literal,
        Expr::Not(g) => match g.as_ref() {
            Expr::Not(a) => Kind::Alpha(vec![(**a).clone()]),
            Expr::Or(a, b) => Kind::Alpha(vec![not((**a).clone()), not((**b).clone())]),
            Expr::Imp(a, b) => Kind::Alpha(vec![(**a).clone(), not((**b).clone())]),
            Expr::And(a, b) => Kind::Beta(not((**a).clone()), not((**b).clone())),
            Expr::Exists(..) => Kind::Gamma,
            Expr::Forall(..) => Kind::Delta,
            Expr::Pred(..) | Expr::Eq(..) => Kind::Literal,
            _ => Kind::Inert,
        },
        _ => Kind::Inert,
    }
}

/// Quantifier, bound variable, body, and whether the instance is negated.
fn quantified(f: &Expr) -> (u32, &Expr, bool) {
    match f {
        Expr::Forall(x, a) | Expr::Exists(x, a) => (*x, a, false),
        Expr::Not(g) => match g.as_ref() {
            Expr::Forall(x, a) | Expr::Exists(x, a) => (*x, a, true),
            _ => unreachable!("not a quantified formula"),
        },
        _ => unreachable!("not a quantified formula"),
    }
}

fn instance(f: &Expr, t: &Expr) -> Expr {
    let (x, a, neg) = quantified(f);
    let inst = a.instantiate(x, t);
    if neg { not(inst) } else { inst }
}

/// Larger term first: by size, then structurally.
fn orient(a: &Expr, b: &Expr) -> Option<(Expr, Expr)> {
    use std::cmp::Ordering::*;
    match a.size().cmp(&b.size()).then_with(|| a.cmp(b)) {
        Greater => Some((a.clone(), b.clone())),
        Less => Some((b.clone(), a.clone())),
        Equal => None,
    }
}

fn contains_term(e: &Expr, t: &Expr) -> bool {
    if e == t {
        return true;
    }
    matches!(e, Expr::App(..) | Expr::Pred(..) | Expr::Eq(..)) && e.children().into_iter().any(|c| contains_term(c, t))
}

fn collect_terms(e: &Expr, bound: &mut Vec<u32>, out: &mut Vec<Expr>) {
    match e {
        Expr::Var(_) | Expr::Const(_) | Expr::App(..) => {
            if e.free_vars().iter().all(|v| !bound.contains(v)) {
                out.push(e.clone());
            }
            for c in e.children() {
                collect_terms(c, bound, out);
            }
        }
        Expr::Exists(v, a) | Expr::Forall(v, a) => {
            bound.push(*v);
            collect_terms(a, bound, out);
            bound.pop();
        }
        _ => {
            for c in e.children() {
                collect_terms(c, bound, out);
            }
        }
    }
}

/// Nesting depth of function applications.
fn nesting(e: &Expr) -> usize {
    match e {
        Expr::App(_, args) => 1 + args.iter().map(nesting).max().unwrap_or(0),
        _ => e.children().into_iter().map(nesting).max().unwrap_or(0),
    }
}

#[derive(Clone, Default)]
struct Branch {
    formulas: Vec<Expr>,
    keys: HashMap<Expr, usize>,
    cursor: usize,
    /// Beta source, its two parts, and their alpha keys.
    betas: Vec<(Expr, Expr, Expr, Expr, Expr)>,
    /// Betas before this index already have a part on the branch.
    beta_low: usize,
    gammas: Vec<Expr>,
    literals: Vec<Expr>,
    equations: Vec<(Expr, Expr, Expr)>,
    /// Per equation, the literals before this index have been rewritten.
    rewrite_next: Vec<usize>,
    terms: Vec<Expr>,
    /// Per term, the gammas before this index have been instantiated with it.
    gamma_next: Vec<usize>,
    /// Terms before this index are instantiated into every gamma.
    gamma_low: usize,
    term_keys: HashSet<Expr>,
    /// Terms nested deeper than this are not used for gamma instances.
    term_depth: usize,
    next_var: u32,
    closure: Option<Closure>,
}

impl Branch {
    /// Adds `f` unless an alpha-variant is present; returns whether it was new.
    fn add(&mut self, f: Expr) -> bool {
        let key = f.alpha_key();
        if self.keys.contains_key(&key) {
            return false;
        }
        if self.closure.is_none() {
            self.closure = match &f {
                Expr::Bot => Some(Closure::Bot),
                Expr::Not(g) if **g == Expr::Top => Some(Closure::NotTop),
                Expr::Not(g) => match g.as_ref() {
                    Expr::Eq(a, b) if a == b => Some(Closure::NotRefl((**a).clone())),
                    _ => self.keys.get(&g.alpha_key()).map(|&i| Closure::Pair(self.formulas[i].clone(), f.clone())),
                },
                _ => self.keys.get(&not(key.clone())).map(|&i| Closure::Pair(f.clone(), self.formulas[i].clone())),
            };
        }
        if let Some(m) = f.max_var() {
            self.next_var = self.next_var.max(m + 1);
        }
        let mut ts = Vec::new();
        collect_terms(&f, &mut Vec::new(), &mut ts);
        for t in ts {
            if nesting(&t) <= self.term_depth && self.term_keys.insert(t.clone()) {
                self.terms.push(t);
                self.gamma_next.push(0);
            }
        }
        self.keys.insert(key, self.formulas.len());
        self.formulas.push(f);
        true
    }

    fn fresh_var(&mut self) -> u32 {
        let v = self.next_var;
        self.next_var += 1;
        v
    }
}

pub(crate) enum Outcome {
    Closed(Refutation),
    Open,
    Exhausted,
}

enum Action {
    Linear(Rule, Vec<Expr>),
    Split(Expr, Expr, Expr),
    Stop,
}

/// A branch preloaded with a theory's axioms, expanded up to the first split.
#[derive(Clone)]
pub(crate) struct Prepared {
    branch: Branch,
    prefix: Vec<(Rule, Vec<Expr>)>,
    used: usize,
}

impl Prepared {
    pub(crate) fn new(axioms: &[Expr]) -> Self {
        let mut branch = Branch { term_depth: axioms.iter().map(nesting).max().unwrap_or(0) + 1, ..Branch::default() };
        for a in axioms {
            branch.add(a.clone());
        }
        let mut prefix = Vec::new();
        let mut used = 0;
        while branch.closure.is_none() && branch.cursor < branch.formulas.len() {
            if let Some((rule, added)) = cursor_step(&mut branch) {
                used += 1;
                prefix.push((rule, added));
            }
        }
        Prepared { branch, prefix, used }
    }

    pub(crate) fn axioms_closed(&self) -> bool {
        self.branch.closure.is_some()
    }
}

/// Processes the formula under the cursor; a linear rule is returned when
/// it added something.
fn cursor_step(br: &mut Branch) -> Option<(Rule, Vec<Expr>)> {
    let f = br.formulas[br.cursor].clone();
    br.cursor += 1;
    match classify(&f) {
        Kind::Alpha(parts) => {
            let added: Vec<Expr> = parts.into_iter().filter(|p| br.add(p.clone())).collect();
            (!added.is_empty()).then_some((Rule::Alpha { src: f }, added))
        }
        Kind::Delta => {
            let var = br.fresh_var();
            let inst = instance(&f, &Expr::Var(var));
            br.add(inst.clone()).then_some((Rule::Delta { src: f, var }, vec![inst]))
        }
        Kind::Beta(a, b) => {
            let (ka, kb) = (a.alpha_key(), b.alpha_key());
            br.betas.push((f, a, b, ka, kb));
            None
        }
        Kind::Gamma => {
            br.gammas.push(f);
            br.gamma_low = 0;
            None
        }
        Kind::Literal => {
            let neg = matches!(f, Expr::Not(_));
            let atom = if let Expr::Not(g) = &f { (**g).clone() } else { f.clone() };
            if let (false, Expr::Eq(a, b)) = (neg, &atom) {
                if a.is_closed() && b.is_closed() {
                    if let Some((l, r)) = orient(a, b) {
                        br.equations.push((f.clone(), l, r));
                        br.rewrite_next.push(0);
                    }
                }
            }
            br.literals.push(f);
            None
        }
        Kind::Inert => None,
    }
}

fn next_action(br: &mut Branch) -> Action {
    while br.cursor < br.formulas.len() {
        if let Some((rule, added)) = cursor_step(br) {
            return Action::Linear(rule, added);
        }
    }
    for ei in 0..br.equations.len() {
        while br.rewrite_next[ei] < br.literals.len() {
            let li = br.rewrite_next[ei];
            br.rewrite_next[ei] += 1;
            let (equation, lhs, rhs) = br.equations[ei].clone();
            let literal = br.literals[li].clone();
            if literal == equation {
                continue;
            }
            let (atom, neg) = match &literal {
                Expr::Not(a) => ((**a).clone(), true),
                a => (a.clone(), false),
            };
            if !contains_term(&atom, &lhs) {
                continue;
            }
            let rewritten = atom.replace_term(&lhs, &rhs);
            let new = if neg { not(rewritten) } else { rewritten };
            if br.add(new.clone()) {
                return Action::Linear(Rule::Rewrite { equation, literal, lhs, rhs }, vec![new]);
            }
        }
    }
    while br.beta_low < br.betas.len() {
        let (src, a, b, ka, kb) = &br.betas[br.beta_low];
        if !br.keys.contains_key(ka) && !br.keys.contains_key(kb) {
            return Action::Split(src.clone(), a.clone(), b.clone());
        }
        br.beta_low += 1;
    }
    if !br.gammas.is_empty() {
        if br.terms.is_empty() {
            let v = br.fresh_var();
            br.term_keys.insert(Expr::Var(v));
            br.terms.push(Expr::Var(v));
            br.gamma_next.push(0);
        }
        while br.gamma_low < br.terms.len() {
            let ti = br.gamma_low;
            while br.gamma_next[ti] < br.gammas.len() {
                let gi = br.gamma_next[ti];
                br.gamma_next[ti] += 1;
                let (src, term) = (br.gammas[gi].clone(), br.terms[ti].clone());
                let inst = instance(&src, &term);
                if br.add(inst.clone()) {
                    return Action::Linear(Rule::Gamma { src }, vec![inst]);
                }
            }
            br.gamma_low += 1;
        }
    }
    Action::Stop
}

struct Search {
    budget: usize,
    used: usize,
}

enum Run {
    Closed(Node),
    Open,
    Exhausted,
}

impl Search {
    fn run(&mut self, mut br: Branch) -> Run {
        let mut steps = Vec::new();
        loop {
            if let Some(c) = br.closure.take() {
                return Run::Closed(Node { steps, end: End::Closed(c) });
            }
            if self.used >= self.budget {
                return Run::Exhausted;
            }
            self.used += 1;
            match next_action(&mut br) {
                Action::Linear(rule, added) => steps.push((rule, added)),
                Action::Split(src, a, b) => {
                    let mut left = br.clone();
                    left.add(a.clone());
                    let lt = match self.run(left) {
                        Run::Closed(n) => n,
                        other => return other,
                    };
                    br.add(b.clone());
                    let rt = match self.run(br) {
                        Run::Closed(n) => n,
                        other => return other,
                    };
                    let end = End::Split { src, left: (a, Box::new(lt)), right: (b, Box::new(rt)) };
                    return Run::Closed(Node { steps, end });
                }
                Action::Stop => return Run::Open,
            }
        }
    }
}

/// Runs the tableau on the prepared axioms plus `extra` within `budget` rule applications.
pub(crate) fn refute(prepared: &Prepared, extra: &[Expr], budget: usize) -> Outcome {
    let mut br = prepared.branch.clone();
    br.term_depth = extra.iter().map(|e| nesting(e) + 1).fold(br.term_depth, usize::max);
    for e in extra {
        br.add(e.clone());
    }
    let mut search = Search { budget, used: prepared.used };
    if search.used > budget {
        return Outcome::Exhausted;
    }
    match search.run(br) {
        Run::Closed(mut node) => {
            let mut steps = prepared.prefix.clone();
            steps.append(&mut node.steps);
            node.steps = steps;
            Outcome::Closed(Refutation { root: node })
        }
        Run::Open => Outcome::Open,
        Run::Exhausted => Outcome::Exhausted,
    }
}

/// A closed tableau.
#[derive(Clone, Debug)]
pub(crate) struct Refutation {
    root: Node,
}

impl Refutation {
    /// A derivation of `goal` whose premises are the used root formulas not
    /// alpha-equivalent to a member of `hypotheses`.
    pub(crate) fn derivation(&self, hypotheses: &[Expr], goal: &Expr) -> Derivation {
        let mut b = Builder::default();
        let (u, top) = b.node(&self.root);
        let mut premises = Vec::new();
        for f in &u {
            if !hypotheses.iter().any(|h| h.alpha_eq(f)) {
                premises.push(b.d.push(f.clone(), Justification::Premise));
            }
        }
        premises.push(top);
        b.taut_cons(&premises, goal.clone());
        b.d
    }
}

fn refuted(u: &[Expr]) -> Expr {
    not(conjunction(u.to_vec()))
}

fn member(u: &[Expr], f: &Expr) -> bool {
    let k = f.alpha_key();
    u.iter().any(|g| g.alpha_key() == k)
}

fn without(u: &[Expr], f: &Expr) -> Vec<Expr> {
    let k = f.alpha_key();
    u.iter().filter(|g| g.alpha_key() != k).cloned().collect()
}

fn with(mut u: Vec<Expr>, f: &Expr) -> Vec<Expr> {
    if !member(&u, f) {
        u.push(f.clone());
    }
    u
}

#[derive(Default)]
struct Builder {
    d: Derivation,
}

impl Builder {
    fn axiom(&mut self, f: Expr, ax: LogicalAxiom) -> usize {
        debug_assert!(ax.matches(&f), "{ax:?}: {f}");
        self.d.push(f, Justification::Axiom(ax))
    }

    /// Proves `concl` from the cited steps by one tautology and modus ponens.
    fn taut_cons(&mut self, premises: &[usize], concl: Expr) -> usize {
        let mut f = concl;
        for &p in premises.iter().rev() {
            f = imp(self.d.steps[p].formula.clone(), f);
        }
        let mut cur = self.axiom(f, LogicalAxiom::Tautology);
        for &p in premises {
            let Expr::Imp(_, rest) = &self.d.steps[cur].formula else { unreachable!() };
            let rest = (**rest).clone();
            cur = self.d.push(rest, Justification::ModusPonens { minor: p, major: cur });
        }
        cur
    }

    fn node(&mut self, n: &Node) -> (Vec<Expr>, usize) {
        let (mut u, mut i) = self.end(&n.end);
        for (rule, added) in n.steps.iter().rev() {
            if added.iter().any(|a| member(&u, a)) {
                (u, i) = self.rule(rule, added, u, i);
            }
        }
        (u, i)
    }

    fn end(&mut self, e: &End) -> (Vec<Expr>, usize) {
        match e {
            End::Closed(Closure::Bot) => (vec![Expr::Bot], self.taut_cons(&[], not(Expr::Bot))),
            End::Closed(Closure::NotTop) => {
                let u = vec![not(Expr::Top)];
                let i = self.taut_cons(&[], refuted(&u));
                (u, i)
            }
            End::Closed(Closure::NotRefl(t)) => {
                let r = self.axiom(eq(t.clone(), t.clone()), LogicalAxiom::EqualityRefl);
                let u = vec![not(eq(t.clone(), t.clone()))];
                let i = self.taut_cons(&[r], refuted(&u));
                (u, i)
            }
            End::Closed(Closure::Pair(a, na)) => {
                let u = vec![a.clone(), na.clone()];
                let i = self.taut_cons(&[], refuted(&u));
                (u, i)
            }
            End::Split { src, left, right } => {
                let (ul, il) = self.node(&left.1);
                if !member(&ul, &left.0) {
                    return (ul, il);
                }
                let (ur, ir) = self.node(&right.1);
                if !member(&ur, &right.0) {
                    return (ur, ir);
                }
                let mut u = without(&ul, &left.0);
                for f in without(&ur, &right.0) {
                    u = with(u, &f);
                }
                u = with(u, src);
                let i = self.taut_cons(&[il, ir], refuted(&u));
                (u, i)
            }
        }
    }

    fn rule(&mut self, rule: &Rule, added: &[Expr], uc: Vec<Expr>, ic: usize) -> (Vec<Expr>, usize) {
        match rule {
            Rule::Alpha { src } => {
                let mut u = uc.clone();
                for a in added {
                    u = without(&u, a);
                }
                let u = with(u, src);
                let i = self.taut_cons(&[ic], refuted(&u));
                (u, i)
            }
            Rule::Gamma { src, .. } => {
                let inst = &added[0];
                let ax = match (src, inst) {
                    (Expr::Forall(..), _) => self.axiom(imp(src.clone(), inst.clone()), LogicalAxiom::UniversalInstance),
                    (Expr::Not(ex), Expr::Not(body)) => {
                        self.axiom(imp((**body).clone(), (**ex).clone()), LogicalAxiom::ExistentialIntro)
                    }
                    _ => unreachable!("gamma source"),
                };
                let u = with(without(&uc, inst), src);
                let i = self.taut_cons(&[ax, ic], refuted(&u));
                (u, i)
            }
            Rule::Delta { src, var } => {
                let inst = &added[0];
                let rest = without(&uc, inst);
                let c = refuted(&rest);
                let s4 = match src {
                    Expr::Exists(..) => {
                        let s1 = self.taut_cons(&[ic], imp(inst.clone(), c.clone()));
                        let gen = forall(*var, imp(inst.clone(), c.clone()));
                        let s2 = self.d.push(gen.clone(), Justification::Generalization(s1));
                        let ax = self.axiom(imp(gen, imp(src.clone(), c.clone())), LogicalAxiom::ExistentialElim);
                        self.d.push(imp(src.clone(), c), Justification::ModusPonens { minor: s2, major: ax })
                    }
                    _ => {
                        let Expr::Not(body) = inst else { unreachable!("delta instance") };
                        let body = (**body).clone();
                        let nc = not(c);
                        let s1 = self.taut_cons(&[ic], imp(nc.clone(), body.clone()));
                        let gen = forall(*var, imp(nc.clone(), body.clone()));
                        let s2 = self.d.push(gen.clone(), Justification::Generalization(s1));
                        let target = imp(nc.clone(), forall(*var, body));
                        let ax = self.axiom(imp(gen, target.clone()), LogicalAxiom::UniversalDistribution);
                        self.d.push(target, Justification::ModusPonens { minor: s2, major: ax })
                    }
                };
                let u = with(rest, src);
                let i = self.taut_cons(&[s4], refuted(&u));
                (u, i)
            }
            Rule::Rewrite { equation, literal, lhs, rhs } => {
                let new = &added[0];
                // A positive literal needs lhs = rhs, a negative one rhs = lhs.
                let (from, to, old, newer) = match (literal, new) {
                    (Expr::Not(x), Expr::Not(y)) => (rhs, lhs, (**y).clone(), (**x).clone()),
                    _ => (lhs, rhs, literal.clone(), new.clone()),
                };
                let wanted = eq(from.clone(), to.clone());
                let mut prem = Vec::new();
                if *equation != wanted {
                    let sym = imp(equation.clone(), imp(eq(to.clone(), to.clone()), wanted.clone()));
                    prem.push(self.axiom(sym, LogicalAxiom::EqualitySubst));
                    prem.push(self.axiom(eq(to.clone(), to.clone()), LogicalAxiom::EqualityRefl));
                }
                prem.push(self.axiom(imp(wanted, imp(old, newer)), LogicalAxiom::EqualitySubst));
                prem.push(ic);
                let u = with(with(without(&uc, new), equation), literal);
                let i = self.taut_cons(&prem, refuted(&u));
                (u, i)
            }
        }
    }
}
