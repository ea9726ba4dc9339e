//! Propositional reasoning over prime formulas.
//!
//! A prime is an atom or a quantified formula; alpha-equivalent primes are
//! identified. Tautology and skeleton satisfiability share one small DPLL.

use std::collections::HashMap;

use crate::syntax::Expr;

#[derive(Clone, Debug)]
enum Prop {
    Var(usize),
    Const(bool),
    Not(Box<Prop>),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Imp(Box<Prop>, Box<Prop>),
}

#[derive(Default)]
struct Skeleton {
    primes: HashMap<Expr, usize>,
}

impl Skeleton {
    fn compile(&mut self, e: &Expr) -> Prop {
        match e {
            Expr::Bot => Prop::Const(false),
            Expr::Top => Prop::Const(true),
            Expr::Not(a) => Prop::Not(Box::new(self.compile(a))),
            Expr::And(a, b) => Prop::And(Box::new(self.compile(a)), Box::new(self.compile(b))),
            Expr::Or(a, b) => Prop::Or(Box::new(self.compile(a)), Box::new(self.compile(b))),
            Expr::Imp(a, b) => Prop::Imp(Box::new(self.compile(a)), Box::new(self.compile(b))),
            _ => {
                let n = self.primes.len();
                Prop::Var(*self.primes.entry(e.alpha_key()).or_insert(n))
            }
        }
    }
}

fn eval(p: &Prop, asg: &[Option<bool>]) -> Option<bool> {
    match p {
        Prop::Var(i) => asg[*i],
        Prop::Const(b) => Some(*b),
        Prop::Not(a) => eval(a, asg).map(|b| !b),
        Prop::And(a, b) => match (eval(a, asg), eval(b, asg)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Prop::Or(a, b) => match (eval(a, asg), eval(b, asg)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Prop::Imp(a, b) => match (eval(a, asg), eval(b, asg)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
    }
}

fn first_unassigned(p: &Prop, asg: &[Option<bool>]) -> Option<usize> {
    match p {
        Prop::Var(i) => asg[*i].is_none().then_some(*i),
        Prop::Const(_) => None,
        Prop::Not(a) => first_unassigned(a, asg),
        Prop::And(a, b) | Prop::Or(a, b) | Prop::Imp(a, b) => {
            first_unassigned(a, asg).or_else(|| first_unassigned(b, asg))
        }
    }
}

fn unit(p: &Prop) -> Option<(usize, bool)> {
    match p {
        Prop::Var(i) => Some((*i, true)),
        Prop::Not(a) => match a.as_ref() {
            Prop::Var(i) => Some((*i, false)),
            _ => None,
        },
        _ => None,
    }
}

fn search(clauses: &[Prop], asg: &mut Vec<Option<bool>>) -> bool {
    let mut open = Vec::new();
    for c in clauses {
        match eval(c, asg) {
            Some(false) => return false,
            Some(true) => {}
            None => open.push(c),
        }
    }
    if open.is_empty() {
        return true;
    }
    if let Some((i, b)) = open.iter().find_map(|c| unit(c)) {
        asg[i] = Some(b);
        let ok = search(clauses, asg);
        asg[i] = None;
        return ok;
    }
    let var = first_unassigned(open[0], asg).expect("undetermined formula has an unassigned prime");
    for b in [true, false] {
        asg[var] = Some(b);
        if search(clauses, asg) {
            asg[var] = None;
            return true;
        }
    }
    asg[var] = None;
    false
}

/// Whether some assignment to the primes makes every formula true.
pub fn skeleton_satisfiable(formulas: &[Expr]) -> bool {
    let mut sk = Skeleton::default();
    let clauses: Vec<Prop> = formulas.iter().map(|f| sk.compile(f)).collect();
    let mut asg = vec![None; sk.primes.len()];
    search(&clauses, &mut asg)
}

/// Whether `e` is true under every assignment to its primes.
pub fn is_tautology(e: &Expr) -> bool {
    e.is_formula() && !skeleton_satisfiable(&[crate::syntax::not(e.clone())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::*;

    fn p(i: u32) -> Expr {
        pred(i, vec![])
    }

    #[test]
    fn classic_tautologies() {
        let (a, b, c) = (p(0), p(1), p(2));
        assert!(is_tautology(&imp(a.clone(), imp(b.clone(), a.clone()))));
        assert!(is_tautology(&or(a.clone(), not(a.clone()))));
        assert!(is_tautology(&imp(
            imp(a.clone(), imp(b.clone(), c.clone())),
            imp(imp(a.clone(), b.clone()), imp(a.clone(), c.clone()))
        )));
        assert!(!is_tautology(&imp(a.clone(), b.clone())));
        assert!(!is_tautology(&a));
        assert!(is_tautology(&Expr::Top));
        assert!(!is_tautology(&Expr::Bot));
    }

    #[test]
    fn primes_identified_up_to_alpha() {
        let q = |v| pred(3, vec![Expr::Var(v)]);
        let f = imp(forall(0, q(0)), forall(1, q(1)));
        assert!(is_tautology(&f));
        assert!(!is_tautology(&imp(forall(0, q(0)), exists(0, q(0)))));
    }

    #[test]
    fn skeleton() {
        assert!(!skeleton_satisfiable(&[p(0), not(p(0))]));
        assert!(skeleton_satisfiable(&[p(0), p(1)]));
        assert!(!skeleton_satisfiable(&[p(0), imp(p(0), p(1)), not(p(1))]));
        assert!(skeleton_satisfiable(&[]));
    }

    #[test]
    fn agrees_with_truth_tables() {
        // Every formula over two atoms up to depth 2, checked against all four valuations.
        let atoms = [p(0), p(1)];
        let mut layer: Vec<Expr> = atoms.to_vec();
        layer.push(Expr::Bot);
        let mut all = layer.clone();
        for _ in 0..2 {
            let mut next = Vec::new();
            for x in &layer {
                next.push(not(x.clone()));
                for y in &layer {
                    next.push(and(x.clone(), y.clone()));
                    next.push(or(x.clone(), y.clone()));
                    next.push(imp(x.clone(), y.clone()));
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
            layer.truncate(60);
        }
        fn truth(e: &Expr, v: [bool; 2]) -> bool {
            match e {
                Expr::Pred(i, _) => v[*i as usize],
                Expr::Bot => false,
                Expr::Top => true,
                Expr::Not(a) => !truth(a, v),
                Expr::And(a, b) => truth(a, v) && truth(b, v),
                Expr::Or(a, b) => truth(a, v) || truth(b, v),
                Expr::Imp(a, b) => !truth(a, v) || truth(b, v),
                _ => unreachable!(),
            }
        }
        for e in &all {
            let vals = [[false, false], [false, true], [true, false], [true, true]];
            let taut = vals.iter().all(|v| truth(e, *v));
            let sat = vals.iter().any(|v| truth(e, *v));
            assert_eq!(is_tautology(e), taut, "{e}");
            assert_eq!(skeleton_satisfiable(std::slice::from_ref(e)), sat, "{e}");
        }
    }
}
