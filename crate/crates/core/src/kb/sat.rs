//! Ground propositional satisfiability.
//!
//! Only `not`, `and`, `or`, `->` and `<->` are interpreted. Any other formula
//! (attitudes, generics, wrappers, discourse tokens, atoms) is one opaque
//! boolean variable, identified by structural equality.
//!
//! The solver fixes unit literals first and then backtracks over the
//! remaining variables, pruning a branch as soon as a three-valued
//! evaluation makes some formula false.

use std::collections::HashMap;

use crate::logic::Formula;

#[derive(Clone, Debug)]
enum Expr {
    Var(usize),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

/// Opaque subformulas of a formula, in first-occurrence order.
pub fn opaque_atoms(f: &Formula) -> Vec<&Formula> {
    let mut out = Vec::new();
    collect_atoms(f, &mut out);
    out
}

fn collect_atoms<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Not(a) => collect_atoms(a, out),
        Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| collect_atoms(p, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        atom => {
            if !out.contains(&atom) {
                out.push(atom)
            }
        }
    }
}

#[derive(Default)]
struct Indexer<'a> {
    base: Option<&'a HashMap<Formula, usize>>,
    base_len: usize,
    extra: HashMap<Formula, usize>,
}

impl Indexer<'_> {
    fn index(&mut self, atom: &Formula) -> usize {
        if let Some(&i) = self.base.and_then(|b| b.get(atom)) {
            return i;
        }
        let next = self.base_len + self.extra.len();
        *self.extra.entry(atom.clone()).or_insert(next)
    }

    fn compile(&mut self, f: &Formula) -> Expr {
        match f {
            Formula::Not(a) => Expr::Not(Box::new(self.compile(a))),
            Formula::And(ps) => Expr::And(ps.iter().map(|p| self.compile(p)).collect()),
            Formula::Or(ps) => Expr::Or(ps.iter().map(|p| self.compile(p)).collect()),
            Formula::Implies(a, b) => Expr::Implies(Box::new(self.compile(a)), Box::new(self.compile(b))),
            Formula::Iff(a, b) => Expr::Iff(Box::new(self.compile(a)), Box::new(self.compile(b))),
            atom => Expr::Var(self.index(atom)),
        }
    }

    fn len(&self) -> usize {
        self.base_len + self.extra.len()
    }
}

/// A compiled set of ground formulas that can be queried repeatedly.
#[derive(Clone, Debug, Default)]
pub struct Theory {
    atoms: HashMap<Formula, usize>,
    exprs: Vec<Expr>,
}

impl Theory {
    pub fn new<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut ix = Indexer::default();
        let exprs = formulas.into_iter().map(|f| ix.compile(f)).collect();
        Theory { atoms: ix.extra, exprs }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn satisfiable(&self) -> bool {
        self.consistent_with(&[])
    }

    /// Whether the theory together with `extra` has a model.
    pub fn consistent_with(&self, extra: &[&Formula]) -> bool {
        let mut ix = Indexer { base: Some(&self.atoms), base_len: self.atoms.len(), extra: HashMap::new() };
        let more: Vec<Expr> = extra.iter().map(|f| ix.compile(f)).collect();
        solve(self.exprs.iter().chain(more.iter()), ix.len())
    }

    /// Whether every model of the theory satisfies `f`.
    pub fn entails(&self, f: &Formula) -> bool {
        let negated = Formula::Not(Box::new(f.clone()));
        !self.consistent_with(&[&negated])
    }
}

pub fn satisfiable<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> bool {
    Theory::new(formulas).satisfiable()
}

pub fn entails<'a>(premises: impl IntoIterator<Item = &'a Formula>, f: &Formula) -> bool {
    Theory::new(premises).entails(f)
}

fn solve<'a>(exprs: impl Iterator<Item = &'a Expr>, n: usize) -> bool {
    let mut assign: Vec<Option<bool>> = vec![None; n];
    let mut rest: Vec<&Expr> = Vec::new();
    for e in exprs {
        if !fix_units(e, true, &mut assign) {
            rest.push(e);
        }
    }
    let mut order = Vec::new();
    let mut seen = vec![false; n];
    for e in &rest {
        vars(e, &mut |v| {
            if !seen[v] && assign[v].is_none() {
                seen[v] = true;
                order.push(v);
            }
        });
    }
    search(&rest, &mut assign, &order, 0)
}

/// If `e` asserted with `polarity` is a conjunction of literals, fixes them and
/// returns true. On a clash nothing is fixed and `e` stays in the search set,
/// where it evaluates to false.
fn fix_units(e: &Expr, polarity: bool, assign: &mut [Option<bool>]) -> bool {
    match (e, polarity) {
        (Expr::Var(v), p) => {
            match assign[*v] {
                None => assign[*v] = Some(p),
                Some(q) if q == p => {}
                Some(_) => return false,
            }
            true
        }
        (Expr::Not(a), p) if matches!(**a, Expr::Var(_)) => fix_units(a, !p, assign),
        (Expr::And(ps), true) if ps.iter().all(is_literal) => {
            let snapshot = assign.to_vec();
            if ps.iter().all(|p| fix_units(p, true, assign)) {
                true
            } else {
                assign.copy_from_slice(&snapshot);
                false
            }
        }
        _ => false,
    }
}

fn is_literal(e: &Expr) -> bool {
    match e {
        Expr::Var(_) => true,
        Expr::Not(a) => matches!(**a, Expr::Var(_)),
        _ => false,
    }
}

fn vars(e: &Expr, f: &mut impl FnMut(usize)) {
    match e {
        Expr::Var(v) => f(*v),
        Expr::Not(a) => vars(a, f),
        Expr::And(ps) | Expr::Or(ps) => ps.iter().for_each(|p| vars(p, f)),
        Expr::Implies(a, b) | Expr::Iff(a, b) => {
            vars(a, f);
            vars(b, f);
        }
    }
}

fn eval(e: &Expr, assign: &[Option<bool>]) -> Option<bool> {
    match e {
        Expr::Var(v) => assign[*v],
        Expr::Not(a) => eval(a, assign).map(|b| !b),
        Expr::And(ps) => {
            let mut all = Some(true);
            for p in ps {
                match eval(p, assign) {
                    Some(false) => return Some(false),
                    None => all = None,
                    Some(true) => {}
                }
            }
            all
        }
        Expr::Or(ps) => {
            let mut any = Some(false);
            for p in ps {
                match eval(p, assign) {
                    Some(true) => return Some(true),
                    None => any = None,
                    Some(false) => {}
                }
            }
            any
        }
        Expr::Implies(a, b) => match (eval(a, assign), eval(b, assign)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
        Expr::Iff(a, b) => match (eval(a, assign), eval(b, assign)) {
            (Some(x), Some(y)) => Some(x == y),
            _ => None,
        },
    }
}

fn search(exprs: &[&Expr], assign: &mut Vec<Option<bool>>, order: &[usize], from: usize) -> bool {
    let mut open = false;
    for e in exprs {
        match eval(e, assign) {
            Some(false) => return false,
            None => open = true,
            Some(true) => {}
        }
    }
    if !open {
        return true;
    }
    let Some(k) = (from..order.len()).find(|&k| assign[order[k]].is_none()) else {
        return false;
    };
    let v = order[k];
    for value in [true, false] {
        assign[v] = Some(value);
        if search(exprs, assign, order, k + 1) {
            assign[v] = None;
            return true;
        }
    }
    assign[v] = None;
    false
}
