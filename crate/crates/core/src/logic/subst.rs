//! Substitutions, free variables, one-way matching and the instance relation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::formula::{Formula, Plan, PlanTerm, Term};
use super::LogicError;

/// Bindings for term variables (to constants), formula metavariables and
/// plan variables. Only term bindings appear in user-facing generics; the
/// other two kinds serve rule schemas.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    pub terms: BTreeMap<String, String>,
    pub formulas: BTreeMap<String, Formula>,
    pub plans: BTreeMap<String, Plan>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(var: &str, constant: &str) -> Self {
        let mut s = Self::new();
        s.terms.insert(var.to_string(), constant.to_string());
        s
    }

    pub fn bind_term(mut self, var: &str, constant: &str) -> Self {
        self.terms.insert(var.to_string(), constant.to_string());
        self
    }

    pub fn bind_formula(mut self, var: &str, f: Formula) -> Self {
        self.formulas.insert(var.to_string(), f);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.formulas.is_empty() && self.plans.is_empty()
    }

    pub fn term(&self, var: &str) -> Option<&str> {
        self.terms.get(var).map(String::as_str)
    }

    fn without_term(&self, var: &str) -> Substitution {
        let mut s = self.clone();
        s.terms.remove(var);
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(String, String)> = Vec::new();
        parts.extend(self.terms.iter().map(|(k, v)| (k.clone(), v.clone())));
        parts.extend(self.formulas.iter().map(|(k, v)| (k.clone(), v.to_string())));
        parts.extend(self.plans.iter().map(|(k, v)| (k.clone(), v.to_string())));
        parts.sort();
        f.write_str("{")?;
        for (i, (k, v)) in parts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "?{k}={v}")?;
        }
        f.write_str("}")
    }
}

/// Replaces free variables bound by `s`. Variables bound by a generic are untouched.
pub fn substitute(f: &Formula, s: &Substitution) -> Formula {
    if s.is_empty() {
        return f.clone();
    }
    let sub = |g: &Formula| Box::new(substitute(g, s));
    let term = |t: &Term| match t {
        Term::Var(v) => s.terms.get(v).map(|c| Term::Const(c.clone())).unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
    };
    let plan = |p: &PlanTerm| match p {
        PlanTerm::Var(v) => s.plans.get(v).map(|p| PlanTerm::Plan(p.clone())).unwrap_or_else(|| p.clone()),
        PlanTerm::Plan(_) => p.clone(),
    };
    match f {
        Formula::Atom { pred, args } => Formula::Atom { pred: pred.clone(), args: args.iter().map(term).collect() },
        Formula::Not(a) => Formula::Not(sub(a)),
        Formula::And(ps) => Formula::And(ps.iter().map(|p| substitute(p, s)).collect()),
        Formula::Or(ps) => Formula::Or(ps.iter().map(|p| substitute(p, s)).collect()),
        Formula::Implies(a, b) => Formula::Implies(sub(a), sub(b)),
        Formula::Iff(a, b) => Formula::Iff(sub(a), sub(b)),
        Formula::Default(a, b) => Formula::Default(sub(a), sub(b)),
        Formula::Yields(a, b) => Formula::Yields(sub(a), sub(b)),
        Formula::Generic { var, antecedent, consequent } => {
            let inner = s.without_term(var);
            Formula::Generic {
                var: var.clone(),
                antecedent: Box::new(substitute(antecedent, &inner)),
                consequent: Box::new(substitute(consequent, &inner)),
            }
        }
        Formula::Att { kind, agent, body } => Formula::Att { kind: *kind, agent: agent.clone(), body: sub(body) },
        Formula::Doing(p) => Formula::Doing(plan(p)),
        Formula::Done(p) => Formula::Done(plan(p)),
        Formula::Eventually(a) => Formula::Eventually(sub(a)),
        Formula::Can(a) => Formula::Can(sub(a)),
        Formula::Imp(a) => Formula::Imp(sub(a)),
        Formula::Site { tau, alpha, beta } => Formula::Site { tau: term(tau), alpha: term(alpha), beta: term(beta) },
        Formula::Info { alpha, beta } => Formula::Info { alpha: term(alpha), beta: term(beta) },
        Formula::Rel { relation, args } => Formula::Rel { relation: relation.clone(), args: args.iter().map(term).collect() },
        Formula::Meta(v) => s.formulas.get(v).cloned().unwrap_or_else(|| f.clone()),
    }
}

/// Term, formula and plan variables with a free occurrence.
pub fn free_variables(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(f, &mut Vec::new(), &mut out);
    out
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let terms = |ts: &[&Term], bound: &Vec<String>, out: &mut BTreeSet<String>| {
        for t in ts {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        }
    };
    match f {
        Formula::Atom { args, .. } | Formula::Rel { args, .. } => terms(&args.iter().collect::<Vec<_>>(), bound, out),
        Formula::Site { tau, alpha, beta } => terms(&[tau, alpha, beta], bound, out),
        Formula::Info { alpha, beta } => terms(&[alpha, beta], bound, out),
        Formula::Doing(PlanTerm::Var(v)) | Formula::Done(PlanTerm::Var(v)) | Formula::Meta(v) => {
            out.insert(v.clone());
        }
        Formula::Generic { var, antecedent, consequent } => {
            bound.push(var.clone());
            collect_free(antecedent, bound, out);
            collect_free(consequent, bound, out);
            bound.pop();
        }
        other => {
            for c in other.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

/// One-way matching of `pattern` against `target`, extending `s`.
/// Leaves `s` unspecified on failure; callers pass a scratch clone.
pub fn match_pattern(pattern: &Formula, target: &Formula, s: &mut Substitution) -> bool {
    Matcher { bound: Vec::new() }.formula(pattern, target, s)
}

struct Matcher {
    bound: Vec<(String, String)>,
}

impl Matcher {
    fn term(&self, p: &Term, t: &Term, s: &mut Substitution) -> bool {
        match (p, t) {
            (Term::Const(a), Term::Const(b)) => a == b,
            (Term::Var(v), _) if self.bound.iter().any(|(pv, _)| pv == v) => {
                let tv = &self.bound.iter().rev().find(|(pv, _)| pv == v).unwrap().1;
                matches!(t, Term::Var(w) if w == tv)
            }
            (Term::Var(v), Term::Const(c)) => match s.terms.get(v) {
                Some(existing) => existing == c,
                None => {
                    s.terms.insert(v.clone(), c.clone());
                    true
                }
            },
            (Term::Const(_), Term::Var(_)) | (Term::Var(_), Term::Var(_)) => false,
        }
    }

    fn terms(&self, ps: &[Term], ts: &[Term], s: &mut Substitution) -> bool {
        ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| self.term(p, t, s))
    }

    fn plan(&self, p: &PlanTerm, t: &PlanTerm, s: &mut Substitution) -> bool {
        match (p, t) {
            (PlanTerm::Plan(a), PlanTerm::Plan(b)) => a == b,
            (PlanTerm::Var(v), PlanTerm::Plan(b)) => match s.plans.get(v) {
                Some(existing) => existing == b,
                None => {
                    s.plans.insert(v.clone(), b.clone());
                    true
                }
            },
            (PlanTerm::Var(a), PlanTerm::Var(b)) => a == b && !s.plans.contains_key(a),
            (PlanTerm::Plan(_), PlanTerm::Var(_)) => false,
        }
    }

    fn all(&mut self, ps: &[Formula], ts: &[Formula], s: &mut Substitution) -> bool {
        ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| self.formula(p, t, s))
    }

    fn formula(&mut self, p: &Formula, t: &Formula, s: &mut Substitution) -> bool {
        use Formula as F;
        match (p, t) {
            (F::Meta(v), _) => match s.formulas.get(v) {
                Some(existing) => existing == t,
                None => {
                    s.formulas.insert(v.clone(), t.clone());
                    true
                }
            },
            (F::Atom { pred: a, args: x }, F::Atom { pred: b, args: y }) => a == b && self.terms(x, y, s),
            (F::Rel { relation: a, args: x }, F::Rel { relation: b, args: y }) => a == b && self.terms(x, y, s),
            (F::Site { tau: a1, alpha: a2, beta: a3 }, F::Site { tau: b1, alpha: b2, beta: b3 }) => {
                self.term(a1, b1, s) && self.term(a2, b2, s) && self.term(a3, b3, s)
            }
            (F::Info { alpha: a1, beta: a2 }, F::Info { alpha: b1, beta: b2 }) => {
                self.term(a1, b1, s) && self.term(a2, b2, s)
            }
            (F::Not(a), F::Not(b))
            | (F::Eventually(a), F::Eventually(b))
            | (F::Can(a), F::Can(b))
            | (F::Imp(a), F::Imp(b)) => self.formula(a, b, s),
            (F::And(x), F::And(y)) | (F::Or(x), F::Or(y)) => self.all(x, y, s),
            (F::Implies(a1, a2), F::Implies(b1, b2))
            | (F::Iff(a1, a2), F::Iff(b1, b2))
            | (F::Default(a1, a2), F::Default(b1, b2))
            | (F::Yields(a1, a2), F::Yields(b1, b2)) => self.formula(a1, b1, s) && self.formula(a2, b2, s),
            (F::Att { kind: k1, agent: g1, body: a }, F::Att { kind: k2, agent: g2, body: b }) => {
                k1 == k2 && g1 == g2 && self.formula(a, b, s)
            }
            (F::Doing(a), F::Doing(b)) | (F::Done(a), F::Done(b)) => self.plan(a, b, s),
            (
                F::Generic { var: v, antecedent: a1, consequent: a2 },
                F::Generic { var: w, antecedent: b1, consequent: b2 },
            ) => {
                self.bound.push((v.clone(), w.clone()));
                let ok = self.formula(a1, b1, s) && self.formula(a2, b2, s);
                self.bound.pop();
                ok
            }
            _ => false,
        }
    }
}

/// `Some({x↦d})` when `candidate` is `A[x/d] ∧ B[x/d]` up to conjunct order.
pub fn instance_of(generic: &Formula, candidate: &Formula) -> Result<Option<Substitution>, LogicError> {
    let Formula::Generic { var, antecedent, consequent } = generic else {
        return Err(LogicError::NotGeneric(generic.to_string()));
    };
    let mut target = candidate.conjuncts();
    target.sort();
    let mut seen = BTreeSet::new();
    for d in candidate.domain_constants() {
        if !seen.insert(d.clone()) {
            continue;
        }
        let s = Substitution::single(var, &d);
        let mut expected = substitute(antecedent, &s).conjuncts();
        expected.extend(substitute(consequent, &s).conjuncts());
        expected.sort();
        if expected == target {
            return Ok(Some(s));
        }
    }
    Ok(None)
}
