//! Surface syntax for formulas: reading from token trees and canonical printing.
//!
//! ```text
//! atoms          (pred arg…)  or a bare nullary `pred`
//! connectives    (not f) (and f…) (or f…) (-> f g) (<-> f g) (> f g)
//! generic        (forall x (> A B))
//! attitudes      (B ag f) (W ag f) (I ag f)
//! plans          (R (plan a1 a2 …)) (D (plan …)); steps are `name` or `(name arg…)`
//! wrappers       (eventually f) (can f) (imp f)
//! discourse      (site tau alpha beta) (info alpha beta) (rel Result alpha beta)
//! consequence    (yields f g)
//! variables      ?x as a term, ?phi as a formula, (R ?p) as a plan
//! ```
//!
//! Inside `(forall x …)` the bound variable is written bare.

use std::fmt::{self, Write as _};

use super::formula::{Action, AgentId, Attitude, Formula, Plan, PlanTerm, Term};
use super::sexpr::{self, Sexp, SyntaxError};

const KEYWORDS: &[&str] = &[
    "not", "and", "or", "->", "<->", ">", "forall", "B", "W", "I", "R", "D", "eventually", "can", "imp",
    "site", "info", "rel", "yields", "plan",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses one formula from text.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let sexp = sexpr::read_one(text)?;
    formula_from_sexp(&sexp)
}

pub fn formula_from_sexp(sexp: &Sexp) -> Result<Formula, SyntaxError> {
    Reader { scope: Vec::new() }.formula(sexp)
}

/// Parses a plan written `(plan a1 a2 …)`.
pub fn plan_from_sexp(sexp: &Sexp) -> Result<Plan, SyntaxError> {
    let reader = Reader { scope: Vec::new() };
    match reader.plan_term(sexp)? {
        PlanTerm::Plan(p) => Ok(p),
        PlanTerm::Var(_) => Err(SyntaxError::at(sexp.pos(), "expected a concrete plan")),
    }
}

pub fn parse_plan(text: &str) -> Result<Plan, SyntaxError> {
    plan_from_sexp(&sexpr::read_one(text)?)
}

struct Reader {
    scope: Vec<String>,
}

impl Reader {
    fn formula(&mut self, sexp: &Sexp) -> Result<Formula, SyntaxError> {
        match sexp {
            Sexp::Sym { text, pos } => {
                if let Some(v) = text.strip_prefix('?') {
                    if v.is_empty() {
                        return Err(SyntaxError::at(*pos, "empty variable name"));
                    }
                    Ok(Formula::Meta(v.to_string()))
                } else if is_keyword(text) {
                    Err(SyntaxError::at(*pos, format!("keyword `{text}` used as an atom")))
                } else {
                    Ok(Formula::Atom { pred: text.clone(), args: Vec::new() })
                }
            }
            Sexp::List { items, pos } => {
                let Some(head) = items.first() else {
                    return Err(SyntaxError::at(*pos, "empty list is not a formula"));
                };
                let Some(op) = head.as_sym() else {
                    return Err(SyntaxError::at(head.pos(), "expected an operator or predicate symbol"));
                };
                let args = &items[1..];
                let arity = |n: usize| -> Result<(), SyntaxError> {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(SyntaxError::at(*pos, format!("`{op}` takes {n} argument(s), found {}", args.len())))
                    }
                };
                match op {
                    "not" => {
                        arity(1)?;
                        Ok(Formula::Not(Box::new(self.formula(&args[0])?)))
                    }
                    "and" => Ok(Formula::And(self.formulas(args)?)),
                    "or" => Ok(Formula::Or(self.formulas(args)?)),
                    "->" | "<->" | ">" | "yields" => {
                        arity(2)?;
                        let a = Box::new(self.formula(&args[0])?);
                        let b = Box::new(self.formula(&args[1])?);
                        Ok(match op {
                            "->" => Formula::Implies(a, b),
                            "<->" => Formula::Iff(a, b),
                            ">" => Formula::Default(a, b),
                            _ => Formula::Yields(a, b),
                        })
                    }
                    "forall" => self.generic(args, *pos),
                    "B" | "W" | "I" => {
                        arity(2)?;
                        let kind = match op {
                            "B" => Attitude::Believes,
                            "W" => Attitude::Wants,
                            _ => Attitude::Intends,
                        };
                        let agent = match args[0].as_sym() {
                            Some(a) if !a.starts_with('?') => AgentId::new(a),
                            _ => return Err(SyntaxError::at(args[0].pos(), "expected an agent symbol")),
                        };
                        Ok(Formula::Att { kind, agent, body: Box::new(self.formula(&args[1])?) })
                    }
                    "R" | "D" => {
                        arity(1)?;
                        let p = self.plan_term(&args[0])?;
                        Ok(if op == "R" { Formula::Doing(p) } else { Formula::Done(p) })
                    }
                    "eventually" | "can" | "imp" => {
                        arity(1)?;
                        let inner = Box::new(self.formula(&args[0])?);
                        Ok(match op {
                            "eventually" => Formula::Eventually(inner),
                            "can" => Formula::Can(inner),
                            _ => Formula::Imp(inner),
                        })
                    }
                    "site" => {
                        arity(3)?;
                        Ok(Formula::Site {
                            tau: self.term(&args[0])?,
                            alpha: self.term(&args[1])?,
                            beta: self.term(&args[2])?,
                        })
                    }
                    "info" => {
                        arity(2)?;
                        Ok(Formula::Info { alpha: self.term(&args[0])?, beta: self.term(&args[1])? })
                    }
                    "rel" => {
                        if args.len() < 2 {
                            return Err(SyntaxError::at(*pos, "`rel` takes a relation name and arguments"));
                        }
                        let relation = match args[0].as_sym() {
                            Some(r) if !r.starts_with('?') => r.to_string(),
                            _ => return Err(SyntaxError::at(args[0].pos(), "expected a relation name")),
                        };
                        let terms = args[1..].iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                        Ok(Formula::Rel { relation, args: terms })
                    }
                    "plan" => Err(SyntaxError::at(*pos, "a plan is not a formula; wrap it in R or D")),
                    pred if pred.starts_with('?') => {
                        Err(SyntaxError::at(head.pos(), "a variable cannot be applied as a predicate"))
                    }
                    pred => {
                        let terms = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                        Ok(Formula::Atom { pred: pred.to_string(), args: terms })
                    }
                }
            }
        }
    }

    fn formulas(&mut self, items: &[Sexp]) -> Result<Vec<Formula>, SyntaxError> {
        items.iter().map(|i| self.formula(i)).collect()
    }

    fn generic(&mut self, args: &[Sexp], pos: sexpr::Pos) -> Result<Formula, SyntaxError> {
        if args.len() != 2 {
            return Err(SyntaxError::at(pos, "`forall` takes a variable and a `>` body"));
        }
        let var = match &args[0] {
            Sexp::Sym { text, .. } if !text.starts_with('?') && !is_keyword(text) => text.clone(),
            Sexp::List { pos, .. } => {
                return Err(SyntaxError::at(*pos, "generics bind exactly one variable"));
            }
            other => return Err(SyntaxError::at(other.pos(), "expected a variable name")),
        };
        let body = &args[1];
        let parts = match body.as_list() {
            Some(items) if body.head() == Some(">") && items.len() == 3 => items,
            _ => return Err(SyntaxError::at(body.pos(), "the body of `forall` must be a `>` conditional")),
        };
        self.scope.push(var.clone());
        let antecedent = self.formula(&parts[1]);
        let consequent = self.formula(&parts[2]);
        self.scope.pop();
        let (antecedent, consequent) = (antecedent?, consequent?);
        for (side, f) in [("antecedent", &antecedent), ("consequent", &consequent)] {
            if !super::free_variables(f).contains(&var) {
                return Err(SyntaxError::at(pos, format!("bound variable `{var}` does not occur in the {side}")));
            }
        }
        Ok(Formula::Generic { var, antecedent: Box::new(antecedent), consequent: Box::new(consequent) })
    }

    fn term(&self, sexp: &Sexp) -> Result<Term, SyntaxError> {
        match sexp {
            Sexp::Sym { text, pos } => {
                if let Some(v) = text.strip_prefix('?') {
                    if v.is_empty() {
                        return Err(SyntaxError::at(*pos, "empty variable name"));
                    }
                    Ok(Term::Var(v.to_string()))
                } else if self.scope.iter().any(|s| s == text) {
                    Ok(Term::Var(text.clone()))
                } else {
                    Ok(Term::Const(text.clone()))
                }
            }
            Sexp::List { pos, .. } => Err(SyntaxError::at(*pos, "expected a term, found a list")),
        }
    }

    fn plan_term(&self, sexp: &Sexp) -> Result<PlanTerm, SyntaxError> {
        if let Some(v) = sexp.as_sym().and_then(|s| s.strip_prefix('?')) {
            return Ok(PlanTerm::Var(v.to_string()));
        }
        let items = match sexp.as_list() {
            Some(items) if sexp.head() == Some("plan") => items,
            _ => return Err(SyntaxError::at(sexp.pos(), "expected `(plan …)` or a plan variable")),
        };
        let mut steps = Vec::new();
        for step in &items[1..] {
            steps.push(match step {
                Sexp::Sym { text, .. } if !text.starts_with('?') => Action::new(text.clone()),
                Sexp::List { items, pos } => {
                    let mut syms = items.iter().map(|i| i.as_sym().map(str::to_string));
                    let name = syms.next().flatten().ok_or_else(|| SyntaxError::at(*pos, "expected an action name"))?;
                    let args = syms
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| SyntaxError::at(*pos, "action arguments are constants"))?;
                    Action::with_args(name, args)
                }
                other => return Err(SyntaxError::at(other.pos(), "expected an action")),
            });
        }
        Plan::new(steps)
            .map(PlanTerm::Plan)
            .ok_or_else(|| SyntaxError::at(sexp.pos(), "a plan has at least one step"))
    }
}

/// Canonical text for a formula; `parse_formula` inverts it.
pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(&mut s, self, &mut Vec::new());
        out.write_str(&s)
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_plan(&mut s, self);
        out.write_str(&s)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(out, "?{v}"),
            Term::Const(c) => out.write_str(c),
        }
    }
}

fn write_term(s: &mut String, t: &Term, scope: &[String]) {
    match t {
        Term::Var(v) if scope.contains(v) => s.push_str(v),
        Term::Var(v) => {
            s.push('?');
            s.push_str(v);
        }
        Term::Const(c) => s.push_str(c),
    }
}

fn write_terms(s: &mut String, ts: &[Term], scope: &[String]) {
    for t in ts {
        s.push(' ');
        write_term(s, t, scope);
    }
}

fn write_plan(s: &mut String, p: &Plan) {
    s.push_str("(plan");
    for step in p.steps() {
        s.push(' ');
        if step.args.is_empty() {
            s.push_str(&step.name);
        } else {
            let _ = write!(s, "({} {})", step.name, step.args.join(" "));
        }
    }
    s.push(')');
}

fn write_plan_term(s: &mut String, p: &PlanTerm) {
    match p {
        PlanTerm::Var(v) => {
            s.push('?');
            s.push_str(v);
        }
        PlanTerm::Plan(p) => write_plan(s, p),
    }
}

fn write_formula(s: &mut String, f: &Formula, scope: &mut Vec<String>) {
    let op = |s: &mut String, name: &str, parts: &[&Formula], scope: &mut Vec<String>| {
        s.push('(');
        s.push_str(name);
        for p in parts {
            s.push(' ');
            write_formula(s, p, scope);
        }
        s.push(')');
    };
    match f {
        Formula::Atom { pred, args } if args.is_empty() => s.push_str(pred),
        Formula::Atom { pred, args } => {
            s.push('(');
            s.push_str(pred);
            write_terms(s, args, scope);
            s.push(')');
        }
        Formula::Not(a) => op(s, "not", &[a], scope),
        Formula::And(ps) => op(s, "and", &ps.iter().collect::<Vec<_>>(), scope),
        Formula::Or(ps) => op(s, "or", &ps.iter().collect::<Vec<_>>(), scope),
        Formula::Implies(a, b) => op(s, "->", &[a, b], scope),
        Formula::Iff(a, b) => op(s, "<->", &[a, b], scope),
        Formula::Default(a, b) => op(s, ">", &[a, b], scope),
        Formula::Yields(a, b) => op(s, "yields", &[a, b], scope),
        Formula::Generic { var, antecedent, consequent } => {
            let _ = write!(s, "(forall {var} ");
            scope.push(var.clone());
            op(s, ">", &[antecedent, consequent], scope);
            scope.pop();
            s.push(')');
        }
        Formula::Att { kind, agent, body } => {
            let _ = write!(s, "({} {} ", kind.keyword(), agent);
            write_formula(s, body, scope);
            s.push(')');
        }
        Formula::Doing(p) | Formula::Done(p) => {
            s.push_str(if matches!(f, Formula::Doing(_)) { "(R " } else { "(D " });
            write_plan_term(s, p);
            s.push(')');
        }
        Formula::Eventually(a) => op(s, "eventually", &[a], scope),
        Formula::Can(a) => op(s, "can", &[a], scope),
        Formula::Imp(a) => op(s, "imp", &[a], scope),
        Formula::Site { tau, alpha, beta } => {
            s.push_str("(site");
            write_terms(s, &[tau.clone(), alpha.clone(), beta.clone()], scope);
            s.push(')');
        }
        Formula::Info { alpha, beta } => {
            s.push_str("(info");
            write_terms(s, &[alpha.clone(), beta.clone()], scope);
            s.push(')');
        }
        Formula::Rel { relation, args } => {
            let _ = write!(s, "(rel {relation}");
            write_terms(s, args, scope);
            s.push(')');
        }
        Formula::Meta(v) => {
            s.push('?');
            s.push_str(v);
        }
    }
}
