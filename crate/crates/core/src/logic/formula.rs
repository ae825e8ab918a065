//! The formula language: classical connectives, the defeasible conditional,
//! single-variable generics, attitudes, action operators and discourse tokens.

use std::fmt;

/// An agent symbol such as `A` (author) or `I` (interpreter).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(String);

impl AgentId {
    /// Panics on an empty name; agent names come from validated input.
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "agent names are nonempty");
        AgentId(name)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Argument of an atom: either a variable or a constant symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        Term::Const(s.to_string())
    }
}

/// A basic action `name(args…)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub name: String,
    pub args: Vec<String>,
}

impl Action {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "action names are nonempty");
        Action { name, args: Vec::new() }
    }

    pub fn with_args(name: impl Into<String>, args: Vec<String>) -> Self {
        let mut a = Action::new(name);
        a.args = args;
        a
    }
}

/// A nonempty sequence of basic actions `a1; a2; …; an`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Plan {
    steps: Vec<Action>,
}

impl Plan {
    /// Returns `None` for an empty step list.
    pub fn new(steps: Vec<Action>) -> Option<Self> {
        if steps.is_empty() {
            None
        } else {
            Some(Plan { steps })
        }
    }

    /// A plan of nullary actions, handy in tests and scenario code.
    pub fn of(names: &[&str]) -> Self {
        Plan::new(names.iter().map(|n| Action::new(*n)).collect()).expect("nonempty plan")
    }

    pub fn steps(&self) -> &[Action] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn then(&self, other: &Plan) -> Plan {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Plan { steps }
    }

    pub fn is_prefix_of(&self, other: &Plan) -> bool {
        other.steps.starts_with(&self.steps)
    }

    /// The steps after `prefix`, or `None` when nothing remains.
    pub fn strip_prefix(&self, prefix: &Plan) -> Option<Plan> {
        let rest = self.steps.strip_prefix(prefix.steps.as_slice())?;
        Plan::new(rest.to_vec())
    }
}

/// Operand of the `R` and `D` operators. Rule schemas use `Var`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlanTerm {
    Var(String),
    Plan(Plan),
}

impl PlanTerm {
    pub fn as_plan(&self) -> Option<&Plan> {
        match self {
            PlanTerm::Plan(p) => Some(p),
            PlanTerm::Var(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attitude {
    Believes,
    Wants,
    Intends,
}

impl Attitude {
    pub fn keyword(self) -> &'static str {
        match self {
            Attitude::Believes => "B",
            Attitude::Wants => "W",
            Attitude::Intends => "I",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom { pred: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// The defeasible conditional `φ > ψ`.
    Default(Box<Formula>, Box<Formula>),
    /// `∀x (A(x) > B(x))`.
    Generic {
        var: String,
        antecedent: Box<Formula>,
        consequent: Box<Formula>,
    },
    Att {
        kind: Attitude,
        agent: AgentId,
        body: Box<Formula>,
    },
    /// `R`: about to do, or doing.
    Doing(PlanTerm),
    /// `D`: having done.
    Done(PlanTerm),
    Eventually(Box<Formula>),
    Can(Box<Formula>),
    Imp(Box<Formula>),
    /// The update triple `⟨τ,α,β⟩`.
    Site { tau: Term, alpha: Term, beta: Term },
    Info { alpha: Term, beta: Term },
    /// `⇒(φ,ψ)`: φ nonmonotonically yields ψ.
    Yields(Box<Formula>, Box<Formula>),
    Rel { relation: String, args: Vec<Term> },
    /// A formula metavariable, only meaningful inside rule schemas.
    Meta(String),
}

impl Formula {
    pub fn atom(pred: &str, args: &[&str]) -> Formula {
        Formula::Atom {
            pred: pred.to_string(),
            args: args.iter().map(|a| Term::from(*a)).collect(),
        }
    }

    pub fn negate(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(parts: Vec<Formula>) -> Formula {
        Formula::And(parts)
    }

    pub fn default_rule(a: Formula, b: Formula) -> Formula {
        Formula::Default(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn attitude(kind: Attitude, agent: &AgentId, body: Formula) -> Formula {
        Formula::Att { kind, agent: agent.clone(), body: Box::new(body) }
    }

    pub fn believes(agent: &AgentId, body: Formula) -> Formula {
        Formula::attitude(Attitude::Believes, agent, body)
    }

    pub fn wants(agent: &AgentId, body: Formula) -> Formula {
        Formula::attitude(Attitude::Wants, agent, body)
    }

    pub fn intends(agent: &AgentId, body: Formula) -> Formula {
        Formula::attitude(Attitude::Intends, agent, body)
    }

    pub fn doing(plan: Plan) -> Formula {
        Formula::Doing(PlanTerm::Plan(plan))
    }

    pub fn done(plan: Plan) -> Formula {
        Formula::Done(PlanTerm::Plan(plan))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn can(f: Formula) -> Formula {
        Formula::Can(Box::new(f))
    }

    pub fn imp(f: Formula) -> Formula {
        Formula::Imp(Box::new(f))
    }

    pub fn site(tau: &str, alpha: &str, beta: &str) -> Formula {
        Formula::Site { tau: tau.into(), alpha: alpha.into(), beta: beta.into() }
    }

    pub fn info(alpha: &str, beta: &str) -> Formula {
        Formula::Info { alpha: alpha.into(), beta: beta.into() }
    }

    pub fn yields(a: Formula, b: Formula) -> Formula {
        Formula::Yields(Box::new(a), Box::new(b))
    }

    pub fn rel(relation: &str, a: &str, b: &str) -> Formula {
        Formula::Rel { relation: relation.to_string(), args: vec![a.into(), b.into()] }
    }

    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Not(inner) => !inner.is_connective(),
            other => !other.is_connective(),
        }
    }

    /// True for the classical connectives the SAT layer looks through.
    pub fn is_connective(&self) -> bool {
        matches!(
            self,
            Formula::Not(_) | Formula::And(_) | Formula::Or(_) | Formula::Implies(..) | Formula::Iff(..)
        )
    }

    /// Top-level conjuncts, flattening nested `And`.
    pub fn conjuncts(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        self.collect_conjuncts(&mut out);
        out
    }

    fn collect_conjuncts(&self, out: &mut Vec<Formula>) {
        match self {
            Formula::And(parts) => parts.iter().for_each(|p| p.collect_conjuncts(out)),
            other => out.push(other.clone()),
        }
    }

    /// Immediate subformulas (not terms or plans).
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Not(a)
            | Formula::Eventually(a)
            | Formula::Can(a)
            | Formula::Imp(a)
            | Formula::Att { body: a, .. } => vec![a],
            Formula::And(ps) | Formula::Or(ps) => ps.iter().collect(),
            Formula::Implies(a, b) | Formula::Iff(a, b) | Formula::Default(a, b) | Formula::Yields(a, b) => {
                vec![a, b]
            }
            Formula::Generic { antecedent, consequent, .. } => vec![antecedent, consequent],
            Formula::Atom { .. }
            | Formula::Doing(_)
            | Formula::Done(_)
            | Formula::Site { .. }
            | Formula::Info { .. }
            | Formula::Rel { .. }
            | Formula::Meta(_) => Vec::new(),
        }
    }

    /// Every subformula including `self`, breadth first.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let kids = out[i].children();
            out.extend(kids);
            i += 1;
        }
        out
    }

    /// Constants appearing as atom arguments (the domain individuals).
    pub fn domain_constants(&self) -> Vec<String> {
        let mut out = Vec::new();
        for sub in self.subformulas() {
            if let Formula::Atom { args, .. } = sub {
                out.extend(args.iter().filter_map(|t| t.as_const().map(str::to_string)));
            }
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        super::free_variables(self).is_empty()
    }
}

impl From<Plan> for PlanTerm {
    fn from(p: Plan) -> Self {
        PlanTerm::Plan(p)
    }
}
