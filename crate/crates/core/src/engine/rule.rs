use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::logic::{free_variables, substitute, Formula, Substitution};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {rule}: variables {vars:?} of the {part} do not occur in the antecedent")]
    UnboundVariables { rule: String, part: &'static str, vars: Vec<String> },
    #[error("rule {0}: hard rules cannot have abducible clauses")]
    HardAbducible(String),
    #[error("rule {rule}: abducible index {index} is out of range")]
    AbducibleRange { rule: String, index: usize },
    #[error("rule {0}: expected a conditional (>, -> or forall)")]
    NotConditional(String),
    #[error("rule name is empty")]
    EmptyName,
}

/// A named rule `ant_1 ∧ … ∧ ant_n > consequent` (or `->` when `hard`).
///
/// `unless` conjuncts hold by absence: an instance applies only while none
/// of them is entailed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DefaultRule {
    pub name: String,
    pub antecedent: Vec<Formula>,
    pub unless: Vec<Formula>,
    pub consequent: Formula,
    pub hard: bool,
    pub abducible: BTreeSet<usize>,
}

impl DefaultRule {
    pub fn new(name: &str, antecedent: Vec<Formula>, consequent: Formula) -> Result<Self, RuleError> {
        Self::build(name, antecedent, consequent, false)
    }

    pub fn hard(name: &str, antecedent: Vec<Formula>, consequent: Formula) -> Result<Self, RuleError> {
        Self::build(name, antecedent, consequent, true)
    }

    fn build(name: &str, antecedent: Vec<Formula>, consequent: Formula, hard: bool) -> Result<Self, RuleError> {
        if name.is_empty() {
            return Err(RuleError::EmptyName);
        }
        let rule = DefaultRule {
            name: name.to_string(),
            antecedent,
            unless: Vec::new(),
            consequent,
            hard,
            abducible: BTreeSet::new(),
        };
        rule.check_vars(&rule.consequent, "consequent")?;
        Ok(rule)
    }

    /// Reads `(> A B)`, `(-> A B)` or `(forall x (> A B))`; `A`'s top-level
    /// conjuncts become the antecedent list.
    pub fn from_formula(name: &str, f: &Formula, hard: bool) -> Result<Self, RuleError> {
        let (a, b) = match f {
            Formula::Default(a, b) | Formula::Implies(a, b) => (a, b),
            Formula::Generic { antecedent, consequent, .. } => (antecedent, consequent),
            _ => return Err(RuleError::NotConditional(name.to_string())),
        };
        Self::build(name, a.conjuncts(), (**b).clone(), hard)
    }

    pub fn with_unless(mut self, unless: Vec<Formula>) -> Result<Self, RuleError> {
        self.unless = unless;
        for u in self.unless.clone() {
            self.check_vars(&u, "unless clause")?;
        }
        Ok(self)
    }

    pub fn with_abducible(mut self, indices: impl IntoIterator<Item = usize>) -> Result<Self, RuleError> {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        if self.hard && !indices.is_empty() {
            return Err(RuleError::HardAbducible(self.name));
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= self.antecedent.len()) {
            return Err(RuleError::AbducibleRange { rule: self.name, index });
        }
        self.abducible = indices;
        Ok(self)
    }

    fn check_vars(&self, part: &Formula, label: &'static str) -> Result<(), RuleError> {
        let bound = self.antecedent_variables();
        let missing: Vec<String> = free_variables(part).into_iter().filter(|v| !bound.contains(v)).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(RuleError::UnboundVariables { rule: self.name.clone(), part: label, vars: missing })
        }
    }

    pub fn antecedent_variables(&self) -> BTreeSet<String> {
        self.antecedent.iter().flat_map(free_variables).collect()
    }

    pub fn is_ground(&self) -> bool {
        self.antecedent_variables().is_empty() && self.consequent.is_ground()
    }

    pub fn instantiate(&self, s: &Substitution) -> DefaultRule {
        DefaultRule {
            name: self.name.clone(),
            antecedent: self.antecedent.iter().map(|f| substitute(f, s)).collect(),
            unless: self.unless.iter().map(|f| substitute(f, s)).collect(),
            consequent: substitute(&self.consequent, s),
            hard: self.hard,
            abducible: self.abducible.clone(),
        }
    }

    /// The antecedent as one formula.
    pub fn antecedent_formula(&self) -> Formula {
        match self.antecedent.as_slice() {
            [single] => single.clone(),
            parts => Formula::And(parts.to_vec()),
        }
    }

    /// `(> A B)` or `(-> A B)`, without the `unless` part.
    pub fn schema(&self) -> Formula {
        let a = Box::new(self.antecedent_formula());
        let b = Box::new(self.consequent.clone());
        if self.hard {
            Formula::Implies(a, b)
        } else {
            Formula::Default(a, b)
        }
    }
}

impl fmt::Display for DefaultRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.schema())?;
        for u in &self.unless {
            write!(f, " unless {u}")?;
        }
        if !self.abducible.is_empty() {
            let idx: Vec<String> = self.abducible.iter().map(usize::to_string).collect();
            write!(f, " abducible({})", idx.join(","))?;
        }
        Ok(())
    }
}
