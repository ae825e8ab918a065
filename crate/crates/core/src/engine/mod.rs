//! Defeasible inference: Defeasible Modus Ponens, the Penguin Principle with
//! skeptical blocking, the nonmonotonic-consequence test, and abduction.
//!
//! The closure is a forward-chaining fixpoint over ground rule instances.
//! Each round fires every applicable hard rule, or else the least (by rule
//! name, then printed instance) default instance that beats every instance
//! it conflicts with. Two instances conflict when their consequents are
//! jointly inconsistent with the store; one beats another when its
//! antecedent strictly entails the other's under the hard constraints.

mod closure;
mod rule;
mod trace;

use thiserror::Error;

use crate::kb::{ContextPath, KbError, KnowledgeBase};
use crate::logic::Formula;

pub use closure::{specificity, Abduced, Engine, Specificity, DEFAULT_MAX_STEPS, YIELDS_STEP};
pub use rule::{DefaultRule, RuleError};
pub use trace::{InferenceStep, InferenceTrace, Mode};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("no fixpoint at context {path} within {bound} steps")]
    StepBound { path: ContextPath, bound: usize },
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("rule {0} has no abducible clauses")]
    NotAbducible(String),
    #[error("formula is not ground: {0}")]
    NotGround(String),
}

pub fn defeasible_closure(
    kb: &KnowledgeBase,
    rules: &[DefaultRule],
    path: &ContextPath,
) -> Result<(KnowledgeBase, InferenceTrace), EngineError> {
    Engine::new(rules.to_vec()).closure(kb, path)
}

pub fn nonmon_yields(
    kb: &KnowledgeBase,
    rules: &[DefaultRule],
    path: &ContextPath,
    phi: &Formula,
    psi: &Formula,
) -> Result<bool, EngineError> {
    Engine::new(rules.to_vec()).nonmon_yields(kb, path, phi, psi)
}

/// Hypotheses for every abducible clause of `rule`, flattened.
pub fn abduce(
    kb: &KnowledgeBase,
    rule: &DefaultRule,
    path: &ContextPath,
    observed: &[Formula],
) -> Result<std::collections::BTreeSet<Formula>, EngineError> {
    let found = Engine::new(vec![rule.clone()]).abduce(kb, rule, path, observed)?;
    Ok(found.into_iter().flat_map(|a| a.hypotheses).collect())
}
