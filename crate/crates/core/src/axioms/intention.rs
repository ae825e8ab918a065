use crate::logic::{AgentId, Formula, Plan};

use super::AxiomError;

/// An intended plan and how much of it has been carried out.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntentionState {
    pub agent: AgentId,
    pub plan: Plan,
    pub done_prefix: Option<Plan>,
}

impl IntentionState {
    pub fn new(agent: AgentId, plan: Plan) -> Self {
        IntentionState { agent, plan, done_prefix: None }
    }

    /// The part still to do; `None` once the whole plan is done.
    pub fn intended(&self) -> Option<Plan> {
        match &self.done_prefix {
            None => Some(self.plan.clone()),
            Some(done) => self.plan.strip_prefix(done),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.intended().is_none()
    }

    /// `I(R rest)` if anything remains, `¬I(R done)` and `D(done)` once
    /// something is done.
    pub fn facts(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        if let Some(rest) = self.intended() {
            out.push(Formula::intends(&self.agent, Formula::doing(rest)));
        }
        if let Some(done) = &self.done_prefix {
            out.push(Formula::negate(Formula::intends(&self.agent, Formula::doing(done.clone()))));
            out.push(Formula::done(done.clone()));
        }
        out
    }
}

/// Records `done` as carried out. It must be a prefix of what remains.
pub fn update_intentions(st: &IntentionState, done: &Plan) -> Result<IntentionState, AxiomError> {
    let remaining = st.intended();
    let not_prefix = || AxiomError::NotPrefix {
        done: done.clone(),
        plan: remaining.as_ref().map_or_else(|| "(nothing)".to_string(), Plan::to_string),
    };
    let rest = remaining.as_ref().ok_or_else(not_prefix)?;
    if !done.is_prefix_of(rest) {
        return Err(not_prefix());
    }
    let done_prefix = match &st.done_prefix {
        None => done.clone(),
        Some(before) => before.then(done),
    };
    Ok(IntentionState { agent: st.agent.clone(), plan: st.plan.clone(), done_prefix: Some(done_prefix) })
}
