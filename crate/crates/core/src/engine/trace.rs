use std::fmt;

use crate::kb::{ContextPath, KbError, KnowledgeBase};
use crate::logic::{Formula, Substitution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Dmp,
    Penguin,
    Hard,
    Abduction,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Dmp => "DMP",
            Mode::Penguin => "Penguin",
            Mode::Hard => "Hard",
            Mode::Abduction => "Abduction",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InferenceStep {
    pub rule: String,
    pub mode: Mode,
    pub bindings: Substitution,
    pub added: Vec<Formula>,
    pub path: ContextPath,
    /// `unless` clauses the step relied on being absent.
    pub assumed_absent: Vec<Formula>,
}

impl InferenceStep {
    /// Renders as `step <n> <mode> <rule> <bindings> => <added>`.
    pub fn line(&self, n: usize) -> String {
        let added: Vec<String> = self.added.iter().map(Formula::to_string).collect();
        let mut s = format!("step {n} {} {} {} => {}", self.mode, self.rule, self.bindings, added.join(", "));
        if !self.path.is_root() {
            s.push_str(&format!(" in {}", self.path));
        }
        if !self.assumed_absent.is_empty() {
            let absent: Vec<String> = self.assumed_absent.iter().map(Formula::to_string).collect();
            s.push_str(&format!(" [absent: {}]", absent.join(", ")));
        }
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InferenceTrace {
    pub steps: Vec<InferenceStep>,
}

impl InferenceTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: InferenceStep) {
        self.steps.push(step);
    }

    pub fn extend(&mut self, other: InferenceTrace) {
        self.steps.extend(other.steps);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn fired(&self, rule: &str) -> bool {
        self.steps.iter().any(|s| s.rule == rule)
    }

    /// Re-adds every step's formulas to `kb`.
    pub fn replay(&self, kb: &KnowledgeBase) -> Result<KnowledgeBase, KbError> {
        let mut out = kb.clone();
        for step in &self.steps {
            for f in &step.added {
                out.insert_fact(&step.path, f.clone())?;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for InferenceTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            writeln!(f, "{}", step.line(i + 1))?;
        }
        Ok(())
    }
}
