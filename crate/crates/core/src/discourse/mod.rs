//! Segmented discourse structures: constituents, rhetorical relations,
//! the right frontier, coherence and plan anaphora.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::kb::{ContextPath, KnowledgeBase};
use crate::logic::{Attitude, Formula, Plan, PlanTerm, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DiscourseError {
    #[error("the discourse is empty")]
    Empty,
    #[error("constituent {0} already exists")]
    DuplicateConstituent(String),
    #[error("unknown constituent {0}")]
    UnknownConstituent(String),
    #[error("cannot attach to {0}: it is not on the right frontier")]
    NotOpen(String),
    #[error("constituent {0} is already attached")]
    AlreadyAttached(String),
    #[error("relation {relation} does not relate {alpha} and {beta}")]
    WrongArguments { relation: String, alpha: String, beta: String },
    #[error("plan anaphor has no antecedent on the right frontier")]
    NoAntecedent,
    #[error("plan anaphor is ambiguous between {}", .0.join(" and "))]
    Ambiguous(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mood {
    Assertion,
    Imperative,
}

impl Mood {
    pub fn parse(s: &str) -> Option<Mood> {
        match s {
            "assertion" => Some(Mood::Assertion),
            "imperative" => Some(Mood::Imperative),
            _ => None,
        }
    }
}

impl fmt::Display for Mood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mood::Assertion => "assertion",
            Mood::Imperative => "imperative",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constituent {
    pub id: String,
    pub logical_form: Formula,
    pub mood: Mood,
}

impl Constituent {
    pub fn new(id: &str, mood: Mood, logical_form: Formula) -> Self {
        Constituent { id: id.to_string(), logical_form, mood }
    }

    /// The plan this constituent puts forward: the first `R` plan in its
    /// logical form, e.g. `go_home_5` in `(R (plan go_home_5))` or in
    /// `(can (R (plan go_home_5)))`.
    pub fn contributed_plan(&self) -> Option<Plan> {
        self.logical_form.subformulas().into_iter().find_map(|f| match f {
            Formula::Doing(PlanTerm::Plan(p)) => Some(p.clone()),
            _ => None,
        })
    }
}

/// A relation between two constituents, e.g. `Result(alpha, beta)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelAtom {
    pub relation: String,
    pub left: String,
    pub right: String,
}

impl RelAtom {
    pub fn new(relation: &str, left: &str, right: &str) -> Self {
        RelAtom { relation: relation.to_string(), left: left.to_string(), right: right.to_string() }
    }

    pub fn formula(&self) -> Formula {
        Formula::rel(&self.relation, &self.left, &self.right)
    }

    pub fn from_formula(f: &Formula) -> Option<RelAtom> {
        match f {
            Formula::Rel { relation, args } => match args.as_slice() {
                [Term::Const(a), Term::Const(b)] => Some(RelAtom::new(relation, a, b)),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for RelAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.relation, self.left, self.right)
    }
}

/// The obligation to attach `beta` to the open node `alpha` of `tau`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UpdateSite {
    pub tau: String,
    pub alpha: String,
    pub beta: String,
}

impl UpdateSite {
    pub fn new(tau: &str, alpha: &str, beta: &str) -> Self {
        UpdateSite { tau: tau.to_string(), alpha: alpha.to_string(), beta: beta.to_string() }
    }

    pub fn token(&self) -> Formula {
        Formula::site(&self.tau, &self.alpha, &self.beta)
    }

    pub fn info(&self) -> Formula {
        Formula::info(&self.alpha, &self.beta)
    }

    /// `⟨τ,α,β⟩ ∧ Info(α,β)`.
    pub fn token_and_info(&self) -> Formula {
        Formula::And(vec![self.token(), self.info()])
    }
}

impl fmt::Display for UpdateSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{},{}>", self.tau, self.alpha, self.beta)
    }
}

/// Relations `R` with the axiom `(B_I α ∧ R(α,β)) > B_I β` installed.
/// `backward` holds those also installed against textual order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BeliefPropertyRegistry {
    pub relations: BTreeSet<String>,
    pub backward: BTreeSet<String>,
}

impl BeliefPropertyRegistry {
    pub fn contains(&self, relation: &str) -> bool {
        self.relations.contains(relation)
    }
}

pub fn has_belief_property(relation: &str, registry: &BeliefPropertyRegistry) -> bool {
    registry.contains(relation)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub point: String,
    pub attached: String,
    pub relations: BTreeSet<RelAtom>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Coherent,
    Incoherent(String),
}

impl Verdict {
    pub fn is_coherent(&self) -> bool {
        matches!(self, Verdict::Coherent)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Coherent => f.write_str("coherent"),
            Verdict::Incoherent(d) => write!(f, "incoherent: {d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sdrs {
    label: String,
    constituents: Vec<Constituent>,
    edges: Vec<Edge>,
    attachment_order: Vec<String>,
    frontier: Vec<String>,
    subordinating: BTreeSet<String>,
    constraints: BTreeMap<RelAtom, Vec<Formula>>,
    failures: BTreeMap<String, String>,
}

impl Default for Sdrs {
    fn default() -> Self {
        Sdrs::new("tau")
    }
}

impl Sdrs {
    pub fn new(label: &str) -> Self {
        Sdrs {
            label: label.to_string(),
            constituents: Vec::new(),
            edges: Vec::new(),
            attachment_order: Vec::new(),
            frontier: Vec::new(),
            subordinating: BTreeSet::new(),
            constraints: BTreeMap::new(),
            failures: BTreeMap::new(),
        }
    }

    /// Relations that keep the attachment point open.
    pub fn with_subordinating(mut self, relations: impl IntoIterator<Item = String>) -> Self {
        self.subordinating = relations.into_iter().collect();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn constituents(&self) -> &[Constituent] {
        &self.constituents
    }

    pub fn constituent(&self, id: &str) -> Option<&Constituent> {
        self.constituents.iter().find(|c| c.id == id)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn attachment_order(&self) -> &[String] {
        &self.attachment_order
    }

    pub fn is_subordinating(&self, relation: &str) -> bool {
        self.subordinating.contains(relation)
    }

    pub fn relations(&self) -> BTreeSet<RelAtom> {
        self.edges.iter().flat_map(|e| e.relations.iter().cloned()).collect()
    }

    pub fn constraints(&self, rel: &RelAtom) -> &[Formula] {
        self.constraints.get(rel).map(Vec::as_slice).unwrap_or_default()
    }

    pub fn failures(&self) -> &BTreeMap<String, String> {
        &self.failures
    }

    pub fn is_attached(&self, id: &str) -> bool {
        self.attachment_order.iter().any(|a| a == id)
    }

    /// Adds a constituent. The first one becomes the root of the structure;
    /// later ones wait for `attach`.
    pub fn add_constituent(&mut self, c: Constituent) -> Result<(), DiscourseError> {
        if self.constituent(&c.id).is_some() {
            return Err(DiscourseError::DuplicateConstituent(c.id));
        }
        if self.constituents.is_empty() {
            self.attachment_order.push(c.id.clone());
            self.frontier = vec![c.id.clone()];
        }
        self.constituents.push(c);
        Ok(())
    }

    /// The right frontier, most recent first: the last attached constituent
    /// and the points it hangs from through subordinating relations.
    pub fn open_attachment_sites(&self) -> Result<Vec<String>, DiscourseError> {
        if self.constituents.is_empty() {
            return Err(DiscourseError::Empty);
        }
        Ok(self.frontier.clone())
    }

    /// Recomputes the frontier from the edges alone.
    pub fn recompute_frontier(&self) -> Vec<String> {
        let Some(last) = self.attachment_order.last() else {
            return Vec::new();
        };
        let mut out = vec![last.clone()];
        let mut current = last.clone();
        while let Some(edge) = self
            .edges
            .iter()
            .find(|e| e.attached == current && e.relations.iter().any(|r| self.is_subordinating(&r.relation)))
        {
            if out.contains(&edge.point) {
                break;
            }
            out.push(edge.point.clone());
            current = edge.point.clone();
        }
        out
    }

    pub fn attach(&self, site: &UpdateSite, rel: &RelAtom) -> Result<Sdrs, DiscourseError> {
        self.attach_with_constraints(site, rel, Vec::new())
    }

    /// Attaches `site.beta` to `site.alpha` with `rel`, recording the
    /// formulas the relation's coherence depends on. A further relation on
    /// an existing edge is allowed.
    pub fn attach_with_constraints(
        &self,
        site: &UpdateSite,
        rel: &RelAtom,
        constraints: Vec<Formula>,
    ) -> Result<Sdrs, DiscourseError> {
        for id in [&site.alpha, &site.beta] {
            if self.constituent(id).is_none() {
                return Err(DiscourseError::UnknownConstituent(id.clone()));
            }
        }
        let args = [rel.left.as_str(), rel.right.as_str()];
        let expected = [site.alpha.as_str(), site.beta.as_str()];
        if !(args == expected || args == [expected[1], expected[0]]) {
            return Err(DiscourseError::WrongArguments {
                relation: rel.relation.clone(),
                alpha: site.alpha.clone(),
                beta: site.beta.clone(),
            });
        }
        let mut out = self.clone();
        let existing = out.edges.iter_mut().find(|e| e.point == site.alpha && e.attached == site.beta);
        match existing {
            Some(edge) => {
                edge.relations.insert(rel.clone());
            }
            None => {
                if !self.frontier.contains(&site.alpha) {
                    return Err(DiscourseError::NotOpen(site.alpha.clone()));
                }
                if self.is_attached(&site.beta) {
                    return Err(DiscourseError::AlreadyAttached(site.beta.clone()));
                }
                out.edges.push(Edge {
                    point: site.alpha.clone(),
                    attached: site.beta.clone(),
                    relations: BTreeSet::from([rel.clone()]),
                });
                out.attachment_order.push(site.beta.clone());
            }
        }
        out.constraints.entry(rel.clone()).or_default().extend(constraints);
        out.failures.remove(&site.beta);
        if out.attachment_order.last() == Some(&site.beta) {
            let subordinate = out
                .edges
                .iter()
                .find(|e| e.point == site.alpha && e.attached == site.beta)
                .is_some_and(|e| e.relations.iter().any(|r| out.is_subordinating(&r.relation)));
            let mut frontier = vec![site.beta.clone()];
            if subordinate {
                let at = self.frontier.iter().position(|f| f == &site.alpha).unwrap_or(0);
                frontier.extend(self.frontier[at..].iter().cloned());
            }
            out.frontier = frontier;
        } else {
            out.frontier = out.recompute_frontier();
        }
        Ok(out)
    }

    /// Marks `id` as having found no relation.
    pub fn record_failure(&mut self, id: &str, diagnostic: impl Into<String>) {
        self.failures.insert(id.to_string(), diagnostic.into());
    }

    /// Coherent when every constituent after the first is attached and the
    /// relations with their constraints are jointly satisfiable with `kb`.
    pub fn coherent(&self, kb: &KnowledgeBase) -> Verdict {
        for c in self.constituents.iter().skip(1) {
            if let Some(d) = self.failures.get(&c.id) {
                return Verdict::Incoherent(format!("{}: {d}", c.id));
            }
            if !self.is_attached(&c.id) {
                return Verdict::Incoherent(format!("{}: not attached", c.id));
            }
        }
        let mut extra = Vec::new();
        for rel in self.relations() {
            extra.push(rel.formula());
            extra.extend(self.constraints(&rel).iter().cloned());
        }
        if !kb.consistent_with(&ContextPath::root(), &extra) {
            let rels: Vec<String> = self.relations().iter().map(RelAtom::to_string).collect();
            return Verdict::Incoherent(format!("the constraints of {} are unsatisfiable", rels.join(", ")));
        }
        Verdict::Coherent
    }

    /// The unique composite plan intended by some agent (`I_ag(R plan)` at
    /// the root) whose steps all come from constituents, at least one of
    /// them on the right frontier.
    pub fn resolve_plan_anaphor(&self, kb: &KnowledgeBase) -> Result<Plan, DiscourseError> {
        let contributed: Vec<(String, Plan)> = self
            .constituents
            .iter()
            .filter_map(|c| c.contributed_plan().map(|p| (c.id.clone(), p)))
            .collect();
        let frontier = self.open_attachment_sites().unwrap_or_default();
        let mut found: BTreeSet<Plan> = BTreeSet::new();
        for f in &kb.store(&ContextPath::root()).facts {
            let Formula::Att { kind: Attitude::Intends, body, .. } = f else { continue };
            let Formula::Doing(PlanTerm::Plan(plan)) = &**body else { continue };
            if plan.len() < 2 {
                continue;
            }
            let gives = |(_, p): &&(String, Plan), step: &crate::logic::Action| p.steps().contains(step);
            let all_contributed = plan.steps().iter().all(|s| contributed.iter().any(|c| gives(&c, s)));
            let touches_frontier = plan
                .steps()
                .iter()
                .any(|s| contributed.iter().filter(|(id, _)| frontier.contains(id)).any(|c| gives(&c, s)));
            if all_contributed && touches_frontier {
                found.insert(plan.clone());
            }
        }
        match found.len() {
            0 => Err(DiscourseError::NoAntecedent),
            1 => Ok(found.into_iter().next().unwrap()),
            _ => Err(DiscourseError::Ambiguous(found.iter().map(Plan::to_string).collect())),
        }
    }
}

impl fmt::Display for Sdrs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sdrs {}", self.label)?;
        for c in &self.constituents {
            writeln!(f, "constituent {} {} {}", c.id, c.mood, c.logical_form)?;
        }
        for r in self.relations() {
            writeln!(f, "relation {} {} {}", r.relation, r.left, r.right)?;
        }
        for (id, d) in &self.failures {
            writeln!(f, "unattached {id} {d}")?;
        }
        Ok(())
    }
}
