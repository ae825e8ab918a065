use std::collections::BTreeSet;

use thiserror::Error;

use crate::axioms::{
    self, apply_evidence_rule, apply_result_rule, belief_property_instances, cooperation_constraint, isupport_atom,
    isupport_conditions, isupport_definition, isupport_holds, plan_apprehension_rule, relation_license_rule,
    standard_axioms_for, update_intentions, AxiomSet, Cooperation, DeltaSearch, IntentionState, License, Role,
};
use crate::discourse::{Constituent, DiscourseError, Mood, RelAtom, Sdrs, UpdateSite, Verdict};
use crate::engine::{DefaultRule, Engine, EngineError, InferenceStep, InferenceTrace, Mode};
use crate::kb::{ContextPath, KbError, KnowledgeBase};
use crate::logic::{Attitude, Formula, Plan, PlanTerm, Substitution};

use super::scenario::{Event, Expected, Scenario};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Discourse(#[from] DiscourseError),
    #[error(transparent)]
    Axiom(#[from] axioms::AxiomError),
}

/// Settings that override the scenario's own.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub max_steps: Option<usize>,
    pub max_depth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Step(InferenceStep),
    Note(String),
}

/// What happened while interpreting one utterance or `done` event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtteranceReport {
    pub label: String,
    pub site: Option<UpdateSite>,
    pub log: Vec<Entry>,
    pub relations: BTreeSet<RelAtom>,
    /// Root facts once the event has been processed.
    pub facts_after: BTreeSet<Formula>,
}

impl UtteranceReport {
    pub fn trace(&self) -> InferenceTrace {
        let mut t = InferenceTrace::new();
        for e in &self.log {
            if let Entry::Step(s) = e {
                t.push(s.clone());
            }
        }
        t
    }

    pub fn notes(&self) -> impl Iterator<Item = &str> {
        self.log.iter().filter_map(|e| match e {
            Entry::Note(n) => Some(n.as_str()),
            Entry::Step(_) => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectationResult {
    pub text: String,
    pub line: usize,
    pub met: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub scenario: String,
    pub sdrs: Sdrs,
    pub kb: KnowledgeBase,
    pub verdict: Verdict,
    pub utterances: Vec<UtteranceReport>,
    pub expectations: Vec<ExpectationResult>,
    coherence_expected_failed: bool,
}

impl RunReport {
    pub fn all_met(&self) -> bool {
        self.expectations.iter().all(|e| e.met)
    }

    pub fn utterance(&self, label: &str) -> Option<&UtteranceReport> {
        self.utterances.iter().find(|u| u.label == label)
    }

    /// 0 when every expectation is met, 1 when coherence was expected but
    /// not found, 2 for any other mismatch.
    pub fn exit_code(&self) -> i32 {
        if self.all_met() {
            0
        } else if self.coherence_expected_failed {
            1
        } else {
            2
        }
    }
}

pub fn run_scenario(s: &Scenario) -> Result<RunReport, RunError> {
    run_scenario_with(s, &RunOptions::default())
}

pub fn run_scenario_with(s: &Scenario, opts: &RunOptions) -> Result<RunReport, RunError> {
    let mut p = Pipeline::new(s, opts)?;
    for event in &s.events {
        match event {
            Event::Utterance(c) => p.utterance(c)?,
            Event::Done(plan) => p.done(plan)?,
        }
    }
    Ok(p.finish())
}

struct Pipeline<'s> {
    s: &'s Scenario,
    axioms: AxiomSet,
    kb: KnowledgeBase,
    sdrs: Sdrs,
    max_steps: usize,
    utterances: Vec<UtteranceReport>,
    log: Vec<Entry>,
    resolved: Option<Plan>,
}

fn hard_step(rule: &str, added: Vec<Formula>) -> Entry {
    Entry::Step(InferenceStep {
        rule: rule.to_string(),
        mode: Mode::Hard,
        bindings: Substitution::new(),
        added,
        path: ContextPath::root(),
        assumed_absent: Vec::new(),
    })
}

fn author_path(axioms: &AxiomSet) -> ContextPath {
    ContextPath::root().child(axioms.author())
}

impl<'s> Pipeline<'s> {
    fn new(s: &'s Scenario, opts: &RunOptions) -> Result<Self, RunError> {
        let mut axioms = standard_axioms_for(&s.author, &s.interpreter);
        for o in &s.overrides {
            axioms.apply_override(o.clone());
        }
        let depth = opts.max_depth.unwrap_or(s.options.max_depth);
        let mut kb = KnowledgeBase::with_max_depth(depth).with_author(s.author.clone());
        for c in &s.constants {
            kb.add_constant(c.clone());
        }
        for (path, spec) in &s.contexts {
            for f in &spec.facts {
                kb.insert_fact(path, f.clone())?;
            }
            for f in &spec.hard {
                kb.insert_hard(path, f.clone())?;
            }
            for r in &spec.rules {
                kb.insert_rule(path, r.clone())?;
            }
        }
        let sdrs = Sdrs::new("tau").with_subordinating(s.subordinating.iter().cloned());
        Ok(Pipeline {
            s,
            axioms,
            kb,
            sdrs,
            max_steps: opts.max_steps.unwrap_or(s.options.max_steps),
            utterances: Vec::new(),
            log: Vec::new(),
            resolved: None,
        })
    }

    fn engine(&self, roles: &[Role], extra: Vec<DefaultRule>) -> Engine {
        let mut rules: Vec<DefaultRule> = roles.iter().flat_map(|r| self.axioms.rules_with_role(*r)).collect();
        rules.extend(extra);
        Engine::new(rules).with_max_steps(self.max_steps)
    }

    fn attitude_engine(&self) -> Engine {
        self.engine(&[Role::Attitude, Role::Domain], Vec::new())
    }

    fn push_trace(&mut self, trace: InferenceTrace) {
        self.log.extend(trace.steps.into_iter().map(Entry::Step));
    }

    fn note(&mut self, text: String) {
        self.log.push(Entry::Note(text));
    }

    fn insert_root(&mut self, rule: &str, facts: Vec<Formula>) -> Result<(), RunError> {
        let mut added = Vec::new();
        for f in facts {
            if self.kb.insert_fact(&ContextPath::root(), f.clone())? {
                added.push(f);
            }
        }
        if !added.is_empty() {
            self.log.push(hard_step(rule, added));
        }
        Ok(())
    }

    fn wrap_up(&mut self, label: &str, site: Option<UpdateSite>, relations: BTreeSet<RelAtom>) {
        let facts_after = self.kb.store(&ContextPath::root()).facts.clone();
        self.utterances.push(UtteranceReport {
            label: label.to_string(),
            site,
            log: std::mem::take(&mut self.log),
            relations,
            facts_after,
        });
    }

    /// Closes every context path with the attitude rules, root first, then
    /// abduces on the Practical Syllogism at the root.
    fn attitude_phase(&mut self) -> Result<(), RunError> {
        let engine = self.attitude_engine();
        let mut trace = InferenceTrace::new();
        let mut paths: Vec<ContextPath> = self.kb.paths().cloned().collect();
        if !paths.contains(&ContextPath::root()) {
            paths.insert(0, ContextPath::root());
        }
        for path in &paths {
            engine.close(&mut self.kb, path, &mut trace)?;
        }
        let root = ContextPath::root();
        if let Some(ps) = self.axioms.rule(axioms::PRACTICAL_SYLLOGISM).cloned() {
            let found = engine.abduce(&self.kb, &ps, &root, &[])?;
            let mut any = false;
            for a in found {
                let mut added = Vec::new();
                if !self.kb.consistent_with(&root, &a.hypotheses) {
                    continue;
                }
                for h in a.hypotheses {
                    if self.kb.insert_fact(&root, h.clone())? {
                        added.push(h);
                    }
                }
                if !added.is_empty() {
                    any = true;
                    trace.push(InferenceStep {
                        rule: a.rule,
                        mode: Mode::Abduction,
                        bindings: a.bindings,
                        added,
                        path: root.clone(),
                        assumed_absent: Vec::new(),
                    });
                }
            }
            if any {
                engine.close(&mut self.kb, &root, &mut trace)?;
            }
        }
        self.push_trace(trace);
        Ok(())
    }

    /// The interpreter's model of how the author expects the text to be
    /// understood: discourse rules and belief-property instances in the
    /// author's store.
    fn install_author_model(&mut self) -> Result<(), RunError> {
        let path = author_path(&self.axioms);
        if self.kb.check_path(&path).is_err() {
            return Ok(());
        }
        let mut rules = self.axioms.rules_with_role(Role::Discourse);
        rules.extend(belief_property_instances(&self.axioms, self.sdrs.constituents()));
        for r in rules {
            self.kb.insert_rule(&path, r)?;
        }
        Ok(())
    }

    fn lf(&self, id: &str) -> Formula {
        self.sdrs.constituent(id).map(|c| c.logical_form.clone()).expect("known constituent")
    }

    fn utterance(&mut self, c: &Constituent) -> Result<(), RunError> {
        self.sdrs.add_constituent(c.clone())?;
        if c.mood == Mood::Imperative {
            self.insert_root("Imperative", vec![Formula::imp(c.logical_form.clone())])?;
        }
        if self.sdrs.constituents().len() == 1 {
            self.note(format!("{} opens the discourse; nothing to attach", c.id));
            self.wrap_up(&c.id, None, BTreeSet::new());
            return Ok(());
        }
        self.resolved = None;
        if self.s.plan_anaphors.contains(&c.id) {
            match self.sdrs.resolve_plan_anaphor(&self.kb) {
                Ok(plan) => {
                    self.note(format!("plan anaphor in {} resolved to {plan}", c.id));
                    self.resolved = Some(plan);
                }
                Err(e) => self.note(format!("plan anaphor in {}: {e}", c.id)),
            }
        }
        let frontier = self.sdrs.open_attachment_sites()?;
        let site = UpdateSite::new(self.sdrs.label(), &frontier[0], &c.id);
        let relations = self.attach_at(&site)?;
        self.wrap_up(&c.id, Some(site), relations);
        Ok(())
    }

    fn attach_at(&mut self, site: &UpdateSite) -> Result<BTreeSet<RelAtom>, RunError> {
        let root = ContextPath::root();
        let (a, b) = (site.alpha.clone(), site.beta.clone());
        let (lf_a, lf_b) = (self.lf(&a), self.lf(&b));
        self.insert_root("Site", vec![site.token(), site.info()])?;
        self.install_author_model()?;
        self.kb.insert_hard(&root, isupport_definition(&self.axioms, site, &a, &b, &lf_b))?;
        self.kb.insert_hard(&root, isupport_definition(&self.axioms, site, &b, &a, &lf_a))?;

        self.attitude_phase()?;

        let engine = self.attitude_engine();
        let mut trace = InferenceTrace::new();
        let forward = isupport_holds(&engine, &mut self.kb, &self.axioms, site, &lf_b, &mut trace)?;
        let backward = isupport_holds(&engine, &mut self.kb, &self.axioms, site, &lf_a, &mut trace)?;
        self.push_trace(trace);
        let mut support = Vec::new();
        if forward {
            support.push(isupport_atom(&a, &b));
        }
        if backward {
            support.push(isupport_atom(&b, &a));
        }
        self.insert_root(axioms::INTENDS_TO_SUPPORT, support)?;

        let coop = cooperation_constraint(&self.kb, site, self.axioms.registry());
        if let Cooperation::Permitted { permitted, forbidden } = &coop {
            let names: Vec<String> = permitted.iter().map(RelAtom::to_string).collect();
            self.note(format!("Cooperation permits {}", names.join(", ")));
            let negations = forbidden.iter().map(|r| Formula::negate(r.formula())).collect();
            self.insert_root(axioms::COOPERATION, negations)?;
        }

        let mut licenses: Vec<License> = Vec::new();
        {
            let expectation = |d: &Formula| self.kb.consistent_with(&root, &[lf_a.clone(), lf_b.clone(), d.clone()]);
            let q = DeltaSearch {
                kb: &self.kb,
                site,
                lf_alpha: &lf_a,
                lf_beta: &lf_b,
                hypotheses: &self.s.hypotheses,
                max_steps: self.max_steps,
                expectation: if self.s.options.textual_expectations { Some(&expectation) } else { None },
            };
            licenses.extend(apply_result_rule(&q)?);
            licenses.extend(apply_evidence_rule(&q)?);
        }
        let mut extra: Vec<DefaultRule> = Vec::new();
        for l in &licenses {
            extra.push(relation_license_rule(site, l));
            self.push_trace(l.trace.clone());
        }
        extra.extend(belief_property_instances(&self.axioms, self.sdrs.constituents()));
        extra.extend(self.plan_apprehension_rules(site, &lf_b));

        let engine = self.engine(&[Role::Discourse, Role::Domain], extra);
        let mut trace = InferenceTrace::new();
        engine.close(&mut self.kb, &root, &mut trace)?;
        self.push_trace(trace);

        if coop.violated(&self.kb) {
            self.contrapose(site, forward, backward, &lf_a, &lf_b)?;
            return Ok(BTreeSet::new());
        }

        let found = self.relations_for(site);
        if found.is_empty() {
            self.sdrs.record_failure(&b, format!("no relation inferred for {site}"));
            return Ok(found);
        }
        if found.len() > 1 {
            let names: Vec<String> = found.iter().map(RelAtom::to_string).collect();
            self.note(format!("several relations hold for {site}: {}", names.join(", ")));
        }
        for rel in &found {
            let constraints = self.constraints_for(site, rel, &licenses);
            self.sdrs = self.sdrs.attach_with_constraints(site, rel, constraints)?;
        }

        if self.s.options.charity {
            self.charity_pass()?;
        }
        Ok(found)
    }

    fn relations_for(&self, site: &UpdateSite) -> BTreeSet<RelAtom> {
        let root = ContextPath::root();
        let (a, b) = (site.alpha.as_str(), site.beta.as_str());
        self.kb
            .store(&root)
            .facts
            .iter()
            .filter_map(RelAtom::from_formula)
            .filter(|r| (r.left == a && r.right == b) || (r.left == b && r.right == a))
            .filter(|r| self.kb.entails(&root, &r.formula()))
            .collect()
    }

    fn constraints_for(&self, site: &UpdateSite, rel: &RelAtom, licenses: &[License]) -> Vec<Formula> {
        if let Some(l) = licenses.iter().find(|l| &l.relation == rel) {
            return vec![l.delta.clone(), l.instance.clone()];
        }
        let cause = Formula::atom("cause", &[&site.alpha, &site.beta]);
        if rel.relation == "Result" && self.kb.entails(&ContextPath::root(), &cause) {
            return vec![cause];
        }
        Vec::new()
    }

    /// No permitted relation: the support premise goes, together with the
    /// belief APS1 derived for it.
    fn contrapose(
        &mut self,
        site: &UpdateSite,
        forward: bool,
        backward: bool,
        lf_a: &Formula,
        lf_b: &Formula,
    ) -> Result<(), RunError> {
        let root = ContextPath::root();
        let mut dirs = Vec::new();
        if forward {
            dirs.push((site.alpha.clone(), site.beta.clone(), lf_b.clone()));
        }
        if backward {
            dirs.push((site.beta.clone(), site.alpha.clone(), lf_a.clone()));
        }
        let mut names = Vec::new();
        for (x, y, lf_y) in dirs {
            self.kb.retract_fact(&root, &isupport_atom(&x, &y));
            let derived = isupport_conditions(&self.axioms, site, &lf_y).pop().expect("three conditions");
            self.kb.retract_fact(&root, &derived);
            self.kb.insert_fact(&root, Formula::negate(isupport_atom(&x, &y)))?;
            let name = format!("not Isupport({x},{y})");
            self.note(format!("contrapose Cooperation => {name}"));
            self.note(format!("retracted {derived}"));
            names.push(name);
        }
        let diagnostic = format!("no permitted relation; by contraposing Cooperation, {}", names.join(", "));
        self.sdrs.record_failure(&site.beta, diagnostic);
        Ok(())
    }

    fn charity_pass(&mut self) -> Result<(), RunError> {
        let engine = self.engine(&[Role::Charity], Vec::new());
        let mut trace = InferenceTrace::new();
        engine.close(&mut self.kb, &ContextPath::root(), &mut trace)?;
        let changed = !trace.is_empty();
        self.push_trace(trace);
        if changed {
            self.attitude_phase()?;
        }
        Ok(())
    }

    /// The author's intentions at the root, as states.
    fn intentions(&self) -> Vec<IntentionState> {
        let author = self.axioms.author();
        self.kb
            .store(&ContextPath::root())
            .facts
            .iter()
            .filter_map(|f| match f {
                Formula::Att { kind: Attitude::Intends, agent, body } if agent == author => match &**body {
                    Formula::Doing(PlanTerm::Plan(p)) => Some(IntentionState::new(agent.clone(), p.clone())),
                    _ => None,
                },
                _ => None,
            })
            .collect()
    }

    /// The intention to extend: the resolved anaphor, otherwise the longest
    /// intended plan ending with what the attachment point contributes.
    fn plan_apprehension_rules(&self, site: &UpdateSite, lf_b: &Formula) -> Vec<DefaultRule> {
        let rel = RelAtom::new("Result", &site.alpha, &site.beta);
        let intentions = self.intentions();
        let chosen = match &self.resolved {
            Some(plan) => intentions.into_iter().find(|st| &st.plan == plan),
            None => {
                let Some(tail) = self.sdrs.constituent(&site.alpha).and_then(Constituent::contributed_plan) else {
                    return Vec::new();
                };
                intentions
                    .into_iter()
                    .filter(|st| st.plan.steps().ends_with(tail.steps()))
                    .max_by_key(|st| st.plan.len())
            }
        };
        chosen.and_then(|st| plan_apprehension_rule(&rel, &st, lf_b)).into_iter().collect()
    }

    fn done(&mut self, plan: &Plan) -> Result<(), RunError> {
        let root = ContextPath::root();
        let mut any = false;
        for st in self.intentions() {
            let Ok(next) = update_intentions(&st, plan) else { continue };
            any = true;
            self.kb.retract_fact(&root, &Formula::intends(&st.agent, Formula::doing(st.plan.clone())));
            self.insert_root(axioms::INTENTION_UPDATE, next.facts())?;
        }
        if !any {
            self.note(format!("no intention has {plan} as a prefix"));
        }
        self.wrap_up(&format!("done {plan}"), None, BTreeSet::new());
        Ok(())
    }

    fn finish(self) -> RunReport {
        let verdict = self.sdrs.coherent(&self.kb);
        let mut expectations = Vec::new();
        let mut coherence_failed = false;
        for e in &self.s.expectations {
            let holds = match &e.expected {
                Expected::Holds { path, formula } => self.kb.entails(path, formula),
                Expected::Coherent => verdict.is_coherent(),
                Expected::Incoherent => !verdict.is_coherent(),
            };
            let met = holds == e.must_hold;
            if !met && e.expected == Expected::Coherent && e.must_hold {
                coherence_failed = true;
            }
            expectations.push(super::pipeline::ExpectationResult { text: e.text.clone(), line: e.line, met });
        }
        RunReport {
            scenario: self.s.name.clone(),
            sdrs: self.sdrs,
            kb: self.kb,
            verdict,
            utterances: self.utterances,
            expectations,
            coherence_expected_failed: coherence_failed,
        }
    }
}
