use std::collections::BTreeSet;

use crate::discourse::{BeliefPropertyRegistry, Constituent, RelAtom, UpdateSite};
use crate::engine::{DefaultRule, Engine, EngineError, InferenceStep, InferenceTrace, Mode};
use crate::kb::{ContextPath, HypothesisSpace, KnowledgeBase};
use crate::logic::{instance_of, substitute, Formula, PlanTerm, Substitution};

use super::{AxiomSet, IntentionState, BP_EVIDENCE, BP_RESULT, EVIDENCE_RULE, PLAN_APPREHENSION, RESULT_RULE};

pub fn isupport_atom(x: &str, y: &str) -> Formula {
    Formula::atom("isupport", &[x, y])
}

/// The three conditions under which the discourse act at `site` is meant to
/// bring the interpreter to believe `lf_y`.
pub fn isupport_conditions(axioms: &AxiomSet, site: &UpdateSite, lf_y: &Formula) -> Vec<Formula> {
    let (a, i) = (axioms.author(), axioms.interpreter());
    let believed = Formula::believes(i, lf_y.clone());
    vec![
        Formula::wants(a, believed.clone()),
        Formula::believes(a, Formula::negate(believed.clone())),
        Formula::believes(a, Formula::yields(site.token_and_info(), Formula::eventually(believed))),
    ]
}

/// `isupport(x,y) ↔ conditions`, as a ground hard constraint.
pub fn isupport_definition(axioms: &AxiomSet, site: &UpdateSite, x: &str, y: &str, lf_y: &Formula) -> Formula {
    Formula::Iff(Box::new(isupport_atom(x, y)), Box::new(Formula::And(isupport_conditions(axioms, site, lf_y))))
}

/// Whether every condition holds at the root, evaluating the nested
/// `yields` lazily with `engine`.
pub fn isupport_holds(
    engine: &Engine,
    kb: &mut KnowledgeBase,
    axioms: &AxiomSet,
    site: &UpdateSite,
    lf_y: &Formula,
    trace: &mut InferenceTrace,
) -> Result<bool, EngineError> {
    let root = ContextPath::root();
    for c in isupport_conditions(axioms, site, lf_y) {
        if !engine.holds(kb, &root, &c, trace)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cooperation {
    /// Intentional support holds in neither direction.
    Vacuous,
    /// The relations allowed by the direction of support, and the rest of
    /// the vocabulary for the site.
    Permitted { permitted: BTreeSet<RelAtom>, forbidden: BTreeSet<RelAtom> },
}

impl Cooperation {
    pub fn permitted(&self) -> Option<&BTreeSet<RelAtom>> {
        match self {
            Cooperation::Vacuous => None,
            Cooperation::Permitted { permitted, .. } => Some(permitted),
        }
    }

    /// True when a constraint applies and no permitted relation holds at
    /// the root of `kb`.
    pub fn violated(&self, kb: &KnowledgeBase) -> bool {
        match self {
            Cooperation::Vacuous => false,
            Cooperation::Permitted { permitted, .. } => {
                !permitted.iter().any(|r| kb.entails(&ContextPath::root(), &r.formula()))
            }
        }
    }
}

pub fn cooperation_constraint(kb: &KnowledgeBase, site: &UpdateSite, registry: &BeliefPropertyRegistry) -> Cooperation {
    let root = ContextPath::root();
    let (a, b) = (site.alpha.as_str(), site.beta.as_str());
    let forward = kb.entails(&root, &isupport_atom(a, b));
    let backward = kb.entails(&root, &isupport_atom(b, a));
    if !forward && !backward {
        return Cooperation::Vacuous;
    }
    let mut vocabulary = BTreeSet::from([RelAtom::new("Narration", a, b)]);
    let mut permitted = BTreeSet::new();
    for r in &registry.relations {
        vocabulary.insert(RelAtom::new(r, a, b));
        vocabulary.insert(RelAtom::new(r, b, a));
        if forward {
            permitted.insert(RelAtom::new(r, a, b));
        }
    }
    if backward {
        for r in &registry.backward {
            permitted.insert(RelAtom::new(r, b, a));
        }
    }
    let forbidden = vocabulary.difference(&permitted).cloned().collect();
    Cooperation::Permitted { permitted, forbidden }
}

/// Inputs to the search for `δ` in the Result and Evidence rules.
pub struct DeltaSearch<'a> {
    pub kb: &'a KnowledgeBase,
    pub site: &'a UpdateSite,
    pub lf_alpha: &'a Formula,
    pub lf_beta: &'a Formula,
    pub hypotheses: &'a HypothesisSpace,
    pub max_steps: usize,
    /// Further filter on `δ`, off unless a scenario turns it on.
    pub expectation: Option<&'a dyn Fn(&Formula) -> bool>,
}

/// A relation licensed for a site, with the abduced `δ` and the generic
/// it instantiates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct License {
    pub relation: RelAtom,
    pub delta: Formula,
    pub generic: Formula,
    pub instance: Formula,
    pub trace: InferenceTrace,
}

pub fn apply_result_rule(q: &DeltaSearch<'_>) -> Result<Option<License>, EngineError> {
    let (a, b) = (q.site.alpha.as_str(), q.site.beta.as_str());
    search_delta(q, RESULT_RULE, isupport_atom(a, b), RelAtom::new("Result", a, b))
}

pub fn apply_evidence_rule(q: &DeltaSearch<'_>) -> Result<Option<License>, EngineError> {
    let (a, b) = (q.site.alpha.as_str(), q.site.beta.as_str());
    search_delta(q, EVIDENCE_RULE, isupport_atom(b, a), RelAtom::new("Evidence", b, a))
}

fn search_delta(q: &DeltaSearch<'_>, rule: &str, support: Formula, relation: RelAtom) -> Result<Option<License>, EngineError> {
    let root = ContextPath::root();
    if q.hypotheses.is_empty() || !q.kb.entails(&root, &support) {
        return Ok(None);
    }
    // Only the scenario's own rules take part in these consequence tests.
    let engine = Engine::new(Vec::new()).with_max_steps(q.max_steps);
    let generics: BTreeSet<Formula> = q
        .kb
        .store(&root)
        .premises()
        .flat_map(Formula::subformulas)
        .filter(|f| matches!(f, Formula::Generic { .. }) && f.is_ground())
        .cloned()
        .collect();
    let mut yielded = Vec::new();
    for g in &generics {
        if engine.nonmon_yields(q.kb, &root, q.lf_alpha, g)? {
            yielded.push(g.clone());
        }
    }
    for delta in q.hypotheses.candidates() {
        if !q.kb.consistent_with(&root, std::slice::from_ref(delta)) {
            continue;
        }
        if q.expectation.is_some_and(|e| !e(delta)) {
            continue;
        }
        let with_delta = q.kb.assert_fact(&root, delta.clone())?;
        for g in &yielded {
            let Formula::Generic { var, antecedent, consequent } = g else { continue };
            for d in with_delta.constant_pool() {
                let s = Substitution::single(var, d);
                let mut parts = substitute(antecedent, &s).conjuncts();
                parts.extend(substitute(consequent, &s).conjuncts());
                let psi = Formula::And(parts);
                if !matches!(instance_of(g, &psi), Ok(Some(_))) {
                    continue;
                }
                if engine.nonmon_yields(&with_delta, &root, q.lf_beta, &psi)? {
                    let mut trace = InferenceTrace::new();
                    trace.push(InferenceStep {
                        rule: rule.to_string(),
                        mode: Mode::Abduction,
                        bindings: Substitution::new()
                            .bind_formula("delta", delta.clone())
                            .bind_formula("phi", g.clone())
                            .bind_formula("psi", psi.clone()),
                        added: vec![delta.clone()],
                        path: root.clone(),
                        assumed_absent: Vec::new(),
                    });
                    return Ok(Some(License {
                        relation,
                        delta: delta.clone(),
                        generic: g.clone(),
                        instance: psi,
                        trace,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// The ground default a license contributes to the attachment closure:
/// `(site ∧ isupport) > (R ∧ δ)`.
pub fn relation_license_rule(site: &UpdateSite, license: &License) -> DefaultRule {
    let (name, support) = if license.relation.relation == "Evidence" {
        (EVIDENCE_RULE, isupport_atom(&site.beta, &site.alpha))
    } else {
        (RESULT_RULE, isupport_atom(&site.alpha, &site.beta))
    };
    let consequent = Formula::And(vec![license.relation.formula(), license.delta.clone()]);
    DefaultRule::new(name, vec![site.token(), support], consequent).expect("ground rule")
}

pub fn result_via_cause(kb: &KnowledgeBase, site: &UpdateSite) -> Option<RelAtom> {
    let cause = Formula::atom("cause", &[&site.alpha, &site.beta]);
    kb.entails(&ContextPath::root(), &cause).then(|| RelAtom::new("Result", &site.alpha, &site.beta))
}

/// Ground belief-property rules for every pair of constituents in textual
/// order: forward for each registered relation, backward for those
/// registered in both directions.
pub fn belief_property_instances(axioms: &AxiomSet, constituents: &[Constituent]) -> Vec<DefaultRule> {
    let registry = axioms.registry();
    let mut out = Vec::new();
    for (n, x) in constituents.iter().enumerate() {
        for y in &constituents[n + 1..] {
            for r in &registry.relations {
                if let Some(rule) = bp_instance(axioms, r, x, y) {
                    out.push(rule);
                }
                if registry.backward.contains(r) {
                    if let Some(rule) = bp_instance(axioms, r, y, x) {
                        out.push(rule);
                    }
                }
            }
        }
    }
    out
}

fn bp_instance(axioms: &AxiomSet, relation: &str, from: &Constituent, to: &Constituent) -> Option<DefaultRule> {
    let name = match relation {
        "Result" => BP_RESULT.to_string(),
        "Evidence" => BP_EVIDENCE.to_string(),
        other => format!("BeliefProperty-{other}"),
    };
    let schema = &axioms.get(&name)?.schema;
    let s = Substitution::new()
        .bind_term("a", &from.id)
        .bind_term("b", &to.id)
        .bind_formula("alpha", from.logical_form.clone())
        .bind_formula("beta", to.logical_form.clone());
    DefaultRule::from_formula(&name, &substitute(schema, &s), false).ok()
}

fn can_plan(lf: &Formula) -> Option<&crate::logic::Plan> {
    match lf {
        Formula::Can(inner) => match &**inner {
            Formula::Doing(PlanTerm::Plan(p)) => Some(p),
            _ => None,
        },
        _ => None,
    }
}

/// `I_A(R p)` extended by the plan of `lf_beta` when `rel` is a Result
/// link into a `can(R δ)` constituent and the premises hold at the root.
pub fn plan_apprehension(
    kb: &KnowledgeBase,
    rel: &RelAtom,
    intended: &IntentionState,
    lf_beta: &Formula,
) -> Option<IntentionState> {
    if rel.relation != "Result" {
        return None;
    }
    let delta = can_plan(lf_beta)?;
    let plan = intended.intended()?;
    let root = ContextPath::root();
    let intends = Formula::intends(&intended.agent, Formula::doing(plan.clone()));
    if !kb.entails(&root, &rel.formula()) || !kb.entails(&root, &intends) {
        return None;
    }
    Some(IntentionState::new(intended.agent.clone(), plan.then(delta)))
}

/// The ground default behind `plan_apprehension`, for the attachment closure.
pub fn plan_apprehension_rule(rel: &RelAtom, intended: &IntentionState, lf_beta: &Formula) -> Option<DefaultRule> {
    if rel.relation != "Result" {
        return None;
    }
    let delta = can_plan(lf_beta)?;
    let plan = intended.intended()?;
    let agent = &intended.agent;
    let antecedent = vec![rel.formula(), Formula::intends(agent, Formula::doing(plan.clone()))];
    let consequent = Formula::intends(agent, Formula::doing(plan.then(delta)));
    DefaultRule::new(PLAN_APPREHENSION, antecedent, consequent).ok()
}
