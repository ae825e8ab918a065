use std::collections::BTreeSet;
use std::path::PathBuf;

use dice::axioms::{
    apply_evidence_rule, apply_result_rule, cooperation_constraint, isupport_atom, isupport_holds, parse_overrides,
    plan_apprehension, result_via_cause, standard_axioms, update_intentions, AxiomError, Cooperation,
    DeltaSearch, IntentionState, License, Role,
};
use dice::discourse::{RelAtom, UpdateSite};
use dice::engine::{Engine, InferenceTrace, DEFAULT_MAX_STEPS};
use dice::harness::{load_scenario, run_scenario, RunReport, Scenario};
use dice::kb::{ContextPath, HypothesisSpace, KnowledgeBase};
use dice::logic::{parse_formula, AgentId, Formula, Plan};
use proptest::prelude::*;

fn p(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.scn"));
    load_scenario(&path).unwrap()
}

fn run(name: &str) -> (Scenario, RunReport) {
    let s = scenario(name);
    let r = run_scenario(&s).unwrap();
    (s, r)
}

fn lf(r: &RunReport, id: &str) -> Formula {
    r.sdrs.constituent(id).unwrap().logical_form.clone()
}

fn site() -> UpdateSite {
    UpdateSite::new("tau", "alpha", "beta")
}

fn search(kb: &KnowledgeBase, r: &RunReport, hyp: &HypothesisSpace) -> (Option<License>, Option<License>) {
    let (lf_a, lf_b, site) = (lf(r, "alpha"), lf(r, "beta"), site());
    let q = DeltaSearch {
        kb,
        site: &site,
        lf_alpha: &lf_a,
        lf_beta: &lf_b,
        hypotheses: hyp,
        max_steps: DEFAULT_MAX_STEPS,
        expectation: None,
    };
    (apply_result_rule(&q).unwrap(), apply_evidence_rule(&q).unwrap())
}

const MANIFEST: [&str; 16] = [
    "Narration",
    "PracticalSyllogism",
    "APS1",
    "Intentionality",
    "IntendsToSupport",
    "Cooperation",
    "BeliefProperty-Result",
    "BeliefProperty-Evidence",
    "ResultRule",
    "EvidenceRule",
    "ResultViaCause",
    "Charity",
    "SincereOrdering",
    "WantingAndDoing",
    "PlanApprehension",
    "IntentionUpdate",
];

#[test]
fn every_named_rule_appears_once() {
    let axioms = standard_axioms();
    let names = axioms.names();
    for n in MANIFEST {
        assert_eq!(names.iter().filter(|m| **m == n).count(), 1, "{n}");
    }
    let unique: BTreeSet<&str> = names.iter().copied().collect();
    assert_eq!(unique.len(), names.len());
    assert!(names.len() >= 12);
}

#[test]
fn schema_examples() {
    let axioms = standard_axioms();
    assert_eq!(axioms.get("Narration").unwrap().schema, p("(> (site ?t ?a ?b) (rel Narration ?a ?b))"));
    assert_eq!(axioms.get("Charity").unwrap().schema, p("(> (B I ?phi) (B A (B I ?phi)))"));
    let ps = axioms.rule("PracticalSyllogism").unwrap();
    assert_eq!(ps.abducible.iter().copied().collect::<BTreeSet<_>>(), BTreeSet::from([0, 1]));
    assert!(axioms.rules_with_role(Role::Attitude).iter().any(|r| r.name == "APS1"));
}

#[test]
fn override_parsing() {
    let text = "; a domain default\nrule WeakNoVeto default (> (weak bush) (not (veto bush hb1711)))\n";
    let parsed = parse_overrides(text).unwrap();
    assert_eq!(parsed.len(), 1);
    assert_eq!(parsed[0].line, 2);
    assert_eq!(parsed[0].rule.name, "WeakNoVeto");

    let mut axioms = standard_axioms();
    axioms.apply_overrides(text).unwrap();
    assert_eq!(axioms.get("WeakNoVeto").unwrap().role, Role::Domain);
    axioms.apply_overrides("rule Narration default (> (site ?t ?a ?b) (rel Background ?a ?b))").unwrap();
    assert_eq!(axioms.get("Narration").unwrap().schema, p("(> (site ?t ?a ?b) (rel Background ?a ?b))"));

    let ab = parse_overrides("rule Guess default abducible (0) (> (and p q) r)").unwrap();
    assert_eq!(ab[0].rule.abducible.iter().copied().collect::<Vec<_>>(), vec![0]);

    assert!(matches!(parse_overrides("rule X hard (> p q)"), Err(AxiomError::Override { line: 1, .. })));
    assert!(matches!(parse_overrides("rule X sometimes (> p q)"), Err(AxiomError::Override { .. })));
    assert!(matches!(parse_overrides("\n\nrule X default (> p"), Err(AxiomError::Syntax(_))));
}

#[test]
fn isupport_examples() {
    let axioms = standard_axioms();
    let engine = Engine::new(axioms.rules_with_role(Role::Attitude));
    let mut trace = InferenceTrace::new();

    let (_, r1) = run("bush_context1");
    let mut kb = r1.kb.clone();
    assert!(isupport_holds(&engine, &mut kb, &axioms, &site(), &lf(&r1, "beta"), &mut trace).unwrap());
    assert!(r1.kb.entails(&ContextPath::root(), &isupport_atom("alpha", "beta")));

    let (_, r2) = run("bush_context2");
    let mut kb = r2.kb.clone();
    assert!(isupport_holds(&engine, &mut kb, &axioms, &site(), &lf(&r2, "alpha"), &mut trace).unwrap());
    assert!(!isupport_holds(&engine, &mut kb, &axioms, &site(), &lf(&r2, "beta"), &mut trace).unwrap());

    let mut empty = KnowledgeBase::new();
    assert!(!isupport_holds(&engine, &mut empty, &axioms, &site(), &p("(veto bush hb1711)"), &mut trace).unwrap());
}

#[test]
fn cooperation_examples() {
    let reg = standard_axioms().registry().clone();
    let (_, r1) = run("bush_context1");
    let c1 = cooperation_constraint(&r1.kb, &site(), &reg);
    assert_eq!(
        c1.permitted().unwrap(),
        &BTreeSet::from([RelAtom::new("Result", "alpha", "beta"), RelAtom::new("Evidence", "alpha", "beta")])
    );
    assert!(!c1.violated(&r1.kb));

    let (_, r2) = run("bush_context2");
    let c2 = cooperation_constraint(&r2.kb, &site(), &reg);
    assert_eq!(c2.permitted().unwrap(), &BTreeSet::from([RelAtom::new("Evidence", "beta", "alpha")]));

    let (_, r3) = run("weak_willed");
    assert!(r3.kb.entails(&ContextPath::root(), &p("(not (isupport alpha beta))")));
    assert_eq!(cooperation_constraint(&r3.kb, &site(), &reg), Cooperation::Vacuous);
    let notes: Vec<&str> = r3.utterances[1].notes().collect();
    assert!(notes.iter().any(|n| n.starts_with("contrapose Cooperation")));

    assert_eq!(cooperation_constraint(&KnowledgeBase::new(), &site(), &reg), Cooperation::Vacuous);
}

#[test]
fn result_and_evidence_examples() {
    let root = ContextPath::root();
    let bad = p("(bad hb1711)");

    let (s1, r1) = run("bush_context1");
    let (res, ev) = search(&r1.kb, &r1, &s1.hypotheses);
    let res = res.unwrap();
    assert_eq!(res.relation, RelAtom::new("Result", "alpha", "beta"));
    assert_eq!(res.delta, bad);
    assert!(ev.is_none());
    let (res, ev) = search(&r1.kb, &r1, &HypothesisSpace::default());
    assert!(res.is_none() && ev.is_none());

    let (s2, r2) = run("bush_context2");
    let (res, ev) = search(&r2.kb, &r2, &s2.hypotheses);
    assert!(res.is_none());
    let ev = ev.unwrap();
    assert_eq!(ev.relation, RelAtom::new("Evidence", "beta", "alpha"));
    assert_eq!(ev.delta, bad);

    // Support asserted outright, yet every candidate contradicts the weak-will rule.
    let (s3, r3) = run("weak_willed");
    let mut kb = r3.kb.clone();
    kb.retract_fact(&root, &p("(not (isupport alpha beta))"));
    kb.insert_fact(&root, isupport_atom("alpha", "beta")).unwrap();
    assert!(!kb.consistent_with(&root, std::slice::from_ref(&bad)));
    let (res, ev) = search(&kb, &r3, &s3.hypotheses);
    assert!(res.is_none() && ev.is_none());
}

#[test]
fn licenses_are_consistent_and_one_directional_on_the_corpus() {
    let root = ContextPath::root();
    for name in ["bush_context1", "bush_context2", "bush_context3", "weak_willed"] {
        let (s, r) = run(name);
        let (res, ev) = search(&r.kb, &r, &s.hypotheses);
        assert!(!(res.is_some() && ev.is_some()), "{name}");
        for l in res.iter().chain(ev.iter()) {
            assert!(r.kb.consistent_with(&root, std::slice::from_ref(&l.delta)), "{name}");
        }
    }
}

#[test]
fn result_via_cause_examples() {
    let (_, r3) = run("bush_context3");
    assert_eq!(result_via_cause(&r3.kb, &site()), Some(RelAtom::new("Result", "alpha", "beta")));
    assert_eq!(result_via_cause(&KnowledgeBase::new(), &site()), None);
    let (_, hw) = run("hardware_store");
    assert_eq!(result_via_cause(&hw.kb, &site()), Some(RelAtom::new("Result", "alpha", "beta")));
    assert!(hw.sdrs.constituent("alpha").unwrap().mood == dice::discourse::Mood::Imperative);
}

fn agent() -> AgentId {
    AgentId::new("A")
}

#[test]
fn plan_apprehension_examples() {
    let root = ContextPath::root();
    let result = RelAtom::new("Result", "alpha", "beta");
    let start = IntentionState::new(agent(), Plan::of(&["go_home_5"]));
    let mut kb = KnowledgeBase::new();
    kb.insert_fact(&root, result.formula()).unwrap();
    kb.insert_fact(&root, p("(I A (R (plan go_home_5)))")).unwrap();
    let next = plan_apprehension(&kb, &result, &start, &p("(can (R (plan hardware_store)))")).unwrap();
    assert_eq!(next.plan, Plan::of(&["go_home_5", "hardware_store"]));
    assert!(start.plan.is_prefix_of(&next.plan));

    let second = RelAtom::new("Result", "beta", "gamma");
    kb.insert_fact(&root, second.formula()).unwrap();
    kb.insert_fact(&root, p("(I A (R (plan go_home_5 hardware_store)))")).unwrap();
    let last = plan_apprehension(&kb, &second, &next, &p("(can (R (plan finish_bookshelves)))")).unwrap();
    assert_eq!(last.plan, Plan::of(&["go_home_5", "hardware_store", "finish_bookshelves"]));

    assert!(plan_apprehension(&kb, &result, &start, &p("(R (plan hardware_store))")).is_none());
    let narration = RelAtom::new("Narration", "alpha", "beta");
    assert!(plan_apprehension(&kb, &narration, &start, &p("(can (R (plan hardware_store)))")).is_none());
}

#[test]
fn update_examples() {
    let abc = IntentionState::new(agent(), Plan::of(&["a", "b", "c"]));
    let after = update_intentions(&abc, &Plan::of(&["a"])).unwrap();
    assert_eq!(after.intended(), Some(Plan::of(&["b", "c"])));
    assert!(after.facts().contains(&p("(I A (R (plan b c)))")));
    assert!(after.facts().contains(&p("(not (I A (R (plan a))))")));

    let a = IntentionState::new(agent(), Plan::of(&["a"]));
    let done = update_intentions(&a, &Plan::of(&["a"])).unwrap();
    assert!(done.is_complete());
    assert_eq!(done.facts(), vec![p("(not (I A (R (plan a))))"), p("(D (plan a))")]);

    let ab = IntentionState::new(agent(), Plan::of(&["a", "b"]));
    assert!(matches!(update_intentions(&ab, &Plan::of(&["b"])), Err(AxiomError::NotPrefix { .. })));
    assert!(matches!(update_intentions(&done, &Plan::of(&["a"])), Err(AxiomError::NotPrefix { .. })));
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

proptest! {
    #[test]
    fn updates_are_cumulative(len in 2usize..7, cut in any::<prop::sample::Index>(), cut2 in any::<prop::sample::Index>()) {
        let steps = names(len);
        let refs: Vec<&str> = steps.iter().map(String::as_str).collect();
        let full = Plan::of(&refs);
        let i = 1 + cut.index(len - 1);
        let j = i + 1 + cut2.index(len - i);
        let first = Plan::of(&refs[..i]);
        let second = Plan::of(&refs[i..j]);
        let st = IntentionState::new(agent(), full);
        let stepwise = update_intentions(&update_intentions(&st, &first).unwrap(), &second).unwrap();
        let at_once = update_intentions(&st, &first.then(&second)).unwrap();
        prop_assert_eq!(stepwise, at_once);
    }

    #[test]
    fn apprehension_extends_the_plan(len in 1usize..6, extra in 1usize..3) {
        let root = ContextPath::root();
        let steps = names(len + extra);
        let refs: Vec<&str> = steps.iter().map(String::as_str).collect();
        let base = Plan::of(&refs[..len]);
        let delta = Plan::of(&refs[len..]);
        let rel = RelAtom::new("Result", "alpha", "beta");
        let st = IntentionState::new(agent(), base.clone());
        let mut kb = KnowledgeBase::new();
        kb.insert_fact(&root, rel.formula()).unwrap();
        kb.insert_fact(&root, Formula::intends(&agent(), Formula::doing(base.clone()))).unwrap();
        let out = plan_apprehension(&kb, &rel, &st, &Formula::can(Formula::doing(delta.clone()))).unwrap();
        prop_assert!(base.is_prefix_of(&out.plan));
        prop_assert_eq!(out.plan, base.then(&delta));
    }
}
