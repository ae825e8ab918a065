use dice::kb::{ContextPath, KbError, KnowledgeBase};
use dice::logic::{parse_formula, AgentId, Formula};
use proptest::prelude::*;

fn p(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

/// Collects everything the propositional connectives do not look inside.
fn leaves(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::Not(a) => leaves(a, out),
        Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|q| leaves(q, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            leaves(a, out);
            leaves(b, out);
        }
        other => {
            if !out.contains(other) {
                out.push(other.clone());
            }
        }
    }
}

fn eval(f: &Formula, atoms: &[Formula], bits: u64) -> bool {
    match f {
        Formula::Not(a) => !eval(a, atoms, bits),
        Formula::And(ps) => ps.iter().all(|q| eval(q, atoms, bits)),
        Formula::Or(ps) => ps.iter().any(|q| eval(q, atoms, bits)),
        Formula::Implies(a, b) => !eval(a, atoms, bits) || eval(b, atoms, bits),
        Formula::Iff(a, b) => eval(a, atoms, bits) == eval(b, atoms, bits),
        other => {
            let i = atoms.iter().position(|a| a == other).unwrap();
            bits >> i & 1 == 1
        }
    }
}

fn truth_table_sat(fs: &[Formula]) -> bool {
    let mut atoms = Vec::new();
    fs.iter().for_each(|f| leaves(f, &mut atoms));
    assert!(atoms.len() <= 25, "too many atoms for enumeration");
    (0..1u64 << atoms.len()).any(|bits| fs.iter().all(|f| eval(f, &atoms, bits)))
}

fn truth_table_entails(premises: &[Formula], goal: &Formula) -> bool {
    let mut all = premises.to_vec();
    all.push(Formula::negate(goal.clone()));
    !truth_table_sat(&all)
}

fn premises(kb: &KnowledgeBase, path: &ContextPath) -> Vec<Formula> {
    kb.store(path).premises().cloned().collect()
}

const PHI_GEN: &str = "(forall x (> (and (bill x) (bad x)) (veto bush x)))";

fn bush_kb() -> KnowledgeBase {
    let root = ContextPath::root();
    let a = ContextPath::of(&["A"]);
    let mut kb = KnowledgeBase::new().with_author(AgentId::new("A"));
    for f in ["(W A (B I (veto bush hb1711)))", "(B A (not (B I (veto bush hb1711))))", "(bill hb1711)"] {
        kb.insert_fact(&root, p(f)).unwrap();
    }
    kb.insert_hard(&root, p(&format!("(<-> (supports bush bigbiz) {PHI_GEN})"))).unwrap();
    for f in ["(B I (supports bush bigbiz))", "(bill hb1711)"] {
        kb.insert_fact(&a, p(f)).unwrap();
    }
    kb.insert_hard(&a, p("(-> (and (bill hb1711) (bad hb1711)) (cause alpha beta))")).unwrap();
    kb
}

#[test]
fn assert_fact_examples() {
    let root = ContextPath::root();
    let f = p("(W A (B I beta))");
    let kb = KnowledgeBase::new();
    let next = kb.assert_fact(&root, f.clone()).unwrap();
    assert!(next.store(&root).facts.contains(&f));
    assert!(kb.store(&root).facts.is_empty());

    let a = ContextPath::of(&["A"]);
    let next = next.assert_fact(&a, p("(bad hb1711)")).unwrap();
    assert!(next.contains_fact(&a, &p("(bad hb1711)")));
    assert!(!next.contains_fact(&root, &p("(bad hb1711)")));
    assert!(next.constant_pool().contains("hb1711"));

    let deep = ContextPath::of(&["A", "I", "A", "I"]);
    assert!(matches!(next.assert_fact(&deep, p("q")), Err(KbError::DepthExceeded { .. })));
    assert!(matches!(next.assert_fact(&root, p("(bird ?x)")), Err(KbError::NotGround(_))));
}

#[test]
fn entails_examples() {
    let root = ContextPath::root();
    let mut kb = KnowledgeBase::new();
    kb.insert_fact(&root, p("(penguin t)")).unwrap();
    kb.insert_hard(&root, p("(-> (penguin t) (bird t))")).unwrap();
    assert!(kb.entails(&root, &p("(bird t)")));

    let mut kb = KnowledgeBase::new();
    kb.insert_fact(&root, p("p")).unwrap();
    assert!(!kb.entails(&root, &p("q")));

    let mut kb = KnowledgeBase::new();
    kb.insert_fact(&root, p("(supports bush bigbiz)")).unwrap();
    kb.insert_hard(&root, p(&format!("(<-> (supports bush bigbiz) {PHI_GEN})"))).unwrap();
    let goal = p(PHI_GEN);
    assert!(kb.entails(&root, &goal));
    assert_eq!(kb.entails(&root, &goal), truth_table_entails(&premises(&kb, &root), &goal));
}

#[test]
fn consistency_examples() {
    let root = ContextPath::root();
    let kb = bush_kb();
    assert!(kb.consistent_with(&root, &[p("(bad hb1711)")]));

    let mut weak = KnowledgeBase::new().with_author(AgentId::new("A"));
    weak.insert_fact(&root, p("(W A (B I (veto bush hb1711)))")).unwrap();
    weak.insert_hard(&root, p("(-> (and (weak bush) (bad hb1711)) (not (veto bush hb1711)))")).unwrap();
    let a = ContextPath::of(&["A"]);
    weak.insert_fact(&a, p("(weak bush)")).unwrap();
    weak.insert_fact(&a, p("(veto bush hb1711)")).unwrap();
    assert!(weak.consistent_with(&root, &[]));
    assert!(!weak.consistent_with(&root, &[p("(bad hb1711)")]));
    // The author's store only joins the check at the root.
    assert!(weak.consistent_with(&a, &[p("(bad hb1711)")]));

    assert!(!kb.consistent_with(&a, &[p("p"), p("(not p)")]));
}

#[test]
fn nested_view_examples() {
    let kb = bush_kb().assert_fact(&ContextPath::of(&["A", "I"]), p("(bad hb1711)")).unwrap();
    let a = kb.nested_view(&ContextPath::of(&["A"])).unwrap();
    assert!(a.contains_fact(&ContextPath::root(), &p("(B I (supports bush bigbiz))")));
    assert_eq!(
        a.nested_view(&ContextPath::of(&["I"])).unwrap(),
        kb.nested_view(&ContextPath::of(&["A", "I"])).unwrap()
    );
    assert!(a.contains_fact(&ContextPath::of(&["I"]), &p("(bad hb1711)")));
    assert_eq!(kb.nested_view(&ContextPath::root()).unwrap(), kb);
    assert!(kb.nested_view(&ContextPath::of(&["A", "I", "A"])).is_err());
}

#[test]
fn entailment_matches_truth_tables_on_the_bush_stores() {
    let kb = bush_kb();
    let queries = [
        PHI_GEN,
        "(supports bush bigbiz)",
        "(cause alpha beta)",
        "(bill hb1711)",
        "(-> (bad hb1711) (cause alpha beta))",
        "(or (bad hb1711) (not (bad hb1711)))",
    ];
    for path in kb.paths() {
        let prem = premises(&kb, path);
        for q in queries {
            let q = p(q);
            assert_eq!(kb.entails(path, &q), truth_table_entails(&prem, &q), "{path} {q}");
        }
    }
}

const ATOMS: &[&str] = &["a", "b", "c", "d", "(B I e)", "(W A f)", "(forall x (> (g x) (h x)))"];

fn leaf() -> impl Strategy<Value = Formula> {
    prop::sample::select(ATOMS).prop_map(p)
}

fn prop_formula() -> impl Strategy<Value = Formula> {
    leaf().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::negate),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::Iff(Box::new(a), Box::new(b))),
        ]
    })
}

fn store_of(facts: &[Formula], hard: &[Formula]) -> KnowledgeBase {
    let root = ContextPath::root();
    let mut kb = KnowledgeBase::new();
    for f in facts {
        kb.insert_fact(&root, f.clone()).unwrap();
    }
    for h in hard {
        kb.insert_hard(&root, h.clone()).unwrap();
    }
    kb
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sat_agrees_with_enumeration(
        facts in prop::collection::vec(leaf(), 0..4),
        hard in prop::collection::vec(prop_formula(), 0..4),
        extra in prop::collection::vec(prop_formula(), 0..3),
        goal in prop_formula(),
    ) {
        let root = ContextPath::root();
        let kb = store_of(&facts, &hard);
        let prem = premises(&kb, &root);
        let mut with_extra = prem.clone();
        with_extra.extend(extra.iter().cloned());
        prop_assert_eq!(kb.consistent_with(&root, &extra), truth_table_sat(&with_extra));
        prop_assert_eq!(kb.entails(&root, &goal), truth_table_entails(&prem, &goal));
    }

    #[test]
    fn entailment_is_monotone(
        hard in prop::collection::vec(prop_formula(), 1..4),
        pick in any::<prop::sample::Index>(),
        weaken in prop_formula(),
        g in prop_formula(),
    ) {
        let root = ContextPath::root();
        let kb = store_of(&[], &hard);
        let goal = Formula::Or(vec![pick.get(&hard).clone(), weaken]);
        prop_assert!(kb.entails(&root, &goal));
        if kb.consistent_with(&root, std::slice::from_ref(&g)) {
            let mut bigger = kb.clone();
            bigger.insert_hard(&root, g).unwrap();
            prop_assert!(bigger.entails(&root, &goal));
        }
    }

    #[test]
    fn asserted_facts_are_not_deniable(hard in prop::collection::vec(prop_formula(), 0..4), f in leaf()) {
        let root = ContextPath::root();
        let kb = store_of(&[], &hard);
        let sat = truth_table_sat(&premises(&kb, &root));
        prop_assert_eq!(kb.consistent_with(&root, &[]), sat);
        let next = kb.assert_fact(&root, f.clone()).unwrap();
        prop_assert!(!next.consistent_with(&root, &[Formula::negate(f)]));
    }

    #[test]
    fn nested_views_compose(a in prop::sample::select(&["A", "I"][..]), b in prop::sample::select(&["A", "I"][..]), f in leaf()) {
        let path = ContextPath::of(&[a, b]);
        let kb = KnowledgeBase::new()
            .assert_fact(&path, f.clone()).unwrap()
            .assert_fact(&ContextPath::of(&[a]), Formula::negate(f)).unwrap();
        let stepwise = kb.nested_view(&ContextPath::of(&[a])).unwrap().nested_view(&ContextPath::of(&[b])).unwrap();
        prop_assert_eq!(stepwise, kb.nested_view(&path).unwrap());
    }
}
