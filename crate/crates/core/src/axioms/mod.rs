//! The interpretation rule library as data, and the drivers that apply the
//! rules needing more than a plain closure: intentional support, the
//! cooperation constraint, the Result and Evidence rules with abduced `δ`,
//! plan apprehension and intention update.

mod drivers;
mod intention;
mod overrides;

use std::fmt;

use thiserror::Error;

use crate::discourse::BeliefPropertyRegistry;
use crate::engine::{DefaultRule, RuleError};
use crate::logic::{parse_formula, AgentId, Formula, Plan, SyntaxError};

pub use drivers::{
    apply_evidence_rule, apply_result_rule, belief_property_instances, cooperation_constraint, isupport_atom,
    isupport_conditions, isupport_definition, isupport_holds, plan_apprehension, plan_apprehension_rule,
    relation_license_rule, result_via_cause, Cooperation, DeltaSearch, License,
};
pub use intention::{update_intentions, IntentionState};
pub use overrides::{parse_overrides, rule_from_sexp, Override};
pub(crate) use overrides::parse_rule_clause as parse_rule_clause_at;

pub const NARRATION: &str = "Narration";
pub const PRACTICAL_SYLLOGISM: &str = "PracticalSyllogism";
pub const APS1: &str = "APS1";
pub const INTENTIONALITY: &str = "Intentionality";
pub const INTENDS_TO_SUPPORT: &str = "IntendsToSupport";
pub const COOPERATION: &str = "Cooperation";
pub const BP_RESULT: &str = "BeliefProperty-Result";
pub const BP_EVIDENCE: &str = "BeliefProperty-Evidence";
pub const RESULT_RULE: &str = "ResultRule";
pub const EVIDENCE_RULE: &str = "EvidenceRule";
pub const RESULT_VIA_CAUSE: &str = "ResultViaCause";
pub const CHARITY: &str = "Charity";
pub const SINCERE_ORDERING: &str = "SincereOrdering";
pub const WANTING_AND_DOING: &str = "WantingAndDoing";
pub const PLAN_APPREHENSION: &str = "PlanApprehension";
pub const INTENTION_UPDATE: &str = "IntentionUpdate";
pub const EVENTUALLY_INTRO: &str = "EventuallyIntro";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("duplicate axiom name {0}")]
    Duplicate(String),
    #[error("line {line}: {message}")]
    Override { line: usize, message: String },
    #[error("{done} is not a prefix of the intended plan {plan}")]
    NotPrefix { done: Plan, plan: String },
}

/// How the pipeline uses an axiom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// Closed over at the root when attaching.
    Discourse,
    /// Closed over at every context path before attachment.
    Attitude,
    /// Grounded over constituent pairs.
    BeliefProperty,
    /// Applied by a dedicated driver; the schema is documentation.
    Driver,
    /// Run as a separate pass when the scenario asks for it.
    Charity,
    /// Added by an override.
    Domain,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Discourse => "discourse",
            Role::Attitude => "attitude",
            Role::BeliefProperty => "belief-property",
            Role::Driver => "driver",
            Role::Charity => "charity",
            Role::Domain => "domain",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub name: String,
    pub role: Role,
    pub schema: Formula,
    /// The closure rule, for axioms applied by the engine directly.
    pub rule: Option<DefaultRule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomSet {
    author: AgentId,
    interpreter: AgentId,
    axioms: Vec<Axiom>,
    registry: BeliefPropertyRegistry,
}

pub fn standard_axioms() -> AxiomSet {
    standard_axioms_for(&AgentId::new("A"), &AgentId::new("I"))
}

/// The standard library for an author and an interpreter.
pub fn standard_axioms_for(author: &AgentId, interpreter: &AgentId) -> AxiomSet {
    let (a, i) = (author.as_str(), interpreter.as_str());
    let f = |s: String| parse_formula(&s).expect("standard schema parses");
    let rule = |name: &str, s: String, hard: bool| {
        let schema = f(s);
        let rule = DefaultRule::from_formula(name, &schema, hard).expect("standard rule is well formed");
        (schema, rule)
    };
    let mut set = AxiomSet {
        author: author.clone(),
        interpreter: interpreter.clone(),
        axioms: Vec::new(),
        registry: BeliefPropertyRegistry::default(),
    };
    let mut add = |name: &str, role: Role, schema: Formula, rule: Option<DefaultRule>| {
        set.axioms.push(Axiom { name: name.to_string(), role, schema, rule });
    };

    let (s, r) = rule(NARRATION, "(> (site ?t ?a ?b) (rel Narration ?a ?b))".into(), false);
    add(NARRATION, Role::Discourse, s, Some(r));

    // Built clause by clause: clause (a) is itself a conjunction.
    let clause_a = f(format!("(and (W {a} ?phi) (B {a} (not ?phi)))"));
    let clause_b = f(format!("(B {a} (yields ?psi (eventually ?phi)))"));
    let r = DefaultRule::new(PRACTICAL_SYLLOGISM, vec![clause_a, clause_b], f(format!("(I {a} ?psi)")))
        .and_then(|r| r.with_abducible([0, 1]))
        .expect("standard rule is well formed");
    let s = r.schema();
    add(PRACTICAL_SYLLOGISM, Role::Attitude, s, Some(r));

    let (s, r) = rule(
        APS1,
        format!("(> (and (W {a} ?phi) (B {a} (not ?phi)) (I {a} ?psi)) (B {a} (yields ?psi (eventually ?phi))))"),
        false,
    );
    add(APS1, Role::Attitude, s, Some(r));

    let (s, r) = rule(
        INTENTIONALITY,
        format!("(> (site ?t ?a ?b) (I {a} (and (site ?t ?a ?b) (info ?a ?b))))"),
        false,
    );
    add(INTENTIONALITY, Role::Attitude, s, Some(r));

    add(
        INTENDS_TO_SUPPORT,
        Role::Driver,
        f(format!(
            "(<-> (isupport ?a ?b) (and (W {a} (B {i} ?beta)) (B {a} (not (B {i} ?beta))) \
             (B {a} (yields (and (site ?t ?a ?b) (info ?a ?b)) (eventually (B {i} ?beta))))))"
        )),
        None,
    );

    add(
        COOPERATION,
        Role::Driver,
        f("(-> (and (site ?t ?a ?b) (isupport ?a ?b)) \
             (or (yields (and (site ?t ?a ?b) (info ?a ?b)) (rel Result ?a ?b)) \
                 (yields (and (site ?t ?a ?b) (info ?a ?b)) (rel Evidence ?a ?b))))"
            .into()),
        None,
    );

    add(BP_RESULT, Role::BeliefProperty, f(format!("(> (and (B {i} ?alpha) (rel Result ?a ?b)) (B {i} ?beta))")), None);
    add(
        BP_EVIDENCE,
        Role::BeliefProperty,
        f(format!("(> (and (B {i} ?alpha) (rel Evidence ?a ?b)) (B {i} ?beta))")),
        None,
    );

    add(
        RESULT_RULE,
        Role::Driver,
        f("(> (and (site ?t ?a ?b) (isupport ?a ?b) (yields ?alpha ?phi) (yields (and ?beta ?delta) ?psi)) \
             (and (rel Result ?a ?b) ?delta))"
            .into()),
        None,
    );
    add(
        EVIDENCE_RULE,
        Role::Driver,
        f("(> (and (site ?t ?a ?b) (isupport ?b ?a) (yields ?alpha ?phi) (yields (and ?beta ?delta) ?psi)) \
             (and (rel Evidence ?b ?a) ?delta))"
            .into()),
        None,
    );

    let (s, r) = rule(RESULT_VIA_CAUSE, "(> (and (site ?t ?a ?b) (cause ?a ?b)) (rel Result ?a ?b))".into(), false);
    add(RESULT_VIA_CAUSE, Role::Discourse, s, Some(r));

    let (s, r) = rule(CHARITY, format!("(> (B {i} ?phi) (B {a} (B {i} ?phi)))"), false);
    add(CHARITY, Role::Charity, s, Some(r));

    let (s, r) = rule(SINCERE_ORDERING, format!("(> (imp ?x) (W {a} ?x))"), false);
    add(SINCERE_ORDERING, Role::Attitude, s, Some(r));

    let (s, r) = rule(WANTING_AND_DOING, format!("(> (W {a} (R ?p)) (I {a} (R ?p)))"), false);
    let r = r
        .with_unless(vec![f(format!("(B {a} (not (eventually (R ?p))))"))])
        .expect("unless clause is bound");
    add(WANTING_AND_DOING, Role::Attitude, s, Some(r));

    add(
        PLAN_APPREHENSION,
        Role::Driver,
        f(format!("(> (and (rel Result ?a ?b) (I {a} (R ?p)) (can (R ?q))) (I {a} (R ?pq)))")),
        None,
    );
    add(
        INTENTION_UPDATE,
        Role::Driver,
        f(format!("(-> (and (I {a} (R ?p)) (D ?q)) (and (I {a} (R ?r)) (not (I {a} (R ?q)))))")),
        None,
    );

    let (s, r) = rule(EVENTUALLY_INTRO, format!("(-> (B {i} ?phi) (eventually (B {i} ?phi)))"), true);
    add(EVENTUALLY_INTRO, Role::Attitude, s, Some(r));

    set.refresh_registry();
    set
}

impl AxiomSet {
    pub fn author(&self) -> &AgentId {
        &self.author
    }

    pub fn interpreter(&self) -> &AgentId {
        &self.interpreter
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn names(&self) -> Vec<&str> {
        self.axioms.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Axiom> {
        self.axioms.iter().find(|a| a.name == name)
    }

    pub fn rule(&self, name: &str) -> Option<&DefaultRule> {
        self.get(name).and_then(|a| a.rule.as_ref())
    }

    /// Closure rules of the given role, in library order.
    pub fn rules_with_role(&self, role: Role) -> Vec<DefaultRule> {
        self.axioms.iter().filter(|a| a.role == role).filter_map(|a| a.rule.clone()).collect()
    }

    pub fn registry(&self) -> &BeliefPropertyRegistry {
        &self.registry
    }

    pub fn insert(&mut self, axiom: Axiom) -> Result<(), AxiomError> {
        if self.get(&axiom.name).is_some() {
            return Err(AxiomError::Duplicate(axiom.name));
        }
        self.axioms.push(axiom);
        self.refresh_registry();
        Ok(())
    }

    pub fn remove(&mut self, name: &str) -> Option<Axiom> {
        let at = self.axioms.iter().position(|a| a.name == name)?;
        let out = self.axioms.remove(at);
        self.refresh_registry();
        Some(out)
    }

    /// Replaces the rule of a library axiom by name, or adds a domain axiom.
    pub fn apply_override(&mut self, o: Override) {
        match self.axioms.iter_mut().find(|a| a.name == o.rule.name) {
            Some(a) => {
                a.schema = o.rule.schema();
                a.rule = Some(o.rule);
            }
            None => self.axioms.push(Axiom {
                name: o.rule.name.clone(),
                role: Role::Domain,
                schema: o.rule.schema(),
                rule: Some(o.rule),
            }),
        }
        self.refresh_registry();
    }

    pub fn apply_overrides(&mut self, text: &str) -> Result<(), AxiomError> {
        for o in parse_overrides(text)? {
            self.apply_override(o);
        }
        Ok(())
    }

    fn refresh_registry(&mut self) {
        let mut reg = BeliefPropertyRegistry::default();
        for a in self.axioms.iter().filter(|a| a.role == Role::BeliefProperty) {
            let rel = a.schema.subformulas().into_iter().find_map(|f| match f {
                Formula::Rel { relation, .. } => Some(relation.clone()),
                _ => None,
            });
            if let Some(rel) = rel {
                // Result is installed in textual order only.
                if rel != "Result" {
                    reg.backward.insert(rel.clone());
                }
                reg.relations.insert(rel);
            }
        }
        self.registry = reg;
    }
}

impl fmt::Display for AxiomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axioms {
            match &a.rule {
                Some(r) => writeln!(f, "{} [{}]", r, a.role)?,
                None => writeln!(f, "{}: {} [{}]", a.name, a.schema, a.role)?,
            }
        }
        Ok(())
    }
}
