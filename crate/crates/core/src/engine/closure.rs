use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use crate::kb::{ContextPath, KnowledgeBase, Theory};
use crate::logic::{match_pattern, substitute, Attitude, Formula, Substitution};

use super::rule::DefaultRule;
use super::trace::{InferenceStep, InferenceTrace, Mode};
use super::EngineError;

pub const DEFAULT_MAX_STEPS: usize = 1000;

/// Name recorded in the trace when a lazily evaluated `yields` atom is cached.
pub const YIELDS_STEP: &str = "NonmonYields";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Specificity {
    FirstMoreSpecific,
    SecondMoreSpecific,
    Incomparable,
}

/// One explanation found by abduction: the hypotheses that, added to the
/// store, would make the chosen clause of the rule hold.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Abduced {
    pub rule: String,
    pub clause: usize,
    pub bindings: Substitution,
    pub hypotheses: Vec<Formula>,
}

/// The inference kernel over a fixed rule set. Each context's own rules are
/// added to this set when closing that context.
#[derive(Debug)]
pub struct Engine {
    rules: Vec<DefaultRule>,
    max_steps: usize,
    in_progress: RefCell<Vec<(ContextPath, Formula)>>,
}

impl Engine {
    pub fn new(rules: Vec<DefaultRule>) -> Self {
        Engine { rules, max_steps: DEFAULT_MAX_STEPS, in_progress: RefCell::new(Vec::new()) }
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn rules(&self) -> &[DefaultRule] {
        &self.rules
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn closure(&self, kb: &KnowledgeBase, path: &ContextPath) -> Result<(KnowledgeBase, InferenceTrace), EngineError> {
        let mut out = kb.clone();
        let mut trace = InferenceTrace::new();
        self.close(&mut out, path, &mut trace)?;
        Ok((out, trace))
    }

    /// Closes the store at `path` in place, appending steps to `trace`.
    pub fn close(&self, kb: &mut KnowledgeBase, path: &ContextPath, trace: &mut InferenceTrace) -> Result<(), EngineError> {
        kb.check_path(path)?;
        Run::new(self, kb, path, trace).fixpoint()
    }

    /// `ψ` is in the closure of the store plus `φ` but not of the store alone.
    pub fn nonmon_yields(
        &self,
        kb: &KnowledgeBase,
        path: &ContextPath,
        phi: &Formula,
        psi: &Formula,
    ) -> Result<bool, EngineError> {
        for f in [phi, psi] {
            if !f.is_ground() {
                return Err(EngineError::NotGround(f.to_string()));
            }
        }
        if kb.check_path(path).is_err() {
            return Ok(false);
        }
        let key = (path.clone(), Formula::yields(phi.clone(), psi.clone()));
        if self.in_progress.borrow().contains(&key) {
            return Ok(false);
        }
        self.in_progress.borrow_mut().push(key);
        let verdict = self.yields_uncached(kb, path, phi, psi);
        self.in_progress.borrow_mut().pop();
        verdict
    }

    fn yields_uncached(
        &self,
        kb: &KnowledgeBase,
        path: &ContextPath,
        phi: &Formula,
        psi: &Formula,
    ) -> Result<bool, EngineError> {
        let (base, _) = self.closure(kb, path)?;
        if base.entails(path, psi) {
            return Ok(false);
        }
        let mut extended = kb.clone();
        for c in phi.conjuncts() {
            extended.insert_fact(path, c)?;
        }
        let (extended, _) = self.closure(&extended, path)?;
        Ok(extended.entails(path, psi))
    }

    /// Entailment at `path`, evaluating `yields` atoms lazily. A positive lazy
    /// verdict is cached as a fact and traced.
    pub fn holds(
        &self,
        kb: &mut KnowledgeBase,
        path: &ContextPath,
        f: &Formula,
        trace: &mut InferenceTrace,
    ) -> Result<bool, EngineError> {
        Run::new(self, kb, path, trace).holds(f)
    }

    /// Ground instances of `rule` whose consequent and non-abducible clauses
    /// hold, with the abducible clause's missing conjuncts as hypotheses.
    pub fn abduce(
        &self,
        kb: &KnowledgeBase,
        rule: &DefaultRule,
        path: &ContextPath,
        observed: &[Formula],
    ) -> Result<Vec<Abduced>, EngineError> {
        if rule.abducible.is_empty() {
            return Err(EngineError::NotAbducible(rule.name.clone()));
        }
        let mut scratch = kb.clone();
        for f in observed {
            scratch.insert_fact(path, f.clone())?;
        }
        let mut trace = InferenceTrace::new();
        let mut run = Run::new(self, &mut scratch, path, &mut trace);
        let mut out = BTreeSet::new();
        for &i in &rule.abducible {
            let mut patterns = rule.consequent.conjuncts();
            let mut others: Vec<Formula> = rule
                .antecedent
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, a)| a.conjuncts())
                .collect();
            others.sort_by_key(contains_yields);
            patterns.extend(others);
            let mut subs = Vec::new();
            run.instances(&patterns, Substitution::new(), &mut subs)?;
            let subs: BTreeSet<Substitution> = subs.into_iter().collect();
            for s in subs {
                let clause = substitute(&rule.antecedent[i], &s);
                if !clause.is_ground() || rule.unless.iter().any(|u| run.entails(&substitute(u, &s))) {
                    continue;
                }
                let hypotheses: Vec<Formula> = clause.conjuncts().into_iter().filter(|h| !run.entails(h)).collect();
                if hypotheses.is_empty() || !run.consistent(&hypotheses.iter().collect::<Vec<_>>()) {
                    continue;
                }
                out.insert(Abduced { rule: rule.name.clone(), clause: i, bindings: s, hypotheses });
            }
        }
        Ok(out.into_iter().collect())
    }
}

/// Compares two ground rule instances by their antecedents under the hard
/// constraints at `path`.
pub fn specificity(r1: &DefaultRule, r2: &DefaultRule, kb: &KnowledgeBase, path: &ContextPath) -> Specificity {
    let theory = Theory::new(background(kb, path).iter());
    compare(&theory, &r1.antecedent, &r2.antecedent)
}

fn background(kb: &KnowledgeBase, path: &ContextPath) -> Vec<Formula> {
    let store = kb.store(path);
    let mut out: Vec<Formula> = store.hard.iter().cloned().collect();
    out.extend(store.rules.iter().filter(|r| r.hard && r.is_ground()).map(DefaultRule::schema));
    out
}

fn compare(theory: &Theory, a1: &[Formula], a2: &[Formula]) -> Specificity {
    let implies = |from: &[Formula], to: &[Formula]| {
        let mut extra: Vec<Formula> = from.to_vec();
        extra.push(Formula::negate(Formula::And(to.to_vec())));
        !theory.consistent_with(&extra.iter().collect::<Vec<_>>())
    };
    match (implies(a1, a2), implies(a2, a1)) {
        (true, false) => Specificity::FirstMoreSpecific,
        (false, true) => Specificity::SecondMoreSpecific,
        _ => Specificity::Incomparable,
    }
}

fn contains_yields(f: &Formula) -> bool {
    f.subformulas().iter().any(|g| matches!(g, Formula::Yields(..)))
}

/// For `(B ag1 (B ag2 … (yields F G)))` returns the evaluation path and `(F, G)`.
fn lazy_target(path: &ContextPath, f: &Formula) -> Option<(ContextPath, Formula, Formula)> {
    match f {
        Formula::Yields(a, b) => Some((path.clone(), (**a).clone(), (**b).clone())),
        Formula::Att { kind: Attitude::Believes, agent, body } => lazy_target(&path.child(agent), body),
        _ => None,
    }
}

fn yields_pattern(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::Yields(_, g) => Some(g),
        Formula::Att { kind: Attitude::Believes, body, .. } => yields_pattern(body),
        _ => None,
    }
}

struct Candidate {
    rule: DefaultRule,
    bindings: Substitution,
    key: (String, String),
}

struct Run<'a> {
    engine: &'a Engine,
    kb: &'a mut KnowledgeBase,
    path: ContextPath,
    rules: Vec<DefaultRule>,
    trace: &'a mut InferenceTrace,
    theory: Option<Theory>,
    entailed: HashMap<Formula, bool>,
    universe: Option<Vec<Formula>>,
    nested_yields: HashMap<Formula, bool>,
    local_yields: HashMap<Formula, bool>,
    background: Option<Theory>,
    steps: usize,
}

impl<'a> Run<'a> {
    fn new(engine: &'a Engine, kb: &'a mut KnowledgeBase, path: &ContextPath, trace: &'a mut InferenceTrace) -> Self {
        let mut rules: Vec<DefaultRule> = engine.rules.clone();
        for r in &kb.store(path).rules {
            if !rules.contains(r) {
                rules.push(r.clone());
            }
        }
        rules.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.to_string().cmp(&b.to_string())));
        Run {
            engine,
            kb,
            path: path.clone(),
            rules,
            trace,
            theory: None,
            entailed: HashMap::new(),
            universe: None,
            nested_yields: HashMap::new(),
            local_yields: HashMap::new(),
            background: None,
            steps: 0,
        }
    }

    fn changed(&mut self) {
        self.theory = None;
        self.entailed.clear();
        self.universe = None;
        self.local_yields.clear();
    }

    fn theory(&mut self) -> &Theory {
        if self.theory.is_none() {
            self.theory = Some(self.kb.store(&self.path).theory());
        }
        self.theory.as_ref().unwrap()
    }

    fn entails(&mut self, f: &Formula) -> bool {
        if let Some(&v) = self.entailed.get(f) {
            return v;
        }
        let v = self.theory().entails(f);
        self.entailed.insert(f.clone(), v);
        v
    }

    fn consistent(&mut self, extra: &[&Formula]) -> bool {
        self.theory().consistent_with(extra)
    }

    fn universe(&mut self) -> Vec<Formula> {
        if self.universe.is_none() {
            let mut set = BTreeSet::new();
            for f in self.kb.store(&self.path).premises() {
                for g in f.subformulas() {
                    if g.is_ground() {
                        set.insert(g.clone());
                    }
                }
            }
            self.universe = Some(set.into_iter().collect());
        }
        self.universe.clone().unwrap()
    }

    fn record(&mut self, step: InferenceStep) -> Result<(), EngineError> {
        self.trace.push(step);
        self.steps += 1;
        if self.steps > self.engine.max_steps {
            return Err(EngineError::StepBound { path: self.path.clone(), bound: self.engine.max_steps });
        }
        Ok(())
    }

    fn holds(&mut self, f: &Formula) -> Result<bool, EngineError> {
        if let Formula::And(parts) = f {
            for p in parts {
                if !self.holds(p)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        if self.entails(f) {
            return Ok(true);
        }
        let Some((eval_path, phi, psi)) = lazy_target(&self.path, f) else {
            return Ok(false);
        };
        if !f.is_ground() {
            return Ok(false);
        }
        let local = eval_path == self.path;
        let cached = if local { self.local_yields.get(f) } else { self.nested_yields.get(f) };
        let verdict = match cached {
            Some(&v) => v,
            None => {
                let v = self.engine.nonmon_yields(self.kb, &eval_path, &phi, &psi)?;
                if local {
                    self.local_yields.insert(f.clone(), v);
                } else {
                    self.nested_yields.insert(f.clone(), v);
                }
                v
            }
        };
        if verdict {
            self.kb.insert_fact(&self.path, f.clone())?;
            self.changed();
            self.record(InferenceStep {
                rule: YIELDS_STEP.to_string(),
                mode: Mode::Hard,
                bindings: Substitution::new(),
                added: vec![f.clone()],
                path: self.path.clone(),
                assumed_absent: Vec::new(),
            })?;
        }
        Ok(verdict)
    }

    /// Extends `s` over `conjuncts` in order; every complete extension is pushed.
    fn instances(&mut self, conjuncts: &[Formula], s: Substitution, out: &mut Vec<Substitution>) -> Result<(), EngineError> {
        let Some((first, rest)) = conjuncts.split_first() else {
            out.push(s);
            return Ok(());
        };
        let c = substitute(first, &s);
        if let Formula::And(parts) = &c {
            let mut expanded = parts.clone();
            expanded.extend(rest.iter().cloned());
            return self.instances(&expanded, s, out);
        }
        if c.is_ground() {
            if self.holds(&c)? {
                self.instances(rest, s, out)?;
            }
            return Ok(());
        }
        let bindings = if contains_yields(&c) { self.lazy_bindings(&c, &s)? } else { self.matches(&c, &s) };
        for b in bindings {
            self.instances(rest, b, out)?;
        }
        Ok(())
    }

    fn matches(&mut self, c: &Formula, s: &Substitution) -> Vec<Substitution> {
        let mut out = Vec::new();
        for g in self.universe() {
            let mut s2 = s.clone();
            if match_pattern(c, &g, &mut s2) && self.entails(&g) {
                out.push(s2);
            }
        }
        out
    }

    /// Bindings for a non-ground `yields` pattern: existing facts, plus the
    /// right-hand sides suggested by belief facts at this path.
    fn lazy_bindings(&mut self, c: &Formula, s: &Substitution) -> Result<Vec<Substitution>, EngineError> {
        let mut out = self.matches(c, s);
        let Some(g) = yields_pattern(c) else {
            return Ok(out);
        };
        let beliefs: Vec<Formula> = self
            .kb
            .store(&self.path)
            .facts
            .iter()
            .filter_map(|f| match f {
                Formula::Att { kind: Attitude::Believes, body, .. } => Some((**body).clone()),
                _ => None,
            })
            .collect();
        let mut tried = BTreeSet::new();
        for x in beliefs {
            for target in [x.clone(), Formula::eventually(x)] {
                let mut s2 = s.clone();
                if !match_pattern(g, &target, &mut s2) {
                    continue;
                }
                let ground = substitute(c, &s2);
                if !ground.is_ground() || !tried.insert(ground.clone()) {
                    continue;
                }
                if self.holds(&ground)? && !out.contains(&s2) {
                    out.push(s2);
                }
            }
        }
        Ok(out)
    }

    fn patterns(rule: &DefaultRule) -> Vec<Formula> {
        let mut pats: Vec<Formula> = rule.antecedent.iter().flat_map(Formula::conjuncts).collect();
        pats.sort_by_key(contains_yields);
        pats
    }

    fn applicable(&mut self) -> Result<(Vec<Candidate>, Vec<Candidate>), EngineError> {
        let mut hard = Vec::new();
        let mut defaults = Vec::new();
        let rules = self.rules.clone();
        for rule in &rules {
            let mut subs = Vec::new();
            self.instances(&Self::patterns(rule), Substitution::new(), &mut subs)?;
            let subs: BTreeSet<Substitution> = subs.into_iter().collect();
            for s in subs {
                let inst = rule.instantiate(&s);
                if !inst.consequent.is_ground() || inst.unless.iter().any(|u| self.entails(u)) {
                    continue;
                }
                if self.entails(&inst.consequent) {
                    continue;
                }
                let key = (rule.name.clone(), inst.schema().to_string());
                let cand = Candidate { rule: inst, bindings: s, key };
                if rule.hard {
                    hard.push(cand);
                } else if self.consistent(&[&cand.rule.consequent]) {
                    defaults.push(cand);
                }
            }
        }
        hard.sort_by(|a, b| a.key.cmp(&b.key));
        defaults.sort_by(|a, b| a.key.cmp(&b.key));
        defaults.dedup_by(|a, b| a.key == b.key);
        Ok((hard, defaults))
    }

    fn fire(&mut self, cand: &Candidate, mode: Mode) -> Result<(), EngineError> {
        let mut added = Vec::new();
        for c in cand.rule.consequent.conjuncts() {
            if self.kb.insert_fact(&self.path, c.clone())? {
                added.push(c);
            }
        }
        self.changed();
        self.record(InferenceStep {
            rule: cand.rule.name.clone(),
            mode,
            bindings: cand.bindings.clone(),
            added,
            path: self.path.clone(),
            assumed_absent: cand.rule.unless.clone(),
        })
    }

    fn more_specific(&mut self, a: &DefaultRule, b: &DefaultRule) -> bool {
        if self.background.is_none() {
            let mut bg = background(self.kb, &self.path);
            bg.extend(self.rules.iter().filter(|r| r.hard && r.is_ground()).map(DefaultRule::schema));
            self.background = Some(Theory::new(bg.iter()));
        }
        compare(self.background.as_ref().unwrap(), &a.antecedent, &b.antecedent) == Specificity::FirstMoreSpecific
    }

    fn fixpoint(mut self) -> Result<(), EngineError> {
        loop {
            let (hard, defaults) = self.applicable()?;
            if !hard.is_empty() {
                for h in &hard {
                    if !self.entails(&h.rule.consequent) {
                        self.fire(h, Mode::Hard)?;
                    }
                }
                continue;
            }
            let n = defaults.len();
            let mut conflicts: Vec<Vec<usize>> = vec![Vec::new(); n];
            for i in 0..n {
                for j in i + 1..n {
                    let (ci, cj) = (&defaults[i].rule.consequent, &defaults[j].rule.consequent);
                    if !self.theory().consistent_with(&[ci, cj]) {
                        conflicts[i].push(j);
                        conflicts[j].push(i);
                    }
                }
            }
            let mut chosen = None;
            for i in 0..n {
                let wins = conflicts[i].clone().into_iter().all(|j| {
                    let (a, b) = (defaults[i].rule.clone(), defaults[j].rule.clone());
                    self.more_specific(&a, &b)
                });
                if wins {
                    chosen = Some(i);
                    break;
                }
            }
            let Some(i) = chosen else {
                return Ok(());
            };
            let mode = if conflicts[i].is_empty() { Mode::Dmp } else { Mode::Penguin };
            self.fire(&defaults[i], mode)?;
        }
    }
}
