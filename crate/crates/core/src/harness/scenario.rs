//! The `.scn` scenario format.
//!
//! ```text
//! agents A I
//! constants bush hb1711
//! context () {
//!   fact (W A (B I (veto bush hb1711)))
//!   hard (-> (and (bill hb1711) (bad hb1711)) (cause alpha beta))
//!   default Bills (> (bill hb1711) (minor hb1711))
//! }
//! hypotheses (bad hb1711)
//! utterance alpha assertion (supports bush bigbiz)
//! utterance beta assertion (veto bush hb1711)
//! expect (rel Result alpha beta)
//! expect absent (rel Narration alpha beta)
//! expect coherent
//! ```
//!
//! `agents`, `constants`, `hypotheses` and `subordinating` take the rest of
//! their line. Other statements: `author X`, `interpreter X`,
//! `option charity|expectations on|off`, `max-steps N`, `depth N`,
//! `rule <name> hard|default [abducible(i,..)] <formula>` (an axiom
//! override), `plan-anaphor <id>`, `done <plan>`, and
//! `expect [absent] [at <path>] <formula>|coherent|incoherent`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::axioms::{rule_from_sexp, AxiomError, Override};
use crate::discourse::{Constituent, Mood};
use crate::engine::{DefaultRule, DEFAULT_MAX_STEPS};
use crate::kb::{ContextPath, HypothesisSpace, DEFAULT_MAX_DEPTH};
use crate::logic::sexpr::read_all;
use crate::logic::{formula_from_sexp, plan_from_sexp, AgentId, Formula, Plan, Sexp, SyntaxError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: invalid {field}: {message}")]
    Invalid { line: usize, field: &'static str, message: String },
}

impl ScenarioError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::Io { .. } => None,
            ScenarioError::Parse { line, .. } | ScenarioError::Invalid { line, .. } => Some(*line),
        }
    }
}

impl From<SyntaxError> for ScenarioError {
    fn from(e: SyntaxError) -> Self {
        let line = e.line().unwrap_or(0);
        let message = match e {
            SyntaxError::EndOfInput { message, .. } => format!("unexpected end of input: {message}"),
            SyntaxError::At { message, .. } => message,
        };
        ScenarioError::Parse { line, message }
    }
}

fn axiom_error(e: AxiomError, line: usize) -> ScenarioError {
    match e {
        AxiomError::Syntax(s) => s.into(),
        AxiomError::Override { line, message } => ScenarioError::Parse { line, message },
        other => ScenarioError::Invalid { line, field: "rule", message: other.to_string() },
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContextSpec {
    pub facts: Vec<Formula>,
    pub hard: Vec<Formula>,
    pub rules: Vec<DefaultRule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Utterance(Constituent),
    Done(Plan),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expected {
    Holds { path: ContextPath, formula: Formula },
    Coherent,
    Incoherent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub expected: Expected,
    pub must_hold: bool,
    pub line: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    pub charity: bool,
    pub textual_expectations: bool,
    pub max_steps: usize,
    pub max_depth: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { charity: false, textual_expectations: false, max_steps: DEFAULT_MAX_STEPS, max_depth: DEFAULT_MAX_DEPTH }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub agents: Vec<AgentId>,
    pub author: AgentId,
    pub interpreter: AgentId,
    pub constants: BTreeSet<String>,
    pub contexts: BTreeMap<ContextPath, ContextSpec>,
    pub overrides: Vec<Override>,
    pub hypotheses: HypothesisSpace,
    pub events: Vec<Event>,
    pub plan_anaphors: BTreeSet<String>,
    pub subordinating: BTreeSet<String>,
    pub options: Options,
    pub expectations: Vec<Expectation>,
}

impl Scenario {
    pub fn constituents(&self) -> impl Iterator<Item = &Constituent> {
        self.events.iter().filter_map(|e| match e {
            Event::Utterance(c) => Some(c),
            Event::Done(_) => None,
        })
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let name = path.file_stem().map_or_else(|| "scenario".to_string(), |s| s.to_string_lossy().into_owned());
    parse_scenario(&name, &text)
}

pub fn parse_scenario(name: &str, text: &str) -> Result<Scenario, ScenarioError> {
    let items = read_all(text)?;
    let mut p = Parser { items: &items, at: 0, raw: Raw::default() };
    p.statements()?;
    validate(name, p.raw)
}

#[derive(Default)]
struct Raw {
    agents: Vec<(String, usize)>,
    author: Option<(String, usize)>,
    interpreter: Option<(String, usize)>,
    constants: BTreeSet<String>,
    contexts: Vec<(Vec<(String, usize)>, usize, ContextSpec, Vec<(Formula, usize)>)>,
    overrides: Vec<Override>,
    hypotheses: Vec<(Formula, usize)>,
    events: Vec<(Event, usize)>,
    plan_anaphors: Vec<(String, usize)>,
    subordinating: BTreeSet<String>,
    options: Options,
    expectations: Vec<Expectation>,
}

struct Parser<'a> {
    items: &'a [Sexp],
    at: usize,
    raw: Raw,
}

fn parse_err(s: &Sexp, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse { line: s.pos().line, message: message.into() }
}

impl<'a> Parser<'a> {
    fn next(&mut self, after: &Sexp, what: &str) -> Result<&'a Sexp, ScenarioError> {
        let s = self.items.get(self.at).ok_or_else(|| parse_err(after, format!("missing {what}")))?;
        self.at += 1;
        Ok(s)
    }

    fn symbol(&mut self, after: &Sexp, what: &str) -> Result<(&'a str, &'a Sexp), ScenarioError> {
        let s = self.next(after, what)?;
        let text = s.as_sym().ok_or_else(|| parse_err(s, format!("expected {what}")))?;
        Ok((text, s))
    }

    /// Items after `kw` on the same line.
    fn rest_of_line(&mut self, kw: &Sexp) -> &'a [Sexp] {
        let start = self.at;
        while self.at < self.items.len() && self.items[self.at].pos().line == kw.pos().line {
            self.at += 1;
        }
        &self.items[start..self.at]
    }

    fn statements(&mut self) -> Result<(), ScenarioError> {
        while self.at < self.items.len() {
            let kw = &self.items[self.at];
            self.at += 1;
            let word = kw.as_sym().ok_or_else(|| parse_err(kw, "expected a statement keyword"))?;
            let line = kw.pos().line;
            match word {
                "agents" => {
                    for s in self.rest_of_line(kw) {
                        let a = s.as_sym().ok_or_else(|| parse_err(s, "agent names are symbols"))?;
                        self.raw.agents.push((a.to_string(), s.pos().line));
                    }
                }
                "author" | "interpreter" => {
                    let (a, s) = self.symbol(kw, "agent name")?;
                    let slot = if word == "author" { &mut self.raw.author } else { &mut self.raw.interpreter };
                    *slot = Some((a.to_string(), s.pos().line));
                }
                "constants" => {
                    for s in self.rest_of_line(kw) {
                        let c = s.as_sym().ok_or_else(|| parse_err(s, "constants are symbols"))?;
                        self.raw.constants.insert(c.to_string());
                    }
                }
                "subordinating" => {
                    for s in self.rest_of_line(kw) {
                        let r = s.as_sym().ok_or_else(|| parse_err(s, "relation names are symbols"))?;
                        self.raw.subordinating.insert(r.to_string());
                    }
                }
                "hypotheses" => {
                    for s in self.rest_of_line(kw) {
                        self.raw.hypotheses.push((formula_from_sexp(s)?, s.pos().line));
                    }
                }
                "context" => self.context(kw)?,
                "option" => {
                    let (name, s) = self.symbol(kw, "option name")?;
                    let (value, v) = self.symbol(s, "on or off")?;
                    let on = match value {
                        "on" => true,
                        "off" => false,
                        _ => return Err(parse_err(v, "expected on or off")),
                    };
                    match name {
                        "charity" => self.raw.options.charity = on,
                        "expectations" => self.raw.options.textual_expectations = on,
                        _ => return Err(parse_err(s, format!("unknown option {name}"))),
                    }
                }
                "max-steps" | "depth" => {
                    let (n, s) = self.symbol(kw, "a number")?;
                    let n: usize = n.parse().map_err(|_| parse_err(s, "expected a number"))?;
                    if word == "depth" {
                        self.raw.options.max_depth = n;
                    } else {
                        self.raw.options.max_steps = n;
                    }
                }
                "rule" => {
                    let o = crate::axioms::parse_rule_clause_at(self.items, &mut self.at, kw)
                        .map_err(|e| axiom_error(e, line))?;
                    self.raw.overrides.push(o);
                }
                "utterance" => {
                    let (id, _) = self.symbol(kw, "utterance id")?;
                    let (mood, m) = self.symbol(kw, "mood")?;
                    let mood = Mood::parse(mood).ok_or_else(|| parse_err(m, "mood is assertion or imperative"))?;
                    let lf = formula_from_sexp(self.next(kw, "logical form")?)?;
                    self.raw.events.push((Event::Utterance(Constituent::new(id, mood, lf)), line));
                }
                "plan-anaphor" => {
                    let (id, _) = self.symbol(kw, "utterance id")?;
                    self.raw.plan_anaphors.push((id.to_string(), line));
                }
                "done" => {
                    let plan = plan_from_sexp(self.next(kw, "plan")?)?;
                    self.raw.events.push((Event::Done(plan), line));
                }
                "expect" => self.expect(kw)?,
                other => return Err(parse_err(kw, format!("unknown statement {other}"))),
            }
        }
        Ok(())
    }

    fn path(&mut self, after: &Sexp) -> Result<Vec<(String, usize)>, ScenarioError> {
        let s = self.next(after, "context path")?;
        let items = s.as_list().ok_or_else(|| parse_err(s, "a context path is a list such as (A I)"))?;
        items
            .iter()
            .map(|a| {
                a.as_sym().map(|t| (t.to_string(), a.pos().line)).ok_or_else(|| parse_err(a, "path entries are agent names"))
            })
            .collect()
    }

    fn context(&mut self, kw: &Sexp) -> Result<(), ScenarioError> {
        let path = self.path(kw)?;
        let (open, o) = self.symbol(kw, "`{`")?;
        if open != "{" {
            return Err(parse_err(o, "expected `{` after the context path"));
        }
        let mut spec = ContextSpec::default();
        let mut all = Vec::new();
        loop {
            let (word, w) = self.symbol(kw, "`}`")?;
            match word {
                "}" => break,
                "fact" => {
                    let s = self.next(w, "formula")?;
                    let f = formula_from_sexp(s)?;
                    all.push((f.clone(), s.pos().line));
                    spec.facts.push(f);
                }
                "hard" => {
                    let s = self.next(w, "formula")?;
                    let f = formula_from_sexp(s)?;
                    all.push((f.clone(), s.pos().line));
                    if f.is_ground() {
                        spec.hard.push(f);
                    } else {
                        let name = format!("hard-{}", s.pos().line);
                        spec.rules.push(rule_from_sexp(&name, s, true).map_err(|e| axiom_error(e, s.pos().line))?);
                    }
                }
                "default" => {
                    let (name, n) = self.symbol(w, "rule name")?;
                    let s = self.next(n, "rule formula")?;
                    let rule = rule_from_sexp(name, s, false).map_err(|e| axiom_error(e, s.pos().line))?;
                    all.push((rule.schema(), s.pos().line));
                    spec.rules.push(rule);
                }
                other => return Err(parse_err(w, format!("expected fact, hard, default or `}}`, found {other}"))),
            }
        }
        self.raw.contexts.push((path, kw.pos().line, spec, all));
        Ok(())
    }

    fn expect(&mut self, kw: &Sexp) -> Result<(), ScenarioError> {
        let start = self.at;
        let mut must_hold = true;
        let mut path = Vec::new();
        let mut s = self.next(kw, "expectation")?;
        if s.as_sym() == Some("absent") {
            must_hold = false;
            s = self.next(kw, "expectation")?;
        }
        if s.as_sym() == Some("at") {
            path = self.path(kw)?.into_iter().map(|(a, _)| a).collect();
            s = self.next(kw, "expectation")?;
        }
        let expected = match s.as_sym() {
            Some("coherent") => Expected::Coherent,
            Some("incoherent") => Expected::Incoherent,
            _ => {
                let formula = formula_from_sexp(s)?;
                if !formula.is_ground() {
                    return Err(ScenarioError::Invalid {
                        line: s.pos().line,
                        field: "expect",
                        message: format!("{formula} is not ground"),
                    });
                }
                let agents: Vec<AgentId> = path.iter().map(AgentId::new).collect();
                Expected::Holds { path: ContextPath::new(agents), formula }
            }
        };
        let text = describe(&self.items[start..self.at]);
        self.raw.expectations.push(Expectation { expected, must_hold, line: kw.pos().line, text });
        Ok(())
    }
}

fn describe(items: &[Sexp]) -> String {
    fn one(s: &Sexp) -> String {
        match s {
            Sexp::Sym { text, .. } => text.clone(),
            Sexp::List { items, .. } => format!("({})", items.iter().map(one).collect::<Vec<_>>().join(" ")),
        }
    }
    items.iter().map(one).collect::<Vec<_>>().join(" ")
}

fn agents_in(f: &Formula, out: &mut Vec<String>) {
    for g in f.subformulas() {
        if let Formula::Att { agent, .. } = g {
            out.push(agent.as_str().to_string());
        }
    }
}

fn validate(name: &str, raw: Raw) -> Result<Scenario, ScenarioError> {
    let mut agents: Vec<AgentId> = Vec::new();
    for (a, line) in &raw.agents {
        if a.starts_with('?') {
            return Err(ScenarioError::Invalid { line: *line, field: "agents", message: format!("{a} is not a name") });
        }
        if agents.iter().any(|x| x.as_str() == a) {
            return Err(ScenarioError::Invalid { line: *line, field: "agents", message: format!("{a} listed twice") });
        }
        agents.push(AgentId::new(a.as_str()));
    }
    if agents.is_empty() {
        agents = vec![AgentId::new("A"), AgentId::new("I")];
    }
    let known = |a: &str| agents.iter().any(|x| x.as_str() == a);
    let pick = |slot: &Option<(String, usize)>, field: &'static str, fallback: usize| -> Result<AgentId, ScenarioError> {
        match slot {
            Some((a, line)) if !known(a) => {
                Err(ScenarioError::Invalid { line: *line, field, message: format!("unknown agent {a}") })
            }
            Some((a, _)) => Ok(AgentId::new(a.as_str())),
            None => Ok(agents.get(fallback).cloned().unwrap_or_else(|| agents[0].clone())),
        }
    };
    let author = pick(&raw.author, "author", 0)?;
    let interpreter = pick(&raw.interpreter, "interpreter", 1)?;
    if author == interpreter {
        return Err(ScenarioError::Invalid {
            line: raw.interpreter.as_ref().map_or(0, |x| x.1),
            field: "interpreter",
            message: "author and interpreter must differ".into(),
        });
    }

    let check_formula = |f: &Formula, line: usize, field: &'static str| -> Result<(), ScenarioError> {
        let mut found = Vec::new();
        agents_in(f, &mut found);
        match found.into_iter().find(|a| !known(a)) {
            Some(a) => Err(ScenarioError::Invalid { line, field, message: format!("unknown agent {a} in {f}") }),
            None => Ok(()),
        }
    };

    let mut constants = raw.constants;
    let mut contexts: BTreeMap<ContextPath, ContextSpec> = BTreeMap::new();
    for (path, line, spec, all) in raw.contexts {
        for (a, l) in &path {
            if !known(a) {
                return Err(ScenarioError::Invalid { line: *l, field: "context path", message: format!("unknown agent {a}") });
            }
        }
        if path.len() >= raw.options.max_depth {
            return Err(ScenarioError::Invalid {
                line,
                field: "context path",
                message: format!("nesting deeper than {} levels", raw.options.max_depth),
            });
        }
        for (f, l) in &all {
            check_formula(f, *l, "context formula")?;
            constants.extend(f.domain_constants());
        }
        for f in &spec.facts {
            if !f.is_ground() {
                return Err(ScenarioError::Invalid { line, field: "fact", message: format!("{f} is not ground") });
            }
        }
        let key = ContextPath::new(path.iter().map(|(a, _)| AgentId::new(a.as_str())).collect());
        let entry = contexts.entry(key).or_default();
        entry.facts.extend(spec.facts);
        entry.hard.extend(spec.hard);
        entry.rules.extend(spec.rules);
    }

    for o in &raw.overrides {
        check_formula(&o.rule.schema(), o.line, "rule")?;
    }

    let mut seen = BTreeSet::new();
    for (e, line) in &raw.events {
        if let Event::Utterance(c) = e {
            if !seen.insert(c.id.clone()) {
                return Err(ScenarioError::Invalid { line: *line, field: "utterance", message: format!("duplicate id {}", c.id) });
            }
            if !c.logical_form.is_ground() {
                return Err(ScenarioError::Invalid {
                    line: *line,
                    field: "utterance",
                    message: format!("logical form {} is not ground", c.logical_form),
                });
            }
            check_formula(&c.logical_form, *line, "utterance")?;
            constants.extend(c.logical_form.domain_constants());
        }
    }
    let mut plan_anaphors = BTreeSet::new();
    for (id, line) in raw.plan_anaphors {
        if !seen.contains(&id) {
            return Err(ScenarioError::Invalid { line, field: "plan-anaphor", message: format!("no utterance {id}") });
        }
        plan_anaphors.insert(id);
    }

    let mut hyps = Vec::new();
    for (h, line) in raw.hypotheses {
        if !h.is_ground() {
            return Err(ScenarioError::Invalid { line, field: "hypotheses", message: format!("{h} is not ground") });
        }
        check_formula(&h, line, "hypotheses")?;
        constants.extend(h.domain_constants());
        hyps.push(h);
    }

    for e in &raw.expectations {
        if let Expected::Holds { path, formula } = &e.expected {
            for a in path.agents() {
                if !known(a.as_str()) {
                    return Err(ScenarioError::Invalid { line: e.line, field: "expect", message: format!("unknown agent {a}") });
                }
            }
            check_formula(formula, e.line, "expect")?;
        }
    }

    Ok(Scenario {
        name: name.to_string(),
        agents,
        author,
        interpreter,
        constants,
        contexts,
        overrides: raw.overrides,
        hypotheses: HypothesisSpace::new(hyps).expect("candidates checked ground"),
        events: raw.events.into_iter().map(|(e, _)| e).collect(),
        plan_anaphors,
        subordinating: raw.subordinating,
        options: raw.options,
        expectations: raw.expectations,
    })
}
