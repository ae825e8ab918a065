//! Knowledge bases indexed by context path.
//!
//! The store at `[]` is the interpreter's own KB, `[A]` is the interpreter's
//! model of A's KB, `[A, I]` is A's model of the interpreter, and so on.

pub mod sat;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::engine::DefaultRule;
use crate::logic::{AgentId, Formula};

pub use sat::Theory;

pub const DEFAULT_MAX_DEPTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("context path {path} exceeds the maximum nesting depth {max}")]
    DepthExceeded { path: ContextPath, max: usize },
    #[error("formula is not ground: {0}")]
    NotGround(String),
}

/// A nesting of agent models. The empty path is the interpreter's root KB.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextPath(Vec<AgentId>);

impl ContextPath {
    pub fn root() -> Self {
        ContextPath(Vec::new())
    }

    pub fn new(agents: Vec<AgentId>) -> Self {
        ContextPath(agents)
    }

    pub fn of(names: &[&str]) -> Self {
        ContextPath(names.iter().map(|n| AgentId::new(*n)).collect())
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, agent: &AgentId) -> ContextPath {
        let mut v = self.0.clone();
        v.push(agent.clone());
        ContextPath(v)
    }

    pub fn join(&self, other: &ContextPath) -> ContextPath {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        ContextPath(v)
    }

    pub fn strip_prefix(&self, prefix: &ContextPath) -> Option<ContextPath> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|rest| ContextPath(rest.to_vec()))
    }
}

impl fmt::Display for ContextPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// One context: ground facts, ground hard constraints, and rules.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Store {
    pub facts: BTreeSet<Formula>,
    pub hard: BTreeSet<Formula>,
    pub rules: Vec<DefaultRule>,
}

impl Store {
    const EMPTY: Store = Store { facts: BTreeSet::new(), hard: BTreeSet::new(), rules: Vec::new() };

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.hard.is_empty() && self.rules.is_empty()
    }

    /// Facts and hard constraints, the premises of classical entailment.
    pub fn premises(&self) -> impl Iterator<Item = &Formula> {
        self.facts.iter().chain(self.hard.iter())
    }

    pub fn theory(&self) -> Theory {
        Theory::new(self.premises())
    }
}

static EMPTY_STORE: Store = Store::EMPTY;

/// Immutable from the outside: `assert_fact` returns a new value. The
/// `insert_*` methods mutate in place and exist for builders and the engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeBase {
    stores: BTreeMap<ContextPath, Store>,
    constant_pool: BTreeSet<String>,
    max_depth: usize,
    author: Option<AgentId>,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        Self::new()
    }
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::with_max_depth(DEFAULT_MAX_DEPTH)
    }

    /// `max_depth` counts levels including the root, so the default 3 admits
    /// `[]`, `[A]` and `[A, I]`.
    pub fn with_max_depth(max_depth: usize) -> Self {
        assert!(max_depth >= 1, "the root level always exists");
        KnowledgeBase { stores: BTreeMap::new(), constant_pool: BTreeSet::new(), max_depth, author: None }
    }

    /// The agent whose model is unioned with the root in `consistent_with`.
    pub fn with_author(mut self, author: AgentId) -> Self {
        self.author = Some(author);
        self
    }

    pub fn author(&self) -> Option<&AgentId> {
        self.author.as_ref()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn check_path(&self, path: &ContextPath) -> Result<(), KbError> {
        if path.len() >= self.max_depth {
            Err(KbError::DepthExceeded { path: path.clone(), max: self.max_depth })
        } else {
            Ok(())
        }
    }

    pub fn store(&self, path: &ContextPath) -> &Store {
        self.stores.get(path).unwrap_or(&EMPTY_STORE)
    }

    /// Paths with a nonempty store, in order.
    pub fn paths(&self) -> impl Iterator<Item = &ContextPath> {
        self.stores.keys()
    }

    pub fn constant_pool(&self) -> &BTreeSet<String> {
        &self.constant_pool
    }

    pub fn add_constant(&mut self, c: impl Into<String>) {
        self.constant_pool.insert(c.into());
    }

    fn store_mut(&mut self, path: &ContextPath) -> Result<&mut Store, KbError> {
        self.check_path(path)?;
        Ok(self.stores.entry(path.clone()).or_default())
    }

    fn tidy(&mut self, path: &ContextPath) {
        if self.stores.get(path).is_some_and(Store::is_empty) {
            self.stores.remove(path);
        }
    }

    fn require_ground(f: &Formula) -> Result<(), KbError> {
        if f.is_ground() {
            Ok(())
        } else {
            Err(KbError::NotGround(f.to_string()))
        }
    }

    /// A copy of the KB whose store at `path` also contains `f`.
    pub fn assert_fact(&self, path: &ContextPath, f: Formula) -> Result<KnowledgeBase, KbError> {
        let mut kb = self.clone();
        kb.insert_fact(path, f)?;
        Ok(kb)
    }

    /// Returns whether the fact was new.
    pub fn insert_fact(&mut self, path: &ContextPath, f: Formula) -> Result<bool, KbError> {
        Self::require_ground(&f)?;
        let constants = f.domain_constants();
        let added = self.store_mut(path)?.facts.insert(f);
        self.constant_pool.extend(constants);
        Ok(added)
    }

    pub fn retract_fact(&mut self, path: &ContextPath, f: &Formula) -> bool {
        let removed = self.stores.get_mut(path).is_some_and(|s| s.facts.remove(f));
        self.tidy(path);
        removed
    }

    pub fn insert_hard(&mut self, path: &ContextPath, f: Formula) -> Result<bool, KbError> {
        Self::require_ground(&f)?;
        let constants = f.domain_constants();
        let added = self.store_mut(path)?.hard.insert(f);
        self.constant_pool.extend(constants);
        Ok(added)
    }

    pub fn insert_rule(&mut self, path: &ContextPath, rule: DefaultRule) -> Result<(), KbError> {
        let store = self.store_mut(path)?;
        if !store.rules.contains(&rule) {
            store.rules.push(rule);
        }
        Ok(())
    }

    pub fn contains_fact(&self, path: &ContextPath, f: &Formula) -> bool {
        self.store(path).facts.contains(f)
    }

    /// Classical entailment from the facts and hard constraints at `path`.
    pub fn entails(&self, path: &ContextPath, f: &Formula) -> bool {
        self.store(path).theory().entails(f)
    }

    /// The formulas `consistent_with` checks at `path`: the store itself,
    /// plus the author's model when `path` is the root.
    pub fn consistency_premises(&self, path: &ContextPath) -> Vec<&Formula> {
        let mut out: Vec<&Formula> = self.store(path).premises().collect();
        if path.is_root() {
            if let Some(a) = &self.author {
                let author_path = path.child(a);
                if self.check_path(&author_path).is_ok() {
                    out.extend(self.store(&author_path).premises());
                }
            }
        }
        out
    }

    pub fn consistent_with(&self, path: &ContextPath, extra: &[Formula]) -> bool {
        let theory = Theory::new(self.consistency_premises(path));
        theory.consistent_with(&extra.iter().collect::<Vec<_>>())
    }

    /// The KB seen from inside `path`: its root is the store at `path`.
    pub fn nested_view(&self, path: &ContextPath) -> Result<KnowledgeBase, KbError> {
        self.check_path(path)?;
        if path.is_root() {
            return Ok(self.clone());
        }
        let stores = self
            .stores
            .iter()
            .filter_map(|(p, s)| p.strip_prefix(path).map(|rest| (rest, s.clone())))
            .collect();
        Ok(KnowledgeBase {
            stores,
            constant_pool: self.constant_pool.clone(),
            max_depth: self.max_depth - path.len(),
            author: None,
        })
    }
}

/// Candidate formulas for abductive `δ`, in declared order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HypothesisSpace {
    candidates: Vec<Formula>,
}

impl HypothesisSpace {
    pub fn new(candidates: Vec<Formula>) -> Result<Self, KbError> {
        for c in &candidates {
            KnowledgeBase::require_ground(c)?;
        }
        Ok(HypothesisSpace { candidates })
    }

    pub fn candidates(&self) -> &[Formula] {
        &self.candidates
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}
