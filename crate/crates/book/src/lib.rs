//! The guide in `book/`, compiled so its snippets run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/formulas.md")]
pub mod formulas {}

#[doc = include_str!("../../../book/src/contexts.md")]
pub mod contexts {}

#[doc = include_str!("../../../book/src/engine.md")]
pub mod engine {}

#[doc = include_str!("../../../book/src/discourse.md")]
pub mod discourse {}

#[doc = include_str!("../../../book/src/axioms.md")]
pub mod axioms {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}
