//! Formulas, their surface syntax, and substitution.

mod formula;
pub mod sexpr;
mod subst;
mod syntax;

use thiserror::Error;

pub use formula::{Action, AgentId, Attitude, Formula, Plan, PlanTerm, Term};
pub use sexpr::{Pos, Sexp, SyntaxError};
pub use subst::{free_variables, instance_of, match_pattern, substitute, Substitution};
pub use syntax::{formula_from_sexp, is_keyword, parse_formula, parse_plan, plan_from_sexp, print_formula};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("instance_of expects a generic, got {0}")]
    NotGeneric(String),
}
