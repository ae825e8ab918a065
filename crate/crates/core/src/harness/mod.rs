//! Scenario files, the interpretation pipeline and its reports.
//!
//! For each utterance after the first the pipeline builds an update site
//! at the most recent open node, closes every context with the attitude
//! rules (abducing on the Practical Syllogism), evaluates intentional
//! support in both directions, applies the cooperation constraint, runs
//! the discourse rules with any licensed Result or Evidence instance, and
//! attaches what holds. A violated constraint is contraposed instead.

mod pipeline;
mod report;
mod scenario;

pub use pipeline::{run_scenario, run_scenario_with, Entry, ExpectationResult, RunError, RunOptions, RunReport, UtteranceReport};
pub use report::{explain, report_text};
pub use scenario::{
    load_scenario, parse_scenario, ContextSpec, Event, Expectation, Expected, Options, Scenario, ScenarioError,
};
