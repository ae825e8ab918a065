pub mod axioms;
pub mod discourse;
pub mod engine;
pub mod harness;
pub mod kb;
pub mod logic;
