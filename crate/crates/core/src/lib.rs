//! Grammar-based analysis and variation of monophonic quarter-tone tunes.
//!
//! The pipeline: parse a datasheet into a [`corpus::Tune`], tokenize it
//! under a [`representation::SetupConfig`], induce a repetition grammar
//! with [`grammar::induce`], mutate it with [`mutation::mutate`], and
//! reconstruct a playable variant with tonal repair.

pub mod corpus;
pub mod grammar;
pub mod metrics;
pub mod midi;
pub mod mutation;
pub mod representation;

pub use corpus::{load_corpus, parse_datasheet, Tune};
pub use grammar::{induce, Grammar};
pub use metrics::{edit_distance, run_experiment};
pub use mutation::{mutate, pipeline::generate_variation, MutationKind};
pub use representation::SetupConfig;
