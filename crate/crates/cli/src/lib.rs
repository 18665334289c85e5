//! Experiment harness on top of `dyadlab-core`: characteristic tables, the
//! single-Haar-function identity for t-Haar multipliers, norm/bound sweeps
//! and the lemma suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod characteristics;
pub mod config;
pub mod error;
pub mod lemmas;
pub mod necessary;
pub mod output;
pub mod sweep;

pub use config::{ExperimentConfig, Format, SymbolSpec};
pub use error::{LabError, LabResult};
pub use lemmas::{cmd_verify_lemmas, LemmaReport};
pub use necessary::{cmd_necessary, necessary_reports, I0Choice, NecessaryReport};
pub use sweep::{cmd_norm, cmd_sweep_multiplier, cmd_sweep_paraproduct};
pub use sweep::{BoundRow, SweepReport};
