//! Joint causal inference from pooled observational and experimental data.
//!
//! Datasets from different regimes are stacked into one table together with a
//! regime variable and intervention variables that are deterministic
//! functions of it. Independence tests on the pooled table are converted into
//! d-separation and d-connection statements that stay sound despite the
//! deterministic dummy variables, and an exact weighted solver over ancestral
//! structures turns them into scored causal predictions.
//!
//! Modules:
//! - [`graph`]: DAGs, d-/D-separation, deterministic closure, latent projection.
//! - [`model`]: experimental design matrices, random linear-Gaussian JCI models
//!   with soft interventions, pooled sampling.
//! - [`indep`]: partial-correlation tests, weighting, determinism-aware
//!   conversion into d-statements.
//! - [`acid`]: rule grounding, exact loss minimization, prediction scoring,
//!   LCD/ICP special cases and ADMG refinement.
//! - [`eval`]: the synthetic benchmark comparing pooled discovery against a
//!   per-regime merged baseline.

pub mod acid;
pub mod error;
pub mod eval;
pub mod graph;
pub mod indep;
pub mod model;
pub mod statement;
pub mod varset;

pub use error::{Error, Result};
pub use varset::{VarId, VarSet};
