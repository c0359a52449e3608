//! JCI models: experimental design matrices, random linear-Gaussian SCMs with
//! soft interventions, pooled sampling and population-level oracles.

mod design;
mod oracle;
mod sample;
mod scm;

pub use design::{
    normalize_design, validate_design, ColumnMapping, DesignReport, DeterminedColumn,
    ExperimentalDesignMatrix, IndependentPair,
};
pub use oracle::{det_relations, oracle_independences, pooled_moments, regime_moments, Moments};
pub use sample::{column_ids, sample, Allocation, PooledDataset};
pub use scm::{
    default_latents, random_jci_model, GeneratorConfig, JciScm, Mechanism, MechanismEntry,
    ModelFile,
};
