//! Weighted causal discovery over ancestral structures.
//!
//! [`ground_rules`] turns the ancestral axioms, the d-separation rules, the
//! JCI background rules and hard facts into clauses over ancestral and
//! d-separation atoms. [`minimize_loss`] finds a structure minimizing the total
//! weight of violated input statements and [`score_predictions`] scores
//! ancestral features by the loss difference of two constrained optima.

mod ground;
mod maxsat;
mod refine;
mod sat;
mod solve;
mod special;

pub use ground::{
    ground_rules, parse_background, Atom, BackgroundFact, DAtom, GroundedProblem, HardClause,
    ProblemSpec, ProblemVariable, RuleTag, DEFAULT_MAX_VARIABLES,
};
pub use maxsat::{MaxSat, MaxSatOutcome, SoftLit};
pub use refine::refine_to_admg;
pub use sat::{Lit, SatResult, Solver};
pub use solve::{
    check_solution, minimize_loss, ordered_pairs, score_predictions, AcidSolver,
    AncestralStructure, Feature, ScoredPrediction, Solution, SolveOptions,
};
pub use special::{icp_intersection, lcd_scan, IcpResult};
