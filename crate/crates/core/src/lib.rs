//! Exact arithmetic for the dyadic Bellman function of the level-set problem
//! for sparse (Carleson) sequences.
//!
//! The crate covers dyadic intervals and Carleson sequences, constructions
//! with a prescribed average, the closed-form candidate Bellman function,
//! exhaustive supersolution checks and an exact finite-depth dynamic program.

pub mod admissible;
pub mod candidate;
pub mod extremal;
pub mod grid;
pub mod random;
pub mod rational;
pub mod sequence;
pub mod supersolution;

pub use admissible::{binary_expansion, construct_admissible, construct_fractional, AdmissibleError, ConstructionStyle};
pub use candidate::{
    candidate_c1, candidate_c2, candidate_c32, candidate_eval, candidate_surface, BellmanFunction, BellmanPoint,
    Candidate, CandidateParams, DomainError, SpecialCase, SurfaceRow,
};
pub use extremal::{
    convergence_report, dp_max_levelset, dp_table, reconstruct_witness, Choice, ConvergenceRow, DPCell, DPKey, DpError,
    DpLimits, DpTable,
};
pub use grid::{NodeAddress, MAX_LEVEL};
pub use random::{random_carleson, RandomSeqError};
pub use rational::{DyadicRational, GeneralRational, RationalError};
pub use sequence::{CarlesonSeq, SeqError, ValidationReport};
pub use supersolution::{
    check_jump, check_main_inequality, check_midpoint_concavity, check_obstacle, check_supersolution, induction_trace,
    CheckGrid, CheckReport, Counterexample, MainInequalityReport, SupersolutionReport, TraceReport, Violation,
    ViolationKind,
};
