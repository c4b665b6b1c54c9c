//! Probabilistic realization of the complement-superposition gates
//! `Ψ → aΨ + bΨ̄`, `Ψ̄ → b*Ψ − a*Ψ̄` on a known pair of qubit states.
//!
//! The pipeline runs: build Gram matrices of inputs and gate targets
//! ([`gram`]), test residual positivity and evaluate average-efficiency
//! bounds ([`feasibility`]), maximize efficiencies ([`optimize`]), construct
//! the unitary on system ⊗ probe ([`synthesis`]) and run it with probe
//! post-selection ([`simulate`]).

pub mod cli;
pub mod error;
pub mod feasibility;
pub mod gram;
pub mod linalg;
pub mod optimize;
pub mod simulate;
pub mod state;
pub mod synthesis;

pub use error::{Error, Result};
pub use feasibility::{
    bound_minus, bound_plus, branch_bound, check_feasible, is_polar_great_circle, residual, Bound, EfficiencyPair,
    FeasibilityReport,
};
pub use gram::{build_grams, Branch, GateSpec, GramSet};
pub use linalg::{CMatrix, CVector};
pub use optimize::{grid_oracle, maximize_branch, maximize_branch_with, OptimizationResult, OptimizerOptions};
pub use simulate::{exact_run, monte_carlo, ExactRun, SimulationReport};
pub use state::{make_state_set, QubitState, StateSet};
pub use synthesis::{build_branch, joint_audit, synthesize, AuditReport, BranchSynthesis, SynthesisResult};
