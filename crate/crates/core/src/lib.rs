//! Solver core for two-person zero-sum continuous-time Markov pure jump
//! games over a fixed finite horizon. Computes the game value by a
//! uniformized monotone value iteration, cross-checks it with a backward
//! Isaacs ODE integrator, extracts optimal Markov policies, and provides
//! exact policy evaluation, best responses, and jump-process simulation.
//!
//! `no_std` with `alloc`; all IO, file formats, and the CLI live in the
//! companion `jumpgame` crate.

#![no_std]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod matrix_game;
pub mod model;
pub mod solver;

pub use dynamics::{
    best_response, empirical_drift_check, estimate_from_samples, evaluate_payoff, monte_carlo,
    simulate_path, DriftCheckReport, PayoffEstimate, Trajectory,
};
pub use error::{MatrixGameError, ModelError, SolveError};
pub use matrix_game::{check_saddle, solve_matrix_game, Matrix, MatrixGameSolution};
pub use model::{
    auto_certificate, uniformized_kernel, validate_certificate, validate_model, CellDynamics,
    DriftCertificate, GameModel, TimePartition, ValidationReport,
};
pub use solver::{
    apply_g, build_grid, extract_policies, isaacs_backward, policy_saddle_residual, seed_u0,
    stage_matrix, value_iterate, MarkovPolicy, Side, SolveDiagnostics, StageForm,
    ValueIterationError, ValueGrid,
};
