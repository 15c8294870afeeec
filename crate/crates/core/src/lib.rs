//! Derivative-free global minimization toolkit.
//!
//! The crate provides two families of zeroth-order methods:
//!
//! * **Grid-shrinking box search** ([`solvers`]): `bbs_1d`, `multi_bbs` and
//!   `direction_bbs` minimize a black-box function over an axis-aligned box
//!   by repeatedly sampling a grid and shrinking the box around the best
//!   point. For functions sandwiched between two parabolas centered at the
//!   global minimizer (the "good" class) the longest box edge provably
//!   contracts by a constant factor per iteration, so the minimizer is
//!   located to accuracy `eps` in `O(log(1/eps))` iterations.
//! * **Zeroth-order gradient descent** ([`zogd`]): minimizes a quadratic
//!   observed through a noisy value oracle whose error is proportional to
//!   the distance to the solution, using a two-evaluation one-point-feedback
//!   gradient estimator along random sphere directions.
//!
//! All function evaluations go through a seeded, call-counting
//! [`oracles::OracleHandle`], so runs are reproducible and oracle
//! complexity is observable. Solvers emit full per-iteration traces that
//! serialize to CSV and JSON.

pub mod geometry;
pub mod oracles;
pub mod solvers;
pub mod zogd;

pub use geometry::{build_grid, shrink_edge, Bounds, GeometryError, GridSpec};
pub use oracles::{
    verify_good_class, verify_good_class_sampled, verify_very_good_class,
    verify_very_good_class_sampled, ClassReport, ClassViolation, GoodClassParams, NoiseModel,
    ObjectiveSpec, OracleError, OracleHandle, VeryGoodClassParams,
};
pub use solvers::{
    bbs_1d, contraction_holds, direction_bbs, multi_bbs, required_iterations, BbsConfig,
    DirectionBbsConfig, IterationRecord, MultiBbsConfig, RunTrace, SolverError,
};
pub use zogd::{
    grad_estimate, grad_estimate_along, one_step_bound, recommended_schedule, sample_sphere,
    zogd_run, RateParams, StepRecord, StepSchedule, ZogdConfig, ZogdError, ZogdTrace,
};
