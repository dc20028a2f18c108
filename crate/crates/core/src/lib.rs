//! Interval reachability for stochastic discrete-time systems.
//!
//! A [`StochasticSystem`] couples dynamics `x⁺ = f(x, w)` with a
//! mixed-monotone decomposition. [`run_reachability`] turns confidence boxes
//! of the initial state and disturbance into a tube of boxes with a
//! per-step probability lower bound, and [`monte_carlo`] checks tubes
//! against sampled trajectories.

// `!(a <= b)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod interval;
pub mod monte_carlo;
pub mod reach;
pub mod system;
pub mod systems;
pub mod tight;
pub mod validate;

pub use distributions::{per_component_confidence, stream_seed, MarginalSpec, ProductDistribution};
pub use error::{Error, Result};
pub use interval::{leq, southeast_leq, IntervalVector};
pub use monte_carlo::{
    check_monotone_concentration, check_stochastic_order, empirical_containment,
    sample_trajectories, ContainmentReport, TrajectoryEnsemble,
};
pub use reach::{delta_update, run_reachability, ReachProblem, ReachStep, ReachTube};
pub use system::{
    linear_decomposition, Decomposition, Dynamics, EmbeddingState, FnDecomposition, FnDynamics,
    LinearDecomposition, LinearDynamics, Matrix, StochasticSystem,
};
pub use tight::{tight_decomposition_numeric, SearchConfig, TightDecomposition};
pub use validate::{validate_decomposition, ValidationConfig, ValidationReport};
