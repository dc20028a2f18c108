//! Interval reach tubes with a per-step probability lower bound.
//!
//! Starting from a box holding `1 - δ₀` of the initial-state mass and a
//! disturbance box holding `1 - δ_w`, each step maps the state box through
//! the decomposition and updates
//!
//! ```text
//! δ_{k+1} = 1 - max(1 - 2 δ_k, 0) (1 - δ_w)
//! ```
//!
//! so that `P(x_k ∈ X_k) >= 1 - δ_k` at every step.

use serde::{Deserialize, Serialize};

use crate::distributions::{stream_seed, ProductDistribution};
use crate::error::{check_dim, Error, Result};
use crate::interval::IntervalVector;
use crate::system::StochasticSystem;

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability {
            name,
            range: "[0, 1]",
            value,
        })
    }
}

/// One-step update of the probability budget.
///
/// Once `δ_k >= 1/2` the bound has collapsed and the result is 1.
pub fn delta_update(delta_k: f64, delta_w: f64) -> Result<f64> {
    check_unit("delta_k", delta_k)?;
    check_unit("delta_w", delta_w)?;
    let retained = (1.0 - 2.0 * delta_k).max(0.0);
    Ok((1.0 - retained * (1.0 - delta_w)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachStep {
    pub k: usize,
    /// `k · T_s` in seconds.
    pub time: f64,
    #[serde(rename = "box")]
    pub bounds: IntervalVector,
    pub delta: f64,
    /// The single sampled trajectory that accompanies the tube.
    pub nominal: Vec<f64>,
}

impl ReachStep {
    pub fn probability_lower_bound(&self) -> f64 {
        1.0 - self.delta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachTube {
    pub steps: Vec<ReachStep>,
}

impl ReachTube {
    pub fn deltas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.delta).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

/// Inputs of a reachability run.
#[derive(Debug, Clone)]
pub struct ReachProblem<'a> {
    pub system: &'a StochasticSystem,
    pub initial: &'a ProductDistribution,
    pub disturbance: &'a ProductDistribution,
    pub delta0: f64,
    pub delta_w: f64,
    pub horizon: usize,
    pub seed: u64,
}

/// Computes the reach tube for steps `0..=horizon`.
///
/// The nominal path is trajectory 0 of the Monte Carlo stream layout, so
/// `sample_trajectories` with the same seed reproduces it.
pub fn run_reachability(p: &ReachProblem<'_>) -> Result<ReachTube> {
    let s = p.system;
    check_dim(s.state_dim(), p.initial.dim())?;
    check_dim(s.disturbance_dim(), p.disturbance.dim())?;
    if p.horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }

    let x0_box = p.initial.joint_confidence_box(p.delta0)?;
    let w_box = p.disturbance.joint_confidence_box(p.delta_w)?;
    let nominal0 = p.initial.sample(stream_seed(p.seed, 0, 0));

    let mut steps = Vec::with_capacity(p.horizon + 1);
    steps.push(ReachStep {
        k: 0,
        time: 0.0,
        bounds: x0_box,
        delta: p.delta0,
        nominal: nominal0,
    });

    for k in 0..p.horizon {
        let prev = &steps[k];
        let w = p.disturbance.sample(stream_seed(p.seed, 0, k as u64 + 1));
        let nominal = s.step(&prev.nominal, &w).map_err(|e| e.at_step(k + 1))?;
        let delta = delta_update(prev.delta, p.delta_w)?;
        let bounds = s
            .propagate_interval(&prev.bounds, &w_box)
            .map_err(|e| e.at_step(k + 1))?;
        steps.push(ReachStep {
            k: k + 1,
            time: (k + 1) as f64 * s.sample_time,
            bounds,
            delta,
            nominal,
        });
    }
    Ok(ReachTube { steps })
}
