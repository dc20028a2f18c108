//! LQR-stabilized Clohessy-Wiltshire-Hill rendezvous.
//!
//! State `[x₁, x₂, ẋ₁, ẋ₂]` (m, m/s), input `[F_x, F_y]` (N). The continuous
//! model is discretized with a zero-order hold and closed with a discrete LQR
//! gain, giving `x⁺ = Â x + w` with `Â = Ad - Bd K`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::{dlqr, zoh_discretize};
use crate::distributions::ProductDistribution;
use crate::error::{check_dim, Error, Result};
use crate::interval::IntervalVector;
use crate::system::{linear_decomposition, LinearDynamics, Matrix, StochasticSystem};

/// Standard deviations on either side of the mean that make up the
/// validation domain.
pub const DOMAIN_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CwhConfig {
    /// Gravitational parameter (m³/s²).
    pub mu: f64,
    /// Chief orbital radius (m).
    pub orbit_radius: f64,
    /// Deputy mass (kg).
    pub mass: f64,
    /// Sampling time (s).
    pub sample_time: f64,
    pub q_diag: [f64; 4],
    pub r_diag: [f64; 2],
    pub x0_mean: [f64; 4],
    pub x0_cov_diag: [f64; 4],
    pub w_mean: [f64; 4],
    pub w_cov_diag: [f64; 4],
}

impl Default for CwhConfig {
    fn default() -> Self {
        Self {
            mu: 3.986004418e14,
            orbit_radius: 7_228_140.0,
            mass: 300.0,
            sample_time: 20.0,
            q_diag: [1.0, 1.0, 10.0, 10.0],
            r_diag: [10.0, 10.0],
            x0_mean: [10.0, -5.0, 0.0, 0.0],
            x0_cov_diag: [0.5, 0.5, 0.01, 0.01],
            w_mean: [0.0; 4],
            w_cov_diag: [0.1, 0.1, 0.01, 0.01],
        }
    }
}

impl CwhConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu", self.mu),
            ("orbit_radius", self.orbit_radius),
            ("mass", self.mass),
            ("sample_time", self.sample_time),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.q_diag.iter().chain(&self.r_diag).any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter(
                "LQR weights must be positive".into(),
            ));
        }
        if self
            .x0_cov_diag
            .iter()
            .chain(&self.w_cov_diag)
            .any(|v| !(*v >= 0.0))
        {
            return Err(Error::InvalidParameter(
                "covariance diagonals must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Orbital rate `sqrt(μ / R₀³)` (rad/s).
    pub fn mean_motion(&self) -> f64 {
        (self.mu / self.orbit_radius.powi(3)).sqrt()
    }

    pub fn initial_distribution(&self) -> Result<ProductDistribution> {
        ProductDistribution::gaussian_diag(&self.x0_mean, &self.x0_cov_diag)
    }

    pub fn disturbance_distribution(&self) -> Result<ProductDistribution> {
        ProductDistribution::gaussian_diag(&self.w_mean, &self.w_cov_diag)
    }
}

/// Continuous-time `(A, B)`.
pub fn cwh_continuous_matrices(c: &CwhConfig) -> (DMatrix<f64>, DMatrix<f64>) {
    let w = c.mean_motion();
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        0.0,         0.0, 1.0,      0.0,
        0.0,         0.0, 0.0,      1.0,
        3.0 * w * w, 0.0, 0.0,      2.0 * w,
        0.0,         0.0, -2.0 * w, 0.0,
    ]);
    let inv_m = 1.0 / c.mass;
    #[rustfmt::skip]
    let b = DMatrix::from_row_slice(4, 2, &[
        0.0,   0.0,
        0.0,   0.0,
        inv_m, 0.0,
        0.0,   inv_m,
    ]);
    (a, b)
}

#[derive(Debug, Clone)]
pub struct CwhClosedLoop {
    pub ad: DMatrix<f64>,
    pub bd: DMatrix<f64>,
    pub gain: DMatrix<f64>,
    /// `Ad - Bd K`.
    pub a_hat: DMatrix<f64>,
}

pub fn cwh_closed_loop(c: &CwhConfig) -> Result<CwhClosedLoop> {
    c.validate()?;
    let (a, b) = cwh_continuous_matrices(c);
    let (ad, bd) = zoh_discretize(&a, &b, c.sample_time)?;
    let q = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&c.q_diag));
    let r = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&c.r_diag));
    let gain = dlqr(&ad, &bd, &q, &r)?.gain;
    let a_hat = &ad - &bd * &gain;
    Ok(CwhClosedLoop {
        ad,
        bd,
        gain,
        a_hat,
    })
}

pub(crate) fn sigma_box(mean: &[f64], var: &[f64], sigmas: f64) -> Result<IntervalVector> {
    check_dim(mean.len(), var.len())?;
    IntervalVector::new(
        mean.iter()
            .zip(var)
            .map(|(m, v)| m - sigmas * v.sqrt())
            .collect(),
        mean.iter()
            .zip(var)
            .map(|(m, v)| m + sigmas * v.sqrt())
            .collect(),
    )
}

/// Closed-loop CWH with `G = I₄` and the exact linear decomposition.
///
/// The validation domain is the `±4σ` box of the initial state and of the
/// disturbance.
pub fn build_cwh_system(c: &CwhConfig) -> Result<StochasticSystem> {
    let cl = cwh_closed_loop(c)?;
    let a_hat = Matrix::from_nalgebra(&cl.a_hat);
    let g = Matrix::from_nalgebra(&DMatrix::identity(4, 4));
    let decomposition = linear_decomposition(&a_hat, &g);
    let dynamics = LinearDynamics::new(a_hat, g)?;
    StochasticSystem::new(
        Arc::new(dynamics),
        Arc::new(decomposition),
        sigma_box(&c.x0_mean, &c.x0_cov_diag, DOMAIN_SIGMAS)?,
        sigma_box(&c.w_mean, &c.w_cov_diag, DOMAIN_SIGMAS)?,
        c.sample_time,
    )
}
