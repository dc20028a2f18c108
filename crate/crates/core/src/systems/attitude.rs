//! Rigid-body attitude with a saturated PD law, Euler-discretized.
//!
//! State `[q₀, q₁, q₂, q₃, ω₁, ω₂, ω₃]`, disturbance torque `w ∈ R³`.
//! Quaternions are not renormalized between steps.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::cwh::sigma_box;
use crate::distributions::ProductDistribution;
use crate::error::{Error, Result};
use crate::system::{Dynamics, StochasticSystem};
use crate::tight::{tight_decomposition_numeric, SearchConfig};

pub const STATE_DIM: usize = 7;
pub const DISTURBANCE_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttitudeConfig {
    /// Inertia matrix (kg·m²), row major.
    pub inertia: [[f64; 3]; 3],
    pub kp: f64,
    pub kd: f64,
    /// Euler step (s).
    pub sample_time: f64,
    pub x0_mean: [f64; 7],
    pub x0_cov_diag: [f64; 7],
    pub w_mean: [f64; 3],
    pub w_cov_diag: [f64; 3],
    /// Extremum search used by the numeric decomposition.
    pub search: SearchSettings,
}

/// Serializable mirror of [`SearchConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSettings {
    pub interior_samples: usize,
    pub refine_sweeps: usize,
    pub line_search_iters: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        let c = SearchConfig::default();
        Self {
            interior_samples: c.interior_samples,
            refine_sweeps: c.refine_sweeps,
            line_search_iters: c.line_search_iters,
        }
    }
}

impl From<SearchSettings> for SearchConfig {
    fn from(s: SearchSettings) -> Self {
        SearchConfig {
            interior_samples: s.interior_samples,
            refine_sweeps: s.refine_sweeps,
            line_search_iters: s.line_search_iters,
        }
    }
}

impl Default for AttitudeConfig {
    fn default() -> Self {
        Self {
            inertia: [[17.5, -0.8, 0.3], [-0.8, 14.9, 0.4], [0.3, 0.4, 20.8]],
            kp: 0.6,
            kd: 2.25,
            sample_time: 0.01,
            x0_mean: [3f64.sqrt() / 2.0, 0.5, 0.0, 0.0, 0.1, 0.1, 0.1],
            x0_cov_diag: [1e-6, 1e-6, 1e-8, 1e-8, 1e-3, 1e-3, 1e-3],
            w_mean: [0.0; 3],
            w_cov_diag: [5e-3; 3],
            search: SearchSettings::default(),
        }
    }
}

impl AttitudeConfig {
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        let j = &self.inertia;
        Matrix3::new(
            j[0][0], j[0][1], j[0][2], j[1][0], j[1][1], j[1][2], j[2][0], j[2][1], j[2][2],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.inertia_matrix();
        if (j - j.transpose()).abs().max() > 1e-12 * j.abs().max() {
            return Err(Error::InvalidParameter(
                "inertia matrix must be symmetric".into(),
            ));
        }
        if j.cholesky().is_none() {
            return Err(Error::InvalidParameter(
                "inertia matrix must be positive definite".into(),
            ));
        }
        for (name, v) in [
            ("kp", self.kp),
            ("kd", self.kd),
            ("sample_time", self.sample_time),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
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

    pub fn initial_distribution(&self) -> Result<ProductDistribution> {
        ProductDistribution::gaussian_diag(&self.x0_mean, &self.x0_cov_diag)
    }

    pub fn disturbance_distribution(&self) -> Result<ProductDistribution> {
        ProductDistribution::gaussian_diag(&self.w_mean, &self.w_cov_diag)
    }
}

fn split(x: &[f64]) -> ([f64; 4], Vector3<f64>) {
    ([x[0], x[1], x[2], x[3]], Vector3::new(x[4], x[5], x[6]))
}

/// Saturated PD torque `½ tanh(2 u_pd)`.
pub fn pd_saturated_control(x: &[f64], c: &AttitudeConfig) -> [f64; 3] {
    pd_with_inertia(x, &c.inertia_matrix(), c.kp, c.kd)
}

fn pd_with_inertia(x: &[f64], j: &Matrix3<f64>, kp: f64, kd: f64) -> [f64; 3] {
    let ([q0, q1, q2, q3], omega) = split(x);
    let attitude_error = Vector3::new(2.0 * (q2 * q3 + q0 * q1), 2.0 * (q0 * q2 - q1 * q3), 0.0);
    let j_omega = j * omega;
    let u_pd = omega.cross(&j_omega) - kp * (j * attitude_error) - kd * j_omega;
    [
        0.5 * (2.0 * u_pd[0]).tanh(),
        0.5 * (2.0 * u_pd[1]).tanh(),
        0.5 * (2.0 * u_pd[2]).tanh(),
    ]
}

/// Continuous-time derivative `[q̇, ω̇]`.
pub fn attitude_continuous(x: &[f64], u: &[f64], w: &[f64], c: &AttitudeConfig) -> [f64; 7] {
    let j = c.inertia_matrix();
    let j_inv = j.try_inverse().unwrap_or_else(Matrix3::zeros);
    derivative(x, u, w, &j, &j_inv)
}

fn derivative(x: &[f64], u: &[f64], w: &[f64], j: &Matrix3<f64>, j_inv: &Matrix3<f64>) -> [f64; 7] {
    let ([q0, q1, q2, q3], omega) = split(x);
    let (o1, o2, o3) = (omega[0], omega[1], omega[2]);
    let torque = -omega.cross(&(j * omega))
        + Vector3::new(u[0], u[1], u[2])
        + Vector3::new(w[0], w[1], w[2]);
    let omega_dot = j_inv * torque;
    [
        0.5 * (-q1 * o1 - q2 * o2 - q3 * o3),
        0.5 * (q0 * o1 - q3 * o2 + q2 * o3),
        0.5 * (q3 * o1 + q0 * o2 - q1 * o3),
        0.5 * (-q2 * o1 + q1 * o2 + q0 * o3),
        omega_dot[0],
        omega_dot[1],
        omega_dot[2],
    ]
}

/// One Euler step `x + T_s f(x, u(x), w)`.
#[derive(Debug, Clone)]
pub struct AttitudeDynamics {
    inertia: Matrix3<f64>,
    inertia_inv: Matrix3<f64>,
    kp: f64,
    kd: f64,
    sample_time: f64,
}

impl AttitudeDynamics {
    pub fn new(c: &AttitudeConfig) -> Result<Self> {
        c.validate()?;
        let inertia = c.inertia_matrix();
        let inertia_inv = inertia
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("inertia matrix is singular".into()))?;
        Ok(Self {
            inertia,
            inertia_inv,
            kp: c.kp,
            kd: c.kd,
            sample_time: c.sample_time,
        })
    }
}

impl Dynamics for AttitudeDynamics {
    fn state_dim(&self) -> usize {
        STATE_DIM
    }

    fn disturbance_dim(&self) -> usize {
        DISTURBANCE_DIM
    }

    fn step(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        let u = pd_with_inertia(x, &self.inertia, self.kp, self.kd);
        let dx = derivative(x, &u, w, &self.inertia, &self.inertia_inv);
        x.iter()
            .zip(dx)
            .map(|(xi, di)| xi + self.sample_time * di)
            .collect()
    }
}

/// Euler-discretized closed loop with the sampled tight decomposition.
///
/// The validation domain is the `±4σ` box of the initial state and of the
/// disturbance.
pub fn build_attitude_system(c: &AttitudeConfig) -> Result<StochasticSystem> {
    let dynamics: Arc<dyn Dynamics> = Arc::new(AttitudeDynamics::new(c)?);
    let decomposition = tight_decomposition_numeric(dynamics.clone(), c.search.into());
    StochasticSystem::new(
        dynamics,
        Arc::new(decomposition),
        sigma_box(&c.x0_mean, &c.x0_cov_diag, super::cwh::DOMAIN_SIGMAS)?,
        sigma_box(&c.w_mean, &c.w_cov_diag, super::cwh::DOMAIN_SIGMAS)?,
        c.sample_time,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_has_zero_derivative() {
        let c = AttitudeConfig::default();
        let x = [0.6, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(attitude_continuous(&x, &[0.0; 3], &[0.0; 3], &c), [0.0; 7]);
    }

    #[test]
    fn kinematics_at_identity() {
        let c = AttitudeConfig::default();
        let eps = 1e-3;
        let x = [1.0, 0.0, 0.0, 0.0, eps, 0.0, 0.0];
        let d = attitude_continuous(&x, &[0.0; 3], &[0.0; 3], &c);
        assert_eq!(&d[..4], &[0.0, 0.5 * eps, 0.0, 0.0]);
    }

    #[test]
    fn control_vanishes_at_rest() {
        let c = AttitudeConfig::default();
        assert_eq!(
            pd_saturated_control(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &c),
            [0.0; 3]
        );
    }

    #[test]
    fn control_is_saturated() {
        let c = AttitudeConfig::default();
        for x in [
            [0.0, 1.0, 1.0, 1.0, 50.0, -30.0, 20.0],
            [1.0, -1.0, 0.5, 0.2, -1e3, 1e3, 1e3],
        ] {
            assert!(pd_saturated_control(&x, &c).iter().all(|u| u.abs() <= 0.5));
        }
    }

    #[test]
    fn control_at_default_mean() {
        // Hand evaluation: ω = 0.1·[1,1,1], Jω = [1.7, 1.45, 2.15],
        // ω×Jω = 0.1·[2.15 - 1.45, 1.7 - 2.15, 1.45 - 1.7]
        //      = [0.07, -0.045, -0.025],
        // error vector e = [2·(0 + √3/4), 0, 0] = [√3/2, 0, 0],
        // u_pd = ω×Jω - 0.6·J·e - 2.25·Jω.
        let c = AttitudeConfig::default();
        let s3 = 3f64.sqrt() / 2.0;
        let jw = [1.7, 1.45, 2.15];
        let cross = [0.07, -0.045, -0.025];
        let je = [17.5 * s3, -0.8 * s3, 0.3 * s3];
        let expected: Vec<f64> = (0..3)
            .map(|i| 0.5 * (2.0 * (cross[i] - 0.6 * je[i] - 2.25 * jw[i])).tanh())
            .collect();
        let u = pd_saturated_control(&c.x0_mean, &c);
        for i in 0..3 {
            assert!((u[i] - expected[i]).abs() < 1e-14, "{u:?} vs {expected:?}");
        }
        // u_pd[0] ≈ -9.5 saturates the first axis.
        assert!((u[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn tiny_step_is_near_identity() {
        let c = AttitudeConfig {
            sample_time: 1e-9,
            ..AttitudeConfig::default()
        };
        let d = AttitudeDynamics::new(&c).unwrap();
        let x = c.x0_mean;
        let next = d.step(&x, &[0.01, -0.02, 0.03]);
        let u = pd_saturated_control(&x, &c);
        let f = attitude_continuous(&x, &u, &[0.01, -0.02, 0.03], &c);
        let f_norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let step_norm = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(step_norm <= 1e-8 * f_norm);
    }

    #[test]
    fn discrete_equilibrium_is_fixed() {
        let d = AttitudeDynamics::new(&AttitudeConfig::default()).unwrap();
        let x = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(d.step(&x, &[0.0; 3]), x.to_vec());
    }

    #[test]
    fn rejects_non_spd_inertia() {
        let c = AttitudeConfig {
            inertia: [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            ..AttitudeConfig::default()
        };
        assert!(c.validate().is_err());
        let c = AttitudeConfig {
            inertia: [[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            ..AttitudeConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
