//! Sampled check of the three decomposition conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::interval::IntervalVector;
use crate::system::StochasticSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    /// Allowed `|g(x,w,x,w) - f(x,w)|`.
    pub consistency_tol: f64,
    /// Slack allowed on the two monotonicity inequalities.
    pub monotonicity_tol: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            consistency_tol: 1e-7,
            monotonicity_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub samples: usize,
    pub violations: usize,
    /// Largest amount by which the inequality (or equality) failed, over all
    /// samples, including those within tolerance. Zero if it never failed.
    pub worst_violation: f64,
}

impl ConditionResult {
    fn record(&mut self, excess: f64, tol: f64) {
        self.samples += 1;
        if excess > self.worst_violation {
            self.worst_violation = excess;
        }
        if excess > tol {
            self.violations += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n_samples: usize,
    pub seed: u64,
    pub config: ValidationConfig,
    /// `g(x, w, x, w) = f(x, w)`.
    pub consistency: ConditionResult,
    /// `g` nondecreasing in `(x, w)`.
    pub increasing: ConditionResult,
    /// `g` nonincreasing in `(x̂, ŵ)`.
    pub decreasing: ConditionResult,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.consistency.violations == 0
            && self.increasing.violations == 0
            && self.decreasing.violations == 0
    }

    pub fn worst_monotonicity_violation(&self) -> f64 {
        self.increasing
            .worst_violation
            .max(self.decreasing.worst_violation)
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        lo + rng.random::<f64>() * (hi - lo)
    }
}

fn point_in(rng: &mut ChaCha8Rng, b: &IntervalVector) -> Vec<f64> {
    b.lower()
        .iter()
        .zip(b.upper())
        .map(|(&lo, &hi)| uniform_in(rng, lo, hi))
        .collect()
}

/// `(p, p + offset)` with a nonnegative offset of at most half the domain
/// width, clipped to the domain.
fn ordered_pair(rng: &mut ChaCha8Rng, b: &IntervalVector) -> (Vec<f64>, Vec<f64>) {
    let p = point_in(rng, b);
    let q = p
        .iter()
        .zip(b.width())
        .zip(b.upper())
        .map(|((&pi, w), &hi)| (pi + uniform_in(rng, 0.0, 0.5 * w)).min(hi))
        .collect();
    (p, q)
}

/// Three points `a <= b <= c`, each coordinate an order statistic of three
/// uniform draws.
fn ordered_triple(rng: &mut ChaCha8Rng, b: &IntervalVector) -> [Vec<f64>; 3] {
    let n = b.dim();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for j in 0..n {
        let mut t = [
            uniform_in(rng, b.lower()[j], b.upper()[j]),
            uniform_in(rng, b.lower()[j], b.upper()[j]),
            uniform_in(rng, b.lower()[j], b.upper()[j]),
        ];
        t.sort_by(f64::total_cmp);
        for k in 0..3 {
            out[k][j] = t[k];
        }
    }
    out
}

/// Largest positive entry of `a - b`, i.e. how far `a <= b` fails.
fn excess(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x - y).fold(0.0, f64::max)
}

/// Samples the three decomposition conditions over `s.domain` and
/// `s.disturbance_domain`.
///
/// For decompositions defined on ordered arguments only, the monotonicity
/// conditions are checked on tuples that stay within one ordered branch:
/// `x <= y <= x̂` or `x̂ <= x <= y` for the increasing condition, and
/// `x <= x̂ <= ŷ` or `x̂ <= ŷ <= x` for the decreasing one (likewise for the
/// disturbance arguments). Evaluation errors are propagated.
pub fn validate_decomposition(
    s: &StochasticSystem,
    n_samples: usize,
    seed: u64,
    config: ValidationConfig,
) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = &s.decomposition;
    let xs = &s.domain;
    let ws = &s.disturbance_domain;
    let ordered = g.requires_ordered_arguments();

    let mut consistency = ConditionResult::default();
    let mut increasing = ConditionResult::default();
    let mut decreasing = ConditionResult::default();

    for k in 0..n_samples {
        let x = point_in(&mut rng, xs);
        let w = point_in(&mut rng, ws);
        let f = s.step(&x, &w)?;
        let gd = g.eval(&x, &w, &x, &w)?;
        let gap = f
            .iter()
            .zip(&gd)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        consistency.record(gap, config.consistency_tol);

        let upper_branch = k % 2 == 1;
        // Increasing in (x, w): g(x,w,x̂,ŵ) <= g(y,v,x̂,ŵ) for x <= y, w <= v.
        let (x, y, x_hat, w, v, w_hat) = if ordered {
            let [a, b, c] = ordered_triple(&mut rng, xs);
            let [d, e, h] = ordered_triple(&mut rng, ws);
            if upper_branch {
                (b, c, a, e, h, d)
            } else {
                (a, b, c, d, e, h)
            }
        } else {
            let (x, y) = ordered_pair(&mut rng, xs);
            let (w, v) = ordered_pair(&mut rng, ws);
            (x, y, point_in(&mut rng, xs), w, v, point_in(&mut rng, ws))
        };
        let lo = g.eval(&x, &w, &x_hat, &w_hat)?;
        let hi = g.eval(&y, &v, &x_hat, &w_hat)?;
        increasing.record(excess(&lo, &hi), config.monotonicity_tol);

        // Decreasing in (x̂, ŵ): g(x,w,ŷ,v̂) <= g(x,w,x̂,ŵ) for x̂ <= ŷ, ŵ <= v̂.
        let (x, x_hat, y_hat, w, w_hat, v_hat) = if ordered {
            let [a, b, c] = ordered_triple(&mut rng, xs);
            let [d, e, h] = ordered_triple(&mut rng, ws);
            if upper_branch {
                (c, a, b, h, d, e)
            } else {
                (a, b, c, d, e, h)
            }
        } else {
            let (x_hat, y_hat) = ordered_pair(&mut rng, xs);
            let (w_hat, v_hat) = ordered_pair(&mut rng, ws);
            (
                point_in(&mut rng, xs),
                x_hat,
                y_hat,
                point_in(&mut rng, ws),
                w_hat,
                v_hat,
            )
        };
        let lo = g.eval(&x, &w, &y_hat, &v_hat)?;
        let hi = g.eval(&x, &w, &x_hat, &w_hat)?;
        decreasing.record(excess(&lo, &hi), config.monotonicity_tol);
    }

    Ok(ValidationReport {
        n_samples,
        seed,
        config,
        consistency,
        increasing,
        decreasing,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::system::{
        linear_decomposition, FnDecomposition, FnDynamics, LinearDecomposition, LinearDynamics,
        Matrix,
    };

    fn linear_system(a: &Matrix, g: &Matrix, broken: bool) -> StochasticSystem {
        let dynamics = LinearDynamics::new(a.clone(), g.clone()).unwrap();
        let decomposition = if broken {
            LinearDecomposition::swapped(a, g)
        } else {
            linear_decomposition(a, g)
        };
        StochasticSystem::new(
            Arc::new(dynamics),
            Arc::new(decomposition),
            IntervalVector::new(vec![-2.0; 2], vec![2.0; 2]).unwrap(),
            IntervalVector::new(vec![-1.0; 2], vec![1.0; 2]).unwrap(),
            1.0,
        )
        .unwrap()
    }

    fn sign_mixed() -> (Matrix, Matrix) {
        (
            Matrix::from_rows(&[vec![0.9, -0.4], vec![-0.3, 0.8]]).unwrap(),
            Matrix::from_rows(&[vec![1.0, -0.2], vec![0.1, 1.0]]).unwrap(),
        )
    }

    #[test]
    fn linear_decomposition_has_no_violations() {
        let (a, g) = sign_mixed();
        let r = validate_decomposition(&linear_system(&a, &g, false), 500, 1, Default::default())
            .unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.consistency.worst_violation, 0.0);
        assert_eq!(r.increasing.samples, 500);
    }

    #[test]
    fn swapped_decomposition_is_caught() {
        let (a, g) = sign_mixed();
        let r = validate_decomposition(&linear_system(&a, &g, true), 1000, 1, Default::default())
            .unwrap();
        assert!(r.increasing.violations > 0);
        assert!(r.decreasing.violations > 0);
        assert!(!r.passed());
    }

    #[test]
    fn monotone_f_is_its_own_decomposition() {
        let f = |x: &[f64], w: &[f64]| vec![x[0].powi(3) + 0.5 * x[1] + w[0], x[1].exp()];
        let s = StochasticSystem::new(
            Arc::new(FnDynamics::new(2, 1, f)),
            Arc::new(FnDecomposition::new(move |x, w, _, _| f(x, w))),
            IntervalVector::new(vec![-1.0; 2], vec![1.0; 2]).unwrap(),
            IntervalVector::new(vec![-1.0], vec![1.0]).unwrap(),
            1.0,
        )
        .unwrap();
        let r = validate_decomposition(&s, 1000, 3, Default::default()).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn report_is_deterministic() {
        let (a, g) = sign_mixed();
        let s = linear_system(&a, &g, true);
        let r1 = validate_decomposition(&s, 200, 9, Default::default()).unwrap();
        let r2 = validate_decomposition(&s, 200, 9, Default::default()).unwrap();
        assert_eq!(r1, r2);
    }
}
