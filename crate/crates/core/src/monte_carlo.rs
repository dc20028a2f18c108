//! Brute-force trajectory sampling used to check reach tubes and the
//! order-theoretic facts they rest on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{stream_seed, ProductDistribution};
use crate::error::{check_dim, Error, Result};
use crate::interval::{leq, IntervalVector};
use crate::reach::ReachTube;
use crate::system::StochasticSystem;

/// Three-sigma binomial slack with the variance bounded by `1/4`.
pub fn binomial_slack(samples: usize) -> f64 {
    3.0 * (0.25 / samples as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub master_seed: u64,
    /// `trajectories[m][k]` is the state of trajectory `m` at step `k`.
    pub trajectories: Vec<Vec<Vec<f64>>>,
    /// `(trajectory, step)` of the first non-finite state, per flagged
    /// trajectory. Later states of a flagged trajectory are NaN.
    pub flagged: Vec<(usize, usize)>,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.trajectories.first().map_or(0, Vec::len)
    }
}

/// Samples `m` independent trajectories of `horizon` steps.
///
/// Trajectory `i` draws its initial state from stream `(seed, i, 0)` and the
/// disturbance for step `k` from `(seed, i, k + 1)`; the result does not
/// depend on thread scheduling.
pub fn sample_trajectories(
    s: &StochasticSystem,
    initial: &ProductDistribution,
    disturbance: &ProductDistribution,
    horizon: usize,
    m: usize,
    master_seed: u64,
) -> Result<TrajectoryEnsemble> {
    check_dim(s.state_dim(), initial.dim())?;
    check_dim(s.disturbance_dim(), disturbance.dim())?;
    if m == 0 {
        return Err(Error::InvalidParameter(
            "at least one trajectory is required".into(),
        ));
    }
    let n = s.state_dim();
    let runs: Vec<(Vec<Vec<f64>>, Option<usize>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut path = Vec::with_capacity(horizon + 1);
            let mut x = initial.sample(stream_seed(master_seed, i as u64, 0));
            let mut flag = None;
            if x.iter().any(|v| !v.is_finite()) {
                flag = Some(0);
            }
            path.push(x.clone());
            for k in 0..horizon {
                if flag.is_some() {
                    path.push(vec![f64::NAN; n]);
                    continue;
                }
                let w = disturbance.sample(stream_seed(master_seed, i as u64, k as u64 + 1));
                x = s.dynamics.step(&x, &w);
                if x.len() != n || x.iter().any(|v| !v.is_finite()) {
                    flag = Some(k + 1);
                    x = vec![f64::NAN; n];
                }
                path.push(x.clone());
            }
            (path, flag)
        })
        .collect();

    let mut trajectories = Vec::with_capacity(m);
    let mut flagged = Vec::new();
    for (i, (path, flag)) in runs.into_iter().enumerate() {
        if let Some(step) = flag {
            flagged.push((i, step));
        }
        trajectories.push(path);
    }
    Ok(TrajectoryEnsemble {
        master_seed,
        trajectories,
        flagged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepContainment {
    pub k: usize,
    pub empirical_fraction: f64,
    pub theoretical_lower_bound: f64,
    pub sample_count: usize,
    pub contained_count: usize,
}

impl StepContainment {
    /// `fraction >= bound - sigmas · sqrt(1/(4M))`.
    pub fn honors_bound(&self, sigmas: f64) -> bool {
        let slack = sigmas / 3.0 * binomial_slack(self.sample_count);
        self.empirical_fraction >= self.theoretical_lower_bound - slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub per_step: Vec<StepContainment>,
}

impl ContainmentReport {
    pub fn fractions(&self) -> Vec<f64> {
        self.per_step.iter().map(|s| s.empirical_fraction).collect()
    }

    /// Every step satisfies the bound within three-sigma binomial slack.
    pub fn all_honored(&self) -> bool {
        self.per_step.iter().all(|s| s.honors_bound(3.0))
    }
}

/// Fraction of trajectories inside the tube box at every step.
///
/// Any flagged (non-finite) trajectory fails the whole evaluation.
pub fn empirical_containment(
    e: &TrajectoryEnsemble,
    tube: &ReachTube,
) -> Result<ContainmentReport> {
    if let Some(&(trajectory, step)) = e.flagged.first() {
        return Err(Error::TrajectoryNonFinite { trajectory, step });
    }
    check_dim(tube.len(), e.steps())?;
    let per_step = tube
        .steps
        .iter()
        .enumerate()
        .map(|(k, step)| {
            let mut contained = 0;
            for path in &e.trajectories {
                if step.bounds.contains(&path[k])? {
                    contained += 1;
                }
            }
            Ok(StepContainment {
                k: step.k,
                empirical_fraction: contained as f64 / e.len() as f64,
                theoretical_lower_bound: 1.0 - step.delta,
                sample_count: e.len(),
                contained_count: contained,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContainmentReport { per_step })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCheck {
    /// Fraction of mapped samples inside `[f(lb), f(ub)]`.
    pub empirical: f64,
    /// `1 - 2δ`.
    pub bound: f64,
    pub samples: usize,
}

/// Maps the `1 - δ` box of `d` through a monotone `f` and measures how much
/// of the pushed-forward mass lands in `[f(lb), f(ub)]`.
///
/// The caller vouches for monotonicity of `f`.
pub fn check_monotone_concentration<F>(
    f: F,
    d: &ProductDistribution,
    delta: f64,
    m: usize,
    seed: u64,
) -> Result<ConcentrationCheck>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidProbability {
            name: "delta",
            range: "(0, 1/2)",
            value: delta,
        });
    }
    let b = d.joint_confidence_box(delta)?;
    let image = IntervalVector::new(f(b.lower()), f(b.upper()))?;
    let contained = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = d.sample(stream_seed(seed, i as u64, 0));
            image.contains(&f(&x)).map(usize::from)
        })
        .sum::<Result<usize>>()?;
    Ok(ConcentrationCheck {
        empirical: contained as f64 / m as f64,
        bound: 1.0 - 2.0 * delta,
        samples: m,
    })
}

/// Union of the orthants `{z : z >= c}` over its corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperSet {
    pub corners: Vec<Vec<f64>>,
}

impl UpperSet {
    pub fn orthant(corner: Vec<f64>) -> Self {
        Self {
            corners: vec![corner],
        }
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        self.corners.iter().any(|c| leq(c, z).unwrap_or(false))
    }

    pub fn mass(&self, samples: &[Vec<f64>]) -> f64 {
        samples.iter().filter(|z| self.contains(z)).count() as f64 / samples.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub sets_tested: usize,
    /// Sets where `P̂_x(U) - P̂_y(U)` exceeded the slack.
    pub violations: usize,
    /// Largest `P̂_x(U) - P̂_y(U)` seen (can be negative).
    pub max_gap: f64,
    pub slack: f64,
    pub worst_set: Option<UpperSet>,
}

/// Falsification test of `x <=_st y` on random upper sets.
///
/// The sets are orthants `{z >= c}` and unions of two, with corners drawn
/// from the pooled samples. A violation is a set where the empirical mass of
/// `x` exceeds that of `y` by more than three two-sample binomial sigmas.
pub fn check_stochastic_order(
    samples_x: &[Vec<f64>],
    samples_y: &[Vec<f64>],
    n_upper_sets: usize,
    seed: u64,
) -> Result<OrderReport> {
    if samples_x.is_empty() || samples_y.is_empty() {
        return Err(Error::InvalidParameter(
            "sample sets must be non-empty".into(),
        ));
    }
    let n = samples_x[0].len();
    for z in samples_x.iter().chain(samples_y) {
        check_dim(n, z.len())?;
    }
    let slack = 3.0 * (0.25 / samples_x.len() as f64 + 0.25 / samples_y.len() as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = samples_x.len() + samples_y.len();
    let pick = |rng: &mut ChaCha8Rng| {
        let i = rng.random_range(0..total);
        if i < samples_x.len() {
            samples_x[i].clone()
        } else {
            samples_y[i - samples_x.len()].clone()
        }
    };

    let mut report = OrderReport {
        sets_tested: n_upper_sets,
        violations: 0,
        max_gap: f64::NEG_INFINITY,
        slack,
        worst_set: None,
    };
    for t in 0..n_upper_sets {
        let mut corners = vec![pick(&mut rng)];
        if t % 2 == 1 {
            corners.push(pick(&mut rng));
        }
        let set = UpperSet { corners };
        let gap = set.mass(samples_x) - set.mass(samples_y);
        if gap > slack {
            report.violations += 1;
        }
        if gap > report.max_gap {
            report.max_gap = gap;
            report.worst_set = Some(set);
        }
    }
    Ok(report)
}
