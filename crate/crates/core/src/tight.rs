//! Numerically estimated tight decomposition.
//!
//! For `x <= x̂, w <= ŵ` component `i` of `g(x, w, x̂, ŵ)` is the minimum of
//! `f_i` over the box `[x, x̂] × [w, ŵ]`; for `x >= x̂, w >= ŵ` it is the
//! maximum over `[x̂, x] × [ŵ, w]`. The extremum is estimated by evaluating
//! `f` at every corner of the box and at a Halton point set in its interior,
//! then polishing the best candidate with cyclic coordinate search.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::interval::leq;
use crate::system::{Decomposition, Dynamics};

/// Sampling density of the extremum search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Quasi-random interior points evaluated in addition to the corners.
    pub interior_samples: usize,
    /// Coordinate-search sweeps applied to the best candidate; 0 disables
    /// polishing.
    pub refine_sweeps: usize,
    /// Golden-section iterations per coordinate line search.
    pub line_search_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            interior_samples: 200,
            refine_sweeps: 12,
            line_search_iters: 60,
        }
    }
}

#[derive(Clone)]
pub struct TightDecomposition {
    dynamics: Arc<dyn Dynamics>,
    config: SearchConfig,
}

impl std::fmt::Debug for TightDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TightDecomposition")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

/// Builds the sampled tight decomposition of `dynamics`.
pub fn tight_decomposition_numeric(
    dynamics: Arc<dyn Dynamics>,
    config: SearchConfig,
) -> TightDecomposition {
    TightDecomposition { dynamics, config }
}

#[derive(Clone, Copy, PartialEq)]
enum Sense {
    Min,
    Max,
}

impl Sense {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Min => a < b,
            Sense::Max => a > b,
        }
    }
}

impl TightDecomposition {
    pub fn config(&self) -> SearchConfig {
        self.config
    }

    fn eval_joint(&self, z: &[f64], nx: usize) -> Vec<f64> {
        self.dynamics.step(&z[..nx], &z[nx..])
    }

    fn extremum(&self, lo: &[f64], hi: &[f64], nx: usize, sense: Sense) -> Vec<f64> {
        let dim = lo.len();
        let free: Vec<usize> = (0..dim).filter(|&j| lo[j] < hi[j]).collect();
        let n_out = self.dynamics.state_dim();
        let mut best_val = vec![f64::NAN; n_out];
        let mut best_arg: Vec<Vec<f64>> = vec![lo.to_vec(); n_out];

        let mut consider = |z: &[f64], vals: &[f64]| {
            for i in 0..n_out {
                if best_val[i].is_nan() || sense.better(vals[i], best_val[i]) {
                    best_val[i] = vals[i];
                    best_arg[i].copy_from_slice(z);
                }
            }
        };

        // Corners over the non-degenerate coordinates.
        let mut z = lo.to_vec();
        for mask in 0u64..(1u64 << free.len()) {
            for (bit, &j) in free.iter().enumerate() {
                z[j] = if mask >> bit & 1 == 1 { hi[j] } else { lo[j] };
            }
            let vals = self.eval_joint(&z, nx);
            consider(&z, &vals);
        }

        if !free.is_empty() {
            for k in 1..=self.config.interior_samples {
                z.copy_from_slice(lo);
                for (d, &j) in free.iter().enumerate() {
                    z[j] = lo[j] + halton(k as u64, PRIMES[d % PRIMES.len()]) * (hi[j] - lo[j]);
                }
                let vals = self.eval_joint(&z, nx);
                consider(&z, &vals);
            }
        }

        if self.config.refine_sweeps > 0 && !free.is_empty() {
            for i in 0..n_out {
                let (arg, val) =
                    self.polish(i, &best_arg[i], best_val[i], lo, hi, &free, nx, sense);
                best_arg[i] = arg;
                best_val[i] = val;
            }
        }
        best_val
    }

    /// Cyclic coordinate search on component `i`, never accepting a worse
    /// value than the starting candidate.
    #[allow(clippy::too_many_arguments)]
    fn polish(
        &self,
        i: usize,
        start: &[f64],
        start_val: f64,
        lo: &[f64],
        hi: &[f64],
        free: &[usize],
        nx: usize,
        sense: Sense,
    ) -> (Vec<f64>, f64) {
        let mut z = start.to_vec();
        let mut val = start_val;
        let objective = |z: &[f64]| self.eval_joint(z, nx)[i];
        for _ in 0..self.config.refine_sweeps {
            let before = val;
            for &j in free {
                let (t, v) = golden_section(
                    |t| {
                        let mut trial = z.clone();
                        trial[j] = t;
                        objective(&trial)
                    },
                    lo[j],
                    hi[j],
                    self.config.line_search_iters,
                    sense,
                );
                if sense.better(v, val) {
                    z[j] = t;
                    val = v;
                }
            }
            if (before - val).abs() <= 1e-15 * (1.0 + val.abs()) {
                break;
            }
        }
        (z, val)
    }
}

impl Decomposition for TightDecomposition {
    fn eval(&self, x: &[f64], w: &[f64], x_hat: &[f64], w_hat: &[f64]) -> Result<Vec<f64>> {
        let nx = self.dynamics.state_dim();
        let nw = self.dynamics.disturbance_dim();
        check_dim(nx, x.len())?;
        check_dim(nx, x_hat.len())?;
        check_dim(nw, w.len())?;
        check_dim(nw, w_hat.len())?;

        if x == x_hat && w == w_hat {
            return Ok(self.dynamics.step(x, w));
        }
        let lower_branch = leq(x, x_hat)? && leq(w, w_hat)?;
        let upper_branch = leq(x_hat, x)? && leq(w_hat, w)?;
        let join = |a: &[f64], b: &[f64]| [a, b].concat();
        if lower_branch {
            Ok(self.extremum(&join(x, w), &join(x_hat, w_hat), nx, Sense::Min))
        } else if upper_branch {
            Ok(self.extremum(&join(x_hat, w_hat), &join(x, w), nx, Sense::Max))
        } else {
            Err(Error::MixedOrder)
        }
    }

    fn requires_ordered_arguments(&self) -> bool {
        true
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Golden-section search of a 1-D function on `[a, b]`, also checking the
/// endpoints. Returns the best abscissa found and its value.
fn golden_section(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    iters: usize,
    sense: Sense,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if sense.better(fc, fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let mut best = if sense.better(fc, fd) {
        (c, fc)
    } else {
        (d, fd)
    };
    for t in [a, b] {
        let v = f(t);
        if sense.better(v, best.1) {
            best = (t, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::FnDynamics;

    fn scalar(f: fn(f64) -> f64) -> TightDecomposition {
        let dynamics = FnDynamics::new(1, 1, move |x, _| vec![f(x[0])]);
        tight_decomposition_numeric(Arc::new(dynamics), SearchConfig::default())
    }

    #[test]
    fn increasing_map_hits_lower_corner() {
        let dynamics = FnDynamics::new(2, 1, |x, w| vec![x[0] + x[1].powi(3) + w[0], x[1].exp()]);
        let g = tight_decomposition_numeric(Arc::new(dynamics.clone()), SearchConfig::default());
        let (x, w, xh, wh) = ([0.1, -0.4], [0.2], [0.5, 0.3], [0.6]);
        assert_eq!(g.eval(&x, &w, &xh, &wh).unwrap(), dynamics.step(&x, &w));
        assert_eq!(g.eval(&xh, &wh, &x, &w).unwrap(), dynamics.step(&xh, &wh));
    }

    #[test]
    fn negation_takes_upper_endpoint() {
        let g = scalar(|x| -x);
        assert_eq!(g.eval(&[0.2], &[0.0], &[0.9], &[0.0]).unwrap(), vec![-0.9]);
    }

    #[test]
    fn interior_minimum_of_square() {
        // Brute-force grid of 10^4 points gives min 0 and max 4 on [-1, 2].
        let grid: Vec<f64> = (0..10_000)
            .map(|k| -1.0 + 3.0 * k as f64 / 9_999.0)
            .collect();
        let grid_min = grid.iter().map(|x| x * x).fold(f64::INFINITY, f64::min);
        let grid_max = grid.iter().map(|x| x * x).fold(f64::NEG_INFINITY, f64::max);
        assert!(grid_min < 1e-7);
        assert_eq!(grid_max, 4.0);

        let g = scalar(|x| x * x);
        let lo = g.eval(&[-1.0], &[0.0], &[2.0], &[0.0]).unwrap()[0];
        let hi = g.eval(&[2.0], &[0.0], &[-1.0], &[0.0]).unwrap()[0];
        assert!(lo >= 0.0 && lo <= grid_min + 1e-12, "lo = {lo}");
        assert_eq!(hi, grid_max);
    }

    #[test]
    fn interior_samples_alone_find_square_minimum() {
        let dynamics = FnDynamics::new(1, 1, |x, _| vec![x[0] * x[0]]);
        let config = SearchConfig {
            refine_sweeps: 0,
            ..SearchConfig::default()
        };
        let g = tight_decomposition_numeric(Arc::new(dynamics), config);
        let lo = g.eval(&[-1.0], &[0.0], &[2.0], &[0.0]).unwrap()[0];
        assert!(lo < 1e-3, "lo = {lo}");
    }

    #[test]
    fn mixed_order_is_rejected() {
        let dynamics = FnDynamics::new(2, 1, |x, _| x.to_vec());
        let g = tight_decomposition_numeric(Arc::new(dynamics), SearchConfig::default());
        assert_eq!(
            g.eval(&[0.0, 1.0], &[0.0], &[1.0, 0.0], &[0.0])
                .unwrap_err(),
            Error::MixedOrder
        );
        assert_eq!(
            g.eval(&[0.0, 0.0], &[1.0], &[1.0, 1.0], &[0.0])
                .unwrap_err(),
            Error::MixedOrder
        );
    }

    #[test]
    fn halton_is_van_der_corput_in_base_two() {
        let v: Vec<f64> = (1..=4).map(|k| halton(k, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    }
}
