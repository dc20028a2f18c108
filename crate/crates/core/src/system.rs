//! Dynamics, decomposition functions and the embedding system.
//!
//! A decomposition `g(x, w, x_hat, w_hat)` of dynamics `f(x, w)` satisfies
//! `g(x, w, x, w) = f(x, w)`, is nondecreasing in `(x, w)` and nonincreasing in
//! `(x_hat, w_hat)`. Evaluating it at the corners of a box brackets the image
//! of that box under `f`.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::interval::IntervalVector;

/// Discrete-time dynamics `x⁺ = f(x, w)`.
///
/// Implementations must be pure: no interior mutability, so that evaluation
/// from several threads gives the same results.
pub trait Dynamics: Send + Sync {
    fn state_dim(&self) -> usize;
    fn disturbance_dim(&self) -> usize;
    fn step(&self, x: &[f64], w: &[f64]) -> Vec<f64>;
}

/// A decomposition function `g(x, w, x_hat, w_hat)`.
pub trait Decomposition: Send + Sync {
    fn eval(&self, x: &[f64], w: &[f64], x_hat: &[f64], w_hat: &[f64]) -> Result<Vec<f64>>;

    /// True when `g` is only defined for `(x, w) <= (x_hat, w_hat)` or
    /// `(x, w) >= (x_hat, w_hat)`. The validator then samples ordered
    /// argument tuples only.
    fn requires_ordered_arguments(&self) -> bool {
        false
    }
}

type StepFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;
type DecompFn = dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// Dynamics backed by a closure.
#[derive(Clone)]
pub struct FnDynamics {
    state_dim: usize,
    disturbance_dim: usize,
    step: Arc<StepFn>,
}

impl FnDynamics {
    pub fn new(
        state_dim: usize,
        disturbance_dim: usize,
        step: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            state_dim,
            disturbance_dim,
            step: Arc::new(step),
        }
    }
}

impl fmt::Debug for FnDynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnDynamics")
            .field("state_dim", &self.state_dim)
            .field("disturbance_dim", &self.disturbance_dim)
            .finish_non_exhaustive()
    }
}

impl Dynamics for FnDynamics {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn disturbance_dim(&self) -> usize {
        self.disturbance_dim
    }

    fn step(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        (self.step)(x, w)
    }
}

/// Decomposition backed by a closure that is defined everywhere.
#[derive(Clone)]
pub struct FnDecomposition(Arc<DecompFn>);

impl FnDecomposition {
    pub fn new(
        eval: impl Fn(&[f64], &[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self(Arc::new(eval))
    }
}

impl Decomposition for FnDecomposition {
    fn eval(&self, x: &[f64], w: &[f64], x_hat: &[f64], w_hat: &[f64]) -> Result<Vec<f64>> {
        Ok((self.0)(x, w, x_hat, w_hat))
    }
}

/// Row-major dense matrix used by the linear models.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidParameter("matrix must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim(c, row.len())?;
            data.extend_from_slice(row);
        }
        check_finite(&data, "matrix")?;
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise `max(M, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    /// Elementwise `min(M, 0)`.
    pub fn negative_part(&self) -> Self {
        self.map(|v| v.min(0.0))
    }
}

/// `x⁺ = A x + G w`.
#[derive(Debug, Clone)]
pub struct LinearDynamics {
    a: Matrix,
    g: Matrix,
}

impl LinearDynamics {
    pub fn new(a: Matrix, g: Matrix) -> Result<Self> {
        check_dim(a.rows(), a.cols())?;
        check_dim(a.rows(), g.rows())?;
        Ok(Self { a, g })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }
}

impl Dynamics for LinearDynamics {
    fn state_dim(&self) -> usize {
        self.a.rows()
    }

    fn disturbance_dim(&self) -> usize {
        self.g.cols()
    }

    fn step(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        (0..self.a.rows())
            .map(|i| {
                let mut acc = 0.0;
                for (a, xj) in self.a.row(i).iter().zip(x) {
                    acc += a * xj;
                }
                for (g, wj) in self.g.row(i).iter().zip(w) {
                    acc += g * wj;
                }
                acc
            })
            .collect()
    }
}

/// `g(z, w, ẑ, ŵ) = max(A,0) z + max(G,0) w + min(A,0) ẑ + min(G,0) ŵ`.
///
/// Terms are accumulated in the same order as [`LinearDynamics::step`]. One of
/// `max(a,0)`, `min(a,0)` is exactly zero, so `g(x, w, x, w)` reproduces
/// `f(x, w)` bit for bit.
#[derive(Debug, Clone)]
pub struct LinearDecomposition {
    a_pos: Matrix,
    a_neg: Matrix,
    g_pos: Matrix,
    g_neg: Matrix,
}

impl LinearDecomposition {
    pub fn new(a: &Matrix, g: &Matrix) -> Self {
        Self {
            a_pos: a.positive_part(),
            a_neg: a.negative_part(),
            g_pos: g.positive_part(),
            g_neg: g.negative_part(),
        }
    }

    /// Deliberately wrong variant that exchanges the increasing and
    /// decreasing parts. Used as a fault-injection fixture for the validator.
    pub fn swapped(a: &Matrix, g: &Matrix) -> Self {
        Self {
            a_pos: a.negative_part(),
            a_neg: a.positive_part(),
            g_pos: g.negative_part(),
            g_neg: g.positive_part(),
        }
    }
}

impl Decomposition for LinearDecomposition {
    fn eval(&self, z: &[f64], w: &[f64], z_hat: &[f64], w_hat: &[f64]) -> Result<Vec<f64>> {
        let n = self.a_pos.rows();
        check_dim(self.a_pos.cols(), z.len())?;
        check_dim(self.a_pos.cols(), z_hat.len())?;
        check_dim(self.g_pos.cols(), w.len())?;
        check_dim(self.g_pos.cols(), w_hat.len())?;
        Ok((0..n)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..z.len() {
                    acc += self.a_pos.get(i, j) * z[j] + self.a_neg.get(i, j) * z_hat[j];
                }
                for j in 0..w.len() {
                    acc += self.g_pos.get(i, j) * w[j] + self.g_neg.get(i, j) * w_hat[j];
                }
                acc
            })
            .collect())
    }
}

/// Builds the decomposition of `x⁺ = Â x + G w`.
pub fn linear_decomposition(a_hat: &Matrix, g: &Matrix) -> LinearDecomposition {
    LinearDecomposition::new(a_hat, g)
}

/// Dynamics, decomposition and the boxes on which the pair is validated.
#[derive(Clone)]
pub struct StochasticSystem {
    pub dynamics: Arc<dyn Dynamics>,
    pub decomposition: Arc<dyn Decomposition>,
    /// State region used by the validator.
    pub domain: IntervalVector,
    /// Disturbance region used by the validator.
    pub disturbance_domain: IntervalVector,
    /// Seconds per step; only used to stamp times on reach steps.
    pub sample_time: f64,
}

impl fmt::Debug for StochasticSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StochasticSystem")
            .field("state_dim", &self.state_dim())
            .field("disturbance_dim", &self.disturbance_dim())
            .field("domain", &self.domain)
            .field("disturbance_domain", &self.disturbance_domain)
            .field("sample_time", &self.sample_time)
            .finish_non_exhaustive()
    }
}

impl StochasticSystem {
    pub fn new(
        dynamics: Arc<dyn Dynamics>,
        decomposition: Arc<dyn Decomposition>,
        domain: IntervalVector,
        disturbance_domain: IntervalVector,
        sample_time: f64,
    ) -> Result<Self> {
        check_dim(dynamics.state_dim(), domain.dim())?;
        check_dim(dynamics.disturbance_dim(), disturbance_domain.dim())?;
        if !(sample_time > 0.0) || !sample_time.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sample time must be positive, got {sample_time}"
            )));
        }
        Ok(Self {
            dynamics,
            decomposition,
            domain,
            disturbance_domain,
            sample_time,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.dynamics.state_dim()
    }

    pub fn disturbance_dim(&self) -> usize {
        self.dynamics.disturbance_dim()
    }

    pub fn with_domain(mut self, domain: IntervalVector) -> Result<Self> {
        check_dim(self.state_dim(), domain.dim())?;
        self.domain = domain;
        Ok(self)
    }

    pub fn with_disturbance_domain(mut self, domain: IntervalVector) -> Result<Self> {
        check_dim(self.disturbance_dim(), domain.dim())?;
        self.disturbance_domain = domain;
        Ok(self)
    }

    /// `f(x, w)` with dimension and finiteness checks.
    pub fn step(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.state_dim(), x.len())?;
        check_dim(self.disturbance_dim(), w.len())?;
        let next = self.dynamics.step(x, w);
        check_dim(self.state_dim(), next.len())?;
        check_finite(&next, "dynamics output")?;
        Ok(next)
    }

    fn decompose(&self, x: &[f64], w: &[f64], x_hat: &[f64], w_hat: &[f64]) -> Result<Vec<f64>> {
        let out = self.decomposition.eval(x, w, x_hat, w_hat)?;
        check_dim(self.state_dim(), out.len())?;
        check_finite(&out, "decomposition output")?;
        Ok(out)
    }

    /// One step of the embedding system: `(g(x,w,x̂,ŵ), g(x̂,ŵ,x,w))`.
    pub fn embed_step(
        &self,
        e: &EmbeddingState,
        w: &[f64],
        w_hat: &[f64],
    ) -> Result<EmbeddingState> {
        check_dim(self.state_dim(), e.x.len())?;
        check_dim(self.disturbance_dim(), w.len())?;
        check_dim(self.disturbance_dim(), w_hat.len())?;
        Ok(EmbeddingState {
            x: self.decompose(&e.x, w, &e.x_hat, w_hat)?,
            x_hat: self.decompose(&e.x_hat, w_hat, &e.x, w)?,
        })
    }

    /// Image box `[g(x̲,w̲,x̄,w̄), g(x̄,w̄,x̲,w̲)]` of `states × disturbances`.
    ///
    /// A lower bound exceeding the upper bound means the decomposition is
    /// invalid and is reported rather than repaired.
    pub fn propagate_interval(
        &self,
        states: &IntervalVector,
        disturbances: &IntervalVector,
    ) -> Result<IntervalVector> {
        check_dim(self.state_dim(), states.dim())?;
        check_dim(self.disturbance_dim(), disturbances.dim())?;
        let lower = self.decompose(
            states.lower(),
            disturbances.lower(),
            states.upper(),
            disturbances.upper(),
        )?;
        let upper = self.decompose(
            states.upper(),
            disturbances.upper(),
            states.lower(),
            disturbances.lower(),
        )?;
        if let Some(component) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i])) {
            return Err(Error::UnsoundDecomposition {
                component,
                lower: lower[component],
                upper: upper[component],
            });
        }
        IntervalVector::new(lower, upper)
    }
}

/// State `(x, x̂)` of the embedding system.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState {
    pub x: Vec<f64>,
    pub x_hat: Vec<f64>,
}

impl EmbeddingState {
    pub fn new(x: Vec<f64>, x_hat: Vec<f64>) -> Result<Self> {
        check_dim(x.len(), x_hat.len())?;
        Ok(Self { x, x_hat })
    }

    pub fn from_box(b: &IntervalVector) -> Self {
        Self {
            x: b.lower().to_vec(),
            x_hat: b.upper().to_vec(),
        }
    }
}
