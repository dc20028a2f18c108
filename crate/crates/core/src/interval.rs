//! Componentwise orders on real vectors and closed interval boxes.
//!
//! Vectors are plain `f64` slices. All orders are taken with respect to the
//! positive orthant: `a <= b` iff `a[i] <= b[i]` for every `i`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Componentwise partial order `a <= b`.
pub fn leq(a: &[f64], b: &[f64]) -> Result<bool> {
    check_dim(a.len(), b.len())?;
    Ok(a.iter().zip(b).all(|(x, y)| x <= y))
}

/// Southeast order on pairs: `(x, x_hat) <=_SE (y, y_hat)` iff `x <= y` and
/// `x_hat >= y_hat`.
pub fn southeast_leq(first: (&[f64], &[f64]), second: (&[f64], &[f64])) -> Result<bool> {
    let n = first.0.len();
    check_dim(n, first.1.len())?;
    check_dim(n, second.0.len())?;
    check_dim(n, second.1.len())?;
    Ok(leq(first.0, second.0)? && leq(second.1, first.1)?)
}

/// A closed box `[lower, upper]` in `n` dimensions.
///
/// Construction enforces `lower <= upper` componentwise and rejects NaN.
/// Infinite endpoints are allowed so that unbounded sentinel boxes can be
/// represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox", into = "RawBox")]
pub struct IntervalVector {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawBox> for IntervalVector {
    type Error = Error;

    fn try_from(raw: RawBox) -> Result<Self> {
        IntervalVector::new(raw.lower, raw.upper)
    }
}

impl From<IntervalVector> for RawBox {
    fn from(b: IntervalVector) -> Self {
        RawBox {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

impl IntervalVector {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        for (component, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            // `!(lo <= hi)` also catches NaN on either side.
            if !(lo <= hi) {
                return Err(Error::InvalidInterval {
                    component,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Degenerate box `[c, c]`.
    pub fn point(c: &[f64]) -> Result<Self> {
        Self::new(c.to_vec(), c.to_vec())
    }

    /// The whole space, `[-inf, +inf]^n`.
    pub fn universe(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Closed-interval membership; boundary points are contained.
    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        check_dim(self.dim(), point.len())?;
        Ok(self
            .lower
            .iter()
            .zip(&self.upper)
            .zip(point)
            .all(|((lo, hi), p)| lo <= p && p <= hi))
    }

    pub fn width(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .collect()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &IntervalVector) -> Result<bool> {
        check_dim(self.dim(), other.dim())?;
        Ok(leq(&other.lower, &self.lower)? && leq(&self.upper, &other.upper)?)
    }

    /// Smallest box containing both inputs.
    pub fn hull(&self, other: &IntervalVector) -> Result<IntervalVector> {
        check_dim(self.dim(), other.dim())?;
        let lower = self
            .lower
            .iter()
            .zip(&other.lower)
            .map(|(a, b)| a.min(*b))
            .collect();
        let upper = self
            .upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| a.max(*b))
            .collect();
        Ok(IntervalVector { lower, upper })
    }

    /// Sub-box made of the listed components, in the listed order.
    pub fn select(&self, components: &[usize]) -> Result<IntervalVector> {
        let mut lower = Vec::with_capacity(components.len());
        let mut upper = Vec::with_capacity(components.len());
        for &i in components {
            if i >= self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: i + 1,
                });
            }
            lower.push(self.lower[i]);
            upper.push(self.upper[i]);
        }
        Ok(IntervalVector { lower, upper })
    }
}
