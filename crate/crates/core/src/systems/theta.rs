//! Line-of-sight angle `θ = arccos(1 - 2 q₁² - 2 q₂²)` over a quaternion box.

use crate::error::{check_dim, Result};
use crate::interval::IntervalVector;

fn square_range(lo: f64, hi: f64) -> (f64, f64) {
    let max = (lo * lo).max(hi * hi);
    let min = if lo <= 0.0 && hi >= 0.0 {
        0.0
    } else {
        (lo * lo).min(hi * hi)
    };
    (min, max)
}

/// Exact range of `θ` over a box in `(q₁, q₂)`.
pub fn project_theta(qbox: &IntervalVector) -> Result<(f64, f64)> {
    check_dim(2, qbox.dim())?;
    let (l, u) = (qbox.lower(), qbox.upper());
    let (a_min, a_max) = square_range(l[0], u[0]);
    let (b_min, b_max) = square_range(l[1], u[1]);
    Ok((
        cos_theta(a_min, b_min).acos(),
        cos_theta(a_max, b_max).acos(),
    ))
}

// Shared by the box and point versions so both round identically; each
// operation is monotone under round-to-nearest.
fn cos_theta(q1_sq: f64, q2_sq: f64) -> f64 {
    (1.0 - 2.0 * q1_sq - 2.0 * q2_sq).clamp(-1.0, 1.0)
}

/// `θ` at a single point, with the same clipping.
pub fn theta(q1: f64, q2: f64) -> f64 {
    cos_theta(q1 * q1, q2 * q2).acos()
}
