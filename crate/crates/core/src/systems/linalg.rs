//! Matrix exponential, zero-order-hold discretization and discrete LQR.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};

fn norm_one(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Infinity norm (maximum absolute row sum).
pub fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(M)` by scaling and squaring with a truncated Taylor series.
pub fn expm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_dim(m.nrows(), m.ncols())?;
    let n = m.nrows();
    let norm = norm_one(m);
    if !norm.is_finite() {
        return Err(Error::NonFinite {
            component: 0,
            context: "matrix exponential argument",
        });
    }
    // Scale until the norm is at most 1/2.
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings);

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=40 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if norm_one(&term) <= f64::EPSILON * 1e-3 * norm_one(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Exact discretization of `ẋ = A x + B u` with `u` held over `ts`.
///
/// `Ad` and `Bd` are the top blocks of `exp(ts · [[A, B], [0, 0]])`.
pub fn zoh_discretize(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    ts: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_dim(a.nrows(), a.ncols())?;
    check_dim(a.nrows(), b.nrows())?;
    if !(ts > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample time must be positive, got {ts}"
        )));
    }
    let n = a.nrows();
    let m = b.ncols();
    let mut block = DMatrix::<f64>::zeros(n + m, n + m);
    block.view_mut((0, 0), (n, n)).copy_from(&(a * ts));
    block.view_mut((0, n), (n, m)).copy_from(&(b * ts));
    let e = expm(&block)?;
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
    ))
}

#[derive(Debug, Clone)]
pub struct LqrSolution {
    /// Feedback gain, `u = -K x`.
    pub gain: DMatrix<f64>,
    /// Riccati fixed point.
    pub cost: DMatrix<f64>,
    pub iterations: usize,
}

pub const DLQR_TOLERANCE: f64 = 1e-11;
pub const DLQR_MAX_ITERATIONS: usize = 100_000;

/// Discrete LQR by backward Riccati iteration from `P = Q`.
///
/// Stops when successive iterates differ by at most [`DLQR_TOLERANCE`] in the
/// infinity norm.
pub fn dlqr(
    ad: &DMatrix<f64>,
    bd: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<LqrSolution> {
    let n = ad.nrows();
    let m = bd.ncols();
    check_dim(n, ad.ncols())?;
    check_dim(n, bd.nrows())?;
    check_dim(n, q.nrows())?;
    check_dim(n, q.ncols())?;
    check_dim(m, r.nrows())?;
    check_dim(m, r.ncols())?;

    let gain_for = |p: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let s = r + bd.transpose() * p * bd;
        let rhs = bd.transpose() * p * ad;
        s.lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidParameter("R + BᵀPB is singular".into()))
    };

    let mut p = q.clone();
    for iteration in 1..=DLQR_MAX_ITERATIONS {
        let k = gain_for(&p)?;
        let next = ad.transpose() * &p * ad - ad.transpose() * &p * bd * &k + q;
        let next = (&next + next.transpose()) * 0.5;
        let diff = norm_inf(&(&next - &p));
        p = next;
        if !diff.is_finite() {
            return Err(Error::NonFinite {
                component: 0,
                context: "Riccati iterate",
            });
        }
        if diff <= DLQR_TOLERANCE {
            return Ok(LqrSolution {
                gain: gain_for(&p)?,
                cost: p,
                iterations: iteration,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: DLQR_MAX_ITERATIONS,
    })
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_zero_and_diagonal() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(3, 3));
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -2.0, 7.5]));
        let e = expm(&d).unwrap();
        for (i, v) in [1.0f64, -2.0, 7.5].iter().enumerate() {
            assert!((e[(i, i)] - v.exp()).abs() <= 1e-13 * v.exp());
        }
    }

    #[test]
    fn expm_rotation() {
        let t = 2.3;
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&m).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!((e - want).abs().max() < 1e-14);
    }

    #[test]
    fn zoh_trivial_cases() {
        let (ad, bd) =
            zoh_discretize(&DMatrix::zeros(2, 2), &DMatrix::identity(2, 2), 0.7).unwrap();
        assert_eq!(ad, DMatrix::identity(2, 2));
        assert!((bd - DMatrix::identity(2, 2) * 0.7).abs().max() < 1e-15);

        let (a, b, ts) = (-0.8f64, 2.5, 1.3);
        let (ad, bd) = zoh_discretize(
            &DMatrix::from_element(1, 1, a),
            &DMatrix::from_element(1, 1, b),
            ts,
        )
        .unwrap();
        let e = (a * ts).exp();
        assert!((ad[(0, 0)] - e).abs() < 1e-15);
        assert!((bd[(0, 0)] - b * (e - 1.0) / a).abs() < 1e-14);
        assert!(zoh_discretize(&DMatrix::zeros(1, 1), &DMatrix::zeros(1, 1), 0.0).is_err());
    }

    #[test]
    fn dlqr_zero_dynamics() {
        let sol = dlqr(
            &DMatrix::zeros(2, 2),
            &DMatrix::identity(2, 2),
            &DMatrix::identity(2, 2),
            &DMatrix::identity(2, 2),
        )
        .unwrap();
        assert_eq!(sol.gain, DMatrix::zeros(2, 2));
        assert_eq!(sol.cost, DMatrix::identity(2, 2));
    }

    #[test]
    fn dlqr_scalar_golden_ratio() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let sol = dlqr(&one, &one, &one, &one).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sol.cost[(0, 0)] - golden).abs() < 1e-9);
        assert!((sol.gain[(0, 0)] - golden / (1.0 + golden)).abs() < 1e-9);
    }

    #[test]
    fn dlqr_reports_non_convergence() {
        // Unstabilizable: B = 0 with an unstable A.
        let err = dlqr(
            &DMatrix::from_element(1, 1, 2.0),
            &DMatrix::zeros(1, 1),
            &DMatrix::from_element(1, 1, 1.0),
            &DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NonConvergence { .. } | Error::NonFinite { .. }
        ));
    }

    #[test]
    fn spectral_radius_of_rotation_and_diag() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!((spectral_radius(&m) - 0.5).abs() < 1e-14);
        let d = DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, -0.9]);
        assert!((spectral_radius(&d) - 0.9).abs() < 1e-14);
    }
}
