use std::f64::consts::TAU;

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;

use super::zero;
use crate::error::{Error, Result};

pub const DEFAULT_TOL_CIRCLE: f64 = 1e-8;
// Above this condition number of C the reduction to a standard problem is abandoned.
const MAX_CONDITION: f64 = 1e12;

/// Angles of the unit-modulus eigenvalues of the pencil `R(alpha) - lambda S` with
/// `R = [[2 alpha I, -C], [I, 0]]` and `S = diag(C*, I)`, sorted in `[0, 2pi)`.
///
/// These are the `theta` at which `alpha` is an eigenvalue of `(C e^{-i theta} + C* e^{i theta}) / 2`,
/// plus possible spurious roots; callers filter them.
pub fn pencil_unit_eigs(c: MatRef<'_, C64>, alpha: f64, tol_circle: f64) -> Result<Vec<f64>> {
    let n = c.nrows();
    if n != c.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.ncols(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let sv = c
        .singular_values()
        .map_err(|e| Error::ConvergenceFailure(format!("singular values of C: {e:?}")))?;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smax == 0.0 {
        return Err(Error::SingularPencil("C is the zero matrix".into()));
    }

    let eigs = if smin * MAX_CONDITION > smax {
        reduced_eigs(c, alpha)?
    } else {
        qz_eigs(c, alpha, smax)?
    };

    let slack = tol_circle * smax.max(1.0);
    let mut angles: Vec<f64> = eigs
        .into_iter()
        .filter(|l| (l.norm() - 1.0).abs() <= slack)
        .map(|l| l.arg().rem_euclid(TAU))
        .map(|a| if a >= TAU { 0.0 } else { a })
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

// Standard eigenproblem of S^{-1} R = [[2 alpha C^{-*}, -C^{-*} C], [I, 0]].
fn reduced_eigs(c: MatRef<'_, C64>, alpha: f64) -> Result<Vec<C64>> {
    let n = c.nrows();
    let lu = c.adjoint().partial_piv_lu();
    let inv_adj: Mat<C64> = lu.solve(Mat::<C64>::identity(n, n));
    let prod = &inv_adj * c;
    let m = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => inv_adj[(i, j)] * (2.0 * alpha),
        (true, false) => -prod[(i, j - n)],
        (false, true) => {
            if i - n == j {
                C64::new(1.0, 0.0)
            } else {
                zero()
            }
        }
        (false, false) => zero(),
    });
    m.eigenvalues()
        .map_err(|e| Error::ConvergenceFailure(format!("pencil eigenvalues: {e:?}")))
}

// Generalized Schur fallback for (numerically) singular C; infinite eigenvalues are dropped.
fn qz_eigs(c: MatRef<'_, C64>, alpha: f64, scale: f64) -> Result<Vec<C64>> {
    let n = c.nrows();
    let one = C64::new(1.0, 0.0);
    let r = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) if i == j => C64::new(2.0 * alpha, 0.0),
        (true, false) => -c[(i, j - n)],
        (false, true) if i - n == j => one,
        _ => zero(),
    });
    let s = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => c[(j, i)].conj(),
        (false, false) if i == j => one,
        _ => zero(),
    });
    let gev = r
        .generalized_eigen(&s)
        .map_err(|e| Error::ConvergenceFailure(format!("generalized Schur: {e:?}")))?;
    let a = gev.S_a().column_vector();
    let b = gev.S_b().column_vector();
    let tiny = 1e-13 * scale.max(alpha.abs()).max(1.0);
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..2 * n {
        if a[i].norm() <= tiny && b[i].norm() <= tiny {
            return Err(Error::SingularPencil(format!(
                "det(R(alpha) - lambda S) vanishes identically at alpha = {alpha}"
            )));
        }
        if b[i].norm() > tiny * 1e-3 {
            out.push(a[i] / b[i]);
        }
    }
    Ok(out)
}
