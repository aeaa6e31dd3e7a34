//! Dense and sparse Hermitian spectral kernels.

mod krylov;
mod pencil;
mod sparse;

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub use pencil::{pencil_unit_eigs, DEFAULT_TOL_CIRCLE};
pub use sparse::{envelope_profile, rcm_order, CsrMatrix, EnvelopeCholesky};

/// Below this dimension every spectral computation densifies.
pub const DENSE_THRESHOLD: usize = 1000;
/// Relative residual accepted for computed eigenpairs.
pub const EIG_RESIDUAL_TOL: f64 = 1e-10;
pub const DEFAULT_DROP_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

pub(crate) fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(Mat<C64>),
    Sparse(CsrMatrix),
}

/// A Hermitian matrix held either densely or as a sparse matrix.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    storage: Storage,
}

impl HermitianOperator {
    /// Wraps a dense matrix after checking Hermitian symmetry.
    pub fn dense(m: Mat<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let asym = dense_asymmetry(m.as_ref());
        let tolerance = SYMMETRY_TOL * m.norm_l2().max(1.0);
        if asym > tolerance {
            return Err(Error::NonHermitianInput {
                asymmetry: asym,
                tolerance,
            });
        }
        Ok(Self {
            storage: Storage::Dense(m),
        })
    }

    /// Dense operator from real entries given row by row.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::dense(Mat::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn sparse(m: CsrMatrix) -> Result<Self> {
        let asym = m.asymmetry();
        let tolerance = SYMMETRY_TOL * m.frobenius_norm().max(1.0);
        if asym > tolerance {
            return Err(Error::NonHermitianInput {
                asymmetry: asym,
                tolerance,
            });
        }
        Ok(Self {
            storage: Storage::Sparse(m),
        })
    }

    // Symmetrizes instead of checking; for results of exact Hermitian-preserving operations.
    pub(crate) fn dense_trusted(mut m: Mat<C64>) -> Self {
        let n = m.nrows();
        for j in 0..n {
            m[(j, j)].im = 0.0;
            for i in j + 1..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self {
            storage: Storage::Dense(m),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            storage: Storage::Dense(Mat::zeros(n, n)),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            storage: Storage::Dense(Mat::identity(n, n)),
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            storage: Storage::Dense(Mat::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(d[i], 0.0)
                } else {
                    zero()
                }
            })),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Sparse(s) => s.dim(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn as_dense(&self) -> Option<&Mat<C64>> {
        match &self.storage {
            Storage::Dense(m) => Some(m),
            Storage::Sparse(_) => None,
        }
    }

    pub fn as_sparse(&self) -> Option<&CsrMatrix> {
        match &self.storage {
            Storage::Sparse(s) => Some(s),
            Storage::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => s.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(m) => CsrMatrix::from_dense(m),
            Storage::Sparse(s) => s.clone(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Sparse(s) => s.get(i, j),
        }
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        match &self.storage {
            Storage::Dense(m) => {
                y.fill(zero());
                for (j, &xj) in x.iter().enumerate() {
                    if xj == zero() {
                        continue;
                    }
                    for (yi, &mij) in y.iter_mut().zip(m.col_as_slice(j)) {
                        *yi += mij * xj;
                    }
                }
            }
            Storage::Sparse(s) => s.apply_into(x, y),
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![zero(); self.dim()];
        self.apply_into(x, &mut y);
        y
    }

    /// `v* M v`.
    pub fn quadratic_form(&self, v: &[C64]) -> C64 {
        dot(v, &self.apply(v))
    }

    pub fn frobenius_norm(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.norm_l2(),
            Storage::Sparse(s) => s.frobenius_norm(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.frobenius_norm() == 0.0
    }

    /// `V* M V` for a matrix with orthonormal columns.
    pub fn project(&self, v: MatRef<'_, C64>) -> Mat<C64> {
        let mv = match &self.storage {
            Storage::Dense(m) => m * v,
            Storage::Sparse(s) => {
                let mut out = Mat::<C64>::zeros(s.dim(), v.ncols());
                let mut x = vec![zero(); s.dim()];
                for j in 0..v.ncols() {
                    for (i, xi) in x.iter_mut().enumerate() {
                        *xi = v[(i, j)];
                    }
                    s.apply_into(&x, out.col_as_slice_mut(j));
                }
                out
            }
        };
        let p = v.adjoint() * &mv;
        Self::dense_trusted(p).to_dense()
    }

    /// `sum_k c_k M_k`; dense when every term is dense.
    pub fn lincomb(terms: &[(f64, &HermitianOperator)]) -> Result<Self> {
        let Some(&(_, first)) = terms.first() else {
            return Err(Error::InvalidParams("empty linear combination".into()));
        };
        let n = first.dim();
        for (_, t) in terms {
            if t.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.dim(),
                });
            }
        }
        if terms.iter().all(|(_, t)| t.is_dense()) {
            let mut out = Mat::<C64>::zeros(n, n);
            for &(c, t) in terms {
                if c == 0.0 {
                    continue;
                }
                let m = t.as_dense().unwrap();
                for j in 0..n {
                    for (o, &x) in out.col_as_slice_mut(j).iter_mut().zip(m.col_as_slice(j)) {
                        *o += x * c;
                    }
                }
            }
            Ok(Self {
                storage: Storage::Dense(out),
            })
        } else {
            let owned: Vec<CsrMatrix> = terms.iter().map(|(_, t)| t.to_sparse()).collect();
            let refs: Vec<(f64, &CsrMatrix)> =
                terms.iter().zip(&owned).map(|((c, _), m)| (*c, m)).collect();
            Ok(Self {
                storage: Storage::Sparse(CsrMatrix::lincomb(n, &refs)),
            })
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::lincomb(&[(c, self)]).expect("single term")
    }
}

fn dense_asymmetry(m: MatRef<'_, C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub(crate) fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Full spectral decomposition; `values` descending, column `j` of `vectors` pairs with `values[j]`.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
}

fn checked_dense(m: &HermitianOperator) -> Result<std::borrow::Cow<'_, Mat<C64>>> {
    if m.dim() == 0 {
        return Err(Error::InvalidParams("empty matrix".into()));
    }
    Ok(match m.as_dense() {
        Some(d) => std::borrow::Cow::Borrowed(d),
        None => std::borrow::Cow::Owned(m.to_dense()),
    })
}

pub fn hermitian_eig(m: &HermitianOperator) -> Result<EigDecomposition> {
    let d = checked_dense(m)?;
    let evd = d
        .as_ref()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::ConvergenceFailure(format!("dense Hermitian eigensolver: {e:?}")))?;
    let n = d.nrows();
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).rev().map(|i| s[i].re).collect();
    let vectors = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok(EigDecomposition { values, vectors })
}

/// Eigenvalues only, descending.
pub fn hermitian_eigvals(m: &HermitianOperator) -> Result<Vec<f64>> {
    let d = checked_dense(m)?;
    let mut v = d
        .as_ref()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::ConvergenceFailure(format!("dense Hermitian eigensolver: {e:?}")))?;
    v.reverse();
    Ok(v)
}

/// Top eigenvalue cluster with orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct TopEigenpairs {
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
}

impl TopEigenpairs {
    pub fn lambda_max(&self) -> f64 {
        self.values[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.col_as_slice(j).to_vec()
    }
}

/// `lambda_1` and every `lambda_j >= lambda_1 - eps_cluster`, at most `max_pairs` of them.
pub fn largest_eigpairs(
    m: &HermitianOperator,
    eps_cluster: f64,
    max_pairs: usize,
) -> Result<TopEigenpairs> {
    if max_pairs == 0 {
        return Err(Error::InvalidParams("max_pairs must be at least 1".into()));
    }
    if m.is_dense() || m.dim() < DENSE_THRESHOLD {
        let eig = hermitian_eig(m)?;
        let top = eig.values[0];
        let k = eig
            .values
            .iter()
            .take(max_pairs)
            .take_while(|&&v| top - v <= eps_cluster)
            .count();
        let n = m.dim();
        return Ok(TopEigenpairs {
            values: eig.values[..k].to_vec(),
            vectors: Mat::from_fn(n, k, |i, j| eig.vectors[(i, j)]),
        });
    }
    krylov::sparse_top_eigpairs(m.as_sparse().expect("sparse storage"), eps_cluster, max_pairs)
}

/// An upper bound `u` on the spectral norm with `u <= 1.01 ||M||`.
pub fn spectral_norm_ub(m: &HermitianOperator) -> Result<f64> {
    if m.dim() == 0 || m.is_zero() {
        return Ok(0.0);
    }
    if m.is_dense() || m.dim() < DENSE_THRESHOLD {
        let v = hermitian_eigvals(m)?;
        let extreme = v[0].abs().max(v[v.len() - 1].abs());
        return Ok(extreme * (1.0 + 1e-12));
    }
    let est = krylov::extreme_ritz_modulus(m.as_sparse().unwrap())?;
    Ok((est * 1.01).min(m.as_sparse().unwrap().gershgorin_bound()))
}

/// Orthonormal columns spanning a subspace of `C^dim`.
#[derive(Clone, Debug)]
pub struct Basis {
    dim: usize,
    cols: Vec<Vec<C64>>,
}

impl Basis {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            cols: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let cols = (0..dim)
            .map(|j| {
                let mut e = vec![zero(); dim];
                e[j] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        Self { dim, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis vectors.
    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn column(&self, j: usize) -> &[C64] {
        &self.cols[j]
    }

    pub fn to_mat(&self) -> Mat<C64> {
        Mat::from_fn(self.dim, self.cols.len(), |i, j| self.cols[j][i])
    }

    /// `max |V*V - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, u) in self.cols.iter().enumerate() {
            for (b, w) in self.cols.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot(u, w) - target).norm());
            }
        }
        worst
    }
}

/// Appends each `w` orthogonalized (twice) against the growing basis, dropping
/// those whose remaining norm is at most `drop_tol * ||w||`.
pub fn orthonormal_extend(v: &Basis, w: &[Vec<C64>], drop_tol: f64) -> Result<Basis> {
    let mut out = v.clone();
    for x in w {
        if x.len() != v.dim {
            return Err(Error::DimensionMismatch {
                expected: v.dim,
                found: x.len(),
            });
        }
        let original = norm(x);
        if original == 0.0 {
            continue;
        }
        let mut r = x.clone();
        for _ in 0..2 {
            for q in &out.cols {
                let c = dot(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= qi * c;
                }
            }
        }
        let rest = norm(&r);
        if rest <= drop_tol * original {
            continue;
        }
        r.iter_mut().for_each(|ri| *ri /= rest);
        out.cols.push(r);
    }
    Ok(out)
}

/// Convenience for extending with the columns of a matrix.
pub fn orthonormal_extend_mat(v: &Basis, w: MatRef<'_, C64>, drop_tol: f64) -> Result<Basis> {
    let cols: Vec<Vec<C64>> = (0..w.ncols())
        .map(|j| (0..w.nrows()).map(|i| w[(i, j)]).collect())
        .collect();
    orthonormal_extend(v, &cols, drop_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn cheng_higham_b() -> HermitianOperator {
        let rows: Vec<Vec<f64>> = (1..=7)
            .map(|i| {
                (1..=7)
                    .map(|j| {
                        if (i, j) == (1, 1) || (i, j) == (7, 7) {
                            -1.0
                        } else {
                            1.0 / (i + j) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        HermitianOperator::from_real_rows(&rows).unwrap()
    }

    // Number of eigenvalues below `x` from the signs of an unpivoted LDL^T of (B - xI).
    fn count_below(b: &[Vec<f64>], x: f64) -> usize {
        let n = b.len();
        let mut a: Vec<Vec<f64>> = b.to_vec();
        for i in 0..n {
            a[i][i] -= x;
        }
        let mut neg = 0;
        for k in 0..n {
            let d = a[k][k];
            if d < 0.0 {
                neg += 1;
            }
            for i in k + 1..n {
                let l = a[i][k] / d;
                for j in k + 1..n {
                    a[i][j] -= l * a[k][j];
                }
            }
        }
        neg
    }

    fn bisection_eigs(b: &[Vec<f64>]) -> Vec<f64> {
        let n = b.len();
        let bound: f64 = b.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
        (0..n)
            .map(|k| {
                // k-th smallest eigenvalue: smallest x with count_below(x) > k.
                let (mut lo, mut hi) = (-bound, bound);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if count_below(b, mid) > k {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .rev()
            .collect()
    }

    #[test]
    fn identity_spectrum() {
        let e = hermitian_eig(&HermitianOperator::identity(3)).unwrap();
        assert_eq!(e.values.len(), 3);
        for v in &e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_spectrum_descending() {
        let d: Vec<f64> = (-3..=3).map(f64::from).collect();
        let e = hermitian_eig(&HermitianOperator::diagonal(&d)).unwrap();
        let expect = [3.0, 2.0, 1.0, 0.0, -1.0, -2.0, -3.0];
        for (v, x) in e.values.iter().zip(expect) {
            assert!((v - x).abs() < 1e-14);
        }
    }

    #[test]
    fn cheng_higham_b_matches_inertia_bisection() {
        let b = cheng_higham_b();
        let rows: Vec<Vec<f64>> = (0..7).map(|i| (0..7).map(|j| b.get(i, j).re).collect()).collect();
        let oracle = bisection_eigs(&rows);
        let e = hermitian_eig(&b).unwrap();
        for (v, o) in e.values.iter().zip(&oracle) {
            assert!((v - o).abs() < 1e-8, "{v} vs {o}");
        }
    }

    #[test]
    fn decomposition_residuals_and_orthogonality() {
        let b = cheng_higham_b();
        let e = hermitian_eig(&b).unwrap();
        let scale = e.values[0].abs().max(e.values[6].abs());
        for j in 0..7 {
            let v: Vec<C64> = e.vectors.col_as_slice(j).to_vec();
            let mv = b.apply(&v);
            let r: f64 = mv
                .iter()
                .zip(&v)
                .map(|(a, x)| (a - x * e.values[j]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(r <= EIG_RESIDUAL_TOL * scale);
        }
        let vv = e.vectors.adjoint() * &e.vectors;
        for i in 0..7 {
            for j in 0..7 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((vv[(i, j)] - t).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(1.0) } else { c(0.0) });
        assert!(matches!(
            HermitianOperator::dense(m),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn cluster_rule() {
        let m = HermitianOperator::diagonal(&[2.0, 2.0 - 1e-9, 0.0]);
        assert_eq!(largest_eigpairs(&m, 1e-6, 10).unwrap().len(), 2);
        let m = HermitianOperator::diagonal(&[2.0, 1.0, 0.0]);
        assert_eq!(largest_eigpairs(&m, 1e-6, 10).unwrap().len(), 1);
        let m = HermitianOperator::diagonal(&[1.0, 1.0, 1.0]);
        assert_eq!(largest_eigpairs(&m, 1e-6, 2).unwrap().len(), 2);
    }

    #[test]
    fn norm_bounds() {
        let u = spectral_norm_ub(&HermitianOperator::diagonal(&[1.0, -5.0])).unwrap();
        assert!((5.0..=5.05).contains(&u));
        let u = spectral_norm_ub(&HermitianOperator::identity(4)).unwrap();
        assert!((1.0..=1.01).contains(&u));
    }

    #[test]
    fn fiedler_norm_within_one_percent() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i: i32| (0..10).map(|j: i32| (i - j).abs() as f64).collect())
            .collect();
        let f = HermitianOperator::from_real_rows(&rows).unwrap();
        let e = hermitian_eigvals(&f).unwrap();
        let exact = e[0].abs().max(e[9].abs());
        let u = spectral_norm_ub(&f).unwrap();
        assert!(u >= exact && u <= 1.01 * exact);
    }

    #[test]
    fn extend_drops_dependent_vectors() {
        let e1 = vec![c(1.0), c(0.0)];
        let e2 = vec![c(0.0), c(1.0)];
        let v = orthonormal_extend(&Basis::empty(2), &[e1.clone()], DEFAULT_DROP_TOL).unwrap();
        let same = orthonormal_extend(&v, &[e1.clone()], DEFAULT_DROP_TOL).unwrap();
        assert_eq!(same.len(), 1);
        let both = orthonormal_extend(&v, &[e2], DEFAULT_DROP_TOL).unwrap();
        assert_eq!(both.len(), 2);
        let mixed = orthonormal_extend(&v, &[vec![c(1.0), c(1.0)]], DEFAULT_DROP_TOL).unwrap();
        assert_eq!(mixed.len(), 2);
        let col = mixed.column(1);
        assert!(col[0].norm() < 1e-15);
        assert!((col[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_equals_eigenvalue_sum() {
        let b = cheng_higham_b();
        let e = hermitian_eig(&b).unwrap();
        let tr: f64 = (0..7).map(|i| b.get(i, i).re).sum();
        let s: f64 = e.values.iter().sum();
        assert!((tr - s).abs() < 1e-10 * 7.0 * e.values[0].abs().max(1.0));
    }

    #[test]
    fn lincomb_keeps_dense_when_possible() {
        let a = HermitianOperator::identity(3);
        let b = HermitianOperator::diagonal(&[1.0, 2.0, 3.0]);
        let s = HermitianOperator::lincomb(&[(2.0, &a), (-1.0, &b)]).unwrap();
        assert!(s.is_dense());
        assert_eq!(s.get(2, 2), c(-1.0));
        let sp = HermitianOperator::sparse(CsrMatrix::identity(3)).unwrap();
        let mixed = HermitianOperator::lincomb(&[(1.0, &sp), (1.0, &b)]).unwrap();
        assert!(!mixed.is_dense());
        assert_eq!(mixed.get(1, 1), c(3.0));
    }
}
