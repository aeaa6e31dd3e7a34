//! Deterministic test matrices.
//!
//! Indices in the formulas are 1-based, as in the usual gallery definitions.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::levelset::HermitianParts;
use crate::linalg::{CsrMatrix, HermitianOperator};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParams(msg.into()))
    }
}

fn real_dense(n: usize, entry: impl Fn(usize, usize) -> f64) -> HermitianOperator {
    HermitianOperator::dense_trusted(Mat::from_fn(n, n, |i, j| re(entry(i + 1, j + 1))))
}

/// `A = diag(-3..3)` and `b_ij = 1/(i+j)` except `b_11 = b_77 = -1`.
pub fn cheng_higham7() -> (HermitianOperator, HermitianOperator) {
    let a = real_dense(7, |i, j| if i == j { i as f64 - 4.0 } else { 0.0 });
    let b = real_dense(7, |i, j| match (i, j) {
        (1, 1) | (7, 7) => -1.0,
        _ => 1.0 / (i + j) as f64,
    });
    (a, b)
}

/// `F_ij = |i - j|`.
pub fn fiedler(n: usize) -> Result<HermitianOperator> {
    require(n >= 1, "fiedler needs n >= 1")?;
    Ok(real_dense(n, |i, j| i.abs_diff(j) as f64))
}

/// `m_ii = i`, `m_ij = min(i, j) - 2`.
pub fn moler(n: usize) -> Result<HermitianOperator> {
    require(n >= 1, "moler needs n >= 1")?;
    Ok(real_dense(n, |i, j| {
        if i == j {
            i as f64
        } else {
            i.min(j) as f64 - 2.0
        }
    }))
}

/// Toeplitz: -1 on the subdiagonal, +1 on the diagonal and the first three superdiagonals.
pub fn grcar(n: usize) -> Result<Mat<C64>> {
    require(n >= 1, "grcar needs n >= 1")?;
    Ok(Mat::from_fn(n, n, |i, j| {
        if i == j + 1 {
            re(-1.0)
        } else if j >= i && j - i <= 3 {
            re(1.0)
        } else {
            re(0.0)
        }
    }))
}

/// Hermitian split `(A, B)` of the rotated Grcar matrix `G e^{-i pi/6}`.
pub fn grcar_pair(n: usize) -> Result<(HermitianOperator, HermitianOperator)> {
    let g = grcar(n)?;
    let rot = C64::from_polar(1.0, -PI / 6.0);
    let rotated = Mat::from_fn(n, n, |i, j| g[(i, j)] * rot);
    let parts = HermitianParts::from_complex(rotated.as_ref())?;
    Ok((parts.a(), parts.b()))
}

/// Tridiagonal with diagonal `(1, 1, a_3, ..., a_n)`, `a_j = 2 + j/n`, off-diagonal `i`, plus `0.5i I`,
/// rotated by `e^{i pi/6}`.
pub fn tridiag_nonsmooth(n: usize) -> Result<Mat<C64>> {
    require(n >= 2, "tridiag_nonsmooth needs n >= 2")?;
    let rot = C64::from_polar(1.0, PI / 6.0);
    Ok(Mat::from_fn(n, n, |i, j| {
        let v = if i == j {
            let d = if i < 2 { 1.0 } else { 2.0 + (i + 1) as f64 / n as f64 };
            C64::new(d, 0.5)
        } else if i.abs_diff(j) == 1 {
            C64::new(0.0, 1.0)
        } else {
            re(0.0)
        };
        v * rot
    }))
}

/// Coefficients of `lambda^2 M + lambda D + K`.
#[derive(Clone, Debug)]
pub struct Qep {
    pub mass: HermitianOperator,
    pub damping: HermitianOperator,
    pub stiffness: HermitianOperator,
}

fn sparse_tridiag(n: usize, diag: impl Fn(usize) -> f64, off: f64) -> Result<HermitianOperator> {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, re(diag(i))));
        if i + 1 < n {
            t.push((i, i + 1, re(off)));
            t.push((i + 1, i, re(off)));
        }
    }
    HermitianOperator::sparse(CsrMatrix::from_triplets(n, &t)?)
}

/// Damped mass-spring chain: `M = I`, `D = beta tridiag(-10, [20, 30, ..., 30, 20], -10)`,
/// `K = tridiag(-5, 15, -5)`.
pub fn qep_mass_spring(n: usize, beta: f64) -> Result<Qep> {
    require(n >= 2, "qep_mass_spring needs n >= 2")?;
    require(beta > 0.0, "beta must be positive")?;
    let mass = HermitianOperator::sparse(CsrMatrix::identity(n))?;
    let damping = sparse_tridiag(
        n,
        |i| beta * if i == 0 || i + 1 == n { 20.0 } else { 30.0 },
        -10.0 * beta,
    )?;
    let stiffness = sparse_tridiag(n, |_| 15.0, -5.0)?;
    Ok(Qep {
        mass,
        damping,
        stiffness,
    })
}

/// The 4x4 damped chain with `M = I`.
pub fn qep_small() -> Qep {
    let d = [
        [8.0, -4.0, 0.0, 0.0],
        [-4.0, 12.0, -4.0, 0.0],
        [0.0, -4.0, 12.0, -4.0],
        [0.0, 0.0, -4.0, 8.0],
    ];
    let k = [
        [2.0, -1.0, 0.0, 0.0],
        [-1.0, 3.0, -1.0, 0.0],
        [0.0, -1.0, 3.0, -1.0],
        [0.0, 0.0, -1.0, 2.0],
    ];
    Qep {
        mass: HermitianOperator::identity(4),
        damping: real_dense(4, |i, j| d[i - 1][j - 1]),
        stiffness: real_dense(4, |i, j| k[i - 1][j - 1]),
    }
}

/// `A1 = [[-K, 0], [0, M]]`, `B1 = -[[D, M], [M, 0]]`; the QEP is hyperbolic iff this pair is definite.
pub fn qep_linearization(q: &Qep) -> Result<(HermitianOperator, HermitianOperator)> {
    let n = q.mass.dim();
    for m in [&q.damping, &q.stiffness] {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
    }
    let blocks = |parts: &[(usize, usize, f64, &HermitianOperator)]| -> Result<HermitianOperator> {
        let mut t = Vec::new();
        for &(r0, c0, s, m) in parts {
            for (i, j, v) in m.to_sparse().triplets() {
                t.push((r0 + i, c0 + j, v * s));
            }
        }
        let csr = CsrMatrix::from_triplets(2 * n, &t)?;
        if q.mass.is_dense() && 2 * n < crate::linalg::DENSE_THRESHOLD {
            Ok(HermitianOperator::dense_trusted(csr.to_dense()))
        } else {
            HermitianOperator::sparse(csr)
        }
    };
    let a1 = blocks(&[(0, 0, -1.0, &q.stiffness), (n, n, 1.0, &q.mass)])?;
    let b1 = blocks(&[
        (0, 0, -1.0, &q.damping),
        (0, n, -1.0, &q.mass),
        (n, 0, -1.0, &q.mass),
    ])?;
    Ok((a1, b1))
}

/// Five-point Laplacian on a `k x k` grid.
pub fn poisson2d(k: usize) -> Result<HermitianOperator> {
    require(k >= 1, "poisson2d needs k >= 1")?;
    let n = k * k;
    let mut t = Vec::with_capacity(5 * n);
    for r in 0..k {
        for c in 0..k {
            let i = r * k + c;
            t.push((i, i, re(4.0)));
            if c + 1 < k {
                t.push((i, i + 1, re(-1.0)));
                t.push((i + 1, i, re(-1.0)));
            }
            if r + 1 < k {
                t.push((i, i + k, re(-1.0)));
                t.push((i + k, i, re(-1.0)));
            }
        }
    }
    HermitianOperator::sparse(CsrMatrix::from_triplets(n, &t)?)
}

/// General real sparse matrix with about `density n^2` entries uniform in `(-1, 1)`.
pub fn sparse_random(n: usize, density: f64, seed: u64) -> Result<CsrMatrix> {
    require(n >= 1, "sparse_random needs n >= 1")?;
    require(density > 0.0 && density <= 1.0, "density must lie in (0, 1]")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = (density * (n * n) as f64).round() as usize;
    let t: Vec<_> = (0..count)
        .map(|_| {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            (i, j, re(rng.random_range(-1.0..1.0)))
        })
        .collect();
    CsrMatrix::from_triplets(n, &t)
}

/// Hermitian split of `P + iR` with `P` the `k x k` grid Laplacian and `R = sparse_random`.
pub fn poisson_random_pair(k: usize, density: f64, seed: u64) -> Result<(HermitianOperator, HermitianOperator)> {
    let p = poisson2d(k)?;
    let r = sparse_random(k * k, density, seed)?;
    let n = k * k;
    let mut ta: Vec<_> = p.to_sparse().triplets().collect();
    let mut tb = Vec::new();
    for (i, j, v) in r.triplets() {
        // A = P + i (R - R^T)/2, B = (R + R^T)/2
        ta.push((i, j, C64::new(0.0, 0.5) * v));
        ta.push((j, i, C64::new(0.0, -0.5) * v));
        tb.push((i, j, v * 0.5));
        tb.push((j, i, v * 0.5));
    }
    Ok((
        HermitianOperator::sparse(CsrMatrix::from_triplets(n, &ta)?)?,
        HermitianOperator::sparse(CsrMatrix::from_triplets(n, &tb)?)?,
    ))
}

/// `S = [[A, B^T], [B, -C]]` with its signature matrix `J = diag(I_n, -I_m)`.
#[derive(Clone, Debug)]
pub struct Saddle {
    pub matrix: HermitianOperator,
    pub signature: HermitianOperator,
    pub n: usize,
    pub m: usize,
}

/// Seeded saddle-point matrix: `A` a shifted Gram matrix (SPD), `C` a scaled Gram matrix (PSD),
/// `B` small and dense.
pub fn synthetic_saddle(n: usize, m: usize, seed: u64) -> Result<Saddle> {
    require(n >= 1 && m >= 1, "synthetic_saddle needs n, m >= 1")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussianish = |rows: usize, cols: usize| -> Vec<Vec<f64>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    };
    let x = gaussianish(n, n);
    let y = gaussianish(m, m);
    let coupling = gaussianish(m, n);
    let gram = |g: &[Vec<f64>], i: usize, j: usize| -> f64 {
        g.iter().map(|row| row[i] * row[j]).sum::<f64>() / g.len() as f64
    };
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let shift = if i == j { 1.0 } else { 0.0 };
            t.push((i, j, re(gram(&x, i, j) + shift)));
        }
    }
    for i in 0..m {
        for j in 0..m {
            t.push((n + i, n + j, re(-0.1 * gram(&y, i, j))));
        }
        for j in 0..n {
            let b = 0.02 * coupling[i][j];
            t.push((n + i, j, re(b)));
            t.push((j, n + i, re(b)));
        }
    }
    let dim = n + m;
    let matrix = HermitianOperator::sparse(CsrMatrix::from_triplets(dim, &t)?)?;
    let sig: Vec<_> = (0..dim)
        .map(|i| (i, i, re(if i < n { 1.0 } else { -1.0 })))
        .collect();
    let signature = HermitianOperator::sparse(CsrMatrix::from_triplets(dim, &sig)?)?;
    Ok(Saddle {
        matrix,
        signature,
        n,
        m,
    })
}

/// A named family with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum GallerySpec {
    ChengHigham7,
    Fiedler { n: usize },
    Moler { n: usize },
    Grcar { n: usize },
    TridiagNonsmooth { n: usize },
    QepMassSpring { n: usize, beta: f64 },
    QepLinearization { n: usize, beta: f64 },
    Poisson2d { k: usize },
    SparseRandom { n: usize, density: f64, seed: u64 },
    SyntheticSaddle { n: usize, m: usize, seed: u64 },
}

/// A generated matrix: Hermitian ones keep their operator form.
#[derive(Clone, Debug)]
pub enum GalleryMatrix {
    Hermitian(HermitianOperator),
    General(Mat<C64>),
    GeneralSparse(CsrMatrix),
}

/// Generates the named matrices of a family, each with a short role label.
pub fn generate(spec: &GallerySpec) -> Result<Vec<(&'static str, GalleryMatrix)>> {
    use GalleryMatrix::{General, GeneralSparse, Hermitian};
    Ok(match *spec {
        GallerySpec::ChengHigham7 => {
            let (a, b) = cheng_higham7();
            vec![("A", Hermitian(a)), ("B", Hermitian(b))]
        }
        GallerySpec::Fiedler { n } => vec![("F", Hermitian(fiedler(n)?))],
        GallerySpec::Moler { n } => vec![("M", Hermitian(moler(n)?))],
        GallerySpec::Grcar { n } => {
            let (a, b) = grcar_pair(n)?;
            vec![("G", General(grcar(n)?)), ("A", Hermitian(a)), ("B", Hermitian(b))]
        }
        GallerySpec::TridiagNonsmooth { n } => {
            let c = tridiag_nonsmooth(n)?;
            let parts = HermitianParts::from_complex(c.as_ref())?;
            vec![("C", General(c)), ("A", Hermitian(parts.a())), ("B", Hermitian(parts.b()))]
        }
        GallerySpec::QepMassSpring { n, beta } => {
            let q = qep_mass_spring(n, beta)?;
            vec![
                ("M", Hermitian(q.mass)),
                ("D", Hermitian(q.damping)),
                ("K", Hermitian(q.stiffness)),
            ]
        }
        GallerySpec::QepLinearization { n, beta } => {
            let (a, b) = qep_linearization(&qep_mass_spring(n, beta)?)?;
            vec![("A1", Hermitian(a)), ("B1", Hermitian(b))]
        }
        GallerySpec::Poisson2d { k } => vec![("P", Hermitian(poisson2d(k)?))],
        GallerySpec::SparseRandom { n, density, seed } => {
            vec![("R", GeneralSparse(sparse_random(n, density, seed)?))]
        }
        GallerySpec::SyntheticSaddle { n, m, seed } => {
            let s = synthetic_saddle(n, m, seed)?;
            vec![("S", Hermitian(s.matrix)), ("J", Hermitian(s.signature))]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigvals, EnvelopeCholesky};

    fn real_rows(m: &HermitianOperator) -> Vec<Vec<f64>> {
        let d = m.to_dense();
        (0..d.nrows())
            .map(|i| (0..d.ncols()).map(|j| d[(i, j)].re).collect())
            .collect()
    }

    #[test]
    fn small_fiedler_and_moler() {
        assert_eq!(
            real_rows(&fiedler(3).unwrap()),
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]
        );
        assert_eq!(
            real_rows(&moler(3).unwrap()),
            vec![vec![1.0, -1.0, -1.0], vec![-1.0, 2.0, 0.0], vec![-1.0, 0.0, 3.0]]
        );
    }

    #[test]
    fn cheng_higham_entries() {
        let (a, b) = cheng_higham7();
        assert_eq!(a.get(0, 0).re, -3.0);
        assert_eq!(a.get(6, 6).re, 3.0);
        assert_eq!(b.get(0, 1).re, 1.0 / 3.0);
        assert_eq!(b.get(0, 0).re, -1.0);
        assert_eq!(b.get(6, 6).re, -1.0);
        assert_eq!(b.get(1, 1).re, 0.25);
    }

    #[test]
    fn grcar_band() {
        let g = grcar(6).unwrap();
        assert_eq!(g[(1, 0)].re, -1.0);
        assert_eq!(g[(0, 3)].re, 1.0);
        assert_eq!(g[(0, 4)].re, 0.0);
        assert_eq!(g[(2, 0)].re, 0.0);
    }

    #[test]
    fn outputs_are_hermitian_and_deterministic() {
        let specs = [
            GallerySpec::ChengHigham7,
            GallerySpec::Grcar { n: 12 },
            GallerySpec::TridiagNonsmooth { n: 10 },
            GallerySpec::QepLinearization { n: 6, beta: 0.5 },
            GallerySpec::Poisson2d { k: 4 },
            GallerySpec::SyntheticSaddle { n: 8, m: 3, seed: 5 },
        ];
        for spec in &specs {
            let first = generate(spec).unwrap();
            let second = generate(spec).unwrap();
            for ((_, x), (_, y)) in first.iter().zip(&second) {
                if let (GalleryMatrix::Hermitian(x), GalleryMatrix::Hermitian(y)) = (x, y) {
                    // Re-checking through the validating constructor exercises the symmetry invariant.
                    assert!(HermitianOperator::dense(x.to_dense()).is_ok(), "{spec:?}");
                    assert_eq!(x.to_dense(), y.to_dense());
                }
            }
        }
        let r1 = sparse_random(50, 0.1, 3).unwrap();
        assert_eq!(r1, sparse_random(50, 0.1, 3).unwrap());
        assert!(r1.nnz() > 150 && r1.nnz() <= 250);
    }

    #[test]
    fn poisson_is_positive_definite() {
        for k in [1, 2, 5, 17, 30] {
            let ev = hermitian_eigvals(&poisson2d(k).unwrap()).unwrap();
            assert!(*ev.last().unwrap() > 0.0);
        }
    }

    #[test]
    fn saddle_blocks_are_certified() {
        let s = synthetic_saddle(20, 7, 11).unwrap();
        let d = s.matrix.to_dense();
        let block = |lo: usize, len: usize, sign: f64| {
            let t: Vec<_> = (0..len)
                .flat_map(|i| (0..len).map(move |j| (i, j)))
                .map(|(i, j)| (i, j, d[(lo + i, lo + j)] * sign))
                .collect();
            CsrMatrix::from_triplets(len, &t).unwrap()
        };
        let a = block(0, 20, 1.0);
        let perm: Vec<usize> = (0..20).collect();
        let first = crate::linalg::envelope_profile(&a, &perm);
        assert!(EnvelopeCholesky::factor(&a, 0.0, 1.0, &perm, &first).is_some());
        // -C is negative semidefinite, so C + tiny I factors.
        let c = block(20, 7, -1.0);
        let perm: Vec<usize> = (0..7).collect();
        let first = crate::linalg::envelope_profile(&c, &perm);
        assert!(EnvelopeCholesky::factor(&c, 1e-12, 1.0, &perm, &first).is_some());
    }

    #[test]
    fn invalid_parameters() {
        assert!(fiedler(0).is_err());
        assert!(qep_mass_spring(5, -1.0).is_err());
        assert!(sparse_random(5, 1.5, 0).is_err());
    }
}
