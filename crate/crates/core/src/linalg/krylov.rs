//! Block Krylov eigensolver for the top of the spectrum of large sparse Hermitian matrices.
//!
//! The subspace is generated either by shift-invert with an envelope Cholesky factor of
//! `sigma*I - M` (sigma above the spectrum) or, when the profile is too wide, by `M` itself
//! with restarts. Ritz pairs are always extracted with `M`, so residuals are exact.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::{envelope_profile, rcm_order, CsrMatrix, EnvelopeCholesky};
use super::{dot, norm, zero, TopEigenpairs, EIG_RESIDUAL_TOL};
use crate::error::{Error, Result};

const START_SEED: u64 = 0x6b72_796c_6f76;
const EXPLORE_DIM: usize = 40;
const MAX_CYCLES: usize = 60;
const MAX_PLAIN_CYCLES: usize = 400;
// Envelope factorization cost (multiply-adds) above which we fall back to plain restarts.
const MAX_FACTOR_WORK: f64 = 4e9;

struct Ritz {
    values: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    residuals: Vec<f64>,
}

fn random_block(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<C64>> {
    (0..k)
        .map(|_| {
            (0..n)
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect()
}

// Orthogonalizes candidates against `q` (two passes) and appends survivors.
fn orth_append(q: &mut Vec<Vec<C64>>, cands: Vec<Vec<C64>>, max_dim: usize) -> Vec<usize> {
    let mut added = Vec::new();
    for mut x in cands {
        if q.len() >= max_dim {
            break;
        }
        let n0 = norm(&x);
        if n0 == 0.0 || !n0.is_finite() {
            continue;
        }
        for _ in 0..2 {
            for b in q.iter() {
                let c = dot(b, &x);
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi -= bi * c;
                }
            }
        }
        let n1 = norm(&x);
        if n1 <= 1e-10 * n0 {
            continue;
        }
        x.iter_mut().for_each(|v| *v /= n1);
        q.push(x);
        added.push(q.len() - 1);
    }
    added
}

fn krylov_basis(
    op: &mut dyn FnMut(&[C64], &mut [C64]),
    start: Vec<Vec<C64>>,
    max_dim: usize,
) -> Vec<Vec<C64>> {
    let n = start.first().map_or(0, Vec::len);
    let mut q = Vec::with_capacity(max_dim);
    let mut block = orth_append(&mut q, start, max_dim);
    while q.len() < max_dim && !block.is_empty() {
        let images = block
            .iter()
            .map(|&j| {
                let mut y = vec![zero(); n];
                op(&q[j], &mut y);
                y
            })
            .collect();
        block = orth_append(&mut q, images, max_dim);
    }
    q
}

fn rayleigh_ritz(q: &[Vec<C64>], m: &CsrMatrix) -> Result<Ritz> {
    let n = m.dim();
    let k = q.len();
    let qm = Mat::from_fn(n, k, |i, j| q[j][i]);
    let mut mq = Mat::<C64>::zeros(n, k);
    for j in 0..k {
        m.apply_into(&q[j], mq.col_as_slice_mut(j));
    }
    let t = qm.adjoint() * &mq;
    let t = Mat::from_fn(k, k, |i, j| (t[(i, j)] + t[(j, i)].conj()) * 0.5);
    let evd = t
        .as_ref()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::ConvergenceFailure(format!("Rayleigh-Ritz step: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let y = &qm * u;
    let my = &mq * u;
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for j in (0..k).rev() {
        let theta = s[j].re;
        let v: Vec<C64> = y.col_as_slice(j).to_vec();
        let r = my
            .col_as_slice(j)
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * theta).norm_sqr())
            .sum::<f64>()
            .sqrt();
        values.push(theta);
        vectors.push(v);
        residuals.push(r);
    }
    Ok(Ritz {
        values,
        vectors,
        residuals,
    })
}

fn cluster_count(values: &[f64], eps: f64, max_pairs: usize) -> usize {
    values
        .iter()
        .take(max_pairs)
        .take_while(|&&v| values[0] - v <= eps)
        .count()
}

// Cluster size and whether it is settled: the cluster pairs have converged and the next Ritz
// value is either converged or provably below the cluster window.
fn converged(ritz: &Ritz, eps: f64, max_pairs: usize, tol: f64) -> (usize, bool) {
    let k = cluster_count(&ritz.values, eps, max_pairs);
    let cluster_ok = ritz.residuals[..k].iter().all(|&r| r <= tol);
    let next_ok = k >= ritz.values.len()
        || k >= max_pairs
        || ritz.residuals[k] <= tol
        || ritz.values[k] + ritz.residuals[k] < ritz.values[0] - eps;
    (k, cluster_ok && next_ok)
}

// A block must hold the whole current cluster estimate plus one to resolve it.
fn grown_block(bs: usize, cluster: usize, max_pairs: usize, n: usize) -> usize {
    bs.max((cluster + 1).min(max_pairs + 1)).min(n)
}

fn explore(m: &CsrMatrix, rng: &mut ChaCha8Rng) -> Result<Ritz> {
    let n = m.dim();
    let start = random_block(n, 2.min(n), rng);
    let q = krylov_basis(&mut |x, y| m.apply_into(x, y), start, EXPLORE_DIM.min(n));
    rayleigh_ritz(&q, m)
}

fn starting_block(ritz: &Ritz, bs: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<C64>> {
    let mut start: Vec<Vec<C64>> = ritz.vectors.iter().take(bs).cloned().collect();
    if start.len() < bs {
        start.extend(random_block(n, bs - start.len(), rng));
    }
    start
}

struct ShiftInvert {
    perm: Vec<usize>,
    first: Vec<usize>,
    bound: f64,
}

impl ShiftInvert {
    fn new(m: &CsrMatrix) -> Option<Self> {
        let perm = rcm_order(m);
        let first = envelope_profile(m, &perm);
        let work: f64 = first
            .iter()
            .enumerate()
            .map(|(i, &f)| ((i - f) as f64).powi(2))
            .sum();
        (work <= MAX_FACTOR_WORK).then(|| Self {
            perm,
            first,
            bound: m.gershgorin_bound(),
        })
    }

    // Factors sigma*I - M for the smallest sigma = estimate + delta * 4^j that succeeds.
    fn factor_above(
        &self,
        m: &CsrMatrix,
        estimate: f64,
        delta: f64,
    ) -> Result<(f64, EnvelopeCholesky)> {
        let mut d = delta;
        loop {
            let sigma = estimate + d;
            if let Some(f) = EnvelopeCholesky::factor(m, sigma, -1.0, &self.perm, &self.first) {
                return Ok((sigma, f));
            }
            if sigma > 2.0 * self.bound + 1.0 {
                return Err(Error::ConvergenceFailure(
                    "shifted factorization failed above the Gershgorin bound".into(),
                ));
            }
            d *= 4.0;
        }
    }
}

fn solve_shift_invert(
    m: &CsrMatrix,
    si: &ShiftInvert,
    mut ritz: Ritz,
    eps: f64,
    max_pairs: usize,
    bs: usize,
    tol: f64,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Ritz> {
    let n = m.dim();
    let mut bs = bs;
    let floor = 1e-9 * scale;
    let (mut sigma, mut fac) =
        si.factor_above(m, ritz.values[0], (4.0 * ritz.residuals[0]).max(1e-6 * scale))?;
    for _ in 0..MAX_CYCLES {
        let dim = (bs * 8).max(24).min(n);
        let start = starting_block(&ritz, bs, n, rng);
        let q = krylov_basis(&mut |x, y| fac.solve_into(x, y), start, dim);
        ritz = rayleigh_ritz(&q, m)?;
        let (k, ok) = converged(&ritz, eps, max_pairs, tol);
        if ok {
            return Ok(ritz);
        }
        bs = grown_block(bs, k, max_pairs, n);
        let target = (2.0 * ritz.residuals[0]).max(floor);
        if sigma - ritz.values[0] > 4.0 * target {
            (sigma, fac) = si.factor_above(m, ritz.values[0], target)?;
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "shift-invert Lanczos: residual {:.3e} above {:.3e} after {MAX_CYCLES} cycles",
        ritz.residuals[0], tol
    )))
}

fn solve_plain(
    m: &CsrMatrix,
    mut ritz: Ritz,
    eps: f64,
    max_pairs: usize,
    bs: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Ritz> {
    let n = m.dim();
    let mut bs = bs;
    for _ in 0..MAX_PLAIN_CYCLES {
        let dim = (bs * 20).max(80).min(n);
        let start = starting_block(&ritz, (bs + 4).min(n), n, rng);
        let q = krylov_basis(&mut |x, y| m.apply_into(x, y), start, dim);
        ritz = rayleigh_ritz(&q, m)?;
        let (k, ok) = converged(&ritz, eps, max_pairs, tol);
        if ok {
            return Ok(ritz);
        }
        bs = grown_block(bs, k, max_pairs, n);
    }
    Err(Error::ConvergenceFailure(format!(
        "restarted Lanczos: residual {:.3e} above {:.3e} after {MAX_PLAIN_CYCLES} restarts",
        ritz.residuals[0], tol
    )))
}

pub(crate) fn sparse_top_eigpairs(
    m: &CsrMatrix,
    eps: f64,
    max_pairs: usize,
) -> Result<TopEigenpairs> {
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let explored = explore(m, &mut rng)?;
    let scale = explored.values[0]
        .abs()
        .max(explored.values.last().unwrap().abs())
        .max(f64::MIN_POSITIVE);
    let tol = EIG_RESIDUAL_TOL * scale;
    let si = ShiftInvert::new(m);

    let mut bs = (max_pairs + 1).clamp(2, 4).min(n);
    let mut ritz = explored;
    loop {
        ritz = match &si {
            Some(si) => {
                solve_shift_invert(m, si, ritz, eps, max_pairs, bs, tol, scale, &mut rng)?
            }
            None => solve_plain(m, ritz, eps, max_pairs, bs, tol, &mut rng)?,
        };
        let (k, _) = converged(&ritz, eps, max_pairs, tol);
        // A block no larger than the multiplicity may miss copies; widen and re-check.
        if k + 1 < bs || bs >= n || k >= max_pairs {
            let vectors = Mat::from_fn(n, k, |i, j| ritz.vectors[j][i]);
            return Ok(TopEigenpairs {
                values: ritz.values[..k].to_vec(),
                vectors,
            });
        }
        bs = (k + 4).min(n);
    }
}

/// Largest Ritz value modulus after the extreme pairs settle to three digits.
pub(crate) fn extreme_ritz_modulus(m: &CsrMatrix) -> Result<f64> {
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut ritz = explore(m, &mut rng)?;
    for _ in 0..50 {
        let last = ritz.values.len() - 1;
        let (top, bottom) = (ritz.values[0], ritz.values[last]);
        let ok_top = ritz.residuals[0] <= 1e-3 * top.abs().max(bottom.abs());
        let ok_bottom = ritz.residuals[last] <= 1e-3 * top.abs().max(bottom.abs());
        if ok_top && ok_bottom {
            break;
        }
        let mut start = vec![ritz.vectors[0].clone(), ritz.vectors[last].clone()];
        start.extend(random_block(n, 1, &mut rng));
        let q = krylov_basis(&mut |x, y| m.apply_into(x, y), start, (EXPLORE_DIM * 2).min(n));
        ritz = rayleigh_ritz(&q, m)?;
    }
    let last = ritz.values.len() - 1;
    Ok(ritz.values[0].abs().max(ritz.values[last].abs()))
}
