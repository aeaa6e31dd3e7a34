//! Level-set minimization of `f(theta) = lambda_max((C e^{-i theta} + C* e^{i theta}) / 2)`.
//!
//! Each step evaluates `f` at the midpoints of the open arcs where `f` lies below the current
//! estimate, takes the smallest value as the new estimate and recomputes the arcs from the
//! unit-circle eigenvalues of a linear pencil.

use std::f64::consts::TAU;

use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigvals, pencil_unit_eigs, HermitianOperator, DEFAULT_TOL_CIRCLE};
use crate::param::{ParamHermitian, DEFAULT_EPS_CLUSTER};
use crate::support::{MinResult, Status, TraceEntry};

pub const DEFAULT_FILTER_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-12;
// Arcs shorter than this fraction of the circle count as collapsed.
const COLLAPSE_TOL: f64 = 1e-14;

/// The Hermitian and skew-Hermitian parts of `C = A + iB`.
#[derive(Clone, Debug)]
pub struct HermitianParts {
    a: Mat<C64>,
    b: Mat<C64>,
}

impl HermitianParts {
    pub fn from_complex(c: MatRef<'_, C64>) -> Result<Self> {
        let n = c.nrows();
        if n != c.ncols() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c.ncols(),
            });
        }
        let half = C64::new(0.5, 0.0);
        let a = Mat::from_fn(n, n, |i, j| (c[(i, j)] + c[(j, i)].conj()) * half);
        let b = Mat::from_fn(n, n, |i, j| {
            (c[(i, j)] - c[(j, i)].conj()) * C64::new(0.0, -0.5)
        });
        Ok(Self { a, b })
    }

    pub fn from_pair(a: &HermitianOperator, b: &HermitianOperator) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(Self {
            a: a.to_dense(),
            b: b.to_dense(),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> HermitianOperator {
        HermitianOperator::dense_trusted(self.a.clone())
    }

    pub fn b(&self) -> HermitianOperator {
        HermitianOperator::dense_trusted(self.b.clone())
    }

    /// `A + iB`.
    pub fn complex(&self) -> Mat<C64> {
        let i = C64::new(0.0, 1.0);
        Mat::from_fn(self.dim(), self.dim(), |r, c| self.a[(r, c)] + i * self.b[(r, c)])
    }

    /// `H(theta) = A cos theta + B sin theta`.
    pub fn at(&self, theta: f64) -> HermitianOperator {
        let (s, c) = theta.sin_cos();
        let n = self.dim();
        HermitianOperator::dense_trusted(Mat::from_fn(n, n, |i, j| {
            self.a[(i, j)] * c + self.b[(i, j)] * s
        }))
    }

    pub fn lambda_max(&self, theta: f64) -> Result<f64> {
        Ok(hermitian_eigvals(&self.at(theta))?[0])
    }

    pub fn family(&self) -> Result<ParamHermitian> {
        ParamHermitian::trig(self.a(), self.b())
    }

    pub fn is_zero(&self) -> bool {
        self.a.norm_l2() == 0.0 && self.b.norm_l2() == 0.0
    }
}

/// An open arc of the circle; when `wraps`, it is `(lo, 2pi) U [0, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircularInterval {
    pub lo: f64,
    pub hi: f64,
    pub wraps: bool,
}

impl CircularInterval {
    /// Arc from `lo` counter-clockwise to `hi`; `lo == hi` is the whole circle.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            wraps: hi <= lo,
        }
    }

    pub fn length(&self) -> f64 {
        if self.wraps {
            self.hi + TAU - self.lo
        } else {
            self.hi - self.lo
        }
    }

    pub fn midpoint(&self) -> f64 {
        if self.wraps {
            ((self.lo + self.hi + TAU) / 2.0).rem_euclid(TAU)
        } else {
            (self.lo + self.hi) / 2.0
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        let t = theta.rem_euclid(TAU);
        if self.wraps {
            t > self.lo || t < self.hi || (self.lo == self.hi && t != self.lo)
        } else {
            self.lo < t && t < self.hi
        }
    }

    /// `count` evenly spaced interior points.
    pub fn samples(&self, count: usize) -> Vec<f64> {
        let len = self.length();
        (1..=count)
            .map(|k| (self.lo + len * k as f64 / (count + 1) as f64).rem_euclid(TAU))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LevelSetTrace {
    /// `r^(1), r^(2), ...`; the first entry is `f(0)`.
    pub estimates: Vec<f64>,
    /// Number of arcs in play before each estimate; starts with 1 for the single point 0.
    pub intervals_per_iter: Vec<usize>,
    /// Longest arc after each level-set extraction.
    pub max_interval_length: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LevelSetOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative tolerance for accepting a pencil angle as a level-set point.
    pub filter_tol: f64,
    pub tol_circle: f64,
    pub eps_cluster: f64,
}

impl Default for LevelSetOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            filter_tol: DEFAULT_FILTER_TOL,
            tol_circle: DEFAULT_TOL_CIRCLE,
            eps_cluster: DEFAULT_EPS_CLUSTER,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LevelSetRun {
    pub result: MinResult,
    pub trace: LevelSetTrace,
}

fn spectral_norm(c: MatRef<'_, C64>) -> Result<f64> {
    let sv = c
        .singular_values()
        .map_err(|e| Error::ConvergenceFailure(format!("singular values of C: {e:?}")))?;
    Ok(sv.iter().copied().fold(0.0, f64::max))
}

/// Maximal open arcs on which `f < alpha`.
pub fn level_intervals(c: MatRef<'_, C64>, alpha: f64, filter_tol: f64) -> Result<Vec<CircularInterval>> {
    let parts = HermitianParts::from_complex(c)?;
    let scale = spectral_norm(c)?.max(1.0);
    level_intervals_with(&parts, c, alpha, filter_tol, DEFAULT_TOL_CIRCLE, scale, None)
}

// Angles this close are the same level-set point.
const SAME_POINT: f64 = 1e-9;

fn level_intervals_with(
    parts: &HermitianParts,
    c: MatRef<'_, C64>,
    alpha: f64,
    filter_tol: f64,
    tol_circle: f64,
    scale: f64,
    on_level: Option<f64>,
) -> Result<Vec<CircularInterval>> {
    let mut points = Vec::new();
    for t in pencil_unit_eigs(c, alpha, tol_circle)? {
        if (parts.lambda_max(t)? - alpha).abs() <= filter_tol * scale {
            points.push(t);
        }
    }
    // A point known to attain the level, for when the pencil misses it: an eigenvalue curve
    // meeting the level with high order of contact gives a multiple root off the circle.
    if let Some(t) = on_level.map(|t| t.rem_euclid(TAU)) {
        let circ = |x: f64| {
            let d = (x - t).abs();
            d.min(TAU - d)
        };
        if points.iter().all(|&x| circ(x) > SAME_POINT) {
            points.push(t);
            points.sort_by(f64::total_cmp);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyLevelSet { alpha });
    }

    // Gap i runs from points[i] counter-clockwise to the next point.
    let k = points.len();
    let mut below = Vec::with_capacity(k);
    for i in 0..k {
        let len = if i + 1 < k {
            points[i + 1] - points[i]
        } else {
            points[0] + TAU - points[i]
        };
        let mid = (points[i] + 0.5 * len).rem_euclid(TAU);
        below.push(len > 0.0 && parts.lambda_max(mid)? < alpha);
    }
    if below.iter().all(|&b| b) {
        return Ok(vec![CircularInterval::new(points[0], points[0])]);
    }

    // Start the sweep right after a gap that is not below the level so runs never straddle it.
    let start = (0..k).find(|&i| !below[i]).expect("some gap is above the level") + 1;
    let mut out = Vec::new();
    let mut run: Option<usize> = None;
    for step in 0..k {
        let i = (start + step) % k;
        match (below[i], run) {
            (true, None) => run = Some(i),
            (false, Some(first)) => {
                out.push(CircularInterval::new(points[first], points[i]));
                run = None;
            }
            _ => {}
        }
    }
    if let Some(first) = run {
        out.push(CircularInterval::new(points[first], points[start % k]));
    }
    out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    Ok(out)
}

/// Global minimizer of `f` on `[0, 2pi)`.
pub fn levelset_minimize(c: MatRef<'_, C64>, opts: &LevelSetOptions) -> Result<LevelSetRun> {
    if !(opts.tol > 0.0) || !(opts.filter_tol > 0.0) {
        return Err(Error::InvalidParams("tolerances must be positive".into()));
    }
    let parts = HermitianParts::from_complex(c)?;
    if parts.dim() == 0 {
        return Err(Error::InvalidParams("empty matrix".into()));
    }
    if parts.is_zero() {
        return Ok(zero_run());
    }
    let scale = spectral_norm(c)?.max(1.0);

    let mut trace = LevelSetTrace {
        intervals_per_iter: vec![1],
        ..Default::default()
    };
    let mut entries = Vec::new();
    let mut midpoints = vec![0.0];
    let mut best = (0.0, f64::INFINITY);
    let mut status = Status::MaxIterations;

    for j in 0..opts.max_iter {
        let mut level = (0.0, f64::INFINITY);
        for &m in &midpoints {
            let v = parts.lambda_max(m)?;
            if v < level.1 || (v == level.1 && m < level.0) {
                level = (m, v);
            }
        }
        let previous = best.1;
        if level.1 < best.1 {
            best = level;
        }
        trace.estimates.push(best.1);
        entries.push(TraceEntry {
            k: j + 1,
            omega: level.0,
            value: level.1,
            lower_bound: None,
        });
        if j > 0 && previous - best.1 <= opts.tol * best.1.abs().max(1.0) {
            status = Status::Converged;
            break;
        }
        let extract = |on_level| {
            level_intervals_with(&parts, c, best.1, opts.filter_tol, opts.tol_circle, scale, on_level)
        };
        let first = match extract(None) {
            Ok(a) if a.is_empty() => Err(Error::EmptyLevelSet { alpha: best.1 }),
            other => other,
        };
        let arcs = match first.or_else(|e| match e {
            Error::EmptyLevelSet { .. } => extract(Some(best.0)),
            e => Err(e),
        }) {
            Ok(a) => a,
            Err(Error::EmptyLevelSet { .. }) => {
                status = Status::Converged;
                break;
            }
            Err(e) => return Err(e),
        };
        let longest = arcs.iter().map(CircularInterval::length).fold(0.0, f64::max);
        trace.max_interval_length.push(longest);
        trace.intervals_per_iter.push(arcs.len());
        if arcs.is_empty() || longest < COLLAPSE_TOL * TAU {
            status = Status::Converged;
            break;
        }
        midpoints = arcs.iter().map(CircularInterval::midpoint).collect();
    }

    let clarke = parts.family()?.clarke_interval(best.0, opts.eps_cluster)?;
    Ok(LevelSetRun {
        result: MinResult {
            omega_star: best.0,
            f_star: best.1,
            lower_bound: best.1,
            iterations: entries.len(),
            trace: entries,
            clarke: Some(clarke),
            status,
        },
        trace,
    })
}

fn zero_run() -> LevelSetRun {
    LevelSetRun {
        result: MinResult {
            omega_star: 0.0,
            f_star: 0.0,
            lower_bound: 0.0,
            iterations: 1,
            trace: vec![TraceEntry {
                k: 1,
                omega: 0.0,
                value: 0.0,
                lower_bound: None,
            }],
            clarke: Some(crate::param::ClarkeInterval::new(0.0, 0.0)),
            status: Status::Converged,
        },
        trace: LevelSetTrace {
            estimates: vec![0.0],
            intervals_per_iter: vec![1],
            max_interval_length: Vec::new(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn scalar(re: f64, im: f64) -> Mat<C64> {
        Mat::from_fn(1, 1, |_, _| C64::new(re, im))
    }

    fn random_complex(n: usize, seed: u64) -> Mat<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn interval_geometry() {
        let plain = CircularInterval::new(1.0, 3.0);
        assert!(!plain.wraps);
        assert_eq!(plain.midpoint(), 2.0);
        let wrap = CircularInterval::new(5.0, 1.0);
        assert!(wrap.wraps);
        assert!((wrap.length() - (1.0 + TAU - 5.0)).abs() < 1e-15);
        assert!((wrap.midpoint() - ((6.0 + TAU) / 2.0).rem_euclid(TAU)).abs() < 1e-15);
        assert!(wrap.contains(0.2) && wrap.contains(6.0) && !wrap.contains(3.0));
        let full = CircularInterval::new(2.0, 2.0);
        assert!((full.length() - TAU).abs() < 1e-15);
    }

    #[test]
    fn scalar_one_at_zero_level() {
        let arcs = level_intervals(scalar(1.0, 0.0).as_ref(), 0.0, DEFAULT_FILTER_TOL).unwrap();
        assert_eq!(arcs.len(), 1);
        assert!((arcs[0].lo - FRAC_PI_2).abs() < 1e-12);
        assert!((arcs[0].hi - 3.0 * FRAC_PI_2).abs() < 1e-12);
        assert!(arcs[0].contains(PI));
    }

    #[test]
    fn scalar_one_above_maximum_is_empty() {
        assert!(matches!(
            level_intervals(scalar(1.0, 0.0).as_ref(), 2.0, DEFAULT_FILTER_TOL),
            Err(Error::EmptyLevelSet { .. })
        ));
    }

    #[test]
    fn arcs_match_grid_classification() {
        for seed in 0..5 {
            let c = random_complex(4, 100 + seed);
            let parts = HermitianParts::from_complex(c.as_ref()).unwrap();
            let alpha = parts.lambda_max(0.0).unwrap();
            let arcs = level_intervals(c.as_ref(), alpha, DEFAULT_FILTER_TOL).unwrap();
            let boundary: Vec<f64> = arcs.iter().flat_map(|a| [a.lo, a.hi]).collect();
            let mut mismatches = 0;
            for i in 0..10_000 {
                let t = TAU * (i as f64 + 0.5) / 10_000.0;
                if boundary.iter().any(|b| (b - t).abs().min(TAU - (b - t).abs()) < 1e-6) {
                    continue;
                }
                let inside = arcs.iter().any(|a| a.contains(t));
                if inside != (parts.lambda_max(t).unwrap() < alpha) {
                    mismatches += 1;
                }
            }
            assert_eq!(mismatches, 0, "seed {seed}");
        }
    }

    #[test]
    fn arc_interiors_and_endpoints() {
        let c = random_complex(5, 7);
        let parts = HermitianParts::from_complex(c.as_ref()).unwrap();
        let scale = spectral_norm(c.as_ref()).unwrap().max(1.0);
        let alpha = parts.lambda_max(1.0).unwrap();
        for arc in level_intervals(c.as_ref(), alpha, DEFAULT_FILTER_TOL).unwrap() {
            for t in arc.samples(20) {
                assert!(parts.lambda_max(t).unwrap() < alpha);
            }
            for t in [arc.lo, arc.hi] {
                assert!((parts.lambda_max(t).unwrap() - alpha).abs() <= 10.0 * DEFAULT_FILTER_TOL * scale);
            }
        }
    }

    #[test]
    fn scalar_cosine_run() {
        let run = levelset_minimize(scalar(1.0, 0.0).as_ref(), &LevelSetOptions::default()).unwrap();
        assert_eq!(run.result.status, Status::Converged);
        assert_eq!(run.trace.estimates[0], 1.0);
        assert!((run.trace.estimates[1] + 1.0).abs() < 1e-15);
        assert!((run.result.f_star + 1.0).abs() < 1e-15);
        assert!((run.result.omega_star - PI).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_flat() {
        let run = levelset_minimize(Mat::<C64>::zeros(3, 3).as_ref(), &LevelSetOptions::default()).unwrap();
        assert_eq!(run.result.f_star, 0.0);
        assert_eq!(run.result.omega_star, 0.0);
    }

    #[test]
    fn estimates_decrease_and_arcs_halve() {
        for seed in 0..4 {
            let c = random_complex(6, 40 + seed);
            let run = levelset_minimize(c.as_ref(), &LevelSetOptions::default()).unwrap();
            let r = &run.trace.estimates;
            for w in r.windows(2) {
                assert!(w[1] <= w[0]);
            }
            let l = &run.trace.max_interval_length;
            for w in l.windows(2) {
                assert!(w[1] <= 0.5 * w[0] + 1e-12, "seed {seed}: {l:?}");
            }
        }
    }
}
