//! Subspace acceleration for large families.
//!
//! The family is projected onto the span of the leading eigenvectors gathered at the iterates
//! so far. Each reduced problem is solved globally; its minimizer becomes the next iterate and
//! contributes its own leading eigenvectors, including the whole top cluster.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::levelset::{levelset_minimize, HermitianParts, LevelSetOptions};
use crate::linalg::{largest_eigpairs, orthonormal_extend_mat, Basis, DEFAULT_DROP_TOL};
use crate::param::{default_gamma_trig, ParamHermitian, DEFAULT_EPS_CLUSTER, MAX_CLUSTER};
use crate::support::{eigopt_minimize, MinResult, Status, SupportOptions, TraceEntry};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_SEED: u64 = 20_190_101;
pub const DEFAULT_INNER_TOL: f64 = 1e-14;
const INNER_MAX_ITER: usize = 50_000;
const SLOPE_CLUSTER_TOL: f64 = 1e-12;

/// Solver for the reduced problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerSolver {
    Support,
    Levelset,
}

#[derive(Clone, Debug)]
pub struct SubspaceOptions {
    pub eps_cluster: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub inner: InnerSolver,
    /// Starting point; drawn from the seeded generator when absent.
    pub omega1: Option<f64>,
    pub seed: u64,
    pub max_cluster: usize,
    /// Curvature bound for the support solver; derived from the norms of trigonometric families.
    pub gamma: Option<f64>,
    /// Relative tolerance of the reduced solves, scaled by the curvature bound.
    pub inner_tol: f64,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self {
            eps_cluster: DEFAULT_EPS_CLUSTER,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            inner: InnerSolver::Support,
            omega1: None,
            seed: DEFAULT_SEED,
            max_cluster: MAX_CLUSTER,
            gamma: None,
            inner_tol: DEFAULT_INNER_TOL,
        }
    }
}

/// One reduced solve: `dim V_k`, the reduced minimizer `w^(k+1)` and minimum `m_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubspaceStep {
    pub k: usize,
    pub dim: usize,
    pub omega_next: f64,
    pub reduced_min: f64,
}

/// Basis growth stopped before the reduced minima settled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StagnationNote {
    pub iteration: usize,
    /// `|m_k - lambda_max(A(w^(k+1)))|` when the basis stopped growing.
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct SubspaceState {
    pub basis: Basis,
    pub reduced: ParamHermitian,
    pub trace: Vec<SubspaceStep>,
    pub eps_cluster: f64,
    pub max_cluster: usize,
    /// Points whose eigenvectors entered the basis, in order.
    pub iterates: Vec<f64>,
    pub cluster_sizes: Vec<usize>,
    /// `lambda_max(A(w))` at each iterate.
    pub full_values: Vec<f64>,
}

impl SubspaceState {
    /// `V_1` from the top cluster at `omega1`.
    pub fn new(p: &ParamHermitian, omega1: f64, eps_cluster: f64, max_cluster: usize) -> Result<Self> {
        if max_cluster == 0 {
            return Err(Error::InvalidParams("max_cluster must be at least 1".into()));
        }
        let basis = Basis::empty(p.dim());
        let mut state = Self {
            reduced: p.project(&basis)?,
            basis,
            trace: Vec::new(),
            eps_cluster,
            max_cluster,
            iterates: Vec::new(),
            cluster_sizes: Vec::new(),
            full_values: Vec::new(),
        };
        state.expand(p, omega1)?;
        Ok(state)
    }

    /// Adds the top-cluster eigenvectors of `A(w)`; returns how many columns survived.
    pub fn expand(&mut self, p: &ParamHermitian, w: f64) -> Result<usize> {
        let top = largest_eigpairs(&p.evaluate(w), self.eps_cluster, self.max_cluster)?;
        let before = self.basis.len();
        self.basis = orthonormal_extend_mat(&self.basis, top.vectors.as_ref(), DEFAULT_DROP_TOL)?;
        self.reduced = p.project(&self.basis)?;
        self.iterates.push(w);
        self.cluster_sizes.push(top.len());
        self.full_values.push(top.lambda_max());
        Ok(self.basis.len() - before)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Clone, Debug)]
pub struct SubspaceRun {
    pub result: MinResult,
    pub state: SubspaceState,
    /// `lambda_max(A(w*))` of the full family at the returned minimizer.
    pub full_value: f64,
    /// `|full_value - f_star|`; larger than the tolerance only for unusually small subspaces.
    pub discrepancy: f64,
    pub stagnation: Option<StagnationNote>,
}

/// Global minimum of a (possibly large, sparse) family through reduced problems.
pub fn subspace_minimize(p: &ParamHermitian, opts: &SubspaceOptions) -> Result<SubspaceRun> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let domain = p.domain();
    let omega1 = match opts.omega1 {
        Some(w) if domain.contains(w) => w,
        Some(w) => return Err(Error::InvalidParams(format!("starting point {w} outside the domain"))),
        None => ChaCha8Rng::seed_from_u64(opts.seed).random_range(domain.lo()..domain.hi()),
    };
    let gamma = match (opts.inner, opts.gamma, p.trig_pair()) {
        (InnerSolver::Levelset, _, None) => {
            return Err(Error::InvalidParams(
                "the level-set solver needs a trigonometric family".into(),
            ))
        }
        (_, Some(g), _) => Some(g),
        (InnerSolver::Support, None, Some((a, b))) => Some(default_gamma_trig(a, b)?),
        (InnerSolver::Support, None, None) => {
            return Err(Error::InvalidParams(
                "a curvature bound is required for non-trigonometric families".into(),
            ))
        }
        (InnerSolver::Levelset, None, Some(_)) => None,
    };

    let mut state = SubspaceState::new(p, omega1, opts.eps_cluster, opts.max_cluster)?;
    let mut status = Status::MaxIterations;
    let mut stagnation = None;
    let mut previous: Option<f64> = None;

    for k in 1..=opts.max_iter {
        let (omega_next, reduced_min) = reduced_solve(&state.reduced, opts, gamma)?;
        state.trace.push(SubspaceStep {
            k,
            dim: state.dim(),
            omega_next,
            reduced_min,
        });
        if previous.is_some_and(|m| (reduced_min - m).abs() < opts.tol) {
            status = Status::Converged;
            break;
        }
        previous = Some(reduced_min);
        if k == opts.max_iter {
            break;
        }
        if state.expand(p, omega_next)? == 0 {
            let full = *state.full_values.last().expect("just expanded");
            let gap = (reduced_min - full).abs();
            if gap <= opts.tol * reduced_min.abs().max(1.0) {
                status = Status::Converged;
            } else {
                stagnation = Some(StagnationNote { iteration: k, gap });
            }
            break;
        }
    }

    let last = *state.trace.last().expect("at least one reduced solve");
    let full_value = p.lambda_max(last.omega_next)?;
    let clarke = p.clarke_interval(last.omega_next, opts.eps_cluster)?;
    let trace = state
        .trace
        .iter()
        .map(|s| TraceEntry {
            k: s.k,
            omega: s.omega_next,
            value: s.reduced_min,
            lower_bound: Some(s.reduced_min),
        })
        .collect();
    Ok(SubspaceRun {
        result: MinResult {
            omega_star: last.omega_next,
            f_star: last.reduced_min,
            lower_bound: last.reduced_min,
            iterations: state.trace.len(),
            trace,
            clarke: Some(clarke),
            status,
        },
        full_value,
        discrepancy: (full_value - last.reduced_min).abs(),
        stagnation,
        state,
    })
}

fn reduced_solve(reduced: &ParamHermitian, opts: &SubspaceOptions, gamma: Option<f64>) -> Result<(f64, f64)> {
    let (result, label) = match (opts.inner, gamma) {
        (InnerSolver::Support, Some(g)) => {
            let r = eigopt_minimize(
                reduced,
                &SupportOptions {
                    gamma: Some(g),
                    tol: opts.inner_tol * g.abs().max(1.0),
                    max_iter: INNER_MAX_ITER,
                    ..Default::default()
                },
            )
            .map_err(|e| Error::ReducedSolveFailure(e.to_string()))?;
            (r, "support")
        }
        _ => {
            let (a, b) = reduced.trig_pair().expect("checked trigonometric");
            let c = HermitianParts::from_pair(a, b)?.complex();
            let r = levelset_minimize(
                c.as_ref(),
                &LevelSetOptions {
                    eps_cluster: opts.eps_cluster,
                    ..Default::default()
                },
            )
            .map_err(|e| Error::ReducedSolveFailure(e.to_string()))?
            .result;
            (r, "level-set")
        }
    };
    if result.status != Status::Converged {
        return Err(Error::ReducedSolveFailure(format!(
            "{label} solver hit its iteration limit ({} iterations)",
            result.iterations
        )));
    }
    polish(reduced, result.omega_star, result.f_star)
}

// Value comparisons pin a flat minimizer down only to about sqrt(eps); a sign change of the
// slope locates it far more precisely. The refined point is kept only if it is no worse.
fn polish(p: &ParamHermitian, w0: f64, f0: f64) -> Result<(f64, f64)> {
    let domain = p.domain();
    let eps = SLOPE_CLUSTER_TOL * p.norm_scale().max(1.0);
    let slope = |w: f64| -> Result<(f64, f64, f64)> {
        let e = p.eig_max_eval(w, eps)?;
        Ok((e.lambda_max, e.slope_range.0, e.slope_range.1))
    };
    let (_, lo0, hi0) = slope(w0)?;
    if lo0 <= 0.0 && 0.0 <= hi0 {
        return Ok((w0, f0));
    }
    // Walk downhill until the slope changes sign.
    let dir = if lo0 > 0.0 { -1.0 } else { 1.0 };
    let (mut a, mut ga) = (w0, hi0.max(lo0) * -dir);
    let mut h = 1e-10 * domain.width();
    let mut b = None;
    for _ in 0..40 {
        let w = (w0 + dir * h).clamp(domain.lo(), domain.hi());
        let (_, lo, hi) = slope(w)?;
        if lo <= 0.0 && 0.0 <= hi {
            return better(p, w0, f0, w);
        }
        let g = if dir > 0.0 { lo } else { -hi };
        if g > 0.0 {
            b = Some((w, g));
            break;
        }
        (a, ga) = (w, g);
        if w == domain.lo() || w == domain.hi() {
            break;
        }
        h *= 4.0;
    }
    let Some((mut b, mut gb)) = b else {
        return Ok((w0, f0));
    };
    // Illinois false position on the oriented slope, ga < 0 < gb.
    ga = -ga.abs();
    let mut side = 0;
    for _ in 0..100 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0) {
            break;
        }
        let w = (a * gb - b * ga) / (gb - ga);
        let (_, lo, hi) = slope(w)?;
        if lo <= 0.0 && 0.0 <= hi {
            return better(p, w0, f0, w);
        }
        let g = if dir > 0.0 { lo } else { -hi };
        if g < 0.0 {
            (a, ga) = (w, g);
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            (b, gb) = (w, g);
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    better(p, w0, f0, 0.5 * (a + b))
}

fn better(p: &ParamHermitian, w0: f64, f0: f64, w: f64) -> Result<(f64, f64)> {
    let f = p.lambda_max(w)?;
    Ok(if f <= f0 { (w, f) } else { (w0, f0) })
}

/// Agreement of reduced and full clustered eigenvalues at the recorded iterates.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationReport {
    /// Largest `|lambda_p(V* A(w) V) - lambda_p(A(w))|` over iterates and clustered indices.
    pub max_discrepancy: f64,
    pub per_iterate: Vec<f64>,
}

/// Compares the reduced family of `state` with `p` at the first `k` iterates.
pub fn verify_interpolation(state: &SubspaceState, p: &ParamHermitian, k: usize) -> Result<InterpolationReport> {
    if k == 0 || k > state.iterates.len() {
        return Err(Error::InvalidParams(format!(
            "iterate {k} not recorded ({} available)",
            state.iterates.len()
        )));
    }
    let mut per_iterate = Vec::with_capacity(k);
    for (&w, &size) in state.iterates.iter().zip(&state.cluster_sizes).take(k) {
        let full = largest_eigpairs(&p.evaluate(w), state.eps_cluster, state.max_cluster)?;
        let reduced = largest_eigpairs(&state.reduced.evaluate(w), f64::INFINITY, size)?;
        let worst = full
            .values
            .iter()
            .zip(&reduced.values)
            .take(size)
            .map(|(f, r)| (f - r).abs())
            .fold(0.0, f64::max);
        per_iterate.push(worst);
    }
    Ok(InterpolationReport {
        max_discrepancy: per_iterate.iter().copied().fold(0.0, f64::max),
        per_iterate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::linalg::HermitianOperator;
    use crate::support::eigopt_minimize;

    fn cheng_higham() -> ParamHermitian {
        let (a, b) = gallery::cheng_higham7();
        ParamHermitian::trig(a, b).unwrap()
    }

    #[test]
    fn agrees_with_direct_solve() {
        let p = cheng_higham();
        let direct = eigopt_minimize(&p, &SupportOptions::default()).unwrap();
        for inner in [InnerSolver::Support, InnerSolver::Levelset] {
            let run = subspace_minimize(
                &p,
                &SubspaceOptions {
                    inner,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((run.result.f_star - direct.f_star).abs() < 1e-9, "{inner:?}");
            assert!(run.discrepancy < 1e-9);
        }
    }

    #[test]
    fn reduced_minima_are_monotone_lower_bounds() {
        let p = cheng_higham();
        let run = subspace_minimize(&p, &SubspaceOptions::default()).unwrap();
        let f_star = run.result.f_star;
        let m: Vec<f64> = run.state.trace.iter().map(|s| s.reduced_min).collect();
        for w in m.windows(2) {
            assert!(w[0] <= w[1] + 1e-10);
        }
        for (s, full) in run.state.trace.iter().zip(&run.state.full_values[1..]) {
            assert!(s.reduced_min <= f_star + 1e-10);
            assert!(*full >= f_star - 1e-10);
        }
    }

    #[test]
    fn first_iterate_is_interpolated() {
        let p = cheng_higham();
        let state = SubspaceState::new(&p, 1.3, DEFAULT_EPS_CLUSTER, MAX_CLUSTER).unwrap();
        let report = verify_interpolation(&state, &p, 1).unwrap();
        let scale = crate::linalg::spectral_norm_ub(&p.evaluate(1.3)).unwrap();
        assert!(report.max_discrepancy <= 1e-8 * scale);
    }

    #[test]
    fn full_basis_interpolates_exactly() {
        let p = cheng_higham();
        let mut state = SubspaceState::new(&p, 0.2, DEFAULT_EPS_CLUSTER, MAX_CLUSTER).unwrap();
        let mut w = 0.2;
        while state.dim() < p.dim() {
            w += 0.7;
            state.expand(&p, w).unwrap();
        }
        let report = verify_interpolation(&state, &p, state.iterates.len()).unwrap();
        assert!(report.max_discrepancy < 1e-12);
    }

    #[test]
    fn seeded_start_is_reproducible() {
        let p = cheng_higham();
        let a = subspace_minimize(&p, &SubspaceOptions::default()).unwrap();
        let b = subspace_minimize(&p, &SubspaceOptions::default()).unwrap();
        assert_eq!(a.state.iterates, b.state.iterates);
        assert_eq!(a.result.f_star, b.result.f_star);
    }

    #[test]
    fn non_trig_family_needs_gamma() {
        let p = ParamHermitian::new(
            vec![crate::param::Term {
                coeff: crate::param::ScalarFn::Const(1.0),
                matrix: HermitianOperator::identity(2),
            }],
            crate::param::Domain::new(0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            subspace_minimize(&p, &SubspaceOptions::default()),
            Err(Error::InvalidParams(_))
        ));
    }
}
