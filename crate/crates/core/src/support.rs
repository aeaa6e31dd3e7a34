//! Global minimization through piecewise-quadratic lower support functions.
//!
//! Every evaluated point contributes a concave quadratic `q_k` lying below the objective.
//! The next iterate minimizes `max_k q_k` over the domain, which also yields a certified
//! lower bound on the global minimum.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::param::{ClarkeInterval, Domain, ParamHermitian, DEFAULT_EPS_CLUSTER};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 5000;
// Relative width under which two abscissae count as the same support.
const DUPLICATE_TOL: f64 = 1e-14;
const DUPLICATE_SHIFT: f64 = 1e-12;
// Eigenvalues closer than this (times the problem scale) are treated as one cluster when
// choosing the slope of a support function.
const SLOPE_CLUSTER_TOL: f64 = 1e-12;

/// `q(w) = value + slope (w - omega) + gamma/2 (w - omega)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportPoint {
    pub omega: f64,
    pub value: f64,
    pub slope: f64,
    pub gamma: f64,
}

impl SupportPoint {
    pub fn eval(&self, w: f64) -> f64 {
        let d = w - self.omega;
        self.value + self.slope * d + 0.5 * self.gamma * d * d
    }
}

/// Minimizer of `max(q1, q2)` over `[lo, hi]` for two supports with equal curvature.
///
/// The difference `q1 - q2` is affine, so there is at most one crossing; the minimum sits
/// at the crossing or at an endpoint.
pub fn two_support_intersection(
    s1: &SupportPoint,
    s2: &SupportPoint,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    if !(lo <= hi) {
        return Err(Error::InvalidParams(format!("empty interval [{lo}, {hi}]")));
    }
    let g = s1.gamma;
    let h = s2.omega - s1.omega;
    // q1 - q2 = c0 + c1 (w - s1.omega)
    let c1 = s1.slope - s2.slope + g * h;
    let c0 = s1.value - s2.value + s2.slope * h - 0.5 * g * h * h;
    let upper = |w: f64| s1.eval(w).max(s2.eval(w));

    let size = s1.value.abs().max(s2.value.abs()).max(1.0);
    let tiny = 1e-15 * size;
    if c1.abs() <= tiny && c0.abs() <= tiny {
        let mid = 0.5 * (lo + hi);
        return Err(Error::DegenerateSupports {
            omega: mid,
            value: upper(mid),
        });
    }

    let mut best = (lo, upper(lo));
    let mut consider = |w: f64| {
        let v = upper(w);
        if v < best.1 || (v == best.1 && w < best.0) {
            best = (w, v);
        }
    };
    if c1 != 0.0 {
        let crossing = s1.omega - c0 / c1;
        if crossing > lo && crossing < hi {
            consider(crossing);
        }
    }
    consider(hi);
    Ok(best)
}

/// The model `max_k q_k` with supports sorted by abscissa.
#[derive(Clone, Debug)]
pub struct PiecewiseModel {
    domain: Domain,
    gamma: f64,
    supports: Vec<SupportPoint>,
}

impl PiecewiseModel {
    pub fn new(domain: Domain, gamma: f64) -> Self {
        Self {
            domain,
            gamma,
            supports: Vec::new(),
        }
    }

    pub fn supports(&self) -> &[SupportPoint] {
        &self.supports
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// `max_k q_k(w)`; `-inf` for an empty model.
    pub fn eval(&self, w: f64) -> f64 {
        self.supports
            .iter()
            .map(|s| s.eval(w))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn duplicate_radius(&self) -> f64 {
        DUPLICATE_TOL * self.domain.width().max(f64::MIN_POSITIVE)
    }

    fn position(&self, w: f64) -> usize {
        self.supports.partition_point(|s| s.omega < w)
    }

    fn nearest_distance(&self, w: f64) -> f64 {
        let p = self.position(w);
        let mut d = f64::INFINITY;
        if p < self.supports.len() {
            d = d.min((self.supports[p].omega - w).abs());
        }
        if p > 0 {
            d = d.min((w - self.supports[p - 1].omega).abs());
        }
        d
    }

    /// Inserts a support and returns its index; rejects near-duplicate abscissae.
    pub fn insert(&mut self, s: SupportPoint) -> Result<usize> {
        if self.nearest_distance(s.omega) <= self.duplicate_radius() {
            return Err(Error::InvalidParams(format!(
                "support at {} duplicates an existing one",
                s.omega
            )));
        }
        let p = self.position(s.omega);
        self.supports.insert(p, s);
        Ok(p)
    }

    // Gap g lies between supports g-1 and g; gaps 0 and len touch the domain ends.
    fn gap_bounds(&self, g: usize) -> (Option<usize>, Option<usize>) {
        let left = g.checked_sub(1);
        let right = (g < self.supports.len()).then_some(g);
        (left, right)
    }

    fn gap_minimum(&self, g: usize) -> Option<(f64, f64)> {
        match self.gap_bounds(g) {
            (None, None) => None,
            (None, Some(r)) => {
                let s = &self.supports[r];
                (self.domain.lo() < s.omega).then(|| (self.domain.lo(), s.eval(self.domain.lo())))
            }
            (Some(l), None) => {
                let s = &self.supports[l];
                (s.omega < self.domain.hi()).then(|| (self.domain.hi(), s.eval(self.domain.hi())))
            }
            (Some(l), Some(r)) => {
                let (a, b) = (&self.supports[l], &self.supports[r]);
                match two_support_intersection(a, b, a.omega, b.omega) {
                    Ok(p) => Some(p),
                    Err(_) => Some((a.omega, a.eval(a.omega).max(b.eval(a.omega)))),
                }
            }
        }
    }

    /// Global minimizer of the model by a full scan of the gaps.
    pub fn minimize(&self) -> Option<(f64, f64)> {
        (0..=self.supports.len())
            .filter_map(|g| self.gap_minimum(g))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
    }

    fn gap_key(&self, g: usize) -> Option<GapEntry> {
        let (l, r) = self.gap_bounds(g);
        let (omega, value) = self.gap_minimum(g)?;
        let left = l.map(|i| self.supports[i].omega);
        let right = r.map(|i| self.supports[i].omega);
        Some(GapEntry {
            value,
            start: left.unwrap_or(self.domain.lo()),
            omega,
            left,
            right,
        })
    }

    fn is_live(&self, e: &GapEntry) -> bool {
        let n = self.supports.len();
        match (e.left, e.right) {
            (None, Some(r)) => n > 0 && self.supports[0].omega == r,
            (Some(l), None) => n > 0 && self.supports[n - 1].omega == l,
            (Some(l), Some(r)) => {
                let p = self.position(l);
                p + 1 < n && self.supports[p].omega == l && self.supports[p + 1].omega == r
            }
            (None, None) => false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct GapEntry {
    value: f64,
    start: f64,
    omega: f64,
    left: Option<f64>,
    right: Option<f64>,
}

impl PartialEq for GapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for GapEntry {}

impl PartialOrd for GapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so that BinaryHeap pops the smallest value, then the leftmost gap.
impl Ord for GapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then(other.start.total_cmp(&self.start))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
}

/// One evaluation: `omega` and its objective `value`, plus the model lower bound after it.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub k: usize,
    pub omega: f64,
    pub value: f64,
    pub lower_bound: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct MinResult {
    pub omega_star: f64,
    pub f_star: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub clarke: Option<ClarkeInterval>,
    pub status: Status,
}

/// Result of a support-based solve together with its final model.
#[derive(Clone, Debug)]
pub struct SupportRun {
    pub result: MinResult,
    pub model: PiecewiseModel,
    /// Minimizer and value of the final model.
    pub model_min: Option<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct SupportOptions {
    /// Curvature bound; computed from the norms for trigonometric families when absent.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Starting point; the domain midpoint when absent.
    pub omega0: Option<f64>,
    /// Cluster width for the Clarke interval reported at the minimizer.
    pub eps_cluster: f64,
}

impl Default for SupportOptions {
    fn default() -> Self {
        Self {
            gamma: None,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            omega0: None,
            eps_cluster: DEFAULT_EPS_CLUSTER,
        }
    }
}

fn resolve_gamma(gamma: f64, scale: f64) -> Result<f64> {
    let g = if gamma == 0.0 {
        -1e-8 * scale.max(1.0)
    } else {
        gamma
    };
    if g < 0.0 {
        Ok(g)
    } else {
        Err(Error::InvalidGamma(gamma))
    }
}

/// Minimizes `lambda_max(A(w))` over the family's domain.
pub fn eigopt_minimize(p: &ParamHermitian, opts: &SupportOptions) -> Result<MinResult> {
    Ok(eigopt_run(p, opts)?.result)
}

/// As [`eigopt_minimize`], also returning the final model.
pub fn eigopt_run(p: &ParamHermitian, opts: &SupportOptions) -> Result<SupportRun> {
    let gamma = match (opts.gamma, p.trig_pair()) {
        (Some(g), _) => g,
        (None, Some((a, b))) => crate::param::default_gamma_trig(a, b)?,
        (None, None) => {
            return Err(Error::InvalidParams(
                "a curvature bound is required for non-trigonometric families".into(),
            ))
        }
    };
    let scale = p.norm_scale();
    let slope_eps = SLOPE_CLUSTER_TOL * scale.max(1.0);
    let seeds: &[f64] = if p.is_trig() {
        &[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]
    } else {
        &[]
    };
    let eval = |w: f64| -> Result<(f64, f64)> {
        let e = p.eig_max_eval(w, slope_eps)?;
        Ok((e.lambda_max, e.slope_range.1))
    };
    let mut run = run_support(
        eval,
        p.domain(),
        resolve_gamma(gamma, scale)?,
        opts.tol,
        opts.max_iter,
        opts.omega0,
        seeds,
    )?;
    run.result.clarke = Some(p.clarke_interval(run.result.omega_star, opts.eps_cluster)?);
    Ok(run)
}

/// Minimizes an objective given by `w -> (value, slope)`; `gamma` must bound its curvature from below.
pub fn eigopt_minimize_callback<F>(
    f: F,
    domain: Domain,
    gamma: f64,
    tol: f64,
    max_iter: usize,
    omega0: Option<f64>,
) -> Result<MinResult>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let mut f = f;
    let w0 = omega0.unwrap_or(domain.midpoint());
    let first = f(w0)?;
    let gamma = resolve_gamma(gamma, first.0.abs())?;
    let mut cached = Some((w0, first));
    let eval = move |w: f64| match cached.take() {
        Some((c, v)) if c == w => Ok(v),
        _ => f(w),
    };
    Ok(run_support(eval, domain, gamma, tol, max_iter, Some(w0), &[])?.result)
}

fn peek_live(heap: &mut BinaryHeap<GapEntry>, model: &PiecewiseModel) -> Option<GapEntry> {
    while let Some(top) = heap.peek() {
        if model.is_live(top) {
            return Some(*top);
        }
        heap.pop();
    }
    None
}

fn run_support<F>(
    mut f: F,
    domain: Domain,
    gamma: f64,
    tol: f64,
    max_iter: usize,
    omega0: Option<f64>,
    seeds: &[f64],
) -> Result<SupportRun>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let w0 = omega0.unwrap_or(domain.midpoint());
    if !domain.contains(w0) {
        return Err(Error::InvalidParams(format!("starting point {w0} outside the domain")));
    }
    let mut model = PiecewiseModel::new(domain, gamma);
    let mut heap: BinaryHeap<GapEntry> = BinaryHeap::new();
    let mut pending: VecDeque<f64> = std::iter::once(w0)
        .chain(seeds.iter().copied().filter(|s| domain.contains(*s)))
        .collect();
    let mut trace = Vec::new();
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut status = Status::MaxIterations;
    let mut k = 0;

    while k < max_iter {
        let w = match pending.pop_front() {
            Some(w) => w,
            None => match peek_live(&mut heap, &model) {
                Some(top) => {
                    heap.pop();
                    top.omega
                }
                None => {
                    status = Status::Converged;
                    break;
                }
            },
        };
        let Some(w) = separate(&model, w) else {
            continue;
        };
        k += 1;
        let (value, slope) = f(w)?;
        let p = model.insert(SupportPoint {
            omega: w,
            value,
            slope,
            gamma,
        })?;
        upper = upper.min(value);
        for g in [p, p + 1] {
            if let Some(e) = model.gap_key(g) {
                heap.push(e);
            }
        }
        let bound = peek_live(&mut heap, &model).map_or(upper, |e| e.value);
        lower = lower.max(bound.min(upper));
        trace.push(TraceEntry {
            k,
            omega: w,
            value,
            lower_bound: Some(lower),
        });
        if upper - lower <= tol * upper.abs().max(1.0) {
            status = Status::Converged;
            break;
        }
    }
    if model.supports().is_empty() {
        return Err(Error::InvalidParams("no evaluations were performed".into()));
    }

    let (omega_star, f_star) = best_point(model.supports());
    let model_min = model.minimize();
    Ok(SupportRun {
        result: MinResult {
            omega_star,
            f_star,
            lower_bound: lower.min(f_star),
            iterations: k,
            trace,
            clarke: None,
            status,
        },
        model_min,
        model,
    })
}

// Moves a candidate off an existing support toward the wider neighbouring gap.
fn separate(model: &PiecewiseModel, w: f64) -> Option<f64> {
    let radius = model.duplicate_radius();
    if model.nearest_distance(w) > radius {
        return Some(w);
    }
    let dom = model.domain();
    let p = model.position(w);
    let s = model.supports();
    // The support w collides with, and its neighbours on each side.
    let hit = if p < s.len() && (s[p].omega - w).abs() <= radius {
        p
    } else {
        p - 1
    };
    let left = if hit > 0 { s[hit - 1].omega } else { dom.lo() };
    let right = if hit + 1 < s.len() { s[hit + 1].omega } else { dom.hi() };
    let at = s[hit].omega;
    let shift = DUPLICATE_SHIFT * dom.width();
    let moved = if right - at >= at - left {
        at + shift
    } else {
        at - shift
    };
    (dom.contains(moved) && model.nearest_distance(moved) > radius).then_some(moved)
}

// Smallest value; among near-ties the smallest abscissa.
fn best_point(supports: &[SupportPoint]) -> (f64, f64) {
    let fmin = supports
        .iter()
        .map(|s| s.value)
        .fold(f64::INFINITY, f64::min);
    let slack = 4.0 * f64::EPSILON * fmin.abs().max(1.0);
    let s = supports
        .iter()
        .find(|s| s.value <= fmin + slack)
        .expect("non-empty");
    (s.omega, s.value)
}
