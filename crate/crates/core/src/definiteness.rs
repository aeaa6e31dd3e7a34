//! Inner numerical radius, Crawford number and the applications built on them: the nearest
//! definite pair, QEP hyperbolicity and positive-definite shifts of saddle-point matrices.
//!
//! Everything reduces to `f(theta) = lambda_max(A cos theta + B sin theta)` for the Hermitian
//! pair `(A, B)` with `C = A + iB`. Its global minimum `f*` is negative exactly when the pair is
//! definite, and `|f*|` is the distance from the origin to the boundary of the field of values.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gallery::{qep_linearization, Qep};
use crate::levelset::{levelset_minimize, HermitianParts, LevelSetOptions, LevelSetTrace};
use crate::linalg::{
    envelope_profile, hermitian_eig, hermitian_eigvals, largest_eigpairs, rcm_order,
    spectral_norm_ub, CsrMatrix, EnvelopeCholesky, HermitianOperator, DENSE_THRESHOLD,
};
use crate::param::{ParamHermitian, DEFAULT_EPS_CLUSTER};
use crate::subspace::{subspace_minimize, InnerSolver, StagnationNote, SubspaceOptions, SubspaceStep};
use crate::support::{eigopt_minimize, MinResult, Status, SupportOptions};

/// Largest dimension handed to the level-set method by [`Method::Auto`].
pub const AUTO_LEVELSET_MAX_DIM: usize = 100;
const REPAIR_NORM_TOL: f64 = 1e-8;
const REPAIR_ROTATION_TOL: f64 = 1e-12;

/// Global solver for `min f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Levelset,
    Support,
    Subspace,
    /// Level set for small dense problems, support functions up to the dense threshold,
    /// subspace projection beyond it.
    Auto,
}

impl Method {
    /// The concrete method used for a problem of dimension `dim`.
    pub fn resolve(self, dim: usize) -> Method {
        match self {
            Method::Auto if dim <= AUTO_LEVELSET_MAX_DIM => Method::Levelset,
            Method::Auto if dim < DENSE_THRESHOLD => Method::Support,
            Method::Auto => Method::Subspace,
            m => m,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Levelset => "levelset",
            Method::Support => "support",
            Method::Subspace => "subspace",
            Method::Auto => "auto",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "levelset" => Ok(Method::Levelset),
            "support" => Ok(Method::Support),
            "subspace" => Ok(Method::Subspace),
            "auto" => Ok(Method::Auto),
            other => Err(Error::InvalidParams(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct InnerRadiusOptions {
    pub method: Method,
    pub tol: f64,
    /// Iteration cap; each method's own default when absent.
    pub max_iter: Option<usize>,
    pub eps_cluster: f64,
    /// Curvature bound for the support method; `-(||A|| + ||B||)` when absent.
    pub gamma: Option<f64>,
    /// Starting angle for the support and subspace methods.
    pub omega0: Option<f64>,
    pub seed: u64,
    pub filter_tol: f64,
}

impl Default for InnerRadiusOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            tol: crate::support::DEFAULT_TOL,
            max_iter: None,
            eps_cluster: DEFAULT_EPS_CLUSTER,
            gamma: None,
            omega0: None,
            seed: crate::subspace::DEFAULT_SEED,
            filter_tol: crate::levelset::DEFAULT_FILTER_TOL,
        }
    }
}

/// What the subspace method adds to a [`MinResult`].
#[derive(Clone, Debug)]
pub struct SubspaceSummary {
    pub steps: Vec<SubspaceStep>,
    pub final_dim: usize,
    pub full_value: f64,
    pub discrepancy: f64,
    pub stagnation: Option<StagnationNote>,
}

#[derive(Clone, Debug)]
pub struct InnerRadiusResult {
    /// Distance from the origin to the boundary of the field of values.
    pub zeta: f64,
    pub theta_star: f64,
    pub f_star: f64,
    /// Direction of the boundary point closest to the origin.
    pub phi: f64,
    pub zero_in_fov: bool,
    pub method: Method,
    pub run: MinResult,
    pub levelset_trace: Option<LevelSetTrace>,
    pub subspace: Option<SubspaceSummary>,
}

impl InnerRadiusResult {
    fn from_min(method: Method, run: MinResult) -> Self {
        let theta_star = run.omega_star.rem_euclid(TAU);
        let f_star = run.f_star;
        // At f* = 0 the origin lies on the boundary; it is counted as inside.
        let zero_in_fov = f_star >= 0.0;
        let phi = if zero_in_fov {
            theta_star
        } else {
            (theta_star + PI).rem_euclid(TAU)
        };
        Self {
            zeta: f_star.abs(),
            theta_star,
            f_star,
            phi,
            zero_in_fov,
            method,
            run,
            levelset_trace: None,
            subspace: None,
        }
    }

    pub fn converged(&self) -> bool {
        self.run.status == Status::Converged
    }
}

fn check_pair(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.dim() == 0 {
        return Err(Error::InvalidParams("empty matrices".into()));
    }
    Ok(())
}

/// Inner numerical radius of `C = A + iB` given by its Hermitian pair.
pub fn inner_numerical_radius_pair(
    a: &HermitianOperator,
    b: &HermitianOperator,
    opts: &InnerRadiusOptions,
) -> Result<InnerRadiusResult> {
    check_pair(a, b)?;
    let n = a.dim();
    let method = opts.method.resolve(n);
    match method {
        Method::Levelset => {
            if n >= DENSE_THRESHOLD && !(a.is_dense() && b.is_dense()) {
                return Err(Error::InvalidParams(
                    "the level-set method needs a dense matrix".into(),
                ));
            }
            let c = HermitianParts::from_pair(a, b)?.complex();
            levelset_result(c.as_ref(), opts)
        }
        Method::Support => {
            let p = ParamHermitian::trig(a.clone(), b.clone())?;
            let run = eigopt_minimize(
                &p,
                &SupportOptions {
                    gamma: opts.gamma,
                    tol: opts.tol,
                    max_iter: opts.max_iter.unwrap_or(crate::support::DEFAULT_MAX_ITER),
                    omega0: opts.omega0,
                    eps_cluster: opts.eps_cluster,
                },
            )?;
            Ok(InnerRadiusResult::from_min(method, run))
        }
        Method::Subspace => {
            let p = ParamHermitian::trig(a.clone(), b.clone())?;
            let run = subspace_minimize(
                &p,
                &SubspaceOptions {
                    eps_cluster: opts.eps_cluster,
                    tol: opts.tol,
                    max_iter: opts.max_iter.unwrap_or(crate::subspace::DEFAULT_MAX_ITER),
                    inner: InnerSolver::Support,
                    omega1: opts.omega0,
                    seed: opts.seed,
                    gamma: opts.gamma,
                    ..Default::default()
                },
            )?;
            let mut out = InnerRadiusResult::from_min(method, run.result);
            out.subspace = Some(SubspaceSummary {
                final_dim: run.state.dim(),
                steps: run.state.trace,
                full_value: run.full_value,
                discrepancy: run.discrepancy,
                stagnation: run.stagnation,
            });
            Ok(out)
        }
        Method::Auto => unreachable!("resolved above"),
    }
}

/// Inner numerical radius of a dense complex matrix.
pub fn inner_numerical_radius(c: MatRef<'_, C64>, opts: &InnerRadiusOptions) -> Result<InnerRadiusResult> {
    let parts = HermitianParts::from_complex(c)?;
    if opts.method.resolve(parts.dim()) == Method::Levelset {
        return levelset_result(c, opts);
    }
    inner_numerical_radius_pair(&parts.a(), &parts.b(), opts)
}

fn levelset_result(c: MatRef<'_, C64>, opts: &InnerRadiusOptions) -> Result<InnerRadiusResult> {
    let run = levelset_minimize(
        c,
        &LevelSetOptions {
            tol: opts.tol,
            max_iter: opts.max_iter.unwrap_or(crate::levelset::DEFAULT_MAX_ITER),
            filter_tol: opts.filter_tol,
            eps_cluster: opts.eps_cluster,
            ..Default::default()
        },
    )?;
    let mut out = InnerRadiusResult::from_min(Method::Levelset, run.result);
    out.levelset_trace = Some(run.trace);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Crawford {
    /// The Crawford number; zero for indefinite pairs.
    pub gamma: f64,
    pub is_definite: bool,
    pub witness: InnerRadiusResult,
}

pub fn crawford_number(
    a: &HermitianOperator,
    b: &HermitianOperator,
    opts: &InnerRadiusOptions,
) -> Result<Crawford> {
    let witness = inner_numerical_radius_pair(a, b, opts)?;
    let is_definite = witness.f_star < 0.0;
    Ok(Crawford {
        gamma: if is_definite { witness.zeta } else { 0.0 },
        is_definite,
        witness,
    })
}

/// `(A cos theta + B sin theta, -A sin theta + B cos theta)`, i.e. `e^{-i theta}(A + iB)`.
pub fn rotate_pair(
    a: &HermitianOperator,
    b: &HermitianOperator,
    theta: f64,
) -> Result<(HermitianOperator, HermitianOperator)> {
    let (s, c) = theta.sin_cos();
    Ok((
        HermitianOperator::lincomb(&[(c, a), (s, b)])?,
        HermitianOperator::lincomb(&[(-s, a), (c, b)])?,
    ))
}

/// Maps an eigenvalue pair `(u, v)` of the rotated pair, `det(v A_theta - u B_theta) = 0`,
/// back to one of the original pair.
pub fn eigenpair_backmap(u_theta: f64, v_theta: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (c * u_theta - s * v_theta, c * v_theta + s * u_theta)
}

/// Which of the two optimal perturbation families [`nearest_definite_pair`] returns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PerturbationFamily {
    /// Clip the spectrum of `H(theta*)` at `-delta`; low rank in general.
    #[default]
    Clipping,
    /// Shift by a multiple of the identity.
    Scalar,
}

#[derive(Clone, Debug, Default)]
pub struct RepairOptions {
    pub inner: InnerRadiusOptions,
    pub family: PerturbationFamily,
}

#[derive(Clone, Debug)]
pub struct DefiniteRepair {
    pub distance: f64,
    pub delta: f64,
    pub delta_a: Mat<C64>,
    pub delta_b: Mat<C64>,
    pub psi: f64,
    pub a_tilde: Mat<C64>,
    pub b_tilde: Mat<C64>,
    /// Crawford number of the original pair.
    pub crawford_before: f64,
    /// `lambda_min(B~)`, which equals the Crawford number of the repaired pair.
    pub crawford_after: f64,
    /// `||[dA dB]||_2`.
    pub perturbation_norm: f64,
    pub witness: InnerRadiusResult,
}

fn dense_of(m: &HermitianOperator) -> Result<Mat<C64>> {
    if !m.is_dense() && m.dim() >= DENSE_THRESHOLD {
        return Err(Error::InvalidParams(
            "the nearest definite pair is computed for dense matrices".into(),
        ));
    }
    Ok(m.to_dense())
}

fn max_abs_diff(x: MatRef<'_, C64>, y: MatRef<'_, C64>) -> f64 {
    let mut d = 0.0f64;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            d = d.max((x[(i, j)] - y[(i, j)]).norm());
        }
    }
    d
}

fn trusted(m: Mat<C64>) -> HermitianOperator {
    HermitianOperator::dense_trusted(m)
}

/// A smallest perturbation `(dA, dB)` in the spectral norm making `(A + dA, B + dB)` definite
/// with Crawford number at least `delta`, and the rotation exposing the definiteness.
pub fn nearest_definite_pair(
    a: &HermitianOperator,
    b: &HermitianOperator,
    delta: f64,
    opts: &RepairOptions,
) -> Result<DefiniteRepair> {
    check_pair(a, b)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParams(format!("delta must be positive, got {delta}")));
    }
    let ad = dense_of(a)?;
    let bd = dense_of(b)?;
    let n = ad.nrows();
    let scale = (spectral_norm_ub(a)? + spectral_norm_ub(b)?).max(1.0);

    let witness = inner_numerical_radius_pair(a, b, &opts.inner)?;
    let theta = witness.theta_star;
    let (s, c) = theta.sin_cos();
    let h = Mat::from_fn(n, n, |i, j| ad[(i, j)] * c + bd[(i, j)] * s);
    let eig = hermitian_eig(&trusted(h))?;
    let lambda1 = eig.values[0];
    let distance = (delta + lambda1).max(0.0);
    let crawford_before = if witness.f_star < 0.0 { witness.zeta } else { 0.0 };

    let p = match opts.family {
        PerturbationFamily::Clipping => {
            let q = &eig.vectors;
            let clip: Vec<f64> = eig.values.iter().map(|&l| (-delta - l).min(0.0)).collect();
            Mat::from_fn(n, n, |i, j| {
                (0..n)
                    .filter(|&k| clip[k] != 0.0)
                    .map(|k| q[(i, k)] * q[(j, k)].conj() * clip[k])
                    .sum()
            })
        }
        PerturbationFamily::Scalar => Mat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(-distance, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
    };
    let delta_a = Mat::from_fn(n, n, |i, j| p[(i, j)] * c);
    let delta_b = Mat::from_fn(n, n, |i, j| p[(i, j)] * s);

    let psi = (theta + FRAC_PI_2).rem_euclid(TAU);
    let a_new = Mat::from_fn(n, n, |i, j| ad[(i, j)] + delta_a[(i, j)]);
    let b_new = Mat::from_fn(n, n, |i, j| bd[(i, j)] + delta_b[(i, j)]);
    let (sp, cp) = psi.sin_cos();
    let a_tilde = Mat::from_fn(n, n, |i, j| a_new[(i, j)] * cp + b_new[(i, j)] * sp);
    let b_tilde = Mat::from_fn(n, n, |i, j| b_new[(i, j)] * cp - a_new[(i, j)] * sp);

    // ||[dA dB]||^2 = lambda_max(dA^2 + dB^2).
    let gram = &delta_a * &delta_a + &delta_b * &delta_b;
    let gram = Mat::from_fn(n, n, |i, j| (gram[(i, j)] + gram[(j, i)].conj()) * 0.5);
    let perturbation_norm = hermitian_eigvals(&trusted(gram))?[0].max(0.0).sqrt();
    let crawford_after = *hermitian_eigvals(&trusted(b_tilde.clone()))?
        .last()
        .expect("non-empty spectrum");

    let repair = DefiniteRepair {
        distance,
        delta,
        delta_a,
        delta_b,
        psi,
        a_tilde,
        b_tilde,
        crawford_before,
        crawford_after,
        perturbation_norm,
        witness,
    };
    verify_repair(&repair, ad.as_ref(), bd.as_ref(), scale)?;
    Ok(repair)
}

fn verify_repair(r: &DefiniteRepair, a: MatRef<'_, C64>, b: MatRef<'_, C64>, scale: f64) -> Result<()> {
    let tol = REPAIR_NORM_TOL * scale;
    if (r.perturbation_norm - r.distance).abs() > tol {
        return Err(Error::VerificationFailure(format!(
            "perturbation norm {} differs from the distance {}",
            r.perturbation_norm, r.distance
        )));
    }
    let target = r.delta.max(r.crawford_before);
    if (r.crawford_after - target).abs() > tol {
        return Err(Error::VerificationFailure(format!(
            "lambda_min of the rotated B is {}, expected {target}",
            r.crawford_after
        )));
    }
    let n = a.nrows();
    let i = C64::new(0.0, 1.0);
    let rot = C64::from_polar(1.0, -r.psi);
    let lhs = Mat::from_fn(n, n, |p, q| r.a_tilde[(p, q)] + i * r.b_tilde[(p, q)]);
    let rhs = Mat::from_fn(n, n, |p, q| {
        rot * (a[(p, q)] + r.delta_a[(p, q)] + i * (b[(p, q)] + r.delta_b[(p, q)]))
    });
    let err = max_abs_diff(lhs.as_ref(), rhs.as_ref());
    if err > REPAIR_ROTATION_TOL * scale {
        return Err(Error::VerificationFailure(format!(
            "rotation identity off by {err:.3e}"
        )));
    }
    Ok(())
}

/// Smallest eigenvalue.
pub fn lambda_min(m: &HermitianOperator) -> Result<f64> {
    if m.is_dense() || m.dim() < DENSE_THRESHOLD {
        return Ok(*hermitian_eigvals(m)?.last().expect("non-empty spectrum"));
    }
    Ok(-largest_eigpairs(&m.scaled(-1.0), 0.0, 1)?.lambda_max())
}

fn cholesky_succeeds(m: &HermitianOperator) -> bool {
    match (m.as_dense(), m.as_sparse()) {
        (Some(d), _) => d.as_ref().llt(Side::Lower).is_ok(),
        (_, Some(s)) => sparse_cholesky_succeeds(s),
        _ => false,
    }
}

fn sparse_cholesky_succeeds(s: &CsrMatrix) -> bool {
    let perm = rcm_order(s);
    let first = envelope_profile(s, &perm);
    EnvelopeCholesky::factor(s, 0.0, 1.0, &perm, &first).is_some()
}

/// Positive definiteness by a Cholesky attempt, falling back to the smallest eigenvalue.
pub fn is_positive_definite(m: &HermitianOperator) -> Result<bool> {
    if m.dim() == 0 {
        return Ok(false);
    }
    if cholesky_succeeds(m) {
        return Ok(true);
    }
    Ok(lambda_min(m)? > 0.0)
}

#[derive(Clone, Debug)]
pub struct Hyperbolicity {
    pub hyperbolic: bool,
    pub crawford: f64,
    pub witness: InnerRadiusResult,
}

/// Whether `lambda^2 Aq + lambda Bq + Cq` is hyperbolic, decided through its linearization.
pub fn is_hyperbolic(
    aq: &HermitianOperator,
    bq: &HermitianOperator,
    cq: &HermitianOperator,
    opts: &InnerRadiusOptions,
) -> Result<Hyperbolicity> {
    if !is_positive_definite(aq)? {
        return Err(Error::NotPositiveDefiniteMass);
    }
    let qep = Qep {
        mass: aq.clone(),
        damping: bq.clone(),
        stiffness: cq.clone(),
    };
    hyperbolic_qep(&qep, opts)
}

pub fn hyperbolic_qep(qep: &Qep, opts: &InnerRadiusOptions) -> Result<Hyperbolicity> {
    let (a1, b1) = qep_linearization(qep)?;
    let c = crawford_number(&a1, &b1, opts)?;
    Ok(Hyperbolicity {
        hyperbolic: c.is_definite,
        crawford: c.gamma,
        witness: c.witness,
    })
}

#[derive(Clone, Debug)]
pub struct SaddleShift {
    /// `S - mu J` is positive definite.
    pub mu: f64,
    pub lambda_min: f64,
    pub crawford: f64,
    pub witness: InnerRadiusResult,
}

/// `diag(I_n, -I_m)`, dense or sparse.
pub fn signature_matrix(n: usize, m: usize, dense: bool) -> Result<HermitianOperator> {
    let d: Vec<f64> = (0..n + m).map(|i| if i < n { 1.0 } else { -1.0 }).collect();
    if dense {
        return Ok(HermitianOperator::diagonal(&d));
    }
    let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, C64::new(v, 0.0))).collect();
    HermitianOperator::sparse(CsrMatrix::from_triplets(n + m, &t)?)
}

/// A shift `mu` with `S - mu J` positive definite, `J = diag(I_n, -I_m)`, when `(S, J)` is definite.
///
/// Returns `None` when the pair is indefinite or only `-(S - mu J)` can be made definite.
pub fn saddle_shift(
    s: &HermitianOperator,
    n: usize,
    m: usize,
    opts: &InnerRadiusOptions,
) -> Result<Option<SaddleShift>> {
    if s.dim() != n + m {
        return Err(Error::DimensionMismatch {
            expected: n + m,
            found: s.dim(),
        });
    }
    let j = signature_matrix(n, m, s.is_dense())?;
    let c = crawford_number(s, &j, opts)?;
    if !c.is_definite {
        return Ok(None);
    }
    // -sin(phi') S + cos(phi') J is positive definite for phi' = phi - pi/2.
    let (sin, cos) = (c.witness.phi - FRAC_PI_2).sin_cos();
    if !(sin < 0.0) {
        return Ok(None);
    }
    let mu = cos / sin;
    let shifted = HermitianOperator::lincomb(&[(1.0, s), (-mu, &j)])?;
    let lambda_min = lambda_min(&shifted)?;
    if !(lambda_min > 0.0) || !is_positive_definite(&shifted)? {
        return Err(Error::VerificationFailure(format!(
            "S - mu J is not positive definite for mu = {mu} (lambda_min {lambda_min:.3e})"
        )));
    }
    Ok(Some(SaddleShift {
        mu,
        lambda_min,
        crawford: c.gamma,
        witness: c.witness,
    }))
}
