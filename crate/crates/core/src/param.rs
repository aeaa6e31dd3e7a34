//! One-parameter Hermitian families `A(w) = sum_j f_j(w) A_j`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigvals, largest_eigpairs, spectral_norm_ub, Basis, HermitianOperator,
    DENSE_THRESHOLD,
};

pub const DEFAULT_EPS_CLUSTER: f64 = 1e-6;
/// Largest eigenvector cluster gathered at one point.
pub const MAX_CLUSTER: usize = 10;

/// Value, first and second derivative at a point.
pub type CoefficientFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// Scalar coefficient function with two derivatives.
#[derive(Clone)]
pub enum ScalarFn {
    Cos,
    Sin,
    Const(f64),
    /// Coefficients in increasing degree.
    Poly(Vec<f64>),
    Custom(CoefficientFn),
}

impl ScalarFn {
    pub fn eval(&self, w: f64) -> [f64; 3] {
        match self {
            ScalarFn::Cos => [w.cos(), -w.sin(), -w.cos()],
            ScalarFn::Sin => [w.sin(), w.cos(), -w.sin()],
            ScalarFn::Const(c) => [*c, 0.0, 0.0],
            ScalarFn::Poly(c) => [0, 1, 2].map(|d| poly_derivative(c, w, d)),
            ScalarFn::Custom(f) => f(w),
        }
    }

    pub fn value(&self, w: f64) -> f64 {
        self.eval(w)[0]
    }
}

// d-th derivative of a polynomial, by Horner.
fn poly_derivative(c: &[f64], w: f64, d: usize) -> f64 {
    let mut acc = 0.0;
    for k in (d..c.len()).rev() {
        let falling: f64 = (0..d).map(|i| (k - i) as f64).product();
        acc = acc * w + c[k] * falling;
    }
    acc
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Cos => write!(f, "cos"),
            ScalarFn::Sin => write!(f, "sin"),
            ScalarFn::Const(c) => write!(f, "const({c})"),
            ScalarFn::Poly(c) => write!(f, "poly{c:?}"),
            ScalarFn::Custom(_) => write!(f, "custom"),
        }
    }
}

/// Closed parameter interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    lo: f64,
    hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParams(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn circle() -> Self {
        Self { lo: 0.0, hi: TAU }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, w: f64) -> bool {
        (self.lo..=self.hi).contains(&w)
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: ScalarFn,
    pub matrix: HermitianOperator,
}

/// The family `A(w) = sum_j f_j(w) A_j` over a closed interval.
#[derive(Clone, Debug)]
pub struct ParamHermitian {
    terms: Vec<Term>,
    domain: Domain,
    trig: bool,
}

/// Largest eigenvalue at a point with slope information.
#[derive(Clone, Debug)]
pub struct EigEval {
    pub omega: f64,
    pub lambda_max: f64,
    /// `Re(v* A'(w) v)` for the computed top eigenvector.
    pub derivative: f64,
    pub eigvec: Vec<C64>,
    pub cluster_size: usize,
    /// Extreme eigenvalues of `U* A'(w) U` over the cluster eigenvectors `U`.
    pub slope_range: (f64, f64),
}

/// Convex hull of the one-sided derivatives at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClarkeInterval {
    pub lo: f64,
    pub hi: f64,
    pub contains_zero_strictly: bool,
}

impl ClarkeInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        Self {
            lo,
            hi,
            contains_zero_strictly: lo < 0.0 && 0.0 < hi,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl ParamHermitian {
    pub fn new(terms: Vec<Term>, domain: Domain) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidParams("a family needs at least one term".into()));
        };
        let n = first.matrix.dim();
        if let Some(t) = terms.iter().find(|t| t.matrix.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.matrix.dim(),
            });
        }
        Ok(Self {
            terms,
            domain,
            trig: false,
        })
    }

    /// `A cos w + B sin w` on `[0, 2pi]`.
    pub fn trig(a: HermitianOperator, b: HermitianOperator) -> Result<Self> {
        let mut p = Self::new(
            vec![
                Term {
                    coeff: ScalarFn::Cos,
                    matrix: a,
                },
                Term {
                    coeff: ScalarFn::Sin,
                    matrix: b,
                },
            ],
            Domain::circle(),
        )?;
        p.trig = true;
        Ok(p)
    }

    pub fn is_trig(&self) -> bool {
        self.trig
    }

    /// `(A, B)` of a trigonometric family.
    pub fn trig_pair(&self) -> Option<(&HermitianOperator, &HermitianOperator)> {
        self.trig
            .then(|| (&self.terms[0].matrix, &self.terms[1].matrix))
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.terms[0].matrix.dim()
    }

    fn combine(&self, w: f64, order: usize) -> HermitianOperator {
        let coeffs: Vec<(f64, &HermitianOperator)> = self
            .terms
            .iter()
            .map(|t| (t.coeff.eval(w)[order], &t.matrix))
            .collect();
        HermitianOperator::lincomb(&coeffs).expect("terms share a dimension")
    }

    pub fn evaluate(&self, w: f64) -> HermitianOperator {
        self.combine(w, 0)
    }

    pub fn derivative_matrix(&self, w: f64) -> HermitianOperator {
        self.combine(w, 1)
    }

    pub fn second_derivative_matrix(&self, w: f64) -> HermitianOperator {
        self.combine(w, 2)
    }

    /// Sum of the Frobenius norms of the coefficient matrices; a cheap magnitude for tolerances.
    pub fn norm_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.matrix.frobenius_norm()).sum()
    }

    pub fn lambda_max(&self, w: f64) -> Result<f64> {
        let m = self.evaluate(w);
        if m.is_dense() || m.dim() < DENSE_THRESHOLD {
            Ok(hermitian_eigvals(&m)?[0])
        } else {
            Ok(largest_eigpairs(&m, 0.0, 1)?.lambda_max())
        }
    }

    pub fn eig_max_eval(&self, w: f64, eps_cluster: f64) -> Result<EigEval> {
        let m = self.evaluate(w);
        let cap = if m.is_dense() || m.dim() < DENSE_THRESHOLD {
            m.dim()
        } else {
            MAX_CLUSTER
        };
        let top = largest_eigpairs(&m, eps_cluster, cap)?;
        let d = self.derivative_matrix(w);
        let v = top.vector(0);
        let derivative = d.quadratic_form(&v).re;
        let slope_range = if top.len() == 1 {
            (derivative, derivative)
        } else {
            let small = HermitianOperator::dense_trusted(d.project(top.vectors.as_ref()));
            let ev = hermitian_eigvals(&small)?;
            (ev[ev.len() - 1], ev[0])
        };
        Ok(EigEval {
            omega: w,
            lambda_max: top.lambda_max(),
            derivative,
            eigvec: v,
            cluster_size: top.len(),
            slope_range,
        })
    }

    pub fn clarke_interval(&self, w: f64, eps_cluster: f64) -> Result<ClarkeInterval> {
        let e = self.eig_max_eval(w, eps_cluster)?;
        Ok(ClarkeInterval::new(e.slope_range.0, e.slope_range.1))
    }

    /// The reduced family `V* A(w) V`.
    pub fn project(&self, basis: &Basis) -> Result<Self> {
        if basis.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: basis.dim(),
            });
        }
        let v = basis.to_mat();
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.clone(),
                matrix: HermitianOperator::dense_trusted(t.matrix.project(v.as_ref())),
            })
            .collect();
        Ok(Self {
            terms,
            domain: self.domain,
            trig: self.trig,
        })
    }
}

/// The curvature bound `-(||A|| + ||B||)` for `A cos w + B sin w`.
pub fn default_gamma_trig(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(-(spectral_norm_ub(a)? + spectral_norm_ub(b)?))
}
