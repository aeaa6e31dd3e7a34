use std::f64::consts::TAU;

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde_json::{json, Map};

use inr_opt_core::definiteness::inner_numerical_radius_pair;
use inr_opt_core::linalg::{largest_eigpairs, HermitianOperator, DENSE_THRESHOLD};

use super::{read_pair, report_for};
use crate::args::FovArgs;
use crate::error::{CliError, CliResult};
use crate::output::{round15, Table};
use crate::output::Report;

/// `v* C v` for a top eigenvector `v` of `A cos theta + B sin theta`.
fn boundary_point(a: &HermitianOperator, b: &HermitianOperator, theta: f64) -> CliResult<C64> {
    let (s, c) = theta.sin_cos();
    let h = HermitianOperator::lincomb(&[(c, a), (s, b)])?;
    let v = largest_eigpairs(&h, 0.0, 1)?.vector(0);
    Ok(C64::new(a.quadratic_form(&v).re, b.quadratic_form(&v).re))
}

fn eigenvalues(a: &HermitianOperator, b: &HermitianOperator) -> CliResult<Vec<C64>> {
    let n = a.dim();
    if n >= DENSE_THRESHOLD {
        return Ok(Vec::new());
    }
    let (ad, bd) = (a.to_dense(), b.to_dense());
    let c = Mat::from_fn(n, n, |i, j| ad[(i, j)] + C64::i() * bd[(i, j)]);
    c.eigenvalues()
        .map_err(|e| CliError::Solver(inr_opt_core::Error::ConvergenceFailure(format!("eigenvalues of C: {e:?}"))))
}

pub fn fov(args: &FovArgs) -> CliResult<Report> {
    if args.samples < 3 {
        return Err(CliError::Usage(format!("--samples must be at least 3, got {}", args.samples)));
    }
    let (a, b) = read_pair(&args.input)?;
    let thetas: Vec<f64> = (0..args.samples).map(|i| TAU * i as f64 / args.samples as f64).collect();
    let points: Vec<C64> = thetas
        .par_iter()
        .map(|&t| boundary_point(&a, &b, t))
        .collect::<CliResult<_>>()?;
    let eigs = eigenvalues(&a, &b)?;
    let r = inner_numerical_radius_pair(&a, &b, &args.solver.options())?;
    let nearest = C64::from_polar(r.zeta, r.phi);

    let mut rows = Vec::with_capacity(points.len() + eigs.len() + 1);
    let num = |x: f64| round15(x).to_string();
    for (t, p) in thetas.iter().zip(&points) {
        rows.push(vec!["boundary".into(), num(*t), num(p.re), num(p.im)]);
    }
    for e in &eigs {
        rows.push(vec!["eigenvalue".into(), String::new(), num(e.re), num(e.im)]);
    }
    rows.push(vec!["zeta".into(), num(r.phi), num(nearest.re), num(nearest.im)]);

    let mut f = Map::new();
    f.insert(
        "points".into(),
        thetas
            .iter()
            .zip(&points)
            .map(|(t, p)| json!({ "theta": t, "re": p.re, "im": p.im }))
            .collect(),
    );
    f.insert(
        "eigenvalues".into(),
        eigs.iter().map(|e| json!({ "re": e.re, "im": e.im })).collect(),
    );
    f.insert(
        "zeta_point".into(),
        json!({ "zeta": r.zeta, "phi": r.phi, "re": nearest.re, "im": nearest.im }),
    );
    f.insert("zero_in_fov".into(), json!(r.zero_in_fov));
    let mut report = report_for("fov", &r, f);
    report.table = Some(Table {
        header: ["kind", "theta", "re", "im"].map(String::from).to_vec(),
        rows,
    });
    Ok(report)
}
