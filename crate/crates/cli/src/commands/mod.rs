mod fov;
mod gallery;
mod qep;
mod radius;
mod saddle;

use std::path::Path;

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

use inr_opt_core::definiteness::InnerRadiusResult;
use inr_opt_core::levelset::HermitianParts;
use inr_opt_core::linalg::{CsrMatrix, HermitianOperator};
use inr_opt_core::support::Status;

use crate::args::{Command, InputArgs};
use crate::error::{CliError, CliResult};
use crate::mtx::{self, Layout};
use crate::output::Report;

pub fn run(command: &Command) -> CliResult<Report> {
    match command {
        Command::Inr(a) => radius::inr(a),
        Command::Definite(a) => radius::definite(a),
        Command::Distance(a) => radius::distance(a),
        Command::Hyperbolic(a) => qep::hyperbolic(a),
        Command::Saddle(a) => saddle::saddle(a),
        Command::Gallery(a) => gallery::gallery(a),
        Command::Fov(a) => fov::fov(a),
    }
}

fn square(m: &mtx::MtxMatrix, path: &Path) -> CliResult<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{}: expected a square matrix, found {}x{}",
            path.display(),
            m.rows,
            m.cols
        )))
    }
}

/// A Hermitian matrix; coordinate files stay sparse.
pub(crate) fn read_hermitian(path: &Path) -> CliResult<HermitianOperator> {
    let m = mtx::read(path)?;
    square(&m, path)?;
    let op = match m.layout {
        Layout::Coordinate => HermitianOperator::sparse(CsrMatrix::from_triplets(m.rows, &m.entries)?),
        Layout::Array => HermitianOperator::dense(m.to_dense()),
    };
    op.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// `(A, B)` with `C = A + iB`, read either from one complex file or from two Hermitian ones.
pub(crate) fn read_pair(input: &InputArgs) -> CliResult<(HermitianOperator, HermitianOperator)> {
    if let Some(paths) = &input.pair {
        return Ok((read_hermitian(&paths[0])?, read_hermitian(&paths[1])?));
    }
    let path = input
        .matrix
        .as_deref()
        .ok_or_else(|| CliError::Usage("one of --matrix or --pair is required".into()))?;
    let m = mtx::read(path)?;
    square(&m, path)?;
    if m.layout == Layout::Array {
        let parts = HermitianParts::from_complex(m.to_dense().as_ref())?;
        return Ok((parts.a(), parts.b()));
    }
    let half = C64::new(0.5, 0.0);
    let minus_half_i = C64::new(0.0, -0.5);
    let mut a = Vec::with_capacity(2 * m.entries.len());
    let mut b = Vec::with_capacity(2 * m.entries.len());
    for &(i, j, v) in &m.entries {
        a.push((i, j, v * half));
        a.push((j, i, v.conj() * half));
        b.push((i, j, v * minus_half_i));
        b.push((j, i, -v.conj() * minus_half_i));
    }
    Ok((
        HermitianOperator::sparse(CsrMatrix::from_triplets(m.rows, &a)?)?,
        HermitianOperator::sparse(CsrMatrix::from_triplets(m.rows, &b)?)?,
    ))
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIterations => "max_iterations",
    }
}

/// The scalar summary of an inner radius solve, plus its traces when asked.
pub(crate) fn radius_fields(r: &InnerRadiusResult, trace: bool) -> Map<String, Value> {
    let mut f = Map::new();
    f.insert("zeta".into(), json!(r.zeta));
    f.insert("theta_star".into(), json!(r.theta_star));
    f.insert("f_star".into(), json!(r.f_star));
    f.insert("phi".into(), json!(r.phi));
    f.insert("zero_in_fov".into(), json!(r.zero_in_fov));
    f.insert("method".into(), json!(r.method.name()));
    f.insert("iterations".into(), json!(r.run.iterations));
    f.insert("lower_bound".into(), json!(r.run.lower_bound));
    f.insert("status".into(), json!(status_name(r.run.status)));
    if let Some(s) = &r.subspace {
        f.insert("subspace_dim".into(), json!(s.final_dim));
        f.insert("full_value".into(), json!(s.full_value));
        f.insert("discrepancy".into(), json!(s.discrepancy));
        if let Some(note) = &s.stagnation {
            f.insert(
                "stagnation".into(),
                json!({ "iteration": note.iteration, "gap": note.gap }),
            );
        }
    }
    if trace {
        let evals: Vec<Value> = r
            .run
            .trace
            .iter()
            .map(|e| json!({ "k": e.k, "omega": e.omega, "value": e.value, "lower_bound": e.lower_bound }))
            .collect();
        f.insert("trace".into(), Value::Array(evals));
        if let Some(t) = &r.levelset_trace {
            f.insert(
                "levelset".into(),
                json!({
                    "estimates": t.estimates,
                    "intervals_per_iter": t.intervals_per_iter,
                    "max_interval_length": t.max_interval_length,
                }),
            );
        }
        if let Some(s) = &r.subspace {
            let steps: Vec<Value> = s
                .steps
                .iter()
                .map(|st| json!({ "k": st.k, "dim": st.dim, "omega_next": st.omega_next, "reduced_min": st.reduced_min }))
                .collect();
            f.insert("subspace_steps".into(), Value::Array(steps));
        }
    }
    f
}

pub(crate) fn report_for(command: &str, r: &InnerRadiusResult, fields: Map<String, Value>) -> Report {
    let mut report = Report::new(command, fields);
    report.converged = r.converged();
    report
}
