use std::fs;

use serde_json::{json, Map};

use inr_opt_core::definiteness::{
    crawford_number, inner_numerical_radius_pair, nearest_definite_pair, RepairOptions,
};

use super::{radius_fields, read_pair, report_for};
use crate::args::{DistanceArgs, FamilyArg, InrArgs};
use crate::error::{CliError, CliResult};
use crate::mtx;
use crate::output::Report;

pub fn inr(args: &InrArgs) -> CliResult<Report> {
    let (a, b) = read_pair(&args.input)?;
    let r = inner_numerical_radius_pair(&a, &b, &args.solver.options())?;
    Ok(report_for("inr", &r, radius_fields(&r, args.solver.trace)))
}

pub fn definite(args: &InrArgs) -> CliResult<Report> {
    let (a, b) = read_pair(&args.input)?;
    let c = crawford_number(&a, &b, &args.solver.options())?;
    let mut f = Map::new();
    f.insert("is_definite".into(), json!(c.is_definite));
    f.insert("crawford".into(), json!(c.gamma));
    f.extend(radius_fields(&c.witness, args.solver.trace));
    Ok(report_for("definite", &c.witness, f))
}

pub fn distance(args: &DistanceArgs) -> CliResult<Report> {
    let (a, b) = read_pair(&args.input)?;
    let opts = RepairOptions {
        inner: args.solver.options(),
        family: args.family.into(),
    };
    let r = nearest_definite_pair(&a, &b, args.delta, &opts)?;

    let dir = &args.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Map::new();
    for (name, m) in [
        ("deltaA", &r.delta_a),
        ("deltaB", &r.delta_b),
        ("Atilde", &r.a_tilde),
        ("Btilde", &r.b_tilde),
    ] {
        let path = dir.join(format!("{name}.mtx"));
        fs::write(&path, mtx::format_dense(m.as_ref())).map_err(|e| CliError::io(&path, e))?;
        files.insert(name.into(), json!(path.display().to_string()));
    }

    let mut f = Map::new();
    f.insert("distance".into(), json!(r.distance));
    f.insert("delta".into(), json!(r.delta));
    f.insert("psi".into(), json!(r.psi));
    f.insert("lambda_min_Btilde".into(), json!(r.crawford_after));
    f.insert("crawford_before".into(), json!(r.crawford_before));
    f.insert("perturbation_norm".into(), json!(r.perturbation_norm));
    let family = match args.family {
        FamilyArg::Clipping => "clipping",
        FamilyArg::Scalar => "scalar",
    };
    f.insert("family".into(), json!(family));
    f.insert("theta_star".into(), json!(r.witness.theta_star));
    f.insert("f_star".into(), json!(r.witness.f_star));
    f.insert("method".into(), json!(r.witness.method.name()));
    f.insert("files".into(), files.into());
    Ok(report_for("distance", &r.witness, f))
}
