use rayon::prelude::*;
use serde_json::{json, Map, Value};

use inr_opt_core::definiteness::{hyperbolic_qep, is_hyperbolic, Hyperbolicity};
use inr_opt_core::gallery::qep_mass_spring;

use super::read_hermitian;
use crate::args::HyperbolicArgs;
use crate::error::{CliError, CliResult};
use crate::output::{round15, Report, Table};

fn verdict_fields(h: &Hyperbolicity) -> Map<String, Value> {
    let mut f = Map::new();
    f.insert("hyperbolic".into(), json!(h.hyperbolic));
    f.insert("verdict".into(), json!(if h.hyperbolic { "yes" } else { "no" }));
    f.insert("crawford".into(), json!(h.crawford));
    f.insert("theta_star".into(), json!(h.witness.theta_star));
    f.insert("f_star".into(), json!(h.witness.f_star));
    f.insert("method".into(), json!(h.witness.method.name()));
    f.insert("iterations".into(), json!(h.witness.run.iterations));
    f
}

pub fn hyperbolic(args: &HyperbolicArgs) -> CliResult<Report> {
    let opts = args.solver.options();
    if let Some(paths) = &args.qep {
        let [m, d, k] = [0, 1, 2].map(|i| read_hermitian(&paths[i]));
        let h = is_hyperbolic(&m?, &d?, &k?, &opts)?;
        let mut report = Report::new("hyperbolic", verdict_fields(&h));
        report.converged = h.witness.converged();
        return Ok(report);
    }

    let n = args
        .qep_mass_spring
        .ok_or_else(|| CliError::Usage("one of --qep or --qep-mass-spring is required".into()))?;
    if args.beta.is_empty() {
        return Err(CliError::Usage("--qep-mass-spring needs --beta".into()));
    }
    let runs: Vec<(f64, Hyperbolicity)> = args
        .beta
        .par_iter()
        .map(|&beta| Ok((beta, hyperbolic_qep(&qep_mass_spring(n, beta)?, &opts)?)))
        .collect::<Result<_, inr_opt_core::Error>>()?;
    let converged = runs.iter().all(|(_, h)| h.witness.converged());

    let with_beta = |beta: f64, h: &Hyperbolicity| {
        let mut f = Map::new();
        f.insert("n".into(), json!(n));
        f.insert("beta".into(), json!(beta));
        f.extend(verdict_fields(h));
        f
    };
    let mut report = if let [(beta, h)] = runs.as_slice() {
        Report::new("hyperbolic", with_beta(*beta, h))
    } else {
        let rows: Vec<Value> = runs.iter().map(|(b, h)| Value::Object(with_beta(*b, h))).collect();
        let mut f = Map::new();
        f.insert("sweep".into(), Value::Array(rows));
        let mut report = Report::new("hyperbolic", f);
        report.table = Some(Table {
            header: ["n", "beta", "verdict", "crawford", "theta_star", "f_star"]
                .map(String::from)
                .to_vec(),
            rows: runs
                .iter()
                .map(|(b, h)| {
                    vec![
                        n.to_string(),
                        b.to_string(),
                        (if h.hyperbolic { "yes" } else { "no" }).to_string(),
                        round15(h.crawford).to_string(),
                        round15(h.witness.theta_star).to_string(),
                        round15(h.witness.f_star).to_string(),
                    ]
                })
                .collect(),
        });
        report
    };
    report.converged = converged;
    Ok(report)
}
