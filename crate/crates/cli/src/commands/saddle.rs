use serde_json::{json, Map, Value};

use inr_opt_core::definiteness::saddle_shift;
use inr_opt_core::gallery::synthetic_saddle;

use super::read_hermitian;
use crate::args::SaddleArgs;
use crate::error::{CliError, CliResult};
use crate::output::Report;

pub fn saddle(args: &SaddleArgs) -> CliResult<Report> {
    let (s, n, m) = match (&args.matrix, &args.synthetic) {
        (Some(path), _) => {
            let (Some(n), Some(m)) = (args.n, args.m) else {
                return Err(CliError::Usage("--matrix needs --n and --m".into()));
            };
            (read_hermitian(path)?, n, m)
        }
        (None, Some(v)) => {
            let (n, m) = (v[0] as usize, v[1] as usize);
            (synthetic_saddle(n, m, v[2])?.matrix, n, m)
        }
        (None, None) => return Err(CliError::Usage("one of --matrix or --synthetic is required".into())),
    };
    let shift = saddle_shift(&s, n, m, &args.solver.options())?;

    let mut f = Map::new();
    f.insert("n".into(), json!(n));
    f.insert("m".into(), json!(m));
    f.insert("definite".into(), json!(shift.is_some()));
    let converged = match &shift {
        Some(sh) => {
            f.insert("mu".into(), json!(sh.mu));
            f.insert("lambda_min".into(), json!(sh.lambda_min));
            f.insert("crawford".into(), json!(sh.crawford));
            f.insert("theta_star".into(), json!(sh.witness.theta_star));
            sh.witness.converged()
        }
        None => {
            for key in ["mu", "lambda_min", "crawford"] {
                f.insert(key.into(), Value::Null);
            }
            true
        }
    };
    let mut report = Report::new("saddle", f);
    report.converged = converged;
    Ok(report)
}
