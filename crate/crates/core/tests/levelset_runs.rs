use inr_opt_core::gallery;
use inr_opt_core::levelset::{levelset_minimize, HermitianParts, LevelSetOptions};
use inr_opt_core::rate::{above_floor, fitted_order};
use inr_opt_core::support::Status;

#[test]
fn cheng_higham_estimates() {
    let (a, b) = gallery::cheng_higham7();
    let c = HermitianParts::from_pair(&a, &b).unwrap().complex();
    let run = levelset_minimize(c.as_ref(), &LevelSetOptions::default()).unwrap();
    let table = [
        0.8687683091642120,
        0.8119559545628993,
        0.8118872240421637,
        0.8118872239262381,
        0.8118872239262371,
    ];
    for (got, want) in run.trace.estimates[1..].iter().zip(&table) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    let fstar = run.result.f_star;
    let errors: Vec<f64> = run.trace.estimates[1..6].iter().map(|r| r - fstar).collect();
    let order = fitted_order(&above_floor(&errors, 1e-14)).unwrap();
    assert!(order >= 1.7);
}

#[test]
fn nonsmooth_tridiagonal_is_linear() {
    let c = gallery::tridiag_nonsmooth(10).unwrap();
    let run = levelset_minimize(c.as_ref(), &LevelSetOptions::default()).unwrap();
    assert_eq!(run.result.status, Status::Converged);
    assert!((run.result.f_star + 1.0).abs() < 1e-12, "{}", run.result.f_star);
    assert!((run.result.omega_star - 3.665191429188092).abs() < 1e-9);
    let errors: Vec<f64> = run.trace.estimates.iter().map(|r| r + 1.0).collect();
    let tail = above_floor(&errors, 1e-15);
    let order = fitted_order(&tail[tail.len().saturating_sub(6)..]).unwrap();
    assert!(order < 1.3, "order {order}");
}
