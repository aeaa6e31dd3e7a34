//! Observed convergence order of error sequences.

/// Leading errors down to (not including) the first one at or below `floor`.
pub fn above_floor(errors: &[f64], floor: f64) -> Vec<f64> {
    errors.iter().copied().take_while(|&e| e > floor).collect()
}

/// Least-squares order `p` in `log(e_{k+2}/e_{k+1}) ~ p log(e_{k+1}/e_k)`.
///
/// Needs at least three positive errors; `None` otherwise. Quadratic convergence gives values
/// near 2, linear convergence values near 1.
pub fn fitted_order(errors: &[f64]) -> Option<f64> {
    if errors.len() < 3 || errors.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return None;
    }
    let steps: Vec<f64> = errors.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let (num, den) = steps
        .windows(2)
        .fold((0.0, 0.0), |(n, d), w| (n + w[0] * w[1], d + w[0] * w[0]));
    (den > 0.0).then(|| num / den)
}

/// Per-step reduction factors `e_{k+1} / e_k`.
pub fn reduction_factors(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[1] / w[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_sequence() {
        let e: Vec<f64> = (0..4).map(|k| 0.1f64.powi(1 << k)).collect();
        assert!((fitted_order(&e).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn linear_sequence() {
        let e: Vec<f64> = (0..8).map(|k| 0.3f64.powi(k)).collect();
        assert!((fitted_order(&e).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn floor_trims_the_tail() {
        assert_eq!(above_floor(&[1.0, 1e-3, 1e-17, 1e-2], 1e-15), vec![1.0, 1e-3]);
        assert!(fitted_order(&[1.0, 0.1]).is_none());
        assert!(fitted_order(&[1.0, 0.0, 0.1]).is_none());
    }
}
