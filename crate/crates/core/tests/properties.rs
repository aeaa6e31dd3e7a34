use std::f64::consts::TAU;

use faer::Mat;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use inr_opt_core::definiteness::{
    crawford_number, inner_numerical_radius, nearest_definite_pair, InnerRadiusOptions, Method,
    RepairOptions,
};
use inr_opt_core::levelset::{level_intervals, HermitianParts};
use inr_opt_core::linalg::{
    hermitian_eig, hermitian_eigvals, orthonormal_extend, pencil_unit_eigs, spectral_norm_ub,
    Basis, HermitianOperator, DEFAULT_DROP_TOL,
};
use inr_opt_core::param::ParamHermitian;
use inr_opt_core::subspace::{subspace_minimize, verify_interpolation, SubspaceOptions};
use inr_opt_core::support::{eigopt_run, SupportOptions};

fn complex_matrix(rng: &mut ChaCha8Rng, n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianOperator {
    let g = complex_matrix(rng, n);
    HermitianOperator::dense(Mat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5)).unwrap()
}

fn pair(seed: u64, n: usize) -> (HermitianOperator, HermitianOperator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (hermitian(&mut rng, n), hermitian(&mut rng, n))
}

fn family(seed: u64, n: usize) -> ParamHermitian {
    let (a, b) = pair(seed, n);
    ParamHermitian::trig(a, b).unwrap()
}

fn scale(p: &ParamHermitian) -> f64 {
    p.terms()
        .iter()
        .map(|t| spectral_norm_ub(&t.matrix).unwrap())
        .sum::<f64>()
        .max(1.0)
}

/// Dense grid over the circle followed by golden-section refinement around the best point.
fn grid_minimum(p: &ParamHermitian, points: usize) -> f64 {
    let h = TAU / points as f64;
    let (mut best_w, mut best) = (0.0, f64::INFINITY);
    for i in 0..points {
        let w = i as f64 * h;
        let v = p.lambda_max(w).unwrap();
        if v < best {
            best = v;
            best_w = w;
        }
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_w - h, best_w + h);
    for _ in 0..80 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if p.lambda_max(x1).unwrap() < p.lambda_max(x2).unwrap() {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.min(p.lambda_max(0.5 * (lo + hi)).unwrap())
}

fn opts(method: Method) -> InnerRadiusOptions {
    InnerRadiusOptions {
        method,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn support_functions_lie_below(seed in any::<u64>()) {
        let p = family(seed, 5);
        let run = eigopt_run(&p, &SupportOptions::default()).unwrap();
        let s = scale(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..200 {
            let w = rng.random_range(0.0..TAU);
            let f = p.lambda_max(w).unwrap();
            for q in run.model.supports() {
                prop_assert!(q.eval(w) <= f + 1e-10 * s, "q at {} exceeds f by {}", w, q.eval(w) - f);
            }
        }
    }

    #[test]
    fn model_minimizer_is_exact(seed in any::<u64>()) {
        let p = family(seed, 5);
        let run = eigopt_run(&p, &SupportOptions { max_iter: 12, ..Default::default() }).unwrap();
        let (_, m) = run.model_min.unwrap();
        for i in 0..=10_000 {
            let w = TAU * i as f64 / 10_000.0;
            prop_assert!(m <= run.model.eval(w) + 1e-12);
        }
    }

    #[test]
    fn bounds_sandwich_the_minimum(seed in any::<u64>()) {
        let p = family(seed, 5);
        let run = eigopt_run(&p, &SupportOptions::default()).unwrap().result;
        let min = grid_minimum(&p, 20_000);
        let s = scale(&p);
        let mut upper = f64::INFINITY;
        let mut lower = f64::NEG_INFINITY;
        for e in &run.trace {
            upper = upper.min(e.value);
            prop_assert!(upper >= min - 1e-8 * s);
            if let Some(l) = e.lower_bound {
                prop_assert!(l >= lower - 1e-12 * s);
                prop_assert!(l <= min + 1e-8 * s);
                lower = l;
            }
        }
    }

    #[test]
    fn all_methods_match_grid_search(seed in any::<u64>()) {
        let p = family(seed, 5);
        let oracle = grid_minimum(&p, 100_000);
        let (a, b) = p.trig_pair().unwrap();
        for m in [Method::Levelset, Method::Support, Method::Subspace] {
            let r = inner_numerical_radius(HermitianParts::from_pair(a, b).unwrap().complex().as_ref(), &opts(m)).unwrap();
            prop_assert!((r.f_star - oracle).abs() <= 1e-6, "{}: {} vs {}", m, r.f_star, oracle);
        }
    }

    #[test]
    fn repair_certificate(seed in any::<u64>()) {
        let (a, b) = pair(seed, 6);
        let delta = 0.05;
        let lev = opts(Method::Levelset);
        let before = crawford_number(&a, &b, &lev).unwrap();
        let r = nearest_definite_pair(&a, &b, delta, &RepairOptions { inner: lev.clone(), ..Default::default() }).unwrap();
        let a2 = HermitianOperator::dense(a.to_dense() + &r.delta_a).unwrap();
        let b2 = HermitianOperator::dense(b.to_dense() + &r.delta_b).unwrap();
        let after = crawford_number(&a2, &b2, &lev).unwrap();
        let s = (spectral_norm_ub(&a).unwrap() + spectral_norm_ub(&b).unwrap()).max(1.0);
        prop_assert!(after.is_definite);
        prop_assert!((after.gamma - delta.max(before.gamma)).abs() <= 1e-7 * s,
            "{} vs {}", after.gamma, delta.max(before.gamma));
        if r.distance > 0.0 {
            let d = (after.witness.phi - (r.witness.theta_star + std::f64::consts::PI)).rem_euclid(TAU);
            prop_assert!(d.min(TAU - d) <= 1e-6, "boundary angle off by {}", d);
        }
    }

    #[test]
    fn zeta_scales_and_rotates(seed in any::<u64>(), theta in 0.0..TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = complex_matrix(&mut rng, 5);
        let lev = opts(Method::Levelset);
        let z = inner_numerical_radius(c.as_ref(), &lev).unwrap().zeta;
        let scaled = Mat::from_fn(5, 5, |i, j| c[(i, j)] * 2.5);
        let zs = inner_numerical_radius(scaled.as_ref(), &lev).unwrap().zeta;
        prop_assert!((zs - 2.5 * z).abs() <= 1e-8 * zs.max(1.0));
        let rot = C64::from_polar(1.0, -theta);
        let rotated = Mat::from_fn(5, 5, |i, j| c[(i, j)] * rot);
        let zr = inner_numerical_radius(rotated.as_ref(), &lev).unwrap().zeta;
        prop_assert!((zr - z).abs() <= 1e-8, "{} vs {}", zr, z);
    }

    #[test]
    fn subspace_traces_are_monotone_and_interpolating(seed in any::<u64>()) {
        let p = family(seed, 30);
        let s = scale(&p);
        let run = subspace_minimize(&p, &SubspaceOptions { seed, ..Default::default() }).unwrap();
        let min = inr_opt_core::support::eigopt_minimize(&p, &SupportOptions::default()).unwrap().f_star;
        let st = &run.state;
        for w in st.trace.windows(2) {
            prop_assert!(w[0].reduced_min <= w[1].reduced_min + 1e-10 * s);
        }
        for (step, full) in st.trace.iter().zip(&st.full_values[1..]) {
            prop_assert!(step.reduced_min <= min + 1e-8 * s);
            prop_assert!(*full >= min - 1e-8 * s);
        }
        for &c in &st.cluster_sizes {
            prop_assert!(c >= 1 && c <= st.max_cluster);
        }
        let report = verify_interpolation(st, &p, st.iterates.len()).unwrap();
        prop_assert!(report.max_discrepancy <= 1e-8 * s, "{}", report.max_discrepancy);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pencil_angles_are_sound_and_complete(seed in any::<u64>(), theta0 in 0.0..TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = complex_matrix(&mut rng, 5);
        let parts = HermitianParts::from_complex(c.as_ref()).unwrap();
        let alpha = parts.lambda_max(theta0).unwrap();
        let norm = c.as_ref().singular_values().unwrap()[0].max(1.0);
        let angles = pencil_unit_eigs(c.as_ref(), alpha, 1e-8).unwrap();
        for &t in &angles {
            let gap = hermitian_eigvals(&parts.at(t)).unwrap()
                .iter()
                .map(|l| (l - alpha).abs())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(gap <= 1e-6 * norm, "angle {} misses the level by {}", t, gap);
        }
        let found = angles.iter().any(|&t| {
            let d = (t - theta0).rem_euclid(TAU);
            d.min(TAU - d) <= 1e-6
        });
        prop_assert!(found, "{} not among {:?}", theta0, angles);
    }

    #[test]
    fn derivative_matches_finite_differences(seed in any::<u64>(), w in 0.0..TAU) {
        let p = family(seed, 5);
        let e = p.eig_max_eval(w, 1e-6).unwrap();
        prop_assume!(e.cluster_size == 1);
        let h = 1e-5;
        let fd = (p.lambda_max(w + h).unwrap() - p.lambda_max(w - h).unwrap()) / (2.0 * h);
        let dnorm = spectral_norm_ub(&p.derivative_matrix(w)).unwrap();
        prop_assert!((e.derivative - fd).abs() <= 1e-6 * dnorm.max(1.0), "{} vs {}", e.derivative, fd);
    }

    #[test]
    fn lambda_max_is_lipschitz(seed in any::<u64>(), w1 in 0.0..TAU, w2 in 0.0..TAU) {
        let p = family(seed, 5);
        let lip = scale(&p);
        let d = (p.lambda_max(w1).unwrap() - p.lambda_max(w2).unwrap()).abs();
        prop_assert!(d <= lip * (w1 - w2).abs() + 1e-12);
    }

    #[test]
    fn eigenvalues_sum_to_trace(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = hermitian(&mut rng, 8);
        let e = hermitian_eig(&m).unwrap();
        let trace: f64 = (0..8).map(|i| m.get(i, i).re).sum();
        let norm = spectral_norm_ub(&m).unwrap();
        prop_assert!((e.values.iter().sum::<f64>() - trace).abs() <= 1e-10 * norm * 8.0);
        for w in e.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn extension_stays_orthonormal(seed in any::<u64>(), count in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = Basis::empty(6);
        for _ in 0..count {
            let w: Vec<C64> = (0..6).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            v = orthonormal_extend(&v, &[w.clone(), w], DEFAULT_DROP_TOL).unwrap();
            prop_assert!(v.orthogonality_error() <= 1e-10);
            prop_assert!(v.len() <= 6);
        }
    }

    #[test]
    fn projections_are_nested(seed in any::<u64>(), w in 0.0..TAU) {
        let p = family(seed, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let cols: Vec<Vec<C64>> = (0..4)
            .map(|_| (0..8).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect())
            .collect();
        let v1 = orthonormal_extend(&Basis::empty(8), &cols[..2], DEFAULT_DROP_TOL).unwrap();
        let v2 = orthonormal_extend(&v1, &cols[2..], DEFAULT_DROP_TOL).unwrap();
        let l1 = p.project(&v1).unwrap().lambda_max(w).unwrap();
        let l2 = p.project(&v2).unwrap().lambda_max(w).unwrap();
        let l = p.lambda_max(w).unwrap();
        prop_assert!(l1 <= l2 + 1e-12 && l2 <= l + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn level_arcs_match_a_grid(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = complex_matrix(&mut rng, 4);
        let parts = HermitianParts::from_complex(c.as_ref()).unwrap();
        let alpha = parts.lambda_max(0.0).unwrap();
        let arcs = level_intervals(c.as_ref(), alpha, 1e-7).unwrap();
        let mut mismatches = 0;
        for i in 0..10_000 {
            let t = TAU * (i as f64 + 0.5) / 10_000.0;
            let below = parts.lambda_max(t).unwrap() < alpha;
            let inside = arcs.iter().any(|a| a.contains(t));
            if below != inside {
                mismatches += 1;
            }
        }
        // Only samples within round-off of an arc endpoint may disagree.
        prop_assert!(mismatches <= 2 * arcs.len(), "{} mismatches", mismatches);
    }
}
