use arithsphere::grid::{lp_norm, BoxSpec};
use arithsphere::multiplier::{error_multiplier_scan, ScanConfig};
use arithsphere::norms::bounds::{
    eta, interpolation_bound, parse_exponent, substitute_parameters, trivial_bound_value, Q,
};
use arithsphere::norms::power::{power_iteration_lower_bound, Domain, PowerConfig};
use arithsphere::norms::ExponentFit;
use arithsphere::number::{gcd, jacobi_r4, totient, units};
use arithsphere::operators::{average, average_with, Budget, Path};
use arithsphere::sums::{dual_identity_check, gauss_sum, kloosterman, ramanujan};
use arithsphere::{
    count_shell, enumerate_shell, ArithmeticMeasure, DiagonalForm, GridFunction, Strategy,
};
use proptest::prelude::*;

fn measure(d: usize, lambda: u64) -> ArithmeticMeasure {
    try_measure(d, lambda).unwrap()
}

/// `None` for empty shells.
fn try_measure(d: usize, lambda: u64) -> Option<ArithmeticMeasure> {
    let form = DiagonalForm::sphere(d).unwrap();
    ArithmeticMeasure::new(enumerate_shell(form, lambda, 1 << 22).unwrap()).ok()
}

fn grid(d: usize, side: usize, values: Vec<f64>) -> GridFunction {
    let bx = BoxSpec::new(side, vec![-(side as i64 / 2); d]);
    let n = bx.cells();
    GridFunction::from_values(bx, values.into_iter().cycle().take(n).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counting_matches_enumeration(d in 2usize..=5, k in 2u32..=3, lambda in 0u64..120) {
        let form = DiagonalForm::new(d, k).unwrap();
        let shell = enumerate_shell(form, lambda, 1 << 22).unwrap();
        prop_assert_eq!(count_shell(form, lambda).unwrap(), shell.count());
        for x in shell.points() {
            prop_assert_eq!(form.eval(x), lambda as u128);
        }
    }

    #[test]
    fn four_squares_follow_jacobi(lambda in 1u64..20_000) {
        prop_assert_eq!(count_shell(DiagonalForm::sphere(4).unwrap(), lambda).unwrap(), jacobi_r4(lambda));
    }

    #[test]
    fn averages_preserve_mass_and_contract(
        lambda in 1u64..30,
        side in 1usize..6,
        values in prop::collection::vec(0.0f64..1.0, 1..40),
    ) {
        let mu = measure(4, lambda);
        let f = grid(4, side, values);
        let af = average(&f, &mu).unwrap();
        prop_assert!((af.sum() - f.sum()).abs() <= 1e-12 * f.sum().max(1.0));
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            prop_assert!(lp_norm(&af, p).unwrap() <= lp_norm(&f, p).unwrap() * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn sparse_and_dense_paths_agree(
        d in 2usize..=4,
        lambda in 1u64..25,
        side in 1usize..7,
        values in prop::collection::vec(-1.0f64..1.0, 1..30),
    ) {
        let mu = try_measure(d, lambda);
        prop_assume!(mu.is_some());
        let mu = mu.unwrap();
        let f = grid(d, side, values);
        let s = average_with(&f, &mu, Path::Sparse, Strategy::Sequential, Budget::default()).unwrap();
        let t = average_with(&f, &mu, Path::Dense, Strategy::Parallel, Budget::default()).unwrap();
        prop_assert!(s.max_abs_diff(&t) <= 1e-12);
    }

    #[test]
    fn averaging_is_self_adjoint(
        lambda in 1u64..20,
        a in prop::collection::vec(-1.0f64..1.0, 1..20),
        b in prop::collection::vec(-1.0f64..1.0, 1..20),
    ) {
        let mu = try_measure(3, lambda);
        prop_assume!(mu.is_some());
        let mu = mu.unwrap();
        let f = grid(3, 3, a);
        let g = grid(3, 4, b);
        let af = average(&f, &mu).unwrap();
        let ag = average(&g, &mu).unwrap();
        let lhs: f64 = (0..g.box_spec().cells())
            .map(|i| {
                let x = g.box_spec().point_of(i);
                af.get(&x) * g.get(&x)
            })
            .sum();
        let rhs: f64 = (0..f.box_spec().cells())
            .map(|i| {
                let x = f.box_spec().point_of(i);
                ag.get(&x) * f.get(&x)
            })
            .sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn ramanujan_is_multiplicative(q1 in 1u64..60, q2 in 1u64..60, n in -500i64..500) {
        prop_assume!(gcd(q1, q2) == 1);
        prop_assert_eq!(ramanujan(q1 * q2, n), ramanujan(q1, n) * ramanujan(q2, n));
        prop_assert_eq!(ramanujan(q1, 0), totient(q1) as i64);
    }

    #[test]
    fn quadratic_gauss_sums_have_square_root_size(q in 1u64..80, m in -50i64..50, pick in 0usize..1000) {
        prop_assume!(q % 2 == 1);
        let us = units(q);
        let a = us[pick % us.len()] as i64;
        let g = gauss_sum(DiagonalForm::sphere(2).unwrap(), a, q, &[m, 0]);
        prop_assert!((g.norm() - 1.0 / q as f64).abs() <= 1e-12);
    }

    #[test]
    fn sphere_kloosterman_sums_are_real(q in 1u64..40, lambda in 0i64..500, m in prop::collection::vec(-20i64..20, 4)) {
        let k = kloosterman(DiagonalForm::sphere(4).unwrap(), q, lambda, &m);
        prop_assert!(k.im.abs() <= 1e-12);
    }

    #[test]
    fn dual_identity_holds(d in 2usize..=4, q in 1u64..40, pick in 0usize..1000, x in prop::collection::vec(-100i64..100, 4)) {
        let us = units(q);
        let a = us[pick % us.len()] as i64;
        let r = dual_identity_check(DiagonalForm::sphere(d).unwrap(), a, q, &x[..d]).unwrap();
        prop_assert!(r <= 1e-9);
    }

    #[test]
    fn eta_is_the_interpolation_exponent(d in 2usize..40, k in 2u32..5, num in 0i64..=1000) {
        let p = Q::new(1000 + num, 1000);
        let params = substitute_parameters(DiagonalForm::new(d, k).unwrap()).unwrap();
        let bound = interpolation_bound(params.alpha, params.beta, params.gamma, p).unwrap();
        prop_assert_eq!(eta(&params, p).unwrap(), bound.exponent);
    }

    #[test]
    fn fractions_parse_exactly(a in 1i64..10_000, b in 1i64..10_000) {
        prop_assert_eq!(parse_exponent(&format!("{a}/{b}")).unwrap(), Q::new(a, b));
    }

    #[test]
    fn exact_power_laws_are_recovered(slope in -2.0f64..1.0, scale in 0.01f64..100.0) {
        let pairs: Vec<(u64, f64)> = [9u64, 25, 49, 101, 201, 401]
            .iter()
            .map(|&l| (l, scale * (l as f64).powf(slope)))
            .collect();
        let fit = ExponentFit::from_pairs(pairs, 1.5, 3.0).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-9);
        prop_assert!(fit.residual <= 1e-18);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn power_iteration_estimates_are_monotone_lower_bounds(
        lambda in 5u64..60,
        p in 1.2f64..2.0,
        seed in 0u64..100,
    ) {
        let mu = measure(4, lambda);
        let q = p / (p - 1.0);
        let est = power_iteration_lower_bound(
            &mu,
            p,
            q,
            Domain::symmetric_for(lambda),
            &PowerConfig { max_iters: 30, rel_tol: 1e-9 },
            seed,
            Strategy::default(),
            Budget::default(),
        )
        .unwrap();
        prop_assert!(est.history.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(est.history.last().is_none_or(|&h| h <= est.estimate));
        let delta = (mu.count() as f64).powf(1.0 / q - 1.0);
        prop_assert!(est.estimate >= delta * (1.0 - 1e-12));
        prop_assert!(est.estimate <= trivial_bound_value(4, lambda, p));
        // Riesz–Thorin between 1 → ∞ and 2 → 2
        prop_assert!(est.estimate <= (mu.count() as f64).powf(1.0 - 2.0 / p) * (1.0 + 1e-9));
    }

    #[test]
    fn scans_only_ever_raise_the_estimate(lambda in 5u64..80, seed in 0u64..1000) {
        let cfg = ScanConfig {
            random_samples: 300,
            rational_samples: 300,
            refine_candidates: 3,
            refine_rounds: 6,
            seed,
            ..ScanConfig::default()
        };
        let scan = error_multiplier_scan(&measure(4, lambda), &cfg, Strategy::default()).unwrap();
        prop_assert!(scan.trace.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(scan.report.sup_estimate, *scan.trace.last().unwrap());
    }
}
