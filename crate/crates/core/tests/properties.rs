//! Invariants checked on generated inputs.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nccover::action::{averaged_algebra, canonical_map_matrix, fixed_point_algebra, random_action, solve_canonical, FiniteGroup};
use nccover::circle;
use nccover::connections;
use nccover::dixmier::{self, Provenance, SingularSeries};
use nccover::frames::{self, BaseRep};
use nccover::linalg::{self, fro_norm, random, C64};
use nccover::torus::{self, TorusElement};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polar_parts_reconstruct(seed in any::<u64>(), n in 1usize..7, m in 1usize..7) {
        let x = random::gaussian(&mut rng(seed), n, m);
        let p = linalg::polar(&x);
        prop_assert!(fro_norm(&(&p.isometry * &p.absval - &x)) <= 1e-10 * fro_norm(&x).max(1.0));
        prop_assert!(linalg::hermitian_defect(&p.absval) <= 1e-12);
    }

    #[test]
    fn singular_values_square_to_gram_spectrum(seed in any::<u64>(), n in 1usize..9, m in 1usize..9) {
        let x = random::gaussian(&mut rng(seed), n, m);
        let s = linalg::singular_values(&x);
        let mut gram = linalg::herm_eig(&(x.adjoint() * &x)).unwrap().values;
        gram.sort_by(|a, b| b.total_cmp(a));
        for (k, sk) in s.iter().enumerate() {
            prop_assert!((sk * sk - gram[k].max(0.0)).abs() <= 1e-10 * gram[0].max(1.0));
        }
    }

    #[test]
    fn pseudo_inverse_satisfies_penrose(seed in any::<u64>(), n in 1usize..7, k in 1usize..4) {
        let mut r = rng(seed);
        // rank at most k
        let x = random::gaussian(&mut r, n, k) * random::gaussian(&mut r, k, n);
        let p = linalg::pinv(&x);
        let scale = fro_norm(&x).max(1.0);
        prop_assert!(fro_norm(&(&x * &p * &x - &x)) <= 1e-8 * scale);
        prop_assert!(linalg::hermitian_defect(&(&x * &p)) <= 1e-8);
    }

    #[test]
    fn least_squares_residual_is_orthogonal_to_range(seed in any::<u64>(), rows in 1usize..9, cols in 1usize..9) {
        let mut r = rng(seed);
        let a = random::gaussian(&mut r, rows, cols);
        let b = random::gaussian(&mut r, rows, 1).column(0).into_owned();
        let x = linalg::lstsq(&a, &b);
        let normal = a.adjoint() * (&a * &x - &b);
        prop_assert!(normal.norm() <= 1e-9 * (fro_norm(&a) * b.norm()).max(1.0));
    }

    #[test]
    fn sparse_product_matches_dense(seed in any::<u64>(), n in 1usize..8, keep in 0.0f64..1.0) {
        let mut r = rng(seed);
        let mut a = random::gaussian(&mut r, n, n);
        for (i, z) in a.iter_mut().enumerate() {
            if ((i as f64 * 0.618_033_988_749_895).fract()) > keep {
                *z = C64::new(0.0, 0.0);
            }
        }
        let b = random::gaussian(&mut r, n, n);
        prop_assert!(fro_norm(&(linalg::sparse_mul(&a, &b) - &a * &b)) <= 1e-12 * fro_norm(&b).max(1.0));
    }

    #[test]
    fn bumps_partition_every_grid(n in 16usize..2048) {
        prop_assert!(circle::make_bumps(n).unwrap().partition_residual() <= 1e-12);
    }

    #[test]
    fn lifted_bumps_partition_every_cover(n in 1usize..6, half in 32usize..256) {
        let pair = circle::make_bumps(2 * half).unwrap();
        prop_assert!(circle::check_cover_partition(&pair, n).unwrap() <= 1e-12);
    }

    #[test]
    fn clock_shift_relation_holds(q in 1usize..=64, p in 0i64..64) {
        match torus::clock_shift(q, p) {
            Ok(rep) => prop_assert!(rep.relation_residual() <= 1e-13),
            Err(_) => prop_assert!(torus::gcd(p.rem_euclid(q as i64) as u64, q as u64) != 1),
        }
    }

    #[test]
    fn star_product_is_associative(seed in any::<u64>(), theta in -1.0f64..1.0, cutoff in 0usize..3) {
        let mut r = rng(seed);
        let x = TorusElement::random(&mut r, theta, cutoff);
        let y = TorusElement::random(&mut r, theta, cutoff);
        let z = TorusElement::random(&mut r, theta, cutoff);
        let left = torus::star_coefficients(&torus::star_coefficients(&x, &y).unwrap(), &z).unwrap();
        let right = torus::star_coefficients(&x, &torus::star_coefficients(&y, &z).unwrap()).unwrap();
        let scale = left.coeff_distance(&TorusElement::zero(theta, 0)).max(1.0);
        prop_assert!(left.coeff_distance(&right) <= 1e-12 * scale);
    }

    #[test]
    fn normal_product_adjoint_reverses_order(seed in any::<u64>(), theta in -1.0f64..1.0, cutoff in 0usize..3) {
        let mut r = rng(seed);
        let x = TorusElement::random(&mut r, theta, cutoff);
        let y = TorusElement::random(&mut r, theta, cutoff);
        let lhs = torus::normal_product(&x, &y).unwrap().adjoint();
        let rhs = torus::normal_product(&y.adjoint(), &x.adjoint()).unwrap();
        let scale = lhs.coeff_distance(&TorusElement::zero(theta, 0)).max(1.0);
        prop_assert!(lhs.coeff_distance(&rhs) <= 1e-12 * scale);
    }

    #[test]
    fn lift_is_block_identity(values in prop::collection::vec(0.0f64..10.0, 1..200), order in 1usize..7) {
        let series = SingularSeries::new(values, Provenance::Analytic).unwrap();
        let lifted = dixmier::lift_series(&series, order).unwrap();
        for n in 0..=series.len() {
            let want = order as f64 * series.sigma_int(n);
            prop_assert!((lifted.sigma_int(order * n) - want).abs() <= 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn sigma_is_subadditive(seed in any::<u64>(), n in 2usize..24) {
        let mut r = rng(seed);
        let a = random::positive(&mut r, n);
        let b = random::positive(&mut r, n);
        let sa = SingularSeries::from_matrix(&a);
        let sb = SingularSeries::from_matrix(&b);
        let sab = SingularSeries::from_matrix(&(&a + &b));
        for k in 0..=n {
            prop_assert!(sab.sigma_int(k) <= sa.sigma_int(k) + sb.sigma_int(k) + 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fixed_points_equal_averages(seed in any::<u64>()) {
        let (action, _) = random_action(&mut rng(seed)).unwrap();
        let fixed = fixed_point_algebra(&action).unwrap();
        let averaged = averaged_algebra(&action).unwrap();
        prop_assert_eq!(fixed.dim(), averaged.dim());
        for b in averaged.basis() {
            prop_assert!(fixed.contains(b));
        }
    }

    #[test]
    fn solver_and_rank_agree_with_freeness(seed in any::<u64>()) {
        let (action, free) = random_action(&mut rng(seed)).unwrap();
        prop_assert_eq!(solve_canonical(&action).unwrap().is_solved(), free);
        prop_assert_eq!(canonical_map_matrix(&action).unwrap().bijective, free);
    }

    #[test]
    fn commuting_partitions_orthogonalize(seed in any::<u64>(), dim in 2usize..9, parts in 1usize..5) {
        let e = frames::random_commuting_partition(&mut rng(seed), dim, parts);
        let fam = frames::vn_orthogonalize(&e).unwrap();
        prop_assert!(fam.report.sum_residual <= 1e-9);
        prop_assert!(fam.report.orthogonality_residual <= 1e-9);
        prop_assert!(fam.report.range_residual <= frames::ORTH_TOL);
    }

    #[test]
    fn boring_frames_are_exact(order in 1usize..6, d in 1usize..4) {
        let frame = frames::boring_frame(&FiniteGroup::cyclic(order), d).unwrap();
        prop_assert!(frames::check_frame(&frame).max_residual() <= 1e-12);
    }

    #[test]
    fn root_extension_frames_hold(q in 2usize..9, n in 2usize..5, angle in 0.01f64..0.3) {
        let u = torus::clock_shift(q, 1).unwrap().u * C64::from_polar(1.0, angle);
        let ext = frames::root_extension(&u, n).unwrap();
        prop_assert!(ext.root_residual <= 1e-10);
        prop_assert!(ext.report().max_residual() <= 1e-8);
    }

    #[test]
    fn boring_lift_repeats_base_spectrum(seed in any::<u64>(), order in 1usize..5, d in 1usize..4) {
        let mut r = rng(seed);
        let frame = frames::boring_frame(&FiniteGroup::cyclic(order), d).unwrap();
        let rep = BaseRep::leading_block(&frame.base, d).unwrap();
        let dirac = random::hermitian(&mut r, d);
        let lift = connections::dirac_lift(&frame, &dirac, &rep).unwrap();
        let mut expected: Vec<f64> =
            linalg::herm_eig(&dirac).unwrap().values.iter().flat_map(|&x| std::iter::repeat_n(x, order)).collect();
        expected.sort_by(f64::total_cmp);
        prop_assert!(connections::spectrum_distance(&lift.spectrum, &expected) <= 1e-9);
        prop_assert!(lift.equivariance_residual <= 1e-9);
    }

    #[test]
    fn grassmann_connection_obeys_leibniz(seed in any::<u64>(), d in 1usize..4, rank in 1usize..3) {
        let mut r = rng(seed);
        let alg = nccover::action::full_matrix_algebra(d);
        let module = connections::random_module(&mut r, alg.clone(), rank).unwrap();
        let y: Vec<_> = (0..rank).map(|_| connections::random_element(&mut r, &alg)).collect();
        let x = module.project(&y);
        let a = connections::random_element(&mut r, &alg);
        let dirac = random::hermitian(&mut r, d);
        let scale = x.iter().map(linalg::op_norm).fold(1.0, f64::max) * linalg::op_norm(&a).max(1.0) * linalg::op_norm(&dirac).max(1.0);
        prop_assert!(connections::leibniz_residual(&module, &x, &a, &dirac, |m| m.clone()) <= 1e-10 * scale);
    }
}
