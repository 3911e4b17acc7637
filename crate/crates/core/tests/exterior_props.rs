mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_squared_vanishes(seed: u64, n in 1usize..=5, p in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = chart_of_dim(n);
        let a = random_form(&mut rng, &ch, p.min(n), 3);
        prop_assert!(a.d().d().is_zero());
    }

    #[test]
    fn interior_is_an_antiderivation(seed: u64, n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = chart_of_dim(n);
        let a = random_form(&mut rng, &ch, 1, 2);
        let b = random_form(&mut rng, &ch, 1, 2);
        let x = random_field(&mut rng, &ch, 2);
        let lhs = a.wedge(&b).unwrap().interior(&x);
        let rhs = &a.interior(&x).wedge(&b).unwrap() - &a.wedge(&b.interior(&x)).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(a.wedge(&b).unwrap().interior(&x).interior(&x).is_zero());
    }

    #[test]
    fn lie_bracket_compatibility(seed: u64, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = chart_of_dim(n);
        let a = random_form(&mut rng, &ch, 1, 2);
        let x = random_field(&mut rng, &ch, 1);
        let y = random_field(&mut rng, &ch, 1);
        let lhs = a.lie_deriv(&x.bracket(&y));
        let rhs = &a.lie_deriv(&y).lie_deriv(&x) - &a.lie_deriv(&x).lie_deriv(&y);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_is_antisymmetric_and_jacobi(seed: u64, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = chart_of_dim(n);
        let x = random_field(&mut rng, &ch, 2);
        let y = random_field(&mut rng, &ch, 2);
        let z = random_field(&mut rng, &ch, 1);
        prop_assert_eq!(x.bracket(&y), -&y.bracket(&x));
        prop_assert!(x.bracket(&x).is_zero());
        let j = &(&x.bracket(&y.bracket(&z)) + &y.bracket(&z.bracket(&x))) + &z.bracket(&x.bracket(&y));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn wedge_graded_commutativity(seed: u64, n in 2usize..=5, p in 0usize..3, q in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = chart_of_dim(n);
        prop_assume!(p + q <= n);
        let a = random_form(&mut rng, &ch, p, 2);
        let b = random_form(&mut rng, &ch, q, 2);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        if (p * q) % 2 == 1 {
            prop_assert_eq!(ab, -&ba);
        } else {
            prop_assert_eq!(ab, ba);
        }
    }

    #[test]
    fn kernel_of_simple_forms(seed: u64, n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = chart_of_dim(n);
        let a = random_form(&mut rng, &ch, 1, 2);
        let b = random_form(&mut rng, &ch, 1, 2);
        let omega = a.wedge(&b).unwrap();
        prop_assume!(!omega.is_zero());
        prop_assert!(eds_waves::exterior::is_simple(&omega));
        let x = random_field(&mut rng, &ch, 1);
        for k in eds_waves::exterior::form_kernel(&omega) {
            prop_assert!(omega.interior(&k).is_zero());
            prop_assert!(omega.interior(&x).interior(&k).is_zero());
        }
    }

    #[test]
    fn frobenius_tests_agree(seed: u64, n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = chart_of_dim(n);
        let a = random_form(&mut rng, &ch, 1, 1);
        let cod = match eds_waves::exterior::Codistribution::new(&ch, vec![a]) {
            Ok(c) => c,
            Err(_) => return Ok(()),
        };
        let r = eds_waves::exterior::frobenius_report(&cod);
        prop_assert_eq!(r.by_forms, r.by_brackets);
    }
}
