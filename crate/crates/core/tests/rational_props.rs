use std::cmp::Ordering;

use num_bigint::BigInt;
use onshelf::domain::compare_rational;
use onshelf::{Money, Rational};
use proptest::prelude::*;

fn reference(a: (i64, i64), b: (i64, i64)) -> Ordering {
    (BigInt::from(a.0) * BigInt::from(b.1)).cmp(&(BigInt::from(b.0) * BigInt::from(a.1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn comparison_matches_big_integers(an in any::<i64>(), ad in 1..=i64::MAX, bn in any::<i64>(), bd in 1..=i64::MAX) {
        let (a, b) = (Rational::new(an, ad), Rational::new(bn, bd));
        prop_assert_eq!(compare_rational(a, b), reference((an, ad), (bn, bd)));
        prop_assert_eq!(a.cmp(&b), compare_rational(a, b));
        prop_assert_eq!(b.cmp(&a), compare_rational(a, b).reverse());
    }
}

proptest! {
    #[test]
    fn small_values_compare_like_floats(an in -1000i64..1000, ad in 1i64..1000, bn in -1000i64..1000, bd in 1i64..1000) {
        let (a, b) = (Rational::new(an, ad), Rational::new(bn, bd));
        let exact = reference((an, ad), (bn, bd));
        if exact != Ordering::Equal {
            prop_assert_eq!(a.to_f64().partial_cmp(&b.to_f64()).unwrap(), exact);
        }
    }

    #[test]
    fn threshold_test_agrees_with_comparison(n in any::<i32>(), d in 1i64..1_000_000, v in any::<i32>(), s in 1i64..1_000_000) {
        let t = Rational::new(n as i64, d);
        prop_assert_eq!(t.is_reached_by(Money(v as i64), Money(s)), Rational::new(v as i64, s) >= t);
    }
}
