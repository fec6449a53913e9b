//! Property tests for the Laurent-series algebra.

use num_complex::Complex64;
use proptest::prelude::*;
use qtexp::LaurentSeries;

fn series_strategy() -> impl Strategy<Value = LaurentSeries> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=11)
        .prop_flat_map(|pairs| {
            let l = pairs.len() as i64;
            (Just(pairs), -(l - 1)..=0i64)
        })
        .prop_map(|(pairs, lo)| {
            let coeffs = pairs
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect();
            LaurentSeries::from_coeffs(lo, coeffs)
        })
}

proptest! {
    #[test]
    fn wiener_norm_is_submultiplicative(a in series_strategy(), b in series_strategy()) {
        let lhs = a.mul(&b).wiener_norm();
        let rhs = a.wiener_norm() * b.wiener_norm();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn wiener_norm_triangle_inequality(a in series_strategy(), b in series_strategy()) {
        let lhs = a.add(&b).wiener_norm();
        let rhs = a.wiener_norm() + b.wiener_norm();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn split_reassembles_exactly(a in series_strategy()) {
        let (minus, a0, plus) = a.split();
        // minus stores a_{-i} at nonnegative index i; fold it back.
        let mut back = LaurentSeries::constant(a0).add(&plus);
        for i in 1..=minus.hi() {
            back = back.add(&LaurentSeries::monomial(-i, minus.coeff(i)));
        }
        prop_assert_eq!(&back, &a);
    }

    #[test]
    fn truncate_drops_at_most_eps_mass(a in series_strategy(), eps in 1e-8f64..1e-1) {
        let t = a.truncate(eps);
        prop_assert!(a.sub(&t).wiener_norm() <= eps * (1.0 + 1e-12));
        prop_assert!(t.wiener_norm() <= a.wiener_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn reversal_is_an_involution(a in series_strategy()) {
        prop_assert_eq!(&a.reversed().reversed(), &a);
    }
}
