mod common;

use common::*;
use proptest::prelude::*;
use wickward::coeff::{imag, int};
use wickward::field::{charge_conjugate, theta};
use wickward::{FieldPolynomial, Number, OperatorExpr};

fn op(p: &FieldPolynomial) -> OperatorExpr {
    OperatorExpr::from_polynomial(p)
}

fn triple(seed: u64) -> (OperatorExpr, OperatorExpr, OperatorExpr, Vec<FieldPolynomial>) {
    let fs = factors(&mut rng(seed), 3, 4);
    (op(&fs[0]), op(&fs[1]), op(&fs[2]), fs)
}

fn phase() -> impl Strategy<Value = Number> {
    prop_oneof![Just(int(1)), Just(int(-1)), Just(imag(1)), Just(imag(-1))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn classical_limit_is_the_pointwise_product(seed in any::<u64>()) {
        let (a, b, _, _) = triple(seed);
        prop_assert_eq!(a.star(&b).hbar_order(0), a.multiply(&b));
        prop_assert_eq!(a.feynman_star(&b).hbar_order(0), a.multiply(&b));
    }

    #[test]
    fn first_order_commutator_is_i_times_the_bracket(seed in any::<u64>()) {
        let (a, b, _, _) = triple(seed);
        prop_assert_eq!(a.commutator(&b).hbar_order(1), a.poisson_bracket(&b).scale(&imag(1)));
    }

    #[test]
    fn star_is_associative(seed in any::<u64>()) {
        let (a, b, c, _) = triple(seed);
        prop_assert_eq!(a.star(&b).star(&c), a.star(&b.star(&c)));
        prop_assert_eq!(a.feynman_star(&b).feynman_star(&c), a.feynman_star(&b.feynman_star(&c)));
    }

    #[test]
    fn feynman_star_is_commutative_at_distinct_points(seed in any::<u64>()) {
        let (a, b, _, _) = triple(seed);
        prop_assert_eq!(a.feynman_star(&b), b.feynman_star(&a));
    }

    #[test]
    fn commutator_is_antisymmetric_and_a_derivation(seed in any::<u64>()) {
        let (a, b, c, _) = triple(seed);
        prop_assert_eq!(a.commutator(&b), b.commutator(&a).scale(&int(-1)));
        let lhs = a.commutator(&b.star(&c));
        let rhs = a.commutator(&b).star(&c).add(&b.star(&a.commutator(&c)));
        prop_assert_eq!(lhs.orient_delta_plus(), rhs.orient_delta_plus());
    }

    #[test]
    fn charge_conjugation_is_a_homomorphism(seed in any::<u64>(), eta in phase()) {
        let (a, b, _, fs) = triple(seed);
        let conj = |p: &FieldPolynomial| op(&charge_conjugate(p, &eta).unwrap());
        prop_assert_eq!(a.star(&b).charge_conjugate(&eta).unwrap(), conj(&fs[0]).star(&conj(&fs[1])));
        prop_assert_eq!(a.charge_conjugate(&eta).unwrap(), conj(&fs[0]));
    }

    #[test]
    fn charge_conjugation_is_an_involution(seed in any::<u64>(), eta in phase()) {
        let (_, _, _, fs) = triple(seed);
        let twice = charge_conjugate(&charge_conjugate(&fs[0], &eta).unwrap(), &eta).unwrap();
        prop_assert_eq!(twice, fs[0].clone());
    }

    #[test]
    fn theta_is_a_derivation_of_star(seed in any::<u64>()) {
        let (a, b, _, fs) = triple(seed);
        let th = |p: &FieldPolynomial| op(&theta(p).unwrap());
        prop_assert_eq!(a.star(&b).theta(), th(&fs[0]).star(&b).add(&a.star(&th(&fs[1]))));
    }
}

#[test]
fn unit_is_neutral() {
    let (a, _, _, _) = triple(7);
    assert_eq!(OperatorExpr::one().star(&a), a);
    assert_eq!(a.star(&OperatorExpr::one()), a);
}
