mod common;

use proptest::prelude::*;
use superloops::forms::{FormContext, FormError};
use superloops::{SuperPoly, VarSpec, Q};

use common::*;

#[test]
fn odd_coordinate_differentials() {
    let x = line_odd();
    let c = x.ctx();
    let xi = poly(c, &[("xi", 1)]);
    let dxi = poly(c, &[("dxi", 1)]);
    assert_eq!(x.d(&xi), dxi);
    // dξ is even, so its powers survive
    assert_eq!(dxi.pow(2).to_string(), "dxi^2");
    let x_xi = poly(c, &[("x", 1), ("xi", 1)]);
    // d(xξ) = dx ξ + x dξ, and dx ξ = −ξ dx
    assert_eq!(x.d(&x_xi).to_string(), "x*dxi - xi*dx");
}

#[test]
fn capped_coordinate_kills_top_differential() {
    let x = FormContext::new(vec![VarSpec::even("x").with_cap(3)], vec![]).unwrap();
    let c = x.ctx();
    assert!(poly(c, &[("x", 2), ("dx", 1)]).is_zero());
    assert!(poly(c, &[("x", 3)]).is_zero());
    assert_eq!(x.d(&poly(c, &[("x", 2)])).to_string(), "2*x*dx");
    assert_eq!(x.d(&poly(c, &[("x", 1)])).to_string(), "dx");
}

#[test]
fn primitive_errors() {
    let x = plane();
    let c = x.ctx();
    assert!(matches!(
        x.poincare_homotopy(&poly(c, &[("x1", 1), ("dx2", 1)])),
        Err(FormError::NotClosed(_))
    ));
    assert!(matches!(
        x.poincare_homotopy(&SuperPoly::one(c)),
        Err(FormError::DegreeZero)
    ));
    assert!(matches!(x.homotopy(&SuperPoly::one(c)), Err(FormError::WeightZero(_))));
}

#[test]
fn area_form_primitive() {
    let x = plane();
    let c = x.ctx();
    let eta = x.poincare_homotopy(&poly(c, &[("dx1", 1), ("dx2", 1)])).unwrap();
    let half = Q::new(1, 2);
    let want = &poly(c, &[("x1", 1), ("dx2", 1)]).scale(&half) - &poly(c, &[("x2", 1), ("dx1", 1)]).scale(&half);
    assert_eq!(eta, want);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_squares_to_zero(seed in any::<u64>(), k in 0usize..3) {
        let mut r = rng(seed);
        let x = if seed % 2 == 0 { plane_odd() } else { line_odd() };
        let w = random_form(&x, k, 3, 3, &mut r);
        prop_assert!(x.d(&x.d(&w)).is_zero());
    }

    #[test]
    fn d_is_an_odd_derivation(seed in any::<u64>(), k in 0usize..3, l in 0usize..3) {
        let mut r = rng(seed);
        let x = plane_odd();
        let a = random_form(&x, k, 2, 2, &mut r).filter(|m| m.parity(x.ctx()).is_odd() == (k % 2 == 1));
        let b = random_form(&x, l, 2, 2, &mut r);
        let second = &a * &x.d(&b);
        let rhs = &(&x.d(&a) * &b) + &if k % 2 == 1 { -second } else { second };
        prop_assert_eq!(x.d(&(&a * &b)), rhs);
    }

    #[test]
    fn exact_forms_have_primitives(seed in any::<u64>(), k in 1usize..3) {
        let mut r = rng(seed);
        let x = plane_odd();
        let w = x.d(&random_form(&x, k - 1, 3, 3, &mut r));
        prop_assume!(!w.is_zero());
        let eta = x.poincare_homotopy(&w).unwrap();
        prop_assert_eq!(x.d(&eta), w);
    }

    #[test]
    fn cartan_homotopy(seed in any::<u64>(), k in 0usize..3) {
        let mut r = rng(seed);
        let x = plane_odd();
        let w = random_form(&x, k, 3, 3, &mut r).filter(|m| x.weight(m) > 0);
        prop_assume!(!w.is_zero());
        let back = &x.d(&x.homotopy(&w).unwrap()) + &x.homotopy(&x.d(&w)).unwrap();
        prop_assert_eq!(back, w);
    }
}
