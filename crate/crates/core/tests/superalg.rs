mod common;

use proptest::prelude::*;
use superloops::superalg::{berezinian, invert, invert_unit, Substitution, SuperMatrix};
use superloops::{AlgError, Context, Ctx, Parity, SuperPoly, VarSpec, Q};

use common::*;

fn ctx() -> Ctx {
    Context::new(vec![
        VarSpec::even("x"),
        VarSpec::even("y").with_cap(3),
        VarSpec::odd("a"),
        VarSpec::odd("b"),
    ])
    .unwrap()
}

fn p(c: &Ctx, s: &[(&str, i32)]) -> SuperPoly {
    poly(c, s)
}

#[test]
fn odd_generators_anticommute() {
    let c = ctx();
    let ab = p(&c, &[("a", 1), ("b", 1)]);
    let ba = &p(&c, &[("b", 1)]) * &p(&c, &[("a", 1)]);
    assert_eq!(ba, -ab);
    assert!((&p(&c, &[("a", 1)]) * &p(&c, &[("a", 1)])).is_zero());
}

#[test]
fn caps_truncate() {
    let c = ctx();
    let y = p(&c, &[("y", 1)]);
    assert!(y.pow(3).is_zero());
    assert_eq!(y.pow(2).to_string(), "y^2");
}

#[test]
fn unknown_and_duplicate_names() {
    let c = ctx();
    assert!(matches!(SuperPoly::named(&c, "z"), Err(AlgError::UnknownVariable(_))));
    assert!(matches!(
        Context::new(vec![VarSpec::even("x"), VarSpec::odd("x")]),
        Err(AlgError::DuplicateVariable(_))
    ));
}

#[test]
fn geometric_series_inverse() {
    // 1/(1 - y) = 1 + y + y^2 when y^3 = 0
    let c = ctx();
    let one_minus = &SuperPoly::one(&c) - &p(&c, &[("y", 1)]);
    let inv = invert_unit(&one_minus).unwrap();
    assert_eq!(inv.to_string(), "1 + y + y^2");
    assert!(invert(&p(&c, &[("x", 1)])).is_err());
}

#[test]
fn berezinian_of_block_diagonal() {
    // Ber(diag(a | d1, d2)) = a / (d1 d2)
    let c = ctx();
    let k = |n: i64| SuperPoly::constant(&c, Q::from_int(n));
    let z = SuperPoly::zero(&c);
    let g = SuperMatrix::new(
        1,
        2,
        vec![
            vec![k(6), z.clone(), z.clone()],
            vec![z.clone(), k(2), z.clone()],
            vec![z.clone(), z.clone(), k(3)],
        ],
    )
    .unwrap();
    assert_eq!(berezinian(&g).unwrap(), k(1));
}

#[test]
fn berezinian_with_odd_blocks() {
    // B D^{-1} C = a*b + b*a = 0, so Ber = 1
    let c = ctx();
    let a = p(&c, &[("a", 1)]);
    let b = p(&c, &[("b", 1)]);
    let one = SuperPoly::one(&c);
    let z = SuperPoly::zero(&c);
    let g = SuperMatrix::new(
        1,
        2,
        vec![
            vec![one.clone(), a.clone(), b.clone()],
            vec![b.clone(), one.clone(), z.clone()],
            vec![a.clone(), z, one],
        ],
    )
    .unwrap();
    assert_eq!(berezinian(&g).unwrap(), SuperPoly::one(&c));
}

#[test]
fn supermatrix_parity_is_checked() {
    let c = ctx();
    let one = SuperPoly::one(&c);
    let z = SuperPoly::zero(&c);
    let bad = SuperMatrix::new(1, 1, vec![vec![one.clone(), one.clone()], vec![z, one]]);
    assert!(matches!(bad, Err(AlgError::Parity(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(seed in any::<u64>()) {
        let c = ctx();
        let g = all_gens(&c);
        let mut r = rng(seed);
        let a = random_poly(&c, &g, 3, 3, &mut r);
        let b = random_poly(&c, &g, 3, 3, &mut r);
        let e = random_poly(&c, &g, 3, 3, &mut r);
        prop_assert_eq!(&(&a * &b) * &e, &a * &(&b * &e));
        prop_assert_eq!(&a * &(&b + &e), &(&a * &b) + &(&a * &e));
        prop_assert_eq!(&(&a + &b) - &b, a);
    }

    #[test]
    fn koszul_commutativity(seed in any::<u64>(), odd_a: bool, odd_b: bool) {
        let c = ctx();
        let g = all_gens(&c);
        let mut r = rng(seed);
        let par = |o: bool| if o { Parity::Odd } else { Parity::Even };
        let a = random_homogeneous(&c, &g, par(odd_a), 3, 3, &mut r);
        let b = random_homogeneous(&c, &g, par(odd_b), 3, 3, &mut r);
        let ba = &b * &a;
        let expected = if odd_a && odd_b { -ba } else { ba };
        prop_assert_eq!(&a * &b, expected);
    }

    #[test]
    fn units_invert(seed in any::<u64>()) {
        let c = ctx();
        let mut r = rng(seed);
        let nil: Vec<usize> = ["y", "a", "b"].iter().map(|n| c.index_of(n).unwrap()).collect();
        let n = random_homogeneous(&c, &nil, Parity::Even, 4, 3, &mut r)
            .filter(|m| m.degree() > 0);
        let u = &SuperPoly::constant(&c, small_q(&mut r)) + &n;
        let inv = invert_unit(&u).unwrap();
        prop_assert_eq!(&u * &inv, SuperPoly::one(&c));
    }

    #[test]
    fn substitution_is_multiplicative(seed in any::<u64>()) {
        let c = ctx();
        let g = all_gens(&c);
        let mut r = rng(seed);
        let free = Context::new(vec![VarSpec::even("s"), VarSpec::odd("e")]).unwrap();
        let fg = all_gens(&free);
        // y must land in the ideal of nilpotents so its cap is respected
        let e = SuperPoly::named(&free, "e").unwrap();
        let images = vec![
            ("x", random_homogeneous(&free, &fg, Parity::Even, 3, 2, &mut r)),
            ("y", SuperPoly::zero(&free)),
            ("a", &e * &random_homogeneous(&free, &fg, Parity::Even, 2, 2, &mut r)),
            ("b", random_homogeneous(&free, &fg, Parity::Odd, 2, 2, &mut r)),
        ];
        let sub = Substitution::new(&c, &free, images).unwrap();
        let a = random_poly(&c, &g, 3, 3, &mut r);
        let b = random_poly(&c, &g, 3, 3, &mut r);
        prop_assert_eq!(
            sub.apply(&(&a * &b)).unwrap(),
            &sub.apply(&a).unwrap() * &sub.apply(&b).unwrap()
        );
    }

    #[test]
    fn coefficient_extraction_reassembles(seed in any::<u64>()) {
        let c = ctx();
        let g = all_gens(&c);
        let mut r = rng(seed);
        let f = random_poly(&c, &g, 5, 3, &mut r);
        let a = c.index_of("a").unwrap();
        let unit = superloops::Monomial::var(c.len(), a);
        let with_a = f.filter(|m| m.exp(a) == 1);
        let left = f.coeff_left(&unit, &[a]);
        let right = f.coeff_right(&unit, &[a]);
        let av = SuperPoly::var(&c, a);
        prop_assert_eq!(&av * &left, with_a.clone());
        prop_assert_eq!(&right * &av, with_a);
    }
}
