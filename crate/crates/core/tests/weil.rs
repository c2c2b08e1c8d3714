mod common;

use proptest::prelude::*;
use superloops::superalg::Substitution;
use superloops::weil::slice::{grading_check, swap_conjugates_differentials, BigradedSlice};
use superloops::weil::{
    abstract_bracket_table, der_o_basis, sl12_structure_check, LocalSuperAlgebra, WeilContext,
    WeilError,
};
use superloops::{Context, Ctx, Monomial, SuperPoly, VarSpec};

use common::*;

fn base() -> Ctx {
    Context::new(vec![VarSpec::even("x"), VarSpec::even("y"), VarSpec::odd("z")]).unwrap()
}

/// Components of `f(Σ e_i ⊗ x[i])` read off by substituting the universal
/// element into a context holding both `𝔬`'s generators and `A^𝔬`'s.
fn expand_by_substitution(w: &WeilContext, n_eta: usize, f: &SuperPoly) -> Vec<SuperPoly> {
    let o = w.algebra();
    let mut specs: Vec<VarSpec> = (1..=n_eta).map(|i| VarSpec::odd(format!("eta{i}"))).collect();
    specs.extend(w.ctx().vars().iter().cloned());
    let big = Context::new(specs).unwrap();
    let eta_pos: Vec<usize> = (1..=n_eta).map(|i| big.index_of(&format!("eta{i}")).unwrap()).collect();
    let label_poly = |label: &str| -> SuperPoly {
        if label == "1" {
            SuperPoly::one(&big)
        } else {
            label
                .split('*')
                .fold(SuperPoly::one(&big), |acc, g| &acc * &SuperPoly::named(&big, g).unwrap())
        }
    };
    let basis: Vec<SuperPoly> = o.labels().iter().map(|l| label_poly(l)).collect();
    let mut images = Vec::new();
    for (j, v) in w.base().vars().iter().enumerate() {
        let mut s = SuperPoly::zero(&big);
        for (i, e) in basis.iter().enumerate() {
            let g = SuperPoly::named(&big, &w.ctx().var(w.gen(j, i)).name).unwrap();
            s = &s + &(e * &g);
        }
        images.push((v.name.clone(), s));
    }
    let sub = Substitution::new(w.base(), &big, images.iter().map(|(n, p)| (n.as_str(), p.clone()))).unwrap();
    let full = sub.apply(f).unwrap();
    basis
        .iter()
        .map(|e| {
            let (u, c) = e.terms().next().map(|(m, c)| (m.clone(), c.clone())).unwrap();
            let part = full.coeff_left(&u, &eta_pos).scale(&c);
            part.embed(w.ctx()).unwrap()
        })
        .collect()
}

#[test]
fn unit_has_only_the_constant_component() {
    let b = base();
    let w = WeilContext::new(&b, LocalSuperAlgebra::exterior(2)).unwrap();
    let one = w.expand(&SuperPoly::one(&b)).unwrap();
    assert_eq!(one[0], SuperPoly::one(w.ctx()));
    assert!(one[1..].iter().all(SuperPoly::is_zero));
}

#[test]
fn capped_base_is_rejected() {
    let b = Context::new(vec![VarSpec::even("x").with_cap(2)]).unwrap();
    assert!(matches!(
        WeilContext::new(&b, LocalSuperAlgebra::exterior(1)),
        Err(WeilError::Unsupported(_))
    ));
}

#[test]
fn bracket_table_landmarks() {
    let t = abstract_bracket_table(&der_o_basis(2).unwrap()).unwrap();
    assert_eq!(t.len(), 36);
    let get = |a: &str, b: &str| t.iter().find(|e| e.left == a && e.right == b).unwrap().value.clone();
    assert_eq!(get("D1", "D1*"), "Theta2");
    assert_eq!(get("D2", "D2*"), "Theta1");
    assert_eq!(get("D1", "D1"), "0");
    let r = sl12_structure_check().unwrap();
    assert_eq!((r.even_dim, r.odd_dim), (4, 4));
    assert!(r.supertraces.iter().all(|(_, q)| q.is_zero()));
}

#[test]
fn slice_symmetries_with_odd_base() {
    let b = Context::new(vec![VarSpec::even("x"), VarSpec::odd("xi")]).unwrap();
    let s = BigradedSlice::build(&b, 3, 100_000).unwrap();
    assert!(grading_check(&s).unwrap());
    assert!(swap_conjugates_differentials(&s).unwrap());
    for piece in s.pieces().collect::<Vec<_>>() {
        for op in ["D1", "D2"] {
            let Some(t) = s.target(op, piece) else { continue };
            let Some(u) = s.target(op, t) else { continue };
            if s.dim(piece) == 0 || s.dim(t) == 0 || s.dim(u) == 0 {
                continue;
            }
            let sq = s.matrix(op, t).unwrap().mul(&s.matrix(op, piece).unwrap());
            assert!(sq.is_zero(), "{op}^2 on {piece:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn expansion_matches_universal_substitution(seed in any::<u64>(), n in 1usize..3) {
        let b = base();
        let w = WeilContext::new(&b, LocalSuperAlgebra::exterior(n)).unwrap();
        let mut r = rng(seed);
        let f = random_poly(&b, &all_gens(&b), 3, 3, &mut r);
        prop_assert_eq!(w.expand(&f).unwrap(), expand_by_substitution(&w, n, &f));
    }

    #[test]
    fn expansion_is_multiplicative(seed in any::<u64>(), n in 1usize..3) {
        let b = base();
        let w = WeilContext::new(&b, LocalSuperAlgebra::exterior(n)).unwrap();
        let mut r = rng(seed);
        let f = random_poly(&b, &all_gens(&b), 3, 2, &mut r);
        let g = random_poly(&b, &all_gens(&b), 3, 2, &mut r);
        let lhs = w.expand(&(&f * &g)).unwrap();
        let rhs = w.mul(&w.expand(&f).unwrap(), &w.expand(&g).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn jets_multiply_by_convolution(seed in any::<u64>()) {
        // (fg)[k] = Σ_{i+j=k} f[i] g[j] for 𝔬 = ℚ[t]/(t^4)
        let b = Context::new(vec![VarSpec::even("x"), VarSpec::even("y")]).unwrap();
        let w = WeilContext::new(&b, LocalSuperAlgebra::truncated_polynomial(4)).unwrap();
        let mut r = rng(seed);
        let f = random_poly(&b, &all_gens(&b), 3, 3, &mut r);
        let g = random_poly(&b, &all_gens(&b), 3, 3, &mut r);
        let (ef, eg) = (w.expand(&f).unwrap(), w.expand(&g).unwrap());
        let efg = w.expand(&(&f * &g)).unwrap();
        for k in 0..4 {
            let mut conv = SuperPoly::zero(w.ctx());
            for i in 0..=k {
                conv = &conv + &(&ef[i] * &eg[k - i]);
            }
            prop_assert_eq!(&efg[k], &conv);
        }
    }
}

#[test]
fn monomial_helper_is_consistent() {
    let b = base();
    let m = Monomial::var(b.len(), 0);
    assert_eq!(SuperPoly::monomial_string(&b, &m), "x");
}
