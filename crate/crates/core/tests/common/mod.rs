#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superloops::forms::{DifferentialForm, FormContext};
use superloops::{Ctx, Derivation, Parity, SuperPoly, VarSpec, Q};

pub const SEED: u64 = 0x5eed_2024;
pub const CASES: usize = 200;

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt)
}

/// Nonzero rational with small numerator and denominator.
pub fn small_q(rng: &mut ChaCha8Rng) -> Q {
    loop {
        let n = rng.gen_range(-4i64..=4);
        if n != 0 {
            return Q::new(n, rng.gen_range(1i64..=3));
        }
    }
}

/// A random monomial in the generators `gens` of degree at most `max_deg`.
pub fn random_monomial(ctx: &Ctx, gens: &[usize], max_deg: usize, rng: &mut ChaCha8Rng) -> SuperPoly {
    let deg = rng.gen_range(0..=max_deg);
    let mut p = SuperPoly::one(ctx);
    for _ in 0..deg {
        let g = *gens.choose(rng).expect("generators");
        p = &p * &SuperPoly::var(ctx, g);
    }
    p
}

pub fn random_poly(ctx: &Ctx, gens: &[usize], terms: usize, max_deg: usize, rng: &mut ChaCha8Rng) -> SuperPoly {
    let mut p = SuperPoly::zero(ctx);
    for _ in 0..terms {
        let m = random_monomial(ctx, gens, max_deg, rng);
        p = &p + &m.scale(&small_q(rng));
    }
    p
}

/// A random polynomial of the given parity (possibly zero).
pub fn random_homogeneous(
    ctx: &Ctx,
    gens: &[usize],
    parity: Parity,
    terms: usize,
    max_deg: usize,
    rng: &mut ChaCha8Rng,
) -> SuperPoly {
    random_poly(ctx, gens, terms, max_deg, rng).filter(|m| m.parity(ctx) == parity)
}

pub fn all_gens(ctx: &Ctx) -> Vec<usize> {
    (0..ctx.len()).collect()
}

pub fn random_parity(rng: &mut ChaCha8Rng) -> Parity {
    if rng.gen_bool(0.5) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// A random homogeneous derivation with polynomial images.
pub fn random_derivation(ctx: &Ctx, parity: Parity, rng: &mut ChaCha8Rng) -> Derivation {
    let gens = all_gens(ctx);
    let mut d = Derivation::zero(ctx, parity);
    for i in 0..ctx.len() {
        let want = ctx.parity(i) + parity;
        let img = random_homogeneous(ctx, &gens, want, 3, 2, rng);
        d.set(i, img).expect("parity matches");
    }
    d
}

/// A nonzero random form of degree exactly `k` whose coefficients have
/// degree at most `coeff_deg`.
pub fn random_form(
    x: &FormContext,
    k: usize,
    coeff_deg: usize,
    terms: usize,
    rng: &mut ChaCha8Rng,
) -> DifferentialForm {
    let ctx = x.ctx();
    loop {
        let mut w = SuperPoly::zero(ctx);
        for _ in 0..terms {
            let mut m = random_monomial(ctx, x.base(), coeff_deg, rng);
            for _ in 0..k {
                let t = *x.twins().choose(rng).expect("twins");
                m = &m * &SuperPoly::var(ctx, t);
            }
            w = &w + &m.scale(&small_q(rng));
        }
        if !w.is_zero() {
            return w;
        }
    }
}

pub fn plane() -> FormContext {
    FormContext::new(vec![VarSpec::even("x1"), VarSpec::even("x2")], vec![]).unwrap()
}

/// `𝔸^{2|1}` with coordinates `x1, x2 | xi`.
pub fn plane_odd() -> FormContext {
    FormContext::new(
        vec![VarSpec::even("x1"), VarSpec::even("x2"), VarSpec::odd("xi")],
        vec![],
    )
    .unwrap()
}

/// `𝔸^{1|1}` with coordinates `x | xi`.
pub fn line_odd() -> FormContext {
    FormContext::new(vec![VarSpec::even("x"), VarSpec::odd("xi")], vec![]).unwrap()
}

pub fn poly(ctx: &Ctx, factors: &[(&str, i32)]) -> SuperPoly {
    SuperPoly::product(ctx, factors).unwrap()
}
