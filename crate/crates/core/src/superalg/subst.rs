use super::{AlgError, Context, Ctx, Parity, SuperPoly};
use crate::rational::Q;

/// A parity-preserving algebra map from `source` to `target`, given by the
/// images of the source generators.
#[derive(Clone, Debug)]
pub struct Substitution {
    source: Ctx,
    target: Ctx,
    images: Vec<SuperPoly>,
}

impl Substitution {
    /// Generators without an explicit image go to the same-named generator
    /// of `target`, which must exist with the same parity.
    pub fn new<'a>(
        source: &Ctx,
        target: &Ctx,
        assignments: impl IntoIterator<Item = (&'a str, SuperPoly)>,
    ) -> Result<Self, AlgError> {
        let mut images: Vec<Option<SuperPoly>> = vec![None; source.len()];
        for (name, img) in assignments {
            let i = source.index_of(name)?;
            images[i] = Some(img);
        }
        let mut out = Vec::with_capacity(source.len());
        for (i, img) in images.into_iter().enumerate() {
            let v = source.var(i);
            let img = match img {
                Some(p) => p,
                None => {
                    let j = target.index_of(&v.name)?;
                    if target.var(j).parity != v.parity {
                        return Err(AlgError::Parity(format!(
                            "`{}` has a different parity in the target",
                            v.name
                        )));
                    }
                    SuperPoly::var(target, j)
                }
            };
            Self::check_image(target, v, &img)?;
            out.push(img);
        }
        Ok(Substitution {
            source: source.clone(),
            target: target.clone(),
            images: out,
        })
    }

    fn check_image(target: &Ctx, v: &super::VarSpec, img: &SuperPoly) -> Result<(), AlgError> {
        if !Context::same(img.ctx(), target) {
            return Err(AlgError::ContextMismatch);
        }
        if img.is_zero() {
            return Ok(());
        }
        match img.parity() {
            Some(p) if p == v.parity => {}
            Some(_) => {
                return Err(AlgError::Parity(format!(
                    "image of `{}` must be {}",
                    v.name, v.parity
                )))
            }
            None => {
                return Err(AlgError::Parity(format!(
                    "image of `{}` mixes parities",
                    v.name
                )))
            }
        }
        if v.parity == Parity::Even {
            if let Some(cap) = v.nil_cap {
                if !img.pow(cap).is_zero() {
                    return Err(AlgError::CapViolation(v.name.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &Ctx {
        &self.source
    }

    pub fn target(&self) -> &Ctx {
        &self.target
    }

    pub fn image(&self, i: usize) -> &SuperPoly {
        &self.images[i]
    }

    pub fn apply(&self, p: &SuperPoly) -> Result<SuperPoly, AlgError> {
        if !Context::same(p.ctx(), &self.source) {
            return Err(AlgError::ContextMismatch);
        }
        let n = self.source.len();
        // powers[i][e] = image_i^e, grown on demand
        let mut powers: Vec<Vec<SuperPoly>> = vec![Vec::new(); n];
        let mut inverses: Vec<Option<SuperPoly>> = vec![None; n];
        let mut out = SuperPoly::zero(&self.target);
        for (m, c) in p.terms() {
            let mut acc = SuperPoly::constant(&self.target, c.clone());
            for i in 0..n {
                let e = m.exp(i);
                if e == 0 {
                    continue;
                }
                let factor = if e > 0 {
                    power(&mut powers[i], &self.images[i], e as u32)
                } else {
                    if inverses[i].is_none() {
                        inverses[i] = Some(invert(&self.images[i])?);
                    }
                    inverses[i].as_ref().unwrap().pow((-e) as u32)
                };
                acc = &acc * &factor;
                if acc.is_zero() {
                    break;
                }
            }
            out = &out + &acc;
        }
        Ok(out)
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &Substitution) -> Result<Substitution, AlgError> {
        if !Context::same(&self.target, &other.source) {
            return Err(AlgError::ContextMismatch);
        }
        let images = self
            .images
            .iter()
            .map(|p| other.apply(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Substitution {
            source: self.source.clone(),
            target: other.target.clone(),
            images,
        })
    }
}

fn power(cache: &mut Vec<SuperPoly>, base: &SuperPoly, e: u32) -> SuperPoly {
    if cache.is_empty() {
        cache.push(SuperPoly::one(base.ctx()));
    }
    while cache.len() <= e as usize {
        let next = cache.last().unwrap() * base;
        cache.push(next);
    }
    cache[e as usize].clone()
}

/// Inverse of `c + n` with `c` a nonzero rational and `n` nilpotent.
///
/// Every monomial of `n` must contain an odd or capped generator; the
/// geometric series then terminates within the context's nilpotency bound.
pub fn invert_unit(p: &SuperPoly) -> Result<SuperPoly, AlgError> {
    let ctx = p.ctx();
    let c = p.constant_term();
    let c_inv = c
        .inv()
        .ok_or_else(|| AlgError::NotAUnit(format!("`{p}` has zero scalar part")))?;
    let n = p - &SuperPoly::constant(ctx, c);
    for (m, _) in n.terms() {
        let nil = m
            .exponents()
            .iter()
            .enumerate()
            .any(|(i, &e)| e > 0 && ctx.var(i).is_nilpotent());
        if !nil {
            return Err(AlgError::NotNilpotent(format!(
                "term `{}` has no nilpotent factor",
                SuperPoly::monomial_string(ctx, m)
            )));
        }
    }
    let u = n.scale(&-&c_inv);
    let bound = ctx.nilpotency_bound();
    let mut acc = SuperPoly::zero(ctx);
    let mut term = SuperPoly::one(ctx);
    let mut k = 0;
    while !term.is_zero() {
        if k > bound {
            return Err(AlgError::NotNilpotent(format!(
                "geometric series for `{p}` exceeds degree bound {bound}"
            )));
        }
        acc = &acc + &term;
        term = &term * &u;
        k += 1;
    }
    let q = acc.scale(&c_inv);
    debug_assert!((p * &q) == SuperPoly::one(ctx));
    Ok(q)
}

/// Inverse of `c·m + n` where `m` is a monomial in invertible generators
/// and `n` is nilpotent relative to it.
pub fn invert(p: &SuperPoly) -> Result<SuperPoly, AlgError> {
    let ctx = p.ctx();
    let unit_terms: Vec<_> = p
        .terms()
        .filter(|(m, _)| {
            m.exponents()
                .iter()
                .enumerate()
                .all(|(i, &e)| e == 0 || ctx.var(i).invertible)
        })
        .collect();
    let (m, c) = match unit_terms.as_slice() {
        [(m, c)] => ((*m).clone(), (*c).clone()),
        [] => return Err(AlgError::NotAUnit(format!("`{p}` has no unit part"))),
        _ => {
            return Err(AlgError::NotAUnit(format!(
                "unit part of `{p}` is not a single monomial"
            )))
        }
    };
    let mut inv_m = m.clone();
    for e in inv_m.0.iter_mut() {
        *e = -*e;
    }
    let lead_inv = SuperPoly::term(ctx, inv_m, Q::one());
    // p = (c·m)(1 + u) with u = m⁻¹·n/c.
    let normalized = (&lead_inv * p).scale(&c.inv().expect("nonzero"));
    let q = invert_unit(&normalized)?;
    Ok((&q * &lead_inv).scale(&c.inv().unwrap()))
}
