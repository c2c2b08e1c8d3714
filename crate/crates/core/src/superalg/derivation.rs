use super::{AlgError, Ctx, Monomial, Parity, SuperPoly};
use crate::rational::Q;

/// A homogeneous left derivation, determined by its values on generators.
///
/// Extended to monomials by the graded Leibniz rule
/// `δ(mn) = δ(m)n + (-1)^{|δ||m|} m δ(n)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Derivation {
    ctx: Ctx,
    parity: Parity,
    images: Vec<SuperPoly>,
}

impl Derivation {
    pub fn zero(ctx: &Ctx, parity: Parity) -> Self {
        Derivation {
            ctx: ctx.clone(),
            parity,
            images: vec![SuperPoly::zero(ctx); ctx.len()],
        }
    }

    /// Builds a derivation from generator images; unlisted generators map to 0.
    pub fn new<'a>(
        ctx: &Ctx,
        parity: Parity,
        images: impl IntoIterator<Item = (&'a str, SuperPoly)>,
    ) -> Result<Self, AlgError> {
        let mut d = Self::zero(ctx, parity);
        for (name, img) in images {
            let i = ctx.index_of(name)?;
            d.set(i, img)?;
        }
        Ok(d)
    }

    /// Sets the image of generator `i`, checking parity.
    pub fn set(&mut self, i: usize, img: SuperPoly) -> Result<(), AlgError> {
        if !super::Context::same(img.ctx(), &self.ctx) {
            return Err(AlgError::ContextMismatch);
        }
        let want = self.ctx.parity(i) + self.parity;
        if !img.is_zero() && img.parity() != Some(want) {
            return Err(AlgError::Parity(format!(
                "image of `{}` must be {want}",
                self.ctx.var(i).name
            )));
        }
        self.images[i] = img;
        Ok(())
    }

    /// `∂/∂v` for generator `i`; its parity is that of `v`.
    pub fn partial(ctx: &Ctx, i: usize) -> Self {
        let mut d = Self::zero(ctx, ctx.parity(i));
        d.images[i] = SuperPoly::one(ctx);
        d
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn image(&self, i: usize) -> &SuperPoly {
        &self.images[i]
    }

    pub fn apply(&self, p: &SuperPoly) -> SuperPoly {
        assert!(
            super::Context::same(p.ctx(), &self.ctx),
            "derivation applied across contexts"
        );
        let ctx = &self.ctx;
        let mut out = SuperPoly::zero(ctx);
        for (m, c) in p.terms() {
            for k in 0..ctx.len() {
                let e = m.exp(k);
                if e == 0 || self.images[k].is_zero() {
                    continue;
                }
                // m = left * v_k^e * right with left/right canonical.
                let mut left = m.clone();
                let mut right = Monomial::one(ctx.len());
                for j in k + 1..ctx.len() {
                    right.0[j] = left.0[j];
                    left.0[j] = 0;
                }
                left.0[k] = e - 1;
                let mut coeff = c * &Q::from_int(e as i64);
                if self.parity.is_odd() && m.odd_before(ctx, k) % 2 == 1 {
                    coeff = -coeff;
                }
                let piece = self.images[k]
                    .mul_monomial_left(&left)
                    .mul_monomial_right(&right);
                for (pm, pc) in piece.into_terms() {
                    out.add_term(pm, &pc * &coeff);
                }
            }
        }
        out
    }

    /// Graded commutator `δ₁δ₂ − (−1)^{|δ₁||δ₂|}δ₂δ₁`.
    pub fn commutator(&self, other: &Derivation) -> Derivation {
        let parity = self.parity + other.parity;
        let sign = if self.parity.koszul(other.parity) {
            Q::one()
        } else {
            -Q::one()
        };
        let images = (0..self.ctx.len())
            .map(|i| {
                let a = self.apply(&other.images[i]);
                let b = other.apply(&self.images[i]);
                &a + &b.scale(&sign)
            })
            .collect();
        Derivation {
            ctx: self.ctx.clone(),
            parity,
            images,
        }
    }

    pub fn scale(&self, c: &Q) -> Derivation {
        Derivation {
            ctx: self.ctx.clone(),
            parity: self.parity,
            images: self.images.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Sum of derivations of equal parity.
    pub fn add(&self, other: &Derivation) -> Result<Derivation, AlgError> {
        if self.parity != other.parity {
            return Err(AlgError::Parity("sum of derivations of mixed parity".into()));
        }
        Ok(Derivation {
            ctx: self.ctx.clone(),
            parity: self.parity,
            images: self
                .images
                .iter()
                .zip(&other.images)
                .map(|(a, b)| a.try_add(b))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(SuperPoly::is_zero)
    }
}

impl std::fmt::Debug for Derivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut m = f.debug_map();
        for (i, img) in self.images.iter().enumerate() {
            if !img.is_zero() {
                m.entry(&self.ctx.var(i).name, &img.to_string());
            }
        }
        m.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Context, VarSpec};
    use super::*;

    fn setup() -> Ctx {
        Context::new(vec![VarSpec::even("x"), VarSpec::odd("xi")]).unwrap()
    }

    #[test]
    fn examples() {
        let c = setup();
        let x = SuperPoly::named(&c, "x").unwrap();
        let xi = SuperPoly::named(&c, "xi").unwrap();
        let dx = Derivation::partial(&c, 0);
        assert_eq!(dx.apply(&x.pow(3)).to_string(), "3*x^2");

        let d = Derivation::new(&c, Parity::Odd, [("x", xi.clone())]).unwrap();
        assert!(d.apply(&(&x * &xi)).is_zero());

        let theta = Derivation::new(&c, Parity::Even, [("xi", xi.clone())]).unwrap();
        let p = &x.pow(2) * &xi;
        assert_eq!(theta.apply(&p), p);

        // [Θ, D] = D
        assert_eq!(theta.commutator(&d), d);
        assert!(Derivation::new(&c, Parity::Odd, [("x", x.clone())]).is_err());
    }

    #[test]
    fn odd_sign_passes_odd_factor() {
        let c = Context::new(vec![VarSpec::odd("a"), VarSpec::odd("b")]).unwrap();
        let a = SuperPoly::named(&c, "a").unwrap();
        let b = SuperPoly::named(&c, "b").unwrap();
        let db = Derivation::partial(&c, 1);
        // ∂_b(ab) = -a
        assert_eq!(db.apply(&(&a * &b)), -&a);
        assert_eq!(db.apply(&(&b * &a)), a);
    }
}
