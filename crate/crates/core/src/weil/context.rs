use super::{LocalSuperAlgebra, WeilError};
use crate::rational::Q;
use crate::superalg::{Context, Ctx, Derivation, Parity, SuperPoly, VarSpec};

/// Components of an element of `𝔬 ⊗ A^𝔬`, indexed by the basis of `𝔬`.
pub type WeilElement = Vec<SuperPoly>;

/// The near-point algebra `A^𝔬` of a free algebra `A`.
///
/// Generators are `x[i]` for each base generator `x` and basis element `e_i`,
/// with parity `|x| + |e_i|`; `x[0]` is named `x` itself. The universal
/// element is `x ↦ Σ_i e_i ⊗ x[i]`, basis element on the left.
#[derive(Clone, Debug)]
pub struct WeilContext {
    base: Ctx,
    algebra: LocalSuperAlgebra,
    ctx: Ctx,
    gens: Vec<Vec<usize>>,
}

/// Name of the Weil generator `x[i]`.
pub fn weil_name(base: &str, i: usize) -> String {
    if i == 0 {
        base.to_string()
    } else {
        format!("{base}[{i}]")
    }
}

impl WeilContext {
    pub fn new(base: &Ctx, algebra: LocalSuperAlgebra) -> Result<Self, WeilError> {
        let mut specs = Vec::new();
        for v in base.vars() {
            if v.nil_cap.is_some() && v.parity == Parity::Even || v.invertible {
                return Err(WeilError::Unsupported(format!(
                    "base generator `{}` must be free (uncapped, not invertible)",
                    v.name
                )));
            }
        }
        for i in 0..algebra.dim() {
            for v in base.vars() {
                specs.push(VarSpec::new(weil_name(&v.name, i), v.parity + algebra.parity(i)));
            }
        }
        let ctx = Context::new(specs)?;
        let gens = base
            .vars()
            .iter()
            .map(|v| {
                (0..algebra.dim())
                    .map(|i| ctx.get(&weil_name(&v.name, i)).unwrap())
                    .collect()
            })
            .collect();
        Ok(WeilContext {
            base: base.clone(),
            algebra,
            ctx,
            gens,
        })
    }

    pub fn base(&self) -> &Ctx {
        &self.base
    }

    pub fn algebra(&self) -> &LocalSuperAlgebra {
        &self.algebra
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    /// Context position of `x_j[i]`, `j` indexing base generators.
    pub fn gen(&self, j: usize, i: usize) -> usize {
        self.gens[j][i]
    }

    pub fn gen_var(&self, j: usize, i: usize) -> SuperPoly {
        SuperPoly::var(&self.ctx, self.gens[j][i])
    }

    /// `x_j ↦ Σ_i e_i ⊗ x_j[i]`.
    pub fn lift(&self, j: usize) -> WeilElement {
        (0..self.algebra.dim()).map(|i| self.gen_var(j, i)).collect()
    }

    pub fn constant(&self, c: SuperPoly) -> WeilElement {
        let mut v = vec![SuperPoly::zero(&self.ctx); self.algebra.dim()];
        v[0] = c;
        v
    }

    /// `(e_i ⊗ f)(e_j ⊗ g) = (-1)^{|f||e_j|} e_i e_j ⊗ fg`.
    pub fn mul(&self, a: &WeilElement, b: &WeilElement) -> WeilElement {
        let n = self.algebra.dim();
        let mut out = vec![SuperPoly::zero(&self.ctx); n];
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            let odd_part = a[i].filter(|m| m.parity(&self.ctx).is_odd());
            let even_part = &a[i] - &odd_part;
            for j in 0..n {
                if b[j].is_zero() {
                    continue;
                }
                let f = if self.algebra.parity(j).is_odd() {
                    &even_part - &odd_part
                } else {
                    a[i].clone()
                };
                let fg = &f * &b[j];
                if fg.is_zero() {
                    continue;
                }
                for (k, slot) in out.iter_mut().enumerate() {
                    let c = self.algebra.structure(i, j, k);
                    if !c.is_zero() {
                        *slot = &*slot + &fg.scale(c);
                    }
                }
            }
        }
        out
    }

    /// Components of `f(Σ_i e_i ⊗ x[i])`.
    pub fn expand(&self, f: &SuperPoly) -> Result<WeilElement, WeilError> {
        if !Context::same(f.ctx(), &self.base) {
            return Err(WeilError::Alg(crate::superalg::AlgError::ContextMismatch));
        }
        let n = self.algebra.dim();
        let mut powers: Vec<Vec<WeilElement>> = (0..self.base.len())
            .map(|j| vec![self.constant(SuperPoly::one(&self.ctx)), self.lift(j)])
            .collect();
        let mut out = vec![SuperPoly::zero(&self.ctx); n];
        for (m, c) in f.terms() {
            let mut acc = self.constant(SuperPoly::constant(&self.ctx, c.clone()));
            for (j, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let e = e as usize;
                while powers[j].len() <= e {
                    let next = self.mul(powers[j].last().unwrap(), &powers[j][1]);
                    powers[j].push(next);
                }
                acc = self.mul(&acc, &powers[j][e]);
            }
            for (slot, part) in out.iter_mut().zip(acc) {
                *slot = &*slot + &part;
            }
        }
        Ok(out)
    }

    /// `f` with `x ↦ x[0]`.
    pub fn embed_base(&self, f: &SuperPoly) -> Result<SuperPoly, WeilError> {
        Ok(f.embed(&self.ctx)?)
    }

    /// The derivation of `A^𝔬` induced by a derivation `δ(e_i) = Σ_k d[i][k] e_k`
    /// of `𝔬` of parity `p`:
    /// `Δ(x[k]) = (-1)^{p|e_k|} Σ_i d[i][k] x[i]`.
    ///
    /// This is the unique `Δ` with `(δ ⊗ 1)(x) = (1 ⊗ Δ)(x)` on the universal
    /// element. It reverses graded commutators, so it is a homomorphism for
    /// the bracket `[δ₁, δ₂]_G = −[δ₁, δ₂]` on `Der(𝔬)`.
    pub fn induced_derivation(&self, d: &[Vec<Q>], p: Parity) -> Result<Derivation, WeilError> {
        if !self.algebra.is_derivation(d, p) {
            return Err(WeilError::NotADerivation(format!(
                "matrix is not a {p} derivation of the algebra"
            )));
        }
        let n = self.algebra.dim();
        let mut delta = Derivation::zero(&self.ctx, p);
        for j in 0..self.base.len() {
            for k in 0..n {
                let mut img = SuperPoly::zero(&self.ctx);
                for (i, row) in d.iter().enumerate() {
                    if !row[k].is_zero() {
                        img = &img + &self.gen_var(j, i).scale(&row[k]);
                    }
                }
                if p.koszul(self.algebra.parity(k)) {
                    img = -img;
                }
                delta.set(self.gens[j][k], img)?;
            }
        }
        Ok(delta)
    }
}
