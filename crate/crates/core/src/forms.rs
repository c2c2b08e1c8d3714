//! De Rham calculus on free super-polynomial algebras.
//!
//! Each base generator `v` gets a twin `dv` of opposite parity. The de Rham
//! differential is the odd left derivation `v ↦ dv`, so
//! `d(fg) = (df)g + (-1)^{|f|} f dg`. Extra generators (parameters) are
//! constants for `d`.
//!
//! A capped even generator `x` (cap `c`) also gets the joint relation
//! `x^{c-1} dx = 0`, which keeps the truncation ideal stable under `d`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::rational::Q;
use crate::superalg::{AlgError, Context, Ctx, Derivation, Monomial, Parity, SuperPoly, VarSpec};

/// Forms are polynomials in a [`FormContext`].
pub type DifferentialForm = SuperPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error("form is not closed: d of it is `{0}`")]
    NotClosed(String),
    #[error("component of Euler weight zero has no primitive: `{0}`")]
    WeightZero(String),
    #[error("form degree must be at least 1")]
    DegreeZero,
}

#[derive(Clone, Debug)]
pub struct FormContext {
    ctx: Ctx,
    base: Vec<usize>,
    twins: Vec<usize>,
    extras: Vec<usize>,
    /// For each context position, its base slot if it is a base or twin.
    slot: Vec<Option<usize>>,
    is_twin: Vec<bool>,
    d: Derivation,
    iota: Derivation,
}

/// Name given to the differential twin of `name`.
pub fn twin_name(name: &str) -> String {
    format!("d{name}")
}

impl FormContext {
    /// Forms over `base` with constant parameters `extras`; twins of odd
    /// generators are uncapped.
    pub fn new(base: Vec<VarSpec>, extras: Vec<VarSpec>) -> Result<Self, AlgError> {
        Self::with_odd_twin_cap(base, extras, None)
    }

    /// As [`FormContext::new`], with a cap on the even twins `dξ` of odd
    /// generators. Such a cap is not stable under the Euler contraction.
    pub fn with_odd_twin_cap(
        base: Vec<VarSpec>,
        extras: Vec<VarSpec>,
        odd_twin_cap: Option<u32>,
    ) -> Result<Self, AlgError> {
        let mut specs = base.clone();
        let mut joint = Vec::new();
        for v in &base {
            if v.invertible {
                return Err(AlgError::InvalidSpec(format!(
                    "invertible generator `{}` cannot carry a differential",
                    v.name
                )));
            }
            let mut t = VarSpec::new(twin_name(&v.name), v.parity.flip());
            if v.parity == Parity::Odd {
                if let Some(c) = odd_twin_cap {
                    t = t.with_cap(c);
                }
            } else if let Some(c) = v.nil_cap {
                joint.push((vec![v.name.clone(), t.name.clone()], c));
            }
            specs.push(t);
        }
        specs.extend(extras.iter().cloned());
        let ctx = Context::with_joint_caps(specs, joint)?;

        let base_idx: Vec<usize> = base.iter().map(|v| ctx.get(&v.name).unwrap()).collect();
        let twin_idx: Vec<usize> = base
            .iter()
            .map(|v| ctx.get(&twin_name(&v.name)).unwrap())
            .collect();
        let extras_idx = extras.iter().map(|v| ctx.get(&v.name).unwrap()).collect();
        let mut slot = vec![None; ctx.len()];
        let mut is_twin = vec![false; ctx.len()];
        for (k, (&b, &t)) in base_idx.iter().zip(&twin_idx).enumerate() {
            slot[b] = Some(k);
            slot[t] = Some(k);
            is_twin[t] = true;
        }
        let mut d = Derivation::zero(&ctx, Parity::Odd);
        let mut iota = Derivation::zero(&ctx, Parity::Odd);
        for (&b, &t) in base_idx.iter().zip(&twin_idx) {
            d.set(b, SuperPoly::var(&ctx, t))?;
            iota.set(t, SuperPoly::var(&ctx, b))?;
        }
        Ok(FormContext {
            ctx,
            base: base_idx,
            twins: twin_idx,
            extras: extras_idx,
            slot,
            is_twin,
            d,
            iota,
        })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    /// Context positions of the base generators, in declaration order.
    pub fn base(&self) -> &[usize] {
        &self.base
    }

    /// Context positions of the twins, aligned with [`FormContext::base`].
    pub fn twins(&self) -> &[usize] {
        &self.twins
    }

    pub fn extras(&self) -> &[usize] {
        &self.extras
    }

    pub fn base_var(&self, name: &str) -> Result<SuperPoly, AlgError> {
        SuperPoly::named(&self.ctx, name)
    }

    /// `d(name)` as a form.
    pub fn twin_var(&self, name: &str) -> Result<SuperPoly, AlgError> {
        SuperPoly::named(&self.ctx, &twin_name(name))
    }

    pub fn is_twin(&self, pos: usize) -> bool {
        self.is_twin[pos]
    }

    pub fn form_degree(&self, m: &Monomial) -> u32 {
        self.twins.iter().map(|&t| m.exp(t) as u32).sum()
    }

    /// Euler weight: total exponent over base generators and twins.
    pub fn weight(&self, m: &Monomial) -> i32 {
        m.exponents()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.slot[*i].is_some())
            .map(|(_, &e)| e)
            .sum()
    }

    pub fn degree_components(&self, w: &DifferentialForm) -> BTreeMap<u32, DifferentialForm> {
        let mut out: BTreeMap<u32, DifferentialForm> = BTreeMap::new();
        for (m, c) in w.terms() {
            let k = self.form_degree(m);
            out.entry(k)
                .or_insert_with(|| SuperPoly::zero(&self.ctx))
                .add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn component(&self, w: &DifferentialForm, k: u32) -> DifferentialForm {
        w.filter(|m| self.form_degree(m) == k)
    }

    pub fn d(&self, w: &DifferentialForm) -> DifferentialForm {
        self.d.apply(w)
    }

    pub fn d_derivation(&self) -> &Derivation {
        &self.d
    }

    pub fn is_closed(&self, w: &DifferentialForm) -> bool {
        self.d(w).is_zero()
    }

    /// Contraction with the Euler vector field: the odd derivation `dv ↦ v`.
    pub fn iota(&self, w: &DifferentialForm) -> DifferentialForm {
        self.iota.apply(w)
    }

    /// `h(ω) = Σ_w ι(ω_w)/w` over Euler-weight components.
    pub fn homotopy(&self, w: &DifferentialForm) -> Result<DifferentialForm, FormError> {
        let mut out = SuperPoly::zero(&self.ctx);
        for (m, c) in w.terms() {
            let wt = self.weight(m);
            if wt == 0 {
                return Err(FormError::WeightZero(SuperPoly::monomial_string(&self.ctx, m)));
            }
            let piece = self.iota(&SuperPoly::term(&self.ctx, m.clone(), c.clone()));
            out = &out + &piece.scale(&Q::new(1, wt as i64));
        }
        Ok(out)
    }

    /// Primitive of a closed form of positive degree, chosen by the Euler
    /// homotopy; `d` of the result is checked against the input.
    pub fn poincare_homotopy(&self, w: &DifferentialForm) -> Result<DifferentialForm, FormError> {
        let dw = self.d(w);
        if !dw.is_zero() {
            return Err(FormError::NotClosed(dw.to_string()));
        }
        if w.terms().any(|(m, _)| self.form_degree(m) == 0) {
            return Err(FormError::DegreeZero);
        }
        let eta = self.homotopy(w)?;
        assert_eq!(&self.d(&eta), w, "homotopy failed to produce a primitive");
        Ok(eta)
    }
}
