use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{LoopError, NilLaurent};
use crate::forms::FormContext;
use crate::superalg::{Ctx, Monomial, Parity, SuperPoly, VarSpec};

/// Name of the odd generator standing for `dt`.
pub const DT: &str = "dt";

/// Coefficient ring of a family of loops, with differentials.
///
/// `params` get de Rham twins; `constants` (such as an invertible `λ`) do
/// not. The odd generator `dt` is declared last, so it sits rightmost in
/// every canonical monomial.
#[derive(Debug)]
pub struct LoopSpace {
    forms: FormContext,
    dt: usize,
}

impl LoopSpace {
    pub fn new(params: Vec<VarSpec>, constants: Vec<VarSpec>) -> Result<Arc<Self>, LoopError> {
        let mut extras = constants;
        extras.push(VarSpec::odd(DT));
        let forms = FormContext::new(params, extras)?;
        let dt = forms.ctx().index_of(DT)?;
        debug_assert_eq!(dt, forms.ctx().len() - 1);
        Ok(Arc::new(LoopSpace { forms, dt }))
    }

    pub fn forms(&self) -> &FormContext {
        &self.forms
    }

    pub fn ctx(&self) -> &Ctx {
        self.forms.ctx()
    }

    pub fn dt_index(&self) -> usize {
        self.dt
    }

    pub fn dt(&self) -> SuperPoly {
        SuperPoly::var(self.ctx(), self.dt)
    }

    pub fn var(&self, name: &str) -> Result<SuperPoly, LoopError> {
        Ok(SuperPoly::named(self.ctx(), name)?)
    }

    /// Whether every monomial of `p` contains a nilpotent generator.
    pub fn is_nilpotent(&self, p: &SuperPoly) -> bool {
        let ctx = self.ctx();
        let joint: Vec<usize> = ctx.joint_caps().iter().flat_map(|(v, _)| v.clone()).collect();
        p.terms().all(|(m, _)| {
            m.exponents().iter().enumerate().any(|(i, &e)| {
                e > 0 && (ctx.var(i).is_nilpotent() || ctx.parity(i).is_odd() || joint.contains(&i))
            })
        })
    }
}

/// A point of the loop space of `X`: one series per coordinate of `X`.
#[derive(Clone, Debug)]
pub struct LoopPoint {
    space: Arc<LoopSpace>,
    names: Vec<String>,
    coords: Vec<NilLaurent>,
}

impl LoopPoint {
    /// Checks parities against `x` and nilpotency of negative modes.
    pub fn new(
        x: &FormContext,
        space: &Arc<LoopSpace>,
        coords: Vec<NilLaurent>,
    ) -> Result<Self, LoopError> {
        if coords.len() != x.base().len() {
            return Err(LoopError::Shape(format!(
                "{} coordinates given, X has {}",
                coords.len(),
                x.base().len()
            )));
        }
        let mut names = Vec::new();
        for (&b, s) in x.base().iter().zip(&coords) {
            let v = x.ctx().var(b);
            if !crate::superalg::Context::same(s.ctx(), space.ctx()) {
                return Err(LoopError::Alg(crate::superalg::AlgError::ContextMismatch));
            }
            for (n, c) in s.terms() {
                if c.parity() != Some(v.parity) {
                    return Err(LoopError::Alg(crate::superalg::AlgError::Parity(format!(
                        "coefficient of t^{n} in `{}` must be {}",
                        v.name, v.parity
                    ))));
                }
                if n < 0 && !space.is_nilpotent(c) {
                    return Err(LoopError::NotNilpotent(format!(
                        "coefficient of t^{n} in `{}`: {c}",
                        v.name
                    )));
                }
            }
            names.push(v.name.clone());
        }
        Ok(LoopPoint {
            space: space.clone(),
            names,
            coords,
        })
    }

    pub fn space(&self) -> &Arc<LoopSpace> {
        &self.space
    }

    pub fn coords(&self) -> &[NilLaurent] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &NilLaurent {
        &self.coords[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Common validity bound of the coordinates.
    pub fn valid_to(&self) -> Option<i32> {
        self.coords.iter().filter_map(NilLaurent::valid_to).min()
    }

    /// Lowest exponent over all coordinates.
    pub fn lowest(&self) -> i32 {
        self.coords
            .iter()
            .filter_map(NilLaurent::lowest)
            .min()
            .unwrap_or(0)
    }
}

impl Serialize for LoopPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Coord<'a> {
            coordinate: &'a str,
            #[serde(flatten)]
            series: &'a NilLaurent,
        }
        let coords: Vec<Coord> = self
            .names
            .iter()
            .zip(&self.coords)
            .map(|(n, c)| Coord {
                coordinate: n,
                series: c,
            })
            .collect();
        let mut st = s.serialize_struct("LoopPoint", 1)?;
        st.serialize_field("coordinates", &coords)?;
        st.end()
    }
}

/// Name of the loop coefficient `x_{i,n}`.
pub fn mode_name(coord: &str, n: i32) -> String {
    format!("{coord}[{n}]")
}

/// Symbolic loops `x_i(t) = Σ_{n=-M}^{K} x_{i,n} tⁿ` on a window `[−M, K]`.
///
/// Even coefficients of negative modes carry the cap `neg_cap`; the series
/// are valid up to `t^K`.
#[derive(Clone, Debug)]
pub struct LoopContext {
    x: FormContext,
    window: (i32, i32),
    neg_cap: u32,
    space: Arc<LoopSpace>,
}

impl LoopContext {
    pub fn new(
        x: &FormContext,
        m: i32,
        k: i32,
        neg_cap: u32,
        extras: Vec<VarSpec>,
    ) -> Result<Self, LoopError> {
        if m < 0 || k < 0 {
            return Err(LoopError::Shape(format!("window [-{m}, {k}] is not valid")));
        }
        if neg_cap < 2 && m > 0 {
            return Err(LoopError::Shape("negative-mode cap must be at least 2".into()));
        }
        let mut params = Vec::new();
        for &b in x.base() {
            let v = x.ctx().var(b);
            for n in -m..=k {
                let mut s = VarSpec::new(mode_name(&v.name, n), v.parity);
                if n < 0 && v.parity == Parity::Even {
                    s = s.with_cap(neg_cap);
                }
                params.push(s);
            }
        }
        let space = LoopSpace::new(params, extras)?;
        Ok(LoopContext {
            x: x.clone(),
            window: (m, k),
            neg_cap,
            space,
        })
    }

    pub fn x(&self) -> &FormContext {
        &self.x
    }

    pub fn window(&self) -> (i32, i32) {
        self.window
    }

    pub fn neg_cap(&self) -> u32 {
        self.neg_cap
    }

    pub fn space(&self) -> &Arc<LoopSpace> {
        &self.space
    }

    /// `x_{i,n}` for the `i`-th coordinate of `X`.
    pub fn mode(&self, i: usize, n: i32) -> Result<SuperPoly, LoopError> {
        let name = self.x.ctx().var(self.x.base()[i]).name.clone();
        self.space.var(&mode_name(&name, n))
    }

    /// The generic loop, valid up to `t^K`.
    pub fn generic_point(&self) -> Result<LoopPoint, LoopError> {
        let (m, k) = self.window;
        let mut coords = Vec::new();
        for i in 0..self.x.base().len() {
            let terms = (-m..=k)
                .map(|n| Ok((n, self.mode(i, n)?)))
                .collect::<Result<Vec<_>, LoopError>>()?;
            coords.push(NilLaurent::from_terms(self.space.ctx(), terms, Some(k))?);
        }
        LoopPoint::new(&self.x, &self.space, coords)
    }

    /// Total weight `Σ n·e` of a monomial in the loop coefficients.
    pub fn weight(&self, m: &Monomial) -> i32 {
        let (lo, hi) = self.window;
        let ctx = self.space.ctx();
        let mut w = 0;
        for &b in self.x.base() {
            let name = &self.x.ctx().var(b).name;
            for n in -lo..=hi {
                w += n * m.exp(ctx.get(&mode_name(name, n)).expect("mode exists"));
            }
        }
        w
    }
}
