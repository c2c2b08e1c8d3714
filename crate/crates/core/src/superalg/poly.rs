use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

use super::{AlgError, Context, Ctx, Monomial, Parity};
use crate::rational::Q;

/// Canonical form of an ordered product of generator powers.
///
/// Returns the Koszul sign (`0` when the product vanishes) and the monomial.
pub fn normalize_monomial(
    ctx: &Context,
    factors: &[(&str, i32)],
) -> Result<(i8, Option<Monomial>), AlgError> {
    let n = ctx.len();
    let mut acc = Monomial::one(n);
    let mut negative = false;
    for &(name, pow) in factors {
        let i = ctx.index_of(name)?;
        let v = ctx.var(i);
        if pow < 0 && !v.invertible {
            return Err(AlgError::NegativePower(name.to_string()));
        }
        if pow == 0 {
            continue;
        }
        if v.parity == Parity::Odd && pow > 1 {
            return Ok((0, None));
        }
        let mut e = vec![0; n];
        e[i] = pow;
        let m = Monomial(e);
        if !m.is_valid(ctx) {
            return Ok((0, None));
        }
        match acc.mul(&m, ctx) {
            None => return Ok((0, None)),
            Some((s, prod)) => {
                negative ^= s;
                acc = prod;
            }
        }
    }
    Ok((if negative { -1 } else { 1 }, Some(acc)))
}

/// A polynomial in a [`Context`]: nonzero rational coefficients on canonical
/// monomials.
#[derive(Clone)]
pub struct SuperPoly {
    ctx: Ctx,
    terms: BTreeMap<Monomial, Q>,
}

impl SuperPoly {
    pub fn zero(ctx: &Ctx) -> Self {
        SuperPoly {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Ctx, c: Q) -> Self {
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(ctx.len()), c);
        }
        p
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::constant(ctx, Q::one())
    }

    pub fn var(ctx: &Ctx, i: usize) -> Self {
        Self::term(ctx, Monomial::var(ctx.len(), i), Q::one())
    }

    pub fn named(ctx: &Ctx, name: &str) -> Result<Self, AlgError> {
        Ok(Self::var(ctx, ctx.index_of(name)?))
    }

    /// `c * m`; zero if `m` violates a cap.
    pub fn term(ctx: &Ctx, m: Monomial, c: Q) -> Self {
        let mut p = Self::zero(ctx);
        if !c.is_zero() && m.is_valid(ctx) {
            p.terms.insert(m, c);
        }
        p
    }

    /// Product of generator powers in the given order, with its Koszul sign.
    pub fn product(ctx: &Ctx, factors: &[(&str, i32)]) -> Result<Self, AlgError> {
        match normalize_monomial(ctx, factors)? {
            (_, None) | (0, _) => Ok(Self::zero(ctx)),
            (s, Some(m)) => Ok(Self::term(ctx, m, Q::from_int(s as i64))),
        }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Q> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&Monomial::one(self.ctx.len()))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// `Some(c)` when the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<Q> {
        self.is_constant().then(|| self.constant_term())
    }

    /// Parity when every monomial agrees; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity(&self.ctx));
        let first = it.next().unwrap_or(Parity::Even);
        it.all(|p| p == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.parity().is_some()
    }

    pub fn same_ctx(&self, other: &SuperPoly) -> bool {
        Context::same(&self.ctx, &other.ctx)
    }

    fn check_ctx(&self, other: &SuperPoly) -> Result<(), AlgError> {
        if self.same_ctx(other) {
            Ok(())
        } else {
            Err(AlgError::ContextMismatch)
        }
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn try_add(&self, other: &SuperPoly) -> Result<SuperPoly, AlgError> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &SuperPoly) -> Result<SuperPoly, AlgError> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &SuperPoly) -> Result<SuperPoly, AlgError> {
        self.check_ctx(other)?;
        let mut out = SuperPoly::zero(&self.ctx);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((neg, m)) = m1.mul(m2, &self.ctx) {
                    let c = c1 * c2;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> SuperPoly {
        if c.is_zero() {
            return SuperPoly::zero(&self.ctx);
        }
        SuperPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> SuperPoly {
        let mut acc = SuperPoly::one(&self.ctx);
        for _ in 0..e {
            if acc.is_zero() {
                break;
            }
            acc = &acc * self;
        }
        acc
    }

    /// `m * self` with `m` a canonical monomial.
    pub fn mul_monomial_left(&self, m: &Monomial) -> SuperPoly {
        let mut out = SuperPoly::zero(&self.ctx);
        for (m2, c) in &self.terms {
            if let Some((neg, p)) = m.mul(m2, &self.ctx) {
                out.add_term(p, if neg { -c } else { c.clone() });
            }
        }
        out
    }

    /// `self * m` with `m` a canonical monomial.
    pub fn mul_monomial_right(&self, m: &Monomial) -> SuperPoly {
        let mut out = SuperPoly::zero(&self.ctx);
        for (m1, c) in &self.terms {
            if let Some((neg, p)) = m1.mul(m, &self.ctx) {
                out.add_term(p, if neg { -c } else { c.clone() });
            }
        }
        out
    }

    /// Keeps the terms whose monomial satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> SuperPoly {
        SuperPoly {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Left coefficient of `u` with respect to the generators in `over`.
    ///
    /// `u` must be supported on `over`. Returns `r` such that the part of
    /// `self` whose exponents on `over` equal those of `u` is exactly `u * r`.
    pub fn coeff_left(&self, u: &Monomial, over: &[usize]) -> SuperPoly {
        let mut out = SuperPoly::zero(&self.ctx);
        for (m, c) in &self.terms {
            if over.iter().any(|&i| m.0[i] != u.0[i]) {
                continue;
            }
            let mut rest = m.clone();
            for &i in over {
                rest.0[i] = 0;
            }
            let (neg, back) = u
                .mul(&rest, &self.ctx)
                .expect("factoring a nonzero monomial cannot vanish");
            debug_assert_eq!(&back, m);
            out.add_term(rest, if neg { -c } else { c.clone() });
        }
        out
    }

    /// Right coefficient: returns `c` such that the part of `self` whose
    /// exponents on `over` equal those of `u` is exactly `c * u`.
    pub fn coeff_right(&self, u: &Monomial, over: &[usize]) -> SuperPoly {
        let r = self.coeff_left(u, over);
        if !u.parity(&self.ctx).is_odd() {
            return r;
        }
        let mut out = SuperPoly::zero(&self.ctx);
        for (m, c) in r.terms {
            let odd = m.parity(&self.ctx).is_odd();
            out.add_term(m, if odd { -c } else { c });
        }
        out
    }

    /// Rewrites the polynomial in `target`, matching generators by name.
    ///
    /// Generators of `self` with nonzero exponent must exist in `target` with
    /// the same parity. Monomials that violate `target`'s caps are dropped.
    pub fn embed(&self, target: &Ctx) -> Result<SuperPoly, AlgError> {
        let mut map = Vec::with_capacity(self.ctx.len());
        for v in self.ctx.vars() {
            map.push(match target.get(&v.name) {
                Some(j) if target.var(j).parity == v.parity => Some(j),
                Some(_) => return Err(AlgError::Parity(format!("`{}` changes parity", v.name))),
                None => None,
            });
        }
        let mut out = SuperPoly::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.len()];
            for (i, &x) in m.0.iter().enumerate() {
                if x != 0 {
                    match map[i] {
                        Some(j) => e[j] = x,
                        None => {
                            return Err(AlgError::UnknownVariable(self.ctx.var(i).name.clone()))
                        }
                    }
                }
            }
            // Relative order of odd generators may change between contexts.
            let odd_positions: Vec<usize> = (self.ctx.n_even()..self.ctx.len())
                .filter(|&i| m.0[i] != 0)
                .map(|i| map[i].unwrap())
                .collect();
            let mut inversions = 0usize;
            for a in 0..odd_positions.len() {
                for b in a + 1..odd_positions.len() {
                    if odd_positions[a] > odd_positions[b] {
                        inversions += 1;
                    }
                }
            }
            let mono = Monomial(e);
            if mono.is_valid(target) {
                out.add_term(mono, if inversions % 2 == 1 { -c } else { c.clone() });
            }
        }
        Ok(out)
    }

    /// Canonical text of a single monomial, `1` for the unit.
    pub fn monomial_string(ctx: &Context, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, &e)| {
                let name = &ctx.var(i).name;
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Terms in display order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &Q)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.graded_cmp(b.0));
        v
    }
}

impl PartialEq for SuperPoly {
    fn eq(&self, other: &Self) -> bool {
        self.same_ctx(other) && self.terms == other.terms
    }
}

impl Eq for SuperPoly {}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                f.write_str(&Self::monomial_string(&self.ctx, m))?;
            } else {
                write!(f, "{a}*{}", Self::monomial_string(&self.ctx, m))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SuperPoly({self})")
    }
}

impl Serialize for SuperPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

// Operators panic on a context mismatch; use the `try_*` forms to recover.
macro_rules! poly_binop {
    ($tr:ident, $m:ident, $try:ident) => {
        impl $tr<&SuperPoly> for &SuperPoly {
            type Output = SuperPoly;
            fn $m(self, rhs: &SuperPoly) -> SuperPoly {
                self.$try(rhs).expect("polynomials from different contexts")
            }
        }
        impl $tr<SuperPoly> for SuperPoly {
            type Output = SuperPoly;
            fn $m(self, rhs: SuperPoly) -> SuperPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&SuperPoly> for SuperPoly {
            type Output = SuperPoly;
            fn $m(self, rhs: &SuperPoly) -> SuperPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<SuperPoly> for &SuperPoly {
            type Output = SuperPoly;
            fn $m(self, rhs: SuperPoly) -> SuperPoly {
                self.$m(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, try_add);
poly_binop!(Sub, sub, try_sub);
poly_binop!(Mul, mul, try_mul);

impl Neg for &SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        self.scale(&-Q::one())
    }
}

impl Neg for SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::super::VarSpec;
    use super::*;

    fn ctx() -> Ctx {
        Context::new(vec![
            VarSpec::even("x"),
            VarSpec::odd("xi1"),
            VarSpec::odd("xi2"),
            VarSpec::even("a").with_cap(3),
        ])
        .unwrap()
    }

    fn v(c: &Ctx, n: &str) -> SuperPoly {
        SuperPoly::named(c, n).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let c = ctx();
        let (s, m) = normalize_monomial(&c, &[("xi2", 1), ("xi1", 1)]).unwrap();
        assert_eq!(s, -1);
        assert_eq!(SuperPoly::monomial_string(&c, &m.unwrap()), "xi1*xi2");
        assert_eq!(normalize_monomial(&c, &[("xi1", 1), ("xi1", 1)]).unwrap().0, 0);
        let (s, m) =
            normalize_monomial(&c, &[("x", 1), ("xi2", 1), ("xi1", 1), ("x", 1)]).unwrap();
        assert_eq!(s, -1);
        assert_eq!(SuperPoly::monomial_string(&c, &m.unwrap()), "x^2*xi1*xi2");
        assert!(normalize_monomial(&c, &[("y", 1)]).is_err());
    }

    #[test]
    fn mul_examples() {
        let c = ctx();
        let (x, x1, x2, a) = (v(&c, "x"), v(&c, "xi1"), v(&c, "xi2"), v(&c, "a"));
        assert_eq!((&x1 * &x2).to_string(), "xi1*xi2");
        assert_eq!((&x2 * &x1).to_string(), "-xi1*xi2");
        let s = &x + &(&x1 * &x2);
        assert_eq!((&s * &s).to_string(), "x^2 + 2*x*xi1*xi2");
        assert!((&(&a * &a) * &a).is_zero());
        assert_eq!(a.pow(2).to_string(), "a^2");
    }

    #[test]
    fn display_and_parity() {
        let c = ctx();
        let p = &v(&c, "x").scale(&Q::new(-1, 2)) + &SuperPoly::constant(&c, Q::from_int(3));
        assert_eq!(p.to_string(), "3 - 1/2*x");
        assert_eq!(p.parity(), Some(Parity::Even));
        assert_eq!((&p + &v(&c, "xi1")).parity(), None);
        assert_eq!(SuperPoly::zero(&c).to_string(), "0");
    }

    #[test]
    fn coeff_left_signs() {
        let c = ctx();
        // x*xi1*xi2 = xi2 * (-x*xi1)
        let p = SuperPoly::product(&c, &[("x", 1), ("xi1", 1), ("xi2", 1)]).unwrap();
        let u = Monomial::var(c.len(), c.index_of("xi2").unwrap());
        let r = p.coeff_left(&u, &[c.index_of("xi2").unwrap()]);
        assert_eq!(r.to_string(), "-x*xi1");
        assert_eq!(&v(&c, "xi2") * &r, p);
    }

    #[test]
    fn embed_reorders_odd() {
        let c = ctx();
        let d = Context::new(vec![VarSpec::odd("xi2"), VarSpec::odd("xi1")]).unwrap();
        let p = SuperPoly::product(&c, &[("xi1", 1), ("xi2", 1)]).unwrap();
        let q = p.embed(&d).unwrap();
        assert_eq!(q.to_string(), "-xi2*xi1");
    }

    #[test]
    fn mismatched_contexts() {
        let c = ctx();
        let d = Context::new(vec![VarSpec::even("y")]).unwrap();
        assert_eq!(
            v(&c, "x").try_mul(&v(&d, "y")),
            Err(AlgError::ContextMismatch)
        );
    }
}
