use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::LoopError;
use crate::rational::Q;
use crate::superalg::{Context, Ctx, SuperPoly};

/// A truncated Laurent series `Σ c_n tⁿ` with coefficients in a context.
///
/// Coefficients of `tⁿ` for `n ≤ valid_to` are exact; above it they are
/// unknown. `valid_to = None` marks a finite series known exactly.
#[derive(Clone, PartialEq, Eq)]
pub struct NilLaurent {
    ctx: Ctx,
    coeffs: BTreeMap<i32, SuperPoly>,
    valid_to: Option<i32>,
}

impl NilLaurent {
    pub fn zero(ctx: &Ctx) -> Self {
        NilLaurent {
            ctx: ctx.clone(),
            coeffs: BTreeMap::new(),
            valid_to: None,
        }
    }

    /// `c·tⁿ`, exact.
    pub fn monomial(c: SuperPoly, n: i32) -> Self {
        let mut s = NilLaurent::zero(c.ctx());
        s.add_coeff(n, c);
        s
    }

    pub fn constant(c: SuperPoly) -> Self {
        Self::monomial(c, 0)
    }

    /// Series from `(exponent, coefficient)` pairs, truncated at `valid_to`.
    pub fn from_terms(
        ctx: &Ctx,
        terms: impl IntoIterator<Item = (i32, SuperPoly)>,
        valid_to: Option<i32>,
    ) -> Result<Self, LoopError> {
        let mut s = NilLaurent::zero(ctx);
        for (n, c) in terms {
            if !Context::same(c.ctx(), ctx) {
                return Err(LoopError::Alg(crate::superalg::AlgError::ContextMismatch));
            }
            s.add_coeff(n, c);
        }
        Ok(s.truncated(valid_to))
    }

    fn add_coeff(&mut self, n: i32, c: SuperPoly) {
        if c.is_zero() {
            return;
        }
        let slot = self
            .coeffs
            .entry(n)
            .or_insert_with(|| SuperPoly::zero(&self.ctx));
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    /// Forgets everything above `k` (no-op for `None`).
    pub fn truncated(mut self, k: Option<i32>) -> Self {
        let k = match (self.valid_to, k) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        if let Some(k) = k {
            self.coeffs.retain(|&n, _| n <= k);
        }
        self.valid_to = k;
        self
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn valid_to(&self) -> Option<i32> {
        self.valid_to
    }

    pub fn is_exact(&self) -> bool {
        self.valid_to.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.valid_to.is_none()
    }

    /// Known nonzero terms in increasing exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &SuperPoly)> {
        self.coeffs.iter().map(|(n, c)| (*n, c))
    }

    /// Lowest exponent with a known nonzero coefficient.
    pub fn lowest(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    /// Lowest exponent that may carry a nonzero coefficient; `None` for the
    /// exact zero series.
    fn support_start(&self) -> Option<i32> {
        match (self.lowest(), self.valid_to) {
            (Some(l), _) => Some(l),
            (None, Some(k)) => Some(k.saturating_add(1)),
            (None, None) => None,
        }
    }

    /// Coefficient of `tⁿ`; an error if `n` lies beyond the validity bound.
    pub fn coeff(&self, n: i32) -> Result<SuperPoly, LoopError> {
        if let Some(k) = self.valid_to {
            if n > k {
                return Err(LoopError::Window(format!(
                    "coefficient of t^{n} requested, series is valid to t^{k}"
                )));
            }
        }
        Ok(self
            .coeffs
            .get(&n)
            .cloned()
            .unwrap_or_else(|| SuperPoly::zero(&self.ctx)))
    }

    fn check(&self, other: &NilLaurent) -> Result<(), LoopError> {
        if Context::same(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(LoopError::Alg(crate::superalg::AlgError::ContextMismatch))
        }
    }

    pub fn add(&self, other: &NilLaurent) -> Result<NilLaurent, LoopError> {
        self.check(other)?;
        let mut out = self.clone();
        for (n, c) in &other.coeffs {
            out.add_coeff(*n, c.clone());
        }
        Ok(out.truncated(other.valid_to))
    }

    pub fn sub(&self, other: &NilLaurent) -> Result<NilLaurent, LoopError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> NilLaurent {
        self.map(|c| -c)
    }

    pub fn scale(&self, q: &Q) -> NilLaurent {
        self.map(|c| c.scale(q))
    }

    /// Applies `f` to every coefficient.
    pub fn map(&self, f: impl Fn(&SuperPoly) -> SuperPoly) -> NilLaurent {
        let mut out = NilLaurent::zero(&self.ctx);
        for (n, c) in &self.coeffs {
            out.add_coeff(*n, f(c));
        }
        out.valid_to = self.valid_to;
        out
    }

    /// Convolution `(ab)[m] = Σ_{i+j=m} a[i]·b[j]`. The product is exact up
    /// to `min(K_a + low_b, K_b + low_a)`.
    pub fn mul(&self, other: &NilLaurent) -> Result<NilLaurent, LoopError> {
        self.check(other)?;
        let (sa, sb) = (self.support_start(), other.support_start());
        let mut bound: Option<i32> = None;
        let mut tighten = |k: Option<i32>, low: Option<i32>| {
            if let (Some(k), Some(low)) = (k, low) {
                let b = k.saturating_add(low);
                bound = Some(bound.map_or(b, |x: i32| x.min(b)));
            }
        };
        tighten(self.valid_to, sb);
        tighten(other.valid_to, sa);
        if sa.is_none() || sb.is_none() {
            return Ok(NilLaurent::zero(&self.ctx));
        }
        let mut out = NilLaurent::zero(&self.ctx);
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let n = i + j;
                if bound.is_some_and(|k| n > k) {
                    continue;
                }
                out.add_coeff(n, a * b);
            }
        }
        Ok(out.truncated(bound))
    }

    pub fn pow(&self, e: u32) -> Result<NilLaurent, LoopError> {
        let mut acc = NilLaurent::constant(SuperPoly::one(&self.ctx));
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `d/dt`.
    pub fn derivative(&self) -> NilLaurent {
        let mut out = NilLaurent::zero(&self.ctx);
        for (n, c) in &self.coeffs {
            if *n != 0 {
                out.add_coeff(n - 1, c.scale(&Q::from_int(*n as i64)));
            }
        }
        out.valid_to = self.valid_to.map(|k| k - 1);
        out
    }
}

impl fmt::Display for NilLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let body = if c.len() > 1 {
                format!("({c})")
            } else {
                c.to_string()
            };
            match n {
                0 => write!(f, "{body}")?,
                1 => write!(f, "{body}*t")?,
                _ => write!(f, "{body}*t^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Some(k) = self.valid_to {
            write!(f, " + O(t^{})", k + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for NilLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NilLaurent({self})")
    }
}

#[derive(Serialize)]
struct TermOut {
    exp: i32,
    coeff: String,
}

impl Serialize for NilLaurent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermOut> = self
            .coeffs
            .iter()
            .map(|(n, c)| TermOut {
                exp: *n,
                coeff: c.to_string(),
            })
            .collect();
        let mut st = s.serialize_struct("NilLaurent", 2)?;
        st.serialize_field("terms", &terms)?;
        st.serialize_field("valid_to", &self.valid_to)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalg::VarSpec;

    fn ctx() -> Ctx {
        Context::new(vec![VarSpec::even("a").with_cap(2), VarSpec::even("x")]).unwrap()
    }

    fn v(c: &Ctx, n: &str) -> SuperPoly {
        SuperPoly::named(c, n).unwrap()
    }

    #[test]
    fn product_tracks_validity() {
        let c = ctx();
        let f = NilLaurent::from_terms(&c, [(-1, v(&c, "a")), (0, v(&c, "x"))], Some(3)).unwrap();
        let g = f.mul(&f).unwrap();
        // a² = 0, so the lowest surviving term is 2ax t^{-1}.
        assert_eq!(g.lowest(), Some(-1));
        assert_eq!(g.valid_to(), Some(2));
        assert_eq!(g.coeff(-1).unwrap().to_string(), "2*a*x");
        assert!(g.coeff(3).is_err());
    }

    #[test]
    fn derivative_has_no_residue() {
        let c = ctx();
        let f = NilLaurent::from_terms(
            &c,
            [(-1, v(&c, "a")), (0, v(&c, "x")), (2, v(&c, "x"))],
            Some(4),
        )
        .unwrap();
        let df = f.derivative();
        assert!(df.coeff(-1).unwrap().is_zero());
        assert_eq!(df.coeff(-2).unwrap(), -v(&c, "a"));
        assert_eq!(df.valid_to(), Some(3));
    }

    #[test]
    fn exact_times_truncated() {
        let c = ctx();
        let exact = NilLaurent::monomial(v(&c, "x"), 2);
        let trunc = NilLaurent::from_terms(&c, [(0, SuperPoly::one(&c))], Some(1)).unwrap();
        assert_eq!(exact.mul(&trunc).unwrap().valid_to(), Some(3));
        assert!(NilLaurent::zero(&c).mul(&trunc).unwrap().is_zero());
    }
}
