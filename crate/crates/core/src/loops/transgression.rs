use std::sync::Arc;

use super::{LoopContext, LoopError, LoopPoint, LoopSpace, NilLaurent};
use crate::check::Check;
use crate::forms::{DifferentialForm, FormContext, FormError};
use crate::superalg::{Context, Monomial, SuperPoly};

/// The frozen sign `s` in `τ(dη) = s·d(τη)`.
///
/// `dx ↦ dt·ẋ + Σ tⁿ d(x_n)` makes the pullback commute with `d`, and `dt`
/// is stripped from the right after moving it there, so `s = +1`.
pub const CHAIN_MAP_SIGN: i32 = 1;

/// Pullback of a form to `(loop parameters) × (punctured disk)`, split into
/// the part containing `dt` and the part without it.
#[derive(Clone, Debug)]
pub struct FormLaurent {
    space: Arc<LoopSpace>,
    pub dt_part: NilLaurent,
    pub transverse: NilLaurent,
}

impl FormLaurent {
    pub fn space(&self) -> &Arc<LoopSpace> {
        &self.space
    }
}

/// `ev*(η)`: `x_i ↦ x_i(t)` and `dx_i ↦ dt·ẋ_i(t) + Σ tⁿ d(x_{i,n})`, the total
/// differential of `x_i(t)`.
pub fn ev_pullback(
    x: &FormContext,
    eta: &DifferentialForm,
    gamma: &LoopPoint,
) -> Result<FormLaurent, LoopError> {
    let full = pullback(x, eta, gamma, true)?;
    Ok(split(gamma.space(), &full))
}

fn split(space: &Arc<LoopSpace>, s: &NilLaurent) -> FormLaurent {
    let dt = space.dt_index();
    FormLaurent {
        space: space.clone(),
        dt_part: s.map(|c| c.filter(|m| m.exp(dt) == 1)),
        transverse: s.map(|c| c.filter(|m| m.exp(dt) == 0)),
    }
}

/// The pullback as one series; with `transverse == false` the terms
/// `tⁿ d(x_{i,n})` are omitted, which leaves the `dt`-part of 1-forms intact.
fn pullback(
    x: &FormContext,
    eta: &DifferentialForm,
    gamma: &LoopPoint,
    transverse: bool,
) -> Result<NilLaurent, LoopError> {
    if !Context::same(eta.ctx(), x.ctx()) {
        return Err(LoopError::Alg(crate::superalg::AlgError::ContextMismatch));
    }
    if !x.extras().is_empty() {
        return Err(LoopError::Unsupported(
            "forms on X must not carry extra parameters".into(),
        ));
    }
    let space = gamma.space();
    let dt = space.dt();
    let xctx = x.ctx();
    let mut images: Vec<Option<NilLaurent>> = vec![None; xctx.len()];
    for (k, (&b, &tw)) in x.base().iter().zip(x.twins()).enumerate() {
        let s = gamma.coord(k);
        images[b] = Some(s.clone());
        let mut ds = s.derivative().map(|c| &dt * c);
        if transverse {
            let d = space.forms();
            let mut tr = NilLaurent::zero(space.ctx());
            for (n, c) in s.terms() {
                tr = tr.add(&NilLaurent::monomial(d.d(c), n))?;
            }
            ds = ds.add(&tr.truncated(s.valid_to()))?;
        }
        images[tw] = Some(ds);
    }
    let mut powers: Vec<Vec<NilLaurent>> = vec![Vec::new(); xctx.len()];
    let mut out = NilLaurent::zero(space.ctx());
    for (m, c) in eta.terms() {
        let mut acc = NilLaurent::constant(SuperPoly::constant(space.ctx(), c.clone()));
        for (i, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let img = images[i].as_ref().expect("every generator has an image");
            let p = &mut powers[i];
            if p.is_empty() {
                p.push(NilLaurent::constant(SuperPoly::one(space.ctx())));
            }
            while p.len() <= e as usize {
                let next = p.last().unwrap().mul(img)?;
                p.push(next);
            }
            acc = acc.mul(&p[e as usize])?;
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

/// Coefficient of `t⁻¹dt`, with `dt` removed from the right.
pub fn residue(w: &FormLaurent) -> Result<DifferentialForm, LoopError> {
    let c = w.dt_part.coeff(-1)?;
    Ok(strip_dt(&w.space, &c))
}

fn strip_dt(space: &LoopSpace, c: &SuperPoly) -> SuperPoly {
    let dt = space.dt_index();
    let ctx = space.ctx();
    let mut u = vec![0; ctx.len()];
    u[dt] = 1;
    // dt is the rightmost generator, so `rest * dt` carries no sign.
    c.coeff_right(&Monomial::from_exponents(u), &[dt])
}

/// `τ(η) = Res ∘ (dt-projection) ∘ ev*`, an `(m−1)`-form in the loop
/// parameters for an `m`-form `η`.
pub fn transgress(
    x: &FormContext,
    eta: &DifferentialForm,
    gamma: &LoopPoint,
) -> Result<DifferentialForm, LoopError> {
    let mut max_deg = 0;
    for (m, _) in eta.terms() {
        let k = x.form_degree(m);
        if k == 0 {
            return Err(LoopError::Form(FormError::DegreeZero));
        }
        max_deg = max_deg.max(k);
    }
    let full = pullback(x, eta, gamma, max_deg >= 2)?;
    let space = gamma.space();
    let dt = space.dt_index();
    let c = full.coeff(-1)?.filter(|m| m.exp(dt) == 1);
    Ok(strip_dt(space, &c))
}

/// `d⁻¹τ(ω)`: the transgression of the Euler-homotopy primitive of a
/// closed 2-form.
pub fn radon(
    x: &FormContext,
    omega: &DifferentialForm,
    gamma: &LoopPoint,
) -> Result<SuperPoly, LoopError> {
    if omega.terms().any(|(m, _)| x.form_degree(m) != 2) {
        return Err(LoopError::Unsupported("radon expects a 2-form".into()));
    }
    let eta = x.poincare_homotopy(omega)?;
    transgress(x, &eta, gamma)
}

/// Compares `τ(dη)` with `s·d(τη)` on the generic loop of `lc`.
pub fn chain_map_check(lc: &LoopContext, eta: &DifferentialForm) -> Result<Check, LoopError> {
    let x = lc.x();
    let gamma = lc.generic_point()?;
    let lhs = transgress(x, &x.d(eta), &gamma)?;
    let rhs = lc
        .space()
        .forms()
        .d(&transgress(x, eta, &gamma)?)
        .scale(&crate::Q::from_int(CHAIN_MAP_SIGN as i64));
    let ok = lhs == rhs;
    Ok(Check::new(
        format!("tau(d eta) = {CHAIN_MAP_SIGN:+} d tau(eta) for eta = {eta}"),
        ok,
        if ok {
            format!("{} terms", lhs.len())
        } else {
            format!("lhs = {lhs}; rhs = {rhs}")
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalg::VarSpec;

    fn plane() -> FormContext {
        FormContext::new(vec![VarSpec::even("x1"), VarSpec::even("x2")], vec![]).unwrap()
    }

    fn f(x: &FormContext, s: &[(&str, i32)]) -> SuperPoly {
        SuperPoly::product(x.ctx(), s).unwrap()
    }

    /// `x1 ↦ ε t⁻¹ + x1`, `x2 ↦ x2 + ε t` over `ℚ[ε]/(ε³)`.
    fn eps_loop(x: &FormContext) -> LoopPoint {
        let space = LoopSpace::new(
            vec![VarSpec::even("eps").with_cap(3), VarSpec::even("x1"), VarSpec::even("x2")],
            vec![],
        )
        .unwrap();
        let v = |n: &str| space.var(n).unwrap();
        let c1 = NilLaurent::from_terms(space.ctx(), [(-1, v("eps")), (0, v("x1"))], None).unwrap();
        let c2 = NilLaurent::from_terms(space.ctx(), [(0, v("x2")), (1, v("eps"))], None).unwrap();
        LoopPoint::new(x, &space, vec![c1, c2]).unwrap()
    }

    #[test]
    fn residue_of_power_products() {
        let x = plane();
        let g = eps_loop(&x);
        let eta = f(&x, &[("x1", 3), ("x2", 2), ("dx2", 1)]);
        let r = residue(&ev_pullback(&x, &eta, &g).unwrap()).unwrap();
        assert_eq!(r.to_string(), "3*eps^2*x1^2*x2^2");
        assert_eq!(transgress(&x, &eta, &g).unwrap(), r);
    }

    #[test]
    fn radon_paper_case() {
        let x = plane();
        let g = eps_loop(&x);
        let omega = x.d(&f(&x, &[("x1", 2), ("x2", 1), ("dx2", 1)]));
        assert_eq!(radon(&x, &omega, &g).unwrap().to_string(), "2*eps^2*x1*x2");
        let area = f(&x, &[("dx1", 1), ("dx2", 1)]);
        assert_eq!(radon(&x, &area, &g).unwrap().to_string(), "eps^2");
    }

    #[test]
    fn pullback_pieces() {
        let x = plane();
        let lc = LoopContext::new(&x, 1, 2, 2, vec![]).unwrap();
        let g = lc.generic_point().unwrap();
        let dy = f(&x, &[("dx2", 1)]);
        let w = ev_pullback(&x, &dy, &g).unwrap();
        assert_eq!(w.dt_part.coeff(0).unwrap().to_string(), "x2[1]*dt");
        assert_eq!(w.transverse.coeff(1).unwrap().to_string(), "dx2[1]");
        let xdy = f(&x, &[("x1", 1), ("dx2", 1)]);
        let t = transgress(&x, &xdy, &g).unwrap();
        assert!(t.to_string().contains("x1[-1]*x2[1]"), "{t}");
    }

    #[test]
    fn exact_forms_and_arcs() {
        let x = plane();
        let lc = LoopContext::new(&x, 1, 4, 3, vec![]).unwrap();
        let g = lc.generic_point().unwrap();
        let dg = x.d(&f(&x, &[("x1", 2), ("x2", 1)]));
        assert!(transgress(&x, &dg, &g).unwrap().is_zero());
        let arcs = LoopContext::new(&x, 0, 3, 2, vec![]).unwrap();
        let eta = f(&x, &[("x1", 1), ("dx2", 1)]);
        assert!(transgress(&x, &eta, &arcs.generic_point().unwrap())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn chain_map_small() {
        let x = plane();
        let lc = LoopContext::new(&x, 1, 4, 2, vec![]).unwrap();
        let eta = f(&x, &[("x1", 2), ("dx2", 1)]);
        let c = chain_map_check(&lc, &eta).unwrap();
        assert!(c.passed, "{c:?}");
    }
}
