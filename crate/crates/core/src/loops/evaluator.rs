use std::collections::BTreeMap;
use serde::Serialize;

use super::{mode_name, transgress, LoopError, LoopPoint, LoopSpace, NilLaurent};
use crate::check::Check;
use crate::forms::{DifferentialForm, FormContext};
use crate::rational::Q;
use crate::superalg::{Context, Ctx, Monomial, Parity, SuperPoly, Substitution, VarSpec};

/// A function on loops.
#[derive(Clone, Debug)]
pub enum LoopFunction {
    /// `τ(η)` for a 1-form `η` on `X`.
    Transgression { x: FormContext, eta: DifferentialForm },
    /// The truncated expansion `Σ ω_ij(x₀) x_{i,-1} x_{j,1} + Σ ψ_ijk(x₀)
    /// x_{i,-1} x_{j,-1} x_{k,2} + Σ φ_ijkl(x₀) x_{i,-1} x_{j,-1} x_{k,1} x_{l,1}`.
    Profile(TaylorProfile),
}

impl LoopFunction {
    pub fn transgression(x: &FormContext, eta: &DifferentialForm) -> Result<Self, LoopError> {
        if eta.terms().any(|(m, _)| x.form_degree(m) != 1) {
            return Err(LoopError::Unsupported(
                "a loop function is the transgression of a 1-form".into(),
            ));
        }
        Ok(LoopFunction::Transgression {
            x: x.clone(),
            eta: eta.clone(),
        })
    }

    /// `d⁻¹τ(ω)`, through the Euler-homotopy primitive.
    pub fn radon(x: &FormContext, omega: &DifferentialForm) -> Result<Self, LoopError> {
        if omega.terms().any(|(m, _)| x.form_degree(m) != 2) {
            return Err(LoopError::Unsupported("radon expects a 2-form".into()));
        }
        let eta = x.poincare_homotopy(omega)?;
        Self::transgression(x, &eta)
    }

    pub fn x(&self) -> &FormContext {
        match self {
            LoopFunction::Transgression { x, .. } => x,
            LoopFunction::Profile(p) => &p.x,
        }
    }

    /// Validity needed at poles of order `m` for an exact value.
    pub fn precision(&self, m: i32) -> i32 {
        match self {
            LoopFunction::Transgression { eta, .. } => {
                let deg = eta.terms().map(|(t, _)| t.degree()).max().unwrap_or(1);
                deg * m + 1
            }
            LoopFunction::Profile(_) => 2,
        }
    }

    pub fn eval(&self, gamma: &LoopPoint) -> Result<SuperPoly, LoopError> {
        match self {
            LoopFunction::Transgression { x, eta } => transgress(x, eta, gamma),
            LoopFunction::Profile(p) => p.eval(gamma),
        }
    }
}

/// Context of the coordinates of `X` alone.
fn coords_ctx(x: &FormContext) -> Result<Ctx, LoopError> {
    Ok(Context::new(
        x.base().iter().map(|&b| x.ctx().var(b).clone()).collect(),
    )?)
}

fn coord_specs(x: &FormContext) -> Vec<VarSpec> {
    x.base().iter().map(|&b| x.ctx().var(b).clone()).collect()
}

/// `c` with `F|_{pattern} = c · (g_1 g_2 …)`, the factors taken in the given
/// order; the pattern is read on the generators `over`.
fn coefficient_of(f: &SuperPoly, factors: &[usize], over: &[usize]) -> SuperPoly {
    let ctx = f.ctx();
    let mut p = SuperPoly::one(ctx);
    for &g in factors {
        p = &p * &SuperPoly::var(ctx, g);
    }
    let Some((u, s)) = p.terms().next().map(|(m, c)| (m.clone(), c.clone())) else {
        return SuperPoly::zero(ctx);
    };
    f.coeff_right(&u, over).scale(&s)
}

/// The matrix `ω^n_ij(x)` of `f`: the `ε²`-coefficient of
/// `f[x + ε v t^{−n} + ε w tⁿ]` is `Σ ω^n_ij(x) v_i w_j`.
pub fn hessian_matrix(f: &LoopFunction, n: i32) -> Result<Vec<Vec<SuperPoly>>, LoopError> {
    if n == 0 {
        return Err(LoopError::Unsupported("the Hessian pairing needs n != 0".into()));
    }
    let x = f.x();
    let coords = coord_specs(x);
    let mut params = coords.clone();
    params.push(VarSpec::even("eps").with_cap(3));
    for v in &coords {
        params.push(VarSpec::new(format!("v_{}", v.name), v.parity));
        params.push(VarSpec::new(format!("w_{}", v.name), v.parity));
    }
    let space = LoopSpace::new(params, vec![])?;
    let ctx = space.ctx().clone();
    let eps = space.var("eps")?;
    let mut series = Vec::new();
    for v in &coords {
        let a = &eps * &space.var(&format!("v_{}", v.name))?;
        let b = &eps * &space.var(&format!("w_{}", v.name))?;
        series.push(NilLaurent::from_terms(
            &ctx,
            [(0, space.var(&v.name)?), (-n, a), (n, b)],
            None,
        )?);
    }
    let gamma = LoopPoint::new(x, &space, series)?;
    let value = f.eval(&gamma)?;
    let e = ctx.index_of("eps")?;
    let mut sq = vec![0; ctx.len()];
    sq[e] = 2;
    let second = value.coeff_left(&Monomial::from_exponents(sq), &[e]);
    let vw: Vec<usize> = coords
        .iter()
        .flat_map(|v| [format!("v_{}", v.name), format!("w_{}", v.name)])
        .map(|s| ctx.index_of(&s).unwrap())
        .collect();
    let target = coords_ctx(x)?;
    let mut out = Vec::new();
    for i in 0..coords.len() {
        let mut row = Vec::new();
        for j in 0..coords.len() {
            let c = coefficient_of(&second, &[vw[2 * i], vw[2 * j + 1]], &vw);
            row.push(c.embed(&target)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// `ω^n_ij` at a rational point of `X` (odd coordinates are zero there).
pub fn hessian_form(
    f: &LoopFunction,
    point: &[Q],
    n: i32,
    i: usize,
    j: usize,
) -> Result<Q, LoopError> {
    let m = hessian_matrix(f, n)?;
    let entry = m
        .get(i)
        .and_then(|r| r.get(j))
        .ok_or_else(|| LoopError::Shape(format!("no coordinate pair ({i}, {j})")))?;
    evaluate_at(entry, point)
}

/// Value of a polynomial in the coordinates at a rational point.
pub fn evaluate_at(p: &SuperPoly, point: &[Q]) -> Result<Q, LoopError> {
    let ctx = p.ctx();
    if point.len() != ctx.len() {
        return Err(LoopError::Shape(format!(
            "point has {} entries, expected {}",
            point.len(),
            ctx.len()
        )));
    }
    let scalars = Context::new(vec![])?;
    let mut images = Vec::new();
    for (v, q) in ctx.vars().iter().zip(point) {
        if v.parity.is_odd() && !q.is_zero() {
            return Err(LoopError::Shape(format!("odd coordinate `{}` must be 0", v.name)));
        }
        images.push((v.name.as_str(), SuperPoly::constant(&scalars, q.clone())));
    }
    let sub = Substitution::new(ctx, &scalars, images)?;
    Ok(sub.apply(p)?.constant_term())
}

/// The 2-form `Σ_{i<j} (−1)^{|x_j|} dx_i ω_ij dx_j + ½ Σ_i (−1)^{|x_i|} dx_i ω_ii dx_i`
/// of a Hessian matrix.
pub fn tangential_form(
    x: &FormContext,
    omega: &[Vec<SuperPoly>],
) -> Result<DifferentialForm, LoopError> {
    let ctx = x.ctx();
    let mut out = SuperPoly::zero(ctx);
    for (i, row) in omega.iter().enumerate() {
        for (j, w) in row.iter().enumerate().skip(i) {
            let c = w.embed(ctx)?;
            let dxi = SuperPoly::var(ctx, x.twins()[i]);
            let dxj = SuperPoly::var(ctx, x.twins()[j]);
            let mut term = &(&dxi * &c) * &dxj;
            let mut k = Q::one();
            if ctx.var(x.base()[j]).parity.is_odd() {
                k = -k;
            }
            if i == j {
                k = k * Q::new(1, 2);
            }
            term = term.scale(&k);
            out = &out + &term;
        }
    }
    Ok(out)
}

/// `ω_ij + (−1)^{|x_i||x_j|} ω_ji = 0` for all pairs.
pub fn skew_symmetry_check(x: &FormContext, omega: &[Vec<SuperPoly>]) -> Check {
    let mut bad = Vec::new();
    for i in 0..omega.len() {
        for j in 0..omega.len() {
            let pi = x.ctx().var(x.base()[i]).parity;
            let pj = x.ctx().var(x.base()[j]).parity;
            let sum = if pi.koszul(pj) {
                &omega[i][j] - &omega[j][i]
            } else {
                &omega[i][j] + &omega[j][i]
            };
            if !sum.is_zero() {
                bad.push((i, j));
            }
        }
    }
    Check::new(
        "super skew-symmetry of the Hessian",
        bad.is_empty(),
        if bad.is_empty() {
            String::new()
        } else {
            format!("fails at {bad:?}")
        },
    )
}

/// `D∘d⁻¹τ = id` on a closed 2-form, with the skew-symmetry of the Hessian.
pub fn round_trip_check(x: &FormContext, omega: &DifferentialForm) -> Result<Vec<Check>, LoopError> {
    let f = LoopFunction::radon(x, omega)?;
    let h = hessian_matrix(&f, 1)?;
    let back = tangential_form(x, &h)?;
    Ok(vec![
        Check::new(
            format!("D(radon({omega})) = {omega}"),
            &back == omega,
            format!("recovered {back}"),
        ),
        skew_symmetry_check(x, &h),
    ])
}

/// `ω^{±n} = n·ω^{±1}`, identically in the coordinates.
pub fn psi_n_scaling_check(f: &LoopFunction, n: i32) -> Result<Vec<Check>, LoopError> {
    if n < 1 {
        return Err(LoopError::Unsupported("scaling needs n >= 1".into()));
    }
    let mut checks = Vec::new();
    for sign in [1, -1] {
        let base = hessian_matrix(f, sign)?;
        let scaled = hessian_matrix(f, sign * n)?;
        let ok = base.iter().zip(&scaled).all(|(r1, rn)| {
            r1.iter()
                .zip(rn)
                .all(|(a, b)| a.scale(&Q::from_int(n as i64)) == *b)
        });
        let label = if sign > 0 { "" } else { "-" };
        checks.push(Check::new(
            format!("omega^{label}{n} = {n} omega^{label}1"),
            ok,
            format!("omega^{label}1 = {}", matrix_string(&base)),
        ));
    }
    Ok(checks)
}

fn matrix_string(m: &[Vec<SuperPoly>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|c| c.to_string()).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Coefficients of an additive function's expansion along the generic loop
/// `x_{-1}t⁻¹ + x₀ + x₁t + x₂t²`.
#[derive(Clone, Debug)]
pub struct TaylorProfile {
    x: FormContext,
    pub omega: Vec<Vec<SuperPoly>>,
    /// Keyed by `(i, j, k)` with `i ≤ j`.
    pub psi: BTreeMap<(usize, usize, usize), SuperPoly>,
    /// Keyed by `(i, j, k, l)` with `i ≤ j`, `k ≤ l`.
    pub phi: BTreeMap<(usize, usize, usize, usize), SuperPoly>,
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
struct ProfileOut {
    omega: Vec<Vec<String>>,
    psi: Vec<(Vec<usize>, String)>,
    phi: Vec<(Vec<usize>, String)>,
    checks: Vec<Check>,
}

impl Serialize for TaylorProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ProfileOut {
            omega: self
                .omega
                .iter()
                .map(|r| r.iter().map(|c| c.to_string()).collect())
                .collect(),
            psi: self
                .psi
                .iter()
                .map(|(&(i, j, k), c)| (vec![i, j, k], c.to_string()))
                .collect(),
            phi: self
                .phi
                .iter()
                .map(|(&(i, j, k, l), c)| (vec![i, j, k, l], c.to_string()))
                .collect(),
            checks: self.checks.clone(),
        }
        .serialize(s)
    }
}

/// Profile loop: coordinates `x_i` (as `x₀`) and modes `x_i[n]`, `n ∈ {−1, 1, 2}`.
struct ProfileLoop {
    gamma: LoopPoint,
    /// `modes[i][k]`: position of `x_i[n]` for `n = −1, 1, 2`.
    modes: Vec<[usize; 3]>,
}

fn profile_loop(x: &FormContext, cap: u32) -> Result<ProfileLoop, LoopError> {
    let coords = coord_specs(x);
    let mut params = coords.clone();
    for v in &coords {
        for n in [-1, 1, 2] {
            let mut s = VarSpec::new(mode_name(&v.name, n), v.parity);
            if n < 0 && v.parity == Parity::Even {
                s = s.with_cap(cap);
            }
            params.push(s);
        }
    }
    let space = LoopSpace::new(params, vec![])?;
    let ctx = space.ctx().clone();
    let mut series = Vec::new();
    let mut modes = Vec::new();
    for v in &coords {
        let mut terms = vec![(0, space.var(&v.name)?)];
        let mut pos = [0; 3];
        for (k, n) in [-1, 1, 2].into_iter().enumerate() {
            let name = mode_name(&v.name, n);
            pos[k] = ctx.index_of(&name)?;
            terms.push((n, space.var(&name)?));
        }
        series.push(NilLaurent::from_terms(&ctx, terms, None)?);
        modes.push(pos);
    }
    let gamma = LoopPoint::new(x, &space, series)?;
    Ok(ProfileLoop {
        gamma,
        modes,
    })
}

/// Reads `ω`, `ψ`, `φ` off `f` on the generic window `[−1, 2]`, with the
/// cap `cap` on even `x_{i,−1}`.
pub fn taylor_profile(f: &LoopFunction, cap: u32) -> Result<TaylorProfile, LoopError> {
    let x = f.x().clone();
    let pl = profile_loop(&x, cap)?;
    let value = f.eval(&pl.gamma)?;
    let all_modes: Vec<usize> = pl.modes.iter().flat_map(|m| m.iter().copied()).collect();
    let weight = |m: &Monomial| -> i32 {
        pl.modes
            .iter()
            .map(|p| -m.exp(p[0]) + m.exp(p[1]) + 2 * m.exp(p[2]))
            .sum()
    };
    let off_weight = value.filter(|m| weight(m) != 0);
    let on_arcs = value.filter(|m| pl.modes.iter().all(|p| m.exp(p[0]) == 0));
    let target = coords_ctx(&x)?;
    let n = pl.modes.len();
    let coef = |factors: &[usize]| -> Result<SuperPoly, LoopError> {
        Ok(coefficient_of(&value, factors, &all_modes).embed(&target)?)
    };
    let mut omega = Vec::new();
    for i in 0..n {
        let mut row = Vec::new();
        for j in 0..n {
            row.push(coef(&[pl.modes[i][0], pl.modes[j][1]])?);
        }
        omega.push(row);
    }
    let mut psi = BTreeMap::new();
    let mut phi = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let c = coef(&[pl.modes[i][0], pl.modes[j][0], pl.modes[k][2]])?;
                if !c.is_zero() {
                    psi.insert((i, j, k), c);
                }
                for l in k..n {
                    let c = coef(&[
                        pl.modes[i][0],
                        pl.modes[j][0],
                        pl.modes[k][1],
                        pl.modes[l][1],
                    ])?;
                    if !c.is_zero() {
                        phi.insert((i, j, k, l), c);
                    }
                }
            }
        }
    }
    let checks = vec![
        Check::new(
            "expansion is quasihomogeneous of degree 0",
            off_weight.is_zero(),
            if off_weight.is_zero() {
                String::new()
            } else {
                format!("terms of nonzero weight: {off_weight}")
            },
        ),
        Check::new(
            "vanishes on arcs",
            on_arcs.is_zero(),
            if on_arcs.is_zero() {
                String::new()
            } else {
                format!("arc terms: {on_arcs}")
            },
        ),
    ];
    Ok(TaylorProfile {
        x,
        omega,
        psi,
        phi,
        checks,
    })
}

impl TaylorProfile {
    /// A profile with prescribed coefficients (polynomials in the
    /// coordinates of `x`).
    pub fn new(
        x: &FormContext,
        omega: Vec<Vec<SuperPoly>>,
        psi: BTreeMap<(usize, usize, usize), SuperPoly>,
        phi: BTreeMap<(usize, usize, usize, usize), SuperPoly>,
    ) -> Result<Self, LoopError> {
        let n = x.base().len();
        if omega.len() != n || omega.iter().any(|r| r.len() != n) {
            return Err(LoopError::Shape(format!("omega must be {n}x{n}")));
        }
        let target = coords_ctx(x)?;
        let fix = |p: &SuperPoly| p.embed(&target);
        let omega = omega
            .iter()
            .map(|r| r.iter().map(fix).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let psi = psi
            .iter()
            .map(|(k, v)| Ok((*k, fix(v)?)))
            .collect::<Result<_, LoopError>>()?;
        let phi = phi
            .iter()
            .map(|(k, v)| Ok((*k, fix(v)?)))
            .collect::<Result<_, LoopError>>()?;
        Ok(TaylorProfile {
            x: x.clone(),
            omega,
            psi,
            phi,
            checks: Vec::new(),
        })
    }

    pub fn x(&self) -> &FormContext {
        &self.x
    }

    fn eval(&self, gamma: &LoopPoint) -> Result<SuperPoly, LoopError> {
        let ctx = gamma.space().ctx();
        let n = self.omega.len();
        let mode = |i: usize, k: i32| gamma.coord(i).coeff(k);
        let source = coords_ctx(&self.x)?;
        let x0 = (0..n)
            .map(|i| Ok((source.var(i).name.clone(), mode(i, 0)?)))
            .collect::<Result<Vec<_>, LoopError>>()?;
        let at = Substitution::new(&source, ctx, x0.iter().map(|(s, p)| (s.as_str(), p.clone())))?;
        let mut out = SuperPoly::zero(ctx);
        let mut add = |c: &SuperPoly, factors: Vec<SuperPoly>| -> Result<(), LoopError> {
            if c.is_zero() {
                return Ok(());
            }
            let mut t = at.apply(c)?;
            for f in factors {
                t = &t * &f;
            }
            out = &out + &t;
            Ok(())
        };
        for i in 0..n {
            for j in 0..n {
                add(&self.omega[i][j], vec![mode(i, -1)?, mode(j, 1)?])?;
            }
        }
        for (&(i, j, k), c) in &self.psi {
            add(c, vec![mode(i, -1)?, mode(j, -1)?, mode(k, 2)?])?;
        }
        for (&(i, j, k, l), c) in &self.phi {
            add(c, vec![mode(i, -1)?, mode(j, -1)?, mode(k, 1)?, mode(l, 1)?])?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> FormContext {
        FormContext::new(vec![VarSpec::even("x1"), VarSpec::even("x2")], vec![]).unwrap()
    }

    fn f(x: &FormContext, s: &[(&str, i32)]) -> SuperPoly {
        SuperPoly::product(x.ctx(), s).unwrap()
    }

    #[test]
    fn hessian_of_area_form() {
        let x = plane();
        let r = LoopFunction::radon(&x, &f(&x, &[("dx1", 1), ("dx2", 1)])).unwrap();
        let h = hessian_matrix(&r, 1).unwrap();
        assert_eq!(h[0][1].to_string(), "1");
        assert_eq!(h[1][0].to_string(), "-1");
        assert!(h[0][0].is_zero());
        assert_eq!(hessian_form(&r, &[Q::zero(), Q::zero()], 1, 0, 1).unwrap(), Q::one());
        assert!(hessian_matrix(&r, 0).is_err());
    }

    #[test]
    fn round_trip_and_scaling() {
        let x = plane();
        let omega = f(&x, &[("x1", 1), ("x2", 2), ("dx1", 1), ("dx2", 1)]);
        for c in round_trip_check(&x, &omega).unwrap() {
            assert!(c.passed, "{c:?}");
        }
        let r = LoopFunction::radon(&x, &omega).unwrap();
        for n in 1..=3 {
            for c in psi_n_scaling_check(&r, n).unwrap() {
                assert!(c.passed, "{c:?}");
            }
        }
    }

    #[test]
    fn odd_coordinate_round_trip() {
        let x = FormContext::new(
            vec![VarSpec::even("x1"), VarSpec::even("x2"), VarSpec::odd("xi")],
            vec![],
        )
        .unwrap();
        for s in [
            vec![("dxi", 2)],
            vec![("x1", 1), ("dxi", 2)],
            vec![("dx1", 1), ("dxi", 1)],
            vec![("xi", 1), ("dx1", 1), ("dx2", 1)],
        ] {
            let omega = f(&x, &s);
            if !x.is_closed(&omega) {
                continue;
            }
            for c in round_trip_check(&x, &omega).unwrap() {
                assert!(c.passed, "{s:?}: {c:?}");
            }
        }
    }

    #[test]
    fn profile_of_area_form() {
        let x = plane();
        let r = LoopFunction::radon(&x, &f(&x, &[("dx1", 1), ("dx2", 1)])).unwrap();
        let p = taylor_profile(&r, 3).unwrap();
        assert_eq!(p.omega[0][1].to_string(), "1");
        assert!(p.psi.is_empty() && p.phi.is_empty());
        assert!(p.checks.iter().all(|c| c.passed));
        // A profile evaluator reproduces its own coefficients.
        let back = taylor_profile(&LoopFunction::Profile(p.clone()), 3).unwrap();
        assert_eq!(back.omega, p.omega);
    }
}
