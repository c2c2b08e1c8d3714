use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{mode_name, LoopError, LoopFunction, LoopPoint, LoopSpace, NilLaurent};
use crate::check::Check;
use crate::forms::FormContext;
use crate::rational::Q;
use crate::superalg::{Derivation, Monomial, Parity, SuperPoly, VarSpec};

/// Name of the invertible loop-rotation parameter.
pub const LAMBDA: &str = "lambda";

/// A pole location `α + βλ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub constant: Q,
    pub lambda: Q,
}

impl Location {
    pub fn new(constant: Q, lambda: Q) -> Self {
        Location { constant, lambda }
    }

    pub fn origin() -> Self {
        Location::new(Q::zero(), Q::zero())
    }

    /// `β·λ`.
    pub fn lambda(beta: i64) -> Self {
        Location::new(Q::zero(), Q::from_int(beta))
    }

    fn minus(&self, other: &Location) -> Location {
        Location::new(&self.constant - &other.constant, &self.lambda - &other.lambda)
    }

    fn to_poly(&self, space: &LoopSpace) -> Result<SuperPoly, LoopError> {
        let l = space.var(LAMBDA)?;
        Ok(&SuperPoly::constant(space.ctx(), self.constant.clone()) + &l.scale(&self.lambda))
    }

    /// `1/(α + βλ)` when one of `α`, `β` vanishes.
    fn inverse(&self, space: &LoopSpace) -> Result<SuperPoly, LoopError> {
        match (self.constant.is_zero(), self.lambda.is_zero()) {
            (true, true) => Err(LoopError::PoleCollision(self.to_string())),
            (false, true) => Ok(SuperPoly::constant(space.ctx(), self.constant.inv().unwrap())),
            (true, false) => {
                let ctx = space.ctx();
                let mut e = vec![0; ctx.len()];
                e[ctx.index_of(LAMBDA)?] = -1;
                Ok(SuperPoly::term(
                    ctx,
                    Monomial::from_exponents(e),
                    self.lambda.inv().unwrap(),
                ))
            }
            (false, false) => Err(LoopError::Separation(format!(
                "{self} is not a unit of Q[lambda, lambda^-1]"
            ))),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lam = if self.lambda.is_zero() {
            None
        } else if self.lambda.is_one() {
            Some(LAMBDA.to_string())
        } else if (-&self.lambda).is_one() {
            Some(format!("-{LAMBDA}"))
        } else {
            Some(format!("{}*{LAMBDA}", self.lambda))
        };
        match (self.constant.is_zero(), lam) {
            (_, None) => write!(f, "{}", self.constant),
            (true, Some(l)) => write!(f, "{l}"),
            (false, Some(l)) if l.starts_with('-') => write!(f, "{} - {}", self.constant, &l[1..]),
            (false, Some(l)) => write!(f, "{} + {l}", self.constant),
        }
    }
}

impl Serialize for Location {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The term `r / (σ(t − ℓ))`; its local coordinate is `s = σ(t − ℓ)`.
#[derive(Clone, Debug, Serialize)]
pub struct Pole {
    pub location: Location,
    pub orientation: i8,
    pub residues: Vec<SuperPoly>,
}

/// A rational loop `Σ_p r_p/(σ_p(t − ℓ_p)) + P(t)` over `ℚ[λ, λ⁻¹]` and
/// nilpotent parameters.
#[derive(Clone, Debug)]
pub struct PoleFamily {
    x: FormContext,
    space: Arc<LoopSpace>,
    poles: Vec<Pole>,
    /// `tail[i][n]`: coefficient of `tⁿ` in the regular part of coordinate `i`.
    tail: Vec<Vec<SuperPoly>>,
}

#[derive(Serialize)]
struct FamilyOut<'a> {
    coordinates: Vec<String>,
    poles: &'a [Pole],
    tail: &'a [Vec<SuperPoly>],
}

impl Serialize for PoleFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FamilyOut {
            coordinates: self
                .x
                .base()
                .iter()
                .map(|&b| self.x.ctx().var(b).name.clone())
                .collect(),
            poles: &self.poles,
            tail: &self.tail,
        }
        .serialize(s)
    }
}

impl PoleFamily {
    /// `space` must contain the invertible constant `lambda`.
    pub fn new(
        x: &FormContext,
        space: &Arc<LoopSpace>,
        poles: Vec<Pole>,
        tail: Vec<Vec<SuperPoly>>,
    ) -> Result<Self, LoopError> {
        let n = x.base().len();
        let lam = space.ctx().index_of(LAMBDA)?;
        if !space.ctx().var(lam).invertible {
            return Err(LoopError::Unsupported(format!("`{LAMBDA}` must be invertible")));
        }
        if tail.len() != n {
            return Err(LoopError::Shape(format!("tail needs {n} coordinates")));
        }
        for (a, p) in poles.iter().enumerate() {
            if p.residues.len() != n {
                return Err(LoopError::Shape(format!("pole {a} needs {n} residues")));
            }
            if p.orientation != 1 && p.orientation != -1 {
                return Err(LoopError::Shape("orientation must be 1 or -1".into()));
            }
            for (i, r) in p.residues.iter().enumerate() {
                let par = x.ctx().var(x.base()[i]).parity;
                if !r.is_zero() && r.parity() != Some(par) {
                    return Err(LoopError::Alg(crate::superalg::AlgError::Parity(format!(
                        "residue {i} of pole {a} must be {par}"
                    ))));
                }
                if !space.is_nilpotent(r) {
                    return Err(LoopError::NotNilpotent(format!("residue {i} of pole {a}: {r}")));
                }
            }
            for q in &poles[..a] {
                let sep = p.location.minus(&q.location);
                if sep.constant.is_zero() && sep.lambda.is_zero() {
                    return Err(LoopError::PoleCollision(p.location.to_string()));
                }
                sep.inverse(space)?;
            }
        }
        Ok(PoleFamily {
            x: x.clone(),
            space: space.clone(),
            poles,
            tail,
        })
    }

    pub fn x(&self) -> &FormContext {
        &self.x
    }

    pub fn space(&self) -> &Arc<LoopSpace> {
        &self.space
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    /// Laurent expansion at pole `p` in its local coordinate, exact up to `s^k`.
    pub fn expand(&self, p: usize, k: i32) -> Result<LoopPoint, LoopError> {
        let space = &self.space;
        let ctx = space.ctx();
        let here = &self.poles[p];
        let sigma = Q::from_int(here.orientation as i64);
        let mut coords = Vec::new();
        for i in 0..self.x.base().len() {
            let mut terms: Vec<(i32, SuperPoly)> = vec![(-1, here.residues[i].clone())];
            for (q, other) in self.poles.iter().enumerate() {
                if q == p || other.residues[i].is_zero() {
                    continue;
                }
                // r/(σ_q(Δ + σ_p s)) = (r/σ_q) Σ (−σ_p)ⁿ sⁿ / Δ^{n+1}
                let inv = here.location.minus(&other.location).inverse(space)?;
                let r = other.residues[i].scale(&Q::from_int(other.orientation as i64));
                let mut c = &r * &inv;
                let step = inv.scale(&-&sigma);
                for n in 0..=k.max(-1) {
                    terms.push((n, c.clone()));
                    c = &c * &step;
                }
            }
            // P(ℓ + σs) by the binomial theorem.
            let l = here.location.to_poly(space)?;
            for (m, cm) in self.tail[i].iter().enumerate() {
                if cm.is_zero() {
                    continue;
                }
                let mut binom = Q::one();
                for r in 0..=m {
                    if r as i32 > k {
                        break;
                    }
                    let coeff = (cm * &l.pow((m - r) as u32))
                        .scale(&(&binom * &sigma.pow(r as i32)));
                    terms.push((r as i32, coeff));
                    binom = &binom * &Q::new((m - r) as i64, (r + 1) as i64);
                }
            }
            coords.push(NilLaurent::from_terms(ctx, terms, Some(k))?);
        }
        LoopPoint::new(&self.x, space, coords)
    }
}

/// `expand_rational_loop`: the expansion of `family` at pole `p` to order `k`.
pub fn expand_rational_loop(family: &PoleFamily, p: usize, k: i32) -> Result<LoopPoint, LoopError> {
    family.expand(p, k)
}

/// Parameter names of the standard families.
pub fn residue_name(group: &str, coord: &str) -> String {
    format!("{group}_{coord}")
}

/// `o + a/t + b/(λ−t)` (`groups = ["a", "b"]`) or
/// `o + a/t + b/(λ−t) + c/(λ+t)` (`groups = ["a", "b", "c"]`), with base
/// point `o` named by the coordinates and even residues capped at `cap`.
pub fn standard_family(x: &FormContext, groups: usize, cap: u32) -> Result<PoleFamily, LoopError> {
    let names = ["a", "b", "c"];
    if !(1..=3).contains(&groups) {
        return Err(LoopError::Shape("standard families have 1 to 3 poles".into()));
    }
    let coords: Vec<VarSpec> = x.base().iter().map(|&b| x.ctx().var(b).clone()).collect();
    let mut params = coords.clone();
    for g in &names[..groups] {
        for v in &coords {
            let mut s = VarSpec::new(residue_name(g, &v.name), v.parity);
            if v.parity == Parity::Even {
                s = s.with_cap(cap);
            }
            params.push(s);
        }
    }
    let space = LoopSpace::new(params, vec![VarSpec::even(LAMBDA).invertible()])?;
    let locs = [
        (Location::origin(), 1),
        (Location::lambda(1), -1),
        (Location::lambda(-1), 1),
    ];
    let mut poles = Vec::new();
    for (g, (loc, sigma)) in names[..groups].iter().zip(locs) {
        let residues = coords
            .iter()
            .map(|v| space.var(&residue_name(g, &v.name)))
            .collect::<Result<Vec<_>, _>>()?;
        poles.push(Pole {
            location: loc,
            orientation: sigma,
            residues,
        });
    }
    let tail = coords
        .iter()
        .map(|v| Ok(vec![space.var(&v.name)?]))
        .collect::<Result<Vec<_>, LoopError>>()?;
    PoleFamily::new(x, &space, poles, tail)
}

#[derive(Clone, Debug, Serialize)]
pub struct AdditivityReport {
    pub precision: i32,
    pub per_pole: Vec<SuperPoly>,
    pub total: SuperPoly,
    /// Coefficient of `λᵏ` in the total, for every `k` that occurs.
    pub lambda_expansion: BTreeMap<i32, SuperPoly>,
    pub regular: bool,
}

impl AdditivityReport {
    pub fn coefficient(&self, k: i32) -> SuperPoly {
        self.lambda_expansion
            .get(&k)
            .cloned()
            .unwrap_or_else(|| SuperPoly::zero(self.total.ctx()))
    }

    pub fn check(&self) -> Check {
        let neg: Vec<i32> = self
            .lambda_expansion
            .keys()
            .copied()
            .filter(|&k| k < 0)
            .collect();
        Check::new(
            "value is regular at lambda = 0",
            self.regular,
            if self.regular {
                format!("lambda exponents {:?}", self.lambda_expansion.keys().collect::<Vec<_>>())
            } else {
                format!("negative lambda exponents {neg:?}")
            },
        )
    }
}

/// Sums `f` over the expansions at every pole and splits the total by
/// powers of `λ`. With `precision = None` the expansion order starts at
/// `f.precision(1)` and grows until every residue is exact.
pub fn additivity_check(
    f: &LoopFunction,
    family: &PoleFamily,
    precision: Option<i32>,
) -> Result<AdditivityReport, LoopError> {
    let eval_all = |k: i32| -> Result<Vec<SuperPoly>, LoopError> {
        (0..family.poles.len())
            .map(|p| f.eval(&family.expand(p, k)?))
            .collect()
    };
    let (k, per_pole) = match precision {
        Some(k) => (k, eval_all(k)?),
        None => {
            let mut k = f.precision(1);
            loop {
                match eval_all(k) {
                    Ok(v) => break (k, v),
                    Err(LoopError::Window(_)) if k < f.precision(1) + 16 => k += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    };
    let ctx = family.space.ctx();
    let mut total = SuperPoly::zero(ctx);
    for v in &per_pole {
        total = &total + v;
    }
    let lambda_expansion = lambda_expansion(&family.space, &total)?;
    let regular = lambda_expansion.keys().all(|&e| e >= 0);
    Ok(AdditivityReport {
        precision: k,
        per_pole,
        total,
        lambda_expansion,
        regular,
    })
}

/// Splits `p` by powers of `λ`; each coefficient is free of `λ`.
pub fn lambda_expansion(
    space: &LoopSpace,
    p: &SuperPoly,
) -> Result<BTreeMap<i32, SuperPoly>, LoopError> {
    let ctx = space.ctx();
    let l = ctx.index_of(LAMBDA)?;
    let mut out: BTreeMap<i32, SuperPoly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let mut e = m.exponents().to_vec();
        let k = e[l];
        e[l] = 0;
        let slot = out.entry(k).or_insert_with(|| SuperPoly::zero(ctx));
        *slot = &*slot + &SuperPoly::term(ctx, Monomial::from_exponents(e), c.clone());
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

fn even_only(x: &FormContext) -> Result<(), LoopError> {
    if x.base().iter().any(|&b| x.ctx().var(b).parity.is_odd()) {
        return Err(LoopError::Unsupported(
            "the cyclic-sum and omega-psi formulas are checked on even coordinates".into(),
        ));
    }
    Ok(())
}

/// Coefficient of the monomial `Π names` in `p`, as a polynomial in the
/// remaining generators.
fn coefficient_in(space: &LoopSpace, p: &SuperPoly, names: &[String], over: &[usize]) -> Result<SuperPoly, LoopError> {
    let ctx = space.ctx();
    let mut e = vec![0; ctx.len()];
    for n in names {
        e[ctx.index_of(n)?] += 1;
    }
    Ok(p.coeff_left(&Monomial::from_exponents(e), over))
}

fn residue_positions(space: &LoopSpace, x: &FormContext, groups: &[&str]) -> Result<Vec<usize>, LoopError> {
    let mut out = Vec::new();
    for g in groups {
        for &b in x.base() {
            out.push(space.ctx().index_of(&residue_name(g, &x.ctx().var(b).name))?);
        }
    }
    Ok(out)
}

/// `∂ω_ij/∂x_k` embedded in the family's coefficient ring.
fn d_omega(
    space: &LoopSpace,
    omega: &[Vec<SuperPoly>],
    i: usize,
    j: usize,
    k: usize,
) -> Result<SuperPoly, LoopError> {
    let w = &omega[i][j];
    let der = Derivation::partial(w.ctx(), k);
    Ok(der.apply(w).embed(space.ctx())?)
}

/// The three-pole `λ⁻³` coefficient of `a_I b_J c_K`, identically in the
/// base point, against the pole sum
/// `∂_K ω_IJ − ∂_J ω_IK + ¼∂_I ω_JK + ½∂_K ω_JI − ¼∂_I ω_KJ − ½∂_J ω_KI`.
/// For skew `ω` this is `½(∂_K ω_IJ − ∂_J ω_IK + ∂_I ω_JK)`, the cyclic sum
/// whose vanishing is closedness; that comparison is added when `ω` is skew.
pub fn cyclic_sum_check(
    f: &LoopFunction,
    omega: &[Vec<SuperPoly>],
    cap: u32,
) -> Result<Vec<Check>, LoopError> {
    let x = f.x();
    even_only(x)?;
    let fam = standard_family(x, 3, cap)?;
    let rep = additivity_check(f, &fam, None)?;
    let c3 = rep.coefficient(-3);
    let space = fam.space();
    let over = residue_positions(space, x, &["a", "b", "c"])?;
    let names: Vec<String> = x.base().iter().map(|&b| x.ctx().var(b).name.clone()).collect();
    let n = names.len();
    let skew = (0..n).all(|i| (0..n).all(|j| (&omega[i][j] + &omega[j][i]).is_zero()));
    let q = |a: i64, b: i64| Q::new(a, b);
    let mut general = Vec::new();
    let mut cyclic = Vec::new();
    let mut nonzero = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let got = coefficient_in(
                    space,
                    &c3,
                    &[
                        residue_name("a", &names[i]),
                        residue_name("b", &names[j]),
                        residue_name("c", &names[k]),
                    ],
                    &over,
                )?;
                let dw = |a, b, c| d_omega(space, omega, a, b, c);
                let mut want = SuperPoly::zero(space.ctx());
                for (t, w) in [
                    (dw(i, j, k)?, q(1, 1)),
                    (dw(i, k, j)?, q(-1, 1)),
                    (dw(j, k, i)?, q(1, 4)),
                    (dw(j, i, k)?, q(1, 2)),
                    (dw(k, j, i)?, q(-1, 4)),
                    (dw(k, i, j)?, q(-1, 2)),
                ] {
                    want = &want + &t.scale(&w);
                }
                if got != want {
                    general.push(format!("({i},{j},{k}): {got} vs {want}"));
                }
                let cyc = (&(&dw(i, j, k)? - &dw(i, k, j)?) + &dw(j, k, i)?).scale(&q(1, 2));
                if !cyc.is_zero() {
                    nonzero += 1;
                }
                if got != cyc {
                    cyclic.push(format!("({i},{j},{k}): {got} vs {cyc}"));
                }
            }
        }
    }
    let mut out = vec![Check::new(
        "three-pole lambda^-3 coefficients match the pole sum",
        general.is_empty(),
        if general.is_empty() {
            format!("{} triples", n * n * n)
        } else {
            general.join("; ")
        },
    )];
    if skew {
        out.push(Check::new(
            "three-pole lambda^-3 coefficients equal half the cyclic sum",
            cyclic.is_empty(),
            if cyclic.is_empty() {
                format!("{nonzero} nonzero cyclic sums")
            } else {
                cyclic.join("; ")
            },
        ));
    }
    Ok(out)
}

/// The two-pole `λ⁻³` coefficient of `a_i b_j b_k` (`j ≤ k`) against
/// `∂_k ω_ij + ∂_j ω_ik + ψ_jki` for `j < k` and `∂_j ω_ij + ψ_jji` for
/// `j = k`. Returns the reproduction check and, for additive `f`, the
/// vanishing of the relation.
pub fn omega_psi_check(
    f: &LoopFunction,
    omega: &[Vec<SuperPoly>],
    psi: &BTreeMap<(usize, usize, usize), SuperPoly>,
    cap: u32,
) -> Result<(Check, Check), LoopError> {
    let x = f.x();
    even_only(x)?;
    let fam = standard_family(x, 2, cap)?;
    let rep = additivity_check(f, &fam, None)?;
    let c3 = rep.coefficient(-3);
    let space = fam.space();
    let over = residue_positions(space, x, &["a", "b"])?;
    let names: Vec<String> = x.base().iter().map(|&b| x.ctx().var(b).name.clone()).collect();
    let n = names.len();
    let mut mismatches = Vec::new();
    let mut relation_fails = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let got = coefficient_in(
                    space,
                    &c3,
                    &[
                        residue_name("a", &names[i]),
                        residue_name("b", &names[j]),
                        residue_name("b", &names[k]),
                    ],
                    &over,
                )?;
                let mut want = d_omega(space, omega, i, j, k)?;
                if j < k {
                    want = &want + &d_omega(space, omega, i, k, j)?;
                }
                if let Some(p) = psi.get(&(j, k, i)) {
                    want = &want + &p.embed(space.ctx())?;
                }
                if got != want {
                    mismatches.push(format!("({i},{j},{k}): {got} vs {want}"));
                }
                if !want.is_zero() {
                    relation_fails.push(format!("({i},{j},{k}): {want}"));
                }
            }
        }
    }
    Ok((
        Check::new(
            "two-pole lambda^-3 coefficients match omega and psi",
            mismatches.is_empty(),
            mismatches.join("; "),
        ),
        Check::new(
            "omega-psi relation holds",
            relation_fails.is_empty(),
            relation_fails.join("; "),
        ),
    ))
}

/// `x₀ + Σ_{n≥1} x_n tⁿ + Σ_{p=1}^{M} x_{−p}/(t(t+λ)…(t+(p−1)λ))` as a family
/// with simple poles at `0, −λ, …, −(M−1)λ`, and the loop with a pole of
/// order `M` it specializes to at `λ = 0`.
#[derive(Clone, Debug)]
pub struct DegenerateFamily {
    pub family: PoleFamily,
    pub original: LoopPoint,
}

/// Partial-fraction weight `1/Π_{m≠k, 0≤m<p}(m − k)` of `1/(t + kλ)` in
/// `λ^{p−1}/(t(t+λ)…(t+(p−1)λ))`.
pub fn partial_fraction_weight(p: usize, k: usize) -> Q {
    let mut d = Q::one();
    for m in 0..p {
        if m != k {
            d = &d * &Q::from_int(m as i64 - k as i64);
        }
    }
    d.inv().expect("distinct nodes")
}

pub fn degenerate_pole_family(
    x: &FormContext,
    order: usize,
    tail_degree: usize,
    cap: u32,
) -> Result<DegenerateFamily, LoopError> {
    if order < 2 {
        return Err(LoopError::Shape("the degenerate family needs M >= 2".into()));
    }
    let coords: Vec<VarSpec> = x.base().iter().map(|&b| x.ctx().var(b).clone()).collect();
    let mut params = coords.clone();
    for v in &coords {
        for p in 1..=order {
            let mut s = VarSpec::new(mode_name(&v.name, -(p as i32)), v.parity);
            if v.parity == Parity::Even {
                s = s.with_cap(cap);
            }
            params.push(s);
        }
        for n in 1..=tail_degree {
            params.push(VarSpec::new(mode_name(&v.name, n as i32), v.parity));
        }
    }
    let space = LoopSpace::new(params, vec![VarSpec::even(LAMBDA).invertible()])?;
    let ctx = space.ctx().clone();
    let lam_inv = Location::lambda(1).inverse(&space)?;
    let mut poles = Vec::new();
    for k in 0..order {
        let mut residues = Vec::new();
        for v in &coords {
            let mut r = SuperPoly::zero(&ctx);
            for p in (k + 1).max(1)..=order {
                let w = lam_inv
                    .pow((p - 1) as u32)
                    .scale(&partial_fraction_weight(p, k));
                r = &r + &(&space.var(&mode_name(&v.name, -(p as i32)))? * &w);
            }
            residues.push(r);
        }
        poles.push(Pole {
            location: Location::lambda(-(k as i64)),
            orientation: 1,
            residues,
        });
    }
    let mut tail = Vec::new();
    let mut original = Vec::new();
    for v in &coords {
        let mut t = vec![space.var(&v.name)?];
        let mut terms = vec![(0, space.var(&v.name)?)];
        for n in 1..=tail_degree {
            let c = space.var(&mode_name(&v.name, n as i32))?;
            t.push(c.clone());
            terms.push((n as i32, c));
        }
        for p in 1..=order {
            terms.push((-(p as i32), space.var(&mode_name(&v.name, -(p as i32)))?));
        }
        tail.push(t);
        original.push(NilLaurent::from_terms(&ctx, terms, None)?);
    }
    let family = PoleFamily::new(x, &space, poles, tail)?;
    let original = LoopPoint::new(x, &space, original)?;
    Ok(DegenerateFamily { family, original })
}

/// The family value is a polynomial in `λ` whose constant term is the value
/// on the higher-order-pole loop.
pub fn degenerate_check(f: &LoopFunction, fam: &DegenerateFamily) -> Result<Vec<Check>, LoopError> {
    let rep = additivity_check(f, &fam.family, None)?;
    let direct = f.eval(&fam.original)?;
    let at_zero = rep.coefficient(0);
    Ok(vec![
        rep.check(),
        Check::new(
            "lambda = 0 specialization equals the value on the original loop",
            at_zero == direct,
            format!("{direct}"),
        ),
    ])
}
