//! End-to-end acceptance suite: one line per criterion, nonzero exit on any
//! failure. Each criterion also has a wall-clock budget.

mod common;

use std::collections::BTreeMap;
use std::error::Error;
use std::time::{Duration, Instant};

use rand::Rng;
use superloops::check::{all_passed, Check};
use superloops::forms::FormContext;
use superloops::loops::{
    additivity_check, chain_map_check, cyclic_sum_check, omega_psi_check, psi_n_scaling_check,
    radon, round_trip_check, standard_family, taylor_profile, LoopContext, LoopFunction,
    LoopPoint, LoopSpace, NilLaurent,
};
use superloops::superalg::{berezinian, SuperMatrix};
use superloops::weil::slice::{
    exactness_report, monomials_of_degree, truncation_cohomology_compare, BigradedSlice,
    Differential,
};
use superloops::weil::{induced_bracket_check, sl12_structure_check};
use superloops::{Context, Ctx, Parity, SuperPoly, VarSpec, Q};

use common::*;

type Outcome = Result<(bool, String), Box<dyn Error>>;

const MAX_BASIS: usize = 400_000;

fn run(id: usize, title: &str, budget: u64, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let in_time = elapsed < Duration::from_secs(budget);
    let (passed, detail) = match result {
        Ok((ok, d)) => (ok && in_time, d),
        Err(e) => (false, format!("error: {e}")),
    };
    let timing = format!("{:.2}s of {budget}s", elapsed.as_secs_f64());
    println!(
        "[{}] criterion {id:>2}: {title} ({detail}; {timing}{})",
        if passed { "PASS" } else { "FAIL" },
        if in_time { "" } else { ", over budget" }
    );
    passed
}

fn failures(checks: &[Check]) -> String {
    checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.details))
        .collect::<Vec<_>>()
        .join("; ")
}

fn ctx_of(vars: Vec<VarSpec>) -> Ctx {
    Context::new(vars).unwrap()
}

fn sl12() -> Outcome {
    let rep = sl12_structure_check()?;
    let base = ctx_of(vec![VarSpec::even("x1"), VarSpec::even("x2"), VarSpec::odd("xi")]);
    let induced = induced_bracket_check(&base, 4)?;
    let traces = rep.supertraces.iter().all(|(_, q)| q.is_zero());
    let ok = rep.brackets.len() == 36 && traces && all_passed(&rep.checks) && all_passed(&induced);
    let mut detail = format!(
        "{} brackets, {}|{} basis, {} structure checks, {} induced checks",
        rep.brackets.len(),
        rep.even_dim,
        rep.odd_dim,
        rep.checks.len(),
        induced.len()
    );
    if !ok {
        detail += &format!("; {}{}", failures(&rep.checks), failures(&induced));
    }
    Ok((ok, detail))
}

fn exactness() -> Outcome {
    let algebras = [
        ("Q[x]", vec![VarSpec::even("x")]),
        ("Q[x1,x2]", vec![VarSpec::even("x1"), VarSpec::even("x2")]),
        ("Q[x|xi]", vec![VarSpec::even("x"), VarSpec::odd("xi")]),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, vars) in algebras {
        let s = BigradedSlice::build(&ctx_of(vars), 5, MAX_BASIS)?;
        let mut safe = 0;
        for j in 1..=3 {
            let r = exactness_report(&s, j, Differential::D1)?;
            safe += r.positions.iter().filter(|p| p.safe).count();
            if !all_passed(&r.checks) {
                ok = false;
                notes.push(format!("{name} row {j}: {}", failures(&r.checks)));
            }
        }
        let r0 = exactness_report(&s, 0, Differential::D1)?;
        let d0 = r0.positions[0].defect;
        if d0 != 1 {
            ok = false;
            notes.push(format!("{name} row 0 position 0 defect {d0}"));
        }
        notes.push(format!("{name}: {safe} safe positions exact"));
    }
    Ok((ok, notes.join(", ")))
}

fn truncation() -> Outcome {
    let base = ctx_of(vec![VarSpec::even("x1"), VarSpec::even("x2")]);
    let r = truncation_cohomology_compare(&base, 2, 4, MAX_BASIS)?;
    let safe: usize = r.rows.iter().map(|row| row.safe.iter().filter(|s| **s).count()).sum();
    let ok = all_passed(&r.checks);
    let detail = if ok {
        format!("{} internal degrees, {safe} safe slots agree", r.rows.len())
    } else {
        failures(&r.checks)
    };
    Ok((ok, detail))
}

/// `x1 ↦ x1 + ε/t`, `x2 ↦ x2 + εt` over `ℚ[ε]/(ε³)`.
fn eps_loop(x: &FormContext) -> Result<LoopPoint, Box<dyn Error>> {
    let space = LoopSpace::new(
        vec![VarSpec::even("eps").with_cap(3), VarSpec::even("x1"), VarSpec::even("x2")],
        vec![],
    )?;
    let v = |n: &str| space.var(n);
    let c1 = NilLaurent::from_terms(space.ctx(), [(-1, v("eps")?), (0, v("x1")?)], None)?;
    let c2 = NilLaurent::from_terms(space.ctx(), [(0, v("x2")?), (1, v("eps")?)], None)?;
    Ok(LoopPoint::new(x, &space, vec![c1, c2])?)
}

fn residue_formula() -> Outcome {
    let x = plane();
    let gamma = eps_loop(&x)?;
    let sctx = gamma.space().ctx().clone();
    let mut bad = Vec::new();
    for a in 0..=3 {
        for b in 0..=3 {
            let eta = poly(x.ctx(), &[("x1", a), ("x2", b), ("dx2", 1)]);
            let omega = x.d(&eta);
            let got = if omega.is_zero() {
                SuperPoly::zero(&sctx)
            } else {
                radon(&x, &omega, &gamma)?
            };
            let want = if a == 0 {
                SuperPoly::zero(&sctx)
            } else {
                poly(&sctx, &[("eps", 2), ("x1", a - 1), ("x2", b)]).scale(&Q::from_int(a as i64))
            };
            if got != want {
                bad.push(format!("(a,b)=({a},{b}): {got} vs {want}"));
            }
        }
    }
    Ok((bad.is_empty(), if bad.is_empty() { "16 exponent pairs".into() } else { bad.join("; ") }))
}

/// Monomial closed 2-forms of total degree at most 4, together with `d` of
/// every monomial 1-form of total degree at most 4.
fn closed_two_forms(x: &FormContext) -> Vec<SuperPoly> {
    let ctx = x.ctx();
    let mut out: Vec<SuperPoly> = Vec::new();
    for n in 0..=4 {
        for m in monomials_of_degree(ctx, n) {
            let p = SuperPoly::term(ctx, m.clone(), Q::one());
            match x.form_degree(&m) {
                2 if x.is_closed(&p) => out.push(p),
                1 => {
                    let dp = x.d(&p);
                    if !dp.is_zero() && !out.contains(&dp) {
                        out.push(dp);
                    }
                }
                _ => {}
            }
        }
    }
    out
}

fn round_trip() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, x) in [("A^2", plane()), ("A^{2|1}", plane_odd())] {
        let forms = closed_two_forms(&x);
        let mut passed = 0;
        for w in &forms {
            let checks = round_trip_check(&x, w)?;
            if all_passed(&checks) {
                passed += 1;
            } else {
                ok = false;
                notes.push(failures(&checks));
            }
        }
        notes.push(format!("{name}: {passed}/{} forms", forms.len()));
    }
    Ok((ok, notes.join(", ")))
}

fn additivity() -> Outcome {
    let x = plane();
    let mut ok = true;
    let mut notes = Vec::new();
    let mut count = 0;
    for a in 0..=3 {
        for b in 0..=(3 - a) {
            for dx in ["dx1", "dx2"] {
                let eta = poly(x.ctx(), &[("x1", a), ("x2", b), (dx, 1)]);
                let f = LoopFunction::transgression(&x, &eta)?;
                for groups in [2, 3] {
                    let rep = additivity_check(&f, &standard_family(&x, groups, 3)?, None)?;
                    for k in -3..=-1 {
                        let c = rep.coefficient(k);
                        if !c.is_zero() {
                            ok = false;
                            notes.push(format!("{eta}, {groups} poles, lambda^{k}: {c}"));
                        }
                    }
                }
                let prof = taylor_profile(&f, 3)?;
                let cyc = cyclic_sum_check(&f, &prof.omega, 3)?;
                let (reproduced, relation) = omega_psi_check(&f, &prof.omega, &prof.psi, 3)?;
                let mut checks = cyc;
                checks.push(reproduced);
                checks.push(relation);
                if !all_passed(&checks) {
                    ok = false;
                    notes.push(format!("{eta}: {}", failures(&checks)));
                }
                count += 1;
            }
        }
    }
    notes.insert(0, format!("{count} one-forms, 2 and 3 poles"));
    Ok((ok, notes.join("; ")))
}

fn scaling() -> Outcome {
    let x = plane();
    let area = poly(x.ctx(), &[("dx1", 1), ("dx2", 1)]);
    let exact = x.d(&poly(x.ctx(), &[("x1", 2), ("dx2", 1)]));
    let mut checks = Vec::new();
    for w in [area, exact] {
        let f = LoopFunction::radon(&x, &w)?;
        for n in 1..=3 {
            checks.extend(psi_n_scaling_check(&f, n)?);
        }
    }
    let ok = all_passed(&checks);
    Ok((ok, if ok { format!("{} identities", checks.len()) } else { failures(&checks) }))
}

fn chain_map() -> Outcome {
    let mut rng = rng(8);
    let mut checks = Vec::new();
    for case in 0..20 {
        let x = if case % 2 == 0 { plane() } else { line_odd() };
        let k = 1 + case / 10;
        let eta = random_form(&x, k, 2, 2, &mut rng);
        let lc = LoopContext::new(&x, 1, 6, 3, vec![])?;
        checks.push(chain_map_check(&lc, &eta)?);
    }
    let ok = all_passed(&checks);
    Ok((ok, if ok { "20 random forms, s = +1".into() } else { failures(&checks) }))
}

fn random_supermatrix(ctx: &Ctx, rng: &mut rand_chacha::ChaCha8Rng) -> SuperMatrix {
    let gens = all_gens(ctx);
    loop {
        let mut rows = vec![vec![SuperPoly::zero(ctx); 3]; 3];
        let mut scalar = [[Q::zero(), Q::zero()], [Q::zero(), Q::zero()]];
        for i in 0..3 {
            for j in 0..3 {
                let parity = if (i == 0) != (j == 0) { Parity::Odd } else { Parity::Even };
                let mut e = random_homogeneous(ctx, &gens, parity, 3, 3, rng)
                    .filter(|m| m.degree() > 0);
                if parity == Parity::Even && (i == j || (i > 0 && j > 0)) {
                    let c = Q::from_int(rng.gen_range(-3i64..=3));
                    if i > 0 {
                        scalar[i - 1][j - 1] = c.clone();
                    }
                    e = &e + &SuperPoly::constant(ctx, c);
                }
                rows[i][j] = e;
            }
        }
        let det = &(&scalar[0][0] * &scalar[1][1]) - &(&scalar[0][1] * &scalar[1][0]);
        if rows[0][0].constant_term().is_zero() || det.is_zero() {
            continue;
        }
        return SuperMatrix::new(1, 2, rows).expect("parities by construction");
    }
}

fn berezinian_law() -> Outcome {
    let ctx = ctx_of(vec![
        VarSpec::even("e1").with_cap(2),
        VarSpec::even("e2").with_cap(2),
        VarSpec::odd("z1"),
        VarSpec::odd("z2"),
        VarSpec::odd("z3"),
    ]);
    let mut rng = rng(9);
    let mut bad = Vec::new();
    for case in 0..50 {
        let g = random_supermatrix(&ctx, &mut rng);
        let h = random_supermatrix(&ctx, &mut rng);
        let lhs = berezinian(&g.mul(&h)?)?;
        let rhs = &berezinian(&g)? * &berezinian(&h)?;
        if lhs != rhs {
            bad.push(format!("case {case}: {lhs} vs {rhs}"));
        }
    }
    Ok((bad.is_empty(), if bad.is_empty() { "50 pairs".into() } else { bad.join("; ") }))
}

fn kernel_ctx() -> Ctx {
    ctx_of(vec![
        VarSpec::even("u"),
        VarSpec::even("v").with_cap(3),
        VarSpec::odd("p"),
        VarSpec::odd("q"),
    ])
}

fn kernel() -> Outcome {
    let ctx = kernel_ctx();
    let gens = all_gens(&ctx);
    let mut rng = rng(10);
    let mut fails: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fail = |k: &'static str| *fails.entry(k).or_default() += 1;
    for _ in 0..CASES {
        let a = random_poly(&ctx, &gens, 3, 3, &mut rng);
        let b = random_poly(&ctx, &gens, 3, 3, &mut rng);
        let c = random_poly(&ctx, &gens, 3, 3, &mut rng);
        if &(&a * &b) * &c != &a * &(&b * &c) {
            fail("associativity");
        }
        let (pa, pb) = (random_parity(&mut rng), random_parity(&mut rng));
        let ha = random_homogeneous(&ctx, &gens, pa, 3, 3, &mut rng);
        let hb = random_homogeneous(&ctx, &gens, pb, 3, 3, &mut rng);
        let swapped = if pa.is_odd() && pb.is_odd() { -(&hb * &ha) } else { &hb * &ha };
        if &ha * &hb != swapped {
            fail("commutativity");
        }
    }
    // a random derivation need not preserve the truncation ideal, so the
    // derivation identities use a free algebra
    let free = ctx_of(vec![VarSpec::even("u"), VarSpec::even("w"), VarSpec::odd("p"), VarSpec::odd("q")]);
    let fgens = all_gens(&free);
    for _ in 0..CASES {
        let pd = random_parity(&mut rng);
        let d = random_derivation(&free, pd, &mut rng);
        let pa = random_parity(&mut rng);
        let a = random_homogeneous(&free, &fgens, pa, 3, 3, &mut rng);
        let b = random_poly(&free, &fgens, 3, 3, &mut rng);
        let second = &a * &d.apply(&b);
        let rhs = &(&d.apply(&a) * &b) + &if pd.is_odd() && pa.is_odd() { -second } else { second };
        if d.apply(&(&a * &b)) != rhs {
            fail("leibniz");
        }
    }
    for _ in 0..CASES {
        let ps: Vec<Parity> = (0..3).map(|_| random_parity(&mut rng)).collect();
        let x = random_derivation(&free, ps[0], &mut rng);
        let y = random_derivation(&free, ps[1], &mut rng);
        let z = random_derivation(&free, ps[2], &mut rng);
        let lhs = x.commutator(&y.commutator(&z));
        let mut tail = y.commutator(&x.commutator(&z));
        if ps[0].is_odd() && ps[1].is_odd() {
            tail = tail.scale(&-Q::one());
        }
        if lhs != x.commutator(&y).commutator(&z).add(&tail)? {
            fail("jacobi");
        }
    }
    for _ in 0..CASES {
        if !borisov_case(&mut rng)? {
            fail("borisov");
        }
    }
    let fc = line_odd();
    let fc2 = plane_odd();
    for case in 0..CASES {
        let x = if case % 2 == 0 { &fc } else { &fc2 };
        let k = rng.gen_range(0..=2);
        let w = random_form(x, k, 3, 3, &mut rng).filter(|m| x.weight(m) > 0);
        if w.is_zero() {
            continue;
        }
        let lhs = &x.d(&x.homotopy(&w)?) + &x.homotopy(&x.d(&w))?;
        if lhs != w {
            fail("homotopy");
        }
    }
    let ok = fails.is_empty();
    Ok((
        ok,
        if ok {
            format!("{CASES} cases each for associativity, commutativity, Leibniz, Jacobi, convolution, homotopy")
        } else {
            format!("failures {fails:?}")
        },
    ))
}

/// Coefficients of a product of two random series against the product of
/// the polynomials `t^M a(t)` and `t^M b(t)` in an auxiliary variable `t`.
fn borisov_case(rng: &mut rand_chacha::ChaCha8Rng) -> Result<bool, Box<dyn Error>> {
    let ctx = ctx_of(vec![
        VarSpec::even("a").with_cap(3),
        VarSpec::even("b"),
        VarSpec::odd("r"),
        VarSpec::odd("s"),
        VarSpec::even("t"),
    ]);
    let t = ctx.index_of("t")?;
    let coeffs: Vec<usize> = (0..ctx.len()).filter(|&i| i != t).collect();
    let m = 2i32;
    let k = rng.gen_range(0..=3);
    let mut series = Vec::new();
    let mut shifted = Vec::new();
    for _ in 0..2 {
        let p = random_parity(rng);
        let mut terms = Vec::new();
        let mut poly_t = SuperPoly::zero(&ctx);
        for n in -m..=k {
            let c = random_homogeneous(&ctx, &coeffs, p, 2, 2, rng);
            poly_t = &poly_t + &(&c * &SuperPoly::var(&ctx, t).pow((n + m) as u32));
            terms.push((n, c));
        }
        series.push(NilLaurent::from_terms(&ctx, terms, Some(k))?);
        shifted.push(poly_t);
    }
    let prod = series[0].mul(&series[1])?;
    let oracle = &shifted[0] * &shifted[1];
    let bound = prod.valid_to().unwrap_or(k);
    for n in -2 * m..=bound {
        let mut e = vec![0; ctx.len()];
        e[t] = n + 2 * m;
        let want = oracle.coeff_left(&superloops::Monomial::from_exponents(e), &[t]);
        if prod.coeff(n)? != want {
            return Ok(false);
        }
    }
    Ok(bound >= k - m)
}

fn main() {
    let results = [
        run(1, "sl(1|2) brackets abstractly, as matrices, and induced", 10, sl12),
        run(2, "exactness of rows 1..3 under D1, row 0 defect 1", 60, exactness),
        run(3, "truncation cohomology comparison, p = 2", 120, truncation),
        run(4, "residue formula for radon on the epsilon loop", 5, residue_formula),
        run(5, "round trip D(radon(w)) = w with skew-symmetry", 60, round_trip),
        run(6, "additivity and lambda-regularity of transgressions", 120, additivity),
        run(7, "scaling omega^(+-n) = n omega^(+-1)", 10, scaling),
        run(8, "chain map tau(d eta) = s d tau(eta)", 30, chain_map),
        run(9, "Berezinian multiplicativity", 10, berezinian_law),
        run(10, "kernel property suite", 60, kernel),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
