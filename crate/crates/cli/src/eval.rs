//! Binding, evaluation and command dispatch.
//!
//! Every expression is evaluated in one universe: the declared generators,
//! their differential twins `d<name>`, and the invertible constants `t` and
//! `lambda`. Commands then move values into the context they need by name.
//! Declared generators without a `cap` clause are the coordinates of `X`;
//! capped ones are parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use superloops::check::Check;
use superloops::forms::{twin_name, FormContext};
use superloops::linalg::QMatrix;
use superloops::loops::{
    additivity_check, chain_map_check, hessian_matrix, psi_n_scaling_check, radon, residue_name,
    skew_symmetry_check, tangential_form, taylor_profile, transgress, Location, LoopContext,
    LoopError, LoopFunction, LoopPoint, LoopSpace, NilLaurent, Pole, PoleFamily, CHAIN_MAP_SIGN,
    LAMBDA,
};
use superloops::superalg::{berezinian, invert, SuperMatrix};
use superloops::weil::slice::{
    exactness_report, truncation_cohomology_compare, BigradedSlice, Differential,
};
use superloops::weil::{der_commutator, der_o_basis, induced_bracket_check, sl12_structure_check};
use superloops::{AlgError, Context, Ctx, Monomial, Parity, SuperPoly, VarSpec, Q};

use crate::error::{Pos, ScriptError};
use crate::report::Report;
use crate::syntax::{parse, Command, CommandKind, Decl, Expr, Factor, Name, Script, Sign};

/// Loop parameter.
pub const T: &str = "t";

/// Upper bound on the basis size of a bigraded slice.
pub const MAX_BASIS: usize = 400_000;

const RESERVED: &[&str] = &["d", T, LAMBDA];

#[derive(Clone, Debug)]
pub struct Options {
    /// Seed for randomized property checks.
    pub seed: u64,
    /// Default nilpotency order for `additivity` and `taylor`.
    pub caps: u32,
    pub timing: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 1,
            caps: 3,
            timing: false,
        }
    }
}

pub fn run_source(src: &str, opts: &Options) -> Result<Report, ScriptError> {
    run(&parse(src)?, opts)
}

pub fn run(script: &Script, opts: &Options) -> Result<Report, ScriptError> {
    let start = Instant::now();
    let env = Env::build(script)?;
    let (command, results, checks) = match &script.command {
        None => ("(declarations only)".to_string(), json!({}), Vec::new()),
        Some(c) => {
            let (results, checks) = env.command(c, opts)?;
            (c.kind.to_string(), results, checks)
        }
    };
    Ok(Report {
        command,
        inputs: env.inputs(),
        results,
        checks,
        timing_ms: opts.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

struct Var {
    spec: VarSpec,
    cap: Option<u64>,
    pos: Pos,
}

impl Var {
    fn is_coordinate(&self) -> bool {
        self.cap.is_none()
    }
}

struct FormDef {
    source: String,
    value: SuperPoly,
}

struct LoopDef {
    assigns: Vec<(String, String, SuperPoly)>,
}

struct PoleDef {
    residue: String,
    source: String,
    location: Location,
    orientation: i8,
}

/// Where an evaluation happens, for error messages.
struct Site {
    pos: Pos,
    context: String,
}

impl Site {
    fn err(&self, message: impl Display) -> ScriptError {
        ScriptError::Eval {
            pos: self.pos,
            context: self.context.clone(),
            message: message.to_string(),
        }
    }

    fn alg(&self, e: AlgError) -> ScriptError {
        match e {
            AlgError::Parity(message) => ScriptError::Parity {
                pos: self.pos,
                message,
            },
            other => self.err(other),
        }
    }

    fn loops(&self, e: LoopError) -> ScriptError {
        match e {
            LoopError::Alg(a) => self.alg(a),
            other => self.err(other),
        }
    }
}

struct Env {
    vars: Vec<Var>,
    universe: FormContext,
    forms: BTreeMap<String, FormDef>,
    loops: BTreeMap<String, LoopDef>,
    poles: BTreeMap<String, Vec<PoleDef>>,
}

fn binding(pos: Pos, message: impl Into<String>) -> ScriptError {
    ScriptError::Binding {
        pos,
        message: message.into(),
    }
}

impl Env {
    fn build(script: &Script) -> Result<Env, ScriptError> {
        let mut vars: Vec<Var> = Vec::new();
        for d in &script.decls {
            let Decl::Vars {
                pos,
                parity,
                names,
                cap,
            } = d
            else {
                continue;
            };
            if matches!(cap, Some(c) if *c < 2 || *c > u32::MAX as u64) {
                return Err(binding(
                    *pos,
                    format!("cap {} is out of range", cap.unwrap()),
                ));
            }
            for n in names {
                if RESERVED.contains(&n.text.as_str()) {
                    return Err(binding(n.pos, format!("`{n}` is reserved")));
                }
                if let Some(v) = vars.iter().find(|v| v.spec.name == n.text) {
                    return Err(binding(
                        n.pos,
                        format!("`{n}` is already declared at {}", v.pos),
                    ));
                }
                if let Some(v) = vars.iter().find(|v| {
                    twin_name(&v.spec.name) == n.text || twin_name(&n.text) == v.spec.name
                }) {
                    return Err(binding(
                        n.pos,
                        format!(
                            "`{n}` clashes with the differential naming of `{}`",
                            v.spec.name
                        ),
                    ));
                }
                let mut spec = VarSpec::new(n.text.clone(), *parity);
                if let Some(c) = cap {
                    spec = spec.with_cap(*c as u32);
                }
                vars.push(Var {
                    spec,
                    cap: *cap,
                    pos: n.pos,
                });
            }
        }
        let universe = FormContext::new(
            vars.iter().map(|v| v.spec.clone()).collect(),
            vec![
                VarSpec::even(T).invertible(),
                VarSpec::even(LAMBDA).invertible(),
            ],
        )
        .map_err(|e| binding(Pos::new(1, 1), e.to_string()))?;
        let mut env = Env {
            vars,
            universe,
            forms: BTreeMap::new(),
            loops: BTreeMap::new(),
            poles: BTreeMap::new(),
        };
        let mut declared = BTreeSet::new();
        for d in &script.decls {
            match d {
                Decl::Vars { names, .. } => {
                    declared.extend(names.iter().map(|n| n.text.clone()));
                }
                Decl::Form { pos, name, expr } => {
                    env.fresh(name)?;
                    let site = Site {
                        pos: *pos,
                        context: format!("form {name}"),
                    };
                    let value = env.eval(expr, &declared, &site)?;
                    env.forms.insert(
                        name.text.clone(),
                        FormDef {
                            source: expr.to_string(),
                            value,
                        },
                    );
                }
                Decl::Loop { pos, name, assigns } => {
                    env.fresh(name)?;
                    let site = Site {
                        pos: *pos,
                        context: format!("loop {name}"),
                    };
                    let mut out: Vec<(String, String, SuperPoly)> = Vec::new();
                    for a in assigns {
                        let var = env.var(&a.coord)?;
                        if !declared.contains(&a.coord.text) {
                            return Err(binding(
                                a.coord.pos,
                                format!("`{}` is used before its declaration", a.coord),
                            ));
                        }
                        if !var.is_coordinate() {
                            return Err(binding(
                                a.coord.pos,
                                format!("`{}` is a parameter, not a coordinate", a.coord),
                            ));
                        }
                        if out.iter().any(|(c, _, _)| *c == a.coord.text) {
                            return Err(binding(
                                a.coord.pos,
                                format!("`{}` is assigned twice", a.coord),
                            ));
                        }
                        let v = env.eval(&a.expr, &declared, &site)?;
                        let want = var.spec.parity;
                        if !v.is_zero() && v.parity() != Some(want) {
                            return Err(ScriptError::Parity {
                                pos: a.coord.pos,
                                message: format!(
                                    "`{}` is {want}, but `{}` is not",
                                    a.coord, a.expr
                                ),
                            });
                        }
                        out.push((a.coord.text.clone(), a.expr.to_string(), v));
                    }
                    env.loops
                        .insert(name.text.clone(), LoopDef { assigns: out });
                }
                Decl::Poles { pos, name, specs } => {
                    env.fresh(name)?;
                    let site = Site {
                        pos: *pos,
                        context: format!("poles {name}"),
                    };
                    let mut out: Vec<PoleDef> = Vec::new();
                    for s in specs {
                        if RESERVED.contains(&s.residue.text.as_str()) {
                            return Err(binding(
                                s.residue.pos,
                                format!("`{}` is reserved", s.residue),
                            ));
                        }
                        if out.iter().any(|p| p.residue == s.residue.text) {
                            return Err(binding(
                                s.residue.pos,
                                format!("residue `{}` is used twice", s.residue),
                            ));
                        }
                        let den = env.eval(&s.denominator, &declared, &site)?;
                        let (location, orientation) = pole_location(&den).ok_or_else(|| {
                            site.err(format!(
                                "denominator `{}` is not of the form ±t + a + b*lambda",
                                s.denominator
                            ))
                        })?;
                        out.push(PoleDef {
                            residue: s.residue.text.clone(),
                            source: s.denominator.to_string(),
                            location,
                            orientation,
                        });
                    }
                    env.poles.insert(name.text.clone(), out);
                }
            }
        }
        Ok(env)
    }

    fn fresh(&self, name: &Name) -> Result<(), ScriptError> {
        let n = name.text.as_str();
        let taken = RESERVED.contains(&n)
            || self.universe.ctx().get(n).is_some()
            || self.forms.contains_key(n)
            || self.loops.contains_key(n)
            || self.poles.contains_key(n);
        if taken {
            Err(binding(name.pos, format!("`{n}` is already in use")))
        } else {
            Ok(())
        }
    }

    fn var(&self, name: &Name) -> Result<&Var, ScriptError> {
        self.vars
            .iter()
            .find(|v| v.spec.name == name.text)
            .ok_or_else(|| binding(name.pos, format!("undeclared name `{name}`")))
    }

    fn lookup(&self, name: &Name, declared: &BTreeSet<String>) -> Result<SuperPoly, ScriptError> {
        let n = name.text.as_str();
        if let Some(f) = self.forms.get(n) {
            return Ok(f.value.clone());
        }
        let ctx = self.universe.ctx();
        if n == T || n == LAMBDA {
            return Ok(SuperPoly::named(ctx, n).expect("universe constants"));
        }
        let base = self
            .vars
            .iter()
            .find(|v| v.spec.name == n || twin_name(&v.spec.name) == n);
        if let Some(v) = base {
            if !declared.contains(&v.spec.name) {
                return Err(binding(
                    name.pos,
                    format!("`{n}` is used before its declaration"),
                ));
            }
            return Ok(SuperPoly::named(ctx, n).expect("declared generator"));
        }
        if self.loops.contains_key(n) || self.poles.contains_key(n) {
            return Err(binding(name.pos, format!("`{n}` is not a polynomial")));
        }
        Err(binding(name.pos, format!("undeclared name `{n}`")))
    }

    fn eval(
        &self,
        e: &Expr,
        declared: &BTreeSet<String>,
        site: &Site,
    ) -> Result<SuperPoly, ScriptError> {
        let mut acc = SuperPoly::zero(self.universe.ctx());
        for (sign, term) in &e.terms {
            let mut v = SuperPoly::one(self.universe.ctx());
            for f in &term.factors {
                v = &v * &self.eval_factor(f, declared, site)?;
            }
            acc = match sign {
                Sign::Plus => &acc + &v,
                Sign::Minus => &acc - &v,
            };
        }
        Ok(acc)
    }

    fn eval_factor(
        &self,
        f: &Factor,
        declared: &BTreeSet<String>,
        site: &Site,
    ) -> Result<SuperPoly, ScriptError> {
        let ctx = self.universe.ctx();
        Ok(match f {
            Factor::Num { num, den } => {
                let q: Q = match den {
                    Some(d) => format!("{num}/{d}"),
                    None => num.to_string(),
                }
                .parse()
                .map_err(|_| site.err(format!("bad rational literal {f}")))?;
                SuperPoly::constant(ctx, q)
            }
            Factor::Var(n) => self.lookup(n, declared)?,
            Factor::D(inner) => self.universe.d(&self.eval_factor(inner, declared, site)?),
            Factor::Paren(e) => self.eval(e, declared, site)?,
            Factor::Pow(base, n) => {
                let v = self.eval_factor(base, declared, site)?;
                let e = u32::try_from(n.unsigned_abs())
                    .map_err(|_| site.err(format!("exponent {n} is too large")))?;
                if *n >= 0 {
                    v.pow(e)
                } else {
                    invert(&v)
                        .map_err(|err| site.err(format!("cannot invert `{v}`: {err}")))?
                        .pow(e)
                }
            }
        })
    }

    fn coordinates(&self) -> Vec<VarSpec> {
        self.vars
            .iter()
            .filter(|v| v.is_coordinate())
            .map(|v| v.spec.clone())
            .collect()
    }

    fn coordinate_space(&self, site: &Site) -> Result<FormContext, ScriptError> {
        let coords = self.coordinates();
        if coords.is_empty() {
            return Err(site.err("no coordinates are declared"));
        }
        FormContext::new(coords, vec![]).map_err(|e| site.alg(e))
    }

    /// A declared form moved into the forms on `x`.
    fn form_on(&self, x: &FormContext, name: &Name, site: &Site) -> Result<SuperPoly, ScriptError> {
        let w = &self
            .forms
            .get(&name.text)
            .ok_or_else(|| binding(name.pos, format!("`{name}` is not a declared form")))?
            .value;
        w.embed(x.ctx()).map_err(|_| {
            let ctx = w.ctx();
            let bad = w
                .terms()
                .flat_map(|(m, _)| {
                    m.exponents()
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e != 0)
                        .map(|(i, _)| ctx.var(i).name.clone())
                        .collect::<Vec<_>>()
                })
                .find(|n| x.ctx().get(n).is_none())
                .unwrap_or_default();
            site.err(format!(
                "form `{name}` involves `{bad}`, which is not a coordinate here"
            ))
        })
    }

    fn function(
        &self,
        x: &FormContext,
        w: &SuperPoly,
        name: &Name,
        site: &Site,
    ) -> Result<(LoopFunction, u32), ScriptError> {
        let degrees: BTreeSet<u32> = w.terms().map(|(m, _)| x.form_degree(m)).collect();
        let degrees: Vec<u32> = degrees.into_iter().collect();
        match degrees.as_slice() {
            [1] => Ok((
                LoopFunction::transgression(x, w).map_err(|e| site.loops(e))?,
                1,
            )),
            [2] => {
                if !x.is_closed(w) {
                    return Err(site.err(format!("form `{name}` is not closed")));
                }
                Ok((LoopFunction::radon(x, w).map_err(|e| site.loops(e))?, 2))
            }
            [] => Err(site.err(format!("form `{name}` is zero"))),
            _ => Err(site.err(format!("form `{name}` must be a 1-form or a closed 2-form"))),
        }
    }

    /// The loop `name` as a point of the loop space of the coordinates it assigns.
    fn build_loop(
        &self,
        name: &Name,
        site: &Site,
    ) -> Result<(FormContext, LoopPoint), ScriptError> {
        let def = self
            .loops
            .get(&name.text)
            .ok_or_else(|| binding(name.pos, format!("`{name}` is not a declared loop")))?;
        let coords: Vec<VarSpec> = self
            .coordinates()
            .into_iter()
            .filter(|c| def.assigns.iter().any(|(n, _, _)| *n == c.name))
            .collect();
        let x = FormContext::new(coords, vec![]).map_err(|e| site.alg(e))?;
        let uctx = self.universe.ctx();
        let (ti, li) = (uctx.index_of(T).unwrap(), uctx.index_of(LAMBDA).unwrap());
        let uses_lambda = def
            .assigns
            .iter()
            .any(|(_, _, v)| v.terms().any(|(m, _)| m.exp(li) != 0));
        let constants = if uses_lambda {
            vec![VarSpec::even(LAMBDA).invertible()]
        } else {
            vec![]
        };
        let params = self.vars.iter().map(|v| v.spec.clone()).collect();
        let space = LoopSpace::new(params, constants).map_err(|e| site.loops(e))?;
        let mut series = Vec::new();
        for &b in x.base() {
            let cname = &x.ctx().var(b).name;
            let (_, _, value) = def.assigns.iter().find(|(n, _, _)| n == cname).unwrap();
            let mut by_exp: BTreeMap<i32, SuperPoly> = BTreeMap::new();
            for (m, c) in value.terms() {
                if self.universe.twins().iter().any(|&tw| m.exp(tw) != 0) {
                    return Err(
                        site.err(format!("coefficients of `{cname}` contain differentials"))
                    );
                }
                let mut e = m.exponents().to_vec();
                e[ti] = 0;
                let part = SuperPoly::term(uctx, Monomial::from_exponents(e), c.clone());
                let slot = by_exp
                    .entry(m.exp(ti))
                    .or_insert_with(|| SuperPoly::zero(uctx));
                *slot = &*slot + &part;
            }
            let mut terms = Vec::new();
            for (n, p) in by_exp {
                terms.push((n, p.embed(space.ctx()).map_err(|e| site.alg(e))?));
            }
            series
                .push(NilLaurent::from_terms(space.ctx(), terms, None).map_err(|e| site.loops(e))?);
        }
        let gamma = LoopPoint::new(&x, &space, series).map_err(|e| site.loops(e))?;
        Ok((x, gamma))
    }

    fn free_base(&self, names: &[Name], site: &Site) -> Result<Ctx, ScriptError> {
        let mut specs = Vec::new();
        for n in names {
            let v = self.var(n)?;
            if !v.is_coordinate() {
                return Err(site.err(format!("slices need a free base, but `{n}` carries a cap")));
            }
            specs.push(v.spec.clone());
        }
        Context::new(specs).map_err(|e| site.alg(e))
    }

    fn inputs(&self) -> Value {
        let variables: Vec<Value> = self
            .vars
            .iter()
            .map(|v| {
                json!({
                    "name": v.spec.name,
                    "parity": v.spec.parity.to_string(),
                    "cap": v.cap,
                    "role": if v.is_coordinate() { "coordinate" } else { "parameter" },
                })
            })
            .collect();
        let forms: BTreeMap<&String, Value> = self
            .forms
            .iter()
            .map(|(n, f)| (n, json!({"source": f.source, "value": f.value.to_string()})))
            .collect();
        let loops: BTreeMap<&String, BTreeMap<&String, &String>> = self
            .loops
            .iter()
            .map(|(n, l)| (n, l.assigns.iter().map(|(c, s, _)| (c, s)).collect()))
            .collect();
        let poles: BTreeMap<&String, Vec<Value>> = self
            .poles
            .iter()
            .map(|(n, ps)| {
                let items = ps
                    .iter()
                    .map(|p| {
                        json!({
                            "residue": p.residue,
                            "denominator": p.source,
                            "location": p.location.to_string(),
                            "orientation": p.orientation,
                        })
                    })
                    .collect();
                (n, items)
            })
            .collect();
        json!({"variables": variables, "forms": forms, "loops": loops, "poles": poles})
    }

    fn command(&self, c: &Command, opts: &Options) -> Result<(Value, Vec<Check>), ScriptError> {
        let site = Site {
            pos: c.pos,
            context: c.kind.to_string(),
        };
        let s = &site;
        match &c.kind {
            CommandKind::Sl12 => sl12(s),
            CommandKind::Closed { form } => {
                let x = self.coordinate_space(s)?;
                let w = self.form_on(&x, form, s)?;
                let dw = x.d(&w);
                let check = Check::new(
                    format!("d({w}) = 0"),
                    dw.is_zero(),
                    if dw.is_zero() {
                        String::new()
                    } else {
                        format!("d = {dw}")
                    },
                );
                Ok((
                    json!({"form": w.to_string(), "d": dw.to_string()}),
                    vec![check],
                ))
            }
            CommandKind::Exactness { vars, cap } => {
                let base = self.free_base(vars, s)?;
                exactness(&base, *cap as usize, s)
            }
            CommandKind::Truncation { vars, p, cap } => {
                let base = self.free_base(vars, s)?;
                let r = truncation_cohomology_compare(&base, *p as usize, *cap as usize, MAX_BASIS)
                    .map_err(|e| s.err(e))?;
                Ok((json!({"p": p, "max_degree": cap, "rows": r.rows}), r.checks))
            }
            CommandKind::ChainMap { degree, cases } => {
                let x = self.coordinate_space(s)?;
                chain_map(&x, *degree as usize, *cases, opts.seed, s)
            }
            CommandKind::Transgress { form, lp } => {
                let (x, gamma) = self.build_loop(lp, s)?;
                let w = self.form_on(&x, form, s)?;
                let value = transgress(&x, &w, &gamma).map_err(|e| s.loops(e))?;
                let lhs = transgress(&x, &x.d(&w), &gamma).map_err(|e| s.loops(e))?;
                let rhs = gamma
                    .space()
                    .forms()
                    .d(&value)
                    .scale(&Q::from_int(CHAIN_MAP_SIGN as i64));
                let check = Check::new(
                    format!("tau(d {form}) = {CHAIN_MAP_SIGN:+} d tau({form})"),
                    lhs == rhs,
                    if lhs == rhs {
                        String::new()
                    } else {
                        format!("lhs = {lhs}; rhs = {rhs}")
                    },
                );
                Ok((
                    json!({"value": value.to_string(), "loop": gamma}),
                    vec![check],
                ))
            }
            CommandKind::Radon { form, lp } => {
                let (x, gamma) = self.build_loop(lp, s)?;
                let w = self.form_on(&x, form, s)?;
                if w.terms().any(|(m, _)| x.form_degree(m) != 2) {
                    return Err(s.err(format!("form `{form}` is not a 2-form")));
                }
                let closed = x.is_closed(&w);
                let value = if closed {
                    Value::String(radon(&x, &w, &gamma).map_err(|e| s.loops(e))?.to_string())
                } else {
                    Value::Null
                };
                let check = Check::new(
                    format!("{form} is closed"),
                    closed,
                    if closed {
                        String::new()
                    } else {
                        format!("d{form} = {}", x.d(&w))
                    },
                );
                Ok((json!({"value": value, "loop": gamma}), vec![check]))
            }
            CommandKind::Hessian { form, n } => {
                let x = self.coordinate_space(s)?;
                let w = self.form_on(&x, form, s)?;
                let (f, degree) = self.function(&x, &w, form, s)?;
                let n32 = i32::try_from(*n).map_err(|_| s.err("pairing index out of range"))?;
                let h = hessian_matrix(&f, n32).map_err(|e| s.loops(e))?;
                let mut checks = vec![skew_symmetry_check(&x, &h)];
                if degree == 2 && n32 == 1 {
                    let back = tangential_form(&x, &h).map_err(|e| s.loops(e))?;
                    checks.push(Check::new(
                        format!("D(radon {form}) = {form}"),
                        back == w,
                        if back == w {
                            String::new()
                        } else {
                            format!("recovered {back}")
                        },
                    ));
                }
                Ok((json!({"n": n, "matrix": matrix_strings(&h)}), checks))
            }
            CommandKind::Additivity { form, poles, d } => {
                let d = d.map(|d| d as u32).unwrap_or(opts.caps);
                self.additivity(form, poles, d, s)
            }
            CommandKind::PsiScaling { form, n } => {
                let x = self.coordinate_space(s)?;
                let w = self.form_on(&x, form, s)?;
                let (f, _) = self.function(&x, &w, form, s)?;
                let n32 = i32::try_from(*n).map_err(|_| s.err("scaling index out of range"))?;
                let checks = psi_n_scaling_check(&f, n32).map_err(|e| s.loops(e))?;
                let h1 = hessian_matrix(&f, 1).map_err(|e| s.loops(e))?;
                Ok((json!({"n": n, "omega_1": matrix_strings(&h1)}), checks))
            }
            CommandKind::Berezinian { even, odd, rows } => {
                self.berezinian(*even as usize, *odd as usize, rows, s)
            }
            CommandKind::Taylor { form, cap } => {
                let x = self.coordinate_space(s)?;
                let w = self.form_on(&x, form, s)?;
                let (f, _) = self.function(&x, &w, form, s)?;
                let cap = cap.map(|c| c as u32).unwrap_or(opts.caps);
                let prof = taylor_profile(&f, cap).map_err(|e| s.loops(e))?;
                let checks = prof.checks.clone();
                let mut v = serde_json::to_value(&prof).expect("profiles serialize");
                if let Value::Object(m) = &mut v {
                    m.remove("checks");
                }
                Ok((v, checks))
            }
        }
    }

    fn additivity(
        &self,
        form: &Name,
        poles: &Name,
        d: u32,
        s: &Site,
    ) -> Result<(Value, Vec<Check>), ScriptError> {
        if d < 2 {
            return Err(s.err("nilpotency order must be at least 2"));
        }
        let x = self.coordinate_space(s)?;
        let w = self.form_on(&x, form, s)?;
        let (f, _) = self.function(&x, &w, form, s)?;
        let defs = self.poles.get(&poles.text).ok_or_else(|| {
            binding(
                poles.pos,
                format!("`{poles}` is not a declared pole family"),
            )
        })?;
        let coords = self.coordinates();
        let mut params = coords.clone();
        for p in defs {
            for c in &coords {
                let mut spec = VarSpec::new(residue_name(&p.residue, &c.name), c.parity);
                if c.parity == Parity::Even {
                    spec = spec.with_cap(d);
                }
                params.push(spec);
            }
        }
        let space: Arc<LoopSpace> =
            LoopSpace::new(params, vec![VarSpec::even(LAMBDA).invertible()])
                .map_err(|e| s.loops(e))?;
        let var = |n: &str| space.var(n).map_err(|e| s.loops(e));
        let mut family = Vec::new();
        for p in defs {
            let residues = coords
                .iter()
                .map(|c| var(&residue_name(&p.residue, &c.name)))
                .collect::<Result<Vec<_>, _>>()?;
            family.push(Pole {
                location: p.location.clone(),
                orientation: p.orientation,
                residues,
            });
        }
        let tail = coords
            .iter()
            .map(|c| Ok(vec![var(&c.name)?]))
            .collect::<Result<Vec<_>, ScriptError>>()?;
        let fam = PoleFamily::new(&x, &space, family, tail).map_err(|e| s.loops(e))?;
        let rep = additivity_check(&f, &fam, None).map_err(|e| s.loops(e))?;
        let lowest = rep
            .lambda_expansion
            .keys()
            .next()
            .copied()
            .unwrap_or(0)
            .min(-3);
        let mut exps: BTreeSet<i32> = (lowest..0).collect();
        exps.extend(rep.lambda_expansion.keys().copied());
        let expansion: Vec<Value> = exps
            .into_iter()
            .map(|k| json!({"exponent": k, "coefficient": rep.coefficient(k).to_string()}))
            .collect();
        let checks = vec![
            rep.check(),
            Check::new(
                "residues over all poles sum to zero",
                rep.total.is_zero(),
                if rep.total.is_zero() {
                    String::new()
                } else {
                    format!("total = {}", rep.total)
                },
            ),
        ];
        let results = json!({
            "nilpotency_order": d,
            "family": fam,
            "precision": rep.precision,
            "per_pole": rep.per_pole.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "lambda_expansion": expansion,
        });
        Ok((results, checks))
    }

    fn berezinian(
        &self,
        even: usize,
        odd: usize,
        rows: &[Vec<Expr>],
        s: &Site,
    ) -> Result<(Value, Vec<Check>), ScriptError> {
        let size = even + odd;
        if rows.len() != size || rows.iter().any(|r| r.len() != size) {
            return Err(s.err(format!(
                "a {even}|{odd} supermatrix needs {size} rows of {size} entries"
            )));
        }
        let ctx = Context::new(self.vars.iter().map(|v| v.spec.clone()).collect())
            .map_err(|e| s.alg(e))?;
        let declared: BTreeSet<String> = self.vars.iter().map(|v| v.spec.name.clone()).collect();
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let mut out = Vec::new();
            for (j, e) in row.iter().enumerate() {
                let v = self.eval(e, &declared, s)?;
                out.push(v.embed(&ctx).map_err(|_| {
                    s.err(format!(
                        "entry ({i}, {j}) must be a polynomial in the declared generators"
                    ))
                })?);
            }
            entries.push(out);
        }
        let g = SuperMatrix::new(even, odd, entries).map_err(|e| s.alg(e))?;
        let b = berezinian(&g).map_err(|e| s.alg(e))?;
        let gg = g.mul(&g).map_err(|e| s.alg(e))?;
        let b2 = berezinian(&gg).map_err(|e| s.alg(e))?;
        let sq = &b * &b;
        let check = Check::new(
            "Ber(g g) = Ber(g)^2",
            b2 == sq,
            if b2 == sq {
                String::new()
            } else {
                format!("{b2} vs {sq}")
            },
        );
        Ok((
            json!({"format": format!("{even}|{odd}"), "value": b.to_string()}),
            vec![check],
        ))
    }
}

/// `±t + a + b·λ` as `σ(t − ℓ)`.
fn pole_location(den: &SuperPoly) -> Option<(Location, i8)> {
    let ctx = den.ctx();
    let (ti, li) = (ctx.index_of(T).ok()?, ctx.index_of(LAMBDA).ok()?);
    let (mut sigma, mut constant, mut lam) = (None, Q::zero(), Q::zero());
    for (m, c) in den.terms() {
        let others = m
            .exponents()
            .iter()
            .enumerate()
            .any(|(i, &e)| e != 0 && i != ti && i != li);
        if others {
            return None;
        }
        match (m.exp(ti), m.exp(li)) {
            (1, 0) => sigma = Some(c.clone()),
            (0, 0) => constant = c.clone(),
            (0, 1) => lam = c.clone(),
            _ => return None,
        }
    }
    let sigma = sigma?;
    let orientation: i8 = if sigma.is_one() {
        1
    } else if (-&sigma).is_one() {
        -1
    } else {
        return None;
    };
    let s = Q::from_int(orientation as i64);
    Some((
        Location::new(-&(&constant * &s), -&(&lam * &s)),
        orientation,
    ))
}

fn matrix_strings(m: &[Vec<SuperPoly>]) -> Vec<Vec<String>> {
    m.iter()
        .map(|r| r.iter().map(|c| c.to_string()).collect())
        .collect()
}

fn sl12(s: &Site) -> Result<(Value, Vec<Check>), ScriptError> {
    let rep = sl12_structure_check().map_err(|e| s.err(e))?;
    let basis = der_o_basis(2).map_err(|e| s.err(e))?;
    let find = |label: &str| basis.iter().find(|b| b.label == label);
    let mut verified = 0;
    for e in &rep.brackets {
        let (Some(a), Some(b)) = (find(&e.left), find(&e.right)) else {
            continue;
        };
        let want = der_commutator(a, b).matrix.scale(&-Q::one());
        let mut sum = QMatrix::zeros(want.rows(), want.cols());
        let mut known = true;
        for (label, c) in &e.coefficients {
            match find(label) {
                Some(el) => sum = sum.add(&el.matrix.scale(c)),
                None => known = false,
            }
        }
        if known && sum.sub(&want).is_zero() {
            verified += 1;
        }
    }
    let base = Context::new(vec![
        VarSpec::even("x1"),
        VarSpec::even("x2"),
        VarSpec::odd("xi"),
    ])
    .map_err(|e| s.alg(e))?;
    let induced = induced_bracket_check(&base, 4).map_err(|e| s.err(e))?;
    let n = rep.brackets.len();
    let mut checks = rep.checks.clone();
    checks.push(Check::new(
        "bracket table recomputed from supercommutators",
        verified == n && n == 36,
        format!("{verified}/{n} brackets verified"),
    ));
    checks.extend(induced);
    let brackets: Vec<String> = rep
        .brackets
        .iter()
        .map(|e| format!("[{}, {}] = {}", e.left, e.right, e.value))
        .collect();
    let traces: BTreeMap<&String, String> = rep
        .supertraces
        .iter()
        .map(|(l, q)| (l, q.to_string()))
        .collect();
    let results = json!({
        "dimension": format!("{}|{}", rep.even_dim, rep.odd_dim),
        "brackets": brackets,
        "brackets_verified": format!("{verified}/{n}"),
        "supertraces": traces,
    });
    Ok((results, checks))
}

fn exactness(base: &Ctx, cap: usize, s: &Site) -> Result<(Value, Vec<Check>), ScriptError> {
    let slice = BigradedSlice::build(base, cap, MAX_BASIS).map_err(|e| s.err(e))?;
    let mut lines = Vec::new();
    let mut checks = Vec::new();
    for (diff, label) in [(Differential::D1, "D1"), (Differential::D2, "D2")] {
        for j in 0..=cap.min(3) {
            let r = exactness_report(&slice, j, diff).map_err(|e| s.err(e))?;
            if j == 0 {
                let d0 = r.positions.first().map(|p| p.defect);
                checks.push(Check::new(
                    format!("{label} line 0 has one-dimensional cohomology at position 0"),
                    d0 == Some(1),
                    match d0 {
                        Some(d) => format!("defect {d}"),
                        None => "no positions".into(),
                    },
                ));
            } else {
                checks.extend(r.checks.iter().cloned());
            }
            lines.push(json!({"differential": label, "line": j, "positions": r.positions}));
        }
    }
    let generators: Vec<&String> = base.vars().iter().map(|v| &v.name).collect();
    Ok((
        json!({"generators": generators, "max_degree": cap, "lines": lines}),
        checks,
    ))
}

fn random_form(x: &FormContext, k: usize, rng: &mut ChaCha8Rng) -> SuperPoly {
    let ctx = x.ctx();
    let n = x.base().len();
    let mut w = SuperPoly::zero(ctx);
    for _ in 0..3 {
        let c = rng.gen_range(1..=5i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut m = SuperPoly::constant(ctx, Q::from_int(c));
        for _ in 0..rng.gen_range(0..=2) {
            m = &m * &SuperPoly::var(ctx, x.base()[rng.gen_range(0..n)]);
        }
        for _ in 0..k {
            m = &m * &SuperPoly::var(ctx, x.twins()[rng.gen_range(0..n)]);
        }
        w = &w + &m;
    }
    w
}

fn chain_map(
    x: &FormContext,
    degree: usize,
    cases: u64,
    seed: u64,
    s: &Site,
) -> Result<(Value, Vec<Check>), ScriptError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = degree as i32 + 4;
    let lc = LoopContext::new(x, 1, k, 3, vec![]).map_err(|e| s.loops(e))?;
    let mut checks = Vec::new();
    for _ in 0..cases {
        let eta = random_form(x, degree, &mut rng);
        checks.push(chain_map_check(&lc, &eta).map_err(|e| s.loops(e))?);
    }
    Ok((
        json!({"seed": seed, "degree": degree, "cases": cases, "window": [-1, k]}),
        checks,
    ))
}
