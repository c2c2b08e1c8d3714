use serde::Serialize;

use super::slice::monomials_of_degree;
use super::{LocalSuperAlgebra, WeilContext, WeilError};
use crate::check::Check;
use crate::linalg::QMatrix;
use crate::rational::Q;
use crate::superalg::{Context, Ctx, Derivation, Parity, SuperPoly, VarSpec};

/// A derivation of `𝔬` as a matrix `d[i][k]`: `δ(e_i) = Σ_k d[i][k] e_k`.
#[derive(Clone, Debug, Serialize)]
pub struct DerElement {
    pub label: String,
    pub parity: Parity,
    pub matrix: QMatrix,
}

impl DerElement {
    pub fn rows(&self) -> Vec<Vec<Q>> {
        (0..self.matrix.rows())
            .map(|i| self.matrix.row(i).to_vec())
            .collect()
    }
}

/// Graded commutator `δ_a δ_b − (−1)^{|a||b|} δ_b δ_a` in matrix form.
pub fn der_commutator(a: &DerElement, b: &DerElement) -> DerElement {
    // Row convention: the matrix of δ_a ∘ δ_b is B·A.
    let ab = b.matrix.mul(&a.matrix);
    let ba = a.matrix.mul(&b.matrix);
    let matrix = if a.parity.koszul(b.parity) {
        ab.add(&ba)
    } else {
        ab.sub(&ba)
    };
    DerElement {
        label: format!("[{},{}]", a.label, b.label),
        parity: a.parity + b.parity,
        matrix,
    }
}

/// The bracket for which `δ ↦ Δ` is a homomorphism: minus the commutator.
pub fn group_bracket(a: &DerElement, b: &DerElement) -> DerElement {
    let c = der_commutator(a, b);
    DerElement {
        matrix: c.matrix.scale(&-Q::one()),
        ..c
    }
}

/// Coordinates of `m` in the span of `basis`, if it lies there.
pub fn decompose(basis: &[DerElement], m: &QMatrix) -> Option<Vec<Q>> {
    let flat = |x: &QMatrix| -> Vec<Q> {
        (0..x.rows()).flat_map(|i| x.row(i).to_vec()).collect()
    };
    let cols: Vec<Vec<Q>> = basis.iter().map(|b| flat(&b.matrix)).collect();
    let target = flat(m);
    QMatrix::from_columns(target.len(), &cols).solve(&target)
}

fn eta_ctx(n: usize) -> Ctx {
    Context::new((1..=n).map(|i| VarSpec::odd(format!("eta{i}"))).collect()).unwrap()
}

/// Matrix of a derivation of the exterior algebra in the basis of `o`.
fn matrix_of(o: &LocalSuperAlgebra, ctx: &Ctx, d: &Derivation) -> QMatrix {
    let n = o.dim();
    let mut m = QMatrix::zeros(n, n);
    for (i, label) in o.labels().iter().enumerate() {
        let e = if label == "1" {
            SuperPoly::one(ctx)
        } else {
            let factors: Vec<(&str, i32)> = label.split('*').map(|s| (s, 1)).collect();
            SuperPoly::product(ctx, &factors).unwrap()
        };
        for (mono, c) in d.apply(&e).terms() {
            let k = o
                .index_of(&SuperPoly::monomial_string(ctx, mono))
                .expect("derivation stays in the algebra");
            m.set(i, k, c.clone());
        }
    }
    m
}

/// Named basis of `Der Λ[η]` (`n = 1`: D, Theta) or `Der Λ[η₁, η₂]`
/// (`n = 2`: D1, D2, D1*, D2*, Theta1, Theta2, E, F).
///
/// With `D1* = η₂η₁∂₂` and `D2* = η₁η₂∂₁` the bracket gives
/// `[D1, D1*] = Theta2` and `[D2, D2*] = Theta1`; `E = η₁∂₂`, `F = η₂∂₁`.
pub fn der_o_basis(n: usize) -> Result<Vec<DerElement>, WeilError> {
    let o = LocalSuperAlgebra::exterior(n);
    let ctx = eta_ctx(n);
    let eta = |i: usize| SuperPoly::var(&ctx, i - 1);
    let der = |p: Parity, images: Vec<(usize, SuperPoly)>| {
        let mut d = Derivation::zero(&ctx, p);
        for (i, img) in images {
            d.set(i - 1, img).unwrap();
        }
        d
    };
    let one = SuperPoly::one(&ctx);
    let specs: Vec<(&str, Derivation)> = match n {
        1 => vec![
            ("D", der(Parity::Odd, vec![(1, one.clone())])),
            ("Theta", der(Parity::Even, vec![(1, eta(1))])),
        ],
        2 => {
            let e12 = &eta(1) * &eta(2);
            vec![
                ("D1", der(Parity::Odd, vec![(1, one.clone())])),
                ("D2", der(Parity::Odd, vec![(2, one.clone())])),
                ("D1*", der(Parity::Odd, vec![(2, -&e12)])),
                ("D2*", der(Parity::Odd, vec![(1, e12.clone())])),
                ("Theta1", der(Parity::Even, vec![(1, eta(1))])),
                ("Theta2", der(Parity::Even, vec![(2, eta(2))])),
                ("E", der(Parity::Even, vec![(2, eta(1))])),
                ("F", der(Parity::Even, vec![(1, eta(2))])),
            ]
        }
        _ => {
            return Err(WeilError::Unsupported(format!(
                "Der basis is provided for N = 1, 2 only, not {n}"
            )))
        }
    };
    Ok(specs
        .into_iter()
        .map(|(label, d)| DerElement {
            label: label.to_string(),
            parity: d.parity(),
            matrix: matrix_of(&o, &ctx, &d),
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub coefficients: Vec<(String, Q)>,
    pub value: String,
}

fn format_combination(coeffs: &[(String, Q)]) -> String {
    if coeffs.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (label, c)) in coeffs.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if k == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if !a.is_one() {
            s.push_str(&format!("{a}*"));
        }
        s.push_str(label);
    }
    s
}

/// The 36 brackets `[b_i, b_j]_G`, `i ≤ j`, of the N=2 basis, decomposed in it.
pub fn abstract_bracket_table(basis: &[DerElement]) -> Result<Vec<BracketEntry>, WeilError> {
    let mut out = Vec::new();
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let br = group_bracket(&basis[i], &basis[j]);
            let coords = decompose(basis, &br.matrix).ok_or_else(|| {
                WeilError::NotADerivation(format!(
                    "[{}, {}] is outside the span of the basis",
                    basis[i].label, basis[j].label
                ))
            })?;
            let coefficients: Vec<(String, Q)> = basis
                .iter()
                .zip(coords)
                .filter(|(_, c)| !c.is_zero())
                .map(|(b, c)| (b.label.clone(), c))
                .collect();
            out.push(BracketEntry {
                left: basis[i].label.clone(),
                right: basis[j].label.clone(),
                value: format_combination(&coefficients),
                coefficients,
            });
        }
    }
    Ok(out)
}

/// Supermatrix `ρ(δ) = −M_δ` of `δ` acting on `Λ[η₁,η₂]/ℚ·1` in the basis
/// `(η₁η₂ | η₁, η₂)`, where column `c` of `M_δ` holds `δ(b_c)`.
pub fn quotient_matrix(o: &LocalSuperAlgebra, d: &DerElement) -> QMatrix {
    let order = quotient_basis(o);
    let mut m = QMatrix::zeros(3, 3);
    for (c, &bc) in order.iter().enumerate() {
        for (r, &br) in order.iter().enumerate() {
            m.set(r, c, -d.matrix.get(bc, br));
        }
    }
    m
}

fn quotient_basis(o: &LocalSuperAlgebra) -> [usize; 3] {
    [
        o.index_of("eta1*eta2").unwrap(),
        o.index_of("eta1").unwrap(),
        o.index_of("eta2").unwrap(),
    ]
}

pub fn supertrace(m: &QMatrix) -> Q {
    m.get(0, 0) - &(m.get(1, 1) + m.get(2, 2))
}

fn super_commutator(x: &QMatrix, px: Parity, y: &QMatrix, py: Parity) -> QMatrix {
    let xy = x.mul(y);
    let yx = y.mul(x);
    if px.koszul(py) {
        xy.add(&yx)
    } else {
        xy.sub(&yx)
    }
}

fn has_block_parity(m: &QMatrix, p: Parity) -> bool {
    (0..3).all(|r| {
        (0..3).all(|c| {
            let off = (r == 0) != (c == 0);
            m.get(r, c).is_zero() || off == p.is_odd()
        })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Sl12Report {
    pub even_dim: usize,
    pub odd_dim: usize,
    pub matrices: Vec<(String, QMatrix)>,
    pub supertraces: Vec<(String, Q)>,
    pub brackets: Vec<BracketEntry>,
    pub checks: Vec<Check>,
}

/// Abstract and matrix verification of `Der Λ[η₁,η₂] ≅ sl(1|2)`.
pub fn sl12_structure_check() -> Result<Sl12Report, WeilError> {
    let basis = der_o_basis(2)?;
    let o = LocalSuperAlgebra::exterior(2);
    let mut checks = Vec::new();

    let even_dim = basis.iter().filter(|b| b.parity == Parity::Even).count();
    let odd_dim = basis.len() - even_dim;
    checks.push(Check::new(
        "dimension",
        (even_dim, odd_dim) == (4, 4),
        format!("({even_dim}|{odd_dim})"),
    ));
    let derivs_ok = basis
        .iter()
        .all(|b| o.is_derivation(&b.rows(), b.parity));
    checks.push(Check::new("basis elements are derivations", derivs_ok, ""));

    let brackets = abstract_bracket_table(&basis)?;
    checks.push(Check::new(
        "bracket table closes",
        brackets.len() == 36,
        format!("{} brackets decomposed", brackets.len()),
    ));

    let rho: Vec<QMatrix> = basis.iter().map(|b| quotient_matrix(&o, b)).collect();
    let supertraces: Vec<(String, Q)> = basis
        .iter()
        .zip(&rho)
        .map(|(b, m)| (b.label.clone(), supertrace(m)))
        .collect();
    let bad_str: Vec<&str> = supertraces
        .iter()
        .filter(|(_, s)| !s.is_zero())
        .map(|(l, _)| l.as_str())
        .collect();
    checks.push(Check::new(
        "supertrace zero",
        bad_str.is_empty(),
        if bad_str.is_empty() {
            "all 8".to_string()
        } else {
            format!("nonzero for {bad_str:?}")
        },
    ));
    let bad_par: Vec<&str> = basis
        .iter()
        .zip(&rho)
        .filter(|(b, m)| !has_block_parity(m, b.parity))
        .map(|(b, _)| b.label.as_str())
        .collect();
    checks.push(Check::new(
        "matrix block parity",
        bad_par.is_empty(),
        format!("{bad_par:?}"),
    ));

    let flat: Vec<Vec<Q>> = rho
        .iter()
        .map(|m| (0..3).flat_map(|i| m.row(i).to_vec()).collect())
        .collect();
    let rank = QMatrix::from_columns(9, &flat).rank();
    checks.push(Check::new(
        "injective onto trace-zero (4|4)",
        rank == 8 && bad_str.is_empty() && bad_par.is_empty(),
        format!("rank {rank} of 8 in gl(1|2) of dimension 9"),
    ));

    let mut hom_failures = Vec::new();
    let mut k = 0;
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let entry = &brackets[k];
            k += 1;
            let mut lhs = QMatrix::zeros(3, 3);
            for (label, c) in &entry.coefficients {
                let idx = basis.iter().position(|b| &b.label == label).unwrap();
                lhs = lhs.add(&rho[idx].scale(c));
            }
            let rhs = super_commutator(&rho[i], basis[i].parity, &rho[j], basis[j].parity);
            if lhs != rhs {
                hom_failures.push(format!("[{},{}]", basis[i].label, basis[j].label));
            }
        }
    }
    checks.push(Check::new(
        "matrix brackets match abstract table",
        hom_failures.is_empty(),
        if hom_failures.is_empty() {
            "36/36".to_string()
        } else {
            format!("mismatch at {hom_failures:?}")
        },
    ));

    Ok(Sl12Report {
        even_dim,
        odd_dim,
        matrices: basis
            .iter()
            .zip(rho)
            .map(|(b, m)| (b.label.clone(), m))
            .collect(),
        supertraces,
        brackets,
        checks,
    })
}

/// Verifies that the induced operators on `A^{Λ[η₁,η₂]}` satisfy the abstract
/// bracket table: `[Δ_a, Δ_b] = Δ_{[a,b]_G}` as derivations and on every
/// monomial of internal degree at most `max_degree`.
pub fn induced_bracket_check(base: &Ctx, max_degree: usize) -> Result<Vec<Check>, WeilError> {
    let basis = der_o_basis(2)?;
    let w = WeilContext::new(base, LocalSuperAlgebra::exterior(2))?;
    let ops: Vec<Derivation> = basis
        .iter()
        .map(|b| w.induced_derivation(&b.rows(), b.parity))
        .collect::<Result<_, _>>()?;
    let table = abstract_bracket_table(&basis)?;
    let monos: Vec<SuperPoly> = (0..=max_degree)
        .flat_map(|n| monomials_of_degree(w.ctx(), n))
        .map(|m| SuperPoly::term(w.ctx(), m, Q::one()))
        .collect();

    let mut as_derivations = Vec::new();
    let mut as_operators = Vec::new();
    let mut k = 0;
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let entry = &table[k];
            k += 1;
            let mut expected = Derivation::zero(w.ctx(), basis[i].parity + basis[j].parity);
            for (label, c) in &entry.coefficients {
                let idx = basis.iter().position(|b| &b.label == label).unwrap();
                expected = expected.add(&ops[idx].scale(c))?;
            }
            let got = ops[i].commutator(&ops[j]);
            let name = format!("[{},{}]", basis[i].label, basis[j].label);
            if got != expected {
                as_derivations.push(name.clone());
            }
            let sign = if basis[i].parity.koszul(basis[j].parity) {
                Q::one()
            } else {
                -Q::one()
            };
            let ok = monos.iter().all(|m| {
                let lhs = &ops[i].apply(&ops[j].apply(m))
                    + &ops[j].apply(&ops[i].apply(m)).scale(&sign);
                lhs == expected.apply(m)
            });
            if !ok {
                as_operators.push(name);
            }
        }
    }
    Ok(vec![
        Check::new(
            "induced brackets as derivations",
            as_derivations.is_empty(),
            if as_derivations.is_empty() {
                "36/36".to_string()
            } else {
                format!("mismatch at {as_derivations:?}")
            },
        ),
        Check::new(
            "induced brackets on slice monomials",
            as_operators.is_empty(),
            if as_operators.is_empty() {
                format!("36/36 on {} monomials", monos.len())
            } else {
                format!("mismatch at {as_operators:?}")
            },
        ),
    ])
}
