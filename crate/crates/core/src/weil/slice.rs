use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::der::der_o_basis;
use super::{LocalSuperAlgebra, WeilContext, WeilError};
use crate::check::Check;
use crate::forms::FormContext;
use crate::linalg::QMatrix;
use crate::rational::Q;
use crate::superalg::{Ctx, Derivation, Monomial, SuperPoly};

/// All monomials of total degree `n` (odd generators at most once, caps
/// respected), in a fixed order.
pub fn monomials_of_degree(ctx: &Ctx, n: usize) -> Vec<Monomial> {
    fn rec(ctx: &Ctx, pos: usize, left: usize, cur: &mut Vec<i32>, out: &mut Vec<Monomial>) {
        if pos == ctx.len() {
            if left == 0 {
                out.push(Monomial::from_exponents(cur.clone()));
            }
            return;
        }
        let max = match ctx.var(pos).cap() {
            Some(c) => (c as usize - 1).min(left),
            None => left,
        };
        for e in (0..=max).rev() {
            cur[pos] = e as i32;
            rec(ctx, pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(ctx, 0, n, &mut vec![0; ctx.len()], &mut out);
    out.retain(|m| m.is_valid(ctx));
    out
}

/// The eight N=2 operators, in basis order.
pub const OPERATORS: [&str; 8] = ["D1", "D2", "D1*", "D2*", "Theta1", "Theta2", "E", "F"];

/// Key of a graded piece: bidegree `(i, j)` and internal degree `n`.
pub type Piece = (usize, usize, usize);

/// Truncation of `Ω••(A) = A^{Λ[η₁,η₂]}` to internal degree `≤ max_degree`
/// and bidegrees inside `window`.
///
/// Generators `x`, `x[1]`, `x[2]`, `x[3]` have bidegrees (0,0), (1,0), (0,1),
/// (1,1); the internal degree counts generators. All eight operators
/// preserve the internal degree, so each piece is computed exactly.
#[derive(Clone, Debug)]
pub struct BigradedSlice {
    weil: WeilContext,
    max_degree: usize,
    window: (usize, usize),
    bases: BTreeMap<Piece, Vec<Monomial>>,
    index: HashMap<Piece, HashMap<Monomial, usize>>,
    ops: Vec<(String, Derivation, (i32, i32))>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Differential {
    D1,
    D2,
}

impl BigradedSlice {
    /// Slice with the full bidegree window `(max_degree, max_degree)`.
    pub fn build(base: &Ctx, max_degree: usize, max_basis: usize) -> Result<Self, WeilError> {
        Self::build_windowed(base, max_degree, (max_degree, max_degree), max_basis)
    }

    pub fn build_windowed(
        base: &Ctx,
        max_degree: usize,
        window: (usize, usize),
        max_basis: usize,
    ) -> Result<Self, WeilError> {
        let weil = WeilContext::new(base, LocalSuperAlgebra::exterior(2))?;
        let mut bases: BTreeMap<Piece, Vec<Monomial>> = BTreeMap::new();
        let mut total = 0usize;
        for n in 0..=max_degree {
            for m in monomials_of_degree(weil.ctx(), n) {
                let (i, j) = bidegree(&weil, &m);
                if i <= window.0 && j <= window.1 {
                    bases.entry((i, j, n)).or_default().push(m);
                    total += 1;
                    if total > max_basis {
                        return Err(WeilError::TooLarge {
                            size: total,
                            max: max_basis,
                        });
                    }
                }
            }
        }
        let index = bases
            .iter()
            .map(|(k, v)| (*k, v.iter().cloned().enumerate().map(|(a, b)| (b, a)).collect()))
            .collect();
        let basis = der_o_basis(2)?;
        let mut ops = Vec::new();
        for b in &basis {
            let d = weil.induced_derivation(&b.rows(), b.parity)?;
            let shift = operator_shift(&weil, &d);
            ops.push((b.label.clone(), d, shift));
        }
        Ok(BigradedSlice {
            weil,
            max_degree,
            window,
            bases,
            index,
            ops,
        })
    }

    pub fn weil(&self) -> &WeilContext {
        &self.weil
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    pub fn basis(&self, piece: Piece) -> &[Monomial] {
        self.bases.get(&piece).map_or(&[], Vec::as_slice)
    }

    pub fn dim(&self, piece: Piece) -> usize {
        self.basis(piece).len()
    }

    /// Dimension of `V^{ij}` summed over internal degrees.
    pub fn dim_total(&self, i: usize, j: usize) -> usize {
        (0..=self.max_degree).map(|n| self.dim((i, j, n))).sum()
    }

    pub fn operator(&self, name: &str) -> Option<&Derivation> {
        self.ops.iter().find(|(l, _, _)| l == name).map(|(_, d, _)| d)
    }

    /// Bidegree shift of a named operator.
    pub fn shift(&self, name: &str) -> Option<(i32, i32)> {
        self.ops.iter().find(|(l, _, _)| l == name).map(|(_, _, s)| *s)
    }

    /// Target piece of `name` from `piece`, if it is a valid bidegree.
    pub fn target(&self, name: &str, piece: Piece) -> Option<Piece> {
        let (di, dj) = self.shift(name)?;
        let i = piece.0 as i32 + di;
        let j = piece.1 as i32 + dj;
        (i >= 0 && j >= 0).then_some((i as usize, j as usize, piece.2))
    }

    /// Whether the target bidegree lies inside the computed window, or is
    /// known to vanish because it exceeds the internal degree.
    pub fn target_known(&self, name: &str, piece: Piece) -> bool {
        match self.target(name, piece) {
            None => true,
            Some((i, j, n)) => (i <= self.window.0 || i > n) && (j <= self.window.1 || j > n),
        }
    }

    /// Matrix of `name` from `piece` to its target piece (columns are images
    /// of basis monomials). Images leaving the window give zero rows.
    pub fn matrix(&self, name: &str, piece: Piece) -> Result<QMatrix, WeilError> {
        let op = self
            .operator(name)
            .ok_or_else(|| WeilError::Unsupported(format!("unknown operator `{name}`")))?;
        let src = self.basis(piece);
        let tgt_piece = self.target(name, piece);
        let tgt_len = tgt_piece.map_or(0, |t| self.dim(t));
        let empty = HashMap::new();
        let tgt_index = tgt_piece
            .and_then(|t| self.index.get(&t))
            .unwrap_or(&empty);
        let mut m = QMatrix::zeros(tgt_len, src.len());
        for (c, mono) in src.iter().enumerate() {
            let img = op.apply(&SuperPoly::term(self.weil.ctx(), mono.clone(), Q::one()));
            for (tm, coeff) in img.terms() {
                match tgt_index.get(tm) {
                    Some(&r) => m.set(r, c, coeff.clone()),
                    None if !self.target_known(name, piece) => {}
                    None => {
                        return Err(WeilError::Unsupported(format!(
                            "`{name}` image left its piece: {}",
                            SuperPoly::monomial_string(self.weil.ctx(), tm)
                        )))
                    }
                }
            }
        }
        Ok(m)
    }

    /// Pieces in key order.
    pub fn pieces(&self) -> impl Iterator<Item = Piece> + '_ {
        self.bases.keys().copied()
    }

    pub fn export(&self, operators: &[&str]) -> Result<SliceExport, WeilError> {
        let mut pieces = Vec::new();
        for (&(i, j, n), b) in &self.bases {
            pieces.push(PieceExport {
                bidegree: (i, j),
                internal_degree: n,
                basis: b
                    .iter()
                    .map(|m| SuperPoly::monomial_string(self.weil.ctx(), m))
                    .collect(),
            });
        }
        let mut ops = Vec::new();
        for &name in operators {
            for piece in self.pieces() {
                let Some(t) = self.target(name, piece) else {
                    continue;
                };
                if self.dim(t) == 0 {
                    continue;
                }
                ops.push(OperatorExport {
                    name: name.to_string(),
                    source: piece,
                    target: t,
                    matrix: self.matrix(name, piece)?,
                });
            }
        }
        Ok(SliceExport {
            generators: self
                .weil
                .ctx()
                .vars()
                .iter()
                .map(|v| v.name.clone())
                .collect(),
            max_degree: self.max_degree,
            window: self.window,
            pieces,
            operators: ops,
        })
    }
}

fn bidegree(w: &WeilContext, m: &Monomial) -> (usize, usize) {
    let (mut i, mut j) = (0, 0);
    for jb in 0..w.base().len() {
        for (k, (a, b)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
            let e = m.exp(w.gen(jb, k)) as usize;
            i += a * e;
            j += b * e;
        }
    }
    (i, j)
}

fn operator_shift(w: &WeilContext, d: &Derivation) -> (i32, i32) {
    for pos in 0..w.ctx().len() {
        let img = d.image(pos);
        if let Some((m, _)) = img.terms().next() {
            let src = bidegree(w, &Monomial::var(w.ctx().len(), pos));
            let dst = bidegree(w, m);
            return (
                dst.0 as i32 - src.0 as i32,
                dst.1 as i32 - src.1 as i32,
            );
        }
    }
    (0, 0)
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceExport {
    pub bidegree: (usize, usize),
    pub internal_degree: usize,
    pub basis: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorExport {
    pub name: String,
    pub source: Piece,
    pub target: Piece,
    pub matrix: QMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceExport {
    pub generators: Vec<String>,
    pub max_degree: usize,
    pub window: (usize, usize),
    pub pieces: Vec<PieceExport>,
    pub operators: Vec<OperatorExport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositionReport {
    pub position: usize,
    pub dim: usize,
    pub dim_ker: usize,
    pub dim_im_prev: usize,
    pub defect: usize,
    pub safe: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub differential: Differential,
    /// Row index `j` for `D1`, column index `i` for `D2`.
    pub line: usize,
    pub positions: Vec<PositionReport>,
    pub checks: Vec<Check>,
}

fn rank_and_dim(s: &BigradedSlice, op: &str, piece: Piece) -> Result<(usize, usize), WeilError> {
    let dim = s.dim(piece);
    if dim == 0 {
        return Ok((0, 0));
    }
    Ok((s.matrix(op, piece)?.rank(), dim))
}

/// Ranks and defects along one line of the double complex.
///
/// For `D1` the line is row `j` (positions `i`); for `D2` it is column `i`
/// (positions `j`). Lines `≥ 1` must be exact at every safe position, and
/// the anticommutator of the differential with its homotopy must equal the
/// line index.
pub fn exactness_report(
    s: &BigradedSlice,
    line: usize,
    differential: Differential,
) -> Result<ExactnessReport, WeilError> {
    let (op, hom) = match differential {
        Differential::D1 => ("D1", "D1*"),
        Differential::D2 => ("D2", "D2*"),
    };
    let limit = match differential {
        Differential::D1 => s.window.0,
        Differential::D2 => s.window.1,
    };
    let piece = |pos: usize, n: usize| match differential {
        Differential::D1 => (pos, line, n),
        Differential::D2 => (line, pos, n),
    };
    let mut positions = Vec::new();
    for pos in 0..=limit {
        let (mut dim, mut ker, mut im_prev) = (0, 0, 0);
        for n in 0..=s.max_degree {
            let (r, d) = rank_and_dim(s, op, piece(pos, n))?;
            dim += d;
            ker += d - r;
            if pos > 0 {
                im_prev += rank_and_dim(s, op, piece(pos - 1, n))?.0;
            }
        }
        // The outgoing map must land in computed (or provably zero) pieces.
        let safe = (0..=s.max_degree).all(|n| s.target_known(op, piece(pos, n)));
        positions.push(PositionReport {
            position: pos,
            dim,
            dim_ker: ker,
            dim_im_prev: im_prev,
            defect: ker - im_prev,
            safe,
        });
    }
    let mut checks = Vec::new();
    if line >= 1 {
        let bad: Vec<usize> = positions
            .iter()
            .filter(|p| p.safe && p.defect != 0)
            .map(|p| p.position)
            .collect();
        checks.push(Check::new(
            format!("{op} exact on line {line}"),
            bad.is_empty(),
            if bad.is_empty() {
                format!(
                    "{} safe positions",
                    positions.iter().filter(|p| p.safe).count()
                )
            } else {
                format!("defects at {bad:?}")
            },
        ));
    }
    // [op, hom] = line · id on every piece of the line.
    let mut homotopy_ok = true;
    for pos in 0..=limit {
        for n in 0..=s.max_degree {
            let p = piece(pos, n);
            let d = s.dim(p);
            if d == 0 {
                continue;
            }
            let down = s.target(hom, p);
            let up = s.target(op, p);
            let mut acc = QMatrix::zeros(d, d);
            if let Some(t) = down {
                if s.dim(t) > 0 {
                    acc = acc.add(&s.matrix(op, t)?.mul(&s.matrix(hom, p)?));
                }
            }
            if let Some(t) = up {
                if s.dim(t) > 0 && s.target_known(op, p) {
                    acc = acc.add(&s.matrix(hom, t)?.mul(&s.matrix(op, p)?));
                }
            }
            if !s.target_known(op, p) {
                continue;
            }
            if acc != QMatrix::identity(d).scale(&Q::from_int(line as i64)) {
                homotopy_ok = false;
            }
        }
    }
    checks.push(Check::new(
        format!("{op}{hom} + {hom}{op} = {line}·id"),
        homotopy_ok,
        "",
    ));
    Ok(ExactnessReport {
        differential,
        line,
        positions,
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyRow {
    pub internal_degree: usize,
    pub closed_side: Vec<usize>,
    pub de_rham_side: Vec<usize>,
    pub safe: Vec<bool>,
    pub equal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationReport {
    pub p: usize,
    pub rows: Vec<CohomologyRow>,
    pub checks: Vec<Check>,
}

/// Cohomology of `((Ω^{p,cl})^•, D2)` inside the slice against that of
/// `Ω^{p,cl} ↪ Ω^p → Ω^{p+1} → …` computed in the forms module, per internal
/// degree (Euler weight on the de Rham side).
pub fn truncation_cohomology_compare(
    base: &Ctx,
    p: usize,
    max_degree: usize,
    max_basis: usize,
) -> Result<TruncationReport, WeilError> {
    if p == 0 {
        return Err(WeilError::Unsupported("truncation needs p >= 1".into()));
    }
    let s = BigradedSlice::build(base, max_degree, max_basis)?;
    let forms = FormContext::new(base.vars().to_vec(), vec![])?;
    let mut rows = Vec::new();
    let mut first_injective = true;
    for n in 0..=max_degree {
        let slots = n + 2;
        // Closed side: K_q = ker D1 on V^{p,q}_n, differential D2.
        let mut kernels: Vec<Vec<Vec<Q>>> = Vec::new();
        for q in 0..slots {
            let piece = (p, q, n);
            if s.dim(piece) == 0 {
                kernels.push(Vec::new());
                continue;
            }
            kernels.push(s.matrix("D1", piece)?.nullspace());
        }
        let mut out_rank = vec![0usize; slots];
        for q in 0..slots {
            let piece = (p, q, n);
            if kernels[q].is_empty() || s.dim((p, q + 1, n)) == 0 {
                continue;
            }
            let d2 = s.matrix("D2", piece)?;
            let images: Vec<Vec<Q>> = kernels[q].iter().map(|v| d2.apply(v)).collect();
            out_rank[q] = QMatrix::from_columns(s.dim((p, q + 1, n)), &images).rank();
        }
        if !kernels[0].is_empty() && out_rank[0] != kernels[0].len() {
            first_injective = false;
        }
        let closed: Vec<usize> = (0..slots)
            .map(|q| kernels[q].len() - out_rank[q] - if q > 0 { out_rank[q - 1] } else { 0 })
            .collect();

        // De Rham side: C^0 = Ω^{p,cl}, C^s = Ω^{p+s-1} for s ≥ 1.
        let form_basis = |k: usize| -> Vec<Monomial> {
            monomials_of_degree(forms.ctx(), n)
                .into_iter()
                .filter(|m| forms.form_degree(m) as usize == k)
                .collect()
        };
        let d_rank = |k: usize| -> usize {
            let src = form_basis(k);
            let tgt = form_basis(k + 1);
            if src.is_empty() || tgt.is_empty() {
                return 0;
            }
            let idx: HashMap<&Monomial, usize> =
                tgt.iter().enumerate().map(|(a, b)| (b, a)).collect();
            let mut m = QMatrix::zeros(tgt.len(), src.len());
            for (c, mono) in src.iter().enumerate() {
                let img = forms.d(&SuperPoly::term(forms.ctx(), mono.clone(), Q::one()));
                for (tm, coeff) in img.terms() {
                    m.set(idx[tm], c, coeff.clone());
                }
            }
            m.rank()
        };
        let dim_k = |k: usize| form_basis(k).len();
        let closed_p = dim_k(p) - d_rank(p);
        let mut dims = vec![closed_p];
        let mut ranks = vec![closed_p];
        for sidx in 1..slots {
            let k = p + sidx - 1;
            dims.push(dim_k(k));
            ranks.push(d_rank(k));
        }
        let de_rham: Vec<usize> = (0..slots)
            .map(|q| dims[q] - ranks[q] - if q > 0 { ranks[q - 1] } else { 0 })
            .collect();

        let safe: Vec<bool> = (0..slots).map(|q| q + 1 <= s.window.1 || q + 1 > n).collect();
        let equal = (0..slots).all(|q| !safe[q] || closed[q] == de_rham[q]);
        rows.push(CohomologyRow {
            internal_degree: n,
            closed_side: closed,
            de_rham_side: de_rham,
            safe,
            equal,
        });
    }
    let mismatched: Vec<usize> = rows
        .iter()
        .filter(|r| !r.equal)
        .map(|r| r.internal_degree)
        .collect();
    let checks = vec![
        Check::new(
            "cohomology tables agree on safe slots",
            mismatched.is_empty(),
            if mismatched.is_empty() {
                format!("internal degrees 0..={max_degree}")
            } else {
                format!("mismatch at internal degrees {mismatched:?}")
            },
        ),
        Check::new("first D2 map injective", first_injective, ""),
    ];
    Ok(TruncationReport { p, rows, checks })
}

/// The automorphism `η₁ ↔ η₂` of `Λ[η₁,η₂]` induces `x[1] ↔ x[2]`,
/// `x[3] ↦ −x[3]` on the slice; returns whether it conjugates `D1` into `D2`.
pub fn swap_conjugates_differentials(s: &BigradedSlice) -> Result<bool, WeilError> {
    let w = s.weil();
    let ctx = w.ctx();
    let mut images = Vec::new();
    for j in 0..w.base().len() {
        images.push((j, 0, w.gen_var(j, 0)));
        images.push((j, 1, w.gen_var(j, 2)));
        images.push((j, 2, w.gen_var(j, 1)));
        images.push((j, 3, -w.gen_var(j, 3)));
    }
    let names: Vec<String> = images
        .iter()
        .map(|(j, k, _)| ctx.var(w.gen(*j, *k)).name.clone())
        .collect();
    let sigma = crate::superalg::Substitution::new(
        ctx,
        ctx,
        names
            .iter()
            .zip(images.iter())
            .map(|(n, (_, _, p))| (n.as_str(), p.clone())),
    )?;
    let d1 = s.operator("D1").unwrap();
    let d2 = s.operator("D2").unwrap();
    // σ is an involution, so σ D1 σ = D2 on generators suffices.
    for pos in 0..ctx.len() {
        let g = SuperPoly::var(ctx, pos);
        let lhs = sigma.apply(&d1.apply(&sigma.apply(&g)?))?;
        if lhs != d2.apply(&g) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `Θ₁`, `Θ₂` act as `i`, `j` on every piece.
pub fn grading_check(s: &BigradedSlice) -> Result<bool, WeilError> {
    for piece in s.pieces().collect::<Vec<_>>() {
        let d = s.dim(piece);
        let t1 = s.matrix("Theta1", piece)?;
        let t2 = s.matrix("Theta2", piece)?;
        if t1 != QMatrix::identity(d).scale(&Q::from_int(piece.0 as i64))
            || t2 != QMatrix::identity(d).scale(&Q::from_int(piece.1 as i64))
        {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalg::{Context, VarSpec};

    fn line() -> Ctx {
        Context::new(vec![VarSpec::even("x")]).unwrap()
    }

    #[test]
    fn basis_one_variable() {
        let s = BigradedSlice::build(&line(), 3, 10_000).unwrap();
        let b: Vec<String> = (1..=3)
            .flat_map(|n| s.basis((1, 0, n)).to_vec())
            .map(|m| SuperPoly::monomial_string(s.weil().ctx(), &m))
            .collect();
        assert_eq!(b, ["x[1]", "x*x[1]", "x^2*x[1]"]);
    }

    #[test]
    fn gradings_and_squares() {
        let s = BigradedSlice::build(&line(), 3, 10_000).unwrap();
        assert!(grading_check(&s).unwrap());
        for piece in s.pieces().collect::<Vec<_>>() {
            if let Some(t) = s.target("D1", piece) {
                if s.dim(t) > 0 && s.dim(piece) > 0 {
                    let m1 = s.matrix("D1", piece).unwrap();
                    let m2 = s.matrix("D1", t).unwrap();
                    if s.dim(s.target("D1", t).unwrap()) > 0 {
                        assert!(m2.mul(&m1).is_zero());
                    }
                }
            }
        }
        assert!(swap_conjugates_differentials(&s).unwrap());
    }

    #[test]
    fn rows_and_zeroth_row() {
        let s = BigradedSlice::build(&line(), 4, 10_000).unwrap();
        for j in 1..=3 {
            let r = exactness_report(&s, j, Differential::D1).unwrap();
            for c in &r.checks {
                assert!(c.passed, "{c:?}");
            }
        }
        let r0 = exactness_report(&s, 0, Differential::D1).unwrap();
        assert_eq!(r0.positions[0].defect, 1);
    }

    #[test]
    fn truncation_small() {
        let r = truncation_cohomology_compare(&line(), 2, 3, 10_000).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
    }
}
