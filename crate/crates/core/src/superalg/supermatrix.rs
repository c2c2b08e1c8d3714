use super::{invert, AlgError, Context, Ctx, Parity, SuperPoly};
use crate::rational::Q;

/// An even square supermatrix of format `(d1|d2)`.
///
/// Blocks `A` (top left) and `D` (bottom right) have even entries, `B` and
/// `C` odd ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperMatrix {
    d1: usize,
    d2: usize,
    rows: Vec<Vec<SuperPoly>>,
}

impl SuperMatrix {
    pub fn new(d1: usize, d2: usize, rows: Vec<Vec<SuperPoly>>) -> Result<Self, AlgError> {
        let n = d1 + d2;
        if n == 0 {
            return Err(AlgError::Shape("empty supermatrix".into()));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(AlgError::Shape(format!("expected {n}x{n} entries")));
        }
        let ctx = rows[0][0].ctx().clone();
        for (i, row) in rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if !Context::same(e.ctx(), &ctx) {
                    return Err(AlgError::ContextMismatch);
                }
                let want = Parity::from_bit(((i >= d1) != (j >= d1)) as u32);
                if !e.is_zero() && e.parity() != Some(want) {
                    return Err(AlgError::Parity(format!(
                        "entry ({i},{j}) must be {want}, got `{e}`"
                    )));
                }
            }
        }
        Ok(SuperMatrix { d1, d2, rows })
    }

    pub fn identity(ctx: &Ctx, d1: usize, d2: usize) -> Self {
        let n = d1 + d2;
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            SuperPoly::one(ctx)
                        } else {
                            SuperPoly::zero(ctx)
                        }
                    })
                    .collect()
            })
            .collect();
        SuperMatrix { d1, d2, rows }
    }

    pub fn format(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn entry(&self, i: usize, j: usize) -> &SuperPoly {
        &self.rows[i][j]
    }

    pub fn ctx(&self) -> &Ctx {
        self.rows[0][0].ctx()
    }

    pub fn mul(&self, other: &SuperMatrix) -> Result<SuperMatrix, AlgError> {
        if self.format() != other.format() {
            return Err(AlgError::Shape("formats differ".into()));
        }
        let rows = mat_mul(&self.rows, &other.rows)?;
        Ok(SuperMatrix {
            d1: self.d1,
            d2: self.d2,
            rows,
        })
    }

    fn block(&self, r: std::ops::Range<usize>, c: std::ops::Range<usize>) -> Vec<Vec<SuperPoly>> {
        self.rows[r]
            .iter()
            .map(|row| row[c.clone()].to_vec())
            .collect()
    }
}

fn mat_mul(a: &[Vec<SuperPoly>], b: &[Vec<SuperPoly>]) -> Result<Vec<Vec<SuperPoly>>, AlgError> {
    let inner = b.len();
    if a.iter().any(|r| r.len() != inner) {
        return Err(AlgError::Shape("inner dimensions differ".into()));
    }
    let cols = b.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(a.len());
    for row in a {
        let mut r = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut acc = SuperPoly::zero(row[0].ctx());
            for k in 0..inner {
                acc = &acc + &(&row[k] * &b[k][j]);
            }
            r.push(acc);
        }
        out.push(r);
    }
    Ok(out)
}

/// Determinant of a matrix with pairwise commuting (even) entries.
fn det_even(m: &[Vec<SuperPoly>], ctx: &Ctx) -> SuperPoly {
    let n = m.len();
    if n == 0 {
        return SuperPoly::one(ctx);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = SuperPoly::zero(ctx);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<SuperPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * &det_even(&minor, ctx);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Inverse of an even-entry matrix via the adjugate.
fn inverse_even(m: &[Vec<SuperPoly>], ctx: &Ctx) -> Result<Vec<Vec<SuperPoly>>, AlgError> {
    let n = m.len();
    let det_inv = invert(&det_even(m, ctx))
        .map_err(|e| AlgError::NotAUnit(format!("block determinant: {e}")))?;
    let mut out = vec![vec![SuperPoly::zero(ctx); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<SuperPoly>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let cof = &det_even(&minor, ctx) * &det_inv;
            out[i][j] = if (i + j) % 2 == 0 {
                cof
            } else {
                cof.scale(&-Q::one())
            };
        }
    }
    Ok(out)
}

/// Super-determinant `det(A − B D⁻¹ C) · det(D)⁻¹`.
pub fn berezinian(g: &SuperMatrix) -> Result<SuperPoly, AlgError> {
    let ctx = g.ctx().clone();
    let (d1, d2) = g.format();
    let n = d1 + d2;
    let a = g.block(0..d1, 0..d1);
    let b = g.block(0..d1, d1..n);
    let c = g.block(d1..n, 0..d1);
    let d = g.block(d1..n, d1..n);
    let d_inv = inverse_even(&d, &ctx)?;
    let schur = if d1 == 0 || d2 == 0 {
        a
    } else {
        let bdc = mat_mul(&mat_mul(&b, &d_inv)?, &c)?;
        a.iter()
            .zip(&bdc)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
            .collect()
    };
    let det_s = det_even(&schur, &ctx);
    let det_d_inv = invert(&det_even(&d, &ctx))
        .map_err(|e| AlgError::NotAUnit(format!("det(D): {e}")))?;
    if invert(&det_s).is_err() {
        return Err(AlgError::NotAUnit(
            "det(A - B D^-1 C) is not invertible".into(),
        ));
    }
    Ok(&det_s * &det_d_inv)
}

#[cfg(test)]
mod tests {
    use super::super::VarSpec;
    use super::*;

    #[test]
    fn identity_and_one_one() {
        let ctx = Context::new(vec![VarSpec::odd("beta"), VarSpec::odd("gamma")]).unwrap();
        for (d1, d2) in [(1, 0), (0, 2), (2, 1), (1, 2)] {
            let id = SuperMatrix::identity(&ctx, d1, d2);
            assert_eq!(berezinian(&id).unwrap(), SuperPoly::one(&ctx));
        }
        let b = SuperPoly::named(&ctx, "beta").unwrap();
        let g = SuperPoly::named(&ctx, "gamma").unwrap();
        let two = SuperPoly::constant(&ctx, Q::from_int(2));
        let m = SuperMatrix::new(1, 1, vec![vec![two.clone(), b.clone()], vec![g.clone(), SuperPoly::one(&ctx)]])
            .unwrap();
        assert_eq!(berezinian(&m).unwrap(), &two - &(&b * &g));
    }

    #[test]
    fn rejects_bad_parity_and_singular() {
        let ctx = Context::new(vec![VarSpec::odd("beta")]).unwrap();
        let b = SuperPoly::named(&ctx, "beta").unwrap();
        let z = SuperPoly::zero(&ctx);
        assert!(SuperMatrix::new(1, 1, vec![vec![b.clone(), z.clone()], vec![z.clone(), z.clone()]]).is_err());
        let m = SuperMatrix::new(1, 1, vec![vec![SuperPoly::one(&ctx), b], vec![z.clone(), z]]).unwrap();
        assert!(matches!(berezinian(&m), Err(AlgError::NotAUnit(_))));
    }
}
