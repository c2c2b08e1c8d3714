use serde::Serialize;

use super::WeilError;
use crate::rational::Q;
use crate::superalg::{Context, Ctx, Monomial, Parity, SuperPoly, VarSpec};

/// A finite-dimensional local super-commutative algebra with basis
/// `e_0 = 1, e_1, …` and structure constants `e_i e_j = Σ_k c[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalSuperAlgebra {
    labels: Vec<String>,
    parities: Vec<Parity>,
    #[serde(skip)]
    c: Vec<Vec<Vec<Q>>>,
}

impl LocalSuperAlgebra {
    /// Validates unit, parity, super-commutativity, associativity and
    /// nilpotency of the augmentation ideal.
    pub fn new(
        labels: Vec<String>,
        parities: Vec<Parity>,
        c: Vec<Vec<Vec<Q>>>,
    ) -> Result<Self, WeilError> {
        let n = labels.len();
        let bad = |s: String| Err(WeilError::InvalidAlgebra(s));
        if n == 0 || parities.len() != n {
            return bad("basis and parity lists must be nonempty and aligned".into());
        }
        if c.len() != n || c.iter().any(|r| r.len() != n || r.iter().any(|v| v.len() != n)) {
            return bad(format!("structure constants must be {n}x{n}x{n}"));
        }
        if parities[0] != Parity::Even {
            return bad("e_0 must be even".into());
        }
        let alg = LocalSuperAlgebra { labels, parities, c };
        for i in 0..n {
            for k in 0..n {
                let delta = if i == k { Q::one() } else { Q::zero() };
                if alg.c[0][i][k] != delta || alg.c[i][0][k] != delta {
                    return bad("e_0 is not a two-sided unit".into());
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let sign = alg.parities[i].koszul(alg.parities[j]);
                for k in 0..n {
                    let cij = &alg.c[i][j][k];
                    if !cij.is_zero() && alg.parities[k] != alg.parities[i] + alg.parities[j] {
                        return bad(format!("e_{i} e_{j} has a component of the wrong parity"));
                    }
                    let cji = &alg.c[j][i][k];
                    let expect = if sign { -cji } else { cji.clone() };
                    if *cij != expect {
                        return bad(format!("e_{i} and e_{j} do not super-commute"));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let left = alg.mul(&alg.mul(&alg.basis(i), &alg.basis(j)), &alg.basis(l));
                    let right = alg.mul(&alg.basis(i), &alg.mul(&alg.basis(j), &alg.basis(l)));
                    if left != right {
                        return bad(format!("product is not associative on (e_{i}, e_{j}, e_{l})"));
                    }
                }
            }
        }
        // Products of n elements of the ideal spanned by e_1.. must vanish.
        let mut span: Vec<Vec<Q>> = (1..n).map(|i| alg.basis(i)).collect();
        for _ in 0..n {
            if span.iter().all(|v| v.iter().all(Q::is_zero)) {
                return Ok(alg);
            }
            if span.iter().any(|v| !v[0].is_zero()) {
                return bad("augmentation ideal contains a unit".into());
            }
            let mut next = Vec::new();
            for v in &span {
                for i in 1..n {
                    next.push(alg.mul(v, &alg.basis(i)));
                }
            }
            next.retain(|v| v.iter().any(|x| !x.is_zero()));
            next.sort_by_key(|v| format!("{v:?}"));
            next.dedup();
            span = next;
        }
        if span.iter().all(|v| v.iter().all(Q::is_zero)) {
            Ok(alg)
        } else {
            bad("span of e_1, ... is not nilpotent".into())
        }
    }

    /// The algebra spanned by all monomials of a context whose generators
    /// are all nilpotent, in graded monomial order.
    pub fn from_context(ctx: &Ctx) -> Result<Self, WeilError> {
        let mut ranges = Vec::new();
        for v in ctx.vars() {
            match v.cap() {
                Some(c) => ranges.push(c as i32),
                None => {
                    return Err(WeilError::InvalidAlgebra(format!(
                        "generator `{}` is not nilpotent",
                        v.name
                    )))
                }
            }
        }
        let mut monos = vec![Monomial::one(ctx.len())];
        for (i, &r) in ranges.iter().enumerate() {
            let mut next = Vec::new();
            for m in &monos {
                for e in 0..r {
                    let mut m2 = m.clone();
                    m2.0[i] = e;
                    if m2.is_valid(ctx) {
                        next.push(m2);
                    }
                }
            }
            monos = next;
        }
        monos.sort_by(|a, b| a.graded_cmp(b));
        let n = monos.len();
        let index = |m: &Monomial| monos.iter().position(|x| x == m).expect("closed basis");
        let mut c = vec![vec![vec![Q::zero(); n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                if let Some((neg, m)) = monos[i].mul(&monos[j], ctx) {
                    c[i][j][index(&m)] = if neg { -Q::one() } else { Q::one() };
                }
            }
        }
        let labels = monos
            .iter()
            .map(|m| SuperPoly::monomial_string(ctx, m))
            .collect();
        let parities = monos.iter().map(|m| m.parity(ctx)).collect();
        Self::new(labels, parities, c)
    }

    /// `Λ[η_1, …, η_n]`, basis ordered by degree then index.
    pub fn exterior(n: usize) -> Self {
        let ctx =
            Context::new((1..=n).map(|i| VarSpec::odd(format!("eta{i}"))).collect()).unwrap();
        Self::from_context(&ctx).unwrap()
    }

    /// `ℚ[t]/(t^d)`.
    pub fn truncated_polynomial(d: u32) -> Self {
        let ctx = Context::new(vec![VarSpec::even("t").with_cap(d)]).unwrap();
        Self::from_context(&ctx).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn parity(&self, i: usize) -> Parity {
        self.parities[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn structure(&self, i: usize, j: usize, k: usize) -> &Q {
        &self.c[i][j][k]
    }

    pub fn basis(&self, i: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        v
    }

    pub fn mul(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let n = self.dim();
        let mut out = vec![Q::zero(); n];
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[j].is_zero() {
                    continue;
                }
                let ab = &a[i] * &b[j];
                for k in 0..n {
                    let c = &self.c[i][j][k];
                    if !c.is_zero() {
                        out[k] += &(&ab * c);
                    }
                }
            }
        }
        out
    }

    /// Applies the linear map `δ(e_i) = Σ_k d[i][k] e_k`.
    pub fn apply_linear(&self, d: &[Vec<Q>], a: &[Q]) -> Vec<Q> {
        let n = self.dim();
        let mut out = vec![Q::zero(); n];
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for k in 0..n {
                if !d[i][k].is_zero() {
                    out[k] += &(&a[i] * &d[i][k]);
                }
            }
        }
        out
    }

    /// Whether `d` is a derivation of parity `p`:
    /// `δ(e_i e_j) = δ(e_i) e_j + (-1)^{p|e_i|} e_i δ(e_j)`.
    pub fn is_derivation(&self, d: &[Vec<Q>], p: Parity) -> bool {
        let n = self.dim();
        if d.len() != n || d.iter().any(|r| r.len() != n) {
            return false;
        }
        for i in 0..n {
            for k in 0..n {
                if !d[i][k].is_zero() && self.parities[k] != self.parities[i] + p {
                    return false;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let (ei, ej) = (self.basis(i), self.basis(j));
                let lhs = self.apply_linear(d, &self.mul(&ei, &ej));
                let a = self.mul(&self.apply_linear(d, &ei), &ej);
                let mut b = self.mul(&ei, &self.apply_linear(d, &ej));
                if p.koszul(self.parities[i]) {
                    b.iter_mut().for_each(|x| *x = -&*x);
                }
                let rhs: Vec<Q> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }
}
