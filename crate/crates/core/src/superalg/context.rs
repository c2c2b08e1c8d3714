use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use serde::Serialize;

use super::AlgError;

/// ℤ/2 degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(b: u32) -> Self {
        if b % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn flip(self) -> Self {
        self + Parity::Odd
    }

    /// Koszul sign `(-1)^{self * other}` as `true` when negative.
    pub fn koszul(self, other: Parity) -> bool {
        self.is_odd() && other.is_odd()
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.bit() + rhs.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Declaration of a generator.
///
/// `nil_cap = Some(e)` imposes `x^e = 0`. Odd generators always square to
/// zero. An `invertible` generator is even, uncapped and may carry negative
/// exponents (a Laurent variable such as a formal parameter `λ`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct VarSpec {
    pub name: String,
    pub parity: Parity,
    pub nil_cap: Option<u32>,
    pub invertible: bool,
}

impl VarSpec {
    pub fn even(name: impl Into<String>) -> Self {
        VarSpec {
            name: name.into(),
            parity: Parity::Even,
            nil_cap: None,
            invertible: false,
        }
    }

    pub fn odd(name: impl Into<String>) -> Self {
        VarSpec {
            name: name.into(),
            parity: Parity::Odd,
            nil_cap: Some(2),
            invertible: false,
        }
    }

    pub fn new(name: impl Into<String>, parity: Parity) -> Self {
        match parity {
            Parity::Even => Self::even(name),
            Parity::Odd => Self::odd(name),
        }
    }

    pub fn with_cap(mut self, cap: u32) -> Self {
        self.nil_cap = Some(match self.parity {
            Parity::Odd => cap.min(2),
            Parity::Even => cap,
        });
        self
    }

    pub fn invertible(mut self) -> Self {
        self.invertible = true;
        self
    }

    /// Effective cap: odd generators are capped at 2.
    pub fn cap(&self) -> Option<u32> {
        match self.parity {
            Parity::Odd => Some(self.nil_cap.unwrap_or(2).min(2)),
            Parity::Even => self.nil_cap,
        }
    }

    /// Nilpotent generators: odd or capped.
    pub fn is_nilpotent(&self) -> bool {
        self.cap().is_some()
    }
}

/// An ordered set of generators.
///
/// Generators are stored in canonical order: all even generators first, then
/// all odd ones, each group in declaration order. The position in this order
/// is the generator's index and its sort key; Koszul signs are computed by
/// sorting odd factors into it.
///
/// A joint cap `(S, c)` kills every monomial whose total exponent over the
/// generators `S` reaches `c`; it realizes relations such as `x^{c-1}dx = 0`.
#[derive(Debug, PartialEq, Eq)]
pub struct Context {
    vars: Vec<VarSpec>,
    n_even: usize,
    index: HashMap<String, usize>,
    joint: Vec<(Vec<usize>, u32)>,
}

pub type Ctx = Arc<Context>;

impl Context {
    pub fn new(specs: Vec<VarSpec>) -> Result<Ctx, AlgError> {
        Self::with_joint_caps(specs, Vec::new())
    }

    pub fn with_joint_caps(
        specs: Vec<VarSpec>,
        joint: Vec<(Vec<String>, u32)>,
    ) -> Result<Ctx, AlgError> {
        let mut vars: Vec<VarSpec> = Vec::with_capacity(specs.len());
        let (evens, odds): (Vec<_>, Vec<_>) =
            specs.into_iter().partition(|v| v.parity == Parity::Even);
        let n_even = evens.len();
        for mut v in evens.into_iter().chain(odds) {
            if v.name.is_empty() {
                return Err(AlgError::InvalidSpec("empty generator name".into()));
            }
            if v.invertible && (v.parity == Parity::Odd || v.nil_cap.is_some()) {
                return Err(AlgError::InvalidSpec(format!(
                    "invertible generator `{}` must be even and uncapped",
                    v.name
                )));
            }
            if matches!(v.nil_cap, Some(0)) {
                return Err(AlgError::InvalidSpec(format!("zero cap on `{}`", v.name)));
            }
            if v.parity == Parity::Odd {
                v.nil_cap = v.cap();
            }
            vars.push(v);
        }
        let mut index = HashMap::with_capacity(vars.len());
        for (i, v) in vars.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(AlgError::DuplicateVariable(v.name.clone()));
            }
        }
        let joint = joint
            .into_iter()
            .map(|(names, cap)| {
                if cap == 0 {
                    return Err(AlgError::InvalidSpec("zero joint cap".into()));
                }
                let idx = names
                    .iter()
                    .map(|n| {
                        index
                            .get(n)
                            .copied()
                            .ok_or_else(|| AlgError::UnknownVariable(n.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if idx.iter().any(|&i| vars[i].invertible) {
                    return Err(AlgError::InvalidSpec(
                        "joint cap on an invertible generator".into(),
                    ));
                }
                Ok((idx, cap))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Arc::new(Context {
            vars,
            n_even,
            index,
            joint,
        }))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> &VarSpec {
        &self.vars[i]
    }

    pub fn n_even(&self) -> usize {
        self.n_even
    }

    pub fn parity(&self, i: usize) -> Parity {
        if i < self.n_even {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn index_of(&self, name: &str) -> Result<usize, AlgError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| AlgError::UnknownVariable(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Bound `B` such that any product of `B` nilpotent monomials vanishes.
    pub fn nilpotency_bound(&self) -> usize {
        self.vars
            .iter()
            .filter_map(|v| v.cap())
            .map(|c| c as usize - 1)
            .sum::<usize>()
            + 1
    }

    pub fn joint_caps(&self) -> &[(Vec<usize>, u32)] {
        &self.joint
    }

    fn joint_ok(&self, e: &[i32]) -> bool {
        self.joint
            .iter()
            .all(|(s, c)| s.iter().map(|&i| e[i]).sum::<i32>() < *c as i32)
    }

    pub fn same(a: &Ctx, b: &Ctx) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}

/// Exponent vector over a context, indexed by canonical position.
///
/// Odd entries are 0 or 1; capped entries stay below their cap; only
/// invertible generators may have negative entries.
///
/// The derived order is plain lexicographic (cheap map keys); printing uses
/// [`Monomial::graded_cmp`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub(crate) Vec<i32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn from_exponents(e: Vec<i32>) -> Self {
        Monomial(e)
    }

    pub fn exponents(&self) -> &[i32] {
        &self.0
    }

    pub fn exp(&self, i: usize) -> i32 {
        self.0[i]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> i32 {
        self.0.iter().sum()
    }

    /// Total exponent over the given positions.
    pub fn degree_in(&self, positions: &[usize]) -> i32 {
        positions.iter().map(|&i| self.0[i]).sum()
    }

    /// Parity: number of odd factors mod 2.
    pub fn parity(&self, ctx: &Context) -> Parity {
        let odd = self.0[ctx.n_even..].iter().filter(|&&e| e != 0).count();
        Parity::from_bit(odd as u32)
    }

    /// Number of odd factors strictly before position `i`.
    pub(crate) fn odd_before(&self, ctx: &Context, i: usize) -> usize {
        let start = ctx.n_even;
        if i <= start {
            return 0;
        }
        self.0[start..i].iter().filter(|&&e| e != 0).count()
    }

    /// Product `self * other` in canonical form: `None` when it vanishes,
    /// otherwise the sign (`true` = negative) and the monomial.
    pub fn mul(&self, other: &Monomial, ctx: &Context) -> Option<(bool, Monomial)> {
        let n = self.0.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..ctx.n_even {
            let e = self.0[i] + other.0[i];
            if let Some(cap) = ctx.vars[i].nil_cap {
                if e >= cap as i32 {
                    return None;
                }
            }
            out.push(e);
        }
        // Moving each odd factor of `other` left past the larger odd factors
        // of `self` costs one sign each.
        let total_self: usize = self.0[ctx.n_even..].iter().filter(|&&e| e != 0).count();
        let mut seen_self = 0usize;
        let mut swaps = 0usize;
        for i in ctx.n_even..n {
            let (a, b) = (self.0[i], other.0[i]);
            if a != 0 && b != 0 {
                return None;
            }
            if a != 0 {
                seen_self += 1;
            }
            if b != 0 {
                swaps += total_self - seen_self;
            }
            out.push(a + b);
        }
        if !ctx.joint.is_empty() && !ctx.joint_ok(&out) {
            return None;
        }
        Some((swaps % 2 == 1, Monomial(out)))
    }

    /// Whether every exponent satisfies the caps of `ctx`.
    pub fn is_valid(&self, ctx: &Context) -> bool {
        ctx.joint_ok(&self.0)
            && self.0.iter().enumerate().all(|(i, &e)| {
            let v = &ctx.vars[i];
            if e < 0 {
                return v.invertible;
            }
            match v.cap() {
                Some(c) => e < c as i32,
                None => true,
            }
        })
    }

    /// Graded order: lower total degree first, then larger leading exponents.
    pub fn graded_cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}
