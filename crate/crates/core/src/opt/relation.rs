//! Complexity-reducing relations between pairs of contraction vectors.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

/// Floating-point comparison tolerance (relative to `max(1, |a|, |b|)`).
pub const FLOAT_TOL: f64 = 1e-12;

/// How entry `v . g` is obtained from an already computed entry `u . g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Relation {
    /// `v = u`.
    Equal,
    /// `v = -u`.
    Negation,
    /// `v = factor * u`.
    Collinear { factor: f64 },
    /// `v = sign * u + sum_k deltas[k] e_{positions[k]}`.
    Hamming {
        sign: f64,
        positions: Vec<usize>,
        deltas: Vec<f64>,
    },
}

impl Relation {
    /// Multiply-add pairs needed to apply the relation.
    pub fn cost(&self) -> usize {
        match self {
            Relation::Equal | Relation::Negation => 0,
            Relation::Collinear { .. } => 1,
            Relation::Hamming { positions, .. } => positions.len(),
        }
    }

    /// Multiplications by scalars other than `0` and `+-1`.
    pub fn discounted_cost(&self) -> usize {
        match self {
            Relation::Equal | Relation::Negation => 0,
            Relation::Collinear { factor } => usize::from(!is_unit(*factor)),
            Relation::Hamming { deltas, .. } => deltas.iter().filter(|d| !is_unit(**d)).count(),
        }
    }

    /// `v . g` from `u . g = source`.
    #[inline]
    pub fn apply(&self, source: f64, g: &[f64]) -> f64 {
        match self {
            Relation::Equal => source,
            Relation::Negation => -source,
            Relation::Collinear { factor } => factor * source,
            Relation::Hamming { sign, positions, deltas } => positions
                .iter()
                .zip(deltas)
                .fold(sign * source, |acc, (&p, &dl)| acc + dl * g[p]),
        }
    }
}

pub(crate) fn is_unit(x: f64) -> bool {
    x == 0.0 || x.abs() == 1.0
}

/// Scalars on which relations can be detected.
pub trait RelationScalar: Copy {
    fn is_zero(self) -> bool;
    fn same(self, other: Self) -> bool;
    fn neg(self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn mul(self, other: Self) -> Self;
    fn div(self, other: Self) -> Self;
    fn to_f64(self) -> f64;
}

impl RelationScalar for f64 {
    fn is_zero(self) -> bool {
        self.abs() <= FLOAT_TOL
    }
    fn same(self, other: Self) -> bool {
        (self - other).abs() <= FLOAT_TOL * self.abs().max(other.abs()).max(1.0)
    }
    fn neg(self) -> Self {
        -self
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn div(self, other: Self) -> Self {
        self / other
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl RelationScalar for Rational64 {
    fn is_zero(self) -> bool {
        *self.numer() == 0
    }
    fn same(self, other: Self) -> bool {
        self == other
    }
    fn neg(self) -> Self {
        -self
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn div(self, other: Self) -> Self {
        self / other
    }
    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Number of positions where `v` differs from `sign * u`.
fn hamming<T: RelationScalar>(u: &[T], v: &[T], negate: bool) -> usize {
    u.iter()
        .zip(v)
        .filter(|(&a, &b)| !(if negate { a.neg() } else { a }).same(b))
        .count()
}

/// `Some(alpha)` with `v = alpha u`, `alpha != 0`.
fn collinear<T: RelationScalar>(u: &[T], v: &[T]) -> Option<T> {
    let k = u.iter().position(|x| !x.is_zero())?;
    if v[k].is_zero() {
        return None;
    }
    let alpha = v[k].div(u[k]);
    u.iter().zip(v).all(|(&a, &b)| a.mul(alpha).same(b)).then_some(alpha)
}

/// Cheapest relation deriving `v` from `u`, with its weight
/// `rho(u, v) <= len`.
pub fn relation<T: RelationScalar>(u: &[T], v: &[T]) -> (usize, Relation) {
    assert_eq!(u.len(), v.len(), "relation between vectors of unequal length");
    let hp = hamming(u, v, false);
    if hp == 0 {
        return (0, Relation::Equal);
    }
    let hn = hamming(u, v, true);
    if hn == 0 {
        return (0, Relation::Negation);
    }
    if let Some(alpha) = collinear(u, v) {
        return (1, Relation::Collinear { factor: alpha.to_f64() });
    }
    let negate = hn < hp;
    let s = if negate { -1.0 } else { 1.0 };
    let mut positions = Vec::new();
    let mut deltas = Vec::new();
    for (p, (&a, &b)) in u.iter().zip(v).enumerate() {
        let su = if negate { a.neg() } else { a };
        if !su.same(b) {
            positions.push(p);
            deltas.push(b.sub(su).to_f64());
        }
    }
    (positions.len(), Relation::Hamming { sign: s, positions, deltas })
}

/// `rho(u, v)` only.
pub fn weight<T: RelationScalar>(u: &[T], v: &[T]) -> usize {
    let hp = hamming(u, v, false);
    if hp == 0 {
        return 0;
    }
    let hn = hamming(u, v, true);
    if hn == 0 {
        return 0;
    }
    if hp > 1 && hn > 1 && collinear(u, v).is_some() {
        return 1;
    }
    hp.min(hn)
}
