//! Scalar invariants: polynomials in the dot products `<v_i, v_j>`.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::lin::{linear_newtype_ops, Lin};
use super::{int, Coeff, DiffPolyError, TotalDerivative, Weighted};

/// The invariant `<v_lo, v_hi>` with `lo ≤ hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dot {
    hi: u8,
    lo: u8,
}

impl Dot {
    pub fn new(i: u8, j: u8) -> Self {
        Self {
            hi: i.max(j),
            lo: i.min(j),
        }
    }

    #[inline]
    pub fn lo(self) -> u8 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> u8 {
        self.hi
    }

    /// `2 + i + j`.
    #[inline]
    pub fn weight(self) -> u32 {
        2 + self.hi as u32 + self.lo as u32
    }
}

/// A product of dot invariants, kept sorted (largest factor first).
///
/// Monomials are ordered by their derivative orders sorted descending and
/// compared lexicographically, so the leading monomial of an expression is
/// the one carrying the highest derivatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    slots: Vec<u8>,
    dots: Vec<Dot>,
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.slots
            .cmp(&other.slots)
            .then_with(|| self.dots.cmp(&other.dots))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn new(mut dots: Vec<Dot>) -> Self {
        dots.sort_unstable_by(|a, b| b.cmp(a));
        let mut slots: Vec<u8> = dots.iter().flat_map(|d| [d.hi, d.lo]).collect();
        slots.sort_unstable_by(|a, b| b.cmp(a));
        Self { slots, dots }
    }

    #[inline]
    pub fn dots(&self) -> &[Dot] {
        &self.dots
    }

    /// Derivative orders of every vector slot, sorted descending.
    #[inline]
    pub fn slots(&self) -> &[u8] {
        &self.slots
    }

    #[inline]
    pub fn is_one(&self) -> bool {
        self.dots.is_empty()
    }

    /// Number of `v` factors, i.e. the polynomial degree in `v`.
    #[inline]
    pub fn degree(&self) -> usize {
        self.slots.len()
    }

    pub fn weight(&self) -> u32 {
        self.dots.iter().map(|d| d.weight()).sum()
    }

    pub fn max_order(&self) -> Option<u8> {
        self.slots.first().copied()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut dots = self.dots.clone();
        dots.extend_from_slice(&other.dots);
        Monomial::new(dots)
    }

    pub fn with_dot(&self, d: Dot) -> Monomial {
        let mut dots = self.dots.clone();
        dots.push(d);
        Monomial::new(dots)
    }

    /// The monomial with the factor at `pos` removed.
    pub fn without(&self, pos: usize) -> Monomial {
        let mut dots = self.dots.clone();
        dots.remove(pos);
        Monomial::new(dots)
    }

    /// Adds `c · D(self)` to `out`.
    pub(crate) fn derive_into(
        &self,
        c: &Coeff,
        cap: u8,
        out: &mut Lin<Monomial>,
    ) -> Result<(), DiffPolyError> {
        for (pos, d) in self.dots.iter().enumerate() {
            if d.hi >= cap {
                return Err(DiffPolyError::OrderCap {
                    order: d.hi as u32 + 1,
                    cap,
                });
            }
            let rest = self.without(pos);
            out.add_term(rest.with_dot(Dot::new(d.lo + 1, d.hi)), c.clone());
            out.add_term(rest.with_dot(Dot::new(d.lo, d.hi + 1)), c.clone());
        }
        Ok(())
    }
}

/// All monomials of a given weight whose derivative orders are at most `max_order`.
pub(crate) fn monomials_of_weight(weight: u32, max_order: u8) -> Vec<Monomial> {
    // Candidate factors in decreasing order; multisets are built non-increasing.
    let mut factors = Vec::new();
    for hi in 0..=max_order {
        for lo in 0..=hi {
            let d = Dot::new(lo, hi);
            if d.weight() <= weight {
                factors.push(d);
            }
        }
    }
    factors.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        factors: &[Dot],
        start: usize,
        remaining: u32,
        current: &mut Vec<Dot>,
        out: &mut Vec<Monomial>,
    ) {
        if remaining == 0 {
            out.push(Monomial::new(current.clone()));
            return;
        }
        for i in start..factors.len() {
            let w = factors[i].weight();
            if w <= remaining {
                current.push(factors[i]);
                rec(factors, i, remaining - w, current, out);
                current.pop();
            }
        }
    }
    rec(&factors, 0, weight, &mut current, &mut out);
    out
}

/// A scalar differential polynomial `Σ c · Π <v_i, v_j>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ScalarDiffPoly(pub(crate) Lin<Monomial>);

linear_newtype_ops!(ScalarDiffPoly);

impl ScalarDiffPoly {
    pub fn zero() -> Self {
        Self(Lin::zero())
    }

    pub fn constant(c: Coeff) -> Self {
        Self(Lin::single(Monomial::one(), c))
    }

    /// `<v_i, v_j>`.
    pub fn dot(i: u8, j: u8) -> Self {
        Self::from_monomial(Monomial::new(vec![Dot::new(i, j)]))
    }

    pub fn from_monomial(m: Monomial) -> Self {
        Self(Lin::single(m, Coeff::one()))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Coeff)>) -> Self {
        Self(terms.into_iter().collect())
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The coefficient of the constant monomial.
    pub fn constant_term(&self) -> Coeff {
        self.0.coeff(&Monomial::one()).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn mul(&self, other: &ScalarDiffPoly) -> ScalarDiffPoly {
        let mut out = Lin::zero();
        for (a, ca) in self.0.iter() {
            for (b, cb) in other.0.iter() {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        Self(out)
    }

    pub fn pow(&self, e: u32) -> ScalarDiffPoly {
        (0..e).fold(Self::constant(int(1)), |acc, _| acc.mul(self))
    }

    /// Highest derivative order present, if any vector factor appears.
    pub fn max_order(&self) -> Option<u8> {
        self.0.iter().filter_map(|(m, _)| m.max_order()).max()
    }

    /// Splits into homogeneous pieces by weight, ascending.
    pub fn by_weight(&self) -> Vec<(u32, ScalarDiffPoly)> {
        let mut parts: std::collections::BTreeMap<u32, Lin<Monomial>> = Default::default();
        for (m, c) in self.0.iter() {
            parts.entry(m.weight()).or_default().add_term(m.clone(), c.clone());
        }
        parts.into_iter().map(|(w, l)| (w, Self(l))).collect()
    }
}

impl TotalDerivative for ScalarDiffPoly {
    fn total_derivative_capped(&self, cap: u8) -> Result<Self, DiffPolyError> {
        let mut out = Lin::zero();
        for (m, c) in self.0.iter() {
            m.derive_into(c, cap, &mut out)?;
        }
        Ok(Self(out))
    }
}

impl Weighted for ScalarDiffPoly {
    fn term_weights(&self) -> Vec<u32> {
        self.0.iter().map(|(m, _)| m.weight()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::ratio;

    fn d(p: &ScalarDiffPoly) -> ScalarDiffPoly {
        p.total_derivative_capped(12).unwrap()
    }

    #[test]
    fn derivative_of_norm() {
        let vv = ScalarDiffPoly::dot(0, 0);
        assert_eq!(d(&vv), &ScalarDiffPoly::dot(0, 1) * &int(2));
    }

    #[test]
    fn derivative_of_product() {
        let p = ScalarDiffPoly::dot(0, 0).mul(&ScalarDiffPoly::dot(0, 1));
        let want = &ScalarDiffPoly::dot(0, 1).pow(2) * &int(2)
            + ScalarDiffPoly::dot(0, 0).mul(&ScalarDiffPoly::dot(1, 1))
            + ScalarDiffPoly::dot(0, 0).mul(&ScalarDiffPoly::dot(0, 2));
        assert_eq!(d(&p), want);
    }

    #[test]
    fn derivative_raises_weight_by_one() {
        let p = &ScalarDiffPoly::dot(1, 3).mul(&ScalarDiffPoly::dot(0, 0)) * &ratio(3, 7);
        assert_eq!(p.scaling_weight(), crate::diffpoly::ScalingWeight::Weight(8));
        assert_eq!(d(&p).scaling_weight(), crate::diffpoly::ScalingWeight::Weight(9));
    }

    #[test]
    fn constants_differentiate_to_zero() {
        assert!(d(&ScalarDiffPoly::constant(int(5))).is_zero());
    }

    #[test]
    fn cap_is_enforced() {
        let p = ScalarDiffPoly::dot(0, 3);
        assert!(matches!(
            p.total_derivative_capped(3),
            Err(DiffPolyError::OrderCap { order: 4, cap: 3 })
        ));
    }

    #[test]
    fn monomial_enumeration_counts() {
        let counts: Vec<usize> = (2..=7).map(|w| monomials_of_weight(w, 12).len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 3, 7, 8]);
        for m in monomials_of_weight(9, 12) {
            assert_eq!(m.weight(), 9);
        }
    }

    #[test]
    fn leading_monomial_has_highest_derivative() {
        let p = ScalarDiffPoly::dot(2, 2) + ScalarDiffPoly::dot(0, 4) + ScalarDiffPoly::dot(1, 3);
        let (lead, _) = p.0.leading().unwrap();
        assert_eq!(lead.dots(), &[Dot::new(0, 4)]);
    }
}
