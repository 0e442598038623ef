//! Bivector-valued expressions `Σ c · m · (v_a ∧ v_b)` with `a < b`.

use std::cmp::Ordering;

use num_traits::One;

use super::lin::{linear_newtype_ops, Lin};
use super::scalar::{monomials_of_weight, Dot, Monomial};
use super::vector::{VectorDiffPoly, VectorTerm};
use super::{int, Coeff, DiffPolyError, TotalDerivative, Weighted};

/// The basis element `m · (v_a ∧ v_b)`, `a < b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BivectorTerm {
    slots: Vec<u8>,
    mono: Monomial,
    a: u8,
    b: u8,
}

impl Ord for BivectorTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.slots
            .cmp(&other.slots)
            .then_with(|| (self.b, self.a).cmp(&(other.b, other.a)))
            .then_with(|| self.mono.cmp(&other.mono))
    }
}

impl PartialOrd for BivectorTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl BivectorTerm {
    fn new(mono: Monomial, a: u8, b: u8) -> Self {
        debug_assert!(a < b);
        let mut slots = mono.slots().to_vec();
        slots.push(a);
        slots.push(b);
        slots.sort_unstable_by(|x, y| y.cmp(x));
        Self { slots, mono, a, b }
    }

    /// `m · (v_a ∧ v_b)` in canonical orientation with its sign, or `None` if `a = b`.
    pub fn oriented(mono: Monomial, a: u8, b: u8) -> Option<(Self, i64)> {
        match a.cmp(&b) {
            Ordering::Equal => None,
            Ordering::Less => Some((Self::new(mono, a, b), 1)),
            Ordering::Greater => Some((Self::new(mono, b, a), -1)),
        }
    }

    pub fn weight(&self) -> u32 {
        self.mono.weight() + 2 + self.a as u32 + self.b as u32
    }

    pub fn orders(&self) -> (u8, u8) {
        (self.a, self.b)
    }

    pub fn monomial(&self) -> &Monomial {
        &self.mono
    }
}

/// All bivector basis elements of a given weight with derivative orders at most `max_order`.
pub(crate) fn terms_of_weight(weight: u32, max_order: u8) -> Vec<BivectorTerm> {
    let mut out = Vec::new();
    for b in 1..=max_order {
        for a in 0..b {
            let own = 2 + a as u32 + b as u32;
            if own > weight {
                continue;
            }
            for m in monomials_of_weight(weight - own, max_order) {
                out.push(BivectorTerm::new(m, a, b));
            }
        }
    }
    out
}

/// A bivector differential polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BivectorDiffPoly(pub(crate) Lin<BivectorTerm>);

linear_newtype_ops!(BivectorDiffPoly);

impl BivectorDiffPoly {
    pub fn zero() -> Self {
        Self(Lin::zero())
    }

    pub fn from_term(t: BivectorTerm) -> Self {
        Self(Lin::single(t, Coeff::one()))
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BivectorTerm, &Coeff)> {
        self.0.iter()
    }

    /// `v_i ∧ p`.
    pub fn wedge_v(i: u8, p: &VectorDiffPoly) -> BivectorDiffPoly {
        let mut out = Lin::zero();
        for (t, c) in p.terms() {
            if let Some((bt, sign)) = BivectorTerm::oriented(t.monomial().clone(), i, t.order()) {
                out.add_term(bt, c * int(sign));
            }
        }
        Self(out)
    }

    /// Interior product `v_i ⌋ self`, with
    /// `v_i ⌋ (A ∧ B) = <v_i, A> B − <v_i, B> A`.
    pub fn interior_v(&self, i: u8) -> VectorDiffPoly {
        let mut out = Lin::zero();
        for (t, c) in self.0.iter() {
            out.add_term(
                VectorTerm::new(t.mono.with_dot(Dot::new(i, t.a)), t.b),
                c.clone(),
            );
            out.add_term(
                VectorTerm::new(t.mono.with_dot(Dot::new(i, t.b)), t.a),
                -c.clone(),
            );
        }
        VectorDiffPoly(out)
    }

    pub fn by_weight(&self) -> Vec<(u32, BivectorDiffPoly)> {
        let mut parts: std::collections::BTreeMap<u32, Lin<BivectorTerm>> = Default::default();
        for (t, c) in self.0.iter() {
            parts.entry(t.weight()).or_default().add_term(t.clone(), c.clone());
        }
        parts.into_iter().map(|(w, l)| (w, Self(l))).collect()
    }
}

impl TotalDerivative for BivectorDiffPoly {
    fn total_derivative_capped(&self, cap: u8) -> Result<Self, DiffPolyError> {
        let mut out = Lin::zero();
        for (t, c) in self.0.iter() {
            if t.b >= cap {
                return Err(DiffPolyError::OrderCap {
                    order: t.b as u32 + 1,
                    cap,
                });
            }
            for (a, b) in [(t.a + 1, t.b), (t.a, t.b + 1)] {
                if let Some((bt, sign)) = BivectorTerm::oriented(t.mono.clone(), a, b) {
                    out.add_term(bt, c * int(sign));
                }
            }
            let mut dm = Lin::zero();
            t.mono.derive_into(c, cap, &mut dm)?;
            for (m, cm) in dm.iter() {
                out.add_term(BivectorTerm::new(m.clone(), t.a, t.b), cm.clone());
            }
        }
        Ok(Self(out))
    }
}

impl Weighted for BivectorDiffPoly {
    fn term_weights(&self) -> Vec<u32> {
        self.0.iter().map(|(t, _)| t.weight()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::ScalarDiffPoly;

    #[test]
    fn wedge_is_antisymmetric() {
        assert!(BivectorDiffPoly::wedge_v(0, &VectorDiffPoly::v(0)).is_zero());
        let a = BivectorDiffPoly::wedge_v(0, &VectorDiffPoly::v(2));
        let b = BivectorDiffPoly::wedge_v(2, &VectorDiffPoly::v(0));
        assert!((a + b).is_zero());
    }

    #[test]
    fn derivative_of_basic_wedge() {
        // D(v ∧ v_1) = v ∧ v_2, since v_1 ∧ v_1 = 0.
        let w = BivectorDiffPoly::wedge_v(0, &VectorDiffPoly::v(1));
        let dw = w.total_derivative_capped(12).unwrap();
        assert_eq!(dw, BivectorDiffPoly::wedge_v(0, &VectorDiffPoly::v(2)));
    }

    #[test]
    fn interior_product_rule() {
        let w = BivectorDiffPoly::wedge_v(0, &VectorDiffPoly::v(1));
        let got = w.interior_v(0);
        let want = VectorDiffPoly::scalar_times_v(&ScalarDiffPoly::dot(0, 0), 1)
            - VectorDiffPoly::scalar_times_v(&ScalarDiffPoly::dot(0, 1), 0);
        assert_eq!(got, want);
    }

    #[test]
    fn enumeration_has_requested_weight() {
        for t in terms_of_weight(8, 12) {
            assert_eq!(t.weight(), 8);
        }
        assert_eq!(terms_of_weight(3, 12).len(), 1);
    }
}
