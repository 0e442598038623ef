//! Vector-valued expressions `Σ c · (Π <v_i, v_j>) · v_k`.

use std::cmp::Ordering;

use num_traits::One;

use super::lin::{linear_newtype_ops, Lin};
use super::scalar::{Dot, Monomial, ScalarDiffPoly};
use super::{int, Coeff, DiffPolyError, TotalDerivative, Weighted};

/// The basis element `m · v_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorTerm {
    slots: Vec<u8>,
    mono: Monomial,
    j: u8,
}

impl Ord for VectorTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.slots
            .cmp(&other.slots)
            .then_with(|| self.j.cmp(&other.j))
            .then_with(|| self.mono.cmp(&other.mono))
    }
}

impl PartialOrd for VectorTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl VectorTerm {
    pub fn new(mono: Monomial, j: u8) -> Self {
        let mut slots = mono.slots().to_vec();
        slots.push(j);
        slots.sort_unstable_by(|a, b| b.cmp(a));
        Self { slots, mono, j }
    }

    #[inline]
    pub fn monomial(&self) -> &Monomial {
        &self.mono
    }

    /// Derivative order of the vector factor.
    #[inline]
    pub fn order(&self) -> u8 {
        self.j
    }

    pub fn weight(&self) -> u32 {
        self.mono.weight() + 1 + self.j as u32
    }

    pub fn degree(&self) -> usize {
        self.mono.degree() + 1
    }
}

/// A vector differential polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct VectorDiffPoly(pub(crate) Lin<VectorTerm>);

linear_newtype_ops!(VectorDiffPoly);

impl VectorDiffPoly {
    pub fn zero() -> Self {
        Self(Lin::zero())
    }

    /// `v_j`.
    pub fn v(j: u8) -> Self {
        Self(Lin::single(VectorTerm::new(Monomial::one(), j), Coeff::one()))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VectorTerm, Coeff)>) -> Self {
        Self(terms.into_iter().collect())
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VectorTerm, &Coeff)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `s · self` for a scalar expression `s`.
    pub fn scale_by(&self, s: &ScalarDiffPoly) -> VectorDiffPoly {
        let mut out = Lin::zero();
        for (t, c) in self.0.iter() {
            for (m, cm) in s.terms() {
                out.add_term(VectorTerm::new(t.mono.mul(m), t.j), c * cm);
            }
        }
        Self(out)
    }

    /// `s · v_j`.
    pub fn scalar_times_v(s: &ScalarDiffPoly, j: u8) -> VectorDiffPoly {
        Self::v(j).scale_by(s)
    }

    /// The scalar coefficient of `v_j`.
    pub fn coefficient_of(&self, j: u8) -> ScalarDiffPoly {
        ScalarDiffPoly::from_terms(
            self.0
                .iter()
                .filter(|(t, _)| t.j == j)
                .map(|(t, c)| (t.mono.clone(), c.clone())),
        )
    }

    /// `<v_i, self>`.
    pub fn dot_with_v(&self, i: u8) -> ScalarDiffPoly {
        ScalarDiffPoly(self.0.map_terms(|t, c, out| {
            out.add_term(t.mono.with_dot(Dot::new(i, t.j)), c.clone())
        }))
    }

    /// `<self, other>`.
    pub fn dot(&self, other: &VectorDiffPoly) -> ScalarDiffPoly {
        let mut out = Lin::zero();
        for (a, ca) in self.0.iter() {
            for (b, cb) in other.0.iter() {
                let m = a.mono.mul(&b.mono).with_dot(Dot::new(a.j, b.j));
                out.add_term(m, ca * cb);
            }
        }
        ScalarDiffPoly(out)
    }

    pub fn max_order(&self) -> Option<u8> {
        self.0
            .iter()
            .map(|(t, _)| t.slots[0])
            .max()
    }

    /// Splits into pieces homogeneous in the polynomial degree in `v`.
    pub fn by_degree(&self) -> Vec<(usize, VectorDiffPoly)> {
        let mut parts: std::collections::BTreeMap<usize, Lin<VectorTerm>> = Default::default();
        for (t, c) in self.0.iter() {
            parts.entry(t.degree()).or_default().add_term(t.clone(), c.clone());
        }
        parts.into_iter().map(|(d, l)| (d, Self(l))).collect()
    }

    pub fn neg(&self) -> VectorDiffPoly {
        self * &int(-1)
    }
}

impl TotalDerivative for VectorDiffPoly {
    fn total_derivative_capped(&self, cap: u8) -> Result<Self, DiffPolyError> {
        let mut out = Lin::zero();
        for (t, c) in self.0.iter() {
            if t.j >= cap {
                return Err(DiffPolyError::OrderCap {
                    order: t.j as u32 + 1,
                    cap,
                });
            }
            out.add_term(VectorTerm::new(t.mono.clone(), t.j + 1), c.clone());
            let mut dm = Lin::zero();
            t.mono.derive_into(c, cap, &mut dm)?;
            for (m, cm) in dm.iter() {
                out.add_term(VectorTerm::new(m.clone(), t.j), cm.clone());
            }
        }
        Ok(Self(out))
    }
}

impl Weighted for VectorDiffPoly {
    fn term_weights(&self) -> Vec<u32> {
        self.0.iter().map(|(t, _)| t.weight()).collect()
    }
}
