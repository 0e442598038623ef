//! Sparse exact linear combinations over an ordered basis.

use std::collections::btree_map::{self, Entry};
use std::collections::BTreeMap;

use num_traits::Zero;

use super::Coeff;

/// `Σ c_k · k` with nonzero rational `c_k`, keyed by an ordered basis.
///
/// The largest key under `Ord` is the leading term. Equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lin<K: Ord> {
    terms: BTreeMap<K, Coeff>,
}

impl<K: Ord> Default for Lin<K> {
    fn default() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> Lin<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(k: K, c: Coeff) -> Self {
        let mut out = Self::zero();
        out.add_term(k, c);
        out
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, K, Coeff> {
        self.terms.iter()
    }

    pub fn coeff(&self, k: &K) -> Option<&Coeff> {
        self.terms.get(k)
    }

    /// The largest key and its coefficient.
    pub fn leading(&self) -> Option<(&K, &Coeff)> {
        self.terms.iter().next_back()
    }

    pub fn pop_leading(&mut self) -> Option<(K, Coeff)> {
        self.terms.pop_last()
    }

    /// Adds `c · k`, dropping the entry if it cancels.
    pub fn add_term(&mut self, k: K, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += s · other`.
    pub fn add_scaled(&mut self, other: &Lin<K>, s: &Coeff) {
        if s.is_zero() {
            return;
        }
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c * s);
        }
    }

    pub fn scaled(&self, s: &Coeff) -> Lin<K> {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    /// Rebuilds the combination through a term map that may merge keys.
    pub fn map_terms<L: Ord + Clone>(&self, mut f: impl FnMut(&K, &Coeff, &mut Lin<L>)) -> Lin<L> {
        let mut out = Lin::zero();
        for (k, c) in &self.terms {
            f(k, c, &mut out);
        }
        out
    }

    pub fn into_terms(self) -> BTreeMap<K, Coeff> {
        self.terms
    }
}

impl<K: Ord + Clone> FromIterator<(K, Coeff)> for Lin<K> {
    fn from_iter<I: IntoIterator<Item = (K, Coeff)>>(iter: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in iter {
            out.add_term(k, c);
        }
        out
    }
}

/// Implements `+`, `-`, unary `-` and scaling by `&Coeff` for a newtype
/// `$t(Lin<$k>)`.
macro_rules! linear_newtype_ops {
    ($t:ident) => {
        impl std::ops::Add for $t {
            type Output = $t;
            fn add(mut self, rhs: $t) -> $t {
                self.0.add_scaled(&rhs.0, &$crate::diffpoly::int(1));
                self
            }
        }
        impl std::ops::Add<&$t> for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                let mut out = self.clone();
                out.0.add_scaled(&rhs.0, &$crate::diffpoly::int(1));
                out
            }
        }
        impl std::ops::Sub for $t {
            type Output = $t;
            fn sub(mut self, rhs: $t) -> $t {
                self.0.add_scaled(&rhs.0, &$crate::diffpoly::int(-1));
                self
            }
        }
        impl std::ops::Sub<&$t> for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                let mut out = self.clone();
                out.0.add_scaled(&rhs.0, &$crate::diffpoly::int(-1));
                out
            }
        }
        impl std::ops::Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $t(self.0.scaled(&$crate::diffpoly::int(-1)))
            }
        }
        impl std::ops::Mul<&$crate::diffpoly::Coeff> for &$t {
            type Output = $t;
            fn mul(self, s: &$crate::diffpoly::Coeff) -> $t {
                $t(self.0.scaled(s))
            }
        }
        impl std::ops::Mul<$crate::diffpoly::Coeff> for $t {
            type Output = $t;
            fn mul(self, s: $crate::diffpoly::Coeff) -> $t {
                $t(self.0.scaled(&s))
            }
        }
        impl std::ops::AddAssign<&$t> for $t {
            fn add_assign(&mut self, rhs: &$t) {
                self.0.add_scaled(&rhs.0, &$crate::diffpoly::int(1));
            }
        }
        impl std::iter::Sum for $t {
            fn sum<I: Iterator<Item = $t>>(iter: I) -> $t {
                iter.fold($t::zero(), |a, b| a + b)
            }
        }
    };
}
pub(crate) use linear_newtype_ops;
