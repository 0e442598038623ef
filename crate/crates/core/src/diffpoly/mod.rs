//! Exact differential polynomials in a vector variable `v` and its
//! arclength derivatives `v_j = D^j v`.
//!
//! Only O(C)-invariant expressions are represented: scalars are polynomials
//! in the dot products `<v_i, v_j>`, vectors are sums of scalar × `v_j`, and
//! bivectors (needed by the cosymplectic operator) are sums of scalar ×
//! `v_a ∧ v_b`. The component count C never enters the algebra, so every
//! identity proved here holds for all C. Coefficients are exact rationals.

mod bivector;
mod echelon;
pub mod eval;
mod hierarchy;
mod lin;
mod ops;
mod scalar;
pub mod text;
mod vector;

pub use bivector::{BivectorDiffPoly, BivectorTerm};
pub use hierarchy::{constant_curvature_shift, Hierarchy, HierarchyLevel, Sector};
pub use lin::Lin;
pub use scalar::{Dot, Monomial, ScalarDiffPoly};
pub use vector::{VectorDiffPoly, VectorTerm};

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use echelon::Echelon;

/// Exact rational coefficient.
pub type Coeff = BigRational;

/// Default bound on the derivative order `j` of any `v_j`.
pub const DEFAULT_MAX_ORDER: u8 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffPolyError {
    #[error("derivative order {order} exceeds the configured maximum {cap}")]
    OrderCap { order: u32, cap: u8 },
    #[error("expression is not a total derivative: {0}")]
    NotExact(String),
    #[error("hierarchy level {levels} needs derivative order {needed}, above the maximum {cap}")]
    LevelBudget { levels: usize, needed: u32, cap: u8 },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// `n / d` as a coefficient.
pub fn ratio(n: i64, d: i64) -> Coeff {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer coefficient.
pub fn int(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

/// Common scaling weight of an expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingWeight {
    Weight(u32),
    Mixed,
    /// The zero expression has every weight.
    Zero,
}

/// Anything with a scaling weight per term.
pub trait Weighted {
    fn term_weights(&self) -> Vec<u32>;

    fn scaling_weight(&self) -> ScalingWeight {
        let w = self.term_weights();
        match w.first() {
            None => ScalingWeight::Zero,
            Some(&first) if w.iter().all(|&x| x == first) => ScalingWeight::Weight(first),
            Some(_) => ScalingWeight::Mixed,
        }
    }
}

/// The formal derivation `D`, bounded by a maximal derivative order.
pub trait TotalDerivative: Sized {
    fn total_derivative_capped(&self, cap: u8) -> Result<Self, DiffPolyError>;
}

/// Shared context: the derivative-order cap and cached echelon bases of the
/// image of `D`, one per weight, for scalars and bivectors.
///
/// The caches make repeated integration cheap; the context is `Sync` and can
/// be shared between threads.
#[derive(Debug)]
pub struct DiffAlgebra {
    max_order: u8,
    scalar_images: Mutex<HashMap<u32, Arc<Echelon<Monomial>>>>,
    bivector_images: Mutex<HashMap<u32, Arc<Echelon<BivectorTerm>>>>,
}

impl Default for DiffAlgebra {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_ORDER)
    }
}

impl DiffAlgebra {
    pub fn new(max_order: u8) -> Self {
        Self {
            max_order,
            scalar_images: Mutex::new(HashMap::new()),
            bivector_images: Mutex::new(HashMap::new()),
        }
    }

    #[inline]
    pub fn max_order(&self) -> u8 {
        self.max_order
    }

    /// `D p` for a scalar, vector or bivector expression.
    pub fn total_derivative<P: TotalDerivative>(&self, p: &P) -> Result<P, DiffPolyError> {
        p.total_derivative_capped(self.max_order)
    }

    /// `D^n p`.
    pub fn total_derivative_n<P: TotalDerivative + Clone>(
        &self,
        p: &P,
        n: usize,
    ) -> Result<P, DiffPolyError> {
        let mut out = p.clone();
        for _ in 0..n {
            out = self.total_derivative(&out)?;
        }
        Ok(out)
    }

    fn scalar_echelon(&self, weight: u32) -> Result<Arc<Echelon<Monomial>>, DiffPolyError> {
        if let Some(e) = self.scalar_images.lock().expect("cache lock").get(&weight) {
            return Ok(e.clone());
        }
        let basis = scalar::monomials_of_weight(weight.saturating_sub(1), self.max_order - 1);
        let cap = self.max_order;
        let e = Arc::new(Echelon::build(basis, |m| {
            ScalarDiffPoly::from_monomial(m.clone()).total_derivative_capped(cap).map(|p| p.0)
        })?);
        self.scalar_images
            .lock()
            .expect("cache lock")
            .insert(weight, e.clone());
        Ok(e)
    }

    fn bivector_echelon(&self, weight: u32) -> Result<Arc<Echelon<BivectorTerm>>, DiffPolyError> {
        if let Some(e) = self.bivector_images.lock().expect("cache lock").get(&weight) {
            return Ok(e.clone());
        }
        let basis = bivector::terms_of_weight(weight.saturating_sub(1), self.max_order - 1);
        let cap = self.max_order;
        let e = Arc::new(Echelon::build(basis, |t| {
            BivectorDiffPoly::from_term(t.clone()).total_derivative_capped(cap).map(|p| p.0)
        })?);
        self.bivector_images
            .lock()
            .expect("cache lock")
            .insert(weight, e.clone());
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_classification() {
        let v = VectorDiffPoly::v(0);
        assert_eq!(v.scaling_weight(), ScalingWeight::Weight(1));
        let mixed = ScalarDiffPoly::dot(0, 0) + ScalarDiffPoly::dot(0, 1);
        assert_eq!(mixed.scaling_weight(), ScalingWeight::Mixed);
        assert_eq!(ScalarDiffPoly::zero().scaling_weight(), ScalingWeight::Zero);
    }
}
