//! Left Caputo derivatives with lower terminal 0.
//!
//! Closed forms on power functions, the L1 scheme on uniform samples, and the
//! product-trapezoid fractional integral used by the fractional flow solvers.
//! Order α = 1 dispatches to ordinary calculus everywhere.

mod gamma;

pub use gamma::gamma;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parallel::{map_indexed, ExecMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("fractional order must satisfy 0 < alpha <= 1, got {0}")]
    InvalidOrder(f64),
    #[error("argument {0} lies outside the domain x >= 0")]
    Domain(f64),
    #[error("exponent must be finite and nonnegative, got {0}")]
    InvalidExponent(f64),
    #[error("derivative of x^{exponent} with alpha = {alpha} is singular at x = 0")]
    Singular { exponent: f64, alpha: f64 },
    #[error("grid index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("a sampled function needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("grid step must be finite and positive, got {0}")]
    InvalidStep(f64),
}

/// The order α of a Caputo derivative, restricted to (0, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    /// Ordinary (integer) calculus.
    pub const ONE: FractionalOrder = FractionalOrder(1.0);

    pub fn new(alpha: f64) -> Result<Self, FracError> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(FracError::InvalidOrder(alpha))
        }
    }

    #[inline]
    pub fn alpha(self) -> f64 {
        self.0
    }

    /// True for α = 1, where every operation falls back to integer calculus.
    #[inline]
    pub fn is_integer(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = FracError;
    fn try_from(alpha: f64) -> Result<Self, FracError> {
        Self::new(alpha)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(order: FractionalOrder) -> f64 {
        order.0
    }
}

/// The monomial `coefficient · x^exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn new(coefficient: f64, exponent: f64) -> Result<Self, FracError> {
        if !(exponent.is_finite() && exponent >= 0.0) {
            return Err(FracError::InvalidExponent(exponent));
        }
        Ok(Self {
            coefficient,
            exponent,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.exponent == 0.0 {
            self.coefficient
        } else {
            self.coefficient * x.powf(self.exponent)
        }
    }
}

/// Samples `values[i] = f(i · step)` on a uniform grid starting at the lower terminal 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    step: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self, FracError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(FracError::InvalidStep(step));
        }
        if values.len() < 3 {
            return Err(FracError::TooFewSamples(values.len()));
        }
        Ok(Self { step, values })
    }

    /// Samples `f` at `count` nodes `0, step, 2·step, …`.
    pub fn from_fn(step: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self, FracError> {
        Self::new(step, (0..count).map(|i| f(i as f64 * step)).collect())
    }

    #[inline]
    pub fn lower_terminal(&self) -> f64 {
        0.0
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn node(&self, index: usize) -> f64 {
        index as f64 * self.step
    }
}

/// Closed-form Caputo derivative of a power term at `x`.
pub fn caputo_power(order: FractionalOrder, term: &PowerTerm, x: f64) -> Result<f64, FracError> {
    if x.is_nan() || x < 0.0 {
        return Err(FracError::Domain(x));
    }
    let p = term.exponent;
    if !(p.is_finite() && p >= 0.0) {
        return Err(FracError::InvalidExponent(p));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let alpha = order.alpha();
    if x == 0.0 && p < alpha {
        return Err(FracError::Singular { exponent: p, alpha });
    }
    if order.is_integer() {
        return Ok(term.coefficient * p * pow_or_one(x, p - 1.0));
    }
    let ratio = gamma(p + 1.0) / gamma(p + 1.0 - alpha);
    Ok(term.coefficient * ratio * pow_or_one(x, p - alpha))
}

// 0^0 = 1 so that x^α at x = 0 gives the finite value Γ(α+1).
#[inline]
fn pow_or_one(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

/// The factor `x^(1−α) / Γ(2−α)` of the fractional differential `dᵅx`.
pub fn frac_differential_coeff(order: FractionalOrder, x: f64) -> Result<f64, FracError> {
    if x.is_nan() || x < 0.0 {
        return Err(FracError::Domain(x));
    }
    if order.is_integer() {
        return Ok(1.0);
    }
    let alpha = order.alpha();
    Ok(x.powf(1.0 - alpha) / gamma(2.0 - alpha))
}

/// L1 history weights `b_j = (j+1)^(1−α) − j^(1−α)` for `j < count`.
pub fn l1_weights(alpha: f64, count: usize) -> Vec<f64> {
    let e = 1.0 - alpha;
    (0..count)
        .map(|j| {
            let j = j as f64;
            (j + 1.0).powf(e) - j.powf(e)
        })
        .collect()
}

/// Caputo derivative of sampled data at one node.
///
/// For α < 1 this is the L1 scheme and needs `index ≥ 1`. For α = 1 it is a
/// second-order difference: centered in the interior, one-sided at both ends.
pub fn caputo_sampled(
    order: FractionalOrder,
    f: &SampledFunction,
    index: usize,
) -> Result<f64, FracError> {
    let n = f.len();
    let fractional_terminal = !order.is_integer() && index == 0;
    if index >= n || fractional_terminal {
        return Err(FracError::IndexOutOfRange { index, len: n });
    }
    let v = f.values();
    let h = f.step();
    if order.is_integer() {
        return Ok(second_order_difference(v, h, index));
    }
    let alpha = order.alpha();
    let b = l1_weights(alpha, index);
    Ok(l1_at(v, h, alpha, &b, index))
}

#[inline]
fn second_order_difference(v: &[f64], h: f64, i: usize) -> f64 {
    let n = v.len();
    if i == 0 {
        (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2.0 * h)
    } else {
        (v[i + 1] - v[i - 1]) / (2.0 * h)
    }
}

#[inline]
fn l1_at(v: &[f64], h: f64, alpha: f64, b: &[f64], k: usize) -> f64 {
    let mut acc = 0.0;
    for (j, bj) in b.iter().enumerate().take(k) {
        acc += bj * (v[k - j] - v[k - j - 1]);
    }
    acc * h.powf(-alpha) / gamma(2.0 - alpha)
}

/// Caputo derivative at every node of a uniformly sampled line.
///
/// The terminal node gets 0 for α < 1, since the derivative is not defined
/// there from an empty history. Needs at least 3 samples.
pub fn caputo_line(order: FractionalOrder, step: f64, values: &[f64]) -> Result<Vec<f64>, FracError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(FracError::InvalidStep(step));
    }
    let n = values.len();
    if n < 3 {
        return Err(FracError::TooFewSamples(n));
    }
    if order.is_integer() {
        return Ok((0..n)
            .map(|i| second_order_difference(values, step, i))
            .collect());
    }
    let alpha = order.alpha();
    let b = l1_weights(alpha, n);
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        *o = l1_at(values, step, alpha, &b, k);
    }
    Ok(out)
}

/// Riemann–Liouville integral `I^β` on a uniform grid from 0, by product
/// trapezoid quadrature (piecewise-linear interpolation of the integrand).
///
/// The weights are precomputed once per grid length, so repeated application
/// costs one dense lower-triangular sweep. β = 0 is the identity.
#[derive(Clone, Debug)]
pub struct FractionalIntegrator {
    beta: f64,
    scale: f64,
    // interior[m] is the weight of f_{k−m} for 1 ≤ m ≤ k−1.
    interior: Vec<f64>,
    // first[k] is the weight of f_0 at node k.
    first: Vec<f64>,
}

impl FractionalIntegrator {
    pub fn new(beta: f64, step: f64, len: usize) -> Result<Self, FracError> {
        if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
            return Err(FracError::InvalidOrder(beta));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(FracError::InvalidStep(step));
        }
        let e = beta + 1.0;
        let interior = (0..len)
            .map(|m| {
                if m == 0 {
                    1.0
                } else {
                    let m = m as f64;
                    (m + 1.0).powf(e) - 2.0 * m.powf(e) + (m - 1.0).powf(e)
                }
            })
            .collect();
        let first = (0..len)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    let k = k as f64;
                    (k - 1.0).powf(e) - (k - beta - 1.0) * k.powf(beta)
                }
            })
            .collect();
        Ok(Self {
            beta,
            scale: step.powf(beta) / gamma(beta + 2.0),
            interior,
            first,
        })
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.first.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// Applies `I^β` to `values`, which must have the configured length.
    pub fn apply(&self, mode: ExecMode, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.len(), "sample count mismatch");
        if self.beta == 0.0 {
            return values.to_vec();
        }
        map_indexed(mode, values.len(), |k| self.at(values, k))
    }

    /// Quadrature weights at node `k`, unscaled: `(w_0, [w_1..w_{k−1}] by lag, w_k)`.
    /// `I^β f (x_k) = scale · (first_k f_0 + Σ_{m=1}^{k−1} interior_m f_{k−m} + f_k)`.
    pub(crate) fn scale(&self) -> f64 {
        self.scale
    }

    pub(crate) fn first_weight(&self, k: usize) -> f64 {
        self.first[k]
    }

    pub(crate) fn lag_weight(&self, m: usize) -> f64 {
        self.interior[m]
    }

    fn at(&self, values: &[f64], k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let mut acc = self.first[k] * values[0] + values[k];
        for m in 1..k {
            acc += self.interior[m] * values[k - m];
        }
        acc * self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ord(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn order_bounds() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.0 + 1e-12).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(FractionalOrder::new(1.0).unwrap().is_integer());
        assert!(!FractionalOrder::new(0.999).unwrap().is_integer());
    }

    #[test]
    fn power_examples() {
        let one = PowerTerm::new(1.0, 0.0).unwrap();
        assert_eq!(caputo_power(ord(0.5), &one, 2.0).unwrap(), 0.0);
        let sq = PowerTerm::new(1.0, 2.0).unwrap();
        assert_eq!(caputo_power(FractionalOrder::ONE, &sq, 3.0).unwrap(), 6.0);
        let lin = PowerTerm::new(1.0, 1.0).unwrap();
        let d = caputo_power(ord(0.5), &lin, 1.0).unwrap();
        assert!((d - 2.0 / PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn power_errors() {
        let t = PowerTerm::new(1.0, 0.3).unwrap();
        assert!(matches!(
            caputo_power(ord(0.5), &t, -1.0),
            Err(FracError::Domain(_))
        ));
        assert!(matches!(
            caputo_power(ord(0.5), &t, 0.0),
            Err(FracError::Singular { .. })
        ));
        assert!(caputo_power(ord(0.2), &t, 0.0).unwrap() == 0.0);
        assert!(PowerTerm::new(1.0, -0.5).is_err());
    }

    #[test]
    fn differential_coeff_examples() {
        assert_eq!(frac_differential_coeff(FractionalOrder::ONE, 7.3).unwrap(), 1.0);
        let c = frac_differential_coeff(ord(0.5), 1.0).unwrap();
        assert!((c - 1.0 / gamma(1.5)).abs() < 1e-14);
        assert_eq!(frac_differential_coeff(ord(0.5), 0.0).unwrap(), 0.0);
        assert!(frac_differential_coeff(ord(0.5), -0.1).is_err());
    }

    #[test]
    fn constants_are_annihilated() {
        let f = SampledFunction::new(0.1, vec![5.0; 5]).unwrap();
        for &a in &[0.1, 0.5, 0.9, 1.0] {
            for i in 1..5 {
                assert!(caputo_sampled(ord(a), &f, i).unwrap().abs() <= 1e-12);
            }
        }
        assert_eq!(caputo_sampled(FractionalOrder::ONE, &f, 0).unwrap(), 0.0);
    }

    #[test]
    fn sampled_linear_function() {
        let f = SampledFunction::from_fn(1e-3, 1001, |x| x).unwrap();
        let d = caputo_sampled(ord(0.5), &f, 1000).unwrap();
        assert!((d - 1.128379).abs() < 1e-3);
    }

    #[test]
    fn sampled_integer_quadratic() {
        let f = SampledFunction::from_fn(0.01, 101, |x| x * x).unwrap();
        let d = caputo_sampled(FractionalOrder::ONE, &f, 50).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
        let end = caputo_sampled(FractionalOrder::ONE, &f, 100).unwrap();
        assert!((end - 2.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_index_errors() {
        let f = SampledFunction::new(0.1, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(caputo_sampled(ord(0.5), &f, 0).is_err());
        assert!(caputo_sampled(ord(0.5), &f, 3).is_err());
        assert!(SampledFunction::new(0.1, vec![1.0, 2.0]).is_err());
        assert!(SampledFunction::new(0.0, vec![1.0; 3]).is_err());
    }

    #[test]
    fn line_matches_pointwise() {
        let f = SampledFunction::from_fn(0.05, 40, |x| x.sin() + x * x).unwrap();
        for &a in &[0.4, 1.0] {
            let line = caputo_line(ord(a), f.step(), f.values()).unwrap();
            for (i, v) in line.iter().enumerate().skip(1) {
                assert_eq!(*v, caputo_sampled(ord(a), &f, i).unwrap());
            }
        }
    }

    #[test]
    fn integral_of_constant() {
        // I^β 1 = x^β / Γ(β+1), reproduced exactly by linear interpolation.
        let beta = 0.3;
        let h = 0.01;
        let n = 101;
        let int = FractionalIntegrator::new(beta, h, n).unwrap();
        let out = int.apply(ExecMode::Sequential, &vec![1.0; n]);
        for (k, v) in out.iter().enumerate() {
            let x = k as f64 * h;
            let exact = x.powf(beta) / gamma(beta + 1.0);
            assert!((v - exact).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn integral_zero_order_is_identity() {
        let int = FractionalIntegrator::new(0.0, 0.1, 4).unwrap();
        assert_eq!(int.apply(ExecMode::Parallel, &[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0, 3.0, 4.0]);
    }
}
