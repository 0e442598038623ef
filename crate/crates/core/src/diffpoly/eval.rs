//! Floating-point evaluation of expressions on sampled jets, and the
//! specialization to a single-component (scalar) variable.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive};

use super::lin::Lin;
use super::scalar::ScalarDiffPoly;
use super::vector::VectorDiffPoly;
use super::Coeff;
use crate::parallel::{for_each_chunk_mut, ExecMode};

/// Nodes evaluated per parallel work item.
const EVAL_CHUNK: usize = 128;

#[derive(Clone, Debug)]
struct CompiledTerm {
    coeff: f64,
    // Indices into the shared dot-pair table.
    dots: Vec<usize>,
    j: usize,
}

/// Collects distinct dot pairs so that each is computed once per node.
#[derive(Clone, Debug, Default)]
struct PairTable {
    pairs: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
}

impl PairTable {
    fn intern(&mut self, a: usize, b: usize) -> usize {
        let next = self.pairs.len();
        *self.index.entry((a, b)).or_insert_with(|| {
            self.pairs.push((a, b));
            next
        })
    }

    fn evaluate(&self, jets: &[&[f64]], buf: &mut Vec<f64>) {
        buf.clear();
        for &(a, b) in &self.pairs {
            buf.push(jets[a].iter().zip(jets[b]).map(|(x, y)| x * y).sum());
        }
    }
}

fn to_f64(c: &Coeff) -> f64 {
    c.to_f64().expect("rational coefficient fits in f64")
}

/// A vector expression compiled for repeated pointwise evaluation.
///
/// A jet at one node is a slice of slices: `jets[j]` holds the `C`
/// components of `v_j` there.
#[derive(Clone, Debug)]
pub struct CompiledVector {
    terms: Vec<CompiledTerm>,
    table: PairTable,
    max_order: usize,
}

impl CompiledVector {
    pub fn new(p: &VectorDiffPoly) -> Self {
        let mut table = PairTable::default();
        let mut max_order = 0;
        let terms = p
            .terms()
            .map(|(t, c)| {
                max_order = max_order.max(t.order() as usize);
                let dots = t
                    .monomial()
                    .dots()
                    .iter()
                    .map(|d| {
                        max_order = max_order.max(d.hi() as usize);
                        table.intern(d.lo() as usize, d.hi() as usize)
                    })
                    .collect();
                CompiledTerm {
                    coeff: to_f64(c),
                    dots,
                    j: t.order() as usize,
                }
            })
            .collect();
        Self {
            terms,
            table,
            max_order,
        }
    }

    /// Highest derivative order the expression reads.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates at one node; `out` receives the `C` components.
    pub fn eval(&self, jets: &[&[f64]], out: &mut [f64]) {
        self.eval_with(jets, &mut Vec::with_capacity(self.table.pairs.len()), out);
    }

    /// [`CompiledVector::eval`] with a caller-provided scratch buffer.
    fn eval_with(&self, jets: &[&[f64]], dots: &mut Vec<f64>, out: &mut [f64]) {
        self.table.evaluate(jets, dots);
        out.iter_mut().for_each(|x| *x = 0.0);
        for t in &self.terms {
            let s = t.coeff * t.dots.iter().map(|&i| dots[i]).product::<f64>();
            for (o, x) in out.iter_mut().zip(jets[t.j]) {
                *o += s * x;
            }
        }
    }

    /// Directional derivative of the expression at `jets` along the jet `dual`
    /// (the Fréchet derivative applied to a variation whose derivatives are `dual`).
    pub fn eval_linearized(&self, jets: &[&[f64]], dual: &[&[f64]], out: &mut [f64]) {
        let mut dots = Vec::with_capacity(self.table.pairs.len());
        self.table.evaluate(jets, &mut dots);
        let ddots: Vec<f64> = self
            .table
            .pairs
            .iter()
            .map(|&(a, b)| {
                let ab: f64 = dual[a].iter().zip(jets[b]).map(|(x, y)| x * y).sum();
                let ba: f64 = jets[a].iter().zip(dual[b]).map(|(x, y)| x * y).sum();
                ab + ba
            })
            .collect();
        out.iter_mut().for_each(|x| *x = 0.0);
        for t in &self.terms {
            let prod: f64 = t.dots.iter().map(|&i| dots[i]).product();
            let mut dprod = 0.0;
            for (k, &i) in t.dots.iter().enumerate() {
                let others: f64 = t
                    .dots
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .map(|(_, &q)| dots[q])
                    .product();
                dprod += ddots[i] * others;
            }
            for ((o, x), dx) in out.iter_mut().zip(jets[t.j]).zip(dual[t.j]) {
                *o += t.coeff * (dprod * x + prod * dx);
            }
        }
    }
}

/// A scalar expression compiled for repeated pointwise evaluation.
#[derive(Clone, Debug)]
pub struct CompiledScalar {
    terms: Vec<(f64, Vec<usize>)>,
    table: PairTable,
    max_order: usize,
}

impl CompiledScalar {
    pub fn new(p: &ScalarDiffPoly) -> Self {
        let mut table = PairTable::default();
        let mut max_order = 0;
        let terms = p
            .terms()
            .map(|(m, c)| {
                let dots = m
                    .dots()
                    .iter()
                    .map(|d| {
                        max_order = max_order.max(d.hi() as usize);
                        table.intern(d.lo() as usize, d.hi() as usize)
                    })
                    .collect();
                (to_f64(c), dots)
            })
            .collect();
        Self {
            terms,
            table,
            max_order,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn eval(&self, jets: &[&[f64]]) -> f64 {
        self.eval_with(jets, &mut Vec::with_capacity(self.table.pairs.len()))
    }

    fn eval_with(&self, jets: &[&[f64]], dots: &mut Vec<f64>) -> f64 {
        self.table.evaluate(jets, dots);
        self.terms
            .iter()
            .map(|(c, ix)| c * ix.iter().map(|&i| dots[i]).product::<f64>())
            .sum()
    }
}

/// Derivative samples of a vector field on a grid: `orders[j][node·C + c]`
/// is component `c` of `v_j` at `node`.
#[derive(Clone, Debug)]
pub struct JetField {
    pub components: usize,
    pub orders: Vec<Vec<f64>>,
}

impl JetField {
    pub fn nodes(&self) -> usize {
        self.orders.first().map_or(0, |o| o.len() / self.components.max(1))
    }

    /// Fills `buf` with the jet slices at `node`.
    fn at<'a>(&'a self, node: usize, buf: &mut Vec<&'a [f64]>) {
        let c = self.components;
        buf.clear();
        buf.extend(self.orders.iter().map(|o| &o[node * c..(node + 1) * c]));
    }

    /// Evaluates a compiled vector expression at every node, flattened like the jets.
    pub fn eval_vector(&self, p: &CompiledVector, mode: ExecMode) -> Vec<f64> {
        assert!(p.max_order() < self.orders.len(), "jet too short for expression");
        let c = self.components;
        let mut out = vec![0.0; self.nodes() * c];
        for_each_chunk_mut(mode, &mut out, EVAL_CHUNK * c, |chunk, dst| {
            let (mut jets, mut dots) = (Vec::new(), Vec::new());
            for (k, o) in dst.chunks_mut(c).enumerate() {
                self.at(chunk * EVAL_CHUNK + k, &mut jets);
                p.eval_with(&jets, &mut dots, o);
            }
        });
        out
    }

    /// Evaluates a compiled scalar expression at every node.
    pub fn eval_scalar(&self, p: &CompiledScalar, mode: ExecMode) -> Vec<f64> {
        assert!(
            p.max_order() < self.orders.len() || p.terms.iter().all(|(_, d)| d.is_empty()),
            "jet too short for expression"
        );
        let mut out = vec![0.0; self.nodes()];
        for_each_chunk_mut(mode, &mut out, EVAL_CHUNK, |chunk, dst| {
            let (mut jets, mut dots) = (Vec::new(), Vec::new());
            for (k, o) in dst.iter_mut().enumerate() {
                self.at(chunk * EVAL_CHUNK + k, &mut jets);
                *o = p.eval_with(&jets, &mut dots);
            }
        });
        out
    }
}

/// A polynomial in a scalar variable `u` and its derivatives `u_j`, keyed by
/// the multiset of derivative orders (sorted descending).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ScalarSectorPoly(pub Lin<Vec<u8>>);

impl ScalarSectorPoly {
    pub fn from_terms(terms: impl IntoIterator<Item = (Vec<u8>, Coeff)>) -> Self {
        Self(
            terms
                .into_iter()
                .map(|(mut k, c)| {
                    k.sort_unstable_by(|a, b| b.cmp(a));
                    (k, c)
                })
                .collect(),
        )
    }
}

impl fmt::Display for ScalarSectorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.0.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            let mut parts = Vec::new();
            if !a.is_one() || k.is_empty() {
                parts.push(a.to_string());
            }
            let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
            for &j in k {
                *counts.entry(j).or_default() += 1;
            }
            for (j, n) in counts {
                parts.push(if n == 1 {
                    format!("u{j}")
                } else {
                    format!("u{j}^{n}")
                });
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Specializes a vector expression to one component, `<v_i, v_j> ↦ u_i u_j`.
pub fn vector_to_scalar_sector(p: &VectorDiffPoly) -> ScalarSectorPoly {
    ScalarSectorPoly::from_terms(p.terms().map(|(t, c)| {
        let mut k = t.monomial().slots().to_vec();
        k.push(t.order());
        (k, c.clone())
    }))
}

/// Specializes a scalar expression to one component.
pub fn scalar_to_scalar_sector(p: &ScalarDiffPoly) -> ScalarSectorPoly {
    ScalarSectorPoly::from_terms(p.terms().map(|(m, c)| (m.slots().to_vec(), c.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::text::{parse_scalar, parse_vector};
    use crate::diffpoly::ratio;

    #[test]
    fn vector_evaluation() {
        let p = parse_vector("v2 + 1/2*<v0,v0>*v0", 'v').unwrap();
        let c = CompiledVector::new(&p);
        assert_eq!(c.max_order(), 2);
        let v0 = [1.0, 2.0];
        let v1 = [0.0, 0.0];
        let v2 = [3.0, -1.0];
        let mut out = [0.0; 2];
        c.eval(&[&v0, &v1, &v2], &mut out);
        assert_eq!(out, [3.0 + 2.5, -1.0 + 5.0]);
    }

    #[test]
    fn linearization_matches_finite_difference() {
        let p = parse_vector("v3 + 3/2*<v0,v0>*v1 - 2*<v0,v1>^2*v2", 'v').unwrap();
        let c = CompiledVector::new(&p);
        let base: Vec<Vec<f64>> = (0..4).map(|j| vec![0.3 + j as f64, -0.7 * j as f64]).collect();
        let dir: Vec<Vec<f64>> = (0..4).map(|j| vec![0.1 * j as f64, 1.0 - 0.2 * j as f64]).collect();
        let eps = 1e-6;
        let shift = |s: f64| -> Vec<f64> {
            let jets: Vec<Vec<f64>> = base
                .iter()
                .zip(&dir)
                .map(|(b, d)| b.iter().zip(d).map(|(x, y)| x + s * y).collect())
                .collect();
            let refs: Vec<&[f64]> = jets.iter().map(|v| v.as_slice()).collect();
            let mut out = vec![0.0; 2];
            c.eval(&refs, &mut out);
            out
        };
        let (plus, minus) = (shift(eps), shift(-eps));
        let br: Vec<&[f64]> = base.iter().map(|v| v.as_slice()).collect();
        let dr: Vec<&[f64]> = dir.iter().map(|v| v.as_slice()).collect();
        let mut lin = vec![0.0; 2];
        c.eval_linearized(&br, &dr, &mut lin);
        for i in 0..2 {
            let fd = (plus[i] - minus[i]) / (2.0 * eps);
            assert!((fd - lin[i]).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn scalar_specialization() {
        let p = parse_vector("v3 + 3/2*<v0,v0>*v1", 'v').unwrap();
        let want = ScalarSectorPoly::from_terms([(vec![3], ratio(1, 1)), (vec![0, 0, 1], ratio(3, 2))]);
        assert_eq!(vector_to_scalar_sector(&p), want);
        assert_eq!(want.to_string(), "u3 + 3/2*u0^2*u1");
        let h = parse_scalar("<v0,v1>^2 - <v0,v0>*<v1,v1>", 'v').unwrap();
        assert!(scalar_to_scalar_sector(&h).0.is_zero());
    }

    #[test]
    fn field_evaluation() {
        let p = CompiledScalar::new(&parse_scalar("1/2*<v0,v0>", 'v').unwrap());
        let field = JetField {
            components: 1,
            orders: vec![vec![1.0, 2.0, 3.0]],
        };
        assert_eq!(field.eval_scalar(&p, ExecMode::Sequential), vec![0.5, 2.0, 4.5]);
    }
}
