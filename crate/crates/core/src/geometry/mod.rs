//! N-adapted geometry on a uniformly sampled chart `u = (x^1..x^n, y^1..y^m)`.
//!
//! All partial derivatives are left Caputo derivatives along coordinate lines
//! (ordinary second-order differences at α = 1). Results carry a margin: the
//! connection is trusted on nodes at least one step from every face, the
//! curvature on nodes at least two steps away.

mod connection;
mod curvature;
pub mod fixtures;
pub mod io;

pub use connection::{anholonomy, canonical_dconnection, levi_civita, torsion, DConnection};
pub use curvature::{curvature, ricci_scalar_einstein, CurvatureBundle, RicciReport};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::frac::{caputo_line, FracError, FractionalOrder};
use crate::parallel::{map_indexed, ExecMode};

/// A scalar field sampled at every chart node, in row-major node order.
pub type Field = Vec<f64>;

/// Margin (in grid steps) on which connection coefficients are trusted.
pub const CONNECTION_MARGIN: usize = 1;
/// Margin on which torsion, curvature and their contractions are trusted.
pub const CURVATURE_MARGIN: usize = 2;

const DET_GUARD: f64 = 1e-10;
const CONDITION_GUARD: f64 = 1e10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("field has {got} samples, chart has {want} nodes")]
    FieldSize { got: usize, want: usize },
    #[error("{block}-block of the metric is not symmetric at node {node}")]
    NotSymmetric { block: &'static str, node: usize },
    #[error("{block}-block of the metric is singular or ill-conditioned at node {node}")]
    SingularMetric { block: &'static str, node: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("node {node} is too close to the boundary for direction {direction}")]
    StencilOutOfRange { node: usize, direction: usize },
    #[error(transparent)]
    Frac(#[from] FracError),
}

/// One uniformly sampled coordinate axis starting at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub step: f64,
    pub count: usize,
}

/// The sampled chart: `n` horizontal and `m` vertical axes and the derivative order.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    n: usize,
    m: usize,
    axes: Vec<Axis>,
    order: FractionalOrder,
    strides: Vec<usize>,
}

impl ChartSpec {
    pub fn new(n: usize, m: usize, axes: Vec<Axis>, order: FractionalOrder) -> Result<Self, GeometryError> {
        if n == 0 || m == 0 {
            return Err(GeometryError::InvalidChart("n and m must be at least 1".into()));
        }
        if axes.len() != n + m {
            return Err(GeometryError::InvalidChart(format!(
                "expected {} axes, got {}",
                n + m,
                axes.len()
            )));
        }
        for (d, a) in axes.iter().enumerate() {
            if !(a.step.is_finite() && a.step > 0.0) {
                return Err(GeometryError::InvalidChart(format!("axis {d}: step must be positive")));
            }
            if a.count < 5 {
                return Err(GeometryError::InvalidChart(format!("axis {d}: need at least 5 nodes")));
            }
        }
        let mut strides = vec![1; axes.len()];
        for d in (0..axes.len() - 1).rev() {
            strides[d] = strides[d + 1] * axes[d + 1].count;
        }
        Ok(Self {
            n,
            m,
            axes,
            order,
            strides,
        })
    }

    /// Same axes on every direction.
    pub fn uniform(n: usize, m: usize, step: f64, count: usize, order: FractionalOrder) -> Result<Self, GeometryError> {
        Self::new(n, m, vec![Axis { step, count }; n + m], order)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total dimension `n + m`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    #[inline]
    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    #[inline]
    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        self.axes
            .iter()
            .zip(&self.strides)
            .map(|(a, s)| (node / s) % a.count)
            .collect()
    }

    pub fn node_of(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coordinate(&self, node: usize, d: usize) -> f64 {
        ((node / self.strides[d]) % self.axes[d].count) as f64 * self.axes[d].step
    }

    pub fn coordinates(&self, node: usize) -> Vec<f64> {
        (0..self.dim()).map(|d| self.coordinate(node, d)).collect()
    }

    /// The coordinate function `u^d` as a field.
    pub fn coordinate_field(&self, d: usize) -> Field {
        (0..self.node_count()).map(|k| self.coordinate(k, d)).collect()
    }

    /// Samples `f(u)` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Field {
        (0..self.node_count()).map(|k| f(&self.coordinates(k))).collect()
    }

    pub fn is_interior(&self, node: usize, margin: usize) -> bool {
        self.multi_index(node)
            .iter()
            .zip(&self.axes)
            .all(|(&i, a)| i >= margin && i + margin < a.count)
    }

    pub fn interior_nodes(&self, margin: usize) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&k| self.is_interior(k, margin))
            .collect()
    }

    fn check_field(&self, f: &[f64]) -> Result<(), GeometryError> {
        if f.len() != self.node_count() {
            return Err(GeometryError::FieldSize {
                got: f.len(),
                want: self.node_count(),
            });
        }
        Ok(())
    }

    /// Caputo partial derivative of `f` along axis `d` at every node.
    pub fn partial(&self, f: &[f64], d: usize, mode: ExecMode) -> Result<Field, GeometryError> {
        self.check_field(f)?;
        let count = self.axes[d].count;
        let stride = self.strides[d];
        let lines = self.node_count() / count;
        // Line starts: every node whose index along d is zero.
        let starts: Vec<usize> = (0..self.node_count())
            .filter(|&k| (k / stride) % count == 0)
            .collect();
        debug_assert_eq!(starts.len(), lines);
        let step = self.axes[d].step;
        let order = self.order;
        let per_line = map_indexed(mode, lines, |l| {
            let s = starts[l];
            let vals: Vec<f64> = (0..count).map(|i| f[s + i * stride]).collect();
            caputo_line(order, step, &vals)
        });
        let mut out = vec![0.0; f.len()];
        for (l, res) in per_line.into_iter().enumerate() {
            let s = starts[l];
            for (i, v) in res?.into_iter().enumerate() {
                out[s + i * stride] = v;
            }
        }
        Ok(out)
    }

    /// Caputo partial derivative along axis `d` at a single node.
    pub fn partial_at(&self, f: &[f64], d: usize, node: usize) -> Result<f64, GeometryError> {
        self.check_field(f)?;
        let idx = self.multi_index(node);
        let count = self.axes[d].count;
        if idx[d] == 0 || idx[d] + 1 >= count {
            return Err(GeometryError::StencilOutOfRange { node, direction: d });
        }
        let stride = self.strides[d];
        let s = node - idx[d] * stride;
        let vals: Vec<f64> = (0..count).map(|i| f[s + i * stride]).collect();
        Ok(caputo_line(self.order, self.axes[d].step, &vals)?[idx[d]])
    }
}

/// The N-connection coefficients `N_i^a`, one field per pair.
#[derive(Clone, Debug, PartialEq)]
pub struct NConnection {
    n: usize,
    m: usize,
    coeffs: Vec<Field>,
}

impl NConnection {
    pub fn zero(chart: &ChartSpec) -> Self {
        Self {
            n: chart.n(),
            m: chart.m(),
            coeffs: vec![vec![0.0; chart.node_count()]; chart.n() * chart.m()],
        }
    }

    /// `coeffs[i·m + a]` holds `N_i^a`.
    pub fn new(chart: &ChartSpec, coeffs: Vec<Field>) -> Result<Self, GeometryError> {
        if coeffs.len() != chart.n() * chart.m() {
            return Err(GeometryError::InvalidChart(format!(
                "expected {} N-connection fields",
                chart.n() * chart.m()
            )));
        }
        for c in &coeffs {
            chart.check_field(c)?;
            if c.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite("N-connection"));
            }
        }
        Ok(Self {
            n: chart.n(),
            m: chart.m(),
            coeffs,
        })
    }

    /// Samples `N_i^a = f(i, a, u)`.
    pub fn from_fn(chart: &ChartSpec, f: impl Fn(usize, usize, &[f64]) -> f64) -> Result<Self, GeometryError> {
        let mut coeffs = Vec::new();
        for i in 0..chart.n() {
            for a in 0..chart.m() {
                coeffs.push(chart.sample(|u| f(i, a, u)));
            }
        }
        Self::new(chart, coeffs)
    }

    #[inline]
    pub fn get(&self, i: usize, a: usize) -> &Field {
        &self.coeffs[i * self.m + a]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// Block-diagonal d-metric `g = g_ij e^i e^j + g_ab e^a e^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct DMetric {
    n: usize,
    m: usize,
    h: Vec<Field>,
    v: Vec<Field>,
}

impl DMetric {
    /// Full row-major blocks: `h[i·n + j]`, `v[a·m + b]`.
    pub fn new(chart: &ChartSpec, h: Vec<Field>, v: Vec<Field>) -> Result<Self, GeometryError> {
        let (n, m) = (chart.n(), chart.m());
        if h.len() != n * n || v.len() != m * m {
            return Err(GeometryError::InvalidChart("metric block sizes do not match n, m".into()));
        }
        for f in h.iter().chain(&v) {
            chart.check_field(f)?;
            if f.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite("metric"));
            }
        }
        let g = Self { n, m, h, v };
        for node in 0..chart.node_count() {
            for (block, size, fields) in [("h", n, &g.h), ("v", m, &g.v)] {
                for r in 0..size {
                    for c in 0..r {
                        let (x, y) = (fields[r * size + c][node], fields[c * size + r][node]);
                        if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                            return Err(GeometryError::NotSymmetric { block, node });
                        }
                    }
                }
                let a = DMatrix::from_fn(size, size, |r, c| fields[r * size + c][node]);
                if a.determinant().abs() <= DET_GUARD {
                    return Err(GeometryError::SingularMetric { block, node });
                }
            }
        }
        Ok(g)
    }

    /// Samples the blocks from `fh(i, j, u)` and `fv(a, b, u)` (only `i ≤ j`
    /// is evaluated; the rest is mirrored).
    pub fn from_fn(
        chart: &ChartSpec,
        fh: impl Fn(usize, usize, &[f64]) -> f64,
        fv: impl Fn(usize, usize, &[f64]) -> f64,
    ) -> Result<Self, GeometryError> {
        let block = |size: usize, f: &dyn Fn(usize, usize, &[f64]) -> f64| {
            let mut out = vec![Vec::new(); size * size];
            for r in 0..size {
                for c in r..size {
                    let s = chart.sample(|u| f(r, c, u));
                    out[c * size + r] = s.clone();
                    out[r * size + c] = s;
                }
            }
            out
        };
        Self::new(chart, block(chart.n(), &fh), block(chart.m(), &fv))
    }

    /// Identity blocks.
    pub fn flat(chart: &ChartSpec) -> Self {
        Self::from_fn(
            chart,
            |i, j, _| if i == j { 1.0 } else { 0.0 },
            |a, b, _| if a == b { 1.0 } else { 0.0 },
        )
        .expect("flat metric is valid")
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> &Field {
        &self.h[i * self.n + j]
    }

    #[inline]
    pub fn v(&self, a: usize, b: usize) -> &Field {
        &self.v[a * self.m + b]
    }

    /// Component `g_αβ` over the full index range, `None` on the zero mixed blocks.
    pub fn component(&self, alpha: usize, beta: usize) -> Option<&Field> {
        let n = self.n;
        match (alpha < n, beta < n) {
            (true, true) => Some(self.h(alpha, beta)),
            (false, false) => Some(self.v(alpha - n, beta - n)),
            _ => None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Inverse of both blocks at every node, with determinant and 1-norm
    /// condition-number guards.
    pub fn inverse(&self, chart: &ChartSpec, mode: ExecMode) -> Result<InverseMetric, GeometryError> {
        let (n, m) = (self.n, self.m);
        let nodes = chart.node_count();
        let per_node = map_indexed(mode, nodes, |k| -> Result<(DMatrix<f64>, DMatrix<f64>), GeometryError> {
            let h = DMatrix::from_fn(n, n, |r, c| self.h(r, c)[k]);
            let v = DMatrix::from_fn(m, m, |r, c| self.v(r, c)[k]);
            Ok((guarded_inverse(&h, "h", k)?, guarded_inverse(&v, "v", k)?))
        });
        let mut h = Vec::with_capacity(nodes);
        let mut v = Vec::with_capacity(nodes);
        for r in per_node {
            let (a, b) = r?;
            h.push(a);
            v.push(b);
        }
        Ok(InverseMetric { h, v })
    }
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max)
}

fn guarded_inverse(a: &DMatrix<f64>, block: &'static str, node: usize) -> Result<DMatrix<f64>, GeometryError> {
    let lu = a.clone().lu();
    if lu.determinant().abs() <= DET_GUARD {
        return Err(GeometryError::SingularMetric { block, node });
    }
    let inv = lu.try_inverse().ok_or(GeometryError::SingularMetric { block, node })?;
    if one_norm(a) * one_norm(&inv) > CONDITION_GUARD {
        return Err(GeometryError::SingularMetric { block, node });
    }
    Ok(inv)
}

/// Per-node inverses `g^{ij}` and `g^{ab}`.
#[derive(Clone, Debug)]
pub struct InverseMetric {
    pub h: Vec<DMatrix<f64>>,
    pub v: Vec<DMatrix<f64>>,
}

/// Frame derivatives `e_j = ∂_j − N_j^a ∂_a`, `e_b = ∂_b`.
#[derive(Clone, Copy, Debug)]
pub struct Frame<'a> {
    pub chart: &'a ChartSpec,
    pub nconn: &'a NConnection,
    pub mode: ExecMode,
}

impl<'a> Frame<'a> {
    pub fn new(chart: &'a ChartSpec, nconn: &'a NConnection, mode: ExecMode) -> Self {
        Self { chart, nconn, mode }
    }

    /// `e_β f` for every frame direction `β`, at every node.
    pub fn derivatives(&self, f: &[f64]) -> Result<Vec<Field>, GeometryError> {
        let (n, m) = (self.chart.n(), self.chart.m());
        let partials = (0..n + m)
            .map(|d| self.chart.partial(f, d, self.mode))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = partials.clone();
        for (j, o) in out.iter_mut().enumerate().take(n) {
            for a in 0..m {
                let nja = self.nconn.get(j, a);
                for (k, x) in o.iter_mut().enumerate() {
                    *x -= nja[k] * partials[n + a][k];
                }
            }
        }
        Ok(out)
    }

    /// `e_β f` at one node; the node must be off the boundary along every
    /// axis the derivative reads.
    pub fn derivative_at(&self, f: &[f64], direction: usize, node: usize) -> Result<f64, GeometryError> {
        let (n, m) = (self.chart.n(), self.chart.m());
        if direction >= n + m {
            return Err(GeometryError::InvalidChart(format!("direction {direction} out of range")));
        }
        let mut value = self.chart.partial_at(f, direction, node)?;
        if direction < n {
            for a in 0..m {
                let nja = self.nconn.get(direction, a)[node];
                if nja != 0.0 {
                    value -= nja * self.chart.partial_at(f, n + a, node)?;
                }
            }
        }
        Ok(value)
    }
}

/// `e_β f` at one node: Caputo partial along `x^j` minus `N_j^a` times the
/// partial along `y^a` for h-directions, the plain partial for v-directions.
pub fn n_adapted_derivative(
    chart: &ChartSpec,
    nconn: &NConnection,
    field: &[f64],
    direction: usize,
    node: usize,
) -> Result<f64, GeometryError> {
    Frame::new(chart, nconn, ExecMode::Sequential).derivative_at(field, direction, node)
}

/// Largest `|f|` over the nodes with the given margin.
pub fn interior_max_abs(chart: &ChartSpec, f: &[f64], margin: usize) -> f64 {
    chart
        .interior_nodes(margin)
        .into_iter()
        .map(|k| f[k].abs())
        .fold(0.0, f64::max)
}
