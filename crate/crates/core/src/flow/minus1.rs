//! The −1 flow: frame reconstruction along `l` and the sine-Gordon residual.

use nalgebra::{DMatrix, DVector};

use super::{FlowError, FlowSolver, FlowState};
use crate::frac::{FractionalIntegrator, FractionalOrder};

/// Frame `(e∥, e⊥)` at every node; `e_perp` is node-major like `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub e_par: Vec<f64>,
    pub e_perp: Vec<f64>,
    /// `max |e∥² + |e⊥|² − 1|` before projection.
    pub drift: f64,
}

/// Solves `D e∥ = −v·e⊥`, `D e⊥ = e∥ v` from `e∥(0) = 1`, `e⊥(0) = 0`.
///
/// At α = 1 each cell is an exact rotation by the cell-averaged `v` (second
/// order, norm preserving). For α < 1 the Caputo system is solved as the
/// Volterra equation `e = e(0) + I^α(A e)` with product-trapezoid weights,
/// implicit in the current node, and then projected onto the unit sphere.
pub fn reconstruct_frame(
    v: &[f64],
    components: usize,
    step: f64,
    order: FractionalOrder,
) -> Result<Frame, FlowError> {
    let c = components;
    let n = v.len() / c;
    let mut e_par = vec![0.0; n];
    let mut e_perp = vec![0.0; n * c];
    e_par[0] = 1.0;
    if order.is_integer() {
        for i in 0..n - 1 {
            let w: Vec<f64> = (0..c).map(|k| 0.5 * (v[i * c + k] + v[(i + 1) * c + k])).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let (a, perp) = (e_par[i], &e_perp[i * c..(i + 1) * c]);
            let mut next: Vec<f64> = perp.to_vec();
            let mut a_next = a;
            if norm > 0.0 {
                let theta = norm * step;
                let b: f64 = perp.iter().zip(&w).map(|(p, w)| p * w).sum::<f64>() / norm;
                let (s, co) = theta.sin_cos();
                a_next = a * co - b * s;
                let b_next = a * s + b * co;
                for (x, w) in next.iter_mut().zip(&w) {
                    *x += (b_next - b) * w / norm;
                }
            }
            e_par[i + 1] = a_next;
            e_perp[(i + 1) * c..(i + 2) * c].copy_from_slice(&next);
        }
        let drift = norm_defect(&e_par, &e_perp, c);
        return Ok(Frame { e_par, e_perp, drift });
    }

    let integ = FractionalIntegrator::new(order.alpha(), step, n)?;
    let s = integ.scale();
    let d = c + 1;
    // y_k = (e∥, e⊥) at node k; A_k y = (−v·e⊥, e∥ v).
    let apply = |k: usize, y: &[f64]| -> Vec<f64> {
        let vk = &v[k * c..(k + 1) * c];
        let mut out = vec![0.0; d];
        out[0] = -vk.iter().zip(&y[1..]).map(|(a, b)| a * b).sum::<f64>();
        for j in 0..c {
            out[1 + j] = y[0] * vk[j];
        }
        out
    };
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut ay: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut y0 = vec![0.0; d];
    y0[0] = 1.0;
    ay.push(apply(0, &y0));
    ys.push(y0.clone());
    for k in 1..n {
        let mut rhs = y0.clone();
        for (r, a0) in rhs.iter_mut().zip(&ay[0]) {
            *r += s * integ.first_weight(k) * a0;
        }
        for m in 1..k {
            let w = s * integ.lag_weight(m);
            for (r, a) in rhs.iter_mut().zip(&ay[k - m]) {
                *r += w * a;
            }
        }
        let vk = &v[k * c..(k + 1) * c];
        let mut mat = DMatrix::<f64>::identity(d, d);
        for j in 0..c {
            mat[(0, 1 + j)] += s * vk[j];
            mat[(1 + j, 0)] -= s * vk[j];
        }
        let y = mat
            .lu()
            .solve(&DVector::from_vec(rhs))
            .ok_or_else(|| FlowError::InvalidConfig("singular frame reconstruction step".into()))?;
        let y: Vec<f64> = y.iter().copied().collect();
        ay.push(apply(k, &y));
        ys.push(y);
    }
    for (k, y) in ys.iter().enumerate() {
        e_par[k] = y[0];
        e_perp[k * c..(k + 1) * c].copy_from_slice(&y[1..]);
    }
    let drift = norm_defect(&e_par, &e_perp, c);
    project(&mut e_par, &mut e_perp, c);
    Ok(Frame { e_par, e_perp, drift })
}

fn norm_defect(e_par: &[f64], e_perp: &[f64], c: usize) -> f64 {
    e_par
        .iter()
        .enumerate()
        .map(|(i, a)| (a * a + e_perp[i * c..(i + 1) * c].iter().map(|x| x * x).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

fn project(e_par: &mut [f64], e_perp: &mut [f64], c: usize) {
    for (i, a) in e_par.iter_mut().enumerate() {
        let p = &mut e_perp[i * c..(i + 1) * c];
        let r = (*a * *a + p.iter().map(|x| x * x).sum::<f64>()).sqrt();
        *a /= r;
        p.iter_mut().for_each(|x| *x /= r);
    }
}

/// Per-node residual of `(D e⊥ / √(1 − |e⊥|²))_τ + e⊥` between two frames.
#[derive(Clone, Debug, PartialEq)]
pub struct SgResidual {
    /// Euclidean norm of the residual per node; `NaN` at singular nodes.
    pub residual: Vec<f64>,
    /// Nodes where `√(1 − |e⊥|²)` fell below the tolerance in either frame.
    pub singular: Vec<usize>,
}

impl SgResidual {
    /// Largest residual over the regular nodes inside `[lo, hi)`.
    pub fn max_over(&self, lo: usize, hi: usize) -> f64 {
        self.residual[lo..hi].iter().filter(|x| x.is_finite()).fold(0.0, |a, b| a.max(*b))
    }

    pub fn max(&self) -> f64 {
        self.max_over(0, self.residual.len())
    }
}

impl FlowSolver {
    pub(super) fn frame(&self, v: &[f64]) -> Result<Frame, FlowError> {
        let cfg = self.config();
        reconstruct_frame(v, cfg.component_count, cfg.step(), cfg.order)
    }

    pub(super) fn finish_minus1(&self, tau: f64, v: Vec<f64>) -> Result<FlowState, FlowError> {
        let frame = self.frame(&v)?;
        // The norm is a conservation law only for integer order.
        if self.config().order.is_integer() && frame.drift > self.config().drift_tol {
            return Err(FlowError::ConstraintDrift { drift: frame.drift, tau });
        }
        Ok(FlowState { tau, v, e_par: Some(frame.e_par), e_perp: Some(frame.e_perp) })
    }

    /// Frame-norm defect before projection for a given `v`.
    pub fn frame_drift(&self, v: &[f64]) -> Result<f64, FlowError> {
        Ok(self.frame(v)?.drift)
    }

    /// Discrete sine-Gordon residual between two consecutive −1-flow states:
    /// forward difference in τ of `q = D e⊥ / (sgn(e∥)√(1 − |e⊥|²))` plus the
    /// time-averaged `e⊥`. The sign of `e∥` selects the branch of the root.
    pub fn sg_residual(&self, prev: &FlowState, next: &FlowState, singular_tol: f64) -> Result<SgResidual, FlowError> {
        let c = self.config().component_count;
        let n = self.config().node_count;
        let frames = [prev, next]
            .iter()
            .map(|s| match (&s.e_par, &s.e_perp) {
                (Some(a), Some(p)) => Ok((a, p)),
                _ => Err(FlowError::Shape("sg_residual needs states with a frame".into())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let dt = next.tau - prev.tau;
        if !(dt > 0.0) {
            return Err(FlowError::Shape("states must be in increasing tau order".into()));
        }
        let mut singular = Vec::new();
        let mut q = Vec::with_capacity(2);
        for (e_par, e_perp) in &frames {
            let mut dperp = vec![0.0; n * c];
            for k in 0..c {
                let line: Vec<f64> = (0..n).map(|i| e_perp[i * c + k]).collect();
                for (i, x) in self.spatial().first(&line).into_iter().enumerate() {
                    dperp[i * c + k] = x;
                }
            }
            let mut qi = vec![f64::NAN; n * c];
            for i in 0..n {
                let p2: f64 = e_perp[i * c..(i + 1) * c].iter().map(|x| x * x).sum();
                let root = (1.0 - p2).max(0.0).sqrt();
                if root < singular_tol {
                    singular.push(i);
                    continue;
                }
                let denom = root.copysign(e_par[i]);
                for k in 0..c {
                    qi[i * c + k] = dperp[i * c + k] / denom;
                }
            }
            q.push(qi);
        }
        singular.sort_unstable();
        singular.dedup();
        let residual = (0..n)
            .map(|i| {
                (0..c)
                    .map(|k| {
                        let j = i * c + k;
                        let r = (q[1][j] - q[0][j]) / dt + 0.5 * (frames[0].1[j] + frames[1].1[j]);
                        r * r
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Ok(SgResidual { residual, singular })
    }
}
