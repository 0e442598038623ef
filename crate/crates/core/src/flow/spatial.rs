//! Spatial derivative operators on the arclength grid.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::diffpoly::eval::JetField;
use crate::frac::{FracError, FractionalIntegrator, FractionalOrder};
use crate::parallel::ExecMode;

/// Periodic pseudospectral differentiation (α = 1), or fourth-order
/// differences with zero ghost values followed by `I^{1−α}` on an open
/// interval with lower terminal 0 (Caputo `D^α f = I^{1−α} f'`).
#[derive(Clone)]
pub enum SpatialOp {
    Spectral {
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
        wavenumbers: Vec<f64>,
    },
    Open {
        step: f64,
        integrator: Option<FractionalIntegrator>,
        mode: ExecMode,
    },
}

impl std::fmt::Debug for SpatialOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Spectral { wavenumbers, .. } => write!(f, "Spectral(n = {})", wavenumbers.len()),
            Self::Open { step, integrator, .. } => {
                write!(f, "Open(h = {step}, beta = {:?})", integrator.as_ref().map(|i| i.beta()))
            }
        }
    }
}

impl SpatialOp {
    pub fn spectral(nodes: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(nodes);
        let inv = planner.plan_fft_inverse(nodes);
        let base = 2.0 * std::f64::consts::PI / length;
        let wavenumbers = (0..nodes)
            .map(|k| {
                let signed = if k <= nodes / 2 { k as f64 } else { k as f64 - nodes as f64 };
                signed * base
            })
            .collect();
        Self::Spectral { fwd, inv, wavenumbers }
    }

    pub fn open(order: FractionalOrder, step: f64, nodes: usize, mode: ExecMode) -> Result<Self, FracError> {
        let integrator = if order.is_integer() {
            None
        } else {
            Some(FractionalIntegrator::new(1.0 - order.alpha(), step, nodes)?)
        };
        Ok(Self::Open { step, integrator, mode })
    }

    /// `f, Df, …, D^max f` for one line of samples.
    pub fn derivatives(&self, line: &[f64], max_order: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(max_order + 1);
        out.push(line.to_vec());
        match self {
            Self::Spectral { fwd, inv, wavenumbers } => {
                if max_order == 0 {
                    return out;
                }
                let n = line.len();
                let mut hat: Vec<Complex64> = line.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                let zero = Complex64::new(0.0, 0.0);
                let mut scratch = vec![zero; fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
                fwd.process_with_scratch(&mut hat, &mut scratch);
                let mut buf = vec![zero; n];
                for j in 1..=max_order {
                    for (k, (b, h)) in buf.iter_mut().zip(&hat).enumerate() {
                        // The Nyquist mode has no consistent sign for odd orders.
                        if n % 2 == 0 && k == n / 2 && j % 2 == 1 {
                            *b = Complex64::new(0.0, 0.0);
                        } else {
                            *b = h * Complex64::new(0.0, wavenumbers[k]).powu(j as u32);
                        }
                    }
                    inv.process_with_scratch(&mut buf, &mut scratch);
                    let scale = 1.0 / n as f64;
                    out.push(buf.iter().map(|c| c.re * scale).collect());
                }
            }
            Self::Open { .. } => {
                for _ in 0..max_order {
                    let next = self.first(out.last().expect("nonempty"));
                    out.push(next);
                }
            }
        }
        out
    }

    /// One application of the (fractional) first derivative.
    pub fn first(&self, line: &[f64]) -> Vec<f64> {
        match self {
            Self::Spectral { .. } => self.derivatives(line, 1).pop().expect("order 1"),
            Self::Open { step, integrator, mode } => {
                let d = fd4(line, *step);
                match integrator {
                    None => d,
                    Some(i) => i.apply(*mode, &d),
                }
            }
        }
    }

    /// Derivative jets of a node-major vector field with `components` per node.
    pub fn jets(&self, v: &[f64], components: usize, max_order: usize) -> JetField {
        let nodes = v.len() / components;
        let mut orders = vec![vec![0.0; v.len()]; max_order + 1];
        for c in 0..components {
            let line: Vec<f64> = (0..nodes).map(|i| v[i * components + c]).collect();
            for (j, d) in self.derivatives(&line, max_order).into_iter().enumerate() {
                for (i, x) in d.into_iter().enumerate() {
                    orders[j][i * components + c] = x;
                }
            }
        }
        JetField { components, orders }
    }
}

/// Fourth-order centered first derivative with zero values beyond both ends.
pub fn fd4(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len() as isize;
    let at = |i: isize| if (0..n).contains(&i) { f[i as usize] } else { 0.0 };
    (0..n)
        .map(|i| (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h))
        .collect()
}
