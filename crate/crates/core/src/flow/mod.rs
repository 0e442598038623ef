//! Numerical flows of the hierarchy on a 1-D arclength grid `l_i = i·h`,
//! `h = L/N`.
//!
//! Levels 0, 1, 2 evaluate the generated flow polynomial (with the
//! constant-curvature shift) on spatial derivative jets and advance with
//! classical RK4. Level −1 advances `v_τ = −c·e⊥` with the frame `(e∥, e⊥)`
//! reconstructed along `l` from `D e∥ = −v·e⊥`, `D e⊥ = e∥ v`.

mod minus1;
pub mod profiles;
pub mod spatial;

pub use minus1::{reconstruct_frame, SgResidual};
pub use profiles::Profile;
pub use spatial::SpatialOp;

use num_traits::FromPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffpoly::eval::{CompiledScalar, CompiledVector, JetField};
use crate::diffpoly::{constant_curvature_shift, Coeff, DiffAlgebra, DiffPolyError, Sector};
use crate::frac::{FracError, FractionalOrder};
use crate::parallel::ExecMode;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("time step {dt} exceeds the stability guard {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("non-finite or overflowing state at tau = {tau} (node {node})")]
    NonFinite { tau: f64, node: usize },
    #[error("frame norm drifted by {drift:e} before projection at tau = {tau}")]
    ConstraintDrift { drift: f64, tau: f64 },
    #[error("state does not match the solver grid: {0}")]
    Shape(String),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    DiffPoly(#[from] DiffPolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Periodic domain, pseudospectral derivatives (α = 1, levels ≥ 0 only).
    Periodic,
    /// `[0, L)` with lower terminal 0, fourth-order differences with zero
    /// ghosts and `I^{1−α}`.
    Open,
}

fn one() -> FractionalOrder {
    FractionalOrder::ONE
}
fn default_curvature() -> f64 {
    1.0
}
fn default_components() -> usize {
    1
}
fn default_monitors() -> Vec<usize> {
    vec![0, 1]
}
fn default_cfl() -> f64 {
    0.1
}
fn default_sponge_width() -> f64 {
    0.05
}
fn default_sponge_strength() -> f64 {
    1.0
}
fn default_drift_tol() -> f64 {
    1e-6
}

/// Everything a run needs besides the initial profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "one")]
    pub order: FractionalOrder,
    /// −1, 0, 1 or 2.
    pub flow_level: i32,
    /// The constant curvature `c` of the shifted flow `e⊥^(k) − c·e⊥^(k−1)`
    /// and of the −1 flow `v_τ = −c·e⊥`.
    #[serde(default = "default_curvature")]
    pub curvature_const: f64,
    pub dt: f64,
    pub t_end: f64,
    pub node_count: usize,
    pub domain_length: f64,
    #[serde(default = "default_components")]
    pub component_count: usize,
    /// Hamiltonian levels integrated by [`FlowSolver::monitor`].
    #[serde(default = "default_monitors")]
    pub monitor_set: Vec<usize>,
    /// `dt ≤ cfl_const · h^(2k+1)` for levels `k ≥ 1`.
    #[serde(default = "default_cfl")]
    pub cfl_const: f64,
    /// Defaults to periodic for α = 1 and levels ≥ 0, open otherwise.
    #[serde(default)]
    pub boundary: Option<Boundary>,
    /// Width of the damping layer at `l = 0` (fraction of `L`, open domains only).
    #[serde(default = "default_sponge_width")]
    pub sponge_width: f64,
    #[serde(default = "default_sponge_strength")]
    pub sponge_strength: f64,
    /// Largest frame-norm defect tolerated before projection (−1 flow, α = 1).
    #[serde(default = "default_drift_tol")]
    pub drift_tol: f64,
    #[serde(default)]
    pub exec: ExecMode,
}

impl SolverConfig {
    /// A config with every optional knob at its default.
    pub fn new(flow_level: i32, dt: f64, t_end: f64, node_count: usize, domain_length: f64) -> Self {
        Self {
            order: one(),
            flow_level,
            curvature_const: default_curvature(),
            dt,
            t_end,
            node_count,
            domain_length,
            component_count: default_components(),
            monitor_set: default_monitors(),
            cfl_const: default_cfl(),
            boundary: None,
            sponge_width: default_sponge_width(),
            sponge_strength: default_sponge_strength(),
            drift_tol: default_drift_tol(),
            exec: ExecMode::default(),
        }
    }

    pub fn step(&self) -> f64 {
        self.domain_length / self.node_count as f64
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary.unwrap_or(if self.order.is_integer() && self.flow_level >= 0 {
            Boundary::Periodic
        } else {
            Boundary::Open
        })
    }

    /// Stability limit on `dt`, if the level has one.
    pub fn dt_limit(&self) -> Option<f64> {
        (self.flow_level >= 1).then(|| self.cfl_const * self.step().powi(2 * self.flow_level + 1))
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |m: String| Err(FlowError::InvalidConfig(m));
        if !(-1..=2).contains(&self.flow_level) {
            return bad(format!("flow_level must be -1, 0, 1 or 2, got {}", self.flow_level));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.node_count < 8 {
            return bad(format!("node_count must be at least 8, got {}", self.node_count));
        }
        if !(self.domain_length.is_finite() && self.domain_length > 0.0) {
            return bad(format!("domain_length must be positive, got {}", self.domain_length));
        }
        if self.component_count == 0 {
            return bad("component_count must be at least 1".into());
        }
        if !self.curvature_const.is_finite() {
            return bad("curvature_const must be finite".into());
        }
        if !(self.cfl_const > 0.0) {
            return bad("cfl_const must be positive".into());
        }
        if !(0.0..=0.5).contains(&self.sponge_width) || !(self.sponge_strength >= 0.0) {
            return bad("sponge_width must lie in [0, 0.5] and sponge_strength be non-negative".into());
        }
        if !(self.drift_tol > 0.0) {
            return bad("drift_tol must be positive".into());
        }
        if let Some(&k) = self.monitor_set.iter().find(|&&k| k > 4) {
            return bad(format!("monitored Hamiltonian level {k} exceeds 4"));
        }
        if self.boundary() == Boundary::Periodic {
            if !self.order.is_integer() {
                return bad("periodic boundary requires order 1 (Caputo derivatives are not periodic)".into());
            }
            if self.flow_level < 0 {
                return bad("the -1 flow reconstructs its frame from l = 0 and needs an open boundary".into());
            }
        }
        if let Some(limit) = self.dt_limit() {
            if self.dt > limit {
                return Err(FlowError::Cfl { dt: self.dt, limit });
            }
        }
        Ok(())
    }
}

/// Solver state. `v` is node-major with `component_count` values per node;
/// `e_par`, `e_perp` are present for the −1 flow.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub tau: f64,
    pub v: Vec<f64>,
    pub e_par: Option<Vec<f64>>,
    pub e_perp: Option<Vec<f64>>,
}

/// Monitored integrals `∫ H^(k) dl` at each recorded time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservedTrace {
    pub levels: Vec<usize>,
    pub taus: Vec<f64>,
    /// `values[t][i]` is the integral of level `levels[i]` at `taus[t]`.
    pub values: Vec<Vec<f64>>,
}

impl ConservedTrace {
    pub fn push(&mut self, tau: f64, values: Vec<f64>) {
        self.taus.push(tau);
        self.values.push(values);
    }

    /// `max_t |I(t) − I(0)| / max(|I(0)|, tiny)` for monitored entry `i`.
    pub fn relative_drift(&self, i: usize) -> f64 {
        let Some(first) = self.values.first() else {
            return 0.0;
        };
        let base = first[i];
        let scale = base.abs().max(f64::MIN_POSITIVE);
        self.values.iter().map(|v| (v[i] - base).abs() / scale).fold(0.0, f64::max)
    }
}

/// Compiled solver for one configuration.
#[derive(Debug)]
pub struct FlowSolver {
    config: SolverConfig,
    grid: Vec<f64>,
    spatial: SpatialOp,
    rhs_poly: Option<CompiledVector>,
    monitors: Vec<CompiledScalar>,
    sponge: Vec<f64>,
    jet_order: usize,
}

impl FlowSolver {
    pub fn new(config: SolverConfig) -> Result<Self, FlowError> {
        config.validate()?;
        let n = config.node_count;
        let h = config.step();
        let grid: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let spatial = match config.boundary() {
            Boundary::Periodic => SpatialOp::spectral(n, config.domain_length),
            Boundary::Open => SpatialOp::open(config.order, h, n, config.exec)?,
        };
        let top = config.monitor_set.iter().copied().max().unwrap_or(0).max(config.flow_level.max(0) as usize);
        let hierarchy = DiffAlgebra::default().generate_hierarchy(top, Sector::Horizontal)?;
        let rhs_poly = if config.flow_level >= 0 {
            let k = config.flow_level as usize;
            let flow = &hierarchy.levels[k].flow;
            let shifted = if k > 0 {
                let c = Coeff::from_f64(config.curvature_const)
                    .ok_or_else(|| FlowError::InvalidConfig("curvature_const is not representable".into()))?;
                constant_curvature_shift(flow, &hierarchy.levels[k - 1].flow, &c)
            } else {
                flow.clone()
            };
            Some(CompiledVector::new(&shifted))
        } else {
            None
        };
        let monitors: Vec<CompiledScalar> = config
            .monitor_set
            .iter()
            .map(|&k| CompiledScalar::new(&hierarchy.levels[k].hamiltonian))
            .collect();
        let jet_order = rhs_poly
            .iter()
            .map(|p| p.max_order())
            .chain(monitors.iter().map(|m| m.max_order()))
            .max()
            .unwrap_or(0);
        let sponge = match config.boundary() {
            Boundary::Periodic => vec![0.0; n],
            Boundary::Open => {
                let w = config.sponge_width * config.domain_length;
                grid.iter()
                    .map(|&l| if w > 0.0 && l < w { config.sponge_strength * (1.0 - l / w).powi(2) } else { 0.0 })
                    .collect()
            }
        };
        Ok(Self { config, grid, spatial, rhs_poly, monitors, sponge, jet_order })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn spatial(&self) -> &SpatialOp {
        &self.spatial
    }

    fn check_shape(&self, v: &[f64]) -> Result<(), FlowError> {
        let want = self.config.node_count * self.config.component_count;
        if v.len() != want {
            return Err(FlowError::Shape(format!("{} values, expected {want}", v.len())));
        }
        Ok(())
    }

    /// Initial state from a profile (the frame is filled in for the −1 flow).
    pub fn initial_state(&self, profile: &Profile) -> Result<FlowState, FlowError> {
        let v = profile
            .sample(&self.grid, self.config.component_count)
            .map_err(FlowError::InvalidConfig)?;
        self.state_from(0.0, v)
    }

    /// Wraps samples into a state, reconstructing the frame for the −1 flow.
    pub fn state_from(&self, tau: f64, v: Vec<f64>) -> Result<FlowState, FlowError> {
        self.check_shape(&v)?;
        check_finite(&v, tau)?;
        if self.config.flow_level < 0 {
            let frame = self.frame(&v)?;
            Ok(FlowState { tau, v, e_par: Some(frame.e_par), e_perp: Some(frame.e_perp) })
        } else {
            Ok(FlowState { tau, v, e_par: None, e_perp: None })
        }
    }

    /// Time derivative of `v` (without advancing).
    pub fn rhs(&self, state: &FlowState) -> Result<Vec<f64>, FlowError> {
        self.check_shape(&state.v)?;
        self.rhs_of(&state.v)
    }

    fn rhs_of(&self, v: &[f64]) -> Result<Vec<f64>, FlowError> {
        let c = self.config.component_count;
        let mut out = match &self.rhs_poly {
            Some(p) => {
                let jets = self.spatial.jets(v, c, p.max_order());
                eval_flow(p, &jets, self.config.exec)
            }
            None => {
                let frame = self.frame(v)?;
                frame.e_perp.iter().map(|x| -self.config.curvature_const * x).collect()
            }
        };
        for (i, s) in self.sponge.iter().enumerate() {
            if *s != 0.0 {
                for k in 0..c {
                    out[i * c + k] -= s * v[i * c + k];
                }
            }
        }
        Ok(out)
    }

    /// The flow polynomial evaluated on given jets (no spatial discretization,
    /// no sponge).
    pub fn rhs_on_jets(&self, jets: &JetField) -> Option<Vec<f64>> {
        self.rhs_poly.as_ref().map(|p| eval_flow(p, jets, self.config.exec))
    }

    /// One classical RK4 step of size `dt`.
    pub fn step(&self, state: &FlowState) -> Result<FlowState, FlowError> {
        self.check_shape(&state.v)?;
        let dt = self.config.dt;
        let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
        let k1 = self.rhs_of(&state.v)?;
        let k2 = self.rhs_of(&axpy(&state.v, 0.5 * dt, &k1))?;
        let k3 = self.rhs_of(&axpy(&state.v, 0.5 * dt, &k2))?;
        let k4 = self.rhs_of(&axpy(&state.v, dt, &k3))?;
        let v: Vec<f64> = (0..state.v.len())
            .map(|i| state.v[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let tau = state.tau + dt;
        check_finite(&v, tau)?;
        if self.config.flow_level < 0 {
            return self.finish_minus1(tau, v);
        }
        Ok(FlowState { tau, v, e_par: None, e_perp: None })
    }

    /// `∫ H^(k) dl` for each monitored level (trapezoid rule; on a periodic
    /// grid this is `h Σ`).
    pub fn monitor(&self, state: &FlowState) -> Result<Vec<f64>, FlowError> {
        self.check_shape(&state.v)?;
        let jets = self.spatial.jets(&state.v, self.config.component_count, self.jet_order);
        let h = self.config.step();
        let periodic = self.config.boundary() == Boundary::Periodic;
        Ok(self
            .monitors
            .iter()
            .map(|m| {
                let dens = jets.eval_scalar(m, self.config.exec);
                let s: f64 = dens.iter().sum();
                if periodic {
                    h * s
                } else {
                    h * (s - 0.5 * (dens[0] + dens[dens.len() - 1]))
                }
            })
            .collect())
    }

    /// Steps from `initial` to `t_end`, recording the monitors every
    /// `record_every` steps (and at the end) and passing each recorded state
    /// to `on_record`.
    pub fn run(
        &self,
        initial: FlowState,
        record_every: usize,
        mut on_record: impl FnMut(&FlowState),
    ) -> Result<(FlowState, ConservedTrace), FlowError> {
        let steps = self.step_count();
        let mut trace = ConservedTrace { levels: self.config.monitor_set.clone(), ..Default::default() };
        let mut state = initial;
        trace.push(state.tau, self.monitor(&state)?);
        on_record(&state);
        for s in 1..=steps {
            state = self.step(&state)?;
            if s == steps || (record_every > 0 && s % record_every == 0) {
                trace.push(state.tau, self.monitor(&state)?);
                on_record(&state);
            }
        }
        Ok((state, trace))
    }

    /// Number of steps to reach `t_end` (the last one may overshoot by
    /// less than `dt`/2).
    pub fn step_count(&self) -> usize {
        (self.config.t_end / self.config.dt).round() as usize
    }
}

fn eval_flow(p: &CompiledVector, jets: &JetField, mode: ExecMode) -> Vec<f64> {
    if p.is_zero() {
        return vec![0.0; jets.orders[0].len()];
    }
    jets.eval_vector(p, mode)
}

fn check_finite(v: &[f64], tau: f64) -> Result<(), FlowError> {
    match v.iter().position(|x| !x.is_finite() || x.abs() > 1e150) {
        Some(i) => Err(FlowError::NonFinite { tau, node: i }),
        None => Ok(()),
    }
}

/// Relative L2 distance `‖a − b‖ / ‖b‖`.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let ok = SolverConfig::new(1, 1e-4, 1.0, 64, 20.0);
        assert!(ok.validate().is_ok());
        let big = SolverConfig { dt: 1.0, ..ok.clone() };
        assert!(matches!(big.validate(), Err(FlowError::Cfl { .. })));
        let lvl = SolverConfig { flow_level: 3, ..ok.clone() };
        assert!(lvl.validate().is_err());
        let frac_periodic = SolverConfig {
            order: FractionalOrder::new(0.5).unwrap(),
            boundary: Some(Boundary::Periodic),
            ..ok.clone()
        };
        assert!(frac_periodic.validate().is_err());
        let m1 = SolverConfig::new(-1, 0.1, 1.0, 64, 20.0);
        assert_eq!(m1.boundary(), Boundary::Open);
        assert!(m1.validate().is_ok());
        // Level 2 is guarded with h⁵.
        let l2 = SolverConfig::new(2, 1e-3, 1.0, 64, 20.0);
        assert!(matches!(l2.validate(), Err(FlowError::Cfl { .. })));
    }

    #[test]
    fn zero_stays_zero() {
        for level in [-1, 0, 1, 2] {
            let dt = if level == 2 { 1e-6 } else { 1e-4 };
            let cfg = SolverConfig::new(level, dt, 3.0 * dt, 32, 30.0);
            let s = FlowSolver::new(cfg).unwrap();
            let st = s.initial_state(&Profile::Zero).unwrap();
            let (end, trace) = s.run(st, 1, |_| {}).unwrap();
            assert!(end.v.iter().all(|x| *x == 0.0));
            assert!(trace.values.iter().flatten().all(|x| *x == 0.0));
            if level < 0 {
                assert!(end.e_par.unwrap().iter().all(|x| *x == 1.0));
            }
        }
    }

    #[test]
    fn level_zero_is_transport() {
        let cfg = SolverConfig::new(0, 1e-3, 0.0, 64, 2.0 * std::f64::consts::PI);
        let s = FlowSolver::new(cfg).unwrap();
        let st = s.state_from(0.0, s.grid().iter().map(|x| (2.0 * x).sin()).collect()).unwrap();
        let r = s.rhs(&st).unwrap();
        for (x, r) in s.grid().iter().zip(r) {
            assert!((r - 2.0 * (2.0 * x).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn constant_density() {
        let mut cfg = SolverConfig::new(1, 1e-4, 0.0, 64, 10.0);
        cfg.monitor_set = vec![0];
        let s = FlowSolver::new(cfg).unwrap();
        let st = s.state_from(0.0, vec![0.7; 64]).unwrap();
        let m = s.monitor(&st).unwrap();
        assert!((m[0] - 0.5 * 0.49 * 10.0).abs() < 1e-12);
    }
}
