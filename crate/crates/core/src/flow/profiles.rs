//! Initial profiles.

use serde::{Deserialize, Serialize};

/// Built-in initial data. Vector profiles point along the first component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    /// `2k sech(k(l − center))`, the mKdV soliton at τ = 0.
    Soliton { k: f64, center: f64 },
    /// `φ_l` of the sine-Gordon kink `φ = 4 arctan(exp(l − center))`, i.e. `2 sech(l − center)`.
    Kink { center: f64 },
    Gaussian { amplitude: f64, width: f64, center: f64 },
    Zero,
    /// Explicit node-major samples, `components` values per node.
    Tabular { values: Vec<f64> },
}

impl Profile {
    /// Samples the profile on `grid`, node-major with `components` per node.
    pub fn sample(&self, grid: &[f64], components: usize) -> Result<Vec<f64>, String> {
        let along_first = |f: &dyn Fn(f64) -> f64| {
            let mut v = vec![0.0; grid.len() * components];
            for (i, l) in grid.iter().enumerate() {
                v[i * components] = f(*l);
            }
            v
        };
        Ok(match self {
            Self::Soliton { k, center } => along_first(&|l| soliton(*k, l - center, 0.0)),
            Self::Kink { center } => along_first(&|l| kink_slope(l - center, 0.0)),
            Self::Gaussian { amplitude, width, center } => {
                if !(*width > 0.0) {
                    return Err(format!("gaussian width must be positive, got {width}"));
                }
                along_first(&|l| amplitude * (-((l - center) / width).powi(2)).exp())
            }
            Self::Zero => vec![0.0; grid.len() * components],
            Self::Tabular { values } => {
                if values.len() != grid.len() * components {
                    return Err(format!(
                        "tabular profile has {} values, expected {} nodes x {} components",
                        values.len(),
                        grid.len(),
                        components
                    ));
                }
                values.clone()
            }
        })
    }
}

/// Traveling mKdV soliton `2k sech(k x + k³ τ)` for `v_τ = v_lll + 3/2 v² v_l`.
pub fn soliton(k: f64, x: f64, tau: f64) -> f64 {
    2.0 * k / (k * x + k.powi(3) * tau).cosh()
}

/// `τ`-derivative of [`soliton`].
pub fn soliton_tau(k: f64, x: f64, tau: f64) -> f64 {
    let z = k * x + k.powi(3) * tau;
    -2.0 * k.powi(4) * z.tanh() / z.cosh()
}

/// Kink angle `φ = 4 arctan(exp(x − τ))`, solving `φ_lτ = −sin φ`.
pub fn kink_angle(x: f64, tau: f64) -> f64 {
    4.0 * (x - tau).exp().atan()
}

/// `φ_l` of [`kink_angle`].
pub fn kink_slope(x: f64, tau: f64) -> f64 {
    2.0 / (x - tau).cosh()
}

/// Signed distance `x` folded into `[−L/2, L/2)`.
pub fn wrap(x: f64, length: f64) -> f64 {
    (x + 0.5 * length).rem_euclid(length) - 0.5 * length
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_solves_sine_gordon() {
        let (x, t, e) = (0.3, 0.2, 1e-4);
        let phi_lt = (kink_angle(x + e, t + e) - kink_angle(x + e, t - e) - kink_angle(x - e, t + e)
            + kink_angle(x - e, t - e))
            / (4.0 * e * e);
        assert!((phi_lt + kink_angle(x, t).sin()).abs() < 1e-5);
        let slope = (kink_angle(x + e, t) - kink_angle(x - e, t)) / (2.0 * e);
        assert!((slope - kink_slope(x, t)).abs() < 1e-7);
    }

    #[test]
    fn tabular_size_is_checked() {
        let p = Profile::Tabular { values: vec![1.0; 5] };
        assert!(p.sample(&[0.0, 1.0], 2).is_err());
        assert_eq!(Profile::Zero.sample(&[0.0, 1.0], 3).unwrap().len(), 6);
    }
}
