//! Curvature of a d-connection and its Ricci / Einstein contractions.

use super::connection::{anholonomy, DConnection};
use super::{ChartSpec, DMetric, Field, Frame, GeometryError, NConnection, CURVATURE_MARGIN};
use crate::parallel::{map_indexed, ExecMode};

/// Curvature `R^τ_βγδ` with `R(e_γ, e_δ) e_β = R^τ_βγδ e_τ`:
///
/// ```text
/// R^τ_βγδ = e_γ Γ^τ_βδ − e_δ Γ^τ_βγ + Γ^σ_βδ Γ^τ_σγ − Γ^σ_βγ Γ^τ_σδ − W^σ_γδ Γ^τ_βσ
/// ```
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    dim: usize,
    riemann: Vec<Field>,
    ricci: Vec<Field>,
}

impl CurvatureBundle {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn margin(&self) -> usize {
        CURVATURE_MARGIN
    }

    pub fn riemann(&self, tau: usize, beta: usize, gamma: usize, delta: usize) -> &Field {
        let d = self.dim;
        &self.riemann[((tau * d + beta) * d + gamma) * d + delta]
    }

    /// `R_βδ = R^τ_βτδ`. Not symmetric in general for a d-connection.
    pub fn ricci(&self, beta: usize, delta: usize) -> &Field {
        &self.ricci[beta * self.dim + delta]
    }
}

pub fn curvature(
    chart: &ChartSpec,
    nconn: &NConnection,
    conn: &DConnection,
    mode: ExecMode,
) -> Result<CurvatureBundle, GeometryError> {
    let d = conn.dim();
    let w = anholonomy(chart, nconn, mode)?;
    let frame = Frame::new(chart, nconn, mode);
    // dgam[c][γ] = e_γ Γ_c, skipped (None) for identically zero coefficients.
    let dgam = conn
        .all()
        .iter()
        .map(|f| {
            if f.iter().all(|x| *x == 0.0) {
                Ok(None)
            } else {
                frame.derivatives(f).map(Some)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let all = conn.all();
    let idx3 = |t: usize, b: usize, g: usize| (t * d + b) * d + g;

    let per_node = map_indexed(mode, chart.node_count(), |k| {
        let gam = |t, b, g| all[idx3(t, b, g)][k];
        let dg = |t, b, g, dir: usize| dgam[idx3(t, b, g)].as_ref().map_or(0.0, |v| v[dir][k]);
        let mut r = vec![0.0; d * d * d * d];
        for tau in 0..d {
            for beta in 0..d {
                for gamma in 0..d {
                    for delta in 0..d {
                        let mut s = dg(tau, beta, delta, gamma) - dg(tau, beta, gamma, delta);
                        for sigma in 0..d {
                            s += gam(sigma, beta, delta) * gam(tau, sigma, gamma)
                                - gam(sigma, beta, gamma) * gam(tau, sigma, delta)
                                - w[idx3(sigma, gamma, delta)][k] * gam(tau, beta, sigma);
                        }
                        r[((tau * d + beta) * d + gamma) * d + delta] = s;
                    }
                }
            }
        }
        r
    });

    let nodes = chart.node_count();
    let mut riemann = vec![vec![0.0; nodes]; d * d * d * d];
    for (k, vals) in per_node.into_iter().enumerate() {
        for (c, v) in vals.into_iter().enumerate() {
            riemann[c][k] = v;
        }
    }
    let mut ricci = vec![vec![0.0; nodes]; d * d];
    for beta in 0..d {
        for delta in 0..d {
            let out = &mut ricci[beta * d + delta];
            for tau in 0..d {
                let src = &riemann[((tau * d + beta) * d + tau) * d + delta];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += s;
                }
            }
        }
    }
    Ok(CurvatureBundle { dim: d, riemann, ricci })
}

/// Scalar curvature split into its horizontal and vertical parts, and the
/// Einstein tensor `G_αβ = R_αβ − ½ g_αβ sR`.
#[derive(Clone, Debug)]
pub struct RicciReport {
    dim: usize,
    /// `g^{ij} R_ij`
    pub h_scalar: Field,
    /// `g^{ab} R_ab`
    pub v_scalar: Field,
    /// `sR = g^{ij} R_ij + g^{ab} R_ab`
    pub scalar: Field,
    einstein: Vec<Field>,
}

impl RicciReport {
    pub fn einstein(&self, alpha: usize, beta: usize) -> &Field {
        &self.einstein[alpha * self.dim + beta]
    }
}

pub fn ricci_scalar_einstein(
    chart: &ChartSpec,
    g: &DMetric,
    bundle: &CurvatureBundle,
    mode: ExecMode,
) -> Result<RicciReport, GeometryError> {
    let (n, m) = (chart.n(), chart.m());
    let d = n + m;
    let inv = g.inverse(chart, mode)?;
    let nodes = chart.node_count();
    let mut h_scalar = vec![0.0; nodes];
    let mut v_scalar = vec![0.0; nodes];
    for k in 0..nodes {
        for i in 0..n {
            for j in 0..n {
                h_scalar[k] += inv.h[k][(i, j)] * bundle.ricci(i, j)[k];
            }
        }
        for a in 0..m {
            for b in 0..m {
                v_scalar[k] += inv.v[k][(a, b)] * bundle.ricci(n + a, n + b)[k];
            }
        }
    }
    let scalar: Field = h_scalar.iter().zip(&v_scalar).map(|(a, b)| a + b).collect();
    let mut einstein = Vec::with_capacity(d * d);
    for alpha in 0..d {
        for beta in 0..d {
            let r = bundle.ricci(alpha, beta);
            let gab = g.component(alpha, beta);
            einstein.push(
                (0..nodes)
                    .map(|k| r[k] - 0.5 * gab.map_or(0.0, |f| f[k]) * scalar[k])
                    .collect(),
            );
        }
    }
    Ok(RicciReport { dim: d, h_scalar, v_scalar, scalar, einstein })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::FractionalOrder;
    use crate::geometry::canonical_dconnection;

    fn sphere() -> (ChartSpec, NConnection, DMetric) {
        let c = ChartSpec::uniform(2, 1, 0.05, 13, FractionalOrder::ONE).unwrap();
        let n = NConnection::zero(&c);
        let g = DMetric::from_fn(
            &c,
            |i, j, u| {
                let s = 4.0 / (1.0 + u[0] * u[0] + u[1] * u[1]).powi(2);
                if i == j {
                    s
                } else {
                    0.0
                }
            },
            |_, _, _| 1.0,
        )
        .unwrap();
        (c, n, g)
    }

    #[test]
    fn sphere_scalar_curvature_is_two() {
        let (c, n, g) = sphere();
        let conn = canonical_dconnection(&c, &n, &g, ExecMode::Parallel).unwrap();
        let curv = curvature(&c, &n, &conn, ExecMode::Parallel).unwrap();
        let rep = ricci_scalar_einstein(&c, &g, &curv, ExecMode::Parallel).unwrap();
        let k = c.node_of(&[4, 6, 6]);
        assert!((rep.h_scalar[k] - 2.0).abs() < 0.05, "{}", rep.h_scalar[k]);
        assert!(rep.v_scalar[k].abs() < 1e-9);
    }

    #[test]
    fn riemann_is_antisymmetric_in_last_pair() {
        let (c, n, g) = sphere();
        let conn = canonical_dconnection(&c, &n, &g, ExecMode::Sequential).unwrap();
        let curv = curvature(&c, &n, &conn, ExecMode::Sequential).unwrap();
        for t in 0..3 {
            for b in 0..3 {
                for gm in 0..3 {
                    for dl in 0..3 {
                        let a = curv.riemann(t, b, gm, dl);
                        let s = curv.riemann(t, b, dl, gm);
                        for k in c.interior_nodes(2) {
                            assert!((a[k] + s[k]).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}
