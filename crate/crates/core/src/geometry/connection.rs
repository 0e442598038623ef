//! Canonical d-connection, frame anholonomy and torsion.

use nalgebra::DMatrix;

use super::{ChartSpec, DMetric, Field, Frame, GeometryError, NConnection, CONNECTION_MARGIN};
use crate::parallel::{map_indexed, ExecMode};

/// Connection coefficients `Γ^τ_βγ` in the N-adapted frame, with `γ` the
/// differentiation direction: `D_{e_γ} e_β = Γ^τ_βγ e_τ`.
///
/// For a d-connection only the blocks `L^i_jk, L^a_bk, C^i_jc, C^a_bc` can
/// be nonzero; the mixed ones are stored as zero fields.
#[derive(Clone, Debug)]
pub struct DConnection {
    n: usize,
    m: usize,
    gamma: Vec<Field>,
    margin: usize,
}

impl DConnection {
    pub(crate) fn from_parts(n: usize, m: usize, gamma: Vec<Field>, margin: usize) -> Self {
        Self { n, m, gamma, margin }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Nodes closer than this to a face are not trustworthy.
    pub fn margin(&self) -> usize {
        self.margin
    }

    #[inline]
    pub fn gamma(&self, tau: usize, beta: usize, gamma: usize) -> &Field {
        let d = self.dim();
        &self.gamma[(tau * d + beta) * d + gamma]
    }

    /// `L^i_jk`.
    pub fn l_h(&self, i: usize, j: usize, k: usize) -> &Field {
        self.gamma(i, j, k)
    }

    /// `L^a_bk`.
    pub fn l_v(&self, a: usize, b: usize, k: usize) -> &Field {
        self.gamma(self.n + a, self.n + b, k)
    }

    /// `C^i_jc`.
    pub fn c_h(&self, i: usize, j: usize, c: usize) -> &Field {
        self.gamma(i, j, self.n + c)
    }

    /// `C^a_bc`.
    pub fn c_v(&self, a: usize, b: usize, c: usize) -> &Field {
        self.gamma(self.n + a, self.n + b, self.n + c)
    }

    pub(crate) fn all(&self) -> &[Field] {
        &self.gamma
    }
}

/// Reshapes per-node coefficient vectors into one field per coefficient.
fn transpose(per_node: Vec<Vec<f64>>, width: usize) -> Vec<Field> {
    let nodes = per_node.len();
    let mut out = vec![vec![0.0; nodes]; width];
    for (k, vals) in per_node.into_iter().enumerate() {
        for (c, v) in vals.into_iter().enumerate() {
            out[c][k] = v;
        }
    }
    out
}

/// Frame derivatives of a symmetric block: `out[p·s + q][β] = e_β g_pq`.
fn block_derivatives(
    frame: &Frame<'_>,
    size: usize,
    get: impl Fn(usize, usize) -> Field,
) -> Result<Vec<Vec<Field>>, GeometryError> {
    let mut out = vec![Vec::new(); size * size];
    for p in 0..size {
        for q in p..size {
            let d = frame.derivatives(&get(p, q))?;
            out[q * size + p] = d.clone();
            out[p * size + q] = d;
        }
    }
    Ok(out)
}

/// The canonical d-connection: metric compatible, with vanishing pure
/// horizontal and pure vertical torsion.
///
/// ```text
/// L^i_jk = ½ g^ir (e_k g_jr + e_j g_kr − e_r g_jk)
/// L^a_bk = e_b N_k^a + ½ g^ac (e_k g_bc − g_dc e_b N_k^d − g_db e_c N_k^d)
/// C^i_jc = ½ g^ik e_c g_jk
/// C^a_bc = ½ g^ad (e_c g_bd + e_b g_cd − e_d g_bc)
/// ```
pub fn canonical_dconnection(
    chart: &ChartSpec,
    nconn: &NConnection,
    g: &DMetric,
    mode: ExecMode,
) -> Result<DConnection, GeometryError> {
    let (n, m) = (chart.n(), chart.m());
    let d = n + m;
    let inv = g.inverse(chart, mode)?;
    let frame = Frame::new(chart, nconn, mode);
    let egh = block_derivatives(&frame, n, |p, q| g.h(p, q).clone())?;
    let egv = block_derivatives(&frame, m, |p, q| g.v(p, q).clone())?;
    // ∂_b N_k^a, indexed [k·m + a][b].
    let mut dn = Vec::with_capacity(n * m);
    for k in 0..n {
        for a in 0..m {
            let f = nconn.get(k, a);
            dn.push(
                (0..m)
                    .map(|b| chart.partial(f, n + b, mode))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
    }

    let per_node = map_indexed(mode, chart.node_count(), |node| {
        let mut c = vec![0.0; d * d * d];
        let idx = |t: usize, b: usize, gm: usize| (t * d + b) * d + gm;
        let gh = |p: usize, q: usize, beta: usize| egh[p * n + q][beta][node];
        let gv = |p: usize, q: usize, beta: usize| egv[p * m + q][beta][node];
        let ghi = &inv.h[node];
        let gvi = &inv.v[node];
        let dnv = |k: usize, a: usize, b: usize| dn[k * m + a][b][node];
        let gvv = |a: usize, b: usize| g.v(a, b)[node];

        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for r in 0..n {
                        s += ghi[(i, r)] * (gh(j, r, k) + gh(k, r, j) - gh(j, k, r));
                    }
                    c[idx(i, j, k)] = 0.5 * s;
                }
                for cc in 0..m {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += ghi[(i, k)] * gh(j, k, n + cc);
                    }
                    c[idx(i, j, n + cc)] = 0.5 * s;
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                for k in 0..n {
                    let mut s = 0.0;
                    for cc in 0..m {
                        let mut t = gv(b, cc, k);
                        for dd in 0..m {
                            t -= gvv(dd, cc) * dnv(k, dd, b) + gvv(dd, b) * dnv(k, dd, cc);
                        }
                        s += gvi[(a, cc)] * t;
                    }
                    c[idx(n + a, n + b, k)] = dnv(k, a, b) + 0.5 * s;
                }
                for cc in 0..m {
                    let mut s = 0.0;
                    for dd in 0..m {
                        s += gvi[(a, dd)] * (gv(b, dd, n + cc) + gv(cc, dd, n + b) - gv(b, cc, n + dd));
                    }
                    c[idx(n + a, n + b, n + cc)] = 0.5 * s;
                }
            }
        }
        c
    });
    Ok(DConnection::from_parts(n, m, transpose(per_node, d * d * d), CONNECTION_MARGIN))
}

/// Anholonomy coefficients `W^τ_βγ` of the N-adapted frame, from
/// `[e_β, e_γ] = W^τ_βγ e_τ` evaluated numerically on the coordinate
/// functions. Nodes where the frame matrix is singular get `NaN`.
pub fn anholonomy(chart: &ChartSpec, nconn: &NConnection, mode: ExecMode) -> Result<Vec<Field>, GeometryError> {
    let d = chart.dim();
    let frame = Frame::new(chart, nconn, mode);
    // comps[μ][σ] = e_σ(u^μ)
    let comps = (0..d)
        .map(|mu| frame.derivatives(&chart.coordinate_field(mu)))
        .collect::<Result<Vec<_>, _>>()?;
    // second[μ][γ][β] = e_β(e_γ(u^μ))
    let second = comps
        .iter()
        .map(|per_dir| per_dir.iter().map(|f| frame.derivatives(f)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;

    let per_node = map_indexed(mode, chart.node_count(), |node| {
        let e = DMatrix::from_fn(d, d, |sigma, mu| comps[mu][sigma][node]);
        let mut w = vec![f64::NAN; d * d * d];
        let Some(einv) = e.try_inverse() else {
            return w;
        };
        for beta in 0..d {
            for gamma in 0..d {
                for tau in 0..d {
                    let mut s = 0.0;
                    for mu in 0..d {
                        let cmu = second[mu][gamma][beta][node] - second[mu][beta][gamma][node];
                        s += cmu * einv[(mu, tau)];
                    }
                    w[(tau * d + beta) * d + gamma] = s;
                }
            }
        }
        w
    });
    Ok(transpose(per_node, d * d * d))
}

/// Torsion `T^τ_βγ = Γ^τ_γβ − Γ^τ_βγ − W^τ_βγ`, i.e. the components of
/// `T(e_β, e_γ) = D_β e_γ − D_γ e_β − [e_β, e_γ]`.
pub fn torsion(
    chart: &ChartSpec,
    nconn: &NConnection,
    conn: &DConnection,
    mode: ExecMode,
) -> Result<Vec<Field>, GeometryError> {
    let w = anholonomy(chart, nconn, mode)?;
    Ok(torsion_with(chart, conn, &w))
}

pub(crate) fn torsion_with(chart: &ChartSpec, conn: &DConnection, w: &[Field]) -> Vec<Field> {
    let d = conn.dim();
    let mut out = Vec::with_capacity(d * d * d);
    for tau in 0..d {
        for beta in 0..d {
            for gamma in 0..d {
                let a = conn.gamma(tau, gamma, beta);
                let b = conn.gamma(tau, beta, gamma);
                let wt = &w[(tau * d + beta) * d + gamma];
                out.push((0..chart.node_count()).map(|k| a[k] - b[k] - wt[k]).collect());
            }
        }
    }
    out
}

/// Christoffel symbols `Γ^μ_νλ` of the full metric
/// `g = g_ij dx^i dx^j + g_ab (dy^a + N^a_i dx^i)(dy^b + N^b_j dx^j)` in
/// coordinates, with Caputo partial derivatives. A reference variant used to
/// cross-check the canonical d-connection.
pub fn levi_civita(
    chart: &ChartSpec,
    nconn: &NConnection,
    g: &DMetric,
    mode: ExecMode,
) -> Result<Vec<Field>, GeometryError> {
    let (n, m) = (chart.n(), chart.m());
    let d = n + m;
    let nodes = chart.node_count();
    let comp = |mu: usize, nu: usize, k: usize| -> f64 {
        match (mu < n, nu < n) {
            (true, true) => {
                let mut s = g.h(mu, nu)[k];
                for c in 0..m {
                    for b in 0..m {
                        s += nconn.get(mu, c)[k] * nconn.get(nu, b)[k] * g.v(c, b)[k];
                    }
                }
                s
            }
            (true, false) => (0..m).map(|c| nconn.get(mu, c)[k] * g.v(c, nu - n)[k]).sum(),
            (false, true) => (0..m).map(|c| nconn.get(nu, c)[k] * g.v(c, mu - n)[k]).sum(),
            (false, false) => g.v(mu - n, nu - n)[k],
        }
    };
    let full: Vec<Field> = (0..d * d)
        .map(|p| (0..nodes).map(|k| comp(p / d, p % d, k)).collect())
        .collect();
    let partials: Vec<Vec<Field>> = full
        .iter()
        .map(|f| (0..d).map(|l| chart.partial(f, l, mode)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let per_node = map_indexed(mode, nodes, |k| {
        let gm = DMatrix::from_fn(d, d, |a, b| full[a * d + b][k]);
        let mut out = vec![f64::NAN; d * d * d];
        let Some(gi) = gm.try_inverse() else {
            return out;
        };
        let dg = |a: usize, b: usize, l: usize| partials[a * d + b][l][k];
        for mu in 0..d {
            for nu in 0..d {
                for la in 0..d {
                    let mut s = 0.0;
                    for rho in 0..d {
                        s += gi[(mu, rho)] * (dg(nu, rho, la) + dg(la, rho, nu) - dg(nu, la, rho));
                    }
                    out[(mu * d + nu) * d + la] = 0.5 * s;
                }
            }
        }
        out
    });
    Ok(transpose(per_node, d * d * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::FractionalOrder;
    use crate::geometry::interior_max_abs;

    #[test]
    fn flat_connection_vanishes() {
        let c = ChartSpec::uniform(2, 1, 0.1, 7, FractionalOrder::ONE).unwrap();
        let n = NConnection::zero(&c);
        let g = DMetric::flat(&c);
        let conn = canonical_dconnection(&c, &n, &g, ExecMode::Parallel).unwrap();
        for f in conn.all() {
            assert!(interior_max_abs(&c, f, 1) <= 1e-10);
        }
        for f in torsion(&c, &n, &conn, ExecMode::Parallel).unwrap() {
            assert!(interior_max_abs(&c, &f, 1) <= 1e-10);
        }
    }

    #[test]
    fn anholonomy_of_linear_n() {
        // N_1 = a·x2, N_2 = b·x1 gives [e_1, e_2] = (b − a) e_y... with sign
        // W^y_12 = e_2 N_1 − e_1 N_2 = a − b.
        let c = ChartSpec::uniform(2, 1, 0.1, 7, FractionalOrder::ONE).unwrap();
        let (a, b) = (0.8, -0.3);
        let n = NConnection::from_fn(&c, |i, _, u| if i == 0 { a * u[1] } else { b * u[0] }).unwrap();
        let w = anholonomy(&c, &n, ExecMode::Sequential).unwrap();
        let node = c.node_of(&[3, 3, 3]);
        let d = 3;
        let w_y12 = w[(2 * d) * d + 1][node];
        assert!((w_y12 - (a - b)).abs() < 1e-10, "{w_y12}");
        let w_y21 = w[(2 * d + 1) * d][node];
        assert!((w_y21 + (a - b)).abs() < 1e-10);
    }
}
