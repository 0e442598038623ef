//! Geometry and Klein computations shared by scenarios and `verify`.

use fracflow::geometry::io::{parse_fixture, GeometryFixture};
use fracflow::geometry::{
    canonical_dconnection, curvature, fixtures, interior_max_abs, ricci_scalar_einstein, torsion,
    DConnection, Frame, RicciReport, CURVATURE_MARGIN,
};
use fracflow::klein::{bracket, ck_inner, frame_identities, FrameSample, HVector, KleinElement};
use fracflow::{ExecMode, FractionalOrder};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, Result};

/// A built-in fixture by name, otherwise a fixture file. Built-ins take the
/// order `alpha`; a file's own `order` must agree with it.
pub fn load_fixture(spec: &str, alpha: f64, base_dir: &std::path::Path) -> Result<GeometryFixture> {
    let order = FractionalOrder::new(alpha).map_err(|e| CliError::Schema(format!("alpha: {e}")))?;
    if let Some(fx) = fixtures::builtin(spec, order) {
        return Ok(fx?);
    }
    let path = base_dir.join(spec);
    let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
    let fx = parse_fixture(&text)?;
    if (fx.chart.order().alpha() - alpha).abs() > 1e-12 {
        return Err(CliError::Schema(format!(
            "fixture {} has order {} but the scenario sets alpha = {alpha}",
            path.display(),
            fx.chart.order().alpha()
        )));
    }
    Ok(fx)
}

pub struct GeometryAnalysis {
    pub conn: DConnection,
    pub torsion: Vec<Vec<f64>>,
    pub ricci: RicciReport,
    pub summary: GeometrySummary,
}

/// Interior maxima (nodes at least two steps from every face).
#[derive(Clone, Debug, Serialize)]
pub struct GeometrySummary {
    pub nodes: usize,
    pub interior_nodes: usize,
    pub torsion_h_max: f64,
    pub torsion_v_max: f64,
    pub torsion_mixed_max: f64,
    pub riemann_max: f64,
    pub einstein_max: f64,
    pub metric_compatibility_max: f64,
    pub h_scalar_range: [f64; 2],
    pub v_scalar_range: [f64; 2],
    pub scalar_range: [f64; 2],
}

fn range(fx: &GeometryFixture, f: &[f64]) -> [f64; 2] {
    let inner = fx.chart.interior_nodes(CURVATURE_MARGIN);
    inner.iter().fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], &k| [lo.min(f[k]), hi.max(f[k])])
}

pub fn analyze(fx: &GeometryFixture, mode: ExecMode) -> Result<GeometryAnalysis> {
    let (chart, n) = (&fx.chart, fx.chart.n());
    let d = chart.dim();
    let conn = canonical_dconnection(chart, &fx.nconn, &fx.metric, mode)?;
    let tors = torsion(chart, &fx.nconn, &conn, mode)?;
    let bundle = curvature(chart, &fx.nconn, &conn, mode)?;
    let ricci = ricci_scalar_einstein(chart, &fx.metric, &bundle, mode)?;
    let max = |f: &[f64]| interior_max_abs(chart, f, CURVATURE_MARGIN);

    let (mut th, mut tv, mut tm) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..d {
        for b in 0..d {
            for g in 0..d {
                let x = max(&tors[(t * d + b) * d + g]);
                match ((t < n), (b < n), (g < n)) {
                    (true, true, true) => th = th.max(x),
                    (false, false, false) => tv = tv.max(x),
                    _ => tm = tm.max(x),
                }
            }
        }
    }
    let mut riemann_max = 0.0f64;
    for t in 0..d {
        for b in 0..d {
            for g in 0..d {
                for e in 0..d {
                    riemann_max = riemann_max.max(max(bundle.riemann(t, b, g, e)));
                }
            }
        }
    }
    let mut einstein_max = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            einstein_max = einstein_max.max(max(ricci.einstein(a, b)));
        }
    }
    let summary = GeometrySummary {
        nodes: chart.node_count(),
        interior_nodes: chart.interior_nodes(CURVATURE_MARGIN).len(),
        torsion_h_max: th,
        torsion_v_max: tv,
        torsion_mixed_max: tm,
        riemann_max,
        einstein_max,
        metric_compatibility_max: metric_compatibility(fx, &conn, mode)?,
        h_scalar_range: range(fx, &ricci.h_scalar),
        v_scalar_range: range(fx, &ricci.v_scalar),
        scalar_range: range(fx, &ricci.scalar),
    };
    Ok(GeometryAnalysis { conn, torsion: tors, ricci, summary })
}

/// `max |D_γ g_αβ|` over both blocks, every direction, interior nodes.
fn metric_compatibility(fx: &GeometryFixture, conn: &DConnection, mode: ExecMode) -> Result<f64> {
    let (n, m) = (fx.chart.n(), fx.chart.m());
    let d = n + m;
    let frame = Frame::new(&fx.chart, &fx.nconn, mode);
    let inner = fx.chart.interior_nodes(CURVATURE_MARGIN);
    let g = |a: usize, b: usize| fx.metric.component(a, b).expect("block index");
    let mut worst = 0.0f64;
    for (lo, size) in [(0, n), (n, m)] {
        for a in 0..size {
            for b in 0..size {
                let eg = frame.derivatives(g(lo + a, lo + b))?;
                for dir in 0..d {
                    for &k in &inner {
                        let mut s = eg[dir][k];
                        for t in 0..size {
                            s -= conn.gamma(lo + t, lo + a, dir)[k] * g(lo + t, lo + b)[k];
                            s -= conn.gamma(lo + t, lo + b, dir)[k] * g(lo + a, lo + t)[k];
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Largest residual of one Klein identity over the random samples of one dimension.
#[derive(Clone, Debug, Serialize)]
pub struct KleinResidual {
    pub dim: usize,
    pub identity: String,
    pub max_residual: f64,
}

fn random_vec(rng: &mut impl Rng, k: usize) -> HVector {
    HVector::new((0..k).map(|_| rng.gen_range(-2.0..2.0)).collect()).expect("finite")
}

fn random_skew(rng: &mut impl Rng, k: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    &a - a.transpose()
}

/// Frame bracket identities, Cartan–Killing identification, Jacobi identity
/// and ad-invariance of the Cartan–Killing form on seeded random inputs.
pub fn klein_residuals(dims: &[usize], samples: usize, seed: u64) -> Result<Vec<KleinResidual>> {
    let numeric = |e: fracflow::klein::KleinError| CliError::Numeric(e.to_string());
    let mut out = Vec::new();
    for &n in dims {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut worst: Vec<(String, f64)> = Vec::new();
        let mut record = |name: &str, r: f64| match worst.iter_mut().find(|(w, _)| w == name) {
            Some((_, x)) => *x = x.max(r),
            None => worst.push((name.to_string(), r)),
        };
        for _ in 0..samples {
            let k = n - 1;
            let sample = FrameSample {
                v: random_vec(&mut rng, k),
                e_par: rng.gen_range(-1.0..1.0),
                e_perp: random_vec(&mut rng, k),
                varpi: random_vec(&mut rng, k),
                theta: random_skew(&mut rng, k),
            };
            for r in frame_identities(&sample).map_err(numeric)? {
                record(r.name, r.residual);
            }
            let el = |rng: &mut ChaCha8Rng| KleinElement::new(random_skew(rng, n + 1)).map_err(numeric);
            let (a, b, c) = (el(&mut rng)?, el(&mut rng)?, el(&mut rng)?);
            let br = |x: &KleinElement, y: &KleinElement| bracket(x, y).map_err(numeric);
            let jac = br(&a, &br(&b, &c)?)?.add(&br(&b, &br(&c, &a)?)?).map_err(numeric)?;
            let jac = jac.add(&br(&c, &br(&a, &b)?)?).map_err(numeric)?;
            record("Jacobi identity", jac.distance(&KleinElement::zero(n)).map_err(numeric)?);
            let lhs = ck_inner(&br(&a, &b)?, &c).map_err(numeric)?;
            let rhs = ck_inner(&b, &br(&a, &c)?).map_err(numeric)?;
            record("ck([a,b],c) + ck(b,[a,c]) = 0", (lhs + rhs).abs());
        }
        out.extend(worst.into_iter().map(|(identity, max_residual)| KleinResidual { dim: n, identity, max_residual }));
    }
    Ok(out)
}
