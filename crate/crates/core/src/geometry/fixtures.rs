//! Built-in geometries used by the CLI and the test suites.

use std::collections::BTreeMap;

use super::io::GeometryFixture;
use super::{ChartSpec, DMetric, GeometryError, NConnection};
use crate::frac::FractionalOrder;

pub const BUILTIN: [&str; 4] = ["flat", "sphere", "hyperbolic", "twisted"];

fn diag(s: f64, i: usize, j: usize) -> f64 {
    if i == j {
        s
    } else {
        0.0
    }
}

fn conformal(chart: ChartSpec, factor: impl Fn(&[f64]) -> f64, name: &str) -> Result<GeometryFixture, GeometryError> {
    let nconn = NConnection::zero(&chart);
    let metric = DMetric::from_fn(&chart, |i, j, u| diag(factor(u), i, j), |a, b, _| diag(1.0, a, b))?;
    let metadata = BTreeMap::from([("fixture".to_string(), name.to_string())]);
    Ok(GeometryFixture { chart, nconn, metric, metadata })
}

/// Identity blocks, `N ≡ 0`, n = m = 2.
pub fn flat(order: FractionalOrder) -> Result<GeometryFixture, GeometryError> {
    conformal(ChartSpec::uniform(2, 2, 0.1, 7, order)?, |_| 1.0, "flat")
}

/// Stereographic unit 2-sphere `4/(1+x²+y²)²` on the h-block, identity
/// v-block. Node (0.2, 0.3) sits at grid index (4, 6).
pub fn sphere() -> Result<GeometryFixture, GeometryError> {
    conformal(
        ChartSpec::uniform(2, 1, 0.05, 13, FractionalOrder::ONE)?,
        |u| 4.0 / (1.0 + u[0] * u[0] + u[1] * u[1]).powi(2),
        "sphere",
    )
}

/// Poincaré disk `4/(1−x²−y²)²` (curvature −1) on the h-block.
pub fn hyperbolic() -> Result<GeometryFixture, GeometryError> {
    conformal(
        ChartSpec::uniform(2, 1, 0.03, 13, FractionalOrder::ONE)?,
        |u| 4.0 / (1.0 - u[0] * u[0] - u[1] * u[1]).powi(2),
        "hyperbolic",
    )
}

/// Non-integrable N-connection with curved blocks, so the mixed torsion and
/// anholonomy are nonzero.
pub fn twisted(order: FractionalOrder) -> Result<GeometryFixture, GeometryError> {
    let chart = ChartSpec::uniform(2, 1, 0.1, 9, order)?;
    let nconn = NConnection::from_fn(&chart, |i, _, u| if i == 0 { 0.5 * u[1] } else { -0.3 * u[0] + 0.2 * u[2] })?;
    let metric = DMetric::from_fn(
        &chart,
        |i, j, u| match (i, j) {
            (0, 0) => 1.0 + 0.1 * u[0] * u[0],
            (1, 1) => 1.0 + 0.05 * u[2],
            _ => 0.1 * u[0] * u[1],
        },
        |_, _, u| 1.0 + 0.1 * u[2] * u[2] + 0.05 * u[0],
    )?;
    let metadata = BTreeMap::from([("fixture".to_string(), "twisted".to_string())]);
    Ok(GeometryFixture { chart, nconn, metric, metadata })
}

/// Looks up a built-in fixture by name. `order` applies where the fixture
/// is not tied to α = 1.
pub fn builtin(name: &str, order: FractionalOrder) -> Option<Result<GeometryFixture, GeometryError>> {
    Some(match name {
        "flat" => flat(order),
        "sphere" => sphere(),
        "hyperbolic" => hyperbolic(),
        "twisted" => twisted(order),
        _ => return None,
    })
}
