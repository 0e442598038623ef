//! Plain-text tabular fixture format.
//!
//! ```text
//! # order: 1
//! # eta_h: 1 1
//! x1 x2 y1 N_1_1 N_2_1 gh_1_1 gh_1_2 gh_2_2 gv_1_1
//! 0 0 0 0 0 1 0 1 1
//! ...
//! ```
//!
//! Lines starting with `#` carry `key: value` metadata; the only key read
//! here is `order` (default 1), the rest are kept verbatim. The first other
//! line is the mandatory header. Every subsequent non-blank line is one node.
//! Rows may come in any order; the grid (origin 0, uniform step per axis) is
//! inferred from the coordinate columns. Metric blocks list the upper
//! triangle only. Indices are 1-based.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::{Axis, ChartSpec, DMetric, Field, GeometryError, NConnection};
use crate::frac::FractionalOrder;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("header: {0}")]
    Header(String),
    #[error("grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A loaded geometry: chart, N-connection, d-metric and free-form metadata.
#[derive(Clone, Debug)]
pub struct GeometryFixture {
    pub chart: ChartSpec,
    pub nconn: NConnection,
    pub metric: DMetric,
    pub metadata: BTreeMap<String, String>,
}

/// Column names for a chart of shape `(n, m)`.
pub fn header(n: usize, m: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    h.extend((1..=m).map(|a| format!("y{a}")));
    for i in 1..=n {
        for a in 1..=m {
            h.push(format!("N_{i}_{a}"));
        }
    }
    for i in 1..=n {
        for j in i..=n {
            h.push(format!("gh_{i}_{j}"));
        }
    }
    for a in 1..=m {
        for b in a..=m {
            h.push(format!("gv_{a}_{b}"));
        }
    }
    h
}

const GRID_TOL: f64 = 1e-9;

fn infer_axis(values: &[f64], name: &str) -> Result<Axis, FixtureError> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= GRID_TOL * (1.0 + b.abs()));
    if v.len() < 2 {
        return Err(FixtureError::Grid(format!("axis {name} has fewer than 2 distinct values")));
    }
    if v[0].abs() > GRID_TOL {
        return Err(FixtureError::Grid(format!("axis {name} does not start at 0")));
    }
    let step = v[1] - v[0];
    for (k, x) in v.iter().enumerate() {
        if (x - k as f64 * step).abs() > 1e-6 * step {
            return Err(FixtureError::Grid(format!("axis {name} is not uniform")));
        }
    }
    Ok(Axis { step, count: v.len() })
}

pub fn parse_fixture(src: &str) -> Result<GeometryFixture, FixtureError> {
    let mut metadata = BTreeMap::new();
    let mut head: Option<Vec<String>> = None;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (no, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once(':') {
                metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        match head {
            None => head = Some(line.split_whitespace().map(str::to_string).collect()),
            Some(ref h) => {
                let vals = line
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<f64>().map_err(|e| FixtureError::Syntax { line: no + 1, msg: format!("{t:?}: {e}") })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if vals.len() != h.len() {
                    return Err(FixtureError::Syntax {
                        line: no + 1,
                        msg: format!("{} columns, header has {}", vals.len(), h.len()),
                    });
                }
                if vals.iter().any(|x| !x.is_finite()) {
                    return Err(FixtureError::Syntax { line: no + 1, msg: "non-finite value".into() });
                }
                rows.push((no + 1, vals));
            }
        }
    }
    let head = head.ok_or_else(|| FixtureError::Header("missing header line".into()))?;
    let n = head.iter().filter(|c| c.starts_with('x')).count();
    let m = head.iter().filter(|c| c.starts_with('y')).count();
    let expected = header(n, m);
    let index: HashMap<&str, usize> = head.iter().enumerate().map(|(k, c)| (c.as_str(), k)).collect();
    if index.len() != head.len() {
        return Err(FixtureError::Header("duplicate column".into()));
    }
    for c in &expected {
        if !index.contains_key(c.as_str()) {
            return Err(FixtureError::Header(format!("missing column {c}")));
        }
    }
    if head.len() != expected.len() {
        let extra: Vec<_> = head.iter().filter(|c| !expected.contains(c)).collect();
        return Err(FixtureError::Header(format!("unknown columns {extra:?}")));
    }

    let order = match metadata.get("order") {
        None => FractionalOrder::ONE,
        Some(s) => {
            let a: f64 = s.parse().map_err(|_| FixtureError::Header(format!("bad order {s:?}")))?;
            FractionalOrder::new(a).map_err(GeometryError::from)?
        }
    };
    let d = n + m;
    let axes = (0..d)
        .map(|c| infer_axis(&rows.iter().map(|(_, r)| r[index[expected[c].as_str()]]).collect::<Vec<_>>(), &expected[c]))
        .collect::<Result<Vec<_>, _>>()?;
    let chart = ChartSpec::new(n, m, axes.clone(), order)?;
    if rows.len() != chart.node_count() {
        return Err(FixtureError::Grid(format!("{} rows for {} grid nodes", rows.len(), chart.node_count())));
    }

    let mut fields: Vec<Field> = vec![vec![f64::NAN; chart.node_count()]; expected.len() - d];
    let mut seen = vec![false; chart.node_count()];
    for (line, r) in &rows {
        let idx: Vec<usize> = (0..d)
            .map(|c| (r[index[expected[c].as_str()]] / axes[c].step).round() as usize)
            .collect();
        let node = chart.node_of(&idx);
        if std::mem::replace(&mut seen[node], true) {
            return Err(FixtureError::Syntax { line: *line, msg: "duplicate grid node".into() });
        }
        for (f, name) in fields.iter_mut().zip(&expected[d..]) {
            f[node] = r[index[name.as_str()]];
        }
    }
    let mut it = fields.into_iter();
    let ncoeffs: Vec<Field> = it.by_ref().take(n * m).collect();
    let upper = |it: &mut dyn Iterator<Item = Field>, size: usize| {
        let mut out = vec![Vec::new(); size * size];
        for r in 0..size {
            for c in r..size {
                let f = it.next().expect("column count checked");
                out[c * size + r] = f.clone();
                out[r * size + c] = f;
            }
        }
        out
    };
    let h = upper(&mut it, n);
    let v = upper(&mut it, m);
    let nconn = NConnection::new(&chart, ncoeffs)?;
    let metric = DMetric::new(&chart, h, v)?;
    Ok(GeometryFixture { chart, nconn, metric, metadata })
}

/// Writes a table in the fixture layout: metadata, header, one row per node.
/// Values on nodes closer than `margin` to a face are written as `NaN`.
pub fn write_table(
    chart: &ChartSpec,
    metadata: &BTreeMap<String, String>,
    columns: &[(String, &[f64])],
    margin: usize,
) -> String {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k}: {v}");
    }
    let d = chart.dim();
    let mut head: Vec<String> = header(chart.n(), chart.m()).into_iter().take(d).collect();
    head.extend(columns.iter().map(|(n, _)| n.clone()));
    let _ = writeln!(out, "{}", head.join(" "));
    for node in 0..chart.node_count() {
        let inside = chart.is_interior(node, margin);
        let mut row: Vec<String> = chart.coordinates(node).iter().map(|x| format!("{x}")).collect();
        for (_, f) in columns {
            row.push(if inside { format!("{:e}", f[node]) } else { "NaN".into() });
        }
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Serialises a fixture in the format read by [`parse_fixture`].
pub fn write_fixture(fx: &GeometryFixture) -> String {
    let (n, m) = (fx.chart.n(), fx.chart.m());
    let mut md = fx.metadata.clone();
    md.insert("order".into(), format!("{}", fx.chart.order().alpha()));
    let names = header(n, m);
    let mut cols: Vec<&[f64]> = Vec::new();
    for i in 0..n {
        for a in 0..m {
            cols.push(fx.nconn.get(i, a));
        }
    }
    for i in 0..n {
        for j in i..n {
            cols.push(fx.metric.h(i, j));
        }
    }
    for a in 0..m {
        for b in a..m {
            cols.push(fx.metric.v(a, b));
        }
    }
    let columns: Vec<(String, &[f64])> = names[n + m..].iter().cloned().zip(cols).collect();
    write_table(&fx.chart, &md, &columns, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "# order: 1\n# eta_h: 1\nx1 y1 N_1_1 gh_1_1 gv_1_1\n";

    fn small(rows: impl Fn(f64, f64) -> String) -> String {
        let mut s = SMALL.to_string();
        for i in 0..5 {
            for j in 0..5 {
                s += &rows(i as f64 * 0.1, j as f64 * 0.2);
                s.push('\n');
            }
        }
        s
    }

    #[test]
    fn round_trip() {
        let src = small(|x, y| format!("{x} {y} {} 1 {}", 0.5 * y, 1.0 + x * x));
        let fx = parse_fixture(&src).unwrap();
        assert_eq!(fx.chart.axes()[0].count, 5);
        assert!((fx.chart.axes()[1].step - 0.2).abs() < 1e-12);
        assert_eq!(fx.metadata["eta_h"], "1");
        let again = parse_fixture(&write_fixture(&fx)).unwrap();
        for k in 0..25 {
            assert!((again.metric.v(0, 0)[k] - fx.metric.v(0, 0)[k]).abs() < 1e-12);
            assert!((again.nconn.get(0, 0)[k] - fx.nconn.get(0, 0)[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_fixture("# order: 1\n"), Err(FixtureError::Header(_))));
        let missing = small(|x, y| format!("{x} {y} 0 1"));
        assert!(matches!(parse_fixture(&missing), Err(FixtureError::Syntax { .. })));
        let singular = small(|x, y| format!("{x} {y} 0 0 1"));
        assert!(matches!(parse_fixture(&singular), Err(FixtureError::Geometry(_))));
        let shifted = small(|x, y| format!("{} {y} 0 1 1", x + 1.0));
        assert!(matches!(parse_fixture(&shifted), Err(FixtureError::Grid(_))));
    }
}
