//! Formula-fidelity suite: printed hierarchy expressions (with an errata
//! table), the bi-Hamiltonian chain, golden files, geometry and Klein identities.

use std::fmt::Write;
use std::path::Path;

use clap::ValueEnum;
use fracflow::diffpoly::eval::{vector_to_scalar_sector, ScalarSectorPoly};
use fracflow::diffpoly::text::{parse_scalar, parse_vector, ToText};
use fracflow::diffpoly::{ratio, DiffAlgebra, Hierarchy, ScalingWeight, Sector, Weighted};
use fracflow::geometry::fixtures;
use fracflow::{ExecMode, FractionalOrder};

use crate::analysis::{analyze, klein_residuals};
use crate::error::{CliError, Result};
use crate::golden;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyKind {
    All,
    Hierarchy,
    Geometry,
    Klein,
}

/// A printed expression known to be wrong, with the form the algebra
/// produces. Texts use the h-sector symbol `v`.
pub struct Erratum {
    pub id: &'static str,
    pub printed: &'static str,
    pub corrected: &'static str,
    pub note: &'static str,
}

pub const ERRATA: &[Erratum] = &[
    Erratum {
        id: "level2.flow",
        // v5 + 5/2(|v|² v2)_l + 5/2((|v|²)_ll + |v1|² + 3/4|v|⁴) v1 − 1/2|v1|² v, expanded.
        printed: "v5 + 5/2*<v0,v0>*v3 + 5*<v0,v1>*v2 + 5*<v0,v2>*v1 + 15/2*<v1,v1>*v1 \
                  + 15/8*<v0,v0>^2*v1 - 1/2*<v1,v1>*v0",
        corrected: "v5 + 5/2*<v0,v0>*v3 + 5*<v0,v1>*v2 + 5*<v0,v2>*v1 + 5/2*<v1,v1>*v1 \
                    + 15/8*<v0,v0>^2*v1",
        note: "printed form is not weight-homogeneous (|v1|² v has weight 5, not 6) and its \
               scalar reduction is not the fifth-order mKdV flow",
    },
    Erratum {
        id: "level2.hamiltonian",
        printed: "1/2*<v2,v2> - 3/4*<v0,v0>*<v1,v1> - 1/2*<v0,v1> + 1/16*<v0,v0>^3",
        corrected: "1/2*<v2,v2> - 3/4*<v0,v0>*<v1,v1> - 1/2*<v0,v1>^2 + 1/16*<v0,v0>^3",
        note: "printed (v·v_l) term lacks its square: weight 3 inside a weight-6 density",
    },
];

/// Printed expressions that hold as printed.
const LITERAL: &[(&str, &str, bool)] = &[
    ("level0.flow", "v1", true),
    ("level1.flow", "v3 + 3/2*<v0,v0>*v1", true),
    ("level0.hamiltonian", "1/2*<v0,v0>", false),
    ("level1.hamiltonian", "-1/2*<v1,v1> + 1/8*<v0,v0>^2", false),
];

#[derive(Clone, Debug)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    /// True when the check passed against an errata entry rather than the printed form.
    pub erratum: bool,
    pub detail: String,
}

impl Check {
    fn new(id: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { id: id.into(), passed, erratum: false, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    /// One line per check, then a summary line.
    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let status = match (c.passed, c.erratum) {
                (false, _) => "FAIL ",
                (true, true) => "PASS*",
                (true, false) => "PASS ",
            };
            let _ = writeln!(out, "{status} {:width$}  {}", c.id, c.detail);
        }
        let errata = self.checks.iter().filter(|c| c.erratum).count();
        let _ = writeln!(
            out,
            "{} checks, {} failed{}",
            self.checks.len(),
            self.failures(),
            if errata > 0 { format!(", {errata} against the errata table (PASS*)") } else { String::new() }
        );
        out
    }
}

pub fn verify(kind: VerifyKind, golden_dir: &Path, seed: u64) -> Result<Report> {
    let mut report = Report::default();
    if matches!(kind, VerifyKind::All | VerifyKind::Hierarchy) {
        hierarchy_checks(golden_dir, &mut report.checks)?;
    }
    if matches!(kind, VerifyKind::All | VerifyKind::Geometry) {
        geometry_checks(&mut report.checks)?;
    }
    if matches!(kind, VerifyKind::All | VerifyKind::Klein) {
        klein_checks(seed, &mut report.checks)?;
    }
    Ok(report)
}

fn in_sector(text: &str, sector: Sector) -> String {
    text.replace('v', &sector.symbol().to_string())
}

fn hierarchy_checks(golden_dir: &Path, out: &mut Vec<Check>) -> Result<()> {
    let a = DiffAlgebra::default();
    let diffpoly = |e: fracflow::diffpoly::DiffPolyError| CliError::Numeric(e.to_string());
    for sector in [Sector::Horizontal, Sector::Vertical] {
        let sym = sector.symbol();
        let prefix = format!("hierarchy.{}", sector.short_name());
        let h = a.generate_hierarchy(golden::GOLDEN_LEVELS, sector).map_err(diffpoly)?;
        let expr = |id: &str| -> String {
            let (level, what) = id.split_once('.').expect("level.what");
            let k: usize = level.trim_start_matches("level").parse().expect("level number");
            let l = &h.levels[k];
            match what {
                "flow" => l.flow.to_text(sym),
                "hamiltonian" => l.hamiltonian.to_text(sym),
                _ => unreachable!(),
            }
        };
        let same = |id: &str, text: &str, vector: bool| -> bool {
            let text = in_sector(text, sector);
            let generated = expr(id);
            if vector {
                parse_vector(&text, sym).map(|p| p.to_text(sym) == generated).unwrap_or(false)
            } else {
                parse_scalar(&text, sym).map(|p| p.to_text(sym) == generated).unwrap_or(false)
            }
        };
        for &(id, text, vector) in LITERAL {
            let ok = same(id, text, vector);
            out.push(Check::new(format!("{prefix}.{id}"), ok, expr(id)));
        }
        for e in ERRATA {
            let vector = e.id.ends_with("flow");
            let corrected = same(e.id, e.corrected, vector);
            let printed = same(e.id, e.printed, vector);
            let detail = if corrected && !printed {
                format!("{} (erratum: {})", expr(e.id), e.note)
            } else if printed {
                "printed form now matches; errata entry is stale".to_string()
            } else {
                format!("generated {} matches neither printed nor corrected form", expr(e.id))
            };
            let mut c = Check::new(format!("{prefix}.{}", e.id), corrected && !printed, detail);
            c.erratum = true;
            out.push(c);
        }
        chain_checks(&a, &h, &prefix, out).map_err(diffpoly)?;
        out.push(golden_check(&h, golden_dir, &prefix));
    }
    out.push(scalar_reduction_check(&a)?);
    Ok(())
}

fn chain_checks(
    a: &DiffAlgebra,
    h: &Hierarchy,
    prefix: &str,
    out: &mut Vec<Check>,
) -> std::result::Result<(), fracflow::diffpoly::DiffPolyError> {
    for (k, l) in h.levels.iter().enumerate() {
        let mut failed = Vec::new();
        if a.euler_operator(&l.hamiltonian)? != l.covector {
            failed.push("δH ≠ ϖ");
        }
        if a.op_h(&l.covector)? != l.flow {
            failed.push("H(ϖ) ≠ e⊥");
        }
        if k > 0 && a.op_j(&h.levels[k - 1].flow)? != l.covector {
            failed.push("J(e⊥^(k−1)) ≠ ϖ");
        }
        let detail = if failed.is_empty() { "δH = ϖ, H(ϖ) = e⊥, J(e⊥^(k−1)) = ϖ".into() } else { failed.join(", ") };
        out.push(Check::new(format!("{prefix}.level{k}.chain"), failed.is_empty(), detail));

        let w = 2 + 2 * k as u32;
        let weights = [l.flow.scaling_weight(), l.covector.scaling_weight(), l.hamiltonian.scaling_weight()];
        let want = [ScalingWeight::Weight(w), ScalingWeight::Weight(w - 1), ScalingWeight::Weight(w)];
        out.push(Check::new(
            format!("{prefix}.level{k}.weights"),
            weights == want,
            format!("e⊥ {:?}, ϖ {:?}, H {:?}", weights[0], weights[1], weights[2]),
        ));
    }
    Ok(())
}

fn golden_check(h: &Hierarchy, dir: &Path, prefix: &str) -> Check {
    let path = dir.join(golden::file_name(h.sector));
    let id = format!("{prefix}.golden");
    match std::fs::read_to_string(&path) {
        Err(e) => Check::new(id, false, format!("cannot read {}: {e}", path.display())),
        Ok(text) => match golden::compare(&text, &golden::render(h)) {
            None => Check::new(id, true, format!("{} matches levels 0..={}", path.display(), golden::GOLDEN_LEVELS)),
            Some(m) => Check::new(id, false, format!("{} mismatch at {}", path.display(), m.excerpt())),
        },
    }
}

/// One component: the level-2 flow must reduce to the fifth-order mKdV flow
/// `u5 + 5/2 u² u3 + 10 u u1 u2 + 5/2 u1³ + 15/8 u⁴ u1`.
fn scalar_reduction_check(a: &DiffAlgebra) -> Result<Check> {
    let h = a
        .generate_hierarchy(2, Sector::Horizontal)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let reduced = vector_to_scalar_sector(&h.levels[2].flow);
    let expected = ScalarSectorPoly::from_terms([
        (vec![5], ratio(1, 1)),
        (vec![3, 0, 0], ratio(5, 2)),
        (vec![2, 1, 0], ratio(10, 1)),
        (vec![1, 1, 1], ratio(5, 2)),
        (vec![1, 0, 0, 0, 0], ratio(15, 8)),
    ]);
    Ok(Check::new("hierarchy.scalar.level2", reduced == expected, reduced.to_string()))
}

fn geometry_checks(out: &mut Vec<Check>) -> Result<()> {
    let mode = ExecMode::default();
    let order = |a: f64| FractionalOrder::new(a).expect("valid order");
    for alpha in [1.0, 0.6] {
        let s = analyze(&fixtures::flat(order(alpha))?, mode)?.summary;
        let worst = [s.torsion_h_max, s.torsion_v_max, s.torsion_mixed_max, s.riemann_max, s.einstein_max]
            .into_iter()
            .fold(0.0, f64::max);
        out.push(Check::new(
            format!("geometry.flat.alpha{alpha}.vanishing"),
            worst <= 1e-8,
            format!("max |T|, |R|, |G| = {worst:.1e} (≤ 1e-8)"),
        ));
    }
    let sphere = analyze(&fixtures::sphere()?, mode)?.summary;
    let [lo, hi] = sphere.h_scalar_range;
    out.push(Check::new(
        "geometry.sphere.h-scalar",
        (lo - 2.0).abs() <= 0.05 && (hi - 2.0).abs() <= 0.05,
        format!("hR ∈ [{lo:.4}, {hi:.4}] (2 ± 0.05)"),
    ));
    out.push(pure_torsion("geometry.sphere.torsion-pure", &sphere));
    let hyper = analyze(&fixtures::hyperbolic()?, mode)?.summary;
    let [lo, hi] = hyper.h_scalar_range;
    out.push(Check::new(
        "geometry.hyperbolic.h-scalar",
        (lo + 2.0).abs() <= 0.05 && (hi + 2.0).abs() <= 0.05,
        format!("hR ∈ [{lo:.4}, {hi:.4}] (−2 ± 0.05)"),
    ));
    for alpha in [1.0, 0.7] {
        let s = analyze(&fixtures::twisted(order(alpha))?, mode)?.summary;
        out.push(pure_torsion(&format!("geometry.twisted.alpha{alpha}.torsion-pure"), &s));
        out.push(Check::new(
            format!("geometry.twisted.alpha{alpha}.metric-compatible"),
            s.metric_compatibility_max <= 1e-9,
            format!("max |D g| = {:.1e} (≤ 1e-9)", s.metric_compatibility_max),
        ));
    }
    Ok(())
}

fn pure_torsion(id: &str, s: &crate::analysis::GeometrySummary) -> Check {
    let worst = s.torsion_h_max.max(s.torsion_v_max);
    Check::new(id, worst <= 1e-8, format!("max |T^i_jk|, |T^a_bc| = {worst:.1e} (≤ 1e-8)"))
}

fn klein_checks(seed: u64, out: &mut Vec<Check>) -> Result<()> {
    for r in klein_residuals(&[2, 3, 4, 5], 200, seed)? {
        out.push(Check::new(
            format!("klein.n{}.{}", r.dim, r.identity),
            r.max_residual <= 1e-12,
            format!("max residual {:.1e} over 200 samples (≤ 1e-12)", r.max_residual),
        ));
    }
    Ok(())
}
