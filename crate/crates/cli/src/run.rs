//! Scenario pipelines.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fracflow::diffpoly::eval::vector_to_scalar_sector;
use fracflow::diffpoly::DiffAlgebra;
use fracflow::flow::{FlowSolver, FlowState};
use fracflow::geometry::io::write_table;
use fracflow::geometry::CURVATURE_MARGIN;
use serde_json::json;

use crate::analysis::{analyze, klein_residuals, load_fixture};
use crate::error::{CliError, Result};
use crate::golden;
use crate::output::OutputDir;
use crate::scenario::{Loaded, ScenarioKind};

pub struct Outcome {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub summary: serde_json::Value,
    /// Text worth echoing on stdout (hierarchy expressions).
    pub text: Option<String>,
    /// Checks that failed (Klein scenarios).
    pub failures: usize,
}

pub fn run(loaded: &Loaded, dir: &Path) -> Result<Outcome> {
    let mut out = OutputDir::create(dir)?;
    let (summary, text, failures) = match loaded.scenario.kind {
        ScenarioKind::Flow => (flow(loaded, &mut out)?, None, 0),
        ScenarioKind::Hierarchy => {
            let (s, t) = hierarchy(loaded, &mut out)?;
            (s, Some(t), 0)
        }
        ScenarioKind::Geometry => (geometry(loaded, &mut out)?, None, 0),
        ScenarioKind::KleinCheck => {
            let (s, f) = klein(loaded, &mut out)?;
            (s, None, f)
        }
    };
    let manifest = out.finish(loaded, summary.clone())?;
    Ok(Outcome { dir: dir.to_path_buf(), manifest, summary, text, failures })
}

fn flow(loaded: &Loaded, out: &mut OutputDir) -> Result<serde_json::Value> {
    let s = &loaded.scenario;
    let config = s.solver.clone().expect("validated flow scenario");
    let profile = loaded.profile.as_ref().expect("validated flow scenario");
    let solver = FlowSolver::new(config)?;
    let cfg = solver.config();
    let (c, minus1) = (cfg.component_count, cfg.flow_level < 0);
    let record_every = s.output.record_every;

    let mut frames = out.stream("frames.csv")?;
    let mut header = String::from("tau,node,l");
    for k in 0..c {
        let _ = write!(header, ",v{k}");
    }
    if minus1 {
        header.push_str(",e_par");
        for k in 0..c {
            let _ = write!(header, ",e_perp{k}");
        }
    }
    frames.line(&header)?;
    let write_frame = |w: &mut crate::output::ArtifactWriter, st: &FlowState| -> Result<()> {
        let mut row = String::new();
        for (i, l) in solver.grid().iter().enumerate() {
            row.clear();
            let _ = write!(row, "{},{i},{l}", st.tau);
            for x in &st.v[i * c..(i + 1) * c] {
                let _ = write!(row, ",{x}");
            }
            if let (Some(p), Some(q)) = (&st.e_par, &st.e_perp) {
                let _ = write!(row, ",{}", p[i]);
                for x in &q[i * c..(i + 1) * c] {
                    let _ = write!(row, ",{x}");
                }
            }
            w.line(&row)?;
        }
        Ok(())
    };

    let mut state = solver.initial_state(profile)?;
    let mut taus = vec![state.tau];
    let mut values = vec![solver.monitor(&state)?];
    write_frame(&mut frames, &state)?;
    let (mut max_drift, mut sg_max, mut singular_max) = (0.0f64, 0.0f64, 0usize);
    if minus1 {
        max_drift = solver.frame_drift(&state.v)?;
    }
    let steps = solver.step_count();
    for n in 1..=steps {
        let next = solver.step(&state)?;
        if minus1 {
            max_drift = max_drift.max(solver.frame_drift(&next.v)?);
            let r = solver.sg_residual(&state, &next, s.diagnostics.sg_singular_tol)?;
            sg_max = sg_max.max(r.max());
            singular_max = singular_max.max(r.singular.len());
        }
        state = next;
        if n == steps || n % record_every == 0 {
            taus.push(state.tau);
            values.push(solver.monitor(&state)?);
            write_frame(&mut frames, &state)?;
        }
    }
    out.close(frames)?;

    let levels = &cfg.monitor_set;
    let mut conserved = out.stream("conserved.csv")?;
    let mut head = String::from("tau");
    for l in levels {
        let _ = write!(head, ",H{l}");
    }
    conserved.line(&head)?;
    for (t, vals) in taus.iter().zip(&values) {
        let mut row = format!("{t}");
        for v in vals {
            let _ = write!(row, ",{v}");
        }
        conserved.line(&row)?;
    }
    out.close(conserved)?;

    let drift: Vec<f64> = (0..levels.len())
        .map(|i| {
            let base = values[0][i];
            let scale = base.abs().max(f64::MIN_POSITIVE);
            values.iter().map(|v| (v[i] - base).abs() / scale).fold(0.0, f64::max)
        })
        .collect();
    let max_abs = state.v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut summary = json!({
        "steps": steps,
        "dt": cfg.dt,
        "final_tau": state.tau,
        "boundary": cfg.boundary(),
        "records": taus.len(),
        "max_abs_v_final": max_abs,
        "conserved": { "levels": levels, "relative_drift": drift },
    });
    if minus1 {
        summary["minus_one"] = json!({
            "max_frame_drift": max_drift,
            "sg_residual_max": sg_max,
            "sg_singular_nodes_max": singular_max,
            "sg_singular_tol": s.diagnostics.sg_singular_tol,
        });
    }
    Ok(summary)
}

fn hierarchy(loaded: &Loaded, out: &mut OutputDir) -> Result<(serde_json::Value, String)> {
    let block = loaded.scenario.hierarchy.clone().unwrap_or_default();
    let a = DiffAlgebra::new(block.max_order);
    let mut text = String::new();
    let mut files = Vec::new();
    for &sector in &block.sectors {
        let h = a
            .generate_hierarchy(block.levels, sector)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        let body = golden::render(&h);
        let name = golden::file_name(sector);
        out.write(&name, &body)?;
        files.push(name);
        text.push_str(&body);
        if block.components == 1 {
            let mut scalar = format!("# scalar reduction, sector {}\n", sector.short_name());
            for l in &h.levels {
                let _ = writeln!(scalar, "\n[level {}]\nflow = {}", l.k, vector_to_scalar_sector(&l.flow));
            }
            let name = format!("scalar_{}.txt", sector.short_name());
            out.write(&name, &scalar)?;
            files.push(name);
        }
    }
    let summary = json!({ "levels": block.levels, "sectors": block.sectors, "files": files });
    Ok((summary, text))
}

fn geometry(loaded: &Loaded, out: &mut OutputDir) -> Result<serde_json::Value> {
    let s = &loaded.scenario;
    let block = s.geometry.as_ref().expect("validated geometry scenario");
    let fx = load_fixture(&block.fixture, s.alpha, &loaded.base_dir)?;
    let an = analyze(&fx, block.exec)?;
    let d = fx.chart.dim();

    let mut cols: Vec<(String, &[f64])> = vec![
        ("hR".into(), &an.ricci.h_scalar),
        ("vR".into(), &an.ricci.v_scalar),
        ("sR".into(), &an.ricci.scalar),
    ];
    for a in 0..d {
        for b in 0..d {
            cols.push((format!("G_{}_{}", a + 1, b + 1), an.ricci.einstein(a, b)));
        }
    }
    out.write("curvature.txt", &write_table(&fx.chart, &fx.metadata, &cols, CURVATURE_MARGIN))?;

    let mut cols: Vec<(String, &[f64])> = Vec::new();
    for t in 0..d {
        for b in 0..d {
            for g in b + 1..d {
                cols.push((format!("T_{}_{}_{}", t + 1, b + 1, g + 1), &an.torsion[(t * d + b) * d + g]));
            }
        }
    }
    out.write("torsion.txt", &write_table(&fx.chart, &fx.metadata, &cols, CURVATURE_MARGIN))?;

    let mut cols: Vec<(String, &[f64])> = Vec::new();
    for t in 0..d {
        for b in 0..d {
            for g in 0..d {
                cols.push((format!("Gamma_{}_{}_{}", t + 1, b + 1, g + 1), an.conn.gamma(t, b, g)));
            }
        }
    }
    out.write("connection.txt", &write_table(&fx.chart, &fx.metadata, &cols, an.conn.margin()))?;
    Ok(serde_json::to_value(&an.summary).expect("summary serializes"))
}

fn klein(loaded: &Loaded, out: &mut OutputDir) -> Result<(serde_json::Value, usize)> {
    let s = &loaded.scenario;
    let block = s.klein.clone().unwrap_or_default();
    let rows = klein_residuals(&block.dims, block.samples, s.seed)?;
    let mut csv = String::from("dim,identity,max_residual,passed\n");
    let mut failures = 0;
    for r in &rows {
        let ok = r.max_residual <= block.tolerance;
        failures += usize::from(!ok);
        let _ = writeln!(csv, "{},\"{}\",{},{ok}", r.dim, r.identity, r.max_residual);
    }
    out.write("klein.csv", &csv)?;
    let summary = json!({
        "samples": block.samples,
        "tolerance": block.tolerance,
        "failures": failures,
        "residuals": rows,
    });
    Ok((summary, failures))
}
