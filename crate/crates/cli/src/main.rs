//! `fracflow`: scenario runner and formula verification.

mod analysis;
mod error;
mod golden;
mod output;
mod run;
mod scenario;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracflow::diffpoly::Sector;
use fracflow::flow::{Profile, SolverConfig};
use fracflow::ExecMode;

use crate::error::{CliError, Result};
use crate::scenario::{
    Diagnostics, GeometryBlock, HierarchyBlock, OutputSpec, ProfileSpec, Scenario, ScenarioKind, SCHEMA_VERSION,
};
use crate::verify::VerifyKind;

#[derive(Parser)]
#[command(name = "fracflow", version, about = "Fractional curve-flow scenarios and formula verification")]
struct Cli {
    /// Output directory; overrides `output.dir` of scenario files.
    #[arg(long, global = true, env = "FRACFLOW_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { scenario: PathBuf },
    /// Check printed formulas, golden files and identities; nonzero exit on any failure.
    Verify {
        #[arg(value_enum, default_value = "all")]
        kind: VerifyKind,
        /// Directory holding hierarchy_h.txt and hierarchy_v.txt.
        #[arg(long, env = "FRACFLOW_GOLDEN_DIR")]
        golden_dir: Option<PathBuf>,
        /// Seed of the randomized Klein samples.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate hierarchy levels 0..=K and print their canonical text.
    Hierarchy {
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 1)]
        components: usize,
        #[arg(long, value_enum, default_value = "both")]
        sector: SectorArg,
    },
    /// Integrate a flow from a built-in profile.
    Flow(FlowArgs),
    /// Connection, torsion and curvature of a fixture (built-in name or file).
    Geometry {
        #[arg(long)]
        fixture: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SectorArg {
    H,
    V,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Soliton,
    Kink,
    Gaussian,
    Zero,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long, value_enum, default_value = "soliton")]
    profile: ProfileArg,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Flow level: −1 (sine-Gordon), 0, 1 (mKdV) or 2.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    level: i32,
    #[arg(long, default_value_t = 512)]
    nodes: usize,
    /// Domain length (default 32π).
    #[arg(long)]
    length: Option<f64>,
    /// Time step (default: largest stable step dividing t_end).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1)]
    components: usize,
    /// Constant curvature of the shifted flow.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    curvature: f64,
    /// Soliton wave number.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Profile center (default: middle of the domain).
    #[arg(long)]
    center: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    #[arg(long)]
    sequential: bool,
}

fn exec(sequential: bool) -> ExecMode {
    if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn base_scenario(kind: ScenarioKind, alpha: f64) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        kind,
        alpha,
        seed: 0,
        output: OutputSpec::default(),
        solver: None,
        profile: None,
        diagnostics: Diagnostics::default(),
        hierarchy: None,
        geometry: None,
        klein: None,
    }
}

fn flow_scenario(a: &FlowArgs) -> Scenario {
    let length = a.length.unwrap_or(32.0 * std::f64::consts::PI);
    let center = a.center.unwrap_or(0.5 * length);
    let mut cfg = SolverConfig::new(a.level, 1.0, a.t_end, a.nodes, length);
    cfg.component_count = a.components;
    cfg.curvature_const = a.curvature;
    cfg.exec = exec(a.sequential);
    cfg.dt = a.dt.unwrap_or_else(|| {
        let h = cfg.step();
        let target = if a.level >= 1 { 0.8 * cfg.dt_limit().unwrap_or(h) } else { 0.1 * h };
        a.t_end / (a.t_end / target).ceil().max(1.0)
    });
    let profile = match a.profile {
        ProfileArg::Soliton => Profile::Soliton { k: a.k, center },
        ProfileArg::Kink => Profile::Kink { center },
        ProfileArg::Gaussian => Profile::Gaussian { amplitude: a.amplitude, width: a.width, center },
        ProfileArg::Zero => Profile::Zero,
    };
    let mut s = base_scenario(ScenarioKind::Flow, a.alpha);
    s.output.record_every = a.record_every.max(1);
    s.solver = Some(cfg);
    s.profile = Some(ProfileSpec::Builtin(profile));
    s
}

fn execute(cli: Cli) -> Result<()> {
    let out_override = cli.output_dir.as_deref();
    let loaded = match cli.command {
        Command::Verify { kind, golden_dir, seed } => {
            let dir = golden_dir.unwrap_or_else(golden::default_dir);
            let report = verify::verify(kind, &dir, seed)?;
            print!("{}", report.render());
            return match report.failures() {
                0 => Ok(()),
                n => Err(CliError::Failed(n)),
            };
        }
        Command::Run { scenario } => scenario::load(&scenario)?,
        Command::Hierarchy { levels, components, sector } => {
            let mut s = base_scenario(ScenarioKind::Hierarchy, 1.0);
            let sectors = match sector {
                SectorArg::H => vec![Sector::Horizontal],
                SectorArg::V => vec![Sector::Vertical],
                SectorArg::Both => vec![Sector::Horizontal, Sector::Vertical],
            };
            s.hierarchy = Some(HierarchyBlock { levels, components, sectors, ..Default::default() });
            scenario::finalize(s, Path::new("."))?
        }
        Command::Flow(args) => scenario::finalize(flow_scenario(&args), Path::new("."))?,
        Command::Geometry { fixture, alpha, sequential } => {
            let mut s = base_scenario(ScenarioKind::Geometry, alpha);
            s.geometry = Some(GeometryBlock { fixture, exec: exec(sequential) });
            scenario::finalize(s, Path::new("."))?
        }
    };
    let dir = output::resolve_dir(out_override, &loaded);
    let outcome = run::run(&loaded, &dir)?;
    if let Some(text) = &outcome.text {
        print!("{text}");
    } else {
        println!("{}", serde_json::to_string_pretty(&outcome.summary).expect("summary serializes"));
    }
    eprintln!("wrote {} (manifest {})", outcome.dir.display(), outcome.manifest.display());
    match outcome.failures {
        0 => Ok(()),
        n => Err(CliError::Failed(n)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
