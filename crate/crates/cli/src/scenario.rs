//! Scenario files: a versioned TOML schema describing one run.

use std::path::{Path, PathBuf};

use fracflow::diffpoly::Sector;
use fracflow::flow::{Profile, SolverConfig};
use fracflow::{ExecMode, FractionalOrder};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Geometry,
    Hierarchy,
    Flow,
    KleinCheck,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Geometry => "geometry",
            ScenarioKind::Hierarchy => "hierarchy",
            ScenarioKind::Flow => "flow",
            ScenarioKind::KleinCheck => "klein-check",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub kind: ScenarioKind,
    /// Fractional order α ∈ (0, 1] used by every block.
    #[serde(default = "one")]
    pub alpha: f64,
    /// Seed for randomized checks.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    /// Flow solver settings; `order` is taken from `alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<HierarchyBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub klein: Option<KleinBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Relative paths are resolved against the scenario file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Write a frame every this many steps (the first and last are always written).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, record_every: default_record_every() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    /// Nodes with `√(1 − |e⊥|²)` below this are excluded from the sine-Gordon residual.
    #[serde(default = "default_singular_tol")]
    pub sg_singular_tol: f64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self { sg_singular_tol: default_singular_tol() }
    }
}

/// A built-in profile, or samples read from a file.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    File(ProfileFile),
    Builtin(Profile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub kind: FileTag,
    pub path: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileTag {
    File,
}

impl<'de> Deserialize<'de> for ProfileSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let v = toml::Value::deserialize(d)?;
        if v.get("kind").and_then(|k| k.as_str()) == Some("file") {
            v.try_into().map(ProfileSpec::File).map_err(D::Error::custom)
        } else {
            let p: Profile = v.clone().try_into().map_err(D::Error::custom)?;
            // Tagged unit variants (`zero`) would otherwise ignore extra keys.
            let known = toml::Value::try_from(&p).map_err(D::Error::custom)?;
            if let (Some(given), Some(known)) = (v.as_table(), known.as_table()) {
                if let Some(k) = given.keys().find(|k| !known.contains_key(*k)) {
                    return Err(D::Error::custom(format!("unknown field `{k}` in profile")));
                }
            }
            Ok(ProfileSpec::Builtin(p))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyBlock {
    /// Highest level `k_max`.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "both_sectors")]
    pub sectors: Vec<Sector>,
    /// With one component the scalar (mKdV) reduction is written as well.
    #[serde(default = "default_components")]
    pub components: usize,
    /// Highest derivative order the algebra may create.
    #[serde(default = "default_max_order")]
    pub max_order: u8,
}

impl Default for HierarchyBlock {
    fn default() -> Self {
        Self {
            levels: default_levels(),
            sectors: both_sectors(),
            components: default_components(),
            max_order: default_max_order(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    /// Built-in fixture name or path to a fixture file.
    pub fixture: String,
    #[serde(default)]
    pub exec: ExecMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KleinBlock {
    /// Dimensions `n` (and `m`) of the sectors checked.
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_klein_tol")]
    pub tolerance: f64,
}

impl Default for KleinBlock {
    fn default() -> Self {
        Self { dims: default_dims(), samples: default_samples(), tolerance: default_klein_tol() }
    }
}

fn one() -> f64 {
    1.0
}
fn default_record_every() -> usize {
    1
}
fn default_singular_tol() -> f64 {
    1e-2
}
fn default_levels() -> usize {
    2
}
fn both_sectors() -> Vec<Sector> {
    vec![Sector::Horizontal, Sector::Vertical]
}
fn default_components() -> usize {
    1
}
fn default_max_order() -> u8 {
    12
}
fn default_dims() -> Vec<usize> {
    vec![2, 3, 4, 5]
}
fn default_samples() -> usize {
    200
}
fn default_klein_tol() -> f64 {
    1e-12
}

/// A validated scenario with file references resolved.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub scenario: Scenario,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
    /// The initial profile for flow scenarios, with files read into samples.
    pub profile: Option<Profile>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

/// Reads and validates a scenario file.
pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &base)
}

/// Parses and validates scenario text; `base_dir` resolves relative paths.
pub fn parse(text: &str, base_dir: &Path) -> Result<Loaded> {
    let raw: toml::Table = toml::from_str(text).map_err(|e| schema(e.to_string()))?;
    if let Some(v) = raw.get("schema_version") {
        if v.as_integer() != Some(SCHEMA_VERSION as i64) {
            return Err(schema(format!("unsupported schema_version {v} (expected {SCHEMA_VERSION})")));
        }
    }
    if raw.get("solver").and_then(|s| s.get("order")).is_some() {
        return Err(schema("solver.order is not allowed; set the top-level `alpha`"));
    }
    let scenario: Scenario = toml::from_str(text).map_err(|e| schema(e.to_string()))?;
    finalize(scenario, base_dir)
}

/// Validates a scenario built in code (as the ad hoc subcommands do).
pub fn finalize(mut scenario: Scenario, base_dir: &Path) -> Result<Loaded> {
    if scenario.schema_version != SCHEMA_VERSION {
        return Err(schema(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            scenario.schema_version
        )));
    }
    let profile = validate(&mut scenario, base_dir)?;
    Ok(Loaded { scenario, base_dir: base_dir.to_path_buf(), profile })
}

/// Cross-field checks; fills derived settings and resolves the profile.
fn validate(s: &mut Scenario, base_dir: &Path) -> Result<Option<Profile>> {
    let order = FractionalOrder::new(s.alpha).map_err(|e| schema(format!("alpha: {e}")))?;
    let present = [
        ("solver", s.solver.is_some(), ScenarioKind::Flow),
        ("profile", s.profile.is_some(), ScenarioKind::Flow),
        ("hierarchy", s.hierarchy.is_some(), ScenarioKind::Hierarchy),
        ("geometry", s.geometry.is_some(), ScenarioKind::Geometry),
        ("klein", s.klein.is_some(), ScenarioKind::KleinCheck),
    ];
    for (name, here, owner) in present {
        if here && owner != s.kind {
            return Err(schema(format!("[{name}] is not used by a {} scenario", s.kind.name())));
        }
    }
    if s.output.record_every == 0 {
        return Err(schema("output.record_every must be at least 1"));
    }
    if !(s.diagnostics.sg_singular_tol >= 0.0 && s.diagnostics.sg_singular_tol < 1.0) {
        return Err(schema("diagnostics.sg_singular_tol must lie in [0, 1)"));
    }
    match s.kind {
        ScenarioKind::Flow => {
            let solver = s.solver.as_mut().ok_or_else(|| schema("a flow scenario needs a [solver] block"))?;
            solver.order = order;
            solver.validate()?;
            let spec = s.profile.as_ref().ok_or_else(|| schema("a flow scenario needs a [profile] block"))?;
            let profile = match spec {
                ProfileSpec::Builtin(p) => p.clone(),
                ProfileSpec::File(f) => read_profile_file(&base_dir.join(&f.path), solver)?,
            };
            let grid: Vec<f64> = (0..solver.node_count).map(|i| i as f64 * solver.step()).collect();
            profile.sample(&grid, solver.component_count).map_err(|e| schema(format!("profile: {e}")))?;
            return Ok(Some(profile));
        }
        ScenarioKind::Hierarchy => {
            let h = s.hierarchy.get_or_insert_with(HierarchyBlock::default);
            if 2 * h.levels + 1 > h.max_order as usize {
                return Err(schema(format!(
                    "hierarchy.levels = {} needs max_order ≥ {}",
                    h.levels,
                    2 * h.levels + 1
                )));
            }
            if h.components == 0 || h.sectors.is_empty() {
                return Err(schema("hierarchy.components and hierarchy.sectors must be non-empty"));
            }
        }
        ScenarioKind::Geometry => {
            let g = s.geometry.as_ref().ok_or_else(|| schema("a geometry scenario needs a [geometry] block"))?;
            if g.fixture.trim().is_empty() {
                return Err(schema("geometry.fixture is empty"));
            }
        }
        ScenarioKind::KleinCheck => {
            let k = s.klein.get_or_insert_with(KleinBlock::default);
            if k.dims.iter().any(|&d| !(2..=16).contains(&d)) || k.dims.is_empty() {
                return Err(schema("klein.dims must be non-empty with entries in 2..=16"));
            }
            if k.samples == 0 || !(k.tolerance > 0.0) {
                return Err(schema("klein.samples and klein.tolerance must be positive"));
            }
        }
    }
    Ok(None)
}

/// Reads `node c0 c1 …` rows (whitespace or comma separated, `#` comments);
/// every node must appear exactly once.
pub fn read_profile_file(path: &Path, solver: &SolverConfig) -> Result<Profile> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let (n, c) = (solver.node_count, solver.component_count);
    let mut values = vec![f64::NAN; n * c];
    let mut seen = vec![false; n];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| schema(format!("{}:{}: {msg}", path.display(), lineno + 1));
        let fields: Vec<&str> = line.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if fields.len() != c + 1 {
            return Err(bad(format!("expected node and {c} component(s), got {} field(s)", fields.len())));
        }
        let node: usize = fields[0].parse().map_err(|_| bad(format!("bad node index {:?}", fields[0])))?;
        if node >= n {
            return Err(bad(format!("node {node} outside 0..{n}")));
        }
        if std::mem::replace(&mut seen[node], true) {
            return Err(bad(format!("node {node} listed twice")));
        }
        for (k, f) in fields[1..].iter().enumerate() {
            let x: f64 = f.parse().map_err(|_| bad(format!("bad number {f:?}")))?;
            if !x.is_finite() {
                return Err(bad(format!("non-finite value {f:?}")));
            }
            values[node * c + k] = x;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(schema(format!("{}: node {missing} missing", path.display())));
    }
    Ok(Profile::Tabular { values })
}
