use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::moments::{BetaFloor, BranchWeighting, ProjectionMode, UpdateOptions};
use crate::property::{InitPolicy, PropertyTable, SpreadKind};

pub const CONFIG_VERSION: u32 = 1;

const BUILTIN_SIMULATE: &str = include_str!("../../configs/simulate.toml");
const BUILTIN_CORRECT: &str = include_str!("../../configs/correct.toml");
const BUILTIN_GAIT: &str = include_str!("../../configs/gait.toml");
const BUILTIN_DOOR: &str = include_str!("../../configs/door.toml");

/// Scenario description read from a versioned TOML file.
///
/// Sections are optional at parse time; each experiment checks for the ones
/// it needs and reports the missing key path otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub seed: u64,
    #[serde(default)]
    pub mode: ProjectionMode,
    #[serde(default)]
    pub weighting: BranchWeighting,
    #[serde(default = "default_epsilon")]
    pub beta_floor_epsilon: f64,
    #[serde(default)]
    pub table: TableConfig,
    /// Overrides the experiment's default initialisation policy.
    #[serde(default)]
    pub init: Option<InitPolicy>,
    #[serde(default)]
    pub scene: Option<SceneConfig>,
    #[serde(default)]
    pub classifier: Option<ClassifierConfig>,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default)]
    pub correction: Option<CorrectionConfig>,
    #[serde(default)]
    pub gait: Option<GaitConfig>,
    #[serde(default)]
    pub door: Option<DoorConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory relative table paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_epsilon() -> f64 {
    BetaFloor::default().epsilon
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    /// `"friction"`, `"door"`, or a path to a table file.
    #[serde(default = "default_table_source")]
    pub source: String,
    /// Subset of rows to keep, in this order.
    #[serde(default)]
    pub classes: Option<Vec<String>>,
    /// How the built-in door table's spread figure is read.
    #[serde(default)]
    pub spread: SpreadKind,
}

fn default_table_source() -> String {
    "friction".into()
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            source: default_table_source(),
            classes: None,
            spread: SpreadKind::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// Cells along x.
    pub width: usize,
    /// Cells along y.
    pub height: usize,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    pub background: String,
    #[serde(default)]
    pub regions: Vec<RegionConfig>,
    #[serde(default)]
    pub camera: Option<CameraConfig>,
}

fn default_resolution() -> f64 {
    crate::map::DEFAULT_RESOLUTION
}

/// Axis-aligned block of cells `[x₀, x₁) × [y₀, y₁)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub class: String,
    pub x: [usize; 2],
    pub y: [usize; 2],
}

/// Downward-looking pinhole camera at a fixed altitude above the scene plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    #[serde(default)]
    pub cx: Option<f64>,
    #[serde(default)]
    pub cy: Option<f64>,
    pub altitude: f64,
    pub frames: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Camera `(x, y)` per frame, cycled; the scene centre when absent.
    #[serde(default)]
    pub positions: Option<Vec<[f64; 2]>>,
}

fn default_stride() -> usize {
    crate::map::DEFAULT_STRIDE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassifierConfig {
    Identity,
    Uniform,
    Symmetric { accuracy: f64 },
    Matrix { rows: Vec<Vec<f64>> },
}

/// Where the per-cell class belief comes from before any measurement.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorConfig {
    /// Rendered frames fused through the map.
    #[default]
    Vision,
    /// Every scene cell gets `α_favored = ratio`, all other entries 1.
    Fixed { favored: String, ratio: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionSelection {
    /// `measurements` regions drawn uniformly without replacement from the
    /// misclassified ones.
    #[default]
    RandomMisclassified,
    /// Every misclassified region, in layout order, capped at `measurements`.
    AllMisclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectionConfig {
    pub trials: usize,
    /// Regions measured per trial; 0 gives the vision-only baseline.
    pub measurements: usize,
    #[serde(default)]
    pub selection: RegionSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitConfig {
    #[serde(default = "default_gait_threshold")]
    pub threshold: f64,
    /// One independent trial per value.
    pub measurements: Vec<f64>,
    /// Class belief of the measured patch; uniform when absent.
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    #[serde(default = "default_patch")]
    pub patch_cells: usize,
}

fn default_gait_threshold() -> f64 {
    super::gait::DEFAULT_GAIT_THRESHOLD
}

fn default_patch() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoorConfig {
    /// Applied in order, each posterior becoming the next prior.
    pub measurements: Vec<f64>,
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_density_points")]
    pub density_points: usize,
    /// ψ range of the density curves; derived from the table when absent.
    #[serde(default)]
    pub psi_range: Option<[f64; 2]>,
}

fn default_density_points() -> usize {
    401
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            density_points: default_density_points(),
            psi_range: None,
        }
    }
}

fn cfg_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text, path)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Parses and validates; `origin` labels error messages only.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Built-in scenario for one of `simulate`, `correct`, `gait`, `door`.
    pub fn builtin(name: &str) -> Result<Self> {
        let text = match name {
            "simulate" => BUILTIN_SIMULATE,
            "correct" => BUILTIN_CORRECT,
            "gait" => BUILTIN_GAIT,
            "door" => BUILTIN_DOOR,
            other => return Err(Error::Unsupported(format!("no built-in scenario `{other}`"))),
        };
        Self::parse(text, Path::new(&format!("<builtin:{name}>")))
    }

    pub fn update_options(&self) -> UpdateOptions {
        UpdateOptions {
            mode: self.mode,
            floor: BetaFloor {
                epsilon: self.beta_floor_epsilon,
            },
            weighting: self.weighting,
        }
    }

    /// Hex SHA-256 of the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn resolve_table(&self) -> Result<PropertyTable> {
        let full = match self.table.source.as_str() {
            "friction" => PropertyTable::friction(),
            "door" => PropertyTable::door_forces(self.table.spread),
            path => {
                let p = Path::new(path);
                let p = match (&self.base_dir, p.is_relative()) {
                    (Some(dir), true) => dir.join(p),
                    _ => p.to_path_buf(),
                };
                PropertyTable::load(&p)?
            }
        };
        match &self.table.classes {
            Some(classes) => {
                let names: Vec<&str> = classes.iter().map(String::as_str).collect();
                full.select(&names).map_err(|e| cfg_err("table.classes", e.to_string()))
            }
            None => Ok(full),
        }
    }

    pub fn confusion(&self, k: usize) -> Result<ConfusionMatrix> {
        let c = self
            .classifier
            .as_ref()
            .ok_or_else(|| cfg_err("classifier", "section is required for vision priors"))?;
        let m = match c {
            ClassifierConfig::Identity => ConfusionMatrix::identity(k),
            ClassifierConfig::Uniform => ConfusionMatrix::uniform(k),
            ClassifierConfig::Symmetric { accuracy } => ConfusionMatrix::symmetric(k, *accuracy)
                .map_err(|e| cfg_err("classifier.accuracy", e.to_string()))?,
            ClassifierConfig::Matrix { rows } => {
                ConfusionMatrix::new(rows.clone()).map_err(|e| cfg_err("classifier.rows", e.to_string()))?
            }
        };
        if m.k() != k {
            return Err(cfg_err(
                "classifier.rows",
                format!("matrix is {0}x{0} but the table has {k} classes", m.k()),
            ));
        }
        Ok(m)
    }

    pub fn require_scene(&self) -> Result<&SceneConfig> {
        self.scene.as_ref().ok_or_else(|| cfg_err("scene", "section is required"))
    }

    pub fn require_correction(&self) -> Result<&CorrectionConfig> {
        self.correction.as_ref().ok_or_else(|| cfg_err("correction", "section is required"))
    }

    pub fn require_gait(&self) -> Result<&GaitConfig> {
        self.gait.as_ref().ok_or_else(|| cfg_err("gait", "section is required"))
    }

    pub fn require_door(&self) -> Result<&DoorConfig> {
        self.door.as_ref().ok_or_else(|| cfg_err("door", "section is required"))
    }

    /// Checks ranges and that every class name resolves.
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(cfg_err(
                "version",
                format!("unsupported version {}, expected {CONFIG_VERSION}", self.version),
            ));
        }
        if !(self.beta_floor_epsilon > 0.0 && self.beta_floor_epsilon.is_finite()) {
            return Err(cfg_err("beta_floor_epsilon", "must be positive"));
        }
        if let Some(InitPolicy::Table { c_const }) = self.init {
            if !(c_const > 0.0 && c_const.is_finite()) {
                return Err(cfg_err("init.c_const", "must be positive"));
            }
        }
        if self.output.density_points < 2 {
            return Err(cfg_err("output.density_points", "need at least 2 points"));
        }
        if let Some([lo, hi]) = self.output.psi_range {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(cfg_err("output.psi_range", "must be a finite increasing pair"));
            }
        }

        let classes: Option<Vec<String>> = match self.table.source.as_str() {
            "friction" | "door" => Some(self.resolve_table()?.class_names()),
            _ => self.table.classes.clone(),
        };
        let known = |name: &str, path: String| -> Result<()> {
            match &classes {
                Some(c) if !c.iter().any(|n| n == name) => {
                    Err(cfg_err(path, format!("unknown class `{name}` (known: {})", c.join(", "))))
                }
                _ => Ok(()),
            }
        };

        if let Some(scene) = &self.scene {
            validate_scene(scene, &known)?;
        }
        if let Some(ClassifierConfig::Symmetric { accuracy }) = &self.classifier {
            if !(0.0..=1.0).contains(accuracy) {
                return Err(cfg_err("classifier.accuracy", "must lie in [0, 1]"));
            }
        }
        if let PriorConfig::Fixed { favored, ratio } = &self.prior {
            known(favored, "prior.favored".into())?;
            if !(*ratio > 0.0 && ratio.is_finite()) {
                return Err(cfg_err("prior.ratio", "must be positive"));
            }
        }
        if let Some(g) = &self.gait {
            if !g.threshold.is_finite() {
                return Err(cfg_err("gait.threshold", "must be finite"));
            }
            check_finite(&g.measurements, "gait.measurements")?;
            if let Some(a) = &g.alpha {
                check_alpha(a, "gait.alpha")?;
            }
            if g.patch_cells == 0 {
                return Err(cfg_err("gait.patch_cells", "must be positive"));
            }
        }
        if let Some(d) = &self.door {
            check_finite(&d.measurements, "door.measurements")?;
            if let Some(a) = &d.alpha {
                check_alpha(a, "door.alpha")?;
            }
        }
        if let (Some(c), Some(_)) = (&self.correction, &self.scene) {
            if c.trials == 0 {
                return Err(cfg_err("correction.trials", "must be positive"));
            }
        }
        Ok(())
    }
}

fn check_finite(values: &[f64], path: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(cfg_err(format!("{path}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

fn check_alpha(values: &[f64], path: &str) -> Result<()> {
    match values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        Some(i) => Err(cfg_err(format!("{path}[{i}]"), "must be positive")),
        None => Ok(()),
    }
}

fn validate_scene(scene: &SceneConfig, known: &dyn Fn(&str, String) -> Result<()>) -> Result<()> {
    if scene.width == 0 || scene.height == 0 {
        return Err(cfg_err("scene.width", "scene needs at least one cell per axis"));
    }
    if !(scene.resolution > 0.0 && scene.resolution.is_finite()) {
        return Err(cfg_err("scene.resolution", "must be positive"));
    }
    known(&scene.background, "scene.background".into())?;
    let mut painted = BTreeSet::new();
    for (i, r) in scene.regions.iter().enumerate() {
        let path = format!("scene.regions[{i}]");
        known(&r.class, format!("{path}.class"))?;
        if !(r.x[0] < r.x[1] && r.x[1] <= scene.width) {
            return Err(cfg_err(format!("{path}.x"), format!("{:?} not inside [0, {}]", r.x, scene.width)));
        }
        if !(r.y[0] < r.y[1] && r.y[1] <= scene.height) {
            return Err(cfg_err(format!("{path}.y"), format!("{:?} not inside [0, {}]", r.y, scene.height)));
        }
        for x in r.x[0]..r.x[1] {
            for y in r.y[0]..r.y[1] {
                if !painted.insert((x, y)) {
                    return Err(cfg_err(path, format!("overlaps an earlier region at cell ({x}, {y})")));
                }
            }
        }
    }
    if let Some(cam) = &scene.camera {
        let c = "scene.camera";
        if cam.width == 0 || cam.height == 0 {
            return Err(cfg_err(format!("{c}.width"), "image must be non-empty"));
        }
        if !(cam.fx > 0.0 && cam.fy > 0.0 && cam.fx.is_finite() && cam.fy.is_finite()) {
            return Err(cfg_err(format!("{c}.fx"), "focal lengths must be positive"));
        }
        if !(cam.altitude > 0.0 && cam.altitude.is_finite()) {
            return Err(cfg_err(format!("{c}.altitude"), "must be positive"));
        }
        if cam.stride == 0 {
            return Err(cfg_err(format!("{c}.stride"), "must be positive"));
        }
        if let Some(p) = &cam.positions {
            if p.is_empty() {
                return Err(cfg_err(format!("{c}.positions"), "must not be empty when given"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1
seed = 3

[table]
classes = ["snow", "ice"]

[scene]
width = 4
height = 4
background = "snow"
regions = [{ class = "ice", x = [0, 2], y = [0, 2] }]
"#;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::parse(text, Path::new("test.toml"))
    }

    fn config_path(err: Error) -> String {
        match err {
            Error::Config { path, .. } => path,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_parses() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.mode, ProjectionMode::Paper);
        assert_eq!(c.resolve_table().unwrap().class_names(), ["snow", "ice"]);
    }

    #[test]
    fn seed_is_required() {
        let text = MINIMAL.replace("seed = 3\n", "");
        assert!(matches!(parse(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn unknown_class_reports_path() {
        let text = MINIMAL.replace("class = \"ice\"", "class = \"lava\"");
        assert_eq!(config_path(parse(&text).unwrap_err()), "scene.regions[0].class");
    }

    #[test]
    fn out_of_bounds_region_reports_axis() {
        let text = MINIMAL.replace("y = [0, 2]", "y = [3, 9]");
        assert_eq!(config_path(parse(&text).unwrap_err()), "scene.regions[0].y");
    }

    #[test]
    fn wrong_version_is_rejected() {
        let text = MINIMAL.replace("version = 1", "version = 2");
        assert_eq!(config_path(parse(&text).unwrap_err()), "version");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nbogus = 1\n");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn confusion_dimension_checked() {
        let text = format!("{MINIMAL}\n[classifier]\nkind = \"matrix\"\nrows = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]\n");
        let c = parse(&text).unwrap();
        assert_eq!(config_path(c.confusion(2).unwrap_err()), "classifier.rows");
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse(MINIMAL).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 4;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn builtins_parse() {
        for name in ["simulate", "correct", "gait", "door"] {
            ScenarioConfig::builtin(name).unwrap();
        }
    }
}
