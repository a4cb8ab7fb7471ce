//! Run configuration: a flat TOML file, overridden key by key by flags.
//!
//! Keys:
//!
//! | key              | type             | default                        |
//! |------------------|------------------|--------------------------------|
//! | `command`        | string           | `"convergence"`                |
//! | `levelset`       | string           | `"circle"`                     |
//! | `order`          | integer          | `2`                            |
//! | `n`              | integer          | `20`                           |
//! | `resolutions`    | integer array    | study defaults for the dimension |
//! | `variant`        | string           | `"13"` (`"A13"` in 3D)         |
//! | `quad_order`     | integer          | `11`                           |
//! | `depth_limit`    | integer          | `5`                            |
//! | `study`          | string           | `"interface"`                  |
//! | `out`            | string           | per command                    |
//! | `export_density` | integer          | `2`                            |
//!
//! Level sets: `circle`, `flower` (2D), `sphere`, `bumpy` (3D).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use cutmesh::convergence_harness::StudyKind;
use cutmesh::levelset::AnalyticField;
use cutmesh::quadrature::MAX_RULE_ORDER;
use cutmesh::reconstruction::SearchVariant;
use cutmesh::reference_elements::MAX_ORDER;
use toml::{Table, Value};

/// A configuration problem, located by the key it concerns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Reconstruct,
    Decompose,
    Convergence,
    ExportMesh,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Reconstruct => "reconstruct",
            Command::Decompose => "decompose",
            Command::Convergence => "convergence",
            Command::ExportMesh => "export-mesh",
        }
    }

    fn default_output(self) -> &'static str {
        match self {
            Command::Reconstruct => "interface.vtk",
            Command::Decompose => "regions.csv",
            Command::Convergence => "convergence.csv",
            Command::ExportMesh => "mesh.vtk",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Command::Reconstruct, Command::Decompose, Command::Convergence, Command::ExportMesh]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelSetName {
    Circle,
    Flower,
    Sphere,
    Bumpy,
}

impl LevelSetName {
    pub fn name(self) -> &'static str {
        match self {
            LevelSetName::Circle => "circle",
            LevelSetName::Flower => "flower",
            LevelSetName::Sphere => "sphere",
            LevelSetName::Bumpy => "bumpy",
        }
    }

    pub fn field(self) -> AnalyticField {
        match self {
            LevelSetName::Circle => AnalyticField::circle(),
            LevelSetName::Flower => AnalyticField::Flower2D,
            LevelSetName::Sphere => AnalyticField::sphere(),
            LevelSetName::Bumpy => AnalyticField::bumpy(),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            LevelSetName::Circle | LevelSetName::Flower => 2,
            LevelSetName::Sphere | LevelSetName::Bumpy => 3,
        }
    }
}

impl FromStr for LevelSetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [LevelSetName::Circle, LevelSetName::Flower, LevelSetName::Sphere, LevelSetName::Bumpy]
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown level set {s:?}, expected circle, flower, sphere or bumpy"))
    }
}

fn study_name(kind: StudyKind) -> &'static str {
    match kind {
        StudyKind::Interface => "interface",
        StudyKind::Volume => "volume",
    }
}

fn parse_study(s: &str) -> Result<StudyKind, String> {
    match s {
        "interface" => Ok(StudyKind::Interface),
        "volume" => Ok(StudyKind::Volume),
        _ => Err(format!("unknown study {s:?}, expected interface or volume")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub level_set: LevelSetName,
    pub order: usize,
    /// Elements per box edge for the single-mesh commands.
    pub n: usize,
    /// Convergence resolutions; the study defaults if unset.
    pub resolutions: Option<Vec<usize>>,
    pub variant: SearchVariant,
    pub quad_order: usize,
    pub depth_limit: usize,
    pub study: StudyKind,
    pub out: Option<PathBuf>,
    /// Lattice subdivisions per edge when exporting curved elements.
    pub export_density: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Convergence,
            level_set: LevelSetName::Circle,
            order: 2,
            n: 20,
            resolutions: None,
            variant: SearchVariant::default(),
            quad_order: 11,
            depth_limit: 5,
            study: StudyKind::Interface,
            out: None,
            export_density: 2,
        }
    }
}

const KEYS: [&str; 11] = [
    "command",
    "levelset",
    "order",
    "n",
    "resolutions",
    "variant",
    "quad_order",
    "depth_limit",
    "study",
    "out",
    "export_density",
];

fn as_count(key: &str, v: &Value) -> Result<usize, ConfigError> {
    v.as_integer()
        .and_then(|i| usize::try_from(i).ok())
        .ok_or_else(|| ConfigError::new(key, format!("expected a non-negative integer, found {v}")))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
    v.as_str()
        .ok_or_else(|| ConfigError::new(key, format!("expected a string, found {v}")))
}

fn enum_value<T>(key: &str, s: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
    parse(s).map_err(|m| ConfigError::new(key, m))
}

fn read_config(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))
}

fn parse_variant(key: &str, s: &str) -> Result<SearchVariant, ConfigError> {
    s.parse().map_err(|e: cutmesh::Error| ConfigError::new(key, e.to_string()))
}

impl RunConfig {
    /// Output file, falling back to a per-command name.
    pub fn output_path(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(self.command.default_output()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg = Self::unvalidated(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let cfg = Self::unvalidated(&read_config(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn unvalidated(text: &str) -> Result<Self, ConfigError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::new("config", e.message()))?;
        let mut cfg = RunConfig::default();
        cfg.apply_table(&table)?;
        Ok(cfg)
    }

    fn apply_table(&mut self, table: &Table) -> Result<(), ConfigError> {
        for (key, v) in table {
            match key.as_str() {
                "command" => self.command = enum_value(key, as_str(key, v)?, <Command as FromStr>::from_str)?,
                "levelset" => self.level_set = enum_value(key, as_str(key, v)?, LevelSetName::from_str)?,
                "order" => self.order = as_count(key, v)?,
                "n" => self.n = as_count(key, v)?,
                "resolutions" => {
                    let items = v
                        .as_array()
                        .ok_or_else(|| ConfigError::new(key, format!("expected an integer array, found {v}")))?;
                    let list = items
                        .iter()
                        .enumerate()
                        .map(|(i, x)| as_count(&format!("{key}[{i}]"), x))
                        .collect::<Result<Vec<_>, _>>()?;
                    self.resolutions = Some(list);
                }
                "variant" => self.variant = parse_variant(key, as_str(key, v)?)?,
                "quad_order" => self.quad_order = as_count(key, v)?,
                "depth_limit" => self.depth_limit = as_count(key, v)?,
                "study" => self.study = enum_value(key, as_str(key, v)?, parse_study)?,
                "out" => self.out = Some(PathBuf::from(as_str(key, v)?)),
                "export_density" => self.export_density = as_count(key, v)?,
                _ => {
                    return Err(ConfigError::new(
                        key,
                        format!("unknown key, expected one of {}", KEYS.join(", ")),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=MAX_ORDER).contains(&self.order) {
            return Err(ConfigError::new("order", format!("must lie in 1..={MAX_ORDER}")));
        }
        if self.n == 0 {
            return Err(ConfigError::new("n", "must be positive"));
        }
        if let Some(r) = &self.resolutions {
            if r.is_empty() || r.contains(&0) || r.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ConfigError::new(
                    "resolutions",
                    "must be positive and strictly increasing",
                ));
            }
        }
        if !(1..=MAX_RULE_ORDER).contains(&self.quad_order) {
            return Err(ConfigError::new("quad_order", format!("must lie in 1..={MAX_RULE_ORDER}")));
        }
        if self.export_density == 0 {
            return Err(ConfigError::new("export_density", "must be at least 1"));
        }
        Ok(())
    }

    /// The configuration as a file that parses back to it.
    pub fn to_toml(&self) -> String {
        let mut t = Table::new();
        t.insert("command".into(), self.command.name().into());
        t.insert("levelset".into(), self.level_set.name().into());
        t.insert("order".into(), (self.order as i64).into());
        t.insert("n".into(), (self.n as i64).into());
        if let Some(r) = &self.resolutions {
            t.insert(
                "resolutions".into(),
                Value::Array(r.iter().map(|&v| Value::Integer(v as i64)).collect()),
            );
        }
        t.insert("variant".into(), self.variant.to_string().into());
        t.insert("quad_order".into(), (self.quad_order as i64).into());
        t.insert("depth_limit".into(), (self.depth_limit as i64).into());
        t.insert("study".into(), study_name(self.study).into());
        if let Some(out) = &self.out {
            t.insert("out".into(), out.to_string_lossy().into_owned().into());
        }
        t.insert("export_density".into(), (self.export_density as i64).into());
        t.to_string()
    }
}

/// Command-line overrides. Each flag replaces the file value of the same key.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// TOML configuration file
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Polynomial order of the background mesh
    #[arg(long, value_name = "P")]
    pub order: Option<usize>,
    /// Elements per box edge
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,
    /// Search variant code such as 13, 24b or A13
    #[arg(long, value_name = "CODE")]
    pub variant: Option<String>,
    /// circle, flower, sphere or bumpy
    #[arg(long, value_name = "NAME")]
    pub levelset: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "D")]
    pub export_density: Option<usize>,
    #[arg(long, value_name = "L")]
    pub depth_limit: Option<usize>,
    #[arg(long, value_name = "Q")]
    pub quad_order: Option<usize>,
    /// interface or volume
    #[arg(long, value_name = "KIND")]
    pub study: Option<String>,
    /// Comma-separated convergence resolutions
    #[arg(long, value_name = "N,N,...", value_delimiter = ',')]
    pub resolutions: Option<Vec<usize>>,
}

/// File values (if any), then flags, then validation.
pub fn parse_config(command: Command, flags: &Flags) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::unvalidated(&read_config(path)?)?,
        None => RunConfig::default(),
    };
    cfg.command = command;
    if let Some(v) = flags.order {
        cfg.order = v;
    }
    if let Some(v) = flags.n {
        cfg.n = v;
    }
    if let Some(v) = &flags.variant {
        cfg.variant = parse_variant("variant", v)?;
    }
    if let Some(v) = &flags.levelset {
        cfg.level_set = enum_value("levelset", v, LevelSetName::from_str)?;
    }
    if let Some(v) = &flags.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = flags.export_density {
        cfg.export_density = v;
    }
    if let Some(v) = flags.depth_limit {
        cfg.depth_limit = v;
    }
    if let Some(v) = flags.quad_order {
        cfg.quad_order = v;
    }
    if let Some(v) = &flags.study {
        cfg.study = enum_value("study", v, parse_study)?;
    }
    if let Some(v) = &flags.resolutions {
        cfg.resolutions = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}
