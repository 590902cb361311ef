//! Run configuration, read from TOML.
//!
//! ```toml
//! name = "desk"
//! base_seed = 0
//! instances_per_cell = 20
//! conditions = ["simple", "ours"]
//! out_dir = "runs/desk"
//! cache_dir = "cache"
//!
//! [tasks.search]
//! n_objects = [10, 20]
//!
//! [[providers]]
//! kind = "oracle"
//! model_id = "oracle"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use bindbench_core::metrics::EditDistanceOptions;
use bindbench_core::{
    Color, Condition, GeneratorConfig, ObjectKind, ParseOptions, ScaffoldConfig, SceneParams, Shape,
};
use bindbench_providers::ProviderConfig;

/// Seeds of different cells never overlap as long as a cell holds fewer
/// instances than this.
pub const SEED_STRIDE: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub base_seed: u64,
    /// Instances per (task, parameters) cell unless a task overrides it.
    #[serde(default = "default_instances")]
    pub instances_per_cell: usize,
    pub conditions: Vec<Condition>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default)]
    pub tasks: TasksConfig,
    pub providers: Vec<ProviderConfig>,
    #[serde(default)]
    pub scaffold: ScaffoldSettings,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub scoring: ScoringSettings,
}

fn default_name() -> String {
    "run".into()
}
fn default_instances() -> usize {
    50
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("runs/default")
}
fn default_cache_dir() -> PathBuf {
    PathBuf::from("cache")
}

/// Scaffold drawing options; the variant comes from each condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaffoldSettings {
    pub n_lines: u32,
    pub stroke_color: [u8; 3],
    pub stroke_width: u32,
}

impl Default for ScaffoldSettings {
    fn default() -> Self {
        let d = ScaffoldConfig::default();
        Self {
            n_lines: d.n_lines,
            stroke_color: d.stroke_color,
            stroke_width: d.stroke_width,
        }
    }
}

impl ScaffoldSettings {
    pub fn for_condition(&self, condition: Condition) -> ScaffoldConfig {
        ScaffoldConfig {
            variant: condition.scaffold_variant(),
            n_lines: self.n_lines,
            stroke_color: self.stroke_color,
            stroke_width: self.stroke_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringSettings {
    pub allow_fallback: bool,
    pub penalize_extra: bool,
}

impl Default for ScoringSettings {
    fn default() -> Self {
        Self {
            allow_fallback: true,
            penalize_extra: false,
        }
    }
}

impl ScoringSettings {
    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            allow_fallback: self.allow_fallback,
        }
    }

    pub fn edit_options(&self) -> EditDistanceOptions {
        EditDistanceOptions {
            penalize_extra: self.penalize_extra,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TasksConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<CountGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub describe: Option<DescribeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spatial: Option<SpatialGrid>,
    /// Externally annotated images (see `bindbench_core::ingest`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalSet>,
}

/// Visual search; instances alternate between target present and absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchGrid {
    pub n_objects: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountGrid {
    pub n_targets: Vec<usize>,
    #[serde(default)]
    pub n_distractors: usize,
    #[serde(default = "default_count_target")]
    pub target: ObjectKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
}

fn default_count_target() -> ObjectKind {
    ObjectKind::new(Shape::Circle, Color::Blue)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescribeGrid {
    pub cells: Vec<DescribeCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescribeCell {
    pub n_objects: usize,
    pub n_triplets: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialGrid {
    #[serde(default = "default_spatial_distractors")]
    pub n_distractors: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
}

fn default_spatial_distractors() -> Vec<usize> {
    vec![6]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSet {
    pub manifest: PathBuf,
}

/// One generator cell: a parameter setting and its instance count.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub index: usize,
    pub kind: CellKind,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellKind {
    Search { n_objects: usize },
    Count { n_targets: usize, n_distractors: usize, target: ObjectKind },
    Describe { n_objects: usize, n_triplets: u64 },
    Spatial { n_distractors: usize },
}

impl CellSpec {
    /// Seed of the `i`-th instance.
    pub fn seed(&self, base_seed: u64, i: usize) -> u64 {
        base_seed + self.index as u64 * SEED_STRIDE + i as u64
    }

    /// Parameters of the `i`-th instance.
    pub fn params(&self, i: usize) -> SceneParams {
        match &self.kind {
            CellKind::Search { n_objects } => SceneParams::Search {
                n_objects: *n_objects,
                present: i.is_multiple_of(2),
            },
            CellKind::Count {
                n_targets,
                n_distractors,
                target,
            } => SceneParams::Count {
                n_targets: *n_targets,
                n_distractors: *n_distractors,
                target: *target,
            },
            CellKind::Describe { n_objects, n_triplets } => SceneParams::Describe {
                n_objects: *n_objects,
                n_triplets: *n_triplets,
            },
            CellKind::Spatial { n_distractors } => SceneParams::Spatial {
                n_distractors: *n_distractors,
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    /// Loads and validates a config file. Relative paths inside it resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source: Box::new(source),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.out_dir);
        resolve(&mut cfg.cache_dir);
        if let Some(ext) = cfg.tasks.external.as_mut() {
            resolve(&mut ext.manifest);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.conditions.is_empty() {
            return invalid("at least one condition is required".into());
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.conditions {
            if !seen.insert(c) {
                return invalid(format!("condition `{c}` listed twice"));
            }
        }
        if self.providers.is_empty() {
            return invalid("at least one provider is required".into());
        }
        let mut ids = std::collections::HashSet::new();
        for p in &self.providers {
            p.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if !ids.insert(&p.model_id) {
                return invalid(format!("model_id `{}` used by two providers", p.model_id));
            }
        }
        for c in self.conditions.iter() {
            self.scaffold
                .for_condition(*c)
                .validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        let cells = self.cells();
        if cells.is_empty() && self.tasks.external.is_none() {
            return invalid("no tasks configured".into());
        }
        for cell in &cells {
            if cell.instances == 0 {
                return invalid(format!("cell {} has zero instances", cell.index));
            }
            if cell.instances as u64 >= SEED_STRIDE {
                return invalid(format!("cells are limited to {} instances", SEED_STRIDE - 1));
            }
        }
        let last = cells.len() as u64 * SEED_STRIDE;
        if self.base_seed.checked_add(last).is_none() {
            return invalid("base_seed too large for the configured grid".into());
        }
        Ok(())
    }

    /// Every generator cell, in a fixed order: search, count, describe,
    /// spatial, each in configured order.
    pub fn cells(&self) -> Vec<CellSpec> {
        let default = self.instances_per_cell;
        let mut kinds: Vec<(CellKind, usize)> = Vec::new();
        if let Some(s) = &self.tasks.search {
            for n in &s.n_objects {
                kinds.push((CellKind::Search { n_objects: *n }, s.instances.unwrap_or(default)));
            }
        }
        if let Some(c) = &self.tasks.count {
            for n in &c.n_targets {
                kinds.push((
                    CellKind::Count {
                        n_targets: *n,
                        n_distractors: c.n_distractors,
                        target: c.target,
                    },
                    c.instances.unwrap_or(default),
                ));
            }
        }
        if let Some(d) = &self.tasks.describe {
            for cell in &d.cells {
                for t in &cell.n_triplets {
                    kinds.push((
                        CellKind::Describe {
                            n_objects: cell.n_objects,
                            n_triplets: *t,
                        },
                        d.instances.unwrap_or(default),
                    ));
                }
            }
        }
        if let Some(s) = &self.tasks.spatial {
            for n in &s.n_distractors {
                kinds.push((CellKind::Spatial { n_distractors: *n }, s.instances.unwrap_or(default)));
            }
        }
        kinds
            .into_iter()
            .enumerate()
            .map(|(index, (kind, instances))| CellSpec { index, kind, instances })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "t"
base_seed = 7
instances_per_cell = 4
conditions = ["simple", "ours", "ours_nonum"]

[tasks.search]
n_objects = [10, 20]

[tasks.count]
n_targets = [5]
n_distractors = 3
target = { shape = "letter_L", color = "green" }

[tasks.describe]
cells = [{ n_objects = 10, n_triplets = [5, 10] }]
instances = 2

[tasks.spatial]

[[providers]]
kind = "oracle"
model_id = "oracle"
oracle = { flip_rate = 0.1, seed = 3 }

[[providers]]
kind = "openai_compatible"
model_id = "gpt-4o"
base_url = "http://localhost:8080"
api_key_env = "OPENAI_API_KEY"
concurrency = 2
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.conditions.len(), 3);
        assert_eq!(cfg.providers[1].concurrency, 2);
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn seeds_are_disjoint_across_cells() {
        let cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        let cells = cfg.cells();
        assert_eq!(cells.len(), 2 + 1 + 2 + 1);
        let mut seeds = std::collections::HashSet::new();
        for cell in &cells {
            for i in 0..cell.instances {
                assert!(seeds.insert(cell.seed(cfg.base_seed, i)));
            }
        }
        assert_eq!(cells[4].instances, 2);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        cfg.conditions.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        cfg.providers[1].model_id = "oracle".into();
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        cfg.providers[0].requests_per_minute = 0;
        assert!(cfg.validate().is_err());

        assert!(RunConfig::from_toml_str("conditions = [\"simple\"]\nproviders = []\nbogus = 1").is_err());
    }

    #[test]
    fn shipped_configs_are_valid() {
        for path in ["../../configs/oracle.toml", "../../configs/live.toml"] {
            let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(path);
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(!cfg.cells().is_empty());
        }
    }
}
