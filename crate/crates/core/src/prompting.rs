//! Prompt templates per (task, condition).
//!
//! Templates live in `templates/<task>.<condition>.txt`. Lines starting with
//! `#` are comments. Placeholders are `{name}` and are filled from the
//! instance's metadata.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::instance::{GroundTruth, Task, TaskInstance};
use crate::scaffold::ScaffoldVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Simple,
    Ours,
    OursNonum,
    Column,
    Grid,
    Cot,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::Simple,
        Condition::Ours,
        Condition::OursNonum,
        Condition::Column,
        Condition::Grid,
        Condition::Cot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Simple => "simple",
            Condition::Ours => "ours",
            Condition::OursNonum => "ours_nonum",
            Condition::Column => "column",
            Condition::Grid => "grid",
            Condition::Cot => "cot",
        }
    }

    /// The image treatment paired with this condition.
    pub fn scaffold_variant(self) -> ScaffoldVariant {
        match self {
            Condition::Simple | Condition::Cot => ScaffoldVariant::None,
            Condition::Ours => ScaffoldVariant::Rows,
            Condition::OursNonum => ScaffoldVariant::RowsNonum,
            Condition::Column => ScaffoldVariant::Columns,
            Condition::Grid => ScaffoldVariant::Grid,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown condition `{s}`"))
    }
}

/// The single user message sent with an image.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptText(pub String);

impl PromptText {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PromptText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template {task}.{condition} needs metadata field `{field}`")]
    MissingField {
        task: Task,
        condition: Condition,
        field: String,
    },
    #[error("template {task}.{condition} has an unterminated placeholder")]
    Unterminated { task: Task, condition: Condition },
    #[error("template {0} not found")]
    NotFound(String),
    #[error("cannot read template {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Named values substituted into templates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PromptMetadata(pub BTreeMap<String, String>);

impl PromptMetadata {
    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn from_instance(instance: &TaskInstance) -> Self {
        let meta = PromptMetadata::default();
        match &instance.ground_truth {
            GroundTruth::Search { target, .. } => meta.with("target", target.phrase()),
            GroundTruth::Count { target, .. } => meta
                .with("target", target.phrase())
                .with("target_plural", target.plural_phrase()),
            GroundTruth::Describe { .. } => meta,
            GroundTruth::Spatial {
                object_a,
                object_b,
                options,
                ..
            } => {
                let mut meta = meta
                    .with("object_a", object_a.phrase())
                    .with("object_b", object_b.phrase());
                for (i, opt) in options.iter().enumerate() {
                    let key = format!("option_{}", (b'a' + i as u8) as char);
                    meta = meta.with(&key, opt.clone());
                }
                meta
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptOptions {
    /// Rewrite "lines exists in the image" to "lines that exist in the image".
    pub fix_grammar: bool,
}

macro_rules! builtin {
    ($($task:literal . $cond:literal),* $(,)?) => {
        &[$((concat!($task, ".", $cond), include_str!(concat!("../templates/", $task, ".", $cond, ".txt")))),*]
    };
}

const BUILTIN: &[(&str, &str)] = builtin!(
    "search"."simple", "search"."ours", "search"."ours_nonum", "search"."column", "search"."grid", "search"."cot",
    "count"."simple", "count"."ours", "count"."ours_nonum", "count"."column", "count"."grid", "count"."cot",
    "describe"."simple", "describe"."ours", "describe"."ours_nonum", "describe"."column", "describe"."grid", "describe"."cot",
    "spatial"."simple", "spatial"."ours", "spatial"."ours_nonum", "spatial"."column", "spatial"."grid", "spatial"."cot",
);

#[derive(Debug, Clone)]
pub struct TemplateSet {
    templates: BTreeMap<(Task, Condition), String>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        for (key, text) in BUILTIN {
            let (task, cond) = key.split_once('.').expect("task.condition");
            templates.insert(
                (task.parse().expect("builtin task"), cond.parse().expect("builtin condition")),
                strip_comments(text),
            );
        }
        Self { templates }
    }

    /// Loads every `<task>.<condition>.txt` from `dir`; all 24 must exist.
    pub fn from_dir(dir: &Path) -> Result<Self, TemplateError> {
        let mut templates = BTreeMap::new();
        for task in Task::ALL {
            for cond in Condition::ALL {
                let path = dir.join(format!("{task}.{cond}.txt"));
                let text = std::fs::read_to_string(&path).map_err(|e| TemplateError::Io {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })?;
                templates.insert((task, cond), strip_comments(&text));
            }
        }
        Ok(Self { templates })
    }

    pub fn raw(&self, task: Task, condition: Condition) -> Option<&str> {
        self.templates.get(&(task, condition)).map(String::as_str)
    }

    pub fn build(
        &self,
        task: Task,
        condition: Condition,
        meta: &PromptMetadata,
        options: PromptOptions,
    ) -> Result<PromptText, TemplateError> {
        let template = self
            .raw(task, condition)
            .ok_or_else(|| TemplateError::NotFound(format!("{task}.{condition}")))?;
        let mut out = fill(template, meta).map_err(|err| match err {
            FillError::Missing(field) => TemplateError::MissingField {
                task,
                condition,
                field,
            },
            FillError::Unterminated => TemplateError::Unterminated { task, condition },
        })?;
        if options.fix_grammar {
            out = out.replace(" lines exists in the image", " lines that exist in the image");
        }
        Ok(PromptText(out))
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Prompt for an instance under a condition, using the built-in templates.
pub fn build_prompt(
    task: Task,
    condition: Condition,
    meta: &PromptMetadata,
) -> Result<PromptText, TemplateError> {
    TemplateSet::builtin().build(task, condition, meta, PromptOptions::default())
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
        .trim()
        .to_string()
}

enum FillError {
    Missing(String),
    Unterminated,
}

fn fill(template: &str, meta: &PromptMetadata) -> Result<String, FillError> {
    let mut out = String::with_capacity(template.len() + 32);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or(FillError::Unterminated)?;
        let name = &after[..close];
        let value = meta.0.get(name).ok_or_else(|| FillError::Missing(name.to_string()))?;
        out.push_str(value);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCAN: &str = "Scan the image sequentially based on horizontal lines exists in the image.";

    fn circles() -> PromptMetadata {
        PromptMetadata::default()
            .with("target", "circles")
            .with("target_plural", "circles")
    }

    #[test]
    fn search_ours_starts_with_scan_instruction() {
        let meta = PromptMetadata::default().with("target", "green L");
        let p = build_prompt(Task::Search, Condition::Ours, &meta).unwrap();
        assert!(p.as_str().starts_with(SCAN), "{p}");
        assert!(p.as_str().contains("green L"));
        assert!(p.as_str().contains("[True]") && p.as_str().contains("[False]"));
    }

    #[test]
    fn cot_starts_with_step_by_step() {
        let p = build_prompt(Task::Count, Condition::Cot, &circles()).unwrap();
        assert!(p.as_str().starts_with("Let's think step by step"));
    }

    #[test]
    fn simple_is_ours_minus_prefix() {
        let simple = build_prompt(Task::Count, Condition::Simple, &circles()).unwrap();
        let ours = build_prompt(Task::Count, Condition::Ours, &circles()).unwrap();
        assert_eq!(ours.as_str(), format!("{SCAN} {}", simple.as_str()));
    }

    #[test]
    fn spatial_ours_uses_grid_sentence() {
        let meta = PromptMetadata::default()
            .with("object_a", "red star")
            .with("object_b", "blue circle")
            .with("option_a", "top-left")
            .with("option_b", "top-right")
            .with("option_c", "bottom-left")
            .with("option_d", "bottom-right");
        let p = build_prompt(Task::Spatial, Condition::Ours, &meta).unwrap();
        assert!(p
            .as_str()
            .starts_with("The grid lines are added to help you compare the objects better."));
        assert!(p.as_str().contains("A. top-left\nB. top-right"));
    }

    #[test]
    fn missing_metadata_names_the_field() {
        let err = build_prompt(Task::Search, Condition::Simple, &PromptMetadata::default()).unwrap_err();
        assert_eq!(
            err,
            TemplateError::MissingField {
                task: Task::Search,
                condition: Condition::Simple,
                field: "target".into()
            }
        );
    }

    #[test]
    fn grammar_fix_is_opt_in() {
        let set = TemplateSet::builtin();
        let meta = PromptMetadata::default().with("target", "green L");
        let fixed = set
            .build(Task::Search, Condition::Ours, &meta, PromptOptions { fix_grammar: true })
            .unwrap();
        assert!(fixed
            .as_str()
            .starts_with("Scan the image sequentially based on horizontal lines that exist in the image."));
    }

    #[test]
    fn condition_scaffold_mapping() {
        assert_eq!(Condition::Ours.scaffold_variant(), ScaffoldVariant::Rows);
        assert_eq!(Condition::OursNonum.scaffold_variant(), ScaffoldVariant::RowsNonum);
        assert_eq!(Condition::Column.scaffold_variant(), ScaffoldVariant::Columns);
        assert_eq!(Condition::Grid.scaffold_variant(), ScaffoldVariant::Grid);
        assert_eq!(Condition::Simple.scaffold_variant(), ScaffoldVariant::None);
        assert_eq!(Condition::Cot.scaffold_variant(), ScaffoldVariant::None);
    }

    #[test]
    fn from_dir_matches_builtin() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("templates");
        let loaded = TemplateSet::from_dir(&dir).unwrap();
        let builtin = TemplateSet::builtin();
        for task in Task::ALL {
            for cond in Condition::ALL {
                assert_eq!(loaded.raw(task, cond), builtin.raw(task, cond));
            }
        }
    }
}
