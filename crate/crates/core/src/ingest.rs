//! Ingestion of externally provided images with annotations.
//!
//! The manifest is a JSON array of records
//! `{"image_path": ..., "task": ..., "ground_truth": ...}`. Bad records are
//! reported individually; the rest of the batch still loads.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::instance::{GroundTruth, ImageSource, Task, TaskInstance, Target};
use crate::scene::ObjectKind;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest {path} is not a JSON array: {reason}")]
    NotArray { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordErrorKind {
    #[error("image file not found: {0}")]
    MissingFile(PathBuf),
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("record {index}: {kind}")]
pub struct RecordError {
    pub index: usize,
    pub kind: RecordErrorKind,
}

#[derive(Debug, Default)]
pub struct IngestReport {
    pub instances: Vec<TaskInstance>,
    pub errors: Vec<RecordError>,
}

pub fn ingest_external(manifest: &Path) -> Result<IngestReport, IngestError> {
    let text = std::fs::read_to_string(manifest).map_err(|source| IngestError::Io {
        path: manifest.to_path_buf(),
        source,
    })?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    ingest_str(&text, base).map_err(|reason| IngestError::NotArray {
        path: manifest.to_path_buf(),
        reason,
    })
}

/// Parses manifest text; relative image paths resolve against `base`.
pub fn ingest_str(text: &str, base: &Path) -> Result<IngestReport, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let Value::Array(records) = value else {
        return Err("top-level value is not an array".into());
    };
    let mut report = IngestReport::default();
    for (index, record) in records.iter().enumerate() {
        match parse_record(index, record, base) {
            Ok(instance) => report.instances.push(instance),
            Err(kind) => report.errors.push(RecordError { index, kind }),
        }
    }
    Ok(report)
}

fn malformed(msg: impl Into<String>) -> RecordErrorKind {
    RecordErrorKind::Malformed(msg.into())
}

fn field<'a>(record: &'a Value, names: &[&str]) -> Option<&'a Value> {
    names.iter().find_map(|n| record.get(*n))
}

fn parse_record(index: usize, record: &Value, base: &Path) -> Result<TaskInstance, RecordErrorKind> {
    if !record.is_object() {
        return Err(malformed("record is not an object"));
    }
    let task_tag = field(record, &["task"])
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing string field `task`"))?;
    let task: Task = task_tag
        .parse()
        .map_err(|_| RecordErrorKind::UnknownTask(task_tag.to_string()))?;
    let image = field(record, &["image_path", "image"])
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing string field `image_path`"))?;
    let truth = field(record, &["ground_truth", "truth"])
        .ok_or_else(|| malformed("missing field `ground_truth`"))?;

    let path = base.join(image);
    if !path.is_file() {
        return Err(RecordErrorKind::MissingFile(path));
    }
    let ground_truth = parse_truth(task, truth)?;
    let id = match field(record, &["id"]) {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(malformed("`id` must be a string")),
        None => format!("external_{task}_{index}"),
    };
    let difficulty = match field(record, &["difficulty"]) {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(malformed("`difficulty` must be a string")),
        None => None,
    };
    Ok(TaskInstance {
        id,
        image: ImageSource::External { path, difficulty },
        ground_truth,
    })
}

fn parse_target(value: Option<&Value>, default: &str) -> Result<Target, RecordErrorKind> {
    match value {
        None => Ok(Target::Named(default.to_string())),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| malformed(format!("bad target: {e}"))),
    }
}

fn parse_truth(task: Task, truth: &Value) -> Result<GroundTruth, RecordErrorKind> {
    match task {
        Task::Search => match truth {
            Value::Bool(present) => Ok(GroundTruth::Search {
                present: *present,
                target: Target::Named("target object".into()),
            }),
            Value::Object(map) => Ok(GroundTruth::Search {
                present: map
                    .get("present")
                    .and_then(Value::as_bool)
                    .ok_or_else(|| malformed("search truth needs boolean `present`"))?,
                target: parse_target(map.get("target"), "target object")?,
            }),
            _ => Err(malformed("search truth must be a boolean or object")),
        },
        Task::Count => match truth {
            Value::Number(_) => Ok(GroundTruth::Count {
                count: as_count(truth)?,
                target: Target::Named("objects".into()),
            }),
            Value::Object(map) => Ok(GroundTruth::Count {
                count: as_count(map.get("count").unwrap_or(&Value::Null))?,
                target: parse_target(map.get("target"), "objects")?,
            }),
            _ => Err(malformed("count truth must be an integer or object")),
        },
        Task::Describe => {
            let list = match truth {
                Value::Array(_) => truth,
                Value::Object(map) => map
                    .get("objects")
                    .ok_or_else(|| malformed("describe truth needs `objects`"))?,
                _ => return Err(malformed("describe truth must be a list of objects")),
            };
            let objects: Vec<ObjectKind> = serde_json::from_value(list.clone())
                .map_err(|e| malformed(format!("bad object list: {e}")))?;
            Ok(GroundTruth::Describe { objects })
        }
        Task::Spatial => {
            let Value::Object(map) = truth else {
                return Err(malformed("spatial truth must be an object"));
            };
            let options: Vec<String> = map
                .get("options")
                .map(|v| serde_json::from_value(v.clone()))
                .transpose()
                .map_err(|e| malformed(format!("bad options: {e}")))?
                .unwrap_or_else(|| {
                    crate::instance::Relation::OPTIONS
                        .iter()
                        .map(|r| r.text().to_string())
                        .collect()
                });
            if options.len() != 4 {
                return Err(malformed("spatial questions need exactly 4 options"));
            }
            let correct = match map.get("correct") {
                Some(Value::Number(n)) => n
                    .as_u64()
                    .map(|n| n as usize)
                    .filter(|n| *n < 4)
                    .ok_or_else(|| malformed("`correct` must be in 0..=3"))?,
                Some(Value::String(s)) => match s.trim().to_ascii_uppercase().as_str() {
                    "A" => 0,
                    "B" => 1,
                    "C" => 2,
                    "D" => 3,
                    _ => return Err(malformed("`correct` letter must be A-D")),
                },
                _ => return Err(malformed("spatial truth needs `correct`")),
            };
            Ok(GroundTruth::Spatial {
                correct,
                object_a: parse_target(map.get("object_a"), "first object")?,
                object_b: parse_target(map.get("object_b"), "second object")?,
                options,
            })
        }
    }
}

fn as_count(v: &Value) -> Result<u32, RecordErrorKind> {
    v.as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| malformed("count must be a non-negative integer"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir_with_image() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.png"), b"png").unwrap();
        dir
    }

    #[test]
    fn count_record() {
        let dir = dir_with_image();
        let report = ingest_str(r#"[{"image":"a.png","task":"count","truth":14}]"#, dir.path()).unwrap();
        assert!(report.errors.is_empty());
        assert_eq!(report.instances.len(), 1);
        assert!(matches!(
            report.instances[0].ground_truth,
            GroundTruth::Count { count: 14, .. }
        ));
        assert!(report.instances[0].scene().is_none());
    }

    #[test]
    fn unknown_task_is_reported_and_batch_continues() {
        let dir = dir_with_image();
        let text = r#"[
            {"image_path":"a.png","task":"segment","ground_truth":1},
            {"image_path":"missing.png","task":"count","ground_truth":3},
            {"image_path":"a.png","task":"count"},
            {"image_path":"a.png","task":"search","ground_truth":true}
        ]"#;
        let report = ingest_str(text, dir.path()).unwrap();
        assert_eq!(report.instances.len(), 1);
        assert_eq!(report.errors.len(), 3);
        assert_eq!(report.errors[0].kind, RecordErrorKind::UnknownTask("segment".into()));
        assert!(matches!(report.errors[1].kind, RecordErrorKind::MissingFile(_)));
        assert!(matches!(report.errors[2].kind, RecordErrorKind::Malformed(_)));
    }

    #[test]
    fn empty_array() {
        let report = ingest_str("[]", Path::new(".")).unwrap();
        assert!(report.instances.is_empty() && report.errors.is_empty());
        assert!(ingest_str("{}", Path::new(".")).is_err());
    }

    #[test]
    fn spatial_and_describe_records() {
        let dir = dir_with_image();
        let text = r#"[
            {"image_path":"a.png","task":"spatial","ground_truth":{"correct":"B","object_a":"the jar","object_b":"the glasses"}},
            {"image_path":"a.png","task":"describe","ground_truth":[{"shape":"circle","color":"red"}]}
        ]"#;
        let report = ingest_str(text, dir.path()).unwrap();
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        assert!(matches!(
            report.instances[0].ground_truth,
            GroundTruth::Spatial { correct: 1, .. }
        ));
    }
}
