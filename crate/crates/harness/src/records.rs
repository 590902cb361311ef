//! Append-only JSONL result stream, one record per (instance, condition,
//! model).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use bindbench_core::{GroundTruth, ParsedAnswer, Task};
use bindbench_core::scoring::InstanceScore;

use crate::cache::CacheKey;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RecordKey {
    pub instance_id: String,
    pub condition: String,
    pub model: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    Error,
}

/// Timing and attempt counts are deliberately absent so that repeated runs
/// produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub key: RecordKey,
    pub task: Task,
    pub difficulty: String,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_key: Option<CacheKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parsed: Option<ParsedAnswer>,
    pub truth: GroundTruth,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<InstanceScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }

    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("record serializes");
        line.push('\n');
        line
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecordsError {
    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Malformed {
        path: std::path::PathBuf,
        line: usize,
        source: serde_json::Error,
    },
}

/// Result of reading a record stream.
#[derive(Debug, Default)]
pub struct LoadedRecords {
    pub records: Vec<RunRecord>,
    /// Byte length of the intact prefix; anything after it is a torn write.
    pub valid_len: u64,
    pub torn_tail: bool,
}

/// Reads a JSONL stream. A final line that is unterminated or unparseable
/// is treated as a torn write from an interrupted run and dropped; a bad
/// line anywhere else is an error.
pub fn read_records(path: &Path) -> Result<LoadedRecords, RecordsError> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(LoadedRecords::default()),
        Err(source) => {
            return Err(RecordsError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let mut out = LoadedRecords::default();
    let mut offset = 0usize;
    let mut line_no = 0;
    while offset < bytes.len() {
        line_no += 1;
        let rest = &bytes[offset..];
        let (line, next, terminated) = match rest.iter().position(|b| *b == b'\n') {
            Some(i) => (&rest[..i], offset + i + 1, true),
            None => (rest, bytes.len(), false),
        };
        let is_last = next >= bytes.len();
        if line.iter().all(u8::is_ascii_whitespace) {
            offset = next;
            if terminated {
                out.valid_len = next as u64;
            }
            continue;
        }
        match serde_json::from_slice::<RunRecord>(line) {
            Ok(rec) if terminated => {
                out.records.push(rec);
                out.valid_len = next as u64;
            }
            Ok(_) => {
                out.torn_tail = true;
            }
            Err(_) if is_last => {
                out.torn_tail = true;
            }
            Err(source) => {
                return Err(RecordsError::Malformed {
                    path: path.to_path_buf(),
                    line: line_no,
                    source,
                })
            }
        }
        offset = next;
    }
    Ok(out)
}

/// Latest record per key; later lines supersede earlier ones.
pub fn latest_by_key(records: &[RunRecord]) -> BTreeMap<RecordKey, &RunRecord> {
    let mut map = BTreeMap::new();
    for r in records {
        map.insert(r.key.clone(), r);
    }
    map
}

/// Single appender for the record stream.
pub struct RecordWriter {
    file: std::fs::File,
    path: std::path::PathBuf,
}

impl RecordWriter {
    /// Opens `path` for appending after cutting off any torn tail.
    pub fn open(path: &Path, valid_len: u64) -> Result<Self, RecordsError> {
        let io = |source| RecordsError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        if file.metadata().map_err(io)?.len() > valid_len {
            file.set_len(valid_len).map_err(io)?;
        }
        Ok(Self {
            file,
            path: path.to_path_buf(),
        })
    }

    pub fn append(&mut self, record: &RunRecord) -> Result<(), RecordsError> {
        self.file
            .write_all(record.to_line().as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|source| RecordsError::Io {
                path: self.path.clone(),
                source,
            })
    }
}
