//! Expands a config into the instance grid and runs it against providers.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use bindbench_core::ingest::ingest_external;
use bindbench_core::parsing::parse_answer;
use bindbench_core::prompting::{PromptOptions, TemplateSet};
use bindbench_core::render::{encode_png, load_image, render};
use bindbench_core::scoring::score_instance;
use bindbench_core::{
    apply_scaffold, Condition, GroundTruth, ImageSource, PromptMetadata, SceneGenerator, TaskInstance,
};
use bindbench_providers::{build_provider, ModelRequest, Provider};

use crate::cache::{CacheKey, CachedResponse, ResponseCache};
use crate::config::RunConfig;
use crate::records::{latest_by_key, read_records, RecordKey, RecordStatus, RecordWriter, RecordsError, RunRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub cell: String,
    pub reason: String,
}

/// (model, task, condition, difficulty) of a cell with missing answers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub model: String,
    pub task: String,
    pub condition: String,
    pub difficulty: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Expected (instance, condition, model) triples after skipped cells.
    pub grid_size: usize,
    pub skipped_cells: Vec<SkippedCell>,
    /// Triples already answered by an earlier, interrupted run.
    pub resumed: usize,
    pub written: usize,
    pub provider_calls: usize,
    pub cache_hits: usize,
    pub failures: usize,
    pub incomplete_cells: Vec<CellId>,
}

impl RunSummary {
    pub fn is_complete(&self) -> bool {
        self.incomplete_cells.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Records(#[from] RecordsError),
    #[error("provider setup failed: {0}")]
    Provider(#[from] bindbench_providers::ProviderError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub struct Runner {
    config: RunConfig,
    providers: Vec<Arc<dyn Provider>>,
    semaphores: Vec<Arc<Semaphore>>,
    cache: ResponseCache,
    templates: TemplateSet,
    prompt_options: PromptOptions,
    calls: AtomicUsize,
    hits: AtomicUsize,
}

/// Everything one instance needs for its queries under one condition.
struct Prepared {
    condition: Condition,
    prompt: String,
    png: Arc<Vec<u8>>,
}

impl Runner {
    pub fn new(config: RunConfig) -> Result<Self, RunError> {
        let providers = config
            .providers
            .iter()
            .map(build_provider)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::with_providers(config, providers))
    }

    /// Uses the given providers, one per config entry, in the same order.
    pub fn with_providers(config: RunConfig, providers: Vec<Arc<dyn Provider>>) -> Self {
        let semaphores = providers
            .iter()
            .map(|p| Arc::new(Semaphore::new(p.config().concurrency.max(1))))
            .collect();
        Self {
            cache: ResponseCache::new(&config.cache_dir),
            config,
            providers,
            semaphores,
            templates: TemplateSet::builtin(),
            prompt_options: PromptOptions::default(),
            calls: AtomicUsize::new(0),
            hits: AtomicUsize::new(0),
        }
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn records_path(&self) -> PathBuf {
        self.config.out_dir.join("records.jsonl")
    }

    /// Generates every instance of the grid. Cells whose generation fails
    /// are skipped as a whole and reported.
    pub fn instances(&self) -> (Vec<TaskInstance>, Vec<SkippedCell>) {
        let generator = SceneGenerator::new(self.config.generator.clone());
        let mut out = Vec::new();
        let mut skipped = Vec::new();
        for cell in self.config.cells() {
            let mut batch = Vec::with_capacity(cell.instances);
            let mut failure = None;
            for i in 0..cell.instances {
                let params = cell.params(i);
                match generator.generate(cell.seed(self.config.base_seed, i), &params) {
                    Ok(inst) => batch.push(inst),
                    Err(e) => {
                        failure = Some((params.slug(), e.to_string()));
                        break;
                    }
                }
            }
            match failure {
                None => out.extend(batch),
                Some((slug, reason)) => {
                    tracing::warn!(cell = cell.index, %reason, "skipping cell");
                    skipped.push(SkippedCell {
                        cell: format!("cell {} ({slug})", cell.index),
                        reason,
                    });
                }
            }
        }
        if let Some(ext) = &self.config.tasks.external {
            match ingest_external(&ext.manifest) {
                Ok(report) => {
                    for e in report.errors {
                        skipped.push(SkippedCell {
                            cell: format!("external record {}", e.index),
                            reason: e.kind.to_string(),
                        });
                    }
                    out.extend(report.instances);
                }
                Err(e) => skipped.push(SkippedCell {
                    cell: "external".into(),
                    reason: e.to_string(),
                }),
            }
        }
        (out, skipped)
    }

    fn key(&self, instance: &TaskInstance, condition: Condition, provider: usize) -> RecordKey {
        RecordKey {
            instance_id: instance.id.clone(),
            condition: condition.to_string(),
            model: self.providers[provider].model_id().to_string(),
        }
    }

    /// Runs the grid, appending to the record stream and skipping triples
    /// that already have a successful record.
    pub async fn run(&self) -> Result<RunSummary, RunError> {
        let path = self.records_path();
        let loaded = read_records(&path)?;
        if loaded.torn_tail {
            tracing::warn!(path = %path.display(), "dropping torn final record");
        }
        let done: BTreeSet<RecordKey> = loaded
            .records
            .iter()
            .filter(|r| r.is_ok())
            .map(|r| r.key.clone())
            .collect();

        let (instances, skipped_cells) = self.instances();
        let mut summary = RunSummary {
            skipped_cells,
            ..RunSummary::default()
        };
        let mut work = Vec::new();
        let mut expected = Vec::new();
        for inst in instances {
            let mut pending = Vec::new();
            for &condition in &self.config.conditions {
                for p in 0..self.providers.len() {
                    summary.grid_size += 1;
                    let key = self.key(&inst, condition, p);
                    let cell = CellId {
                        model: key.model.clone(),
                        task: inst.task().to_string(),
                        condition: key.condition.clone(),
                        difficulty: inst.difficulty(),
                    };
                    let already = done.contains(&key);
                    expected.push((key, cell));
                    if already {
                        summary.resumed += 1;
                    } else {
                        pending.push((condition, p));
                    }
                }
            }
            if !pending.is_empty() {
                work.push((Arc::new(inst), pending));
            }
        }

        let mut writer = RecordWriter::open(&path, loaded.valid_len)?;
        let in_flight: usize = self.providers.iter().map(|p| p.config().concurrency.max(1)).sum();
        let mut results = stream::iter(work)
            .map(|(inst, pending)| self.process_instance(inst, pending))
            .buffered(in_flight.max(2));
        while let Some(batch) = results.next().await {
            for record in batch {
                if !record.is_ok() {
                    summary.failures += 1;
                }
                writer.append(&record)?;
                summary.written += 1;
            }
        }
        drop(results);

        summary.provider_calls = self.calls.load(Ordering::SeqCst);
        summary.cache_hits = self.hits.load(Ordering::SeqCst);
        summary.incomplete_cells = incomplete_cells(&read_records(&path)?.records, expected);
        self.write_run_files(&summary)?;
        Ok(summary)
    }

    fn write_run_files(&self, summary: &RunSummary) -> Result<(), RunError> {
        let dir = &self.config.out_dir;
        let write = |name: &str, text: String| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|source| RunError::Io { path, source })
        };
        std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.clone(),
            source,
        })?;
        write("run_config.toml", self.config.to_toml_string())?;
        let mut json = serde_json::to_string_pretty(summary).expect("summary serializes");
        json.push('\n');
        write("summary.json", json)
    }

    fn prepare(&self, inst: &TaskInstance, condition: Condition, need_png: bool) -> Result<Prepared, String> {
        let meta = PromptMetadata::from_instance(inst);
        let prompt = self
            .templates
            .build(inst.task(), condition, &meta, self.prompt_options)
            .map_err(|e| e.to_string())?
            .0;
        let base = match &inst.image {
            ImageSource::Scene { scene, .. } => render(scene),
            ImageSource::External { path, .. } => {
                load_image(path).map_err(|e| format!("cannot load {}: {e}", path.display()))?
            }
        };
        let image = apply_scaffold(&base, &self.config.scaffold.for_condition(condition)).map_err(|e| e.to_string())?;
        let png = if need_png {
            encode_png(&image).map_err(|e| e.to_string())?
        } else {
            Vec::new()
        };
        Ok(Prepared {
            condition,
            prompt,
            png: Arc::new(png),
        })
    }

    async fn process_instance(&self, inst: Arc<TaskInstance>, pending: Vec<(Condition, usize)>) -> Vec<RunRecord> {
        let mut prepared: HashMap<Condition, Result<Arc<Prepared>, String>> = HashMap::new();
        for (condition, _) in &pending {
            if prepared.contains_key(condition) {
                continue;
            }
            let need_png = pending
                .iter()
                .any(|(c, p)| c == condition && !self.providers[*p].is_local());
            prepared.insert(*condition, self.prepare(&inst, *condition, need_png).map(Arc::new));
        }
        let queries = pending.iter().map(|(condition, p)| {
            let prep = prepared[condition].clone();
            let inst = inst.clone();
            async move {
                let key = self.key(&inst, *condition, *p);
                match prep {
                    Ok(prep) => self.query(&inst, &prep, *p, key).await,
                    Err(reason) => self.error_record(&inst, key, None, reason),
                }
            }
        });
        futures::future::join_all(queries).await
    }

    async fn query(&self, inst: &TaskInstance, prep: &Prepared, p: usize, key: RecordKey) -> RunRecord {
        let provider = &self.providers[p];
        let cfg = provider.config();
        let request = ModelRequest {
            image_png: &prep.png,
            prompt: &prep.prompt,
            instance: inst,
        };
        debug_assert_eq!(key.condition, prep.condition.to_string());
        let (cache_key, raw_text) = if provider.is_local() {
            match provider.send(&request).await {
                Ok(r) => (None, r.raw_text),
                Err(e) => return self.error_record(inst, key, None, e.to_string()),
            }
        } else {
            let ck = CacheKey::new(&cfg.model_id, &prep.png, &prep.prompt, cfg.temperature);
            if let Some(hit) = self.cache.get(&ck) {
                self.hits.fetch_add(1, Ordering::SeqCst);
                (Some(ck), hit.raw_text)
            } else {
                let _permit = self.semaphores[p].acquire().await.expect("semaphore open");
                self.calls.fetch_add(1, Ordering::SeqCst);
                match provider.send(&request).await {
                    Ok(r) => {
                        if let Err(e) = self.cache.put(&ck, &CachedResponse::from_response(&cfg.model_id, &r)) {
                            tracing::warn!(error = %e, "cache write failed");
                        }
                        (Some(ck), r.raw_text)
                    }
                    Err(e) => return self.error_record(inst, key, Some(ck), e.to_string()),
                }
            }
        };
        let options = spatial_options(&inst.ground_truth);
        let parsed = parse_answer(inst.task(), &raw_text, options, self.config.scoring.parse_options());
        let score = score_instance(&inst.ground_truth, &parsed, self.config.scoring.edit_options());
        RunRecord {
            key,
            task: inst.task(),
            difficulty: inst.difficulty(),
            status: RecordStatus::Ok,
            cache_key,
            raw_text: Some(raw_text),
            parsed: Some(parsed),
            truth: inst.ground_truth.clone(),
            score: Some(score),
            error: None,
        }
    }

    fn error_record(&self, inst: &TaskInstance, key: RecordKey, cache_key: Option<CacheKey>, reason: String) -> RunRecord {
        tracing::warn!(instance = %key.instance_id, model = %key.model, %reason, "query failed");
        RunRecord {
            key,
            task: inst.task(),
            difficulty: inst.difficulty(),
            status: RecordStatus::Error,
            cache_key,
            raw_text: None,
            parsed: None,
            truth: inst.ground_truth.clone(),
            score: None,
            error: Some(reason),
        }
    }
}

/// Cells with at least one expected triple lacking a successful record.
fn incomplete_cells(records: &[RunRecord], expected: Vec<(RecordKey, CellId)>) -> Vec<CellId> {
    let latest = latest_by_key(records);
    let mut out = BTreeSet::new();
    for (key, cell) in expected {
        if !latest.get(&key).is_some_and(|r| r.is_ok()) {
            out.insert(cell);
        }
    }
    out.into_iter().collect()
}

pub fn spatial_options(truth: &GroundTruth) -> &[String] {
    match truth {
        GroundTruth::Spatial { options, .. } => options,
        _ => &[],
    }
}

/// Writes each instance's manifest and PNG under `dir`.
pub fn write_instances(dir: &Path, instances: &[TaskInstance]) -> Result<usize, bindbench_core::manifest::ManifestError> {
    let mut n = 0;
    for inst in instances {
        if inst.scene().is_some() {
            bindbench_core::manifest::write_instance(dir, inst)?;
            n += 1;
        }
    }
    Ok(n)
}
