//! Per-cell metric values computed from the raw record stream.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use bindbench_core::metrics::{harmonic_mean, mse};
use bindbench_core::parsing::parse_answer;
use bindbench_core::scoring::score_instance;
use bindbench_core::{Condition, GroundTruth, ParseStatus, Task};

use crate::config::ScoringSettings;
use crate::records::{latest_by_key, RunRecord};
use crate::run::spatial_options;

pub const AVG: &str = "avg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCell {
    pub model: String,
    pub task: Task,
    pub condition: String,
    pub difficulty: String,
    pub metric: String,
    pub value: f64,
    pub n_instances: usize,
    pub n_parse_failures: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregation {
    pub cells: Vec<AggregateCell>,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Acc {
    n: usize,
    failures: usize,
    correct: usize,
    visible: (usize, usize),
    invisible: (usize, usize),
    counts: (Vec<f64>, Vec<f64>),
    edit: Vec<f64>,
    f1: Vec<f64>,
    jaccard: Vec<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Orders difficulties numerically where possible ("5" < "10" < "10/5"),
/// with the average row last.
pub fn difficulty_order(a: &str, b: &str) -> Ordering {
    fn key(s: &str) -> (bool, Vec<u64>, String) {
        let nums: Option<Vec<u64>> = s.split('/').map(|p| p.parse().ok()).collect();
        match nums {
            Some(n) => (s == AVG, n, String::new()),
            None => (s == AVG, vec![u64::MAX], s.to_string()),
        }
    }
    key(a).cmp(&key(b))
}

pub fn condition_rank(c: &str) -> usize {
    Condition::ALL
        .iter()
        .position(|x| x.as_str() == c)
        .unwrap_or(Condition::ALL.len())
}

fn task_rank(t: Task) -> usize {
    Task::ALL.iter().position(|x| *x == t).expect("known task")
}

pub fn cell_order(a: &AggregateCell, b: &AggregateCell) -> Ordering {
    (a.model.as_str(), task_rank(a.task))
        .cmp(&(b.model.as_str(), task_rank(b.task)))
        .then_with(|| difficulty_order(&a.difficulty, &b.difficulty))
        .then_with(|| condition_rank(&a.condition).cmp(&condition_rank(&b.condition)))
        .then_with(|| a.condition.cmp(&b.condition))
        .then_with(|| a.metric.cmp(&b.metric))
}

/// Aggregates successful records, re-parsing every raw answer with the
/// current parser. Failed parses count as wrong; difficulty `avg` rows are
/// the mean of the per-difficulty values.
pub fn aggregate(records: &[RunRecord], scoring: ScoringSettings) -> Aggregation {
    let mut groups: BTreeMap<(String, usize, String, String), (Task, Acc)> = BTreeMap::new();
    let mut out = Aggregation::default();
    for rec in latest_by_key(records).into_values() {
        let Some(raw) = rec.raw_text.as_deref().filter(|_| rec.is_ok()) else {
            continue;
        };
        let task = rec.truth.task();
        let parsed = parse_answer(task, raw, spatial_options(&rec.truth), scoring.parse_options());
        let score = score_instance(&rec.truth, &parsed, scoring.edit_options());
        let (_, acc) = groups
            .entry((
                rec.key.model.clone(),
                task_rank(task),
                rec.key.condition.clone(),
                rec.difficulty.clone(),
            ))
            .or_insert_with(|| (task, Acc::default()));
        acc.n += 1;
        acc.correct += usize::from(score.correct);
        if parsed.status == ParseStatus::Failed {
            acc.failures += 1;
        }
        match &rec.truth {
            GroundTruth::Search { present: true, .. } => {
                acc.visible.0 += usize::from(score.correct);
                acc.visible.1 += 1;
            }
            GroundTruth::Search { present: false, .. } => {
                acc.invisible.0 += usize::from(score.correct);
                acc.invisible.1 += 1;
            }
            GroundTruth::Count { .. } => {
                if let (Some(p), Some(t)) = (score.predicted_count, score.true_count) {
                    acc.counts.0.push(p as f64);
                    acc.counts.1.push(t as f64);
                }
            }
            GroundTruth::Describe { .. } => {
                acc.edit.extend(score.edit_distance.map(|d| d as f64));
                acc.f1.extend(score.f1);
                acc.jaccard.extend(score.jaccard);
            }
            GroundTruth::Spatial { .. } => {}
        }
    }

    for ((model, _, condition, difficulty), (task, acc)) in groups {
        let mut push = |metric: &str, value: f64| {
            out.cells.push(AggregateCell {
                model: model.clone(),
                task,
                condition: condition.clone(),
                difficulty: difficulty.clone(),
                metric: metric.to_string(),
                value,
                n_instances: acc.n,
                n_parse_failures: acc.failures,
            })
        };
        push("accuracy", acc.correct as f64 / acc.n as f64);
        let label = format!("{model}/{task}/{condition}/{difficulty}");
        match task {
            Task::Search => {
                let (v, i) = (acc.visible, acc.invisible);
                if v.1 > 0 {
                    push("visible_accuracy", v.0 as f64 / v.1 as f64);
                }
                if i.1 > 0 {
                    push("invisible_accuracy", i.0 as f64 / i.1 as f64);
                }
                if v.1 > 0 && i.1 > 0 {
                    push("harmonic_mean", harmonic_mean(v.0 as f64 / v.1 as f64, i.0 as f64 / i.1 as f64));
                } else {
                    out.warnings.push(format!("{label}: needs both present and absent instances for harmonic_mean"));
                }
            }
            Task::Count => match mse(&acc.counts.0, &acc.counts.1) {
                Ok(v) => push("mse", v),
                Err(_) => out.warnings.push(format!("{label}: no parsed counts, mse omitted")),
            },
            Task::Describe => {
                push("edit_distance", mean(&acc.edit));
                push("f1", mean(&acc.f1));
                push("jaccard", mean(&acc.jaccard));
            }
            Task::Spatial => {}
        }
    }

    // (model, task rank, condition, metric) -> (task, values, instances, failures)
    type AvgKey = (String, usize, String, String);
    let mut avg: BTreeMap<AvgKey, (Task, Vec<f64>, usize, usize)> = BTreeMap::new();
    for c in &out.cells {
        let e = avg
            .entry((c.model.clone(), task_rank(c.task), c.condition.clone(), c.metric.clone()))
            .or_insert((c.task, Vec::new(), 0, 0));
        e.1.push(c.value);
        e.2 += c.n_instances;
        e.3 += c.n_parse_failures;
    }
    for ((model, _, condition, metric), (task, values, n, failures)) in avg {
        out.cells.push(AggregateCell {
            model,
            task,
            condition,
            difficulty: AVG.to_string(),
            metric,
            value: mean(&values),
            n_instances: n,
            n_parse_failures: failures,
        });
    }
    out.cells.sort_by(cell_order);
    out
}
