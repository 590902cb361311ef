//! Tables (CSV, JSON, Markdown) and charts from aggregate cells.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use bindbench_core::Task;

use crate::aggregate::{condition_rank, difficulty_order, AggregateCell, AVG};
use crate::svg::{bar_chart, BarGroup};

pub const DECIMALS: usize = 2;
pub const MISSING: &str = "—";

/// Headline metric of each task's table.
pub fn primary_metric(task: Task) -> &'static str {
    match task {
        Task::Search => "harmonic_mean",
        Task::Count => "accuracy",
        Task::Describe => "edit_distance",
        Task::Spatial => "accuracy",
    }
}

pub fn lower_is_better(metric: &str) -> bool {
    matches!(metric, "edit_distance" | "mse")
}

pub fn format_value(v: f64) -> String {
    format!("{v:.DECIMALS$}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub condition: String,
    /// Value after rounding to the table's precision.
    pub value: Option<f64>,
    pub display: String,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub model: String,
    pub difficulty: String,
    pub cells: Vec<TableCell>,
}

/// Rows are (model, difficulty); columns are conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub task: Task,
    pub metric: String,
    pub decimals: usize,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

/// Builds a table for `task`/`metric`. Every (model, difficulty, condition)
/// combination seen for the task gets a slot; slots without a cell show
/// [`MISSING`] and produce a gap entry.
pub fn build_table(name: &str, cells: &[AggregateCell], task: Task, metric: &str) -> (Table, Vec<String>) {
    let relevant: Vec<&AggregateCell> = cells.iter().filter(|c| c.task == task).collect();
    let mut columns: Vec<String> = relevant
        .iter()
        .map(|c| c.condition.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    columns.sort_by(|a, b| condition_rank(a).cmp(&condition_rank(b)).then(a.cmp(b)));
    let models: BTreeSet<&str> = relevant.iter().map(|c| c.model.as_str()).collect();
    let mut gaps = Vec::new();
    if relevant.is_empty() {
        gaps.push(format!("{name}: no results for task {task}"));
    }
    let mut rows = Vec::new();
    for model in models {
        let mut difficulties: Vec<&str> = relevant
            .iter()
            .filter(|c| c.model == model)
            .map(|c| c.difficulty.as_str())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        difficulties.sort_by(|a, b| difficulty_order(a, b));
        for difficulty in difficulties {
            let mut row_cells: Vec<TableCell> = columns
                .iter()
                .map(|condition| {
                    let found = relevant.iter().find(|c| {
                        c.model == model && c.difficulty == difficulty && &c.condition == condition && c.metric == metric
                    });
                    match found {
                        Some(c) => {
                            let display = format_value(c.value);
                            TableCell {
                                condition: condition.clone(),
                                value: Some(display.parse().expect("formatted number")),
                                display,
                                best: false,
                            }
                        }
                        None => {
                            gaps.push(format!("{name}: {model} / {condition} / {difficulty}: no {metric} value"));
                            TableCell {
                                condition: condition.clone(),
                                value: None,
                                display: MISSING.to_string(),
                                best: false,
                            }
                        }
                    }
                })
                .collect();
            mark_best(&mut row_cells, lower_is_better(metric));
            rows.push(TableRow {
                model: model.to_string(),
                difficulty: difficulty.to_string(),
                cells: row_cells,
            });
        }
    }
    (
        Table {
            name: name.to_string(),
            task,
            metric: metric.to_string(),
            decimals: DECIMALS,
            columns,
            rows,
        },
        gaps,
    )
}

/// Marks every cell whose rounded value is the row's best; ties all win.
fn mark_best(cells: &mut [TableCell], lower: bool) {
    let values = cells.iter().filter_map(|c| c.value);
    let best = if lower {
        values.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    } else {
        values.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    };
    if let Some(best) = best {
        for c in cells.iter_mut() {
            c.best = c.value == Some(best);
        }
    }
}

/// CSV with plain values; the last column names the best condition(s).
pub fn to_csv(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["model", "difficulty"];
    header.extend(t.columns.iter().map(String::as_str));
    header.push("best");
    w.write_record(&header).expect("in-memory write");
    for row in &t.rows {
        let best: Vec<&str> = row.cells.iter().filter(|c| c.best).map(|c| c.condition.as_str()).collect();
        let mut fields = vec![row.model.clone(), row.difficulty.clone()];
        fields.extend(row.cells.iter().map(|c| c.display.clone()));
        fields.push(best.join(";"));
        w.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn to_json(t: &Table) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("table serializes");
    s.push('\n');
    s
}

/// Markdown with the best value(s) of each row in bold.
pub fn to_markdown(t: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "### {} ({})", t.name, t.metric);
    out.push('\n');
    let mut header = vec!["model".to_string(), "difficulty".to_string()];
    header.extend(t.columns.iter().cloned());
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in &t.rows {
        let mut fields = vec![row.model.clone(), row.difficulty.clone()];
        fields.extend(row.cells.iter().map(|c| {
            if c.best {
                format!("**{}**", c.display)
            } else {
                c.display.clone()
            }
        }));
        let _ = writeln!(out, "| {} |", fields.join(" | "));
    }
    out
}

/// Chart of the `avg` row: one group per model, one bar per condition.
pub fn chart_for(cells: &[AggregateCell], task: Task) -> Result<Option<String>, crate::svg::ChartError> {
    let metric = primary_metric(task);
    let mut models: Vec<&str> = cells
        .iter()
        .filter(|c| c.task == task && c.metric == metric && c.difficulty == AVG)
        .map(|c| c.model.as_str())
        .collect();
    models.dedup();
    if models.is_empty() {
        return Ok(None);
    }
    let groups: Vec<BarGroup> = models
        .iter()
        .map(|m| BarGroup {
            label: m.to_string(),
            bars: cells
                .iter()
                .filter(|c| c.task == task && c.metric == metric && c.difficulty == AVG && c.model == *m)
                .map(|c| (c.condition.clone(), c.value))
                .collect(),
        })
        .collect();
    bar_chart(&format!("{task}: {metric} (average over difficulties)"), metric, &groups).map(Some)
}

#[derive(Debug, Default)]
pub struct ReportSummary {
    pub files: Vec<PathBuf>,
    pub gaps: Vec<String>,
}

/// Writes `tables/`, `charts/` and `gaps.txt` under `out`.
pub fn write_report(cells: &[AggregateCell], out: &Path) -> std::io::Result<ReportSummary> {
    let tables = out.join("tables");
    let charts = out.join("charts");
    std::fs::create_dir_all(&tables)?;
    std::fs::create_dir_all(&charts)?;
    let mut summary = ReportSummary::default();
    let write = |path: PathBuf, text: &str, summary: &mut ReportSummary| -> std::io::Result<()> {
        std::fs::write(&path, text)?;
        summary.files.push(path);
        Ok(())
    };
    let mut specs: Vec<(String, Task, &str)> = Task::ALL
        .iter()
        .map(|t| (t.to_string(), *t, primary_metric(*t)))
        .collect();
    specs.push(("count_mse".into(), Task::Count, "mse"));
    for (name, task, metric) in specs {
        let (table, gaps) = build_table(&name, cells, task, metric);
        summary.gaps.extend(gaps);
        write(tables.join(format!("{name}.csv")), &to_csv(&table), &mut summary)?;
        write(tables.join(format!("{name}.json")), &to_json(&table), &mut summary)?;
        write(tables.join(format!("{name}.md")), &to_markdown(&table), &mut summary)?;
    }
    for task in Task::ALL {
        match chart_for(cells, task) {
            Ok(Some(svg)) => write(charts.join(format!("{task}.svg")), &svg, &mut summary)?,
            Ok(None) => summary.gaps.push(format!("chart {task}: no average values")),
            Err(e) => summary.gaps.push(format!("chart {task}: {e}")),
        }
    }
    let mut gaps = summary.gaps.join("\n");
    if !gaps.is_empty() {
        gaps.push('\n');
    }
    std::fs::write(out.join("gaps.txt"), gaps)?;
    summary.files.push(out.join("gaps.txt"));
    Ok(summary)
}
