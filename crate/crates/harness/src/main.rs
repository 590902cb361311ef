use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use bindbench_core::render::{encode_png, load_image};
use bindbench_core::scaffold::{apply_scaffold, ScaffoldConfig, ScaffoldVariant};
use bindbench_harness::config::ScoringSettings;
use bindbench_harness::run::write_instances;
use bindbench_harness::{aggregate, read_records, write_report, RunConfig, Runner};

/// Feature-binding benchmark harness for vision-language models.
#[derive(Parser)]
#[command(name = "bindbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured instance grid as PNG + JSON manifests.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a scaffold over a PNG image, or over every PNG in a directory.
    Augment {
        #[arg(long, default_value = "rows")]
        variant: ScaffoldVariant,
        /// Number of lines per axis.
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        stroke_width: u32,
    },
    /// Query every configured provider over the grid. Exits 2 when cells
    /// are left incomplete.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a record stream into per-cell metrics (JSON).
    Score {
        #[arg(long)]
        records: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Write tables and charts for a record stream.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
}

#[derive(Args)]
struct ScoringArgs {
    /// Only accept answers in the requested bracket format.
    #[arg(long)]
    strict: bool,
    /// Count unmatched predicted objects in the edit distance.
    #[arg(long)]
    penalize_extra: bool,
}

impl ScoringArgs {
    fn settings(&self) -> ScoringSettings {
        ScoringSettings {
            allow_fallback: !self.strict,
            penalize_extra: self.penalize_extra,
        }
    }
}

fn augment_one(input: &std::path::Path, output: &std::path::Path, config: &ScaffoldConfig) -> Result<()> {
    let img = load_image(input).with_context(|| format!("reading {}", input.display()))?;
    let out = apply_scaffold(&img, config)?;
    std::fs::write(output, encode_png(&out)?).with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

fn load_aggregation(records: &std::path::Path, scoring: ScoringSettings) -> Result<bindbench_harness::Aggregation> {
    let loaded = read_records(records)?;
    if loaded.torn_tail {
        tracing::warn!("ignoring torn final record in {}", records.display());
    }
    let agg = aggregate(&loaded.records, scoring);
    for w in &agg.warnings {
        tracing::warn!("{w}");
    }
    Ok(agg)
}

async fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { config, out } => {
            let config = RunConfig::load(&config)?;
            let runner = Runner::with_providers(config, Vec::new());
            let (instances, skipped) = runner.instances();
            for s in &skipped {
                tracing::warn!(cell = %s.cell, reason = %s.reason, "skipped");
            }
            std::fs::create_dir_all(&out)?;
            let n = write_instances(&out, &instances)?;
            println!("wrote {n} instances to {}", out.display());
        }
        Command::Augment {
            variant,
            n,
            input,
            out,
            stroke_width,
        } => {
            let config = ScaffoldConfig {
                variant,
                n_lines: n,
                stroke_width,
                ..ScaffoldConfig::default()
            };
            config.validate()?;
            if input.is_dir() {
                std::fs::create_dir_all(&out)?;
                let mut entries: Vec<PathBuf> = std::fs::read_dir(&input)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
                    .collect();
                entries.sort();
                for path in &entries {
                    augment_one(path, &out.join(path.file_name().expect("file entry")), &config)?;
                }
                println!("augmented {} images into {}", entries.len(), out.display());
            } else {
                augment_one(&input, &out, &config)?;
            }
        }
        Command::Run { config, out } => {
            let mut config = RunConfig::load(&config)?;
            if let Some(out) = out {
                config.out_dir = out;
            }
            let runner = Runner::new(config)?;
            let summary = runner.run().await?;
            println!(
                "{} records written ({} resumed, {} provider calls, {} cache hits, {} failures)",
                summary.written, summary.resumed, summary.provider_calls, summary.cache_hits, summary.failures
            );
            for s in &summary.skipped_cells {
                println!("skipped {}: {}", s.cell, s.reason);
            }
            if !summary.is_complete() {
                for c in &summary.incomplete_cells {
                    println!("incomplete: {} / {} / {} / {}", c.model, c.task, c.condition, c.difficulty);
                }
                return Ok(ExitCode::from(2));
            }
        }
        Command::Score { records, out, scoring } => {
            let agg = load_aggregation(&records, scoring.settings())?;
            let mut json = serde_json::to_string_pretty(&agg)?;
            json.push('\n');
            match out {
                Some(path) => std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{json}"),
            }
        }
        Command::Report { records, out, scoring } => {
            let agg = load_aggregation(&records, scoring.settings())?;
            if agg.cells.is_empty() && !records.exists() {
                bail!("no records at {}", records.display());
            }
            let summary = write_report(&agg.cells, &out)?;
            println!("wrote {} files to {}", summary.files.len(), out.display());
            for g in &summary.gaps {
                println!("gap: {g}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()).await {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
