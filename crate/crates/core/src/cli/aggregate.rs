use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use super::{load_config, runtime, usage, CliResult, Common, SharedArgs};
use crate::dataset::{privacy_aggregate_json, read_source_vectors};
use crate::transfer::summarize_sources;

pub const OUTPUT_FILE: &str = "privacy_aggregate.json";

#[derive(Debug, Clone, Args)]
pub struct AggregateArgs {
    /// CSV with one unit-norm source projection vector per row
    #[arg(long)]
    pub source_vectors: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AggregateConfig {
    source_vectors: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
}

pub(super) fn run(shared: &SharedArgs, args: &AggregateArgs) -> CliResult<()> {
    let cfg: AggregateConfig = load_config(shared.config.as_deref())?;
    let common = Common::merge(shared, cfg.seed, cfg.threads, cfg.out);
    let path = args
        .source_vectors
        .clone()
        .or(cfg.source_vectors)
        .ok_or_else(|| usage("missing --source-vectors <FILE>"))?;
    let vectors = read_source_vectors(&path).map_err(usage)?;
    let summary = summarize_sources(&vectors).map_err(runtime)?;
    eprintln!(
        "aggregated {} source vectors (d = {}, resultant length {:.4})",
        summary.j_count(),
        summary.dim(),
        summary.resultant_length()
    );
    common.emit_primary(OUTPUT_FILE, &privacy_aggregate_json(&summary))
}
