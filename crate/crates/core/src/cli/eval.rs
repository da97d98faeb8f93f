use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use super::{build_grid, load_config, parse_model, runtime, usage, with_threads, CliResult, Common, SharedArgs};
use crate::dataset::{
    evaluate_sessions, format_float, load_sessions, read_privacy_aggregate, read_source_vectors,
    EvalOptions, EvalRecord, SessionReport, SourceInput,
};
use crate::simlab::Classifier;

pub const RECORDS_FILE: &str = "eval_records.csv";
pub const SUMMARY_FILE: &str = "eval_summary.csv";
pub const RECORDS_HEADER: &str = "session_id,p,split_index,classifier,balanced_accuracy,alpha";
pub const SUMMARY_HEADER: &str = "session_id,p,completed,skipped,target_acc,source_acc,optimal_acc,oracle_acc,p_optimal_vs_target,p_optimal_vs_source";
pub const DEFAULT_PROPORTIONS: [f64; 4] = [0.05, 0.1, 0.2, 0.5];

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    /// Directory of session CSV files, a single session CSV, or a JSON manifest
    #[arg(long)]
    pub sessions: Option<PathBuf>,
    /// CSV with one unit-norm source projection vector per row
    #[arg(long, conflicts_with = "privacy_aggregate")]
    pub source_vectors: Option<PathBuf>,
    /// JSON produced by `aggregate-sources`
    #[arg(long)]
    pub privacy_aggregate: Option<PathBuf>,
    /// Training proportions, comma separated
    #[arg(long = "p", value_delimiter = ',')]
    pub proportions: Option<Vec<f64>>,
    /// Train/test splits per session and proportion
    #[arg(long)]
    pub splits: Option<usize>,
    #[arg(long)]
    pub b_samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long)]
    pub alpha_step: Option<f64>,
    /// published or delta-method
    #[arg(long)]
    pub covariance_model: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalConfig {
    sessions: Option<PathBuf>,
    source_vectors: Option<PathBuf>,
    privacy_aggregate: Option<PathBuf>,
    proportions: Option<Vec<f64>>,
    splits: Option<usize>,
    b_samples: Option<usize>,
    alphas: Option<Vec<f64>>,
    alpha_step: Option<f64>,
    covariance_model: Option<String>,
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
}

pub(super) fn run(shared: &SharedArgs, a: &EvalArgs) -> CliResult<()> {
    let c: EvalConfig = load_config(shared.config.as_deref())?;
    let common = Common::merge(shared, c.seed, c.threads, c.out);
    let sessions_path = a
        .sessions
        .clone()
        .or(c.sessions)
        .ok_or_else(|| usage("missing required --sessions <PATH>"))?;
    let sources = match (
        a.source_vectors.clone(),
        a.privacy_aggregate.clone(),
        c.source_vectors,
        c.privacy_aggregate,
    ) {
        (Some(p), None, _, _) | (None, None, Some(p), None) => {
            SourceInput::Vectors(read_source_vectors(&p).map_err(usage)?)
        }
        (None, Some(p), _, _) | (None, None, None, Some(p)) => {
            SourceInput::Summary(read_privacy_aggregate(&p).map_err(usage)?)
        }
        (None, None, None, None) => {
            return Err(usage("one of --source-vectors or --privacy-aggregate is required"))
        }
        _ => return Err(usage("give only one of source_vectors or privacy_aggregate")),
    };
    let ps = a
        .proportions
        .clone()
        .or(c.proportions)
        .unwrap_or(DEFAULT_PROPORTIONS.to_vec());
    let splits = a.splits.or(c.splits).unwrap_or(100);
    let opts = EvalOptions {
        grid: build_grid(a.alphas.clone().or(c.alphas), a.alpha_step.or(c.alpha_step))?,
        b_samples: a.b_samples.or(c.b_samples).unwrap_or(100),
        covariance_model: parse_model(a.covariance_model.as_deref().or(c.covariance_model.as_deref()))?,
    };
    if opts.b_samples == 0 {
        return Err(usage("b_samples must be at least 1"));
    }
    if ps.is_empty() || ps.iter().any(|&p| !(p > 0.0 && p < 1.0)) || splits == 0 {
        return Err(usage("proportions must be in (0, 1) and splits at least 1"));
    }

    let sessions = load_sessions(&sessions_path).map_err(usage)?;
    if sessions.is_empty() {
        return Err(runtime(format!("no sessions found in {}", sessions_path.display())));
    }
    eprintln!(
        "eval: {} sessions x {} proportions x {splits} splits",
        sessions.len(),
        ps.len()
    );
    let (outcome, reports) = with_threads(common.threads, || {
        evaluate_sessions(&sessions, &sources, &ps, splits, common.seed, &opts)
    })?
    .map_err(runtime)?;
    for s in &outcome.skipped {
        match s.split_index {
            Some(k) => eprintln!("skipped {} p={} split {k}: {}", s.session_id, s.p, s.reason),
            None => eprintln!("skipped {} p={}: {}", s.session_id, s.p, s.reason),
        }
    }

    common.emit_primary(RECORDS_FILE, &records_csv(&outcome.records))?;
    common.emit_secondary(SUMMARY_FILE, &summary_csv(&reports))?;
    if reports.iter().all(|r| r.completed == 0) {
        return Err(runtime("no session completed a single split"));
    }
    Ok(())
}

pub fn records_csv(records: &[EvalRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.session_id,
            format_float(r.p),
            r.split_index,
            r.classifier.name(),
            format_float(r.balanced_accuracy),
            format_float(r.alpha)
        ));
    }
    out
}

pub fn summary_csv(reports: &[SessionReport]) -> String {
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    let mean = |x: f64| if x.is_nan() { String::new() } else { format_float(x) };
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in reports {
        let m = |c: Classifier| mean(r.mean[c as usize]);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.session_id,
            format_float(r.p),
            r.completed,
            r.skipped,
            m(Classifier::Target),
            m(Classifier::Source),
            m(Classifier::Optimal),
            m(Classifier::Oracle),
            opt(r.p_optimal_vs_target),
            opt(r.p_optimal_vs_source)
        ));
    }
    out
}
