use rayon::prelude::*;

use super::split::{consecutive_split, SplitSpec};
use super::wilcoxon::signed_rank_test;
use super::SessionDataset;
use crate::error::{Error, Result};
use crate::fld::{fit_assumption_transform, fit_fld_with, CovarianceModel};
use crate::linalg::Vector;
use crate::rng::RngStream;
use crate::sampling::{sample_task, TaskDistribution};
use crate::simlab::Classifier;
use crate::transfer::{combined_accuracy, optimal_alpha, oracle_alpha, summarize_sources, AlphaGrid, SourceSummary};

/// Source information: raw projection vectors, or only their aggregate.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceInput {
    Vectors(Vec<Vector>),
    Summary(SourceSummary),
}

impl SourceInput {
    pub fn summary(&self) -> Result<SourceSummary> {
        match self {
            SourceInput::Vectors(v) => summarize_sources(v),
            SourceInput::Summary(s) => Ok(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub grid: AlphaGrid,
    pub b_samples: usize,
    pub covariance_model: CovarianceModel,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            grid: AlphaGrid::default(),
            b_samples: 100,
            covariance_model: CovarianceModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub session_id: String,
    pub p: f64,
    pub split_index: usize,
    pub classifier: Classifier,
    pub balanced_accuracy: f64,
    pub alpha: f64,
}

/// A split (or, with `split_index == None`, a whole session) that could not
/// be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedSplit {
    pub session_id: String,
    pub p: f64,
    pub split_index: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalOutcome {
    pub records: Vec<EvalRecord>,
    pub skipped: Vec<SkippedSplit>,
}

impl EvalOutcome {
    fn extend(&mut self, other: EvalOutcome) {
        self.records.extend(other.records);
        self.skipped.extend(other.skipped);
    }
}

const KEY_SELECT: u64 = 1;

fn eval_split(
    ds: &SessionDataset,
    summary: &SourceSummary,
    spec: &SplitSpec,
    opts: &EvalOptions,
    split_index: usize,
) -> Result<Vec<EvalRecord>> {
    let split = consecutive_split(ds, spec, split_index)?;
    let train = ds.samples_at(&split.train);
    let transform = fit_assumption_transform(&train)?;
    let train = transform.apply_all(&train);
    let test = transform.apply_all(&ds.samples_at(&split.test));
    let fit = fit_fld_with(&train, opts.covariance_model)?;
    let stream = spec.stream(ds.session_id(), split_index).derive(KEY_SELECT);
    let curve = optimal_alpha(&fit, summary, &opts.grid, opts.b_samples, stream)?;
    let omega = fit.omega.as_vector();
    let mu = summary.mu_hat();
    let (oracle_a, oracle_acc) = oracle_alpha(omega, mu, &opts.grid, &test)?;
    let record = |classifier, alpha, balanced_accuracy| EvalRecord {
        session_id: ds.session_id().to_string(),
        p: spec.proportion,
        split_index,
        classifier,
        balanced_accuracy,
        alpha,
    };
    Ok(vec![
        record(Classifier::Target, 1.0, combined_accuracy(1.0, omega, mu, &test)?),
        record(Classifier::Source, 0.0, combined_accuracy(0.0, omega, mu, &test)?),
        record(
            Classifier::Optimal,
            curve.alpha_star,
            combined_accuracy(curve.alpha_star, omega, mu, &test)?,
        ),
        record(Classifier::Oracle, oracle_a, oracle_acc),
    ])
}

/// Runs `spec.split_count` train/test splits on one session.
///
/// Splits that fail (too few windows, degenerate covariance, ...) are listed
/// in [`EvalOutcome::skipped`] and do not abort the run. Errors in the inputs
/// themselves (bad source vectors, dimension mismatch) are returned.
pub fn evaluate_transfer(
    target: &SessionDataset,
    sources: &SourceInput,
    spec: &SplitSpec,
    opts: &EvalOptions,
) -> Result<EvalOutcome> {
    let summary = sources.summary()?;
    evaluate_with_summary(target, &summary, spec, opts)
}

fn evaluate_with_summary(
    target: &SessionDataset,
    summary: &SourceSummary,
    spec: &SplitSpec,
    opts: &EvalOptions,
) -> Result<EvalOutcome> {
    if summary.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            got: summary.dim(),
        });
    }
    let results: Vec<_> = (0..spec.split_count)
        .into_par_iter()
        .map(|k| eval_split(target, summary, spec, opts, k))
        .collect();
    let mut out = EvalOutcome::default();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(recs) => out.records.extend(recs),
            Err(e) => out.skipped.push(SkippedSplit {
                session_id: target.session_id().to_string(),
                p: spec.proportion,
                split_index: Some(k),
                reason: e.to_string(),
            }),
        }
    }
    Ok(out)
}

/// Per-(session, p) summary of an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionReport {
    pub session_id: String,
    pub p: f64,
    pub completed: usize,
    pub skipped: usize,
    /// Mean balanced accuracy, indexed like [`Classifier::ALL`]; NaN when no
    /// split completed.
    pub mean: [f64; 4],
    /// One-sided signed-rank p-value for optimal > target.
    pub p_optimal_vs_target: Option<f64>,
    /// One-sided signed-rank p-value for optimal > source.
    pub p_optimal_vs_source: Option<f64>,
}

impl SessionReport {
    fn from_records(session_id: &str, p: f64, records: &[EvalRecord], skipped: usize) -> Self {
        let per = |c: Classifier| -> Vec<f64> {
            records
                .iter()
                .filter(|r| r.classifier == c)
                .map(|r| r.balanced_accuracy)
                .collect()
        };
        let cols = Classifier::ALL.map(per);
        let completed = cols[0].len();
        let mean = cols.clone().map(|v| v.iter().sum::<f64>() / v.len() as f64);
        let diff = |a: &[f64], b: &[f64]| -> Option<f64> {
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            signed_rank_test(&d).ok()
        };
        let (t, s, o) = (
            &cols[Classifier::Target as usize],
            &cols[Classifier::Source as usize],
            &cols[Classifier::Optimal as usize],
        );
        Self {
            session_id: session_id.to_string(),
            p,
            completed,
            skipped,
            mean,
            p_optimal_vs_target: diff(o, t),
            p_optimal_vs_source: diff(o, s),
        }
    }
}

/// Evaluates every session at every proportion in `ps`.
///
/// Records come back ordered by session (input order), proportion (input
/// order), split index and classifier, independent of scheduling. A session
/// whose dimension does not match the sources is skipped as a whole.
pub fn evaluate_sessions(
    sessions: &[SessionDataset],
    sources: &SourceInput,
    ps: &[f64],
    split_count: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<(EvalOutcome, Vec<SessionReport>)> {
    let summary = sources.summary()?;
    let specs = ps
        .iter()
        .map(|&p| SplitSpec::new(p, split_count, seed))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(&SessionDataset, &SplitSpec)> = sessions
        .iter()
        .flat_map(|s| specs.iter().map(move |sp| (s, sp)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(ds, spec)| {
            let out = evaluate_with_summary(ds, &summary, spec, opts).unwrap_or_else(|e| EvalOutcome {
                records: Vec::new(),
                skipped: vec![SkippedSplit {
                    session_id: ds.session_id().to_string(),
                    p: spec.proportion,
                    split_index: None,
                    reason: e.to_string(),
                }],
            });
            let skipped = match out.skipped.as_slice() {
                [SkippedSplit { split_index: None, .. }] => spec.split_count,
                s => s.len(),
            };
            let report = SessionReport::from_records(ds.session_id(), spec.proportion, &out.records, skipped);
            (out, report)
        })
        .collect();
    let mut all = EvalOutcome::default();
    let mut reports = Vec::with_capacity(results.len());
    for (out, rep) in results {
        all.extend(out);
        reports.push(rep);
    }
    Ok((all, reports))
}

/// A session drawn from the symmetric task model with `Sigma = I`,
/// `n_per_class` windows per class, classes interleaved in temporal order.
pub fn synthetic_session(
    session_id: impl Into<String>,
    nu: &Vector,
    n_per_class: usize,
    stream: RngStream,
) -> Result<SessionDataset> {
    let task = TaskDistribution::isotropic(nu.clone());
    let mut ones = Vec::new();
    let mut zeros = Vec::new();
    let mut batch = 0;
    while ones.len() < n_per_class || zeros.len() < n_per_class {
        for s in sample_task(&task, 2 * n_per_class, stream.derive(batch)) {
            match s.y {
                crate::sampling::Label::One if ones.len() < n_per_class => ones.push(s),
                crate::sampling::Label::Zero if zeros.len() < n_per_class => zeros.push(s),
                _ => {}
            }
        }
        batch += 1;
    }
    let samples: Vec<_> = zeros.into_iter().zip(ones).flat_map(|(a, b)| [a, b]).collect();
    SessionDataset::from_samples(session_id, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_vmf, VmfModel};

    #[test]
    fn own_direction_as_source() {
        let nu = Vector::from_vec(vec![0.6, 0.8, 0.0]);
        let ds = synthetic_session("s", &nu, 100, RngStream::new(1, 0)).unwrap();
        let spec = SplitSpec::new(0.1, 5, 2).unwrap();
        let grid = AlphaGrid::new(vec![0.0]).unwrap();
        let opts = EvalOptions {
            grid,
            ..EvalOptions::default()
        };
        let out = evaluate_transfer(&ds, &SourceInput::Vectors(vec![nu.clone()]), &spec, &opts).unwrap();
        assert!(out.skipped.is_empty());
        for k in 0..5 {
            let get = |c| {
                out.records
                    .iter()
                    .find(|r| r.split_index == k && r.classifier == c)
                    .unwrap()
            };
            assert_eq!(get(Classifier::Oracle).alpha, 0.0);
            assert_eq!(get(Classifier::Optimal).alpha, 0.0);
            assert_eq!(
                get(Classifier::Source).balanced_accuracy,
                get(Classifier::Oracle).balanced_accuracy
            );
        }
    }

    #[test]
    fn oracle_dominates_optimal() {
        let nu = Vector::from_vec(vec![1.0, 0.0]);
        let ds = synthetic_session("s", &nu, 60, RngStream::new(4, 0)).unwrap();
        let sources = sample_vmf(&VmfModel::north(2, 5.0).unwrap(), 20, RngStream::new(5, 0)).unwrap();
        let spec = SplitSpec::new(0.1, 10, 3).unwrap();
        let out = evaluate_transfer(&ds, &SourceInput::Vectors(sources), &spec, &EvalOptions::default()).unwrap();
        assert_eq!(out.records.len(), 40);
        for chunk in out.records.chunks(4) {
            assert!(chunk[3].balanced_accuracy >= chunk[2].balanced_accuracy);
            assert!(chunk.iter().all(|r| (0.0..=1.0).contains(&r.balanced_accuracy)));
        }
    }

    #[test]
    fn failing_splits_are_skipped() {
        let nu = Vector::from_vec(vec![1.0, 0.0]);
        let ds = synthetic_session("s", &nu, 10, RngStream::new(4, 0)).unwrap();
        let spec = SplitSpec::new(0.1, 3, 3).unwrap();
        let src = SourceInput::Vectors(vec![nu.clone()]);
        let out = evaluate_transfer(&ds, &src, &spec, &EvalOptions::default()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.skipped.len(), 3);
        let bad = SourceInput::Vectors(vec![Vector::from_vec(vec![1.0, 0.0, 0.0])]);
        assert!(matches!(
            evaluate_transfer(&ds, &bad, &spec, &EvalOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
