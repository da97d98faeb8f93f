//! Windowed session data: loading, consecutive-block splits, transfer
//! evaluation and paired significance tests.

mod eval;
mod io;
mod split;
mod wilcoxon;

pub use eval::{
    evaluate_sessions, evaluate_transfer, synthetic_session, EvalOptions, EvalOutcome, EvalRecord,
    SessionReport, SkippedSplit, SourceInput,
};
pub use io::{
    format_float, load_sessions, privacy_aggregate_json, read_privacy_aggregate, read_session_csv, read_source_vectors,
    write_privacy_aggregate, write_session_csv, write_sessions, write_source_vectors,
};
pub use split::{consecutive_split, Split, SplitSpec};
pub use wilcoxon::{signed_rank_exact_brute_force, signed_rank_test};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::sampling::{Label, LabeledSample};

/// One participant's windowed features. Row order is temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionDataset {
    session_id: String,
    features: Matrix,
    labels: Vec<Label>,
}

impl SessionDataset {
    /// Needs at least 4 rows, 2 per class, and finite features.
    pub fn new(session_id: impl Into<String>, features: Matrix, labels: Vec<Label>) -> Result<Self> {
        let session_id = session_id.into();
        let fail = |message: String| Error::InvariantViolation {
            path: session_id.clone().into(),
            message,
        };
        if features.nrows() != labels.len() {
            return Err(fail(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(fail("no feature columns".into()));
        }
        if labels.len() < 4 {
            return Err(fail(format!("need at least 4 rows, got {}", labels.len())));
        }
        for class in [Label::Zero, Label::One] {
            let c = labels.iter().filter(|&&l| l == class).count();
            if c < 2 {
                return Err(fail(format!(
                    "class {} has {c} rows, need at least 2",
                    class.as_u8()
                )));
            }
        }
        if let Some((i, _)) = features.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let row = i % features.nrows();
            return Err(fail(format!("non-finite feature in row {}", row + 1)));
        }
        Ok(Self {
            session_id,
            features,
            labels,
        })
    }

    pub fn from_samples(session_id: impl Into<String>, samples: &[LabeledSample]) -> Result<Self> {
        let d = samples.first().map_or(0, |s| s.x.len());
        let features = Matrix::from_fn(samples.len(), d, |i, j| samples[i].x[j]);
        Self::new(session_id, features, samples.iter().map(|s| s.y).collect())
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> Vector {
        self.features.row(i).transpose()
    }

    pub fn sample(&self, i: usize) -> LabeledSample {
        LabeledSample::new(self.row(i), self.labels[i])
    }

    pub fn samples_at(&self, idx: &[usize]) -> Vec<LabeledSample> {
        idx.iter().map(|&i| self.sample(i)).collect()
    }

    /// Row indices of one class, in temporal order.
    pub fn class_indices(&self, class: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == class).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[u8]) -> Vec<Label> {
        xs.iter().map(|&v| Label::from_u8(v).unwrap()).collect()
    }

    #[test]
    fn invariants() {
        let ok = SessionDataset::new("s", Matrix::zeros(4, 2), labels(&[0, 1, 0, 1])).unwrap();
        assert_eq!(ok.class_indices(Label::One), vec![1, 3]);
        assert!(SessionDataset::new("s", Matrix::zeros(3, 2), labels(&[0, 1, 0])).is_err());
        assert!(SessionDataset::new("s", Matrix::zeros(4, 2), labels(&[0, 1, 1, 1])).is_err());
        let mut m = Matrix::zeros(4, 2);
        m[(2, 1)] = f64::NAN;
        let err = SessionDataset::new("s", m, labels(&[0, 1, 0, 1])).unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");
    }
}
