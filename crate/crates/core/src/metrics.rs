use crate::error::{Error, Result};
use crate::sampling::Label;

/// Mean of the two per-class recalls.
pub fn balanced_accuracy(predictions: &[Label], truth: &[Label]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predictions.len(),
        });
    }
    let mut hit = [0usize; 2];
    let mut total = [0usize; 2];
    for (&p, &t) in predictions.iter().zip(truth) {
        let k = t.as_u8() as usize;
        total[k] += 1;
        if p == t {
            hit[k] += 1;
        }
    }
    for k in 0..2 {
        if total[k] == 0 {
            return Err(Error::MissingClass(k as u8));
        }
    }
    Ok(0.5 * (hit[0] as f64 / total[0] as f64 + hit[1] as f64 / total[1] as f64))
}
