use rand::Rng;

use super::SessionDataset;
use crate::error::{Error, Result};
use crate::rng::{fnv1a, mix, RngStream};
use crate::sampling::Label;

/// Proportion `p` of each class used for training, as one contiguous block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub proportion: f64,
    pub split_count: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(proportion: f64, split_count: usize, seed: u64) -> Result<Self> {
        if !(proportion > 0.0 && proportion < 1.0) {
            return Err(Error::invalid(format!("proportion must be in (0, 1), got {proportion}")));
        }
        if split_count == 0 {
            return Err(Error::invalid("split_count must be at least 1"));
        }
        Ok(Self {
            proportion,
            split_count,
            seed,
        })
    }

    /// Training block length for a class with `n_c` windows.
    pub fn block_len(&self, n_c: usize) -> usize {
        // The small slack keeps e.g. 0.29 * 100 from rounding down to 28.
        (self.proportion * n_c as f64 + 1e-9).floor() as usize
    }

    pub fn stream(&self, session_id: &str, split_index: usize) -> RngStream {
        let key = fnv1a(session_id.as_bytes()) ^ mix(self.proportion.to_bits());
        RngStream::new(self.seed, mix(key ^ mix(split_index as u64 ^ 0x5851_f42d_4c95_7f2d)))
    }
}

/// Row indices of a train/test partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Picks, per class, a uniformly placed contiguous run of `floor(p n_c)` of
/// that class's windows for training; everything else is test data.
pub fn consecutive_split(ds: &SessionDataset, spec: &SplitSpec, split_index: usize) -> Result<Split> {
    let mut rng = spec.stream(ds.session_id(), split_index).rng();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [Label::Zero, Label::One] {
        let idx = ds.class_indices(class);
        let m = spec.block_len(idx.len());
        if m < 2 {
            return Err(Error::TooFewWindows(format!(
                "session {}: class {} block of {m} windows (p = {}, {} windows), need 2",
                ds.session_id(),
                class.as_u8(),
                spec.proportion,
                idx.len()
            )));
        }
        if m >= idx.len() {
            return Err(Error::TooFewWindows(format!(
                "session {}: class {} has no test windows left (p = {})",
                ds.session_id(),
                class.as_u8(),
                spec.proportion
            )));
        }
        let start = rng.random_range(0..=idx.len() - m);
        train.extend_from_slice(&idx[start..start + m]);
        test.extend_from_slice(&idx[..start]);
        test.extend_from_slice(&idx[start + m..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn alternating(n_per_class: usize) -> SessionDataset {
        let labels = (0..2 * n_per_class)
            .map(|i| if i % 2 == 0 { Label::Zero } else { Label::One })
            .collect();
        SessionDataset::new("s", Matrix::zeros(2 * n_per_class, 1), labels).unwrap()
    }

    #[test]
    fn half_split_counts() {
        let ds = alternating(10);
        let spec = SplitSpec::new(0.5, 10, 1).unwrap();
        for k in 0..20 {
            let s = consecutive_split(&ds, &spec, k).unwrap();
            assert_eq!(s.train.len(), 10);
            assert_eq!(s.test.len(), 10);
            for class in [Label::Zero, Label::One] {
                let pos: Vec<_> = ds
                    .class_indices(class)
                    .iter()
                    .enumerate()
                    .filter(|(_, i)| s.train.contains(i))
                    .map(|(p, _)| p)
                    .collect();
                assert_eq!(pos.len(), 5);
                assert_eq!(pos[4] - pos[0], 4, "block not contiguous");
            }
            assert_eq!(s, consecutive_split(&ds, &spec, k).unwrap());
        }
    }

    #[test]
    fn boundaries() {
        let ds = alternating(10);
        let spec = SplitSpec::new(0.1, 1, 1).unwrap();
        assert!(matches!(consecutive_split(&ds, &spec, 0), Err(Error::TooFewWindows(_))));
        let spec = SplitSpec::new(0.999, 1, 1).unwrap();
        assert_eq!(spec.block_len(10), 9);
        let ds = alternating(2);
        let spec = SplitSpec::new(0.99, 1, 1).unwrap();
        assert!(matches!(consecutive_split(&ds, &spec, 0), Err(Error::TooFewWindows(_))));
        assert!(SplitSpec::new(1.0, 1, 1).is_err());
        assert_eq!(SplitSpec::new(0.29, 1, 0).unwrap().block_len(100), 29);
    }
}
