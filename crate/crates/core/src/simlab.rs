//! Simulation studies on synthetic tasks.
//!
//! Every replicate draws a target direction and `J` source directions from a
//! von Mises-Fisher distribution around `e_1`, builds the target task
//! `N(+-nu, I)` with `nu` equal to the drawn target direction, and compares
//! four classifiers from the convex family:
//!
//! | classifier | coefficient                               |
//! |------------|-------------------------------------------|
//! | target     | 1                                         |
//! | source     | 0                                         |
//! | optimal    | minimizer of the estimated expected risk  |
//! | oracle     | best balanced accuracy on the test sample |
//!
//! "Analytical" accuracy is one minus the Monte-Carlo expected risk of the
//! classifier's coefficient, scored against the true task. "Empirical"
//! accuracy is the balanced accuracy on a fresh test sample.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fld::{fit_fld_with, CovarianceModel, FldFit};
use crate::linalg::{Matrix, Vector};
use crate::rng::{fnv1a, mix, RngStream};
use crate::sampling::{sample_task, sample_vmf, Label, LabeledSample, TaskDistribution, VmfModel};
use crate::transfer::{
    alpha_stream, combined_accuracy, expected_risk_against, optimal_alpha, oracle_alpha,
    summarize_sources, AlphaGrid,
};

pub use crate::metrics::balanced_accuracy;

const TRAIN_REDRAWS: u64 = 1000;

/// Parameters of one simulation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub d: usize,
    pub n: usize,
    pub j_count: usize,
    pub kappa: f64,
    pub replicates: usize,
    pub b_samples: usize,
    pub grid: AlphaGrid,
    pub test_size: usize,
    pub seed: u64,
    /// Estimate `nu` and `Sigma` from the training data (`true`), or treat
    /// them as known (`false`).
    pub plug_in: bool,
    pub covariance_model: CovarianceModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            d: 10,
            n: 20,
            j_count: 100,
            kappa: 10.0,
            replicates: 200,
            b_samples: 100,
            grid: AlphaGrid::default(),
            test_size: 10_000,
            seed: 0,
            plug_in: true,
            covariance_model: CovarianceModel::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::DimensionTooSmall(self.d));
        }
        for (name, v) in [
            ("n", self.n),
            ("j_count", self.j_count),
            ("replicates", self.replicates),
            ("b_samples", self.b_samples),
            ("test_size", self.test_size),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if self.plug_in && self.n < 4 {
            return Err(Error::invalid("plug-in mode needs n >= 4"));
        }
        if self.n < 2 {
            return Err(Error::invalid("n must be at least 2"));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::invalid("kappa must be finite and >= 0"));
        }
        if self.test_size < 2 {
            return Err(Error::invalid("test_size must be at least 2"));
        }
        Ok(())
    }

    /// Stable key for the cell, mixed into every replicate stream.
    pub fn cell_id(&self) -> u64 {
        let key = format!(
            "d={};n={};J={};kappa={:016x};plug_in={};cov={}",
            self.d,
            self.n,
            self.j_count,
            self.kappa.to_bits(),
            self.plug_in,
            self.covariance_model.name()
        );
        fnv1a(key.as_bytes())
    }

    pub fn replicate_stream(&self, replicate_index: usize) -> RngStream {
        RngStream::new(self.seed, mix(self.cell_id() ^ mix(replicate_index as u64)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classifier {
    Target,
    Source,
    Optimal,
    Oracle,
}

impl Classifier {
    pub const ALL: [Classifier; 4] = [
        Classifier::Target,
        Classifier::Source,
        Classifier::Optimal,
        Classifier::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Classifier::Target => "target",
            Classifier::Source => "source",
            Classifier::Optimal => "optimal",
            Classifier::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub analytical: f64,
    pub empirical: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    /// Indexed like [`Classifier::ALL`].
    pub outcomes: [Outcome; 4],
}

impl ReplicateRecord {
    pub fn get(&self, c: Classifier) -> Outcome {
        self.outcomes[c as usize]
    }
}

// Sub-stream keys inside a replicate.
const KEY_TARGET: u64 = 1;
const KEY_SOURCES: u64 = 2;
const KEY_TRAIN: u64 = 3;
const KEY_TEST: u64 = 4;
const KEY_SELECT: u64 = 5;

/// Draws training data, redrawing until both classes have `min_per_class`
/// samples.
fn draw_training(
    task: &TaskDistribution,
    n: usize,
    min_per_class: usize,
    stream: RngStream,
) -> Result<Vec<LabeledSample>> {
    for attempt in 0..TRAIN_REDRAWS {
        let s = sample_task(task, n, stream.derive(attempt));
        let ones = s.iter().filter(|x| x.y == Label::One).count();
        if ones >= min_per_class && n - ones >= min_per_class {
            return Ok(s);
        }
    }
    Err(Error::invalid(format!(
        "could not draw {n} training samples with {min_per_class} per class"
    )))
}

/// One Monte-Carlo replicate of a simulation cell.
pub fn run_replicate(cfg: &SimConfig, replicate_index: usize) -> Result<ReplicateRecord> {
    cfg.validate()?;
    let stream = cfg.replicate_stream(replicate_index);
    let prior = VmfModel::north(cfg.d, cfg.kappa)?;
    let nu = sample_vmf(&prior, 1, stream.derive(KEY_TARGET))?.remove(0);
    let sources = sample_vmf(&prior, cfg.j_count, stream.derive(KEY_SOURCES))?;
    let task = TaskDistribution::isotropic(nu.clone());
    let sigma = Matrix::identity(cfg.d, cfg.d);

    let min_per_class = if cfg.plug_in { 2 } else { 1 };
    let train = draw_training(&task, cfg.n, min_per_class, stream.derive(KEY_TRAIN))?;
    let fit = if cfg.plug_in {
        fit_fld_with(&train, cfg.covariance_model)?
    } else {
        FldFit::with_known_parameters(&train, &nu, &sigma, cfg.covariance_model)?
    };
    let summary = summarize_sources(&sources)?;
    let select = stream.derive(KEY_SELECT);
    let curve = optimal_alpha(&fit, &summary, &cfg.grid, cfg.b_samples, select)?;

    let test = sample_task(&task, cfg.test_size, stream.derive(KEY_TEST));
    let omega = fit.omega.as_vector();
    let mu_hat = summary.mu_hat();
    let (oracle_a, oracle_acc) = oracle_alpha(omega, mu_hat, &cfg.grid, &test)?;

    let outcome = |alpha: f64, empirical: Option<f64>| -> Result<Outcome> {
        let risk = expected_risk_against(
            alpha,
            &fit,
            &summary,
            &nu,
            &sigma,
            cfg.b_samples,
            alpha_stream(select, alpha),
        )?;
        let empirical = match empirical {
            Some(e) => e,
            None => combined_accuracy(alpha, omega, mu_hat, &test)?,
        };
        Ok(Outcome {
            analytical: 1.0 - risk,
            empirical,
            alpha,
        })
    };
    Ok(ReplicateRecord {
        replicate: replicate_index,
        outcomes: [
            outcome(1.0, None)?,
            outcome(0.0, None)?,
            outcome(curve.alpha_star, None)?,
            outcome(oracle_a, Some(oracle_acc))?,
        ],
    })
}

/// Replicate means for one classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub analytical: f64,
    pub empirical: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub config: SimConfig,
    pub replicates: Vec<ReplicateRecord>,
    pub aggregates: [Aggregate; 4],
}

impl CellResult {
    pub fn get(&self, c: Classifier) -> Aggregate {
        self.aggregates[c as usize]
    }

    /// `|mean analytical - mean empirical|` for one classifier.
    pub fn gap(&self, c: Classifier) -> f64 {
        let a = self.get(c);
        (a.analytical - a.empirical).abs()
    }
}

fn aggregate(records: &[ReplicateRecord]) -> [Aggregate; 4] {
    let n = records.len() as f64;
    let mut out = [Aggregate {
        analytical: 0.0,
        empirical: 0.0,
        alpha: 0.0,
    }; 4];
    for (k, agg) in out.iter_mut().enumerate() {
        let (mut a, mut e, mut al) = (0.0, 0.0, 0.0);
        for r in records {
            a += r.outcomes[k].analytical;
            e += r.outcomes[k].empirical;
            al += r.outcomes[k].alpha;
        }
        *agg = Aggregate {
            analytical: a / n,
            empirical: e / n,
            alpha: al / n,
        };
    }
    out
}

/// Runs all replicates of a cell in parallel; the result does not depend on
/// the number of worker threads.
pub fn run_cell(cfg: &SimConfig) -> Result<CellResult> {
    cfg.validate()?;
    let replicates = (0..cfg.replicates)
        .into_par_iter()
        .map(|i| run_replicate(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let aggregates = aggregate(&replicates);
    Ok(CellResult {
        config: cfg.clone(),
        replicates,
        aggregates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Validation,
    Kappa,
    Dimension,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Validation => "validation",
            Experiment::Kappa => "kappa",
            Experiment::Dimension => "dimension",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "validation" => Some(Experiment::Validation),
            "kappa" => Some(Experiment::Kappa),
            "dimension" => Some(Experiment::Dimension),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTable {
    pub experiment: Experiment,
    pub cells: Vec<CellResult>,
}

impl SimTable {
    pub fn cell(&self, pred: impl Fn(&SimConfig) -> bool) -> Option<&CellResult> {
        self.cells.iter().find(|c| pred(&c.config))
    }
}

pub const VALIDATION_NS: [usize; 4] = [10, 20, 50, 100];
pub const VALIDATION_JS: [usize; 3] = [10, 100, 1000];
pub const SWEEP_KAPPAS: [f64; 5] = [0.1, 1.0, 10.0, 100.0, 1000.0];
pub const SWEEP_DIMS: [usize; 5] = [2, 5, 10, 20, 50];

/// Base configuration of the approximation-validation study: `d = 10`,
/// `kappa = 10`, target mean and covariance known.
pub fn validation_base() -> SimConfig {
    SimConfig {
        d: 10,
        kappa: 10.0,
        plug_in: false,
        ..SimConfig::default()
    }
}

/// Base configuration of the kappa and dimension sweeps: `d = 10`,
/// `J = 100`, `kappa = 10`, `n = 20`, plug-in estimates.
pub fn sweep_base() -> SimConfig {
    SimConfig::default()
}

fn run_cells(experiment: Experiment, cfgs: Vec<SimConfig>) -> Result<SimTable> {
    let cells = cfgs.iter().map(run_cell).collect::<Result<Vec<_>>>()?;
    Ok(SimTable { experiment, cells })
}

/// Grid over `n` x `J`, row-major in `n`.
pub fn run_validation(base: &SimConfig, ns: &[usize], js: &[usize]) -> Result<SimTable> {
    let cfgs = ns
        .iter()
        .flat_map(|&n| {
            js.iter().map(move |&j| SimConfig {
                n,
                j_count: j,
                ..base.clone()
            })
        })
        .collect();
    run_cells(Experiment::Validation, cfgs)
}

pub fn run_kappa_sweep(base: &SimConfig, kappas: &[f64]) -> Result<SimTable> {
    let cfgs = kappas
        .iter()
        .map(|&kappa| SimConfig {
            kappa,
            ..base.clone()
        })
        .collect();
    run_cells(Experiment::Kappa, cfgs)
}

pub fn run_dimension_sweep(base: &SimConfig, dims: &[usize]) -> Result<SimTable> {
    let cfgs = dims
        .iter()
        .map(|&d| SimConfig { d, ..base.clone() })
        .collect();
    run_cells(Experiment::Dimension, cfgs)
}

/// Bayes accuracy `Phi(sqrt(nu^T inv(Sigma) nu))` for an isotropic task.
pub fn bayes_accuracy(nu: &Vector) -> f64 {
    crate::special::std_normal_cdf(nu.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(plug_in: bool) -> SimConfig {
        SimConfig {
            d: 4,
            n: 20,
            j_count: 10,
            kappa: 10.0,
            replicates: 4,
            b_samples: 20,
            test_size: 500,
            seed: 3,
            plug_in,
            ..SimConfig::default()
        }
    }

    #[test]
    fn replicate_is_deterministic() {
        for plug_in in [true, false] {
            let cfg = small(plug_in);
            let a = run_replicate(&cfg, 2).unwrap();
            let b = run_replicate(&cfg, 2).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, run_replicate(&cfg, 3).unwrap());
        }
    }

    #[test]
    fn accuracies_in_range_and_oracle_dominates() {
        let cell = run_cell(&small(true)).unwrap();
        for r in &cell.replicates {
            for o in r.outcomes {
                assert!((0.0..=1.0).contains(&o.analytical));
                assert!((0.0..=1.0).contains(&o.empirical));
            }
            let oracle = r.get(Classifier::Oracle).empirical;
            for c in [Classifier::Target, Classifier::Source, Classifier::Optimal] {
                assert!(oracle >= r.get(c).empirical, "{c:?}");
            }
            assert_eq!(r.get(Classifier::Target).alpha, 1.0);
            assert_eq!(r.get(Classifier::Source).alpha, 0.0);
        }
    }

    #[test]
    fn concentrated_sources_reach_bayes_accuracy() {
        let cfg = SimConfig {
            d: 5,
            n: 20,
            j_count: 10,
            kappa: 1e6,
            replicates: 3,
            b_samples: 10,
            test_size: 100_000,
            seed: 1,
            ..SimConfig::default()
        };
        let bayes = crate::special::std_normal_cdf(1.0);
        for i in 0..cfg.replicates {
            let r = run_replicate(&cfg, i).unwrap();
            let acc = r.get(Classifier::Source).empirical;
            assert!((acc - bayes).abs() < 0.01, "{acc}");
        }
    }

    #[test]
    fn large_target_sample_reaches_bayes_accuracy() {
        let cfg = SimConfig {
            d: 3,
            n: 1_000_000,
            j_count: 5,
            kappa: 1.0,
            replicates: 1,
            b_samples: 10,
            test_size: 200_000,
            seed: 2,
            ..SimConfig::default()
        };
        let r = run_replicate(&cfg, 0).unwrap();
        let bayes = crate::special::std_normal_cdf(1.0);
        let acc = r.get(Classifier::Target).empirical;
        assert!((acc - bayes).abs() < 0.005, "{acc}");
    }

    #[test]
    fn validation_grid_shape() {
        let base = SimConfig {
            replicates: 2,
            b_samples: 5,
            test_size: 200,
            ..validation_base()
        };
        let table = run_validation(&base, &[10, 20], &[10, 100]).unwrap();
        assert_eq!(table.cells.len(), 4);
        assert_eq!(table.cells[1].config.n, 10);
        assert_eq!(table.cells[1].config.j_count, 100);
        assert!(!table.cells[0].config.plug_in);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = small(true);
        cfg.replicates = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small(true);
        cfg.d = 1;
        assert!(matches!(cfg.validate(), Err(Error::DimensionTooSmall(1))));
    }
}
