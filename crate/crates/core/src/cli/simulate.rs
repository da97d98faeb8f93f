use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;
use serde_json::json;

use super::{build_grid, load_config, parse_model, runtime, usage, with_threads, CliResult, Common, SharedArgs};
use crate::dataset::format_float;
use crate::simlab::{
    run_dimension_sweep, run_kappa_sweep, run_validation, sweep_base, validation_base, Classifier,
    Experiment, SimConfig, SimTable, SWEEP_DIMS, SWEEP_KAPPAS, VALIDATION_JS, VALIDATION_NS,
};

pub const CSV_FILE: &str = "simulation.csv";
pub const JSON_FILE: &str = "simulation.json";
pub const CSV_HEADER: &str =
    "experiment,d,n,J,kappa,classifier,analytical_acc,empirical_acc,mean_alpha,replicates,seed";

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// validation, kappa or dimension
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Monte-Carlo draws per grid point
    #[arg(long)]
    pub b_samples: Option<usize>,
    #[arg(long)]
    pub test_size: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long)]
    pub alpha_step: Option<f64>,
    /// Dimension of the base configuration
    #[arg(long)]
    pub d: Option<usize>,
    /// Target training size of the base configuration
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of source tasks of the base configuration
    #[arg(long = "j")]
    pub j_count: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub js: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub kappas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Estimate nu and Sigma from the training data (true) or use the
    /// population values (false)
    #[arg(long)]
    pub plug_in: Option<bool>,
    /// published or delta-method
    #[arg(long)]
    pub covariance_model: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    experiment: Option<String>,
    replicates: Option<usize>,
    b_samples: Option<usize>,
    test_size: Option<usize>,
    alphas: Option<Vec<f64>>,
    alpha_step: Option<f64>,
    d: Option<usize>,
    n: Option<usize>,
    j_count: Option<usize>,
    kappa: Option<f64>,
    ns: Option<Vec<usize>>,
    js: Option<Vec<usize>>,
    kappas: Option<Vec<f64>>,
    dims: Option<Vec<usize>>,
    plug_in: Option<bool>,
    covariance_model: Option<String>,
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
}

pub(super) fn run(shared: &SharedArgs, a: &SimulateArgs) -> CliResult<()> {
    let c: SimulateConfig = load_config(shared.config.as_deref())?;
    let common = Common::merge(shared, c.seed, c.threads, c.out);
    let name = a
        .experiment
        .clone()
        .or(c.experiment)
        .ok_or_else(|| usage("missing required --experiment <validation|kappa|dimension>"))?;
    let experiment = Experiment::parse(&name)
        .ok_or_else(|| usage(format!("unknown experiment `{name}` (validation, kappa, dimension)")))?;

    let alphas = a.alphas.clone().or(c.alphas);
    let step = a.alpha_step.or(c.alpha_step);
    let mut base = match experiment {
        Experiment::Validation => validation_base(),
        _ => sweep_base(),
    };
    base.replicates = a.replicates.or(c.replicates).unwrap_or(base.replicates);
    base.b_samples = a.b_samples.or(c.b_samples).unwrap_or(base.b_samples);
    base.test_size = a.test_size.or(c.test_size).unwrap_or(base.test_size);
    base.grid = build_grid(alphas, step)?;
    base.d = a.d.or(c.d).unwrap_or(base.d);
    base.n = a.n.or(c.n).unwrap_or(base.n);
    base.j_count = a.j_count.or(c.j_count).unwrap_or(base.j_count);
    base.kappa = a.kappa.or(c.kappa).unwrap_or(base.kappa);
    base.plug_in = a.plug_in.or(c.plug_in).unwrap_or(base.plug_in);
    base.covariance_model = parse_model(a.covariance_model.as_deref().or(c.covariance_model.as_deref()))?;
    base.seed = common.seed;

    let ns = a.ns.clone().or(c.ns).unwrap_or(VALIDATION_NS.to_vec());
    let js = a.js.clone().or(c.js).unwrap_or(VALIDATION_JS.to_vec());
    let kappas = a.kappas.clone().or(c.kappas).unwrap_or(SWEEP_KAPPAS.to_vec());
    let dims = a.dims.clone().or(c.dims).unwrap_or(SWEEP_DIMS.to_vec());
    let cells: Vec<SimConfig> = match experiment {
        Experiment::Validation => ns
            .iter()
            .flat_map(|&n| js.iter().map(move |&j| (n, j)))
            .map(|(n, j_count)| SimConfig { n, j_count, ..base.clone() })
            .collect(),
        Experiment::Kappa => kappas.iter().map(|&kappa| SimConfig { kappa, ..base.clone() }).collect(),
        Experiment::Dimension => dims.iter().map(|&d| SimConfig { d, ..base.clone() }).collect(),
    };
    if cells.is_empty() {
        return Err(usage("the parameter grid is empty"));
    }
    for cfg in &cells {
        cfg.validate().map_err(usage)?;
    }

    eprintln!(
        "simulate {}: {} cells x {} replicates",
        experiment.name(),
        cells.len(),
        base.replicates
    );
    let table = with_threads(common.threads, || match experiment {
        Experiment::Validation => run_validation(&base, &ns, &js),
        Experiment::Kappa => run_kappa_sweep(&base, &kappas),
        Experiment::Dimension => run_dimension_sweep(&base, &dims),
    })?
    .map_err(runtime)?;

    common.emit_primary(CSV_FILE, &table_csv(&table))?;
    common.emit_secondary(JSON_FILE, &table_json(&table, &base))
}

pub fn table_csv(table: &SimTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for cell in &table.cells {
        let c = &cell.config;
        for k in Classifier::ALL {
            let agg = cell.get(k);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                table.experiment.name(),
                c.d,
                c.n,
                c.j_count,
                format_float(c.kappa),
                k.name(),
                format_float(agg.analytical),
                format_float(agg.empirical),
                format_float(agg.alpha),
                cell.replicates.len(),
                c.seed
            ));
        }
    }
    out
}

fn table_json(table: &SimTable, base: &SimConfig) -> String {
    let cells: Vec<_> = table
        .cells
        .iter()
        .map(|cell| {
            let c = &cell.config;
            let mut classifiers = serde_json::Map::new();
            for k in Classifier::ALL {
                let agg = cell.get(k);
                classifiers.insert(
                    k.name().to_string(),
                    json!({
                        "analytical_acc": agg.analytical,
                        "empirical_acc": agg.empirical,
                        "mean_alpha": agg.alpha,
                    }),
                );
            }
            json!({
                "d": c.d,
                "n": c.n,
                "J": c.j_count,
                "kappa": c.kappa,
                "classifiers": classifiers,
            })
        })
        .collect();
    let doc = json!({
        "experiment": table.experiment.name(),
        "seed": base.seed,
        "replicates": base.replicates,
        "b_samples": base.b_samples,
        "test_size": base.test_size,
        "plug_in": base.plug_in,
        "covariance_model": base.covariance_model.name(),
        "alpha_grid": base.grid.values(),
        "cells": cells,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}
