//! Share only the mean source direction and its spread, then show that
//! selection with the aggregate equals selection with the raw vectors.
//!
//! ```bash
//! cargo run --example privacy_aggregate
//! ```

use fld_transfer::dataset::{privacy_aggregate_json, read_privacy_aggregate};
use fld_transfer::{fit_fld, optimal_alpha, sample_task, sample_vmf, summarize_sources, AlphaGrid, RngStream, TaskDistribution, VmfModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prior = VmfModel::north(5, 10.0)?;
    let sources = sample_vmf(&prior, 50, RngStream::new(1, 0))?;
    let summary = summarize_sources(&sources)?;
    let json = privacy_aggregate_json(&summary);
    println!("{json}");

    let dir = std::env::temp_dir().join("fld-transfer-privacy-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("aggregate.json");
    std::fs::write(&path, &json)?;
    let shared = read_privacy_aggregate(&path)?;
    assert_eq!(shared, summary);

    let nu = sample_vmf(&prior, 1, RngStream::new(2, 0))?.remove(0);
    let fit = fit_fld(&sample_task(&TaskDistribution::isotropic(nu), 30, RngStream::new(3, 0)))?;
    let stream = RngStream::new(4, 0);
    let a = optimal_alpha(&fit, &summary, &AlphaGrid::default(), 200, stream)?;
    let b = optimal_alpha(&fit, &shared, &AlphaGrid::default(), 200, stream)?;
    println!("alpha* from raw vectors: {}, from the aggregate: {}", a.alpha_star, b.alpha_star);
    assert_eq!(a, b);
    Ok(())
}
