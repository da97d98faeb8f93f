//! Analytical vs empirical accuracy as the target sample size and the number
//! of sources grow (target parameters known, d = 10, kappa = 10).
//!
//! ```bash
//! cargo run --release --example validation_study -- 100
//! ```

use fld_transfer::simlab::{run_validation, validation_base, Classifier, SimConfig, VALIDATION_JS, VALIDATION_NS};

fn main() -> fld_transfer::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let base = SimConfig {
        replicates,
        seed: 1,
        ..validation_base()
    };
    let table = run_validation(&base, &VALIDATION_NS, &VALIDATION_JS)?;
    println!("{replicates} replicates per cell");
    println!("   n      J | target gap  source gap | optimal  target  source | mean alpha*");
    for cell in &table.cells {
        let g = |c| cell.get(c);
        println!(
            "{:4} {:6} | {:10.4} {:11.4} | {:7.4} {:7.4} {:7.4} | {:.3}",
            cell.config.n,
            cell.config.j_count,
            cell.gap(Classifier::Target),
            cell.gap(Classifier::Source),
            g(Classifier::Optimal).empirical,
            g(Classifier::Target).empirical,
            g(Classifier::Source).empirical,
            g(Classifier::Optimal).alpha
        );
    }
    Ok(())
}
