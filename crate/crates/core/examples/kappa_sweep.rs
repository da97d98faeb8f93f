//! How the selected coefficient and the three classifiers respond to the
//! concentration of the source directions, and to the dimension.
//!
//! ```bash
//! cargo run --release --example kappa_sweep -- 100
//! ```

use fld_transfer::simlab::{
    run_dimension_sweep, run_kappa_sweep, sweep_base, Classifier, SimConfig, SimTable, SWEEP_DIMS, SWEEP_KAPPAS,
};

fn print(table: &SimTable, label: &str, value: impl Fn(&SimConfig) -> String) {
    println!("{label:>8} | target  source  optimal | mean alpha*");
    for cell in &table.cells {
        let g = |c| cell.get(c).empirical;
        println!(
            "{:>8} | {:.4}  {:.4}  {:.4}  | {:.3}",
            value(&cell.config),
            g(Classifier::Target),
            g(Classifier::Source),
            g(Classifier::Optimal),
            cell.get(Classifier::Optimal).alpha
        );
    }
}

fn main() -> fld_transfer::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let base = SimConfig {
        replicates,
        seed: 2,
        ..sweep_base()
    };
    print(&run_kappa_sweep(&base, &SWEEP_KAPPAS)?, "kappa", |c| c.kappa.to_string());
    println!();
    print(&run_dimension_sweep(&base, &SWEEP_DIMS)?, "d", |c| c.d.to_string());
    Ok(())
}
