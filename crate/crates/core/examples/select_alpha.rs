//! Choose the mixing coefficient between a small-sample target direction
//! and the average of many source directions.
//!
//! ```bash
//! cargo run --example select_alpha
//! ```

use fld_transfer::transfer::{closed_form_risk, combine};
use fld_transfer::{
    fit_fld, optimal_alpha, sample_task, sample_vmf, summarize_sources, AlphaGrid, Matrix, RngStream,
    TaskDistribution, VmfModel,
};

fn main() -> fld_transfer::Result<()> {
    let d = 10;
    let prior = VmfModel::north(d, 20.0)?;
    let nu = sample_vmf(&prior, 1, RngStream::new(1, 0))?.remove(0);
    let sources = sample_vmf(&prior, 200, RngStream::new(2, 0))?;

    let task = TaskDistribution::isotropic(nu.clone());
    let train = sample_task(&task, 24, RngStream::new(3, 0));
    let fit = fit_fld(&train)?;
    let summary = summarize_sources(&sources)?;
    println!(
        "J = {}, resultant length {:.3}, psi {:.4}",
        summary.j_count(),
        summary.resultant_length(),
        summary.psi_scale()
    );

    let grid = AlphaGrid::default();
    let curve = optimal_alpha(&fit, &summary, &grid, 500, RngStream::new(4, 0))?;
    let sigma = Matrix::identity(d, d);
    println!("alpha  estimated risk  true risk");
    for (&a, &r) in grid.values().iter().zip(&curve.risks) {
        let w = combine(a, fit.omega.as_vector(), summary.mu_hat())?;
        let truth = closed_form_risk(&w, &nu, &sigma)?;
        let mark = if a == curve.alpha_star { " <- selected" } else { "" };
        println!("{a:5.1}  {r:14.4}  {truth:9.4}{mark}");
    }
    Ok(())
}
