//! Draw from the task mixture, a multivariate normal, and a von Mises-Fisher
//! distribution.
//!
//! ```bash
//! cargo run --example sample_tasks
//! ```

use fld_transfer::{sample_mvn, sample_task, sample_vmf, Label, Matrix, RngStream, TaskDistribution, Vector, VmfModel};

fn main() -> fld_transfer::Result<()> {
    let nu = Vector::from_vec(vec![0.6, 0.8]);
    let sigma = Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
    let task = TaskDistribution::new(nu, sigma.clone(), 0.4)?;

    let samples = sample_task(&task, 10_000, RngStream::new(1, 0));
    let ones = samples.iter().filter(|s| s.y == Label::One).count();
    println!("class-one fraction: {:.3} (prior 0.4)", ones as f64 / samples.len() as f64);
    for s in samples.iter().take(3) {
        println!("  y={} x=({:+.3}, {:+.3})", s.y.as_u8(), s.x[0], s.x[1]);
    }

    let draw = sample_mvn(&Vector::zeros(2), &sigma, RngStream::new(2, 0))?;
    println!("one N(0, sigma) draw: ({:+.3}, {:+.3})", draw[0], draw[1]);

    for kappa in [0.0, 1.0, 10.0, 100.0] {
        let model = VmfModel::north(3, kappa)?;
        let draws = sample_vmf(&model, 20_000, RngStream::new(3, 0))?;
        let mean_cos = draws.iter().map(|w| w[0]).sum::<f64>() / draws.len() as f64;
        println!("vMF kappa={kappa:>5}: mean cosine to the mean direction {mean_cos:.3}");
    }
    Ok(())
}
