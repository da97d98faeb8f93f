//! Match raw data to the model assumptions, fit the discriminant, and look
//! at the estimated direction and its asymptotic covariance.
//!
//! ```bash
//! cargo run --example fit_discriminant
//! ```

use fld_transfer::{
    balanced_accuracy, fit_assumption_transform, fit_fld, predict, sample_task, LabeledSample, Matrix,
    RngStream, TaskDistribution, Vector,
};

fn main() -> fld_transfer::Result<()> {
    let nu = Vector::from_vec(vec![1.0, 0.5, 0.0]);
    let sigma = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0, 0.5]));
    let task = TaskDistribution::new(nu.clone(), sigma.clone(), 0.5)?;

    // Shift and rescale the features so the data look like real recordings.
    let offset = Vector::from_vec(vec![3.0, -1.0, 7.0]);
    let raw: Vec<_> = sample_task(&task, 400, RngStream::new(1, 0))
        .into_iter()
        .map(|s| LabeledSample::new((s.x + &offset) * 2.5, s.y))
        .collect();

    let transform = fit_assumption_transform(&raw)?;
    println!("shift {:.3}", transform.shift.transpose());
    println!("scale {:.3}", transform.scale);
    let train = transform.apply_all(&raw);
    let fit = fit_fld(&train)?;

    let truth = sigma.clone().cholesky().unwrap().inverse() * &nu;
    let truth = &truth / truth.norm();
    println!("omega {:.3}", fit.omega.as_vector().transpose());
    println!("cosine to the population direction: {:.4}", fit.omega.as_vector().dot(&truth));
    println!("asymptotic covariance of omega (n = {}):{:.5}", fit.n_total, fit.sigma_omega);

    let test: Vec<_> = sample_task(&task, 5_000, RngStream::new(2, 0))
        .into_iter()
        .map(|s| (transform.apply(&((s.x + &offset) * 2.5)), s.y))
        .collect();
    let preds = test.iter().map(|(x, _)| predict(&fit.omega, x)).collect::<Result<Vec<_>, _>>()?;
    let truth_labels: Vec<_> = test.iter().map(|(_, y)| *y).collect();
    println!("held-out balanced accuracy: {:.4}", balanced_accuracy(&preds, &truth_labels)?);
    Ok(())
}
