//! Convex combinations of the target direction and the average-source
//! direction, their risk, and selection of the mixing coefficient.
//!
//! A classifier in the family predicts `1{ w_alpha^T x > 0 }` with
//! `w_alpha = alpha * omega_target + (1 - alpha) * mu_hat`. Its 0-1 risk on a
//! symmetric Gaussian task `(nu, Sigma)` is
//! `Phi(-w^T nu / sqrt(w^T Sigma w))`. Because `omega_target` and `mu_hat` are
//! themselves estimates, [`expected_risk_mc`] averages that risk over the
//! approximate sampling distribution
//! `N(w_alpha, alpha^2 Sigma_omega + (1 - alpha)^2 Psi)` and
//! [`optimal_alpha`] picks the grid point with the smallest average.

use crate::error::{Error, Result};
use crate::fld::{decide, FldFit};
use crate::linalg::{check_len, check_square, quad_form, Matrix, Vector};
use crate::metrics::balanced_accuracy;
use crate::rng::RngStream;
use crate::sampling::{check_all_len, LabeledSample, MvnSampler};
use crate::special::std_normal_cdf;

const MAX_REDRAWS: usize = 100;

/// Everything the selection step needs to know about the source tasks.
///
/// This is also the privacy aggregate: the mean direction and its spread are
/// sufficient, individual source vectors are not required.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSummary {
    mu_hat: Vector,
    psi_scale: f64,
    j_count: usize,
    resultant_length: f64,
}

impl SourceSummary {
    pub fn new(mu_hat: Vector, psi_scale: f64, j_count: usize, resultant_length: f64) -> Result<Self> {
        let n = mu_hat.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnitVector(n));
        }
        if !(psi_scale >= 0.0) || !psi_scale.is_finite() {
            return Err(Error::invalid(format!("psi scale must be finite and >= 0, got {psi_scale}")));
        }
        if j_count == 0 {
            return Err(Error::EmptySources);
        }
        if !(0.0..=1.0 + 1e-12).contains(&resultant_length) {
            return Err(Error::invalid(format!(
                "resultant length must be in [0, 1], got {resultant_length}"
            )));
        }
        Ok(Self {
            mu_hat,
            psi_scale,
            j_count,
            resultant_length,
        })
    }

    pub fn mu_hat(&self) -> &Vector {
        &self.mu_hat
    }

    /// Scalar `s` with `Psi = s * I`.
    pub fn psi_scale(&self) -> f64 {
        self.psi_scale
    }

    pub fn psi(&self) -> Matrix {
        Matrix::identity(self.dim(), self.dim()) * self.psi_scale
    }

    pub fn j_count(&self) -> usize {
        self.j_count
    }

    pub fn resultant_length(&self) -> f64 {
        self.resultant_length
    }

    pub fn dim(&self) -> usize {
        self.mu_hat.len()
    }
}

/// Mean direction of the source vectors and the spread of that estimate.
///
/// `Psi = sqrt((1 - mean_j (mu_hat^T w_j)^2) / (J * R)) * I`, with `R` the
/// mean resultant length and `mu_hat` standing in for the unknown mean
/// direction.
pub fn summarize_sources(omegas: &[Vector]) -> Result<SourceSummary> {
    let first = omegas.first().ok_or(Error::EmptySources)?;
    let d = first.len();
    check_all_len(omegas, d)?;
    for w in omegas {
        let n = w.norm();
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::NotUnitVector(n));
        }
    }
    let j = omegas.len();
    let mean = omegas.iter().fold(Vector::zeros(d), |acc, w| acc + w) / j as f64;
    let resultant = mean.norm();
    if !(resultant > 1e-12) {
        return Err(Error::ZeroResultant);
    }
    let mu_hat = &mean / resultant;
    let mean_sq_cos = omegas.iter().map(|w| mu_hat.dot(w).powi(2)).sum::<f64>() / j as f64;
    let numer = (1.0 - mean_sq_cos).max(0.0);
    let psi_scale = (numer / (j as f64 * resultant)).sqrt();
    Ok(SourceSummary {
        mu_hat,
        psi_scale,
        j_count: j,
        resultant_length: resultant.min(1.0),
    })
}

/// Maps a coefficient on the plain sum of source vectors to the equivalent
/// coefficient on the normalized mean direction.
pub fn reparameterize_alpha(alpha: f64, j_count: usize, resultant_length: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let denom = alpha + j_count as f64 * (1.0 - alpha) * resultant_length;
    if !(denom > 0.0) {
        return Err(Error::invalid("reparameterization denominator is not positive"));
    }
    Ok(alpha / denom)
}

/// `alpha * omega_target + (1 - alpha) * mu_hat`, not renormalized.
pub fn combine(alpha: f64, omega_target: &Vector, mu_hat: &Vector) -> Result<Vector> {
    check_len(mu_hat, omega_target.len())?;
    Ok(omega_target * alpha + mu_hat * (1.0 - alpha))
}

/// Exact 0-1 risk of `1{ omega^T x > 0 }` on the balanced task `(nu, sigma)`.
pub fn closed_form_risk(omega: &Vector, nu: &Vector, sigma: &Matrix) -> Result<f64> {
    let d = omega.len();
    check_len(nu, d)?;
    check_square(sigma, d)?;
    if !(omega.norm() >= 1e-12) {
        return Err(Error::ZeroVector);
    }
    Ok(risk_unchecked(omega, nu, sigma))
}

#[inline]
fn risk_unchecked(omega: &Vector, nu: &Vector, sigma: &Matrix) -> f64 {
    let spread = quad_form(sigma, omega).sqrt();
    std_normal_cdf(-omega.dot(nu) / spread)
}

/// Candidate mixing coefficients, strictly increasing within `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid(Vec<f64>);

impl AlphaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("alpha grid is empty"));
        }
        if values.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::invalid("alpha grid values must lie in [0, 1]"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("alpha grid must be strictly increasing"));
        }
        Ok(Self(values))
    }

    /// `{0, 1/steps, ..., 1}`
    pub fn uniform(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("grid needs at least one step"));
        }
        Self::new((0..=steps).map(|i| i as f64 / steps as f64).collect())
    }

    /// Grid with spacing `step`, which must divide 1 evenly.
    pub fn with_step(step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::invalid(format!("grid step must be in (0, 1], got {step}")));
        }
        let steps = (1.0 / step).round();
        if ((steps * step) - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("grid step {step} does not divide 1")));
        }
        Self::uniform(steps as usize)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self::uniform(10).expect("valid default grid")
    }
}

/// Estimated expected risk at every grid point and the selected coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurve {
    pub alphas: AlphaGrid,
    pub risks: Vec<f64>,
    pub alpha_star: f64,
    pub b_samples: usize,
}

impl RiskCurve {
    pub fn min_risk(&self) -> f64 {
        self.risks.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn risk_at(&self, alpha: f64) -> Option<f64> {
        self.alphas
            .values()
            .iter()
            .position(|&a| a == alpha)
            .map(|i| self.risks[i])
    }
}

/// Sub-stream for one coefficient. Keyed by the value rather than its grid
/// position so that the same `alpha` sees the same draws in any grid.
pub fn alpha_stream(stream: RngStream, alpha: f64) -> RngStream {
    stream.derive(alpha.to_bits())
}

/// Covariance of the combined direction,
/// `alpha^2 * sigma_omega + (1 - alpha)^2 * psi_scale * I`.
pub fn combined_covariance(alpha: f64, sigma_omega: &Matrix, psi_scale: f64) -> Matrix {
    let d = sigma_omega.nrows();
    let mut cov = sigma_omega * (alpha * alpha);
    let w = (1.0 - alpha) * (1.0 - alpha) * psi_scale;
    for i in 0..d {
        cov[(i, i)] += w;
    }
    cov
}

/// Monte-Carlo estimate of the expected risk of the `alpha` classifier, using
/// the fit's `nu_hat` / `sigma_hat` as the target task.
pub fn expected_risk_mc(
    alpha: f64,
    fit: &FldFit,
    sources: &SourceSummary,
    b_samples: usize,
    stream: RngStream,
) -> Result<f64> {
    expected_risk_against(alpha, fit, sources, &fit.nu_hat, &fit.sigma_hat, b_samples, stream)
}

/// As [`expected_risk_mc`], but scoring each draw against an arbitrary task
/// `(nu, sigma)`. With the same stream the draws are identical, so two calls
/// differ only in the task they are scored on.
pub fn expected_risk_against(
    alpha: f64,
    fit: &FldFit,
    sources: &SourceSummary,
    nu: &Vector,
    sigma: &Matrix,
    b_samples: usize,
    stream: RngStream,
) -> Result<f64> {
    if b_samples == 0 {
        return Err(Error::invalid("number of Monte-Carlo samples must be positive"));
    }
    let d = fit.dim();
    check_len(sources.mu_hat(), d)?;
    check_len(nu, d)?;
    check_square(sigma, d)?;
    let mean = combine(alpha, fit.omega.as_vector(), sources.mu_hat())?;
    let cov = combined_covariance(alpha, &fit.sigma_omega, sources.psi_scale());
    let sampler = MvnSampler::new(mean, &cov)?;
    let mut rng = stream.rng();
    let mut total = 0.0;
    for _ in 0..b_samples {
        let mut attempts = 0;
        let draw = loop {
            let w = sampler.sample(&mut rng);
            if w.norm() >= 1e-12 {
                break w;
            }
            attempts += 1;
            if attempts >= MAX_REDRAWS {
                return Err(Error::DegenerateDraw(attempts));
            }
        };
        total += risk_unchecked(&draw, nu, sigma);
    }
    Ok((total / b_samples as f64).clamp(0.0, 1.0))
}

/// Evaluates the expected risk on every grid point and returns the minimizer,
/// preferring the smallest coefficient on ties.
pub fn optimal_alpha(
    fit: &FldFit,
    sources: &SourceSummary,
    grid: &AlphaGrid,
    b_samples: usize,
    stream: RngStream,
) -> Result<RiskCurve> {
    risk_curve_against(fit, sources, &fit.nu_hat, &fit.sigma_hat, grid, b_samples, stream)
}

pub fn risk_curve_against(
    fit: &FldFit,
    sources: &SourceSummary,
    nu: &Vector,
    sigma: &Matrix,
    grid: &AlphaGrid,
    b_samples: usize,
    stream: RngStream,
) -> Result<RiskCurve> {
    let risks = grid
        .values()
        .iter()
        .map(|&a| {
            expected_risk_against(a, fit, sources, nu, sigma, b_samples, alpha_stream(stream, a))
        })
        .collect::<Result<Vec<_>>>()?;
    let alpha_star = grid.values()[argmin_first(&risks)];
    Ok(RiskCurve {
        alphas: grid.clone(),
        risks,
        alpha_star,
        b_samples,
    })
}

fn argmin_first(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x < xs[best] {
            best = i;
        }
    }
    best
}

/// The grid coefficient with the best balanced accuracy on held-out data.
///
/// Not available at deployment time; it bounds what any selection rule over
/// the grid could achieve on `test`.
pub fn oracle_alpha(
    omega_target: &Vector,
    mu_hat: &Vector,
    grid: &AlphaGrid,
    test: &[LabeledSample],
) -> Result<(f64, f64)> {
    let truth: Vec<_> = test.iter().map(|s| s.y).collect();
    let mut best: Option<(f64, f64)> = None;
    for &a in grid.values() {
        let w = combine(a, omega_target, mu_hat)?;
        let preds: Vec<_> = test.iter().map(|s| decide(&w, &s.x)).collect();
        let acc = balanced_accuracy(&preds, &truth)?;
        if best.is_none_or(|(_, b)| acc > b) {
            best = Some((a, acc));
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Balanced accuracy of the `alpha` classifier on `test`.
pub fn combined_accuracy(
    alpha: f64,
    omega_target: &Vector,
    mu_hat: &Vector,
    test: &[LabeledSample],
) -> Result<f64> {
    let w = combine(alpha, omega_target, mu_hat)?;
    let preds: Vec<_> = test.iter().map(|s| decide(&w, &s.x)).collect();
    let truth: Vec<_> = test.iter().map(|s| s.y).collect();
    balanced_accuracy(&preds, &truth)
}
