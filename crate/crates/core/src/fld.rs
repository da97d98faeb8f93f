//! Fisher's linear discriminant under the symmetric, shared-covariance,
//! balanced-class model: the decision rule is `1{ omega^T x > 0 }` with
//! `omega = 0.5 * inv(Sigma) * (nu_1 - nu_0)`.

use crate::error::{Error, Result};
use crate::linalg::{check_len, check_square, spd_inverse, symmetrize, Matrix, Vector};
use crate::sampling::{check_all_len, normalize, Label, LabeledSample};

/// A unit-norm discriminant direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionVector(Vector);

impl ProjectionVector {
    /// Normalizes `v`; fails on zero input.
    pub fn new(v: &Vector) -> Result<Self> {
        normalize(v).map(Self)
    }

    /// Wraps a vector that is already unit norm (within 1e-10).
    pub fn from_unit(v: Vector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnitVector(n));
        }
        Ok(Self(v))
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn into_inner(self) -> Vector {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Which closed form to use for the asymptotic covariance of the estimated
/// projection vector `inv(Sigma_hat) * nu_hat`.
///
/// With `P = inv(Sigma)` and `c = nu^T P nu`:
///
/// * `Published`: `(1 + c) P - P nu nu^T P`
/// * `DeltaMethod`: `(1 + c) P + P nu nu^T P`
///
/// The second is what a first-order expansion of the inverse Wishart gives
/// (`tau` contributes `P`, the covariance estimate contributes
/// `c P + P nu nu^T P`), and it is the one that matches simulated fits. The
/// first is kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceModel {
    Published,
    #[default]
    DeltaMethod,
}

impl CovarianceModel {
    pub fn name(self) -> &'static str {
        match self {
            CovarianceModel::Published => "published",
            CovarianceModel::DeltaMethod => "delta-method",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "published" => Some(CovarianceModel::Published),
            "delta-method" => Some(CovarianceModel::DeltaMethod),
            _ => None,
        }
    }
}

/// Per-class sample statistics with a pooled covariance.
#[derive(Debug, Clone)]
pub struct ClassStats {
    pub nu0: Vector,
    pub nu1: Vector,
    pub sigma_pooled: Matrix,
    pub pi_hat: f64,
    pub n0: usize,
    pub n1: usize,
}

impl ClassStats {
    pub fn n_total(&self) -> usize {
        self.n0 + self.n1
    }

    /// Half the difference of class means; equals `nu1` once the midpoint is
    /// at the origin.
    pub fn half_difference(&self) -> Vector {
        (&self.nu1 - &self.nu0) * 0.5
    }

    pub fn midpoint(&self) -> Vector {
        (&self.nu0 + &self.nu1) * 0.5
    }
}

fn class_means(samples: &[LabeledSample]) -> Result<(Vector, Vector, usize, usize)> {
    let d = samples.first().ok_or(Error::MissingClass(0))?.x.len();
    check_all_len(samples.iter().map(|s| &s.x), d)?;
    let mut sums = [Vector::zeros(d), Vector::zeros(d)];
    let mut counts = [0usize; 2];
    for s in samples {
        let k = s.y.as_u8() as usize;
        sums[k] += &s.x;
        counts[k] += 1;
    }
    for k in 0..2 {
        if counts[k] == 0 {
            return Err(Error::MissingClass(k as u8));
        }
    }
    let [s0, s1] = sums;
    Ok((s0 / counts[0] as f64, s1 / counts[1] as f64, counts[0], counts[1]))
}

/// Class means, ridge-regularized pooled covariance and class-one fraction.
///
/// The ridge is `1e-6 * trace / d`, enough to keep the inverse defined when
/// there are fewer samples than dimensions.
pub fn estimate_class_stats(samples: &[LabeledSample]) -> Result<ClassStats> {
    let (nu0, nu1, n0, n1) = class_means(samples)?;
    for (class, count) in [(0u8, n0), (1u8, n1)] {
        if count < 2 {
            return Err(Error::TooFewSamples {
                class,
                count,
                needed: 2,
            });
        }
    }
    let d = nu0.len();
    let mut scatter = Matrix::zeros(d, d);
    for s in samples {
        let m = if s.y == Label::One { &nu1 } else { &nu0 };
        let r = &s.x - m;
        scatter.ger(1.0, &r, &r, 1.0);
    }
    let mut sigma = symmetrize(&(scatter / (n0 + n1 - 2) as f64));
    let ridge = 1e-6 * sigma.trace() / d as f64;
    for i in 0..d {
        sigma[(i, i)] += ridge;
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateCovariance);
    }
    Ok(ClassStats {
        nu0,
        nu1,
        sigma_pooled: sigma,
        pi_hat: n1 as f64 / (n0 + n1) as f64,
        n0,
        n1,
    })
}

/// Affine map `x -> scale * (x + shift)` that puts the class-mean midpoint at
/// the origin and makes `|| inv(Sigma_hat) nu_hat || = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionTransform {
    pub shift: Vector,
    pub scale: f64,
}

impl AssumptionTransform {
    pub fn identity(d: usize) -> Self {
        Self {
            shift: Vector::zeros(d),
            scale: 1.0,
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        (x + &self.shift) * self.scale
    }

    pub fn apply_all(&self, samples: &[LabeledSample]) -> Vec<LabeledSample> {
        samples
            .iter()
            .map(|s| LabeledSample::new(self.apply(&s.x), s.y))
            .collect()
    }
}

pub fn fit_assumption_transform(samples: &[LabeledSample]) -> Result<AssumptionTransform> {
    let stats = estimate_class_stats(samples)?;
    // Translation leaves both the half-difference and the pooled covariance unchanged.
    let inv = spd_inverse(&stats.sigma_pooled)?;
    let signal = (&inv * stats.half_difference()).norm();
    if !(signal >= 1e-12) || !signal.is_finite() {
        return Err(Error::ZeroSignal(signal));
    }
    Ok(AssumptionTransform {
        shift: -stats.midpoint(),
        scale: signal,
    })
}

/// A fitted target discriminant plus the statistics the expected-risk
/// estimate needs from it.
#[derive(Debug, Clone)]
pub struct FldFit {
    /// `0.5 * inv(Sigma_hat) (nu1_hat - nu0_hat)`
    pub omega_raw: Vector,
    pub omega: ProjectionVector,
    /// Class-one mean used in the risk formula.
    pub nu_hat: Vector,
    pub sigma_hat: Matrix,
    pub n_total: usize,
    /// Asymptotic covariance of the projection-vector estimate.
    pub sigma_omega: Matrix,
}

impl FldFit {
    pub fn from_stats(stats: &ClassStats, model: CovarianceModel) -> Result<Self> {
        let inv = spd_inverse(&stats.sigma_pooled)?;
        let nu_hat = stats.half_difference();
        let omega_raw = &inv * &nu_hat;
        let omega = ProjectionVector::new(&omega_raw)?;
        let sigma_omega =
            projection_covariance_with(&nu_hat, &stats.sigma_pooled, stats.n_total(), model)?;
        Ok(Self {
            omega_raw,
            omega,
            nu_hat,
            sigma_hat: stats.sigma_pooled.clone(),
            n_total: stats.n_total(),
            sigma_omega,
        })
    }

    /// Projection vector estimated from class means only, with `sigma` and
    /// `nu` taken as known population values everywhere else.
    pub fn with_known_parameters(
        samples: &[LabeledSample],
        nu: &Vector,
        sigma: &Matrix,
        model: CovarianceModel,
    ) -> Result<Self> {
        let (nu0, nu1, n0, n1) = class_means(samples)?;
        let d = nu0.len();
        check_len(nu, d)?;
        check_square(sigma, d)?;
        let inv = spd_inverse(sigma)?;
        let omega_raw = &inv * ((nu1 - nu0) * 0.5);
        let omega = ProjectionVector::new(&omega_raw)?;
        let n_total = n0 + n1;
        let sigma_omega = projection_covariance_with(nu, sigma, n_total, model)?;
        Ok(Self {
            omega_raw,
            omega,
            nu_hat: nu.clone(),
            sigma_hat: sigma.clone(),
            n_total,
            sigma_omega,
        })
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }
}

/// Fits the discriminant on data already passed through
/// [`fit_assumption_transform`].
pub fn fit_fld(samples: &[LabeledSample]) -> Result<FldFit> {
    fit_fld_with(samples, CovarianceModel::default())
}

pub fn fit_fld_with(samples: &[LabeledSample], model: CovarianceModel) -> Result<FldFit> {
    FldFit::from_stats(&estimate_class_stats(samples)?, model)
}

/// Asymptotic covariance of the projection-vector estimate from `n` samples,
/// using the default [`CovarianceModel`].
pub fn projection_covariance(nu: &Vector, sigma: &Matrix, n: usize) -> Result<Matrix> {
    projection_covariance_with(nu, sigma, n, CovarianceModel::default())
}

pub fn projection_covariance_with(
    nu: &Vector,
    sigma: &Matrix,
    n: usize,
    model: CovarianceModel,
) -> Result<Matrix> {
    let d = nu.len();
    check_square(sigma, d)?;
    if n == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let p = spd_inverse(sigma)?;
    let p_nu = &p * nu;
    let c = nu.dot(&p_nu);
    let outer = &p_nu * p_nu.transpose();
    let tilde = match model {
        CovarianceModel::Published => &p * (1.0 + c) - outer,
        CovarianceModel::DeltaMethod => &p * (1.0 + c) + outer,
    };
    Ok(symmetrize(&(tilde / n as f64)))
}

/// `1` when `w^T x > 0`, otherwise `0`. `w` need not be normalized.
pub fn decide(w: &Vector, x: &Vector) -> Label {
    if w.dot(x) > 0.0 {
        Label::One
    } else {
        Label::Zero
    }
}

pub fn predict(omega: &ProjectionVector, x: &Vector) -> Result<Label> {
    check_len(x, omega.dim())?;
    Ok(decide(omega.as_vector(), x))
}
