//! Samplers for the three distributions the method relies on: the symmetric
//! two-Gaussian task model, the multivariate normal, and the von Mises-Fisher
//! distribution on the unit sphere.

use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, check_len, check_square, symmetrize, Matrix, Vector};
use crate::rng::RngStream;

const SYMMETRY_TOL: f64 = 1e-10;
const NEGATIVE_EIGEN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Zero,
    One,
}

impl Label {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Label::Zero),
            1 => Some(Label::One),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Zero => 0,
            Label::One => 1,
        }
    }

    /// `+1` for class one, `-1` for class zero.
    pub fn sign(self) -> f64 {
        match self {
            Label::Zero => -1.0,
            Label::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub x: Vector,
    pub y: Label,
}

impl LabeledSample {
    pub fn new(x: Vector, y: Label) -> Self {
        Self { x, y }
    }
}

/// One binary task: class one ~ N(nu, sigma), class zero ~ N(-nu, sigma),
/// `P(y = 1) = pi`.
#[derive(Debug, Clone)]
pub struct TaskDistribution {
    nu: Vector,
    sigma: Matrix,
    pi: f64,
    factor: Matrix,
}

impl TaskDistribution {
    pub fn new(nu: Vector, sigma: Matrix, pi: f64) -> Result<Self> {
        let d = nu.len();
        check_square(&sigma, d)?;
        let asym = asymmetry(&sigma);
        if asym > SYMMETRY_TOL {
            return Err(Error::NonSymmetric(asym));
        }
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::invalid(format!("class prior must be in (0, 1), got {pi}")));
        }
        let chol = symmetrize(&sigma)
            .cholesky()
            .ok_or_else(|| Error::IndefiniteCovariance(crate::linalg::min_eigenvalue(&sigma)))?;
        Ok(Self {
            factor: chol.l(),
            nu,
            sigma,
            pi,
        })
    }

    /// Identity covariance, balanced classes.
    pub fn isotropic(nu: Vector) -> Self {
        let d = nu.len();
        Self {
            factor: Matrix::identity(d, d),
            sigma: Matrix::identity(d, d),
            nu,
            pi: 0.5,
        }
    }

    pub fn dim(&self) -> usize {
        self.nu.len()
    }

    pub fn nu(&self) -> &Vector {
        &self.nu
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn class_mean(&self, y: Label) -> Vector {
        &self.nu * y.sign()
    }

    /// Draws one sample into `x` without allocating and returns its label.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut Vector, x: &mut Vector) -> Label {
        let y = if rng.random::<f64>() < self.pi {
            Label::One
        } else {
            Label::Zero
        };
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let s = y.sign();
        let d = self.dim();
        for i in 0..d {
            let mut acc = s * self.nu[i];
            for j in 0..=i {
                acc += self.factor[(i, j)] * z[j];
            }
            x[i] = acc;
        }
        y
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> LabeledSample {
        let d = self.dim();
        let mut z = Vector::zeros(d);
        let mut x = Vector::zeros(d);
        let y = self.draw_into(rng, &mut z, &mut x);
        LabeledSample { x, y }
    }
}

/// Draws `n` labeled samples in order: label first, then the feature vector.
pub fn sample_task(dist: &TaskDistribution, n: usize, stream: RngStream) -> Vec<LabeledSample> {
    let mut rng = stream.rng();
    let d = dist.dim();
    let mut z = Vector::zeros(d);
    (0..n)
        .map(|_| {
            let mut x = Vector::zeros(d);
            let y = dist.draw_into(&mut rng, &mut z, &mut x);
            LabeledSample { x, y }
        })
        .collect()
}

/// A multivariate normal with a precomputed square-root factor.
///
/// Positive definite covariances use Cholesky; semidefinite ones fall back to
/// an eigendecomposition with small negative eigenvalues clamped to zero.
#[derive(Debug, Clone)]
pub struct MvnSampler {
    mean: Vector,
    factor: Matrix,
}

impl MvnSampler {
    pub fn new(mean: Vector, cov: &Matrix) -> Result<Self> {
        let d = mean.len();
        check_square(cov, d)?;
        let scale = cov.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let asym = asymmetry(cov);
        if asym > SYMMETRY_TOL * scale || asym.is_nan() {
            return Err(Error::NonSymmetric(asym));
        }
        let cov = symmetrize(cov);
        if let Some(chol) = cov.clone().cholesky() {
            return Ok(Self {
                mean,
                factor: chol.l(),
            });
        }
        let eig = SymmetricEigen::new(cov);
        let min = eig.eigenvalues.min();
        if min < -NEGATIVE_EIGEN_TOL {
            return Err(Error::IndefiniteCovariance(min));
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let factor = eig.eigenvectors * Matrix::from_diagonal(&roots);
        Ok(Self { mean, factor })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let d = self.dim();
        let z = Vector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        &self.mean + &self.factor * z
    }
}

/// One draw from N(mean, cov).
pub fn sample_mvn(mean: &Vector, cov: &Matrix, stream: RngStream) -> Result<Vector> {
    let sampler = MvnSampler::new(mean.clone(), cov)?;
    Ok(sampler.sample(&mut stream.rng()))
}

/// Mean direction and concentration of a von Mises-Fisher distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfModel {
    mu: Vector,
    kappa: f64,
}

impl VmfModel {
    pub fn new(mu: Vector, kappa: f64) -> Result<Self> {
        let norm = mu.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnitVector(norm));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::invalid(format!("kappa must be finite and >= 0, got {kappa}")));
        }
        Ok(Self { mu, kappa })
    }

    /// Mean direction `e_1` in `d` dimensions.
    pub fn north(d: usize, kappa: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::DimensionTooSmall(d));
        }
        let mut mu = Vector::zeros(d);
        mu[0] = 1.0;
        Self::new(mu, kappa)
    }

    pub fn mu(&self) -> &Vector {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Draws `count` unit vectors from V(mu, kappa) with Wood's rejection scheme.
pub fn sample_vmf(model: &VmfModel, count: usize, stream: RngStream) -> Result<Vec<Vector>> {
    let d = model.dim();
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let mut rng = stream.rng();
    if model.kappa == 0.0 {
        return Ok((0..count).map(|_| uniform_sphere(&mut rng, d)).collect());
    }
    let sampler = WoodSampler::new(model);
    Ok((0..count).map(|_| sampler.sample(&mut rng)).collect())
}

fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vector {
    loop {
        let v = Vector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let n = v.norm();
        if n > 1e-300 {
            return v / n;
        }
    }
}

struct WoodSampler {
    kappa: f64,
    dm1: f64,
    b: f64,
    x0: f64,
    c: f64,
    beta: Beta<f64>,
    /// Householder direction mapping e_1 onto mu; `None` when mu == e_1.
    reflector: Option<Vector>,
}

impl WoodSampler {
    fn new(model: &VmfModel) -> Self {
        let d = model.dim();
        let kappa = model.kappa;
        let dm1 = (d - 1) as f64;
        // b = (-2k + sqrt(4k^2 + (d-1)^2)) / (d-1), rearranged to avoid cancellation.
        let b = dm1 / (2.0 * kappa + (4.0 * kappa * kappa + dm1 * dm1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let one_minus_x0_sq = 4.0 * b / ((1.0 + b) * (1.0 + b));
        let c = kappa * x0 + dm1 * one_minus_x0_sq.ln();
        let beta = Beta::new(dm1 / 2.0, dm1 / 2.0).expect("positive shape parameters");

        let mut u = -model.mu.clone();
        u[0] += 1.0;
        let reflector = if u.norm() < 1e-12 { None } else { Some(&u / u.norm()) };
        Self {
            kappa,
            dm1,
            b,
            x0,
            c,
            beta,
            reflector,
        }
    }

    fn sample_cosine<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let z = self.beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = rng.random();
            let lhs = self.kappa * w + self.dm1 * (1.0 - self.x0 * w).ln() - self.c;
            if lhs >= u.ln() {
                return w;
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let d = self.dm1 as usize + 1;
        let w = self.sample_cosine(rng);
        let tangent = uniform_sphere(rng, d - 1);
        let r = (1.0 - w * w).max(0.0).sqrt();
        let mut x = Vector::zeros(d);
        x[0] = w;
        for i in 1..d {
            x[i] = r * tangent[i - 1];
        }
        if let Some(u) = &self.reflector {
            let proj = 2.0 * u.dot(&x);
            x.axpy(-proj, u, 1.0);
        }
        let n = x.norm();
        x / n
    }
}

/// Unit-normalizes `v`, failing on (numerically) zero input.
pub fn normalize(v: &Vector) -> Result<Vector> {
    let n = v.norm();
    if !(n >= 1e-12) || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v / n)
}

/// Checks dimensions of every vector against `d`.
pub(crate) fn check_all_len<'a>(vs: impl IntoIterator<Item = &'a Vector>, d: usize) -> Result<()> {
    vs.into_iter().try_for_each(|v| check_len(v, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(d: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(d);
        v[i] = 1.0;
        v
    }

    #[test]
    fn task_draws_are_deterministic() {
        let dist = TaskDistribution::isotropic(e(3, 0));
        let a = sample_task(&dist, 50, RngStream::new(11, 2));
        let b = sample_task(&dist, 50, RngStream::new(11, 2));
        assert_eq!(a, b);
        let c = sample_task(&dist, 50, RngStream::new(11, 3));
        assert_ne!(a, c);
    }

    #[test]
    fn task_rejects_bad_prior_and_covariance() {
        let nu = e(2, 0);
        assert!(TaskDistribution::new(nu.clone(), Matrix::identity(2, 2), 1.0).is_err());
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            TaskDistribution::new(nu.clone(), asym, 0.5),
            Err(Error::NonSymmetric(_))
        ));
        let indef = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            TaskDistribution::new(nu, indef, 0.5),
            Err(Error::IndefiniteCovariance(_))
        ));
    }

    #[test]
    fn zero_mean_task_means_vanish() {
        let dist = TaskDistribution::isotropic(Vector::zeros(2));
        let draws = sample_task(&dist, 100_000, RngStream::new(5, 0));
        for label in [Label::Zero, Label::One] {
            let xs: Vec<&Vector> = draws.iter().filter(|s| s.y == label).map(|s| &s.x).collect();
            let mean = xs.iter().fold(Vector::zeros(2), |acc, x| acc + *x) / xs.len() as f64;
            // 4 standard errors at ~5e4 draws per class
            assert!(mean.amax() < 4.0 / (xs.len() as f64).sqrt(), "{mean}");
        }
    }

    #[test]
    fn zero_covariance_returns_mean() {
        let mean = Vector::from_vec(vec![0.3, -1.25, 7.0]);
        let out = sample_mvn(&mean, &Matrix::zeros(3, 3), RngStream::new(1, 1)).unwrap();
        assert_eq!(out, mean);
    }

    #[test]
    fn mvn_rejects_asymmetric_and_indefinite() {
        let mean = Vector::zeros(2);
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 1e-3, 0.0, 1.0]);
        assert!(matches!(
            MvnSampler::new(mean.clone(), &asym),
            Err(Error::NonSymmetric(_))
        ));
        let indef = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-3]);
        assert!(matches!(
            MvnSampler::new(mean.clone(), &indef),
            Err(Error::IndefiniteCovariance(_))
        ));
        // Tiny negative eigenvalues are clamped.
        let nearly = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-11]);
        let s = MvnSampler::new(mean, &nearly).unwrap();
        let x = s.sample(&mut RngStream::new(0, 0).rng());
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn mvn_marginal_scales() {
        let cov = Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 1.0]));
        let s = MvnSampler::new(Vector::zeros(2), &cov).unwrap();
        let mut rng = RngStream::new(3, 9).rng();
        let n = 100_000;
        let mut ss = [0.0; 2];
        for _ in 0..n {
            let x = s.sample(&mut rng);
            ss[0] += x[0] * x[0];
            ss[1] += x[1] * x[1];
        }
        let sd0 = (ss[0] / n as f64).sqrt();
        let sd1 = (ss[1] / n as f64).sqrt();
        assert!((sd0 / 2.0 - 1.0).abs() < 0.02, "{sd0}");
        assert!((sd1 - 1.0).abs() < 0.02, "{sd1}");
    }

    #[test]
    fn vmf_samples_are_unit_and_concentrated() {
        let mu = Vector::from_vec(vec![0.0, 0.6, -0.8, 0.0]);
        let model = VmfModel::new(mu.clone(), 1e6).unwrap();
        let draws = sample_vmf(&model, 2000, RngStream::new(2, 2)).unwrap();
        for w in &draws {
            assert!((w.norm() - 1.0).abs() < 1e-10);
            assert!(w.dot(&mu) > 0.99);
        }
    }

    #[test]
    fn vmf_two_dimensional_and_errors() {
        let model = VmfModel::north(2, 3.0).unwrap();
        let draws = sample_vmf(&model, 100, RngStream::new(0, 0)).unwrap();
        assert!(draws.iter().all(|w| (w.norm() - 1.0).abs() < 1e-10));
        let flat = VmfModel::new(Vector::from_vec(vec![1.0]), 1.0).unwrap();
        assert!(matches!(
            sample_vmf(&flat, 1, RngStream::new(0, 0)),
            Err(Error::DimensionTooSmall(1))
        ));
        assert!(VmfModel::new(Vector::from_vec(vec![1.0, 1.0]), 1.0).is_err());
        assert!(VmfModel::north(3, -1.0).is_err());
    }

    #[test]
    fn uniform_sphere_has_small_resultant() {
        let model = VmfModel::north(5, 0.0).unwrap();
        let draws = sample_vmf(&model, 100_000, RngStream::new(8, 1)).unwrap();
        let mean = draws.iter().fold(Vector::zeros(5), |a, w| a + w) / draws.len() as f64;
        assert!(mean.norm() < 0.02, "{}", mean.norm());
    }
}
