use std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF, `0.5 * erfc(-x / sqrt(2))`.
///
/// Going through `erfc` keeps full relative precision in the lower tail,
/// which is where classification risks live.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}
