//! Small deterministic sampling helpers shared by the norm estimator and
//! the diagnostics sample clouds.

use nalgebra::DVector;
use rand_core::RngCore;

/// Uniform draw from `[0, 1)`.
pub fn unit_interval(rng: &mut impl RngCore) -> f64 {
    // 53 mantissa bits of a u64
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw from `[-1, 1)`.
pub fn uniform_symmetric(rng: &mut impl RngCore) -> f64 {
    2.0 * unit_interval(rng) - 1.0
}

/// Standard normal draw via Box-Muller.
pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    let u1 = 1.0 - unit_interval(rng); // (0, 1]
    let u2 = unit_interval(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniform draw from the closed ball of the given radius.
pub fn ball_point(rng: &mut impl RngCore, dim: usize, radius: f64) -> DVector<f64> {
    let direction = DVector::from_fn(dim, |_, _| standard_normal(rng));
    let norm = direction.norm();
    if norm == 0.0 {
        return DVector::zeros(dim);
    }
    let r = radius * unit_interval(rng).powf(1.0 / dim as f64);
    direction * (r / norm)
}
