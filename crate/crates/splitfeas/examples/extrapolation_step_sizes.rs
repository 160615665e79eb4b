//! The step sizes behind the extrapolated Landweber operator:
//! `σ(x) = ‖TAx − Ax‖²/‖A*(TAx − Ax)‖²` stays above `‖A‖⁻²` and
//! `τ(x) = ‖A‖²σ(x)` stays above 1 wherever a step is taken — so the
//! extrapolation always moves at least as far as the plain operator while
//! never evaluating `‖A‖`.
//!
//! ```bash
//! cargo run -p splitfeas --example extrapolation_step_sizes
//! ```

use splitfeas::{sigma_step, tau_step, ConvexSet, LinearMap, SampleCloud};

fn main() {
    let a = LinearMap::from_rows(&[
        vec![3.0, 0.5, -1.0, 2.0],
        vec![0.0, 1.0, 1.0, -0.5],
        vec![2.0, -1.0, 0.0, 1.0],
    ])
    .unwrap();
    let q = ConvexSet::orthant_leq(nalgebra::DVector::from_vec(vec![0.5, -0.5, 1.0])).unwrap();
    let t = q.operator();

    let norm = a.norm_estimate().unwrap();
    let floor = 1.0 / (norm * norm);
    println!("operator norm estimate {norm:.6}, so sigma floor = 1/|A|^2 = {floor:.6}\n");

    let mut min_tau = f64::INFINITY;
    let mut max_tau = 0.0_f64;
    let mut moved = 0usize;
    for x in SampleCloud::standard(4).points() {
        let sigma = sigma_step(&a, &t, &x, 1e-12).unwrap();
        let tau = tau_step(&a, &t, &x, 1e-12).unwrap();
        if tau > 1.0 {
            moved += 1;
        }
        min_tau = min_tau.min(tau);
        max_tau = max_tau.max(tau);
        assert!(sigma >= floor - 1e-9);
        assert!(tau >= 1.0 - 1e-9);
    }
    println!("over 1000 sampled points: tau in [{min_tau:.6}, {max_tau:.6}], {moved} genuine extrapolation steps");
    println!("every step size respected sigma >= 1/|A|^2 and tau >= 1");
}
