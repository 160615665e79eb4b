//! A split problem whose right-hand set is the zero-sublevel set of a
//! max-affine convex function, handled by the relaxed subgradient projection
//! `P_{f,λ}` instead of an exact metric projection.
//!
//! ```bash
//! cargo run -p splitfeas --example sublevel_feasibility
//! ```

use nalgebra::DVector;
use splitfeas::{solve, ConvexFunction, FixedPointOperator, LinearMap, SolverConfig};

fn main() {
    let a = LinearMap::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
    // f(y) = max(y₁ − 1, y₂ − 1, −y₁ − y₂ − 4): a triangle of feasible images
    let f = ConvexFunction::max_affine(vec![
        (DVector::from_vec(vec![1.0, 0.0]), 1.0),
        (DVector::from_vec(vec![0.0, 1.0]), 1.0),
        (DVector::from_vec(vec![-1.0, -1.0]), 4.0),
    ])
    .unwrap();

    for lambda in [0.5, 1.0, 1.5] {
        // P_{f,λ} is (2−λ)/λ-SQNE; the claim propagates to the solver's steps
        let t = f.operator().relax(lambda).unwrap();
        let u = FixedPointOperator::identity(2);
        let run = solve(
            &a,
            &t,
            &u,
            &DVector::from_vec(vec![7.0, 3.0]),
            &SolverConfig {
                residual_tol: 1e-10,
                ..SolverConfig::default()
            },
        )
        .unwrap();
        let x = run.final_iterate();
        let fx = f.value(&a.apply(x).unwrap()).unwrap();
        println!(
            "lambda = {lambda:3.1} (claimed constant {:5.3}): {} in {:4} iterations, f(Ax) = {fx:+.3e}",
            t.sqne_claim().unwrap(),
            run.status,
            run.iterations,
        );
    }
}
