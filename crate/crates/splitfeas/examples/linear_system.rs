//! Solving a linear system `Ax = b` as a split feasibility problem with
//! `Q = {b}`: the plain Landweber orbit takes fixed `‖A‖⁻²`-scaled steps,
//! while the extrapolated orbit picks the step size per point and needs no
//! norm at all.
//!
//! ```bash
//! cargo run -p splitfeas --example linear_system
//! ```

use nalgebra::DVector;
use splitfeas::solver::orbit;
use splitfeas::{extrapolated_landweber, plain_landweber, ConvexSet, LinearMap, SolverConfig};

fn main() {
    let a = LinearMap::from_rows(&[
        vec![2.0, 1.0, 0.0],
        vec![1.0, 3.0, 1.0],
        vec![0.0, 1.0, 2.5],
    ])
    .unwrap();
    let solution = DVector::from_vec(vec![1.0, -2.0, 0.5]);
    let b = a.apply(&solution).unwrap();
    let q = ConvexSet::point(b).unwrap();
    let t = q.operator();

    let x0 = DVector::from_vec(vec![10.0, 10.0, 10.0]);
    let cfg = SolverConfig {
        residual_tol: 1e-10,
        ..SolverConfig::default()
    };

    let plain = plain_landweber(&a, &t).unwrap();
    let run = orbit(&a, &t, None, &plain, &x0, &cfg).unwrap();
    println!(
        "plain Landweber:        {} in {:5} iterations, |Ax - b| = {:.3e}",
        run.status,
        run.iterations,
        run.final_row().outer_residual
    );

    let ext = extrapolated_landweber(&a, &t, 1e-12);
    let run = orbit(&a, &t, None, &ext, &x0, &cfg).unwrap();
    println!(
        "extrapolated (norm-free): {} in {:5} iterations, |Ax - b| = {:.3e}",
        run.status,
        run.iterations,
        run.final_row().outer_residual
    );
    println!(
        "distance to the constructed solution: {:.3e}",
        (run.final_iterate() - &solution).norm()
    );
}
