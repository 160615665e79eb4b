//! Feasibility for a system of linear inequalities `Ax ≤ b` via
//! `Q = b − R₊^m`: the residual driving the iteration is `‖(Ax − b)₊‖` and
//! the proximity column of the trace is half its square.
//!
//! ```bash
//! cargo run -p splitfeas --example linear_inequalities
//! ```

use nalgebra::DVector;
use splitfeas::instance::linear_inequalities;
use splitfeas::solver::orbit;
use splitfeas::{extrapolated_landweber, SolverConfig};

fn main() {
    let inst = linear_inequalities();
    let t = inst.target_operator().unwrap();
    let v_tau = extrapolated_landweber(&inst.a, &t, 1e-12);

    let x0 = DVector::from_vec(vec![8.0, -6.0]);
    let cfg = SolverConfig {
        residual_tol: 1e-9,
        ..SolverConfig::default()
    };
    let run = orbit(&inst.a, &t, None, &v_tau, &x0, &cfg).unwrap();

    println!("instance: {} ({} rows)", inst.label, inst.a.codomain_dim());
    println!(
        "status  : {} after {} iterations\n",
        run.status, run.iterations
    );
    println!("trace (iter, step_norm, outer_residual, proximity):");
    for row in &run.trace {
        println!(
            "  {:3}  {:11.4e}  {:11.4e}  {:11.4e}",
            row.iter,
            row.step_norm,
            row.outer_residual,
            row.proximity.unwrap_or(f64::NAN)
        );
    }

    let x = run.final_iterate();
    let violation = inst.q.violation(&inst.a.apply(x).unwrap()).unwrap();
    println!(
        "\nfinal iterate ({:.6}, {:.6}), |(Ax - b)+| = {violation:.3e}",
        x[0], x[1]
    );
}
