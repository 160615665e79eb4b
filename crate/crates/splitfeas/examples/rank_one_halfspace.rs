//! Rank-one maps collapse the whole construction: for `Ax = ⟨a, x⟩` and
//! `Q = (−∞, β]`, the Landweber operator, its norm-free extrapolation, and
//! the metric projection onto the half-space `⟨a, x⟩ ≤ β` are the same map.
//!
//! ```bash
//! cargo run -p splitfeas --example rank_one_halfspace
//! ```

use nalgebra::{DMatrix, DVector};
use splitfeas::landweber::DEFAULT_FIX_TOL;
use splitfeas::{extrapolated_landweber, plain_landweber, ConvexSet, LinearMap, SampleCloud};

fn main() {
    let a_vec = DVector::from_vec(vec![3.0, 4.0]);
    let beta = 2.0;

    // the norm of a rank-one map is exactly ‖a‖, so estimation is bypassed
    let a = LinearMap::with_norm(DMatrix::from_row_slice(1, 2, &[3.0, 4.0]), a_vec.norm()).unwrap();
    let q = ConvexSet::halfspace(DVector::from_element(1, 1.0), beta).unwrap();
    let c = ConvexSet::halfspace(a_vec, beta).unwrap();

    let v = plain_landweber(&a, &q.operator()).unwrap();
    let v_tau = extrapolated_landweber(&a, &q.operator(), DEFAULT_FIX_TOL);

    println!("x            -> V x          V_tau x      P_C x");
    for x in [
        DVector::from_vec(vec![2.0, 3.0]),
        DVector::from_vec(vec![-1.0, 0.5]),
        DVector::from_vec(vec![4.0, -2.0]),
    ] {
        let vx = v.apply(&x).unwrap();
        let tx = v_tau.apply(&x).unwrap();
        let px = c.project(&x).unwrap();
        println!(
            "({:5.2},{:5.2}) -> ({:5.2},{:5.2}) ({:5.2},{:5.2}) ({:5.2},{:5.2})",
            x[0], x[1], vx[0], vx[1], tx[0], tx[1], px[0], px[1]
        );
    }

    let mut max_deviation = 0.0_f64;
    for x in SampleCloud::standard(2).points() {
        let px = c.project(&x).unwrap();
        max_deviation = max_deviation
            .max((v.apply(&x).unwrap() - &px).norm())
            .max((v_tau.apply(&x).unwrap() - &px).norm());
    }
    println!("\nmax deviation from P_C over 1000 sampled points: {max_deviation:.3e}");
}
