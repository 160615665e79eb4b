//! Empirical certification of operator properties: the inequalities behind
//! NE, FNE, SQNE and the cutter property are sampled over a deterministic
//! cloud and reported with their worst margins, including a negative control
//! that must fail.
//!
//! ```bash
//! cargo run -p splitfeas --example certify_properties
//! ```

use nalgebra::DVector;
use splitfeas::diagnostics::{certify_cutter, certify_fne, certify_ne, certify_sqne};
use splitfeas::{
    extrapolated_landweber, plain_landweber, ConvexSet, FixedPointOperator, LinearMap, SampleCloud,
};

fn main() {
    let a = LinearMap::from_rows(&[vec![1.0, 2.0, 0.5], vec![-1.0, 1.0, 1.0]]).unwrap();
    let anchor = DVector::from_vec(vec![0.5, -0.5, 1.0]);
    let b = a.apply(&anchor).unwrap() + DVector::from_vec(vec![1.0, 1.0]);
    let q = ConvexSet::orthant_leq(b).unwrap();

    let v = plain_landweber(&a, &q.operator()).unwrap();
    let v_tau = extrapolated_landweber(&a, &q.operator(), 1e-12);

    let cloud = SampleCloud::standard(3);
    let with_fp = cloud.clone().with_fixed_points(vec![anchor]);

    println!("plain Landweber-type operator V:");
    let fne = certify_fne(&v, &cloud, 1e-9).unwrap();
    println!("{fne}");

    println!(
        "extrapolation V_tau, claimed constant {:?}:",
        v_tau.sqne_claim()
    );
    let sqne = certify_sqne(&v_tau, v_tau.sqne_claim().unwrap(), &with_fp, 1e-9).unwrap();
    println!("{sqne}");
    let cutter = certify_cutter(&v_tau, &with_fp, 1e-9).unwrap();
    println!("{cutter}");

    // negative control: the doubling map expands distances and must fail
    let doubling = FixedPointOperator::from_fn(3, |x: &DVector<f64>| Ok(x * 2.0));
    let ne = certify_ne(&doubling, &cloud, 1e-9).unwrap();
    println!("doubling map (negative control):\n{ne}");
    assert!(!ne.pass, "the control is supposed to fail");
}
