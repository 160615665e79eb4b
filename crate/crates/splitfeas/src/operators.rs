//! Fixed-point operator handles and the combinators that build new operators
//! from old: relaxation, generalized relaxation with a step-size function,
//! and composition. Each combinator propagates strong-quasi-nonexpansiveness
//! constants where a sound rule exists.
//!
//! SQNE constants attached to handles are *claims*. Nothing in this module
//! verifies them; the `diagnostics` certifiers do, empirically, and the
//! acceptance suite never trusts an uncertified claim.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};

type ApplyFn = dyn Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync;
type ResidualFn = dyn Fn(&DVector<f64>) -> Result<f64> + Send + Sync;
type StepFn = dyn Fn(&DVector<f64>) -> Result<f64> + Send + Sync;

/// An operator `S: H → H` bundled with an optional SQNE-constant claim and a
/// fixed-point residual rule.
///
/// The residual rule returns zero exactly on `Fix S`; it is `‖Sx − x‖` by
/// default and may be replaced by an exact rule (projections expose the true
/// distance to the set). Handles are immutable and cheap to clone.
#[derive(Clone)]
pub struct FixedPointOperator {
    dim: usize,
    apply: Arc<ApplyFn>,
    residual: Arc<ResidualFn>,
    sqne: Option<f64>,
    extrapolation: bool,
    exact_distance_residual: bool,
}

impl FixedPointOperator {
    /// Wraps an apply rule. The residual defaults to `‖Sx − x‖` and no SQNE
    /// constant is claimed.
    pub fn from_fn<F>(dim: usize, apply: F) -> Self
    where
        F: Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync + 'static,
    {
        let apply: Arc<ApplyFn> = Arc::new(apply);
        let residual_apply = apply.clone();
        Self {
            dim,
            apply,
            residual: Arc::new(move |x| Ok((residual_apply(x)? - x).norm())),
            sqne: None,
            extrapolation: false,
            exact_distance_residual: false,
        }
    }

    /// The identity on a space of the given dimension. Every point is fixed;
    /// the identity is trivially a cutter, so it claims the constant 1.
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |x: &DVector<f64>| Ok(x.clone()))
            .with_sqne_claim(1.0)
            .with_exact_distance_residual(|_| Ok(0.0))
    }

    pub fn with_sqne_claim(mut self, alpha: f64) -> Self {
        self.sqne = Some(alpha);
        self
    }

    /// Replaces the residual rule (zero iff the point is fixed).
    pub fn with_fix_residual<F>(mut self, residual: F) -> Self
    where
        F: Fn(&DVector<f64>) -> Result<f64> + Send + Sync + 'static,
    {
        self.residual = Arc::new(residual);
        self.exact_distance_residual = false;
        self
    }

    /// Replaces the residual rule with one that returns the exact Euclidean
    /// distance to the fixed-point set.
    pub fn with_exact_distance_residual<F>(mut self, residual: F) -> Self
    where
        F: Fn(&DVector<f64>) -> Result<f64> + Send + Sync + 'static,
    {
        self.residual = Arc::new(residual);
        self.exact_distance_residual = true;
        self
    }

    pub(crate) fn flag_extrapolation(mut self, flag: bool) -> Self {
        self.extrapolation = flag;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The claimed SQNE constant, if any. `Some(0.0)` claims plain
    /// quasi-nonexpansiveness.
    pub fn sqne_claim(&self) -> Option<f64> {
        self.sqne
    }

    /// Whether the operator was built with a point-dependent step size that
    /// stays at or above 1 wherever defined.
    pub fn is_extrapolation(&self) -> bool {
        self.extrapolation
    }

    /// Whether the residual rule returns the exact distance to the
    /// fixed-point set (true for catalog projections and their relaxations).
    pub fn has_exact_distance_residual(&self) -> bool {
        self.exact_distance_residual
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        (self.apply)(x)
    }

    /// Fixed-point residual at `x`; zero exactly when `x ∈ Fix S`.
    pub fn fix_residual(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        (self.residual)(x)
    }

    /// The λ-relaxation `S_λ = Id + λ(S − Id)`, `λ ≥ 0`.
    ///
    /// For `λ = 0` this degenerates to the identity. For `λ > 0` the
    /// fixed-point set (and hence the residual rule) is unchanged. A constant
    /// claim is propagated on the cutter track only: when `S` claims `α ≥ 1`
    /// and `λ ∈ (0, 2]`, the relaxation claims `(2 − λ)/λ`.
    pub fn relax(&self, lambda: f64) -> Result<FixedPointOperator> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::parameter(
                "lambda",
                format!("must be nonnegative, got {lambda}"),
            ));
        }
        if lambda == 0.0 {
            return Ok(FixedPointOperator::identity(self.dim));
        }
        let apply = self.apply.clone();
        let claim = match self.sqne {
            Some(alpha) if alpha >= 1.0 && lambda <= 2.0 => Some((2.0 - lambda) / lambda),
            _ => None,
        };
        Ok(FixedPointOperator {
            dim: self.dim,
            apply: Arc::new(move |x| {
                let sx = apply(x)?;
                Ok(x + (sx - x) * lambda)
            }),
            residual: self.residual.clone(),
            sqne: claim,
            extrapolation: lambda >= 1.0,
            exact_distance_residual: self.exact_distance_residual,
        })
    }

    /// The generalized relaxation `S_τ x = x + τ(x)(Sx − x)` for a positive
    /// step-size function. When the claimed lower bound of τ is at least 1
    /// the result is flagged as an extrapolation of `S`.
    pub fn generalized_relax(&self, tau: StepSizeFunction) -> FixedPointOperator {
        let apply = self.apply.clone();
        let rule = tau.rule.clone();
        let lower = tau.lower_bound_claim;
        FixedPointOperator {
            dim: self.dim,
            apply: Arc::new(move |x| {
                let t = rule(x)?;
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::parameter(
                        "tau",
                        format!("step size must be positive, got {t}"),
                    ));
                }
                if t < lower {
                    return Err(Error::parameter(
                        "tau",
                        format!("step size {t} fell below its claimed lower bound {lower}"),
                    ));
                }
                let sx = apply(x)?;
                Ok(x + (sx - x) * t)
            }),
            residual: self.residual.clone(),
            sqne: None,
            extrapolation: lower >= 1.0,
            exact_distance_residual: self.exact_distance_residual,
        }
    }

    /// The composition `self ∘ inner` (inner is applied first).
    ///
    /// When both factors claim positive constants α and β and share a fixed
    /// point, the composition claims the harmonic constant
    /// `γ = (1/α + 1/β)⁻¹`. The residual rule takes the max of both factors'
    /// residuals, which detects the common fixed-point set exactly under the
    /// nonempty-intersection hypothesis the constant rule already requires.
    pub fn compose(&self, inner: &FixedPointOperator) -> Result<FixedPointOperator> {
        if self.dim != inner.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: inner.dim,
            });
        }
        let outer_apply = self.apply.clone();
        let inner_apply = inner.apply.clone();
        let outer_res = self.residual.clone();
        let inner_res = inner.residual.clone();
        let claim = match (self.sqne, inner.sqne) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some(1.0 / (1.0 / a + 1.0 / b)),
            _ => None,
        };
        Ok(FixedPointOperator {
            dim: self.dim,
            apply: Arc::new(move |x| outer_apply(&inner_apply(x)?)),
            residual: Arc::new(move |x| Ok(outer_res(x)?.max(inner_res(x)?))),
            sqne: claim,
            extrapolation: false,
            exact_distance_residual: false,
        })
    }
}

impl std::fmt::Debug for FixedPointOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FixedPointOperator")
            .field("dim", &self.dim)
            .field("sqne_claim", &self.sqne)
            .field("extrapolation", &self.extrapolation)
            .finish()
    }
}

/// A point-dependent step size together with a claimed positive lower bound.
#[derive(Clone)]
pub struct StepSizeFunction {
    rule: Arc<StepFn>,
    lower_bound_claim: f64,
}

impl StepSizeFunction {
    pub fn new<F>(rule: F, lower_bound_claim: f64) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> Result<f64> + Send + Sync + 'static,
    {
        if !(lower_bound_claim.is_finite() && lower_bound_claim > 0.0) {
            return Err(Error::parameter(
                "lower_bound_claim",
                format!("must be positive, got {lower_bound_claim}"),
            ));
        }
        Ok(Self {
            rule: Arc::new(rule),
            lower_bound_claim,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::parameter(
                "tau",
                format!("must be positive, got {value}"),
            ));
        }
        Self::new(move |_| Ok(value), value)
    }

    pub fn lower_bound_claim(&self) -> f64 {
        self.lower_bound_claim
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        (self.rule)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projections::ConvexSet;
    use crate::rng::ball_point;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn v(entries: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(entries)
    }

    fn halfspace_op() -> FixedPointOperator {
        ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0)
            .unwrap()
            .operator()
    }

    #[test]
    fn relax_by_one_is_the_operator_itself() {
        let p = halfspace_op();
        let r = p.relax(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = ball_point(&mut rng, 2, 10.0);
            assert_eq!(r.apply(&x).unwrap(), p.apply(&x).unwrap());
        }
        assert_eq!(r.sqne_claim(), Some(1.0));
    }

    #[test]
    fn relax_by_zero_is_identity() {
        let p = halfspace_op();
        let r = p.relax(0.0).unwrap();
        let x = v(&[4.0, -2.0]);
        assert_eq!(r.apply(&x).unwrap(), x);
        assert_eq!(r.fix_residual(&x).unwrap(), 0.0);
    }

    #[test]
    fn relax_by_two_reflects() {
        let p = halfspace_op();
        let r = p.relax(2.0).unwrap();
        // x + 2(Px − x) with P(2,3) = (0,3)
        assert_eq!(r.apply(&v(&[2.0, 3.0])).unwrap(), v(&[-2.0, 3.0]));
        assert_eq!(r.sqne_claim(), Some(0.0));
    }

    #[test]
    fn relax_rejects_negative_lambda() {
        assert!(halfspace_op().relax(-0.1).is_err());
    }

    #[test]
    fn relaxation_keeps_the_fixed_point_set() {
        let p = halfspace_op();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for lambda in [0.5, 1.0, 1.5, 2.0] {
            let r = p.relax(lambda).unwrap();
            for _ in 0..100 {
                let raw = ball_point(&mut rng, 2, 10.0);
                let fixed = p.apply(&raw).unwrap();
                assert!(r.fix_residual(&fixed).unwrap() <= 1e-10);
                let outside = v(&[raw[0].abs() + 1.0, raw[1]]);
                assert!(r.fix_residual(&outside).unwrap() > 1e-10);
            }
        }
    }

    #[test]
    fn relaxed_projection_is_nonexpansive_for_lambda_up_to_two() {
        let p = halfspace_op();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for lambda in [0.5, 1.0, 1.5, 2.0] {
            let r = p.relax(lambda).unwrap();
            for _ in 0..1000 {
                let x = ball_point(&mut rng, 2, 10.0);
                let y = ball_point(&mut rng, 2, 10.0);
                let dx = (r.apply(&x).unwrap() - r.apply(&y).unwrap()).norm();
                assert!(dx <= (&x - &y).norm() + 1e-10);
            }
        }
    }

    #[test]
    fn generalized_relax_with_unit_step_is_the_operator() {
        let p = halfspace_op();
        let s = p.generalized_relax(StepSizeFunction::constant(1.0).unwrap());
        let x = v(&[3.0, 1.0]);
        assert_eq!(s.apply(&x).unwrap(), p.apply(&x).unwrap());
        assert!(s.is_extrapolation());
    }

    #[test]
    fn generalized_relax_with_step_two_reflects() {
        let p = halfspace_op();
        let s = p.generalized_relax(StepSizeFunction::constant(2.0).unwrap());
        assert_eq!(s.apply(&v(&[2.0, 3.0])).unwrap(), v(&[-2.0, 3.0]));
    }

    #[test]
    fn generalized_relax_leaves_fixed_points_alone() {
        let p = halfspace_op();
        let s = p.generalized_relax(StepSizeFunction::constant(7.5).unwrap());
        let x = v(&[-4.0, 2.0]); // already in the half-space
        assert_eq!(s.apply(&x).unwrap(), x);
    }

    #[test]
    fn step_size_below_claimed_bound_errors() {
        let p = halfspace_op();
        let tau = StepSizeFunction::new(|_| Ok(0.5), 1.0).unwrap();
        let s = p.generalized_relax(tau);
        assert!(s.apply(&v(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn compose_propagates_harmonic_constant() {
        let u = halfspace_op(); // claims 1
        let w = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap().operator(); // claims 1
        let c = u.compose(&w).unwrap();
        assert_eq!(c.sqne_claim(), Some(0.5));

        let u3 = FixedPointOperator::identity(2).with_sqne_claim(3.0);
        let w1 = halfspace_op();
        assert_eq!(u3.compose(&w1).unwrap().sqne_claim(), Some(0.75));
    }

    #[test]
    fn compose_with_identity_behaves_as_inner() {
        let id = FixedPointOperator::identity(2);
        let p = halfspace_op();
        let c = id.compose(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let x = ball_point(&mut rng, 2, 10.0);
            assert_eq!(c.apply(&x).unwrap(), p.apply(&x).unwrap());
        }
    }

    #[test]
    fn compose_checks_dimensions() {
        let a = FixedPointOperator::identity(2);
        let b = FixedPointOperator::identity(3);
        assert!(a.compose(&b).is_err());
    }

    #[test]
    fn compose_without_positive_claims_claims_nothing() {
        let reflection = halfspace_op().relax(2.0).unwrap(); // claims 0
        let c = halfspace_op().compose(&reflection).unwrap();
        assert_eq!(c.sqne_claim(), None);
    }

    #[test]
    fn composition_residual_detects_common_fixed_points() {
        let c1 = ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        let c2 = ConvexSet::halfspace(v(&[0.0, 1.0]), 0.0).unwrap();
        let composed = c1.operator().compose(&c2.operator()).unwrap();
        assert_eq!(composed.fix_residual(&v(&[-1.0, -1.0])).unwrap(), 0.0);
        assert!(composed.fix_residual(&v(&[-1.0, 2.0])).unwrap() > 1.0);
    }
}
