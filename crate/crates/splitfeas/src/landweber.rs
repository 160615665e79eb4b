//! Landweber and Landweber-type operators for the split feasibility problem:
//! the proximity function and its gradient, the plain / projected / relaxed
//! constructions, and the norm-free extrapolation driven by the step size
//! `σ(x) = ‖TAx − Ax‖² / ‖A*(TAx − Ax)‖²`.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linops::LinearMap;
use crate::operators::FixedPointOperator;
use crate::projections::ConvexSet;

/// Default base tolerance for the numeric membership test `Ax ∈ Fix T`.
/// The effective threshold at a point scales as `fix_tol · (1 + ‖Ax‖)`.
pub const DEFAULT_FIX_TOL: f64 = 1e-12;

static DEGENERATE_ROUTES: AtomicU64 = AtomicU64::new(0);

/// How many extrapolated evaluations were routed to the fixed branch because
/// `‖A*(TAx − Ax)‖` vanished while `‖TAx − Ax‖` did not. Under the standing
/// hypothesis `im A ∩ Fix T ≠ ∅` this can only happen through numerical noise
/// or a violated hypothesis, so it is surfaced as a diagnostic rather than
/// silently divided through.
pub fn degenerate_route_count() -> u64 {
    DEGENERATE_ROUTES.load(Ordering::Relaxed)
}

pub fn reset_degenerate_route_count() {
    DEGENERATE_ROUTES.store(0, Ordering::Relaxed);
}

/// Proximity value `f(x) = ½‖P_Q(Ax) − Ax‖²`; nonnegative, zero iff `Ax ∈ Q`.
pub fn proximity_value(a: &LinearMap, q: &ConvexSet, x: &DVector<f64>) -> Result<f64> {
    let u = a.apply(x)?;
    let d = q.project(&u)? - &u;
    Ok(0.5 * d.norm_squared())
}

/// Gradient of the proximity function, `∇f(x) = A*(Ax − P_Q(Ax))`.
/// Vanishes exactly on the Landweber operator's fixed-point set.
pub fn proximity_gradient(a: &LinearMap, q: &ConvexSet, x: &DVector<f64>) -> Result<DVector<f64>> {
    let u = a.apply(x)?;
    let d = &u - q.project(&u)?;
    a.apply_adjoint(&d)
}

/// Which Landweber-type construction to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LandweberVariant {
    /// `V = Id + ‖A‖⁻² A*(T − Id)A`.
    Plain,
    /// `P_C ∘ V`.
    Projected,
    /// `x ↦ P_C(x + (λ/‖A‖²) A*(T(Ax) − Ax))` with `λ ∈ (0, 2)`.
    ProjectedRelaxed { lambda: f64 },
    /// The norm-free extrapolation `V_τ` of (the step size never consults
    /// `‖A‖`).
    Extrapolated,
}

/// A validated recipe for a Landweber-type operator: the linear map `A`, the
/// inner operator `T` on the codomain, an optional constraint set `C` in the
/// domain, and the variant to build.
#[derive(Clone)]
pub struct LandweberSpec {
    a: LinearMap,
    t: FixedPointOperator,
    c: Option<ConvexSet>,
    variant: LandweberVariant,
    fix_tol: f64,
}

impl LandweberSpec {
    /// Checks `‖A‖ > 0` and that `T` acts on the codomain of `A`.
    pub fn new(a: LinearMap, t: FixedPointOperator, variant: LandweberVariant) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroOperator);
        }
        if t.dim() != a.codomain_dim() {
            return Err(Error::DimensionMismatch {
                expected: a.codomain_dim(),
                actual: t.dim(),
            });
        }
        Ok(Self {
            a,
            t,
            c: None,
            variant,
            fix_tol: DEFAULT_FIX_TOL,
        })
    }

    /// Attaches the constraint set for the projected variants.
    pub fn with_projection(mut self, c: ConvexSet) -> Result<Self> {
        if c.dim() != self.a.domain_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.a.domain_dim(),
                actual: c.dim(),
            });
        }
        self.c = Some(c);
        Ok(self)
    }

    pub fn with_fix_tol(mut self, fix_tol: f64) -> Result<Self> {
        if !fix_tol.is_finite() || fix_tol <= 0.0 {
            return Err(Error::parameter(
                "fix_tol",
                format!("must be positive, got {fix_tol}"),
            ));
        }
        self.fix_tol = fix_tol;
        Ok(self)
    }

    /// Builds the operator for the configured variant.
    ///
    /// The plain operator inherits `T`'s SQNE claim; the projected variants
    /// are compositions with `P_C` and claim the harmonic constant; the
    /// extrapolated variant delegates to [`extrapolated_landweber`].
    pub fn build(&self) -> Result<FixedPointOperator> {
        match self.variant {
            LandweberVariant::Plain => plain_landweber(&self.a, &self.t),
            LandweberVariant::Projected => {
                let c = self.require_c()?;
                c.operator().compose(&plain_landweber(&self.a, &self.t)?)
            }
            LandweberVariant::ProjectedRelaxed { lambda } => {
                if !(lambda > 0.0 && lambda < 2.0) {
                    return Err(Error::parameter(
                        "lambda",
                        format!("projected relaxation requires lambda in (0, 2), got {lambda}"),
                    ));
                }
                let c = self.require_c()?;
                let relaxed = plain_landweber(&self.a, &self.t)?.relax(lambda)?;
                c.operator().compose(&relaxed)
            }
            LandweberVariant::Extrapolated => {
                Ok(extrapolated_landweber(&self.a, &self.t, self.fix_tol))
            }
        }
    }

    fn require_c(&self) -> Result<&ConvexSet> {
        self.c.as_ref().ok_or_else(|| {
            Error::parameter("C", "projected variants need a constraint set".to_string())
        })
    }
}

/// `V = Id + ‖A‖⁻² A*(T − Id)A`, the Landweber-type operator related to `T`
/// (the classical Landweber operator when `T` is a metric projection).
///
/// `Fix V = A⁻¹(Fix T)`, so the residual rule delegates to `T` at `Ax`, and
/// the SQNE claim transfers from `T` unchanged.
pub fn plain_landweber(a: &LinearMap, t: &FixedPointOperator) -> Result<FixedPointOperator> {
    if a.is_zero() {
        return Err(Error::ZeroOperator);
    }
    if t.dim() != a.codomain_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.codomain_dim(),
            actual: t.dim(),
        });
    }
    let norm = a.norm_estimate()?;
    let inv_norm_sq = 1.0 / (norm * norm);
    let (a_apply, t_apply) = (a.clone(), t.clone());
    let (a_res, t_res) = (a.clone(), t.clone());
    let mut op = FixedPointOperator::from_fn(a.domain_dim(), move |x| {
        let u = a_apply.apply(x)?;
        let d = t_apply.apply(&u)? - &u;
        Ok(x + a_apply.apply_adjoint(&d)? * inv_norm_sq)
    })
    .with_fix_residual(move |x| t_res.fix_residual(&a_res.apply(x)?));
    if let Some(alpha) = t.sqne_claim() {
        op = op.with_sqne_claim(alpha);
    }
    Ok(op)
}

/// The step size `σ(x) = ‖TAx − Ax‖² / ‖A*(TAx − Ax)‖²` when `Ax ∉ Fix T`,
/// and 1 otherwise. Satisfies `σ(x) ≥ ‖A‖⁻²` wherever the ratio is taken.
///
/// Membership in `Fix T` is decided by `‖TAx − Ax‖ ≤ fix_tol·(1 + ‖Ax‖)`;
/// a vanishing denominator with a non-vanished numerator routes to the fixed
/// branch as well (see [`degenerate_route_count`]).
pub fn sigma_step(
    a: &LinearMap,
    t: &FixedPointOperator,
    x: &DVector<f64>,
    fix_tol: f64,
) -> Result<f64> {
    if !fix_tol.is_finite() || fix_tol <= 0.0 {
        return Err(Error::parameter(
            "fix_tol",
            format!("must be positive, got {fix_tol}"),
        ));
    }
    let u = a.apply(x)?;
    let tu = t.apply(&u)?;
    match extrapolation_parts(a, &u, &tu, fix_tol)? {
        ExtrapolationStep::Fixed => Ok(1.0),
        ExtrapolationStep::Move { sigma, .. } => Ok(sigma),
    }
}

/// The extrapolation step size `τ(x) = ‖A‖²σ(x)` when `Ax ∉ Fix T`, and 1
/// otherwise; `τ(x) ≥ 1` wherever defined.
pub fn tau_step(
    a: &LinearMap,
    t: &FixedPointOperator,
    x: &DVector<f64>,
    fix_tol: f64,
) -> Result<f64> {
    if !fix_tol.is_finite() || fix_tol <= 0.0 {
        return Err(Error::parameter(
            "fix_tol",
            format!("must be positive, got {fix_tol}"),
        ));
    }
    let u = a.apply(x)?;
    let tu = t.apply(&u)?;
    match extrapolation_parts(a, &u, &tu, fix_tol)? {
        ExtrapolationStep::Fixed => Ok(1.0),
        ExtrapolationStep::Move { sigma, .. } => {
            let norm = a.norm_estimate()?;
            Ok(norm * norm * sigma)
        }
    }
}

pub(crate) enum ExtrapolationStep {
    /// `Ax` is within tolerance of `Fix T` (or the adjoint image of the
    /// displacement vanished): the operator leaves `x` unchanged.
    Fixed,
    /// Move by `sigma · direction` where `direction = A*(TAx − Ax)`.
    Move { sigma: f64, direction: DVector<f64> },
}

pub(crate) fn membership_tol(fix_tol: f64, u: &DVector<f64>) -> f64 {
    fix_tol * (1.0 + u.norm())
}

/// Shared core of the extrapolated update: given `u = Ax` and `tu = T(u)`
/// (possibly of a relaxed `T`), decide the branch and produce the step.
pub(crate) fn extrapolation_parts(
    a: &LinearMap,
    u: &DVector<f64>,
    tu: &DVector<f64>,
    fix_tol: f64,
) -> Result<ExtrapolationStep> {
    let d = tu - u;
    let tol = membership_tol(fix_tol, u);
    let dn = d.norm();
    if dn <= tol {
        return Ok(ExtrapolationStep::Fixed);
    }
    let direction = a.apply_adjoint(&d)?;
    let gn2 = direction.norm_squared();
    if gn2.sqrt() <= tol {
        DEGENERATE_ROUTES.fetch_add(1, Ordering::Relaxed);
        return Ok(ExtrapolationStep::Fixed);
    }
    Ok(ExtrapolationStep::Move {
        sigma: dn * dn / gn2,
        direction,
    })
}

/// The extrapolation `V_τ` of the Landweber-type operator:
///
/// `V_τ x = x + (‖TAx − Ax‖² / ‖A*(TAx − Ax)‖²) A*(TAx − Ax)` when
/// `Ax ∉ Fix T`, and `x` otherwise.
///
/// Evaluation never consults `‖A‖`. `Fix V_τ = A⁻¹(Fix T)`, so the residual
/// rule delegates to `T` at `Ax`, and the SQNE claim transfers from `T`.
pub fn extrapolated_landweber(
    a: &LinearMap,
    t: &FixedPointOperator,
    fix_tol: f64,
) -> FixedPointOperator {
    let (a_apply, t_apply) = (a.clone(), t.clone());
    let (a_res, t_res) = (a.clone(), t.clone());
    let mut op = FixedPointOperator::from_fn(a.domain_dim(), move |x| {
        let u = a_apply.apply(x)?;
        let tu = t_apply.apply(&u)?;
        match extrapolation_parts(&a_apply, &u, &tu, fix_tol)? {
            ExtrapolationStep::Fixed => Ok(x.clone()),
            ExtrapolationStep::Move { sigma, direction } => Ok(x + direction * sigma),
        }
    })
    .with_fix_residual(move |x| t_res.fix_residual(&a_res.apply(x)?))
    .flag_extrapolation(true);
    if let Some(alpha) = t.sqne_claim() {
        op = op.with_sqne_claim(alpha);
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ball_point;
    use nalgebra::DMatrix;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn v(entries: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(entries)
    }

    fn m(rows: usize, cols: usize, entries: &[f64]) -> LinearMap {
        LinearMap::new(DMatrix::from_row_slice(rows, cols, entries)).unwrap()
    }

    /// Central finite differences of the proximity value.
    fn fd_gradient(a: &LinearMap, q: &ConvexSet, x: &DVector<f64>, h: f64) -> DVector<f64> {
        DVector::from_fn(x.len(), |i, _| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            (proximity_value(a, q, &xp).unwrap() - proximity_value(a, q, &xm).unwrap()) / (2.0 * h)
        })
    }

    #[test]
    fn proximity_value_point_target() {
        let a = m(1, 2, &[1.0, 1.0]);
        let q = ConvexSet::point(v(&[0.0])).unwrap();
        assert!((proximity_value(&a, &q, &v(&[1.0, 1.0])).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn proximity_value_zero_on_members() {
        let a = m(1, 2, &[1.0, 1.0]);
        let q = ConvexSet::point(v(&[0.0])).unwrap();
        assert_eq!(proximity_value(&a, &q, &v(&[1.0, -1.0])).unwrap(), 0.0);
    }

    #[test]
    fn proximity_value_halfspace_target() {
        let a = LinearMap::identity(1);
        let q = ConvexSet::halfspace(v(&[1.0]), 0.0).unwrap();
        assert!((proximity_value(&a, &q, &v(&[3.0])).unwrap() - 4.5).abs() < 1e-15);
    }

    #[test]
    fn proximity_gradient_matches_finite_differences() {
        let a = m(1, 2, &[1.0, 1.0]);
        let q = ConvexSet::point(v(&[0.0])).unwrap();
        let x = v(&[1.0, 1.0]);
        let g = proximity_gradient(&a, &q, &x).unwrap();
        assert!((g.clone() - v(&[2.0, 2.0])).norm() < 1e-12);
        let fd = fd_gradient(&a, &q, &x, 1e-5);
        assert!((g - &fd).norm() <= 1e-6 * (1.0 + fd.norm()));
    }

    #[test]
    fn proximity_gradient_vanishes_on_members() {
        let a = m(1, 2, &[1.0, 1.0]);
        let q = ConvexSet::point(v(&[0.0])).unwrap();
        assert_eq!(
            proximity_gradient(&a, &q, &v(&[2.0, -2.0])).unwrap(),
            v(&[0.0, 0.0])
        );
    }

    #[test]
    fn proximity_gradient_halfspace_case() {
        let a = LinearMap::identity(2);
        let q = ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        let x = v(&[3.0, -1.0]);
        let g = proximity_gradient(&a, &q, &x).unwrap();
        assert!((g.clone() - v(&[3.0, 0.0])).norm() < 1e-12);
        let fd = fd_gradient(&a, &q, &x, 1e-5);
        assert!((g - &fd).norm() <= 1e-6 * (1.0 + fd.norm()));
    }

    #[test]
    fn plain_landweber_with_identity_map_is_the_projection() {
        let a = LinearMap::identity(2);
        let q = ConvexSet::halfspace(v(&[1.0, 1.0]), 1.0).unwrap();
        let op = plain_landweber(&a, &q.operator()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let x = ball_point(&mut rng, 2, 10.0);
            let diff = (op.apply(&x).unwrap() - q.project(&x).unwrap()).norm();
            assert!(diff <= 1e-12);
        }
    }

    #[test]
    fn plain_landweber_linear_system_step() {
        // A = diag(1,2), Q = {0}: Vx = x − ‖A‖⁻² Aᵀ(Ax).
        let a = m(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let q = ConvexSet::point(v(&[0.0, 0.0])).unwrap();
        let op = plain_landweber(&a, &q.operator()).unwrap();
        let got = op.apply(&v(&[1.0, 1.0])).unwrap();
        // ‖A‖ = 2, A*(Ax − 0) = (1, 4), so Vx = (1,1) − ¼(1,4) = (0.75, 0).
        assert!((got - v(&[0.75, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn rank_one_landweber_is_the_halfspace_projection() {
        let a_vec = v(&[1.0, 0.0]);
        let a =
            LinearMap::with_norm(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]), a_vec.norm()).unwrap();
        let q = ConvexSet::halfspace(v(&[1.0]), 0.0).unwrap();
        let c = ConvexSet::halfspace(a_vec, 0.0).unwrap();
        let plain = plain_landweber(&a, &q.operator()).unwrap();
        let ext = extrapolated_landweber(&a, &q.operator(), DEFAULT_FIX_TOL);
        let x = v(&[2.0, 3.0]);
        assert!((plain.apply(&x).unwrap() - v(&[0.0, 3.0])).norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let x = ball_point(&mut rng, 2, 10.0);
            let pc = c.project(&x).unwrap();
            assert!((plain.apply(&x).unwrap() - &pc).norm() <= 1e-12);
            assert!((ext.apply(&x).unwrap() - &pc).norm() <= 1e-12);
        }
    }

    #[test]
    fn sigma_is_inverse_norm_squared_for_scaled_identity() {
        let a = m(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let q = ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        let x = v(&[3.0, 1.0]); // Ax = (6, 2) is outside
        let sigma = sigma_step(&a, &q.operator(), &x, DEFAULT_FIX_TOL).unwrap();
        assert!((sigma - 0.25).abs() < 1e-14);
    }

    #[test]
    fn sigma_is_one_on_the_fixed_branch() {
        let a = m(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let q = ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        let x = v(&[-3.0, 1.0]); // Ax = (−6, 2) is inside
        assert_eq!(
            sigma_step(&a, &q.operator(), &x, DEFAULT_FIX_TOL).unwrap(),
            1.0
        );
    }

    #[test]
    fn sigma_is_one_for_orthogonal_maps() {
        let (s, c) = (0.6, 0.8);
        let a = m(2, 2, &[c, -s, s, c]);
        let q = ConvexSet::halfspace(v(&[1.0, 0.0]), -1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let x = ball_point(&mut rng, 2, 10.0) + v(&[10.0, 0.0]);
            let u = a.apply(&x).unwrap();
            if q.distance(&u).unwrap() <= 1e-9 {
                continue;
            }
            let sigma = sigma_step(&a, &q.operator(), &x, DEFAULT_FIX_TOL).unwrap();
            assert!((sigma - 1.0).abs() < 1e-12, "sigma = {sigma}");
        }
    }

    #[test]
    fn extrapolated_fixes_points_mapped_into_fix_t() {
        let a = m(1, 2, &[1.0, 1.0]);
        let q = ConvexSet::halfspace(v(&[1.0]), 0.0).unwrap();
        let op = extrapolated_landweber(&a, &q.operator(), DEFAULT_FIX_TOL);
        let x = v(&[1.0, -2.0]); // Ax = −1 ≤ 0
        assert_eq!(op.apply(&x).unwrap(), x);
        assert!(op.is_extrapolation());
    }

    #[test]
    fn extrapolated_coincides_with_plain_for_orthogonal_maps() {
        let (s, c) = (0.6, 0.8);
        let a = m(2, 2, &[c, -s, s, c]);
        let q = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let plain = plain_landweber(&a, &q.operator()).unwrap();
        let ext = extrapolated_landweber(&a, &q.operator(), DEFAULT_FIX_TOL);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let x = ball_point(&mut rng, 2, 10.0);
            let diff = (plain.apply(&x).unwrap() - ext.apply(&x).unwrap()).norm();
            assert!(diff <= 1e-9, "diff = {diff}");
        }
    }

    #[test]
    fn nonexpansive_inner_operators_transfer_nonexpansiveness() {
        // T = reflection across a half-space boundary: NE but not FNE.
        let a = m(2, 3, &[1.0, 0.5, -1.0, 0.0, 2.0, 1.0]);
        let q = ConvexSet::halfspace(v(&[1.0, -1.0]), 0.5).unwrap();
        let reflection = q.operator().relax(2.0).unwrap();
        let op = plain_landweber(&a, &reflection).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let x = ball_point(&mut rng, 3, 10.0);
            let y = ball_point(&mut rng, 3, 10.0);
            let spread = (op.apply(&x).unwrap() - op.apply(&y).unwrap()).norm();
            assert!(spread <= (&x - &y).norm() + 1e-10);
        }
    }

    #[test]
    fn unscaled_and_scaled_updates_are_norm_squared_apart() {
        // Ux − x = ‖A‖²(Vx − x) with U = Id + A*(T − Id)A.
        let a = m(3, 2, &[1.0, 2.0, 0.0, 1.0, -1.0, 0.5]);
        let q = ConvexSet::orthant_leq(v(&[0.0, 0.0, 0.0])).unwrap();
        let t = q.operator();
        let plain = plain_landweber(&a, &t).unwrap();
        let norm = a.norm_estimate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..300 {
            let x = ball_point(&mut rng, 2, 10.0);
            let u = a.apply(&x).unwrap();
            let d = t.apply(&u).unwrap() - &u;
            let unscaled_step = a.apply_adjoint(&d).unwrap();
            let scaled_step = plain.apply(&x).unwrap() - &x;
            let gap = (unscaled_step - scaled_step * (norm * norm)).norm();
            assert!(gap <= 1e-9, "gap = {gap}");
        }
    }

    #[test]
    fn plain_is_a_gradient_descent_step_on_the_proximity_function() {
        let a = m(2, 3, &[1.0, 0.0, 2.0, -1.0, 1.0, 0.0]);
        let q = ConvexSet::orthant_leq(v(&[1.0, -1.0])).unwrap();
        let op = plain_landweber(&a, &q.operator()).unwrap();
        let norm = a.norm_estimate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..300 {
            let x = ball_point(&mut rng, 3, 10.0);
            let grad = proximity_gradient(&a, &q, &x).unwrap();
            let expected = &x - grad / (norm * norm);
            assert!((op.apply(&x).unwrap() - expected).norm() <= 1e-12);
        }
    }

    #[test]
    fn extrapolation_step_sizes_stay_above_one() {
        let a = m(
            3,
            4,
            &[
                1.0, 0.5, -1.0, 2.0, 0.0, 1.0, 1.0, -0.5, 2.0, -1.0, 0.0, 1.0,
            ],
        );
        let q = ConvexSet::orthant_leq(v(&[0.5, -0.5, 1.0])).unwrap();
        let t = q.operator();
        let norm = a.norm_estimate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..500 {
            let x = ball_point(&mut rng, 4, 10.0);
            let sigma = sigma_step(&a, &t, &x, DEFAULT_FIX_TOL).unwrap();
            let tau = tau_step(&a, &t, &x, DEFAULT_FIX_TOL).unwrap();
            assert!(sigma >= 1.0 / (norm * norm) - 1e-9);
            assert!(tau >= 1.0 - 1e-9, "tau = {tau}");
        }
    }

    #[test]
    fn fixed_point_rule_separates_solutions_from_probes() {
        // Linear inequalities with a known interior solution.
        let a = m(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let solution = v(&[0.25, 0.25]);
        let b = a.apply(&solution).unwrap() + v(&[1.0, 1.0]);
        let q = ConvexSet::orthant_leq(b).unwrap();
        let plain = plain_landweber(&a, &q.operator()).unwrap();
        let ext = extrapolated_landweber(&a, &q.operator(), DEFAULT_FIX_TOL);
        assert!(plain.fix_residual(&solution).unwrap() <= 1e-10);
        assert!(ext.fix_residual(&solution).unwrap() <= 1e-10);
        let probe = v(&[10.0, 0.0]); // first row gives 10 > 1.5
        assert!(plain.fix_residual(&probe).unwrap() >= 1e-3);
        assert!(ext.fix_residual(&probe).unwrap() >= 1e-3);
    }

    #[test]
    fn degenerate_adjoint_directions_route_to_the_fixed_branch() {
        // im A = span{(0,1)} misses Fix T = {u₁ ≤ −1}, so the displacement
        // T(Ax) − Ax lands in ker A*: the standing hypothesis is violated and
        // the evaluation must not divide by the vanishing denominator.
        let a = m(2, 1, &[0.0, 1.0]);
        let q = ConvexSet::halfspace(v(&[1.0, 0.0]), -1.0).unwrap();
        let op = extrapolated_landweber(&a, &q.operator(), DEFAULT_FIX_TOL);
        reset_degenerate_route_count();
        let x = v(&[3.0]);
        assert_eq!(op.apply(&x).unwrap(), x);
        assert_eq!(degenerate_route_count(), 1);
        assert!(op.fix_residual(&x).unwrap() > 0.1, "the point is genuinely not fixed");
        reset_degenerate_route_count();
    }

    #[test]
    fn projected_variants_require_the_constraint_set() {
        let a = m(1, 2, &[1.0, 1.0]);
        let q = ConvexSet::halfspace(v(&[1.0]), 0.0).unwrap();
        let spec =
            LandweberSpec::new(a.clone(), q.operator(), LandweberVariant::Projected).unwrap();
        assert!(spec.build().is_err());

        let c = ConvexSet::hyper_box(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let spec = LandweberSpec::new(a.clone(), q.operator(), LandweberVariant::Projected)
            .unwrap()
            .with_projection(c.clone())
            .unwrap();
        let op = spec.build().unwrap();
        assert_eq!(op.sqne_claim(), Some(0.5));

        let bad = LandweberSpec::new(
            a,
            q.operator(),
            LandweberVariant::ProjectedRelaxed { lambda: 2.0 },
        )
        .unwrap()
        .with_projection(c)
        .unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn zero_map_is_rejected() {
        let a = LinearMap::new(DMatrix::zeros(2, 2)).unwrap();
        let q = ConvexSet::whole_space(2);
        assert!(matches!(
            LandweberSpec::new(a, q.operator(), LandweberVariant::Plain),
            Err(Error::ZeroOperator)
        ));
    }

    #[test]
    fn projected_relaxed_matches_the_direct_formula() {
        let a = m(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let q = ConvexSet::orthant_leq(v(&[0.0, 0.0])).unwrap();
        let c = ConvexSet::hyper_box(v(&[-2.0, -2.0]), v(&[2.0, 2.0])).unwrap();
        let lambda = 1.3;
        let spec = LandweberSpec::new(
            a.clone(),
            q.operator(),
            LandweberVariant::ProjectedRelaxed { lambda },
        )
        .unwrap()
        .with_projection(c.clone())
        .unwrap();
        let op = spec.build().unwrap();
        let norm = a.norm_estimate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let x = ball_point(&mut rng, 2, 10.0);
            let u = a.apply(&x).unwrap();
            let d = q.project(&u).unwrap() - &u;
            let inner = &x + a.apply_adjoint(&d).unwrap() * (lambda / (norm * norm));
            let expected = c.project(&inner).unwrap();
            assert!((op.apply(&x).unwrap() - expected).norm() <= 1e-12);
        }
    }
}
