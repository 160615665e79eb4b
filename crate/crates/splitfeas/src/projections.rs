//! Exact metric projections onto a closed catalog of convex sets, and the
//! subgradient projection for max-affine convex functions.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operators::FixedPointOperator;

/// A nonempty closed convex set with an exact projection rule.
///
/// The catalog is deliberately closed: every variant admits a closed-form
/// metric projection, which keeps golden tests exact. Arbitrary convex sets
/// enter only through [`ConvexFunction`] sublevel sets.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    /// `{x : ⟨a, x⟩ ≤ β}` with `‖a‖ > 0`.
    Halfspace { normal: DVector<f64>, offset: f64 },
    /// `{x : ⟨a, x⟩ = β}` with `‖a‖ > 0`.
    Hyperplane { normal: DVector<f64>, offset: f64 },
    /// `{x : lower ≤ x ≤ upper}` componentwise.
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    /// Closed Euclidean ball.
    Ball { center: DVector<f64>, radius: f64 },
    /// Singleton `{b}`.
    Point { point: DVector<f64> },
    /// `{u : u ≤ b}` componentwise, i.e. `b − R₊ⁿ`.
    OrthantLeq { bound: DVector<f64> },
    /// The whole space of the given dimension.
    WholeSpace { dim: usize },
}

fn check_finite(name: &'static str, v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::parameter(name, "entries must be finite"))
    }
}

impl ConvexSet {
    pub fn halfspace(normal: DVector<f64>, offset: f64) -> Result<Self> {
        check_finite("normal", &normal)?;
        if normal.norm() == 0.0 {
            return Err(Error::parameter("normal", "must be nonzero"));
        }
        if !offset.is_finite() {
            return Err(Error::parameter("offset", "must be finite"));
        }
        Ok(ConvexSet::Halfspace { normal, offset })
    }

    pub fn hyperplane(normal: DVector<f64>, offset: f64) -> Result<Self> {
        match Self::halfspace(normal, offset)? {
            ConvexSet::Halfspace { normal, offset } => Ok(ConvexSet::Hyperplane { normal, offset }),
            _ => unreachable!(),
        }
    }

    pub fn hyper_box(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        check_finite("lower", &lower)?;
        check_finite("upper", &upper)?;
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::parameter("bounds", "lower must not exceed upper"));
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        check_finite("center", &center)?;
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::parameter(
                "radius",
                format!("must be nonnegative, got {radius}"),
            ));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn point(point: DVector<f64>) -> Result<Self> {
        check_finite("point", &point)?;
        Ok(ConvexSet::Point { point })
    }

    pub fn orthant_leq(bound: DVector<f64>) -> Result<Self> {
        check_finite("bound", &bound)?;
        Ok(ConvexSet::OrthantLeq { bound })
    }

    pub fn whole_space(dim: usize) -> Self {
        ConvexSet::WholeSpace { dim }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Halfspace { normal, .. } | ConvexSet::Hyperplane { normal, .. } => {
                normal.len()
            }
            ConvexSet::Box { lower, .. } => lower.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Point { point } => point.len(),
            ConvexSet::OrthantLeq { bound } => bound.len(),
            ConvexSet::WholeSpace { dim } => *dim,
        }
    }

    /// The metric projection of `x` onto the set: the unique nearest point.
    /// Returns `x` itself whenever `x` is a member.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "vector entry",
            });
        }
        Ok(match self {
            ConvexSet::Halfspace { normal, offset } => {
                let excess = normal.dot(x) - offset;
                if excess > 0.0 {
                    x - normal * (excess / normal.norm_squared())
                } else {
                    x.clone()
                }
            }
            ConvexSet::Hyperplane { normal, offset } => {
                let excess = normal.dot(x) - offset;
                x - normal * (excess / normal.norm_squared())
            }
            ConvexSet::Box { lower, upper } => {
                DVector::from_fn(x.len(), |i, _| x[i].max(lower[i]).min(upper[i]))
            }
            ConvexSet::Ball { center, radius } => {
                let d = x - center;
                let dist = d.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center + d * (radius / dist)
                }
            }
            ConvexSet::Point { point } => point.clone(),
            ConvexSet::OrthantLeq { bound } => DVector::from_fn(x.len(), |i, _| x[i].min(bound[i])),
            ConvexSet::WholeSpace { .. } => x.clone(),
        })
    }

    /// Distance from `x` to the set, `‖P x − x‖`; zero exactly on members.
    /// This is the fixed-point residual of the projection operator.
    pub fn distance(&self, x: &DVector<f64>) -> Result<f64> {
        Ok((self.project(x)? - x).norm())
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// The projection wrapped as a fixed-point operator handle.
    ///
    /// Projections are firmly nonexpansive with `Fix P = C`, hence cutters,
    /// hence 1-SQNE; the handle claims that constant and exposes the exact
    /// distance as its residual.
    pub fn operator(&self) -> FixedPointOperator {
        let set = self.clone();
        let res_set = self.clone();
        FixedPointOperator::from_fn(self.dim(), move |x| set.project(x))
            .with_sqne_claim(1.0)
            .with_exact_distance_residual(move |x| res_set.distance(x))
    }
}

/// A convex function given as a finite max of affine rows,
/// `f(y) = max_i (⟨a_i, y⟩ − b_i)`.
///
/// Nonemptiness of the sublevel set `{y : f(y) ≤ 0}` is not enforced
/// structurally; callers assert it per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFunction {
    rows: Vec<(DVector<f64>, f64)>,
    dim: usize,
}

impl ConvexFunction {
    /// Builds a max-affine function. Rejects empty row lists, inconsistent
    /// dimensions, and rows with a zero gradient and negative shift — those
    /// would force `f > 0` somewhere with no subgradient direction to
    /// project along.
    pub fn max_affine(rows: Vec<(DVector<f64>, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::parameter(
                "rows",
                "at least one affine row is required",
            ));
        }
        let dim = rows[0].0.len();
        for (i, (a, b)) in rows.iter().enumerate() {
            check_finite("row", a)?;
            if !b.is_finite() {
                return Err(Error::parameter(
                    "rows",
                    format!("row {i} has a non-finite shift"),
                ));
            }
            if a.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: a.len(),
                });
            }
            if a.norm() == 0.0 && *b < 0.0 {
                return Err(Error::parameter(
                    "rows",
                    format!("row {i} has zero gradient and positive constant value"),
                ));
            }
        }
        Ok(Self { rows, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[(DVector<f64>, f64)] {
        &self.rows
    }

    pub fn value(&self, y: &DVector<f64>) -> Result<f64> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: y.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|(a, b)| a.dot(y) - b)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// The selected subgradient at `y`: the gradient of the active row with
    /// the lowest index (a deterministic selection among valid choices).
    pub fn subgradient(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let value = self.value(y)?;
        let (a, _) = self
            .rows
            .iter()
            .find(|(a, b)| a.dot(y) - b == value)
            .expect("max is attained by some row");
        Ok(a.clone())
    }

    /// The subgradient projection step
    /// `P_f(y) = y − (f(y)₊ / ‖g‖²) g` when `f(y) > 0`, `y` otherwise.
    ///
    /// The branch split uses the exact comparison `f(y) > 0`; tolerances
    /// belong to downstream fixed-point tests, not to the operator.
    pub fn subgradient_projection(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let value = self.value(y)?;
        if value <= 0.0 {
            return Ok(y.clone());
        }
        let g = self.subgradient(y)?;
        let gg = g.norm_squared();
        if gg == 0.0 {
            return Err(Error::InfeasibleSubgradientStep);
        }
        Ok(y - g * (value / gg))
    }

    /// The subgradient projection as an operator handle. When the sublevel
    /// set is nonempty, `P_f` is a cutter, hence 1-SQNE; its residual
    /// `‖P_f y − y‖` vanishes exactly on the sublevel set but is not the
    /// Euclidean distance to it.
    pub fn operator(&self) -> FixedPointOperator {
        let f = self.clone();
        FixedPointOperator::from_fn(self.dim, move |y| f.subgradient_projection(y))
            .with_sqne_claim(1.0)
    }
}
