//! Problem instances for the split feasibility problem `find x ∈ C with
//! Ax ∈ Q`, their JSON file format, and the built-in catalog of small
//! instances (rank-one half-space, linear system, linear inequalities, and a
//! max-affine sublevel set).

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::LinearMap;
use crate::operators::FixedPointOperator;
use crate::projections::{ConvexFunction, ConvexSet};

/// Tolerance at which a supplied known solution must satisfy both
/// constraints.
pub const KNOWN_SOLUTION_TOL: f64 = 1e-9;

/// The right-hand side of the split problem: either a catalog set projected
/// exactly, or the zero-sublevel set of a max-affine function handled by the
/// (relaxed) subgradient projection.
#[derive(Debug, Clone)]
pub enum Target {
    Set(ConvexSet),
    Sublevel { f: ConvexFunction, lambda: f64 },
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::Set(s) => s.dim(),
            Target::Sublevel { f, .. } => f.dim(),
        }
    }

    /// Constraint violation at a point of the codomain: the distance for
    /// catalog sets, the positive part of the function value for sublevel
    /// targets.
    pub fn violation(&self, u: &DVector<f64>) -> Result<f64> {
        match self {
            Target::Set(s) => s.distance(u),
            Target::Sublevel { f, .. } => Ok(f.value(u)?.max(0.0)),
        }
    }

    /// The inner operator `T`: the metric projection for sets, the
    /// λ-relaxed subgradient projection for sublevel targets.
    pub fn operator(&self) -> Result<FixedPointOperator> {
        match self {
            Target::Set(s) => Ok(s.operator()),
            Target::Sublevel { f, lambda } => f.operator().relax(*lambda),
        }
    }
}

/// A validated split-feasibility instance.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub label: String,
    pub a: LinearMap,
    pub c: Option<ConvexSet>,
    pub q: Target,
    pub known_solution: Option<DVector<f64>>,
}

impl ProblemInstance {
    /// Builds and validates an instance: mutually consistent dimensions, and
    /// a known solution (when present) that satisfies both constraints to
    /// within [`KNOWN_SOLUTION_TOL`].
    pub fn new(
        label: impl Into<String>,
        a: LinearMap,
        c: Option<ConvexSet>,
        q: Target,
        known_solution: Option<DVector<f64>>,
    ) -> Result<Self> {
        let instance = Self {
            label: label.into(),
            a,
            c,
            q,
            known_solution,
        };
        instance.validate()?;
        Ok(instance)
    }

    fn validate(&self) -> Result<()> {
        if let Some(c) = &self.c {
            if c.dim() != self.a.domain_dim() {
                return Err(Error::instance(
                    "C",
                    format!(
                        "dimension {} does not match A's column count {}",
                        c.dim(),
                        self.a.domain_dim()
                    ),
                ));
            }
        }
        if self.q.dim() != self.a.codomain_dim() {
            return Err(Error::instance(
                "Q",
                format!(
                    "dimension {} does not match A's row count {}",
                    self.q.dim(),
                    self.a.codomain_dim()
                ),
            ));
        }
        if let Target::Sublevel { lambda, .. } = &self.q {
            if !(*lambda > 0.0 && *lambda <= 2.0) {
                return Err(Error::instance(
                    "Q.lambda",
                    format!("must lie in (0, 2], got {lambda}"),
                ));
            }
        }
        if let Some(z) = &self.known_solution {
            if z.len() != self.a.domain_dim() {
                return Err(Error::instance(
                    "known_solution",
                    format!(
                        "dimension {} does not match A's column count {}",
                        z.len(),
                        self.a.domain_dim()
                    ),
                ));
            }
            if let Some(c) = &self.c {
                let d = c.distance(z)?;
                if d > KNOWN_SOLUTION_TOL {
                    return Err(Error::instance(
                        "known_solution",
                        format!("distance to C is {d:.3e}, above {KNOWN_SOLUTION_TOL:.0e}"),
                    ));
                }
            }
            let v = self.q.violation(&self.a.apply(z)?)?;
            if v > KNOWN_SOLUTION_TOL {
                return Err(Error::instance(
                    "known_solution",
                    format!("violation of Q at A·x is {v:.3e}, above {KNOWN_SOLUTION_TOL:.0e}"),
                ));
            }
        }
        Ok(())
    }

    /// The inner operator `T` acting on the codomain.
    pub fn target_operator(&self) -> Result<FixedPointOperator> {
        self.q.operator()
    }
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    #[serde(default)]
    label: Option<String>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    c: Option<TargetSchema>,
    #[serde(rename = "Q")]
    q: TargetSchema,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    known_solution: Option<Vec<f64>>,
    /// Externally known operator norm of `A`, bypassing estimation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TargetSchema {
    Halfspace {
        a: Vec<f64>,
        beta: f64,
    },
    Hyperplane {
        a: Vec<f64>,
        beta: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Point {
        b: Vec<f64>,
    },
    OrthantLeq {
        b: Vec<f64>,
    },
    WholeSpace {
        dim: usize,
    },
    SublevelMaxAffine {
        rows: Vec<AffineRow>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct AffineRow {
    a: Vec<f64>,
    b: f64,
}

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

impl TargetSchema {
    fn from_set(set: &ConvexSet) -> Self {
        match set {
            ConvexSet::Halfspace { normal, offset } => TargetSchema::Halfspace {
                a: vec_of(normal),
                beta: *offset,
            },
            ConvexSet::Hyperplane { normal, offset } => TargetSchema::Hyperplane {
                a: vec_of(normal),
                beta: *offset,
            },
            ConvexSet::Box { lower, upper } => TargetSchema::Box {
                lower: vec_of(lower),
                upper: vec_of(upper),
            },
            ConvexSet::Ball { center, radius } => TargetSchema::Ball {
                center: vec_of(center),
                radius: *radius,
            },
            ConvexSet::Point { point } => TargetSchema::Point { b: vec_of(point) },
            ConvexSet::OrthantLeq { bound } => TargetSchema::OrthantLeq { b: vec_of(bound) },
            ConvexSet::WholeSpace { dim } => TargetSchema::WholeSpace { dim: *dim },
        }
    }

    fn from_target(target: &Target) -> Self {
        match target {
            Target::Set(s) => Self::from_set(s),
            Target::Sublevel { f, lambda } => TargetSchema::SublevelMaxAffine {
                rows: f
                    .rows()
                    .iter()
                    .map(|(a, b)| AffineRow {
                        a: vec_of(a),
                        b: *b,
                    })
                    .collect(),
                lambda: Some(*lambda),
            },
        }
    }

    fn into_set(self, field: &str) -> Result<ConvexSet> {
        let d = DVector::from_vec;
        match self {
            TargetSchema::Halfspace { a, beta } => ConvexSet::halfspace(d(a), beta),
            TargetSchema::Hyperplane { a, beta } => ConvexSet::hyperplane(d(a), beta),
            TargetSchema::Box { lower, upper } => ConvexSet::hyper_box(d(lower), d(upper)),
            TargetSchema::Ball { center, radius } => ConvexSet::ball(d(center), radius),
            TargetSchema::Point { b } => ConvexSet::point(d(b)),
            TargetSchema::OrthantLeq { b } => ConvexSet::orthant_leq(d(b)),
            TargetSchema::WholeSpace { dim } => Ok(ConvexSet::whole_space(dim)),
            TargetSchema::SublevelMaxAffine { .. } => Err(Error::instance(
                field,
                "sublevel sets are only supported on the Q side",
            )),
        }
        .map_err(|e| Error::instance(field, e.to_string()))
    }

    fn into_target(self) -> Result<Target> {
        match self {
            TargetSchema::SublevelMaxAffine { rows, lambda } => {
                let rows = rows
                    .into_iter()
                    .map(|r| (DVector::from_vec(r.a), r.b))
                    .collect();
                let f = ConvexFunction::max_affine(rows)
                    .map_err(|e| Error::instance("Q.rows", e.to_string()))?;
                Ok(Target::Sublevel {
                    f,
                    lambda: lambda.unwrap_or(1.0),
                })
            }
            other => Ok(Target::Set(other.into_set("Q")?)),
        }
    }
}

impl ProblemInstance {
    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            label: Some(self.label.clone()),
            a: self
                .a
                .matrix()
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            c: self.c.as_ref().map(TargetSchema::from_set),
            q: TargetSchema::from_target(&self.q),
            known_solution: self.known_solution.as_ref().map(vec_of),
            norm: self.a.supplied_norm(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let a = LinearMap::from_rows(&file.a)?;
        let a = match file.norm {
            Some(norm) => LinearMap::with_norm(a.matrix().clone(), norm)?,
            None => a,
        };
        let c = file.c.map(|s| s.into_set("C")).transpose()?;
        let q = file.q.into_target()?;
        let known = file.known_solution.map(DVector::from_vec);
        ProblemInstance::new(file.label.unwrap_or_default(), a, c, q, known)
    }
}

/// Loads and validates an instance file; validation errors name the
/// offending field.
pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path)?;
    ProblemInstance::from_json(&text)
}

pub fn save_instance(instance: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance.to_json()?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Built-in instances
// ---------------------------------------------------------------------------

/// Rank-one map `Ax = ⟨a, x⟩` with `a = (3, 4)` (exact norm 5 supplied),
/// `Q = (−∞, 2]`. The Landweber operator and its extrapolation both reduce
/// to the projection onto the half-space `⟨a, x⟩ ≤ 2`.
pub fn rank_one_halfspace() -> ProblemInstance {
    let a_vec = DVector::from_vec(vec![3.0, 4.0]);
    let a = LinearMap::with_norm(DMatrix::from_row_slice(1, 2, &[3.0, 4.0]), 5.0).unwrap();
    let c = ConvexSet::halfspace(a_vec, 2.0).unwrap();
    let q = ConvexSet::halfspace(DVector::from_vec(vec![1.0]), 2.0).unwrap();
    ProblemInstance::new(
        "rank-one half-space",
        a,
        Some(c),
        Target::Set(q),
        Some(DVector::zeros(2)),
    )
    .unwrap()
}

/// `Q = {b}`: the split problem becomes the linear system `Ax = b` with
/// solution `(1, 1)`.
pub fn linear_system() -> ProblemInstance {
    let a = LinearMap::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let q = ConvexSet::point(DVector::from_vec(vec![1.0, 2.0])).unwrap();
    ProblemInstance::new(
        "linear system",
        a,
        None,
        Target::Set(q),
        Some(DVector::from_vec(vec![1.0, 1.0])),
    )
    .unwrap()
}

/// `Q = b − R₊³`: the split problem becomes the inequality system `Ax ≤ b`,
/// feasible at the origin with unit slack.
pub fn linear_inequalities() -> ProblemInstance {
    let a = LinearMap::from_rows(&[vec![1.0, 2.0], vec![-1.0, 1.0], vec![2.0, -1.0]]).unwrap();
    let q = ConvexSet::orthant_leq(DVector::from_vec(vec![1.0, 1.0, 1.0])).unwrap();
    ProblemInstance::new(
        "linear inequalities",
        a,
        None,
        Target::Set(q),
        Some(DVector::zeros(2)),
    )
    .unwrap()
}

/// `Q` is the zero-sublevel set of `f(y) = max(y₁ − 1, y₂ − 1)`, handled by
/// the subgradient projection with the default unit relaxation.
pub fn sublevel_feasibility() -> ProblemInstance {
    let a = LinearMap::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
    let f = ConvexFunction::max_affine(vec![
        (DVector::from_vec(vec![1.0, 0.0]), 1.0),
        (DVector::from_vec(vec![0.0, 1.0]), 1.0),
    ])
    .unwrap();
    ProblemInstance::new(
        "max-affine sublevel set",
        a,
        None,
        Target::Sublevel { f, lambda: 1.0 },
        Some(DVector::zeros(2)),
    )
    .unwrap()
}

/// The four built-in instances with their canonical file names.
pub fn builtin_instances() -> Vec<(&'static str, ProblemInstance)> {
    vec![
        ("rank_one.json", rank_one_halfspace()),
        ("linear_system.json", linear_system()),
        ("linear_inequalities.json", linear_inequalities()),
        ("sublevel.json", sublevel_feasibility()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate_and_round_trip() {
        for (name, instance) in builtin_instances() {
            let json = instance.to_json().unwrap();
            let reloaded = ProblemInstance::from_json(&json).unwrap();
            assert_eq!(reloaded.label, instance.label, "{name}");
            assert_eq!(reloaded.a.matrix(), instance.a.matrix());
            assert_eq!(reloaded.a.supplied_norm(), instance.a.supplied_norm());
        }
    }

    #[test]
    fn rank_one_instance_has_one_dimensional_codomain() {
        let inst = rank_one_halfspace();
        assert_eq!(inst.a.codomain_dim(), 1);
        assert_eq!(inst.a.supplied_norm(), Some(5.0));
    }

    #[test]
    fn inequality_instance_parses_from_literal_json() {
        let text = r#"{
            "label": "hand-written",
            "A": [[1.0, 2.0], [-1.0, 1.0]],
            "Q": {"type": "orthant_leq", "b": [1.0, 1.0]},
            "known_solution": [0.0, 0.0]
        }"#;
        let inst = ProblemInstance::from_json(text).unwrap();
        assert_eq!(inst.a.codomain_dim(), 2);
        assert!(matches!(inst.q, Target::Set(ConvexSet::OrthantLeq { .. })));
    }

    #[test]
    fn halfspace_target_uses_the_tagged_form() {
        let text = r#"{
            "A": [[1.0, 0.0]],
            "Q": {"type": "halfspace", "a": [1.0], "beta": 0.0}
        }"#;
        let inst = ProblemInstance::from_json(text).unwrap();
        assert_eq!(inst.q.dim(), 1);
    }

    #[test]
    fn mismatched_dimensions_name_the_field() {
        let text = r#"{
            "A": [[1.0, 0.0], [0.0, 1.0]],
            "C": {"type": "ball", "center": [0.0, 0.0, 0.0], "radius": 1.0},
            "Q": {"type": "whole_space", "dim": 2}
        }"#;
        let err = ProblemInstance::from_json(text).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains('C') && msg.contains('3') && msg.contains('2'),
            "{msg}"
        );
    }

    #[test]
    fn bogus_known_solutions_are_rejected() {
        let text = r#"{
            "A": [[1.0, 0.0]],
            "Q": {"type": "halfspace", "a": [1.0], "beta": 0.0},
            "known_solution": [5.0, 0.0]
        }"#;
        let err = ProblemInstance::from_json(text).unwrap_err();
        assert!(err.to_string().contains("known_solution"));
    }

    #[test]
    fn sublevel_lambda_defaults_to_one() {
        let text = r#"{
            "A": [[1.0, 0.0], [0.0, 1.0]],
            "Q": {"type": "sublevel_max_affine", "rows": [{"a": [1.0, 0.0], "b": 1.0}]}
        }"#;
        let inst = ProblemInstance::from_json(text).unwrap();
        match inst.q {
            Target::Sublevel { lambda, .. } => assert_eq!(lambda, 1.0),
            _ => panic!("expected a sublevel target"),
        }
    }

    #[test]
    fn sublevel_on_the_c_side_is_rejected() {
        let text = r#"{
            "A": [[1.0]],
            "C": {"type": "sublevel_max_affine", "rows": [{"a": [1.0], "b": 0.0}]},
            "Q": {"type": "whole_space", "dim": 1}
        }"#;
        let err = ProblemInstance::from_json(text).unwrap_err();
        assert!(err.to_string().contains("only supported on the Q side"));
    }

    #[test]
    fn parse_errors_carry_position_context() {
        let err = ProblemInstance::from_json("{ not json").unwrap_err();
        assert!(err.to_string().contains("line"));
    }
}
