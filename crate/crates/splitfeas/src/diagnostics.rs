//! Empirical certification of operator properties: nonexpansiveness, firm
//! nonexpansiveness, SQNE and cutter inequalities, asymptotic regularity,
//! and the approximate-shrinking probe.
//!
//! Every certifier samples a deterministic point cloud and reports the most
//! violated slack of the quoted inequality. A passing report is evidence,
//! not proof; a failing report carries concrete witnesses that re-evaluate
//! to violations on demand.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::FixedPointOperator;
use crate::rng::ball_point;

/// Default sample count for certification clouds.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Default sampling radius.
pub const DEFAULT_RADIUS: f64 = 10.0;
/// Default sampling seed.
pub const DEFAULT_SEED: u64 = 42;
/// Default slack tolerance for inequality margins.
pub const DEFAULT_MARGIN_TOL: f64 = 1e-9;

/// The certified property, with its parameters where the inequality has any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Property {
    Nonexpansive,
    FirmlyNonexpansive,
    Sqne { alpha: f64 },
    Cutter,
    RelaxedCutter { lambda: f64 },
    AsymptoticRegularity,
    ApproximateShrinking { eta: f64 },
}

impl std::fmt::Display for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Property::Nonexpansive => write!(f, "NE"),
            Property::FirmlyNonexpansive => write!(f, "FNE"),
            Property::Sqne { alpha } => write!(f, "SQNE(alpha={alpha})"),
            Property::Cutter => write!(f, "cutter"),
            Property::RelaxedCutter { lambda } => write!(f, "rel-cutter(lambda={lambda})"),
            Property::AsymptoticRegularity => write!(f, "AR"),
            Property::ApproximateShrinking { eta } => write!(f, "AS(eta={eta})"),
        }
    }
}

/// A deterministic cloud of sample points in a ball, with optional known
/// fixed points for the certifiers that quantify over `Fix S`.
#[derive(Debug, Clone)]
pub struct SampleCloud {
    pub dimension: usize,
    pub count: usize,
    pub radius: f64,
    pub seed: u64,
    pub fixed_points: Vec<DVector<f64>>,
}

impl SampleCloud {
    pub fn new(dimension: usize, count: usize, radius: f64, seed: u64) -> Self {
        Self {
            dimension,
            count,
            radius,
            seed,
            fixed_points: Vec::new(),
        }
    }

    /// Cloud with the default count, radius and seed.
    pub fn standard(dimension: usize) -> Self {
        Self::new(dimension, DEFAULT_SAMPLES, DEFAULT_RADIUS, DEFAULT_SEED)
    }

    pub fn with_fixed_points(mut self, fixed_points: Vec<DVector<f64>>) -> Self {
        self.fixed_points = fixed_points;
        self
    }

    /// The sample points; generation is a pure function of the seed.
    pub fn points(&self) -> Vec<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| ball_point(&mut rng, self.dimension, self.radius))
            .collect()
    }

    /// `count` sample pairs drawn from the same deterministic stream.
    pub fn pairs(&self) -> Vec<(DVector<f64>, DVector<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| {
                let x = ball_point(&mut rng, self.dimension, self.radius);
                let y = ball_point(&mut rng, self.dimension, self.radius);
                (x, y)
            })
            .collect()
    }
}

/// A sample at which the inequality came closest to (or past) violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub index: usize,
    pub margin: f64,
    pub x: DVector<f64>,
    pub y: Option<DVector<f64>>,
    pub z: Option<DVector<f64>>,
}

/// Outcome of an empirical certification.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub property: Property,
    /// Number of inequality evaluations (pairs, or samples × fixed points).
    pub samples: usize,
    pub tolerance: f64,
    /// Most violated slack; positive means the inequality held with room.
    /// For the AS probe this is the estimated residual threshold γ.
    pub worst_margin: f64,
    /// Up to ten worst samples, ordered by margin then sample index.
    pub witnesses: Vec<Witness>,
    pub pass: bool,
}

/// Machine-readable summary of a report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRecord {
    pub property: String,
    pub samples: usize,
    pub tolerance: f64,
    pub worst_margin: f64,
    pub verdict: &'static str,
}

impl PropertyReport {
    pub fn record(&self) -> ReportRecord {
        ReportRecord {
            property: self.property.to_string(),
            samples: self.samples,
            tolerance: self.tolerance,
            worst_margin: self.worst_margin,
            verdict: if self.pass { "pass" } else { "fail" },
        }
    }
}

impl std::fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "property     : {}", self.property)?;
        writeln!(f, "samples      : {}", self.samples)?;
        writeln!(f, "tolerance    : {:e}", self.tolerance)?;
        writeln!(f, "worst margin : {:e}", self.worst_margin)?;
        writeln!(
            f,
            "verdict      : {} (empirical, not a proof)",
            if self.pass { "PASS" } else { "FAIL" }
        )?;
        if !self.witnesses.is_empty() {
            writeln!(f, "worst samples:")?;
            for w in &self.witnesses {
                write!(
                    f,
                    "  #{:<5} margin {:+.3e}  x = {:?}",
                    w.index,
                    w.margin,
                    w.x.as_slice()
                )?;
                if let Some(y) = &w.y {
                    write!(f, "  y = {:?}", y.as_slice())?;
                }
                if let Some(z) = &w.z {
                    write!(f, "  z = {:?}", z.as_slice())?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Accumulates margins and keeps the ten worst witnesses, breaking margin
/// ties by the lower sample index.
struct MarginTracker {
    worst: f64,
    samples: usize,
    witnesses: Vec<Witness>,
}

impl MarginTracker {
    fn new() -> Self {
        Self {
            worst: f64::INFINITY,
            samples: 0,
            witnesses: Vec::new(),
        }
    }

    fn push(&mut self, w: Witness) {
        self.samples += 1;
        if w.margin < self.worst {
            self.worst = w.margin;
        }
        self.witnesses.push(w);
        if self.witnesses.len() > 64 {
            self.shrink(32);
        }
    }

    fn shrink(&mut self, keep: usize) {
        self.witnesses
            .sort_by(|a, b| a.margin.total_cmp(&b.margin).then(a.index.cmp(&b.index)));
        self.witnesses.truncate(keep);
    }

    fn finish(mut self, property: Property, tolerance: f64) -> PropertyReport {
        self.shrink(10);
        let worst = if self.samples == 0 {
            f64::INFINITY
        } else {
            self.worst
        };
        PropertyReport {
            property,
            samples: self.samples,
            tolerance,
            worst_margin: worst,
            witnesses: self.witnesses,
            pass: worst >= -tolerance,
        }
    }
}

fn check_margin_inputs(tol: f64) -> Result<()> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::parameter(
            "tol",
            format!("must be a nonnegative finite value, got {tol}"),
        ));
    }
    Ok(())
}

/// Nonexpansiveness: `‖Sx − Sy‖ ≤ ‖x − y‖` over sampled pairs.
pub fn certify_ne(
    op: &FixedPointOperator,
    cloud: &SampleCloud,
    tol: f64,
) -> Result<PropertyReport> {
    check_margin_inputs(tol)?;
    let mut tracker = MarginTracker::new();
    for (index, (x, y)) in cloud.pairs().into_iter().enumerate() {
        let sx = op.apply(&x)?;
        let sy = op.apply(&y)?;
        let margin = (&x - &y).norm() - (sx - sy).norm();
        tracker.push(Witness {
            index,
            margin,
            x,
            y: Some(y),
            z: None,
        });
    }
    Ok(tracker.finish(Property::Nonexpansive, tol))
}

/// Firm nonexpansiveness: `⟨Sx − Sy, x − y⟩ ≥ ‖Sx − Sy‖²` over sampled pairs.
pub fn certify_fne(
    op: &FixedPointOperator,
    cloud: &SampleCloud,
    tol: f64,
) -> Result<PropertyReport> {
    check_margin_inputs(tol)?;
    let mut tracker = MarginTracker::new();
    for (index, (x, y)) in cloud.pairs().into_iter().enumerate() {
        let d = op.apply(&x)? - op.apply(&y)?;
        let margin = d.dot(&(&x - &y)) - d.norm_squared();
        tracker.push(Witness {
            index,
            margin,
            x,
            y: Some(y),
            z: None,
        });
    }
    Ok(tracker.finish(Property::FirmlyNonexpansive, tol))
}

fn validated_fixed_points(
    op: &FixedPointOperator,
    cloud: &SampleCloud,
    tol: f64,
) -> Result<Vec<DVector<f64>>> {
    if cloud.fixed_points.is_empty() {
        return Err(Error::parameter(
            "fixed_points",
            "this certifier quantifies over Fix S and needs at least one known fixed point"
                .to_string(),
        ));
    }
    for z in &cloud.fixed_points {
        let residual = op.fix_residual(z)?;
        if residual > tol {
            return Err(Error::InvalidFixedPoint { residual, tol });
        }
    }
    Ok(cloud.fixed_points.clone())
}

/// α-strong quasi-nonexpansiveness:
/// `‖Sx − z‖² ≤ ‖x − z‖² − α‖Sx − x‖²` over samples × fixed points.
pub fn certify_sqne(
    op: &FixedPointOperator,
    alpha: f64,
    cloud: &SampleCloud,
    tol: f64,
) -> Result<PropertyReport> {
    check_margin_inputs(tol)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::parameter(
            "alpha",
            format!("must be nonnegative, got {alpha}"),
        ));
    }
    let fixed = validated_fixed_points(op, cloud, tol)?;
    let mut tracker = MarginTracker::new();
    for (i, x) in cloud.points().into_iter().enumerate() {
        let sx = op.apply(&x)?;
        let step = (&sx - &x).norm_squared();
        for (j, z) in fixed.iter().enumerate() {
            let margin = (&x - z).norm_squared() - alpha * step - (&sx - z).norm_squared();
            tracker.push(Witness {
                index: i * fixed.len() + j,
                margin,
                x: x.clone(),
                y: None,
                z: Some(z.clone()),
            });
        }
    }
    Ok(tracker.finish(Property::Sqne { alpha }, tol))
}

/// Cutter inequality: `⟨x − Sx, z − Sx⟩ ≤ 0` over samples × fixed points.
pub fn certify_cutter(
    op: &FixedPointOperator,
    cloud: &SampleCloud,
    tol: f64,
) -> Result<PropertyReport> {
    check_margin_inputs(tol)?;
    let fixed = validated_fixed_points(op, cloud, tol)?;
    let mut tracker = MarginTracker::new();
    for (i, x) in cloud.points().into_iter().enumerate() {
        let sx = op.apply(&x)?;
        let back = &x - &sx;
        for (j, z) in fixed.iter().enumerate() {
            let margin = -back.dot(&(z - &sx));
            tracker.push(Witness {
                index: i * fixed.len() + j,
                margin,
                x: x.clone(),
                y: None,
                z: Some(z.clone()),
            });
        }
    }
    Ok(tracker.finish(Property::Cutter, tol))
}

/// The relaxed-cutter form of the SQNE inequality:
/// `λ⟨Sx − x, z − x⟩ ≥ ‖Sx − x‖²` with `λ = 2/(α + 1)`; certifying it at that
/// λ is equivalent to certifying α-SQNE.
pub fn certify_rel_cutter(
    op: &FixedPointOperator,
    lambda: f64,
    cloud: &SampleCloud,
    tol: f64,
) -> Result<PropertyReport> {
    check_margin_inputs(tol)?;
    if !(lambda > 0.0 && lambda <= 2.0) {
        return Err(Error::parameter(
            "lambda",
            format!("must lie in (0, 2], got {lambda}"),
        ));
    }
    let fixed = validated_fixed_points(op, cloud, tol)?;
    let mut tracker = MarginTracker::new();
    for (i, x) in cloud.points().into_iter().enumerate() {
        let sx = op.apply(&x)?;
        let step = &sx - &x;
        let step_sq = step.norm_squared();
        for (j, z) in fixed.iter().enumerate() {
            let margin = lambda * step.dot(&(z - &x)) - step_sq;
            tracker.push(Witness {
                index: i * fixed.len() + j,
                margin,
                x: x.clone(),
                y: None,
                z: Some(z.clone()),
            });
        }
    }
    Ok(tracker.finish(Property::RelaxedCutter { lambda }, tol))
}

/// The orbit step norms `‖S^{k+1}x⁰ − S^k x⁰‖` for `k = 0 .. k_max−1`.
pub fn measure_ar(op: &FixedPointOperator, x0: &DVector<f64>, k_max: usize) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(Error::parameter("k_max", "must be at least 1".to_string()));
    }
    let mut steps = Vec::with_capacity(k_max);
    let mut x = x0.clone();
    for k in 0..k_max {
        let next = op.apply(&x)?;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteOrbit { index: k });
        }
        steps.push((&next - &x).norm());
        x = next;
    }
    Ok(steps)
}

/// Asymptotic-regularity report: runs the orbit for `k_max` steps and passes
/// when the final step norm is at or below `threshold`. The margin is
/// `threshold − final step norm`.
pub fn certify_ar(
    op: &FixedPointOperator,
    x0: &DVector<f64>,
    k_max: usize,
    threshold: f64,
) -> Result<PropertyReport> {
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(Error::parameter(
            "threshold",
            "must be positive".to_string(),
        ));
    }
    let steps = measure_ar(op, x0, k_max)?;
    let last = *steps.last().expect("k_max >= 1");
    let margin = threshold - last;
    Ok(PropertyReport {
        property: Property::AsymptoticRegularity,
        samples: k_max,
        tolerance: 0.0,
        worst_margin: margin,
        witnesses: vec![Witness {
            index: k_max - 1,
            margin,
            x: x0.clone(),
            y: None,
            z: None,
        }],
        pass: margin >= 0.0,
    })
}

/// Approximate-shrinking probe: estimates the largest residual threshold γ
/// such that every sample with `‖Sx − x‖ < γ` has `d(x, Fix S) < η`, where
/// the distance comes from `solution_oracle` (exact or an upper bound).
///
/// The report's `worst_margin` is the estimated γ (infinite when no sample
/// violates the distance bound at all); the verdict passes when γ > 0.
/// Witnesses are the violating samples with the smallest residuals.
pub fn probe_as(
    op: &FixedPointOperator,
    cloud: &SampleCloud,
    eta: f64,
    solution_oracle: impl Fn(&DVector<f64>) -> Result<f64>,
) -> Result<PropertyReport> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::parameter(
            "eta",
            format!("must be positive, got {eta}"),
        ));
    }
    let points = cloud.points();
    let mut gamma = f64::INFINITY;
    let mut violators: Vec<Witness> = Vec::new();
    for (index, x) in points.into_iter().enumerate() {
        let residual = op.fix_residual(&x)?;
        let distance = solution_oracle(&x)?;
        if distance >= eta {
            if residual < gamma {
                gamma = residual;
            }
            violators.push(Witness {
                index,
                margin: residual,
                x,
                y: None,
                z: None,
            });
        }
    }
    violators.sort_by(|a, b| a.margin.total_cmp(&b.margin).then(a.index.cmp(&b.index)));
    violators.truncate(10);
    Ok(PropertyReport {
        property: Property::ApproximateShrinking { eta },
        samples: cloud.count,
        tolerance: 0.0,
        worst_margin: gamma,
        witnesses: violators,
        pass: gamma > 0.0,
    })
}

/// Exact Euclidean distance from `x` to the polyhedron `{z : Gz ≤ h}`,
/// computed by enumerating candidate active sets and checking the
/// Karush-Kuhn-Tucker conditions of the projection problem. Intended as a
/// small-instance oracle; rejects systems with more than 16 rows.
pub fn polyhedral_distance(g: &DMatrix<f64>, h: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    let m = g.nrows();
    let n = g.ncols();
    if h.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: h.len(),
        });
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    if m > 16 {
        return Err(Error::parameter(
            "rows",
            format!("enumeration oracle is limited to 16 rows, got {m}"),
        ));
    }
    let scale = 1.0 + x.norm() + h.norm();
    let feas_tol = 1e-9 * scale;
    let mut best: Option<f64> = None;
    for mask in 0u32..(1u32 << m) {
        let rows: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let z = if rows.is_empty() {
            x.clone()
        } else {
            let k = rows.len();
            let gs = DMatrix::from_fn(k, n, |r, c| g[(rows[r], c)]);
            let rhs = DVector::from_fn(k, |r, _| gs.row(r).transpose().dot(x) - h[rows[r]]);
            let gram = &gs * gs.transpose();
            let Some(nu) = gram.lu().solve(&rhs) else {
                continue; // dependent active rows; a smaller subset covers this case
            };
            if nu.iter().any(|v| *v < -1e-10 * scale) {
                continue;
            }
            x - gs.transpose() * nu
        };
        let violation = (g * &z - h).iter().fold(0.0_f64, |acc, v| acc.max(*v));
        if violation <= feas_tol {
            let dist = (&z - x).norm();
            best = Some(best.map_or(dist, |b: f64| b.min(dist)));
        }
    }
    best.ok_or_else(|| {
        Error::parameter(
            "polyhedron",
            "no feasible projection found; the system may be empty".to_string(),
        )
    })
}

/// Exact distance from `x` to the affine set `{z : Gz = h}` via a min-norm
/// correction. Errors when the system is inconsistent.
pub fn affine_distance(g: &DMatrix<f64>, h: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    if h.len() != g.nrows() {
        return Err(Error::DimensionMismatch {
            expected: g.nrows(),
            actual: h.len(),
        });
    }
    if x.len() != g.ncols() {
        return Err(Error::DimensionMismatch {
            expected: g.ncols(),
            actual: x.len(),
        });
    }
    let residual = g * x - h;
    let svd = g.clone().svd(true, true);
    let correction = svd
        .solve(&residual, 1e-12)
        .map_err(|e| Error::parameter("system", e.to_string()))?;
    let z = x - &correction;
    if (g * &z - h).norm() > 1e-8 * (1.0 + h.norm() + x.norm()) {
        return Err(Error::parameter(
            "system",
            "Gz = h has no solution".to_string(),
        ));
    }
    Ok(correction.norm())
}
