//! The composed iterative process `x^{k+1} = U_k V_k x^k`, where `V_k` is the
//! extrapolated Landweber-type step built from the relaxation `T_{λ_k}` and
//! `U_k = U_{μ_k}`, plus an orbit runner for iterating a single operator with
//! the same trace schema.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::landweber::{self, ExtrapolationStep};
use crate::linops::LinearMap;
use crate::operators::FixedPointOperator;
use crate::projections::ConvexSet;

/// A relaxation-parameter schedule, evaluated per iteration index.
#[derive(Clone)]
pub enum Schedule {
    Constant(f64),
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl Schedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::Custom(f) => f(k),
        }
    }
}

impl std::fmt::Debug for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Schedule::Constant(v) => write!(f, "Constant({v})"),
            Schedule::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Solver configuration. Relaxation parameters must stay inside the band
/// `[ε, 1−ε]`; the band is checked at every evaluated index.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub lambda: Schedule,
    pub mu: Schedule,
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub fix_tol: f64,
    /// Record every `stride`-th iterate (the final iterate is always kept).
    pub stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            lambda: Schedule::Constant(0.5),
            mu: Schedule::Constant(0.5),
            max_iterations: 100_000,
            residual_tol: 1e-10,
            fix_tol: landweber::DEFAULT_FIX_TOL,
            stride: 1,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::parameter(
                "epsilon",
                format!("must lie in (0, 0.5), got {}", self.epsilon),
            ));
        }
        if !self.residual_tol.is_finite() || self.residual_tol <= 0.0 {
            return Err(Error::parameter(
                "residual_tol",
                "must be positive".to_string(),
            ));
        }
        if !self.fix_tol.is_finite() || self.fix_tol <= 0.0 {
            return Err(Error::parameter("fix_tol", "must be positive".to_string()));
        }
        if self.stride == 0 {
            return Err(Error::parameter("stride", "must be at least 1".to_string()));
        }
        Ok(())
    }

    fn banded(&self, name: &'static str, value: f64, k: usize) -> Result<f64> {
        let (lo, hi) = (self.epsilon, 1.0 - self.epsilon);
        if value < lo || value > hi {
            return Err(Error::parameter(
                name,
                format!("schedule value {value} at iteration {k} is outside [{lo}, {hi}]"),
            ));
        }
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIterations,
    DivergedNonFinite,
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverStatus::Converged => write!(f, "converged"),
            SolverStatus::MaxIterations => write!(f, "max_iterations"),
            SolverStatus::DivergedNonFinite => write!(f, "diverged_nonfinite"),
        }
    }
}

/// One recorded iteration. `step_norm` is the length of the step that
/// produced this iterate (zero for the starting point), so the final row's
/// step norm is the last step actually taken.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub step_norm: f64,
    /// `‖T(Ax^k) − Ax^k‖` (through `T`'s residual rule).
    pub outer_residual: f64,
    /// Fixed-point residual of `U` at `x^k` (zero when no `U` is involved).
    pub inner_residual: f64,
    /// `½·outer²` when the inner operator's residual is an exact distance
    /// (i.e. `T` is a projection), empty otherwise.
    pub proximity: Option<f64>,
}

/// Configuration echo plus the recorded iterates and residuals of a run.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub iterates: Vec<DVector<f64>>,
    pub trace: Vec<TraceRow>,
    pub status: SolverStatus,
    /// Total steps performed (not the number of recorded rows).
    pub iterations: usize,
}

impl SolverRun {
    pub fn converged(&self) -> bool {
        self.status == SolverStatus::Converged
    }

    pub fn final_iterate(&self) -> &DVector<f64> {
        self.iterates
            .last()
            .expect("runs record at least the starting point")
    }

    pub fn final_row(&self) -> &TraceRow {
        self.trace
            .last()
            .expect("runs record at least the starting point")
    }

    /// Writes the trace as CSV with the fixed header
    /// `iter,step_norm,outer_residual,inner_residual,proximity`.
    pub fn write_trace<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,step_norm,outer_residual,inner_residual,proximity")?;
        for row in &self.trace {
            match row.proximity {
                Some(p) => writeln!(
                    w,
                    "{},{},{},{},{}",
                    row.iter, row.step_norm, row.outer_residual, row.inner_residual, p
                )?,
                None => writeln!(
                    w,
                    "{},{},{},{},",
                    row.iter, row.step_norm, row.outer_residual, row.inner_residual
                )?,
            }
        }
        Ok(())
    }
}

/// The relaxation constants of the composed iteration: a λ-relaxation of a
/// quasi-nonexpansive operator is `(1−λ)/λ`-SQNE for `λ ∈ (0, 1)`, and the
/// composition constant is the harmonic combination.
pub fn relaxation_constants(lambda: f64, mu: f64) -> Result<(f64, f64, f64)> {
    for (name, v) in [("lambda", lambda), ("mu", mu)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::parameter(
                name,
                format!("must lie in (0, 1), got {v}"),
            ));
        }
    }
    let alpha = (1.0 - lambda) / lambda;
    let beta = (1.0 - mu) / mu;
    let gamma = 1.0 / (1.0 / alpha + 1.0 / beta);
    Ok((alpha, beta, gamma))
}

/// Runs `x^{k+1} = U_{μ_k}(V_k x^k)` from `x0`, where `V_k` is the
/// extrapolated Landweber-type step built from `T_{λ_k}`.
///
/// Both operators must carry quasi-nonexpansiveness claims; the iteration
/// assumes (and cannot check) that `Fix U ∩ A⁻¹(Fix T)` is nonempty. It stops
/// when both the outer residual `‖T(Ax^k) − Ax^k‖` and the fixed-point
/// residual of `U` fall to `residual_tol`, or at `max_iterations`. For
/// inconsistent problems the run reports `MaxIterations` with the residual
/// plateau rather than erroring.
pub fn solve(
    a: &LinearMap,
    t: &FixedPointOperator,
    u: &FixedPointOperator,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    cfg.validate()?;
    if t.dim() != a.codomain_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.codomain_dim(),
            actual: t.dim(),
        });
    }
    if u.dim() != a.domain_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.domain_dim(),
            actual: u.dim(),
        });
    }
    if t.sqne_claim().is_none() || u.sqne_claim().is_none() {
        return Err(Error::parameter(
            "operators",
            "both T and U must carry quasi-nonexpansiveness claims".to_string(),
        ));
    }
    let prox = t.has_exact_distance_residual();
    run_loop(
        |x| t.fix_residual(&a.apply(x)?),
        |x| u.fix_residual(x),
        prox,
        |k, x| {
            let lam = cfg.banded("lambda", cfg.lambda.at(k), k)?;
            let mu = cfg.banded("mu", cfg.mu.at(k), k)?;
            let ax = a.apply(x)?;
            let tax = t.apply(&ax)?;
            let relaxed = &ax + (tax - &ax) * lam;
            let v_x = match landweber::extrapolation_parts(a, &ax, &relaxed, cfg.fix_tol)? {
                ExtrapolationStep::Fixed => x.clone(),
                ExtrapolationStep::Move { sigma, direction } => x + direction * sigma,
            };
            let u_vx = u.apply(&v_x)?;
            Ok(&v_x + (u_vx - &v_x) * mu)
        },
        x0,
        cfg,
    )
}

/// Iterates a single operator `x^{k+1} = S x^k`, reporting the same trace
/// schema as [`solve`]: the outer residual is evaluated through `T` at `Ax`,
/// the inner residual is the distance to `C` when a constraint set is given.
pub fn orbit(
    a: &LinearMap,
    t: &FixedPointOperator,
    c: Option<&ConvexSet>,
    step: &FixedPointOperator,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    cfg.validate()?;
    if t.dim() != a.codomain_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.codomain_dim(),
            actual: t.dim(),
        });
    }
    if step.dim() != a.domain_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.domain_dim(),
            actual: step.dim(),
        });
    }
    let prox = t.has_exact_distance_residual();
    run_loop(
        |x| t.fix_residual(&a.apply(x)?),
        |x| match c {
            Some(set) => set.distance(x),
            None => Ok(0.0),
        },
        prox,
        |_, x| step.apply(x),
        x0,
        cfg,
    )
}

fn run_loop(
    outer: impl Fn(&DVector<f64>) -> Result<f64>,
    inner: impl Fn(&DVector<f64>) -> Result<f64>,
    record_proximity: bool,
    mut step: impl FnMut(usize, &DVector<f64>) -> Result<DVector<f64>>,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "starting point",
        });
    }
    let mut x = x0.clone();
    let mut iterates = Vec::new();
    let mut trace = Vec::new();
    let mut step_norm = 0.0;
    let mut k = 0usize;
    let status = loop {
        let outer_r = outer(&x)?;
        let inner_r = inner(&x)?;
        let converged = outer_r.max(inner_r) <= cfg.residual_tol;
        let exhausted = k >= cfg.max_iterations;
        if k.is_multiple_of(cfg.stride) || converged || exhausted {
            iterates.push(x.clone());
            trace.push(TraceRow {
                iter: k,
                step_norm,
                outer_residual: outer_r,
                inner_residual: inner_r,
                proximity: record_proximity.then_some(0.5 * outer_r * outer_r),
            });
        }
        if converged {
            break SolverStatus::Converged;
        }
        if exhausted {
            break SolverStatus::MaxIterations;
        }
        let next = step(k, &x)?;
        if !next.iter().all(|v| v.is_finite()) {
            if trace.last().map(|r| r.iter) != Some(k) {
                iterates.push(x.clone());
                trace.push(TraceRow {
                    iter: k,
                    step_norm,
                    outer_residual: outer_r,
                    inner_residual: inner_r,
                    proximity: record_proximity.then_some(0.5 * outer_r * outer_r),
                });
            }
            break SolverStatus::DivergedNonFinite;
        }
        step_norm = (&next - &x).norm();
        x = next;
        k += 1;
    };
    Ok(SolverRun {
        iterates,
        trace,
        status,
        iterations: k,
    })
}
