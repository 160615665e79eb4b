//! Batch front end: build the requested operator variant for an instance,
//! run solves with trace capture, and run property certifications. The CLI
//! binary is a thin argument-parsing layer over this module.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::diagnostics::{self, PropertyReport, SampleCloud};
use crate::error::{Error, Result};
use crate::instance::{ProblemInstance, Target};
use crate::landweber::{self, LandweberSpec, LandweberVariant};
use crate::operators::FixedPointOperator;
use crate::projections::ConvexSet;
use crate::rng::ball_point;
use crate::solver::{self, Schedule, SolverConfig, SolverRun, SolverStatus};

/// Which operator drives a run or certification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Plain,
    Projected,
    ProjectedRelaxed,
    Extrapolated,
    /// The composed iteration `x^{k+1} = U_k V_k x^k`; `U = P_C` when the
    /// instance has a constraint set, the identity otherwise.
    Composed,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Variant::Plain => "plain",
            Variant::Projected => "projected",
            Variant::ProjectedRelaxed => "projected_relaxed",
            Variant::Extrapolated => "extrapolated",
            Variant::Composed => "composed",
        };
        write!(f, "{name}")
    }
}

/// Options shared by `run` and the solve subcommand; one field per exposed
/// parameter.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub variant: Variant,
    /// Relaxation of `T` (the constant λ_k schedule for composed runs, the
    /// correction relaxation for `projected_relaxed`).
    pub lambda: f64,
    /// Constant μ_k schedule for composed runs.
    pub mu: f64,
    pub epsilon: f64,
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub stride: usize,
    /// Seeds the starting-point draw (a point of the radius-10 ball).
    pub seed: u64,
    pub fix_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Composed,
            lambda: 0.5,
            mu: 0.5,
            epsilon: 0.05,
            residual_tol: 1e-10,
            max_iterations: 100_000,
            stride: 1,
            seed: diagnostics::DEFAULT_SEED,
            fix_tol: landweber::DEFAULT_FIX_TOL,
        }
    }
}

impl RunOptions {
    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            epsilon: self.epsilon,
            lambda: Schedule::Constant(self.lambda),
            mu: Schedule::Constant(self.mu),
            max_iterations: self.max_iterations,
            residual_tol: self.residual_tol,
            fix_tol: self.fix_tol,
            stride: self.stride,
        }
    }
}

/// Outcome summary of one run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub label: String,
    pub variant: Variant,
    pub status: SolverStatus,
    pub iterations: usize,
    pub final_outer_residual: f64,
    pub final_inner_residual: f64,
    pub final_step_norm: f64,
    pub wall_time_s: f64,
    pub distance_to_known_solution: Option<f64>,
    pub trace_path: Option<PathBuf>,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] variant={} status={} iterations={} outer={:.3e} inner={:.3e} step={:.3e} time={:.3}s",
            self.label,
            self.variant,
            self.status,
            self.iterations,
            self.final_outer_residual,
            self.final_inner_residual,
            self.final_step_norm,
            self.wall_time_s,
        )?;
        if let Some(d) = self.distance_to_known_solution {
            write!(f, " dist_to_known={d:.3e}")?;
        }
        if let Some(p) = &self.trace_path {
            write!(f, " trace={}", p.display())?;
        }
        Ok(())
    }
}

/// Builds the operator for a variant. `lambda` is consumed only by
/// `projected_relaxed`; the composed variant yields `U ∘ V_τ`.
pub fn build_operator(
    instance: &ProblemInstance,
    variant: Variant,
    lambda: f64,
    fix_tol: f64,
) -> Result<FixedPointOperator> {
    let t = instance.target_operator()?;
    let spec = |v: LandweberVariant| -> Result<LandweberSpec> {
        let mut s = LandweberSpec::new(instance.a.clone(), t.clone(), v)?.with_fix_tol(fix_tol)?;
        if let Some(c) = &instance.c {
            s = s.with_projection(c.clone())?;
        }
        Ok(s)
    };
    match variant {
        Variant::Plain => spec(LandweberVariant::Plain)?.build(),
        Variant::Projected => spec(LandweberVariant::Projected)?.build(),
        Variant::ProjectedRelaxed => spec(LandweberVariant::ProjectedRelaxed { lambda })?.build(),
        Variant::Extrapolated => spec(LandweberVariant::Extrapolated)?.build(),
        Variant::Composed => {
            let v_tau = spec(LandweberVariant::Extrapolated)?.build()?;
            outer_operator(instance).compose(&v_tau)
        }
    }
}

fn outer_operator(instance: &ProblemInstance) -> FixedPointOperator {
    match &instance.c {
        Some(c) => c.operator(),
        None => FixedPointOperator::identity(instance.a.domain_dim()),
    }
}

/// Deterministic starting point for a run: a seeded draw from the
/// radius-10 ball of the domain.
pub fn starting_point(instance: &ProblemInstance, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ball_point(
        &mut rng,
        instance.a.domain_dim(),
        diagnostics::DEFAULT_RADIUS,
    )
}

/// Runs the requested variant on an instance, optionally writing the CSV
/// trace, and reports a summary. Solver errors carry the instance label.
pub fn run(
    instance: &ProblemInstance,
    opts: &RunOptions,
    trace_path: Option<&Path>,
) -> Result<RunSummary> {
    let started = Instant::now();
    let run = execute(instance, opts).map_err(|e| match e {
        Error::InvalidParameter { name, message } => Error::InvalidParameter {
            name,
            message: format!("[{}] {message}", instance.label),
        },
        other => other,
    })?;
    let wall_time_s = started.elapsed().as_secs_f64();
    if let Some(path) = trace_path {
        let file = std::fs::File::create(path)?;
        run.write_trace(std::io::BufWriter::new(file))?;
    }
    let final_row = run.final_row();
    let distance = instance
        .known_solution
        .as_ref()
        .map(|z| (run.final_iterate() - z).norm());
    Ok(RunSummary {
        label: instance.label.clone(),
        variant: opts.variant,
        status: run.status,
        iterations: run.iterations,
        final_outer_residual: final_row.outer_residual,
        final_inner_residual: final_row.inner_residual,
        final_step_norm: final_row.step_norm,
        wall_time_s,
        distance_to_known_solution: distance,
        trace_path: trace_path.map(Path::to_path_buf),
    })
}

fn execute(instance: &ProblemInstance, opts: &RunOptions) -> Result<SolverRun> {
    let t = instance.target_operator()?;
    let x0 = starting_point(instance, opts.seed);
    let cfg = opts.solver_config();
    match opts.variant {
        Variant::Composed => {
            let u = outer_operator(instance);
            solver::solve(&instance.a, &t, &u, &x0, &cfg)
        }
        variant => {
            let op = build_operator(instance, variant, opts.lambda, opts.fix_tol)?;
            let c_for_inner = match variant {
                Variant::Projected | Variant::ProjectedRelaxed => instance.c.as_ref(),
                _ => None,
            };
            solver::orbit(&instance.a, &t, c_for_inner, &op, &x0, &cfg)
        }
    }
}

/// Which property a certification request targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Ne,
    Fne,
    Sqne,
    Cutter,
    RelCutter,
    Ar,
    As,
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub variant: Variant,
    /// Relaxation passed through to `projected_relaxed` operators.
    pub lambda: f64,
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
    /// Slack tolerance on inequality margins.
    pub margin_tol: f64,
    /// SQNE constant; defaults to the built operator's claim.
    pub alpha: Option<f64>,
    /// Relaxed-cutter λ; defaults to `2/(α+1)` for the claimed α.
    pub rc_lambda: Option<f64>,
    /// Distance bound for the approximate-shrinking probe.
    pub eta: f64,
    /// Orbit length and step threshold for asymptotic-regularity reports.
    pub ar_steps: usize,
    pub ar_threshold: f64,
    pub fix_tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Plain,
            lambda: 0.5,
            samples: diagnostics::DEFAULT_SAMPLES,
            radius: diagnostics::DEFAULT_RADIUS,
            seed: diagnostics::DEFAULT_SEED,
            margin_tol: diagnostics::DEFAULT_MARGIN_TOL,
            alpha: None,
            rc_lambda: None,
            eta: 0.1,
            ar_steps: 1000,
            ar_threshold: 1e-6,
            fix_tol: landweber::DEFAULT_FIX_TOL,
        }
    }
}

/// Builds the variant operator for the instance and delegates to the
/// matching certifier.
pub fn certify(
    instance: &ProblemInstance,
    kind: PropertyKind,
    opts: &CertifyOptions,
) -> Result<PropertyReport> {
    let op = build_operator(instance, opts.variant, opts.lambda, opts.fix_tol)?;
    let cloud = SampleCloud::new(
        instance.a.domain_dim(),
        opts.samples,
        opts.radius,
        opts.seed,
    );
    match kind {
        PropertyKind::Ne => diagnostics::certify_ne(&op, &cloud, opts.margin_tol),
        PropertyKind::Fne => diagnostics::certify_fne(&op, &cloud, opts.margin_tol),
        PropertyKind::Sqne => {
            let alpha = opts.alpha.or(op.sqne_claim()).ok_or_else(|| {
                Error::parameter(
                    "alpha",
                    "the operator claims no SQNE constant; pass one explicitly".to_string(),
                )
            })?;
            let cloud = cloud.with_fixed_points(known_fixed_points(instance)?);
            diagnostics::certify_sqne(&op, alpha, &cloud, opts.margin_tol)
        }
        PropertyKind::Cutter => {
            let cloud = cloud.with_fixed_points(known_fixed_points(instance)?);
            diagnostics::certify_cutter(&op, &cloud, opts.margin_tol)
        }
        PropertyKind::RelCutter => {
            let lambda = match opts.rc_lambda {
                Some(l) => l,
                None => {
                    let alpha = opts.alpha.or(op.sqne_claim()).ok_or_else(|| {
                        Error::parameter(
                            "alpha",
                            "need a claimed or explicit constant to derive lambda".to_string(),
                        )
                    })?;
                    2.0 / (alpha + 1.0)
                }
            };
            let cloud = cloud.with_fixed_points(known_fixed_points(instance)?);
            diagnostics::certify_rel_cutter(&op, lambda, &cloud, opts.margin_tol)
        }
        PropertyKind::Ar => {
            let x0 = starting_point(instance, opts.seed);
            diagnostics::certify_ar(&op, &x0, opts.ar_steps, opts.ar_threshold)
        }
        PropertyKind::As => {
            let oracle = solution_distance_oracle(instance, opts.variant)?;
            diagnostics::probe_as(&op, &cloud, opts.eta, oracle)
        }
    }
}

fn known_fixed_points(instance: &ProblemInstance) -> Result<Vec<DVector<f64>>> {
    match &instance.known_solution {
        Some(z) => Ok(vec![z.clone()]),
        None => Err(Error::instance(
            "known_solution",
            "this certification quantifies over fixed points and needs a known solution",
        )),
    }
}

/// Inequality-row description `{x : Gx ≤ h}` of a catalog set, when it has
/// one (equalities become opposing inequality pairs).
fn set_rows(set: &ConvexSet) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = set.dim();
    let eye = DMatrix::<f64>::identity(n, n);
    Ok(match set {
        ConvexSet::Halfspace { normal, offset } => (
            DMatrix::from_fn(1, n, |_, c| normal[c]),
            DVector::from_element(1, *offset),
        ),
        ConvexSet::Hyperplane { normal, offset } => {
            let mut g = DMatrix::zeros(2, n);
            for c in 0..n {
                g[(0, c)] = normal[c];
                g[(1, c)] = -normal[c];
            }
            (g, DVector::from_vec(vec![*offset, -*offset]))
        }
        ConvexSet::Box { lower, upper } => {
            let mut g = DMatrix::zeros(2 * n, n);
            g.view_mut((0, 0), (n, n)).copy_from(&eye);
            g.view_mut((n, 0), (n, n)).copy_from(&(-&eye));
            let mut h = DVector::zeros(2 * n);
            for i in 0..n {
                h[i] = upper[i];
                h[n + i] = -lower[i];
            }
            (g, h)
        }
        ConvexSet::OrthantLeq { bound } => (eye, bound.clone()),
        ConvexSet::Point { point } => {
            let mut g = DMatrix::zeros(2 * n, n);
            g.view_mut((0, 0), (n, n)).copy_from(&eye);
            g.view_mut((n, 0), (n, n)).copy_from(&(-&eye));
            let mut h = DVector::zeros(2 * n);
            for i in 0..n {
                h[i] = point[i];
                h[n + i] = -point[i];
            }
            (g, h)
        }
        ConvexSet::WholeSpace { .. } => (DMatrix::zeros(0, n), DVector::zeros(0)),
        ConvexSet::Ball { .. } => {
            return Err(Error::parameter(
                "oracle",
                "no exact polyhedral distance oracle for ball targets".to_string(),
            ))
        }
    })
}

/// Exact distance oracle to the built operator's fixed-point set, available
/// when that set is a polyhedron: `A⁻¹(Q)` for the plain and extrapolated
/// variants, intersected with `C` for the projected and composed ones.
fn solution_distance_oracle(
    instance: &ProblemInstance,
    variant: Variant,
) -> Result<impl Fn(&DVector<f64>) -> Result<f64>> {
    let q_set = match &instance.q {
        Target::Set(s) => s,
        Target::Sublevel { .. } => {
            return Err(Error::parameter(
                "oracle",
                "no exact distance oracle for sublevel targets".to_string(),
            ))
        }
    };
    let (gq, hq) = set_rows(q_set)?;
    // pull the codomain rows back through A
    let mut blocks: Vec<(DMatrix<f64>, DVector<f64>)> = Vec::new();
    if gq.nrows() > 0 {
        blocks.push((&gq * instance.a.matrix(), hq));
    }
    let uses_c = matches!(
        variant,
        Variant::Projected | Variant::ProjectedRelaxed | Variant::Composed
    );
    if uses_c {
        if let Some(c) = &instance.c {
            let (gc, hc) = set_rows(c)?;
            if gc.nrows() > 0 {
                blocks.push((gc, hc));
            }
        }
    }
    let n = instance.a.domain_dim();
    let total_rows: usize = blocks.iter().map(|(g, _)| g.nrows()).sum();
    let mut g = DMatrix::zeros(total_rows, n);
    let mut h = DVector::zeros(total_rows);
    let mut row = 0;
    for (gb, hb) in blocks {
        g.view_mut((row, 0), (gb.nrows(), n)).copy_from(&gb);
        h.rows_mut(row, hb.len()).copy_from(&hb);
        row += gb.nrows();
    }
    Ok(move |x: &DVector<f64>| {
        if g.nrows() == 0 {
            return Ok(0.0);
        }
        diagnostics::polyhedral_distance(&g, &h, x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{
        builtin_instances, linear_inequalities, linear_system, rank_one_halfspace,
    };

    #[test]
    fn composed_runs_converge_on_all_builtins() {
        for (name, instance) in builtin_instances() {
            let opts = RunOptions {
                residual_tol: 1e-9,
                ..RunOptions::default()
            };
            let summary = run(&instance, &opts, None).unwrap();
            assert_eq!(summary.status, SolverStatus::Converged, "{name}: {summary}");
        }
    }

    #[test]
    fn extrapolated_orbit_on_the_linear_system_reaches_the_solution() {
        let instance = linear_system();
        let opts = RunOptions {
            variant: Variant::Extrapolated,
            residual_tol: 1e-9,
            ..RunOptions::default()
        };
        let summary = run(&instance, &opts, None).unwrap();
        assert_eq!(summary.status, SolverStatus::Converged);
        assert!(summary.distance_to_known_solution.is_some());
    }

    #[test]
    fn trace_file_has_the_fixed_header_and_decreasing_outer_residual() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let instance = linear_system();
        let opts = RunOptions {
            variant: Variant::Extrapolated,
            residual_tol: 1e-8,
            ..RunOptions::default()
        };
        run(&instance, &opts, Some(&path)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iter,step_norm,outer_residual,inner_residual,proximity"
        );
        let rows: Vec<f64> = lines
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        assert!(rows.last().unwrap() <= &1e-8);
        assert!(rows.first().unwrap() > rows.last().unwrap());
    }

    #[test]
    fn projected_variant_requires_a_constraint_set() {
        let instance = linear_system(); // no C
        let err = run(
            &instance,
            &RunOptions {
                variant: Variant::Projected,
                ..RunOptions::default()
            },
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("constraint set"));
    }

    #[test]
    fn certify_fne_passes_on_the_rank_one_instance() {
        let report = certify(
            &rank_one_halfspace(),
            PropertyKind::Fne,
            &CertifyOptions::default(),
        )
        .unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn certify_as_passes_on_the_inequality_instance() {
        let mut opts = CertifyOptions {
            eta: 0.1,
            ..CertifyOptions::default()
        };
        for variant in [Variant::Plain, Variant::Extrapolated] {
            opts.variant = variant;
            let report = certify(&linear_inequalities(), PropertyKind::As, &opts).unwrap();
            assert!(report.pass, "{variant:?}: {report}");
            assert!(report.worst_margin > 0.0);
        }
    }

    #[test]
    fn certify_sqne_uses_the_operator_claim_by_default() {
        let report = certify(
            &linear_inequalities(),
            PropertyKind::Sqne,
            &CertifyOptions {
                variant: Variant::Extrapolated,
                ..CertifyOptions::default()
            },
        )
        .unwrap();
        assert!(report.pass, "{report}");
        assert!(matches!(report.property, diagnostics::Property::Sqne { alpha } if alpha == 1.0));
    }

    #[test]
    fn certify_ne_fails_on_a_doubling_instance_stand_in() {
        // synthetic negative control through the library API
        let op = FixedPointOperator::from_fn(2, |x: &DVector<f64>| Ok(x * 2.0));
        let cloud = SampleCloud::standard(2);
        let report = diagnostics::certify_ne(&op, &cloud, 1e-9).unwrap();
        assert!(!report.pass);
        assert!(!report.witnesses.is_empty());
    }

    #[test]
    fn oracle_stacks_c_rows_for_composed_variants() {
        let instance = rank_one_halfspace();
        let oracle = solution_distance_oracle(&instance, Variant::Composed).unwrap();
        // the fixed-point set is {⟨(3,4), x⟩ ≤ 2} twice over (C and A⁻¹Q agree)
        let far = DVector::from_vec(vec![3.0, 4.0]);
        let d = oracle(&far).unwrap();
        let expected = ((3.0 * 3.0 + 4.0 * 4.0) - 2.0) / 5.0;
        assert!((d - expected).abs() < 1e-9, "d = {d}, expected {expected}");
    }

    #[test]
    fn ar_certification_passes_for_composed_operators() {
        let report = certify(
            &linear_inequalities(),
            PropertyKind::Ar,
            &CertifyOptions {
                variant: Variant::Composed,
                ar_steps: 500,
                ..CertifyOptions::default()
            },
        )
        .unwrap();
        assert!(report.pass, "{report}");
    }
}
