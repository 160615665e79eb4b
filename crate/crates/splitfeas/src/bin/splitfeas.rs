//! Batch front end for split-feasibility instances: solve with trace
//! capture, certify operator properties, estimate operator norms, and emit
//! the built-in example instances.
//!
//! Exit codes: 0 converged/pass, 2 non-converged/fail, 1 usage or
//! validation error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use splitfeas::driver::{self, CertifyOptions, PropertyKind, RunOptions, Variant};
use splitfeas::instance::{builtin_instances, load_instance};
use splitfeas::solver::SolverStatus;
use splitfeas::Result;

#[derive(Parser)]
#[command(
    name = "splitfeas",
    version,
    about = "Landweber-type operators and fixed-point iterations for split feasibility problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    Projected,
    #[value(name = "projected_relaxed")]
    ProjectedRelaxed,
    Extrapolated,
    Composed,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Plain => Variant::Plain,
            VariantArg::Projected => Variant::Projected,
            VariantArg::ProjectedRelaxed => Variant::ProjectedRelaxed,
            VariantArg::Extrapolated => Variant::Extrapolated,
            VariantArg::Composed => Variant::Composed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PropertyArg {
    Ne,
    Fne,
    Sqne,
    Cutter,
    #[value(name = "rel_cutter")]
    RelCutter,
    Ar,
    As,
}

impl From<PropertyArg> for PropertyKind {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::Ne => PropertyKind::Ne,
            PropertyArg::Fne => PropertyKind::Fne,
            PropertyArg::Sqne => PropertyKind::Sqne,
            PropertyArg::Cutter => PropertyKind::Cutter,
            PropertyArg::RelCutter => PropertyKind::RelCutter,
            PropertyArg::Ar => PropertyKind::Ar,
            PropertyArg::As => PropertyKind::As,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one or more instances, optionally writing CSV traces
    Solve {
        /// Instance files (JSON)
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "composed")]
        variant: VariantArg,
        /// Relaxation of T: the constant λ_k schedule for composed runs,
        /// the correction relaxation for projected_relaxed
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Constant μ_k schedule for composed runs
        #[arg(long, default_value_t = 0.5)]
        mu: f64,
        /// Relaxation band: schedules must stay inside [eps, 1-eps]
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Stopping tolerance on the combined residual
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Seed for the starting-point draw; instance index is added per file
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Trace CSV path; with several instances the instance file stem is
        /// inserted before the extension
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Record every Nth iterate in the trace
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Certify an operator property on an instance's operator
    Certify {
        instance: PathBuf,
        #[arg(value_enum)]
        property: PropertyArg,
        #[arg(long, value_enum, default_value = "plain")]
        variant: VariantArg,
        /// Relaxation for projected_relaxed operators
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Slack tolerance on inequality margins
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// SQNE constant; defaults to the operator's claim
        #[arg(long)]
        alpha: Option<f64>,
        /// λ of the relaxed-cutter inequality; defaults to 2/(α+1)
        #[arg(long)]
        rc_lambda: Option<f64>,
        /// Distance bound η for the approximate-shrinking probe
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        /// Orbit length for asymptotic-regularity reports
        #[arg(long, default_value_t = 1000)]
        ar_steps: usize,
        /// Final-step threshold for asymptotic-regularity reports
        #[arg(long, default_value_t = 1e-6)]
        ar_threshold: f64,
    },
    /// Print the operator-norm estimate of an instance's map
    Norm {
        instance: PathBuf,
        /// Relative tolerance on successive Rayleigh quotients
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Write the built-in example instances as JSON files
    Examples {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            instances,
            variant,
            lambda,
            mu,
            eps,
            tol,
            max_iter,
            seed,
            trace,
            stride,
        } => {
            let opts = RunOptions {
                variant: variant.into(),
                lambda,
                mu,
                epsilon: eps,
                residual_tol: tol,
                max_iterations: max_iter,
                stride,
                seed,
                ..RunOptions::default()
            };
            solve_all(&instances, &opts, trace.as_deref())
        }
        Command::Certify {
            instance,
            property,
            variant,
            lambda,
            tol,
            samples,
            radius,
            seed,
            alpha,
            rc_lambda,
            eta,
            ar_steps,
            ar_threshold,
        } => {
            let inst = load_instance(&instance)?;
            let opts = CertifyOptions {
                variant: variant.into(),
                lambda,
                samples,
                radius,
                seed,
                margin_tol: tol,
                alpha,
                rc_lambda,
                eta,
                ar_steps,
                ar_threshold,
                ..CertifyOptions::default()
            };
            let report = driver::certify(&inst, property.into(), &opts)?;
            print!("{report}");
            println!(
                "{}",
                serde_json::to_string(&report.record()).map_err(splitfeas::Error::from)?
            );
            Ok(ExitCode::from(if report.pass { 0 } else { 2 }))
        }
        Command::Norm {
            instance,
            tol,
            max_iter,
        } => {
            let inst = load_instance(&instance)?;
            let norm = inst.a.operator_norm(tol, max_iter)?;
            println!(
                "{}: {}x{} map, operator norm estimate {}",
                inst.label,
                inst.a.codomain_dim(),
                inst.a.domain_dim(),
                norm
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Examples { out_dir } => {
            std::fs::create_dir_all(&out_dir)?;
            for (name, instance) in builtin_instances() {
                let path = out_dir.join(name);
                splitfeas::save_instance(&instance, &path)?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn solve_all(paths: &[PathBuf], opts: &RunOptions, trace: Option<&Path>) -> Result<ExitCode> {
    let mut summaries: Vec<Result<driver::RunSummary>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (index, path) in paths.iter().enumerate() {
            let mut opts = opts.clone();
            opts.seed = opts.seed.wrapping_add(index as u64);
            let trace_path = trace.map(|t| per_instance_trace(t, path, paths.len() > 1));
            handles.push(scope.spawn(move || -> Result<driver::RunSummary> {
                let instance = load_instance(path)?;
                driver::run(&instance, &opts, trace_path.as_deref())
            }));
        }
        for handle in handles {
            summaries.push(handle.join().expect("solver threads do not panic"));
        }
    });
    let mut all_converged = true;
    let mut first_error = None;
    for summary in summaries {
        match summary {
            Ok(s) => {
                println!("{s}");
                all_converged &= s.status == SolverStatus::Converged;
            }
            Err(e) => {
                eprintln!("error: {e}");
                first_error.get_or_insert(e);
                all_converged = false;
            }
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }
    Ok(ExitCode::from(if all_converged { 0 } else { 2 }))
}

fn per_instance_trace(template: &Path, instance: &Path, multi: bool) -> PathBuf {
    if !multi {
        return template.to_path_buf();
    }
    let stem = instance
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".to_string());
    let ext = template
        .extension()
        .map(|e| e.to_string_lossy().into_owned());
    let base = template
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".to_string());
    let name = match ext {
        Some(ext) => format!("{base}.{stem}.{ext}"),
        None => format!("{base}.{stem}"),
    };
    template.with_file_name(name)
}
