use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use optdiscrim_cli::instance::{
    self, build_measurement, instance_hash, measurement_section, parse_instance,
};
use optdiscrim_cli::report::{Report, TheoremSummary, WitnessSummary};
use optdiscrim_cli::CliError;
use optdiscrim_core::classes::{self, ClassesError};
use optdiscrim_core::discrimination::{
    brute_force_oracle, solve_covariant, solve_lp, solve_quantum, success_probability,
    DiscriminationError, SolveReport, StatePreparation,
};
use optdiscrim_core::models;
use optdiscrim_core::symmetry;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "optdiscrim",
    version,
    about = "Minimum-error state discrimination in operational probabilistic theories"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Maximize the success probability over all measurements.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Group-average the instance's measurement section.
    Symmetrize {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check that symmetrization preserves the success probability on random
    /// measurements and yields covariant ones.
    VerifyTheorem {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Restricted measurement classes.
    Classes {
        #[command(subcommand)]
        cmd: ClassesCmd,
    },
    /// Construct an explicit violation for a measurement with an NPT effect.
    PtWitness {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Emit a canonical scenario instance file.
    Gen {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum ClassesCmd {
    /// Test the instance's measurement for membership in its class section.
    Check {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    report: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum SolverArg {
    Lp,
    Fixedpoint,
    Bruteforce,
    Covariant,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Table,
}

impl Common {
    fn write(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            None => {
                print!("{}", text);
                Ok(())
            }
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Validation(format!("{}: {}", path.display(), e))),
        }
    }

    fn render(&self, report: &Report) -> String {
        match self.report {
            ReportFormat::Json => report.to_json(),
            ReportFormat::Table => report.to_table(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("OPTDISCRIM_LOG", "error"),
    )
    .init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Solve { file, common } => cmd_solve(&file, &common),
        Cmd::Symmetrize { file, common } => cmd_symmetrize(&file, &common),
        Cmd::VerifyTheorem { file, common } => cmd_verify_theorem(&file, &common),
        Cmd::Classes { cmd: ClassesCmd::Check { file, common } } => {
            cmd_classes_check(&file, &common)
        }
        Cmd::PtWitness { file, common } => cmd_pt_witness(&file, &common),
        Cmd::Gen { scenario, common } => cmd_gen(&scenario, &common),
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn pick_solver(prep: &StatePreparation, requested: Option<SolverArg>) -> SolverArg {
    requested.unwrap_or_else(|| {
        if models::quantum_levels(prep.system()).is_some() {
            SolverArg::Fixedpoint
        } else {
            SolverArg::Lp
        }
    })
}

fn cmd_solve(file: &PathBuf, common: &Common) -> Result<(), CliError> {
    let (inst, built) = parse_instance(file)?;
    let prep = built
        .preparation
        .as_ref()
        .ok_or_else(|| CliError::Validation("instance has no preparation section".into()))?;
    let solver = pick_solver(prep, common.solver);
    let tol = common.tolerance.unwrap_or(built.tolerance);
    let max_iter = common.max_iter.unwrap_or(built.max_iter);

    let start = Instant::now();
    let result = match solver {
        SolverArg::Lp => solve_lp(prep),
        SolverArg::Bruteforce => brute_force_oracle(prep),
        SolverArg::Fixedpoint => solve_quantum(prep, tol, max_iter),
        SolverArg::Covariant => {
            let setup = built.symmetry.as_ref().ok_or_else(|| {
                CliError::Validation("covariant solver needs a symmetry section".into())
            })?;
            solve_covariant(prep, setup)
        }
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    match result {
        Ok(rep) => {
            info!("solved with {} in {:.1} ms: P_S = {}", rep.method, elapsed, rep.value);
            let report = solve_report(&inst, prep, &rep, elapsed)?;
            common.write(&common.render(&report))
        }
        Err(DiscriminationError::NoConvergence { report: rep, gap }) => {
            let report = solve_report(&inst, prep, &rep, elapsed)?;
            common.write(&common.render(&report))?;
            Err(CliError::NonConvergence(format!(
                "gap {:.3e} above tolerance {:.3e} after {} iterations",
                gap, tol, rep.iterations
            )))
        }
        Err(e) => Err(validation(e)),
    }
}

/// Builds the report and re-evaluates P_S from the serialized measurement;
/// the two must agree to 1e-9 for the report to be emitted at all.
fn solve_report(
    inst: &instance::Instance,
    prep: &StatePreparation,
    rep: &SolveReport,
    elapsed_ms: f64,
) -> Result<Report, CliError> {
    let section = measurement_section(&rep.measurement);
    let rebuilt = build_measurement(prep.system(), &section)?;
    let recomputed = success_probability(&rebuilt, prep).map_err(validation)?;
    let residual = (recomputed - rep.value).abs();
    if residual > 1e-9 {
        return Err(CliError::Validation(format!(
            "serialized measurement reproduces P_S only to {:.3e}",
            residual
        )));
    }
    debug!("self-check residual {:.3e}", residual);
    let mut report = Report::new(instance_hash(inst), "solve");
    report.method = Some(rep.method.to_string());
    report.value = Some(rep.value);
    report.dual_bound = rep.dual_bound;
    report.gap = rep.gap;
    report.iterations = Some(rep.iterations);
    report.covariant = Some(rep.covariant);
    report.self_check_residual = Some(residual);
    report.measurement = Some(section);
    report.timing_ms = elapsed_ms;
    Ok(report)
}

fn cmd_symmetrize(file: &PathBuf, common: &Common) -> Result<(), CliError> {
    let (inst, built) = parse_instance(file)?;
    let e = built
        .measurement
        .as_ref()
        .ok_or_else(|| CliError::Validation("instance has no measurement section".into()))?;
    let setup = built
        .symmetry
        .as_ref()
        .ok_or_else(|| CliError::Validation("instance has no symmetry section".into()))?;

    let start = Instant::now();
    let sym = symmetry::symmetrize(e, setup).map_err(validation)?;
    let residual = symmetry::measurement_covariance_residual(&sym, setup).map_err(validation)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    let mut report = Report::new(instance_hash(&inst), "symmetrize");
    report.covariance_residual = Some(residual);
    report.covariant = Some(residual <= symmetry::COV_TOL);
    if let Some(prep) = &built.preparation {
        report.value_before = Some(success_probability(e, prep).map_err(validation)?);
        report.value = Some(success_probability(&sym, prep).map_err(validation)?);
    }
    report.measurement = Some(measurement_section(&sym));
    report.timing_ms = elapsed;
    common.write(&common.render(&report))
}

fn cmd_verify_theorem(file: &PathBuf, common: &Common) -> Result<(), CliError> {
    let (inst, built) = parse_instance(file)?;
    let prep = built
        .preparation
        .as_ref()
        .ok_or_else(|| CliError::Validation("instance has no preparation section".into()))?;
    let setup = built
        .symmetry
        .as_ref()
        .ok_or_else(|| CliError::Validation("instance has no symmetry section".into()))?;
    let trials = common.trials.unwrap_or(100);
    let seed = common.seed.unwrap_or(built.seed);
    let dev_tol = common.tolerance.unwrap_or(built.tolerance);

    let start = Instant::now();
    let tr = symmetry::verify_symmetry_theorem(prep, setup, trials, seed).map_err(validation)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let passed = tr.max_value_deviation <= dev_tol
        && tr.max_covariance_residual <= symmetry::COV_TOL
        && tr.all_valid;

    let mut report = Report::new(instance_hash(&inst), "verify-theorem");
    report.theorem = Some(TheoremSummary {
        trials: tr.trials,
        max_value_deviation: tr.max_value_deviation,
        max_covariance_residual: tr.max_covariance_residual,
        all_valid: tr.all_valid,
        passed,
    });
    report.timing_ms = elapsed;
    common.write(&common.render(&report))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "symmetrization changed P_S by up to {:.3e} (covariance residual {:.3e})",
            tr.max_value_deviation, tr.max_covariance_residual
        )))
    }
}

fn cmd_classes_check(file: &PathBuf, common: &Common) -> Result<(), CliError> {
    let (inst, built) = parse_instance(file)?;
    let e = built
        .measurement
        .as_ref()
        .ok_or_else(|| CliError::Validation("instance has no measurement section".into()))?;
    let class = built.class.as_deref().unwrap_or("pt");
    if class != "pt" {
        return Err(CliError::Validation(format!(
            "class {:?} cannot be checked from a flat effect list; only \"pt\" is decidable here",
            class
        )));
    }

    let start = Instant::now();
    let outcome = classes::pt_witness(e);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    let mut report = Report::new(instance_hash(&inst), "classes check");
    report.timing_ms = elapsed;
    match outcome {
        Ok(w) => {
            report.in_class = Some(false);
            report.witness = Some(witness_summary(&w));
        }
        Err(ClassesError::NotFound) => report.in_class = Some(true),
        Err(e) => return Err(validation(e)),
    }
    common.write(&common.render(&report))
}

fn cmd_pt_witness(file: &PathBuf, common: &Common) -> Result<(), CliError> {
    let (inst, built) = parse_instance(file)?;
    let e = built
        .measurement
        .as_ref()
        .ok_or_else(|| CliError::Validation("instance has no measurement section".into()))?;

    let start = Instant::now();
    let w = classes::pt_witness(e).map_err(validation)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    info!("NPT effect at outcome {} with violation {:.3}", w.outcome, w.violation);

    let mut report = Report::new(instance_hash(&inst), "pt-witness");
    report.witness = Some(witness_summary(&w));
    report.in_class = Some(false);
    report.timing_ms = elapsed;
    common.write(&common.render(&report))
}

fn witness_summary(w: &classes::PTWitnessReport) -> WitnessSummary {
    WitnessSummary {
        outcome: w.outcome,
        pairing: w.pairing,
        violation: w.violation,
        determinism_residual: w.determinism_residual,
        min_product_pairing: w.min_product_pairing,
    }
}

fn cmd_gen(scenario: &str, common: &Common) -> Result<(), CliError> {
    let inst = instance::generate_scenario(scenario)?;
    // Every generator output must itself pass full validation.
    instance::build(&inst)?;
    common.write(&instance::emit_instance(&inst))
}
