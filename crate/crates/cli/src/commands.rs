//! Subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use impulsive_core::bounds::{apriori_bound, check_dependence, existence_certificate, DependenceGap};
use impulsive_core::bounds::{dependence_function_bound, dependence_initial_bound, dependence_parameter_bound};
use impulsive_core::linalg::inf_norm;
use impulsive_core::semigroup::{operator_norm_bound, SemigroupBound, DEFAULT_NORM_SAMPLES};
use impulsive_core::solver::solve_mild;

use crate::campaign::{self, GENERATOR};
use crate::config::{Resolved, RunConfig};
use crate::csv_io;
use crate::perturb::{self, Gaps};
use crate::{CliError, EXIT_CERTIFICATE, EXIT_OK, EXIT_VIOLATION};

#[derive(Debug, Parser)]
#[command(
    name = "impulsive",
    version,
    about = "Impulsive delay Volterra equations: solves and bounds"
)]
pub struct Cli {
    /// TOML run configuration; `compare` takes two. Defaults apply without one.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Vec<PathBuf>,
    /// Output CSV path; overrides `output_path` from the configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the mild formulation and write the trajectory CSV.
    Solve,
    /// Evaluate the existence certificate `Σ 2bM L_G D_k < 1`.
    Certify,
    /// Print the a-priori bound on the solution.
    Apriori {
        /// Also solve and check the solution against the bound.
        #[arg(long)]
        with_solve: bool,
    },
    /// Print a continuous-dependence bound.
    Bound {
        #[arg(long, value_enum)]
        kind: BoundKind,
        /// `‖ς_1 − ς_2‖` (initial and function kinds).
        #[arg(long, default_value_t = 0.0)]
        history_gap: f64,
        #[arg(long, default_value_t = 0.0)]
        rho_gap: f64,
        #[arg(long, default_value_t = 0.0)]
        mu_gap: f64,
        /// `sup ‖V − V̂‖` (function kind).
        #[arg(long, default_value_t = 0.0)]
        drift_gap: f64,
        /// `sup ‖I_k − Î_k‖` (function kind).
        #[arg(long, default_value_t = 0.0)]
        jump_gap: f64,
        /// Solve both problems and check the bound.
        #[arg(long)]
        empirical: bool,
    },
    /// Randomized check of the impulsive Pachpatte bound.
    Inequality {
        #[arg(long, default_value_t = 100)]
        samples: u64,
        /// Overrides `seed` from the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve two configurations and print their distance.
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    Initial,
    Parameter,
    Function,
}

impl From<BoundKind> for perturb::Kind {
    fn from(k: BoundKind) -> Self {
        match k {
            BoundKind::Initial => perturb::Kind::Initial,
            BoundKind::Parameter => perturb::Kind::Parameter,
            BoundKind::Function => perturb::Kind::Function,
        }
    }
}

fn load(path: Option<&Path>) -> Result<Resolved, CliError> {
    let config = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Ok(config.resolve()?)
}

fn single(cli: &Cli) -> Result<Resolved, CliError> {
    match cli.config.as_slice() {
        [] => load(None),
        [p] => load(Some(p)),
        _ => Err(CliError::Usage("only `compare` accepts two --config files".into())),
    }
}

fn semigroup(r: &Resolved) -> Result<SemigroupBound, CliError> {
    let p = &r.entry.problem;
    Ok(operator_norm_bound(&p.generator, p.horizon, DEFAULT_NORM_SAMPLES)?)
}

fn output_path(cli: &Cli, r: &Resolved) -> Option<PathBuf> {
    cli.out.clone().or_else(|| r.config.output_path.clone())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Solve => solve(cli, out, err),
        Command::Certify => certify(cli, out),
        Command::Apriori { with_solve } => apriori(cli, *with_solve, out),
        Command::Bound {
            kind,
            history_gap,
            rho_gap,
            mu_gap,
            drift_gap,
            jump_gap,
            empirical,
        } => {
            let gaps = Gaps {
                history: *history_gap,
                rho: *rho_gap,
                mu: *mu_gap,
                drift: *drift_gap,
                jump: *jump_gap,
            };
            for (name, v) in [
                ("--history-gap", gaps.history),
                ("--rho-gap", gaps.rho),
                ("--mu-gap", gaps.mu),
                ("--drift-gap", gaps.drift),
                ("--jump-gap", gaps.jump),
            ] {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(CliError::Usage(format!("{name} must be nonnegative, got {v}")));
                }
            }
            bound(cli, *kind, &gaps, *empirical, out)
        }
        Command::Inequality { samples, seed } => inequality(cli, *samples, *seed, out),
        Command::Compare => compare(cli, out),
    }
}

fn solve(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let r = single(cli)?;
    let problem = &r.entry.problem;
    let (traj, report) = solve_mild(problem, &r.disc, &r.control)?;
    // CSV goes to stdout when no path is given, so the summary moves to stderr
    let (summary, path): (&mut dyn Write, _) = match output_path(cli, &r) {
        Some(path) => {
            let mut file = create(&path)?;
            csv_io::write_trajectory(&mut file, &traj)?;
            file.flush()?;
            (out, Some(path))
        }
        None => {
            csv_io::write_trajectory(&mut *out, &traj)?;
            (err, None)
        }
    };
    writeln!(summary, "problem: {}", r.entry.name)?;
    writeln!(summary, "step: {}", r.disc.step)?;
    writeln!(summary, "sigma_norm: {:.10e}", traj.sigma_norm())?;
    for (k, jump) in report.jumps.iter().enumerate() {
        writeln!(
            summary,
            "jump {} at t = {}: |dw| = {:.3e} {}",
            k + 1,
            problem.schedule.times[k],
            inf_norm(jump),
            vector(jump)
        )?;
    }
    writeln!(summary, "mild_residual: {:.3e}", report.final_residual)?;
    writeln!(summary, "picard_iterations: {:?}", report.iterations_per_segment)?;
    if let Some(path) = path {
        writeln!(summary, "trajectory: {}", path.display())?;
    }
    Ok(EXIT_OK)
}

fn certify(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let r = single(cli)?;
    let sg = semigroup(&r)?;
    let c = existence_certificate(&r.entry.problem, &r.entry.lipschitz, &sg)?;
    writeln!(out, "problem: {}", r.entry.name)?;
    writeln!(out, "M: {}", sg.m)?;
    writeln!(out, "L_G: {}", r.entry.lipschitz.l_g)?;
    writeln!(out, "lhs: {}", c.lhs)?;
    writeln!(out, "threshold: 1")?;
    writeln!(out, "{}", if c.pass { "PASS" } else { "FAIL" })?;
    Ok(if c.pass { EXIT_OK } else { EXIT_CERTIFICATE })
}

fn apriori(cli: &Cli, with_solve: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let r = single(cli)?;
    let sg = semigroup(&r)?;
    let problem = &r.entry.problem;
    let k = apriori_bound(problem, &r.entry.lipschitz, &sg, &r.disc)?;
    writeln!(out, "problem: {}", r.entry.name)?;
    writeln!(out, "M: {:.10}", sg.m)?;
    writeln!(out, "history_norm: {:.10e}", k.history_norm)?;
    writeln!(out, "drift_term: {:.10e}", k.drift_term)?;
    writeln!(out, "jump_term: {:.10e}", k.jump_term)?;
    writeln!(out, "C_k: {}", vector(&k.ck))?;
    writeln!(out, "growth: {:.10e}", k.growth)?;
    writeln!(out, "K: {:.10e}", k.value)?;
    if !with_solve {
        return Ok(EXIT_OK);
    }
    let (traj, _) = solve_mild(problem, &r.disc, &r.control)?;
    let norm = traj.sigma_norm();
    let ok = norm <= k.value;
    writeln!(out, "sigma_norm: {norm:.10e}")?;
    writeln!(out, "{}", if ok { "DOMINATED" } else { "VIOLATED" })?;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn bound(cli: &Cli, kind: BoundKind, gaps: &Gaps, empirical: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let r = single(cli)?;
    let sg = semigroup(&r)?;
    let (other, gap, lip) = perturb::perturbed(&r.entry, kind.into(), gaps)?;
    let problem = &r.entry.problem;
    let theoretical = match gap {
        DependenceGap::Initial { history_gap } => dependence_initial_bound(problem, &lip, &sg, history_gap, None)?,
        DependenceGap::Parameter { rho_gap, mu_gap } => {
            dependence_parameter_bound(problem, &lip, &sg, rho_gap, mu_gap, None)?
        }
        DependenceGap::Function => dependence_function_bound(problem, &lip, &sg, None)?,
    };
    writeln!(out, "problem: {}", r.entry.name)?;
    writeln!(out, "kind: {kind:?}")?;
    writeln!(out, "theoretical: {theoretical:.10e}")?;
    if !empirical {
        return Ok(EXIT_OK);
    }
    let report = check_dependence(gap, problem, &other.problem, &lip, &sg, &r.disc, &r.control)?;
    writeln!(out, "empirical: {:.10e}", report.empirical)?;
    writeln!(out, "residuals: {:.3e} {:.3e}", report.residual_a, report.residual_b)?;
    writeln!(out, "{}", if report.dominated { "DOMINATED" } else { "VIOLATED" })?;
    Ok(if report.dominated { EXIT_OK } else { EXIT_VIOLATION })
}

fn inequality(cli: &Cli, samples: u64, seed: Option<u64>, out: &mut dyn Write) -> Result<i32, CliError> {
    let r = single(cli)?;
    let seed = seed.unwrap_or(r.config.seed);
    let step = r.disc.step;
    let rows = campaign::run_campaign(seed, samples, step)?;
    if let Some(path) = output_path(cli, &r) {
        let mut file = create(&path)?;
        csv_io::write_campaign(&mut file, GENERATOR, seed, &rows)?;
        file.flush()?;
    }
    let tol = campaign::tolerance(step);
    writeln!(out, "# generator={GENERATOR} seed={seed} samples={samples} step={step}")?;
    for row in &rows {
        writeln!(
            out,
            "instance {}: impulses {}, C_k {}, max_violation {:.3e} at t = {:.4}",
            row.instance_id,
            row.num_impulses,
            vector(&row.ck),
            row.max_violation,
            row.t_max_violation
        )?;
    }
    let worst = rows.iter().map(|r| r.max_violation).fold(f64::NEG_INFINITY, f64::max);
    writeln!(out, "max_violation: {worst:.3e} (tolerance {tol:.3e})")?;
    let ok = worst <= tol;
    writeln!(out, "{}", if ok { "PASS" } else { "FAIL" })?;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn compare(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let [a, b] = cli.config.as_slice() else {
        return Err(CliError::Usage("`compare` needs exactly two --config files".into()));
    };
    let (ra, rb) = (load(Some(a))?, load(Some(b))?);
    let (wa, _) = solve_mild(&ra.entry.problem, &ra.disc, &ra.control)?;
    let (wb, _) = solve_mild(&rb.entry.problem, &rb.disc, &rb.control)?;
    let gaps = wa.segment_gaps(&wb)?;
    let diff = gaps.iter().copied().fold(0.0, f64::max);
    writeln!(out, "sigma_diff: {diff:.10e}")?;
    for (k, g) in gaps.iter().enumerate() {
        writeln!(out, "segment {k}: {g:.10e}")?;
    }
    Ok(EXIT_OK)
}
