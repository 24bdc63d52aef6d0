//! Command-line front end. All logic lives in the library; the `nqp` binary
//! only parses arguments and forwards here.
//!
//! Result lines meant for scripts are prefixed `OBJECTIVE`, `ASSIGNMENT`,
//! `NMSE` and `GAP`; everything else is commentary. Exit codes: 0 success,
//! 1 invalid input, 2 budget exceeded, 3 internal soundness violation.

use crate::error::{Error, Result};
use crate::fileio::{parse_instance, serialize_instance, Instance};
use crate::instance::{QpInstance, Scalar};
use crate::level_set::LevelSet;
use crate::reduction::{reduce_to_level_set, ReductionCertificate};
use crate::reservoir::{
    delay_recall_task, noisy_sine_task, train_discrete_readout, Esn, EsnConfig,
};
use crate::solvers::{
    brute_force_argmin_set, for_each_point, run_solver, solve_multi_start, AnnealSchedule,
    InnerSolver, SolveResult, SolverBudget, SolverChoice,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use std::fmt::Display;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "nqp",
    version,
    about = "Quadratic programs over small finite weight sets: validate, solve, embed, verify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an instance file against every invariant and print a report.
    Validate { file: PathBuf },
    /// Minimize an instance file with the chosen solver.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverOpts,
    },
    /// Embed a binary instance into a larger level set; write the result with
    /// its certificate as comments.
    Reduce {
        file: PathBuf,
        /// Target level set, e.g. "0,1,2" (ascending integers).
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long)]
        out: PathBuf,
        /// Embed even when the input is not declared PSD.
        #[arg(long)]
        allow_indefinite: bool,
    },
    /// Embed, solve both sides exhaustively, and check that the minimizer
    /// sets correspond exactly. Exits 3 if they do not.
    VerifyReduction {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        /// Additionally check strict separation and the objective identity
        /// over the whole lattice, not just the argmin sets.
        #[arg(long)]
        exhaustive: bool,
        /// Evaluation budget for the exhaustive enumerations.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        allow_indefinite: bool,
    },
    /// Echo-state-network demo: train continuous and discrete readouts on a
    /// synthetic task and report both errors and the optimality gap.
    RcDemo {
        #[arg(long, default_value_t = 30)]
        neurons: usize,
        #[arg(long, default_value_t = 500)]
        length: usize,
        #[arg(long, default_value_t = 50)]
        washout: usize,
        /// Task: "delay:<steps>" or "sine".
        #[arg(long, default_value = "delay:2")]
        task: String,
        /// Level set for the discrete readout.
        #[arg(long, default_value = "-1,0,1", allow_hyphen_values = true)]
        set: String,
        #[arg(long, default_value_t = 1e-6)]
        ridge: f64,
        #[command(flatten)]
        solver: SolverOpts,
    },
    /// Soundness and heuristic-gap sweep over random instances; one table row
    /// per (dimension, level-count) cell.
    Bench {
        /// Comma-separated dimensions.
        #[arg(long, default_value = "2,4,6,8")]
        dims: String,
        /// Comma-separated level-set sizes.
        #[arg(long, default_value = "2,3,5")]
        levels: String,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SolverOpts {
    #[arg(long, value_enum, default_value_t = SolverKind::Brute)]
    pub solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum objective evaluations.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Starts for the multi-start solver.
    #[arg(long, default_value_t = 16)]
    pub starts: u64,
    /// Inner solver for multi-start.
    #[arg(long, value_enum, default_value_t = InnerKind::Local)]
    pub inner: InnerKind,
    /// Annealing initial temperature.
    #[arg(long, default_value_t = 10.0)]
    pub t0: f64,
    /// Annealing final temperature.
    #[arg(long, default_value_t = 1e-3)]
    pub t1: f64,
    /// Annealing temperature steps.
    #[arg(long, default_value_t = 200)]
    pub steps: u64,
    /// Annealing moves per temperature step.
    #[arg(long, default_value_t = 50)]
    pub moves: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    Brute,
    Local,
    Anneal,
    Multi,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
pub enum InnerKind {
    Local,
    Anneal,
}

impl SolverOpts {
    fn schedule(&self) -> AnnealSchedule {
        AnnealSchedule {
            t_initial: self.t0,
            t_final: self.t1,
            steps: self.steps,
            moves_per_step: self.moves,
        }
    }

    fn choice(&self) -> SolverChoice {
        match self.solver {
            SolverKind::Brute => SolverChoice::Brute,
            SolverKind::Local => SolverChoice::Local,
            SolverKind::Anneal => SolverChoice::Anneal(self.schedule()),
            SolverKind::Multi => SolverChoice::Multi {
                starts: self.starts,
                inner: match self.inner {
                    InnerKind::Local => InnerSolver::LocalSearch,
                    InnerKind::Anneal => InnerSolver::Anneal(self.schedule()),
                },
            },
        }
    }

    fn budget(&self) -> SolverBudget {
        self.budget
            .map(SolverBudget::with_max_evaluations)
            .unwrap_or_default()
    }
}

/// Run a parsed command and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Solve { file, solver } => cmd_solve(&file, &solver),
        Command::Reduce {
            file,
            set,
            out,
            allow_indefinite,
        } => cmd_reduce(&file, &set, &out, allow_indefinite),
        Command::VerifyReduction {
            file,
            set,
            exhaustive,
            budget,
            allow_indefinite,
        } => cmd_verify_reduction(&file, &set, exhaustive, budget, allow_indefinite),
        Command::RcDemo {
            neurons,
            length,
            washout,
            task,
            set,
            ridge,
            solver,
        } => cmd_rc_demo(neurons, length, washout, &task, &set, ridge, &solver),
        Command::Bench {
            dims,
            levels,
            trials,
            seed,
        } => cmd_bench(&dims, &levels, trials, seed),
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| Error::InvalidArgument(format!("cannot read {}: {err}", path.display())))?;
    parse_instance(&text)
}

fn parse_level_list(text: &str) -> Result<LevelSet> {
    let values: Vec<i64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("level '{t}' is not an integer")))
        })
        .collect::<Result<_>>()?;
    LevelSet::new(values)
}

fn parse_count_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("{what} '{t}' is not a positive integer"))
                })
        })
        .collect()
}

fn cmd_validate(file: &Path) -> Result<i32> {
    let instance = read_instance(file)?;
    let report = instance.validate();
    println!(
        "instance: {} dimensions, {} levels, domain {}",
        instance.n(),
        instance.levels().len(),
        instance.domain()
    );
    for violation in &report.violations {
        println!("violation: {violation}");
    }
    for warning in &report.warnings {
        println!("warning: {warning}");
    }
    if report.violations.is_empty() {
        println!("ok: all invariants hold");
        Ok(0)
    } else {
        println!("invalid: {} violation(s)", report.violations.len());
        Ok(1)
    }
}

fn print_result<T: Scalar>(result: &SolveResult<T>) {
    println!("OBJECTIVE {}", result.best.objective);
    println!("ASSIGNMENT {}", join(&result.best.w));
    println!("evaluations {}", result.evaluations);
    println!("iterations {}", result.iterations);
    println!("optimal-proven {}", result.optimal_proven);
    if let Some(seed) = result.seed {
        println!("seed {seed}");
    }
}

fn join<T: Display>(values: &[T]) -> String {
    values
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_solve(file: &Path, opts: &SolverOpts) -> Result<i32> {
    let choice = opts.choice();
    let budget = opts.budget();
    match read_instance(file)? {
        Instance::Int(inst) => print_result(&run_solver(&inst, &choice, opts.seed, &budget)?),
        Instance::Real(inst) => print_result(&run_solver(&inst, &choice, opts.seed, &budget)?),
    }
    Ok(0)
}

fn require_int(instance: Instance) -> Result<QpInstance<i128>> {
    match instance {
        Instance::Int(inst) => Ok(inst),
        Instance::Real(_) => Err(Error::InvalidArgument(
            "this command needs an exact-integer instance".into(),
        )),
    }
}

fn cmd_reduce(file: &Path, set: &str, out: &Path, allow_indefinite: bool) -> Result<i32> {
    let binary = require_int(read_instance(file)?)?;
    let levels = parse_level_list(set)?;
    let (reduced, certificate) = reduce_to_level_set(&binary, &levels, allow_indefinite)?;
    let text = serialize_instance(&reduced, Some(&certificate));
    std::fs::write(out, &text)
        .map_err(|err| Error::InvalidArgument(format!("cannot write {}: {err}", out.display())))?;
    println!(
        "embedded {} binary variables into levels {}",
        reduced.n(),
        levels
    );
    print!("{certificate}");
    println!("wrote {}", out.display());
    Ok(0)
}

struct VerifyOutcome {
    binary_optimum: i128,
    reduced_optimum: i128,
    argmin_count: usize,
}

/// Solve both sides exhaustively and check that reduced minimizers are
/// two-valued and decode to exactly the binary minimizer set.
fn verify_reduction(
    source: &QpInstance<i128>,
    reduced: &QpInstance<i128>,
    certificate: &ReductionCertificate,
    exhaustive: bool,
    budget: &SolverBudget,
) -> Result<VerifyOutcome> {
    let (reduced_best, reduced_args) = brute_force_argmin_set(reduced, budget)?;
    let (binary_best, binary_args) = brute_force_argmin_set(source, budget)?;

    let decoded: Vec<Vec<i64>> = reduced_args
        .iter()
        .map(|t| {
            certificate.decode(t).map_err(|err| {
                Error::Soundness(format!(
                    "reduced minimizer {} uses a level outside {{s1, s2}}: {err}",
                    join(t)
                ))
            })
        })
        .collect::<Result<_>>()?;
    if decoded != binary_args {
        return Err(Error::Soundness(format!(
            "decoded minimizer set ({} points) differs from the binary minimizer set ({} points)",
            decoded.len(),
            binary_args.len()
        )));
    }
    let reconciled = certificate.binary_objective(reduced_best)?;
    if reconciled != binary_best {
        return Err(Error::Soundness(format!(
            "objective reconciliation failed: {reconciled} vs {binary_best}"
        )));
    }

    if exhaustive {
        let s1 = certificate.s1;
        let s2 = certificate.s2;
        let mut max_binary: Option<i128> = None;
        let mut min_other: Option<i128> = None;
        let mut identity_failure = None;
        for_each_point(reduced, budget, |value, t| {
            let two_valued = t.iter().all(|&v| v == s1 || v == s2);
            if two_valued {
                if max_binary.is_none_or(|m| value > m) {
                    max_binary = Some(value);
                }
                if identity_failure.is_none() {
                    let decoded = certificate.decode(t).expect("two-valued point");
                    let expected = certificate
                        .scale
                        .checked_mul(source.objective(&decoded).expect("valid binary point"));
                    let lhs = value
                        .checked_add(certificate.shift_offset)
                        .and_then(|v| v.checked_add(certificate.penalty_offset));
                    if lhs != expected || lhs.is_none() {
                        identity_failure = Some(join(t));
                    }
                }
            } else if min_other.is_none_or(|m| value < m) {
                min_other = Some(value);
            }
        })?;
        if let Some(at) = identity_failure {
            return Err(Error::Soundness(format!(
                "objective identity fails at t = {at}"
            )));
        }
        if let (Some(max_b), Some(min_o)) = (max_binary, min_other) {
            if min_o <= max_b {
                return Err(Error::Soundness(format!(
                    "separation fails: best non-two-valued point {min_o} <= worst two-valued {max_b}"
                )));
            }
        }
    }

    Ok(VerifyOutcome {
        binary_optimum: binary_best,
        reduced_optimum: reduced_best,
        argmin_count: binary_args.len(),
    })
}

fn cmd_verify_reduction(
    file: &Path,
    set: &str,
    exhaustive: bool,
    budget: Option<u64>,
    allow_indefinite: bool,
) -> Result<i32> {
    let binary = require_int(read_instance(file)?)?;
    let levels = parse_level_list(set)?;
    let budget = budget
        .map(SolverBudget::with_max_evaluations)
        .unwrap_or_default();
    let (reduced, certificate) = reduce_to_level_set(&binary, &levels, allow_indefinite)?;
    let outcome = verify_reduction(&binary, &reduced, &certificate, exhaustive, &budget)?;
    println!("OBJECTIVE {}", outcome.binary_optimum);
    println!("reduced objective {}", outcome.reduced_optimum);
    println!("minimizer count {}", outcome.argmin_count);
    println!("verified: minimizer sets correspond exactly");
    if exhaustive {
        println!("verified: strict separation and objective identity over the whole lattice");
    }
    Ok(0)
}

fn cmd_rc_demo(
    neurons: usize,
    length: usize,
    washout: usize,
    task: &str,
    set: &str,
    ridge: f64,
    opts: &SolverOpts,
) -> Result<i32> {
    let levels = parse_level_list(set)?;
    let (inputs, targets) = make_task(task, length, opts.seed.wrapping_add(1))?;
    let esn = Esn::new(&EsnConfig {
        reservoir_size: neurons,
        input_dim: 1,
        seed: opts.seed,
        ..EsnConfig::default()
    })?;
    let (report, _) = train_discrete_readout(
        &esn,
        &inputs,
        &targets,
        washout,
        &levels,
        &opts.choice(),
        ridge,
        opts.seed.wrapping_add(2),
        &opts.budget(),
    )?;
    println!("task {task}, {neurons} neurons, {length} steps, washout {washout}");
    println!("NMSE continuous {}", report.continuous.nmse);
    println!("NMSE discrete {}", report.discrete.nmse);
    println!("GAP {}", report.gap);
    println!("OBJECTIVE {}", report.discrete_objective);
    println!("ASSIGNMENT {}", join(&report.discrete.w_levels));
    println!("state-scale {}", report.discrete.state_scale);
    println!("evaluations {}", report.solve.evaluations);
    Ok(0)
}

fn make_task(
    kind: &str,
    length: usize,
    seed: u64,
) -> Result<(nalgebra::DMatrix<f64>, DVector<f64>)> {
    if kind == "sine" {
        return Ok(noisy_sine_task(length, seed));
    }
    if kind == "delay" {
        return Ok(delay_recall_task(length, 2, seed));
    }
    if let Some(tau) = kind.strip_prefix("delay:") {
        let tau: usize = tau
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad delay '{tau}'")))?;
        if tau >= length {
            return Err(Error::InvalidArgument(
                "delay must be smaller than the sequence length".into(),
            ));
        }
        return Ok(delay_recall_task(length, tau, seed));
    }
    Err(Error::InvalidArgument(format!(
        "unknown task '{kind}'; use 'delay:<steps>' or 'sine'"
    )))
}

fn cmd_bench(dims: &str, levels: &str, trials: u64, seed: u64) -> Result<i32> {
    use rand::{Rng, SeedableRng};
    let dims = parse_count_list(dims, "dimension")?;
    let level_counts = parse_count_list(levels, "level count")?;
    if trials < 1 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let budget = SolverBudget::with_max_evaluations(10_000_000);
    println!("dims levels trials sound heuristic-hits max-gap");
    for &n in &dims {
        for &n_levels in &level_counts {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                seed ^ ((n as u64) << 32) ^ (n_levels as u64),
            );
            let mut sound = 0u64;
            let mut hits = 0u64;
            let mut max_gap = 0i128;
            for _ in 0..trials {
                let binary = QpInstance::random_psd(n, LevelSet::binary(), rng.gen(), 5)?;
                let mut values = std::collections::BTreeSet::new();
                while values.len() < n_levels {
                    values.insert(rng.gen_range(-10i64..=10));
                }
                let levels = LevelSet::new(values.into_iter().collect())?;
                let (reduced, certificate) = reduce_to_level_set(&binary, &levels, false)?;
                if verify_reduction(&binary, &reduced, &certificate, false, &budget).is_ok() {
                    sound += 1;
                }
                let oracle = brute_force_argmin_set(&reduced, &budget)?.0;
                let heuristic =
                    solve_multi_start(&reduced, 8, rng.gen(), &InnerSolver::LocalSearch, &budget)?;
                if heuristic.best.objective == oracle {
                    hits += 1;
                } else {
                    max_gap = max_gap.max(heuristic.best.objective - oracle);
                }
            }
            println!("{n} {n_levels} {trials} {sound} {hits} {max_gap}");
        }
    }
    Ok(0)
}
