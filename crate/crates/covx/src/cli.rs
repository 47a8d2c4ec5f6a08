//! Command-line orchestration: file I/O, configuration, and report emission
//! over the computational modules.
//!
//! Exit codes: 0 = computed verdict true / success, 1 = computed verdict
//! false (e.g. not extremal), 2 = input or contract error. `COVX_TOL`
//! overrides the default rank tolerance; JSON output prints floats with 17
//! significant digits for lossless round-trips.

use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{
    builtin_example_names, builtin_examples, project_covariant, qo_extremality, ChannelError,
    ChoiOperator, TniReport, TniVerdict,
};
use crate::numkernel::{ComplexMatrix, MatError, DEFAULT_TOL};
use crate::optimizer::{
    maximize_linear, ConvexSetSpec, CostOperator, OptError, OptimizeConfig,
};
use crate::povm::{check_seed, extremality as povm_extremality, PovmError, PovmSeed};
use crate::reps::{GroupElement, RepError, Representation, DEFAULT_SEED};

pub const DEFAULT_FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Povm(#[from] PovmError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error("{0}")]
    Config(String),
    #[error("serialization failed: {0}")]
    Emit(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    Json,
    Text,
}

/// Effective run configuration after merging flags, environment, defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub tol: f64,
    pub feas_tol: f64,
    pub rng_seed: u64,
    pub output: OutputMode,
}

#[derive(Parser, Debug)]
#[command(
    name = "covx",
    version,
    about = "Extremality analysis and optimization for group-covariant POVMs and quantum operations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
    /// Relative rank threshold (default 1e-9; COVX_TOL also applies).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Feasibility residual threshold (default 1e-8).
    #[arg(long, global = true)]
    feas_tol: Option<f64>,
    /// RNG seed for sampled group elements and optimizer restarts.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the isotypic block structure of a representation.
    Decompose { rep: PathBuf },
    /// Covariant POVM seed operations.
    Povm {
        #[command(subcommand)]
        cmd: PovmCmd,
    },
    /// Quantum operation (Choi operator) operations.
    Channel {
        #[command(subcommand)]
        cmd: ChannelCmd,
    },
    /// Linear-functional maximization over the covariant convex sets.
    Optimize {
        #[command(subcommand)]
        cmd: OptimizeCmd,
    },
    /// Regenerate all built-in reference channels.
    Examples,
}

#[derive(Subcommand, Debug)]
enum PovmCmd {
    /// Feasibility of a seed: positivity and block normalization.
    Check { xi: PathBuf, rep: PathBuf },
    /// Extremality of a feasible seed.
    Extremal {
        xi: PathBuf,
        rep: PathBuf,
        /// Write the perturbation witness (when non-extremal) to this file.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Emit only the perturbation witness of a non-extremal seed.
    Witness {
        xi: PathBuf,
        rep: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Outcome probability density Tr[U^dag Xi U rho] at a group element.
    Prob {
        xi: PathBuf,
        rep: PathBuf,
        rho: PathBuf,
        /// Group element as an angle (U(1)).
        #[arg(long)]
        angle: Option<f64>,
        /// Group element as a list index (finite groups).
        #[arg(long)]
        element: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum ChannelCmd {
    /// CP / trace constraints, and covariance when a representation is given.
    Check {
        channel: PathBuf,
        rep: Option<PathBuf>,
    },
    /// Extremality among covariant operations with the same Tr_K.
    Extremal {
        channel: PathBuf,
        rep: PathBuf,
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Emit only the perturbation witness of a non-extremal operation.
    Witness {
        channel: PathBuf,
        rep: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply the channel to a density matrix.
    Apply { channel: PathBuf, rho: PathBuf },
    /// Emit a built-in reference channel, optionally running a check.
    Example {
        name: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_enum)]
        check: Option<ExampleCheck>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExampleCheck {
    Extremal,
    Tni,
}

#[derive(Subcommand, Debug)]
enum OptimizeCmd {
    /// Maximize Tr[W Xi] over feasible POVM seeds.
    Povm {
        #[arg(long)]
        cost: PathBuf,
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Maximize Tr[W R] over covariant channels with fixed Tr_K.
    Channel {
        #[arg(long)]
        cost: PathBuf,
        /// The product representation V (x) U^* on the Choi space.
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        dim_in: usize,
        #[arg(long)]
        dim_out: usize,
        /// Affine target K = Tr_K[R]; identity (trace-preserving) if absent.
        #[arg(long)]
        target_k: Option<PathBuf>,
        #[arg(long)]
        restarts: Option<usize>,
    },
}

/// Channel file: the matrix wire format plus an input/output dimension header.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    #[serde(flatten)]
    pub matrix: ComplexMatrix,
}

// ---------------------------------------------------------------------------
// JSON emission with 17 significant digits

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            write!(writer, "{:.16e}", value)
        } else {
            // JSON has no infinities; mirror serde_json's null fallback
            write!(writer, "null")
        }
    }
}

/// Serializes any report as JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
}

// ---------------------------------------------------------------------------

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = to_json_string(value)?;
    std::fs::write(path, text)?;
    Ok(())
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let env_tol = match std::env::var("COVX_TOL") {
        Ok(s) => Some(s.parse::<f64>().map_err(|_| {
            CliError::Config(format!("COVX_TOL must be a number, got `{s}`"))
        })?),
        Err(_) => None,
    };
    let tol = cli.tol.or(env_tol).unwrap_or(DEFAULT_TOL);
    let feas_tol = cli.feas_tol.unwrap_or(DEFAULT_FEAS_TOL);
    for (name, v) in [("tol", tol), ("feas-tol", feas_tol)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(CliError::Config(format!(
                "{name} must lie strictly between 0 and 1, got {v}"
            )));
        }
    }
    Ok(RunConfig {
        tol,
        feas_tol,
        rng_seed: cli.seed.unwrap_or(DEFAULT_SEED),
        output: cli.output,
    })
}

fn emit<T: Serialize>(cfg: &RunConfig, value: &T, text: String) -> Result<(), CliError> {
    match cfg.output {
        OutputMode::Json => println!("{}", to_json_string(value)?),
        OutputMode::Text => println!("{text}"),
    }
    Ok(())
}

/// Entry point: parses arguments, runs the subcommand, and returns the
/// process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exit codes
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match dispatch(&cli.cmd, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<i32, CliError> {
    match cmd {
        Command::Decompose { rep } => cmd_decompose(rep, cfg),
        Command::Povm { cmd } => match cmd {
            PovmCmd::Check { xi, rep } => cmd_povm_check(xi, rep, cfg),
            PovmCmd::Extremal {
                xi,
                rep,
                witness_out,
            } => cmd_povm_extremal(xi, rep, witness_out.as_deref(), cfg, false),
            PovmCmd::Witness { xi, rep, out } => {
                cmd_povm_extremal(xi, rep, out.as_deref(), cfg, true)
            }
            PovmCmd::Prob {
                xi,
                rep,
                rho,
                angle,
                element,
            } => cmd_povm_prob(xi, rep, rho, *angle, *element, cfg),
        },
        Command::Channel { cmd } => match cmd {
            ChannelCmd::Check { channel, rep } => cmd_channel_check(channel, rep.as_deref(), cfg),
            ChannelCmd::Extremal {
                channel,
                rep,
                witness_out,
            } => cmd_channel_extremal(channel, rep, witness_out.as_deref(), cfg, false),
            ChannelCmd::Witness { channel, rep, out } => {
                cmd_channel_extremal(channel, rep, out.as_deref(), cfg, true)
            }
            ChannelCmd::Apply { channel, rho } => cmd_channel_apply(channel, rho, cfg),
            ChannelCmd::Example { name, d, check } => cmd_channel_example(name, *d, *check, cfg),
        },
        Command::Optimize { cmd } => cmd_optimize(cmd, cfg),
        Command::Examples => cmd_examples(cfg),
    }
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DecomposeReport {
    carrier_dim: usize,
    blocks: Vec<DecomposeBlock>,
}

#[derive(Serialize)]
struct DecomposeBlock {
    label: String,
    irrep_dim: usize,
    multiplicity: usize,
}

fn cmd_decompose(rep_path: &Path, cfg: &RunConfig) -> Result<i32, CliError> {
    let rep: Representation = load_json(rep_path)?;
    let dec = rep.isotypic_decompose(cfg.tol)?;
    let report = DecomposeReport {
        carrier_dim: dec.carrier_dim(),
        blocks: dec
            .blocks()
            .iter()
            .map(|b| DecomposeBlock {
                label: b.label.to_string(),
                irrep_dim: b.irrep_dim,
                multiplicity: b.multiplicity,
            })
            .collect(),
    };
    let mut text = format!("carrier dimension {}\n", report.carrier_dim);
    text.push_str("label  irrep_dim  multiplicity\n");
    for b in &report.blocks {
        text.push_str(&format!("{:<6} {:<10} {}\n", b.label, b.irrep_dim, b.multiplicity));
    }
    emit(cfg, &report, text.trim_end().to_string())?;
    Ok(0)
}

fn cmd_povm_check(xi_path: &Path, rep_path: &Path, cfg: &RunConfig) -> Result<i32, CliError> {
    let xi: ComplexMatrix = load_json(xi_path)?;
    let rep: Representation = load_json(rep_path)?;
    let dec = rep.isotypic_decompose(cfg.tol)?;
    let report = check_seed(&xi, &dec, cfg.feas_tol)?;
    let text = format!(
        "feasible: {}\npsd: {} (min eigenvalue {:.3e})\nworst block residual: {:.3e}",
        report.feasible,
        report.psd_ok,
        report.min_eigenvalue,
        report
            .block_residuals
            .iter()
            .map(|(_, r)| *r)
            .fold(0.0f64, f64::max)
    );
    emit(cfg, &report, text)?;
    Ok(if report.feasible { 0 } else { 1 })
}

fn cmd_povm_extremal(
    xi_path: &Path,
    rep_path: &Path,
    witness_out: Option<&Path>,
    cfg: &RunConfig,
    witness_only: bool,
) -> Result<i32, CliError> {
    let xi: ComplexMatrix = load_json(xi_path)?;
    let rep: Representation = load_json(rep_path)?;
    let seed = PovmSeed::new(xi, rep, cfg.feas_tol)?;
    let report = povm_extremality(&seed, cfg.tol)?;
    if let (Some(path), Some(w)) = (witness_out, report.witness.as_ref()) {
        write_json(path, w)?;
    }
    if witness_only {
        match (&report.witness, report.witness_step) {
            (Some(w), Some(t)) => {
                #[derive(Serialize)]
                struct WitnessReport<'a> {
                    witness: &'a ComplexMatrix,
                    witness_step: f64,
                }
                emit(
                    cfg,
                    &WitnessReport {
                        witness: w,
                        witness_step: t,
                    },
                    format!("witness found, feasible step {t:.6e}"),
                )?;
                Ok(0)
            }
            _ => {
                emit(cfg, &report, "extremal: no witness exists".into())?;
                Ok(1)
            }
        }
    } else {
        let text = format!(
            "extremal: {}\nrank: {}\nspan: {}/{} (bound ok: {})",
            report.is_extremal,
            report.rank,
            report.span_achieved,
            report.span_required,
            report.necessary_bound_ok
        );
        emit(cfg, &report, text)?;
        Ok(if report.is_extremal { 0 } else { 1 })
    }
}

fn cmd_povm_prob(
    xi_path: &Path,
    rep_path: &Path,
    rho_path: &Path,
    angle: Option<f64>,
    element: Option<usize>,
    cfg: &RunConfig,
) -> Result<i32, CliError> {
    let xi: ComplexMatrix = load_json(xi_path)?;
    let rep: Representation = load_json(rep_path)?;
    let rho: ComplexMatrix = load_json(rho_path)?;
    let g = match (angle, element) {
        (Some(a), None) => GroupElement::Angle(a),
        (None, Some(i)) => GroupElement::Index(i),
        _ => {
            return Err(CliError::Config(
                "provide exactly one of --angle or --element".into(),
            ))
        }
    };
    let seed = PovmSeed::new(xi, rep, cfg.feas_tol)?;
    let p = seed.probability_density(&rho, &g, cfg.feas_tol)?;
    #[derive(Serialize)]
    struct ProbReport {
        probability_density: f64,
    }
    emit(
        cfg,
        &ProbReport {
            probability_density: p,
        },
        format!("probability density: {p:.12}"),
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct ChannelCheckReport {
    #[serde(flatten)]
    tni: TniReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariance_residual: Option<f64>,
}

fn cmd_channel_check(
    channel_path: &Path,
    rep_path: Option<&Path>,
    cfg: &RunConfig,
) -> Result<i32, CliError> {
    let file: ChannelFile = load_json(channel_path)?;
    let choi = ChoiOperator::new(file.matrix, file.dim_in, file.dim_out)?;
    let tni = choi.check_tni(cfg.feas_tol);
    let covariance_residual = match rep_path {
        Some(p) => {
            let rep: Representation = load_json(p)?;
            let mut worst = 0.0f64;
            for u in rep.sample_unitaries(cfg.rng_seed) {
                worst = worst.max(choi.matrix().commutator(&u).frobenius_norm());
            }
            Some(worst)
        }
        None => None,
    };
    let ok = tni.verdict != TniVerdict::Violating
        && covariance_residual.map_or(true, |r| r < cfg.feas_tol * 10.0);
    let mut text = format!(
        "verdict: {:?}\ncompletely positive: {}\n||Tr_K[R] - I||: {:.3e}",
        tni.verdict, tni.cp_ok, tni.identity_deviation
    );
    if let Some(r) = covariance_residual {
        text.push_str(&format!("\ncovariance residual: {r:.3e}"));
    }
    let report = ChannelCheckReport {
        tni,
        covariance_residual,
    };
    emit(cfg, &report, text)?;
    Ok(if ok { 0 } else { 1 })
}

fn load_covariant(
    channel_path: &Path,
    rep_path: &Path,
    cfg: &RunConfig,
) -> Result<(ChoiOperator, crate::channels::CovariantChoi), CliError> {
    let file: ChannelFile = load_json(channel_path)?;
    let choi = ChoiOperator::new(file.matrix, file.dim_in, file.dim_out)?;
    let rep: Representation = load_json(rep_path)?;
    if rep.dim() != file.dim_in * file.dim_out {
        return Err(CliError::Config(format!(
            "representation dimension {} does not match channel space {}",
            rep.dim(),
            file.dim_in * file.dim_out
        )));
    }
    let dec = rep.isotypic_decompose(cfg.tol)?;
    let twirled = dec.twirl(choi.matrix());
    let residual = twirled.sub(choi.matrix()).frobenius_norm();
    if residual > cfg.feas_tol * 100.0 * choi.matrix().frobenius_norm().max(1.0) {
        return Err(CliError::Config(format!(
            "channel is not covariant under the given representation (residual {residual:.3e})"
        )));
    }
    let cov = project_covariant(&choi, &dec, cfg.tol.max(1e-7))?;
    Ok((choi, cov))
}

fn cmd_channel_extremal(
    channel_path: &Path,
    rep_path: &Path,
    witness_out: Option<&Path>,
    cfg: &RunConfig,
    witness_only: bool,
) -> Result<i32, CliError> {
    let (_choi, cov) = load_covariant(channel_path, rep_path, cfg)?;
    let report = qo_extremality(&cov, cfg.tol)?;
    if let (Some(path), Some(w)) = (witness_out, report.witness.as_ref()) {
        write_json(path, w)?;
    }
    if witness_only {
        match (&report.witness, report.witness_step) {
            (Some(w), Some(t)) => {
                #[derive(Serialize)]
                struct WitnessReport<'a> {
                    witness: &'a ComplexMatrix,
                    witness_step: f64,
                }
                emit(
                    cfg,
                    &WitnessReport {
                        witness: w,
                        witness_step: t,
                    },
                    format!("witness found, feasible step {t:.6e}"),
                )?;
                Ok(0)
            }
            _ => {
                emit(cfg, &report, "extremal: no witness exists".into())?;
                Ok(1)
            }
        }
    } else {
        let text = format!(
            "extremal: {}\nrank: {}\nspan: {}/{} (bound ok: {})",
            report.is_extremal,
            report.rank,
            report.span_achieved,
            report.span_required,
            report.necessary_bound_ok
        );
        emit(cfg, &report, text)?;
        Ok(if report.is_extremal { 0 } else { 1 })
    }
}

fn cmd_channel_apply(
    channel_path: &Path,
    rho_path: &Path,
    cfg: &RunConfig,
) -> Result<i32, CliError> {
    let file: ChannelFile = load_json(channel_path)?;
    let choi = ChoiOperator::new(file.matrix, file.dim_in, file.dim_out)?;
    let rho: ComplexMatrix = load_json(rho_path)?;
    let out = choi.apply(&rho)?;
    let text = format!("output trace: {:.12}", out.trace().re);
    emit(cfg, &out, text)?;
    Ok(0)
}

#[derive(Serialize)]
struct ExampleReport {
    name: String,
    dim_in: usize,
    dim_out: usize,
    channel: ChannelFile,
    expected_extremal: bool,
    expected_trace_preserving: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity_value: Option<f64>,
}

fn example_report(name: &str, d: usize) -> Result<ExampleReport, CliError> {
    let ex = builtin_examples(name, d)?;
    let base = ex.choi.base();
    Ok(ExampleReport {
        name: ex.name.clone(),
        dim_in: base.dim_in(),
        dim_out: base.dim_out(),
        channel: ChannelFile {
            dim_in: base.dim_in(),
            dim_out: base.dim_out(),
            matrix: base.matrix().clone(),
        },
        expected_extremal: ex.expected_extremal,
        expected_trace_preserving: ex.expected_trace_preserving,
        fidelity_value: ex.fidelity.as_ref().map(|(_, v)| *v),
    })
}

fn cmd_channel_example(
    name: &str,
    d: usize,
    check: Option<ExampleCheck>,
    cfg: &RunConfig,
) -> Result<i32, CliError> {
    let ex = builtin_examples(name, d)?;
    let report = example_report(name, d)?;
    let text = format!(
        "{}: dim_in {}, dim_out {}, expected extremal {}, trace-preserving {}",
        report.name,
        report.dim_in,
        report.dim_out,
        report.expected_extremal,
        report.expected_trace_preserving
    );
    emit(cfg, &report, text)?;
    match check {
        None => Ok(0),
        Some(ExampleCheck::Extremal) => {
            let r = qo_extremality(&ex.choi, cfg.tol)?;
            Ok(if r.is_extremal { 0 } else { 1 })
        }
        Some(ExampleCheck::Tni) => {
            let tni = ex.choi.base().check_tni(cfg.feas_tol);
            Ok(if tni.verdict == TniVerdict::TracePreserving {
                0
            } else {
                1
            })
        }
    }
}

#[derive(Serialize)]
struct OptimizeReport {
    value: f64,
    iterations: usize,
    converged: bool,
    restart: usize,
    maximizer: ComplexMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    extremality: Option<crate::extremality::ExtremalityReport>,
}

fn cmd_optimize(cmd: &OptimizeCmd, cfg: &RunConfig) -> Result<i32, CliError> {
    let mut opt_cfg = OptimizeConfig {
        tol: cfg.tol,
        feas_tol: cfg.feas_tol,
        seed: cfg.rng_seed,
        ..OptimizeConfig::default()
    };
    let (w, set) = match cmd {
        OptimizeCmd::Povm { cost, rep, restarts } => {
            if let Some(r) = restarts {
                opt_cfg.restarts = *r;
            }
            let w = CostOperator::new(load_json(cost)?)?;
            let rep: Representation = load_json(rep)?;
            (w, ConvexSetSpec::povm(rep.isotypic_decompose(cfg.tol)?))
        }
        OptimizeCmd::Channel {
            cost,
            rep,
            dim_in,
            dim_out,
            target_k,
            restarts,
        } => {
            if let Some(r) = restarts {
                opt_cfg.restarts = *r;
            }
            let w = CostOperator::new(load_json(cost)?)?;
            let rep: Representation = load_json(rep)?;
            let k = target_k
                .as_ref()
                .map(|p| load_json::<ComplexMatrix>(p))
                .transpose()?;
            let dec = rep.isotypic_decompose(cfg.tol)?;
            (w, ConvexSetSpec::channels(dec, *dim_in, *dim_out, k)?)
        }
    };
    let out = maximize_linear(&w, &set, &opt_cfg)?;
    let report = OptimizeReport {
        value: out.value,
        iterations: out.iterations,
        converged: out.converged,
        restart: out.restart,
        maximizer: out.maximizer,
        extremality: out.extremality,
    };
    let text = format!(
        "value: {:.12}\niterations: {} (converged: {}, restart {})",
        report.value, report.iterations, report.converged, report.restart
    );
    emit(cfg, &report, text)?;
    Ok(if report.converged { 0 } else { 1 })
}

fn cmd_examples(cfg: &RunConfig) -> Result<i32, CliError> {
    let mut reports = Vec::new();
    for name in builtin_example_names() {
        reports.push(example_report(name, 2)?);
    }
    let text = reports
        .iter()
        .map(|r| {
            format!(
                "{}: dim_in {}, dim_out {}, extremal {}, trace-preserving {}",
                r.name, r.dim_in, r.dim_out, r.expected_extremal, r.expected_trace_preserving
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    emit(cfg, &reports, text)?;
    Ok(0)
}
