//! `cqze` command line: single gate/transport runs, grid sweeps, per-step
//! traces and the self-check suite.
//!
//! Exit codes: 0 success, 1 bad usage or invalid inputs, 2 I/O failure,
//! 3 self-check failure.

mod config;

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cqze::cnot::{
    branch_probability, dual_cqze_run, exit_port, ideal_cnot_output, measure_d0, path_state,
    state4_fidelity, BranchPolicy, ExitBranch, ExitElement, JOINT_BASIS,
};
use cqze::sweep::{sweep, write_csv, SweepSpec, DEFAULT_SIM_COST_CAP};
use cqze::transport::{run_transport, run_transport_with};
use cqze::verify::run_checks;
use cqze::zeno::{ChainHistory, HistoryMode};
use cqze::{Complex64, CycleConfig, Outcome, QubitAmplitudes};

use config::{complete_pair, format_complex, BranchChoice, QuantityChoice, RunConfig};

const DEFAULT_M: u32 = 50;
const DEFAULT_N: u32 = 1250;

#[derive(Parser)]
#[command(
    name = "cqze",
    version,
    about = "Chained-Zeno interferometer gate and qubit-transport simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the two-module gate once; report branches, losses and infidelity
    Cnot(CnotArgs),
    /// Run the two-round transport protocol; report the delivered qubit
    Transport(TransportArgs),
    /// Evaluate an (M, N) grid of efficiency or fidelity as CSV
    Sweep(SweepArgs),
    /// Emit the per-step channel-occupancy and loss trace as CSV
    Trace(TraceArgs),
    /// Run the self-check suite; exit 3 if any check fails
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Outer cycle count M (default 50)
    #[arg(long, value_name = "M")]
    m: Option<u32>,
    /// Inner cycle count N (default 1250)
    #[arg(long, value_name = "N")]
    n: Option<u32>,
    /// Bob's pass amplitude, `re` or `re,im` (default 1/sqrt(2))
    #[arg(long, value_parser = config::parse_complex, value_name = "AMP")]
    alpha: Option<Complex64>,
    /// Bob's block amplitude (default completes alpha to unit norm)
    #[arg(long, value_parser = config::parse_complex, value_name = "AMP")]
    beta: Option<Complex64>,
    /// Key=value file supplying defaults for flags not given
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the merged settings as a key=value file and continue; feed it
    /// back with --config to replay the run
    #[arg(long, value_name = "FILE")]
    save_config: Option<PathBuf>,
    /// Worker-thread count for the data-parallel sections
    #[arg(long, value_name = "COUNT")]
    jobs: Option<usize>,
}

impl CommonArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            m: self.m,
            n: self.n,
            alpha: self.alpha,
            beta: self.beta,
            jobs: self.jobs,
            ..RunConfig::default()
        }
    }
}

#[derive(Args)]
struct CnotArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Photon H amplitude (default 1/sqrt(2))
    #[arg(long, value_parser = config::parse_complex, value_name = "AMP")]
    lambda: Option<Complex64>,
    /// Photon V amplitude (default completes lambda to unit norm)
    #[arg(long, value_parser = config::parse_complex, value_name = "AMP")]
    mu: Option<Complex64>,
    /// How the exit path measurement chooses its branch
    #[arg(long, value_enum)]
    branch: Option<BranchChoice>,
}

#[derive(Args)]
struct TransportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// How the exit path measurement chooses its branch
    #[arg(long, value_enum)]
    branch: Option<BranchChoice>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Quantity to tabulate
    #[arg(long, value_enum)]
    quantity: Option<QuantityChoice>,
    /// Smallest M on the grid (default 5)
    #[arg(long)]
    m_min: Option<u32>,
    /// Largest M on the grid (default 75)
    #[arg(long)]
    m_max: Option<u32>,
    /// M stride (default 5)
    #[arg(long)]
    m_step: Option<u32>,
    /// Smallest N on the grid (default 100)
    #[arg(long)]
    n_min: Option<u32>,
    /// Largest N on the grid (default 1500)
    #[arg(long)]
    n_max: Option<u32>,
    /// N stride (default 100)
    #[arg(long)]
    n_step: Option<u32>,
    /// Per-cell rotation budget for the step simulation; 0 disables it
    #[arg(long, value_name = "ROTATIONS")]
    sim_cost_cap: Option<u64>,
    /// CSV destination (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    output: Option<String>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Photon H amplitude for the gate trace (default 1/sqrt(2))
    #[arg(long, value_parser = config::parse_complex, value_name = "AMP")]
    lambda: Option<Complex64>,
    /// Photon V amplitude for the gate trace
    #[arg(long, value_parser = config::parse_complex, value_name = "AMP")]
    mu: Option<Complex64>,
    /// Trace the full two-round transport instead of a single gate run
    #[arg(long)]
    transport: bool,
    /// CSV destination (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    output: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Smaller sample counts, no long asymptotic runs
    #[arg(long)]
    fast: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Verification,
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Verification => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) => f.write_str(msg),
            CliError::Verification => f.write_str("verification failed"),
        }
    }
}

impl From<cqze::Error> for CliError {
    fn from(e: cqze::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Cnot(args) => cmd_cnot(args),
        Command::Transport(args) => cmd_transport(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
        }
    }
}

fn save_config(path: Option<&PathBuf>, cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(p) = path {
        std::fs::write(p, cfg.serialize())
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn cycle_config(cfg: &RunConfig) -> Result<CycleConfig, CliError> {
    Ok(CycleConfig::new(
        cfg.m.unwrap_or(DEFAULT_M),
        cfg.n.unwrap_or(DEFAULT_N),
    )?)
}

fn bob_pair(cfg: &RunConfig) -> Result<QubitAmplitudes, CliError> {
    complete_pair("alpha", cfg.alpha, "beta", cfg.beta).map_err(CliError::Usage)
}

fn photon_pair(cfg: &RunConfig) -> Result<QubitAmplitudes, CliError> {
    complete_pair("lambda", cfg.lambda, "mu", cfg.mu).map_err(CliError::Usage)
}

fn open_output(path: Option<&str>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(io::stdout().lock())),
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| CliError::Io(format!("cannot write {p}: {e}")))?;
            Ok(Box::new(io::BufWriter::new(file)))
        }
    }
}

fn io_err(e: io::Error) -> CliError {
    CliError::Io(format!("write failed: {e}"))
}

/// Runs `f` inside a dedicated thread pool when `--jobs` is given (and the
/// build is parallel); otherwise on the caller's pool or thread.
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    #[cfg(feature = "parallel")]
    if let Some(threads) = jobs {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
        return Ok(pool.install(f));
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    Ok(f())
}

fn branch_name(branch: ExitBranch) -> &'static str {
    match branch {
        ExitBranch::MainPath => "main-path",
        ExitBranch::D0Path => "d0-path",
    }
}

/// Ideal gate output for the measured branch: the D0 branch carries the
/// lower-beam component with flipped sign, so its ideal has mu negated.
fn ideal_for_branch(
    photon: &QubitAmplitudes,
    bob: &QubitAmplitudes,
    branch: ExitBranch,
) -> [Complex64; 4] {
    match branch {
        ExitBranch::MainPath => ideal_cnot_output(photon, bob),
        ExitBranch::D0Path => {
            let flipped = QubitAmplitudes::new(photon.a0(), -photon.a1())
                .expect("negating one amplitude keeps the norm");
            ideal_cnot_output(&flipped, bob)
        }
    }
}

fn cmd_cnot(args: CnotArgs) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_ref())?;
    let cfg = RunConfig {
        lambda: args.lambda,
        mu: args.mu,
        branch: args.branch,
        ..args.common.to_config()
    }
    .or(file);
    save_config(args.common.save_config.as_ref(), &cfg)?;
    let cycles = cycle_config(&cfg)?;
    let bob = bob_pair(&cfg)?;
    let photon = photon_pair(&cfg)?;
    let policy = cfg.branch.unwrap_or(BranchChoice::Follow).policy();

    let (state, _) = dual_cqze_run(&photon, &bob, cycles, ExitElement::Bs50, HistoryMode::None)?;
    let d3 = state.terminal(Outcome::D3);
    let absorbed = state.terminal(Outcome::BobAbsorbed);
    let p_main = branch_probability(&state, ExitBranch::MainPath);
    let p_d0 = branch_probability(&state, ExitBranch::D0Path);
    let out = measure_d0(state, policy);

    println!("two-module gate  M={} N={}", cycles.m(), cycles.n());
    println!(
        "photon (lambda, mu): {}  {}",
        format_complex(photon.a0()),
        format_complex(photon.a1())
    );
    println!(
        "bob (alpha, beta):   {}  {}",
        format_complex(bob.a0()),
        format_complex(bob.a1())
    );
    println!("exit-port probabilities: main-path {p_main}  d0-path {p_d0}");
    println!("survival (both ports): {}", p_main + p_d0);
    println!("losses: discard-detector {d3}  bob-absorbed {absorbed}");
    println!(
        "branch taken: {} (probability {})",
        branch_name(out.branch),
        out.branch_probability
    );
    let got = path_state(&out.joint_output, exit_port(out.branch));
    println!("renormalized output amplitudes (bob,polarization = re,im):");
    for ((b, pol), amp) in JOINT_BASIS.iter().zip(got.iter()) {
        println!("  {b:?},{pol:?} = {}", format_complex(*amp));
    }
    let ideal = ideal_for_branch(&photon, &bob, out.branch);
    let infidelity = (1.0 - state4_fidelity(&got, &ideal)).max(0.0);
    println!("infidelity vs ideal gate output: {infidelity:e}");
    Ok(())
}

fn cmd_transport(args: TransportArgs) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_ref())?;
    let cfg = RunConfig {
        branch: args.branch,
        ..args.common.to_config()
    }
    .or(file);
    save_config(args.common.save_config.as_ref(), &cfg)?;
    let cycles = cycle_config(&cfg)?;
    let bob = bob_pair(&cfg)?;
    let policy = cfg.branch.unwrap_or(BranchChoice::Follow).policy();

    let res = run_transport(&bob, cycles, policy)?;

    println!("qubit transport  M={} N={}", cycles.m(), cycles.n());
    println!(
        "bob input (alpha, beta): {}  {}",
        format_complex(bob.a0()),
        format_complex(bob.a1())
    );
    println!(
        "exit-port probabilities: main-path {}  d0-path {}",
        res.branch_probabilities[0], res.branch_probabilities[1]
    );
    println!(
        "branch taken: {} (success probability {})",
        branch_name(res.branch),
        res.success_probability
    );
    println!("loss probability (both rounds): {}", res.loss_probability);
    println!("fidelity vs transported target: {}", res.fidelity);
    println!("transfer overlap: {}", res.transfer_overlap);
    println!("coherent overlap: {}", res.coherent_overlap);
    match res.alice_output {
        Some(q) => println!(
            "alice output (H, V): {}  {}",
            format_complex(q.a0()),
            format_complex(q.a1())
        ),
        None => println!("alice output: none (no surviving amplitude)"),
    }
    match res.bob_residual {
        Some(q) => println!(
            "bob residual (pass, block): {}  {}",
            format_complex(q.a0()),
            format_complex(q.a1())
        ),
        None => println!("bob residual: none (no surviving amplitude)"),
    }
    Ok(())
}

fn grid_axis(name: &str, min: u32, max: u32, step: u32) -> Result<Vec<u32>, CliError> {
    if min == 0 || step == 0 || min > max {
        return Err(CliError::Usage(format!(
            "invalid {name} axis: min {min}, max {max}, step {step}"
        )));
    }
    Ok((min..=max).step_by(step as usize).collect())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_ref())?;
    let cfg = RunConfig {
        quantity: args.quantity,
        m_min: args.m_min,
        m_max: args.m_max,
        m_step: args.m_step,
        n_min: args.n_min,
        n_max: args.n_max,
        n_step: args.n_step,
        sim_cost_cap: args.sim_cost_cap,
        output: args.output,
        ..args.common.to_config()
    }
    .or(file);
    save_config(args.common.save_config.as_ref(), &cfg)?;
    let bob = bob_pair(&cfg)?;
    let spec = SweepSpec {
        m_values: grid_axis(
            "M",
            cfg.m_min.unwrap_or(5),
            cfg.m_max.unwrap_or(75),
            cfg.m_step.unwrap_or(5),
        )?,
        n_values: grid_axis(
            "N",
            cfg.n_min.unwrap_or(100),
            cfg.n_max.unwrap_or(1500),
            cfg.n_step.unwrap_or(100),
        )?,
        bob,
        quantity: cfg.quantity.unwrap_or(QuantityChoice::Efficiency).quantity(),
        with_simulation: true,
        sim_cost_cap: cfg.sim_cost_cap.unwrap_or(DEFAULT_SIM_COST_CAP),
    };
    let grid = with_jobs(cfg.jobs, move || sweep(&spec))??;
    let mut out = open_output(cfg.output.as_deref())?;
    write_csv(&grid, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

fn write_trace<W: Write>(
    out: &mut W,
    cycles: CycleConfig,
    rounds: &[ChainHistory],
) -> io::Result<()> {
    writeln!(out, "round,outer_cycle,inner_step,channel_prob,cum_d3,cum_bob_absorbed")?;
    let per_cycle = cycles.n() as usize + 1;
    for (round, hist) in rounds.iter().enumerate() {
        for idx in 0..hist.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                round + 1,
                idx / per_cycle + 1,
                idx % per_cycle,
                hist.channel_occupancy[idx],
                hist.cum_d3[idx],
                hist.cum_bob_absorbed[idx]
            )?;
        }
    }
    Ok(())
}

fn cmd_trace(args: TraceArgs) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_ref())?;
    let cfg = RunConfig {
        lambda: args.lambda,
        mu: args.mu,
        transport: if args.transport { Some(true) } else { None },
        output: args.output,
        ..args.common.to_config()
    }
    .or(file);
    save_config(args.common.save_config.as_ref(), &cfg)?;
    let cycles = cycle_config(&cfg)?;
    let bob = bob_pair(&cfg)?;
    let mut out = open_output(cfg.output.as_deref())?;
    if cfg.transport.unwrap_or(false) {
        let res = run_transport_with(
            &bob,
            cycles,
            BranchPolicy::ForceMain,
            HistoryMode::Boundaries,
        )?;
        write_trace(&mut out, cycles, &res.trace).map_err(io_err)?;
    } else {
        let photon = photon_pair(&cfg)?;
        let (_, hist) = dual_cqze_run(
            &photon,
            &bob,
            cycles,
            ExitElement::Bs50,
            HistoryMode::Boundaries,
        )?;
        write_trace(&mut out, cycles, std::slice::from_ref(&hist)).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let results = run_checks(args.fast);
    let mut failed = 0usize;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<28} {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} of {} checks failed", results.len());
        Err(CliError::Verification)
    } else {
        println!("all {} checks passed", results.len());
        Ok(())
    }
}
