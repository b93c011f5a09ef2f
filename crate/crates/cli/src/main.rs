//! Command-line interface: lattice/dual construction, exact
//! distributions, sampling, spectral gaps, and the verification suites.
//!
//! Exit codes: 0 success, 1 configuration error, 2 state-space cap
//! exceeded, 3 verification failure.

mod jsonfmt;

use clap::{Args, CommandFactory, Parser, Subcommand};
use jsonfmt::{fmt_f64, json_array, JsonObject};
use pottsmc::dynamics::{RestrictedContext, RngStream};
use pottsmc::error::Error as CoreError;
use pottsmc::exact::{
    build_hb_matrix_capped, build_modified_sw_matrix_capped, build_q_matrix_capped,
    build_restricted_hb_matrix_capped, build_sw_matrix_capped, build_sw_rc_matrix_capped,
    run_suite, spectral_gap, ChainMatrix, InstanceOverride, Suite, SuiteConfig,
    DEFAULT_FACTOR_CAP,
};
use pottsmc::graph::{build_dual_square_lattice, dual_map_for, DualMap, Graph};
use pottsmc::model::{
    exact_distribution_capped, log_potts_weight, log_rc_weight, restricted_potts_distribution,
    spin_space_size, ModelParams, PottsConfig, RcState, StateSpace, DEFAULT_ENUMERATION_CAP,
};
use pottsmc::stats::{
    run_chain, tv_distance, DynamicsId, RecordOptions, RunSpec, HISTOGRAM_STATE_CAP,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Default RNG seed used by every randomized subcommand.
const DEFAULT_SEED: u64 = 42;
/// How many leading eigenvalues the `gap` subcommand reports.
const REPORTED_EIGENVALUES: usize = 8;

#[derive(Parser)]
#[command(
    name = "pottsmc",
    version,
    about = "Potts / random-cluster dynamics: lattices, samplers, exact spectral gaps, verification suites"
)]
struct Cli {
    /// List the verification suite names and exit.
    #[arg(long)]
    list_suites: bool,

    /// Worker threads for matrix products. Results are identical for
    /// every value; the default keeps runs fully sequential.
    #[arg(long, default_value_t = 1, global = true)]
    threads: usize,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a square lattice as an edge list (optionally with its planar
    /// dual and the edge bijection).
    Lattice(LatticeArgs),
    /// Emit an exact distribution as CSV: state_index,weight,probability.
    Dist(DistArgs),
    /// Run a sampler; write the trajectory CSV and print a summary JSON.
    Sample(SampleArgs),
    /// Build an exact chain matrix and report its spectrum and gap.
    Gap(GapArgs),
    /// Run a verification suite and report its records as JSON.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Square-lattice side length.
    #[arg(long = "L", value_name = "SIDE", conflicts_with = "graph")]
    side: Option<usize>,
    /// Edge-list file ("n m" header, then one "u v" line per edge).
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct ParamArgs {
    /// Number of colors (q >= 2).
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// Inverse temperature; the bond probability is 1 - exp(-beta).
    #[arg(long, conflicts_with = "p")]
    beta: Option<f64>,
    /// Bond probability in [0,1); beta is derived.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args)]
struct LatticeArgs {
    /// Square-lattice side length.
    #[arg(long = "L", value_name = "SIDE")]
    side: usize,
    /// Also emit the planar dual and the edge bijection.
    #[arg(long)]
    dual: bool,
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// State space: potts | rc.
    #[arg(long, default_value = "potts")]
    space: String,
    #[command(flatten)]
    params: ParamArgs,
    /// Cap on the enumerated state space.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Dynamics: hb | sw | msw | rhb.
    #[arg(long)]
    dynamics: String,
    #[command(flatten)]
    params: ParamArgs,
    /// Total steps (burn-in included).
    #[arg(long)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    burnin: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Record every thin-th step.
    #[arg(long, default_value_t = 1)]
    thin: u64,
    /// Pinned "vertex,color" for the restricted dynamics.
    #[arg(long, value_name = "V,K")]
    pin: Option<String>,
    /// Trajectory CSV path (step,energy[,state_index]).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct GapArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Chain: hb | sw | swrc | msw | q | rhb.
    #[arg(long)]
    chain: String,
    #[command(flatten)]
    params: ParamArgs,
    /// Pinned "vertex,color" for the restricted chain.
    #[arg(long, value_name = "V,K")]
    pin: Option<String>,
    /// Cap on enumerated states per matrix factor.
    #[arg(long, default_value_t = DEFAULT_FACTOR_CAP)]
    cap: usize,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: lemma3 | lemma4 | thm1 | thm1p | prop5 | duality | all.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Cap on enumerated states per matrix factor.
    #[arg(long, default_value_t = DEFAULT_FACTOR_CAP)]
    cap: usize,
    /// Optional single instance instead of the standard grid.
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long, conflicts_with = "p")]
    beta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_name = "V,K")]
    pin: Option<String>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Config(String),
    Cap(String),
    Verification(usize),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Cap(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) => m.clone(),
            Failure::Cap(m) => m.clone(),
            Failure::Verification(n) => format!("{n} verification check(s) failed"),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::CapExceeded { .. } => Failure::Cap(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    pottsmc::exact::set_matmul_threads(cli.threads);
    if cli.list_suites {
        for name in Suite::NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    match cli.command {
        Some(Command::Lattice(args)) => cmd_lattice(args),
        Some(Command::Dist(args)) => cmd_dist(args),
        Some(Command::Sample(args)) => cmd_sample(args),
        Some(Command::Gap(args)) => cmd_gap(args),
        Some(Command::Verify(args)) => cmd_verify(args),
        None => {
            Cli::command().print_help().ok();
            Err(Failure::Config("a subcommand is required".into()))
        }
    }
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

impl GraphArgs {
    fn load(&self) -> Result<(Graph, String), Failure> {
        match (&self.side, &self.graph) {
            (Some(side), None) => Ok((
                Graph::square_lattice(*side).map_err(Failure::from)?,
                format!("lattice L={side}"),
            )),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
                let g = Graph::from_edge_list(&text).map_err(Failure::from)?;
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "graph".into());
                Ok((g, label))
            }
            _ => Err(Failure::Config(
                "exactly one of --L or --graph is required".into(),
            )),
        }
    }
}

impl ParamArgs {
    fn to_params(&self) -> Result<ModelParams<f64>, Failure> {
        match (self.beta, self.p) {
            (Some(beta), None) => ModelParams::new(self.q, beta).map_err(Failure::from),
            (None, Some(p)) => ModelParams::from_p(self.q, p).map_err(Failure::from),
            _ => Err(Failure::Config("exactly one of --beta or --p is required".into())),
        }
    }
}

fn parse_pin(pin: &Option<String>) -> Result<Option<RestrictedContext>, Failure> {
    let Some(text) = pin else { return Ok(None) };
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Failure::Config(format!("--pin expects \"v,k\", got '{text}'")));
    }
    let v = parts[0]
        .trim()
        .parse::<usize>()
        .map_err(|e| Failure::Config(format!("bad pin vertex: {e}")))?;
    let k = parts[1]
        .trim()
        .parse::<u8>()
        .map_err(|e| Failure::Config(format!("bad pin color: {e}")))?;
    Ok(Some(RestrictedContext::new(v, k)))
}

fn cmd_lattice(args: LatticeArgs) -> Result<(), Failure> {
    let text = if args.dual {
        build_dual_square_lattice(args.side)
            .map_err(Failure::from)?
            .to_text()
    } else {
        Graph::square_lattice(args.side)
            .map_err(Failure::from)?
            .to_edge_list()
    };
    write_output(args.out.as_deref(), &text)
}

fn cmd_dist(args: DistArgs) -> Result<(), Failure> {
    let (g, _) = args.graph.load()?;
    let params = args.params.to_params()?;
    let space = match args.space.as_str() {
        "potts" => StateSpace::Potts,
        "rc" => StateSpace::RandomCluster,
        other => return Err(Failure::Config(format!("unknown space '{other}'"))),
    };
    let probs = exact_distribution_capped(&g, &params, space, args.cap).map_err(Failure::from)?;
    let mut csv = String::from("state_index,weight,probability\n");
    for (idx, &prob) in probs.iter().enumerate() {
        let log_w = match space {
            StateSpace::Potts => log_potts_weight(
                &g,
                &params,
                &PottsConfig::from_index(idx as u64, g.n_vertices(), params.q()),
            ),
            StateSpace::RandomCluster => {
                let a = RcState::from_index(idx as u64, g.n_edges()).map_err(Failure::from)?;
                log_rc_weight(&g, &params, &a).map_err(Failure::from)?
            }
        };
        csv.push_str(&format!("{idx},{},{}\n", fmt_f64(log_w.exp()), fmt_f64(prob)));
    }
    write_output(args.out.as_deref(), &csv)
}

fn cmd_sample(args: SampleArgs) -> Result<(), Failure> {
    let (g, label) = args.graph.load()?;
    let dynamics = DynamicsId::parse(&args.dynamics).map_err(Failure::from)?;
    let pin = parse_pin(&args.pin)?;
    let mut params = args.params.to_params()?;

    let dual: Option<DualMap> = if dynamics == DynamicsId::ModifiedSw {
        params = params.with_dual().map_err(Failure::from)?;
        Some(dual_map_for(&g).map_err(Failure::from)?)
    } else {
        None
    };

    let spec = RunSpec {
        graph: &g,
        dynamics,
        dual: dual.as_ref(),
        pin,
    };
    let opts = RecordOptions {
        series: true,
        histogram: true,
        states: true,
        thin: args.thin,
    };
    let mut rng = RngStream::new(args.seed);
    let summary = run_chain(&spec, &params, args.steps, args.burnin, &mut rng, &opts, None)
        .map_err(Failure::from)?;

    // Trajectory CSV.
    let energies = summary.energy_series.as_ref().expect("series recorded");
    let mut csv = String::new();
    if let Some(states) = &summary.state_series {
        csv.push_str("step,energy,state_index\n");
        for (i, (&e, &s)) in energies.iter().zip(states).enumerate() {
            let step = args.burnin + i as u64 * args.thin;
            csv.push_str(&format!("{step},{e},{s}\n"));
        }
    } else {
        csv.push_str("step,energy\n");
        for (i, &e) in energies.iter().enumerate() {
            let step = args.burnin + i as u64 * args.thin;
            csv.push_str(&format!("{step},{e}\n"));
        }
    }
    std::fs::write(&args.out, csv)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", args.out.display())))?;

    // Summary JSON on stdout.
    let mut obj = JsonObject::new()
        .string("dynamics", &dynamics.to_string())
        .string("graph", &label)
        .int("q", u64::from(params.q()))
        .float("beta", params.beta())
        .int("steps", args.steps)
        .int("recorded", summary.n_steps)
        .float("mean_energy", summary.mean_energy);
    if let Some(iat) = summary.iat {
        obj = obj.float("iat", iat.iat).float("iat_stderr", iat.stderr);
    }
    if let Some(hist) = &summary.state_histogram {
        if let Some(exact) = exact_reference(&g, &params, dynamics, pin)? {
            let tv = tv_distance(hist, &exact).map_err(Failure::from)?;
            obj = obj.float("tv_vs_exact", tv);
        }
    }
    println!("{}", obj.finish());
    Ok(())
}

/// Exact stationary distribution matching a sampler, when the space is
/// small enough to enumerate.
fn exact_reference(
    g: &Graph,
    params: &ModelParams<f64>,
    dynamics: DynamicsId,
    pin: Option<RestrictedContext>,
) -> Result<Option<Vec<f64>>, Failure> {
    if spin_space_size(g.n_vertices(), params.q()) > HISTOGRAM_STATE_CAP {
        return Ok(None);
    }
    let exact = match dynamics {
        DynamicsId::RestrictedHb => {
            let ctx = pin.expect("restricted dynamics was validated");
            restricted_potts_distribution(g, params, ctx.vertex, ctx.color)
                .map_err(Failure::from)?
        }
        _ => exact_distribution_capped(g, params, StateSpace::Potts, HISTOGRAM_STATE_CAP as usize)
            .map_err(Failure::from)?,
    };
    Ok(Some(exact))
}

fn cmd_gap(args: GapArgs) -> Result<(), Failure> {
    let (g, label) = args.graph.load()?;
    let mut params = args.params.to_params()?;
    let pin = parse_pin(&args.pin)?;
    let cap = args.cap;

    let chain: ChainMatrix<f64> = match args.chain.as_str() {
        "hb" => build_hb_matrix_capped(&g, &params, cap).map_err(Failure::from)?,
        "sw" => build_sw_matrix_capped(&g, &params, cap).map_err(Failure::from)?,
        "swrc" => build_sw_rc_matrix_capped(&g, &params, cap).map_err(Failure::from)?,
        "q" => build_q_matrix_capped(&g, &params, cap).map_err(Failure::from)?,
        "msw" => {
            params = params.with_dual().map_err(Failure::from)?;
            let dmap = dual_map_for(&g).map_err(Failure::from)?;
            build_modified_sw_matrix_capped(&dmap, &params, cap).map_err(Failure::from)?
        }
        "rhb" => {
            let ctx = pin.ok_or_else(|| {
                Failure::Config("--pin v,k is required for the restricted chain".into())
            })?;
            build_restricted_hb_matrix_capped(&g, &params, &ctx, cap).map_err(Failure::from)?
        }
        other => return Err(Failure::Config(format!("unknown chain '{other}'"))),
    };

    let spectrum = spectral_gap(&chain).map_err(Failure::from)?;
    let top: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .take(REPORTED_EIGENVALUES)
        .copied()
        .collect();
    let json = JsonObject::new()
        .string("graph", &label)
        .string("chain", &args.chain)
        .int("q", u64::from(params.q()))
        .float("beta", params.beta())
        .int("dim", chain.dim() as u64)
        .float_array("eigenvalues", &top)
        .float("gap", spectrum.gap)
        .finish();
    write_output(args.out.as_deref(), &format!("{json}\n"))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let suite = Suite::parse(&args.suite).map_err(Failure::from)?;
    let config = SuiteConfig {
        seed: args.seed,
        cap: args.cap,
    };

    let over = if args.graph.side.is_some() || args.graph.graph.is_some() {
        let (graph, label) = args.graph.load()?;
        let q = args.q.unwrap_or(2);
        let params = match (args.beta, args.p) {
            (Some(beta), None) => ModelParams::new(q, beta).map_err(Failure::from)?,
            (None, Some(p)) => ModelParams::from_p(q, p).map_err(Failure::from)?,
            _ => {
                return Err(Failure::Config(
                    "single-instance verify needs exactly one of --beta or --p".into(),
                ))
            }
        };
        Some(InstanceOverride {
            graph,
            label,
            params,
            pin: parse_pin(&args.pin)?,
        })
    } else {
        None
    };

    let records = run_suite(suite, &config, over.as_ref()).map_err(Failure::from)?;
    let items: Vec<String> = records
        .iter()
        .map(|r| {
            JsonObject::new()
                .string("suite", &r.suite)
                .string("check", &r.check)
                .string("instance", &r.instance)
                .string("params", &r.params)
                .float("lhs", r.lhs)
                .float("rhs", r.rhs)
                .float("slack", r.slack)
                .bool("pass", r.pass)
                .finish()
        })
        .collect();
    write_output(args.out.as_deref(), &format!("{}\n", json_array(items)))?;

    let failures = records.iter().filter(|r| !r.pass).count();
    if failures > 0 {
        return Err(Failure::Verification(failures));
    }
    Ok(())
}
