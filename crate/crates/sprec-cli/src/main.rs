//! Batch front end for stochastic precedence analysis.
//!
//! Reads a JSON variables config, dispatches to the order engines and
//! emits one machine-readable report on stdout. Verdicts live in the
//! report, never in the exit code: 0 = ran, 2 = invalid config or flags,
//! 3 = numerical nonconvergence, 4 = internal error.

mod config;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sprec_core::{
    audit_claim, check_csp, check_hr, check_lr, check_sp, check_ssp, make_distribution,
    perm_probability, perm_table, search_counterexample, series_parallel_compare, sp_pair,
    sp_ratio, AllocationSpec, ClaimId, DistSpec, Distribution, Error as EngineError,
    InstanceSpace, Permutation, Relation, Rng,
};

use config::{load_variables, MethodArg, RunConfig};
use report::{Payload, Report};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config content (exit 2).
    Config(String),
    /// Engine-level failure, mapped by kind (exit 2, 3 or 4).
    Engine(EngineError),
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Engine(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine(e) => match e {
                EngineError::InvalidParameter(_)
                | EngineError::MethodUnsupported(_)
                | EngineError::TooManyVariables { .. }
                | EngineError::InvalidPermutation(_)
                | EngineError::PreconditionNotEstablished(_)
                | EngineError::DegenerateSupport
                | EngineError::BothZero => 2,
                EngineError::Nonconvergence { .. } => 3,
                EngineError::HazardUndefined { .. } => 4,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Engine(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "sprec", version, about = "Ordering-event probabilities and stochastic precedence decisions for independent random variables")]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Variables config: JSON file with a `variables` array, or '-' for stdin
    #[arg(short, long, global = true)]
    config: Option<String>,
    /// Computation method; auto picks exact when available, else quadrature
    #[arg(long, global = true, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Monte Carlo samples
    #[arg(long, global = true, default_value_t = 1_000_000)]
    samples: u64,
    /// Seed for all Monte Carlo streams
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Quadrature base grid (intervals)
    #[arg(long, global = true, default_value_t = 2048)]
    grid: usize,
    /// Grid points for order-monotonicity checks
    #[arg(long = "order-grid", global = true, default_value_t = 4096)]
    order_grid: usize,
    /// Support truncation quantile for grids
    #[arg(long, global = true, default_value_t = 1e-9)]
    trunc: f64,
    /// Tie convention for discrete ordering events
    #[arg(long, global = true, value_enum, default_value = "strict")]
    ties: TiesArg,
    /// Permutation-table cap; raising it gets factorially expensive (n! events)
    #[arg(long = "perm-cap", global = true, default_value_t = 8)]
    perm_cap: usize,
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "json")]
    out: OutFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TiesArg {
    Strict,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise stochastic order checks
    Order {
        #[command(subcommand)]
        cmd: OrderCmd,
    },
    /// Permutation ordering events
    Perm {
        #[command(subcommand)]
        cmd: PermCmd,
    },
    /// Sequential stochastic precedence
    Ssp {
        #[command(subcommand)]
        cmd: SspCmd,
    },
    /// Chain stochastic precedence (adjacent pairs)
    Csp {
        #[command(subcommand)]
        cmd: CspCmd,
    },
    /// Audit an ordering claim on the configured variables
    Audit {
        /// One of lemma-2.1, theorem-2.1, theorem-2.2, corollary-2.1, example-2.1, sp-transitivity
        #[arg(long)]
        claim: String,
    },
    /// Randomized counterexample search over generated instances
    Search {
        #[arg(long)]
        claim: String,
        /// Instance family (default chosen per claim)
        #[arg(long, value_enum)]
        space: Option<SpaceArg>,
        #[arg(long, default_value_t = 3)]
        vars: usize,
        #[arg(long, default_value_t = 100)]
        budget: u64,
        /// Discrete space: atoms per variable (upper bound)
        #[arg(long = "max-atoms", default_value_t = 3)]
        max_atoms: usize,
        /// Discrete space: atom values drawn from 1..=max-value
        #[arg(long = "max-value", default_value_t = 6)]
        max_value: usize,
        #[arg(long = "rate-min", default_value_t = 0.5)]
        rate_min: f64,
        #[arg(long = "rate-max", default_value_t = 4.0)]
        rate_max: f64,
        #[arg(long = "shape-min", default_value_t = 1.0)]
        shape_min: f64,
        #[arg(long = "shape-max", default_value_t = 4.0)]
        shape_max: f64,
        #[arg(long = "scale-min", default_value_t = 0.5)]
        scale_min: f64,
        #[arg(long = "scale-max", default_value_t = 3.0)]
        scale_max: f64,
    },
    /// Reliability applications
    App {
        #[command(subcommand)]
        cmd: AppCmd,
    },
    /// Built-in demonstration instances
    Demo {
        #[command(subcommand)]
        cmd: DemoCmd,
    },
}

#[derive(Subcommand)]
enum OrderCmd {
    /// Decide one pairwise order between two configured variables
    Check {
        /// lr, hr, st or sp
        #[arg(long = "type", value_enum)]
        relation: RelationArg,
        /// First variable name (default: first in config)
        #[arg(long)]
        first: Option<String>,
        /// Second variable name (default: second in config)
        #[arg(long)]
        second: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RelationArg {
    Lr,
    Hr,
    St,
    Sp,
}

#[derive(Subcommand)]
enum PermCmd {
    /// Probability of one ordering event
    Prob {
        /// Permutation as one-based indices, e.g. "3,1,2"
        #[arg(long)]
        perm: String,
    },
    /// All n! ordering-event probabilities
    Table,
}

#[derive(Subcommand)]
enum SspCmd {
    /// Decide whether the identity ordering event has maximal probability
    Check,
}

#[derive(Subcommand)]
enum CspCmd {
    /// Decide pairwise precedence over each adjacent pair
    Check,
}

#[derive(Subcommand)]
enum AppCmd {
    /// SP ratio p/(p+q) of a target ordering event against a rival
    Ratio {
        #[arg(long, conflicts_with_all = ["target_perm", "rival_perm"])]
        target: Option<f64>,
        #[arg(long, conflicts_with_all = ["target_perm", "rival_perm"])]
        rival: Option<f64>,
        /// Compute the target probability from this permutation (needs --config)
        #[arg(long = "target-perm")]
        target_perm: Option<String>,
        #[arg(long = "rival-perm")]
        rival_perm: Option<String>,
    },
    /// Compare two series-parallel allocations under common random numbers
    SeriesParallel {
        /// Slot order "series,par,par" as one-based variable indices
        #[arg(long = "alloc-a")]
        alloc_a: String,
        #[arg(long = "alloc-b")]
        alloc_b: String,
    },
}

#[derive(Subcommand)]
enum DemoCmd {
    /// The classic non-transitive discrete triple
    Blyth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    Discrete,
    ExpChain,
    WeibullChain,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let opts = &cli.opts;
    let variables = match &opts.config {
        Some(path) => load_variables(path)?,
        None => Vec::new(),
    };
    let run_config = RunConfig {
        variables,
        method: opts.method,
        samples: opts.samples,
        seed: opts.seed,
        grid: opts.grid,
        order_grid: opts.order_grid,
        trunc_quantile: opts.trunc,
        ties: match opts.ties {
            TiesArg::Strict => sprec_core::TieConvention::Strict,
            TiesArg::Weak => sprec_core::TieConvention::Weak,
        },
        perm_cap: opts.perm_cap,
    };
    run_config.validate()?;

    let mut run_config = run_config;
    let (command, payload) = dispatch(&cli.command, &mut run_config)?;
    let notes = convention_notes(&run_config)?;
    let report = Report::new(&command, run_config, notes, payload);
    match opts.out {
        OutFormat::Json => print!("{}", report::to_json(&report)),
        OutFormat::Csv => print!("{}", report::to_csv(&report)),
    }
    Ok(())
}

/// Precedence orders are classically stated for nonnegative variables;
/// runs over real-valued supports are flagged, not rejected.
fn convention_notes(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let mut notes = Vec::new();
    for d in config.distributions()? {
        if d.support().0 < 0.0 {
            notes.push(format!(
                "{} has support below zero; precedence orders are classically stated for nonnegative variables and are computed here as plain event probabilities",
                d.name()
            ));
        }
    }
    Ok(notes)
}

fn need_variables(config: &RunConfig, at_least: usize) -> Result<Vec<Distribution>, CliError> {
    if config.variables.len() < at_least {
        return Err(CliError::Config(format!(
            "this command needs a --config with at least {at_least} variables (got {})",
            config.variables.len()
        )));
    }
    config.distributions()
}

fn parse_perm(s: &str, n: usize) -> Result<Permutation, CliError> {
    let indices: Vec<usize> = s
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("bad permutation component '{part}' in '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    if indices.len() != n {
        return Err(CliError::Config(format!(
            "permutation '{s}' has {} entries but the config has {n} variables",
            indices.len()
        )));
    }
    Ok(Permutation::from_one_based(&indices)?)
}

fn parse_alloc(s: &str) -> Result<AllocationSpec, CliError> {
    let indices: Vec<usize> = s
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("bad allocation component '{part}' in '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    Ok(AllocationSpec::from_one_based(&indices)?)
}

fn find_variable<'a>(
    dists: &'a [Distribution],
    name: &Option<String>,
    default_index: usize,
) -> Result<&'a Distribution, CliError> {
    match name {
        None => Ok(&dists[default_index]),
        Some(n) => dists
            .iter()
            .find(|d| d.name() == n)
            .ok_or_else(|| CliError::Config(format!("no variable named '{n}' in config"))),
    }
}

fn dispatch(command: &Command, config: &mut RunConfig) -> Result<(String, Payload), CliError> {
    let engine = config.engine();
    let method = config.method.resolve();
    match command {
        Command::Order { cmd: OrderCmd::Check { relation, first, second } } => {
            let dists = need_variables(config, 2)?;
            let d1 = find_variable(&dists, first, 0)?;
            let d2 = find_variable(&dists, second, 1)?;
            let (relation, verdict, probs) = match relation {
                RelationArg::Lr => (Relation::Lr, check_lr(d1, d2, &engine)?, None),
                RelationArg::Hr => (Relation::Hr, check_hr(d1, d2, &engine)?, None),
                RelationArg::St => (Relation::St, sprec_core::check_st(d1, d2, &engine)?, None),
                RelationArg::Sp => {
                    let verdict = check_sp(d1, d2, method, &engine)?;
                    let pair = sp_pair(d1, d2, method, &engine)?;
                    (Relation::Sp, verdict, Some(pair))
                }
            };
            Ok((
                "order check".into(),
                Payload::OrderCheck {
                    relation,
                    first: d1.name().into(),
                    second: d2.name().into(),
                    verdict,
                    p_second_ge_first: probs.map(|p| p.0),
                    p_first_ge_second: probs.map(|p| p.1),
                },
            ))
        }
        Command::Perm { cmd } => match cmd {
            PermCmd::Prob { perm } => {
                let dists = need_variables(config, 1)?;
                let sigma = parse_perm(perm, dists.len())?;
                let estimate = perm_probability(&dists, &sigma, method, &engine)?;
                Ok(("perm prob".into(), Payload::PermProb { perm: sigma, estimate }))
            }
            PermCmd::Table => {
                let dists = need_variables(config, 1)?;
                let table = perm_table(&dists, method, &engine)?;
                Ok(("perm table".into(), Payload::PermTable { sum: table.sum(), table }))
            }
        },
        Command::Ssp { cmd: SspCmd::Check } => {
            let dists = need_variables(config, 1)?;
            let report = check_ssp(&dists, method, &engine)?;
            Ok(("ssp check".into(), Payload::SspCheck { report }))
        }
        Command::Csp { cmd: CspCmd::Check } => {
            let dists = need_variables(config, 2)?;
            let report = check_csp(&dists, method, &engine)?;
            Ok(("csp check".into(), Payload::CspCheck { report }))
        }
        Command::Audit { claim } => {
            let claim: ClaimId = claim.parse()?;
            let dists = need_variables(config, 2)?;
            let report = audit_claim(claim, &dists, method, &engine)?;
            Ok(("audit".into(), Payload::Audit { report }))
        }
        Command::Search {
            claim,
            space,
            vars,
            budget,
            max_atoms,
            max_value,
            rate_min,
            rate_max,
            shape_min,
            shape_max,
            scale_min,
            scale_max,
        } => {
            let claim: ClaimId = claim.parse()?;
            let space_kind = (*space).unwrap_or(match claim {
                ClaimId::PairSwap | ClaimId::LrChainImpliesSsp | ClaimId::FinalPairHr => SpaceArg::ExpChain,
                _ => SpaceArg::Discrete,
            });
            let space = match space_kind {
                SpaceArg::Discrete => InstanceSpace::DiscreteAtoms {
                    vars: *vars,
                    max_atoms: *max_atoms,
                    max_value: *max_value,
                },
                SpaceArg::ExpChain => InstanceSpace::ExponentialChain {
                    vars: *vars,
                    rate_min: *rate_min,
                    rate_max: *rate_max,
                },
                SpaceArg::WeibullChain => InstanceSpace::WeibullChain {
                    vars: *vars,
                    shape_min: *shape_min,
                    shape_max: *shape_max,
                    scale_min: *scale_min,
                    scale_max: *scale_max,
                },
            };
            let outcome = search_counterexample(claim, &space, *budget, config.seed, &engine)?;
            Ok(("search".into(), Payload::Search { outcome }))
        }
        Command::App { cmd } => match cmd {
            AppCmd::Ratio { target, rival, target_perm, rival_perm } => {
                match (target, rival, target_perm, rival_perm) {
                    (Some(p), Some(q), None, None) => {
                        let ratio = sp_ratio(*p, *q)?;
                        Ok((
                            "app ratio".into(),
                            Payload::AppRatio {
                                p_target: *p,
                                p_rival: *q,
                                ratio,
                                target_perm: None,
                                target_estimate: None,
                                rival_perm: None,
                                rival_estimate: None,
                            },
                        ))
                    }
                    (None, None, Some(tp), Some(rp)) => {
                        let dists = need_variables(config, 1)?;
                        let target_perm = parse_perm(tp, dists.len())?;
                        let rival_perm = parse_perm(rp, dists.len())?;
                        let target_est = perm_probability(&dists, &target_perm, method, &engine)?;
                        let rival_est = perm_probability(&dists, &rival_perm, method, &engine)?;
                        let ratio = sp_ratio(target_est.value, rival_est.value)?;
                        Ok((
                            "app ratio".into(),
                            Payload::AppRatio {
                                p_target: target_est.value,
                                p_rival: rival_est.value,
                                ratio,
                                target_perm: Some(target_perm),
                                target_estimate: Some(target_est),
                                rival_perm: Some(rival_perm),
                                rival_estimate: Some(rival_est),
                            },
                        ))
                    }
                    _ => Err(CliError::Config(
                        "app ratio needs either --target and --rival, or --target-perm and --rival-perm".into(),
                    )),
                }
            }
            AppCmd::SeriesParallel { alloc_a, alloc_b } => {
                let dists = need_variables(config, 3)?;
                if dists.len() != 3 {
                    return Err(CliError::Config(format!(
                        "series-parallel comparison needs exactly 3 variables, got {}",
                        dists.len()
                    )));
                }
                let a = parse_alloc(alloc_a)?;
                let b = parse_alloc(alloc_b)?;
                let mut rng = Rng::new(config.seed, 0);
                let comparison = series_parallel_compare(&dists, a, b, &mut rng, config.samples)?;
                Ok(("app series-parallel".into(), Payload::AppSeriesParallel { comparison }))
            }
        },
        Command::Demo { cmd: DemoCmd::Blyth } => demo_blyth(config, &engine),
    }
}


/// The classic voting-paradox triple: a point mass at 3, {1: 0.4, 4: 0.6}
/// and {2: 0.6, 5: 0.4}. Pairwise precedence runs in a cycle while the
/// maximal ordering event is T3 <= T1 <= T2.
fn blyth_specs() -> Vec<DistSpec> {
    let json = r#"[
        {"name":"T1","family":"discrete","atoms":[{"x":3.0,"p":1.0}]},
        {"name":"T2","family":"discrete","atoms":[{"x":1.0,"p":0.4},{"x":4.0,"p":0.6}]},
        {"name":"T3","family":"discrete","atoms":[{"x":2.0,"p":0.6},{"x":5.0,"p":0.4}]}
    ]"#;
    serde_json::from_str(json).expect("built-in specs parse")
}

fn demo_blyth(
    config: &mut RunConfig,
    engine: &sprec_core::EngineConfig,
) -> Result<(String, Payload), CliError> {
    let specs = blyth_specs();
    let dists: Vec<Distribution> = specs
        .iter()
        .map(|s| make_distribution(s).map_err(CliError::Engine))
        .collect::<Result<_, _>>()?;

    // pairwise precedence probabilities around the cycle (1,2), (2,3), (3,1)
    let mut pairwise = Vec::new();
    for (i, j) in [(0usize, 1usize), (1, 2), (2, 0)] {
        let (p21, p12) = sp_pair(&dists[i], &dists[j], None, engine)?;
        let verdict = check_sp(&dists[i], &dists[j], None, engine)?;
        pairwise.push(sprec_core::PairSpVerdict {
            first: i + 1,
            first_name: dists[i].name().into(),
            second: j + 1,
            second_name: dists[j].name().into(),
            p_second_ge_first: p21,
            p_first_ge_second: p12,
            verdict,
        });
    }

    let transitivity = audit_claim(ClaimId::SpTransitivity, &dists, None, engine)?;
    let cycle = transitivity
        .witnesses
        .iter()
        .find_map(|w| match w {
            sprec_core::Witness::SpCycle { names, .. } => Some(names.clone()),
            _ => None,
        })
        .unwrap_or_default();

    let ssp = check_ssp(&dists, None, engine)?;
    let table = ssp.table.clone();
    let audit = audit_claim(ClaimId::SspImpliesPairwiseSp, &dists, None, engine)?;

    // the demo embeds its own variables so the report reproduces itself
    config.variables = specs;
    let payload = Payload::DemoBlyth { pairwise, cycle, table, ssp, audit };
    Ok(("demo blyth".into(), payload))
}
