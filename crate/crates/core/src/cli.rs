//! Command-line surface. [`run`] parses arguments, performs one analysis and
//! returns the exit code with everything that should be printed.
//!
//! Exit codes: 0 when the analysis completed and the property holds, 1 when
//! it completed and the property fails, 2 on input or usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamics::{self, Mode, Verdict};
use crate::equilibria;
use crate::game::DEFAULT_STATE_CAP;
use crate::io::{self, NodePayoff, Report, SearchSummary};
use crate::network::{NodeId, SocialNetwork};
use crate::paradox::{self, NetworkEdit, ParadoxKind};
use crate::rational::Rational;
use crate::reductions::{
    self, GadgetParams, GadgetVariant, PartitionInstance, ReductionNetwork, TwinParams, WaParams,
};

/// What a finished invocation prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Parser)]
#[command(name = "sngame", version, about = "Social network games with obligatory product selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct FileArg {
    /// Network file (JSON).
    #[arg(long)]
    file: PathBuf,
}

#[derive(Debug, Args)]
struct CapArg {
    /// Largest joint-strategy space an exhaustive analysis may explore.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    max_states: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Cycle,
    Auto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Best,
    Better,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Check the model constraints of a network file.
    Validate {
        #[command(flatten)]
        file: FileArg,
    },
    /// Payoff of every node at a joint strategy.
    Payoff {
        #[command(flatten)]
        file: FileArg,
        /// Joint strategy as `node=product,...`.
        #[arg(long)]
        strategy: String,
    },
    /// Decide whether a Nash equilibrium exists.
    Nash {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// Report at most this many equilibria (brute force).
        #[arg(long)]
        limit: Option<usize>,
        #[command(flatten)]
        cap: CapArg,
    },
    /// Decide weak acyclicity on the full improvement graph.
    WeaklyAcyclic {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        cap: CapArg,
    },
    /// Run a scheduled best- or better-response path.
    Dynamics {
        #[command(flatten)]
        file: FileArg,
        #[arg(long)]
        start: String,
        /// Comma-separated node names; defaults to declaration order.
        #[arg(long)]
        order: Option<String>,
        #[arg(long, value_enum, default_value = "best")]
        mode: ModeArg,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Check one product edit for a paradox, or search all edits.
    Paradox(ParadoxArgs),
    /// Generate a network from a reduction or family.
    Gen {
        #[command(subcommand)]
        generator: GenCommand,
    },
    /// Export the improvement graph in Graphviz DOT format.
    Graph {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        cap: CapArg,
    },
}

#[derive(Debug, Args)]
struct ParadoxArgs {
    #[command(flatten)]
    file: FileArg,
    /// vulnerable, fragile, inefficient or unsafe; with --search, restricts
    /// the kinds searched (default: all).
    #[arg(long)]
    kind: Option<ParadoxKind>,
    #[arg(long)]
    edit_node: Option<String>,
    #[arg(long)]
    edit_product: Option<String>,
    /// Threshold of the added product (expansions).
    #[arg(long)]
    theta: Option<Rational>,
    /// Base equilibrium (vulnerable, inefficient).
    #[arg(long)]
    strategy: Option<String>,
    /// Try every single-product edit.
    #[arg(long)]
    search: bool,
    /// Thresholds tried for added products during a search.
    #[arg(long, value_delimiter = ',')]
    theta_grid: Option<Vec<Rational>>,
    /// Maximum number of edits examined during a search.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[command(flatten)]
    cap: CapArg,
}

#[derive(Debug, Args)]
struct OutArg {
    /// Write the network here and print a report instead of the network.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValuesArg {
    /// PARTITION values, comma separated; normalised to sum 1.
    #[arg(long, conflicts_with = "values_file")]
    values: Option<String>,
    /// File holding the PARTITION values.
    #[arg(long)]
    values_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GadgetArgs {
    #[arg(long, default_value = "1/10")]
    theta: Rational,
    #[arg(long, default_value = "2/10")]
    w1: Rational,
    #[arg(long, default_value = "3/10")]
    w2: Rational,
}

#[derive(Debug, Args)]
struct TwinArgs {
    #[arg(long, default_value = "1/2")]
    twin_weight: Rational,
    #[arg(long, default_value = "1/4")]
    twin_theta: Rational,
}

#[derive(Debug, Args)]
struct WaArgs {
    #[arg(long, default_value = "1/10")]
    theta1: Rational,
    #[arg(long, default_value = "2/10")]
    w1: Rational,
    #[arg(long, default_value = "3/10")]
    w2: Rational,
    /// Threshold of t4 at a and t5 at b; defaults to tau/2.
    #[arg(long)]
    escape_theta: Option<Rational>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    SourceRenamed,
    FullyRenamed,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Cycle where node i offers t_i and t_(i+1).
    CycleNoNe {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value = "3/10")]
        r1: Rational,
        #[arg(long, default_value = "1/10")]
        r2: Rational,
        #[arg(long, default_value = "3/10")]
        w: Rational,
        #[command(flatten)]
        out: OutArg,
    },
    /// Triangle with three singleton sources.
    Gadget {
        #[command(flatten)]
        params: GadgetArgs,
        #[arg(long, value_enum, default_value = "plain")]
        variant: VariantArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Equilibrium exists iff the instance is solvable.
    PartitionNe {
        #[command(flatten)]
        values: ValuesArg,
        #[command(flatten)]
        params: GadgetArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// As partition-ne, without source nodes.
    PartitionNoSource {
        #[command(flatten)]
        values: ValuesArg,
        #[command(flatten)]
        params: GadgetArgs,
        #[command(flatten)]
        twins: TwinArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Weakly acyclic iff the instance is unsolvable.
    Wa {
        #[command(flatten)]
        values: ValuesArg,
        #[command(flatten)]
        params: WaArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// As wa, without source nodes.
    WaNoSource {
        #[command(flatten)]
        values: ValuesArg,
        #[command(flatten)]
        params: WaArgs,
        #[command(flatten)]
        twins: TwinArgs,
        #[command(flatten)]
        out: OutArg,
    },
}

type CliResult = Result<(i32, String), String>;

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok((code, stdout)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(message) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        },
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Validate { file } => validate(&file.file),
        Command::Payoff { file, strategy } => payoff(&file.file, &strategy),
        Command::Nash {
            file,
            method,
            limit,
            cap,
        } => nash(&file.file, method, limit, cap.max_states),
        Command::WeaklyAcyclic { file, cap } => weakly_acyclic(&file.file, cap.max_states),
        Command::Dynamics {
            file,
            start,
            order,
            mode,
            max_steps,
        } => run_dynamics(&file.file, &start, order.as_deref(), mode, max_steps),
        Command::Paradox(args) => run_paradox(args),
        Command::Gen { generator } => generate(generator),
        Command::Graph { file, cap } => graph(&file.file, cap.max_states),
    }
}

fn read(path: &Path) -> Result<(String, String), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let digest = io::digest(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| format!("{} is not UTF-8", path.display()))?;
    Ok((text, digest))
}

fn load(path: &Path) -> Result<(SocialNetwork, String), String> {
    let (text, digest) = read(path)?;
    let network = io::parse_network(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((network, digest))
}

fn validate(path: &Path) -> CliResult {
    let (text, input_digest) = read(path)?;
    let network = io::parse_network_unvalidated(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let violations = io::violation_strings(&network.validate());
    let valid = violations.is_empty();
    let report = Report::Validate {
        input_digest,
        valid,
        violations,
    };
    Ok((if valid { 0 } else { 1 }, report.to_json()))
}

fn payoff(path: &Path, strategy: &str) -> CliResult {
    let (network, input_digest) = load(path)?;
    let s = network.parse_strategy(strategy).map_err(|e| e.to_string())?;
    let payoffs = network
        .payoffs(&s)
        .map_err(|e| e.to_string())?
        .into_iter()
        .zip(network.node_names())
        .map(|(payoff, node)| NodePayoff {
            node: node.clone(),
            payoff,
        })
        .collect();
    let nash = equilibria::is_nash(&network, &s).map_err(|e| e.to_string())?;
    let report = Report::Payoff {
        input_digest,
        strategy: network.format_strategy(&s),
        payoffs,
        nash,
    };
    Ok((0, report.to_json()))
}

fn nash(path: &Path, method: Method, limit: Option<usize>, cap: u64) -> CliResult {
    let (network, input_digest) = load(path)?;
    let use_cycle = match method {
        Method::Cycle => true,
        Method::Brute => false,
        Method::Auto => equilibria::cycle_order(&network).is_ok(),
    };
    let report = if use_cycle {
        let d = equilibria::cycle_has_nash(&network).map_err(|e| e.to_string())?;
        Report::Nash {
            input_digest,
            method: "cycle".into(),
            nash_exists: d.has_nash,
            equilibria: d.witness.iter().map(|s| network.format_strategy(s)).collect(),
            composition_steps: Some(d.composition_steps),
        }
    } else {
        let all = equilibria::enumerate_nash(&network, limit, cap).map_err(|e| e.to_string())?;
        let exists = if all.is_empty() && limit == Some(0) {
            !equilibria::enumerate_nash(&network, Some(1), cap)
                .map_err(|e| e.to_string())?
                .is_empty()
        } else {
            !all.is_empty()
        };
        Report::Nash {
            input_digest,
            method: "brute".into(),
            nash_exists: exists,
            equilibria: all.iter().map(|s| network.format_strategy(s)).collect(),
            composition_steps: None,
        }
    };
    let exists = matches!(report, Report::Nash { nash_exists: true, .. });
    Ok((if exists { 0 } else { 1 }, report.to_json()))
}

fn weakly_acyclic(path: &Path, cap: u64) -> CliResult {
    let (network, input_digest) = load(path)?;
    let wa = dynamics::is_weakly_acyclic(&network, cap).map_err(|e| e.to_string())?;
    let report = Report::WeaklyAcyclic {
        input_digest,
        weakly_acyclic: wa.weakly_acyclic,
        state_count: wa.state_count,
        sink_count: wa.sink_count,
        stuck_count: wa.stuck_count,
        witness: wa.witness.as_ref().map(|s| network.format_strategy(s)),
        cycle: wa.cycle.iter().map(|s| network.format_strategy(s)).collect(),
    };
    Ok((if wa.weakly_acyclic { 0 } else { 1 }, report.to_json()))
}

fn run_dynamics(path: &Path, start: &str, order: Option<&str>, mode: ModeArg, max_steps: usize) -> CliResult {
    let (network, input_digest) = load(path)?;
    let start = network.parse_strategy(start).map_err(|e| e.to_string())?;
    let order: Vec<NodeId> = match order {
        Some(text) => dynamics::parse_order(&network, text).map_err(|e| e.to_string())?,
        None => network.node_ids().collect(),
    };
    let (mode, mode_name) = match mode {
        ModeArg::Best => (Mode::Best, "best"),
        ModeArg::Better => (Mode::Better, "better"),
    };
    let trace = dynamics::run_scheduled(&network, &start, &order, mode, max_steps).map_err(|e| e.to_string())?;
    let converged = trace.verdict == Verdict::Converged;
    let report = Report::Dynamics {
        input_digest,
        mode: mode_name.into(),
        order: order.iter().map(|&i| network.node_name(i).to_string()).collect(),
        trace: io::trace_report(&network, &trace),
    };
    Ok((if converged { 0 } else { 1 }, report.to_json()))
}

fn run_paradox(args: ParadoxArgs) -> CliResult {
    let (network, input_digest) = load(&args.file.file)?;
    let cap = args.cap.max_states;
    if args.search {
        let kinds: Vec<ParadoxKind> = match args.kind {
            Some(k) => vec![k],
            None => ParadoxKind::ALL.to_vec(),
        };
        let grid = args.theta_grid.unwrap_or_else(paradox::default_theta_grid);
        let out = paradox::search_paradoxes(&network, &kinds, &grid, args.budget, cap).map_err(|e| e.to_string())?;
        let verdicts = out
            .found
            .iter()
            .map(|v| io::verdict_report(&network, v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let found = !verdicts.is_empty();
        let report = Report::Paradox {
            input_digest,
            verdicts,
            search: Some(SearchSummary {
                edits_examined: out.edits_examined,
                edits_skipped: out.edits_skipped,
            }),
        };
        return Ok((if found { 0 } else { 1 }, report.to_json()));
    }

    let kind = args.kind.ok_or("--kind is required unless --search is given")?;
    let node_name = args.edit_node.ok_or("--edit-node is required")?;
    let product = args.edit_product.ok_or("--edit-product is required")?;
    let node = network.node(&node_name).map_err(|e| e.to_string())?;
    let edit = if kind.is_expansion() {
        let theta = args.theta.ok_or("--theta is required for expansions")?;
        NetworkEdit::Expansion { node, product, theta }
    } else {
        let product = network.product(&product).map_err(|e| e.to_string())?;
        NetworkEdit::Contraction { node, product }
    };
    let strategy = match (&args.strategy, kind.needs_equilibrium()) {
        (Some(text), true) => Some(network.parse_strategy(text).map_err(|e| e.to_string())?),
        (None, true) => return Err(format!("--strategy is required for {kind}")),
        (_, false) => None,
    };
    let verdict = match kind {
        ParadoxKind::Vulnerable => paradox::check_vulnerable(&network, strategy.as_ref().unwrap(), &edit, cap),
        ParadoxKind::Inefficient => paradox::check_inefficient(&network, strategy.as_ref().unwrap(), &edit, cap),
        ParadoxKind::Fragile => paradox::check_fragile(&network, &edit, cap),
        ParadoxKind::Unsafe => paradox::check_unsafe(&network, &edit, cap),
    }
    .map_err(|e| e.to_string())?;
    let holds = verdict.holds;
    let report = Report::Paradox {
        input_digest,
        verdicts: vec![io::verdict_report(&network, &verdict).map_err(|e| e.to_string())?],
        search: None,
    };
    Ok((if holds { 0 } else { 1 }, report.to_json()))
}

fn instance(values: &ValuesArg) -> Result<PartitionInstance, String> {
    let text = match (&values.values, &values.values_file) {
        (Some(v), _) => v.clone(),
        (None, Some(path)) => read(path)?.0,
        (None, None) => return Err("--values or --values-file is required".into()),
    };
    Ok(PartitionInstance::parse(&text).map_err(|e| e.to_string())?.normalize())
}

fn gadget_params(args: &GadgetArgs) -> GadgetParams {
    GadgetParams {
        theta: args.theta.clone(),
        w1: args.w1.clone(),
        w2: args.w2.clone(),
    }
}

fn twin_params(args: &TwinArgs) -> TwinParams {
    TwinParams {
        weight: args.twin_weight.clone(),
        theta: args.twin_theta.clone(),
    }
}

fn wa_params(args: &WaArgs) -> WaParams {
    WaParams {
        theta1: args.theta1.clone(),
        w1: args.w1.clone(),
        w2: args.w2.clone(),
        escape_theta: args.escape_theta.clone(),
    }
}

fn generate(command: GenCommand) -> CliResult {
    let err = |e: reductions::ReductionError| e.to_string();
    let (name, generated, out) = match command {
        GenCommand::CycleNoNe { n, r1, r2, w, out } => {
            let net = reductions::gen_no_ne_cycle(n, &r1, &r2, &w).map_err(err)?;
            let roles = net.node_ids().map(|i| (net.node_name(i).to_string(), i)).collect();
            ("cycle-no-ne", ReductionNetwork { network: net, roles }, out)
        }
        GenCommand::Gadget { params, variant, out } => {
            let variant = match variant {
                VariantArg::Plain => GadgetVariant::Plain,
                VariantArg::SourceRenamed => GadgetVariant::SourceRenamed,
                VariantArg::FullyRenamed => GadgetVariant::FullyRenamed,
            };
            let rn = reductions::gen_gadget(&gadget_params(&params), variant).map_err(err)?;
            ("gadget", rn, out)
        }
        GenCommand::PartitionNe { values, params, out } => {
            let rn = reductions::gen_partition_ne_network(&instance(&values)?, &gadget_params(&params)).map_err(err)?;
            ("partition-ne", rn, out)
        }
        GenCommand::PartitionNoSource {
            values,
            params,
            twins,
            out,
        } => {
            let rn = reductions::gen_partition_no_source(&instance(&values)?, &gadget_params(&params), &twin_params(&twins))
                .map_err(err)?;
            ("partition-no-source", rn, out)
        }
        GenCommand::Wa { values, params, out } => {
            let rn = reductions::gen_wa_network(&instance(&values)?, &wa_params(&params)).map_err(err)?;
            ("wa", rn, out)
        }
        GenCommand::WaNoSource {
            values,
            params,
            twins,
            out,
        } => {
            let rn = reductions::gen_wa_no_source(&instance(&values)?, &wa_params(&params), &twin_params(&twins))
                .map_err(err)?;
            ("wa-no-source", rn, out)
        }
    };
    let text = io::serialize_network(&generated.network);
    let Some(path) = out.out else {
        return Ok((0, text));
    };
    write_atomically(&path, &text)?;
    let net = &generated.network;
    let report = Report::Gen {
        generator: name.into(),
        output: path.display().to_string(),
        output_digest: io::digest(text.as_bytes()),
        nodes: net.node_count(),
        sources: net.sources().len(),
        roles: generated
            .roles
            .iter()
            .map(|(role, &i)| (role.clone(), net.node_name(i).to_string()))
            .collect(),
    };
    Ok((0, report.to_json()))
}

fn write_atomically(path: &Path, text: &str) -> Result<(), String> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, text).map_err(|e| format!("cannot write {}: {e}", tmp.display()))?;
    std::fs::rename(&tmp, path).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn graph(path: &Path, cap: u64) -> CliResult {
    let (network, _) = load(path)?;
    let g = dynamics::build_improvement_graph(&network, cap).map_err(|e| e.to_string())?;
    Ok((0, g.to_dot(&network)))
}
