use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use gmec_transform::analysis::hunt::{hunt, HuntConfig};
use gmec_transform::analysis::paper::verify_paper_counterexample;
use gmec_transform::analysis::{order_sensitivity, AnalysisError, OrderOptions};
use gmec_transform::constraint::{
    admissible_in, is_admissible, is_weakly_admissible, legal_in, transition_gain,
};
use gmec_transform::io::document::{parse_net_document, DocumentError, NetModel};
use gmec_transform::io::render;
use gmec_transform::reach::{reach, ReachError};
use gmec_transform::transform::{
    prune_zero, transform_to_weak_admissible_bounded, SweepPolicy, TransformError, ZeroMode,
    DEFAULT_MAX_MEMBERS, DEFAULT_MAX_ROUNDS,
};
use gmec_transform::{ExploreLimits, TransitionId};

const EXIT_INEQUIVALENT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(name = "gmec", version)]
#[command(about = "Constraint transformation and admissibility analysis for Petri nets with uncontrollable transitions")]
struct Cli {
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct LimitArgs {
    /// Maximum number of markings to explore
    #[arg(long, default_value_t = ExploreLimits::default().max_markings)]
    max_markings: usize,
    /// Maximum number of tokens in any place
    #[arg(long, default_value_t = ExploreLimits::default().max_tokens_per_place)]
    max_tokens: u32,
}

impl LimitArgs {
    fn limits(self) -> ExploreLimits {
        ExploreLimits {
            max_markings: self.max_markings,
            max_tokens_per_place: self.max_tokens,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Syntactic,
    Semantic,
}

impl From<ModeArg> for ZeroMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Syntactic => ZeroMode::Syntactic,
            ModeArg::Semantic => ZeroMode::Semantic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PruneArg {
    Syntactic,
    Semantic,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Declaration,
    Reverse,
}

#[derive(Subcommand)]
enum Command {
    /// Check a net document for structural errors
    Validate { file: PathBuf },
    /// Enumerate reachable markings
    Reach {
        file: PathBuf,
        /// Fire only uncontrollable transitions
        #[arg(long)]
        uncontrollable_only: bool,
        #[command(flatten)]
        limits: LimitArgs,
        /// Write the reachability graph in DOT format
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Print transition gains and admissibility of a constraint
    Gain {
        file: PathBuf,
        #[arg(long)]
        constraint: usize,
    },
    /// Print the legal and admissible marking sets of a constraint
    Sets {
        file: PathBuf,
        #[arg(long)]
        constraint: usize,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Transform a constraint until every member is weakly admissible
    #[command(group(ArgGroup::new("sweep").args(["order", "policy"])))]
    Transform {
        file: PathBuf,
        #[arg(long)]
        constraint: usize,
        /// Explicit sweep order, comma separated
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
        max_rounds: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_MEMBERS)]
        max_members: usize,
        #[arg(long, value_enum, default_value = "off")]
        prune_zero: PruneArg,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Compare every transformation order of a constraint
    CompareOrders {
        file: PathBuf,
        #[arg(long)]
        constraint: usize,
        #[arg(long, value_enum, default_value = "syntactic")]
        mode: ModeArg,
        #[arg(long, default_value_t = gmec_transform::analysis::DEFAULT_WITNESS_CAP)]
        witnesses: usize,
        #[arg(long, default_value_t = gmec_transform::analysis::DEFAULT_PERMUTATION_CAP)]
        permutation_cap: usize,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Replay the built-in five-place counterexample
    VerifyPaper {
        #[arg(long, value_enum, default_value = "syntactic")]
        mode: ModeArg,
    },
    /// Search random nets for order-sensitive transformations
    Hunt(HuntArgs),
}

#[derive(Args)]
struct HuntArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = HuntConfig::default().max_places)]
    max_places: usize,
    #[arg(long, default_value_t = HuntConfig::default().max_transitions)]
    max_transitions: usize,
    /// Cap on the total number of initial tokens
    #[arg(long, default_value_t = HuntConfig::default().max_tokens)]
    max_initial_tokens: u32,
    #[arg(long, default_value_t = HuntConfig::default().arc_density)]
    arc_density: f64,
    #[arg(long, default_value_t = HuntConfig::default().uncontrollable_fraction)]
    uncontrollable_fraction: f64,
    #[arg(long, default_value_t = HuntConfig::default().balanced_fraction)]
    balanced_fraction: f64,
    #[arg(long, default_value_t = HuntConfig::default().weight_cap)]
    weight_cap: u64,
    #[arg(long, default_value_t = HuntConfig::default().bound_cap)]
    bound_cap: i64,
    #[arg(long, default_value_t = HuntConfig::default().max_markings)]
    max_markings: usize,
    #[arg(long, default_value_t = HuntConfig::default().max_tokens_per_place)]
    max_tokens: u32,
    #[arg(long, default_value_t = HuntConfig::default().permutation_cap)]
    permutation_cap: usize,
    #[arg(long, default_value_t = HuntConfig::default().max_members)]
    max_members: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    max_rounds: usize,
    #[arg(long, value_enum, default_value = "syntactic")]
    mode: ModeArg,
    /// Examine the built-in five-place net as trial 0
    #[arg(long)]
    embed_fig1: bool,
    /// Also write the report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

impl HuntArgs {
    fn config(&self) -> HuntConfig {
        HuntConfig {
            seed: self.seed,
            trials: self.trials,
            max_places: self.max_places,
            max_transitions: self.max_transitions,
            max_tokens: self.max_initial_tokens,
            arc_density: self.arc_density,
            uncontrollable_fraction: self.uncontrollable_fraction,
            balanced_fraction: self.balanced_fraction,
            weight_cap: self.weight_cap,
            bound_cap: self.bound_cap,
            max_markings: self.max_markings,
            max_tokens_per_place: self.max_tokens,
            permutation_cap: self.permutation_cap,
            max_members: self.max_members,
            max_rounds: self.max_rounds,
            mode: self.mode.into(),
            embed_fig1: self.embed_fig1,
        }
    }
}

/// A failed command: the exit code and what to print.
struct Failure {
    code: u8,
    message: String,
    detail: serde_json::Value,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
            detail: serde_json::Value::Null,
        }
    }

    fn limit(message: impl ToString) -> Self {
        Self {
            code: EXIT_LIMIT,
            message: message.to_string(),
            detail: serde_json::Value::Null,
        }
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        Failure::input(e)
    }
}

impl From<ReachError> for Failure {
    fn from(e: ReachError) -> Self {
        match e {
            ReachError::Net(_) | ReachError::BadLimits => Failure::input(e),
            _ => Failure::limit(e),
        }
    }
}

impl From<TransformError> for Failure {
    fn from(e: TransformError) -> Self {
        match &e {
            TransformError::NotUncontrollable(_) | TransformError::GainNotPositive { .. } => {
                Failure::input(e)
            }
            TransformError::NonConvergence { last, .. } => Failure {
                code: EXIT_LIMIT,
                detail: json!({ "last": last }),
                message: format!("{e}; last set {last}"),
            },
            _ => Failure::limit(e),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Reach(e) => e.into(),
            AnalysisError::Transform(e) => e.into(),
            e @ AnalysisError::PermutationCapExceeded { .. } => Failure::limit(e),
        }
    }
}

/// Successful output: text form, JSON form and exit code.
struct Output {
    text: String,
    json: serde_json::Value,
    code: u8,
}

fn to_value<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("reports serialize")
}

fn load(path: &Path) -> Result<NetModel, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_net_document(&text)?)
}

fn transition_names(model: &NetModel) -> Vec<String> {
    model.net.transitions().map(|(_, t)| t.name.clone()).collect()
}

fn run(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Validate { file } => {
            let model = load(&file)?;
            Ok(Output {
                text: format!(
                    "ok: {} places, {} transitions, {} constraints\n",
                    model.net.place_count(),
                    model.net.transition_count(),
                    model.constraints.len()
                ),
                json: json!({
                    "valid": true,
                    "places": model.net.place_count(),
                    "transitions": model.net.transition_count(),
                    "constraints": model.constraints.len(),
                }),
                code: 0,
            })
        }
        Command::Reach {
            file,
            uncontrollable_only,
            limits,
            dot,
        } => {
            let model = load(&file)?;
            let allowed = if uncontrollable_only {
                model.net.uncontrollable()
            } else {
                model.net.transition_ids()
            };
            let graph = match reach(&model.net, &model.m0, &allowed, limits.limits()) {
                Ok(graph) => graph,
                Err(ReachError::CapExceeded {
                    limit,
                    what,
                    partial,
                }) => {
                    return Err(Failure {
                        code: EXIT_LIMIT,
                        message: format!(
                            "{} markings, incomplete (cap of {limit} {what} exceeded)",
                            partial.len()
                        ),
                        detail: json!({ "markings": partial.len(), "complete": false }),
                    })
                }
                Err(e) => return Err(e.into()),
            };
            if let Some(path) = dot {
                fs::write(&path, render::dot(&model.net, &graph))
                    .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(Output {
                text: format!("{} markings, complete\n", graph.len()),
                json: json!({
                    "markings": graph.len(),
                    "edges": graph.edges().len(),
                    "complete": graph.is_complete(),
                    "nodes": graph.nodes(),
                }),
                code: 0,
            })
        }
        Command::Gain { file, constraint } => {
            let model = load(&file)?;
            let c = model.constraint(constraint)?;
            let gains = transition_gain(&model.net, c);
            let admissible = is_admissible(&model.net, c);
            let weak = is_weakly_admissible(&model.net, c);
            let mut text = format!("constraint {c}\n");
            for (id, t) in model.net.transitions() {
                text.push_str(&format!(
                    "  {:<8} {:>6}  {}\n",
                    t.name,
                    gains.get(id),
                    if t.controllable { "controllable" } else { "uncontrollable" }
                ));
            }
            text.push_str(&format!("admissible: {admissible}\nweakly admissible: {weak}\n"));
            Ok(Output {
                text,
                json: json!({
                    "constraint": c,
                    "transitions": transition_names(&model),
                    "gains": gains,
                    "admissible": admissible,
                    "weakly_admissible": weak,
                }),
                code: 0,
            })
        }
        Command::Sets {
            file,
            constraint,
            limits,
        } => {
            let model = load(&file)?;
            let c = model.constraint(constraint)?;
            let graph = gmec_transform::reach::reach_all(&model.net, &model.m0, limits.limits())?;
            let legal = legal_in(&graph, c);
            let admissible = admissible_in(&model.net, &graph, c);
            Ok(Output {
                text: format!(
                    "constraint {c}\nR: {} markings\nL ({}): {}\nA ({}): {}\n",
                    graph.len(),
                    legal.len(),
                    render::marking_list(&legal),
                    admissible.len(),
                    render::marking_list(&admissible)
                ),
                json: json!({
                    "constraint": c,
                    "reachable": graph.len(),
                    "legal": legal,
                    "admissible": admissible,
                }),
                code: 0,
            })
        }
        Command::Transform {
            file,
            constraint,
            order,
            policy,
            max_rounds,
            max_members,
            prune_zero: prune,
            limits,
        } => {
            let model = load(&file)?;
            let c = model.constraint(constraint)?;
            let policy = match (order, policy) {
                (Some(names), _) => SweepPolicy::Explicit(
                    names
                        .iter()
                        .map(|n| model.net.transition_id(n.trim()))
                        .collect::<Result<Vec<TransitionId>, _>>()
                        .map_err(Failure::input)?,
                ),
                (None, Some(PolicyArg::Reverse)) => SweepPolicy::Reverse,
                (None, _) => SweepPolicy::DeclarationOrder,
            };
            let outcome = transform_to_weak_admissible_bounded(
                &model.net,
                c,
                &policy,
                max_rounds,
                max_members,
            )?;
            let mut text = render::trace_table(&model.net, &outcome.trace);
            text.push_str(&format!("sweeps: {}\n", outcome.sweeps));
            let pruned = match prune {
                PruneArg::Off => None,
                PruneArg::Syntactic | PruneArg::Semantic => {
                    let mode = if matches!(prune, PruneArg::Syntactic) {
                        ZeroMode::Syntactic
                    } else {
                        ZeroMode::Semantic
                    };
                    let set = prune_zero(
                        outcome.final_set(),
                        &model.m0,
                        mode,
                        &model.net,
                        limits.limits(),
                    )?;
                    text.push_str(&format!("after {mode} zero pruning: {set}\n"));
                    Some(set)
                }
            };
            Ok(Output {
                text,
                json: json!({
                    "transitions": transition_names(&model),
                    "trace": outcome.trace,
                    "sweeps": outcome.sweeps,
                    "final": outcome.final_set(),
                    "pruned": pruned,
                }),
                code: 0,
            })
        }
        Command::CompareOrders {
            file,
            constraint,
            mode,
            witnesses,
            permutation_cap,
            limits,
        } => {
            let model = load(&file)?;
            let c = model.constraint(constraint)?;
            let options = OrderOptions {
                mode: mode.into(),
                witness_cap: witnesses,
                permutation_cap,
                max_members: usize::MAX,
            };
            let report = order_sensitivity(&model.net, &model.m0, c, limits.limits(), options)?;
            let n = report.orders.len();
            let pairwise: Vec<_> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| report.orders[i].class != report.orders[j].class)
                .map(|(i, j)| json!({ "i": i, "j": j, "verdict": report.cell(&model.net, i, j) }))
                .take(64)
                .collect();
            let versus: Vec<_> = (0..n)
                .map(|i| report.versus_original(&model.net, i))
                .collect();
            Ok(Output {
                text: render::order_text(&model.net, &report),
                json: json!({
                    "transitions": transition_names(&model),
                    "report": report,
                    "unequal_pairs": pairwise,
                    "versus_original": versus,
                    "inequivalence_found": report.inequivalence_found(),
                }),
                code: if report.inequivalence_found() {
                    EXIT_INEQUIVALENT
                } else {
                    0
                },
            })
        }
        Command::VerifyPaper { mode } => {
            let report = verify_paper_counterexample(mode.into());
            Ok(Output {
                text: render::paper_text(&report),
                json: json!({ "all_pass": report.all_pass(), "report": report }),
                code: if report.all_pass() { 0 } else { EXIT_MISMATCH },
            })
        }
        Command::Hunt(args) => {
            let config = args.config();
            config.validate().map_err(Failure::input)?;
            let report = hunt(&config);
            Ok(Output {
                text: render::hunt_text(&report),
                json: to_value(&report),
                code: 0,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = match &cli.command {
        Command::Hunt(args) => args.out.clone(),
        _ => None,
    };
    match run(cli.command) {
        Ok(output) => {
            let text = if cli.json {
                let mut s = serde_json::to_string_pretty(&output.json).expect("json output");
                s.push('\n');
                s
            } else {
                output.text
            };
            print!("{text}");
            if let Some(path) = out_path {
                if let Err(e) = fs::write(&path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_INPUT);
                }
            }
            ExitCode::from(output.code)
        }
        Err(failure) => {
            if cli.json {
                let value = json!({
                    "error": failure.message,
                    "exit_code": failure.code,
                    "detail": failure.detail,
                });
                println!("{}", serde_json::to_string_pretty(&value).expect("json output"));
            } else {
                eprintln!("error: {}", failure.message);
            }
            ExitCode::from(failure.code)
        }
    }
}
