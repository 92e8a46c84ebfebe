//! `tsolive`: check liveness properties of concurrent libraries under TSO,
//! run the CPCP pipeline, replay witnesses, and query channel machines.
//!
//! Every command prints one JSON report on standard output. Witnesses and
//! other artifacts go to files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use tsolive_core::cpcp::{
    build_cm, build_witness_schedule, generate_library_text, solve_brute, to_single_channel, CpcpInstance, Pipeline,
};
use tsolive_core::dsl::parse_library;
use tsolive_core::explore::{
    canonical_text, explore_with, export, ExploreError, ExploreMode, ExploreOptions, DEFAULT_NODE_BUDGET,
};
use tsolive_core::lcm::{backward_reach, bounded_lasso_search, ChannelMachine, CmConfig, LassoResult};
use tsolive_core::liveness::{
    check_lasso_conditions, check_obstruction_freedom, clause_violated, find_violation, LivenessError, LoopSummary,
    PropertyId, ViolationReport,
};
use tsolive_core::model::{format_lasso, format_trace, parse_lasso, parse_trace, Action, LOOP_HEADER};
use tsolive_core::semantics::replay_set;
use tsolive_core::system::mgc_compose;
use tsolive_core::{BufferBound, LibraryIR, MemoryModel, SystemSpec};

const EXIT_CODES: &str = "\
Exit codes:
  0  no violation at the bound, SATISFIED, or the command succeeded
  1  VIOLATED; the witness lasso was written to a file
  2  usage, input or parse error
  3  node budget exceeded
  4  no CPCP solution up to the length bound
  5  trace or lasso does not replay";

const EXIT_VIOLATED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_NO_SOLUTION: u8 = 4;
const EXIT_REPLAY: u8 = 5;

#[derive(Parser)]
#[command(name = "tsolive", version, about = "Liveness checking for concurrent libraries under TSO")]
#[command(after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check one liveness property of a library under the most general client.
    #[command(after_help = EXIT_CODES)]
    Check(CheckArgs),
    /// Explore the bounded state graph and print statistics.
    #[command(after_help = EXIT_CODES)]
    Explore(ExploreArgs),
    /// Replay a trace or lasso file against a library.
    #[command(after_help = EXIT_CODES)]
    Replay(ReplayArgs),
    /// CPCP instances, their channel machines and generated libraries.
    #[command(subcommand)]
    Cpcp(CpcpCmd),
    /// Lossy channel machine queries.
    #[command(subcommand)]
    Lcm(LcmCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    #[value(name = "lock-freedom")]
    Lock,
    #[value(name = "wait-freedom")]
    Wait,
    #[value(name = "deadlock-freedom")]
    Deadlock,
    #[value(name = "starvation-freedom")]
    Starvation,
    #[value(name = "obstruction-freedom")]
    Obstruction,
}

impl From<Property> for PropertyId {
    fn from(p: Property) -> Self {
        match p {
            Property::Lock => PropertyId::LockFreedom,
            Property::Wait => PropertyId::WaitFreedom,
            Property::Deadlock => PropertyId::DeadlockFreedom,
            Property::Starvation => PropertyId::StarvationFreedom,
            Property::Obstruction => PropertyId::ObstructionFreedom,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Tso,
    Sc,
}

impl From<Model> for MemoryModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Tso => MemoryModel::Tso,
            Model::Sc => MemoryModel::Sc,
        }
    }
}

fn parse_bound(s: &str) -> Result<BufferBound, String> {
    if s == "unbounded" {
        return Ok(BufferBound::Unbounded);
    }
    s.parse().map(BufferBound::Bounded).map_err(|_| format!("expected a number or `unbounded`, got `{s}`"))
}

#[derive(Args)]
struct SystemArgs {
    /// Number of processes.
    #[arg(long, default_value_t = 2)]
    procs: usize,
    #[arg(long, value_enum, default_value_t = Model::Tso)]
    model: Model,
    /// Store-buffer capacity per process.
    #[arg(long = "buffer-bound", default_value = "4", value_parser = parse_bound)]
    buffer_bound: BufferBound,
    /// Maximum number of configurations to explore.
    #[arg(long, env = "TSOLIVE_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
    budget: usize,
    /// Explore on one thread.
    #[arg(long)]
    sequential: bool,
}

impl SystemArgs {
    fn options(&self) -> ExploreOptions {
        ExploreOptions {
            budget: self.budget,
            mode: if self.sequential { ExploreMode::Sequential } else { ExploreMode::Parallel },
        }
    }

    fn json(&self) -> Value {
        json!({
            "procs": self.procs,
            "model": MemoryModel::from(self.model),
            "buffer_bound": self.buffer_bound,
            "budget": self.budget,
        })
    }
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    property: Property,
    #[command(flatten)]
    sys: SystemArgs,
    /// Where to write the witness lasso [default: FILE.<property>.lasso]
    #[arg(long)]
    witness: Option<PathBuf>,
    file: PathBuf,
}

#[derive(Args)]
struct ExploreArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Write PREFIX.edges and PREFIX.nodes.
    #[arg(long, value_name = "PREFIX")]
    export: Option<PathBuf>,
    /// List the configurations with all buffers empty.
    #[arg(long)]
    observables: bool,
    file: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    /// Number of processes [default: the largest pid in the trace]
    #[arg(long)]
    procs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Model::Tso)]
    model: Model,
    #[arg(long = "buffer-bound", default_value = "unbounded", value_parser = parse_bound)]
    buffer_bound: BufferBound,
    file: PathBuf,
    /// A trace (one action per line) or a lasso (stem and loop sections).
    trace: PathBuf,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file: an alphabet line, then `A: w1 w2 ..` and `B: ..`.
    #[arg(required_unless_present_all = ["a", "b"], conflicts_with_all = ["a", "b"])]
    file: Option<PathBuf>,
    /// Words of A, comma separated.
    #[arg(long, value_delimiter = ',', requires = "b")]
    a: Vec<String>,
    /// Words of B, comma separated.
    #[arg(long, value_delimiter = ',', requires = "a")]
    b: Vec<String>,
}

#[derive(Subcommand)]
enum CpcpCmd {
    /// Search for a solution by enumeration.
    #[command(after_help = EXIT_CODES)]
    Solve {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
    },
    /// Write the two-channel machine of an instance.
    BuildCm {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the one-channel simulation of a two-channel machine.
    ToSingle {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the generated two-method library of an instance.
    CompileLib {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve, compile, build a witness schedule, replay it and check it.
    #[command(after_help = EXIT_CODES)]
    Witness {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Copies of the loop in the written trace.
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum LcmCmd {
    /// Lossy reachability of one control state from another.
    Reach {
        file: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Bounded search for a lossy run visiting a state infinitely often.
    Lasso {
        file: PathBuf,
        #[arg(long)]
        through: String,
        #[arg(long, default_value_t = 8)]
        channel_bound: usize,
        /// Maximum number of configurations.
        #[arg(long, default_value_t = 100_000)]
        depth: usize,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

/// What a command produced, before it is wrapped into the report.
struct Outcome {
    code: u8,
    parameters: Value,
    result: Value,
}

#[derive(Default)]
struct Ctx {
    inputs: BTreeMap<String, String>,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let digest = Sha256::digest(text.as_bytes());
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(path.display().to_string(), hex);
        Ok(text)
    }

    fn library(&mut self, path: &Path) -> Result<Arc<LibraryIR>, Failure> {
        let src = self.read(path)?;
        parse_library(&src).map(Arc::new).map_err(|e| usage(format!("{}:{e}", path.display())))
    }

    fn machine(&mut self, path: &Path) -> Result<ChannelMachine, Failure> {
        let src = self.read(path)?;
        ChannelMachine::parse_text(&src).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    fn instance(&mut self, args: &InstanceArgs) -> Result<CpcpInstance, Failure> {
        match &args.file {
            Some(p) => {
                let text = self.read(p)?;
                CpcpInstance::parse(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
            }
            None => {
                let a: Vec<&str> = args.a.iter().map(String::as_str).collect();
                let b: Vec<&str> = args.b.iter().map(String::as_str).collect();
                CpcpInstance::from_words(&a, &b).map_err(|e| usage(e.to_string()))
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn compose(lib: Arc<LibraryIR>, n: usize, model: MemoryModel, bound: BufferBound) -> Result<SystemSpec, Failure> {
    mgc_compose(lib, n, model, bound).map_err(|e| usage(e.to_string()))
}

/// Report JSON without the timing field, so reports are reproducible.
fn report_json(r: &ViolationReport, lib: &LibraryIR) -> Value {
    let mut v = r.to_json(lib);
    if let Some(s) = v.get_mut("stats").and_then(Value::as_object_mut) {
        s.remove("millis");
    }
    v
}

fn budget_outcome(parameters: Value, budget: usize, explored: usize) -> Outcome {
    Outcome {
        code: EXIT_BUDGET,
        parameters,
        result: json!({ "verdict": "BUDGET_EXCEEDED", "budget": budget, "explored": explored }),
    }
}

fn cmd_check(ctx: &mut Ctx, args: &CheckArgs) -> Result<Outcome, Failure> {
    let lib = ctx.library(&args.file)?;
    let prop = PropertyId::from(args.property);
    let spec = compose(lib.clone(), args.sys.procs, args.sys.model.into(), args.sys.buffer_bound)?;
    let mut parameters = args.sys.json();
    parameters["property"] = json!(prop.name());
    let res = if prop == PropertyId::ObstructionFreedom {
        check_obstruction_freedom(&spec, args.sys.options())
    } else {
        find_violation(&spec, prop, args.sys.options()).map_err(LivenessError::from)
    };
    let report = match res {
        Ok(r) => r,
        Err(LivenessError::Explore(ExploreError::Budget { budget, partial, .. })) => {
            return Ok(budget_outcome(parameters, budget, partial.node_count()));
        }
        Err(LivenessError::Blocking(e)) => {
            return Ok(Outcome { code: EXIT_BUDGET, parameters, result: json!({ "verdict": "BUDGET_EXCEEDED", "error": e.to_string() }) });
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    let mut result = report_json(&report, &lib);
    let mut code = 0;
    if let Some(w) = report.verdict.witness() {
        let path = args.witness.clone().unwrap_or_else(|| args.file.with_extension(format!("{}.lasso", prop.name())));
        write_file(&path, &format_lasso(&w.stem, &w.cycle, &*lib))?;
        result["witness"] = json!(path.display().to_string());
        code = EXIT_VIOLATED;
    }
    Ok(Outcome { code, parameters, result })
}

fn cmd_explore(ctx: &mut Ctx, args: &ExploreArgs) -> Result<Outcome, Failure> {
    let lib = ctx.library(&args.file)?;
    let spec = compose(lib.clone(), args.sys.procs, args.sys.model.into(), args.sys.buffer_bound)?;
    let parameters = args.sys.json();
    let g = match explore_with(&spec, args.sys.options()) {
        Ok(g) => g,
        Err(ExploreError::Budget { budget, partial, .. }) => {
            return Ok(budget_outcome(parameters, budget, partial.node_count()));
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    let quiet: Vec<usize> = (0..g.node_count()).filter(|&i| g.nodes[i].buffers_empty()).collect();
    let mut result = json!({
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "depth": g.depths().into_iter().max().unwrap_or(0),
        "stuck": g.succ.iter().filter(|s| s.is_empty()).count(),
        "observables": quiet.len(),
    });
    if args.observables {
        let mut list: Vec<String> = quiet.iter().map(|&i| canonical_text(&lib, &g.nodes[i])).collect();
        list.sort();
        result["observable_configs"] = json!(list);
    }
    if let Some(prefix) = &args.export {
        let (edges, nodes) = export(&lib, &g);
        let ep = prefix.with_extension("edges");
        let np = prefix.with_extension("nodes");
        write_file(&ep, &edges)?;
        write_file(&np, &nodes)?;
        result["export"] = json!([ep.display().to_string(), np.display().to_string()]);
    }
    Ok(Outcome { code: 0, parameters, result })
}

fn max_pid(actions: &[Action]) -> usize {
    actions.iter().map(|a| a.pid().index() + 1).max().unwrap_or(1)
}

fn cmd_replay(ctx: &mut Ctx, args: &ReplayArgs) -> Result<Outcome, Failure> {
    let lib = ctx.library(&args.file)?;
    let text = ctx.read(&args.trace)?;
    let is_lasso = text.lines().any(|l| l.trim() == LOOP_HEADER);
    let parse_err = |e: tsolive_core::model::ParseActionError| usage(format!("{}:{e}", args.trace.display()));
    let (stem, cycle) = if is_lasso {
        parse_lasso(&text, &*lib).map_err(parse_err)?
    } else {
        (parse_trace(&text, &*lib).map_err(parse_err)?, Vec::new())
    };
    let n = args.procs.unwrap_or_else(|| max_pid(&stem).max(max_pid(&cycle)));
    let spec = compose(lib.clone(), n, args.model.into(), args.buffer_bound)?;
    let parameters = json!({
        "procs": n,
        "model": spec.model,
        "buffer_bound": spec.bound,
        "kind": if is_lasso { "lasso" } else { "trace" },
    });
    let reached = match replay_set(&spec, &stem, vec![spec.initial()]) {
        Ok(r) => r,
        Err(e) => return Ok(replay_failure(parameters, &lib, "stem", &e)),
    };
    if !is_lasso {
        let result = json!({
            "verdict": "REPLAYS",
            "steps": stem.len(),
            "final": canonical_text(&lib, &reached[0]),
        });
        return Ok(Outcome { code: 0, parameters, result });
    }
    let mut last_err = None;
    for entry in reached {
        match replay_set(&spec, &cycle, vec![entry.clone()]) {
            Ok(back) if back.contains(&entry) => {
                let summary = LoopSummary::new(&entry, &cycle);
                let violated: Vec<&str> =
                    PropertyId::ALL.into_iter().filter(|&p| clause_violated(p, &summary)).map(PropertyId::name).collect();
                let result = json!({
                    "verdict": "REPLAYS",
                    "stem": stem.len(),
                    "loop": cycle.len(),
                    "entry": canonical_text(&lib, &entry),
                    "violates": violated,
                });
                return Ok(Outcome { code: 0, parameters, result });
            }
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    Ok(match last_err {
        Some(e) => replay_failure(parameters, &lib, "loop", &e),
        None => Outcome { code: EXIT_REPLAY, parameters, result: json!({ "verdict": "NOT_CLOSED" }) },
    })
}

fn replay_failure(parameters: Value, lib: &LibraryIR, part: &str, e: &tsolive_core::semantics::ReplayError) -> Outcome {
    let enabled: Vec<String> = e.enabled.iter().map(|a| a.display(lib).to_string()).collect();
    Outcome {
        code: EXIT_REPLAY,
        parameters,
        result: json!({
            "verdict": "NOT_ENABLED",
            "part": part,
            "index": e.index,
            "action": e.action.display(lib).to_string(),
            "config": canonical_text(lib, &e.config),
            "enabled": enabled,
        }),
    }
}

fn instance_json(inst: &CpcpInstance) -> Value {
    json!({ "a": inst.a, "b": inst.b })
}

fn cmd_cpcp(ctx: &mut Ctx, cmd: &CpcpCmd) -> Result<Outcome, Failure> {
    match cmd {
        CpcpCmd::Solve { inst, max_len } => {
            let inst = ctx.instance(inst)?;
            let sol = solve_brute(&inst, *max_len);
            let parameters = json!({ "instance": instance_json(&inst), "max_len": max_len });
            let result = match &sol {
                Some(s) => json!({ "verdict": "SOLUTION", "solution": s }),
                None => json!({ "verdict": "NONE_UP_TO", "max_len": max_len }),
            };
            Ok(Outcome { code: if sol.is_some() { 0 } else { EXIT_NO_SOLUTION }, parameters, result })
        }
        CpcpCmd::BuildCm { inst, output } => {
            let inst = ctx.instance(inst)?;
            let cm = build_cm(&inst);
            write_file(output, &cm.to_text())?;
            Ok(Outcome {
                code: 0,
                parameters: json!({ "instance": instance_json(&inst) }),
                result: json!({
                    "states": cm.states.len(),
                    "transitions": cm.transitions.len(),
                    "output": output.display().to_string(),
                }),
            })
        }
        CpcpCmd::ToSingle { file, output } => {
            let cm = ctx.machine(file)?;
            let sc = to_single_channel(&cm).map_err(|e| usage(e.to_string()))?;
            write_file(output, &sc.cm.to_text())?;
            Ok(Outcome {
                code: 0,
                parameters: json!({}),
                result: json!({
                    "states": sc.cm.states.len(),
                    "transitions": sc.cm.transitions.len(),
                    "output": output.display().to_string(),
                }),
            })
        }
        CpcpCmd::CompileLib { inst, output } => {
            let inst = ctx.instance(inst)?;
            let sc = to_single_channel(&build_cm(&inst)).map_err(|e| usage(e.to_string()))?;
            let text = generate_library_text(&sc);
            let lib = parse_library(&text).map_err(|e| usage(format!("generated library: {e}")))?;
            write_file(output, &text)?;
            let positions = lib.positions.len();
            Ok(Outcome {
                code: 0,
                parameters: json!({ "instance": instance_json(&inst) }),
                result: json!({
                    "methods": lib.methods.len(),
                    "locations": lib.locations.len(),
                    "values": lib.values.len(),
                    "positions": positions,
                    "output": output.display().to_string(),
                }),
            })
        }
        CpcpCmd::Witness { inst, max_len, rounds, out_dir } => {
            let inst = ctx.instance(inst)?;
            cpcp_witness(&inst, *max_len, *rounds, out_dir)
        }
    }
}

fn cpcp_witness(inst: &CpcpInstance, max_len: usize, rounds: usize, out_dir: &Path) -> Result<Outcome, Failure> {
    let parameters = json!({ "instance": instance_json(inst), "max_len": max_len, "rounds": rounds });
    let Some(sol) = solve_brute(inst, max_len) else {
        return Ok(Outcome {
            code: EXIT_NO_SOLUTION,
            parameters,
            result: json!({ "verdict": "NONE_UP_TO", "max_len": max_len }),
        });
    };
    let pipe = Pipeline::new(inst).map_err(|e| usage(e.to_string()))?;
    let sched = build_witness_schedule(&pipe, &sol, rounds).map_err(|e| usage(format!("witness schedule: {e}")))?;
    let lib = &*pipe.lib;
    fs::create_dir_all(out_dir).map_err(|e| usage(format!("{}: {e}", out_dir.display())))?;
    let lib_path = out_dir.join("witness.lib");
    let trace_path = out_dir.join("witness.trace");
    let lasso_path = out_dir.join("witness.lasso");
    write_file(&lib_path, &generate_library_text(&pipe.single))?;
    write_file(&trace_path, &format_trace(&sched.trace, lib))?;
    write_file(&lasso_path, &format_lasso(&sched.lasso.stem, &sched.lasso.cycle, lib))?;

    let bound = sched.bound.max(1);
    let spec = pipe.spec(BufferBound::Bounded(bound));
    let trace_ok = replay_set(&spec, &sched.trace, vec![spec.initial()]).is_ok();
    let mut verdicts = BTreeMap::new();
    let mut any = false;
    for p in PropertyId::ALL {
        let v = match check_lasso_conditions(&spec, &sched.lasso, p) {
            Ok(true) => {
                any = true;
                "VIOLATED".to_string()
            }
            Ok(false) => "NOT_VIOLATED_BY_WITNESS".to_string(),
            Err(e) => format!("INVALID: {e}"),
        };
        verdicts.insert(p.name(), v);
    }
    let result = json!({
        "solution": sol,
        "bound": bound,
        "trace_replays": trace_ok,
        "stem": sched.lasso.stem.len(),
        "loop": sched.lasso.cycle.len(),
        "verdicts": verdicts,
        "files": {
            "library": lib_path.display().to_string(),
            "trace": trace_path.display().to_string(),
            "lasso": lasso_path.display().to_string(),
        },
    });
    Ok(Outcome { code: if any { EXIT_VIOLATED } else { 0 }, parameters, result })
}

fn state(cm: &ChannelMachine, name: &str) -> Result<u32, Failure> {
    cm.state_id(name).ok_or_else(|| usage(format!("unknown state `{name}`")))
}

fn run_json(cm: &ChannelMachine, steps: &[(usize, CmConfig)]) -> Value {
    steps
        .iter()
        .map(|(t, c)| json!({ "transition": cm.format_transition(&cm.transitions[*t]), "config": cm.format_config(c) }))
        .collect()
}

fn cmd_lcm(ctx: &mut Ctx, cmd: &LcmCmd) -> Result<Outcome, Failure> {
    match cmd {
        LcmCmd::Reach { file, from, to } => {
            let cm = ctx.machine(file)?;
            let reachable = backward_reach(&cm, state(&cm, from)?, state(&cm, to)?);
            Ok(Outcome {
                code: 0,
                parameters: json!({ "from": from, "to": to }),
                result: json!({ "reachable": reachable }),
            })
        }
        LcmCmd::Lasso { file, through, channel_bound, depth } => {
            let cm = ctx.machine(file)?;
            let target = state(&cm, through)?;
            let parameters = json!({ "through": through, "channel_bound": channel_bound, "depth": depth });
            let result = match bounded_lasso_search(&cm, target, *channel_bound, *depth) {
                LassoResult::Witness(l) => json!({
                    "verdict": "WITNESS",
                    "start": cm.format_config(&l.start),
                    "stem": run_json(&cm, &l.stem),
                    "loop": run_json(&cm, &l.cycle),
                }),
                LassoResult::NoWitnessAtBound { channel_bound, config_bound, explored } => json!({
                    "verdict": "NO_WITNESS_AT_BOUND",
                    "channel_bound": channel_bound,
                    "config_bound": config_bound,
                    "explored": explored,
                }),
            };
            Ok(Outcome { code: 0, parameters, result })
        }
    }
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Check(_) => "check",
        Cmd::Explore(_) => "explore",
        Cmd::Replay(_) => "replay",
        Cmd::Cpcp(c) => match c {
            CpcpCmd::Solve { .. } => "cpcp solve",
            CpcpCmd::BuildCm { .. } => "cpcp build-cm",
            CpcpCmd::ToSingle { .. } => "cpcp to-single",
            CpcpCmd::CompileLib { .. } => "cpcp compile-lib",
            CpcpCmd::Witness { .. } => "cpcp witness",
        },
        Cmd::Lcm(c) => match c {
            LcmCmd::Reach { .. } => "lcm reach",
            LcmCmd::Lasso { .. } => "lcm lasso",
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let t0 = Instant::now();
    let mut ctx = Ctx::default();
    let out = match &cli.cmd {
        Cmd::Check(a) => cmd_check(&mut ctx, a),
        Cmd::Explore(a) => cmd_explore(&mut ctx, a),
        Cmd::Replay(a) => cmd_replay(&mut ctx, a),
        Cmd::Cpcp(c) => cmd_cpcp(&mut ctx, c),
        Cmd::Lcm(c) => cmd_lcm(&mut ctx, c),
    };
    match out {
        Ok(o) => {
            let report = json!({
                "command": command_name(&cli.cmd),
                "args": std::env::args().skip(1).collect::<Vec<_>>(),
                "inputs": ctx.inputs,
                "parameters": o.parameters,
                "result": o.result,
                "wall_ms": t0.elapsed().as_millis() as u64,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::from(o.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn bounds() {
        assert_eq!(parse_bound("3"), Ok(BufferBound::Bounded(3)));
        assert_eq!(parse_bound("unbounded"), Ok(BufferBound::Unbounded));
        assert!(parse_bound("x").is_err());
    }
}
