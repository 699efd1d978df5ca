//! Batch planning CLI: ingest topologies, score assignments, run the
//! optimizers and centrality baselines, simulate manufacturer failures, and
//! sweep parameter grids into plot-ready CSV.
//!
//! Exit codes: 0 success, 2 input error, 3 solver budget exhausted without
//! `--allow-heuristic-result`, 4 internal invariant violation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use netsov::experiment::{
    derive_cell_seed, optimize_cell, run_sweep, write_atomic, write_sweep_outputs, SolverChoice,
    SweepConfig,
};
use netsov::failsim::{reports_to_csv, simulate_all, EvalMode};
use netsov::heuristics::{centrality_assignment, CentralityKind};
use netsov::metric::{decimal_string, flow_reward_upper_bound, psd_score, Assignment};
use netsov::paths::k_shortest_paths;
use netsov::solver::{export_linear_model, Instance, SolveBudget};
use netsov::topology::{enumerate_flows, Flow, FlowSet, NodeId, Topology, WeightTable};

const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl ToString) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }

    fn internal(message: impl ToString) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: message.to_string(),
        }
    }
}

macro_rules! input_err {
    ($kind:ty) => {
        impl From<$kind> for CliError {
            fn from(err: $kind) -> Self {
                CliError::input(err)
            }
        }
    };
}

input_err!(netsov::topology::TopologyError);
input_err!(netsov::topology::FlowError);
input_err!(netsov::metric::MetricError);
input_err!(netsov::paths::PathError);
input_err!(netsov::heuristics::HeuristicError);
input_err!(netsov::failsim::FailsimError);
input_err!(netsov::solver::SolverError);
input_err!(netsov::experiment::ExperimentError);
input_err!(std::io::Error);

#[derive(Parser)]
#[command(
    name = "netsov",
    about = "Network sovereignty planning: path-set diversity scoring, \
             manufacturer assignment optimization, failure simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TopologyArgs {
    /// Topology file, or a generator spec `ring:N` / `complete:N`.
    #[arg(long)]
    topology: String,
    /// Optional flow-weight table (JSON pairs document).
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Score an assignment: per-flow rewards and the aggregate PSD score.
    Score {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long)]
        assignment: PathBuf,
        /// Paths per flow, one report per value.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `structured` (JSON report) or `csv` (per-flow rows).
        #[arg(long, default_value = "structured")]
        format: String,
    },
    /// Maximize the PSD score over assignments.
    Optimize {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        manufacturers: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        /// `exact`, `local`, or `export-lp`.
        #[arg(long, default_value = "exact")]
        solver: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Wall-clock limit per cell (exact solver), in seconds.
        #[arg(long)]
        time_limit: Option<u64>,
        /// Search-node limit per cell (exact solver).
        #[arg(long)]
        node_budget: Option<u64>,
        /// Restarts (local solver).
        #[arg(long, default_value_t = 16)]
        restarts: u32,
        /// Accept budget-exhausted (unproven) results with exit code 0.
        #[arg(long)]
        allow_heuristic_result: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Centrality-based baseline assignment.
    Heuristic {
        #[command(flatten)]
        topology: TopologyArgs,
        /// `nd`, `bwc`, or `cc`.
        #[arg(long)]
        metric: String,
        #[arg(long, value_delimiter = ',', required = true)]
        manufacturers: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate every manufacturer-failure scenario for an assignment.
    Simulate {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long)]
        assignment: PathBuf,
        /// `residual` (connectivity) or `kpaths` (scored path set).
        #[arg(long, default_value = "residual")]
        mode: String,
        /// Required in `kpaths` mode.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize and simulate over a (|M|, k) grid; emit plot-ready CSV.
    Sweep {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        manufacturers: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        /// `exact` or `local`.
        #[arg(long, default_value = "local")]
        solver: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        time_limit: Option<u64>,
        #[arg(long)]
        node_budget: Option<u64>,
        #[arg(long, default_value_t = 16)]
        restarts: u32,
        /// Failure-evaluation mode for the success CSV.
        #[arg(long, default_value = "residual")]
        mode: String,
        #[arg(long)]
        allow_heuristic_result: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Debug: list the k shortest eligible paths per flow.
    Paths {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Restrict to one flow, `src,dst` (labels or ids).
        #[arg(long)]
        flow: Option<String>,
    },
    /// Print the theoretical flow-reward upper bound.
    Bound {
        #[arg(long, value_delimiter = ',', required = true)]
        manufacturers: Vec<usize>,
    },
    /// Generate a synthetic topology.
    Gen {
        #[command(subcommand)]
        shape: GenShape,
    },
}

#[derive(Subcommand)]
enum GenShape {
    /// Cycle over n nodes.
    Ring {
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full mesh over n nodes.
    Complete {
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn load_topology(spec: &str) -> Result<Topology, CliError> {
    if let Some(n) = spec.strip_prefix("ring:") {
        let n: usize = n
            .parse()
            .map_err(|_| CliError::input(format!("bad ring size {n:?}")))?;
        return Ok(Topology::ring(n)?);
    }
    if let Some(n) = spec.strip_prefix("complete:") {
        let n: usize = n
            .parse()
            .map_err(|_| CliError::input(format!("bad mesh size {n:?}")))?;
        return Ok(Topology::complete(n)?);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|err| CliError::input(format!("cannot read topology {spec:?}: {err}")))?;
    Ok(Topology::parse(&text)?)
}

fn load_flows(topology: &Topology, weights: &Option<PathBuf>) -> Result<FlowSet, CliError> {
    let table = match weights {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|err| CliError::input(format!("cannot read weights {path:?}: {err}")))?;
            Some(WeightTable::parse(&text)?)
        }
        None => None,
    };
    Ok(enumerate_flows(topology, table.as_ref())?)
}

fn load_assignment(path: &Path, topology: &Topology) -> Result<Assignment, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| CliError::input(format!("cannot read assignment {path:?}: {err}")))?;
    let (assignment, name) = Assignment::parse(&text)?;
    if let Some(name) = name {
        if name != topology.name() {
            eprintln!(
                "note: assignment was written for topology {name:?}, scoring against {:?}",
                topology.name()
            );
        }
    }
    assignment.check_covers(topology)?;
    Ok(assignment)
}

fn parse_solver_choice(
    solver: &str,
    seed: u64,
    restarts: u32,
    node_budget: Option<u64>,
    time_limit: Option<u64>,
) -> Result<SolverChoice, CliError> {
    let _ = seed;
    match solver {
        "exact" => Ok(SolverChoice::Exact(SolveBudget {
            max_nodes: node_budget,
            time_limit: time_limit.map(Duration::from_secs),
        })),
        "local" => Ok(SolverChoice::Local {
            restarts,
            max_iterations: None,
        }),
        other => Err(CliError::input(format!(
            "unknown solver {other:?} (expected exact|local)"
        ))),
    }
}

fn parse_mode(mode: &str) -> Result<EvalMode, CliError> {
    EvalMode::from_code(mode)
        .ok_or_else(|| CliError::input(format!("unknown mode {mode:?} (expected residual|kpaths)")))
}

fn emit(out: &Option<PathBuf>, filename: &str, contents: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(filename);
            write_atomic(&path, contents)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{contents}"),
    }
    Ok(())
}

fn score_csv(report: &netsov::metric::ScoreReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "src",
            "dst",
            "weight",
            "reward",
            "reward_exact",
            "no_eligible_paths",
        ])
        .expect("csv record");
    for flow_score in &report.flows {
        let (a, b) = flow_score.flow.endpoints();
        writer
            .write_record([
                a.to_string(),
                b.to_string(),
                flow_score.flow.weight().to_string(),
                decimal_string(&flow_score.reward, 6),
                flow_score.reward.to_string(),
                flow_score.no_eligible_paths.to_string(),
            ])
            .expect("csv record");
    }
    String::from_utf8(writer.into_inner().expect("csv bytes")).expect("csv utf8")
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Score {
            topology,
            assignment,
            k,
            out,
            format,
        } => {
            let topo = load_topology(&topology.topology)?;
            let flows = load_flows(&topo, &topology.weights)?;
            let assignment = load_assignment(&assignment, &topo)?;
            for k in k {
                let report = psd_score(&topo, &flows, &assignment, k)?;
                eprintln!(
                    "k={k}: psd = {} ({})",
                    decimal_string(&report.psd, 6),
                    report.psd
                );
                match format.as_str() {
                    "structured" => {
                        emit(&out, &format!("score_report_k{k}.json"), &report.render(&topo))?
                    }
                    "csv" => emit(&out, &format!("score_report_k{k}.csv"), &score_csv(&report))?,
                    other => {
                        return Err(CliError::input(format!(
                            "unknown format {other:?} (expected structured|csv)"
                        )))
                    }
                }
            }
            Ok(())
        }

        Command::Optimize {
            topology,
            manufacturers,
            k,
            solver,
            seed,
            time_limit,
            node_budget,
            restarts,
            allow_heuristic_result,
            out,
        } => {
            let topo = load_topology(&topology.topology)?;
            let flows = load_flows(&topo, &topology.weights)?;
            std::fs::create_dir_all(&out)?;
            if solver == "export-lp" {
                for &m in &manufacturers {
                    for &kk in &k {
                        let instance = Instance::build(topo.clone(), flows.clone(), m, kk)?;
                        let model = export_linear_model(&instance);
                        let path = out.join(format!("model_m{m}_k{kk}.lp"));
                        write_atomic(&path, &model.to_lp_string())?;
                        eprintln!("wrote {}", path.display());
                    }
                }
                return Ok(());
            }
            let choice = parse_solver_choice(&solver, seed, restarts, node_budget, time_limit)?;
            let mut exhausted = false;
            for &m in &manufacturers {
                for &kk in &k {
                    let cell_seed = derive_cell_seed(seed, m, kk);
                    let (_, result) = optimize_cell(&topo, &flows, m, kk, &choice, cell_seed)?;
                    // Independent re-score through the metric module; a
                    // mismatch means a solver bug, not an input problem.
                    let check = psd_score(&topo, &flows, &result.assignment, kk)
                        .map_err(CliError::internal)?;
                    if check.weighted_sum != result.objective || check.psd != result.psd {
                        return Err(CliError::internal(format!(
                            "objective mismatch on m={m} k={kk}: solver {} vs re-score {}",
                            result.objective, check.weighted_sum
                        )));
                    }
                    exhausted |= result.budget_exhausted;
                    let stem = format!("{}_m{m}_k{kk}", solver);
                    write_atomic(
                        &out.join(format!("assignment_{stem}.json")),
                        &result.assignment.render(Some(topo.name())),
                    )?;
                    write_atomic(
                        &out.join(format!("result_{stem}.json")),
                        &result.render(topo.name(), kk),
                    )?;
                    eprintln!(
                        "m={m} k={kk}: objective = {} psd = {} ({}, {:.2}s{})",
                        decimal_string(&result.objective, 6),
                        decimal_string(&result.psd, 6),
                        if result.proven_optimal {
                            "proven optimal"
                        } else {
                            "not proven"
                        },
                        result.wall.as_secs_f64(),
                        if result.budget_exhausted {
                            ", budget exhausted"
                        } else {
                            ""
                        },
                    );
                }
            }
            if exhausted && !allow_heuristic_result {
                return Err(CliError {
                    code: EXIT_BUDGET,
                    message: "solver budget exhausted; pass --allow-heuristic-result to accept \
                              the best found assignment"
                        .into(),
                });
            }
            Ok(())
        }

        Command::Heuristic {
            topology,
            metric,
            manufacturers,
            out,
        } => {
            let topo = load_topology(&topology.topology)?;
            let flows = load_flows(&topo, &topology.weights)?;
            let kind = CentralityKind::from_code(&metric).ok_or_else(|| {
                CliError::input(format!("unknown metric {metric:?} (expected nd|bwc|cc)"))
            })?;
            for &m in &manufacturers {
                let assignment = centrality_assignment(&topo, kind, &flows, m)?;
                emit(
                    &out,
                    &format!("assignment_{}_m{m}.json", kind.code()),
                    &assignment.render(Some(topo.name())),
                )?;
            }
            Ok(())
        }

        Command::Simulate {
            topology,
            assignment,
            mode,
            k,
            out,
        } => {
            let topo = load_topology(&topology.topology)?;
            let flows = load_flows(&topo, &topology.weights)?;
            let assignment = load_assignment(&assignment, &topo)?;
            let mode = parse_mode(&mode)?;
            let reports = simulate_all(&topo, &assignment, &flows, mode, k)?;
            emit(&out, "success_report.csv", &reports_to_csv(&reports))
        }

        Command::Sweep {
            topology,
            manufacturers,
            k,
            solver,
            seed,
            time_limit,
            node_budget,
            restarts,
            mode,
            allow_heuristic_result,
            out,
        } => {
            let topo = load_topology(&topology.topology)?;
            let flows = load_flows(&topo, &topology.weights)?;
            let choice = parse_solver_choice(&solver, seed, restarts, node_budget, time_limit)?;
            let config = SweepConfig {
                manufacturers,
                k_values: k,
                solver: choice,
                seed,
                mode: parse_mode(&mode)?,
            };
            let output = run_sweep(&topo, &flows, &config)?;
            let written = write_sweep_outputs(&output, &out)?;
            for path in &written {
                eprintln!("wrote {}", path.display());
            }
            if output.any_budget_exhausted() && !allow_heuristic_result {
                return Err(CliError {
                    code: EXIT_BUDGET,
                    message: "solver budget exhausted in at least one sweep cell; pass \
                              --allow-heuristic-result to accept"
                        .into(),
                });
            }
            Ok(())
        }

        Command::Paths { topology, k, flow } => {
            let topo = load_topology(&topology.topology)?;
            let flows = match flow {
                Some(spec) => {
                    let (s, t) = parse_flow_spec(&topo, &spec)?;
                    FlowSet::new(vec![Flow::unit(s, t).map_err(CliError::input)?])
                        .map_err(CliError::input)?
                }
                None => load_flows(&topo, &topology.weights)?,
            };
            let mut out = String::new();
            for flow in flows.iter() {
                let (s, t) = flow.endpoints();
                let set = k_shortest_paths(&topo, flow, k)?;
                writeln!(
                    out,
                    "flow {} - {}: {} path(s)",
                    topo.display_name(s),
                    topo.display_name(t),
                    set.paths().len()
                )
                .unwrap();
                for path in set.paths() {
                    let route: Vec<String> =
                        path.nodes().iter().map(|&n| topo.display_name(n)).collect();
                    writeln!(out, "  cost {:>6.2}  {}", path.cost(), route.join("-")).unwrap();
                }
            }
            print!("{out}");
            Ok(())
        }

        Command::Bound { manufacturers } => {
            for &m in &manufacturers {
                let bound = flow_reward_upper_bound(m)?;
                println!(
                    "|M| = {m}: flow reward upper bound = {} ({})",
                    decimal_string(&bound, 4),
                    bound
                );
            }
            Ok(())
        }

        Command::Gen { shape } => {
            let (topo, out) = match shape {
                GenShape::Ring { n, out } => (Topology::ring(n)?, out),
                GenShape::Complete { n, out } => (Topology::complete(n)?, out),
            };
            match out {
                Some(path) => {
                    write_atomic(&path, &topo.render())?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{}", topo.render()),
            }
            Ok(())
        }
    }
}

fn parse_flow_spec(topology: &Topology, spec: &str) -> Result<(NodeId, NodeId), CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::input(format!(
            "flow spec must be `src,dst`, got {spec:?}"
        )));
    }
    let resolve = |token: &str| -> Result<NodeId, CliError> {
        if let Some(node) = topology.node_by_label(token) {
            return Ok(node);
        }
        let id: usize = token
            .parse()
            .map_err(|_| CliError::input(format!("unknown node {token:?}")))?;
        let node = NodeId(id);
        if !topology.contains(node) {
            return Err(CliError::input(format!("node id {id} out of range")));
        }
        Ok(node)
    };
    Ok((resolve(parts[0])?, resolve(parts[1])?))
}
