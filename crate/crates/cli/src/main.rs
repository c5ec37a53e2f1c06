//! Command-line interface for the epistemic analysis of communication
//! networks: graph queries, model checking, proof verification, flow
//! construction, and randomized soundness sweeps.
//!
//! Every command prints one JSON report to stdout. Exit codes: 0 for a
//! positive outcome, 1 for a negative verdict (violation, rejection,
//! counterexample), 2 for usage errors, 3 for file or format errors.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use eaves::flow::{self, FlowError};
use eaves::formula::parse;
use eaves::io::{self, FlowDoc, GraphDoc, ProfileDoc, ProofDoc, ProtocolDoc, RunDoc};
use eaves::modelcheck::{self, StateSpace, Validity};
use eaves::multigraph::{EdgeId, Multigraph, VertexId};
use eaves::proofcheck::{self, ReasonCode};

#[derive(Parser)]
#[command(
    name = "eaves",
    version,
    about = "Epistemic logic of communication networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Topology queries on a graph file.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Model checking over a protocol file.
    Check(CheckArgs),
    /// Verify a proof script file.
    Prove {
        /// Proof file (JSON).
        proof: PathBuf,
    },
    /// Flow construction and verification over knowledge profiles.
    Flow {
        #[command(subcommand)]
        command: FlowCommand,
    },
    /// Randomized test sweeps.
    Fuzz {
        #[command(subcommand)]
        command: FuzzCommand,
    },
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Connectivity, bridges, components, gateways, incidence, cycles.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Graph file (JSON).
    graph: PathBuf,
    /// Report the set of bridges.
    #[arg(long)]
    bridges: bool,
    /// Decide a gateway: `--gateway <GATE> <LEFT> <RIGHT>` with the two edge
    /// sets as comma-separated lists.
    #[arg(long, num_args = 3, value_names = ["GATE", "LEFT", "RIGHT"])]
    gateway: Option<Vec<String>>,
    /// Component after deleting an edge: `--component <VERTEX> <EDGE>`.
    #[arg(long, num_args = 2, value_names = ["VERTEX", "EDGE"])]
    component: Option<Vec<String>>,
    /// Edges incident to a vertex.
    #[arg(long)]
    incident: Option<String>,
    /// A circular path through an edge.
    #[arg(long)]
    cycle: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// Protocol file (JSON).
    protocol: PathBuf,
    /// Formula in concrete syntax.
    #[arg(long)]
    formula: String,
    /// Check satisfaction at this run (JSON file).
    #[arg(long, conflicts_with = "valid")]
    run: Option<PathBuf>,
    /// Check validity over every run.
    #[arg(long)]
    valid: bool,
}

#[derive(Subcommand)]
enum FlowCommand {
    /// The base flow of a profile: 1 on sink ends, 0 elsewhere.
    Base {
        profile: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a flow enforcing every edge's conditions.
    Build {
        profile: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a flow file against a profile.
    Verify {
        profile: PathBuf,
        #[arg(long)]
        flow: PathBuf,
        /// Enforcement set: `all`, `none`, or a comma-separated edge list.
        #[arg(long, default_value = "all")]
        enforced: String,
    },
    /// Rebuild a flow matching prescribed end values on one edge.
    Reroute {
        profile: PathBuf,
        /// A flow verifying everywhere, used as the starting point.
        #[arg(long)]
        flow: PathBuf,
        /// The edge to match.
        #[arg(long)]
        edge: String,
        /// Target end values `t0,t1` as exact rationals.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FuzzCommand {
    /// Check random axiom-schema instances over random protocols.
    Soundness {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random protocols.
        #[arg(long, default_value_t = 200)]
        iters: usize,
        /// Instances per schema per protocol.
        #[arg(long, default_value_t = 10)]
        instances: usize,
    },
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    status: &'static str,
    command: &'static str,
    #[serde(flatten)]
    payload: T,
}

const STATUS_OK: &str = "ok";
const STATUS_VIOLATION: &str = "violation";
const STATUS_REJECTED: &str = "rejected";
const STATUS_ERROR: &str = "error";

fn emit<T: Serialize>(status: &'static str, command: &'static str, payload: T) -> ExitCode {
    print!(
        "{}",
        io::to_json_pretty(&Report {
            status,
            command,
            payload
        })
    );
    match status {
        s if s == STATUS_OK => ExitCode::from(0),
        s if s == STATUS_ERROR => ExitCode::from(3),
        _ => ExitCode::from(1),
    }
}

#[derive(Serialize)]
struct ErrorPayload {
    error: String,
}

fn fail(command: &'static str, error: impl ToString) -> ExitCode {
    emit(
        STATUS_ERROR,
        command,
        ErrorPayload {
            error: error.to_string(),
        },
    )
}

fn split_edges(list: &str) -> BTreeSet<EdgeId> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(EdgeId::from)
        .collect()
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Graph {
            command: GraphCommand::Analyze(args),
        } => graph_analyze(args),
        Command::Check(args) => check(args),
        Command::Prove { proof } => prove(proof),
        Command::Flow { command } => flow_command(command),
        Command::Fuzz { command } => fuzz_command(command),
    }
}

#[derive(Serialize, Default)]
struct AnalyzePayload {
    vertices: usize,
    edges: usize,
    connected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    bridges: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gateway: Option<GatewayReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    component: Option<ComponentReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    incident: Option<IncidentReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cycle: Option<CycleReport>,
}

#[derive(Serialize)]
struct GatewayReport {
    gate: String,
    left: Vec<String>,
    right: Vec<String>,
    is_gateway: bool,
}

#[derive(Serialize)]
struct ComponentReport {
    vertex: String,
    without_edge: String,
    vertices: Vec<String>,
    edges: Vec<String>,
}

#[derive(Serialize)]
struct IncidentReport {
    vertex: String,
    edges: Vec<String>,
}

#[derive(Serialize)]
struct CycleReport {
    edge: String,
    edges: Vec<String>,
    vertices: Vec<String>,
}

fn graph_analyze(args: AnalyzeArgs) -> ExitCode {
    const CMD: &str = "graph analyze";
    let graph: Multigraph =
        match io::read_json::<GraphDoc>(&args.graph).and_then(|doc| doc.to_graph()) {
            Ok(g) => g,
            Err(e) => return fail(CMD, e),
        };
    let mut payload = AnalyzePayload {
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        connected: graph.is_connected(),
        ..AnalyzePayload::default()
    };
    if args.bridges {
        match graph.bridges() {
            Ok(b) => payload.bridges = Some(b.into_iter().map(|e| e.0).collect()),
            Err(e) => return fail(CMD, e),
        }
    }
    if let Some(parts) = &args.gateway {
        let gate = EdgeId::from(parts[0].clone());
        let left = split_edges(&parts[1]);
        let right = split_edges(&parts[2]);
        match graph.is_gateway(&gate, &left, &right) {
            Ok(result) => {
                payload.gateway = Some(GatewayReport {
                    gate: gate.0,
                    left: left.into_iter().map(|e| e.0).collect(),
                    right: right.into_iter().map(|e| e.0).collect(),
                    is_gateway: result,
                });
            }
            Err(e) => return fail(CMD, e),
        }
    }
    if let Some(parts) = &args.component {
        let vertex = VertexId::from(parts[0].clone());
        let edge = EdgeId::from(parts[1].clone());
        match graph.component_without(&vertex, &edge) {
            Ok((vs, es)) => {
                payload.component = Some(ComponentReport {
                    vertex: vertex.0,
                    without_edge: edge.0,
                    vertices: vs.into_iter().map(|v| v.0).collect(),
                    edges: es.into_iter().map(|e| e.0).collect(),
                });
            }
            Err(e) => return fail(CMD, e),
        }
    }
    if let Some(v) = &args.incident {
        let vertex = VertexId::from(v.clone());
        match graph.incident_edges(&vertex) {
            Ok(es) => {
                payload.incident = Some(IncidentReport {
                    vertex: vertex.0,
                    edges: es.iter().map(|e| e.0.clone()).collect(),
                });
            }
            Err(e) => return fail(CMD, e),
        }
    }
    if let Some(e) = &args.cycle {
        let edge = EdgeId::from(e.clone());
        match graph.find_cycle_through(&edge) {
            Ok(path) => {
                payload.cycle = Some(CycleReport {
                    edge: edge.0,
                    edges: path.edges.into_iter().map(|e| e.0).collect(),
                    vertices: path.vertices.into_iter().map(|v| v.0).collect(),
                });
            }
            Err(e) => return fail(CMD, e),
        }
    }
    emit(STATUS_OK, CMD, payload)
}

#[derive(Serialize)]
struct CheckPayload {
    formula: String,
    query: &'static str,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<RunDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<RunDoc>,
}

fn check(args: CheckArgs) -> ExitCode {
    const CMD: &str = "check";
    let protocol =
        match io::read_json::<ProtocolDoc>(&args.protocol).and_then(|doc| doc.to_protocol()) {
            Ok(p) => p,
            Err(e) => return fail(CMD, e),
        };
    let formula = match parse(protocol.signature(), &args.formula) {
        Ok(f) => f,
        Err(e) => return fail(CMD, e),
    };
    let mut space = match StateSpace::new(&protocol) {
        Ok(s) => s,
        Err(e) => return fail(CMD, e),
    };
    if let Some(run_path) = &args.run {
        let run_doc: RunDoc = match io::read_json(run_path) {
            Ok(d) => d,
            Err(e) => return fail(CMD, e),
        };
        let run = io::run_from_doc(&run_doc);
        match space.satisfies(&run, &formula) {
            Ok(holds) => {
                let status = if holds { STATUS_OK } else { STATUS_VIOLATION };
                emit(
                    status,
                    CMD,
                    CheckPayload {
                        formula: formula.to_string(),
                        query: "run",
                        holds,
                        run: Some(run_doc),
                        counterexample: None,
                    },
                )
            }
            Err(e) => fail(CMD, e),
        }
    } else if args.valid {
        match space.check_validity(&formula) {
            Ok(Validity::Valid) => emit(
                STATUS_OK,
                CMD,
                CheckPayload {
                    formula: formula.to_string(),
                    query: "valid",
                    holds: true,
                    run: None,
                    counterexample: None,
                },
            ),
            Ok(Validity::Counterexample(run)) => emit(
                STATUS_VIOLATION,
                CMD,
                CheckPayload {
                    formula: formula.to_string(),
                    query: "valid",
                    holds: false,
                    run: None,
                    counterexample: Some(io::run_to_doc(&run)),
                },
            ),
            Err(e) => fail(CMD, e),
        }
    } else {
        fail(CMD, "pass --run <file> or --valid")
    }
}

#[derive(Serialize)]
struct ProvePayload {
    mode: &'static str,
    lines: usize,
    conclusion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejection: Option<RejectionReport>,
}

#[derive(Serialize)]
struct RejectionReport {
    line: usize,
    reason: ReasonCode,
    detail: String,
}

fn prove(path: PathBuf) -> ExitCode {
    const CMD: &str = "prove";
    let script = match io::read_json::<ProofDoc>(&path).and_then(|doc| doc.to_script()) {
        Ok(s) => s,
        Err(e) => return fail(CMD, e),
    };
    let mode = match script.mode {
        proofcheck::Mode::Theorem => "theorem",
        proofcheck::Mode::Hypothesis => "hypothesis",
    };
    let payload = |rejection| ProvePayload {
        mode,
        lines: script.lines.len(),
        conclusion: script.conclusion().map(|f| f.to_string()),
        rejection,
    };
    match proofcheck::check_proof(&script) {
        Ok(()) => emit(STATUS_OK, CMD, payload(None)),
        Err(r) => emit(
            STATUS_REJECTED,
            CMD,
            payload(Some(RejectionReport {
                line: r.line + 1,
                reason: r.reason,
                detail: r.detail,
            })),
        ),
    }
}

#[derive(Serialize)]
struct FlowPayload {
    /// Per edge: the end values in stored endpoint order.
    #[serde(skip_serializing_if = "Option::is_none")]
    flow: Option<std::collections::BTreeMap<String, [String; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violations: Option<Vec<ViolationReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

#[derive(Serialize)]
struct ViolationReport {
    condition: String,
    subject: String,
    detail: String,
}

fn write_out(out: &Option<PathBuf>, doc: &FlowDoc) -> Result<(), String> {
    if let Some(path) = out {
        std::fs::write(path, io::to_json_pretty(doc))
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

fn flow_command(command: FlowCommand) -> ExitCode {
    match command {
        FlowCommand::Base { profile, out } => {
            const CMD: &str = "flow base";
            let profile =
                match io::read_json::<ProfileDoc>(&profile).and_then(|doc| doc.to_profile()) {
                    Ok(p) => p,
                    Err(e) => return fail(CMD, e),
                };
            match flow::build_base(&profile) {
                Ok(f) => {
                    let doc = FlowDoc::from_flow(&f);
                    if let Err(e) = write_out(&out, &doc) {
                        return fail(CMD, e);
                    }
                    emit(
                        STATUS_OK,
                        CMD,
                        FlowPayload {
                            flow: Some(doc.flow),
                            violations: None,
                            detail: None,
                        },
                    )
                }
                Err(e) => fail(CMD, e),
            }
        }
        FlowCommand::Build { profile, out } => {
            const CMD: &str = "flow build";
            let profile =
                match io::read_json::<ProfileDoc>(&profile).and_then(|doc| doc.to_profile()) {
                    Ok(p) => p,
                    Err(e) => return fail(CMD, e),
                };
            match flow::build_flow(&profile) {
                Ok(f) => {
                    let doc = FlowDoc::from_flow(&f);
                    if let Err(e) = write_out(&out, &doc) {
                        return fail(CMD, e);
                    }
                    emit(
                        STATUS_OK,
                        CMD,
                        FlowPayload {
                            flow: Some(doc.flow),
                            violations: None,
                            detail: None,
                        },
                    )
                }
                Err(e @ FlowError::InconsistentProfile { .. }) => emit(
                    STATUS_VIOLATION,
                    CMD,
                    FlowPayload {
                        flow: None,
                        violations: None,
                        detail: Some(e.to_string()),
                    },
                ),
                Err(e) => fail(CMD, e),
            }
        }
        FlowCommand::Verify {
            profile,
            flow: flow_path,
            enforced,
        } => {
            const CMD: &str = "flow verify";
            let profile =
                match io::read_json::<ProfileDoc>(&profile).and_then(|doc| doc.to_profile()) {
                    Ok(p) => p,
                    Err(e) => return fail(CMD, e),
                };
            let flow_doc: FlowDoc = match io::read_json(&flow_path) {
                Ok(d) => d,
                Err(e) => return fail(CMD, e),
            };
            let assignment = match flow_doc.to_flow(profile.graph()) {
                Ok(f) => f,
                Err(e) => return fail(CMD, e),
            };
            let enforced_set: BTreeSet<EdgeId> = match enforced.as_str() {
                "all" => profile.graph().edge_ids().cloned().collect(),
                "none" => BTreeSet::new(),
                list => split_edges(list),
            };
            match flow::verify_flow(&profile, &assignment, &enforced_set) {
                Ok(violations) => {
                    let status = if violations.is_empty() {
                        STATUS_OK
                    } else {
                        STATUS_VIOLATION
                    };
                    emit(
                        status,
                        CMD,
                        FlowPayload {
                            flow: None,
                            violations: Some(
                                violations
                                    .into_iter()
                                    .map(|v| ViolationReport {
                                        condition: v.condition.to_string(),
                                        subject: v.subject,
                                        detail: v.detail,
                                    })
                                    .collect(),
                            ),
                            detail: None,
                        },
                    )
                }
                Err(e) => fail(CMD, e),
            }
        }
        FlowCommand::Reroute {
            profile,
            flow: flow_path,
            edge,
            target,
            out,
        } => {
            const CMD: &str = "flow reroute";
            let profile =
                match io::read_json::<ProfileDoc>(&profile).and_then(|doc| doc.to_profile()) {
                    Ok(p) => p,
                    Err(e) => return fail(CMD, e),
                };
            let flow_doc: FlowDoc = match io::read_json(&flow_path) {
                Ok(d) => d,
                Err(e) => return fail(CMD, e),
            };
            let base = match flow_doc.to_flow(profile.graph()) {
                Ok(f) => f,
                Err(e) => return fail(CMD, e),
            };
            let parts: Vec<&str> = target.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return fail(CMD, "--target takes two rationals `t0,t1`");
            }
            let t0 = match io::parse_rational(parts[0]) {
                Ok(r) => r,
                Err(e) => return fail(CMD, e),
            };
            let t1 = match io::parse_rational(parts[1]) {
                Ok(r) => r,
                Err(e) => return fail(CMD, e),
            };
            match flow::reroute_to_match(&profile, &base, &EdgeId::from(edge), (t0, t1)) {
                Ok(f) => {
                    let doc = FlowDoc::from_flow(&f);
                    if let Err(e) = write_out(&out, &doc) {
                        return fail(CMD, e);
                    }
                    emit(
                        STATUS_OK,
                        CMD,
                        FlowPayload {
                            flow: Some(doc.flow),
                            violations: None,
                            detail: None,
                        },
                    )
                }
                Err(e @ (FlowError::CaseViolation { .. } | FlowError::NoGammaPath { .. })) => emit(
                    STATUS_VIOLATION,
                    CMD,
                    FlowPayload {
                        flow: None,
                        violations: None,
                        detail: Some(e.to_string()),
                    },
                ),
                Err(e) => fail(CMD, e),
            }
        }
    }
}

#[derive(Serialize)]
struct FuzzPayload {
    seed: u64,
    protocols: usize,
    instances: usize,
    counterexamples: Vec<CounterexampleReport>,
}

#[derive(Serialize)]
struct CounterexampleReport {
    protocol_seed: u64,
    schema: String,
    formula: String,
    run: RunDoc,
}

fn fuzz_command(command: FuzzCommand) -> ExitCode {
    match command {
        FuzzCommand::Soundness {
            seed,
            iters,
            instances,
        } => {
            const CMD: &str = "fuzz soundness";
            match modelcheck::fuzz_soundness(seed, iters, instances, 4, 5, 3) {
                Ok(report) => {
                    let status = if report.counterexamples.is_empty() {
                        STATUS_OK
                    } else {
                        STATUS_VIOLATION
                    };
                    emit(
                        status,
                        CMD,
                        FuzzPayload {
                            seed,
                            protocols: report.protocols,
                            instances: report.instances,
                            counterexamples: report
                                .counterexamples
                                .into_iter()
                                .map(
                                    |(protocol_seed, schema, formula, run)| CounterexampleReport {
                                        protocol_seed,
                                        schema,
                                        formula: formula.to_string(),
                                        run: io::run_to_doc(&run),
                                    },
                                )
                                .collect(),
                        },
                    )
                }
                Err(e) => fail(CMD, e),
            }
        }
    }
}
