//! `snnmap`: command-line front end of the mapping pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use snnmap_core::cluster::ClusterCapacity;
use snnmap_core::cost::TrafficModel;
use snnmap_core::decompose::crossbar_requirement;
use snnmap_core::generate::{generate, GeneratorParams};
use snnmap_core::model::{
    load_graph, load_hardware, load_partition, load_placement, load_trace, HardwareConfig, Placement, SnnGraph,
    SpikeTrace,
};
use snnmap_core::pipeline::{self, FanInMode, MeshSizing};
use snnmap_core::place::{ObjectiveMode, PsoParams};
use snnmap_core::{Error, InfeasibleError, Result};

#[derive(Debug, Parser)]
#[command(name = "snnmap", version, about = "Map spiking neural networks onto tile-based crossbar hardware")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fan-in stage, partitioning, placement and simulation in one run.
    Compile(CompileArgs),
    /// Unroll (or prune) oversized fan-ins and report crossbar usage.
    Decompose(DecomposeArgs),
    /// Partition a fan-in-feasible network into crossbar clusters.
    Partition(StageArgs),
    /// Place a partition on the tile mesh with the particle swarm.
    Place(PlaceArgs),
    /// Simulate the interconnect traffic of a placement.
    Eval(EvalArgs),
    /// Generate a seeded layered network and spike trace.
    Gen(GenArgs),
    /// Compare fan-in handling and placement strategies.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Network graph (JSON).
    #[arg(long)]
    graph: PathBuf,
    /// Spike trace (CSV `neuron_id,timestep`).
    #[arg(long)]
    trace: PathBuf,
    /// Hardware description (JSON). Without it the mesh is the smallest
    /// square that fits every cluster.
    #[arg(long)]
    hw: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FanInArgs {
    /// Map the network without unrolling.
    #[arg(long)]
    no_decompose: bool,
    /// Keep only the strongest inputs of oversized neurons instead of unrolling.
    #[arg(long)]
    prune: bool,
}

impl FanInArgs {
    fn mode(&self) -> FanInMode {
        match (self.prune, self.no_decompose) {
            (true, _) => FanInMode::Prune,
            (false, true) => FanInMode::Direct,
            (false, false) => FanInMode::Decompose,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Normalized,
    Literal,
}

#[derive(Debug, Args)]
struct PsoArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Particles per swarm.
    #[arg(long, default_value_t = 20)]
    swarm: usize,
    /// Iterations per restart.
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 0.72)]
    inertia: f64,
    /// Cognitive coefficient.
    #[arg(long, default_value_t = 1.49)]
    c1: f64,
    /// Social coefficient.
    #[arg(long, default_value_t = 1.49)]
    c2: f64,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, value_enum, default_value = "normalized")]
    objective: ObjectiveArg,
}

impl PsoArgs {
    fn params(&self) -> PsoParams {
        PsoParams {
            swarm_size: self.swarm,
            iterations: self.iters,
            inertia: self.inertia,
            cognitive: self.c1,
            social: self.c2,
            restarts: self.restarts,
            objective: match self.objective {
                ObjectiveArg::Normalized => ObjectiveMode::Normalized,
                ObjectiveArg::Literal => ObjectiveMode::Literal,
            },
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct CompileArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    fan_in: FanInArgs,
    #[command(flatten)]
    pso: PsoArgs,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    prune: bool,
}

#[derive(Debug, Args)]
struct StageArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Debug, Args)]
struct PlaceArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Partition produced by `partition` (JSON).
    #[arg(long)]
    partition: PathBuf,
    #[command(flatten)]
    pso: PsoArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    partition: PathBuf,
    /// Placement produced by `place` or `compile` (JSON).
    #[arg(long)]
    placement: PathBuf,
    /// Also write every delivered spike to `arrivals.csv`.
    #[arg(long)]
    arrivals: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Computing (hidden and output) neurons.
    #[arg(long, default_value_t = 100)]
    neurons: usize,
    /// Computing layers.
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// Input neurons [default: fanin-max].
    #[arg(long)]
    inputs: Option<usize>,
    #[arg(long, default_value_t = 1)]
    fanin_min: usize,
    #[arg(long, default_value_t = 256)]
    fanin_max: usize,
    /// Lowest per-timestep firing probability.
    #[arg(long, default_value_t = 0.0)]
    rate_min: f64,
    /// Highest per-timestep firing probability.
    #[arg(long, default_value_t = 0.1)]
    rate_max: f64,
    /// Timesteps simulated.
    #[arg(long, default_value_t = 100)]
    horizon: u64,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pso: PsoArgs,
    /// Random placements behind the random-baseline median.
    #[arg(long, default_value_t = 30)]
    random_trials: usize,
}

struct Inputs {
    graph: SnnGraph,
    trace: SpikeTrace,
    hw: HardwareConfig,
    sizing: MeshSizing,
}

fn load_inputs(args: &InputArgs) -> Result<Inputs> {
    let graph = load_graph(&args.graph)?;
    let trace = load_trace(&args.trace, &graph)?;
    let (hw, sizing) = match &args.hw {
        Some(path) => (load_hardware(path)?, MeshSizing::Fixed),
        None => (HardwareConfig::square_for(1), MeshSizing::Auto),
    };
    Ok(Inputs { graph, trace, hw, sizing })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| Error::Io { path, source })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })
}

fn compile(args: &CompileArgs) -> Result<()> {
    let inputs = load_inputs(&args.input)?;
    let params = args.pso.params();
    let compiled = pipeline::compile(
        &inputs.graph,
        &inputs.trace,
        &inputs.hw,
        inputs.sizing,
        args.fan_in.mode(),
        &params,
    )?;
    let out = &args.input.out;
    create_dir(out)?;
    write(out, "mapping.json", &compiled.placement().to_json_string(Some(&compiled.partition), &compiled.outcome.history))?;
    write(out, "report.json", &compiled.report_json(&inputs.graph))?;
    write(out, "history.csv", &compiled.outcome.history_csv())?;
    write(out, "partition.json", &compiled.partition.to_json_string())?;
    if let Some(d) = &compiled.stage.decomposed {
        write(out, "decomposed_graph.json", &d.graph.to_json_string())?;
        write(out, "decomposed_trace.csv", &compiled.stage.trace.to_csv_string())?;
        write(out, "origin_map.json", &d.origin_map_json())?;
    }
    let m = &compiled.report.metrics;
    println!("seed {}", params.seed);
    println!(
        "clusters {} on {}x{} mesh, cut spikes {}",
        compiled.partition.cluster_count(),
        compiled.hw.mesh_width,
        compiled.hw.mesh_height,
        compiled.partition.cut_spikes()
    );
    println!(
        "E {:.3} pJ  I {:.4}  D {:.4}  F {:.6}  avg latency {:.3}  max latency {}",
        m.energy_e, m.isi_distortion_i, m.spike_disorder_d, m.fitness_f, m.avg_latency, m.max_latency
    );
    Ok(())
}

fn decompose(args: &DecomposeArgs) -> Result<()> {
    let inputs = load_inputs(&args.input)?;
    let mode = if args.prune { FanInMode::Prune } else { FanInMode::Decompose };
    let stage = pipeline::fan_in_stage(&inputs.graph, &inputs.trace, &inputs.hw, mode)?;
    let usage = crossbar_requirement(&stage.graph, &inputs.hw)?;
    let out = &args.input.out;
    create_dir(out)?;
    write(out, "graph.json", &stage.graph.to_json_string())?;
    write(out, "trace.csv", &stage.trace.to_csv_string())?;
    if let Some(d) = &stage.decomposed {
        write(out, "origin_map.json", &d.origin_map_json())?;
        println!("fan-in units added {}", d.generated_units());
    } else {
        println!("synapses dropped {}", stage.dropped_synapses);
    }
    println!(
        "neurons {}  synapses {}  crossbars {}  utilization {:.6}",
        stage.graph.neuron_count(),
        stage.graph.synapse_count(),
        usage.crossbars,
        usage.utilization
    );
    Ok(())
}

fn partition(args: &StageArgs) -> Result<()> {
    let inputs = load_inputs(&args.input)?;
    pipeline::fan_in_stage(&inputs.graph, &inputs.trace, &inputs.hw, FanInMode::Direct)?;
    let (partition, initial_cut) = pipeline::partition_network(&inputs.graph, &inputs.trace, &inputs.hw)?;
    create_dir(&args.input.out)?;
    write(&args.input.out, "partition.json", &partition.to_json_string())?;
    let cap = ClusterCapacity::from(&inputs.hw);
    println!(
        "clusters {} (capacity {} neurons, {} inputs)  cut spikes {} -> {}",
        partition.cluster_count(),
        cap.max_neurons,
        cap.max_inputs,
        initial_cut,
        partition.cut_spikes()
    );
    Ok(())
}

fn place(args: &PlaceArgs) -> Result<()> {
    let inputs = load_inputs(&args.input)?;
    let partition = load_partition(&args.partition, &inputs.graph, &inputs.trace)?;
    let hw = pipeline::sized_hardware(&inputs.hw, inputs.sizing, partition.cluster_count());
    let params = args.pso.params();
    let model = TrafficModel::new(&partition, &inputs.trace, &hw);
    let outcome = snnmap_core::place::pso_place_model(&model, &params)?;
    let out = &args.input.out;
    create_dir(out)?;
    write(out, "mapping.json", &outcome.placement.to_json_string(Some(&partition), &outcome.history))?;
    write(out, "history.csv", &outcome.history_csv())?;
    println!("seed {}", params.seed);
    println!("best objective {:.6} after {} evaluations", outcome.placement.fitness.fitness_f, outcome.evaluations);
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let inputs = load_inputs(&args.input)?;
    let partition = load_partition(&args.partition, &inputs.graph, &inputs.trace)?;
    let placement: Placement = load_placement(&args.placement)?;
    if placement.assignment.len() != partition.cluster_count() {
        return Err(snnmap_core::ValidationError::Artifact(format!(
            "placement has {} clusters, partition {}",
            placement.assignment.len(),
            partition.cluster_count()
        ))
        .into());
    }
    let hw = match inputs.sizing {
        MeshSizing::Fixed => inputs.hw,
        MeshSizing::Auto => {
            let side = placement.assignment.iter().map(|t| t.x.max(t.y) + 1).max().unwrap_or(1);
            HardwareConfig { mesh_width: side, mesh_height: side, ..inputs.hw }
        }
    };
    if partition.cluster_count() > hw.tile_count() {
        return Err(InfeasibleError::TooManyClusters { clusters: partition.cluster_count(), tiles: hw.tile_count() }.into());
    }
    placement.validate(&hw)?;
    let report = snnmap_core::cost::simulate(&partition, &placement.assignment, &inputs.trace, &hw);
    let out = &args.input.out;
    create_dir(out)?;
    write(out, "traffic.json", &report.to_json_string())?;
    if args.arrivals {
        write(out, "arrivals.csv", &report.arrivals_csv())?;
    }
    let m = &report.metrics;
    println!(
        "E {:.3} pJ  I {:.4}  D {:.4}  F {:.6}  avg latency {:.3}  max latency {}",
        m.energy_e, m.isi_distortion_i, m.spike_disorder_d, m.fitness_f, m.avg_latency, m.max_latency
    );
    Ok(())
}

fn gen(args: &GenArgs) -> Result<()> {
    let params = GeneratorParams {
        neurons: args.neurons,
        layers: args.layers,
        inputs: args.inputs,
        fanin_min: args.fanin_min,
        fanin_max: args.fanin_max,
        rate_min: args.rate_min,
        rate_max: args.rate_max,
        horizon: args.horizon,
        seed: args.seed,
    };
    let (graph, trace) = generate(&params)?;
    create_dir(&args.out)?;
    write(&args.out, "graph.json", &graph.to_json_string())?;
    write(&args.out, "trace.csv", &trace.to_csv_string())?;
    println!("seed {}", args.seed);
    println!(
        "neurons {}  synapses {}  max fan-in {}  spikes {}",
        graph.neuron_count(),
        graph.synapse_count(),
        graph.max_fan_in(),
        trace.total_spikes()
    );
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<()> {
    let inputs = load_inputs(&args.input)?;
    let comparison = pipeline::compare(
        &inputs.graph,
        &inputs.trace,
        &inputs.hw,
        inputs.sizing,
        &args.pso.params(),
        args.random_trials,
    )?;
    create_dir(&args.input.out)?;
    write(&args.input.out, "comparison.json", &comparison.to_json_string())?;
    print!("{}", comparison.table());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Compile(a) => compile(a),
        Command::Decompose(a) => decompose(a),
        Command::Partition(a) => partition(a),
        Command::Place(a) => place(a),
        Command::Eval(a) => eval(a),
        Command::Gen(a) => gen(a),
        Command::Compare(a) => compare(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
