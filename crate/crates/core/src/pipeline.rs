//! End-to-end compilation and baseline comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cluster::{initial_partition, kl_refine, ClusterCapacity};
use crate::cost::{TrafficModel, TrafficReport};
use crate::decompose::{crossbar_requirement, prune_to_fanin, unroll_graph, CrossbarUsage, DecomposedGraph};
use crate::error::{InfeasibleError, Result};
use crate::model::{FitnessReport, HardwareConfig, Partition, Placement, SnnGraph, SpikeTrace};
use crate::place::{brute_force_place, pso_place_model, random_placement, Objective, PsoOutcome, PsoParams, Scorer};

/// How neurons above the crossbar fan-in limit are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FanInMode {
    Decompose,
    Prune,
    /// Map the network as given; oversized fan-ins are infeasible.
    Direct,
}

/// Where the mesh dimensions come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshSizing {
    /// Use the hardware description as given.
    Fixed,
    /// Replace the mesh with the smallest square that holds every cluster.
    Auto,
}

/// Network after the fan-in stage, ready to partition.
#[derive(Debug, Clone)]
pub struct FanInStage {
    pub mode: FanInMode,
    pub graph: SnnGraph,
    pub trace: SpikeTrace,
    pub decomposed: Option<DecomposedGraph>,
    pub dropped_synapses: usize,
    pub original_synapses: usize,
}

impl FanInStage {
    /// Fraction of the original synapse weights still present.
    pub fn retained_fraction(&self) -> f64 {
        if self.original_synapses == 0 {
            1.0
        } else {
            (self.original_synapses - self.dropped_synapses) as f64 / self.original_synapses as f64
        }
    }
}

pub fn fan_in_stage(graph: &SnnGraph, trace: &SpikeTrace, hw: &HardwareConfig, mode: FanInMode) -> Result<FanInStage> {
    let original_synapses = graph.synapse_count();
    match mode {
        FanInMode::Decompose => {
            let decomposed = unroll_graph(graph);
            Ok(FanInStage {
                mode,
                trace: decomposed.map_trace(trace),
                graph: decomposed.graph.clone(),
                decomposed: Some(decomposed),
                dropped_synapses: 0,
                original_synapses,
            })
        }
        FanInMode::Prune => {
            let pruned = prune_to_fanin(graph, hw.crossbar_n);
            Ok(FanInStage {
                mode,
                graph: pruned.graph,
                trace: trace.clone(),
                decomposed: None,
                dropped_synapses: pruned.dropped,
                original_synapses,
            })
        }
        FanInMode::Direct => {
            if let Some(v) = (0..graph.neuron_count()).find(|&v| graph.fan_in(v) > hw.crossbar_n) {
                return Err(InfeasibleError::FanInExceeded {
                    neuron: graph.file_id(v) as usize,
                    fan_in: graph.fan_in(v),
                    limit: hw.crossbar_n,
                }
                .into());
            }
            Ok(FanInStage {
                mode,
                graph: graph.clone(),
                trace: trace.clone(),
                decomposed: None,
                dropped_synapses: 0,
                original_synapses,
            })
        }
    }
}

/// Partitions a fan-in-feasible network.
pub fn partition_network(graph: &SnnGraph, trace: &SpikeTrace, hw: &HardwareConfig) -> Result<(Partition, u64)> {
    let initial = initial_partition(graph, trace, ClusterCapacity::from(hw))?;
    let initial_cut = initial.cut_spikes();
    let refined = kl_refine(initial, graph, trace);
    Ok((refined.to_partition(graph, trace), initial_cut))
}

pub fn sized_hardware(hw: &HardwareConfig, sizing: MeshSizing, clusters: usize) -> HardwareConfig {
    match sizing {
        MeshSizing::Fixed => hw.clone(),
        MeshSizing::Auto => {
            let square = HardwareConfig::square_for(clusters);
            HardwareConfig {
                mesh_width: square.mesh_width,
                mesh_height: square.mesh_height,
                ..hw.clone()
            }
        }
    }
}

/// Everything produced by one compilation.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub hw: HardwareConfig,
    pub stage: FanInStage,
    pub usage: CrossbarUsage,
    pub partition: Partition,
    pub initial_cut: u64,
    pub outcome: PsoOutcome,
    pub report: TrafficReport,
    pub params: PsoParams,
}

/// Fan-in stage, partitioning, swarm placement and a final simulation.
pub fn compile(
    graph: &SnnGraph,
    trace: &SpikeTrace,
    hw: &HardwareConfig,
    sizing: MeshSizing,
    mode: FanInMode,
    params: &PsoParams,
) -> Result<Compiled> {
    params.validate()?;
    let stage = fan_in_stage(graph, trace, hw, mode)?;
    let usage = crossbar_requirement(&stage.graph, hw)?;
    let (partition, initial_cut) = partition_network(&stage.graph, &stage.trace, hw)?;
    let hw = sized_hardware(hw, sizing, partition.cluster_count());
    let model = TrafficModel::new(&partition, &stage.trace, &hw);
    let outcome = pso_place_model(&model, params)?;
    let mut report = model.simulate(&outcome.placement.assignment);
    report.metrics.fitness_f = outcome.placement.fitness.fitness_f;
    Ok(Compiled {
        hw,
        stage,
        usage,
        partition,
        initial_cut,
        outcome,
        report,
        params: *params,
    })
}

#[derive(Debug, Serialize)]
struct NetworkSection {
    neurons: usize,
    synapses: usize,
    max_fan_in: usize,
    mapped_neurons: usize,
    mapped_synapses: usize,
    fit_units: usize,
    dropped_synapses: usize,
    retained_synapse_fraction: f64,
}

#[derive(Debug, Serialize)]
struct CrossbarSection {
    count: usize,
    crosspoints: usize,
    utilization: f64,
}

#[derive(Debug, Serialize)]
struct PartitionSection {
    clusters: usize,
    initial_cut_spikes: u64,
    cut_spikes: u64,
    global_spikes: u64,
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct PlacementSection {
    E_pj: f64,
    I: f64,
    D: f64,
    F: f64,
    avg_latency: f64,
    max_latency: u64,
    spike_hops: u64,
    delivered: u64,
    evaluations: usize,
    objective: Objective,
}

#[derive(Debug, Serialize)]
struct CompileReport<'a> {
    seed: u64,
    fan_in_mode: FanInMode,
    hardware: &'a HardwareConfig,
    pso: &'a PsoParams,
    network: NetworkSection,
    crossbars: CrossbarSection,
    partition: PartitionSection,
    placement: PlacementSection,
    link_loads: &'a [crate::cost::LinkLoad],
}

impl Compiled {
    pub fn placement(&self) -> &Placement {
        &self.outcome.placement
    }

    /// `report.json` contents.
    pub fn report_json(&self, original: &SnnGraph) -> String {
        let m = &self.report.metrics;
        let report = CompileReport {
            seed: self.params.seed,
            fan_in_mode: self.stage.mode,
            hardware: &self.hw,
            pso: &self.params,
            network: NetworkSection {
                neurons: original.neuron_count(),
                synapses: original.synapse_count(),
                max_fan_in: original.max_fan_in(),
                mapped_neurons: self.stage.graph.neuron_count(),
                mapped_synapses: self.stage.graph.synapse_count(),
                fit_units: self.stage.decomposed.as_ref().map_or(0, |d| d.generated_units()),
                dropped_synapses: self.stage.dropped_synapses,
                retained_synapse_fraction: self.stage.retained_fraction(),
            },
            crossbars: CrossbarSection {
                count: self.usage.crossbars,
                crosspoints: self.usage.crosspoints,
                utilization: self.usage.utilization,
            },
            partition: PartitionSection {
                clusters: self.partition.cluster_count(),
                initial_cut_spikes: self.initial_cut,
                cut_spikes: self.partition.cut_spikes(),
                global_spikes: self.report.delivered,
            },
            placement: PlacementSection {
                E_pj: m.energy_e,
                I: m.isi_distortion_i,
                D: m.spike_disorder_d,
                F: m.fitness_f,
                avg_latency: m.avg_latency,
                max_latency: m.max_latency,
                spike_hops: m.spike_hops,
                delivered: self.report.delivered,
                evaluations: self.outcome.evaluations,
                objective: self.outcome.objective,
            },
            link_loads: &self.report.link_loads,
        };
        let mut out = serde_json::to_string_pretty(&report).expect("report serializes");
        out.push('\n');
        out
    }
}

/// Random baseline placements drawn per trial: ChaCha8 seeded with the run
/// seed, stream `RANDOM_STREAM_BASE + trial`.
pub const RANDOM_STREAM_BASE: u64 = 1 << 32;

/// Upper bound on assignments the comparison will enumerate exhaustively.
pub const BRUTE_FORCE_BUDGET: u128 = 2_000_000;

/// Metrics of `trials` random decoded placements.
pub fn random_baseline(model: &TrafficModel, objective: Objective, seed: u64, trials: usize) -> Result<Vec<FitnessReport>> {
    let mut scorer = Scorer::with_objective(model, objective);
    (0..trials)
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(RANDOM_STREAM_BASE + trial as u64);
            let tiles = random_placement(model.cluster_count(), model.hardware(), &mut rng)?;
            Ok(scorer.score(&tiles))
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Field-wise median of several reports.
pub fn median_report(reports: &[FitnessReport]) -> FitnessReport {
    let pick = |f: fn(&FitnessReport) -> f64| median(&mut reports.iter().map(f).collect::<Vec<_>>());
    FitnessReport {
        energy_e: pick(|r| r.energy_e),
        isi_distortion_i: pick(|r| r.isi_distortion_i),
        spike_disorder_d: pick(|r| r.spike_disorder_d),
        avg_latency: pick(|r| r.avg_latency),
        max_latency: pick(|r| r.max_latency as f64).round() as u64,
        spike_hops: pick(|r| r.spike_hops as f64).round() as u64,
        fitness_f: pick(|r| r.fitness_f),
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct VariantRow {
    pub fan_in: FanInMode,
    pub placement: &'static str,
    pub crossbars: usize,
    pub utilization: f64,
    pub retained: f64,
    pub clusters: usize,
    pub cut_spikes: u64,
    #[serde(flatten)]
    pub metrics: FitnessReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub seed: u64,
    pub random_trials: usize,
    pub rows: Vec<VariantRow>,
    /// Percentage change of the swarm placement against the random median,
    /// per fan-in mode: `(mode, energy %, avg latency %)`.
    pub placement_deltas: Vec<(FanInMode, f64, f64)>,
    /// Decomposition against pruning: `(crossbar %, utilization %, retained %)`.
    pub fan_in_deltas: (f64, f64, f64),
}

fn percent_change(new: f64, base: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        100.0 * (new - base) / base
    }
}

/// Runs {decompose, prune} x {swarm, random median, brute force when small}.
pub fn compare(
    graph: &SnnGraph,
    trace: &SpikeTrace,
    hw: &HardwareConfig,
    sizing: MeshSizing,
    params: &PsoParams,
    random_trials: usize,
) -> Result<Comparison> {
    let mut rows = Vec::new();
    let mut placement_deltas = Vec::new();
    let mut summary = Vec::new();
    for mode in [FanInMode::Decompose, FanInMode::Prune] {
        let compiled = compile(graph, trace, hw, sizing, mode, params)?;
        let model = TrafficModel::new(&compiled.partition, &compiled.stage.trace, &compiled.hw);
        let row = |placement: &'static str, metrics: FitnessReport| VariantRow {
            fan_in: mode,
            placement,
            crossbars: compiled.usage.crossbars,
            utilization: compiled.usage.utilization,
            retained: compiled.stage.retained_fraction(),
            clusters: compiled.partition.cluster_count(),
            cut_spikes: compiled.partition.cut_spikes(),
            metrics,
        };
        let swarm = compiled.report.metrics;
        rows.push(row("pso", swarm));
        let random = median_report(&random_baseline(&model, compiled.outcome.objective, params.seed, random_trials)?);
        rows.push(row("random", random));
        let k = compiled.partition.cluster_count();
        if k <= crate::place::BRUTE_FORCE_LIMIT && assignment_count(compiled.hw.tile_count(), k) <= BRUTE_FORCE_BUDGET {
            let best = brute_force_place(
                &compiled.partition,
                &compiled.hw,
                &compiled.stage.trace,
                params.objective,
                Some(compiled.outcome.objective),
            )?;
            rows.push(row("brute", best.fitness));
        }
        placement_deltas.push((
            mode,
            percent_change(swarm.energy_e, random.energy_e),
            percent_change(swarm.avg_latency, random.avg_latency),
        ));
        summary.push((compiled.usage, compiled.stage.retained_fraction()));
    }
    let (dec, pru) = (summary[0], summary[1]);
    Ok(Comparison {
        seed: params.seed,
        random_trials,
        rows,
        placement_deltas,
        fan_in_deltas: (
            percent_change(dec.0.crossbars as f64, pru.0.crossbars as f64),
            percent_change(dec.0.utilization, pru.0.utilization),
            percent_change(dec.1, pru.1),
        ),
    })
}

/// Injective assignments of `k` clusters onto `tiles` tiles.
pub fn assignment_count(tiles: usize, k: usize) -> u128 {
    if k > tiles {
        return 0;
    }
    ((tiles - k + 1)..=tiles).map(|t| t as u128).product()
}

impl Comparison {
    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("comparison serializes");
        out.push('\n');
        out
    }

    pub fn table(&self) -> String {
        let mut out = format!("seed {}  random trials {}\n", self.seed, self.random_trials);
        out.push_str(&format!(
            "{:<10} {:<7} {:>9} {:>11} {:>9} {:>8} {:>12} {:>12} {:>10} {:>8} {:>9} {:>8}\n",
            "fan-in", "place", "crossbars", "utilization", "retained", "clusters", "cut_spikes", "E_pj", "I", "D", "avg_lat", "max_lat"
        ));
        for r in &self.rows {
            let mode = match r.fan_in {
                FanInMode::Decompose => "decompose",
                FanInMode::Prune => "prune",
                FanInMode::Direct => "direct",
            };
            out.push_str(&format!(
                "{:<10} {:<7} {:>9} {:>11.6} {:>8.2}% {:>8} {:>12} {:>12.2} {:>10.4} {:>8.4} {:>9.3} {:>8}\n",
                mode,
                r.placement,
                r.crossbars,
                r.utilization,
                100.0 * r.retained,
                r.clusters,
                r.cut_spikes,
                r.metrics.energy_e,
                r.metrics.isi_distortion_i,
                r.metrics.spike_disorder_d,
                r.metrics.avg_latency,
                r.metrics.max_latency
            ));
        }
        for (mode, e, l) in &self.placement_deltas {
            out.push_str(&format!("{mode:?}: pso vs random median  E {e:+.1}%  avg latency {l:+.1}%\n"));
        }
        let (c, u, k) = self.fan_in_deltas;
        out.push_str(&format!(
            "decompose vs prune: crossbars {c:+.1}%  utilization {u:+.1}%  retained synapses {k:+.1}%\n"
        ));
        out
    }
}
