//! Data model for networks, spike traces, hardware descriptions, partitions and
//! placements, plus the loaders and writers for their file formats.
//!
//! Neuron ids are densified to `0..N` on load (ascending order of the ids found
//! in the file). Synapses are kept sorted by `(src, dst)`, so per-neuron input
//! lists come out in ascending source order.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeuronKind {
    Input,
    Hidden,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neuron {
    pub id: usize,
    pub kind: NeuronKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synapse {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Directed weighted graph of neurons and synapses.
#[derive(Debug, Clone, PartialEq)]
pub struct SnnGraph {
    neurons: Vec<Neuron>,
    synapses: Vec<Synapse>,
    /// Synapse indices by destination; neuron `v` owns
    /// `incoming[incoming_start[v]..incoming_start[v + 1]]`.
    incoming: Vec<usize>,
    incoming_start: Vec<usize>,
    /// Same layout by source. Synapses are sorted by source, so this is `0..m`.
    outgoing: Vec<usize>,
    outgoing_start: Vec<usize>,
    file_ids: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NeuronDoc {
    id: u64,
    kind: NeuronKind,
}

#[derive(Debug, Serialize, Deserialize)]
struct SynapseDoc {
    src: u64,
    dst: u64,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphDoc {
    neurons: Vec<NeuronDoc>,
    synapses: Vec<SynapseDoc>,
}

impl SnnGraph {
    /// Builds a validated graph. Ids may be sparse; they are relabelled to
    /// `0..N` in ascending order, and errors name the ids as given.
    pub fn new(neurons: Vec<Neuron>, synapses: Vec<Synapse>) -> Result<Self> {
        let raw_neurons = neurons
            .into_iter()
            .map(|n| (n.id as u64, n.kind))
            .collect();
        let raw_synapses = synapses
            .into_iter()
            .map(|s| (s.src as u64, s.dst as u64, s.weight))
            .collect();
        Self::from_raw(raw_neurons, raw_synapses)
    }

    fn from_raw(mut neurons: Vec<(u64, NeuronKind)>, synapses: Vec<(u64, u64, f64)>) -> Result<Self> {
        neurons.sort_by_key(|&(id, _)| id);
        for pair in neurons.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(ValidationError::DuplicateNeuron(pair[0].0).into());
            }
        }
        // already dense ids index directly; sparse ones are binary searched
        let is_dense = neurons.iter().enumerate().all(|(i, &(id, _))| id == i as u64);
        let dense = |id: u64| -> Option<usize> {
            if is_dense {
                (id < neurons.len() as u64).then_some(id as usize)
            } else {
                neurons.binary_search_by_key(&id, |&(v, _)| v).ok()
            }
        };

        let mut dense_synapses = Vec::with_capacity(synapses.len());
        for (src, dst, weight) in synapses {
            if !weight.is_finite() {
                return Err(ValidationError::NonFiniteWeight { src, dst }.into());
            }
            if src == dst {
                return Err(ValidationError::SelfLoop(src).into());
            }
            let s = dense(src).ok_or(ValidationError::DanglingEndpoint { src, dst, missing: src })?;
            let d = dense(dst).ok_or(ValidationError::DanglingEndpoint { src, dst, missing: dst })?;
            dense_synapses.push(Synapse { src: s, dst: d, weight });
        }
        dense_synapses.sort_unstable_by_key(|s| (s.src, s.dst));
        if let Some(pair) = dense_synapses.windows(2).find(|p| (p[0].src, p[0].dst) == (p[1].src, p[1].dst)) {
            return Err(ValidationError::DuplicateSynapse {
                src: neurons[pair[0].src].0,
                dst: neurons[pair[0].dst].0,
            }
            .into());
        }

        let n = neurons.len();
        let offsets = |key: fn(&Synapse) -> usize| {
            let mut start = vec![0; n + 1];
            for s in &dense_synapses {
                start[key(s) + 1] += 1;
            }
            for v in 0..n {
                start[v + 1] += start[v];
            }
            start
        };
        let incoming_start = offsets(|s| s.dst);
        let outgoing_start = offsets(|s| s.src);
        let mut fill = incoming_start.clone();
        let mut incoming = vec![0; dense_synapses.len()];
        for (i, s) in dense_synapses.iter().enumerate() {
            incoming[fill[s.dst]] = i;
            fill[s.dst] += 1;
        }
        for (i, &(id, kind)) in neurons.iter().enumerate() {
            if kind == NeuronKind::Input && incoming_start[i + 1] > incoming_start[i] {
                return Err(ValidationError::InputWithFanIn(id).into());
            }
        }

        Ok(SnnGraph {
            file_ids: neurons.iter().map(|&(id, _)| id).collect(),
            neurons: neurons
                .iter()
                .enumerate()
                .map(|(id, &(_, kind))| Neuron { id, kind })
                .collect(),
            outgoing: (0..dense_synapses.len()).collect(),
            synapses: dense_synapses,
            incoming,
            incoming_start,
            outgoing_start,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::parse("graph", e))?;
        Self::from_raw(
            doc.neurons.into_iter().map(|n| (n.id, n.kind)).collect(),
            doc.synapses
                .into_iter()
                .map(|s| (s.src, s.dst, s.weight))
                .collect(),
        )
    }

    /// Canonical JSON form (dense ids, sorted synapses, trailing newline).
    pub fn to_json_string(&self) -> String {
        let doc = GraphDoc {
            neurons: self
                .neurons
                .iter()
                .map(|n| NeuronDoc {
                    id: n.id as u64,
                    kind: n.kind,
                })
                .collect(),
            synapses: self
                .synapses
                .iter()
                .map(|s| SynapseDoc {
                    src: s.src as u64,
                    dst: s.dst as u64,
                    weight: s.weight,
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("graph serializes");
        out.push('\n');
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path, &self.to_json_string())
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    pub fn synapse_count(&self) -> usize {
        self.synapses.len()
    }

    pub fn neurons(&self) -> &[Neuron] {
        &self.neurons
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    pub fn kind(&self, neuron: usize) -> NeuronKind {
        self.neurons[neuron].kind
    }

    pub fn fan_in(&self, neuron: usize) -> usize {
        self.incoming_start[neuron + 1] - self.incoming_start[neuron]
    }

    pub fn fan_out(&self, neuron: usize) -> usize {
        self.outgoing_start[neuron + 1] - self.outgoing_start[neuron]
    }

    /// Indices into [`Self::synapses`] of the synapses ending at `neuron`,
    /// in ascending source order.
    pub fn incoming(&self, neuron: usize) -> &[usize] {
        &self.incoming[self.incoming_start[neuron]..self.incoming_start[neuron + 1]]
    }

    /// Indices of the synapses leaving `neuron`, in ascending destination order.
    pub fn outgoing(&self, neuron: usize) -> &[usize] {
        &self.outgoing[self.outgoing_start[neuron]..self.outgoing_start[neuron + 1]]
    }

    pub fn inputs_of(&self, neuron: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.incoming(neuron).iter().map(move |&i| {
            let s = &self.synapses[i];
            (s.src, s.weight)
        })
    }

    pub fn max_fan_in(&self) -> usize {
        (0..self.neuron_count()).map(|v| self.fan_in(v)).max().unwrap_or(0)
    }

    /// The id a neuron carried in the file it was loaded from.
    pub fn file_id(&self, neuron: usize) -> u64 {
        self.file_ids[neuron]
    }

    fn dense_id(&self, file_id: u64) -> Option<usize> {
        self.file_ids.binary_search(&file_id).ok()
    }
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<SnnGraph> {
    SnnGraph::from_json_str(&read_file(path)?)
}

/// Per-neuron spike timesteps, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeTrace {
    trains: Vec<Vec<u64>>,
}

impl SpikeTrace {
    pub fn empty(neurons: usize) -> Self {
        SpikeTrace {
            trains: vec![Vec::new(); neurons],
        }
    }

    /// Builds a trace from per-neuron trains; each train is sorted and must not
    /// repeat a timestep.
    pub fn from_trains(mut trains: Vec<Vec<u64>>) -> Result<Self> {
        for (neuron, train) in trains.iter_mut().enumerate() {
            train.sort_unstable();
            if let Some(pair) = train.windows(2).find(|p| p[0] == p[1]) {
                return Err(ValidationError::DuplicateTimestamp {
                    neuron: neuron as u64,
                    timestep: pair[0],
                }
                .into());
            }
        }
        Ok(SpikeTrace { trains })
    }

    /// Parses the `neuron_id,timestep` CSV form against `graph`'s file ids.
    pub fn from_csv_reader<R: Read>(reader: R, graph: &SnnGraph) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = csv.headers().map_err(|e| Error::parse("trace", e))?.clone();
        if !headers.is_empty() && (headers.len() != 2 || &headers[0] != "neuron_id" || &headers[1] != "timestep") {
            return Err(Error::parse(
                "trace",
                format!("expected header `neuron_id,timestep`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            ));
        }
        let mut trains = vec![Vec::new(); graph.neuron_count()];
        for record in csv.deserialize::<(u64, u64)>() {
            let (file_id, timestep) = record.map_err(|e| Error::parse("trace", e))?;
            let neuron = graph
                .dense_id(file_id)
                .ok_or(ValidationError::UnknownTraceNeuron(file_id))?;
            trains[neuron].push(timestep);
        }
        for (neuron, train) in trains.iter_mut().enumerate() {
            train.sort_unstable();
            if let Some(pair) = train.windows(2).find(|p| p[0] == p[1]) {
                return Err(ValidationError::DuplicateTimestamp {
                    neuron: graph.file_id(neuron),
                    timestep: pair[0],
                }
                .into());
            }
        }
        Ok(SpikeTrace { trains })
    }

    /// CSV form, rows ordered by neuron then timestep.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("neuron_id,timestep\n");
        for (neuron, train) in self.trains.iter().enumerate() {
            for t in train {
                out.push_str(&format!("{neuron},{t}\n"));
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path, &self.to_csv_string())
    }

    pub fn neuron_count(&self) -> usize {
        self.trains.len()
    }

    pub fn train(&self, neuron: usize) -> &[u64] {
        self.trains.get(neuron).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn spike_count(&self, neuron: usize) -> u64 {
        self.train(neuron).len() as u64
    }

    pub fn total_spikes(&self) -> u64 {
        self.trains.iter().map(|t| t.len() as u64).sum()
    }

    /// One past the last spike timestep, or 0 for an empty trace.
    pub fn horizon(&self) -> u64 {
        self.trains
            .iter()
            .filter_map(|t| t.last())
            .max()
            .map_or(0, |&t| t + 1)
    }
}

pub fn load_trace(path: impl AsRef<Path>, graph: &SnnGraph) -> Result<SpikeTrace> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    SpikeTrace::from_csv_reader(file, graph)
}

/// Spikes carried by one synapse: every spike of the source neuron crosses
/// each of its outgoing synapses once.
pub fn synapse_spike_count(trace: &SpikeTrace, synapse: &Synapse) -> u64 {
    trace.spike_count(synapse.src)
}

fn default_crossbar_n() -> usize {
    128
}

fn default_energy() -> f64 {
    1.0
}

fn default_latency() -> u64 {
    1
}

fn default_link_capacity() -> u32 {
    1
}

/// Tile mesh and crossbar description. One crossbar per tile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareConfig {
    pub mesh_width: usize,
    pub mesh_height: usize,
    /// Max distinct pre-synaptic inputs and max neurons per crossbar.
    #[serde(default = "default_crossbar_n")]
    pub crossbar_n: usize,
    /// Picojoules per spike per link traversal.
    #[serde(rename = "energy_per_hop_pj", default = "default_energy")]
    pub energy_per_hop: f64,
    /// Timesteps per link traversal.
    #[serde(default = "default_latency")]
    pub latency_per_hop: u64,
    /// Spikes per directed link per timestep. `u32::MAX` is treated as unbounded.
    #[serde(default = "default_link_capacity")]
    pub link_capacity: u32,
}

impl HardwareConfig {
    pub fn with_mesh(mesh_width: usize, mesh_height: usize) -> Self {
        HardwareConfig {
            mesh_width,
            mesh_height,
            crossbar_n: default_crossbar_n(),
            energy_per_hop: default_energy(),
            latency_per_hop: default_latency(),
            link_capacity: default_link_capacity(),
        }
    }

    /// Smallest square mesh holding `tiles` tiles.
    pub fn square_for(tiles: usize) -> Self {
        let mut side = 1;
        while side * side < tiles {
            side += 1;
        }
        Self::with_mesh(side, side)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let hw: HardwareConfig = serde_json::from_str(text).map_err(|e| Error::parse("hardware", e))?;
        hw.validate()?;
        Ok(hw)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(ValidationError::Hardware(m.to_string()).into());
        if self.mesh_width == 0 || self.mesh_height == 0 {
            return fail("mesh dimensions must be positive");
        }
        if self.crossbar_n < 2 {
            return fail("crossbar_n must be at least 2");
        }
        if !(self.energy_per_hop.is_finite() && self.energy_per_hop > 0.0) {
            return fail("energy_per_hop_pj must be positive");
        }
        if self.latency_per_hop == 0 {
            return fail("latency_per_hop must be positive");
        }
        if self.link_capacity == 0 {
            return fail("link_capacity must be positive");
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("hardware serializes");
        out.push('\n');
        out
    }

    pub fn tile_count(&self) -> usize {
        self.mesh_width * self.mesh_height
    }

    /// Row-major tile order.
    pub fn tile_at(&self, index: usize) -> Tile {
        Tile {
            x: index % self.mesh_width,
            y: index / self.mesh_width,
        }
    }

    pub fn tile_index(&self, tile: Tile) -> usize {
        tile.y * self.mesh_width + tile.x
    }

    pub fn contains(&self, tile: Tile) -> bool {
        tile.x < self.mesh_width && tile.y < self.mesh_height
    }

    pub fn unbounded_links(&self) -> bool {
        self.link_capacity == u32::MAX
    }
}

pub fn load_hardware(path: impl AsRef<Path>) -> Result<HardwareConfig> {
    HardwareConfig::from_json_str(&read_file(path)?)
}

/// Mesh coordinate; serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Tile {
    pub x: usize,
    pub y: usize,
}

impl Tile {
    pub fn manhattan(self, other: Tile) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl From<[usize; 2]> for Tile {
    fn from([x, y]: [usize; 2]) -> Self {
        Tile { x, y }
    }
}

impl From<Tile> for [usize; 2] {
    fn from(t: Tile) -> Self {
        [t.x, t.y]
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A synapse whose endpoints sit in different clusters, with the spikes it carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutSynapse {
    /// Index into the graph's synapse list.
    pub synapse: usize,
    pub src: usize,
    pub dst: usize,
    pub spikes: u64,
}

/// Disjoint, covering grouping of neurons into crossbar-sized clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
    assignment: Vec<usize>,
    cut_synapses: Vec<CutSynapse>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClusterDoc {
    id: usize,
    neurons: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PartitionDoc {
    clusters: Vec<ClusterDoc>,
    cut_spikes: u64,
}

impl Partition {
    /// Builds a partition from cluster member lists. Clusters must be non-empty,
    /// disjoint and cover every neuron of `graph`.
    pub fn from_clusters(graph: &SnnGraph, trace: &SpikeTrace, mut clusters: Vec<Vec<usize>>) -> Result<Self> {
        let n = graph.neuron_count();
        let mut assignment = vec![usize::MAX; n];
        for (c, members) in clusters.iter_mut().enumerate() {
            if members.is_empty() {
                return Err(ValidationError::Artifact(format!("cluster {c} is empty")).into());
            }
            members.sort_unstable();
            for &v in members.iter() {
                if v >= n {
                    return Err(ValidationError::Artifact(format!("cluster {c} names unknown neuron {v}")).into());
                }
                if assignment[v] != usize::MAX {
                    return Err(ValidationError::Artifact(format!("neuron {v} appears in more than one cluster")).into());
                }
                assignment[v] = c;
            }
        }
        if let Some(v) = assignment.iter().position(|&c| c == usize::MAX) {
            return Err(ValidationError::Artifact(format!("neuron {v} is not assigned to any cluster")).into());
        }
        let cut_synapses = graph
            .synapses()
            .iter()
            .enumerate()
            .filter(|(_, s)| assignment[s.src] != assignment[s.dst])
            .map(|(i, s)| CutSynapse {
                synapse: i,
                src: s.src,
                dst: s.dst,
                spikes: synapse_spike_count(trace, s),
            })
            .collect();
        Ok(Partition {
            clusters,
            assignment,
            cut_synapses,
        })
    }

    pub fn from_json_str(text: &str, graph: &SnnGraph, trace: &SpikeTrace) -> Result<Self> {
        let mut doc: PartitionDoc = serde_json::from_str(text).map_err(|e| Error::parse("partition", e))?;
        doc.clusters.sort_by_key(|c| c.id);
        if doc.clusters.iter().enumerate().any(|(i, c)| c.id != i) {
            return Err(ValidationError::Artifact("cluster ids must be 0..k".into()).into());
        }
        let partition = Self::from_clusters(graph, trace, doc.clusters.into_iter().map(|c| c.neurons).collect())?;
        if partition.cut_spikes() != doc.cut_spikes {
            return Err(ValidationError::Artifact(format!(
                "cut_spikes {} does not match recomputed {}",
                doc.cut_spikes,
                partition.cut_spikes()
            ))
            .into());
        }
        Ok(partition)
    }

    pub fn to_json_string(&self) -> String {
        let doc = PartitionDoc {
            clusters: self
                .clusters
                .iter()
                .enumerate()
                .map(|(id, neurons)| ClusterDoc {
                    id,
                    neurons: neurons.clone(),
                })
                .collect(),
            cut_spikes: self.cut_spikes(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("partition serializes");
        out.push('\n');
        out
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster_of(&self, neuron: usize) -> usize {
        self.assignment[neuron]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cut_synapses(&self) -> &[CutSynapse] {
        &self.cut_synapses
    }

    /// Total inter-cluster spikes.
    pub fn cut_spikes(&self) -> u64 {
        self.cut_synapses.iter().map(|c| c.spikes).sum()
    }
}

pub fn load_partition(path: impl AsRef<Path>, graph: &SnnGraph, trace: &SpikeTrace) -> Result<Partition> {
    Partition::from_json_str(&read_file(path)?, graph, trace)
}

/// Interconnect metrics of one placement.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FitnessReport {
    /// Picojoules spent on the interconnect.
    pub energy_e: f64,
    /// Mean absolute inter-spike-interval change, timesteps.
    pub isi_distortion_i: f64,
    /// Fraction of comparable spike pairs delivered out of order.
    pub spike_disorder_d: f64,
    pub avg_latency: f64,
    pub max_latency: u64,
    pub spike_hops: u64,
    pub fitness_f: f64,
}

/// Injective cluster → tile assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub assignment: Vec<Tile>,
    pub fitness: FitnessReport,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlacedClusterDoc {
    id: usize,
    tile: Tile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    neurons: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct MetricsDoc {
    E_pj: f64,
    I: f64,
    D: f64,
    F: f64,
    avg_latency: f64,
    max_latency: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlacementDoc {
    clusters: Vec<PlacedClusterDoc>,
    metrics: MetricsDoc,
    #[serde(default)]
    history: Vec<f64>,
}

impl Placement {
    pub fn validate(&self, hw: &HardwareConfig) -> Result<()> {
        let mut used = HashSet::new();
        for (c, &tile) in self.assignment.iter().enumerate() {
            if !hw.contains(tile) {
                return Err(ValidationError::Artifact(format!("cluster {c} placed outside the mesh at {tile}")).into());
            }
            if !used.insert(tile) {
                return Err(ValidationError::Artifact(format!("tile {tile} assigned twice")).into());
            }
        }
        Ok(())
    }

    /// JSON form. `partition`, when given, adds each cluster's neuron list.
    pub fn to_json_string(&self, partition: Option<&Partition>, history: &[f64]) -> String {
        let f = &self.fitness;
        let doc = PlacementDoc {
            clusters: self
                .assignment
                .iter()
                .enumerate()
                .map(|(id, &tile)| PlacedClusterDoc {
                    id,
                    tile,
                    neurons: partition.map(|p| p.clusters()[id].clone()),
                })
                .collect(),
            metrics: MetricsDoc {
                E_pj: f.energy_e,
                I: f.isi_distortion_i,
                D: f.spike_disorder_d,
                F: f.fitness_f,
                avg_latency: f.avg_latency,
                max_latency: f.max_latency,
            },
            history: history.to_vec(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("placement serializes");
        out.push('\n');
        out
    }

    /// Reads the tile assignment back; metrics are taken as written.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut doc: PlacementDoc = serde_json::from_str(text).map_err(|e| Error::parse("placement", e))?;
        doc.clusters.sort_by_key(|c| c.id);
        if doc.clusters.iter().enumerate().any(|(i, c)| c.id != i) {
            return Err(ValidationError::Artifact("placement cluster ids must be 0..k".into()).into());
        }
        let m = doc.metrics;
        Ok(Placement {
            assignment: doc.clusters.iter().map(|c| c.tile).collect(),
            fitness: FitnessReport {
                energy_e: m.E_pj,
                isi_distortion_i: m.I,
                spike_disorder_d: m.D,
                avg_latency: m.avg_latency,
                max_latency: m.max_latency,
                spike_hops: 0,
                fitness_f: m.F,
            },
        })
    }
}

pub fn load_placement(path: impl AsRef<Path>) -> Result<Placement> {
    Placement::from_json_str(&read_file(path)?)
}

/// Writes an original-id → unit-id-list map as JSON with string keys in numeric order.
pub(crate) fn origin_map_json(map: &[Vec<usize>]) -> String {
    let mut out = String::from("{");
    for (k, units) in map.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&format!("\n  \"{k}\": {}", serde_json::to_string(units).expect("ids serialize")));
    }
    out.push_str(if map.is_empty() { "}\n" } else { "\n}\n" });
    out
}

pub(crate) fn read_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = r#"{"neurons":[{"id":0,"kind":"input"},{"id":1,"kind":"input"},{"id":2,"kind":"output"}],
        "synapses":[{"src":0,"dst":2,"weight":0.5},{"src":1,"dst":2,"weight":-1.25}]}"#;

    #[test]
    fn parses_small_graph() {
        let g = SnnGraph::from_json_str(THREE).unwrap();
        assert_eq!(g.neuron_count(), 3);
        assert_eq!(g.synapse_count(), 2);
        assert_eq!(g.fan_in(2), 2);
        assert_eq!(g.inputs_of(2).collect::<Vec<_>>(), vec![(0, 0.5), (1, -1.25)]);
    }

    #[test]
    fn dangling_endpoint_names_the_id() {
        let text = r#"{"neurons":[{"id":0,"kind":"input"},{"id":1,"kind":"hidden"},{"id":2,"kind":"output"}],
            "synapses":[{"src":0,"dst":99,"weight":1.0}]}"#;
        let err = SnnGraph::from_json_str(text).unwrap_err();
        assert!(matches!(
            err,
            Error::Validation(ValidationError::DanglingEndpoint { missing: 99, .. })
        ));
        assert!(err.to_string().contains("99"));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn duplicate_synapse_rejected() {
        let text = r#"{"neurons":[{"id":0,"kind":"input"},{"id":1,"kind":"output"}],
            "synapses":[{"src":0,"dst":1,"weight":1.0},{"src":0,"dst":1,"weight":2.0}]}"#;
        assert!(matches!(
            SnnGraph::from_json_str(text),
            Err(Error::Validation(ValidationError::DuplicateSynapse { src: 0, dst: 1 }))
        ));
    }

    #[test]
    fn other_invariants_rejected() {
        let nodes = vec![
            Neuron { id: 0, kind: NeuronKind::Input },
            Neuron { id: 1, kind: NeuronKind::Hidden },
        ];
        let self_loop = SnnGraph::new(nodes.clone(), vec![Synapse { src: 1, dst: 1, weight: 1.0 }]);
        assert!(matches!(self_loop, Err(Error::Validation(ValidationError::SelfLoop(1)))));
        let nan = SnnGraph::new(nodes.clone(), vec![Synapse { src: 0, dst: 1, weight: f64::NAN }]);
        assert!(matches!(nan, Err(Error::Validation(ValidationError::NonFiniteWeight { .. }))));
        let into_input = SnnGraph::new(nodes, vec![Synapse { src: 1, dst: 0, weight: 1.0 }]);
        assert!(matches!(into_input, Err(Error::Validation(ValidationError::InputWithFanIn(0)))));
        let malformed = SnnGraph::from_json_str("{\"neurons\": [");
        assert!(matches!(malformed, Err(Error::Parse { .. })));
    }

    #[test]
    fn sparse_ids_are_densified() {
        let text = r#"{"neurons":[{"id":7,"kind":"output"},{"id":3,"kind":"input"}],
            "synapses":[{"src":3,"dst":7,"weight":1.0}]}"#;
        let g = SnnGraph::from_json_str(text).unwrap();
        assert_eq!(g.kind(0), NeuronKind::Input);
        assert_eq!(g.synapses()[0].src, 0);
        assert_eq!(g.synapses()[0].dst, 1);
        assert_eq!(g.file_id(1), 7);
    }

    #[test]
    fn trace_rows_group_by_neuron() {
        let g = SnnGraph::from_json_str(THREE).unwrap();
        let t = SpikeTrace::from_csv_reader("neuron_id,timestep\n0,9\n0,5\n1,2\n".as_bytes(), &g).unwrap();
        assert_eq!(t.train(0), &[5, 9]);
        assert_eq!(t.train(1), &[2]);
        assert!(t.train(2).is_empty());
        assert_eq!(t.horizon(), 10);
    }

    #[test]
    fn trace_duplicate_timestamp_rejected() {
        let g = SnnGraph::from_json_str(THREE).unwrap();
        let err = SpikeTrace::from_csv_reader("neuron_id,timestep\n0,5\n0,5\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(
            err,
            Error::Validation(ValidationError::DuplicateTimestamp { neuron: 0, timestep: 5 })
        ));
    }

    #[test]
    fn trace_unknown_neuron_rejected() {
        let g = SnnGraph::from_json_str(THREE).unwrap();
        let err = SpikeTrace::from_csv_reader("neuron_id,timestep\n42,1\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(err, Error::Validation(ValidationError::UnknownTraceNeuron(42))));
    }

    #[test]
    fn empty_trace_file() {
        let g = SnnGraph::from_json_str(THREE).unwrap();
        let t = SpikeTrace::from_csv_reader("".as_bytes(), &g).unwrap();
        assert_eq!(t.total_spikes(), 0);
        assert_eq!(t.horizon(), 0);
        let t = SpikeTrace::from_csv_reader("neuron_id,timestep\n".as_bytes(), &g).unwrap();
        assert_eq!(t.horizon(), 0);
    }

    #[test]
    fn spike_count_per_synapse() {
        let g = SnnGraph::from_json_str(THREE).unwrap();
        let t = SpikeTrace::from_trains(vec![vec![5, 9], vec![], vec![]]).unwrap();
        assert_eq!(synapse_spike_count(&t, &g.synapses()[0]), 2);
        assert_eq!(synapse_spike_count(&t, &g.synapses()[1]), 0);

        // fan-out: both outgoing synapses carry every source spike
        let nodes = (0..3)
            .map(|id| Neuron { id, kind: if id == 0 { NeuronKind::Input } else { NeuronKind::Output } })
            .collect();
        let fan = SnnGraph::new(
            nodes,
            vec![Synapse { src: 0, dst: 1, weight: 1.0 }, Synapse { src: 0, dst: 2, weight: 1.0 }],
        )
        .unwrap();
        let t = SpikeTrace::from_trains(vec![(0..100).collect(), vec![], vec![]]).unwrap();
        for s in fan.synapses() {
            assert_eq!(synapse_spike_count(&t, s), 100);
        }
    }

    #[test]
    fn hardware_defaults() {
        let hw = HardwareConfig::from_json_str(r#"{"mesh_width":4,"mesh_height":2}"#).unwrap();
        assert_eq!(hw.crossbar_n, 128);
        assert_eq!(hw.link_capacity, 1);
        assert_eq!(hw.latency_per_hop, 1);
        assert_eq!(hw.energy_per_hop, 1.0);
        assert_eq!(hw.tile_at(5), Tile { x: 1, y: 1 });
        assert!(HardwareConfig::from_json_str(r#"{"mesh_width":0,"mesh_height":2}"#).is_err());
        assert!(HardwareConfig::from_json_str(r#"{"mesh_width":1,"mesh_height":1,"crossbar_n":1}"#).is_err());
    }

    #[test]
    fn partition_round_trip_and_checks() {
        let g = SnnGraph::from_json_str(THREE).unwrap();
        let t = SpikeTrace::from_trains(vec![vec![1, 2], vec![3], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &t, vec![vec![0, 2], vec![1]]).unwrap();
        assert_eq!(p.cut_spikes(), 1);
        let back = Partition::from_json_str(&p.to_json_string(), &g, &t).unwrap();
        assert_eq!(back, p);
        assert!(Partition::from_clusters(&g, &t, vec![vec![0, 1]]).is_err());
        assert!(Partition::from_clusters(&g, &t, vec![vec![0, 1, 2], vec![1]]).is_err());
    }

    #[test]
    fn placement_checks() {
        let hw = HardwareConfig::with_mesh(2, 1);
        let mut p = Placement {
            assignment: vec![Tile { x: 0, y: 0 }, Tile { x: 1, y: 0 }],
            fitness: FitnessReport::default(),
        };
        p.validate(&hw).unwrap();
        let back = Placement::from_json_str(&p.to_json_string(None, &[1.0])).unwrap();
        assert_eq!(back.assignment, p.assignment);
        p.assignment[1] = Tile { x: 0, y: 0 };
        assert!(p.validate(&hw).is_err());
        p.assignment[1] = Tile { x: 2, y: 0 };
        assert!(p.validate(&hw).is_err());
    }

    #[test]
    fn origin_map_numeric_order() {
        let map: Vec<Vec<usize>> = (0..12).map(|i| vec![i]).collect();
        let text = origin_map_json(&map);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["10"], serde_json::json!([10]));
        assert!(text.find("\"2\"").unwrap() < text.find("\"10\"").unwrap());
    }
}
