//! Spike-traffic-aware partitioning into crossbar-sized clusters.
//!
//! The cost of a partition is the number of spikes crossing cluster
//! boundaries: every synapse whose endpoints sit in different clusters carries
//! all spikes of its source. Clusters are bounded by a [`ClusterCapacity`]:
//! at most `max_neurons` members, and at most `max_inputs` distinct sources
//! feeding those members (a source occupies a crossbar row whether it lives in
//! the cluster or not).
//!
//! [`initial_partition`] opens clusters first-fit along a breadth-first walk
//! from the inputs; [`kl_refine`] then improves the cut with single relocations
//! and pairwise swaps in the style of Kernighan-Lin, never opening new clusters.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{InfeasibleError, Result};
use crate::model::{HardwareConfig, NeuronKind, Partition, SnnGraph, SpikeTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterCapacity {
    pub max_neurons: usize,
    pub max_inputs: usize,
}

impl ClusterCapacity {
    pub fn new(max_neurons: usize, max_inputs: usize) -> Self {
        assert!(max_neurons >= 1 && max_inputs >= 1, "cluster capacity must be positive");
        ClusterCapacity { max_neurons, max_inputs }
    }
}

impl From<&HardwareConfig> for ClusterCapacity {
    fn from(hw: &HardwareConfig) -> Self {
        ClusterCapacity::new(hw.crossbar_n, hw.crossbar_n)
    }
}

/// Per-neuron view of the spike traffic, shared by construction and refinement.
struct Traffic {
    /// Distinct pre-synaptic sources, ascending.
    sources: Vec<Vec<usize>>,
    /// Undirected neighbours with the spikes exchanged in both directions,
    /// sorted by neighbour id.
    neighbours: Vec<Vec<(usize, u64)>>,
}

impl Traffic {
    fn new(graph: &SnnGraph, trace: &SpikeTrace) -> Self {
        let n = graph.neuron_count();
        let mut neighbours: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for s in graph.synapses() {
            let spikes = trace.spike_count(s.src);
            neighbours[s.src].push((s.dst, spikes));
            neighbours[s.dst].push((s.src, spikes));
        }
        for list in &mut neighbours {
            list.sort_unstable_by_key(|e| e.0);
            list.dedup_by(|later, first| {
                if later.0 == first.0 {
                    first.1 += later.1;
                    true
                } else {
                    false
                }
            });
        }
        Traffic {
            sources: (0..n).map(|v| graph.inputs_of(v).map(|(s, _)| s).collect()).collect(),
            neighbours,
        }
    }

    fn weight_between(&self, u: usize, v: usize) -> u64 {
        let list = &self.neighbours[u];
        list.binary_search_by_key(&v, |e| e.0).map_or(0, |i| list[i].1)
    }
}

#[derive(Debug, Clone, Default)]
struct Slot {
    members: BTreeSet<usize>,
    /// Source → number of member synapses it feeds.
    sources: HashMap<usize, u32>,
}

impl Slot {
    fn add(&mut self, v: usize, sources: &[usize]) {
        self.members.insert(v);
        for &s in sources {
            *self.sources.entry(s).or_insert(0) += 1;
        }
    }

    fn remove(&mut self, v: usize, sources: &[usize]) {
        self.members.remove(&v);
        for s in sources {
            let count = self.sources.get_mut(s).expect("source tracked");
            *count -= 1;
            if *count == 0 {
                self.sources.remove(s);
            }
        }
    }

    fn new_sources(&self, sources: &[usize]) -> usize {
        sources.iter().filter(|s| !self.sources.contains_key(s)).count()
    }

    /// Distinct sources after swapping member `out` for `incoming`.
    fn sources_after_swap(&self, out: &[usize], incoming: &[usize]) -> usize {
        let mut distinct = self.sources.len();
        for s in out {
            if self.sources.get(s) == Some(&1) && incoming.binary_search(s).is_err() {
                distinct -= 1;
            }
        }
        for s in incoming {
            if !self.sources.contains_key(s) {
                distinct += 1;
            }
        }
        distinct
    }
}

/// Assignment of neurons to clusters with incremental capacity and cut
/// bookkeeping.
#[derive(Debug, Clone)]
pub struct PartitionState {
    assignment: Vec<usize>,
    slots: Vec<Slot>,
    cut: u64,
    capacity: ClusterCapacity,
}

impl PartitionState {
    /// Builds a state from an explicit assignment, checking capacity.
    pub fn from_assignment(
        graph: &SnnGraph,
        trace: &SpikeTrace,
        capacity: ClusterCapacity,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        assert_eq!(assignment.len(), graph.neuron_count(), "assignment must be total");
        let k = assignment.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut slots = vec![Slot::default(); k];
        for (v, &c) in assignment.iter().enumerate() {
            let sources: Vec<usize> = graph.inputs_of(v).map(|(s, _)| s).collect();
            slots[c].add(v, &sources);
        }
        for slot in &slots {
            if slot.members.len() > capacity.max_neurons || slot.sources.len() > capacity.max_inputs {
                let v = *slot.members.iter().next().expect("over-full slot has members");
                return Err(InfeasibleError::FanInExceeded {
                    neuron: v,
                    fan_in: slot.sources.len(),
                    limit: capacity.max_inputs,
                }
                .into());
            }
        }
        let cut = global_spike_count(&assignment, graph, trace);
        Ok(PartitionState {
            assignment,
            slots,
            cut,
            capacity,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Number of cluster slots, including any emptied by refinement.
    pub fn cluster_count(&self) -> usize {
        self.slots.len()
    }

    pub fn capacity(&self) -> ClusterCapacity {
        self.capacity
    }

    /// Inter-cluster spikes, maintained incrementally.
    pub fn cut_spikes(&self) -> u64 {
        self.cut
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.members.len()).collect()
    }

    pub fn cluster_inputs(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.sources.len()).collect()
    }

    pub fn is_within_capacity(&self) -> bool {
        self.slots
            .iter()
            .all(|s| s.members.len() <= self.capacity.max_neurons && s.sources.len() <= self.capacity.max_inputs)
    }

    /// Non-empty clusters as sorted member lists, in slot order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        self.slots
            .iter()
            .filter(|s| !s.members.is_empty())
            .map(|s| s.members.iter().copied().collect())
            .collect()
    }

    pub fn to_partition(&self, graph: &SnnGraph, trace: &SpikeTrace) -> Partition {
        Partition::from_clusters(graph, trace, self.clusters()).expect("state covers every neuron")
    }

    fn drop_empty_slots(&mut self) {
        if self.slots.iter().all(|s| !s.members.is_empty()) {
            return;
        }
        let mut relabel = vec![usize::MAX; self.slots.len()];
        let mut next = 0;
        for (i, slot) in self.slots.iter().enumerate() {
            if !slot.members.is_empty() {
                relabel[i] = next;
                next += 1;
            }
        }
        self.slots.retain(|s| !s.members.is_empty());
        for c in &mut self.assignment {
            *c = relabel[*c];
        }
    }
}

/// Opens clusters first-fit along a breadth-first walk that starts from each
/// input neuron in turn (then from any neuron not reached).
pub fn initial_partition(graph: &SnnGraph, trace: &SpikeTrace, capacity: ClusterCapacity) -> Result<PartitionState> {
    let n = graph.neuron_count();
    for v in 0..n {
        if graph.fan_in(v) > capacity.max_inputs {
            return Err(InfeasibleError::FanInExceeded {
                neuron: v,
                fan_in: graph.fan_in(v),
                limit: capacity.max_inputs,
            }
            .into());
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let roots = (0..n)
        .filter(|&v| graph.kind(v) == NeuronKind::Input)
        .chain(0..n);
    let mut queue = VecDeque::new();
    for root in roots {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &s in graph.outgoing(v) {
                let d = graph.synapses()[s].dst;
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
    }

    let traffic = Traffic::new(graph, trace);
    let mut slots: Vec<Slot> = Vec::new();
    // Slots with a free member position, in opening order.
    let mut open: Vec<usize> = Vec::new();
    let mut assignment = vec![0; n];
    for v in order {
        let sources = &traffic.sources[v];
        let fits = |slot: &Slot| {
            let spare = capacity.max_inputs - slot.sources.len();
            sources.len() <= spare || slot.new_sources(sources) <= spare
        };
        let c = match open.iter().position(|&c| fits(&slots[c])) {
            Some(pos) => open[pos],
            None => {
                slots.push(Slot::default());
                open.push(slots.len() - 1);
                slots.len() - 1
            }
        };
        slots[c].add(v, sources);
        assignment[v] = c;
        if slots[c].members.len() == capacity.max_neurons {
            open.retain(|&o| o != c);
        }
    }
    let cut = global_spike_count(&assignment, graph, trace);
    Ok(PartitionState {
        assignment,
        slots,
        cut,
        capacity,
    })
}

/// Total spikes over synapses whose endpoints lie in different clusters.
pub fn global_spike_count(assignment: &[usize], graph: &SnnGraph, trace: &SpikeTrace) -> u64 {
    graph
        .synapses()
        .iter()
        .filter(|s| assignment[s.src] != assignment[s.dst])
        .map(|s| trace.spike_count(s.src))
        .sum()
}

#[derive(Debug, Clone, Copy)]
struct Move {
    gain: u64,
    target: usize,
    partner: Option<usize>,
}

impl Move {
    /// Larger gain first, then lower target cluster, relocation before swap,
    /// then lower partner id.
    fn beats(&self, other: &Option<Move>) -> bool {
        let Some(o) = other else { return true };
        let key = |m: &Move| (std::cmp::Reverse(m.gain), m.target, m.partner.map_or(0, |p| p + 1));
        key(self) < key(o)
    }
}

/// Refines a partition by repeated sweeps over the neurons in ascending id.
/// Each neuron takes its best strictly improving relocation or swap (into a
/// cluster it exchanges spikes with) that keeps both clusters within
/// capacity. Sweeps repeat until one makes no move; emptied clusters are
/// dropped at the end.
pub fn kl_refine(mut state: PartitionState, graph: &SnnGraph, trace: &SpikeTrace) -> PartitionState {
    let traffic = Traffic::new(graph, trace);
    let n = graph.neuron_count();
    let cap = state.capacity;

    // conn[v] = spikes v exchanges with each cluster, as (cluster, spikes).
    let mut conn: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for (row, neighbours) in conn.iter_mut().zip(&traffic.neighbours) {
        for &(u, w) in neighbours {
            add_conn(row, state.assignment[u], w as i64);
        }
    }
    let conn_to = |conn: &[Vec<(usize, u64)>], v: usize, c: usize| -> u64 {
        conn[v].iter().find(|e| e.0 == c).map_or(0, |e| e.1)
    };

    loop {
        let mut moved = false;
        for u in 0..n {
            let a = state.assignment[u];
            let internal = conn_to(&conn, u, a);
            let mut best: Option<Move> = None;
            for &(b, toward) in &conn[u] {
                if b == a || toward <= internal {
                    continue;
                }
                let gain = toward - internal;
                let relocation = Move {
                    gain,
                    target: b,
                    partner: None,
                };
                if relocation.beats(&best)
                    && state.slots[b].members.len() < cap.max_neurons
                    && state.slots[b].sources.len() + state.slots[b].new_sources(&traffic.sources[u]) <= cap.max_inputs
                {
                    best = Some(relocation);
                }
                for &v in &state.slots[b].members {
                    let pull = gain as i64 + conn_to(&conn, v, a) as i64
                        - conn_to(&conn, v, b) as i64
                        - 2 * traffic.weight_between(u, v) as i64;
                    if pull <= 0 {
                        continue;
                    }
                    let swap = Move {
                        gain: pull as u64,
                        target: b,
                        partner: Some(v),
                    };
                    if swap.beats(&best)
                        && state.slots[a].sources_after_swap(&traffic.sources[u], &traffic.sources[v]) <= cap.max_inputs
                        && state.slots[b].sources_after_swap(&traffic.sources[v], &traffic.sources[u]) <= cap.max_inputs
                    {
                        best = Some(swap);
                    }
                }
            }
            if let Some(m) = best {
                relocate(&mut state, &mut conn, &traffic, u, m.target);
                if let Some(v) = m.partner {
                    relocate(&mut state, &mut conn, &traffic, v, a);
                }
                state.cut -= m.gain;
                moved = true;
            }
        }
        debug_assert_eq!(state.cut, global_spike_count(&state.assignment, graph, trace));
        debug_assert!(state.is_within_capacity());
        if !moved {
            break;
        }
    }
    state.drop_empty_slots();
    state
}

fn add_conn(list: &mut Vec<(usize, u64)>, cluster: usize, delta: i64) {
    match list.iter().position(|e| e.0 == cluster) {
        Some(i) => {
            let updated = list[i].1 as i64 + delta;
            if updated == 0 {
                list.swap_remove(i);
            } else {
                list[i].1 = updated as u64;
            }
        }
        None => {
            if delta != 0 {
                list.push((cluster, delta as u64));
            }
        }
    }
}

fn relocate(state: &mut PartitionState, conn: &mut [Vec<(usize, u64)>], traffic: &Traffic, v: usize, to: usize) {
    let from = state.assignment[v];
    let sources = &traffic.sources[v];
    state.slots[from].remove(v, sources);
    state.slots[to].add(v, sources);
    state.assignment[v] = to;
    for &(u, w) in &traffic.neighbours[v] {
        add_conn(&mut conn[u], from, -(w as i64));
        add_conn(&mut conn[u], to, w as i64);
    }
}

/// Largest instance [`exhaustive_partition`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 12;

/// Minimum-cut capacity-feasible partition into at most as many clusters as
/// [`initial_partition`] opens, by exhaustive enumeration. Test oracle.
pub fn exhaustive_partition(graph: &SnnGraph, trace: &SpikeTrace, capacity: ClusterCapacity) -> Result<PartitionState> {
    let n = graph.neuron_count();
    if n > EXHAUSTIVE_LIMIT {
        return Err(InfeasibleError::TooLarge {
            size: n,
            limit: EXHAUSTIVE_LIMIT,
        }
        .into());
    }
    let k = initial_partition(graph, trace, capacity)?.cluster_count();
    let traffic = Traffic::new(graph, trace);

    struct Search<'a> {
        traffic: &'a Traffic,
        capacity: ClusterCapacity,
        k: usize,
        labels: Vec<usize>,
        sizes: Vec<usize>,
        // source_counts[c][s] = member synapses fed by s in cluster c
        source_counts: Vec<Vec<u32>>,
        distinct: Vec<usize>,
        best: Option<(u64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn run(&mut self, v: usize, used: usize, cut: u64) {
            if let Some((best, _)) = &self.best {
                if cut >= *best {
                    return;
                }
            }
            if v == self.labels.len() {
                self.best = Some((cut, self.labels.clone()));
                return;
            }
            let limit = (used + 1).min(self.k);
            for c in 0..limit {
                if self.sizes[c] == self.capacity.max_neurons {
                    continue;
                }
                let sources = &self.traffic.sources[v];
                let added = sources.iter().filter(|&&s| self.source_counts[c][s] == 0).count();
                if self.distinct[c] + added > self.capacity.max_inputs {
                    continue;
                }
                let extra: u64 = self.traffic.neighbours[v]
                    .iter()
                    .filter(|&&(u, _)| u < v && self.labels[u] != c)
                    .map(|&(_, w)| w)
                    .sum();
                self.labels[v] = c;
                self.sizes[c] += 1;
                self.distinct[c] += added;
                for &s in sources {
                    self.source_counts[c][s] += 1;
                }
                self.run(v + 1, used.max(c + 1), cut + extra);
                for &s in sources {
                    self.source_counts[c][s] -= 1;
                }
                self.distinct[c] -= added;
                self.sizes[c] -= 1;
            }
        }
    }

    let mut search = Search {
        traffic: &traffic,
        capacity,
        k,
        labels: vec![0; n],
        sizes: vec![0; k],
        source_counts: vec![vec![0; n]; k],
        distinct: vec![0; k],
        best: None,
    };
    search.run(0, 0, 0);
    let (_, labels) = search.best.expect("the first-fit partition is feasible");
    let mut state = PartitionState::from_assignment(graph, trace, capacity, labels)?;
    state.drop_empty_slots();
    Ok(state)
}
