//! Fan-in reduction.
//!
//! A neuron with `m > 2` inputs is unrolled into a chain of `m - 1` units, each
//! with at most two inputs: the first unit sums the first two weighted inputs,
//! every later unit adds one more weighted input to the forwarded partial sum
//! (chain link weight 1.0). The last unit of the chain takes over the original
//! neuron's outgoing synapses. Inputs are consumed in ascending source id.
//!
//! Also here: the pruning baseline and crossbar packing used to compare both.

use std::collections::HashSet;

use crate::error::{InfeasibleError, Result};
use crate::model::{origin_map_json, HardwareConfig, Neuron, NeuronKind, SnnGraph, SpikeTrace, Synapse};

/// One fan-in-of-two unit of an unrolled chain.
#[derive(Debug, Clone, PartialEq)]
pub struct FitUnit {
    pub id: usize,
    /// `(source id, weight)`; at most two entries.
    pub inputs: Vec<(usize, f64)>,
    /// Neuron this unit computes part of.
    pub origin: usize,
    /// 1-based index in the chain.
    pub position: usize,
}

/// Unrolls one neuron. Unit ids are `first_id..`, and chain links point at the
/// previous unit. Inputs are sorted by source id before unrolling.
pub fn unroll_neuron(origin: usize, inputs: &[(usize, f64)], first_id: usize) -> Vec<FitUnit> {
    let mut inputs = inputs.to_vec();
    inputs.sort_by_key(|&(src, _)| src);
    let mut chain: Vec<FitUnit> = Vec::with_capacity(inputs.len().saturating_sub(1).max(1));
    chain_links(&inputs, first_id, |id, input| {
        if chain.last().is_none_or(|u| u.id != id) {
            chain.push(FitUnit {
                id,
                inputs: Vec::with_capacity(2),
                origin,
                position: id - first_id + 1,
            });
        }
        chain.last_mut().expect("pushed above").inputs.push(input);
    });
    chain
}

/// Calls `link(unit, (source, weight))` for every input of the chain over
/// `inputs` (already in order), unit by unit.
fn chain_links(inputs: &[(usize, f64)], first_id: usize, mut link: impl FnMut(usize, (usize, f64))) {
    for &input in inputs.iter().take(2) {
        link(first_id, input);
    }
    for (k, &input) in inputs.iter().skip(2).enumerate() {
        let id = first_id + k + 1;
        link(id, (id - 1, 1.0));
        link(id, input);
    }
}

/// Result of [`unroll_graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedGraph {
    pub graph: SnnGraph,
    /// Original neuron id → its ids in `graph` (chain order; tail last).
    pub origin_map: Vec<Vec<usize>>,
    generated_units: usize,
}

impl DecomposedGraph {
    /// Number of units created for neurons with at least one input.
    pub fn generated_units(&self) -> usize {
        self.generated_units
    }

    pub fn tail(&self, original: usize) -> usize {
        *self.origin_map[original].last().expect("every neuron maps to at least one id")
    }

    /// Carries an original trace over to the decomposed graph: every unit of a
    /// chain fires the spike train of the neuron it serves.
    pub fn map_trace(&self, trace: &SpikeTrace) -> SpikeTrace {
        let mut trains = vec![Vec::new(); self.graph.neuron_count()];
        for (original, units) in self.origin_map.iter().enumerate() {
            for &u in units {
                trains[u] = trace.train(original).to_vec();
            }
        }
        SpikeTrace::from_trains(trains).expect("trains come from a valid trace")
    }

    pub fn origin_map_json(&self) -> String {
        origin_map_json(&self.origin_map)
    }
}

/// Unrolls every neuron so that no neuron has more than two inputs.
///
/// Input neurons and non-input neurons without inputs pass through unchanged
/// (the latter with a warning). Ids are assigned in ascending original id, so
/// a graph that is already fan-in-of-two keeps its ids.
pub fn unroll_graph(graph: &SnnGraph) -> DecomposedGraph {
    let n = graph.neuron_count();
    let mut origin_map = Vec::with_capacity(n);
    let mut next = 0;
    for v in 0..n {
        let m = graph.fan_in(v);
        let len = if m <= 2 { 1 } else { m - 1 };
        origin_map.push((next..next + len).collect::<Vec<_>>());
        next += len;
    }
    let tail = |v: usize| *origin_map[v].last().unwrap();

    let mut neurons = Vec::with_capacity(next);
    let mut synapses = Vec::with_capacity(2 * next);
    let mut generated_units = 0;
    for (v, units) in origin_map.iter().enumerate() {
        let kind = graph.kind(v);
        let first = units[0];
        if graph.fan_in(v) == 0 {
            if kind != NeuronKind::Input {
                log::warn!("neuron {} has no inputs; passing it through unchanged", graph.file_id(v));
            }
            neurons.push(Neuron { id: first, kind });
            continue;
        }
        // Tails are allocated in ascending original id, so relabelling keeps
        // the ascending-source order of the chain.
        let inputs: Vec<(usize, f64)> = graph.inputs_of(v).map(|(src, w)| (tail(src), w)).collect();
        generated_units += units.len();
        for &u in &units[..units.len() - 1] {
            neurons.push(Neuron { id: u, kind: NeuronKind::Hidden });
        }
        neurons.push(Neuron { id: *units.last().expect("non-empty"), kind });
        chain_links(&inputs, first, |dst, (src, weight)| synapses.push(Synapse { src, dst, weight }));
    }
    let graph = SnnGraph::new(neurons, synapses).expect("unrolling preserves graph invariants");
    DecomposedGraph {
        graph,
        origin_map,
        generated_units,
    }
}

/// Units created by unrolling: `m - 1` per neuron with `m >= 2` inputs and one
/// per neuron with a single input.
pub fn fit_unit_count(graph: &SnnGraph) -> usize {
    (0..graph.neuron_count())
        .map(|v| match graph.fan_in(v) {
            0 => 0,
            1 => 1,
            m => m - 1,
        })
        .sum()
}

/// Pruning baseline output.
#[derive(Debug, Clone, PartialEq)]
pub struct Pruned {
    pub graph: SnnGraph,
    pub dropped: usize,
}

/// Keeps, for every neuron above `n` inputs, the `n` inputs of largest
/// absolute weight (ties to the lower source id).
pub fn prune_to_fanin(graph: &SnnGraph, n: usize) -> Pruned {
    assert!(n >= 1, "fan-in limit must be positive");
    let mut keep = Vec::with_capacity(graph.synapse_count());
    let mut dropped = 0;
    for v in 0..graph.neuron_count() {
        let mut inputs: Vec<usize> = graph.incoming(v).to_vec();
        if inputs.len() > n {
            let syn = graph.synapses();
            inputs.sort_by(|&a, &b| {
                syn[b]
                    .weight
                    .abs()
                    .total_cmp(&syn[a].weight.abs())
                    .then(syn[a].src.cmp(&syn[b].src))
            });
            dropped += inputs.len() - n;
            inputs.truncate(n);
        }
        keep.extend(inputs.into_iter().map(|i| graph.synapses()[i]));
    }
    let graph = SnnGraph::new(graph.neurons().to_vec(), keep).expect("pruning preserves graph invariants");
    Pruned { graph, dropped }
}

/// Crossbar packing summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossbarUsage {
    pub crossbars: usize,
    /// Programmed crosspoints (one per synapse into a packed neuron).
    pub crosspoints: usize,
    /// `crosspoints / (crossbars * n^2)`; 0 with no crossbars.
    pub utilization: f64,
}

/// First-fit packing of every non-input neuron into `n x n` crossbars, where a
/// crossbar holds at most `n` neurons fed by at most `n` distinct sources.
pub fn crossbar_requirement(graph: &SnnGraph, hw: &HardwareConfig) -> Result<CrossbarUsage> {
    let n = hw.crossbar_n;
    struct Crossbar {
        rows: HashSet<usize>,
        columns: usize,
    }
    let mut bars: Vec<Crossbar> = Vec::new();
    // Bars with a free column, in creation order.
    let mut open: Vec<usize> = Vec::new();
    let mut crosspoints = 0;
    for v in 0..graph.neuron_count() {
        if graph.kind(v) == NeuronKind::Input {
            continue;
        }
        let fan_in = graph.fan_in(v);
        if fan_in > n {
            return Err(InfeasibleError::FanInExceeded {
                neuron: graph.file_id(v) as usize,
                fan_in,
                limit: n,
            }
            .into());
        }
        crosspoints += fan_in;
        let sources: Vec<usize> = graph.inputs_of(v).map(|(s, _)| s).collect();
        let slot = open.iter().position(|&b| {
            let bar = &bars[b];
            let new_rows = sources.iter().filter(|s| !bar.rows.contains(s)).count();
            bar.rows.len() + new_rows <= n
        });
        let b = match slot {
            Some(pos) => open[pos],
            None => {
                bars.push(Crossbar {
                    rows: HashSet::new(),
                    columns: 0,
                });
                open.push(bars.len() - 1);
                bars.len() - 1
            }
        };
        let bar = &mut bars[b];
        bar.rows.extend(sources);
        bar.columns += 1;
        if bar.columns == n {
            open.retain(|&o| o != b);
        }
    }
    let crossbars = bars.len();
    let utilization = if crossbars == 0 {
        0.0
    } else {
        crosspoints as f64 / (crossbars * n * n) as f64
    };
    Ok(CrossbarUsage {
        crossbars,
        crosspoints,
        utilization,
    })
}

/// Propagates firing rates through a DAG: input neurons take `input_rates[v]`,
/// every other neuron `f(sum of weight * source rate)` summed in ascending
/// source order. Returns `None` if the graph has a cycle.
pub fn propagate_rates(graph: &SnnGraph, input_rates: &[f64], f: impl Fn(f64) -> f64) -> Option<Vec<f64>> {
    let n = graph.neuron_count();
    let mut pending: Vec<usize> = (0..n).map(|v| graph.fan_in(v)).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&v| pending[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for &s in graph.outgoing(v) {
            let d = graph.synapses()[s].dst;
            pending[d] -= 1;
            if pending[d] == 0 {
                ready.push(d);
            }
        }
    }
    if order.len() != n {
        return None;
    }
    let mut rates = vec![0.0; n];
    for v in order {
        rates[v] = if graph.kind(v) == NeuronKind::Input {
            input_rates.get(v).copied().unwrap_or(0.0)
        } else {
            f(graph.inputs_of(v).map(|(src, w)| w * rates[src]).sum())
        };
    }
    Some(rates)
}
