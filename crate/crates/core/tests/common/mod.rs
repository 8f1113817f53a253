#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snnmap_core::model::{Neuron, NeuronKind, SnnGraph, SpikeTrace, Synapse};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph on `n` neurons. The first `inputs` neurons are inputs; every
/// other neuron draws up to `max_fan_in` distinct sources, from lower ids only
/// when `dag` is set.
pub fn random_graph(rng: &mut impl Rng, n: usize, inputs: usize, max_fan_in: usize, dag: bool) -> SnnGraph {
    let inputs = inputs.clamp(1, n);
    let neurons = (0..n)
        .map(|id| Neuron {
            id,
            kind: if id < inputs { NeuronKind::Input } else { NeuronKind::Hidden },
        })
        .collect();
    let mut synapses = Vec::new();
    for dst in inputs..n {
        let pool: Vec<usize> = if dag { (0..dst).collect() } else { (0..n).filter(|&s| s != dst).collect() };
        let fan_in = rng.gen_range(0..=max_fan_in.min(pool.len()));
        for i in rand::seq::index::sample(rng, pool.len(), fan_in) {
            synapses.push(Synapse {
                src: pool[i],
                dst,
                weight: rng.gen_range(-1.0..1.0),
            });
        }
    }
    SnnGraph::new(neurons, synapses).unwrap()
}

pub fn random_trace(rng: &mut impl Rng, n: usize, horizon: u64, rate: f64) -> SpikeTrace {
    let trains = (0..n)
        .map(|_| (0..horizon).filter(|_| rng.gen_bool(rate)).collect())
        .collect();
    SpikeTrace::from_trains(trains).unwrap()
}

/// Graph with every edge `src -> dst` given, all hidden except listed inputs.
pub fn graph_from_edges(n: usize, inputs: &[usize], edges: &[(usize, usize)]) -> SnnGraph {
    let neurons = (0..n)
        .map(|id| Neuron {
            id,
            kind: if inputs.contains(&id) { NeuronKind::Input } else { NeuronKind::Hidden },
        })
        .collect();
    let synapses = edges.iter().map(|&(src, dst)| Synapse { src, dst, weight: 0.5 }).collect();
    SnnGraph::new(neurons, synapses).unwrap()
}
