//! Seeded synthetic networks and spike trains.
//!
//! A network has one input layer followed by `layers` computing layers that
//! share `neurons` neurons as evenly as possible (the last is the output
//! layer). Each computing neuron draws its fan-in uniformly from
//! `[fanin_min, fanin_max]` and picks that many distinct sources, preferring
//! the previous layer and falling back to earlier layers when it is too small.
//! Weights are uniform in `[-1, 1)`. Every neuron gets a firing probability
//! per timestep uniform in `[rate_min, rate_max]` and fires independently at
//! each timestep below `horizon`.
//!
//! The graph uses ChaCha8 stream 0 of the seed, the trace stream 1.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ValidationError};
use crate::model::{Neuron, NeuronKind, SnnGraph, SpikeTrace, Synapse};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Computing (hidden and output) neurons.
    pub neurons: usize,
    /// Computing layers.
    pub layers: usize,
    /// Input neurons; defaults to `fanin_max`.
    pub inputs: Option<usize>,
    pub fanin_min: usize,
    pub fanin_max: usize,
    pub rate_min: f64,
    pub rate_max: f64,
    pub horizon: u64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            neurons: 100,
            layers: 2,
            inputs: None,
            fanin_min: 1,
            fanin_max: 256,
            rate_min: 0.0,
            rate_max: 0.1,
            horizon: 100,
            seed: 0,
        }
    }
}

impl GeneratorParams {
    pub fn input_count(&self) -> usize {
        self.inputs.unwrap_or(self.fanin_max)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(ValidationError::Parameter(m.to_string()).into());
        if self.neurons == 0 || self.layers == 0 {
            return fail("need at least one computing neuron and one layer");
        }
        if self.layers > self.neurons {
            return fail("more layers than computing neurons");
        }
        if self.input_count() == 0 {
            return fail("need at least one input neuron");
        }
        if self.fanin_min == 0 || self.fanin_min > self.fanin_max {
            return fail("fan-in range must satisfy 1 <= min <= max");
        }
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !(rate_ok(self.rate_min) && rate_ok(self.rate_max)) || self.rate_min > self.rate_max {
            return fail("firing rates must satisfy 0 <= min <= max <= 1");
        }
        Ok(())
    }
}

pub fn generate(params: &GeneratorParams) -> Result<(SnnGraph, SpikeTrace)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let inputs = params.input_count();
    let mut layers = Vec::with_capacity(params.layers + 1);
    layers.push(0..inputs);
    let mut next = inputs;
    for l in 0..params.layers {
        let size = params.neurons / params.layers + usize::from(l < params.neurons % params.layers);
        layers.push(next..next + size);
        next += size;
    }
    let total = next;

    let mut neurons = Vec::with_capacity(total);
    let mut synapses = Vec::new();
    neurons.extend((0..inputs).map(|id| Neuron { id, kind: NeuronKind::Input }));
    for l in 1..layers.len() {
        let kind = if l + 1 == layers.len() { NeuronKind::Output } else { NeuronKind::Hidden };
        // previous layer first, then earlier layers nearest first
        let pool: Vec<usize> = (0..l).rev().flat_map(|p| layers[p].clone()).collect();
        let previous = layers[l - 1].len();
        for id in layers[l].clone() {
            neurons.push(Neuron { id, kind });
            let fan_in = rng.gen_range(params.fanin_min..=params.fanin_max).min(pool.len());
            let sources: Vec<usize> = if fan_in <= previous {
                sample(&mut rng, previous, fan_in).into_iter().map(|i| pool[i]).collect()
            } else {
                let mut s: Vec<usize> = pool[..previous].to_vec();
                let rest = sample(&mut rng, pool.len() - previous, fan_in - previous);
                s.extend(rest.into_iter().map(|i| pool[previous + i]));
                s
            };
            for src in sources {
                synapses.push(Synapse {
                    src,
                    dst: id,
                    weight: rng.gen_range(-1.0..1.0),
                });
            }
        }
    }
    let graph = SnnGraph::new(neurons, synapses)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(1);
    let mut trains = Vec::with_capacity(total);
    for _ in 0..total {
        let rate = if params.rate_max > params.rate_min {
            rng.gen_range(params.rate_min..=params.rate_max)
        } else {
            params.rate_min
        };
        let train: Vec<u64> = if rate > 0.0 {
            (0..params.horizon).filter(|_| rng.gen_bool(rate)).collect()
        } else {
            Vec::new()
        };
        trains.push(train);
    }
    Ok((graph, SpikeTrace::from_trains(trains)?))
}
