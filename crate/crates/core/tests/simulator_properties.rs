mod common;

use std::collections::HashMap;

use common::{random_graph, random_trace, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use snnmap_core::cost::{isi_distortion, simulate, spike_disorder, xy_path, TrafficModel};
use snnmap_core::model::{HardwareConfig, Partition, SpikeTrace, Tile};

struct Instance {
    trace: SpikeTrace,
    partition: Partition,
    hw: HardwareConfig,
    tiles: Vec<Tile>,
}

fn instance(seed: u64, n: usize, k: usize, capacity: u32, latency: u64) -> Instance {
    let mut r = rng(seed);
    let graph = random_graph(&mut r, n, 3, 4, false);
    let trace = random_trace(&mut r, n, 25, 0.3);
    let k = k.clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut clusters = vec![Vec::new(); k];
    for (i, &v) in order.iter().enumerate() {
        clusters[i % k].push(v);
    }
    let partition = Partition::from_clusters(&graph, &trace, clusters).unwrap();
    let (w, h) = (r.gen_range(1..5usize), r.gen_range(1..5usize));
    let mut hw = HardwareConfig::with_mesh(w.max(k.div_ceil(h)), h);
    hw.link_capacity = capacity;
    hw.latency_per_hop = latency;
    let mut slots: Vec<usize> = (0..hw.tile_count()).collect();
    slots.shuffle(&mut r);
    let tiles = slots[..k].iter().map(|&i| hw.tile_at(i)).collect();
    Instance { trace, partition, hw, tiles }
}

/// Straightforward hop-by-hop replay: repeatedly serve the pending hop with
/// the smallest `(ready, src, dst, departure)`; each link hands out the
/// earliest timestep with spare capacity that is not before its last grant.
fn reference_arrivals(inst: &Instance) -> HashMap<(usize, u64), u64> {
    struct Pending {
        key: (u64, usize, usize, u64),
        synapse: usize,
        path: Vec<Tile>,
        hop: usize,
    }
    let mut pending = Vec::new();
    for cut in inst.partition.cut_synapses() {
        let path = xy_path(inst.tiles[inst.partition.cluster_of(cut.src)], inst.tiles[inst.partition.cluster_of(cut.dst)]);
        for &t in inst.trace.train(cut.src) {
            pending.push(Pending { key: (t, cut.src, cut.dst, t), synapse: cut.synapse, path: path.clone(), hop: 0 });
        }
    }
    let mut last_grant: HashMap<(Tile, Tile), u64> = HashMap::new();
    let mut used: HashMap<((Tile, Tile), u64), u32> = HashMap::new();
    let mut done = HashMap::new();
    while !pending.is_empty() {
        let (at, _) = pending.iter().enumerate().min_by_key(|(_, p)| p.key).unwrap();
        let p = &mut pending[at];
        let link = (p.path[p.hop], p.path[p.hop + 1]);
        let mut slot = p.key.0.max(*last_grant.get(&link).unwrap_or(&0));
        while *used.get(&(link, slot)).unwrap_or(&0) >= inst.hw.link_capacity {
            slot += 1;
        }
        *used.entry((link, slot)).or_default() += 1;
        last_grant.insert(link, slot);
        p.hop += 1;
        p.key.0 = slot + inst.hw.latency_per_hop;
        if p.hop + 1 == p.path.len() {
            let p = pending.swap_remove(at);
            done.insert((p.synapse, p.key.3), p.key.0);
        }
    }
    done
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_reference_replay(seed in any::<u64>(), n in 2usize..24, k in 2usize..7, capacity in 1u32..4, latency in 1u64..3) {
        let inst = instance(seed, n, k, capacity, latency);
        let report = simulate(&inst.partition, &inst.tiles, &inst.trace, &inst.hw);
        let expected = reference_arrivals(&inst);
        prop_assert_eq!(report.spikes.len(), expected.len());
        for s in &report.spikes {
            prop_assert_eq!(Some(&s.arrival), expected.get(&(s.synapse, s.departure)));
        }
        prop_assert_eq!(report.metrics.isi_distortion_i, isi_distortion(&report.spikes));
        prop_assert_eq!(report.metrics.spike_disorder_d, spike_disorder(&report.spikes));
    }

    #[test]
    fn every_global_spike_is_delivered(seed in any::<u64>(), n in 1usize..40, k in 1usize..9, capacity in 1u32..3) {
        let inst = instance(seed, n, k, capacity, 1);
        let report = simulate(&inst.partition, &inst.tiles, &inst.trace, &inst.hw);
        prop_assert_eq!(report.delivered, inst.partition.cut_spikes());
        let per_link: u64 = report.link_loads.iter().map(|l| l.spikes).sum();
        prop_assert_eq!(per_link, report.metrics.spike_hops);
        for s in &report.spikes {
            prop_assert!(s.arrival >= s.departure + s.hops() as u64);
        }
    }

    #[test]
    fn unbounded_links_follow_closed_form(seed in any::<u64>(), n in 1usize..40, k in 1usize..9, latency in 1u64..4, pj in 0.1f64..5.0) {
        let mut inst = instance(seed, n, k, u32::MAX, latency);
        inst.hw.energy_per_hop = pj;
        let report = simulate(&inst.partition, &inst.tiles, &inst.trace, &inst.hw);
        let mut hops = 0u64;
        for cut in inst.partition.cut_synapses() {
            let d = inst.tiles[inst.partition.cluster_of(cut.src)].manhattan(inst.tiles[inst.partition.cluster_of(cut.dst)]);
            hops += cut.spikes * d as u64;
        }
        prop_assert_eq!(report.metrics.spike_hops, hops);
        prop_assert_eq!(report.metrics.energy_e, hops as f64 * pj);
        for s in &report.spikes {
            prop_assert_eq!(s.arrival, s.departure + s.hops() as u64 * latency);
        }
        // constant delay per synapse leaves every interval intact
        prop_assert_eq!(report.metrics.isi_distortion_i, 0.0);
    }

    #[test]
    fn evaluation_matches_full_simulation(seed in any::<u64>(), n in 2usize..30, k in 2usize..6, capacity in 1u32..3) {
        let inst = instance(seed, n, k, capacity, 1);
        let model = TrafficModel::new(&inst.partition, &inst.trace, &inst.hw);
        let quick = model.evaluate(&inst.tiles);
        let full = simulate(&inst.partition, &inst.tiles, &inst.trace, &inst.hw);
        prop_assert_eq!(quick, full.metrics);
    }
}

#[test]
fn farther_apart_costs_more() {
    // two clusters exchanging traffic, moved apart along a row
    let g = common::graph_from_edges(4, &[0], &[(0, 1), (1, 2), (2, 3), (3, 1)]);
    let t = SpikeTrace::from_trains(vec![vec![0, 2, 5, 9], vec![1, 4, 6], vec![3, 7], vec![0, 8]]).unwrap();
    let p = Partition::from_clusters(&g, &t, vec![vec![0, 1], vec![2, 3]]).unwrap();
    let hw = HardwareConfig::with_mesh(6, 1);
    let mut previous: Option<(f64, f64)> = None;
    for d in 1..6 {
        let r = simulate(&p, &[Tile { x: 0, y: 0 }, Tile { x: d, y: 0 }], &t, &hw).metrics;
        if let Some((e, lat)) = previous {
            assert!(r.energy_e > e);
            assert!(r.avg_latency > lat);
        }
        previous = Some((r.energy_e, r.avg_latency));
    }
}
