//! Discrete-time simulation of global spike traffic on the tile mesh.
//!
//! Every spike on a cut synapse leaves its source tile at the source's spike
//! timestep and follows the XY route (x first, then y) to the destination
//! tile. Each directed link forwards at most `link_capacity` spikes per
//! timestep and each traversal takes `latency_per_hop` timesteps. Spikes
//! waiting for a link are served in `(ready time, source, destination,
//! departure)` order. Intra-cluster spikes never touch the interconnect.
//!
//! From the delivered spikes the simulator derives:
//! - energy `E = spike_hops * energy_per_hop`;
//! - ISI distortion `I`: mean `|arrival gap - departure gap|` over consecutive
//!   spike pairs of each cut synapse;
//! - spike disorder `D`: among pairs of spikes from different sources reaching
//!   the same neuron with distinct departures, the fraction delivered in the
//!   opposite order;
//! - average and maximum latency (`arrival - departure`).

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::model::{FitnessReport, HardwareConfig, Partition, SpikeTrace, Tile};

/// One spike delivered over the interconnect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoutedSpike {
    /// Index of the synapse in the graph.
    pub synapse: usize,
    pub src: usize,
    pub dst: usize,
    pub departure: u64,
    pub arrival: u64,
    /// Tiles visited, source and destination included.
    pub path: Vec<Tile>,
}

impl RoutedSpike {
    pub fn hops(&self) -> usize {
        self.path.len() - 1
    }
}

/// Spikes carried by one directed link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinkLoad {
    pub from: Tile,
    pub to: Tile,
    pub spikes: u64,
}

/// Full result of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrafficReport {
    #[serde(flatten)]
    pub metrics: FitnessReport,
    pub delivered: u64,
    pub link_loads: Vec<LinkLoad>,
    #[serde(skip)]
    pub spikes: Vec<RoutedSpike>,
}

impl TrafficReport {
    /// Per-spike dump: `synapse_src,synapse_dst,departure,arrival,hops`.
    pub fn arrivals_csv(&self) -> String {
        let mut out = String::from("synapse_src,synapse_dst,departure,arrival,hops\n");
        for s in &self.spikes {
            out.push_str(&format!("{},{},{},{},{}\n", s.src, s.dst, s.departure, s.arrival, s.hops()));
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct GlobalSpike {
    synapse: usize,
    src: usize,
    dst: usize,
    src_cluster: usize,
    dst_cluster: usize,
    departure: u64,
}

/// Placement-independent part of a simulation: the global spikes of a
/// partition, grouped for the metrics. Build once, evaluate many placements.
#[derive(Debug, Clone)]
pub struct TrafficModel {
    hw: HardwareConfig,
    clusters: usize,
    /// Sorted by `(src, dst, departure)`, which is also the order in which
    /// spikes ready at the same time claim a link.
    spikes: Vec<GlobalSpike>,
    synapse_groups: Vec<std::ops::Range<usize>>,
    /// Index into `synapse_groups` per spike.
    group_of: Vec<u32>,
    /// Spike indices per destination neuron with at least two sources,
    /// departures ascending.
    destination_groups: Vec<Vec<usize>>,
    comparable_pairs: u64,
}

impl TrafficModel {
    pub fn new(partition: &Partition, trace: &SpikeTrace, hw: &HardwareConfig) -> Self {
        let mut spikes = Vec::new();
        let mut synapse_groups = Vec::new();
        for cut in partition.cut_synapses() {
            let start = spikes.len();
            for &t in trace.train(cut.src) {
                spikes.push(GlobalSpike {
                    synapse: cut.synapse,
                    src: cut.src,
                    dst: cut.dst,
                    src_cluster: partition.cluster_of(cut.src),
                    dst_cluster: partition.cluster_of(cut.dst),
                    departure: t,
                });
            }
            if spikes.len() > start {
                synapse_groups.push(start..spikes.len());
            }
        }

        let mut by_destination: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, s) in spikes.iter().enumerate() {
            by_destination.entry(s.dst).or_default().push(i);
        }
        let mut destination_groups = Vec::new();
        let mut comparable_pairs = 0;
        for (_, group) in by_destination {
            let mut per_source: HashMap<usize, u64> = HashMap::new();
            let mut per_departure: HashMap<u64, u64> = HashMap::new();
            for &i in &group {
                *per_source.entry(spikes[i].src).or_default() += 1;
                *per_departure.entry(spikes[i].departure).or_default() += 1;
            }
            if per_source.len() < 2 {
                continue;
            }
            let pairs = |c: u64| c * c.saturating_sub(1) / 2;
            let total = pairs(group.len() as u64);
            let tied: u64 = per_departure.values().map(|&c| pairs(c)).sum();
            let same_source: u64 = per_source.values().map(|&c| pairs(c)).sum();
            comparable_pairs += total - tied - same_source;
            let mut group = group;
            group.sort_by_key(|&i| spikes[i].departure);
            destination_groups.push(group);
        }

        debug_assert!(spikes.windows(2).all(|w| (w[0].src, w[0].dst, w[0].departure) < (w[1].src, w[1].dst, w[1].departure)));
        assert!(u32::try_from(spikes.len()).is_ok(), "fewer than 2^32 global spikes");
        let mut group_of = vec![0u32; spikes.len()];
        for (g, range) in synapse_groups.iter().enumerate() {
            group_of[range.clone()].fill(g as u32);
        }

        TrafficModel {
            hw: hw.clone(),
            clusters: partition.cluster_count(),
            spikes,
            synapse_groups,
            group_of,
            destination_groups,
            comparable_pairs,
        }
    }

    pub fn hardware(&self) -> &HardwareConfig {
        &self.hw
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters
    }

    /// Number of spikes that will cross the interconnect.
    pub fn global_spikes(&self) -> usize {
        self.spikes.len()
    }

    /// Metrics for one placement (`tiles[c]` hosts cluster `c`). The returned
    /// `fitness_f` is the plain product `E * I * D`.
    pub fn evaluate(&self, tiles: &[Tile]) -> FitnessReport {
        let arrivals = self.route(tiles, None);
        self.metrics(tiles, &arrivals)
    }

    /// Full simulation with link loads and per-spike routes.
    pub fn simulate(&self, tiles: &[Tile]) -> TrafficReport {
        let mut loads = vec![0u64; self.hw.tile_count() * 4];
        let arrivals = self.route(tiles, Some(&mut loads));
        let metrics = self.metrics(tiles, &arrivals);
        let link_loads = loads
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(link, &spikes)| {
                let from = self.hw.tile_at(link / 4);
                LinkLoad {
                    from,
                    to: step(from, link % 4),
                    spikes,
                }
            })
            .collect();
        let spikes = self
            .spikes
            .iter()
            .zip(&arrivals)
            .map(|(s, &arrival)| RoutedSpike {
                synapse: s.synapse,
                src: s.src,
                dst: s.dst,
                departure: s.departure,
                arrival,
                path: xy_path(tiles[s.src_cluster], tiles[s.dst_cluster]),
            })
            .collect();
        TrafficReport {
            metrics,
            delivered: arrivals.len() as u64,
            link_loads,
            spikes,
        }
    }

    /// Arrival time of every spike, in `self.spikes` order.
    fn route(&self, tiles: &[Tile], mut loads: Option<&mut Vec<u64>>) -> Vec<u64> {
        assert_eq!(tiles.len(), self.clusters, "one tile per cluster");
        let latency = self.hw.latency_per_hop;
        let mut arrivals = vec![0u64; self.spikes.len()];

        if self.hw.unbounded_links() {
            for (i, s) in self.spikes.iter().enumerate() {
                let (from, to) = (tiles[s.src_cluster], tiles[s.dst_cluster]);
                arrivals[i] = s.departure + from.manhattan(to) as u64 * latency;
                if let Some(loads) = loads.as_deref_mut() {
                    walk_links(from, to, &self.hw, |link| loads[link] += 1);
                }
            }
            return arrivals;
        }

        // Links along each synapse's route, flattened.
        let mut route_start = Vec::with_capacity(self.synapse_groups.len() + 1);
        let mut route_links: Vec<u32> = Vec::new();
        for range in &self.synapse_groups {
            let s = &self.spikes[range.start];
            route_start.push(route_links.len());
            walk_links(tiles[s.src_cluster], tiles[s.dst_cluster], &self.hw, |link| route_links.push(link as u32));
        }
        route_start.push(route_links.len());

        // Every hop takes at least one timestep, so spikes are served one
        // timestep at a time. Spikes ready at a timestep form a linked list
        // from `head[t]`.
        const NONE: u32 = u32::MAX;
        let capacity = self.hw.link_capacity;
        // (time of the slot being filled, spikes already in it) per link
        let mut links = vec![(0u64, 0u32); self.hw.tile_count() * 4];
        let mut hop = vec![0u32; self.spikes.len()];
        let mut head: Vec<u32> = Vec::new();
        let mut next_ready = vec![NONE; self.spikes.len()];
        let schedule = |head: &mut Vec<u32>, next_ready: &mut [u32], time: u64, spike: u32| {
            let t = time as usize;
            if t >= head.len() {
                head.resize(t + 1, NONE);
            }
            next_ready[spike as usize] = head[t];
            head[t] = spike;
        };
        for i in (0..self.spikes.len()).rev() {
            schedule(&mut head, &mut next_ready, self.spikes[i].departure, i as u32);
        }
        // the ready list of the current timestep as a bitset over spike
        // indices, so a word scan visits spikes in arbitration order
        let mut ready = vec![0u64; self.spikes.len().div_ceil(64)];
        let mut now = 0;
        while now < head.len() {
            let (mut lo, mut hi) = (usize::MAX, 0);
            let mut cursor = head[now];
            while cursor != NONE {
                let w = cursor as usize / 64;
                ready[w] |= 1 << (cursor % 64);
                lo = lo.min(w);
                hi = hi.max(w);
                cursor = next_ready[cursor as usize];
            }
            for w in lo..=hi.min(ready.len().saturating_sub(1)) {
                let mut bits = std::mem::take(&mut ready[w]);
                while bits != 0 {
                    let i = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let g = self.group_of[i] as usize;
                    let route = &route_links[route_start[g]..route_start[g + 1]];
                    let link = route[hop[i] as usize] as usize;
                    let state = &mut links[link];
                    if now as u64 > state.0 {
                        *state = (now as u64, 0);
                    }
                    if state.1 == capacity {
                        *state = (state.0 + 1, 0);
                    }
                    state.1 += 1;
                    let next = state.0 + latency;
                    if let Some(loads) = loads.as_deref_mut() {
                        loads[link] += 1;
                    }
                    hop[i] += 1;
                    if hop[i] as usize == route.len() {
                        arrivals[i] = next;
                    } else {
                        schedule(&mut head, &mut next_ready, next, i as u32);
                    }
                }
            }
            now += 1;
        }
        arrivals
    }

    fn metrics(&self, tiles: &[Tile], arrivals: &[u64]) -> FitnessReport {
        let spike_hops: u64 = self
            .spikes
            .iter()
            .map(|s| tiles[s.src_cluster].manhattan(tiles[s.dst_cluster]) as u64)
            .sum();

        let mut isi_sum = 0u64;
        let mut isi_pairs = 0u64;
        for group in &self.synapse_groups {
            for i in group.start + 1..group.end {
                let sent = self.spikes[i].departure - self.spikes[i - 1].departure;
                let received = arrivals[i] - arrivals[i - 1];
                isi_sum += sent.abs_diff(received);
                isi_pairs += 1;
            }
        }

        let mut inversions = 0u64;
        let mut buffer = Vec::new();
        let mut scratch = Vec::new();
        for group in &self.destination_groups {
            buffer.clear();
            buffer.extend(group.iter().map(|&i| arrivals[i]));
            // equal departures never count, so order them by arrival
            let mut start = 0;
            while start < group.len() {
                let departure = self.spikes[group[start]].departure;
                let end = start + group[start..].iter().take_while(|&&i| self.spikes[i].departure == departure).count();
                buffer[start..end].sort_unstable();
                start = end;
            }
            scratch.resize(buffer.len(), 0);
            inversions += merge_count(&mut buffer, &mut scratch);
        }

        let (latency_sum, max_latency) = self
            .spikes
            .iter()
            .zip(arrivals)
            .fold((0u64, 0u64), |(sum, max), (s, &a)| {
                let l = a - s.departure;
                (sum + l, max.max(l))
            });

        let energy_e = spike_hops as f64 * self.hw.energy_per_hop;
        let isi_distortion_i = ratio(isi_sum, isi_pairs);
        let spike_disorder_d = ratio(inversions, self.comparable_pairs);
        FitnessReport {
            energy_e,
            isi_distortion_i,
            spike_disorder_d,
            avg_latency: ratio(latency_sum, arrivals.len() as u64),
            max_latency,
            spike_hops,
            fitness_f: energy_e * isi_distortion_i * spike_disorder_d,
        }
    }
}

/// Simulates one placement of `partition`.
pub fn simulate(partition: &Partition, tiles: &[Tile], trace: &SpikeTrace, hw: &HardwareConfig) -> TrafficReport {
    TrafficModel::new(partition, trace, hw).simulate(tiles)
}

/// Interconnect energy in picojoules.
pub fn energy(spike_hops: u64, hw: &HardwareConfig) -> f64 {
    spike_hops as f64 * hw.energy_per_hop
}

/// Mean absolute change of inter-spike intervals per synapse, over all
/// consecutive spike pairs of synapses with at least two delivered spikes.
pub fn isi_distortion(spikes: &[RoutedSpike]) -> f64 {
    let mut by_synapse: BTreeMap<usize, Vec<(u64, u64)>> = BTreeMap::new();
    for s in spikes {
        by_synapse.entry(s.synapse).or_default().push((s.departure, s.arrival));
    }
    let mut sum = 0;
    let mut pairs = 0;
    for mut train in by_synapse.into_values() {
        train.sort_unstable();
        for w in train.windows(2) {
            sum += (w[1].0 - w[0].0).abs_diff(w[1].1 - w[0].1);
            pairs += 1;
        }
    }
    ratio(sum, pairs)
}

/// Fraction of cross-source spike pairs at a common destination whose arrival
/// order inverts their (distinct) departure order.
pub fn spike_disorder(spikes: &[RoutedSpike]) -> f64 {
    let mut by_destination: BTreeMap<usize, Vec<&RoutedSpike>> = BTreeMap::new();
    for s in spikes {
        by_destination.entry(s.dst).or_default().push(s);
    }
    let mut inversions = 0u64;
    let mut comparable = 0u64;
    for group in by_destination.values() {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                if a.src == b.src || a.departure == b.departure {
                    continue;
                }
                comparable += 1;
                let (first, second) = if a.departure < b.departure { (a, b) } else { (b, a) };
                if first.arrival > second.arrival {
                    inversions += 1;
                }
            }
        }
    }
    ratio(inversions, comparable)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Pairs `i < j` with `v[i] > v[j]`; sorts `v`.
fn merge_count(v: &mut [u64], scratch: &mut [u64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = merge_count(&mut v[..mid], &mut scratch[..mid]) + merge_count(&mut v[mid..], &mut scratch[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            scratch[k] = v[i];
            i += 1;
        } else {
            scratch[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    count
}

// Link directions out of a tile.
const EAST: usize = 0;
const WEST: usize = 1;
const SOUTH: usize = 2;
const NORTH: usize = 3;

fn next_direction(here: Tile, target: Tile) -> usize {
    if here.x < target.x {
        EAST
    } else if here.x > target.x {
        WEST
    } else if here.y < target.y {
        SOUTH
    } else {
        debug_assert!(here.y > target.y, "spike already at its destination");
        NORTH
    }
}

fn step(t: Tile, dir: usize) -> Tile {
    match dir {
        EAST => Tile { x: t.x + 1, y: t.y },
        WEST => Tile { x: t.x - 1, y: t.y },
        SOUTH => Tile { x: t.x, y: t.y + 1 },
        _ => Tile { x: t.x, y: t.y - 1 },
    }
}

fn walk_links(from: Tile, to: Tile, hw: &HardwareConfig, mut visit: impl FnMut(usize)) {
    let mut here = from;
    while here != to {
        let dir = next_direction(here, to);
        visit(hw.tile_index(here) * 4 + dir);
        here = step(here, dir);
    }
}

/// Dimension-order route, x first.
pub fn xy_path(from: Tile, to: Tile) -> Vec<Tile> {
    let mut path = vec![from];
    let mut here = from;
    while here != to {
        here = step(here, next_direction(here, to));
        path.push(here);
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Neuron, NeuronKind, SnnGraph, Synapse};

    fn t(x: usize, y: usize) -> Tile {
        Tile { x, y }
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> SnnGraph {
        let neurons = (0..n).map(|id| Neuron { id, kind: NeuronKind::Hidden }).collect();
        let synapses = edges.iter().map(|&(src, dst)| Synapse { src, dst, weight: 1.0 }).collect();
        SnnGraph::new(neurons, synapses).unwrap()
    }

    #[test]
    fn single_cluster_has_no_traffic() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let tr = SpikeTrace::from_trains(vec![vec![1, 2], vec![3], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &tr, vec![vec![0, 1, 2]]).unwrap();
        let r = simulate(&p, &[t(0, 0)], &tr, &HardwareConfig::with_mesh(2, 2));
        assert_eq!(r.delivered, 0);
        assert_eq!(r.metrics, FitnessReport::default());
    }

    #[test]
    fn adjacent_tiles_linear_energy() {
        let g = graph(2, &[(0, 1)]);
        let tr = SpikeTrace::from_trains(vec![vec![0, 3, 6, 9, 12], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &tr, vec![vec![0], vec![1]]).unwrap();
        let r = simulate(&p, &[t(0, 0), t(1, 0)], &tr, &HardwareConfig::with_mesh(2, 1));
        assert_eq!(r.metrics.spike_hops, 5);
        assert_eq!(r.metrics.energy_e, 5.0);
        assert_eq!(r.metrics.avg_latency, 1.0);
        assert_eq!(r.link_loads, vec![LinkLoad { from: t(0, 0), to: t(1, 0), spikes: 5 }]);
    }

    #[test]
    fn energy_arithmetic() {
        let mut hw = HardwareConfig::with_mesh(1, 1);
        assert_eq!(energy(0, &hw), 0.0);
        assert_eq!(energy(5, &hw), 5.0);
        hw.energy_per_hop = 2.0;
        assert_eq!(energy(3 * 4, &hw), 24.0);
    }

    #[test]
    fn contention_delays_second_spike() {
        // 0 -> 2 and 1 -> 2 both cross the same link at t = 4.
        let g = graph(3, &[(0, 2), (1, 2)]);
        let tr = SpikeTrace::from_trains(vec![vec![4], vec![4], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &tr, vec![vec![0, 1], vec![2]]).unwrap();
        let r = simulate(&p, &[t(0, 0), t(1, 0)], &tr, &HardwareConfig::with_mesh(2, 1));
        let arrivals: Vec<(usize, u64)> = r.spikes.iter().map(|s| (s.src, s.arrival)).collect();
        assert_eq!(arrivals, vec![(0, 5), (1, 6)]);
        assert_eq!(r.metrics.max_latency, 2);
        // equal departures are not comparable
        assert_eq!(r.metrics.spike_disorder_d, 0.0);
    }

    #[test]
    fn constant_delay_keeps_intervals() {
        let g = graph(2, &[(0, 1)]);
        let tr = SpikeTrace::from_trains(vec![vec![0, 10, 20], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &tr, vec![vec![0], vec![1]]).unwrap();
        let r = simulate(&p, &[t(0, 0), t(2, 1)], &tr, &HardwareConfig::with_mesh(3, 2));
        let arrivals: Vec<u64> = r.spikes.iter().map(|s| s.arrival).collect();
        assert_eq!(arrivals, vec![3, 13, 23]);
        assert_eq!(r.metrics.isi_distortion_i, 0.0);
        assert_eq!(r.spikes[0].path, vec![t(0, 0), t(1, 0), t(2, 0), t(2, 1)]);
    }

    #[test]
    fn contention_stretches_one_interval() {
        // synapse 1->2 sends at 0 and 10; synapse 0->2 also sends at 10 and
        // wins the shared link (lower source id), pushing 1->2's second spike
        // back by one timestep.
        let g = graph(3, &[(0, 2), (1, 2)]);
        let tr = SpikeTrace::from_trains(vec![vec![10], vec![0, 10], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &tr, vec![vec![0, 1], vec![2]]).unwrap();
        let r = simulate(&p, &[t(0, 0), t(1, 0)], &tr, &HardwareConfig::with_mesh(2, 1));
        let late: Vec<u64> = r.spikes.iter().filter(|s| s.src == 1).map(|s| s.arrival).collect();
        assert_eq!(late, vec![1, 12]);
        assert_eq!(r.metrics.isi_distortion_i, 1.0);
        assert_eq!(isi_distortion(&r.spikes), 1.0);
    }

    #[test]
    fn longer_route_overtaken() {
        // A departs t=5 over 4 hops, B departs t=6 over 1 hop, same target.
        let g = graph(3, &[(0, 2), (1, 2)]);
        let tr = SpikeTrace::from_trains(vec![vec![5], vec![6], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &tr, vec![vec![0], vec![1], vec![2]]).unwrap();
        let r = simulate(&p, &[t(0, 0), t(3, 0), t(4, 0)], &tr, &HardwareConfig::with_mesh(5, 1));
        let arrivals: Vec<u64> = r.spikes.iter().map(|s| s.arrival).collect();
        assert_eq!(arrivals, vec![9, 7]);
        assert_eq!(r.metrics.spike_disorder_d, 1.0);
        assert_eq!(spike_disorder(&r.spikes), 1.0);
    }

    #[test]
    fn uniform_distance_keeps_order() {
        let g = graph(3, &[(0, 2), (1, 2)]);
        let tr = SpikeTrace::from_trains(vec![vec![1, 5], vec![3], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &tr, vec![vec![0], vec![1], vec![2]]).unwrap();
        let mut hw = HardwareConfig::with_mesh(3, 3);
        hw.link_capacity = u32::MAX;
        let r = simulate(&p, &[t(0, 1), t(1, 0), t(1, 1)], &tr, &hw);
        assert_eq!(r.metrics.spike_disorder_d, 0.0);
    }

    #[test]
    fn single_source_destination_has_no_pairs() {
        let g = graph(2, &[(0, 1)]);
        let tr = SpikeTrace::from_trains(vec![vec![1, 2, 3], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &tr, vec![vec![0], vec![1]]).unwrap();
        let model = TrafficModel::new(&p, &tr, &HardwareConfig::with_mesh(2, 1));
        assert_eq!(model.comparable_pairs, 0);
        assert_eq!(model.evaluate(&[t(0, 0), t(1, 0)]).spike_disorder_d, 0.0);
    }

    #[test]
    fn inversion_counter_against_pairs() {
        let mut items = vec![9, 1, 3, 2, 2, 0, 7, 7, 4];
        let mut brute = 0;
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if items[i] > items[j] {
                    brute += 1;
                }
            }
        }
        let mut scratch = vec![0; items.len()];
        assert_eq!(merge_count(&mut items, &mut scratch), brute);
        assert!(items.is_sorted());
    }

    #[test]
    fn capacity_two_shares_a_slot() {
        let g = graph(4, &[(0, 3), (1, 3), (2, 3)]);
        let tr = SpikeTrace::from_trains(vec![vec![0], vec![0], vec![0], vec![]]).unwrap();
        let p = Partition::from_clusters(&g, &tr, vec![vec![0, 1, 2], vec![3]]).unwrap();
        let mut hw = HardwareConfig::with_mesh(2, 1);
        hw.link_capacity = 2;
        let r = simulate(&p, &[t(0, 0), t(1, 0)], &tr, &hw);
        let arrivals: Vec<u64> = r.spikes.iter().map(|s| s.arrival).collect();
        assert_eq!(arrivals, vec![1, 1, 2]);
    }
}
