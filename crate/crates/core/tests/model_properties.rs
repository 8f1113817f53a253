mod common;

use common::{random_graph, random_trace, rng};
use proptest::prelude::*;
use snnmap_core::model::{synapse_spike_count, HardwareConfig, Neuron, NeuronKind, Partition, SnnGraph, SpikeTrace, Synapse};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_json_round_trip_is_byte_identical(seed in any::<u64>(), n in 1usize..60, fan in 0usize..12, dag in any::<bool>()) {
        let g = random_graph(&mut rng(seed), n, n / 4 + 1, fan, dag);
        let text = g.to_json_string();
        let back = SnnGraph::from_json_str(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn trace_csv_round_trip(seed in any::<u64>(), n in 1usize..40, rate in 0.0f64..0.5) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 1, 3, true);
        let t = random_trace(&mut r, n, 30, rate);
        let text = t.to_csv_string();
        let back = SpikeTrace::from_csv_reader(text.as_bytes(), &g).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn synapse_spikes_follow_fan_out(seed in any::<u64>(), n in 2usize..50) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 3, 6, false);
        let t = random_trace(&mut r, n, 40, 0.2);
        let per_synapse: u64 = g.synapses().iter().map(|s| synapse_spike_count(&t, s)).sum();
        let per_neuron: u64 = (0..n).map(|v| t.spike_count(v) * g.fan_out(v) as u64).sum();
        prop_assert_eq!(per_synapse, per_neuron);
    }

    #[test]
    fn single_cluster_cuts_nothing(seed in any::<u64>(), n in 1usize..40) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 2, 5, false);
        let t = random_trace(&mut r, n, 20, 0.3);
        let p = Partition::from_clusters(&g, &t, vec![(0..n).collect()]).unwrap();
        prop_assert_eq!(p.cut_spikes(), 0);
        prop_assert!(p.cut_synapses().is_empty());
    }

    #[test]
    fn partition_json_round_trip(seed in any::<u64>(), n in 2usize..40, k in 1usize..6) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 2, 5, false);
        let t = random_trace(&mut r, n, 20, 0.3);
        let k = k.min(n);
        let clusters: Vec<Vec<usize>> = (0..k).map(|c| (c..n).step_by(k).collect()).collect();
        let p = Partition::from_clusters(&g, &t, clusters).unwrap();
        let back = Partition::from_json_str(&p.to_json_string(), &g, &t).unwrap();
        prop_assert_eq!(back, p);
    }
}

fn neurons(kinds: &[NeuronKind]) -> Vec<Neuron> {
    kinds.iter().enumerate().map(|(id, &kind)| Neuron { id, kind }).collect()
}

#[test]
fn malformed_graphs_are_validation_errors() {
    let h = NeuronKind::Hidden;
    let i = NeuronKind::Input;
    let syn = |src, dst| Synapse { src, dst, weight: 1.0 };
    let cases = [
        (neurons(&[i, h]), vec![syn(0, 5)]),
        (neurons(&[i, h]), vec![syn(0, 1), syn(0, 1)]),
        (neurons(&[h, h]), vec![syn(1, 1)]),
        (neurons(&[i, i]), vec![syn(0, 1)]),
        (neurons(&[i, h]), vec![Synapse { src: 0, dst: 1, weight: f64::NAN }]),
    ];
    for (ns, ss) in cases {
        let err = SnnGraph::new(ns, ss).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{err}");
    }
    let dup = SnnGraph::from_json_str(r#"{"neurons":[{"id":3,"kind":"input"},{"id":3,"kind":"hidden"}],"synapses":[]}"#);
    assert_eq!(dup.unwrap_err().exit_code(), 1);
    assert_eq!(SnnGraph::from_json_str("{not json").unwrap_err().exit_code(), 1);
}

#[test]
fn sparse_ids_are_relabelled_in_order() {
    let g = SnnGraph::from_json_str(
        r#"{"neurons":[{"id":40,"kind":"hidden"},{"id":7,"kind":"input"}],"synapses":[{"src":7,"dst":40,"weight":0.25}]}"#,
    )
    .unwrap();
    assert_eq!(g.file_id(0), 7);
    assert_eq!(g.file_id(1), 40);
    assert_eq!(g.fan_in(1), 1);
    let t = SpikeTrace::from_csv_reader("neuron_id,timestep\n40,3\n7,1\n".as_bytes(), &g).unwrap();
    assert_eq!(t.train(0), &[1]);
    assert_eq!(t.train(1), &[3]);
    let bad = SpikeTrace::from_csv_reader("neuron_id,timestep\n8,1\n".as_bytes(), &g);
    assert_eq!(bad.unwrap_err().exit_code(), 1);
    let twice = SpikeTrace::from_csv_reader("neuron_id,timestep\n7,1\n7,1\n".as_bytes(), &g);
    assert_eq!(twice.unwrap_err().exit_code(), 1);
}

#[test]
fn hardware_defaults_and_validation() {
    let hw = HardwareConfig::from_json_str(r#"{"mesh_width":3,"mesh_height":2}"#).unwrap();
    assert_eq!(hw.crossbar_n, 128);
    assert_eq!(hw.link_capacity, 1);
    assert_eq!(hw.tile_count(), 6);
    for bad in [
        r#"{"mesh_width":0,"mesh_height":2}"#,
        r#"{"mesh_width":2,"mesh_height":2,"latency_per_hop":0}"#,
        r#"{"mesh_width":2,"mesh_height":2,"energy_per_hop_pj":-1.0}"#,
    ] {
        assert_eq!(HardwareConfig::from_json_str(bad).unwrap_err().exit_code(), 1);
    }
}
