mod common;

use std::collections::HashSet;

use common::{random_graph, random_trace, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snnmap_core::cost::TrafficModel;
use snnmap_core::model::{HardwareConfig, Partition, SpikeTrace};
use snnmap_core::place::{decode, pso_place, random_placement, Objective, ObjectiveMode, PsoParams, Scorer};

fn clustered(seed: u64, n: usize, k: usize) -> (Partition, SpikeTrace) {
    let mut r = rng(seed);
    let g = random_graph(&mut r, n, 3, 5, false);
    let t = random_trace(&mut r, n, 30, 0.3);
    let clusters = (0..k).map(|c| (c..n).step_by(k).collect()).collect();
    (Partition::from_clusters(&g, &t, clusters).unwrap(), t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decoding_is_injective_for_any_keys(keys in prop::collection::vec(any::<f64>(), 1..30), w in 1usize..8, h in 1usize..8) {
        let hw = HardwareConfig::with_mesh(w, h);
        match decode(&keys, &hw) {
            Ok(tiles) => {
                prop_assert_eq!(tiles.len(), keys.len());
                prop_assert!(tiles.iter().all(|&t| hw.contains(t)));
                prop_assert_eq!(tiles.iter().collect::<HashSet<_>>().len(), tiles.len());
            }
            Err(e) => {
                prop_assert!(keys.len() > hw.tile_count());
                prop_assert_eq!(e.exit_code(), 2);
            }
        }
    }

    #[test]
    fn every_arrangement_is_reachable(seed in any::<u64>(), k in 1usize..12) {
        let hw = HardwareConfig::with_mesh(4, 3);
        let mut wanted: Vec<usize> = (0..k).collect();
        wanted.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let keys: Vec<f64> = wanted.iter().map(|&r| (r as f64 + 0.5) / k as f64).collect();
        let tiles = decode(&keys, &hw).unwrap();
        for (c, &r) in wanted.iter().enumerate() {
            prop_assert_eq!(tiles[c], hw.tile_at(r));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn swarm_is_reproducible_and_history_monotone(seed in any::<u64>(), k in 2usize..7) {
        let (p, t) = clustered(seed, 30, k);
        let hw = HardwareConfig::with_mesh(3, 3);
        let params = PsoParams { iterations: 15, restarts: 2, swarm_size: 6, seed, ..Default::default() };
        let a = pso_place(&p, &hw, &t, &params).unwrap();
        let b = pso_place(&p, &hw, &t, &params).unwrap();
        prop_assert_eq!(&a.placement, &b.placement);
        prop_assert_eq!(&a.history, &b.history);
        prop_assert_eq!(a.history.len(), 2 * 16);
        prop_assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*a.history.last().unwrap(), a.placement.fitness.fitness_f);
        a.placement.validate(&hw).unwrap();
    }
}

#[test]
fn literal_objective_beats_random_placements() {
    let mut wins = 0;
    for seed in 0..30 {
        let (p, t) = clustered(seed, 40, 6);
        let hw = HardwareConfig::with_mesh(3, 3);
        let params = PsoParams { objective: ObjectiveMode::Literal, iterations: 40, restarts: 1, seed, ..Default::default() };
        let found = pso_place(&p, &hw, &t, &params).unwrap().placement.fitness.fitness_f;
        let model = TrafficModel::new(&p, &t, &hw);
        let mut scorer = Scorer::with_objective(&model, Objective::literal());
        let mut r = ChaCha8Rng::seed_from_u64(1000 + seed);
        let random: f64 = (0..30)
            .map(|_| scorer.score(&random_placement(6, &hw, &mut r).unwrap()).fitness_f)
            .sum::<f64>()
            / 30.0;
        if found <= random {
            wins += 1;
        }
    }
    assert_eq!(wins, 30);
}
