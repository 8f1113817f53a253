//! Cluster placement by particle swarm optimization.
//!
//! Each particle holds one real key per cluster. A key vector decodes to a
//! placement by ranking the clusters (ties by cluster index) and giving the
//! cluster of rank `r` the `r`-th tile in row-major order, so every position
//! decodes to an injective, in-mesh assignment. Particles follow the usual
//! inertia / cognitive / social update and are scored by the product of
//! energy, ISI distortion and spike disorder (see [`Objective`]).
//!
//! All randomness comes from ChaCha8 seeded with the run seed; restart `r`
//! uses stream `r` of that generator.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::TrafficModel;
use crate::error::{InfeasibleError, Result, ValidationError};
use crate::model::{FitnessReport, HardwareConfig, Partition, Placement, SpikeTrace, Tile};

/// Per-component velocity bound.
pub const MAX_VELOCITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveMode {
    /// `(1 + E/E0) * (1 + I/I0) * (1 + D)` against the first evaluated placement.
    Normalized,
    /// `E * I * D`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub restarts: usize,
    pub objective: ObjectiveMode,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm_size: 20,
            iterations: 200,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            restarts: 5,
            objective: ObjectiveMode::Normalized,
            seed: 0,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(ValidationError::Parameter(m.to_string()).into());
        if self.swarm_size < 2 {
            return fail("swarm size must be at least 2");
        }
        if self.restarts < 1 {
            return fail("at least one restart is needed");
        }
        if !(0.0..=1.0).contains(&self.inertia) {
            return fail("inertia must lie in [0, 1]");
        }
        if !(self.cognitive >= 0.0 && self.social >= 0.0 && self.cognitive.is_finite() && self.social.is_finite()) {
            return fail("acceleration coefficients must be non-negative");
        }
        Ok(())
    }
}

/// Scalar score of a [`FitnessReport`]; lower is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Objective {
    pub mode: ObjectiveMode,
    /// Reference energy and ISI distortion (normalized mode only).
    pub energy_ref: f64,
    pub isi_ref: f64,
}

impl Objective {
    pub fn literal() -> Self {
        Objective {
            mode: ObjectiveMode::Literal,
            energy_ref: 0.0,
            isi_ref: 0.0,
        }
    }

    /// Fixes the normalization from a reference report.
    pub fn from_reference(mode: ObjectiveMode, reference: &FitnessReport) -> Self {
        Objective {
            mode,
            energy_ref: reference.energy_e,
            isi_ref: reference.isi_distortion_i,
        }
    }

    pub fn score(&self, report: &FitnessReport) -> f64 {
        fitness(report, self)
    }
}

/// `E * I * D` in literal mode; `(1 + E/E0) * (1 + I/I0) * (1 + D)` in
/// normalized mode, where a zero reference leaves the raw value in its factor.
pub fn fitness(report: &FitnessReport, objective: &Objective) -> f64 {
    let (e, i, d) = (report.energy_e, report.isi_distortion_i, report.spike_disorder_d);
    match objective.mode {
        ObjectiveMode::Literal => e * i * d,
        ObjectiveMode::Normalized => {
            let scaled = |value: f64, reference: f64| if reference > 0.0 { value / reference } else { value };
            (1.0 + scaled(e, objective.energy_ref)) * (1.0 + scaled(i, objective.isi_ref)) * (1.0 + d)
        }
    }
}

/// Random-key decoding: cluster of rank `r` goes to row-major tile `r`.
pub fn decode(keys: &[f64], hw: &HardwareConfig) -> Result<Vec<Tile>> {
    check_fits(keys.len(), hw)?;
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    let mut tiles = vec![Tile { x: 0, y: 0 }; keys.len()];
    for (rank, &cluster) in order.iter().enumerate() {
        tiles[cluster] = hw.tile_at(rank);
    }
    Ok(tiles)
}

fn check_fits(clusters: usize, hw: &HardwareConfig) -> Result<()> {
    if clusters > hw.tile_count() {
        return Err(InfeasibleError::TooManyClusters {
            clusters,
            tiles: hw.tile_count(),
        }
        .into());
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub decoded: Placement,
}

#[derive(Debug, Clone)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub best_placement: Placement,
    pub iteration: usize,
    pub params: PsoParams,
    hw: HardwareConfig,
    rng: ChaCha8Rng,
}

impl SwarmState {
    /// Random initial swarm. `evaluate` must return a report whose
    /// `fitness_f` is the score to minimize.
    pub fn new(
        clusters: usize,
        hw: &HardwareConfig,
        params: PsoParams,
        stream: u64,
        mut evaluate: impl FnMut(&[Tile]) -> FitnessReport,
    ) -> Result<Self> {
        params.validate()?;
        check_fits(clusters, hw)?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(stream);
        let mut particles = Vec::with_capacity(params.swarm_size);
        for _ in 0..params.swarm_size {
            let position: Vec<f64> = (0..clusters).map(|_| rng.gen::<f64>()).collect();
            let velocity: Vec<f64> = (0..clusters).map(|_| rng.gen_range(-0.1..=0.1)).collect();
            let tiles = decode(&position, hw)?;
            let fitness = evaluate(&tiles);
            particles.push(Particle {
                best_position: position.clone(),
                best_fitness: fitness.fitness_f,
                position,
                velocity,
                decoded: Placement {
                    assignment: tiles,
                    fitness,
                },
            });
        }
        let lead = best_particle(&particles);
        Ok(SwarmState {
            best_position: particles[lead].best_position.clone(),
            best_fitness: particles[lead].best_fitness,
            best_placement: particles[lead].decoded.clone(),
            particles,
            iteration: 0,
            params,
            hw: hw.clone(),
            rng,
        })
    }
}

fn best_particle(particles: &[Particle]) -> usize {
    let mut best = 0;
    for (i, p) in particles.iter().enumerate() {
        if p.best_fitness < particles[best].best_fitness {
            best = i;
        }
    }
    best
}

/// One synchronous swarm iteration: every particle moves against the global
/// best of the previous iteration, then bests are updated in particle order.
pub fn pso_step(state: &mut SwarmState, mut evaluate: impl FnMut(&[Tile]) -> FitnessReport) {
    let PsoParams {
        inertia,
        cognitive,
        social,
        ..
    } = state.params;
    for p in &mut state.particles {
        for j in 0..p.position.len() {
            let r1: f64 = state.rng.gen();
            let r2: f64 = state.rng.gen();
            let x = p.position[j];
            let v = inertia * p.velocity[j]
                + cognitive * r1 * (p.best_position[j] - x)
                + social * r2 * (state.best_position[j] - x);
            let v = v.clamp(-MAX_VELOCITY, MAX_VELOCITY);
            p.velocity[j] = v;
            p.position[j] = (x + v).clamp(0.0, 1.0);
        }
    }
    for p in &mut state.particles {
        let tiles = decode(&p.position, &state.hw).expect("swarm size checked at setup");
        let fitness = evaluate(&tiles);
        p.decoded = Placement {
            assignment: tiles,
            fitness,
        };
        if fitness.fitness_f < p.best_fitness {
            p.best_fitness = fitness.fitness_f;
            p.best_position.clone_from(&p.position);
        }
    }
    let lead = best_particle(&state.particles);
    if state.particles[lead].best_fitness < state.best_fitness {
        let p = &state.particles[lead];
        state.best_fitness = p.best_fitness;
        state.best_position.clone_from(&p.best_position);
        // An improvement can only come from this iteration's move, so the
        // current decode is the personal best.
        state.best_placement = p.decoded.clone();
    }
    state.iteration += 1;
}

/// Scores placements with a fixed objective, memoizing repeated assignments.
pub struct Scorer<'a> {
    model: &'a TrafficModel,
    mode: ObjectiveMode,
    objective: Option<Objective>,
    cache: Option<HashMap<Vec<Tile>, FitnessReport>>,
    evaluations: usize,
}

impl<'a> Scorer<'a> {
    /// The normalization reference is taken from the first placement scored.
    pub fn new(model: &'a TrafficModel, mode: ObjectiveMode) -> Self {
        Scorer {
            model,
            mode,
            objective: None,
            cache: (model.cluster_count() <= 64).then(HashMap::new),
            evaluations: 0,
        }
    }

    pub fn with_objective(model: &'a TrafficModel, objective: Objective) -> Self {
        let mut scorer = Self::new(model, objective.mode);
        scorer.objective = Some(objective);
        scorer
    }

    pub fn objective(&self) -> Option<Objective> {
        self.objective
    }

    /// Distinct simulations run so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn score(&mut self, tiles: &[Tile]) -> FitnessReport {
        let cached = self.cache.as_ref().and_then(|c| c.get(tiles)).copied();
        let mut report = match cached {
            Some(r) => r,
            None => {
                self.evaluations += 1;
                let r = self.model.evaluate(tiles);
                if let Some(cache) = &mut self.cache {
                    cache.insert(tiles.to_vec(), r);
                }
                r
            }
        };
        let objective = *self
            .objective
            .get_or_insert_with(|| match self.mode {
                ObjectiveMode::Literal => Objective::literal(),
                mode => Objective::from_reference(mode, &report),
            });
        report.fitness_f = objective.score(&report);
        report
    }
}

/// Best placement of a swarm run and how the best score evolved.
#[derive(Debug, Clone)]
pub struct PsoOutcome {
    pub placement: Placement,
    pub objective: Objective,
    /// Best score so far after each iteration, restarts concatenated
    /// (`restarts * (iterations + 1)` entries, initial swarms included).
    pub history: Vec<f64>,
    /// `(restart, iteration, swarm best, overall best)` per history entry.
    pub trace: Vec<(usize, usize, f64, f64)>,
    pub evaluations: usize,
}

impl PsoOutcome {
    pub fn history_csv(&self) -> String {
        let mut out = String::from("restart,iteration,swarm_best,overall_best\n");
        for (r, i, swarm, overall) in &self.trace {
            out.push_str(&format!("{r},{i},{swarm},{overall}\n"));
        }
        out
    }
}

/// Runs `restarts` independent swarms and keeps the best placement.
pub fn pso_place(partition: &Partition, hw: &HardwareConfig, trace: &SpikeTrace, params: &PsoParams) -> Result<PsoOutcome> {
    let model = TrafficModel::new(partition, trace, hw);
    pso_place_model(&model, params)
}

/// [`pso_place`] over a prebuilt traffic model.
pub fn pso_place_model(model: &TrafficModel, params: &PsoParams) -> Result<PsoOutcome> {
    params.validate()?;
    let hw = model.hardware();
    let k = model.cluster_count();
    check_fits(k, hw)?;
    let mut scorer = Scorer::new(model, params.objective);
    let mut best: Option<Placement> = None;
    let mut history = Vec::with_capacity(params.restarts * (params.iterations + 1));
    let mut trace = Vec::with_capacity(history.capacity());
    for restart in 0..params.restarts {
        let mut swarm = SwarmState::new(k, hw, *params, restart as u64, |t| scorer.score(t))?;
        for iteration in 0..=params.iterations {
            if iteration > 0 {
                pso_step(&mut swarm, |t| scorer.score(t));
            }
            if best
                .as_ref()
                .is_none_or(|b| swarm.best_fitness < b.fitness.fitness_f)
            {
                best = Some(swarm.best_placement.clone());
            }
            let overall = best.as_ref().expect("set above").fitness.fitness_f;
            history.push(overall);
            trace.push((restart, iteration, swarm.best_fitness, overall));
        }
    }
    Ok(PsoOutcome {
        placement: best.expect("at least one restart"),
        objective: scorer.objective().expect("at least one evaluation"),
        history,
        trace,
        evaluations: scorer.evaluations(),
    })
}

/// Largest cluster count [`brute_force_place`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Evaluates every injective assignment in lexicographic order of tile
/// indices and returns the first minimum. Without an explicit objective the
/// first assignment evaluated fixes the normalization. Test oracle.
pub fn brute_force_place(
    partition: &Partition,
    hw: &HardwareConfig,
    trace: &SpikeTrace,
    mode: ObjectiveMode,
    objective: Option<Objective>,
) -> Result<Placement> {
    let k = partition.cluster_count();
    if k > BRUTE_FORCE_LIMIT {
        return Err(InfeasibleError::TooLarge {
            size: k,
            limit: BRUTE_FORCE_LIMIT,
        }
        .into());
    }
    check_fits(k, hw)?;
    let model = TrafficModel::new(partition, trace, hw);
    let mut scorer = match objective {
        Some(o) => Scorer::with_objective(&model, o),
        None => Scorer::new(&model, mode),
    };
    scorer.cache = None;

    let tiles = hw.tile_count();
    let mut chosen = Vec::with_capacity(k);
    let mut used = vec![false; tiles];
    let mut best: Option<Placement> = None;
    fn visit(
        hw: &HardwareConfig,
        k: usize,
        chosen: &mut Vec<usize>,
        used: &mut [bool],
        scorer: &mut Scorer,
        best: &mut Option<Placement>,
    ) {
        if chosen.len() == k {
            let assignment: Vec<Tile> = chosen.iter().map(|&i| hw.tile_at(i)).collect();
            let fitness = scorer.score(&assignment);
            if best.as_ref().is_none_or(|b| fitness.fitness_f < b.fitness.fitness_f) {
                *best = Some(Placement { assignment, fitness });
            }
            return;
        }
        for t in 0..used.len() {
            if !used[t] {
                used[t] = true;
                chosen.push(t);
                visit(hw, k, chosen, used, scorer, best);
                chosen.pop();
                used[t] = false;
            }
        }
    }
    visit(hw, k, &mut chosen, &mut used, &mut scorer, &mut best);
    Ok(best.expect("at least one assignment"))
}

/// Uniformly random key vector, decoded.
pub fn random_placement(clusters: usize, hw: &HardwareConfig, rng: &mut impl Rng) -> Result<Vec<Tile>> {
    let keys: Vec<f64> = (0..clusters).map(|_| rng.gen::<f64>()).collect();
    decode(&keys, hw)
}
