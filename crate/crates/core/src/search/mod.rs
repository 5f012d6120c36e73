//! Error-oriented (1+λ) CGP search.
//!
//! Fitness is the power proxy of the active netlist when every constraint holds,
//! and infeasible otherwise. The parent starts at the golden circuit; an
//! offspring replaces it when its fitness is no worse, so neutral mutations
//! drift freely.

mod constraints;
mod matrix;

use std::cmp::Ordering;
use std::num::NonZeroUsize;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{CgpGenome, CgpParams, CircuitError, Netlist};
use crate::cost::{CostError, CostTable};
use crate::golden::{generate_golden, GoldenError, GoldenSpec};
use crate::metrics::{error_profile, error_stats, ErrorProfile, ErrorStats, MetricsError};
use crate::simulator::{extract_output_ints, OutputInts, SimError, Simulator};

pub use constraints::{Constraint, ConstraintError, ConstraintSet, Metric};
pub use matrix::{derive_seed, run_matrix, MatrixRun, NamedConstraints};

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("start circuit violates the constraint set {0}")]
    InfeasibleStart(String),
    #[error(transparent)]
    Golden(#[from] GoldenError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Search fitness; `Infeasible` orders after every finite cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fitness {
    Feasible(f64),
    Infeasible,
}

impl Fitness {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Fitness::Feasible(_))
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Fitness::Feasible(v) => Some(v),
            Fitness::Infeasible => None,
        }
    }
}

impl PartialOrd for Fitness {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(match (self, other) {
            (Fitness::Feasible(a), Fitness::Feasible(b)) => a.total_cmp(b),
            (Fitness::Feasible(_), Fitness::Infeasible) => Ordering::Less,
            (Fitness::Infeasible, Fitness::Feasible(_)) => Ordering::Greater,
            (Fitness::Infeasible, Fitness::Infeasible) => Ordering::Equal,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub params: CgpParams,
    pub golden: GoldenSpec,
    pub constraints: ConstraintSet,
    /// Offspring per generation.
    pub lambda: usize,
    /// Genes resampled per offspring.
    pub mutation_genes: usize,
    /// Offspring evaluations allowed; the run stops before a generation that
    /// would exceed it.
    pub max_evaluations: u64,
    /// Optional wall-clock limit, checked between generations. Makes the
    /// result depend on machine speed.
    pub wall_clock: Option<Duration>,
    pub seed: u64,
    pub cost_table: CostTable,
}

impl SearchConfig {
    /// λ = 4, h = 5, default cost table and unrestricted levels-back.
    pub fn new(golden: GoldenSpec, nodes: usize, constraints: ConstraintSet) -> Self {
        SearchConfig {
            params: golden.params(nodes),
            golden,
            constraints,
            lambda: 4,
            mutation_genes: 5,
            max_evaluations: 10_000,
            wall_clock: None,
            seed: 0,
            cost_table: CostTable::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::InvalidConfig(m));
        if self.lambda == 0 {
            return bad("lambda must be at least 1".into());
        }
        if self.mutation_genes == 0 {
            return bad("mutation_genes must be at least 1".into());
        }
        self.params.validate()?;
        self.golden.validate()?;
        if self.params.inputs != self.golden.inputs() || self.params.outputs != self.golden.outputs() {
            return bad(format!(
                "params have {} inputs / {} outputs but the golden circuit needs {} / {}",
                self.params.inputs,
                self.params.outputs,
                self.golden.inputs(),
                self.golden.outputs()
            ));
        }
        self.cost_table.covers(&self.params.functions)?;
        Ok(())
    }
}

/// Result of scoring one candidate.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub fitness: Fitness,
    pub cost: f64,
    /// `None` when the candidate was pruned on cost alone.
    pub stats: Option<ErrorStats>,
}

/// Scores genomes against a fixed golden output table.
pub struct Evaluator<'a> {
    constraints: &'a ConstraintSet,
    weights: [f64; 10],
    golden_ints: &'a OutputInts,
    simulator: Simulator,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        constraints: &'a ConstraintSet,
        table: &CostTable,
        golden_ints: &'a OutputInts,
        n_inputs: usize,
    ) -> Result<Self, SearchError> {
        Ok(Evaluator {
            constraints,
            weights: table.dense(),
            golden_ints,
            simulator: Simulator::new(n_inputs)?,
        })
    }

    pub fn cost(&self, netlist: &Netlist) -> Result<f64, CostError> {
        netlist.gates().iter().try_fold(0.0, |acc, g| {
            let w = self.weights[g.function().ordinal()];
            if w.is_nan() {
                Err(CostError::MissingWeight(g.function()))
            } else {
                Ok(acc + w)
            }
        })
    }

    fn outputs(&mut self, netlist: &Netlist) -> Result<OutputInts, SearchError> {
        let planes = self.simulator.run(netlist)?;
        Ok(extract_output_ints(&planes, netlist.outputs().len())?)
    }

    /// Full fitness of `genome`.
    pub fn evaluate(&mut self, genome: &CgpGenome) -> Result<Evaluation, SearchError> {
        self.evaluate_bounded(genome, None)
    }

    /// Like [`Evaluator::evaluate`], but skips simulation when the cost alone
    /// already exceeds `bound`; such a candidate can never be selected.
    pub fn evaluate_bounded(
        &mut self,
        genome: &CgpGenome,
        bound: Option<f64>,
    ) -> Result<Evaluation, SearchError> {
        let netlist = genome.decode_active();
        let cost = self.cost(&netlist)?;
        if bound.is_some_and(|b| cost > b) {
            return Ok(Evaluation { fitness: Fitness::Infeasible, cost, stats: None });
        }
        let ints = self.outputs(&netlist)?;
        let stats = error_stats(self.golden_ints, &ints)?;
        let mut feasible = self.constraints.check_stats(&stats);
        if feasible && self.constraints.needs_histogram() {
            let profile = error_profile(self.golden_ints, &ints)?;
            feasible = self.constraints.satisfied(&profile);
        }
        let fitness = if feasible { Fitness::Feasible(cost) } else { Fitness::Infeasible };
        Ok(Evaluation { fitness, cost, stats: Some(stats) })
    }

    pub fn profile(&mut self, genome: &CgpGenome) -> Result<ErrorProfile, SearchError> {
        let ints = self.outputs(&genome.decode_active())?;
        Ok(error_profile(self.golden_ints, &ints)?)
    }
}

/// Fitness of a single genome: its cost if every constraint holds.
pub fn fitness(
    genome: &CgpGenome,
    cfg: &SearchConfig,
    golden_ints: &OutputInts,
) -> Result<Fitness, SearchError> {
    let mut ev = Evaluator::new(&cfg.constraints, &cfg.cost_table, golden_ints, genome.params().inputs)?;
    Ok(ev.evaluate(genome)?.fitness)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    /// Offspring evaluations spent when the improvement was found.
    pub evaluation: u64,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub best_genome: CgpGenome,
    pub best_cost: f64,
    pub golden_cost: f64,
    /// `best_cost / golden_cost`.
    pub relative_power: f64,
    pub best_profile: ErrorProfile,
    /// Strict improvements of the best fitness, starting with the golden cost.
    pub trajectory: Vec<TrajectoryPoint>,
    pub evaluations_used: u64,
    pub generations: u64,
    pub stopped_by_wall_clock: bool,
}

pub fn evolve(cfg: &SearchConfig) -> Result<RunResult, SearchError> {
    evolve_observed(cfg, |_| {})
}

/// [`evolve`], calling `observer` with the error stats of every candidate
/// that was simulated.
pub fn evolve_observed<F>(cfg: &SearchConfig, mut observer: F) -> Result<RunResult, SearchError>
where
    F: FnMut(&ErrorStats),
{
    cfg.validate()?;
    let golden = generate_golden(&cfg.golden, cfg.params.clone())?;
    let golden_ints = {
        let mut sim = Simulator::new(cfg.params.inputs)?;
        let planes = sim.run_genome(&golden)?;
        extract_output_ints(&planes, cfg.params.outputs)?
    };
    let mut ev = Evaluator::new(&cfg.constraints, &cfg.cost_table, &golden_ints, cfg.params.inputs)?;
    let start = ev.evaluate(&golden)?;
    if let Some(s) = &start.stats {
        observer(s);
    }
    let golden_cost = start.cost;
    if golden_cost <= 0.0 {
        return Err(CostError::ZeroGoldenCost.into());
    }
    let Fitness::Feasible(mut parent_fitness) = start.fitness else {
        return Err(SearchError::InfeasibleStart(cfg.constraints.to_string()));
    };

    let h = NonZeroUsize::new(cfg.mutation_genes).expect("validated");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut parent = golden;
    let mut trajectory = vec![TrajectoryPoint { evaluation: 0, fitness: parent_fitness }];
    let mut evaluations = 0u64;
    let mut generations = 0u64;
    let mut stopped_by_wall_clock = false;
    let started = Instant::now();
    let lambda = cfg.lambda as u64;

    while evaluations + lambda <= cfg.max_evaluations {
        if cfg.wall_clock.is_some_and(|limit| started.elapsed() >= limit) {
            stopped_by_wall_clock = true;
            break;
        }
        let mut best: Option<(CgpGenome, f64)> = None;
        for _ in 0..cfg.lambda {
            let child = parent.mutate(h, &mut rng);
            // Only offspring at least as good as the current selection bar matter.
            let bar = best.as_ref().map_or(parent_fitness, |(_, f)| *f);
            let e = ev.evaluate_bounded(&child, Some(bar))?;
            evaluations += 1;
            if let Some(s) = &e.stats {
                observer(s);
            }
            if let Fitness::Feasible(f) = e.fitness {
                // strict: ties among offspring go to the lowest index
                if best.as_ref().is_none_or(|(_, b)| f < *b) && f <= parent_fitness {
                    best = Some((child, f));
                }
            }
        }
        generations += 1;
        if let Some((child, f)) = best {
            if f < parent_fitness {
                trajectory.push(TrajectoryPoint { evaluation: evaluations, fitness: f });
            }
            parent = child;
            parent_fitness = f;
        }
    }

    let best_profile = ev.profile(&parent)?;
    debug_assert!(cfg.constraints.satisfied(&best_profile));
    Ok(RunResult {
        seed: cfg.seed,
        best_cost: parent_fitness,
        golden_cost,
        relative_power: parent_fitness / golden_cost,
        best_genome: parent,
        best_profile,
        trajectory,
        evaluations_used: evaluations,
        generations,
        stopped_by_wall_clock,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::evaluate_genome;

    fn wce_set(pct: f64) -> ConstraintSet {
        ConstraintSet::new(vec![Constraint::Wce { threshold: pct }]).unwrap()
    }

    #[test]
    fn fitness_ordering() {
        assert!(Fitness::Feasible(1e300) < Fitness::Infeasible);
        assert!(Fitness::Feasible(1.0) < Fitness::Feasible(2.0));
        assert_eq!(
            Fitness::Infeasible.partial_cmp(&Fitness::Infeasible),
            Some(Ordering::Equal)
        );
    }

    #[test]
    fn golden_fitness_is_its_cost() {
        let spec = GoldenSpec::multiplier(3);
        let cfg = SearchConfig::new(spec, 60, wce_set(0.0));
        let golden = generate_golden(&spec, cfg.params.clone()).unwrap();
        let ints = evaluate_genome(&golden).unwrap();
        let f = fitness(&golden, &cfg, &ints).unwrap();
        // 9 AND + 3 HA + 3 FA
        let expected = 9.0 * 6.0 + 3.0 * (8.0 + 6.0) + 3.0 * (2.0 * 8.0 + 2.0 * 6.0 + 6.0);
        assert_eq!(f, Fitness::Feasible(expected));
    }

    #[test]
    fn zero_budget_returns_golden() {
        let spec = GoldenSpec::multiplier(3);
        let mut cfg = SearchConfig::new(spec, 60, wce_set(10.0));
        cfg.max_evaluations = 0;
        let r = evolve(&cfg).unwrap();
        assert_eq!(r.relative_power, 1.0);
        assert_eq!(r.evaluations_used, 0);
        assert_eq!(r.best_profile.wce(), 0);
        assert_eq!(r.trajectory.len(), 1);
    }

    #[test]
    fn budget_is_respected_and_trajectory_improves() {
        let spec = GoldenSpec::multiplier(3);
        let mut cfg = SearchConfig::new(spec, 60, wce_set(10.0));
        cfg.max_evaluations = 2002;
        cfg.seed = 11;
        let r = evolve(&cfg).unwrap();
        assert_eq!(r.evaluations_used, 2000);
        assert_eq!(r.generations, 500);
        assert!(r.trajectory.windows(2).all(|w| w[1].fitness < w[0].fitness));
        assert_eq!(r.trajectory.last().unwrap().fitness, r.best_cost);
        assert!(cfg.constraints.satisfied(&r.best_profile));
        assert!(r.relative_power < 1.0);
    }

    #[test]
    fn same_seed_same_result() {
        let spec = GoldenSpec::multiplier(3);
        let mut cfg = SearchConfig::new(spec, 60, wce_set(5.0));
        cfg.max_evaluations = 1000;
        cfg.seed = 5;
        assert_eq!(evolve(&cfg).unwrap(), evolve(&cfg).unwrap());
    }

    #[test]
    fn config_validation() {
        let spec = GoldenSpec::multiplier(2);
        let mut cfg = SearchConfig::new(spec, 20, wce_set(5.0));
        cfg.lambda = 0;
        assert!(matches!(evolve(&cfg), Err(SearchError::InvalidConfig(_))));
        let mut cfg = SearchConfig::new(spec, 20, wce_set(5.0));
        cfg.mutation_genes = 0;
        assert!(matches!(evolve(&cfg), Err(SearchError::InvalidConfig(_))));
        let mut cfg = SearchConfig::new(spec, 20, wce_set(5.0));
        cfg.params = CgpParams::new(4, 3, 20);
        assert!(matches!(evolve(&cfg), Err(SearchError::InvalidConfig(_))));
        let mut cfg = SearchConfig::new(spec, 4, wce_set(5.0));
        cfg.max_evaluations = 10;
        assert!(matches!(evolve(&cfg), Err(SearchError::Golden(_))));
        let mut cfg = SearchConfig::new(spec, 20, wce_set(5.0));
        cfg.cost_table = CostTable::from_json(r#"{"AND": 1}"#).unwrap();
        assert!(matches!(evolve(&cfg), Err(SearchError::Cost(_))));
    }

    #[test]
    fn observer_sees_every_simulated_candidate() {
        let spec = GoldenSpec::multiplier(2);
        let mut cfg = SearchConfig::new(spec, 20, wce_set(20.0));
        cfg.max_evaluations = 400;
        let mut seen = 0;
        let r = evolve_observed(&cfg, |s| {
            seen += 1;
            assert!(s.mae() <= s.wce() as f64);
        })
        .unwrap();
        assert!(seen >= 1 && seen <= r.evaluations_used + 1);
    }

    #[test]
    fn wall_clock_stop() {
        let spec = GoldenSpec::multiplier(3);
        let mut cfg = SearchConfig::new(spec, 60, wce_set(5.0));
        cfg.max_evaluations = u64::MAX;
        cfg.wall_clock = Some(Duration::from_millis(50));
        let r = evolve(&cfg).unwrap();
        assert!(r.stopped_by_wall_clock);
        assert!(r.evaluations_used > 0);
    }
}
