//! A small generational evolutionary algorithm with pluggable crossover.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::generic::{generic_crossover, GenericConfig};
use crate::graph::{check_multiplicities, InstanceGraph, TypeGraph};
use crate::par::{self, Execution};
use crate::secure::{secure_crossover, SecureConfig};
use crate::trace::{mix_seed, Decider};
use crate::CrossoverError;

/// A problem-preserving change to a solution.
pub trait Mutation: Send + Sync {
    fn name(&self) -> &str;
    /// Applies the mutation in place; returns false if it was not
    /// applicable and `g` is unchanged.
    fn apply(&self, g: &mut InstanceGraph, rng: &mut dyn RngCore) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Secure,
    /// Generic crossover; infeasible offspring are dropped and the mating
    /// retried.
    GenericDiscard,
    /// Generic crossover; offspring are kept whatever their feasibility.
    GenericKeep,
}

impl Operator {
    pub fn as_str(self) -> &'static str {
        match self {
            Operator::Secure => "secure",
            Operator::GenericDiscard => "generic-discard",
            Operator::GenericKeep => "generic-keep",
        }
    }
}

impl FromStr for Operator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "secure" => Ok(Operator::Secure),
            "generic-discard" => Ok(Operator::GenericDiscard),
            "generic-keep" | "generic" => Ok(Operator::GenericKeep),
            _ => Err(format!("unknown operator '{s}'")),
        }
    }
}

/// Retries of a generic-discard mating before the parents are cloned.
pub const DISCARD_RETRIES: usize = 10;

#[derive(Debug, Clone)]
pub struct EaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub operator: Operator,
    pub seed: u64,
    pub secure: SecureConfig,
    pub generic: GenericConfig,
    pub execution: Execution,
}

impl Default for EaConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations: 30,
            crossover_rate: 0.8,
            mutation_rate: 0.2,
            tournament_size: 2,
            operator: Operator::Secure,
            seed: 0,
            secure: SecureConfig::default(),
            generic: GenericConfig::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EaError {
    #[error("invalid EA configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Crossover(#[from] CrossoverError),
}

impl EaConfig {
    pub fn validate(&self) -> Result<(), EaError> {
        if self.population_size < 2 {
            return Err(EaError::Config(format!("population_size {} < 2", self.population_size)));
        }
        if self.tournament_size < 1 || self.tournament_size > self.population_size {
            return Err(EaError::Config(format!(
                "tournament_size {} not in [1, {}]",
                self.tournament_size, self.population_size
            )));
        }
        for (name, p) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(EaError::Config(format!("{name} = {p} is not in [0,1]")));
            }
        }
        self.secure.validate()?;
        self.generic.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub graph: InstanceGraph,
    pub fitness: f64,
    pub feasible: bool,
}

pub type Fitness = dyn Fn(&InstanceGraph) -> f64 + Sync;

impl Individual {
    pub fn evaluate(graph: InstanceGraph, tg: &TypeGraph, fitness: &Fitness) -> Self {
        let feasible = check_multiplicities(&graph, tg).map(|r| r.is_empty()).unwrap_or(false);
        let fitness = fitness(&graph);
        Self { graph, fitness, feasible }
    }
}

/// Fitness descending, then fewer nodes, then lower ID sum.
fn better(a: &Individual, b: &Individual) -> Ordering {
    b.fitness
        .total_cmp(&a.fitness)
        .then(a.graph.node_count().cmp(&b.graph.node_count()))
        .then(a.graph.id_sum().cmp(&b.graph.id_sum()))
}

/// Best of `k` members drawn uniformly without replacement.
pub fn tournament_select<'a>(pop: &'a [Individual], k: usize, rng: &mut impl Rng) -> &'a Individual {
    assert!(!pop.is_empty() && (1..=pop.len()).contains(&k));
    sample(rng, pop.len(), k).into_iter().map(|i| &pop[i]).min_by(|a, b| better(a, b)).unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub feasible_fraction: f64,
    /// Feasible share of the offspring crossover produced this generation;
    /// 1.0 when it produced none.
    pub xover_feasible_rate: f64,
    pub discards: usize,
}

#[derive(Debug, Clone)]
pub struct EaResult {
    pub best: Individual,
    pub history: Vec<GenerationStats>,
    pub population: Vec<Individual>,
}

pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best,mean,feasible_fraction,xover_feasible_rate,discards\n");
    for s in history {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{}",
            s.generation, s.best, s.mean, s.feasible_fraction, s.xover_feasible_rate, s.discards
        )
        .unwrap();
    }
    out
}

fn stats(generation: usize, pop: &[Individual], produced: usize, feasible: usize, discards: usize) -> GenerationStats {
    let n = pop.len() as f64;
    GenerationStats {
        generation,
        best: pop.iter().map(|i| i.fitness).fold(f64::NEG_INFINITY, f64::max),
        mean: pop.iter().map(|i| i.fitness).sum::<f64>() / n,
        feasible_fraction: pop.iter().filter(|i| i.feasible).count() as f64 / n,
        xover_feasible_rate: if produced == 0 { 1.0 } else { feasible as f64 / produced as f64 },
        discards,
    }
}

fn mutate_once(g: &mut InstanceGraph, mutations: &[Box<dyn Mutation>], rng: &mut ChaCha8Rng) {
    if !mutations.is_empty() {
        let m = &mutations[rng.gen_range(0..mutations.len())];
        m.apply(g, rng);
    }
}

struct Mating {
    children: Vec<InstanceGraph>,
    produced: usize,
    feasible: usize,
    discards: usize,
}

fn is_feasible(g: &InstanceGraph, tg: &TypeGraph) -> bool {
    check_multiplicities(g, tg).map(|r| r.is_empty()).unwrap_or(false)
}

/// Evaluated children of one mating with its `[produced, feasible, discards]`
/// offspring counts.
type Brood = (Vec<Individual>, [usize; 3]);

fn mate(
    p1: &InstanceGraph,
    p2: &InstanceGraph,
    tg: &TypeGraph,
    cfg: &EaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Mating, CrossoverError> {
    let mut m = Mating { children: Vec::new(), produced: 0, feasible: 0, discards: 0 };
    if !rng.gen_bool(cfg.crossover_rate) {
        m.children = vec![p1.clone(), p2.clone()];
        return Ok(m);
    }
    match cfg.operator {
        Operator::Secure => {
            for (a, b) in [(p1, p2), (p2, p1)] {
                let out = secure_crossover(a, b, tg, &cfg.secure, Decider::from_seed(rng.next_u64()))?;
                m.produced += 1;
                m.feasible += is_feasible(&out.offspring, tg) as usize;
                m.children.push(out.offspring);
            }
        }
        Operator::GenericKeep => {
            let out = generic_crossover(p1, p2, tg, &cfg.generic, Decider::from_seed(rng.next_u64()))?;
            for child in [out.offspring1, out.offspring2] {
                m.produced += 1;
                m.feasible += is_feasible(&child, tg) as usize;
                m.children.push(child);
            }
        }
        Operator::GenericDiscard => {
            for _ in 0..DISCARD_RETRIES {
                let out = generic_crossover(p1, p2, tg, &cfg.generic, Decider::from_seed(rng.next_u64()))?;
                for child in [out.offspring1, out.offspring2] {
                    m.produced += 1;
                    if is_feasible(&child, tg) {
                        m.feasible += 1;
                        if m.children.len() < 2 {
                            m.children.push(child);
                        }
                    } else {
                        m.discards += 1;
                    }
                }
                if m.children.len() == 2 {
                    break;
                }
            }
            let parents = [p1, p2];
            while m.children.len() < 2 {
                m.children.push(parents[m.children.len()].clone());
            }
        }
    }
    Ok(m)
}

/// Runs the generational loop from `seed_solution`. Every individual keeps
/// the seed solution's problem graph as long as `mutations` do.
pub fn run_ea(
    seed_solution: &InstanceGraph,
    tg: &TypeGraph,
    fitness: &Fitness,
    mutations: &[Box<dyn Mutation>],
    cfg: &EaConfig,
) -> Result<EaResult, EaError> {
    cfg.validate()?;
    seed_solution.check_typing(tg).map_err(CrossoverError::from)?;
    let mu = cfg.population_size;

    let mut pop: Vec<Individual> = par::map_range(cfg.execution, mu, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[cfg.seed, u64::MAX, i as u64]));
        let mut g = seed_solution.clone();
        for _ in 0..rng.gen_range(5..=30) {
            mutate_once(&mut g, mutations, &mut rng);
        }
        Individual::evaluate(g, tg, fitness)
    });
    let mut history = vec![stats(0, &pop, 0, 0, 0)];

    for generation in 1..=cfg.generations {
        let pairs = mu.div_ceil(2);
        let matings: Vec<Result<Brood, CrossoverError>> = {
            let pop = &pop;
            par::map_range(cfg.execution, pairs, |p| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[cfg.seed, generation as u64, p as u64]));
                let p1 = tournament_select(pop, cfg.tournament_size, &mut rng).graph.clone();
                let p2 = tournament_select(pop, cfg.tournament_size, &mut rng).graph.clone();
                let m = mate(&p1, &p2, tg, cfg, &mut rng)?;
                let children: Vec<Individual> = m
                    .children
                    .into_iter()
                    .map(|mut c| {
                        if rng.gen_bool(cfg.mutation_rate) {
                            mutate_once(&mut c, mutations, &mut rng);
                        }
                        Individual::evaluate(c, tg, fitness)
                    })
                    .collect();
                Ok((children, [m.produced, m.feasible, m.discards]))
            })
        };
        let (mut produced, mut feasible, mut discards) = (0, 0, 0);
        let mut offspring = Vec::with_capacity(2 * pairs);
        for r in matings {
            let (children, [p, f, d]) = r?;
            produced += p;
            feasible += f;
            discards += d;
            offspring.extend(children);
        }
        offspring.truncate(mu);
        pop.extend(offspring);
        // stable sort keeps parents ahead of equal offspring
        pop.sort_by(|a, b| b.feasible.cmp(&a.feasible).then(better(a, b)));
        pop.truncate(mu);
        history.push(stats(generation, &pop, produced, feasible, discards));
    }
    let best = pop.iter().min_by(|a, b| b.feasible.cmp(&a.feasible).then(better(a, b))).unwrap().clone();
    Ok(EaResult { best, history, population: pop })
}
