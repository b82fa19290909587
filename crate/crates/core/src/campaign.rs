//! Head-to-head comparison of crossover arms on random CRA instances.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cra::{cra_fitness, random_problem, random_solution, type_graph};
use crate::evolution::DISCARD_RETRIES;
use crate::generic::{generic_crossover, GenericConfig};
use crate::graph::{check_multiplicities, InstanceGraph, TypeGraph};
use crate::par::{self, Execution};
use crate::secure::{secure_crossover, SecureConfig};
use crate::trace::{mix_seed, Decider};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Secure,
    /// Generic crossover retried until it yields a feasible offspring.
    GenericDiscard,
    /// Plain generic crossover, both offspring counted.
    Generic,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Secure => "secure",
            Arm::GenericDiscard => "generic-discard",
            Arm::Generic => "generic",
        }
    }
}

impl FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "secure" => Ok(Arm::Secure),
            "generic-discard" => Ok(Arm::GenericDiscard),
            "generic" | "generic-keep" => Ok(Arm::Generic),
            _ => Err(format!("unknown arm '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    pub arm: Arm,
    pub trials: usize,
    /// Crossover applications, retries included.
    pub crossovers: usize,
    /// Offspring delivered to the caller.
    pub offspring: usize,
    pub feasible: usize,
    pub best_fitness: f64,
    pub elapsed: Duration,
}

impl ArmStats {
    pub fn feasible_rate(&self) -> f64 {
        if self.offspring == 0 {
            1.0
        } else {
            self.feasible as f64 / self.offspring as f64
        }
    }

    pub fn time_per_crossover(&self) -> Duration {
        self.elapsed / self.crossovers.max(1) as u32
    }
}

/// One random CRA problem with 10 to 30 Features and two feasible
/// solutions of it.
pub fn cra_pair(seed: u64) -> (InstanceGraph, InstanceGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = rng.gen_range(10..=30);
    let p = random_problem(features, 0.1, &mut rng);
    let g = random_solution(&p, &mut rng);
    let h = random_solution(&p, &mut rng);
    (g, h)
}

struct Trial {
    crossovers: usize,
    offspring: usize,
    feasible: usize,
    best: f64,
}

fn feasible(g: &InstanceGraph, tg: &TypeGraph) -> bool {
    check_multiplicities(g, tg).map(|r| r.is_empty()).unwrap_or(false)
}

fn run_trial(arm: Arm, g: &InstanceGraph, h: &InstanceGraph, tg: &TypeGraph, rng: &mut ChaCha8Rng) -> Trial {
    let mut t = Trial { crossovers: 0, offspring: 0, feasible: 0, best: f64::NEG_INFINITY };
    let record = |t: &mut Trial, child: &InstanceGraph| {
        t.offspring += 1;
        if feasible(child, tg) {
            t.feasible += 1;
            t.best = t.best.max(cra_fitness(child));
        }
    };
    match arm {
        Arm::Secure => {
            let out = secure_crossover(g, h, tg, &SecureConfig::default(), Decider::from_seed(rng.next_u64()))
                .expect("parents share a problem graph");
            t.crossovers = 1;
            record(&mut t, &out.offspring);
        }
        Arm::Generic => {
            let out = generic_crossover(g, h, tg, &GenericConfig::default(), Decider::from_seed(rng.next_u64()))
                .expect("parents share a problem graph");
            t.crossovers = 1;
            record(&mut t, &out.offspring1);
            record(&mut t, &out.offspring2);
        }
        Arm::GenericDiscard => {
            for _ in 0..DISCARD_RETRIES {
                let out = generic_crossover(g, h, tg, &GenericConfig::default(), Decider::from_seed(rng.next_u64()))
                    .expect("parents share a problem graph");
                t.crossovers += 1;
                if let Some(child) = [out.offspring1, out.offspring2].into_iter().find(|c| feasible(c, tg)) {
                    record(&mut t, &child);
                    return t;
                }
            }
            // fall back to a parent clone, which is feasible
            record(&mut t, g);
        }
    }
    t
}

/// Runs `trials` random CRA pairs through every arm. Trial `i` uses the
/// same pair for every arm, derived from `(seed, i)`.
pub fn run_campaign(arms: &[Arm], trials: usize, seed: u64, exec: Execution) -> Vec<ArmStats> {
    let tg = type_graph();
    arms.iter()
        .map(|&arm| {
            let start = Instant::now();
            let results = par::map_range(exec, trials, |i| {
                let (g, h) = cra_pair(mix_seed(&[seed, i as u64]));
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, i as u64, arm as u64]));
                run_trial(arm, &g, &h, &tg, &mut rng)
            });
            let elapsed = start.elapsed();
            ArmStats {
                arm,
                trials,
                crossovers: results.iter().map(|t| t.crossovers).sum(),
                offspring: results.iter().map(|t| t.offspring).sum(),
                feasible: results.iter().map(|t| t.feasible).sum(),
                best_fitness: results.iter().map(|t| t.best).fold(f64::NEG_INFINITY, f64::max),
                elapsed,
            }
        })
        .collect()
}

/// The comparison table. Timings are left out so the table is
/// reproducible; see [`timing_table`].
pub fn results_table(stats: &[ArmStats]) -> String {
    let mut out =
        String::from("arm              trials  crossovers  offspring  feasible  feasible_rate  best_fitness\n");
    for s in stats {
        let best = if s.best_fitness.is_finite() { format!("{:.4}", s.best_fitness) } else { "-".into() };
        writeln!(
            out,
            "{:<16} {:>6}  {:>10}  {:>9}  {:>8}  {:>13.4}  {:>12}",
            s.arm.as_str(),
            s.trials,
            s.crossovers,
            s.offspring,
            s.feasible,
            s.feasible_rate(),
            best
        )
        .unwrap();
    }
    out
}

pub fn timing_table(stats: &[ArmStats]) -> String {
    let mut out = String::from("arm              us_per_crossover\n");
    for s in stats {
        writeln!(out, "{:<16} {:>16.1}", s.arm.as_str(), s.time_per_crossover().as_secs_f64() * 1e6).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secure_arm_is_always_feasible() {
        let stats = run_campaign(&[Arm::Secure, Arm::Generic, Arm::GenericDiscard], 40, 1, Execution::Parallel);
        assert_eq!(stats[0].feasible_rate(), 1.0);
        assert!(stats[1].feasible_rate() < 1.0);
        assert_eq!(stats[2].feasible_rate(), 1.0);
        assert_eq!(stats[2].offspring, 40);
    }

    #[test]
    fn table_is_independent_of_execution() {
        let a = run_campaign(&[Arm::Secure, Arm::Generic], 20, 7, Execution::Parallel);
        let b = run_campaign(&[Arm::Secure, Arm::Generic], 20, 7, Execution::Sequential);
        assert_eq!(results_table(&a), results_table(&b));
    }
}
