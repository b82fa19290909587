//! Recorded random decisions.
//!
//! Every randomized operator draws through a [`Decider`], which labels each
//! draw with a site string (for example `cp.swap:22`) and logs it. A logged
//! [`DecisionTrace`] can be replayed strictly, or used as a set of forced
//! decisions that are looked up by site label, with the live generator
//! filling in whatever the trace does not mention.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("trace diverged at decision {index}: {msg}")]
    Divergence { index: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub site: String,
    pub value: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Record,
    Replay,
    Forced,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecisionTrace {
    pub decisions: Vec<Decision>,
}

impl DecisionTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, site: impl Into<String>, value: u64) {
        self.decisions.push(Decision { site: site.into(), value });
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut trace = Self::new();
        for (i, l) in text.lines().enumerate() {
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = l.split_whitespace().collect();
            let bad = |msg: &str| TraceError::Parse { line: i + 1, msg: msg.to_string() };
            if parts.len() != 3 || parts[0] != "decision" {
                return Err(bad("expected 'decision <site-label> <value>'"));
            }
            let value = parts[2].parse().map_err(|_| bad("value is not a non-negative integer"))?;
            trace.push(parts[1], value);
        }
        Ok(trace)
    }
}

impl fmt::Display for DecisionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decisions {
            writeln!(f, "decision {} {}", d.site, d.value)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Source {
    Live,
    Replay { script: Vec<Decision>, pos: usize },
    Forced { by_site: BTreeMap<String, VecDeque<u64>> },
}

/// Source of every random decision in a crossover run.
#[derive(Debug, Clone)]
pub struct Decider {
    rng: ChaCha8Rng,
    source: Source,
    log: DecisionTrace,
    divergence: Option<TraceError>,
}

impl Decider {
    pub fn from_seed(seed: u64) -> Self {
        Self::from_rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn from_rng(rng: ChaCha8Rng) -> Self {
        Self { rng, source: Source::Live, log: DecisionTrace::new(), divergence: None }
    }

    /// Consumes `trace` in order; any mismatch in site label or value range
    /// is reported by [`finish`](Self::finish).
    pub fn replay(trace: &DecisionTrace) -> Self {
        let mut d = Self::from_seed(0);
        d.source = Source::Replay { script: trace.decisions.clone(), pos: 0 };
        d
    }

    /// Uses `trace` entries wherever a site label matches, in order per
    /// label, and the seeded generator everywhere else.
    pub fn forced(trace: &DecisionTrace, seed: u64) -> Self {
        let mut by_site: BTreeMap<String, VecDeque<u64>> = BTreeMap::new();
        for d in &trace.decisions {
            by_site.entry(d.site.clone()).or_default().push_back(d.value);
        }
        let mut d = Self::from_seed(seed);
        d.source = Source::Forced { by_site };
        d
    }

    pub fn mode(&self) -> TraceMode {
        match self.source {
            Source::Live => TraceMode::Record,
            Source::Replay { .. } => TraceMode::Replay,
            Source::Forced { .. } => TraceMode::Forced,
        }
    }

    pub fn log(&self) -> &DecisionTrace {
        &self.log
    }

    /// The decisions actually taken, or the first replay divergence.
    pub fn finish(self) -> Result<DecisionTrace, TraceError> {
        match self.divergence {
            Some(e) => Err(e),
            None => Ok(self.log),
        }
    }

    fn scripted(&mut self, site: &str) -> Option<u64> {
        let index = self.log.len();
        match &mut self.source {
            Source::Live => None,
            Source::Replay { script, pos } => match script.get(*pos) {
                Some(d) if d.site == site => {
                    *pos += 1;
                    Some(d.value)
                }
                Some(d) => {
                    let msg = format!("expected site '{}', operator asked for '{site}'", d.site);
                    self.diverge(index, msg);
                    None
                }
                None => {
                    self.diverge(index, format!("trace exhausted at site '{site}'"));
                    None
                }
            },
            Source::Forced { by_site } => by_site.get_mut(site).and_then(VecDeque::pop_front),
        }
    }

    fn diverge(&mut self, index: usize, msg: String) {
        if self.divergence.is_none() {
            self.divergence = Some(TraceError::Divergence { index, msg });
        }
    }

    fn decide(&mut self, site: &str, valid: impl Fn(u64) -> bool, live: impl FnOnce(&mut ChaCha8Rng) -> u64) -> u64 {
        let value = match self.scripted(site) {
            Some(v) if valid(v) => v,
            Some(v) => {
                let index = self.log.len();
                self.diverge(index, format!("value {v} is not admissible at site '{site}'"));
                live(&mut self.rng)
            }
            None => live(&mut self.rng),
        };
        self.log.push(site, value);
        value
    }

    /// Bernoulli draw with success probability `p`.
    pub fn flip(&mut self, site: &str, p: f64) -> bool {
        let p = p.clamp(0.0, 1.0);
        self.decide(site, |v| v <= 1, |rng| rng.gen_bool(p) as u64) == 1
    }

    /// Uniform integer in `lo..=hi`; degenerate ranges are not logged.
    pub fn int_in(&mut self, site: &str, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        if lo >= hi {
            return lo;
        }
        self.decide(site, |v| (lo..=hi).contains(&v), |rng| rng.gen_range(lo..=hi))
    }

    /// Uniform choice among `candidates`, reported by value. Empty and
    /// single-element lists are not logged.
    pub fn pick(&mut self, site: &str, candidates: &[u64]) -> Option<u64> {
        match candidates {
            [] => None,
            [only] => Some(*only),
            _ => Some(self.decide(
                site,
                |v| candidates.contains(&v),
                |rng| candidates[rng.gen_range(0..candidates.len())],
            )),
        }
    }

    /// Index drawn with probability proportional to `weights`. Zero-weight
    /// indices are inadmissible; with at most one admissible index nothing
    /// is logged.
    pub fn weighted(&mut self, site: &str, weights: &[f64]) -> Option<u64> {
        let admissible: Vec<u64> = (0..weights.len() as u64).filter(|&i| weights[i as usize] > 0.0).collect();
        match admissible.as_slice() {
            [] => None,
            [only] => Some(*only),
            _ => {
                let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
                Some(self.decide(
                    site,
                    |v| admissible.contains(&v),
                    |rng| {
                        let mut r = rng.gen::<f64>() * total;
                        for &i in &admissible {
                            r -= weights[i as usize];
                            if r < 0.0 {
                                return i;
                            }
                        }
                        *admissible.last().unwrap()
                    },
                ))
            }
        }
    }

    /// Raw access for draws that are not part of a crossover trace.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// SplitMix64 finalizer; used to derive independent stream seeds.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut z: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        z ^= p;
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(d: &mut Decider) -> Vec<u64> {
        let mut out = Vec::new();
        for i in 0..20 {
            out.push(d.flip(&format!("a:{i}"), 0.5) as u64);
            out.push(d.int_in(&format!("b:{i}"), 2, 9));
            out.push(d.pick(&format!("c:{i}"), &[4, 8, 15]).unwrap());
        }
        out
    }

    #[test]
    fn replay_reproduces_recording() {
        let mut d = Decider::from_seed(11);
        let first = run(&mut d);
        let trace = d.finish().unwrap();
        let text = trace.to_string();
        let parsed = DecisionTrace::parse(&text).unwrap();
        assert_eq!(parsed, trace);
        let mut r = Decider::replay(&parsed);
        assert_eq!(run(&mut r), first);
        assert_eq!(r.finish().unwrap(), trace);
    }

    #[test]
    fn replay_reports_divergence() {
        let mut trace = DecisionTrace::new();
        trace.push("other", 1);
        let mut r = Decider::replay(&trace);
        r.flip("a:0", 0.5);
        assert!(matches!(r.finish(), Err(TraceError::Divergence { index: 0, .. })));
        let mut r = Decider::replay(&DecisionTrace::new());
        r.flip("a:0", 0.5);
        assert!(r.finish().is_err());
    }

    #[test]
    fn forced_entries_match_by_label_then_fall_back() {
        let mut trace = DecisionTrace::new();
        trace.push("c:3", 15);
        trace.push("a:1", 1);
        trace.push("a:1", 0);
        let mut d = Decider::forced(&trace, 5);
        assert_eq!(d.pick("c:3", &[4, 8, 15]), Some(15));
        assert!(d.flip("a:1", 0.0));
        assert!(!d.flip("a:1", 1.0));
        // exhausted: the live generator decides
        assert!(d.flip("a:1", 1.0));
        assert!(d.finish().is_ok());
    }

    #[test]
    fn forced_inadmissible_value_is_reported() {
        let mut trace = DecisionTrace::new();
        trace.push("c", 99);
        let mut d = Decider::forced(&trace, 5);
        assert!(d.pick("c", &[1, 2]).is_some());
        assert!(d.finish().is_err());
    }

    #[test]
    fn malformed_trace_lines() {
        assert!(DecisionTrace::parse("decision a\n").is_err());
        assert!(DecisionTrace::parse("choice a 1\n").is_err());
        assert!(DecisionTrace::parse("decision a -1\n").is_err());
        assert!(DecisionTrace::parse("# comment\n\ndecision a 1\n").unwrap().len() == 1);
    }

    #[test]
    fn mixed_seeds_differ() {
        assert_ne!(mix_seed(&[1, 0, 0]), mix_seed(&[1, 0, 1]));
        assert_eq!(mix_seed(&[7, 3]), mix_seed(&[7, 3]));
    }
}
