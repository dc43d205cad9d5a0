//! Degree estimation for the hidden structured set, and the agent
//! partition built from an estimate vector.
//!
//! Two estimate sources exist. The clairvoyant source synthesizes a single
//! accurate vector straight from the hidden set; it isolates downstream
//! logic from sampler noise in tests. The oblivious source draws a small
//! uniform sample of agents and enumerates all `2^r` ways the sample could
//! intersect the hidden set; one of the resulting guesses is accurate with
//! the usual sampling guarantees, without ever looking at the hidden set.

use crate::agents::AgentSet;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::params::PtasParams;
use crate::pseudocore::cheap_set;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Cap on the oblivious sample size; `2^r` guesses are enumerated.
pub const OBLIVIOUS_R_CAP: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMode {
    Clairvoyant,
    Oblivious,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum GuessSource {
    /// One explicit estimate vector.
    Single(Vec<f64>),
    /// Lazy family over all in-set markings of the drawn sample.
    /// `neighbor_masks[v]` has bit `i` set when `samples[i]` is adjacent
    /// to `v`; a guess index `j` marks sample `i` as hidden-set member
    /// when bit `i` of `j` is set.
    Sampled {
        r: usize,
        samples: Vec<usize>,
        neighbor_masks: Vec<u32>,
        scale: f64,
    },
}

/// A family of candidate degree-estimate vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateFamily {
    pub mode: EstimateMode,
    n: usize,
    source: GuessSource,
}

impl EstimateFamily {
    pub fn num_guesses(&self) -> u64 {
        match &self.source {
            GuessSource::Single(_) => 1,
            GuessSource::Sampled { r, .. } => 1u64 << r,
        }
    }

    /// Estimate of agent `v` under guess `j`.
    pub fn estimate(&self, j: u64, v: usize) -> f64 {
        match &self.source {
            GuessSource::Single(vec) => vec[v],
            GuessSource::Sampled {
                neighbor_masks,
                scale,
                ..
            } => *scale * (neighbor_masks[v] & j as u32).count_ones() as f64,
        }
    }

    /// Materializes guess `j` as a full vector.
    pub fn guess_vector(&self, j: u64) -> Vec<f64> {
        assert!(j < self.num_guesses(), "guess index out of range");
        (0..self.n).map(|v| self.estimate(j, v)).collect()
    }
}

/// A single guess with `hd_v = (1 + noise) * deg_hidden(v)`. Requires
/// `|noise| <= epsilon`, so the family satisfies the accuracy sandwich by
/// construction.
pub fn clairvoyant_estimates(
    inst: &Instance,
    s_hidden: &AgentSet,
    params: &PtasParams,
    noise: f64,
) -> Result<EstimateFamily> {
    if noise.abs() > params.epsilon {
        return Err(Error::NoiseOutOfRange(noise));
    }
    let vec = (0..inst.n())
        .map(|v| (1.0 + noise) * inst.degree_in(v, s_hidden) as f64)
        .collect();
    Ok(EstimateFamily {
        mode: EstimateMode::Clairvoyant,
        n: inst.n(),
        source: GuessSource::Single(vec),
    })
}

/// Draws `r` agents uniformly with replacement and returns the lazy family
/// of `2^r` guesses; guess `j` marks sample `i` as in-set when bit `i` of
/// `j` is set, estimating `hd_v = (n/r) * #{marked samples adjacent to v}`
/// counted with multiplicity. Deterministic in `seed`.
pub fn oblivious_estimates(inst: &Instance, r: usize, seed: u64) -> Result<EstimateFamily> {
    if r > OBLIVIOUS_R_CAP {
        return Err(Error::SamplerCapExceeded {
            r,
            cap: OBLIVIOUS_R_CAP,
        });
    }
    let n = inst.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<usize> = (0..r).map(|_| rng.gen_range(0..n)).collect();
    let neighbor_masks = (0..n)
        .map(|v| {
            let mut mask = 0u32;
            for (i, &u) in samples.iter().enumerate() {
                if inst.neighbors(v).contains(u) {
                    mask |= 1 << i;
                }
            }
            mask
        })
        .collect();
    let scale = if r == 0 { 0.0 } else { n as f64 / r as f64 };
    Ok(EstimateFamily {
        mode: EstimateMode::Oblivious,
        n,
        source: GuessSource::Sampled {
            r,
            samples,
            neighbor_masks,
            scale,
        },
    })
}

/// The partition of agents induced by one estimate vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Partition {
    /// High-estimate agents whose estimate clears their degree lower bound.
    pub a: AgentSet,
    /// Remaining candidates with middling degree bounds.
    pub b: AgentSet,
    /// Cheap agents, always included downstream.
    pub c: AgentSet,
    /// Agents excluded downstream.
    pub d: AgentSet,
    /// High-estimate agents (superset of `a`).
    pub h: AgentSet,
    /// Degree lower bounds `d_v`, defined for `v` outside `c` (0 elsewhere).
    pub d_lower: Vec<f64>,
    /// Estimates, kept only for members of `h` (0 elsewhere).
    pub hat_d: Vec<f64>,
    /// Guessed `|E(S')|`.
    pub e_guess: u64,
}

/// Classifies every agent from an estimate vector and an edge-count guess.
pub fn build_partition(
    inst: &Instance,
    params: &PtasParams,
    estimates: &[f64],
    e_guess: u64,
) -> Result<Partition> {
    let n = inst.n();
    if estimates.len() != n {
        return Err(Error::BadEstimates(format!(
            "expected {n} entries, got {}",
            estimates.len()
        )));
    }
    if let Some((v, &e)) = estimates
        .iter()
        .enumerate()
        .find(|(_, &e)| !e.is_finite() || e < 0.0)
    {
        return Err(Error::BadEstimates(format!(
            "estimate for agent {v} must be finite and nonnegative, got {e}"
        )));
    }
    if e_guess > inst.max_value() {
        return Err(Error::EGuessOutOfRange {
            guess: e_guess,
            max: inst.max_value(),
        });
    }

    let eps = params.epsilon;
    let sigma_n = params.sigma * n as f64;
    let c = cheap_set(inst, params);

    let mut h = AgentSet::empty(n);
    for v in 0..n {
        if !c.contains(v) && estimates[v] >= sigma_n * (1.0 - eps) {
            h.insert(v);
        }
    }

    let mut d_lower = vec![0.0; n];
    for v in 0..n {
        if !c.contains(v) {
            let from_core = (inst.cost(v) * params.beta + 0.25).sqrt() - 0.5;
            d_lower[v] = params.d_floor.max(from_core);
        }
    }

    let mut a = AgentSet::empty(n);
    let mut hat_d = vec![0.0; n];
    for v in h.iter() {
        hat_d[v] = estimates[v];
        if estimates[v] / (1.0 - eps) >= d_lower[v] {
            a.insert(v);
        }
    }

    let mut d = AgentSet::empty(n);
    for v in 0..n {
        let spill = h.contains(v) && !a.contains(v);
        let low_outside = !h.contains(v) && !c.contains(v) && d_lower[v] >= sigma_n;
        if spill || low_outside {
            d.insert(v);
        }
    }

    let mut b = AgentSet::empty(n);
    for v in 0..n {
        if !a.contains(v) && !c.contains(v) && !d.contains(v) {
            b.insert(v);
        }
    }

    Ok(Partition {
        a,
        b,
        c,
        d,
        h,
        d_lower,
        hat_d,
        e_guess,
    })
}

impl Partition {
    /// Union of the four classes must cover `0..n` disjointly.
    pub fn is_disjoint_cover(&self) -> bool {
        let n = self.a.universe();
        (0..n).all(|v| {
            [
                self.a.contains(v),
                self.b.contains(v),
                self.c.contains(v),
                self.d.contains(v),
            ]
            .iter()
            .filter(|&&x| x)
            .count()
                == 1
        })
    }
}
