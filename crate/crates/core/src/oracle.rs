//! Exact references: exhaustive maximization of `g`, dense-kernel
//! extraction, and the total-cost budget check.

use crate::agents::AgentSet;
use crate::error::{Error, Result};
use crate::instance::Instance;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Hard ceiling for exhaustive search; beyond this the mask arithmetic
/// would still work (up to 63) but runtimes become unreasonable.
pub const DEFAULT_BRUTE_FORCE_BOUND: usize = 22;

/// Result of an exhaustive scan over all subsets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_set: AgentSet,
    pub opt: f64,
    pub evaluations: u64,
}

#[derive(Clone, Copy)]
struct Candidate {
    g: f64,
    mask: u64,
}

/// Lexicographic comparison of two masks viewed as sorted member lists.
fn lex_less(mut a: u64, mut b: u64) -> bool {
    while a != 0 && b != 0 {
        let ta = a.trailing_zeros();
        let tb = b.trailing_zeros();
        if ta != tb {
            return ta < tb;
        }
        a &= a - 1;
        b &= b - 1;
    }
    // A strict prefix sorts first, but prefixes cannot tie here because
    // candidates with equal cardinality are compared.
    a == 0 && b != 0
}

/// True when `a` beats `b`: higher `g`, then fewer members, then
/// lexicographically smaller membership.
fn better(a: Candidate, b: Candidate) -> bool {
    if a.g != b.g {
        return a.g > b.g;
    }
    let (ca, cb) = (a.mask.count_ones(), b.mask.count_ones());
    if ca != cb {
        return ca < cb;
    }
    lex_less(a.mask, b.mask)
}

fn g_of_mask(adj: &[u64], cost: &[f64], max_value: f64, mask: u64) -> f64 {
    let mut l = 1.0;
    let mut deg_total: u64 = 0;
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (adj[v] & mask).count_ones() as u64;
        deg_total += d;
        let c = cost[v];
        if c > 0.0 {
            if d == 0 {
                // Degenerate member: g is 0 on edgeless sets, -inf otherwise.
                return if mask_has_edge(adj, mask) {
                    f64::NEG_INFINITY
                } else {
                    0.0
                };
            }
            l -= c / d as f64;
        }
    }
    let edges = deg_total / 2;
    if edges == 0 {
        0.0
    } else {
        l * (edges as f64 / max_value)
    }
}

fn mask_has_edge(adj: &[u64], mask: u64) -> bool {
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if adj[v] & mask != 0 {
            return true;
        }
    }
    false
}

/// Scans all `2^n` subsets and returns the maximizer of `g`, breaking ties
/// toward smaller cardinality and then lexicographic membership. Rejects
/// `n` above `bound`.
pub fn brute_force_opt_bounded(inst: &Instance, bound: usize) -> Result<OracleResult> {
    let n = inst.n();
    if n > bound {
        return Err(Error::BruteForceTooLarge { n, bound });
    }
    let adj: Vec<u64> = (0..n).map(|v| inst.neighbors(v).to_mask()).collect();
    let cost: Vec<f64> = (0..n).map(|v| inst.cost(v)).collect();
    let max_value = inst.max_value() as f64;
    let total: u64 = 1u64 << n;

    let chunk: u64 = 1 << 16;
    let n_chunks = total.div_ceil(chunk);
    let best = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * chunk;
            let hi = (lo + chunk).min(total);
            let mut best = Candidate { g: 0.0, mask: 0 };
            for mask in lo..hi {
                let g = g_of_mask(&adj, &cost, max_value, mask);
                let cand = Candidate { g, mask };
                if better(cand, best) {
                    best = cand;
                }
            }
            best
        })
        .reduce(
            || Candidate { g: 0.0, mask: 0 },
            |a, b| if better(b, a) { b } else { a },
        );

    Ok(OracleResult {
        best_set: AgentSet::from_mask(n, best.mask),
        opt: best.g,
        evaluations: total,
    })
}

pub fn brute_force_opt(inst: &Instance) -> Result<OracleResult> {
    brute_force_opt_bounded(inst, DEFAULT_BRUTE_FORCE_BOUND)
}

/// Repeatedly deletes from `S` any agent whose in-set degree is at most
/// `epsilon * n / 3`, until no such agent remains. The survivors all have
/// in-set degree strictly above the threshold; the result may be empty.
pub fn extract_kernel(inst: &Instance, s: &AgentSet) -> AgentSet {
    let threshold = inst.epsilon() * inst.n() as f64 / 3.0;
    let mut kernel = s.clone();
    let mut deg: Vec<usize> = (0..inst.n()).map(|v| inst.degree_in(v, &kernel)).collect();
    loop {
        let Some(victim) = kernel
            .iter()
            .find(|&v| (deg[v] as f64) <= threshold) else {
            break;
        };
        kernel.remove(victim);
        for u in inst.neighbors(victim).iter() {
            if kernel.contains(u) {
                deg[u] -= 1;
            }
        }
    }
    kernel
}

/// Observation-level predicate: the total rescaled cost of `S` is at most
/// `n`, provided `L(S*) > 0` and `S ⊆ S*`. Precondition violations are
/// reported as errors, not as `false`.
pub fn check_cost_budget(inst: &Instance, s_star: &AgentSet, s: &AgentSet) -> Result<bool> {
    let eval = inst.evaluate(s_star);
    if !(eval.l > 0.0) {
        return Err(Error::CostBudgetPrecondition(format!(
            "L(S*) = {} is not positive",
            eval.l
        )));
    }
    if !s.is_subset_of(s_star) {
        return Err(Error::CostBudgetPrecondition(
            "S is not a subset of S*".into(),
        ));
    }
    let total: f64 = s.iter().map(|v| inst.cost(v)).sum();
    Ok(total <= inst.n() as f64)
}
