//! Problem instances and the contract-level game semantics.
//!
//! An instance is an undirected graph on `n` agents together with a
//! nonnegative effort cost per agent and an accuracy parameter `epsilon`.
//! The principal's reward for an active set `S` is `|E(S)| / C(n,2)`, and
//! the value of incentivizing `S` factors as `g(S) = L(S) * R(S)` where
//! `L` carries the transfer costs and `R` the reward. Costs are kept both
//! in raw units and rescaled by `C(n,2)`; all internal algorithms use the
//! rescaled scale, equilibrium checks use the raw scale.

use crate::agents::AgentSet;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Immutable problem instance.
#[derive(Clone, Debug)]
pub struct Instance {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<AgentSet>,
    raw_cost: Vec<f64>,
    cost: Vec<f64>,
    epsilon: f64,
}

/// On-disk JSON form of an instance.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    edges: Vec<(u32, u32)>,
    raw_costs: Vec<f64>,
    epsilon: f64,
}

/// Per-agent transfer fractions. Entries may be `f64::INFINITY` for agents
/// that cannot be incentivized (positive cost, zero marginal).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub t: Vec<f64>,
}

impl Contract {
    pub fn is_finite(&self) -> bool {
        self.t.iter().all(|x| x.is_finite())
    }
}

/// The `(L, R, g)` factorization of the principal's value for a set.
///
/// `l` and `g` are `f64::NEG_INFINITY` when some member has positive cost
/// and zero in-set degree (and, for `g`, the reward side is positive);
/// `g` is exactly `0.0` whenever `r == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub l: f64,
    pub r: f64,
    pub g: f64,
}

impl Instance {
    /// Validates and builds an instance. Edges must be 0-indexed with
    /// `u < v` and no duplicates; costs must be nonnegative and finite;
    /// `epsilon` must lie in `(0, 0.25]`.
    pub fn new(
        n: usize,
        edges: Vec<(u32, u32)>,
        raw_costs: Vec<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInstance(format!("field n: need n >= 2, got {n}")));
        }
        if raw_costs.len() != n {
            return Err(Error::InvalidInstance(format!(
                "field raw_costs: expected {n} entries, got {}",
                raw_costs.len()
            )));
        }
        for (i, &c) in raw_costs.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "field raw_costs[{i}]: must be finite and >= 0, got {c}"
                )));
            }
        }
        if !(epsilon > 0.0 && epsilon <= 0.25) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        let mut adj = vec![AgentSet::empty(n); n];
        let mut seen = std::collections::HashSet::new();
        for (idx, &(u, v)) in edges.iter().enumerate() {
            let (u, v) = (u as usize, v as usize);
            if u >= n || v >= n {
                return Err(Error::InvalidInstance(format!(
                    "field edges[{idx}]: endpoint out of range 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidInstance(format!(
                    "field edges[{idx}]: self-loop at {u}"
                )));
            }
            if u > v {
                return Err(Error::InvalidInstance(format!(
                    "field edges[{idx}]: endpoints must satisfy u < v, got ({u},{v})"
                )));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidInstance(format!(
                    "field edges[{idx}]: duplicate edge ({u},{v})"
                )));
            }
            adj[u].insert(v);
            adj[v].insert(u);
        }
        let max_value = (n * (n - 1) / 2) as f64;
        let cost = raw_costs.iter().map(|c| c * max_value).collect();
        Ok(Instance {
            n,
            edges,
            adj,
            raw_cost: raw_costs,
            cost,
            epsilon,
        })
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| {
            Error::InstanceFile(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        Self::new(file.n, file.edges, file.raw_costs, file.epsilon)
    }

    pub fn to_json_string(&self) -> String {
        let file = InstanceFile {
            n: self.n,
            edges: self.edges.clone(),
            raw_costs: self.raw_cost.clone(),
            epsilon: self.epsilon,
        };
        serde_json::to_string_pretty(&file).expect("instance serialization")
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Returns a copy with a different accuracy parameter.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.n, self.edges.clone(), self.raw_cost.clone(), epsilon)
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// `C(n,2)`, the normalizer of the reward function.
    pub fn max_value(&self) -> u64 {
        (self.n as u64) * (self.n as u64 - 1) / 2
    }

    /// Raw (unscaled) cost of agent `v`.
    pub fn raw_cost(&self, v: usize) -> f64 {
        self.raw_cost[v]
    }

    /// Rescaled cost `c_v * C(n,2)`.
    pub fn cost(&self, v: usize) -> f64 {
        self.cost[v]
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    /// Neighborhood of `v` as a bitset (never contains `v`).
    pub fn neighbors(&self, v: usize) -> &AgentSet {
        &self.adj[v]
    }

    /// Degree of `v` in the whole graph.
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// `|E(S)|`: number of edges with both endpoints in `S`.
    pub fn edges_within(&self, s: &AgentSet) -> u64 {
        let total: u64 = s
            .iter()
            .map(|v| self.adj[v].intersection_count(s) as u64)
            .sum();
        total / 2
    }

    /// `deg_S(v) = |N(v) ∩ S|`; `v` itself never counts, whether or not it
    /// belongs to `S`.
    pub fn degree_in(&self, v: usize, s: &AgentSet) -> usize {
        self.adj[v].intersection_count(s)
    }

    /// Reward `f(S) = |E(S)| / C(n,2)`.
    pub fn reward(&self, s: &AgentSet) -> f64 {
        self.edges_within(s) as f64 / self.max_value() as f64
    }

    /// Marginal value of `v` with respect to `S`: `deg_{S∖{v}}(v) / C(n,2)`.
    /// For `v ∈ S` this equals `f(S) - f(S∖{v})`, for `v ∉ S` it equals
    /// `f(S∪{v}) - f(S)`.
    pub fn marginal(&self, v: usize, s: &AgentSet) -> f64 {
        self.degree_in(v, s) as f64 / self.max_value() as f64
    }

    /// Evaluates `L`, `R`, and `g` for a set, encoding degenerate members
    /// as described on [`Evaluation`].
    pub fn evaluate(&self, s: &AgentSet) -> Evaluation {
        let edges = self.edges_within(s);
        let r = edges as f64 / self.max_value() as f64;
        let mut l = 1.0;
        let mut degenerate = false;
        for v in s.iter() {
            let c = self.cost[v];
            if c == 0.0 {
                continue;
            }
            let d = self.degree_in(v, s);
            if d == 0 {
                degenerate = true;
                break;
            }
            l -= c / d as f64;
        }
        if degenerate {
            let g = if edges == 0 { 0.0 } else { f64::NEG_INFINITY };
            return Evaluation {
                l: f64::NEG_INFINITY,
                r,
                g,
            };
        }
        let g = if edges == 0 { 0.0 } else { l * r };
        Evaluation { l, r, g }
    }

    /// The transfer vector that incentivizes exactly `S` at minimum cost:
    /// `t_v = c_v / deg_S(v)` in rescaled units for `v ∈ S` (0 when the cost
    /// is 0, `+inf` when the cost is positive but the degree is 0), and 0
    /// outside `S`.
    pub fn optimal_contract_for(&self, s: &AgentSet) -> Contract {
        let mut t = vec![0.0; self.n];
        for v in s.iter() {
            let c = self.cost[v];
            if c == 0.0 {
                continue;
            }
            let d = self.degree_in(v, s);
            t[v] = if d == 0 { f64::INFINITY } else { c / d as f64 };
        }
        Contract { t }
    }

    /// Principal's expected utility `f(S) * (1 - Σ_v t_v)` under contract `t`
    /// when the agents in `S` are active.
    pub fn principal_utility(&self, contract: &Contract, s: &AgentSet) -> f64 {
        let total: f64 = contract.t.iter().sum();
        self.reward(s) * (1.0 - total)
    }

    /// Whether `S` is a pure Nash equilibrium under `t`: no member profits
    /// from dropping out and no outsider from joining. Comparisons carry a
    /// `1e-12`-relative tolerance so that contracts computed in floating
    /// point sit on the equilibrium boundary without spurious rejections.
    pub fn is_pure_nash(&self, contract: &Contract, s: &AgentSet) -> bool {
        let f_s = self.reward(s);
        for v in 0..self.n {
            let t = contract.t[v];
            let c = self.raw_cost[v];
            let mut other = s.clone();
            if s.contains(v) {
                other.remove(v);
                let lhs = f_s * t - c;
                let rhs = self.reward(&other) * t;
                if lhs < rhs - nash_tol(lhs, rhs) {
                    return false;
                }
            } else {
                other.insert(v);
                let lhs = f_s * t;
                let rhs = self.reward(&other) * t - c;
                if lhs < rhs - nash_tol(lhs, rhs) {
                    return false;
                }
            }
        }
        true
    }
}

fn nash_tol(a: f64, b: f64) -> f64 {
    1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// K3 with raw cost 0.1 per agent (rescaled cost 0.3).
    pub(crate) fn k3() -> Instance {
        Instance::new(3, vec![(0, 1), (0, 2), (1, 2)], vec![0.1; 3], 0.1).unwrap()
    }

    #[test]
    fn validation_diagnostics() {
        let err = Instance::new(3, vec![(1, 1)], vec![0.0; 3], 0.1).unwrap_err();
        assert!(err.to_string().contains("edges[0]"));
        let err = Instance::new(3, vec![(2, 1)], vec![0.0; 3], 0.1).unwrap_err();
        assert!(err.to_string().contains("u < v"));
        let err = Instance::new(3, vec![(0, 1), (0, 1)], vec![0.0; 3], 0.1).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = Instance::new(3, vec![], vec![0.0, -1.0, 0.0], 0.1).unwrap_err();
        assert!(err.to_string().contains("raw_costs[1]"));
        assert!(Instance::new(3, vec![], vec![0.0; 3], 0.3).is_err());
        assert!(Instance::new(1, vec![], vec![0.0], 0.1).is_err());
    }

    #[test]
    fn rescaled_costs_stored_exactly() {
        let inst = k3();
        for v in 0..3 {
            assert_eq!(inst.cost(v), 0.1 * 3.0);
        }
    }

    #[test]
    fn edges_within_examples() {
        let inst = k3();
        assert_eq!(inst.edges_within(&AgentSet::full(3)), 3);
        assert_eq!(inst.edges_within(&AgentSet::empty(3)), 0);
        // P3 path 0-1-2, S = {0,2}: enumerating edges by hand gives 0.
        let p3 = Instance::new(3, vec![(0, 1), (1, 2)], vec![0.0; 3], 0.1).unwrap();
        assert_eq!(p3.edges_within(&AgentSet::from_members(3, &[0, 2])), 0);
    }

    #[test]
    fn degree_in_examples() {
        let inst = k3();
        assert_eq!(inst.degree_in(0, &AgentSet::full(3)), 2);
        assert_eq!(inst.degree_in(0, &AgentSet::empty(3)), 0);
        // Star center 0 with leaves 1,2,3; counting by hand: deg_{1,3}(0) = 2.
        let star =
            Instance::new(4, vec![(0, 1), (0, 2), (0, 3)], vec![0.0; 4], 0.1).unwrap();
        assert_eq!(star.degree_in(0, &AgentSet::from_members(4, &[1, 3])), 2);
    }

    #[test]
    fn reward_and_marginal_examples() {
        let inst = k3();
        assert_eq!(inst.reward(&AgentSet::full(3)), 1.0);
        // 2 new edges over C(3,2) = 3.
        assert_eq!(inst.marginal(0, &AgentSet::from_members(3, &[1, 2])), 2.0 / 3.0);
        assert_eq!(inst.marginal(0, &AgentSet::empty(3)), 0.0);
    }

    #[test]
    fn evaluate_examples() {
        let inst = k3();
        let full = inst.evaluate(&AgentSet::full(3));
        assert!((full.l - 0.55).abs() < 1e-15);
        assert_eq!(full.r, 1.0);
        assert!((full.g - 0.55).abs() < 1e-15);

        let pair = inst.evaluate(&AgentSet::from_members(3, &[0, 1]));
        assert!((pair.l - 0.4).abs() < 1e-15);
        assert!((pair.r - 1.0 / 3.0).abs() < 1e-15);
        assert!((pair.g - 0.4 / 3.0).abs() < 1e-15);

        let empty = inst.evaluate(&AgentSet::empty(3));
        assert_eq!((empty.l, empty.r, empty.g), (1.0, 0.0, 0.0));
    }

    #[test]
    fn evaluate_degenerate_member() {
        // Agent 2 is isolated with positive cost: L = -inf; g depends on R.
        let inst = Instance::new(3, vec![(0, 1)], vec![0.1; 3], 0.1).unwrap();
        let with_iso = inst.evaluate(&AgentSet::full(3));
        assert_eq!(with_iso.l, f64::NEG_INFINITY);
        assert_eq!(with_iso.g, f64::NEG_INFINITY);
        let only_iso = inst.evaluate(&AgentSet::from_members(3, &[2]));
        assert_eq!(only_iso.l, f64::NEG_INFINITY);
        assert_eq!(only_iso.g, 0.0); // R = 0 forces g = 0
    }

    #[test]
    fn optimal_contract_examples() {
        let inst = k3();
        let t = inst.optimal_contract_for(&AgentSet::full(3));
        for v in 0..3 {
            assert!((t.t[v] - 0.15).abs() < 1e-15);
        }
        let t0 = inst.optimal_contract_for(&AgentSet::empty(3));
        assert_eq!(t0.t, vec![0.0; 3]);
        // Zero-cost member keeps a zero transfer even at degree 0.
        let zc = Instance::new(3, vec![(0, 1)], vec![0.0, 0.0, 0.0], 0.1).unwrap();
        let t2 = zc.optimal_contract_for(&AgentSet::from_members(3, &[2]));
        assert_eq!(t2.t[2], 0.0);
        // Positive cost at degree 0 flags +inf.
        let pc = Instance::new(3, vec![(0, 1)], vec![0.0, 0.0, 0.5], 0.1).unwrap();
        let t3 = pc.optimal_contract_for(&AgentSet::full(3));
        assert_eq!(t3.t[2], f64::INFINITY);
        assert!(!t3.is_finite());
    }

    #[test]
    fn principal_utility_examples() {
        let inst = k3();
        let full = AgentSet::full(3);
        let t = inst.optimal_contract_for(&full);
        let u = inst.principal_utility(&t, &full);
        assert!((u - 0.55).abs() < 1e-15);
        let zero = Contract { t: vec![0.0; 3] };
        assert_eq!(inst.principal_utility(&zero, &AgentSet::empty(3)), 0.0);
        let unit = Contract {
            t: vec![0.5, 0.25, 0.25],
        };
        assert_eq!(inst.principal_utility(&unit, &full), 0.0);
    }

    #[test]
    fn pure_nash_examples() {
        let inst = k3();
        let full = AgentSet::full(3);
        let t = inst.optimal_contract_for(&full);
        assert!(inst.is_pure_nash(&t, &full));
        let zero = Contract { t: vec![0.0; 3] };
        assert!(inst.is_pure_nash(&zero, &AgentSet::empty(3)));
        assert!(!inst.is_pure_nash(&zero, &full));
    }

    #[test]
    fn json_round_trip() {
        let inst = k3();
        let text = inst.to_json_string();
        let back = Instance::from_json_str(&text).unwrap();
        assert_eq!(back.n(), 3);
        assert_eq!(back.edges(), inst.edges());
        assert_eq!(back.epsilon(), inst.epsilon());
        assert!(Instance::from_json_str("{\"n\": 2").is_err());
    }
}
