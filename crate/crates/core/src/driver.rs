//! End-to-end orchestration: estimate guesses, edge-count enumeration,
//! LP solve, preprocessing, repeated rounding, and best-of selection.

use crate::agents::AgentSet;
use crate::error::{Error, Result};
use crate::estimator::{build_partition, clairvoyant_estimates, oblivious_estimates, EstimateFamily};
use crate::instance::Instance;
use crate::lp::{build_lp, fractional_coring, randomized_round, solve_lp, verify_relaxed, LpOutcome};
use crate::oracle::brute_force_opt_bounded;
use crate::params::{derive_params, derive_params_unchecked, PtasParams, MIN_PTAS_N};
use crate::pseudocore::{cheap_set, iterated_pseudo_coring};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::params::repetition_count;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SamplerMode {
    /// Estimates synthesized from a hidden set with a fixed relative noise.
    Clairvoyant { noise: f64 },
    /// Oblivious sample-and-enumerate with `2^r` guesses.
    Oblivious { r: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriverConfig {
    pub mode: SamplerMode,
    /// Hidden set for clairvoyant runs where exhaustive search is out of
    /// reach; members must lie in `0..n`.
    pub hidden_set: Option<Vec<usize>>,
    /// Explicit list of edge-count guesses; `None` enumerates the default
    /// range (full up to n = 300, stride-sampled beyond).
    pub e_guess_range: Option<Vec<u64>>,
    /// Cap on the number of sampler guesses examined.
    pub guess_budget: u64,
    /// Rounding trials per (guess, edge-count) cell; defaults to the
    /// derived repetition count.
    pub trials_per_guess: Option<u32>,
    pub master_seed: u64,
    /// Instances at or below this size (and every instance under the
    /// PTAS floor of 16) go through exhaustive search.
    pub brute_force_bound: usize,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            mode: SamplerMode::Clairvoyant { noise: 0.0 },
            hidden_set: None,
            e_guess_range: None,
            guess_budget: 4096,
            trials_per_guess: None,
            master_seed: 0,
            brute_force_bound: crate::oracle::DEFAULT_BRUTE_FORCE_BOUND,
        }
    }
}

/// Outcome of one (sampler guess, edge-count guess) cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GuessRecord {
    pub guess_index: u64,
    pub e_guess: u64,
    pub lp_status: String,
    pub opt_lp: Option<f64>,
    pub trials: u32,
    pub best_trial_g: Option<f64>,
    pub best_trial_set: Option<Vec<usize>>,
    /// Whether the hard relaxed-feasibility conditions held.
    pub relaxed_ok: Option<bool>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    /// "exact" for the small-instance route, "ptas" otherwise.
    pub mode: String,
    pub sampler: String,
    pub n: usize,
    pub epsilon: f64,
    pub master_seed: u64,
    pub best_set: Vec<usize>,
    pub best_g: f64,
    pub baseline_empty_g: f64,
    /// Value of the cheap set together with its neighbors.
    pub baseline_cheap_g: f64,
    pub records: Vec<GuessRecord>,
    pub wall_clock_ms: u64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// JSON with the wall-clock field zeroed; byte-identical across runs
    /// with the same inputs.
    pub fn to_canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_clock_ms = 0;
        serde_json::to_string_pretty(&clone).expect("report serialization")
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic stream seed for one cell, stable under changes to the
/// enumeration ranges.
fn cell_seed(master: u64, guess_index: u64, e_guess: u64, trial: u64) -> u64 {
    splitmix(splitmix(splitmix(splitmix(master) ^ guess_index) ^ e_guess) ^ trial)
}

#[derive(Clone)]
struct Candidate {
    g: f64,
    set: AgentSet,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    if a.g != b.g {
        return a.g > b.g;
    }
    a.set.cmp_card_lex(&b.set) == std::cmp::Ordering::Less
}

fn default_e_guesses(inst: &Instance) -> Vec<u64> {
    let max_e = inst.max_value();
    let full_cap: u64 = 300 * 299 / 2;
    let stride = max_e.div_ceil(full_cap).max(1);
    let mut out: Vec<u64> = (0..=max_e).step_by(stride as usize).collect();
    if *out.last().unwrap() != max_e {
        out.push(max_e);
    }
    out
}

fn cheap_baseline(inst: &Instance, params: &PtasParams) -> AgentSet {
    let cheap = cheap_set(inst, params);
    let mut set = cheap.clone();
    for v in cheap.iter() {
        set.union_with(inst.neighbors(v));
    }
    set
}

fn exact_route(inst: &Instance, config: &DriverConfig, start: std::time::Instant) -> Result<RunReport> {
    let oracle = brute_force_opt_bounded(inst, config.brute_force_bound.max(MIN_PTAS_N - 1))?;
    let baseline_cheap_g = derive_params_unchecked(inst.n(), inst.epsilon())
        .map(|p| inst.evaluate(&cheap_baseline(inst, &p)).g)
        .unwrap_or(0.0);
    Ok(RunReport {
        mode: "exact".into(),
        sampler: sampler_name(&config.mode),
        n: inst.n(),
        epsilon: inst.epsilon(),
        master_seed: config.master_seed,
        best_set: oracle.best_set.members(),
        best_g: oracle.opt,
        baseline_empty_g: 0.0,
        baseline_cheap_g,
        records: Vec::new(),
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}

fn sampler_name(mode: &SamplerMode) -> String {
    match mode {
        SamplerMode::Clairvoyant { .. } => "clairvoyant".into(),
        SamplerMode::Oblivious { .. } => "oblivious".into(),
    }
}

fn estimate_family(
    inst: &Instance,
    params: &PtasParams,
    config: &DriverConfig,
) -> Result<EstimateFamily> {
    match &config.mode {
        SamplerMode::Oblivious { r } => {
            oblivious_estimates(inst, *r, splitmix(config.master_seed ^ 0x5a5a))
        }
        SamplerMode::Clairvoyant { noise } => {
            let s_star = match &config.hidden_set {
                Some(members) => {
                    if let Some(&bad) = members.iter().find(|&&v| v >= inst.n()) {
                        return Err(Error::Driver(format!(
                            "hidden set member {bad} outside 0..{}",
                            inst.n()
                        )));
                    }
                    AgentSet::from_members(inst.n(), members)
                }
                None => {
                    if inst.n() > config.brute_force_bound {
                        return Err(Error::Driver(format!(
                            "clairvoyant mode at n = {} needs an explicit hidden set \
                             (brute force bound is {})",
                            inst.n(),
                            config.brute_force_bound
                        )));
                    }
                    brute_force_opt_bounded(inst, config.brute_force_bound)?.best_set
                }
            };
            let (s_prime, _trace) = iterated_pseudo_coring(inst, &s_star, params);
            clairvoyant_estimates(inst, &s_prime, params, *noise)
        }
    }
}

/// Runs the full pipeline and returns the best candidate found, together
/// with per-cell records. Deterministic in `(instance, config)` up to the
/// wall-clock field; infeasible cells are recorded and skipped, never
/// errors.
pub fn run_ptas(inst: &Instance, config: &DriverConfig) -> Result<RunReport> {
    let start = std::time::Instant::now();
    if inst.n() < MIN_PTAS_N {
        return exact_route(inst, config, start);
    }
    let params = derive_params(inst.n(), inst.epsilon())?;
    let family = estimate_family(inst, &params, config)?;
    let guesses = family.num_guesses().min(config.guess_budget);
    let e_guesses = config
        .e_guess_range
        .clone()
        .unwrap_or_else(|| default_e_guesses(inst));
    for &e in &e_guesses {
        if e > inst.max_value() {
            return Err(Error::EGuessOutOfRange {
                guess: e,
                max: inst.max_value(),
            });
        }
    }
    let trials = config
        .trials_per_guess
        .unwrap_or(params.repetitions)
        .max(1);

    let grid: Vec<(u64, u64)> = (0..guesses)
        .flat_map(|gi| e_guesses.iter().map(move |&e| (gi, e)))
        .collect();

    let cells: Vec<(GuessRecord, Option<Candidate>)> = grid
        .par_iter()
        .map(|&(gi, e_guess)| run_cell(inst, &params, &family, config, gi, e_guess, trials))
        .collect::<Result<Vec<_>>>()?;

    let mut best = Candidate {
        g: 0.0,
        set: AgentSet::empty(inst.n()),
    };
    let baseline_empty_g = 0.0;
    let cheap_candidate = {
        let set = cheap_baseline(inst, &params);
        Candidate {
            g: inst.evaluate(&set).g,
            set,
        }
    };
    let baseline_cheap_g = cheap_candidate.g;
    if better(&cheap_candidate, &best) {
        best = cheap_candidate;
    }
    let mut records = Vec::with_capacity(cells.len());
    for (record, cand) in cells {
        if let Some(c) = cand {
            if better(&c, &best) {
                best = c;
            }
        }
        records.push(record);
    }

    Ok(RunReport {
        mode: "ptas".into(),
        sampler: sampler_name(&config.mode),
        n: inst.n(),
        epsilon: inst.epsilon(),
        master_seed: config.master_seed,
        best_set: best.set.members(),
        best_g: best.g,
        baseline_empty_g,
        baseline_cheap_g,
        records,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}

fn run_cell(
    inst: &Instance,
    params: &PtasParams,
    family: &EstimateFamily,
    config: &DriverConfig,
    guess_index: u64,
    e_guess: u64,
    trials: u32,
) -> Result<(GuessRecord, Option<Candidate>)> {
    let seed0 = cell_seed(config.master_seed, guess_index, e_guess, 0);
    let estimates = family.guess_vector(guess_index);
    let partition = build_partition(inst, params, &estimates, e_guess)?;
    let model = build_lp(inst, &partition, params);
    let solved = match solve_lp::<f64>(&model)? {
        LpOutcome::Infeasible => {
            return Ok((
                GuessRecord {
                    guess_index,
                    e_guess,
                    lp_status: "infeasible".into(),
                    opt_lp: None,
                    trials: 0,
                    best_trial_g: None,
                    best_trial_set: None,
                    relaxed_ok: None,
                    seed: seed0,
                },
                None,
            ));
        }
        LpOutcome::Optimal(sol) => sol,
    };

    let coring = fractional_coring(&solved.x, inst, &partition, params);
    let report = verify_relaxed(&coring, &solved.x, inst, &partition, params, 1e-6);

    let mut best: Option<Candidate> = None;
    for t in 0..trials {
        let seed = cell_seed(config.master_seed, guess_index, e_guess, t as u64);
        let set = randomized_round(&coring.x_star, inst, &partition, seed);
        let cand = Candidate {
            g: inst.evaluate(&set).g,
            set,
        };
        if best.as_ref().map_or(true, |b| better(&cand, b)) {
            best = Some(cand);
        }
    }

    let record = GuessRecord {
        guess_index,
        e_guess,
        lp_status: "optimal".into(),
        opt_lp: Some(solved.value),
        trials,
        best_trial_g: best.as_ref().map(|c| c.g),
        best_trial_set: best.as_ref().map(|c| c.set.members()),
        relaxed_ok: Some(report.hard_ok),
        seed: seed0,
    };
    Ok((record, best))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edgeless_instance_returns_empty() {
        let inst = Instance::new(20, vec![], vec![0.5; 20], 0.25).unwrap();
        let report = run_ptas(&inst, &DriverConfig::default()).unwrap();
        assert!(report.best_set.is_empty());
        assert_eq!(report.best_g, 0.0);
    }

    #[test]
    fn small_instances_route_to_brute_force() {
        let inst =
            Instance::new(5, vec![(0, 1), (0, 2), (1, 2)], vec![0.01; 5], 0.25).unwrap();
        let report = run_ptas(&inst, &DriverConfig::default()).unwrap();
        assert_eq!(report.mode, "exact");
        assert_eq!(report.best_set, vec![0, 1, 2]);
    }

    #[test]
    fn clairvoyant_large_n_requires_hidden_set() {
        let inst = Instance::new(30, vec![(0, 1)], vec![0.5; 30], 0.25).unwrap();
        let err = run_ptas(&inst, &DriverConfig::default()).unwrap_err();
        assert!(err.to_string().contains("hidden set"));
    }

    #[test]
    fn complete_graph_clairvoyant_matches_oracle() {
        // Complete graph on 20 agents, uniform raw cost, eps = 0.04: the
        // driver's best value must reach g(V) = 1 - 20 c C(20,2)/19 and
        // agree with exhaustive search.
        let n = 20u32;
        let raw = 0.0004; // rescaled cost 0.076, g(V) = 1 - 20*0.076/19 = 0.92
        let edges: Vec<(u32, u32)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        let inst = Instance::new(n as usize, edges, vec![raw; n as usize], 0.04).unwrap();
        let report = run_ptas(&inst, &DriverConfig::default()).unwrap();
        let full = AgentSet::full(20);
        let g_full = inst.evaluate(&full).g;
        let oracle = crate::oracle::brute_force_opt(&inst).unwrap();
        assert!(report.best_g >= g_full - 1e-12);
        assert!((report.best_g - oracle.opt).abs() <= 1e-12);
    }

    #[test]
    fn best_g_monotone_in_e_guess_range() {
        let n = 18u32;
        let edges: Vec<(u32, u32)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .filter(|(u, v)| (u + v) % 4 != 0)
            .collect();
        let inst = Instance::new(n as usize, edges, vec![0.0008; n as usize], 0.25).unwrap();
        let narrow = DriverConfig {
            e_guess_range: Some(vec![40, 60]),
            master_seed: 9,
            ..Default::default()
        };
        let wide = DriverConfig {
            e_guess_range: Some(vec![20, 40, 60, 80, 100]),
            master_seed: 9,
            ..Default::default()
        };
        let g1 = run_ptas(&inst, &narrow).unwrap().best_g;
        let g2 = run_ptas(&inst, &wide).unwrap().best_g;
        assert!(g2 >= g1 - 1e-15);
    }

    #[test]
    fn report_is_deterministic() {
        let n = 17u32;
        let edges: Vec<(u32, u32)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .filter(|(u, v)| (u * v) % 3 != 0)
            .collect();
        let inst = Instance::new(n as usize, edges, vec![0.001; n as usize], 0.25).unwrap();
        let config = DriverConfig {
            master_seed: 1234,
            ..Default::default()
        };
        let a = run_ptas(&inst, &config).unwrap().to_canonical_json();
        let b = run_ptas(&inst, &config).unwrap().to_canonical_json();
        assert_eq!(a, b);
    }

    #[test]
    fn repetition_reexport() {
        assert_eq!(repetition_count(100, 0.04).unwrap(), 3);
    }
}
