//! Seeded instance generators for experiments and tests.

use crate::error::{Error, Result};
use crate::instance::Instance;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum GraphModel {
    Gnp { p: f64 },
    PlantedDense { k: usize, p_in: f64, p_out: f64 },
    Complete,
    Star,
    FromFile { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "cost")]
pub enum CostModel {
    /// Independent uniform draws from `[0, c]`.
    Uniform { c: f64 },
    Identical { c: f64 },
    /// Each agent takes `c_hi` with probability `frac`, else `c_lo`.
    Bimodal { c_lo: f64, c_hi: f64, frac: f64 },
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub model: GraphModel,
    pub n: usize,
    pub cost_model: CostModel,
    pub seed: u64,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Generator(format!(
            "field {name}: probability must lie in [0,1], got {p}"
        )));
    }
    Ok(())
}

/// Builds a deterministic instance from the spec and an accuracy
/// parameter. Edges are drawn before costs from a single seeded stream.
pub fn generate(spec: &GeneratorSpec, epsilon: f64) -> Result<Instance> {
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let edges: Vec<(u32, u32)> = match &spec.model {
        GraphModel::FromFile { path } => {
            let inst = Instance::load_json(path)?;
            return inst.with_epsilon(epsilon);
        }
        GraphModel::Complete => (0..n as u32)
            .flat_map(|u| ((u + 1)..n as u32).map(move |v| (u, v)))
            .collect(),
        GraphModel::Star => (1..n as u32).map(|v| (0, v)).collect(),
        GraphModel::Gnp { p } => {
            check_prob("p", *p)?;
            let mut out = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.gen_bool(*p) {
                        out.push((u, v));
                    }
                }
            }
            out
        }
        GraphModel::PlantedDense { k, p_in, p_out } => {
            check_prob("p_in", *p_in)?;
            check_prob("p_out", *p_out)?;
            if *k > n {
                return Err(Error::Generator(format!(
                    "field k: planted size {k} exceeds n = {n}"
                )));
            }
            let mut out = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    let inside = (u as usize) < *k && (v as usize) < *k;
                    let p = if inside { *p_in } else { *p_out };
                    if rng.gen_bool(p) {
                        out.push((u, v));
                    }
                }
            }
            out
        }
    };

    let raw_costs: Vec<f64> = match &spec.cost_model {
        CostModel::Zero => vec![0.0; n],
        CostModel::Identical { c } => {
            if *c < 0.0 {
                return Err(Error::Generator(format!("field c: must be >= 0, got {c}")));
            }
            vec![*c; n]
        }
        CostModel::Uniform { c } => {
            if *c < 0.0 {
                return Err(Error::Generator(format!("field c: must be >= 0, got {c}")));
            }
            (0..n).map(|_| rng.gen::<f64>() * c).collect()
        }
        CostModel::Bimodal { c_lo, c_hi, frac } => {
            check_prob("frac", *frac)?;
            if *c_lo < 0.0 || *c_hi < 0.0 {
                return Err(Error::Generator("fields c_lo/c_hi: must be >= 0".into()));
            }
            (0..n)
                .map(|_| if rng.gen_bool(*frac) { *c_hi } else { *c_lo })
                .collect()
        }
    };

    Instance::new(n, edges, raw_costs, epsilon)
}

/// Parses a compact spec string, e.g.
/// `gnp,n=100,p=0.5,cost=uniform(0.001),seed=7` or
/// `planted,n=200,k=40,p_in=0.9,p_out=0.05,cost=zero` or
/// `complete,n=3,cost=identical(0.1)` or `file,path=inst.json`.
pub fn parse_spec(text: &str) -> Result<GeneratorSpec> {
    let bad = |msg: String| Error::Generator(msg);
    let mut parts = text.split(',').map(str::trim);
    let model_name = parts
        .next()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| bad("empty generator spec".into()))?;

    let mut kv = std::collections::BTreeMap::new();
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got '{part}'")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get_f64 = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<f64> {
        kv.get(key)
            .ok_or_else(|| bad(format!("missing field {key}")))?
            .parse::<f64>()
            .map_err(|_| bad(format!("field {key}: not a number")))
    };
    let get_usize = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<usize> {
        kv.get(key)
            .ok_or_else(|| bad(format!("missing field {key}")))?
            .parse::<usize>()
            .map_err(|_| bad(format!("field {key}: not an integer")))
    };

    let model = match model_name {
        "gnp" => GraphModel::Gnp {
            p: get_f64(&kv, "p")?,
        },
        "planted" | "planted_dense" => GraphModel::PlantedDense {
            k: get_usize(&kv, "k")?,
            p_in: get_f64(&kv, "p_in")?,
            p_out: get_f64(&kv, "p_out")?,
        },
        "complete" => GraphModel::Complete,
        "star" => GraphModel::Star,
        "file" | "from_file" => GraphModel::FromFile {
            path: PathBuf::from(
                kv.get("path")
                    .ok_or_else(|| bad("missing field path".into()))?,
            ),
        },
        other => return Err(bad(format!("unknown model '{other}'"))),
    };

    let n = if matches!(model, GraphModel::FromFile { .. }) {
        kv.get("n").map(|s| s.parse().unwrap_or(0)).unwrap_or(0)
    } else {
        get_usize(&kv, "n")?
    };

    let cost_model = match kv.get("cost").map(String::as_str) {
        None | Some("zero") => CostModel::Zero,
        Some(text) => {
            let (name, args) = match text.split_once('(') {
                Some((name, rest)) => {
                    let inner = rest
                        .strip_suffix(')')
                        .ok_or_else(|| bad(format!("field cost: missing ')' in '{text}'")))?;
                    (name, inner)
                }
                None => (text, ""),
            };
            let nums: Vec<f64> = if args.is_empty() {
                vec![]
            } else {
                args.split(|c| c == ';' || c == ':')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| bad(format!("field cost: bad number '{s}'")))
                    })
                    .collect::<Result<_>>()?
            };
            match (name, nums.as_slice()) {
                ("identical", [c]) => CostModel::Identical { c: *c },
                ("uniform", [c]) => CostModel::Uniform { c: *c },
                ("bimodal", [lo, hi, frac]) => CostModel::Bimodal {
                    c_lo: *lo,
                    c_hi: *hi,
                    frac: *frac,
                },
                _ => {
                    return Err(bad(format!(
                        "field cost: expected zero | identical(c) | uniform(c) | \
                         bimodal(lo:hi:frac), got '{text}'"
                    )))
                }
            }
        }
    };

    let seed = match kv.get("seed") {
        Some(s) => s
            .parse::<u64>()
            .map_err(|_| bad("field seed: not an integer".into()))?,
        None => 0,
    };

    Ok(GeneratorSpec {
        model,
        n,
        cost_model,
        seed,
    })
}
