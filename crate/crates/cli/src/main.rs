//! Command-line harness: instance generation, evaluation, exhaustive
//! search, the approximation pipeline, comparisons, and invariant checks.
//!
//! Exit codes: 0 success, 2 invalid input, 3 internal assertion failure.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use contract_ptas::driver::{run_ptas, DriverConfig, SamplerMode};
use contract_ptas::generator::{generate, parse_spec};
use contract_ptas::instance::Instance;
use contract_ptas::lp::{build_lp, fractional_coring, solve_lp, verify_relaxed, LpOutcome};
use contract_ptas::oracle::brute_force_opt_bounded;
use contract_ptas::params::derive_params_unchecked;
use contract_ptas::pseudocore::{chain_report, iterated_pseudo_coring_logged, verify_structure};
use contract_ptas::report::{rows_to_csv, CompareRow};
use contract_ptas::AgentSet;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "contract-ptas", version, about = "Linear contracts on graphs: solver and harness")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Path to an instance JSON file.
    #[arg(long, conflicts_with = "gen")]
    instance: Option<PathBuf>,

    /// Generator spec, e.g. `gnp,n=100,p=0.5,cost=uniform(0.001),seed=7`.
    #[arg(long, name = "gen")]
    gen: Option<String>,

    /// Accuracy parameter in (0, 0.25]; overrides the file's value.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Master seed; falls back to the PTAS_SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,

    /// Estimate source for the pipeline.
    #[arg(long, default_value = "clairvoyant")]
    mode: String,

    /// Oblivious sample size.
    #[arg(long, default_value_t = 10)]
    sampler_r: usize,

    /// Clairvoyant noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,

    /// Hidden set for clairvoyant runs, comma-separated agent ids.
    #[arg(long)]
    hidden: Option<String>,

    /// Edge-count guesses A..B (inclusive); default is the full range.
    #[arg(long)]
    e_guess_range: Option<String>,

    /// Cap on sampler guesses.
    #[arg(long, default_value_t = 4096)]
    guess_budget: u64,

    /// Rounding trials per guess (default: derived repetition count).
    #[arg(long)]
    trials: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as JSON.
    Gen {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate L, R, g for an explicit set.
    Eval {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Comma-separated agent ids, e.g. `0,1,2`; empty string for the
        /// empty set.
        #[arg(long, default_value = "")]
        set: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive search for the optimal set.
    Oracle {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = contract_ptas::oracle::DEFAULT_BRUTE_FORCE_BOUND)]
        max_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the approximation pipeline.
    Ptas {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format for the report.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Run both oracle and pipeline; report the gap against 5 sqrt(eps).
    Compare {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Repeat over `seed, seed+1, ...` fresh generator draws.
        #[arg(long, default_value_t = 1)]
        repeat: u64,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite on one instance.
    Verify {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized");
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_instance(args: &InstanceArgs) -> anyhow::Result<Instance> {
    match (&args.instance, &args.gen) {
        (Some(path), None) => {
            let inst = Instance::load_json(path).context("loading instance")?;
            match args.epsilon {
                Some(eps) => Ok(inst.with_epsilon(eps)?),
                None => Ok(inst),
            }
        }
        (None, Some(spec_text)) => {
            let spec = parse_spec(spec_text)?;
            let eps = args
                .epsilon
                .context("--epsilon is required with --gen")?;
            Ok(generate(&spec, eps)?)
        }
        _ => anyhow::bail!("exactly one of --instance or --gen is required"),
    }
}

fn parse_set(text: &str, n: usize) -> anyhow::Result<AgentSet> {
    let mut set = AgentSet::empty(n);
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: usize = token.parse().context("parsing set member")?;
        anyhow::ensure!(v < n, "set member {v} outside 0..{n}");
        set.insert(v);
    }
    Ok(set)
}

fn parse_range(text: &str) -> anyhow::Result<Vec<u64>> {
    let (a, b) = text
        .split_once("..")
        .context("expected A..B for --e-guess-range")?;
    let a: u64 = a.trim().parse().context("range start")?;
    let b: u64 = b.trim().parse().context("range end")?;
    anyhow::ensure!(a <= b, "empty range {a}..{b}");
    Ok((a..=b).collect())
}

fn seed_of(run: &RunArgs) -> u64 {
    run.seed.unwrap_or_else(|| {
        std::env::var("PTAS_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0)
    })
}

fn driver_config(run: &RunArgs, inst: &Instance) -> anyhow::Result<DriverConfig> {
    let mode = match run.mode.as_str() {
        "clairvoyant" => SamplerMode::Clairvoyant { noise: run.noise },
        "oblivious" => SamplerMode::Oblivious { r: run.sampler_r },
        other => anyhow::bail!("unknown mode '{other}' (clairvoyant|oblivious)"),
    };
    let hidden_set = match &run.hidden {
        Some(text) => Some(parse_set(text, inst.n())?.members()),
        None => None,
    };
    let e_guess_range = match &run.e_guess_range {
        Some(text) => Some(parse_range(text)?),
        None => None,
    };
    Ok(DriverConfig {
        mode,
        hidden_set,
        e_guess_range,
        guess_budget: run.guess_budget,
        trials_per_guess: run.trials,
        master_seed: seed_of(run),
        ..Default::default()
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).context("writing output")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn dispatch(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Gen { inst, out } => {
            let instance = load_instance(&inst)?;
            emit(&out, &instance.to_json_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { inst, set, out } => {
            let instance = load_instance(&inst)?;
            let s = parse_set(&set, instance.n())?;
            let eval = instance.evaluate(&s);
            let contract = instance.optimal_contract_for(&s);
            let body = serde_json::json!({
                "set": s.members(),
                "l": eval.l,
                "r": eval.r,
                "g": eval.g,
                "optimal_contract": contract.t,
                "contract_finite": contract.is_finite(),
            });
            emit(&out, &serde_json::to_string_pretty(&body)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { inst, max_n, out } => {
            let instance = load_instance(&inst)?;
            let result = brute_force_opt_bounded(&instance, max_n)?;
            let body = serde_json::json!({
                "best_set": result.best_set.members(),
                "opt": result.opt,
                "evaluations": result.evaluations,
            });
            emit(&out, &serde_json::to_string_pretty(&body)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Ptas {
            inst,
            run,
            out,
            format,
        } => {
            let instance = load_instance(&inst)?;
            let config = driver_config(&run, &instance)?;
            let report = run_ptas(&instance, &config)?;
            match format.as_str() {
                "json" => emit(&out, &report.to_json())?,
                other => anyhow::bail!("ptas supports --format json, got '{other}'"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            inst,
            run,
            repeat,
            format,
            out,
        } => {
            let base_seed = seed_of(&run);
            let mut rows = Vec::new();
            for rep in 0..repeat.max(1) {
                let instance = match (&inst.gen, rep) {
                    (Some(spec_text), _) => {
                        let mut spec = parse_spec(spec_text)?;
                        spec.seed = spec.seed.wrapping_add(rep);
                        generate(&spec, inst.epsilon.context("--epsilon required")?)?
                    }
                    (None, 0) => load_instance(&inst)?,
                    (None, _) => anyhow::bail!("--repeat > 1 requires --gen"),
                };
                let mut run_rep = run.clone();
                run_rep.seed = Some(base_seed.wrapping_add(rep));
                let config = driver_config(&run_rep, &instance)?;
                let oracle = brute_force_opt_bounded(&instance, config.brute_force_bound)?;
                let report = run_ptas(&instance, &config)?;
                let gap = oracle.opt - report.best_g;
                let bound = 5.0 * instance.epsilon().sqrt();
                rows.push(CompareRow {
                    label: inst
                        .gen
                        .clone()
                        .or_else(|| inst.instance.as_ref().map(|p| p.display().to_string()))
                        .unwrap_or_default(),
                    n: instance.n(),
                    epsilon: instance.epsilon(),
                    seed: base_seed.wrapping_add(rep),
                    opt: oracle.opt,
                    best_g: report.best_g,
                    gap,
                    bound,
                    within_bound: gap <= bound,
                });
            }
            let ok = rows.iter().all(|r| r.within_bound);
            match format.as_str() {
                "json" => emit(&out, &serde_json::to_string_pretty(&rows)?)?,
                "csv" => emit(&out, &rows_to_csv(&rows)?)?,
                other => anyhow::bail!("unknown format '{other}' (json|csv)"),
            }
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Command::Verify { inst, run, out } => {
            let instance = load_instance(&inst)?;
            let body = verify_instance(&instance, &run)?;
            let ok = body["ok"].as_bool().unwrap_or(false);
            emit(&out, &serde_json::to_string_pretty(&body)?)?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
    }
}

/// Structural, LP, and game-layer checks on one instance, reported as
/// JSON with an overall `ok` flag.
fn verify_instance(instance: &Instance, run: &RunArgs) -> anyhow::Result<serde_json::Value> {
    let n = instance.n();
    let params = derive_params_unchecked(n, instance.epsilon())?;
    let mut ok = true;

    // Game layer: the optimal contract for a few sets is an equilibrium
    // and reproduces g.
    let mut game_ok = true;
    let sets: Vec<AgentSet> = vec![
        AgentSet::empty(n),
        AgentSet::full(n),
        AgentSet::from_members(n, &(0..n.min(4)).collect::<Vec<_>>()),
    ];
    for s in &sets {
        let t = instance.optimal_contract_for(s);
        if t.is_finite() {
            let pu = instance.principal_utility(&t, s);
            let g = instance.evaluate(s).g;
            if (pu - g).abs() > 1e-12 * g.abs().max(1.0) || !instance.is_pure_nash(&t, s) {
                game_ok = false;
            }
        }
    }
    ok &= game_ok;

    // Coring invariants on the full set as the starting point.
    let (s_prime, trace, log) =
        iterated_pseudo_coring_logged(instance, &AgentSet::full(n), &params);
    let monotone_ok = log
        .removals
        .iter()
        .all(|r| r.surrogate_after >= r.surrogate_before);
    let switching_ok = log.switching.iter().take(params.m.saturating_sub(1)).all(|s| s.holds);
    ok &= monotone_ok && switching_ok && log.l_star_le_surrogate;

    let opt = if n <= contract_ptas::oracle::DEFAULT_BRUTE_FORCE_BOUND {
        Some(brute_force_opt_bounded(instance, contract_ptas::oracle::DEFAULT_BRUTE_FORCE_BOUND)?.opt)
    } else {
        None
    };
    let structure = verify_structure(instance, &s_prime, &params, opt.unwrap_or(0.0));
    ok &= structure.degree_or_cheap.holds;
    let chain = chain_report(instance, &AgentSet::full(n), &s_prime, &trace, &params);

    // One LP round-trip at the true edge count of the structured set.
    let fam = contract_ptas::estimator::clairvoyant_estimates(instance, &s_prime, &params, 0.0)?;
    let e_true = instance.edges_within(&s_prime);
    let part = contract_ptas::estimator::build_partition(
        instance,
        &params,
        &fam.guess_vector(0),
        e_true,
    )?;
    let lp_json = match solve_lp::<f64>(&build_lp(instance, &part, &params))? {
        LpOutcome::Infeasible => serde_json::json!({"status": "infeasible"}),
        LpOutcome::Optimal(sol) => {
            let coring = fractional_coring(&sol.x, instance, &part, &params);
            let report = verify_relaxed(&coring, &sol.x, instance, &part, &params, 1e-6);
            ok &= report.hard_ok;
            serde_json::json!({
                "status": "optimal",
                "opt_lp": sol.value,
                "relaxed": serde_json::from_str::<serde_json::Value>(&report.to_json())?,
            })
        }
    };

    let seed = seed_of(run);
    Ok(serde_json::json!({
        "ok": ok,
        "n": n,
        "epsilon": instance.epsilon(),
        "seed": seed,
        "game_layer_ok": game_ok,
        "coring": {
            "monotone_ok": monotone_ok,
            "switching_ok": switching_ok,
            "l_star_le_surrogate": log.l_star_le_surrogate,
            "s_prime": s_prime.members(),
            "structure": serde_json::from_str::<serde_json::Value>(
                &serde_json::to_string(&structure)?)?,
            "chain": serde_json::from_str::<serde_json::Value>(
                &serde_json::to_string(&chain)?)?,
            "trace_iterations": trace.iterations.len(),
        },
        "lp": lp_json,
        "oracle_opt": opt,
    }))
}
