use contract_ptas::agents::AgentSet;
use contract_ptas::estimator::{build_partition, clairvoyant_estimates};
use contract_ptas::generator::{generate, parse_spec};
use contract_ptas::lp::{build_lp, fractional_coring, randomized_round, solve_lp, LpOutcome};
use contract_ptas::params::derive_params;
use contract_ptas::pseudocore::iterated_pseudo_coring;

fn main() {
    let t0 = std::time::Instant::now();
    let spec = parse_spec("gnp,n=2000,p=0.5,seed=42,cost=identical(0.0000002)").unwrap();
    let inst = generate(&spec, 0.25).unwrap();
    println!("gen: {:?} edges {}", t0.elapsed(), inst.edges().len());
    let params = derive_params(2000, 0.25).unwrap();
    let t1 = std::time::Instant::now();
    let (s_prime, _) = iterated_pseudo_coring(&inst, &AgentSet::full(2000), &params);
    println!("coring: {:?} |S'| = {}", t1.elapsed(), s_prime.len());
    let fam = clairvoyant_estimates(&inst, &s_prime, &params, 0.0).unwrap();
    let e_true = inst.edges_within(&s_prime);
    let part = build_partition(&inst, &params, &fam.guess_vector(0), e_true).unwrap();
    println!("partition: |A|={} |B|={} |C|={} |D|={}", part.a.len(), part.b.len(), part.c.len(), part.d.len());
    let model = build_lp(&inst, &part, &params);
    let t2 = std::time::Instant::now();
    let LpOutcome::Optimal(sol) = solve_lp::<f64>(&model).unwrap() else { panic!() };
    println!("lp solve: {:?} value {}", t2.elapsed(), sol.value);
    let t3 = std::time::Instant::now();
    let coring = fractional_coring(&sol.x, &inst, &part, &params);
    println!("coring2: {:?} loop1 {} loop2 {}", t3.elapsed(), coring.loop1_removed.len(), coring.loop2_removed.len());
    let x_round: Vec<f64> = coring.x_star.clone();
    let t4 = std::time::Instant::now();
    let mut total = 0u64;
    for seed in 0..1000u64 {
        total += randomized_round(&x_round, &inst, &part, seed).len() as u64;
    }
    println!("1000 roundings: {:?} avg |S''| {}", t4.elapsed(), total as f64 / 1000.0);
}
