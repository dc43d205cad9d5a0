//! Derived constants for the approximation pipeline.
//!
//! Everything here is a pure function of `(n, epsilon)` plus optional
//! overrides. The override hooks exist because several constants are
//! conservative: raising `gamma` (and with it `beta` and the iteration
//! count `M`) exercises the multi-round coring path at sizes where the
//! natural constants collapse to a single round.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// All derived constants used by the coring, estimation, LP, and rounding
/// stages.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PtasParams {
    pub n: usize,
    pub epsilon: f64,
    /// Concentration constant `4 / eps^2`.
    pub kappa: f64,
    /// Sampling threshold scale `eps^6`.
    pub sigma: f64,
    /// Degree-estimate constant `36 e / ((1-eps)^2 eps^5 ln 2)`.
    pub delta: f64,
    /// `delta / eps`.
    pub delta_eps: f64,
    /// `eps / 6`.
    pub gamma_prime: f64,
    /// Pseudo-core constant `(1-eps) eps^4 / 36`.
    pub gamma: f64,
    /// Pseudo-core threshold `gamma * (n^2 + (6/eps) n)`.
    pub beta: f64,
    /// Number of coring rounds.
    pub m: usize,
    /// Cost escalations `Delta_k`, entry `k-1` holding `Delta_k`.
    pub deltas: Vec<f64>,
    /// Cheap-agent cutoff `eps / (2n)` in rescaled cost units.
    pub cheap_threshold: f64,
    /// Rounding repetitions.
    pub repetitions: u32,
    /// Degree floor `delta^{-1} n / ln ln n`.
    pub d_floor: f64,
    /// Neighborhood-mass cutoff `kappa sqrt(n) ln(2 n^2)`.
    pub kappa_bar: f64,
    /// Sampler-internal threshold scale `eps (1+eps) sigma / 9`.
    pub sigma_prime: f64,
}

/// Optional replacements for the tunable constants.
#[derive(Clone, Debug, Default)]
pub struct ParamOverrides {
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub m: Option<usize>,
}

/// Smallest `n` accepted by [`derive_params`].
pub const MIN_PTAS_N: usize = 16;

/// `ceil(ln n / ln(1/(sqrt(eps) + 1/n)))`, the number of independent
/// rounding repetitions needed to drive the failure probability below
/// `1/n`. Errors when `sqrt(eps) + 1/n >= 1`, where no repetition count
/// suffices.
pub fn repetition_count(n: usize, epsilon: f64) -> Result<u32> {
    if n < 2 {
        return Err(Error::NTooSmall { n, min: 2 });
    }
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let s = epsilon.sqrt() + 1.0 / n as f64;
    if s >= 1.0 {
        return Err(Error::RepetitionUndefined(s));
    }
    let reps = ((n as f64).ln() / (1.0 / s).ln()).ceil();
    Ok(reps.max(1.0) as u32)
}

fn derive_inner(n: usize, epsilon: f64, ov: &ParamOverrides) -> Result<PtasParams> {
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let nf = n as f64;
    let one_minus = 1.0 - epsilon;
    // Explicit multiply chains: powi with a constant exponent expands to
    // different trees at different optimization levels, which would make
    // these constants build-dependent.
    let eps2 = epsilon * epsilon;
    let eps4 = eps2 * eps2;
    let eps5 = eps4 * epsilon;
    let eps6 = eps4 * eps2;
    let kappa = ov.kappa.unwrap_or(4.0 / eps2);
    let sigma = eps6;
    let delta = ov
        .delta
        .unwrap_or(36.0 * std::f64::consts::E / (one_minus * one_minus * eps5 * 2f64.ln()));
    let gamma = ov.gamma.unwrap_or(one_minus * eps4 / 36.0);
    let beta = gamma * (nf * nf + (6.0 / epsilon) * nf);
    // The log argument is clamped below e^2: the paper's M is asymptotic
    // and meaningless once gamma*(n + 6/eps) drops under it.
    let e_sq = std::f64::consts::E * std::f64::consts::E;
    let log_arg = (gamma * (nf + 6.0 / epsilon)).max(e_sq);
    let m = ov
        .m
        .unwrap_or_else(|| (log_arg.ln().log2().ceil() as usize).max(1));
    let deltas = (1..=m)
        .map(|k| {
            let half_k = 0.5f64.powi(k as i32);
            let half_k1 = 0.5f64.powi(k as i32 - 1);
            epsilon.powf(2.0 - half_k) * beta.powf(1.0 - half_k)
                / (  (m as f64).powf(2.0 - half_k1) * nf.powf(2.0 - half_k))
        })
        .collect();
    let lnln = nf.ln().ln();
    Ok(PtasParams {
        n,
        epsilon,
        kappa,
        sigma,
        delta,
        delta_eps: delta / epsilon,
        gamma_prime: epsilon / 6.0,
        gamma,
        beta,
        m,
        deltas,
        cheap_threshold: epsilon / (2.0 * nf),
        repetitions: repetition_count(n, epsilon)?,
        d_floor: nf / (delta * lnln),
        kappa_bar: kappa * nf.sqrt() * (2.0 * nf * nf).ln(),
        sigma_prime: epsilon * (1.0 + epsilon) * sigma / 9.0,
    })
}

/// Derives all pipeline constants. Rejects `n < 16` (the degree floor
/// degenerates) and `epsilon` outside `(0, 1/4]`.
pub fn derive_params(n: usize, epsilon: f64) -> Result<PtasParams> {
    derive_params_with(n, epsilon, &ParamOverrides::default())
}

/// [`derive_params`] with overrides for the tunable constants.
pub fn derive_params_with(n: usize, epsilon: f64, ov: &ParamOverrides) -> Result<PtasParams> {
    if n < MIN_PTAS_N {
        return Err(Error::NTooSmall { n, min: MIN_PTAS_N });
    }
    derive_inner(n, epsilon, ov)
}

/// Skips the `n >= 16` gate. Intended for small synthetic fixtures; still
/// requires `ln ln n > 0`, i.e. `n >= 3`.
pub fn derive_params_unchecked(n: usize, epsilon: f64) -> Result<PtasParams> {
    if n < 3 {
        return Err(Error::NTooSmall { n, min: 3 });
    }
    derive_inner(n, epsilon, &ParamOverrides::default())
}

/// `Delta_k` for `k` beyond the stored schedule, used when comparing
/// surrogate objectives across the final cost bump.
pub fn delta_k(params: &PtasParams, k: usize) -> f64 {
    let half_k = 0.5f64.powi(k as i32);
    let half_k1 = 0.5f64.powi(k as i32 - 1);
    params.epsilon.powf(2.0 - half_k) * params.beta.powf(1.0 - half_k)
        / ((params.m as f64).powf(2.0 - half_k1) * (params.n as f64).powf(2.0 - half_k))
}
