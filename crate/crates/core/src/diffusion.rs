//! Bounded mean-reverting factor on (−1, 1): Euler simulation, exact
//! transition density by Legendre eigen-expansion, and a stationarity check
//! against the uniform invariant law.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::legendre::legendre_eval_all;

/// Euler steps are clamped into [−1+ε_b, 1−ε_b]; the exact process never
/// reaches the barriers, but a discrete step can overshoot.
pub const BOUNDARY_GUARD: f64 = 1e-9;

/// Number of eigen-expansion terms that makes truncation negligible for
/// elapsed times ≥ 0.01 at speeds around 2.4.
pub const DEFAULT_DENSITY_TERMS: usize = 40;

/// Speed and initial state of the factor process.
#[derive(Debug, Clone, Copy)]
pub struct DiffusionParams {
    /// Mean-reversion speed, 1/years.
    pub k: f64,
    /// Initial state in (−1, 1).
    pub x0: f64,
}

impl DiffusionParams {
    pub fn new(k: f64, x0: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("speed k = {k} must be positive")));
        }
        if !(-1.0 < x0 && x0 < 1.0) {
            return Err(Error::Domain(format!(
                "initial state x0 = {x0} outside (-1, 1)"
            )));
        }
        Ok(Self { k, x0 })
    }
}

/// A simulated trajectory on a uniform time grid.
#[derive(Debug, Clone)]
pub struct SamplePath {
    /// Years, uniform grid starting at 0.
    pub times: Vec<f64>,
    /// States within [−1+ε_b, 1−ε_b].
    pub states: Vec<f64>,
}

impl SamplePath {
    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// One Euler step x → x − k·x·dt + √(k·max(1−x², 0)·dt)·z, clamped into the
/// guarded interval. Full truncation under the root keeps the variance term
/// well-defined when a previous step landed on the guard.
pub fn step_euler(x: f64, k: f64, dt: f64, z: f64) -> f64 {
    let var = k * (1.0 - x * x).max(0.0) * dt;
    let next = x - k * x * dt + var.sqrt() * z;
    next.clamp(-1.0 + BOUNDARY_GUARD, 1.0 - BOUNDARY_GUARD)
}

/// Euler path over floor(horizon/dt)+1 grid points, deterministic in `seed`.
pub fn simulate_path(
    params: &DiffusionParams,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<SamplePath> {
    DiffusionParams::new(params.k, params.x0)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Domain(format!("horizon {horizon} must be positive")));
    }
    if !(dt > 0.0) || dt > horizon {
        return Err(Error::Domain(format!(
            "step dt = {dt} must lie in (0, horizon = {horizon}]"
        )));
    }
    let steps = (horizon / dt).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = params.x0;
    times.push(0.0);
    states.push(x);
    for i in 1..=steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        x = step_euler(x, params.k, dt, z);
        times.push(i as f64 * dt);
        states.push(x);
    }
    Ok(SamplePath { times, states })
}

/// Exact transition density by truncated eigen-expansion:
/// p(t,x,y) = Σ_{n<n_terms} ((2n+1)/2)·exp(−k·n(n+1)·t/2)·P_n(x)·P_n(y).
/// May be slightly negative for tiny t (truncation); callers that need a
/// probability should treat small negatives as zero.
pub fn transition_density(t: f64, x: f64, y: f64, k: f64, n_terms: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "elapsed time t = {t} must be positive (the time-zero law is a point mass)"
        )));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("speed k = {k} must be positive")));
    }
    if n_terms < 1 {
        return Err(Error::Invalid("density needs at least one term".into()));
    }
    let px = legendre_eval_all(n_terms - 1, x)?;
    let py = legendre_eval_all(n_terms - 1, y)?;
    let mut sum = 0.0;
    for n in 0..n_terms {
        let nn = n as f64;
        let weight = (2.0 * nn + 1.0) / 2.0;
        let decay = (-k * nn * (nn + 1.0) * t / 2.0).exp();
        sum += weight * decay * px[n] * py[n];
    }
    Ok(sum)
}

/// Kolmogorov–Smirnov distance between a sample and U[−1, 1].
pub fn ks_uniform_pm1(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Invalid("KS statistic of an empty sample".into()));
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let g = ((x + 1.0) / 2.0).clamp(0.0, 1.0);
        let hi = (i as f64 + 1.0) / n - g;
        let lo = g - i as f64 / n;
        sup = sup.max(hi).max(lo);
    }
    Ok(sup)
}

/// 1%-level critical value for the KS statistic (asymptotic, 1.6276/√n).
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// KS distance between the post-burn-in empirical law of the path states and
/// the uniform invariant law on [−1, 1].
pub fn stationarity_test(path: &SamplePath, burn_in: f64) -> Result<f64> {
    if path.horizon() <= burn_in {
        return Err(Error::Invalid(format!(
            "burn-in {burn_in} y consumes the whole path (horizon {} y)",
            path.horizon()
        )));
    }
    let kept: Vec<f64> = path
        .times
        .iter()
        .zip(&path.states)
        .filter(|(t, _)| **t >= burn_in)
        .map(|(_, x)| *x)
        .collect();
    ks_uniform_pm1(&kept)
}
