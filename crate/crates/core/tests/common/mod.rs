//! Shared fixtures for the integration suites: the bundled-data quantile fit
//! and Euler Monte Carlo oracles kept independent of the spectral pricers.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::sync::OnceLock;
use vixmodel::empirical_map::{ecdf, fit_quantile_polynomial, h_eval, QuantileMap};
use vixmodel::market_data::load_vix_csv;

pub const SEED_SPREAD: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn bundled_map() -> &'static QuantileMap {
    static MAP: OnceLock<QuantileMap> = OnceLock::new();
    MAP.get_or_init(|| {
        let path = concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/vix_daily_1990_2022.csv"
        );
        let series = load_vix_csv(path).expect("bundled VIX history");
        let cdf = ecdf(&series).expect("ecdf");
        fit_quantile_polynomial(&cdf, 30).expect("degree-30 fit")
    })
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McStats {
    pub mean: f64,
    pub se: f64,
}

fn stats(sum: f64, sum_sq: f64, n: usize) -> McStats {
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    McStats {
        mean,
        se: (var / (n - 1) as f64).sqrt(),
    }
}

pub enum McPayoff {
    Futures,
    Call { strike: f64 },
}

/// Euler Monte Carlo price for the bounded-diffusion model. Paths start at
/// x0, step with full-truncation Euler on dX = −kX dt + √(k(1−X²)) dW, and
/// the payoff is evaluated through the fitted map at the terminal state.
/// Discounting applies to option payoffs only.
pub fn jacobi_mc(
    map: &QuantileMap,
    k: f64,
    x0: f64,
    tau: f64,
    r: f64,
    payoff: McPayoff,
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> McStats {
    let steps = (tau / dt).ceil() as usize;
    let dt = tau / steps as f64;
    let discount = match payoff {
        McPayoff::Futures => 1.0,
        McPayoff::Call { .. } => (-r * tau).exp(),
    };
    let (sum, sum_sq) = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                seed.wrapping_add((i as u64).wrapping_mul(SEED_SPREAD)),
            );
            let mut x = x0;
            for _ in 0..steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                let drift = -k * x * dt;
                let diff = (k * (1.0 - x * x).max(0.0) * dt).sqrt();
                x = (x + drift + diff * z).clamp(-1.0 + 1e-9, 1.0 - 1e-9);
            }
            let level = h_eval(map, (x + 1.0) / 2.0).expect("terminal level");
            let p = match payoff {
                McPayoff::Futures => level,
                McPayoff::Call { strike } => discount * (level - strike).max(0.0),
            };
            (p, p * p)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    stats(sum, sum_sq, n_paths)
}

/// Euler Monte Carlo call price under dV = (αV + βV²) dt + k V^{3/2} dW,
/// payoff e^{−rτ}(V_T − K)⁺. Drift and diffusion coefficients are evaluated
/// on max(V, 0) and the state is floored at 1e-8 after each step.
#[allow(clippy::too_many_arguments)]
pub fn three_halves_mc(
    alpha: f64,
    beta: f64,
    k32: f64,
    v0: f64,
    tau: f64,
    r: f64,
    strike: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> McStats {
    let steps = (tau / dt).ceil() as usize;
    let dt = tau / steps as f64;
    let discount = (-r * tau).exp();
    let (sum, sum_sq) = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                seed.wrapping_add((i as u64).wrapping_mul(SEED_SPREAD)),
            );
            let mut v = v0;
            for _ in 0..steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                let vp = v.max(0.0);
                v += (alpha * vp + beta * vp * vp) * dt + k32 * vp.powf(1.5) * dt.sqrt() * z;
                v = v.max(1e-8);
            }
            let p = discount * (v - strike).max(0.0);
            (p, p * p)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    stats(sum, sum_sq, n_paths)
}
