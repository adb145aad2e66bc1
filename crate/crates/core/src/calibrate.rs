//! Least-squares recovery of the mean-reversion speed from observed call
//! prices, and of the 3/2 benchmark's drift pair (α, β).

use crate::empirical_map::{h_inverse, QuantileMap};
use crate::error::{Error, Result};
use crate::legendre::legendre_eval_all;
use crate::market_data::OptionObservation;
use crate::pricer::{eigen_decay, project_call, DEFAULT_TERMS};
use crate::three_halves::{price_call_32, ThreeHalvesParams};

/// Default search interval for the speed: half-lives from days to centuries.
pub const DEFAULT_K_BOUNDS: (f64, f64) = (1e-3, 50.0);

/// Observations plus everything that does not depend on the candidate speed:
/// states x_i, expiries τ_i, and the products ν̃_{i,n} = b_n·P_n(x_i), so an
/// objective evaluation only touches the eigenvalue exponentials.
#[derive(Debug, Clone)]
pub struct CalibrationProblem {
    taus: Vec<f64>,
    observed: Vec<f64>,
    nu: Vec<Vec<f64>>,
    discounts: Vec<f64>,
    pub r: f64,
    pub strike: f64,
    pub k_bounds: (f64, f64),
}

impl CalibrationProblem {
    pub fn new(
        observations: &[OptionObservation],
        map: &QuantileMap,
        r: f64,
        strike: f64,
        k_bounds: (f64, f64),
    ) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Invalid("calibration needs at least one observation".into()));
        }
        let (k_lo, k_hi) = k_bounds;
        if !(k_lo > 0.0) || !(k_lo < k_hi) {
            return Err(Error::Invalid(format!(
                "speed bounds ({k_lo}, {k_hi}) must satisfy 0 < lo < hi"
            )));
        }
        if !(strike > 0.0) || !strike.is_finite() {
            return Err(Error::Domain(format!("strike K = {strike} must be positive")));
        }
        let coeffs = project_call(map, strike, DEFAULT_TERMS)?;
        let mut taus = Vec::with_capacity(observations.len());
        let mut observed = Vec::with_capacity(observations.len());
        let mut nu = Vec::with_capacity(observations.len());
        let mut discounts = Vec::with_capacity(observations.len());
        for obs in observations {
            let x = h_inverse(map, obs.vix)?;
            let p = legendre_eval_all(DEFAULT_TERMS - 1, x)?;
            nu.push(coeffs.b.iter().zip(&p).map(|(b, pn)| b * pn).collect());
            taus.push(obs.tau);
            observed.push(obs.call_price);
            discounts.push((-r * obs.tau).exp());
        }
        Ok(Self {
            taus,
            observed,
            nu,
            discounts,
            r,
            strike,
            k_bounds,
        })
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    /// Model price of observation i at candidate speed k (raw series value,
    /// no truncation-residue clipping — the objective must stay smooth).
    fn model_price(&self, i: usize, k: f64) -> f64 {
        let tau = self.taus[i];
        let mut sum = 0.0;
        for (n, nu_in) in self.nu[i].iter().enumerate() {
            sum += nu_in * eigen_decay(k, n, tau);
        }
        self.discounts[i] * sum
    }

    pub fn residuals(&self, k: f64) -> Result<Vec<f64>> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("speed k = {k} must be positive")));
        }
        Ok((0..self.len())
            .map(|i| self.model_price(i, k) - self.observed[i])
            .collect())
    }
}

/// Sum of squared differences between model and observed call prices.
pub fn objective_k(k: f64, problem: &CalibrationProblem) -> Result<f64> {
    let residuals = problem.residuals(k)?;
    Ok(residuals.iter().map(|r| r * r).sum())
}

/// Result of the one-dimensional speed calibration.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CalibrationReport {
    pub k_hat: f64,
    pub sse: f64,
    pub residuals: Vec<f64>,
    /// The optimum landed on a search bound; the reported speed is a bound,
    /// not an interior minimum.
    pub at_bound: bool,
}

/// Minimize the calibration objective over the bounded speed interval:
/// a coarse scan brackets the minimum, golden-section search narrows the
/// bracket to width 1e-6, and a few parabolic steps polish the result.
pub fn calibrate_k(problem: &CalibrationProblem) -> Result<CalibrationReport> {
    let (k_lo, k_hi) = problem.k_bounds;
    let eval = |k: f64| -> Result<f64> {
        let v = objective_k(k, problem)?;
        if !v.is_finite() {
            return Err(Error::Numerical(format!(
                "calibration objective is not finite at k = {k}"
            )));
        }
        Ok(v)
    };

    // coarse scan: bracket the global minimum over the bounds
    const SCAN: usize = 256;
    let mut best_idx = 0;
    let mut best_val = f64::INFINITY;
    let grid: Vec<f64> = (0..SCAN)
        .map(|i| k_lo + (k_hi - k_lo) * i as f64 / (SCAN - 1) as f64)
        .collect();
    for (i, &k) in grid.iter().enumerate() {
        let v = eval(k)?;
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
    }
    let mut a = grid[best_idx.saturating_sub(1)];
    let mut b = grid[(best_idx + 1).min(SCAN - 1)];

    // golden-section to bracket width 1e-6
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let (mut k_hat, mut f_hat) = if fc < fd { (c, fc) } else { (d, fd) };
    if best_val < f_hat {
        k_hat = grid[best_idx];
        f_hat = best_val;
    }

    // parabolic polish inside the final bracket
    let mut step = (b - a).max(1e-7);
    for _ in 0..10 {
        let left = (k_hat - step).max(k_lo);
        let right = (k_hat + step).min(k_hi);
        if right - left < f64::EPSILON * k_hat.abs() {
            break;
        }
        let fl = eval(left)?;
        let fr = eval(right)?;
        let denom = (fl - f_hat) + (fr - f_hat);
        if denom > 0.0 {
            let vertex = k_hat + 0.5 * step * (fl - fr) / denom;
            if vertex > k_lo && vertex < k_hi {
                let fv = eval(vertex)?;
                if fv < f_hat {
                    k_hat = vertex;
                    f_hat = fv;
                }
            }
        }
        if fl < f_hat {
            k_hat = left;
            f_hat = fl;
        }
        if fr < f_hat {
            k_hat = right;
            f_hat = fr;
        }
        step *= 0.5;
    }

    let at_bound = k_hat - k_lo < 2e-6 || k_hi - k_hat < 2e-6;
    Ok(CalibrationReport {
        k_hat,
        sse: f_hat,
        residuals: problem.residuals(k_hat)?,
        at_bound,
    })
}

/// Fitted drift pair of the 3/2 benchmark.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ThreeHalvesFit {
    pub alpha: f64,
    pub beta: f64,
    pub sse: f64,
}

/// Least-squares fit of (α, β) for the 3/2 benchmark at fixed k32, by
/// Nelder–Mead over the feasible quadrant α > 0, β < 0 (candidates outside
/// it are penalized, overflowing prices score +∞).
pub fn calibrate_32(
    observations: &[OptionObservation],
    k32: f64,
    strike: f64,
    r: f64,
) -> Result<ThreeHalvesFit> {
    if observations.is_empty() {
        return Err(Error::Invalid("calibration needs at least one observation".into()));
    }
    if !(k32 > 0.0) || !k32.is_finite() {
        return Err(Error::Domain(format!("k32 = {k32} must be positive")));
    }
    if !(strike > 0.0) || !strike.is_finite() {
        return Err(Error::Domain(format!("strike K = {strike} must be positive")));
    }

    let objective = |alpha: f64, beta: f64| -> f64 {
        if alpha <= 0.0 || beta >= 0.0 {
            return 1e6 * (1.0 + alpha.min(0.0).abs() + beta.max(0.0));
        }
        let mut sse = 0.0;
        for obs in observations {
            let params =
                match ThreeHalvesParams::new(alpha, beta, k32, r, strike, obs.tau, 0.0) {
                    Ok(p) => p,
                    Err(_) => return f64::INFINITY,
                };
            match price_call_32(obs.vix, &params, 256) {
                Ok(price) if price.is_finite() => {
                    let d = price - obs.call_price;
                    sse += d * d;
                }
                _ => return f64::INFINITY,
            }
        }
        sse
    };

    // Nelder–Mead with standard reflection/expansion/contraction/shrink
    let mut simplex = [(1.0f64, -3.0f64), (1.05, -3.0), (1.0, -2.85)];
    let mut values = simplex.map(|(a, b)| objective(a, b));
    for _ in 0..2000 {
        // order best → worst
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = [simplex[idx[0]], simplex[idx[1]], simplex[idx[2]]];
        values = [values[idx[0]], values[idx[1]], values[idx[2]]];

        let spread = values[2] - values[0];
        let diam = {
            let d1 = (simplex[0].0 - simplex[2].0).hypot(simplex[0].1 - simplex[2].1);
            let d2 = (simplex[0].0 - simplex[1].0).hypot(simplex[0].1 - simplex[1].1);
            d1.max(d2)
        };
        if (spread < 1e-14 && diam < 1e-7) || values[0] < 1e-16 {
            break;
        }

        let centroid = (
            0.5 * (simplex[0].0 + simplex[1].0),
            0.5 * (simplex[0].1 + simplex[1].1),
        );
        let reflect = (
            centroid.0 + (centroid.0 - simplex[2].0),
            centroid.1 + (centroid.1 - simplex[2].1),
        );
        let fr = objective(reflect.0, reflect.1);
        if fr < values[0] {
            let expand = (
                centroid.0 + 2.0 * (centroid.0 - simplex[2].0),
                centroid.1 + 2.0 * (centroid.1 - simplex[2].1),
            );
            let fe = objective(expand.0, expand.1);
            if fe < fr {
                simplex[2] = expand;
                values[2] = fe;
            } else {
                simplex[2] = reflect;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflect;
            values[2] = fr;
        } else {
            let contract = (
                centroid.0 + 0.5 * (simplex[2].0 - centroid.0),
                centroid.1 + 0.5 * (simplex[2].1 - centroid.1),
            );
            let fco = objective(contract.0, contract.1);
            if fco < values[2] {
                simplex[2] = contract;
                values[2] = fco;
            } else {
                for i in 1..3 {
                    simplex[i] = (
                        0.5 * (simplex[i].0 + simplex[0].0),
                        0.5 * (simplex[i].1 + simplex[0].1),
                    );
                    values[i] = objective(simplex[i].0, simplex[i].1);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    if !values[best].is_finite() {
        return Err(Error::Numerical(
            "3/2 calibration objective is not finite anywhere near the start simplex".into(),
        ));
    }
    Ok(ThreeHalvesFit {
        alpha: simplex[best].0,
        beta: simplex[best].1,
        sse: values[best],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricer::{price_call, PricingParams};

    fn test_map() -> QuantileMap {
        // smooth increasing cubic on [0, 1], range ≈ [0.10, 0.62]
        QuantileMap {
            degree: 3,
            coeffs: vec![0.10, 0.12, 0.25, 0.15],
            h_min: 0.10,
            h_max: 0.62,
            source_hash: String::new(),
        }
    }

    fn synthetic_observations(map: &QuantileMap, k_true: f64, r: f64, strike: f64) -> Vec<OptionObservation> {
        let coeffs = project_call(map, strike, DEFAULT_TERMS).unwrap();
        let vix_levels = [0.18, 0.22, 0.25, 0.28, 0.32, 0.36, 0.40, 0.45, 0.50, 0.55];
        vix_levels
            .iter()
            .enumerate()
            .map(|(i, &vix)| {
                let tau = 0.15 + 0.02 * i as f64;
                let params = PricingParams::new(k_true, r, tau, Some(strike)).unwrap();
                let x = h_inverse(map, vix).unwrap();
                let price = price_call(0.0, x, &coeffs, &params).unwrap();
                OptionObservation {
                    t: i as f64 * 0.02,
                    vix,
                    call_price: price,
                    tau,
                }
            })
            .collect()
    }

    #[test]
    fn objective_vanishes_at_the_generating_speed() {
        let map = test_map();
        let obs = synthetic_observations(&map, 1.0, 0.0374, 0.2);
        let problem = CalibrationProblem::new(&obs, &map, 0.0374, 0.2, DEFAULT_K_BOUNDS).unwrap();
        let at_truth = objective_k(1.0, &problem).unwrap();
        assert!(at_truth < 1e-20, "objective at truth = {at_truth:e}");
        assert!(objective_k(2.0, &problem).unwrap() > at_truth);
        assert!(objective_k(-1.0, &problem).is_err());
        assert!(objective_k(0.0, &problem).is_err());
    }

    #[test]
    fn objective_matches_direct_pricing() {
        let map = test_map();
        let obs = synthetic_observations(&map, 1.4, 0.05, 0.2);
        let problem = CalibrationProblem::new(&obs, &map, 0.05, 0.2, DEFAULT_K_BOUNDS).unwrap();
        let coeffs = project_call(&map, 0.2, DEFAULT_TERMS).unwrap();
        for &k in &[0.5, 1.0, 2.362, 7.0] {
            let via_nu = objective_k(k, &problem).unwrap();
            let mut direct = 0.0;
            for o in &obs {
                let params = PricingParams::new(k, 0.05, o.tau, Some(0.2)).unwrap();
                let x = h_inverse(&map, o.vix).unwrap();
                let price = price_call(0.0, x, &coeffs, &params).unwrap();
                direct += (price - o.call_price).powi(2);
            }
            assert!(
                (via_nu - direct).abs() < 1e-12,
                "k = {k}: {via_nu} vs {direct}"
            );
        }
    }

    #[test]
    fn objective_finite_across_the_bounds() {
        let map = test_map();
        let obs = synthetic_observations(&map, 2.0, 0.0374, 0.2);
        let problem = CalibrationProblem::new(&obs, &map, 0.0374, 0.2, DEFAULT_K_BOUNDS).unwrap();
        for i in 0..1000 {
            let k = 1e-3 + (50.0 - 1e-3) * i as f64 / 999.0;
            assert!(objective_k(k, &problem).unwrap().is_finite());
        }
    }

    #[test]
    fn noise_free_round_trip_recovers_the_speed() {
        let map = test_map();
        for &k_true in &[0.5, 1.7, 5.0] {
            let obs = synthetic_observations(&map, k_true, 0.0374, 0.2);
            let problem =
                CalibrationProblem::new(&obs, &map, 0.0374, 0.2, DEFAULT_K_BOUNDS).unwrap();
            let report = calibrate_k(&problem).unwrap();
            assert!(
                (report.k_hat - k_true).abs() < 1e-4,
                "k* = {k_true}: recovered {}",
                report.k_hat
            );
            assert!(!report.at_bound);
            assert_eq!(report.residuals.len(), obs.len());
        }
    }

    #[test]
    fn scan_consistency() {
        let map = test_map();
        let obs = synthetic_observations(&map, 1.7, 0.0374, 0.2);
        let problem = CalibrationProblem::new(&obs, &map, 0.0374, 0.2, DEFAULT_K_BOUNDS).unwrap();
        let report = calibrate_k(&problem).unwrap();
        let mut grid_best = f64::INFINITY;
        for i in 0..1000 {
            let k = 1e-3 + (50.0 - 1e-3) * i as f64 / 999.0;
            grid_best = grid_best.min(objective_k(k, &problem).unwrap());
        }
        assert!(
            report.sse <= grid_best + 1e-12,
            "sse {} vs grid best {grid_best}",
            report.sse
        );
    }

    #[test]
    fn noisy_round_trip_stays_close_in_median() {
        use rand::{Rng, SeedableRng};
        let map = test_map();
        let k_true = 1.7;
        let clean = synthetic_observations(&map, k_true, 0.0374, 0.2);
        let mut errors: Vec<f64> = Vec::with_capacity(100);
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let noisy: Vec<OptionObservation> = clean
                .iter()
                .map(|o| OptionObservation {
                    call_price: o.call_price + 1e-4 * rng.gen_range(-1.0..1.0),
                    ..*o
                })
                .collect();
            let problem =
                CalibrationProblem::new(&noisy, &map, 0.0374, 0.2, DEFAULT_K_BOUNDS).unwrap();
            let report = calibrate_k(&problem).unwrap();
            errors.push((report.k_hat - k_true).abs());
        }
        errors.sort_by(f64::total_cmp);
        let median = errors[50];
        assert!(median < 0.05, "median |k̂ − k*| = {median}");
    }

    #[test]
    fn bound_hit_is_flagged() {
        // observations generated far above the upper bound force the search
        // onto the boundary
        let map = test_map();
        let obs = synthetic_observations(&map, 8.0, 0.0374, 0.2);
        let problem = CalibrationProblem::new(&obs, &map, 0.0374, 0.2, (1e-3, 2.0)).unwrap();
        let report = calibrate_k(&problem).unwrap();
        assert!(report.at_bound, "k̂ = {}", report.k_hat);
        assert!((report.k_hat - 2.0).abs() < 1e-4);
    }

    #[test]
    fn problem_validation() {
        let map = test_map();
        let obs = synthetic_observations(&map, 1.0, 0.0374, 0.2);
        assert!(CalibrationProblem::new(&[], &map, 0.0374, 0.2, DEFAULT_K_BOUNDS).is_err());
        assert!(CalibrationProblem::new(&obs, &map, 0.0374, -0.2, DEFAULT_K_BOUNDS).is_err());
        assert!(CalibrationProblem::new(&obs, &map, 0.0374, 0.2, (0.0, 1.0)).is_err());
        assert!(CalibrationProblem::new(&obs, &map, 0.0374, 0.2, (2.0, 1.0)).is_err());
        // out-of-range level propagates the inversion error
        let bad = vec![OptionObservation {
            t: 0.0,
            vix: 0.95,
            call_price: 0.1,
            tau: 0.3,
        }];
        assert!(CalibrationProblem::new(&bad, &map, 0.0374, 0.2, DEFAULT_K_BOUNDS).is_err());
    }

    fn synthetic_32(alpha: f64, beta: f64, k32: f64, strike: f64, r: f64) -> Vec<OptionObservation> {
        [0.2, 0.25, 0.3, 0.35, 0.4, 0.22, 0.28, 0.33]
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let tau = 0.1 + 0.05 * i as f64;
                let params = ThreeHalvesParams::new(alpha, beta, k32, r, strike, tau, 0.0).unwrap();
                OptionObservation {
                    t: i as f64 * 0.02,
                    vix: v,
                    call_price: price_call_32(v, &params, 256).unwrap(),
                    tau,
                }
            })
            .collect()
    }

    #[test]
    fn three_halves_round_trip() {
        let obs = synthetic_32(1.0, -3.0, 2.04, 0.2, 0.0374);
        let fit = calibrate_32(&obs, 2.04, 0.2, 0.0374).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-2, "alpha = {}", fit.alpha);
        assert!((fit.beta + 3.0).abs() < 1e-2, "beta = {}", fit.beta);
        // a generating point away from the start simplex
        let obs = synthetic_32(1.1, -3.4, 2.04, 0.2, 0.0374);
        let fit = calibrate_32(&obs, 2.04, 0.2, 0.0374).unwrap();
        assert!((fit.alpha - 1.1).abs() < 1e-2, "alpha = {}", fit.alpha);
        assert!((fit.beta + 3.4).abs() < 1e-2, "beta = {}", fit.beta);
    }

    #[test]
    fn three_halves_single_observation_is_fit_exactly() {
        let obs = &synthetic_32(1.2, -3.5, 2.04, 0.2, 0.0374)[..1];
        let fit = calibrate_32(obs, 2.04, 0.2, 0.0374).unwrap();
        assert!(fit.sse < 1e-12, "sse = {:e}", fit.sse);
    }

    #[test]
    fn three_halves_rejects_bad_inputs() {
        let obs = synthetic_32(1.0, -3.0, 2.04, 0.2, 0.0374);
        assert!(calibrate_32(&[], 2.04, 0.2, 0.0374).is_err());
        assert!(calibrate_32(&obs, 0.0, 0.2, 0.0374).is_err());
        assert!(calibrate_32(&obs, 2.04, 0.0, 0.0374).is_err());
    }
}
