//! Empirical CDF of historical VIX levels, polynomial fit of its quantile
//! function h on [0, 1], and inversion of h back to the factor coordinate.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::market_data::MarketSeries;

/// Number of uniform grid points used for fitting and validation.
pub const FIT_GRID_POINTS: usize = 2001;

/// Step empirical CDF: F(c) = #{observations ≤ c} / n.
#[derive(Debug, Clone)]
pub struct StepCdf {
    sorted_levels: Vec<f64>,
}

impl StepCdf {
    pub fn n(&self) -> usize {
        self.sorted_levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.sorted_levels
    }

    /// F(c), right-continuous and nondecreasing with F(max) = 1.
    pub fn value(&self, c: f64) -> f64 {
        let below = self.sorted_levels.partition_point(|&l| l <= c);
        below as f64 / self.n() as f64
    }
}

/// Empirical CDF of the series levels.
pub fn ecdf(series: &MarketSeries) -> Result<StepCdf> {
    if series.is_empty() {
        return Err(Error::Invalid("ecdf of empty series".into()));
    }
    let mut sorted_levels: Vec<f64> = series.levels().collect();
    sorted_levels.sort_by(f64::total_cmp);
    Ok(StepCdf { sorted_levels })
}

/// Generalized inverse of the step CDF: the smallest level c with F(c) ≥ u.
/// quantile(0) is the sample minimum, quantile(1) the maximum.
///
/// The rank search compares j/n with the same division [`StepCdf::value`]
/// performs, not via ceil(u·n) — the rounded product can overshoot the rank
/// by one when u is itself a returned CDF value, which would break the
/// identity quantile(F(c)) = c on sample points.
pub fn quantile(cdf: &StepCdf, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("quantile level {u} outside [0, 1]")));
    }
    let n = cdf.n();
    let (mut lo, mut hi) = (1usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if mid as f64 / n as f64 >= u {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(cdf.sorted_levels[lo - 1])
}

/// Polynomial fit h of the quantile function on [0, 1] (monomial basis,
/// index = power), with its fitted range and a hash of the source sample.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct QuantileMap {
    pub degree: usize,
    pub coeffs: Vec<f64>,
    /// Fitted value at u = 0.
    pub h_min: f64,
    /// Fitted value at u = 1.
    pub h_max: f64,
    /// SHA-256 of the sorted sample the fit was computed from.
    pub source_hash: String,
}

/// Least-squares polynomial fit of u ↦ quantile(cdf, u) on a uniform grid of
/// [`FIT_GRID_POINTS`] points, solved through a truncated SVD (cutoff
/// `grid·ε·σ_max`, minimum-norm solution) rather than normal equations —
/// degree-30 monomial systems are numerically rank-deficient and the normal
/// equations would square the conditioning.
///
/// Fails if the fitted curve decreases between adjacent grid points by more
/// than 1e-6·(h_max − h_min), or is not strictly positive on the grid.
pub fn fit_quantile_polynomial(cdf: &StepCdf, degree: usize) -> Result<QuantileMap> {
    if cdf.n() < degree + 1 {
        return Err(Error::Invalid(format!(
            "need at least degree+1 = {} samples, have {}",
            degree + 1,
            cdf.n()
        )));
    }
    let cols = degree + 1;
    let rows = FIT_GRID_POINTS;
    let mut targets = Vec::with_capacity(rows);
    for i in 0..rows {
        let u = i as f64 / (rows - 1) as f64;
        targets.push(quantile(cdf, u)?);
    }
    // Vandermonde by cumulative powers of the grid points
    let mut design = nalgebra::DMatrix::<f64>::zeros(rows, cols);
    for i in 0..rows {
        let u = i as f64 / (rows - 1) as f64;
        let mut p = 1.0;
        for j in 0..cols {
            design[(i, j)] = p;
            p *= u;
        }
    }
    let y = nalgebra::DVector::from_vec(targets.clone());
    let svd = design.svd(true, true);
    let sigma_max = svd.singular_values.max();
    if !(sigma_max > 0.0) || !sigma_max.is_finite() {
        return Err(Error::Fit(
            "degenerate design matrix; try a lower degree".into(),
        ));
    }
    let cutoff = rows as f64 * f64::EPSILON * sigma_max;
    let solution = svd
        .solve(&y, cutoff)
        .map_err(|e| Error::Fit(format!("{e}; try a lower degree")))?;
    let coeffs: Vec<f64> = solution.iter().copied().collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Fit(
            "ill-conditioned least-squares system; try a lower degree".into(),
        ));
    }

    let horner = |u: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c);
    let h_min = horner(0.0);
    let h_max = horner(1.0);

    // validation sweep on the fit grid: monotone within tolerance, positive
    let tol = 1e-6 * (h_max - h_min);
    let mut prev = h_min;
    let mut worst_decrease = 0.0f64;
    let mut worst_at = 0.0;
    let mut min_value = h_min;
    for i in 1..rows {
        let u = i as f64 / (rows - 1) as f64;
        let v = horner(u);
        let d = v - prev;
        if d < worst_decrease {
            worst_decrease = d;
            worst_at = u;
        }
        min_value = min_value.min(v);
        prev = v;
    }
    if worst_decrease < -tol {
        return Err(Error::Fit(format!(
            "fitted map is not monotone: worst grid decrease {worst_decrease:.3e} \
             at u = {worst_at:.4} exceeds tolerance {tol:.3e}"
        )));
    }
    if min_value <= 0.0 {
        return Err(Error::Fit(format!(
            "fitted map is not positive on the grid (min value {min_value:.3e})"
        )));
    }

    let mut hasher = Sha256::new();
    for v in cdf.levels() {
        hasher.update(v.to_le_bytes());
    }
    let source_hash = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();

    Ok(QuantileMap {
        degree,
        coeffs,
        h_min,
        h_max,
        source_hash,
    })
}

/// Horner evaluation of the fitted polynomial at u ∈ [0, 1].
pub fn h_eval(map: &QuantileMap, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("h argument {u} outside [0, 1]")));
    }
    Ok(map.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c))
}

/// Invert the fitted map: find x ∈ [-1, 1] with h((x+1)/2) = vix by bracketed
/// bisection on u ∈ [0, 1] (absolute tolerance better than 1e-10 in u;
/// uniqueness comes from the monotonicity invariant). Levels outside
/// [h_min, h_max] are an error — the caller decides, the library never clamps.
pub fn h_inverse(map: &QuantileMap, vix: f64) -> Result<f64> {
    if !vix.is_finite() || vix < map.h_min || vix > map.h_max {
        return Err(Error::OutOfRange {
            value: vix,
            lo: map.h_min,
            hi: map.h_max,
        });
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let v = map.coeffs.iter().rev().fold(0.0, |acc, &c| acc * mid + c);
        if v < vix {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(2.0 * (0.5 * (lo + hi)) - 1.0)
}

impl QuantileMap {
    /// Write the map as the JSON handoff artifact
    /// `{degree, coeffs[], h_min, h_max, source_hash}`.
    pub fn save_json<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Invalid(format!("serialize quantile map: {e}")))?;
        std::fs::write(path.as_ref(), body + "\n").map_err(|e| Error::Io {
            path: path.as_ref().to_path_buf(),
            source: e,
        })
    }

    pub fn load_json<P: AsRef<Path>>(path: P) -> Result<Self> {
        let body = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io {
            path: path.as_ref().to_path_buf(),
            source: e,
        })?;
        let map: QuantileMap = serde_json::from_str(&body).map_err(|e| Error::Parse {
            path: path.as_ref().display().to_string(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        if map.coeffs.len() != map.degree + 1 {
            return Err(Error::Invalid(format!(
                "quantile map declares degree {} but has {} coefficients",
                map.degree,
                map.coeffs.len()
            )));
        }
        if map.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite coefficient in quantile map".into()));
        }
        Ok(map)
    }
}
