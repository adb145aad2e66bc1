//! Legendre-series pricing of futures and European options on the mapped
//! factor: project the terminal payoff onto the eigenbasis once, then any
//! (t, x) price is a short weighted sum.

use std::sync::Arc;

use crate::empirical_map::QuantileMap;
use crate::error::{Error, Result};
use crate::legendre::{inner_product, legendre_eval_all, monomial_to_legendre, shared_rule, QuadratureRule};

/// Quadrature order used for payoff projections; exact for polynomial
/// integrands up to degree 127, far beyond the degree-30 maps in use.
pub const PROJECTION_QUADRATURE_ORDER: usize = 64;

/// Default series truncation: 31 coefficients, orders 0..=30.
pub const DEFAULT_TERMS: usize = 31;

fn projection_rule() -> Arc<QuadratureRule> {
    shared_rule(PROJECTION_QUADRATURE_ORDER)
}

/// Which terminal payoff a coefficient vector represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayoffKind {
    Futures,
    Call,
    Put,
}

/// Payoff-projection coefficients b_n = ((2n+1)/2)·⟨payoff, P_n⟩ for
/// n = 0..terms−1.
#[derive(Debug, Clone)]
pub struct SpectralCoeffs {
    pub b: Vec<f64>,
    pub kind: PayoffKind,
}

impl SpectralCoeffs {
    pub fn terms(&self) -> usize {
        self.b.len()
    }
}

/// Rate, speed, and contract terms shared by the pricing routines.
#[derive(Debug, Clone, Copy)]
pub struct PricingParams {
    /// Mean-reversion speed, 1/years.
    pub k: f64,
    /// Continuously compounded risk-free rate, 1/years.
    pub r: f64,
    /// Contract maturity T in ACT/365 decimal years.
    pub maturity: f64,
    /// Strike in decimal volatility units; options only.
    pub strike: Option<f64>,
}

impl PricingParams {
    pub fn new(k: f64, r: f64, maturity: f64, strike: Option<f64>) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("speed k = {k} must be positive")));
        }
        if !r.is_finite() {
            return Err(Error::Domain(format!("rate r = {r} must be finite")));
        }
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(Error::Domain(format!(
                "maturity T = {maturity} must be positive"
            )));
        }
        if let Some(s) = strike {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Domain(format!("strike K = {s} must be positive")));
            }
        }
        Ok(Self {
            k,
            r,
            maturity,
            strike,
        })
    }

    fn strike_required(&self) -> Result<f64> {
        self.strike
            .ok_or_else(|| Error::Invalid("option pricing needs a strike".into()))
    }
}

/// Monomial coefficients (powers of the state x) of the terminal map
/// x ↦ h((x+1)/2), obtained by the binomial expansion of ((x+1)/2)^j.
pub fn state_space_coeffs(map: &QuantileMap) -> Vec<f64> {
    let degree = map.degree;
    // Pascal's triangle in f64; exact for the degrees in play
    let mut binom = vec![vec![0.0f64; degree + 1]; degree + 1];
    for j in 0..=degree {
        binom[j][0] = 1.0;
        binom[j][j] = 1.0;
        for i in 1..j {
            binom[j][i] = binom[j - 1][i - 1] + binom[j - 1][i];
        }
    }
    let mut out = vec![0.0f64; degree + 1];
    for (j, &c) in map.coeffs.iter().enumerate() {
        let w = c * 0.5f64.powi(j as i32);
        for i in 0..=j {
            out[i] += w * binom[j][i];
        }
    }
    out
}

/// Horner evaluation of a monomial coefficient vector (index = power).
pub fn eval_state_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// The unique state x* ∈ (−1, 1) where the terminal map crosses the strike,
/// by bisection to 1e-12; `None` when the strike is outside the fitted range
/// (the option payoff then has no kink inside the state space).
pub fn payoff_kink(map: &QuantileMap, strike: f64) -> Option<f64> {
    if !(strike > map.h_min && strike < map.h_max) {
        return None;
    }
    let coeffs = state_space_coeffs(map);
    let mut lo = -1.0f64;
    let mut hi = 1.0f64;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if eval_state_poly(&coeffs, mid) < strike {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Decay factor of eigen-mode n over an elapsed time tau.
pub fn eigen_decay(k: f64, n: usize, tau: f64) -> f64 {
    let nn = n as f64;
    (-0.5 * k * nn * (nn + 1.0) * tau).exp()
}

/// Futures-payoff projection. Exact through the monomial→Legendre basis
/// change when the truncation covers the map degree; quadrature otherwise.
pub fn project_futures(map: &QuantileMap, terms: usize) -> Result<SpectralCoeffs> {
    if terms == 0 {
        return Err(Error::Invalid("series needs at least one term".into()));
    }
    let coeffs = state_space_coeffs(map);
    let b = if terms > map.degree {
        let mut full = monomial_to_legendre(&coeffs).coeffs;
        full.resize(terms, 0.0);
        full
    } else {
        let rule = projection_rule();
        let f = |x: f64| eval_state_poly(&coeffs, x);
        let mut b = Vec::with_capacity(terms);
        for n in 0..terms {
            let ip = inner_product(&f, n, &rule, &[]);
            b.push((2.0 * n as f64 + 1.0) / 2.0 * ip);
        }
        b
    };
    Ok(SpectralCoeffs {
        b,
        kind: PayoffKind::Futures,
    })
}

/// Call-payoff projection of (h̃ − K)⁺ by kink-split quadrature.
pub fn project_call(map: &QuantileMap, strike: f64, terms: usize) -> Result<SpectralCoeffs> {
    if terms == 0 {
        return Err(Error::Invalid("series needs at least one term".into()));
    }
    if !(strike > 0.0) || !strike.is_finite() {
        return Err(Error::Domain(format!("strike K = {strike} must be positive")));
    }
    if strike >= map.h_max {
        return Ok(SpectralCoeffs {
            b: vec![0.0; terms],
            kind: PayoffKind::Call,
        });
    }
    if strike <= map.h_min {
        let mut fut = project_futures(map, terms)?;
        fut.b[0] -= strike;
        return Ok(SpectralCoeffs {
            b: fut.b,
            kind: PayoffKind::Call,
        });
    }
    let kink = payoff_kink(map, strike).expect("strike strictly inside fitted range");
    let coeffs = state_space_coeffs(map);
    let f = |x: f64| (eval_state_poly(&coeffs, x) - strike).max(0.0);
    let rule = projection_rule();
    let mut b = Vec::with_capacity(terms);
    for n in 0..terms {
        let ip = inner_product(&f, n, &rule, &[kink]);
        b.push((2.0 * n as f64 + 1.0) / 2.0 * ip);
    }
    Ok(SpectralCoeffs {
        b,
        kind: PayoffKind::Call,
    })
}

/// Put-payoff projection of (K − h̃)⁺, mirroring [`project_call`].
pub fn project_put(map: &QuantileMap, strike: f64, terms: usize) -> Result<SpectralCoeffs> {
    if terms == 0 {
        return Err(Error::Invalid("series needs at least one term".into()));
    }
    if !(strike > 0.0) || !strike.is_finite() {
        return Err(Error::Domain(format!("strike K = {strike} must be positive")));
    }
    if strike <= map.h_min {
        return Ok(SpectralCoeffs {
            b: vec![0.0; terms],
            kind: PayoffKind::Put,
        });
    }
    if strike >= map.h_max {
        // K − h̃ everywhere: constant-K projection minus the futures series
        let fut = project_futures(map, terms)?;
        let mut b: Vec<f64> = fut.b.iter().map(|v| -v).collect();
        b[0] += strike;
        return Ok(SpectralCoeffs {
            b,
            kind: PayoffKind::Put,
        });
    }
    let kink = payoff_kink(map, strike).expect("strike strictly inside fitted range");
    let coeffs = state_space_coeffs(map);
    let f = |x: f64| (strike - eval_state_poly(&coeffs, x)).max(0.0);
    let rule = projection_rule();
    let mut b = Vec::with_capacity(terms);
    for n in 0..terms {
        let ip = inner_product(&f, n, &rule, &[kink]);
        b.push((2.0 * n as f64 + 1.0) / 2.0 * ip);
    }
    Ok(SpectralCoeffs {
        b,
        kind: PayoffKind::Put,
    })
}

fn series_value(coeffs: &SpectralCoeffs, k: f64, tau: f64, x: f64) -> Result<f64> {
    let p = legendre_eval_all(coeffs.terms() - 1, x)?;
    let mut sum = 0.0;
    for (n, &b) in coeffs.b.iter().enumerate() {
        sum += b * eigen_decay(k, n, tau) * p[n];
    }
    Ok(sum)
}

fn check_time(t: f64, params: &PricingParams) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("valuation time t = {t} must be ≥ 0")));
    }
    if t > params.maturity {
        return Err(Error::Domain(format!(
            "valuation time t = {t} after maturity T = {}",
            params.maturity
        )));
    }
    Ok(params.maturity - t)
}

/// Futures price F(t, x) = Σ b_n·exp(−k·n(n+1)(T−t)/2)·P_n(x).
pub fn price_futures(t: f64, x: f64, coeffs: &SpectralCoeffs, params: &PricingParams) -> Result<f64> {
    if coeffs.kind != PayoffKind::Futures {
        return Err(Error::Invalid(format!(
            "futures pricing needs futures coefficients, got {:?}",
            coeffs.kind
        )));
    }
    let tau = check_time(t, params)?;
    series_value(coeffs, params.k, tau, x)
}

fn clip_option_value(v: f64, label: &str) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v > -1e-8 {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!(
            "{label} value {v:.3e} is negative beyond truncation tolerance; \
             increase the number of series terms"
        )))
    }
}

/// Call price e^{−r(T−t)}·Σ b_n·exp(−k·n(n+1)(T−t)/2)·P_n(x); truncation
/// residue in (−1e-8, 0) is reported as 0.
pub fn price_call(t: f64, x: f64, coeffs: &SpectralCoeffs, params: &PricingParams) -> Result<f64> {
    if coeffs.kind != PayoffKind::Call {
        return Err(Error::Invalid(format!(
            "call pricing needs call coefficients, got {:?}",
            coeffs.kind
        )));
    }
    params.strike_required()?;
    let tau = check_time(t, params)?;
    let value = (-params.r * tau).exp() * series_value(coeffs, params.k, tau, x)?;
    clip_option_value(value, "call")
}

/// Put price with payoff (K − h̃)⁺, same mechanics as [`price_call`].
pub fn price_put(t: f64, x: f64, coeffs: &SpectralCoeffs, params: &PricingParams) -> Result<f64> {
    if coeffs.kind != PayoffKind::Put {
        return Err(Error::Invalid(format!(
            "put pricing needs put coefficients, got {:?}",
            coeffs.kind
        )));
    }
    params.strike_required()?;
    let tau = check_time(t, params)?;
    let value = (-params.r * tau).exp() * series_value(coeffs, params.k, tau, x)?;
    clip_option_value(value, "put")
}

/// Futures and call prices across volatility levels (rows) and truncation
/// orders (columns), for convergence tables.
#[derive(Debug, Clone)]
pub struct TruncationReport {
    pub vix_levels: Vec<f64>,
    pub term_counts: Vec<usize>,
    pub futures: Vec<Vec<f64>>,
    pub calls: Vec<Vec<f64>>,
}

/// Evaluate the futures and the discounted call series at every
/// (level, truncation) pair. Levels are converted into states strictly
/// through the inverse map — levels outside the fitted range are an error,
/// never clamped.
///
/// This is a convergence diagnostic, so the table reports raw series
/// outputs: a heavily truncated call column may legitimately come out
/// slightly negative, which is exactly the truncation error the table is
/// meant to expose. Use [`price_call`] for production values with the
/// negativity guard.
pub fn truncation_report(
    map: &QuantileMap,
    vix_levels: &[f64],
    term_counts: &[usize],
    t: f64,
    params: &PricingParams,
) -> Result<TruncationReport> {
    let strike = params.strike_required()?;
    let tau = check_time(t, params)?;
    let discount = (-params.r * tau).exp();
    let mut futures = Vec::with_capacity(vix_levels.len());
    let mut calls = Vec::with_capacity(vix_levels.len());
    let fut_coeffs: Vec<SpectralCoeffs> = term_counts
        .iter()
        .map(|&n| project_futures(map, n))
        .collect::<Result<_>>()?;
    let call_coeffs: Vec<SpectralCoeffs> = term_counts
        .iter()
        .map(|&n| project_call(map, strike, n))
        .collect::<Result<_>>()?;
    for &vix in vix_levels {
        let x = crate::empirical_map::h_inverse(map, vix)?;
        let mut frow = Vec::with_capacity(term_counts.len());
        let mut crow = Vec::with_capacity(term_counts.len());
        for (fc, cc) in fut_coeffs.iter().zip(&call_coeffs) {
            frow.push(series_value(fc, params.k, tau, x)?);
            crow.push(discount * series_value(cc, params.k, tau, x)?);
        }
        futures.push(frow);
        calls.push(crow);
    }
    Ok(TruncationReport {
        vix_levels: vix_levels.to_vec(),
        term_counts: term_counts.to_vec(),
        futures,
        calls,
    })
}
