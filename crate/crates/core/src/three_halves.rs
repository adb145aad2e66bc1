//! Closed-form call pricer for the 3/2 stochastic-volatility benchmark
//! dV = (αV + βV²)dt + k·V^{3/2}dW, via a modified-Bessel integral kernel.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Arguments above this switch Bessel evaluation from the power series to
/// the large-argument asymptotic expansion.
const BESSEL_SERIES_LIMIT: f64 = 30.0;

/// Parameters of the 3/2 dynamics and of the call contract priced under it.
#[derive(Debug, Clone, Copy)]
pub struct ThreeHalvesParams {
    /// Linear drift coefficient α, 1/years; must be positive so the
    /// time-change factor 1 − e^{−ατ} stays positive.
    pub alpha: f64,
    /// Quadratic drift coefficient β; the closed form requires β < 0.
    pub beta: f64,
    /// Volatility-of-volatility coefficient k of the V^{3/2} term.
    pub k32: f64,
    /// Risk-free rate, 1/years.
    pub r: f64,
    /// Strike, decimal volatility units.
    pub strike: f64,
    /// Contract expiry T, years.
    pub expiry: f64,
    /// Valuation time t < T, years.
    pub t: f64,
}

impl ThreeHalvesParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: f64,
        beta: f64,
        k32: f64,
        r: f64,
        strike: f64,
        expiry: f64,
        t: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
        }
        if !(beta < 0.0) {
            return Err(Error::Domain(format!("beta = {beta} must be negative")));
        }
        if !(k32 > 0.0) || !k32.is_finite() {
            return Err(Error::Domain(format!("k32 = {k32} must be positive")));
        }
        if !r.is_finite() {
            return Err(Error::Domain(format!("rate r = {r} must be finite")));
        }
        if !(strike > 0.0) || !strike.is_finite() {
            return Err(Error::Domain(format!("strike K = {strike} must be positive")));
        }
        if !(expiry > 0.0) || !(0.0..expiry).contains(&t) {
            return Err(Error::Domain(format!(
                "need 0 ≤ t < T, got t = {t}, T = {expiry}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            k32,
            r,
            strike,
            expiry,
            t,
        })
    }

    fn tau(&self) -> f64 {
        self.expiry - self.t
    }

    /// Bessel order ν = 1 − 2β/k²; positive whenever β < 0.
    pub fn order(&self) -> f64 {
        1.0 - 2.0 * self.beta / (self.k32 * self.k32)
    }
}

/// Power-series tail Σ_m (z/2)^{2m+ν}/(m!·Γ(m+ν+1)); valid for moderate z.
fn bessel_series(nu: f64, z: f64) -> f64 {
    let half = z / 2.0;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let ratio_num = half * half;
    let mut sum = term;
    for m in 0..500 {
        let mm = m as f64;
        term *= ratio_num / ((mm + 1.0) * (mm + nu + 1.0));
        sum += term;
        if term < 1e-16 * sum {
            break;
        }
    }
    sum
}

/// Large-argument expansion of e^{−z}·I_ν(z):
/// (1/√(2πz))·Σ_j (−1)^j·a_j(ν)/z^j with a_j(ν) = Π_i (4ν²−(2i−1)²)/(j!·8^j).
/// The expansion is asymptotic: summation stops at the smallest term.
fn bessel_asymptotic_scaled(nu: f64, z: f64) -> f64 {
    let four_nu2 = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev_abs = f64::INFINITY;
    for j in 1..=20 {
        let jj = j as f64;
        term *= -(four_nu2 - (2.0 * jj - 1.0).powi(2)) / (jj * 8.0 * z);
        if term.abs() >= prev_abs {
            break;
        }
        prev_abs = term.abs();
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * z).sqrt()
}

/// Modified Bessel function of the first kind, I_ν(z), for ν ≥ 0, z ≥ 0.
/// Series evaluation for z ≤ 30, asymptotic expansion beyond; values beyond
/// the f64 range come back as +∞ rather than an error, so callers can fall
/// back to the scaled variant.
pub fn bessel_i(nu: f64, z: f64) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("Bessel order {nu} must be ≥ 0")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Bessel argument {z} must be ≥ 0")));
    }
    if z == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if z <= BESSEL_SERIES_LIMIT {
        Ok(bessel_series(nu, z))
    } else {
        // e^z overflows past ~709.78; +∞ signals the overflow
        Ok(z.exp() * bessel_asymptotic_scaled(nu, z))
    }
}

/// Exponentially scaled variant e^{−z}·I_ν(z), finite for all representable z.
pub fn bessel_i_scaled(nu: f64, z: f64) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("Bessel order {nu} must be ≥ 0")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Bessel argument {z} must be ≥ 0")));
    }
    if z == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if z <= BESSEL_SERIES_LIMIT {
        Ok((-z).exp() * bessel_series(nu, z))
    } else {
        Ok(bessel_asymptotic_scaled(nu, z))
    }
}

/// Terms shared by every quadrature node of the pricing integral.
struct Kernel {
    c: f64,
    v_term: f64,
    q: f64,
    ln_gamma_q1: f64,
}

impl Kernel {
    fn new(v: f64, params: &ThreeHalvesParams) -> Self {
        let tau = params.tau();
        let k2 = params.k32 * params.k32;
        let p = 1.0 - (-params.alpha * tau).exp();
        let c = 2.0 * params.alpha / (k2 * p);
        let v_term = c * (-params.alpha * tau).exp() / v;
        let q = params.order();
        Kernel {
            c,
            v_term,
            q,
            ln_gamma_q1: ln_gamma(q + 1.0),
        }
    }

    /// Transition-kernel factor e^{−cu−v'}·Σ_m (cu)^q·(v'·cu)^m/(m!·Γ(m+q+1)),
    /// algebraically equal to
    /// exp(−(√(cu)−√v')²)·(cu/v')^{q/2}·e^{−z}I_q(z) with z = 2√(cu·v'),
    /// but with the v'-powers cancelled so it stays stable as v' → 0.
    fn density(&self, u: f64) -> f64 {
        let cu = self.c * u;
        let z = 2.0 * (cu * self.v_term).sqrt();
        if z <= BESSEL_SERIES_LIMIT {
            let mut term = (self.q * cu.ln() - self.ln_gamma_q1).exp();
            let mut sum = term;
            let ratio_num = self.v_term * cu;
            for m in 0..500 {
                let mm = m as f64;
                term *= ratio_num / ((mm + 1.0) * (mm + self.q + 1.0));
                sum += term;
                if term < 1e-16 * sum {
                    break;
                }
            }
            (-cu - self.v_term).exp() * sum
        } else {
            let exponent = -(cu.sqrt() - self.v_term.sqrt()).powi(2)
                + 0.5 * self.q * (cu.ln() - self.v_term.ln());
            exponent.exp() * bessel_asymptotic_scaled(self.q, z)
        }
    }

    /// Literal textbook evaluation with explicit exp/power/Bessel products;
    /// overflows where the stable form does not.
    fn density_direct(&self, u: f64) -> Result<f64> {
        let cu = self.c * u;
        let z = 2.0 * (cu * self.v_term).sqrt();
        let i = bessel_i(self.q, z)?;
        Ok((-(cu.sqrt() - self.v_term.sqrt()).powi(2)).exp()
            * (cu / self.v_term).powf(self.q / 2.0)
            * (-z).exp()
            * i)
    }
}

fn integrate_log_grid<F: Fn(f64) -> Result<f64>>(
    strike: f64,
    quad_points: usize,
    density: F,
    c: f64,
) -> Result<f64> {
    let rule = crate::legendre::shared_rule(quad_points);
    let s_hi = (1.0 / strike).ln();
    let s_lo = (1e-12 / strike).ln();
    let mid = 0.5 * (s_lo + s_hi);
    let half = 0.5 * (s_hi - s_lo);
    let mut integral = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let s = mid + half * node;
        let u = s.exp();
        let payoff = 1.0 / u - strike;
        integral += half * w * payoff * c * density(u)? * u;
    }
    Ok(integral)
}

/// Call price under the 3/2 dynamics: discounted integral of the payoff
/// against the transition kernel of 1/V (a square-root process), evaluated
/// by Gauss quadrature in log-u to resolve the u → 0⁺ decay.
pub fn price_call_32(v: f64, params: &ThreeHalvesParams, quad_points: usize) -> Result<f64> {
    validate_pricing_inputs(v, params, quad_points)?;
    let kernel = Kernel::new(v, params);
    let integral = integrate_log_grid(params.strike, quad_points, |u| Ok(kernel.density(u)), kernel.c)?;
    let price = (-params.r * params.tau()).exp() * integral;
    if !price.is_finite() {
        return Err(Error::Numerical(
            "3/2 price overflowed; use the log-scaled kernel (exp·Bessel products \
             must be combined in log space)"
                .into(),
        ));
    }
    Ok(price)
}

/// Reference evaluation through the literal formula (unscaled Bessel times
/// explicit exponentials); agrees with [`price_call_32`] where it is finite
/// and overflows sooner — kept for cross-checking the stable kernel.
pub fn price_call_32_direct(v: f64, params: &ThreeHalvesParams, quad_points: usize) -> Result<f64> {
    validate_pricing_inputs(v, params, quad_points)?;
    let kernel = Kernel::new(v, params);
    let integral =
        integrate_log_grid(params.strike, quad_points, |u| kernel.density_direct(u), kernel.c)?;
    let price = (-params.r * params.tau()).exp() * integral;
    if !price.is_finite() {
        return Err(Error::Numerical(
            "3/2 price overflowed; use the log-scaled kernel (exp·Bessel products \
             must be combined in log space)"
                .into(),
        ));
    }
    Ok(price)
}

fn validate_pricing_inputs(v: f64, params: &ThreeHalvesParams, quad_points: usize) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("volatility level V = {v} must be positive")));
    }
    if quad_points < 64 {
        return Err(Error::Invalid(format!(
            "need at least 64 quadrature points, got {quad_points}"
        )));
    }
    ThreeHalvesParams::new(
        params.alpha,
        params.beta,
        params.k32,
        params.r,
        params.strike,
        params.expiry,
        params.t,
    )?;
    Ok(())
}
