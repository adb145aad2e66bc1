//! Legendre polynomial kernel: evaluation, Gauss–Legendre quadrature,
//! inner products on [-1, 1] (with optional kink splitting), and the exact
//! monomial → Legendre basis change.

use crate::error::{Error, Result};

/// Value of the Legendre polynomial P_n at `x` via the three-term recurrence
/// (k+1) P_{k+1} = (2k+1) x P_k − k P_{k−1}.
pub fn legendre_eval(n: usize, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(legendre_recurrence(n, x))
}

/// Values of P_0(x) .. P_n(x) in one recurrence sweep.
pub fn legendre_eval_all(n: usize, x: f64) -> Result<Vec<f64>> {
    check_unit_interval(x)?;
    let mut vals = Vec::with_capacity(n + 1);
    let mut pm1 = 1.0; // P_0
    vals.push(pm1);
    if n == 0 {
        return Ok(vals);
    }
    let mut p = x; // P_1
    vals.push(p);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * pm1) / (kf + 1.0);
        pm1 = p;
        p = next;
        vals.push(p);
    }
    Ok(vals)
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "Legendre evaluation requires |x| <= 1, got {x}"
        )));
    }
    Ok(())
}

fn legendre_recurrence(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut pm1 = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * pm1) / (kf + 1.0);
        pm1 = p;
        p = next;
    }
    p
}

/// Derivative P_n'(x) for interior x, used by the Newton solve for nodes:
/// P_n'(x) = n (x P_n − P_{n−1}) / (x² − 1).
fn legendre_deriv(n: usize, x: f64) -> f64 {
    debug_assert!(n >= 1 && x.abs() < 1.0);
    let pn = legendre_recurrence(n, x);
    let pnm1 = legendre_recurrence(n - 1, x);
    (n as f64) * (x * pn - pnm1) / (x * x - 1.0)
}

/// Gauss–Legendre quadrature rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

/// Gauss–Legendre nodes and weights of order `m` by Newton iteration on P_m,
/// converged to 1e-14 in the node position. Nodes come out ascending and
/// exactly symmetric about 0; weights sum to 2.
pub fn gauss_rule(m: usize) -> QuadratureRule {
    assert!(m >= 1, "quadrature order must be at least 1");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m / 2 {
        // Tricomi-style initial guess for the i-th root from the +1 end.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        for _ in 0..100 {
            let dx = legendre_recurrence(m, x) / legendre_deriv(m, x);
            x -= dx;
            if dx.abs() < 1e-14 {
                break;
            }
        }
        let dp = legendre_deriv(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        let mid = m / 2;
        nodes[mid] = 0.0;
        let dp = legendre_deriv(m, 0.0);
        weights[mid] = 2.0 / (dp * dp);
    }
    QuadratureRule {
        nodes,
        weights,
        order: m,
    }
}

/// Process-wide cache of quadrature rules keyed by order. Calibration and
/// benchmark pricing rebuild the same rule thousands of times otherwise.
pub fn shared_rule(m: usize) -> std::sync::Arc<QuadratureRule> {
    use std::collections::HashMap;
    use std::sync::{Arc, OnceLock, RwLock};
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&m) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(gauss_rule(m));
    Arc::clone(
        cache
            .write()
            .expect("rule cache poisoned")
            .entry(m)
            .or_insert(rule),
    )
}

impl QuadratureRule {
    /// ∫_{-1}^{1} f(x) dx.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// ∫_a^b f(x) dx by affine transplant of the rule.
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        half * sum
    }
}

/// ⟨f, P_n⟩ = ∫_{-1}^{1} f(x) P_n(x) dx.
///
/// `kinks` lists interior points where f is non-smooth (e.g. an option
/// payoff's strike crossing); the integral is then evaluated piecewise with
/// the same rule transplanted to each smooth sub-interval. Kinks must be
/// sorted and lie inside (−1, 1).
pub fn inner_product<F: Fn(f64) -> f64>(
    f: F,
    n: usize,
    rule: &QuadratureRule,
    kinks: &[f64],
) -> f64 {
    let g = |x: f64| f(x) * legendre_recurrence(n, x);
    if kinks.is_empty() {
        return rule.integrate(g);
    }
    let mut total = 0.0;
    let mut left = -1.0;
    for &kink in kinks {
        debug_assert!(kink > left && kink < 1.0, "kinks must be sorted in (-1,1)");
        total += rule.integrate_on(left, kink, g);
        left = kink;
    }
    total + rule.integrate_on(left, 1.0, g)
}

/// A finite expansion Σ a_n P_n(x).
#[derive(Debug, Clone)]
pub struct LegendreSeries {
    pub coeffs: Vec<f64>,
}

impl LegendreSeries {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let p = legendre_eval_all(self.coeffs.len().saturating_sub(1), x)?;
        Ok(self.coeffs.iter().zip(&p).map(|(a, v)| a * v).sum())
    }
}

/// Exact basis change from monomial coefficients (index = power of x) to the
/// Legendre basis, using
///
///   x^j = Σ_{n ≤ j, n ≡ j (mod 2)}  (2n+1) j! / (2^m m! (j+n+1)!!) · P_n,
///
/// with m = (j−n)/2. All terms are positive, so no cancellation occurs in the
/// per-monomial expansion itself.
pub fn monomial_to_legendre(coeffs: &[f64]) -> LegendreSeries {
    if coeffs.is_empty() {
        return LegendreSeries { coeffs: vec![0.0] };
    }
    let d = coeffs.len() - 1;
    let mut a = vec![0.0; d + 1];
    // factorials as f64: relative error ~ a few ulps, magnitudes < 1e35 for d ≤ 30
    let mut fact = vec![1.0f64; d + 1];
    for j in 1..=d {
        fact[j] = fact[j - 1] * j as f64;
    }
    for (j, &cj) in coeffs.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        let mut n = j as isize;
        while n >= 0 {
            let m = (j - n as usize) / 2;
            let mut dfac = 1.0; // (j + n + 1)!!
            let mut t = j as isize + n + 1;
            while t > 1 {
                dfac *= t as f64;
                t -= 2;
            }
            let coef = (2.0 * n as f64 + 1.0) * fact[j] / (2f64.powi(m as i32) * fact[m] * dfac);
            a[n as usize] += cj * coef;
            n -= 2;
        }
    }
    LegendreSeries { coeffs: a }
}
