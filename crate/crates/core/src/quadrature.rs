//! Gauss–Legendre rules mapped onto the angular interval `[0, π]`.
//!
//! Rules are built once per node count and shared through a process-wide
//! cache, so every kernel configuration with the same ladder reuses them.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// A Gauss–Legendre rule on `[0, π]`, stored in the form the ring kernel
/// consumes: `cos θ`, `1 − cos θ` (computed without cancellation) and the
/// weight.
#[derive(Debug)]
pub struct AngularRule {
    pub cos: Vec<f64>,
    pub one_minus_cos: Vec<f64>,
    pub weight: Vec<f64>,
}

impl AngularRule {
    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    fn build(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut cos = Vec::with_capacity(n);
        let mut one_minus_cos = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = 0.5 * PI * (xi + 1.0);
            let half = 0.5 * theta;
            cos.push(theta.cos());
            one_minus_cos.push(2.0 * half.sin() * half.sin());
            weight.push(0.5 * PI * wi);
        }
        Self {
            cos,
            one_minus_cos,
            weight,
        }
    }
}

/// Returns the shared rule with `n` nodes.
pub fn angular_rule(n: usize) -> Arc<AngularRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<AngularRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    // Built outside the lock; a racing builder produces an identical rule.
    let rule = Arc::new(AngularRule::build(n));
    let mut guard = cache.lock().expect("rule cache poisoned");
    Arc::clone(guard.entry(n).or_insert(rule))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// ascending in `x`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let k = i as f64 + 1.0;
        let mut t = (PI * (k - 0.25) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() <= 1e-16 * t.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, t);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 7, 64, 513, 4096] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        // degree 9 is the highest exact degree for 5 nodes
        let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((approx - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn angular_rule_integrates_cosine_moments() {
        let rule = angular_rule(64);
        let int_cos2: f64 = rule
            .cos
            .iter()
            .zip(&rule.weight)
            .map(|(c, w)| w * c * c)
            .sum();
        assert!((int_cos2 - PI / 2.0).abs() < 1e-13);
        for (c, omc) in rule.cos.iter().zip(&rule.one_minus_cos) {
            assert!((1.0 - c - omc).abs() < 1e-15);
        }
    }

    #[test]
    fn cache_returns_shared_rule() {
        let a = angular_rule(128);
        let b = angular_rule(128);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
