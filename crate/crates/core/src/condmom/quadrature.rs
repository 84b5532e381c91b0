//! Gauss–Legendre rules with node doubling 16 → 32 → … → 1024.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::{Error, Result};

pub const FIRST_NODES: usize = 16;
pub const MAX_NODES: usize = 1024;
const LEVELS: usize = 7;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    dp = legendre_with_derivative(n, x).1;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// `∫_a^b f`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(mid + half * x)).sum();
        sum * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule(level: usize) -> &'static Rule {
    static RULES: [OnceLock<Rule>; LEVELS] = [const { OnceLock::new() }; LEVELS];
    RULES[level].get_or_init(|| Rule::legendre(FIRST_NODES << level))
}

/// Integrates over `[a, b]`, doubling the node count until two successive
/// estimates differ by at most `max(1e-12, 1e-10 |value|)`.
pub fn integrate(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
    let mut previous = rule(0).integrate(a, b, &mut f);
    for level in 1..LEVELS {
        let current = rule(level).integrate(a, b, &mut f);
        if !current.is_finite() {
            return Err(Error::NoConvergence { nodes: FIRST_NODES << level, last: current, previous });
        }
        if (current - previous).abs() <= 1e-12_f64.max(1e-10 * current.abs()) {
            return Ok(current);
        }
        previous = current;
    }
    let last = rule(LEVELS - 1).integrate(a, b, &mut f);
    let before = rule(LEVELS - 2).integrate(a, b, &mut f);
    Err(Error::NoConvergence { nodes: MAX_NODES, last, previous: before })
}
