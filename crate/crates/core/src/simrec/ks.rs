//! Kolmogorov–Smirnov statistics with the asymptotic Kolmogorov p-value.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Two-sample test of equality in distribution.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "KS needs non-empty samples");
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while ia < a.len() && ib < b.len() {
        let x = a[ia].min(b[ib]);
        while ia < a.len() && a[ia] <= x {
            ia += 1;
        }
        while ib < b.len() && b[ib] <= x {
            ib += 1;
        }
        d = d.max((ia as f64 / na - ib as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    KsResult { statistic: d, p_value: kolmogorov_q((en + 0.12 + 0.11 / en) * d) }
}

/// One-sample test against a continuous cdf.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    assert!(!xs.is_empty(), "KS needs a non-empty sample");
    let xs = sorted(xs);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |acc, (k, &x)| {
        let f = cdf(x);
        acc.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n)
    });
    let en = n.sqrt();
    KsResult { statistic: d, p_value: kolmogorov_q((en + 0.12 + 0.11 / en) * d) }
}

/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_q_values() {
        // Standard Kolmogorov critical points.
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
        assert!(kolmogorov_q(5.0) < 1e-20);
    }

    #[test]
    fn identical_and_disjoint_samples() {
        let a: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let same = ks_two_sample(&a, &a);
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
        let b: Vec<f64> = (0..100).map(|k| 1000.0 + k as f64).collect();
        let apart = ks_two_sample(&a, &b);
        assert_eq!(apart.statistic, 1.0);
        assert!(apart.p_value < 1e-10);
    }

    #[test]
    fn statistic_by_brute_force() {
        let a = [0.1, 0.4, 0.4, 0.9, 1.3];
        let b = [0.2, 0.4, 1.0, 1.1];
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&y| y <= x).count() as f64 / s.len() as f64;
        let brute = a.iter().chain(&b).map(|&x| (ecdf(&a, x) - ecdf(&b, x)).abs()).fold(0.0, f64::max);
        assert_eq!(ks_two_sample(&a, &b).statistic, brute);
    }

    #[test]
    fn one_sample_uniform_grid() {
        let xs: Vec<f64> = (0..1000).map(|k| (k as f64 + 0.5) / 1000.0).collect();
        let r = ks_one_sample(&xs, |x| x);
        assert!((r.statistic - 0.0005).abs() < 1e-12);
        assert!(r.p_value > 0.99);
    }
}
