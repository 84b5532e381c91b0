use serde::{Deserialize, Serialize};

/// Running count, mean and sum of squared deviations (Welford), mergeable
/// with Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        let mean = if delta == 0.0 { self.mean } else { self.mean + delta * nb / n };
        let m2 = self.m2 + other.m2 + delta * delta * na * nb / n;
        Moments { count, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two values.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn result(&self) -> EstimatorResult {
        EstimatorResult {
            mean: self.mean,
            stderr: (self.variance() / self.count.max(1) as f64).sqrt(),
            samples: self.count,
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

/// Sample mean with its standard error `s / sqrt(samples)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl EstimatorResult {
    /// `|mean - target|` in units of the standard error (infinite when the
    /// error is zero and the mean misses).
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_input_has_zero_spread() {
        let m: Moments = std::iter::repeat_n(1.0, 1000).collect();
        let r = m.result();
        assert_eq!((r.mean, r.stderr, r.samples), (1.0, 0.0, 1000));
    }

    #[test]
    fn matches_two_pass_formulas() {
        let xs: Vec<f64> = (0..50).map(|k| ((k * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let m: Moments = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((m.mean() - mean).abs() < 1e-14);
        assert!((m.variance() - var).abs() < 1e-13);
        assert!((m.result().stderr - (var / 50.0).sqrt()).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn merge_order_does_not_matter(
            xs in prop::collection::vec(-1e3f64..1e3, 2..400),
            cuts in prop::collection::vec(0usize..400, 0..8),
            rotate in 0usize..8,
        ) {
            let mut bounds: Vec<usize> = cuts.into_iter().map(|c| c % xs.len()).collect();
            bounds.push(0);
            bounds.push(xs.len());
            bounds.sort_unstable();
            let parts: Vec<Moments> = bounds.windows(2).map(|w| xs[w[0]..w[1]].iter().copied().collect()).collect();
            let forward = parts.iter().fold(Moments::default(), |acc, p| acc.merge(p));
            let mut rotated = parts.clone();
            let len = rotated.len();
            rotated.rotate_left(rotate % len);
            let other = rotated.iter().rev().fold(Moments::default(), |acc, p| acc.merge(p));
            let whole: Moments = xs.iter().copied().collect();
            prop_assert_eq!(forward.count(), whole.count());
            let scale = whole.mean().abs().max(1.0);
            prop_assert!((forward.mean() - other.mean()).abs() <= 1e-12 * scale);
            prop_assert!((forward.mean() - whole.mean()).abs() <= 1e-12 * scale);
            prop_assert!((forward.variance() - other.variance()).abs() <= 1e-9 * whole.variance().max(1.0));
        }
    }
}
