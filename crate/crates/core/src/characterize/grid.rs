use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::identity::{Arity, Point};
use crate::hazard::HazardModel;
use crate::simrec::mix64;
use crate::{Error, Result};

/// Which of the two four-point orderings a quadruple scan covers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadOrder {
    /// `u < s < t < v`.
    Nested,
    /// `s < u < v < t`.
    Enclosing,
    #[default]
    Both,
}

/// `count` base points between `lo` and `hi`, geometric in the distance to
/// `l_F`, and at most `max_tuples` ordered tuples per ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub max_tuples: usize,
    pub order: QuadOrder,
}

pub const DEFAULT_COUNT: usize = 6;
pub const DEFAULT_MAX_TUPLES: usize = 15;

/// Enough for every pair of 64 base points.
const MAX_COUNT: usize = 64;

impl GridSpec {
    /// `l_F + 0.25` to `l_F + 8`, six points.
    pub fn default_for(model: &HazardModel) -> Self {
        GridSpec {
            lo: model.lf() + 0.25,
            hi: model.lf() + 8.0,
            count: DEFAULT_COUNT,
            max_tuples: DEFAULT_MAX_TUPLES,
            order: QuadOrder::Both,
        }
    }

    /// `lo:hi:count` or `lo:hi:count:max_tuples`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let bad = || Error::usage(format!("grid must be lo:hi:count[:max_tuples], got {text:?}"));
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let count = parse_count(parts[2]).ok_or_else(bad)?;
        let max_tuples = match parts.get(3) {
            Some(m) => parse_count(m).ok_or_else(bad)?,
            None => DEFAULT_MAX_TUPLES,
        };
        Ok(GridSpec { lo, hi, count, max_tuples, order: QuadOrder::Both })
    }

    pub fn with_order(self, order: QuadOrder) -> Self {
        GridSpec { order, ..self }
    }

    pub fn base_points(&self, model: &HazardModel) -> Result<Vec<f64>> {
        let lf = model.lf();
        if !(self.lo.is_finite() && self.hi.is_finite() && lf < self.lo && self.lo < self.hi) {
            return Err(Error::usage(format!(
                "grid needs l_F = {lf} < lo < hi, got lo = {}, hi = {}",
                self.lo, self.hi
            )));
        }
        if !(1..=MAX_COUNT).contains(&self.count) || self.max_tuples == 0 {
            return Err(Error::usage(format!(
                "grid count must be in 1..={MAX_COUNT} and max_tuples >= 1, got {} and {}",
                self.count, self.max_tuples
            )));
        }
        if self.count == 1 {
            return Ok(vec![self.lo]);
        }
        // exp2/log2 keep power-of-two ratios exact.
        let (a, b) = (self.lo - lf, self.hi - lf);
        let step = (b / a).log2() / (self.count - 1) as f64;
        let mut pts: Vec<f64> = (0..self.count).map(|i| lf + a * (i as f64 * step).exp2()).collect();
        pts[0] = self.lo;
        pts[self.count - 1] = self.hi;
        if pts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::usage("grid base points are not distinct"));
        }
        Ok(pts)
    }

    /// Ordered tuples of the base points for `arity`, subsampled with a
    /// generator seeded from `seed` when there are more than `max_tuples`.
    pub fn points(&self, arity: Arity, model: &HazardModel, seed: u64) -> Result<Vec<Point>> {
        let base = self.base_points(model)?;
        let pick = |size: usize, tag: u64| subsample(combinations(base.len(), size), self.max_tuples, seed, tag);
        let mut out = Vec::new();
        match arity {
            Arity::Pair => out.extend(pick(2, 0).iter().map(|c| Point::pair(base[c[0]], base[c[1]]))),
            Arity::Triple => out.extend(pick(3, 1).iter().map(|c| Point::triple(base[c[0]], base[c[1]], base[c[2]]))),
            Arity::Quadruple => {
                let q = |c: &Vec<usize>| [base[c[0]], base[c[1]], base[c[2]], base[c[3]]];
                if matches!(self.order, QuadOrder::Nested | QuadOrder::Both) {
                    out.extend(pick(4, 2).iter().map(q).map(|[u, s, t, v]| Point::quadruple(u, s, t, v)));
                }
                if matches!(self.order, QuadOrder::Enclosing | QuadOrder::Both) {
                    out.extend(pick(4, 3).iter().map(q).map(|[s, u, v, t]| Point::quadruple(u, s, t, v)));
                }
            }
        }
        if out.is_empty() {
            return Err(Error::usage(format!("grid with {} base points has no {arity:?} tuples", base.len())));
        }
        Ok(out)
    }
}

fn parse_count(text: &str) -> Option<usize> {
    if let Ok(n) = text.parse::<usize>() {
        return Some(n);
    }
    let x: f64 = text.parse().ok()?;
    (x.fract() == 0.0 && x >= 0.0 && x <= usize::MAX as f64).then_some(x as usize)
}

/// Strictly increasing index tuples of length `size` from `0..n`, in
/// lexicographic order.
fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

fn subsample(all: Vec<Vec<usize>>, max: usize, seed: u64, tag: u64) -> Vec<Vec<usize>> {
    if all.len() <= max {
        return all;
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(mix64(seed, tag));
    let mut keep = rand::seq::index::sample(&mut rng, all.len(), max).into_vec();
    keep.sort_unstable();
    keep.into_iter().map(|i| all[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_base_points_are_exact() {
        let m = HazardModel::weibull(0.5, 1.0).unwrap();
        let g = GridSpec::default_for(&m);
        assert_eq!(g.base_points(&m).unwrap(), vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0]);
        let m = HazardModel::exponential(2.0, 1.0).unwrap();
        let g = GridSpec::default_for(&m);
        assert_eq!(g.base_points(&m).unwrap(), vec![1.25, 1.5, 2.0, 3.0, 5.0, 9.0]);
    }

    #[test]
    fn tuple_counts() {
        let m = HazardModel::linear_quadratic();
        let g = GridSpec::default_for(&m);
        assert_eq!(g.points(Arity::Pair, &m, 0).unwrap().len(), 15);
        assert_eq!(g.points(Arity::Triple, &m, 0).unwrap().len(), 15);
        assert_eq!(g.points(Arity::Quadruple, &m, 0).unwrap().len(), 30);
        assert_eq!(g.with_order(QuadOrder::Nested).points(Arity::Quadruple, &m, 0).unwrap().len(), 15);
        let small = GridSpec { count: 3, ..g };
        assert_eq!(small.points(Arity::Quadruple, &m, 0).map_err(|e| matches!(e, Error::Usage(_))), Err(true));
    }

    #[test]
    fn subsampling_is_seeded_and_ordered() {
        let m = HazardModel::linear_quadratic();
        let g = GridSpec::default_for(&m);
        let a = g.points(Arity::Triple, &m, 7).unwrap();
        assert_eq!(a, g.points(Arity::Triple, &m, 7).unwrap());
        assert_ne!(a, g.points(Arity::Triple, &m, 8).unwrap());
        let big = GridSpec { count: 11, max_tuples: 50, ..g };
        assert_eq!(big.points(Arity::Pair, &m, 0).unwrap().len(), 50);
    }

    #[test]
    fn orderings() {
        let m = HazardModel::linear_quadratic();
        let g = GridSpec::default_for(&m);
        for p in g.points(Arity::Quadruple, &m, 0).unwrap() {
            let (s, t) = (p.s.unwrap(), p.t.unwrap());
            assert!((p.u < s && s < t && t < p.v) || (s < p.u && p.u < p.v && p.v < t));
        }
    }

    #[test]
    fn parsing() {
        let g = GridSpec::parse("0.5:4:5").unwrap();
        assert_eq!((g.lo, g.hi, g.count, g.max_tuples), (0.5, 4.0, 5, 15));
        assert_eq!(GridSpec::parse("1:2:1e1:40").unwrap().count, 10);
        for bad in ["1:2", "a:2:3", "1:2:3.5", "1:2:3:4:5"] {
            assert!(GridSpec::parse(bad).is_err(), "{bad}");
        }
        let m = HazardModel::exponential(1.0, 1.0).unwrap();
        assert!(GridSpec::parse("1:3:4").unwrap().base_points(&m).is_err());
        assert!(GridSpec::parse("3:2:4").unwrap().base_points(&m).is_err());
    }
}
