//! Distributions described by their cumulative hazard `H(x) = -ln(1 - F(x))`.
//!
//! Three families ship: the shifted exponential `H = c(x - l_F)`, the Weibull
//! `H = c x^alpha` and the negative control `H = x + x²`. Models are parsed from
//! the textual form `exp:c=<f>[,lf=<f>]`, `weibull:alpha=<f>,c=<f>` or `linquad`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Exponential,
    Weibull,
    LinearQuadratic,
}

/// A continuous law on `(l_F, ∞)` given through its cumulative hazard.
///
/// Immutable once built; `c` and `alpha` are only meaningful for the families
/// that use them (the negative control stores `c = alpha = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HazardModel {
    family: Family,
    c: f64,
    alpha: f64,
    lf: f64,
}

impl HazardModel {
    pub fn exponential(c: f64, lf: f64) -> Result<Self> {
        check_positive("c", c)?;
        if !lf.is_finite() {
            return Err(Error::usage(format!("lf must be finite, got {lf}")));
        }
        Ok(Self { family: Family::Exponential, c, alpha: 1.0, lf })
    }

    pub fn weibull(alpha: f64, c: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("c", c)?;
        Ok(Self { family: Family::Weibull, c, alpha, lf: 0.0 })
    }

    /// `H(x) = x + x²` on `(0, ∞)`.
    pub fn linear_quadratic() -> Self {
        Self { family: Family::LinearQuadratic, c: 1.0, alpha: 1.0, lf: 0.0 }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Left endpoint of the support.
    pub fn lf(&self) -> f64 {
        self.lf
    }

    /// Whether this is a Weibull law with shape exactly `alpha`.
    pub fn is_weibull_with_shape(&self, alpha: f64) -> bool {
        self.family == Family::Weibull && self.alpha == alpha
    }

    pub fn cumulative_hazard(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        Ok(self.h(x))
    }

    pub fn hazard_rate(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        Ok(self.h_prime(x))
    }

    pub fn inverse_hazard(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y <= 0.0 || y.is_infinite() {
            return Err(Error::domain(format!("inverse hazard needs y > 0, got {y}")));
        }
        Ok(self.h_inv(y))
    }

    /// `F(x) = 1 - exp(-H(x))`, zero at and below `l_F`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lf {
            0.0
        } else {
            -(-self.h(x)).exp_m1()
        }
    }

    pub(crate) fn check_support(&self, x: f64) -> Result<()> {
        if x > self.lf && x.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("x = {x} is not above l_F = {}", self.lf)))
        }
    }

    /// Conditioning values may sit at `l_F` itself, where `H = 0`.
    pub(crate) fn check_covariate(&self, x: f64) -> Result<()> {
        if x >= self.lf && x.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("covariate {x} is below l_F = {}", self.lf)))
        }
    }

    // Unchecked kernels; callers guarantee x >= l_F and y > 0.

    #[inline]
    pub(crate) fn h(&self, x: f64) -> f64 {
        match self.family {
            Family::Exponential => self.c * (x - self.lf),
            Family::Weibull => self.c * x.powf(self.alpha),
            Family::LinearQuadratic => x + x * x,
        }
    }

    #[inline]
    pub(crate) fn h_prime(&self, x: f64) -> f64 {
        match self.family {
            Family::Exponential => self.c,
            Family::Weibull => self.c * self.alpha * x.powf(self.alpha - 1.0),
            Family::LinearQuadratic => 1.0 + 2.0 * x,
        }
    }

    #[inline]
    pub(crate) fn h_inv(&self, y: f64) -> f64 {
        match self.family {
            Family::Exponential => self.lf + y / self.c,
            Family::Weibull => {
                let z = y / self.c;
                if self.alpha == 1.0 {
                    z
                } else if self.alpha == 0.5 {
                    z * z
                } else {
                    z.powf(self.alpha.recip())
                }
            }
            // Root of x² + x - y, written without cancellation for small y.
            Family::LinearQuadratic => 2.0 * y / (1.0 + (1.0 + 4.0 * y).sqrt()),
        }
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::usage(format!("{name} must be positive and finite, got {value}")))
    }
}

/// Parses the textual model form used on the command line.
pub fn parse_model(spec: &str) -> Result<HazardModel> {
    spec.parse()
}

impl FromStr for HazardModel {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, rest) = match spec.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (spec, None),
        };
        let mut pairs = Vec::new();
        if let Some(rest) = rest {
            for item in rest.split(',') {
                let (key, value) = item
                    .split_once('=')
                    .ok_or_else(|| Error::usage(format!("expected key=value in {spec:?}, got {item:?}")))?;
                let key = key.trim();
                if pairs.iter().any(|(k, _)| *k == key) {
                    return Err(Error::usage(format!("duplicate key {key:?} in {spec:?}")));
                }
                let value: f64 =
                    value.trim().parse().map_err(|_| Error::usage(format!("bad number for {key}: {value:?}")))?;
                pairs.push((key, value));
            }
        }
        let take = |name: &str| pairs.iter().find(|(k, _)| *k == name).map(|(_, v)| *v);
        let allow = |names: &[&str]| -> Result<()> {
            match pairs.iter().find(|(k, _)| !names.contains(k)) {
                Some((k, _)) => Err(Error::usage(format!("unknown key {k:?} for {head:?}"))),
                None => Ok(()),
            }
        };
        match head {
            "exp" => {
                allow(&["c", "lf"])?;
                let c = take("c").ok_or_else(|| Error::usage("exp needs c=<value>"))?;
                HazardModel::exponential(c, take("lf").unwrap_or(0.0))
            }
            "weibull" => {
                allow(&["alpha", "c"])?;
                let alpha = take("alpha").ok_or_else(|| Error::usage("weibull needs alpha=<value>"))?;
                let c = take("c").ok_or_else(|| Error::usage("weibull needs c=<value>"))?;
                HazardModel::weibull(alpha, c)
            }
            "linquad" if rest.is_none() => Ok(HazardModel::linear_quadratic()),
            "linquad" => Err(Error::usage("linquad takes no parameters")),
            other => Err(Error::usage(format!("unknown distribution {other:?} (expected exp, weibull or linquad)"))),
        }
    }
}

impl fmt::Display for HazardModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Exponential if self.lf == 0.0 => write!(f, "exp:c={}", self.c),
            Family::Exponential => write!(f, "exp:c={},lf={}", self.c, self.lf),
            Family::Weibull => write!(f, "weibull:alpha={},c={}", self.alpha, self.c),
            Family::LinearQuadratic => f.write_str("linquad"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_the_three_forms() {
        let m = parse_model("exp:c=2,lf=1").unwrap();
        assert_eq!(m.family(), Family::Exponential);
        assert_eq!((m.c(), m.lf()), (2.0, 1.0));

        let w = parse_model("weibull:alpha=0.5,c=1").unwrap();
        assert!(w.is_weibull_with_shape(0.5));
        assert_eq!(w.c(), 1.0);

        assert_eq!(parse_model("linquad").unwrap(), HazardModel::linear_quadratic());
        assert_eq!(parse_model("exp:c=3").unwrap().lf(), 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "exp:c=0",
            "exp:c=-1",
            "exp",
            "exp:lf=1",
            "weibull:alpha=0,c=1",
            "weibull:c=1",
            "weibull:alpha=1,c=1,lf=2",
            "gamma:k=2",
            "linquad:c=1",
            "exp:c=1,c=2",
            "exp:c=abc",
        ] {
            assert!(matches!(parse_model(bad), Err(Error::Usage(_))), "{bad} should fail");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["exp:c=2,lf=1", "exp:c=0.5", "weibull:alpha=0.5,c=1", "linquad"] {
            assert_eq!(parse_model(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn evaluation_examples() {
        let e = HazardModel::exponential(2.0, 1.0).unwrap();
        assert_eq!(e.cumulative_hazard(2.0).unwrap(), 2.0);
        let w = HazardModel::weibull(0.5, 1.0).unwrap();
        assert_eq!(w.cumulative_hazard(4.0).unwrap(), 2.0);
        let q = HazardModel::linear_quadratic();
        assert_eq!(q.cumulative_hazard(2.0).unwrap(), 6.0);

        assert_eq!(HazardModel::exponential(3.0, 0.0).unwrap().hazard_rate(7.0).unwrap(), 3.0);
        assert_eq!(w.hazard_rate(4.0).unwrap(), 0.25);
        assert_eq!(q.hazard_rate(2.0).unwrap(), 5.0);

        assert_eq!(HazardModel::exponential(1.0, 0.0).unwrap().inverse_hazard(3.0).unwrap(), 3.0);
        assert_eq!(w.inverse_hazard(2.0).unwrap(), 4.0);
        assert_eq!(q.inverse_hazard(6.0).unwrap(), 2.0);
    }

    #[test]
    fn domain_errors() {
        let e = HazardModel::exponential(2.0, 1.0).unwrap();
        assert!(matches!(e.cumulative_hazard(1.0), Err(Error::Domain(_))));
        assert!(matches!(e.hazard_rate(0.5), Err(Error::Domain(_))));
        assert!(matches!(e.inverse_hazard(0.0), Err(Error::Domain(_))));
        assert!(matches!(HazardModel::linear_quadratic().cumulative_hazard(-1.0), Err(Error::Domain(_))));
    }

    fn families() -> Vec<HazardModel> {
        vec![
            HazardModel::exponential(1.0, 0.0).unwrap(),
            HazardModel::exponential(2.5, 0.0).unwrap(),
            HazardModel::weibull(0.5, 1.0).unwrap(),
            HazardModel::weibull(2.0, 1.0).unwrap(),
            HazardModel::weibull(1.7, 0.3).unwrap(),
            HazardModel::linear_quadratic(),
        ]
    }

    #[test]
    fn round_trip_on_log_spaced_hazards() {
        for m in families() {
            for step in 0..100 {
                let y = 10f64.powf(-6.0 + 9.0 * (step as f64 + 0.5) / 100.0);
                let back = m.h(m.inverse_hazard(y).unwrap());
                assert!((back - y).abs() <= 1e-10 * y.max(1.0), "{m}: y={y} back={back}");
            }
        }
    }

    #[test]
    fn cdf_is_valid() {
        for m in families() {
            let mut prev = 0.0;
            for step in 0..200 {
                let x = m.lf() + 0.05 * step as f64;
                let p = m.cdf(x);
                assert!((0.0..=1.0).contains(&p) && p >= prev);
                prev = p;
            }
        }
    }

    proptest! {
        #[test]
        fn inverse_of_hazard_is_identity(x in 1e-3f64..1e3, which in 0usize..6) {
            let m = families()[which];
            let back = m.h_inv(m.h(x));
            prop_assert!((back - x).abs() <= 1e-10 * x, "{} x={} back={}", m, x, back);
        }

        #[test]
        fn hazard_is_increasing(a in 1e-3f64..1e3, b in 1e-3f64..1e3, which in 0usize..6) {
            prop_assume!(a < b * (1.0 - 1e-12));
            let m = families()[which];
            prop_assert!(m.h(a) < m.h(b));
            prop_assert!(m.h_prime(a) > 0.0);
        }
    }
}
