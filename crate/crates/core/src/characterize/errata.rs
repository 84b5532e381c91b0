//! Printed constants of spacing regressions checked against computed values.
//! The report records what the computation gives; it asserts nothing.

use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::identity::Arity;
use crate::condmom;
use crate::hazard::{Family, HazardModel};
use crate::{Error, Result};

/// Relative tolerance of both the constancy check and the match check.
pub const ERRATA_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrataClaim {
    /// `(d+2)/(v−u)·E[R_n − R_m | R_{m−k}=u, R_{n+r}=v]`, printed as `2(n−m)`.
    SpacingOuter,
    /// `d/(t−s)·E[R_n − R_m | R_{m−k+1}=s, R_{n+r−1}=t]`, printed as `2(n−m)`.
    SpacingInner,
    /// `E[R_{m+1} − R_m | R_{m−k}=u, R_{m+r+1}=v]/(v−u)`, printed as
    /// `(k+r−1)/(k+r+1)`.
    AdjacentSpacing,
}

impl ErrataClaim {
    pub fn token(self) -> &'static str {
        match self {
            ErrataClaim::SpacingOuter => "spacing_outer",
            ErrataClaim::SpacingInner => "spacing_inner",
            ErrataClaim::AdjacentSpacing => "adjacent_spacing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrataStatus {
    Match,
    Mismatch,
    Nonconstant,
}

impl std::fmt::Display for ErrataStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ErrataStatus::Match => "MATCH",
            ErrataStatus::Mismatch => "MISMATCH",
            ErrataStatus::Nonconstant => "NONCONSTANT",
        })
    }
}

/// The normalized quantity at one pair of covariates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrataSample {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrataCell {
    pub claim: ErrataClaim,
    pub k: u32,
    pub r: u32,
    pub m: u32,
    pub n: u32,
    pub d: u32,
    pub printed: f64,
    pub computed_min: f64,
    pub computed_max: f64,
    pub computed_mean: f64,
    pub status: ErrataStatus,
    pub samples: Vec<ErrataSample>,
}

impl ErrataCell {
    pub fn sample_at(&self, lo: f64, hi: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.lo == lo && s.hi == hi).map(|s| s.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrataReport {
    pub schema_version: u32,
    pub dist: String,
    pub grid: GridSpec,
    pub tol: f64,
    pub cells: Vec<ErrataCell>,
}

impl ErrataReport {
    pub fn cell(&self, claim: ErrataClaim, k: u32, r: u32, m: u32, n: u32) -> Option<&ErrataCell> {
        self.cells.iter().find(|c| c.claim == claim && (c.k, c.r, c.m, c.n) == (k, r, m, n))
    }
}

/// `E[R_n − R_m]` with the lower covariate `lower` records below `R_m` and
/// the upper one `upper` records above `R_n`; zero offsets pin.
fn spacing(model: &HazardModel, gap: u32, lower: u32, upper: u32, lo: f64, hi: f64) -> Result<f64> {
    let id = |x: f64| x;
    let top = condmom::offset_expectation(model, gap + lower, upper, lo, hi, id)?;
    let bottom = condmom::offset_expectation(model, lower, gap + upper, lo, hi, id)?;
    Ok(top - bottom)
}

fn status(values: &[f64], printed: f64) -> (f64, f64, f64, ErrataStatus) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let scale = min.abs().max(max.abs()).max(1e-300);
    let status = if max - min > ERRATA_TOL * scale {
        ErrataStatus::Nonconstant
    } else if (mean - printed).abs() <= ERRATA_TOL * printed.abs().max(1.0) {
        ErrataStatus::Match
    } else {
        ErrataStatus::Mismatch
    };
    (min, max, mean, status)
}

/// Sweeps `k, r ≤ 3` and `n − m ≤ 3` with `m = k + 1` over the default
/// pairs of the model.
pub fn errata_report(model: &HazardModel) -> Result<ErrataReport> {
    let family_ok = model.family() == Family::Exponential || model.is_weibull_with_shape(0.5);
    if !family_ok {
        return Err(Error::usage(format!("errata report needs an exponential or Weibull-1/2 model, got {model}")));
    }
    let grid = GridSpec::default_for(model);
    let pairs: Vec<(f64, f64)> = grid.points(Arity::Pair, model, 0)?.iter().map(|p| (p.u, p.v)).collect();
    let mut cells = Vec::new();
    for k in 1..=3u32 {
        for r in 1..=3u32 {
            let m = k + 1;
            for gap in 1..=3u32 {
                let n = m + gap;
                let d = gap + k + r - 2;
                let printed = 2.0 * gap as f64;
                let mut claims = vec![(ErrataClaim::SpacingOuter, printed), (ErrataClaim::SpacingInner, printed)];
                if gap == 1 {
                    claims.push((ErrataClaim::AdjacentSpacing, (k + r - 1) as f64 / (k + r + 1) as f64));
                }
                for (claim, printed) in claims {
                    let mut samples = Vec::with_capacity(pairs.len());
                    for &(lo, hi) in &pairs {
                        let value = match claim {
                            ErrataClaim::SpacingOuter => {
                                (d + 2) as f64 / (hi - lo) * spacing(model, gap, k, r, lo, hi)?
                            }
                            ErrataClaim::SpacingInner => {
                                d as f64 / (hi - lo) * spacing(model, gap, k - 1, r - 1, lo, hi)?
                            }
                            ErrataClaim::AdjacentSpacing => spacing(model, 1, k, r, lo, hi)? / (hi - lo),
                        };
                        samples.push(ErrataSample { lo, hi, value });
                    }
                    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
                    let (computed_min, computed_max, computed_mean, status) = status(&values, printed);
                    cells.push(ErrataCell {
                        claim,
                        k,
                        r,
                        m,
                        n,
                        d,
                        printed,
                        computed_min,
                        computed_max,
                        computed_mean,
                        status,
                        samples,
                    });
                }
            }
        }
    }
    Ok(ErrataReport {
        schema_version: super::scan::SCHEMA_VERSION,
        dist: model.to_string(),
        grid,
        tol: ERRATA_TOL,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weibull_half_cells() {
        let report = errata_report(&HazardModel::weibull(0.5, 1.0).unwrap()).unwrap();
        let c = report.cell(ErrataClaim::SpacingOuter, 1, 1, 2, 3).unwrap();
        assert!((c.computed_min - 1.0).abs() <= 1e-8 && (c.computed_max - 1.0).abs() <= 1e-8, "{c:?}");
        assert_eq!(c.status, ErrataStatus::Mismatch);

        let c = report.cell(ErrataClaim::SpacingOuter, 1, 2, 2, 3).unwrap();
        assert!((c.sample_at(1.0, 4.0).unwrap() - 14.0 / 15.0).abs() <= 1e-8);
        assert_eq!(c.status, ErrataStatus::Nonconstant);
    }

    #[test]
    fn weibull_half_outer_formula() {
        // In y = sqrt(x) with a = sqrt(u), b = sqrt(v), D = b - a, N = d + 2:
        // (d+2)/(v-u) E = (n-m)(2a + D(n-m+2k+1)/(N+1)) / (2a + D).
        let report = errata_report(&HazardModel::weibull(0.5, 1.0).unwrap()).unwrap();
        for c in report.cells.iter().filter(|c| c.claim == ErrataClaim::SpacingOuter) {
            let gap = (c.n - c.m) as f64;
            let big_n = (c.d + 2) as f64;
            for s in &c.samples {
                let (a, b) = (s.lo.sqrt(), s.hi.sqrt());
                let diff = b - a;
                let expected =
                    gap * (2.0 * a + diff * (gap + 2.0 * c.k as f64 + 1.0) / (big_n + 1.0)) / (2.0 * a + diff);
                assert!((s.value - expected).abs() <= 1e-10 * expected, "{c:?} {s:?} {expected}");
            }
            let expected_status = if c.k == c.r { ErrataStatus::Mismatch } else { ErrataStatus::Nonconstant };
            assert_eq!(c.status, expected_status, "{c:?}");
        }
    }

    #[test]
    fn exponential_cells() {
        let report = errata_report(&HazardModel::exponential(1.0, 0.0).unwrap()).unwrap();
        for c in &report.cells {
            let expected = match c.claim {
                ErrataClaim::SpacingOuter | ErrataClaim::SpacingInner => (c.n - c.m) as f64,
                ErrataClaim::AdjacentSpacing => 1.0 / (c.k + c.r + 1) as f64,
            };
            assert!((c.computed_mean - expected).abs() <= 1e-10, "{c:?}");
            let st = if (expected - c.printed).abs() < 1e-12 { ErrataStatus::Match } else { ErrataStatus::Mismatch };
            assert_eq!(c.status, st, "{c:?}");
        }
        // k = r = 1 is the only adjacent-spacing cell where the printed value holds.
        let c = report.cell(ErrataClaim::AdjacentSpacing, 1, 1, 2, 3).unwrap();
        assert_eq!(c.status, ErrataStatus::Match);
    }

    #[test]
    fn other_families_are_rejected() {
        assert!(errata_report(&HazardModel::weibull(2.0, 1.0).unwrap()).is_err());
        assert!(errata_report(&HazardModel::linear_quadratic()).is_err());
    }
}
