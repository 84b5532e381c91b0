use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::identity::{IdentityCase, IdentityId, Params, Point};
use super::residual::{self, Evaluation, Method, REL_FLOOR};
use crate::hazard::HazardModel;
use crate::simrec::mix64;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Default tolerance: relative for quadrature, in standard errors for Monte
/// Carlo.
pub fn default_tol(method: Method) -> f64 {
    match method {
        Method::Quad => 1e-6,
        Method::Mc => 4.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Confirmed,
    Violated,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Confirmed => "CONFIRMED",
            Verdict::Violated => "VIOLATED",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "confirmed" => Ok(Verdict::Confirmed),
            "violated" => Ok(Verdict::Violated),
            other => Err(Error::usage(format!("verdict must be confirmed or violated, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub grid: GridSpec,
    pub tol: f64,
    pub method: Method,
    /// Draws per expectation; Monte Carlo only.
    pub samples: u64,
    pub seed: u64,
}

impl ScanOptions {
    /// Default grid, quadrature, tolerance 1e-6, seed 0.
    pub fn new(model: &HazardModel) -> Self {
        ScanOptions {
            grid: GridSpec::default_for(model),
            tol: default_tol(Method::Quad),
            method: Method::Quad,
            samples: 100_000,
            seed: 0,
        }
    }

    pub fn tol(self, tol: f64) -> Self {
        ScanOptions { tol, ..self }
    }

    pub fn grid(self, grid: GridSpec) -> Self {
        ScanOptions { grid, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub point: Point,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub residual: f64,
    pub rel_residual: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub identity: IdentityId,
    pub dist: String,
    pub params: Params,
    pub grid: GridSpec,
    pub method: Method,
    pub tol: f64,
    pub seed: u64,
    pub samples: Option<u64>,
    /// Sorted by point.
    pub records: Vec<PointRecord>,
    /// Grid tuples where the three-point coefficient `(d+1)s − t` vanishes.
    pub skipped: usize,
    pub max_rel_residual: f64,
    /// Largest `|lhs − rhs| / stderr`; Monte Carlo only.
    pub max_z: Option<f64>,
    pub verdict: Verdict,
    pub runtime_ms: Option<u64>,
}

fn cmp_points(a: &Point, b: &Point) -> std::cmp::Ordering {
    let key = |p: &Point| [p.u, p.s.unwrap_or(f64::NEG_INFINITY), p.t.unwrap_or(f64::NEG_INFINITY), p.v];
    let (ka, kb) = (key(a), key(b));
    ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// `(d+1)s = t` makes both sides of the four-point combo identity vanish
/// identically, so the relative residual there only measures rounding.
fn degenerate(id: IdentityId, params: &Params, p: &Point) -> bool {
    if id != IdentityId::Thm3 {
        return false;
    }
    let (k, r) = (params.k.unwrap_or(1), params.r.unwrap_or(1));
    let d = (params.n.unwrap_or(3) - params.m.unwrap_or(2) + k + r - 2) as f64;
    let (s, t) = (p.s_or_nan(), p.t_or_nan());
    ((d + 1.0) * s - t).abs() <= 1e-9 * t.abs()
}

/// Evaluates `identity` at every admissible grid tuple. Point `i` (in
/// sorted order) uses Monte Carlo seed `mix64(seed, i)`.
pub fn scan(identity: IdentityId, params: &Params, model: &HazardModel, opts: &ScanOptions) -> Result<ScanReport> {
    #[cfg(not(target_arch = "wasm32"))]
    let started = std::time::Instant::now();

    let params = params.resolve(identity)?;
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::usage(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.method == Method::Mc && opts.samples < 100 {
        return Err(Error::usage(format!("need at least 100 samples, got {}", opts.samples)));
    }
    let mut points = opts.grid.points(identity.arity(), model, opts.seed)?;
    if identity == IdentityId::Thm1 && !residual::thm1_regular(&params, model, &opts.grid.base_points(model)?)? {
        return Err(Error::usage(format!(
            "h = x^{}/{}! violates the regularity condition at l_F on this grid",
            params.p.unwrap_or(0),
            params.p.unwrap_or(0)
        )));
    }
    let before = points.len();
    points.retain(|p| !degenerate(identity, &params, p));
    let skipped = before - points.len();
    if points.is_empty() {
        return Err(Error::usage("grid has no admissible tuples"));
    }
    points.sort_by(cmp_points);

    let mut records = Vec::with_capacity(points.len());
    let mut verdict = Verdict::Confirmed;
    let mut max_z: Option<f64> = None;
    for (i, point) in points.into_iter().enumerate() {
        let case = IdentityCase::new(identity, params, point)?;
        let eval = match opts.method {
            Method::Quad => Evaluation::Quad,
            Method::Mc => Evaluation::Mc { samples: opts.samples, seed: mix64(opts.seed, i as u64) },
        };
        let res = residual::residual(&case, model, eval)?;
        let pass = match res.stderr {
            None => res.rel_residual <= opts.tol,
            Some(se) if se > 0.0 => {
                let z = res.difference().abs() / se;
                max_z = Some(max_z.map_or(z, |m| m.max(z)));
                z <= opts.tol
            }
            Some(_) => res.rel_residual <= REL_FLOOR,
        };
        if !pass {
            verdict = Verdict::Violated;
        }
        records.push(PointRecord {
            point,
            lhs: res.lhs,
            rhs: res.rhs,
            residual: res.difference(),
            rel_residual: res.rel_residual,
            stderr: res.stderr,
        });
    }
    let max_rel_residual = records.iter().map(|r| r.rel_residual).fold(0.0, f64::max);

    #[cfg(not(target_arch = "wasm32"))]
    let runtime_ms = Some(started.elapsed().as_millis() as u64);
    #[cfg(target_arch = "wasm32")]
    let runtime_ms = None;

    Ok(ScanReport {
        schema_version: SCHEMA_VERSION,
        identity,
        dist: model.to_string(),
        params,
        grid: opts.grid,
        method: opts.method,
        tol: opts.tol,
        seed: opts.seed,
        samples: (opts.method == Method::Mc).then_some(opts.samples),
        records,
        skipped,
        max_rel_residual,
        max_z: if opts.method == Method::Mc { Some(max_z.unwrap_or(0.0)) } else { None },
        verdict,
        runtime_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cor3(m: u32, n: u32) -> Params {
        Params { m: Some(m), n: Some(n), ..Default::default() }
    }

    #[test]
    fn cor3_examples() {
        let exp = HazardModel::exponential(1.0, 0.0).unwrap();
        let r = scan(IdentityId::Cor3, &cor3(2, 3), &exp, &ScanOptions::new(&exp)).unwrap();
        assert_eq!(r.verdict, Verdict::Confirmed);
        assert_eq!(r.records.len(), 15);
        assert!(r.max_rel_residual <= 1e-10);

        let w2 = HazardModel::weibull(2.0, 1.0).unwrap();
        let r = scan(IdentityId::Cor3, &cor3(2, 3), &w2, &ScanOptions::new(&w2)).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.max_rel_residual >= 1e-2);
    }

    #[test]
    fn lemma1_on_fifty_pairs() {
        let m = HazardModel::weibull(0.5, 1.0).unwrap();
        let grid = GridSpec { count: 11, max_tuples: 50, ..GridSpec::default_for(&m) };
        let r = scan(IdentityId::Lemma1, &Params::default(), &m, &ScanOptions::new(&m).grid(grid).tol(1e-12)).unwrap();
        assert_eq!(r.records.len(), 50);
        assert_eq!(r.verdict, Verdict::Confirmed, "{}", r.max_rel_residual);
    }

    #[test]
    fn records_are_sorted_and_finite() {
        let m = HazardModel::linear_quadratic();
        let r = scan(IdentityId::Thm2, &Params::krmn(1, 2, 2, 4), &m, &ScanOptions::new(&m)).unwrap();
        assert_eq!(r.records.len(), 30);
        assert!(r.records.windows(2).all(|w| cmp_points(&w[0].point, &w[1].point).is_lt()));
        assert!(r.records.iter().all(|p| p.lhs.is_finite() && p.rhs.is_finite() && p.rel_residual.is_finite()));
        assert_eq!(r.verdict == Verdict::Confirmed, r.max_rel_residual <= r.tol);
    }

    #[test]
    fn degenerate_quadruples_are_skipped() {
        let m = HazardModel::exponential(1.0, 0.0).unwrap();
        let r = scan(IdentityId::Thm3, &Params::krmn(1, 1, 2, 3), &m, &ScanOptions::new(&m)).unwrap();
        // d = 1: every tuple with t = 2s on the doubling grid.
        assert!(r.skipped > 0);
        assert_eq!(r.records.len() + r.skipped, 30);
        assert_eq!(r.verdict, Verdict::Confirmed, "{}", r.max_rel_residual);
    }

    #[test]
    fn mc_scan_is_reproducible() {
        let m = HazardModel::weibull(0.5, 1.0).unwrap();
        let mut opts = ScanOptions::new(&m);
        opts.method = Method::Mc;
        opts.tol = 4.0;
        opts.samples = 5_000;
        opts.grid.count = 3;
        let a = scan(IdentityId::An, &Params::default(), &m, &opts).unwrap();
        let b = scan(IdentityId::An, &Params::default(), &m, &opts).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.samples, Some(5_000));
        assert!(a.max_z.is_some());
    }

    #[test]
    fn rejects_bad_options() {
        let m = HazardModel::linear_quadratic();
        let opts = ScanOptions::new(&m).tol(0.0);
        assert!(matches!(scan(IdentityId::An, &Params::default(), &m, &opts), Err(Error::Usage(_))));
        let one = ScanOptions::new(&m).grid(GridSpec { count: 1, ..GridSpec::default_for(&m) });
        assert!(matches!(scan(IdentityId::An, &Params::default(), &m, &one), Err(Error::Usage(_))));
    }
}
