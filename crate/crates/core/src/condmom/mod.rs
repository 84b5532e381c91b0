//! Conditional law of a record given a lower record `u` that sits `i` steps
//! below it and an upper record `v` that sits `j` steps above it.
//!
//! With `W_{x,y} = H(y) - H(x)` the conditional density is
//!
//! ```text
//! (i+j-1)! / ((i-1)! (j-1)!) · W_{u,x}^{i-1} W_{x,v}^{j-1} / W_{u,v}^{i+j-1} · H'(x)
//! ```
//!
//! so `W_{u,x} / W_{u,v}` is Beta(i, j). Expectations are computed in that
//! Beta coordinate by Gauss–Legendre quadrature with node doubling.

pub mod quadrature;

use std::fmt;
use std::sync::OnceLock;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::hazard::HazardModel;
use crate::mfunc::{self, PolyRational};
use crate::{Error, Result};

/// Largest `i + j - 1` for which factorial ratios stay finite in `f64`.
pub const MAX_ORDER: u32 = 170;

/// One record between two bracketing records: the lower covariate `u` is
/// `i` records below the target, the upper covariate `v` is `j` above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    i: u32,
    j: u32,
    u: f64,
    v: f64,
}

impl Window {
    pub fn new(i: u32, j: u32, u: f64, v: f64) -> Result<Self> {
        if i == 0 || j == 0 {
            return Err(Error::usage(format!("window offsets must be >= 1, got i={i}, j={j}")));
        }
        if i + j - 1 > MAX_ORDER {
            return Err(Error::ParameterCap(format!("i + j - 1 = {} exceeds {MAX_ORDER}", i + j - 1)));
        }
        if !(u.is_finite() && v.is_finite() && u < v) {
            return Err(Error::usage(format!("window needs finite u < v, got u={u}, v={v}")));
        }
        if v - u < 1e-9 * u.abs().max(1.0) {
            return Err(Error::usage(format!("window too narrow: v - u = {}", v - u)));
        }
        Ok(Self { i, j, u, v })
    }

    /// Window for `R_target` given `R_lower = u` and `R_upper = v`.
    pub fn between_records(lower: u32, target: u32, upper: u32, u: f64, v: f64) -> Result<Self> {
        if !(lower < target && target < upper) {
            return Err(Error::usage(format!(
                "record indices must satisfy lower < target < upper, got {lower}, {target}, {upper}"
            )));
        }
        Self::new(target - lower, upper - target, u, v)
    }

    pub fn i(&self) -> u32 {
        self.i
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub(crate) fn check(&self, model: &HazardModel) -> Result<()> {
        model.check_covariate(self.u)
    }

    /// `ln[(i+j-1)! / ((i-1)! (j-1)!)]`.
    pub(crate) fn log_beta_norm(&self) -> f64 {
        ln_factorial(self.i + self.j - 1) - ln_factorial(self.i - 1) - ln_factorial(self.j - 1)
    }
}

pub(crate) fn ln_factorial(n: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; MAX_ORDER as usize + 1];
        for k in 1..t.len() {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    table[n as usize]
}

/// Functions of the record used as integrands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    Identity,
    /// Coefficients in increasing powers.
    Polynomial(Vec<f64>),
}

impl Integrand {
    pub fn from_poly(p: &PolyRational) -> Self {
        Integrand::Polynomial(p.to_f64_coeffs())
    }

    /// `d`-th derivative of `x^p / p!`.
    pub fn monomial_derivative(p: usize, d: usize) -> Result<Self> {
        let poly = mfunc::monomial_h(p)?.nth_derivative(d);
        Ok(
            if poly.degree() == Some(1)
                && poly.coeffs()[0] == BigRational::from_integer(0.into())
                && poly.coeffs()[1] == BigRational::from_integer(1.into())
            {
                Integrand::Identity
            } else {
                Integrand::from_poly(&poly)
            },
        )
    }

    /// `id`, `poly:c0,c1,...`, `mono:p` or `mono:p:d` (the `d`-th derivative
    /// of `x^p/p!`).
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "id" {
            return Ok(Integrand::Identity);
        }
        if let Some(rest) = spec.strip_prefix("mono:") {
            if let Some((p, d)) = rest.split_once(':') {
                let p = p.trim().parse().map_err(|_| Error::usage(format!("bad degree {p:?}")))?;
                let d = d.trim().parse().map_err(|_| Error::usage(format!("bad order {d:?}")))?;
                return Self::monomial_derivative(p, d);
            }
        }
        Ok(Integrand::from_poly(&mfunc::parse_poly(spec)?))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Integrand::Identity => x,
            Integrand::Polynomial(c) => c.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrand::Identity => f.write_str("id"),
            Integrand::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

pub fn conditional_density(model: &HazardModel, w: &Window, x: f64) -> Result<f64> {
    w.check(model)?;
    if !(x > w.u && x < w.v) {
        return Err(Error::domain(format!("x = {x} outside ({}, {})", w.u, w.v)));
    }
    Ok(density_unchecked(model, w, x))
}

fn density_unchecked(model: &HazardModel, w: &Window, x: f64) -> f64 {
    let (hu, hx, hv) = (model.h(w.u), model.h(x), model.h(w.v));
    let (below, above, total) = (hx - hu, hv - hx, hv - hu);
    if below <= 0.0 || above <= 0.0 {
        return 0.0;
    }
    let log = w.log_beta_norm() + (w.i - 1) as f64 * below.ln() + (w.j - 1) as f64 * above.ln()
        - (w.i + w.j - 1) as f64 * total.ln()
        + model.h_prime(x).ln();
    log.exp()
}

/// `∫_u^v` of the conditional density, integrated in `x` (not in the Beta
/// coordinate) so it checks the normalization of the density itself.
pub fn density_mass(model: &HazardModel, w: &Window) -> Result<f64> {
    w.check(model)?;
    quadrature::integrate(w.u, w.v, |x| density_unchecked(model, w, x))
}

/// `E[g(R) | window]` by the substitution `x = H⁻¹(H_u + b W_{u,v})` with
/// `b` Beta(i, j).
pub fn conditional_expectation(model: &HazardModel, w: &Window, g: impl Fn(f64) -> f64) -> Result<f64> {
    w.check(model)?;
    let hu = model.h(w.u);
    let span = model.h(w.v) - hu;
    let norm = w.log_beta_norm().exp();
    let (a, b) = ((w.i - 1) as i32, (w.j - 1) as i32);
    quadrature::integrate(0.0, 1.0, |t| {
        let x = model.h_inv(hu + t * span);
        norm * t.powi(a) * (1.0 - t).powi(b) * g(x)
    })
}

/// Expectation of `g` at the record `i` steps above `R = u` and `j` steps
/// below `R = v`; a zero offset pins the record to that covariate.
pub fn offset_expectation(model: &HazardModel, i: u32, j: u32, u: f64, v: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    match (i, j) {
        (0, 0) => Err(Error::usage("a record cannot be zero steps from both covariates")),
        (0, _) => Ok(g(u)),
        (_, 0) => Ok(g(v)),
        _ => conditional_expectation(model, &Window::new(i, j, u, v)?, g),
    }
}

/// `E[R_n | R_{n-k} = u, R_{n+r} = v] = (ru + kv)/(k + r)` for the
/// exponential law, computed exactly and rounded once.
pub fn exponential_closed_form(k: u32, r: u32, u: f64, v: f64) -> Result<f64> {
    if k == 0 || r == 0 {
        return Err(Error::usage(format!("k and r must be >= 1, got k={k}, r={r}")));
    }
    if u.partial_cmp(&v) != Some(std::cmp::Ordering::Less) {
        return Err(Error::usage(format!("need u < v, got u={u}, v={v}")));
    }
    let (uq, vq) = match (mfunc::rational_from_f64(u), mfunc::rational_from_f64(v)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::usage("u and v must be finite")),
    };
    let kq = BigRational::from_integer(k.into());
    let rq = BigRational::from_integer(r.into());
    let value = (&rq * uq + &kq * vq) / (kq + rq);
    Ok(mfunc::rational_to_f64(&value))
}

fn check_spacing(m: u32, n: u32, k: u32, r: u32) -> Result<()> {
    if m == 0 || n <= m || k == 0 || r == 0 {
        return Err(Error::usage(format!(
            "spacing needs m >= 1, n > m, k >= 1, r >= 1; got m={m}, n={n}, k={k}, r={r}"
        )));
    }
    Ok(())
}

/// `E[R_n - R_m | R_{m-k} = u, R_{n+r} = v]`.
pub fn spacing_expectation(model: &HazardModel, m: u32, n: u32, k: u32, r: u32, u: f64, v: f64) -> Result<f64> {
    linear_combo_expectation(model, 1.0, -1.0, m, n, k, r, u, v)
}

/// `E[a_n R_n + a_m R_m | R_{m-k} = u, R_{n+r} = v]`.
#[allow(clippy::too_many_arguments)]
pub fn linear_combo_expectation(
    model: &HazardModel,
    a_n: f64,
    a_m: f64,
    m: u32,
    n: u32,
    k: u32,
    r: u32,
    u: f64,
    v: f64,
) -> Result<f64> {
    check_spacing(m, n, k, r)?;
    let gap = n - m;
    let upper = conditional_expectation(model, &Window::new(gap + k, r, u, v)?, |x| x)?;
    let lower = conditional_expectation(model, &Window::new(k, gap + r, u, v)?, |x| x)?;
    Ok(a_n * upper + a_m * lower)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma3Mode {
    Closed,
    Quad,
}

/// `∫_a^b [(y-a)^j (b-y)^i - (y-a)^i (b-y)^j] y² dy`, which equals
/// `i! j! (j-i) / (i+j+2)! · (b-a)^{i+j+1} (b² - a²)`.
pub fn lemma3_integral(i: u32, j: u32, a: f64, b: f64, mode: Lemma3Mode) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::usage(format!("need finite a < b, got a={a}, b={b}")));
    }
    if i > 60 || j > 60 {
        return Err(Error::usage(format!("i and j must be <= 60, got i={i}, j={j}")));
    }
    match mode {
        Lemma3Mode::Closed => Ok(lemma3_closed(i, j, a, b)),
        Lemma3Mode::Quad => {
            let (pi, pj) = (i as i32, j as i32);
            quadrature::integrate(a, b, |y| {
                ((y - a).powi(pj) * (b - y).powi(pi) - (y - a).powi(pi) * (b - y).powi(pj)) * y * y
            })
        }
    }
}

fn lemma3_closed(i: u32, j: u32, a: f64, b: f64) -> f64 {
    if i == j || a + b == 0.0 {
        return 0.0;
    }
    let (lo, hi) = (i.min(j), i.max(j));
    // ln[lo! hi! / (lo+hi+2)!], symmetric in (i, j) so swapping only flips the sign.
    let log_ratio = ln_factorial(lo) + ln_factorial(hi) - ln_factorial(lo + hi + 2);
    let log_mag = log_ratio + ((hi - lo) as f64).ln() + (lo + hi + 2) as f64 * (b - a).ln() + (a + b).abs().ln();
    let sign = if j > i { 1.0 } else { -1.0 } * (a + b).signum();
    sign * log_mag.exp()
}
