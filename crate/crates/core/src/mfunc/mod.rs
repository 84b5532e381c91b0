//! Exact divided differences `M(u,v) = (h(v) - h(u)) / (v - u)` of polynomial
//! `h`, their mixed partials `ᵢMⱼ = ∂^{i+j}M / ∂u^i ∂v^j`, and `M'`, the divided
//! difference of `h'`.
//!
//! Everything here is exact rational arithmetic, so polynomial identities
//! between these objects are checked as zero polynomials.

mod bivariate;
mod poly;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub use bivariate::BivariatePolyRational;
pub use poly::{PolyRational, MAX_DEGREE};

pub(crate) use poly::{factorial, rational_to_f64};

use crate::{Error, Result};

/// `h(x) = x^p / p!`.
pub fn monomial_h(p: usize) -> Result<PolyRational> {
    PolyRational::monomial(p)
}

/// `(h(v) - h(u)) / (v - u)` as an exact polynomial, using
/// `(v^p - u^p) / (v - u) = Σ_{a<p} u^a v^{p-1-a}`.
pub fn divided_difference(h: &PolyRational) -> BivariatePolyRational {
    let mut out = BivariatePolyRational::zero();
    for (p, c) in h.coeffs().iter().enumerate().skip(1) {
        if c.is_zero() {
            continue;
        }
        let p = p as u32;
        for a in 0..p {
            out.add_term((a, p - 1 - a), c.clone());
        }
    }
    out
}

pub fn mixed_partial(m: &BivariatePolyRational, i: u32, j: u32) -> BivariatePolyRational {
    m.mixed_partial(i, j)
}

/// `M'`: the divided difference of `h'`.
pub fn dd_of_derivative(h: &PolyRational) -> BivariatePolyRational {
    divided_difference(&h.derivative())
}

pub fn eval_m(b: &BivariatePolyRational, u: f64, v: f64) -> f64 {
    b.eval_f64(u, v)
}

pub fn eval_m_exact(b: &BivariatePolyRational, u: &BigRational, v: &BigRational) -> BigRational {
    b.eval_exact(u, v)
}

/// `(k+r-1)! / ((k-1)! (r-1)!)`, the factor in front of `₍r−1₎M₍k−1₎` in the
/// exponential closed form of `E[h^{(k+r-1)}(R_n) | R_{n-k}=u, R_{n+r}=v]`.
pub fn bridge_factor(k: usize, r: usize) -> BigRational {
    assert!(k >= 1 && r >= 1, "bridge_factor needs k, r >= 1");
    BigRational::new(factorial(k + r - 1), factorial(k - 1) * factorial(r - 1))
}

/// Parses `poly:c0,c1,...` (integers, `a/b` or decimals) or `mono:p`.
pub fn parse_poly(spec: &str) -> Result<PolyRational> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("mono:") {
        let p: usize = rest.trim().parse().map_err(|_| Error::usage(format!("bad monomial degree {rest:?}")))?;
        monomial_h(p)
    } else if let Some(rest) = spec.strip_prefix("poly:") {
        let coeffs = rest.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        PolyRational::new(coeffs)
    } else {
        Err(Error::usage(format!("expected poly:c0,c1,... or mono:p, got {spec:?}")))
    }
}

/// Exact rational from `a`, `a/b` or a plain decimal such as `-1.25`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::usage(format!("bad rational literal {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let digits = format!("{}{frac}", whole.trim_start_matches(['-', '+']));
        let mag: BigInt = digits.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let q = BigRational::new(mag, scale);
        return Ok(if negative { -q } else { q });
    }
    let n: BigInt = text.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// `q` as an exact rational when it is one (every finite `f64` is).
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}
