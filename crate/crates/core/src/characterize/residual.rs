//! Each side of an identity is a linear form `Σ c_i E[g_i(R) | window_i] + c_0`
//! so that quadrature and Monte Carlo evaluate the same expression, and the
//! Monte Carlo error propagates as `sqrt(Σ c_i² se_i²)`.

use serde::{Deserialize, Serialize};

use super::identity::{IdentityCase, IdentityId, Params};
use crate::condmom::{self, Integrand, Window};
use crate::hazard::HazardModel;
use crate::mfunc::{self, BivariatePolyRational};
use crate::simrec::{self, mix64, SimConfig};
use crate::{Error, Result};

/// Floor of the denominator in the relative residual.
pub const REL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Quad,
    Mc,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "quad" => Ok(Method::Quad),
            "mc" => Ok(Method::Mc),
            other => Err(Error::usage(format!("method must be quad or mc, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Quad => "quad",
            Method::Mc => "mc",
        })
    }
}

/// How a residual is evaluated. Monte Carlo term `i` of a case uses seed
/// `mix64(seed, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Quad,
    Mc { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_residual: f64,
    /// Standard error of `lhs − rhs`; Monte Carlo only.
    pub stderr: Option<f64>,
}

impl Residual {
    pub fn difference(&self) -> f64 {
        self.lhs - self.rhs
    }
}

pub fn rel_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(REL_FLOOR)
}

#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    window: Window,
    g: Integrand,
}

#[derive(Debug, Clone, Default)]
struct Side {
    terms: Vec<Term>,
    constant: f64,
}

impl Side {
    fn constant(c: f64) -> Self {
        Side { terms: Vec::new(), constant: c }
    }

    /// Adds `coef · E[g(R)]` for the record `i` steps above `lo` and `j`
    /// below `hi`; a zero offset pins the record to that covariate.
    #[allow(clippy::too_many_arguments)]
    fn add(&mut self, model: &HazardModel, coef: f64, i: u32, j: u32, lo: f64, hi: f64, g: &Integrand) -> Result<()> {
        match (i, j) {
            (0, 0) => return Err(Error::usage("a record cannot be pinned to both covariates")),
            (0, _) => self.constant += coef * g.eval(lo),
            (_, 0) => self.constant += coef * g.eval(hi),
            _ => {
                let window = Window::new(i, j, lo, hi)?;
                window.check(model)?;
                self.terms.push(Term { coef, window, g: g.clone() });
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn with(mut self, model: &HazardModel, coef: f64, i: u32, j: u32, lo: f64, hi: f64, g: &Integrand) -> Result<Self> {
        self.add(model, coef, i, j, lo, hi, g)?;
        Ok(self)
    }

    fn quad(&self, model: &HazardModel) -> Result<f64> {
        let mut sum = self.constant;
        for t in &self.terms {
            sum += t.coef * condmom::conditional_expectation(model, &t.window, |x| t.g.eval(x))?;
        }
        Ok(sum)
    }

    /// Returns the estimate and its variance; `first` is the index of this
    /// side's first term within the case.
    fn mc(&self, model: &HazardModel, samples: u64, seed: u64, first: u64) -> Result<(f64, f64)> {
        let mut sum = self.constant;
        let mut var = 0.0;
        for (idx, t) in self.terms.iter().enumerate() {
            let cfg = SimConfig::new(mix64(seed, first + idx as u64), samples);
            let est = simrec::mc_conditional_expectation(model, &t.window, |x| t.g.eval(x), &cfg)?;
            sum += t.coef * est.mean;
            var += (t.coef * est.stderr).powi(2);
        }
        Ok((sum, var))
    }
}

fn exact_m(b: &BivariatePolyRational, u: f64, v: f64) -> Result<f64> {
    match (mfunc::rational_from_f64(u), mfunc::rational_from_f64(v)) {
        (Some(uq), Some(vq)) => Ok(mfunc::rational_to_f64(&b.eval_exact(&uq, &vq))),
        _ => Err(Error::usage("covariates must be finite")),
    }
}

/// `₍r−1₎M_k(l_F, v) ≠ 0` for `h = x^p/p!` at each given `v`, the
/// regularity condition of the three-point identity.
pub(crate) fn thm1_regular(params: &Params, model: &HazardModel, vs: &[f64]) -> Result<bool> {
    let (k, r) = (params.k.unwrap_or(2), params.r.unwrap_or(1));
    let h = mfunc::monomial_h(params.p.unwrap_or(k + r) as usize)?;
    let m = mfunc::divided_difference(&h).mixed_partial(r - 1, k);
    for &v in vs {
        if exact_m(&m, model.lf(), v)? == 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn build(case: &IdentityCase, model: &HazardModel) -> Result<(Side, Side)> {
    let pt = case.point();
    let (u, v) = (pt.u, pt.v);
    let (s, t) = (pt.s_or_nan(), pt.t_or_nan());
    let (k, r, gap) = (case.k(), case.r(), case.gap());
    let (kf, rf, gf) = (k as f64, r as f64, gap as f64);
    let id = Integrand::Identity;
    let empty = Side::default;

    Ok(match case.id() {
        IdentityId::AdjMean => (empty().with(model, 1.0, 1, 1, u, v, &id)?, Side::constant((u + v) / 2.0)),
        IdentityId::Bap05 => {
            let h = mfunc::monomial_h(case.p())?;
            let m = mfunc::divided_difference(&h);
            (
                empty().with(model, 1.0, 1, 1, u, v, &Integrand::monomial_derivative(case.p(), 1)?)?,
                Side::constant(exact_m(&m, u, v)?),
            )
        }
        IdentityId::Yab08 => {
            let h = mfunc::monomial_h(case.p())?;
            let m = mfunc::divided_difference(&h).mixed_partial(0, k - 1);
            let g = Integrand::monomial_derivative(case.p(), k as usize)?;
            (empty().with(model, 1.0, k, 1, u, v, &g)?, Side::constant(kf * exact_m(&m, u, v)?))
        }
        IdentityId::Weights => (empty().with(model, 1.0, k, 1, u, v, &id)?, Side::constant((u + kf * v) / (kf + 1.0))),
        IdentityId::Weights2 => (empty().with(model, 1.0, 1, r, u, v, &id)?, Side::constant((rf * u + v) / (rf + 1.0))),
        IdentityId::NecYab => {
            let h = mfunc::monomial_h(case.p())?;
            let scaled = mfunc::divided_difference(&h)
                .mixed_partial(r - 1, k - 1)
                .scale(&mfunc::bridge_factor(k as usize, r as usize));
            let g = Integrand::monomial_derivative(case.p(), (k + r - 1) as usize)?;
            (empty().with(model, 1.0, k, r, u, v, &g)?, Side::constant(exact_m(&scaled, u, v)?))
        }
        IdentityId::Thm1 => {
            let h = mfunc::monomial_h(case.p())?;
            let m_outer = mfunc::divided_difference(&h).mixed_partial(r - 1, k - 1);
            let m_inner = mfunc::dd_of_derivative(&h).mixed_partial(r - 1, k - 2);
            let g = Integrand::monomial_derivative(case.p(), (k + r - 1) as usize)?;
            let lhs_coef = (kf - 1.0) * exact_m(&m_inner, s, v)?;
            let rhs_coef = (kf + rf - 1.0) * exact_m(&m_outer, u, v)?;
            (empty().with(model, lhs_coef, k, r, u, v, &g)?, empty().with(model, rhs_coef, k - 1, r, s, v, &g)?)
        }
        IdentityId::Cor1 => {
            let lhs_coef = (kf + rf) * (rf * s + (kf - 1.0) * v);
            let rhs_coef = (kf + rf - 1.0) * (rf * u + kf * v);
            (empty().with(model, lhs_coef, k, r, u, v, &id)?, empty().with(model, rhs_coef, k - 1, r, s, v, &id)?)
        }
        IdentityId::An => (
            empty().with(model, 1.0, 2, 1, u, v, &id)?.with(model, -1.0, 1, 2, u, v, &id)?,
            Side::constant((v - u) / 3.0),
        ),
        IdentityId::Thm2 => {
            let d = case.d() as f64;
            let outer = (d + 2.0) * (t - s);
            let inner = d * (v - u);
            (
                empty().with(model, outer, gap + k, r, u, v, &id)?.with(model, -outer, k, gap + r, u, v, &id)?,
                empty().with(model, inner, gap + k - 1, r - 1, s, t, &id)?.with(
                    model,
                    -inner,
                    k - 1,
                    gap + r - 1,
                    s,
                    t,
                    &id,
                )?,
            )
        }
        IdentityId::Cor2 => (
            empty().with(model, 1.0, 1 + k, r, u, v, &id)?.with(model, -1.0, k, 1 + r, u, v, &id)?,
            Side::constant((kf + rf - 1.0) / (kf + rf + 1.0) * (v - u)),
        ),
        IdentityId::Cor3 => (
            empty().with(model, 1.0, gap + 1, 1, u, v, &id)?.with(model, -1.0, 1, gap + 1, u, v, &id)?,
            Side::constant(gf / (gf + 2.0) * (v - u)),
        ),
        IdentityId::Sumspec => {
            let mut lhs = Side::constant(v - u);
            lhs.add(model, 1.0, 1, gap + 1, u, v, &id)?;
            lhs.add(model, -1.0, gap + 1, 1, u, v, &id)?;
            (lhs, Side::constant(2.0 * (v - u) / (gf + 2.0)))
        }
        IdentityId::Thm3 => {
            let d = case.d() as f64;
            let outer = (d + 1.0) * s - t;
            let inner = d * u;
            let (a_n, a_m) = (kf, -(gf + kf));
            (
                empty().with(model, outer * a_n, gap + k, r, u, v, &id)?.with(
                    model,
                    outer * a_m,
                    k,
                    gap + r,
                    u,
                    v,
                    &id,
                )?,
                empty().with(model, inner * a_n, gap + k - 1, r - 1, s, t, &id)?.with(
                    model,
                    inner * a_m,
                    k - 1,
                    gap + r - 1,
                    s,
                    t,
                    &id,
                )?,
            )
        }
        IdentityId::Cor4 => (
            empty().with(model, 1.0, gap + 1, 1, u, v, &id)?.with(model, -gf, 1, gap + 1, u, v, &id)?,
            Side::constant(-gf * u).with(model, 1.0, 1, gap + 1, u, v, &id)?,
        ),
        IdentityId::Lemma1 => {
            model.check_support(u)?;
            model.check_support(v)?;
            let (du, dv) = (model.h_prime(u), model.h_prime(v));
            (Side::constant(model.h(v) - model.h(u)), Side::constant((v - u) * 2.0 * du * dv / (du + dv)))
        }
    })
}

/// Both sides of the identity in cross-multiplied form.
pub fn residual(case: &IdentityCase, model: &HazardModel, eval: Evaluation) -> Result<Residual> {
    let (lhs_side, rhs_side) = build(case, model)?;
    let (lhs, rhs, stderr) = match eval {
        Evaluation::Quad => (lhs_side.quad(model)?, rhs_side.quad(model)?, None),
        Evaluation::Mc { samples, seed } => {
            let (l, lv) = lhs_side.mc(model, samples, seed, 0)?;
            let (r, rv) = rhs_side.mc(model, samples, seed, lhs_side.terms.len() as u64)?;
            (l, r, Some((lv + rv).sqrt()))
        }
    };
    if !(lhs.is_finite() && rhs.is_finite()) {
        return Err(Error::domain(format!("{} produced non-finite sides {lhs} and {rhs}", case.id())));
    }
    Ok(Residual { lhs, rhs, rel_residual: rel_residual(lhs, rhs), stderr })
}
