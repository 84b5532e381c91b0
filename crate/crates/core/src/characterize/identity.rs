use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::condmom::MAX_ORDER;
use crate::mfunc::MAX_DEGREE;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    /// `E[R | 1 above u, 1 below v] = (u+v)/2`.
    AdjMean,
    /// `E[h'(R) | 1, 1] = M(u,v)`.
    Bap05,
    /// `E[h^{(k)}(R) | k, 1] = k·₀M₍k−1₎(u,v)`.
    Yab08,
    /// `E[R | k, 1] = (u + kv)/(k+1)`.
    Weights,
    /// `E[R | 1, r] = (ru + v)/(r+1)`.
    Weights2,
    /// `E[h^{(k+r−1)}(R) | k, r] = (k+r−1)!/((k−1)!(r−1)!)·₍r−1₎M₍k−1₎(u,v)`.
    NecYab,
    Thm1,
    Cor1,
    /// `E[R_3 − R_2 | R_1 = u, R_4 = v] = (v−u)/3`.
    An,
    Thm2,
    Cor2,
    Cor3,
    Sumspec,
    Thm3,
    Cor4,
    /// `H(v) − H(u) = (v−u)·2H'(u)H'(v)/(H'(u)+H'(v))`.
    Lemma1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arity {
    /// `(u, v)`.
    Pair,
    /// `(u, s, v)` with `u < s < v`.
    Triple,
    /// `(u, s, t, v)` with `u < s < t < v` or `s < u < v < t`.
    Quadruple,
}

/// Which integer parameters an identity reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamUse {
    pub k: bool,
    pub r: bool,
    pub m: bool,
    pub n: bool,
    pub p: bool,
}

impl IdentityId {
    pub const ALL: [IdentityId; 16] = [
        IdentityId::AdjMean,
        IdentityId::Bap05,
        IdentityId::Yab08,
        IdentityId::Weights,
        IdentityId::Weights2,
        IdentityId::NecYab,
        IdentityId::Thm1,
        IdentityId::Cor1,
        IdentityId::An,
        IdentityId::Thm2,
        IdentityId::Cor2,
        IdentityId::Cor3,
        IdentityId::Sumspec,
        IdentityId::Thm3,
        IdentityId::Cor4,
        IdentityId::Lemma1,
    ];

    pub fn token(self) -> &'static str {
        match self {
            IdentityId::AdjMean => "adj_mean",
            IdentityId::Bap05 => "bap05",
            IdentityId::Yab08 => "yab08",
            IdentityId::Weights => "weights",
            IdentityId::Weights2 => "weights2",
            IdentityId::NecYab => "nec_yab",
            IdentityId::Thm1 => "thm1",
            IdentityId::Cor1 => "cor1",
            IdentityId::An => "an",
            IdentityId::Thm2 => "thm2",
            IdentityId::Cor2 => "cor2",
            IdentityId::Cor3 => "cor3",
            IdentityId::Sumspec => "sumspec",
            IdentityId::Thm3 => "thm3",
            IdentityId::Cor4 => "cor4",
            IdentityId::Lemma1 => "lemma1",
        }
    }

    pub fn arity(self) -> Arity {
        match self {
            IdentityId::Thm1 | IdentityId::Cor1 => Arity::Triple,
            IdentityId::Thm2 | IdentityId::Thm3 => Arity::Quadruple,
            _ => Arity::Pair,
        }
    }

    pub fn uses(self) -> ParamUse {
        let set = |k, r, m, n, p| ParamUse { k, r, m, n, p };
        match self {
            IdentityId::AdjMean | IdentityId::An | IdentityId::Lemma1 => set(false, false, false, false, false),
            IdentityId::Bap05 => set(false, false, false, false, true),
            IdentityId::Yab08 => set(true, false, false, false, true),
            IdentityId::Weights => set(true, false, false, false, false),
            IdentityId::Weights2 => set(false, true, false, false, false),
            IdentityId::NecYab | IdentityId::Thm1 => set(true, true, false, false, true),
            IdentityId::Cor1 => set(true, true, false, false, false),
            IdentityId::Thm2 | IdentityId::Thm3 | IdentityId::Cor2 => set(true, true, true, true, false),
            IdentityId::Cor3 | IdentityId::Sumspec | IdentityId::Cor4 => set(false, false, true, true, false),
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        IdentityId::ALL.into_iter().find(|id| id.token() == s).ok_or_else(|| {
            let known: Vec<&str> = IdentityId::ALL.iter().map(|id| id.token()).collect();
            Error::usage(format!("unknown identity {s:?}; expected one of {}", known.join(", ")))
        })
    }
}

/// Integer parameters of an identity. Unused fields are `None` once
/// resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub k: Option<u32>,
    pub r: Option<u32>,
    pub m: Option<u32>,
    pub n: Option<u32>,
    pub p: Option<u32>,
}

impl Params {
    pub fn krmn(k: u32, r: u32, m: u32, n: u32) -> Self {
        Params { k: Some(k), r: Some(r), m: Some(m), n: Some(n), p: None }
    }

    /// Fills defaults for the parameters `id` reads, drops the rest, and
    /// checks the ranges under which the identity is stated.
    pub fn resolve(&self, id: IdentityId) -> Result<Params> {
        for (name, x) in [("k", self.k), ("r", self.r), ("m", self.m), ("n", self.n)] {
            if let Some(x) = x.filter(|&x| x > MAX_ORDER) {
                return Err(Error::ParameterCap(format!("{name} = {x} exceeds {MAX_ORDER}")));
            }
        }
        let uses = id.uses();
        let k_default = if id == IdentityId::Thm1 { 2 } else { 1 };
        let k = if uses.k { self.k.unwrap_or(k_default) } else { 1 };
        let r = if uses.r { self.r.unwrap_or(1) } else { 1 };
        let m = if uses.m { self.m.unwrap_or((k + 1).max(2)) } else { 2 };
        let n = if id == IdentityId::Cor2 {
            match self.n {
                Some(n) if n != m + 1 => {
                    return Err(Error::usage(format!("cor2 fixes n = m + 1 = {}, got n = {n}", m + 1)));
                }
                _ => m + 1,
            }
        } else if uses.n {
            self.n.unwrap_or(m + 1)
        } else {
            3
        };
        let p = match id {
            IdentityId::Bap05 => self.p.unwrap_or(2),
            IdentityId::Yab08 => self.p.unwrap_or(k + 1),
            IdentityId::NecYab | IdentityId::Thm1 => self.p.unwrap_or(k + r),
            _ => 0,
        };

        if k == 0 || r == 0 {
            return Err(Error::usage(format!("k and r must be >= 1, got k={k}, r={r}")));
        }
        if id == IdentityId::Thm1 && k < 2 {
            return Err(Error::usage(format!("thm1 needs k >= 2, got k={k}")));
        }
        if uses.m && !(2 <= m && m < n) {
            return Err(Error::usage(format!("need 2 <= m <= n - 1, got m={m}, n={n}")));
        }
        if uses.m && uses.k && k > m - 1 {
            return Err(Error::usage(format!("need 1 <= k <= m - 1, got k={k}, m={m}")));
        }
        if uses.p {
            let min_p = match id {
                IdentityId::Yab08 => k,
                IdentityId::NecYab | IdentityId::Thm1 => k + r - 1,
                _ => 1,
            };
            if p < min_p || p as usize > MAX_DEGREE {
                return Err(Error::usage(format!("{id} needs {min_p} <= p <= {MAX_DEGREE}, got p={p}")));
            }
        }

        let pick = |used: bool, x: u32| used.then_some(x);
        Ok(Params {
            k: pick(uses.k, k),
            r: pick(uses.r, r),
            m: pick(uses.m, m),
            n: pick(uses.n, n),
            p: pick(uses.p, p),
        })
    }
}

/// Covariate values. `s` and `t` are present according to the arity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub u: f64,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub v: f64,
}

impl Point {
    pub fn pair(u: f64, v: f64) -> Self {
        Point { u, s: None, t: None, v }
    }

    pub fn triple(u: f64, s: f64, v: f64) -> Self {
        Point { u, s: Some(s), t: None, v }
    }

    pub fn quadruple(u: f64, s: f64, t: f64, v: f64) -> Self {
        Point { u, s: Some(s), t: Some(t), v }
    }

    fn check(&self, arity: Arity) -> Result<()> {
        let finite = [Some(self.u), self.s, self.t, Some(self.v)].into_iter().flatten().all(f64::is_finite);
        let ordered = match (arity, self.s, self.t) {
            (Arity::Pair, None, None) => self.u < self.v,
            (Arity::Triple, Some(s), None) => self.u < s && s < self.v,
            (Arity::Quadruple, Some(s), Some(t)) => {
                (self.u < s && s < t && t < self.v) || (s < self.u && self.u < self.v && self.v < t)
            }
            _ => return Err(Error::usage(format!("point {self:?} does not match arity {arity:?}"))),
        };
        if finite && ordered {
            Ok(())
        } else {
            Err(Error::usage(format!("point {self:?} is not finite and strictly ordered for {arity:?}")))
        }
    }

    pub(crate) fn s_or_nan(&self) -> f64 {
        self.s.unwrap_or(f64::NAN)
    }

    pub(crate) fn t_or_nan(&self) -> f64 {
        self.t.unwrap_or(f64::NAN)
    }
}

/// A fully specified instance of an identity.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCase {
    id: IdentityId,
    params: Params,
    point: Point,
}

impl IdentityCase {
    pub fn new(id: IdentityId, params: Params, point: Point) -> Result<Self> {
        let params = params.resolve(id)?;
        point.check(id.arity())?;
        Ok(IdentityCase { id, params, point })
    }

    pub fn id(&self) -> IdentityId {
        self.id
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn point(&self) -> Point {
        self.point
    }

    pub(crate) fn k(&self) -> u32 {
        self.params.k.unwrap_or(1)
    }

    pub(crate) fn r(&self) -> u32 {
        self.params.r.unwrap_or(1)
    }

    pub(crate) fn gap(&self) -> u32 {
        self.params.n.unwrap_or(3) - self.params.m.unwrap_or(2)
    }

    pub(crate) fn p(&self) -> usize {
        self.params.p.unwrap_or(0) as usize
    }

    /// `d = n − m + k + r − 2`.
    pub(crate) fn d(&self) -> u32 {
        self.gap() + self.k() + self.r() - 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.token().parse::<IdentityId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.token()));
        }
        assert_eq!("COR3".parse::<IdentityId>().unwrap(), IdentityId::Cor3);
        assert!("cor5".parse::<IdentityId>().is_err());
    }

    #[test]
    fn arities() {
        assert_eq!(IdentityId::Thm1.arity(), Arity::Triple);
        assert_eq!(IdentityId::Thm3.arity(), Arity::Quadruple);
        assert_eq!(IdentityId::Lemma1.arity(), Arity::Pair);
    }

    #[test]
    fn defaults_and_unused_fields() {
        let p = Params::default().resolve(IdentityId::Thm1).unwrap();
        assert_eq!(p, Params { k: Some(2), r: Some(1), m: None, n: None, p: Some(3) });
        let p = Params { k: Some(2), ..Default::default() }.resolve(IdentityId::Thm3).unwrap();
        assert_eq!(p, Params::krmn(2, 1, 3, 4));
        let p = Params { k: Some(9), p: Some(4), ..Default::default() }.resolve(IdentityId::Cor3).unwrap();
        assert_eq!(p, Params { k: None, r: None, m: Some(2), n: Some(3), p: None });
        let p = Params { m: Some(3), ..Default::default() }.resolve(IdentityId::Cor2).unwrap();
        assert_eq!(p.n, Some(4));
    }

    #[test]
    fn parameter_ranges() {
        let bad = [
            (IdentityId::Thm1, Params { k: Some(1), ..Default::default() }),
            (IdentityId::Thm2, Params::krmn(2, 1, 2, 3)),
            (IdentityId::Cor3, Params { m: Some(1), n: Some(3), ..Default::default() }),
            (IdentityId::Cor3, Params { m: Some(3), n: Some(3), ..Default::default() }),
            (IdentityId::Cor2, Params { m: Some(2), n: Some(4), ..Default::default() }),
            (IdentityId::NecYab, Params { k: Some(3), r: Some(2), p: Some(3), ..Default::default() }),
            (IdentityId::Bap05, Params { p: Some(65), ..Default::default() }),
            (IdentityId::Weights, Params { k: Some(0), ..Default::default() }),
        ];
        for (id, params) in bad {
            assert!(matches!(params.resolve(id), Err(Error::Usage(_))), "{id} {params:?}");
        }
    }

    #[test]
    fn point_order() {
        let ok = |id, p| IdentityCase::new(id, Params::default(), p).is_ok();
        assert!(ok(IdentityId::Cor3, Point::pair(1.0, 2.0)));
        assert!(!ok(IdentityId::Cor3, Point::pair(2.0, 2.0)));
        assert!(!ok(IdentityId::Cor3, Point::triple(1.0, 1.5, 2.0)));
        assert!(ok(IdentityId::Cor1, Point::triple(1.0, 1.5, 2.0)));
        assert!(!ok(IdentityId::Cor1, Point::triple(1.0, 2.5, 2.0)));
        assert!(ok(IdentityId::Thm3, Point::quadruple(1.0, 1.5, 1.7, 2.0)));
        assert!(ok(IdentityId::Thm3, Point::quadruple(1.0, 0.5, 3.0, 2.0)));
        assert!(!ok(IdentityId::Thm3, Point::quadruple(1.0, 0.5, 1.7, 2.0)));
        assert!(!ok(IdentityId::Thm3, Point::quadruple(1.0, f64::NAN, 1.7, 2.0)));
    }
}
