use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{horner, rational_to_f64};

/// Exact polynomial in `(u, v)`; keys are `(power of u, power of v)` and no
/// stored coefficient is zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BivariatePolyRational {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl BivariatePolyRational {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_terms([((0, 0), c)])
    }

    pub fn u() -> Self {
        Self::from_terms([((1, 0), BigRational::one())])
    }

    pub fn v() -> Self {
        Self::from_terms([((0, 1), BigRational::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), BigRational)>) -> Self {
        let mut out = Self::zero();
        for (key, c) in terms {
            out.add_term(key, c);
        }
        out
    }

    pub(crate) fn add_term(&mut self, key: (u32, u32), c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, u_pow: u32, v_pow: u32) -> BigRational {
        self.terms.get(&(u_pow, v_pow)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `∂^{i+j} / ∂u^i ∂v^j`.
    pub fn mixed_partial(&self, i: u32, j: u32) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            if a < i || b < j {
                continue;
            }
            let scale = falling(a, i) * falling(b, j);
            out.add_term((a - i, b - j), c * BigRational::from_integer(scale));
        }
        out
    }

    /// The same polynomial with `u` and `v` exchanged.
    pub fn swap_variables(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(a, b), c)| ((b, a), c.clone())))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::from_terms(self.terms.iter().map(|(&key, c)| (key, c * k)))
    }

    /// Horner in `v` for each power of `u`, then Horner in `u`.
    pub fn eval_f64(&self, u: f64, v: f64) -> f64 {
        let Some(max_u) = self.terms.keys().map(|&(a, _)| a).max() else {
            return 0.0;
        };
        let mut rows: Vec<Vec<f64>> = vec![Vec::new(); max_u as usize + 1];
        for (&(a, b), c) in &self.terms {
            let row = &mut rows[a as usize];
            if row.len() <= b as usize {
                row.resize(b as usize + 1, 0.0);
            }
            row[b as usize] = rational_to_f64(c);
        }
        let in_v: Vec<f64> = rows.iter().map(|row| horner(row, v)).collect();
        horner(&in_v, u)
    }

    pub fn eval_exact(&self, u: &BigRational, v: &BigRational) -> BigRational {
        self.terms.iter().fold(BigRational::zero(), |acc, (&(a, b), c)| {
            acc + c * num_traits::pow(u.clone(), a as usize) * num_traits::pow(v.clone(), b as usize)
        })
    }
}

fn falling(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, t| acc * BigInt::from(n - t))
}

impl Add for &BivariatePolyRational {
    type Output = BivariatePolyRational;

    fn add(self, rhs: Self) -> BivariatePolyRational {
        let mut out = self.clone();
        for (&key, c) in &rhs.terms {
            out.add_term(key, c.clone());
        }
        out
    }
}

impl Neg for &BivariatePolyRational {
    type Output = BivariatePolyRational;

    fn neg(self) -> BivariatePolyRational {
        BivariatePolyRational::from_terms(self.terms.iter().map(|(&key, c)| (key, -c)))
    }
}

impl Sub for &BivariatePolyRational {
    type Output = BivariatePolyRational;

    fn sub(self, rhs: Self) -> BivariatePolyRational {
        self + &(-rhs)
    }
}

impl Mul for &BivariatePolyRational {
    type Output = BivariatePolyRational;

    fn mul(self, rhs: Self) -> BivariatePolyRational {
        let mut out = BivariatePolyRational::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for BivariatePolyRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (&(a, b), c)) in self.terms.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if n == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            let mut factors = Vec::new();
            if !mag.is_one() || (a == 0 && b == 0) {
                factors.push(mag.to_string());
            }
            for (name, pow) in [("u", a), ("v", b)] {
                match pow {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    p => factors.push(format!("{name}^{p}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}
