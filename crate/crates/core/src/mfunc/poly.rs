use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Largest supported degree of a univariate `h`.
pub const MAX_DEGREE: usize = 64;

/// Univariate polynomial with exact rational coefficients, `coeffs[p]` is the
/// coefficient of `x^p`. The top coefficient is nonzero unless the polynomial
/// is zero (empty coefficient list).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolyRational {
    coeffs: Vec<BigRational>,
}

impl PolyRational {
    pub fn new(mut coeffs: Vec<BigRational>) -> Result<Self> {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::usage(format!(
                "polynomial degree {} exceeds the cap of {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `x^p / p!`.
    pub fn monomial(p: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&p) {
            return Err(Error::usage(format!("monomial degree must be in 1..={MAX_DEGREE}, got {p}")));
        }
        let mut coeffs = vec![BigRational::zero(); p + 1];
        coeffs[p] = BigRational::new(BigInt::one(), factorial(p));
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(p, c)| c * BigRational::from_integer(BigInt::from(p)))
            .collect();
        Self { coeffs }
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |acc, _| acc.derivative())
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        horner(&self.to_f64_coeffs(), x)
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub(crate) fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, t| acc * BigInt::from(t))
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}
