use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// A rational rendered as decimal numerator/denominator strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalString {
    pub numerator: String,
    pub denominator: String,
}

impl From<&Rational> for RationalString {
    fn from(q: &Rational) -> Self {
        RationalString { numerator: q.numer().to_string(), denominator: q.denom().to_string() }
    }
}

/// Polynomial with exact coefficients; `coefficients[j]` multiplies `u^j`.
/// Trailing zeros are always trimmed, so the zero polynomial has no
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPolynomial {
    coefficients: Vec<Rational>,
}

impl RationalPolynomial {
    pub fn new(mut coefficients: Vec<Rational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        RationalPolynomial { coefficients }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// Coefficient of `u^j`, zero past the end.
    pub fn coefficient(&self, j: usize) -> Rational {
        self.coefficients.get(j).cloned().unwrap_or_else(Rational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn eval(&self, u: &Rational) -> Rational {
        self.coefficients
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * u + c)
    }

    fn mul_linear(&self, root: &Rational) -> Self {
        // (p(u)) * (u - root)
        let mut out = vec![Rational::zero(); self.coefficients.len() + 1];
        for (j, c) in self.coefficients.iter().enumerate() {
            out[j + 1] += c;
            out[j] -= c * root;
        }
        Self::new(out)
    }

    fn scaled(&self, s: &Rational) -> Self {
        Self::new(self.coefficients.iter().map(|c| c * s).collect())
    }

    fn add(&self, other: &Self) -> Self {
        let len = self.coefficients.len().max(other.coefficients.len());
        Self::new((0..len).map(|j| self.coefficient(j) + other.coefficient(j)).collect())
    }

    /// The unique polynomial of degree `< points.len()` through `points`.
    pub fn lagrange(points: &[(Rational, Rational)]) -> Result<Self> {
        for (i, (xi, _)) in points.iter().enumerate() {
            if points[..i].iter().any(|(xj, _)| xj == xi) {
                return Err(Error::Interpolation(format!("repeated abscissa {xi}")));
            }
        }
        let mut total = Self::zero();
        for (i, (xi, yi)) in points.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            let mut basis = Self::constant(Rational::one());
            let mut denom = Rational::one();
            for (j, (xj, _)) in points.iter().enumerate() {
                if i != j {
                    basis = basis.mul_linear(xj);
                    denom *= xi - xj;
                }
            }
            total = total.add(&basis.scaled(&(yi / denom)));
        }
        Ok(total)
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| match j {
                0 => format!("{c}"),
                1 => format!("({c})·u"),
                _ => format!("({c})·u^{j}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trims_and_reports_degree() {
        let p = RationalPolynomial::new(vec![rat(1, 2), rat(0, 1), rat(0, 1)]);
        assert_eq!(p.degree(), Some(0));
        assert!(RationalPolynomial::new(vec![rat(0, 1)]).is_zero());
        assert_eq!(RationalPolynomial::zero().degree(), None);
    }

    #[test]
    fn interpolates_a_line_exactly() {
        // y = 1/3 - u/6
        let pts: Vec<_> = [1i64, 2, 5]
            .iter()
            .map(|&r| {
                let u = rat(1, r);
                let y = rat(1, 3) - &u * rat(1, 6);
                (u, y)
            })
            .collect();
        let p = RationalPolynomial::lagrange(&pts).unwrap();
        assert_eq!(p.coefficients(), &[rat(1, 3), rat(-1, 6)]);
    }

    #[test]
    fn repeated_points_are_an_error() {
        let pts = vec![(rat(1, 2), rat(1, 1)), (rat(2, 4), rat(3, 1))];
        assert!(matches!(RationalPolynomial::lagrange(&pts), Err(Error::Interpolation(_))));
    }

    proptest! {
        #[test]
        fn lagrange_recovers_random_polynomials(coeffs in prop::collection::vec(-20i64..20, 0..5), xs in prop::collection::btree_set(1i64..40, 5..7)) {
            let p = RationalPolynomial::new(coeffs.iter().map(|&c| rat(c, 7)).collect());
            let pts: Vec<_> = xs.iter().map(|&x| { let u = rat(1, x); (u.clone(), p.eval(&u)) }).collect();
            prop_assert_eq!(RationalPolynomial::lagrange(&pts).unwrap(), p);
        }
    }
}
