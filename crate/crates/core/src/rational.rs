//! Exact rational roots of polynomials of degree at most two.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::PolyError;
use crate::poly::IntPoly;

/// Reduced fraction with positive denominator.
pub type Rational = BigRational;

/// Coefficients `[c0, c1, ...]` (constant first) of a polynomial in one variable.
pub fn univariate_coefficients(p: &IntPoly) -> Result<Vec<Rational>, PolyError> {
    if p.used_vars() > 1 {
        return Err(PolyError::DimensionMismatch { expected: 1, got: p.used_vars() });
    }
    let deg = p.degree().unwrap_or(0) as usize;
    let mut out = vec![Rational::zero(); deg + 1];
    for (exps, c) in p.monomials() {
        let e = exps.first().copied().unwrap_or(0) as usize;
        out[e] = Rational::from_integer(c.clone());
    }
    Ok(out)
}

/// Evaluates `sum coeffs[i] * t^i` exactly.
pub fn eval_univariate(coeffs: &[Rational], t: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * t + c)
}

/// All distinct rational roots of `sum coeffs[i] * t^i`, sorted ascending.
///
/// The zero polynomial is rejected with [`PolyError::ZeroPolynomial`].
pub fn rational_roots_deg2(coeffs: &[Rational]) -> Result<Vec<Rational>, PolyError> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        return Err(PolyError::ZeroPolynomial);
    }
    if coeffs.len() > 3 {
        return Err(PolyError::DegreeTooHigh(coeffs.len() - 1));
    }
    // Clear denominators so the arithmetic below stays in the integers.
    let lcm = coeffs.iter().fold(BigInt::from(1), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|c| (c * &lcm).to_integer()).collect();
    let c0 = ints[0].clone();
    let c1 = ints.get(1).cloned().unwrap_or_default();
    let c2 = ints.get(2).cloned().unwrap_or_default();

    let mut roots = Vec::new();
    if c2.is_zero() {
        if !c1.is_zero() {
            roots.push(Rational::new(-c0, c1));
        }
    } else if c0.is_zero() {
        roots.push(Rational::zero());
        roots.push(Rational::new(-c1, c2));
    } else {
        let disc = &c1 * &c1 - BigInt::from(4) * &c2 * &c0;
        if !disc.is_negative() {
            let s = disc.sqrt();
            if &s * &s == disc {
                let two_a = BigInt::from(2) * &c2;
                roots.push(Rational::new(-&c1 + &s, two_a.clone()));
                roots.push(Rational::new(-&c1 - &s, two_a));
            }
        }
    }
    roots.sort();
    roots.dedup();
    Ok(roots)
}
