//! Sine and cosine at rational points as exact truncated Taylor sums.
//!
//! The same rational approximates the real value and every convergent p-adic value, so one
//! evaluation serves all places. Each place certifies its own truncation error.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::padic::padic_valuation;
use crate::exact::{to_f64, Rational};
use crate::Place;

/// Largest admissible real truncation error for a sine/cosine evaluation.
pub const REAL_TRIG_TOLERANCE: f64 = 1e-15;

/// Real truncation error aimed for when a degree is chosen.
const REAL_TARGET: f64 = 1e-18;

const MAX_DEGREE: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SinCos {
    pub sin: Rational,
    pub cos: Rational,
    /// Highest power of the argument kept.
    pub degree: usize,
}

/// `Σ_{n ≤ degree} (−1)^k θ^n/n!` split into its odd (sine) and even (cosine) parts.
pub fn sin_cos(theta: &Rational, degree: usize) -> SinCos {
    // Σ θ^n/n! over the common denominator d^D·D!, with θ = n/d.
    let (num, den) = (theta.numer(), theta.denom());
    let mut sin = BigInt::zero();
    let mut cos = BigInt::zero();
    // term_n = num^n · d^{D−n} · D!/n!, built downward from n = D
    let mut num_pow = Vec::with_capacity(degree + 1);
    num_pow.push(BigInt::one());
    for n in 1..=degree {
        let next = &num_pow[n - 1] * num;
        num_pow.push(next);
    }
    let mut scale = BigInt::one(); // d^{D−n} · D!/n!
    for n in (0..=degree).rev() {
        let term = &num_pow[n] * &scale;
        let target = if n % 2 == 0 { &mut cos } else { &mut sin };
        if (n / 2) % 2 == 1 {
            *target -= term;
        } else {
            *target += term;
        }
        scale = scale * den * BigInt::from(n.max(1));
    }
    // after the loop scale = d^{D+1}·D!, one factor d too many
    let common = scale / den;
    SinCos {
        sin: Rational::new(sin, common.clone()),
        cos: Rational::new(cos, common),
        degree,
    }
}

/// Lower bound on the p-adic valuation of the truncation error, or `None` when the Taylor
/// series diverges at `theta` (`|θ|_p ≥ |2|_p`, i.e. `v_p(θ) ≤ 1/(p−1)`).
pub fn padic_error_valuation(theta: &Rational, degree: usize, p: u64) -> Option<i64> {
    let Some(v) = padic_valuation(theta, p) else {
        return Some(i64::MAX);
    };
    let needed = if p == 2 { 2 } else { 1 };
    if v < needed {
        return None;
    }
    let d = degree as i64;
    Some((d + 1) * v - d / (p as i64 - 1))
}

/// Bound `|θ|^{d+1}/(d+1)!` on the real truncation error.
pub fn real_error_bound(theta: &Rational, degree: usize) -> f64 {
    let x = to_f64(theta).abs();
    if x == 0.0 {
        return 0.0;
    }
    let n = degree as f64 + 1.0;
    let ln_fact: f64 = (1..=degree + 1).map(|k| (k as f64).ln()).sum();
    (n * x.ln() - ln_fact).exp()
}

/// Smallest degree meeting the precision target at `place`: a real remainder below 1e-18,
/// or a p-adic error valuation above `order`. Divergent p-adic arguments get `2·order + 1`.
pub fn required_degree(theta: &Rational, place: Place, order: usize) -> usize {
    match place {
        Place::Real => {
            let x = to_f64(theta).abs();
            if x == 0.0 {
                return 0;
            }
            let (ln_x, ln_target) = (x.ln(), REAL_TARGET.ln());
            let mut ln_bound = ln_x; // ln(x^{d+1}/(d+1)!) at d = 0
            let mut d = 0;
            while ln_bound > ln_target && d < MAX_DEGREE {
                d += 1;
                ln_bound += ln_x - ((d + 1) as f64).ln();
            }
            d
        }
        Place::Finite(p) => {
            if padic_error_valuation(theta, 0, p).is_none() {
                return 2 * order + 1;
            }
            let target = order as i64 + 1;
            (0..=MAX_DEGREE)
                .find(|&d| padic_error_valuation(theta, d, p).is_some_and(|e| e >= target))
                .unwrap_or(MAX_DEGREE)
        }
    }
}

/// Largest [`required_degree`] over `places`, or `2·order + 1` for an empty set.
pub fn degree_for(theta: &Rational, places: &[Place], order: usize) -> usize {
    places
        .iter()
        .map(|&pl| required_degree(theta, pl, order))
        .max()
        .unwrap_or(2 * order + 1)
}

/// Checks that the truncated sine/cosine at `theta` is valid at `place`.
pub fn certify_trig(theta: &Rational, degree: usize, place: Place) -> Result<()> {
    match place {
        Place::Real => {
            let err = real_error_bound(theta, degree);
            if err > REAL_TRIG_TOLERANCE {
                return Err(Error::Precision {
                    place,
                    detail: format!(
                        "truncated sine/cosine of {} has real error bound {err:e}",
                        to_f64(theta)
                    ),
                });
            }
        }
        Place::Finite(p) => {
            if padic_error_valuation(theta, degree, p).is_none() {
                return Err(Error::Divergence {
                    place,
                    detail: format!("trigonometric argument {theta} has |θ|_{p} ≥ |2|_{p}"),
                });
            }
        }
    }
    Ok(())
}
