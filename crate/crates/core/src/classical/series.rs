//! Truncated power series in `t` with exact rational coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::Rational;

/// Whether coefficients beyond the stored ones are known to vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// A polynomial: every omitted coefficient is zero.
    Exact,
    /// Only `a_0 … a_N` are known.
    Truncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalSeries {
    coeffs: Vec<Rational>,
    tail: Tail,
}

fn r(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl RationalSeries {
    /// Series known through `t^{coeffs.len()-1}`.
    pub fn truncated(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        RationalSeries {
            coeffs,
            tail: Tail::Truncated,
        }
    }

    pub fn polynomial(coeffs: Vec<Rational>) -> Self {
        let mut s = RationalSeries {
            coeffs: if coeffs.is_empty() {
                vec![Rational::zero()]
            } else {
                coeffs
            },
            tail: Tail::Exact,
        };
        s.trim();
        s
    }

    pub fn constant(c: Rational) -> Self {
        Self::polynomial(vec![c])
    }

    /// The identity series `t`.
    pub fn variable() -> Self {
        Self::polynomial(vec![Rational::zero(), Rational::one()])
    }

    fn trim(&mut self) {
        if self.tail == Tail::Exact {
            while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(Zero::is_zero) {
                self.coeffs.pop();
            }
        }
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn is_polynomial(&self) -> bool {
        self.tail == Tail::Exact
    }

    /// Highest stored power.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Order through which the series is known (`None` for polynomials).
    pub fn known_order(&self) -> Option<usize> {
        match self.tail {
            Tail::Exact => None,
            Tail::Truncated => Some(self.order()),
        }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Rational {
        self.coeffs.get(n).cloned().unwrap_or_else(Rational::zero)
    }

    /// Drops every term above `t^order`.
    pub fn truncate(&self, order: usize) -> Self {
        if self.tail == Tail::Exact && self.order() <= order {
            return self.clone();
        }
        let mut coeffs: Vec<Rational> = (0..=order).map(|n| self.coeff(n)).collect();
        if self.tail == Tail::Truncated && order > self.order() {
            coeffs.truncate(self.order() + 1);
        }
        RationalSeries {
            coeffs,
            tail: Tail::Truncated,
        }
    }

    /// Same series viewed as known through `order`; padding only makes sense for polynomials.
    pub fn to_order(&self, order: usize) -> Self {
        let mut coeffs: Vec<Rational> = (0..=order).map(|n| self.coeff(n)).collect();
        if self.tail == Tail::Truncated {
            coeffs.truncate(self.order().min(order) + 1);
        }
        RationalSeries {
            coeffs,
            tail: Tail::Truncated,
        }
    }

    fn combined_order(a: &Self, b: &Self) -> Option<usize> {
        match (a.known_order(), b.known_order()) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => None,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut s = RationalSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            tail: self.tail,
        };
        s.trim();
        s
    }

    /// Multiplicative inverse; needs an invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        self.inverse_to(self.known_order().unwrap_or(self.order().max(1) * 8))
    }

    /// Inverse known through `order` (required for polynomials, whose inverse is infinite).
    pub fn inverse_to(&self, order: usize) -> Result<Self> {
        let a0 = self.coeff(0);
        if a0.is_zero() {
            return Err(Error::NotInvertible("series with zero constant term"));
        }
        let order = self.known_order().map_or(order, |k| k.min(order));
        let inv0 = a0.recip();
        let mut h = Vec::with_capacity(order + 1);
        h.push(inv0.clone());
        for n in 1..=order {
            let mut acc = Rational::zero();
            for k in 1..=n.min(self.order()) {
                acc += &self.coeffs[k] * &h[n - k];
            }
            h.push(-acc * &inv0);
        }
        Ok(RationalSeries::truncated(h))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let order = Self::combined_order(self, other)
            .unwrap_or_else(|| (self.order() + other.order()).max(1) * 8);
        Ok(&self.to_order(order) * &other.inverse_to(order)?)
    }

    /// Term-by-term derivative (known one order lower).
    pub fn derivative(&self) -> Self {
        let coeffs: Vec<Rational> = if self.coeffs.len() <= 1 {
            vec![Rational::zero()]
        } else {
            (1..self.coeffs.len()).map(|n| &self.coeffs[n] * r(n)).collect()
        };
        let mut s = RationalSeries {
            coeffs,
            tail: self.tail,
        };
        s.trim();
        s
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn integral(&self) -> Self {
        let mut coeffs = vec![Rational::zero()];
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(n, a)| a / r(n + 1)),
        );
        let mut s = RationalSeries {
            coeffs,
            tail: self.tail,
        };
        s.trim();
        s
    }

    /// `outer(inner(t))` for `inner(0) = 0`, using the outer coefficients `c_0 … c_K`.
    fn compose_coeffs(outer: &[Rational], inner: &Self, order: usize) -> Self {
        let inner = inner.to_order(order);
        let mut acc = RationalSeries::truncated(vec![Rational::zero(); order + 1]);
        for c in outer.iter().take(order + 1).rev() {
            acc = &acc * &inner;
            let mut coeffs = acc.coeffs.clone();
            coeffs.resize(order + 1, Rational::zero());
            coeffs[0] += c;
            acc = RationalSeries::truncated(coeffs);
        }
        acc.to_order(order)
    }

    /// Composition `self(inner(t))`; requires `inner(0) = 0`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeff(0).is_zero() {
            return Err(Error::InvalidInput(
                "composition needs an inner series vanishing at 0".into(),
            ));
        }
        let order = Self::combined_order(self, inner)
            .unwrap_or(self.order() * inner.order().max(1));
        let mut out = Self::compose_coeffs(&self.coeffs, inner, order);
        if self.is_polynomial() && inner.is_polynomial() {
            out.tail = Tail::Exact;
            out.trim();
        }
        Ok(out)
    }

    fn require_zero_constant(&self, what: &str) -> Result<usize> {
        if !self.coeff(0).is_zero() {
            return Err(Error::InvalidInput(format!(
                "{what} of a series is only formed for a vanishing constant term"
            )));
        }
        Ok(self.known_order().unwrap_or_else(|| self.order() * 8))
    }

    /// `(sin u(t), cos u(t))` for `u(0) = 0`, from `n·s_n = Σ k u_k c_{n−k}` and
    /// `n·c_n = −Σ k u_k s_{n−k}`.
    pub fn sin_cos(&self) -> Result<(Self, Self)> {
        let order = self.require_zero_constant("sin/cos")?;
        let du: Vec<Rational> = (0..=order).map(|k| r(k) * self.coeff(k)).collect();
        let mut s = vec![Rational::zero(); order + 1];
        let mut c = vec![Rational::zero(); order + 1];
        c[0] = Rational::one();
        for n in 1..=order {
            let mut sn = Rational::zero();
            let mut cn = Rational::zero();
            for k in 1..=n {
                if du[k].is_zero() {
                    continue;
                }
                sn += &du[k] * &c[n - k];
                cn -= &du[k] * &s[n - k];
            }
            s[n] = sn / r(n);
            c[n] = cn / r(n);
        }
        Ok((Self::truncated(s), Self::truncated(c)))
    }

    /// `sin(u(t))` for `u(0) = 0`.
    pub fn sin(&self) -> Result<Self> {
        Ok(self.sin_cos()?.0)
    }

    /// `cos(u(t))` for `u(0) = 0`.
    pub fn cos(&self) -> Result<Self> {
        Ok(self.sin_cos()?.1)
    }

    /// Horner evaluation of the stored coefficients at `t`.
    pub fn evaluate(&self, t: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, a| acc * t + a)
    }

    /// True when the coefficients of `t^0 … t^order` all vanish.
    pub fn vanishes_through(&self, order: usize) -> bool {
        (0..=order).all(|n| self.coeff(n).is_zero())
    }

    /// `(1 + x)^e` for a rational exponent, through `t^order` (binomial series).
    pub fn binomial(x: &Self, e: &Rational, order: usize) -> Result<Self> {
        x.require_zero_constant("binomial power")?;
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut c = Rational::one();
        for k in 0..=order {
            coeffs.push(c.clone());
            c = c * (e - r(k)) / r(k + 1);
        }
        Ok(Self::compose_coeffs(&coeffs, x, order))
    }
}

fn factorial_coeffs(order: usize, parity: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(order + 1);
    let mut fact = Rational::one();
    for n in 0..=order {
        if n > 0 {
            fact *= r(n);
        }
        if n % 2 == parity {
            let sign = if (n / 2) % 2 == 0 { 1 } else { -1 };
            out.push(Rational::from_integer(BigInt::from(sign)) / &fact);
        } else {
            out.push(Rational::zero());
        }
    }
    out
}

pub fn taylor_sin(order: usize) -> Vec<Rational> {
    factorial_coeffs(order, 1)
}

pub fn taylor_cos(order: usize) -> Vec<Rational> {
    factorial_coeffs(order, 0)
}

impl Add for &RationalSeries {
    type Output = RationalSeries;

    fn add(self, rhs: &RationalSeries) -> RationalSeries {
        match RationalSeries::combined_order(self, rhs) {
            Some(order) => RationalSeries::truncated(
                (0..=order).map(|n| self.coeff(n) + rhs.coeff(n)).collect(),
            ),
            None => RationalSeries::polynomial(
                (0..=self.order().max(rhs.order()))
                    .map(|n| self.coeff(n) + rhs.coeff(n))
                    .collect(),
            ),
        }
    }
}

impl Neg for &RationalSeries {
    type Output = RationalSeries;

    fn neg(self) -> RationalSeries {
        self.scale(&-Rational::one())
    }
}

impl Sub for &RationalSeries {
    type Output = RationalSeries;

    fn sub(self, rhs: &RationalSeries) -> RationalSeries {
        self + &(-rhs)
    }
}

impl Mul for &RationalSeries {
    type Output = RationalSeries;

    fn mul(self, rhs: &RationalSeries) -> RationalSeries {
        let full = self.order() + rhs.order();
        let order = RationalSeries::combined_order(self, rhs).map_or(full, |o| o.min(full));
        let mut coeffs = vec![Rational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        match RationalSeries::combined_order(self, rhs) {
            Some(known) => {
                coeffs.resize(known + 1, Rational::zero());
                RationalSeries::truncated(coeffs)
            }
            None => RationalSeries::polynomial(coeffs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn poly(c: &[i64]) -> RationalSeries {
        RationalSeries::polynomial(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn polynomial_arithmetic_is_exact() {
        let a = poly(&[1, 1]);
        let b = &a * &a;
        assert!(b.is_polynomial());
        assert_eq!(b.coeffs(), &[int(1), int(2), int(1)]);
        let c = &b - &b;
        assert_eq!(c.order(), 0);
    }

    #[test]
    fn geometric_inverse() {
        let a = poly(&[1, -1]).inverse_to(6).unwrap();
        assert_eq!(a.coeffs(), &vec![int(1); 7][..]);
        assert!(poly(&[0, 1]).inverse_to(3).is_err());
    }

    #[test]
    fn truncated_products_keep_their_order() {
        let g = RationalSeries::truncated(vec![int(1); 5]);
        let p = poly(&[1, -1]);
        let prod = &g * &p;
        assert_eq!(prod.known_order(), Some(4));
        assert_eq!(prod.coeffs(), &[int(1), int(0), int(0), int(0), int(0)]);
    }

    #[test]
    fn sine_cosine_identity() {
        let u = RationalSeries::truncated(vec![int(0), int(1), ratio(1, 3), int(-2), int(5), int(0), int(1)]);
        let s = u.sin().unwrap();
        let c = u.cos().unwrap();
        let one = &(&s * &s) + &(&c * &c);
        assert_eq!(one.coeff(0), int(1));
        assert!((1..=6).all(|n| one.coeff(n) == int(0)));
        // d/dt sin(u) = cos(u)·u'
        let lhs = s.derivative();
        let rhs = &c * &u.derivative();
        assert!((&lhs - &rhs).vanishes_through(5));
        let composed = RationalSeries::truncated(taylor_sin(6)).compose(&u).unwrap();
        assert_eq!(composed.coeffs(), s.coeffs());
    }

    #[test]
    fn binomial_square_root() {
        let x = poly(&[0, 1]).to_order(8);
        let s = RationalSeries::binomial(&x, &ratio(1, 2), 8).unwrap();
        let sq = &s * &s;
        assert_eq!(sq.coeff(0), int(1));
        assert_eq!(sq.coeff(1), int(1));
        assert!((2..=8).all(|n| sq.coeff(n) == int(0)));
    }

    #[test]
    fn derivative_and_integral() {
        let a = RationalSeries::truncated(vec![int(3), int(2), int(6)]);
        assert_eq!(a.integral().derivative().coeffs(), a.coeffs());
        assert_eq!(a.derivative().coeffs(), &[int(2), int(12)]);
        assert_eq!(a.evaluate(&ratio(1, 2)), ratio(11, 2));
    }

    #[test]
    fn composition_of_polynomials() {
        let outer = poly(&[1, 0, 1]);
        let inner = poly(&[0, 2, 1]);
        let c = outer.compose(&inner).unwrap();
        assert!(c.is_polynomial());
        assert_eq!(c.coeffs(), &[int(1), int(0), int(4), int(4), int(1)]);
        assert!(outer.compose(&poly(&[1, 1])).is_err());
    }
}
