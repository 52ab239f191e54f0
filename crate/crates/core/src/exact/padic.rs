//! p-adic valuations, norms, fractional parts and canonical digit expansions of rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{pow_i64, Rational};

/// Exponent of `p` in a nonzero integer.
pub fn valuation_int(n: &BigInt, p: u64) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let bp = BigInt::from(p);
    let mut rest = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = rest.div_rem(&bp);
        if !r.is_zero() {
            return Some(v);
        }
        rest = q;
        v += 1;
    }
}

/// ν with `x = p^ν·m/n`, `p ∤ mn`; `None` stands for `+∞` (x = 0).
pub fn padic_valuation(x: &Rational, p: u64) -> Option<i64> {
    let vn = valuation_int(x.numer(), p)?;
    let vd = valuation_int(x.denom(), p).unwrap_or(0);
    Some(vn - vd)
}

/// `|x|_p = p^{-ν}` and `|0|_p = 0`.
pub fn padic_norm(x: &Rational, p: u64) -> Rational {
    match padic_valuation(x, p) {
        None => Rational::zero(),
        Some(v) => pow_i64(&Rational::from_integer(BigInt::from(p)), -v),
    }
}

pub fn p_power(p: u64, e: i64) -> Rational {
    pow_i64(&Rational::from_integer(BigInt::from(p)), e)
}

/// Writes a nonzero `x` as `p^ν·u` with `u` a p-adic unit.
pub fn split_unit(x: &Rational, p: u64) -> Option<(i64, Rational)> {
    let v = padic_valuation(x, p)?;
    Some((v, x * p_power(p, -v)))
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.mod_floor(m).extended_gcd(m);
    if !g.gcd.is_one() {
        return None;
    }
    Some(g.x.mod_floor(m))
}

/// Residue of a p-adic integer `x ∈ Z_p ∩ Q` modulo `p^k`, in `[0, p^k)`.
///
/// Panics if `|x|_p > 1`.
pub fn residue_mod_pk(x: &Rational, p: u64, k: u32) -> BigInt {
    let modulus = num_traits::pow(BigInt::from(p), k as usize);
    if k == 0 || x.is_zero() {
        return BigInt::zero();
    }
    assert!(
        padic_valuation(x, p).unwrap_or(0) >= 0,
        "residue_mod_pk needs a p-adic integer"
    );
    let inv = mod_inverse(x.denom(), &modulus).expect("denominator is a p-adic unit");
    (x.numer() * inv).mod_floor(&modulus)
}

/// `{u}_p`: the rational `k/p^m ∈ [0,1)` with `u − {u}_p ∈ Z_p`.
pub fn fractional_part(u: &Rational, p: u64) -> Rational {
    let v = match padic_valuation(u, p) {
        None => return Rational::zero(),
        Some(v) if v >= 0 => return Rational::zero(),
        Some(v) => v,
    };
    let m = (-v) as u32;
    let scaled = u * p_power(p, m as i64);
    let r = residue_mod_pk(&scaled, p, m);
    Rational::new(r, num_traits::pow(BigInt::from(p), m as usize))
}

/// Indicator of the unit ball: 1 when the supplied norm is at most 1.
pub fn omega(norm: &Rational) -> u8 {
    u8::from(*norm <= Rational::one())
}

/// `Ω(|x|_p)`.
pub fn omega_at(x: &Rational, p: u64) -> u8 {
    u8::from(padic_valuation(x, p).is_none_or(|v| v >= 0))
}

/// A p-adic number known modulo `p^{ν+N}`: `p^ν · Σ digits[i]·p^i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicApprox {
    #[serde(rename = "p")]
    pub prime: u64,
    pub valuation: i64,
    pub digits: Vec<u64>,
}

impl PAdicApprox {
    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// The integer `Σ digits[i]·p^i`.
    pub fn unit_part(&self) -> BigInt {
        let bp = BigInt::from(self.prime);
        self.digits
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, &d| acc * &bp + BigInt::from(d))
    }

    /// Rational value of the truncated expansion.
    pub fn to_rational(&self) -> Rational {
        Rational::from_integer(self.unit_part()) * p_power(self.prime, self.valuation)
    }
}

/// Canonical expansion `x = p^ν Σ x_i p^i`, `x_0 ≠ 0`, to `n` digits.
///
/// Zero is reported with valuation 0 and all-zero digits.
pub fn canonical_expansion(x: &Rational, p: u64, n: usize) -> PAdicApprox {
    let Some((v, unit)) = split_unit(x, p) else {
        return PAdicApprox {
            prime: p,
            valuation: 0,
            digits: vec![0; n],
        };
    };
    let mut r = residue_mod_pk(&unit, p, n as u32);
    let bp = BigInt::from(p);
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        let (q, d) = r.div_rem(&bp);
        digits.push(d.to_u64().expect("digit below p"));
        r = q;
    }
    PAdicApprox {
        prime: p,
        valuation: v,
        digits,
    }
}

/// Square class of a nonzero rational in `Q_p^×/(Q_p^×)²`: the valuation parity and the
/// unit residue mod p (mod 8 for p = 2).
pub fn square_class(x: &Rational, p: u64) -> Option<(u8, u64)> {
    let (v, unit) = split_unit(x, p)?;
    let k = if p == 2 { 3 } else { 1 };
    let r = residue_mod_pk(&unit, p, k).to_u64().expect("small residue");
    let r = if p == 2 {
        r
    } else {
        // reduce to the quadratic-residue class representative
        if is_qr_mod_p(r, p) {
            1
        } else {
            smallest_non_residue(p)
        }
    };
    Some(((v.rem_euclid(2)) as u8, r))
}

fn is_qr_mod_p(r: u64, p: u64) -> bool {
    (1..p).any(|w| (w * w) % p == r % p)
}

fn smallest_non_residue(p: u64) -> u64 {
    (2..p).find(|&r| !is_qr_mod_p(r, p)).unwrap_or(1)
}

/// Hensel square root of `x` to `n` digits.
///
/// Exists when ν is even and the unit is a square (a quadratic residue mod p for odd p,
/// `≡ 1 mod 8` for p = 2). Of the two roots, the one with leading digit `≤ (p−1)/2` is
/// returned; for p = 2 the root `≡ 1 mod 4`.
pub fn padic_sqrt(x: &Rational, p: u64, n: usize) -> Option<PAdicApprox> {
    let (v, unit) = split_unit(x, p)?;
    if v % 2 != 0 || n == 0 {
        return None;
    }
    let bp = BigInt::from(p);
    let root = if p == 2 {
        let u = residue_mod_pk(&unit, 2, n as u32 + 2);
        if (&u % BigInt::from(8)) != BigInt::one() {
            return None;
        }
        // bitwise lift: w² ≡ u mod 2^{k+1} from w² ≡ u mod 2^k, k ≥ 3
        let mut w = BigInt::one();
        for k in 3..(n as u32 + 2) {
            let modulus = BigInt::one() << (k + 1);
            if (&w * &w - &u).mod_floor(&modulus) != BigInt::zero() {
                w += BigInt::one() << (k - 1);
            }
        }
        let modulus = BigInt::one() << n;
        let w = w.mod_floor(&modulus);
        // pick the root ≡ 1 mod 4
        if n >= 2 && (&w % BigInt::from(4)) != BigInt::one() {
            (&modulus - w).mod_floor(&modulus)
        } else {
            w
        }
    } else {
        let u0 = residue_mod_pk(&unit, p, 1).to_u64().expect("small residue");
        let w0 = (1..p).find(|&w| (w * w) % p == u0)?;
        let w0 = w0.min(p - w0);
        let modulus = num_traits::pow(bp.clone(), n);
        let u = residue_mod_pk(&unit, p, n as u32);
        let mut w = BigInt::from(w0);
        let mut prec = 1usize;
        while prec < n {
            prec = (2 * prec).min(n);
            let m = num_traits::pow(bp.clone(), prec);
            let inv = mod_inverse(&(BigInt::from(2) * &w), &m).expect("2w is a unit");
            w = (&w - (&w * &w - &u) * inv).mod_floor(&m);
        }
        w.mod_floor(&modulus)
    };
    let rational_root = Rational::from_integer(root);
    let mut out = canonical_expansion(&rational_root, p, n);
    out.valuation += v / 2;
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, ratio};

    #[test]
    fn valuation_examples() {
        assert_eq!(padic_valuation(&int(12), 2), Some(2));
        assert_eq!(padic_norm(&int(12), 2), ratio(1, 4));
        assert_eq!(padic_valuation(&int(0), 5), None);
        assert_eq!(padic_norm(&int(0), 5), int(0));
        assert_eq!(padic_valuation(&ratio(9, 10), 3), Some(2));
        assert_eq!(padic_norm(&ratio(1, 3), 3), int(3));
        assert_eq!(padic_norm(&int(7), 3), int(1));
        assert_eq!(padic_valuation(&ratio(-5, 8), 2), Some(-3));
    }

    #[test]
    fn strong_triangle_example() {
        let (x, y) = (ratio(1, 3), ratio(2, 3));
        let lhs = padic_norm(&(&x + &y), 3);
        assert_eq!(lhs, int(1));
        assert!(lhs <= padic_norm(&x, 3).max(padic_norm(&y, 3)));
    }

    #[test]
    fn fractional_part_examples() {
        assert_eq!(fractional_part(&(ratio(1, 3) + int(5)), 3), ratio(1, 3));
        assert_eq!(fractional_part(&ratio(7, 4), 2), ratio(3, 4));
        // |7/4 − 3/4|_2 ≤ 1
        assert!(padic_norm(&(ratio(7, 4) - ratio(3, 4)), 2) <= int(1));
        assert_eq!(fractional_part(&ratio(5, 7), 3), int(0));
        // negative input is moved into [0,1)
        assert_eq!(fractional_part(&ratio(-1, 3), 3), ratio(2, 3));
        // a non-p denominator is inverted mod p^m: 1/(3·2) ≡ 2/3 mod Z_3
        assert_eq!(fractional_part(&ratio(1, 6), 3), ratio(2, 3));
        assert_eq!(fractional_part(&int(0), 7), int(0));
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&padic_norm(&int(5), 3)), 1);
        assert_eq!(omega(&padic_norm(&ratio(1, 3), 3)), 0);
        assert_eq!(omega(&int(0)), 1);
        assert_eq!(omega_at(&ratio(3, 2), 2), 0);
        assert_eq!(omega_at(&ratio(3, 2), 3), 1);
    }

    #[test]
    fn canonical_expansion_examples() {
        let e = canonical_expansion(&int(-1), 3, 4);
        assert_eq!((e.valuation, e.digits.clone()), (0, vec![2, 2, 2, 2]));
        // 2 + 2·3 + 2·9 + 2·27 = 80 ≡ −1 mod 81
        assert_eq!((e.unit_part() + 1) % 81, BigInt::zero());

        let e = canonical_expansion(&ratio(1, 2), 3, 3);
        assert_eq!((e.valuation, e.digits.clone()), (0, vec![2, 1, 1]));
        assert_eq!((BigInt::from(2) * e.unit_part()) % 27, BigInt::one());

        let e = canonical_expansion(&int(9), 3, 2);
        assert_eq!((e.valuation, e.digits), (2, vec![1, 0]));
    }

    #[test]
    fn sqrt_examples() {
        let r = padic_sqrt(&int(4), 5, 3).unwrap();
        assert_eq!(r.digits, vec![2, 0, 0]);
        assert_eq!(r.to_rational(), int(2));

        let r = padic_sqrt(&int(2), 5, 3);
        assert!(r.is_none(), "2 is not a square mod 5");

        let r = padic_sqrt(&int(-1), 5, 3).unwrap();
        let y = r.to_rational();
        assert_eq!(residue_mod_pk(&(&y * &y + int(1)), 5, 3), BigInt::zero());
        assert!(r.digits[0] <= 2);

        assert!(padic_sqrt(&int(2), 3, 2).is_none());
        assert!(padic_sqrt(&int(3), 3, 2).is_none(), "odd valuation");

        let r = padic_sqrt(&int(17), 2, 10).unwrap();
        let y = r.to_rational();
        assert_eq!(residue_mod_pk(&(&y * &y - int(17)), 2, 10), BigInt::zero());
        assert_eq!(r.digits[..2], [1, 0]);
        assert!(padic_sqrt(&int(3), 2, 5).is_none());

        let r = padic_sqrt(&ratio(7, 9), 3, 6).unwrap();
        assert_eq!(r.valuation, -1);
        let y = r.to_rational();
        let d = &y * &y - ratio(7, 9);
        assert!(padic_valuation(&d, 3).unwrap() >= -2 + 6);
    }

    #[test]
    fn square_classes() {
        assert_eq!(square_class(&int(4), 5), square_class(&int(1), 5));
        assert_eq!(square_class(&int(2), 5), square_class(&int(3), 5));
        assert_ne!(square_class(&int(2), 5), square_class(&int(1), 5));
        assert_eq!(square_class(&ratio(1, 3), 3), Some((1, 1)));
        assert_eq!(square_class(&int(17), 2), square_class(&int(1), 2));
        assert_ne!(square_class(&int(5), 2), square_class(&int(1), 2));
    }
}
