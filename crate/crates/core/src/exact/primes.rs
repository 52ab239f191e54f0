use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Primes `<= bound`, ascending (sieve of Eratosthenes).
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Splits `|n|` into the prime factors `<= bound` and the leftover cofactor.
pub fn smooth_part(n: &BigInt, bound: u64) -> (Vec<(u64, u32)>, BigInt) {
    let mut rest = n.abs();
    let mut factors = Vec::new();
    for p in primes_up_to(bound) {
        let bp = BigInt::from(p);
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
        if rest.is_one() {
            break;
        }
    }
    (factors, rest)
}

/// Smallest prime factor of `n > 1` by trial division; `None` for 0 and 1 or when n is too large.
pub fn smallest_prime_factor(n: &BigInt) -> Option<BigInt> {
    let n = n.abs();
    if n <= BigInt::one() {
        return None;
    }
    if let Some(small) = n.to_u64() {
        let mut d = 2u64;
        while d.saturating_mul(d) <= small {
            if small % d == 0 {
                return Some(BigInt::from(d));
            }
            d += if d == 2 { 1 } else { 2 };
        }
        return Some(n);
    }
    None
}
