//! The arithmetic factor λ_p and p-adic Gauss integrals over balls `|x|_p ≤ p^ν`.
//!
//! Two independent routes are provided: the closed form with its two branches, and a
//! brute-force coset sum which splits the ball into cosets of `p^m Z_p` on which the integrand
//! is constant and accumulates the exact phases before rendering a single complex number.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::padic::{p_power, padic_valuation, residue_mod_pk, square_class};
use crate::exact::{chi, ComplexValue, PhaseSum, Rational, UnitPhase};

/// Upper bound on the number of cosets a single brute-force sum may visit.
pub const MAX_COSETS: u64 = 1 << 27;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussIntegralSpec {
    pub p: u64,
    pub alpha: Rational,
    pub beta: Rational,
    /// The ball is `|x|_p ≤ p^nu`.
    pub nu: i64,
}

impl GaussIntegralSpec {
    pub fn new(p: u64, alpha: Rational, beta: Rational, nu: i64) -> Self {
        GaussIntegralSpec { p, alpha, beta, nu }
    }
}

/// A nonnegative real `base^{twice_exp/2}` or exact zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Magnitude {
    Zero,
    HalfPower { base: u64, twice_exp: i64 },
}

impl Magnitude {
    pub fn one(base: u64) -> Self {
        Magnitude::HalfPower { base, twice_exp: 0 }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Magnitude::Zero => 0.0,
            Magnitude::HalfPower { base, twice_exp } => (base as f64).powf(twice_exp as f64 / 2.0),
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Magnitude::Zero => write!(f, "0"),
            Magnitude::HalfPower { base, twice_exp } if twice_exp % 2 == 0 => {
                write!(f, "{}^{}", base, twice_exp / 2)
            }
            Magnitude::HalfPower { base, twice_exp } => write!(f, "{}^({}/2)", base, twice_exp),
        }
    }
}

impl Serialize for Magnitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Exact decomposition `lambda_factor · magnitude · phase` of a Gauss integral value.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeValue {
    pub magnitude: Magnitude,
    pub phase: UnitPhase,
    pub lambda_factor: ComplexValue,
}

impl AmplitudeValue {
    pub fn value(&self) -> ComplexValue {
        self.lambda_factor * self.magnitude.to_f64() * self.phase.to_complex()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `|α|_p ≤ p^{-2ν}`: the quadratic term is invisible on the ball.
    Flat,
    /// `|4α|_p > p^{-2ν}`: stationary-phase branch carrying λ_p.
    Stationary,
}

impl Branch {
    pub fn number(self) -> u8 {
        match self {
            Branch::Flat => 1,
            Branch::Stationary => 2,
        }
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussClosedForm {
    pub branch: Branch,
    pub amplitude: AmplitudeValue,
}

impl GaussClosedForm {
    pub fn value(&self) -> ComplexValue {
        self.amplitude.value()
    }
}

/// Which branch of the closed form applies, if any.
pub fn select_branch(spec: &GaussIntegralSpec) -> Result<Branch> {
    let Some(va) = padic_valuation(&spec.alpha, spec.p) else {
        return Ok(Branch::Flat);
    };
    if va >= 2 * spec.nu {
        return Ok(Branch::Flat);
    }
    let v4 = if spec.p == 2 { va + 2 } else { va };
    if v4 < 2 * spec.nu {
        return Ok(Branch::Stationary);
    }
    Err(Error::IndeterminateBranch {
        p: spec.p,
        neg_val: -va,
        nu: spec.nu,
    })
}

/// Closed-form value of `∫_{|x|_p ≤ p^ν} χ_p(αx² + βx) dx`.
pub fn gauss_closed_form(spec: &GaussIntegralSpec) -> Result<GaussClosedForm> {
    let p = spec.p;
    let branch = select_branch(spec)?;
    let amplitude = match branch {
        Branch::Flat => {
            // p^ν · Ω(p^ν |β|_p)
            let inside = padic_valuation(&spec.beta, p).is_none_or(|vb| vb >= spec.nu);
            AmplitudeValue {
                magnitude: if inside {
                    Magnitude::HalfPower { base: p, twice_exp: 2 * spec.nu }
                } else {
                    Magnitude::Zero
                },
                phase: UnitPhase::one(),
                lambda_factor: ComplexValue::one(),
            }
        }
        Branch::Stationary => {
            let two_alpha = &spec.alpha * Rational::from_integer(BigInt::from(2));
            let v2a = padic_valuation(&two_alpha, p).expect("alpha is nonzero here");
            // Ω(p^{-ν} |β/2α|_p)
            let inside = padic_valuation(&spec.beta, p).is_none_or(|vb| vb - v2a >= -spec.nu);
            let four_alpha = &two_alpha * Rational::from_integer(BigInt::from(2));
            let phase = chi(&(-(&spec.beta * &spec.beta) / four_alpha), p);
            AmplitudeValue {
                magnitude: if inside {
                    Magnitude::HalfPower { base: p, twice_exp: v2a }
                } else {
                    Magnitude::Zero
                },
                phase,
                lambda_factor: lambda_p(&spec.alpha, p),
            }
        }
    };
    Ok(GaussClosedForm { branch, amplitude })
}

/// Smallest coset depth `m` on which `χ_p(αx² + βx)` is constant on every coset
/// `x + p^m Z_p` of the ball, and for which the ball splits into at least one coset.
pub fn local_constancy_depth(spec: &GaussIntegralSpec) -> i64 {
    let p = spec.p;
    let mut m = -spec.nu;
    if let Some(va) = padic_valuation(&spec.alpha, p) {
        let v2a = va + i64::from(p == 2);
        m = m.max(spec.nu - v2a);
        m = m.max((-va).div_euclid(2) + i64::from((-va).rem_euclid(2) != 0));
    }
    if let Some(vb) = padic_valuation(&spec.beta, p) {
        m = m.max(-vb);
    }
    m
}

/// Exact phase multiset of the coset sum together with the depth used.
///
/// The integral equals `p^{-m} · Σ` of the returned phases.
pub fn gauss_phase_sum(spec: &GaussIntegralSpec, depth: i64) -> Result<PhaseSum> {
    let required = local_constancy_depth(spec);
    if depth < required {
        return Err(Error::DepthTooSmall {
            requested: depth,
            required,
        });
    }
    let p = spec.p;
    let nu = spec.nu;
    let va = padic_valuation(&spec.alpha, p);
    let vb = padic_valuation(&spec.beta, p);
    let mut k = 0i64;
    if let Some(va) = va {
        k = k.max(2 * nu - va);
    }
    if let Some(vb) = vb {
        k = k.max(nu - vb);
    }
    let modulus = checked_pow(p, k).ok_or_else(|| Error::TooLarge {
        terms: format!("{p}^{k}"),
    })?;
    let terms_exp = nu + depth;
    let terms = checked_pow(p, terms_exp)
        .filter(|&t| t <= MAX_COSETS && modulus <= MAX_COSETS)
        .ok_or_else(|| Error::TooLarge {
            terms: format!("{p}^{terms_exp}"),
        })?;

    // F_j = (α p^{K-2ν}) j² + (β p^{K-ν}) j is a p-adic integer; its residue mod p^K
    // is the numerator of {αx_j² + βx_j}_p over p^K.
    let a = residue_mod_pk(&(&spec.alpha * p_power(p, k - 2 * nu)), p, k as u32)
        .to_u64()
        .expect("residue below modulus");
    let b = residue_mod_pk(&(&spec.beta * p_power(p, k - nu)), p, k as u32)
        .to_u64()
        .expect("residue below modulus");
    let m = modulus as u128;
    let (a, b) = (a as u128, b as u128);
    let accumulate = |range: std::ops::Range<u64>| {
        let mut sum = PhaseSum::new(modulus);
        for j in range {
            let jr = j as u128 % m;
            let f = (a * (jr * jr % m) + b * jr) % m;
            sum.push(f as u64);
        }
        sum
    };
    const CHUNK: u64 = 1 << 16;
    if terms <= CHUNK {
        return Ok(accumulate(0..terms));
    }
    let chunks: Vec<_> = (0..terms.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(terms))
        .collect();
    let partials: Vec<PhaseSum> = chunks.into_par_iter().map(accumulate).collect();
    let mut total = PhaseSum::new(modulus);
    for part in &partials {
        total.merge(part);
    }
    Ok(total)
}

/// Brute-force coset sum `p^{-m} Σ_{j < p^{ν+m}} χ_p(α x_j² + β x_j)`, `x_j = p^{-ν} j`.
pub fn gauss_brute_force(spec: &GaussIntegralSpec, depth: i64) -> Result<ComplexValue> {
    let sum = gauss_phase_sum(spec, depth)?;
    Ok(sum.render() * (spec.p as f64).powi(-(depth as i32)))
}

/// Brute-force sum at the automatically chosen depth.
pub fn gauss_brute_force_auto(spec: &GaussIntegralSpec) -> Result<ComplexValue> {
    gauss_brute_force(spec, local_constancy_depth(spec))
}

fn checked_pow(p: u64, e: i64) -> Option<u64> {
    if e < 0 {
        return None;
    }
    p.checked_pow(u32::try_from(e).ok()?)
}

/// `λ_∞(α) = (1 − i·sign α)/√2`, `λ_∞(0) = 1`.
pub fn lambda_real(alpha: &Rational) -> ComplexValue {
    use num_traits::Signed;
    if alpha.is_zero() {
        return ComplexValue::one();
    }
    let s = if alpha.is_positive() { 1.0 } else { -1.0 };
    ComplexValue::new(1.0, -s) / 2f64.sqrt()
}

/// λ_p(α) from the normalised Gauss sum `|2α|_p^{1/2} ∫_{|x|_p ≤ p^ν} χ_p(αx²) dx`, with ν
/// chosen so that the stationary branch applies. No caching.
pub fn lambda_p_oracle(alpha: &Rational, p: u64) -> ComplexValue {
    let Some(va) = padic_valuation(alpha, p) else {
        return ComplexValue::one();
    };
    let v2a = va + i64::from(p == 2);
    let v4a = va + if p == 2 { 2 } else { 0 };
    let nu = v4a.div_euclid(2) + 1;
    let spec = GaussIntegralSpec::new(p, alpha.clone(), Rational::zero(), nu);
    let integral = gauss_brute_force_auto(&spec).expect("lambda oracle sums are small");
    integral * (p as f64).powf(-(v2a as f64) / 2.0)
}

type LambdaKey = (u64, u8, u64);

fn lambda_cache() -> &'static Mutex<HashMap<LambdaKey, ComplexValue>> {
    static CACHE: OnceLock<Mutex<HashMap<LambdaKey, ComplexValue>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// λ_p(α), memoised by the square class of α (valuation parity and unit residue class).
pub fn lambda_p(alpha: &Rational, p: u64) -> ComplexValue {
    let Some((parity, residue)) = square_class(alpha, p) else {
        return ComplexValue::one();
    };
    let key = (p, parity, residue);
    if let Some(v) = lambda_cache().lock().expect("lambda cache").get(&key) {
        return *v;
    }
    let representative =
        p_power(p, i64::from(parity)) * Rational::from_integer(BigInt::from(residue));
    let value = lambda_p_oracle(&representative, p);
    lambda_cache()
        .lock()
        .expect("lambda cache")
        .insert(key, value);
    value
}
