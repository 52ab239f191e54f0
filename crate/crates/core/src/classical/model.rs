//! Frequency profiles and the oscillator model.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::series::RationalSeries;
use crate::error::{Error, Result};
use crate::exact::rational::{serde_rational_opt, serde_rational_vec};
use crate::exact::{int, parse_rational, pow_i64, Rational};

/// A rational function of `t` that the solver can expand to any order.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Polynomial(Vec<Rational>),
    /// `scale · (1 + a t)^exponent`
    PowerOfLinear {
        scale: Rational,
        a: Rational,
        exponent: i64,
    },
}

impl Profile {
    pub fn series(&self, order: usize) -> RationalSeries {
        match self {
            Profile::Polynomial(c) => RationalSeries::polynomial(c.clone()),
            Profile::PowerOfLinear { scale, a, exponent } => {
                if *exponent >= 0 || a.is_zero() {
                    let lin = RationalSeries::polynomial(vec![Rational::one(), a.clone()]);
                    let mut out = RationalSeries::constant(scale.clone());
                    if !a.is_zero() {
                        for _ in 0..*exponent {
                            out = &out * &lin;
                        }
                    }
                    return out;
                }
                let mut coeffs = Vec::with_capacity(order + 1);
                let mut binom = Rational::one();
                let mut a_pow = Rational::one();
                for k in 0..=order {
                    coeffs.push(scale * &binom * &a_pow);
                    binom = binom * (int(*exponent) - int(k as i64)) / int(k as i64 + 1);
                    a_pow *= a;
                }
                RationalSeries::truncated(coeffs)
            }
        }
    }

    pub fn evaluate(&self, t: &Rational) -> Rational {
        match self {
            Profile::Polynomial(c) => c.iter().rev().fold(Rational::zero(), |acc, x| acc * t + x),
            Profile::PowerOfLinear { scale, a, exponent } => {
                scale * pow_i64(&(Rational::one() + a * t), *exponent)
            }
        }
    }

    fn square(&self) -> Profile {
        match self {
            Profile::Polynomial(c) => {
                let s = RationalSeries::polynomial(c.clone());
                Profile::Polynomial((&s * &s).coeffs().to_vec())
            }
            Profile::PowerOfLinear { scale, a, exponent } => Profile::PowerOfLinear {
                scale: scale * scale,
                a: a.clone(),
                exponent: 2 * exponent,
            },
        }
    }
}

/// Named frequency profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// `ω(t) = b⁻²(1+at)⁻²`
    Example1 { a: Rational, b: Rational },
    /// `ω(t)² = (1 + a²b⁴/4) b⁻⁴ (1+at)⁻²`
    Example2 { a: Rational, b: Rational },
    Constant { w0: Rational },
    Custom,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Example1 { a, b } => {
                write!(f, "example1({a},{b})")
            }
            Preset::Example2 { a, b } => {
                write!(f, "example2({a},{b})")
            }
            Preset::Constant { w0 } if w0.is_zero() => write!(f, "free"),
            Preset::Constant { w0 } => write!(f, "constant({w0})"),
            Preset::Custom => write!(f, "custom"),
        }
    }
}

/// Frequency together with the initial data of the amplitude equation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProfile {
    pub preset: Preset,
    /// `ω(t)` when it is a rational function; `None` for profiles given through `ω²` only.
    pub omega: Option<Profile>,
    pub omega_sq: Profile,
    pub c: Rational,
    pub g0: Rational,
    pub gdot0: Rational,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileJson {
    #[serde(default, with = "serde_rational_vec_opt")]
    omega_coeffs: Option<Vec<Rational>>,
    #[serde(default, with = "serde_rational_vec_opt")]
    omega_sq_coeffs: Option<Vec<Rational>>,
    #[serde(default, with = "serde_rational_opt")]
    g0: Option<Rational>,
    #[serde(default, with = "serde_rational_opt")]
    gdot0: Option<Rational>,
    #[serde(default, with = "serde_rational_opt")]
    c: Option<Rational>,
}

mod serde_rational_vec_opt {
    use super::*;
    use serde::Deserializer;

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "serde_rational_vec")] Vec<Rational>);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// Exact square root of a nonnegative rational, when it exists.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let root = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(Rational::new(root(x.numer())?, root(x.denom())?))
}

fn parse_args(inner: &str, n: usize, name: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != n {
        return Err(Error::InvalidInput(format!(
            "{name} takes {n} argument(s), got {inner:?}"
        )));
    }
    parts.into_iter().map(parse_rational).collect()
}

impl FrequencyProfile {
    pub fn example1(a: Rational, b: Rational) -> Result<Self> {
        if b.is_zero() {
            return Err(Error::InvalidInput("example1 needs b ≠ 0".into()));
        }
        let w0 = pow_i64(&b, -2);
        let omega = Profile::PowerOfLinear {
            scale: w0,
            a: a.clone(),
            exponent: -2,
        };
        Ok(FrequencyProfile {
            omega_sq: omega.square(),
            omega: Some(omega),
            c: Rational::one(),
            gdot0: &a * &b,
            g0: b.clone(),
            preset: Preset::Example1 { a, b },
        })
    }

    pub fn example2(a: Rational, b: Rational) -> Result<Self> {
        if b.is_zero() {
            return Err(Error::InvalidInput("example2 needs b ≠ 0".into()));
        }
        let b4 = pow_i64(&b, 4);
        let w0_sq = (Rational::one() + &a * &a * &b4 / int(4)) / &b4;
        let omega = rational_sqrt(&w0_sq).map(|w0| Profile::PowerOfLinear {
            scale: w0,
            a: a.clone(),
            exponent: -1,
        });
        Ok(FrequencyProfile {
            omega,
            omega_sq: Profile::PowerOfLinear {
                scale: w0_sq,
                a: a.clone(),
                exponent: -2,
            },
            c: Rational::one(),
            gdot0: &a * &b / int(2),
            g0: b.clone(),
            preset: Preset::Example2 { a, b },
        })
    }

    /// Constant frequency. For `w0 ≠ 0` the amplitude is `G ≡ 1` with `C = |w0|`, so that
    /// `γ = |w0| t`; for `w0 = 0` this is the free particle with `C = 1`, `G(0) = 1`.
    pub fn constant(w0: Rational) -> Self {
        let c = if w0.is_zero() {
            Rational::one()
        } else {
            w0.abs()
        };
        FrequencyProfile {
            omega: Some(Profile::Polynomial(vec![w0.clone()])),
            omega_sq: Profile::Polynomial(vec![&w0 * &w0]),
            c,
            g0: Rational::one(),
            gdot0: Rational::zero(),
            preset: Preset::Constant { w0 },
        }
    }

    pub fn free() -> Self {
        Self::constant(Rational::zero())
    }

    /// Parses a preset name or an inline JSON profile.
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim();
        if s.starts_with('{') {
            return Self::from_json(s);
        }
        let (name, inner) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(|| {
                    Error::InvalidInput(format!("unbalanced parentheses in {s:?}"))
                })?;
                (name.trim(), Some(inner))
            }
            None => (s, None),
        };
        match (name, inner) {
            ("free", None) => Ok(Self::free()),
            ("example1", Some(inner)) => {
                let v = parse_args(inner, 2, name)?;
                Self::example1(v[0].clone(), v[1].clone())
            }
            ("example2", Some(inner)) => {
                let v = parse_args(inner, 2, name)?;
                Self::example2(v[0].clone(), v[1].clone())
            }
            ("constant", Some(inner)) => {
                let v = parse_args(inner, 1, name)?;
                Ok(Self::constant(v[0].clone()))
            }
            _ => Err(Error::InvalidInput(format!("unknown frequency profile {s:?}"))),
        }
    }

    /// `{"omega_coeffs": [...]}` or `{"omega_sq_coeffs": [...]}` with optional `g0`, `gdot0`, `c`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProfileJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("frequency profile: {e}")))?;
        let (omega, omega_sq) = match (raw.omega_coeffs, raw.omega_sq_coeffs) {
            (Some(w), None) => {
                let w = Profile::Polynomial(w);
                (Some(w.clone()), w.square())
            }
            (None, Some(w2)) => (None, Profile::Polynomial(w2)),
            _ => {
                return Err(Error::InvalidInput(
                    "give exactly one of omega_coeffs and omega_sq_coeffs".into(),
                ))
            }
        };
        let profile = FrequencyProfile {
            preset: Preset::Custom,
            omega,
            omega_sq,
            c: raw.c.unwrap_or_else(Rational::one),
            g0: raw.g0.unwrap_or_else(Rational::one),
            gdot0: raw.gdot0.unwrap_or_else(Rational::zero),
        };
        if profile.g0.is_zero() || profile.c.is_zero() {
            return Err(Error::InvalidInput("g0 and c must be nonzero".into()));
        }
        Ok(profile)
    }

    /// The constant frequency of a constant preset.
    pub fn constant_frequency(&self) -> Option<&Rational> {
        match &self.preset {
            Preset::Constant { w0 } => Some(w0),
            _ => None,
        }
    }
}

/// Mass plus frequency profile.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorModel {
    pub mass: Rational,
    pub profile: FrequencyProfile,
}

impl OscillatorModel {
    pub fn new(mass: Rational, profile: FrequencyProfile) -> Result<Self> {
        if mass.is_zero() {
            return Err(Error::InvalidInput("mass must be nonzero".into()));
        }
        if profile.g0.is_zero() {
            return Err(Error::NotInvertible("G(0)"));
        }
        Ok(OscillatorModel { mass, profile })
    }

    pub fn c(&self) -> &Rational {
        &self.profile.c
    }
}

/// JSON descriptor of a model.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub profile: String,
    #[serde(with = "crate::exact::rational::serde_rational")]
    pub mass: Rational,
    #[serde(with = "crate::exact::rational::serde_rational")]
    pub c: Rational,
    #[serde(with = "crate::exact::rational::serde_rational")]
    pub g0: Rational,
    #[serde(with = "crate::exact::rational::serde_rational")]
    pub gdot0: Rational,
}

impl From<&OscillatorModel> for ModelSummary {
    fn from(m: &OscillatorModel) -> Self {
        ModelSummary {
            profile: m.profile.preset.to_string(),
            mass: m.mass.clone(),
            c: m.profile.c.clone(),
            g0: m.profile.g0.clone(),
            gdot0: m.profile.gdot0.clone(),
        }
    }
}
