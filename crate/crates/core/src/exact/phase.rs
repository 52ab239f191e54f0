//! Exact unit-circle phases `e^{2πiq}` with rational `q`, and exact phase multisets.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::padic::fractional_part;
use super::rational::{format_rational, to_f64, Rational};

pub type ComplexValue = Complex64;

/// JSON form `{re, im}` of a complex value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexValue> for ComplexJson {
    fn from(z: ComplexValue) -> Self {
        // normalise -0.0 so that reports are byte-stable
        let clean = |x: f64| if x == 0.0 { 0.0 } else { x };
        ComplexJson {
            re: clean(z.re),
            im: clean(z.im),
        }
    }
}

/// `e^{2πi·angle}` with `angle ∈ [0,1)` kept exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitPhase {
    angle: Rational,
}

impl UnitPhase {
    pub fn one() -> Self {
        UnitPhase {
            angle: Rational::zero(),
        }
    }

    /// Phase with angle `q mod 1`.
    pub fn from_turns(q: &Rational) -> Self {
        let floor = q.floor();
        UnitPhase { angle: q - floor }
    }

    pub fn angle(&self) -> &Rational {
        &self.angle
    }

    pub fn is_one(&self) -> bool {
        self.angle.is_zero()
    }

    pub fn mul(&self, other: &UnitPhase) -> UnitPhase {
        UnitPhase::from_turns(&(&self.angle + &other.angle))
    }

    pub fn conj(&self) -> UnitPhase {
        UnitPhase::from_turns(&-&self.angle)
    }

    pub fn to_complex(&self) -> ComplexValue {
        turns_to_complex(&self.angle)
    }
}

impl Serialize for UnitPhase {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.angle))
    }
}

fn turns_to_complex(q: &Rational) -> ComplexValue {
    // Reduce to [-1/2, 1/2) before converting, for accuracy.
    let mut x = to_f64(q);
    x -= x.round();
    ComplexValue::from_polar(1.0, TAU * x)
}

/// `χ_p(u) = exp(2πi{u}_p)`.
pub fn chi(u: &Rational, p: u64) -> UnitPhase {
    UnitPhase {
        angle: fractional_part(u, p),
    }
}

/// Real-place character `χ_∞(u) = exp(−2πiu)`.
pub fn chi_real(u: &Rational) -> UnitPhase {
    UnitPhase::from_turns(&-u)
}

/// Multiset of phases `k/M` (fixed modulus `M`), accumulated as integer counts and only
/// rendered to floating point once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSum {
    modulus: u64,
    counts: Vec<u64>,
}

impl PhaseSum {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus >= 1);
        PhaseSum {
            modulus,
            counts: vec![0; modulus as usize],
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Adds the phase `e^{2πi·k/M}`.
    pub fn push(&mut self, k: u64) {
        self.counts[(k % self.modulus) as usize] += 1;
    }

    pub fn push_phase(&mut self, phase: &UnitPhase) {
        let scaled = phase.angle() * Rational::from_integer(BigInt::from(self.modulus));
        assert!(
            scaled.is_integer(),
            "phase denominator does not divide the multiset modulus"
        );
        let k = scaled.to_integer().mod_floor(&BigInt::from(self.modulus));
        self.push(k.to_u64().expect("residue fits"));
    }

    pub fn merge(&mut self, other: &PhaseSum) {
        assert_eq!(self.modulus, other.modulus);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn len(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `Σ_k counts[k]·e^{2πik/M}`.
    pub fn render(&self) -> ComplexValue {
        let m = self.modulus as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            // angle folded into [-1/2, 1/2)
            let mut x = k as f64 / m;
            if x >= 0.5 {
                x -= 1.0;
            }
            let (s, co) = (TAU * x).sin_cos();
            re += c as f64 * co;
            im += c as f64 * s;
        }
        ComplexValue::new(re, im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, ratio};

    #[test]
    fn chi_examples() {
        assert_eq!(chi(&ratio(1, 3), 3).angle(), &ratio(1, 3));
        assert!(chi(&int(2), 3).is_one());
        let half = chi(&ratio(1, 2), 2);
        assert_eq!(half.angle(), &ratio(1, 2));
        assert!(half.mul(&half).is_one());
        assert_eq!(chi(&(ratio(1, 2) + ratio(1, 2)), 2), half.mul(&half));
    }

    #[test]
    fn real_character_sign() {
        let z = chi_real(&ratio(1, 4)).to_complex();
        assert!((z - ComplexValue::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_sum_mod_nine() {
        // Σ_{j<9} e^{2πi (j² mod 3)/3} = 3 + 6 e^{2πi/3} = 3i√3
        let mut s = PhaseSum::new(3);
        for j in 0u64..9 {
            s.push(j * j % 3);
        }
        let z = s.render();
        assert!(z.re.abs() < 1e-12);
        assert!((z.im - 3.0 * 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.len(), 9);
    }

    #[test]
    fn phase_sum_merge_and_push_phase() {
        let mut a = PhaseSum::new(9);
        a.push_phase(&UnitPhase::from_turns(&ratio(-1, 9)));
        let mut b = PhaseSum::new(9);
        b.push(8);
        a.merge(&b);
        assert_eq!(a.counts()[8], 2);
    }
}
