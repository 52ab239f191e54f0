//! Exact arithmetic substrate: rationals, p-adic valuations and digits, additive characters.

pub mod padic;
pub mod phase;
pub mod primes;
pub mod rational;

pub use padic::{
    canonical_expansion, fractional_part, omega, omega_at, padic_norm, padic_sqrt,
    padic_valuation, residue_mod_pk, split_unit, square_class, PAdicApprox,
};
pub use phase::{chi, chi_real, ComplexJson, ComplexValue, PhaseSum, UnitPhase};
pub use primes::{check_prime, is_prime, primes_up_to};
pub use rational::{format_rational, int, is_integer, parse_rational, pow_i64, ratio, to_f64, Rational};
