//! Exact classical and quantum harmonic oscillator with time-dependent frequency over the real
//! numbers, every field of p-adic numbers, and the adeles.
//!
//! All dynamical quantities are exact rationals. Complex values only appear when a character
//! phase or a λ factor is finally rendered.

use std::fmt;

use serde::{Serialize, Serializer};

pub mod adelic;
pub mod classical;
pub mod error;
pub mod exact;
pub mod gauss;
pub mod propagator;
pub mod suites;

pub use error::{Error, Result};

/// A completion of Q: the real numbers or `Q_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Real,
    Finite(u64),
}

impl Place {
    pub fn prime(self) -> Option<u64> {
        match self {
            Place::Real => None,
            Place::Finite(p) => Some(p),
        }
    }

    /// Parses `inf`/`real` or a prime.
    pub fn parse(s: &str) -> Result<Place> {
        match s.trim() {
            "inf" | "real" | "oo" => Ok(Place::Real),
            other => {
                let p: u64 = other
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("unknown place {other:?}")))?;
                exact::check_prime(p)?;
                Ok(Place::Finite(p))
            }
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
