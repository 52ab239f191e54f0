use thiserror::Error;

use crate::Place;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("division by a non-invertible value: {0}")]
    NotInvertible(&'static str),

    /// Neither branch condition of the ball Gauss integral holds (only possible for p = 2).
    #[error("indeterminate Gauss-integral branch at p = {p} for |alpha| = 2^{neg_val} and nu = {nu}")]
    IndeterminateBranch { p: u64, neg_val: i64, nu: i64 },

    #[error("coset depth {requested} is below the local-constancy depth {required}")]
    DepthTooSmall { requested: i64, required: i64 },

    #[error("caustic: sin(gamma'' - gamma') vanishes between the endpoints")]
    Caustic,

    #[error("divergence at place {place}: {detail}")]
    Divergence { place: Place, detail: String },

    #[error("precision loss at place {place}: {detail}")]
    Precision { place: Place, detail: String },

    #[error("prime cutoff {cutoff} is below the denominator factor {factor}")]
    CutoffTooSmall { cutoff: u64, factor: String },

    #[error("no vacuum state at p = {p}")]
    VacuumAbsent { p: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("finite-place factor at p = {p} has norm {norm}, expected 1")]
    NotNormalized { p: u64, norm: String },

    #[error("adele component at p = {p} leaves Z_p but p is not in the exceptional set")]
    InvalidAdele { p: u64 },

    #[error("sum over {terms} cosets exceeds the brute-force budget")]
    TooLarge { terms: String },

    #[error("at place {place}: {inner}")]
    AtPlace { place: Place, inner: Box<Error> },
}

impl Error {
    /// The underlying error with any place labels removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPlace { inner, .. } => inner.root(),
            other => other,
        }
    }

    pub fn at(self, place: Place) -> Error {
        match self {
            e @ (Error::AtPlace { .. } | Error::Divergence { .. } | Error::Precision { .. }) => e,
            inner => Error::AtPlace {
                place,
                inner: Box::new(inner),
            },
        }
    }
}
