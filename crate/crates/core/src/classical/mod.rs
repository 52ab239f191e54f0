//! Classical oscillator with time-dependent frequency, solved as exact rational power series.

pub mod certificate;
pub mod endpoints;
pub mod model;
pub mod series;
pub mod solve;
pub mod trig;

pub use certificate::{certify_at, convergence_certificate, ConvergenceCertificate, PadicRadius};
pub use series::{RationalSeries, Tail};
pub use trig::{sin_cos, SinCos};
pub use model::{FrequencyProfile, ModelSummary, OscillatorModel, Preset, Profile};
pub use solve::{solve_amplitude_phase, AmplitudePhase};
pub use endpoints::{
    evolution_matrix, evolve_initial, initial_state_from_endpoints, velocity_identity_defect, ClassicalAction,
    EndpointData, Endpoints, EvolutionMatrix, PointValues,
};
