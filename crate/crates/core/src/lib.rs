//! Smart-home and ICT ontologies, cross-domain dependency queries, a small
//! rule language, and a home-energy simulator for occupancy-driven standby
//! shutdown.
//!
//! The numeric parts of the simulator are generic over [`Scalar`]; the
//! aliases below fix the usual choices (`f64`, and exact `Ratio<i64>`).

pub mod crossdep;
pub mod homesim;
pub mod ontology;
pub mod rules;
mod scalar;
pub mod seed;
pub mod text;

pub use num_rational::Rational64;
pub use scalar::Scalar;

pub type OccupancyModel = homesim::OccupancyModel<f64>;
pub type ExactOccupancyModel = homesim::OccupancyModel<Rational64>;
pub type SimParams = homesim::SimParams<f64>;
pub type ExactSimParams = homesim::SimParams<Rational64>;
pub type SimReport = homesim::SimReport<f64>;
pub type ExactSimReport = homesim::SimReport<Rational64>;
