//! Traffic route assignment as a QUBO: road networks, demand, alternative
//! routes, congestion weights, clustering, solvers and evaluation.

pub mod clustering;
pub mod congestion;
pub mod demand;
pub mod error;
pub mod evaluation;
pub mod geo;
mod io;
pub mod network;
pub mod pipeline;
pub mod qubo;
pub mod routing;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use io::sha256_file;
pub use scalar::Scalar;

pub type Weights = congestion::CongestionWeights<f64>;
pub type Qubo = qubo::QuboInstance<f64>;
pub type Entry = congestion::CongestionEntry<f64>;
pub type Solution = solvers::SolveResult<f64>;
