//! Teleportation of an unknown qubit into a multipartite "cobweb" state over
//! zero-sum-amplitude resources, with the supporting linear algebra,
//! entanglement measures and disentangling analysis.

pub mod codec;
pub mod error;
pub mod measures;
pub mod nogo;
pub mod protocol;
pub mod qlinalg;
pub mod session;
pub mod zsa;

pub use error::{Error, Result};
pub use protocol::{run_protocol, BellOutcome, CobwebState, OutcomeSelection, Transcript};
pub use qlinalg::{DensityMatrix, LinearOperator, PureState, C64};
pub use zsa::{UnknownQubit, ZsaAmplitudes};
