//! Multi-antenna coded caching with linear subpacketization.
//!
//! For `K` users, `L` transmit antennas and caching gain `t <= L`, each file is
//! split into `K(t + L)` subparts and delivered in `K(K - t)` intervals, every
//! interval serving `t + L` users interference-free through cache cancellation
//! and zero-forcing.
//!
//! - [`placement`]: parameters, circulant placement matrix, cache contents
//! - [`dp_matrices`]: per-round user/part generator matrices
//! - [`delivery`]: the full transmission schedule
//! - [`verifier`]: symbolic DoF, decodability and coverage checks
//! - [`channel_sim`]: numerical check over random channels
//! - [`metrics`]: subpacketization comparisons with baseline schemes

pub mod channel_sim;
pub mod delivery;
pub mod dp_matrices;
pub mod error;
pub mod metrics;
pub mod placement;
pub mod verifier;

pub use delivery::{build_schedule, identity_schedule, Demand, Schedule, TransmissionTerm, TransmissionVector};
pub use dp_matrices::{generate_family, DpFamily, DpMatrixPair};
pub use error::{Error, Result};
pub use placement::{build_placement_matrix, cache_contents, validate_params, PlacementMatrix, SchemeParams};
pub use verifier::{verify_all, verify_schedule, VerificationReport};
