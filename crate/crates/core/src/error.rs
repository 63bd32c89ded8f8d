use thiserror::Error;

/// Errors raised while constructing, delivering or simulating a scheme.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),

    #[error("user {user} out of range 1..={users}")]
    UserOutOfRange { user: usize, users: usize },

    #[error("value {value} outside circular domain 1..={domain}")]
    OutOfDomain { value: usize, domain: usize },

    #[error("invalid placement matrix: {0}")]
    InvalidPlacement(String),

    #[error("invalid demand: {0}")]
    InvalidDemand(String),

    #[error("file {file} requested by more than one user (users {first} and {second})")]
    DuplicateDemand {
        file: usize,
        first: usize,
        second: usize,
    },

    #[error("zero-forcing set for user {user}, part {part} in round {round}, row {row} has {size} members, expected {expected}")]
    ZfSetSizeViolation {
        round: usize,
        row: usize,
        user: usize,
        part: usize,
        size: usize,
        expected: usize,
    },

    #[error("subpart counter for file {file}, part {part} would exceed {limit}")]
    SubpartOverflow {
        file: usize,
        part: usize,
        limit: usize,
    },

    #[error("inapplicable parameters: {0}")]
    InapplicableParams(String),

    #[error("degenerate channel: beamformer projection norm {norm:e} below threshold")]
    DegenerateChannel { norm: f64 },

    #[error("user {user} is not targeted in interval {interval}")]
    NotTargeted { interval: usize, user: usize },

    #[error("user {user} must cancel file {file} part {part} subpart {subpart} but does not cache it (interval {interval})")]
    MissingCacheEntry {
        interval: usize,
        user: usize,
        file: usize,
        part: usize,
        subpart: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
