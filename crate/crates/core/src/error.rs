use thiserror::Error;

/// Errors raised by the link-level model.
///
/// Configuration problems and precondition violations are reported as
/// values. `BufferOverflow` and `BufferUnderflow` indicate a protocol
/// contract violation inside the slot loop rather than a user error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix shape {rows}x{cols}")]
    InvalidShape { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("channel set layout does not match the network dimensions")]
    LayoutMismatch,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("symbol {index} is not in the constellation alphabet")]
    NotInAlphabet { index: usize },
    #[error("bit block contains a non-binary value at position {index}")]
    NonBinary { index: usize },
    #[error("relay energy {relay} differs from source energy {source_energy}")]
    EnergyAsymmetry { source_energy: f64, relay: f64 },
    #[error("buffer overflow on cluster {cluster}: occupancy {occupancy}, capacity {capacity}")]
    BufferOverflow {
        cluster: usize,
        occupancy: usize,
        capacity: usize,
    },
    #[error("buffer underflow on cluster {cluster}: occupancy {occupancy}, requested {requested}")]
    BufferUnderflow {
        cluster: usize,
        occupancy: usize,
        requested: usize,
    },
    #[error("empty sample set for `{0}`")]
    EmptySamples(&'static str),
    #[error("slot loop stalled after {slots} slots with {delivered} of {target} groups delivered")]
    Stalled { slots: u64, delivered: u64, target: u64 },
}

impl Error {
    /// True for violations of an internal protocol contract, as opposed to
    /// bad input.
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            Error::BufferOverflow { .. } | Error::BufferUnderflow { .. } | Error::Stalled { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}
