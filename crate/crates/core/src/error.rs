use thiserror::Error;

use crate::dist::ExtDist;

/// Errors raised by the library.
///
/// `Structural` covers malformed input (unknown points, wrong arities, non-square
/// matrices). `Invalid` means the input is well formed but breaks a semantic law.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid {kind}: {}", details.join("; "))]
    Invalid {
        kind: &'static str,
        details: Vec<String>,
    },

    #[error("{what} exceeds cap: {needed} > {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("closure did not converge within {passes} passes")]
    NonConvergence {
        passes: usize,
        previous: Vec<ExtDist>,
        last: Vec<ExtDist>,
    },
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn invalid<T: ToString>(
        kind: &'static str,
        details: impl IntoIterator<Item = T>,
    ) -> Self {
        Error::Invalid {
            kind,
            details: details.into_iter().map(|d| d.to_string()).collect(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Enumeration and iteration limits shared by the capped operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Variable assignments enumerated by equation checks.
    pub max_assignments: u128,
    /// Alternation passes of the congruence closure; `None` uses `16 n² (1 + table entries)`.
    pub max_passes: Option<usize>,
    /// Terms materialized by bounded free-algebra computations.
    pub max_terms: u128,
    /// Tuple pairs visited when validating an operation table.
    pub max_tuple_pairs: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_assignments: 1_000_000,
            max_passes: None,
            max_terms: 100_000,
            max_tuple_pairs: 10_000_000,
        }
    }
}

pub(crate) fn check_cap(what: &'static str, needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(Error::CapExceeded { what, needed, cap })
    } else {
        Ok(())
    }
}
