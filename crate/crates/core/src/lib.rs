//! Numerical laboratory for the θ-cutoff family of adiabatic Hamiltonians.
//!
//! `H_1^θ` assigns every computational basis state `|j⟩` the energy
//! `min(θ, popcount(j))` and `H_0^θ` does the same in the Hadamard-rotated
//! basis. Both operators, the interpolation `H_s = (1-s) H_0 + s H_1` and the
//! initial state `|+…+⟩` are invariant under qubit permutations, so all of the
//! interesting dynamics lives in the `n + 1` dimensional span of the Dicke
//! states. This crate works in that basis and keeps a brute-force `2^n`
//! implementation ([`oracle`]) around as ground truth for small `n`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod combinatorics;
pub mod error;
pub mod escape;
pub mod evolution;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod robustness;
pub mod spectra;

pub use error::{Error, Result};
pub use linalg::C64;
pub use model::{LinearSchedule, SymmetricOperator, SymmetricState, ThetaModel};

/// Base of the logarithm used in the asymptotic thresholds.
///
/// The thresholds are stated with an unspecified `log`; natural log is the
/// default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => libm::log(x),
            LogBase::Two => libm::log2(x),
        }
    }
}

/// Default log base for thresholds.
pub const DEFAULT_LOG_BASE: LogBase = LogBase::Natural;
