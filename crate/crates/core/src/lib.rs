//! Constant-excitation stabilizer codes built from classical extended Hamming
//! codes concatenated with a complemented dual-rail inner code.
//!
//! The family has parameters `[[2^(r+1), 2^r - (r+1), 3]]`. Every codeword has
//! exactly `2^r` excitations, so a collective rotation `exp(-iθ Σ Z_j)` acts on
//! the code space as a global phase.
//!
//! - [`pauli`]: signed Pauli operators and GF(2) group membership
//! - [`code`]: the extended Hamming checks and the concatenated code
//! - [`verify`]: distance search and the constant-excitation check
//! - [`state`]: dense state vectors, the [[8,1,3]] encoder and its oracle
//! - [`decode`]: depolarizing noise, syndrome measurement and lookup decoding
//! - [`experiment`]: exact low-weight analysis and Monte Carlo sweeps

pub mod code;
pub mod decode;
pub mod error;
pub mod experiment;
pub mod pauli;
pub mod state;
pub mod verify;

pub use code::{build_ce_code, canonical_code_8_1_3, extended_hamming_checks, StabilizerCode};
pub use error::{Error, Result};
pub use pauli::{PauliKind, PauliOperator};
pub use state::StateVector;
