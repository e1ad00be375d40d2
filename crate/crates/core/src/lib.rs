//! Classical simulation of circuits on prime-dimensional qudits.
//!
//! Three interchangeable backends share one circuit representation:
//!
//! * [`tableau`]: generalized stabilizer tableau over `Z_d` (Clifford circuits only).
//! * [`mps`]: a matrix product state with SVD truncation.
//! * [`gcamps`]: the hybrid `C|MPS⟩` form, where a tableau-held Clifford `C`
//!   absorbs entanglement that a catalog of two-qudit disentanglers strips off
//!   the MPS after every non-Clifford gate.
//!
//! [`statevector`] is a dense reference used to verify the others, and
//! [`bench`] drives T-doped random Clifford benchmarks.

pub mod bench;
pub mod catalog;
pub mod circuit;
mod error;
pub mod gcamps;
mod linalg;
pub mod mps;
pub mod par;
pub mod pauli;
pub mod statevector;
pub mod tableau;

pub use error::{Error, Result};
pub use faer::c64;

/// Dense complex matrix used for gates and MPS tensors.
pub type CMat = faer::Mat<c64>;
