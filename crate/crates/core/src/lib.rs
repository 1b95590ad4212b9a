//! Joint recovery of frequency-sparse signal ensembles that share a common
//! off-the-grid component.
//!
//! Each signal `x_j = z_c + z_j` is the sum of a common component `z_c` and
//! an innovation `z_j`, both sparse combinations of complex sinusoids with
//! continuous frequencies in `[0, 1)`. Recovery minimizes the concatenated
//! atomic norm subject to per-signal measurements, posed as a structured
//! semidefinite program and solved with a first-order splitting method.
//! Dual multipliers yield trigonometric polynomials that certify optimality
//! and localize the frequencies.

pub mod admm;
pub mod certificate;
pub mod error;
pub mod experiment;
pub mod grid_oracle;
pub mod io;
pub mod linalg;
pub mod sdp;
pub mod signal;
pub mod toeplitz;
pub mod trig;
pub mod vandermonde;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
