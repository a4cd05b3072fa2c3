//! Mixed-precision preconditioned conjugate gradient laboratory.
//!
//! * [`fpx`]: simulated low-precision floating-point formats.
//! * [`linalg`]: SPD matrices, Cholesky factors, triangular solves in any
//!   format, binary64 vector kernels.
//! * [`problems`]: clustered-spectrum diagonal test systems and truncation
//!   preconditioners.
//! * [`pcg`]: the preconditioned CG framework (left, right, split), Saad's
//!   split variant and per-iteration diagnostics.
//! * [`bounds`]: closed-form backward/forward error bounds and assumptions.
//! * [`experiment`] and [`batch`]: experiment drivers and batch execution.

pub mod batch;
pub mod bounds;
pub mod error;
pub mod experiment;
pub mod fpx;
pub mod linalg;
pub mod pcg;
pub mod problems;

pub use error::{Error, Result};
