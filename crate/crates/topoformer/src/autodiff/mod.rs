//! Minimal dense-tensor reverse-mode automatic differentiation.
//!
//! All tensors are row-major 2D `f64` matrices (vectors are 1×n, scalars
//! 1×1) owned by a [`Tape`]. Operations record themselves on the tape;
//! [`Tape::backward`] replays it once in reverse and returns gradients for
//! every leaf created with `requires_grad`. Shape mismatches and non-finite
//! leaf data are programmer errors and panic.
//!
//! A tape is confined to one thread; independent tapes can run in parallel.

mod adam;
mod check;
mod tape;

pub use adam::{AdamConfig, AdamState};
pub use check::{gradient_check, gradient_check_multi};
pub use tape::{Grads, Tape, Var};
