//! Distributed iterative Hessian sketch (DIHS) for learning the Markov
//! parameters of a linear time-invariant system from one noisy trajectory.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! outside world (threads, clocks, files) is injected through the small traits
//! in [`exec`] or lives in the companion `dihs` crate.
//!
//! Layout:
//! - [`linalg`]: dense row-major matrices, Cholesky, Householder QR, FWHT.
//! - [`rng`]: reproducible ChaCha substreams and seed mixing.
//! - [`lti`]: system generation, simulation, Markov parameters, regression data.
//! - [`sketch`]: random embeddings (gaussian, rademacher, uniform, ROS, SJLT, two-stage).
//! - [`solver`]: exact least squares, sketched Newton steps and the DIHS loop.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod exec;
pub mod linalg;
pub mod lti;
pub mod rng;
pub mod sketch;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
