//! Link-level simulation of buffer-aided two-way relaying between UAV
//! source pairs and multi-antenna relays with network coding.
//!
//! Everything here is `no_std` + `alloc`; file formats and the command line
//! live in the companion `chd-sim` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod buffers;
pub mod channel;
pub mod engine;
pub mod error;
pub mod rng;
pub mod selection;
pub mod signal;

pub use engine::{run_experiment, run_point, Engine, Modulation, RunStats, SimConfig};
pub use error::{Error, Result};
pub use num_complex::Complex64;
