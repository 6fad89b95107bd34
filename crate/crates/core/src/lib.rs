//! Uplink MC-CDMA with two-antenna Alamouti space-time block coding.
//!
//! The crate models the stacked frequency-domain received vector of a
//! two-transmit / one-receive antenna MC-CDMA uplink and provides receivers
//! for the first user:
//!
//! * the closed-form MMSE filter pair and its minimum cost,
//! * plain LMS and the relationship-constrained ("fast") LMS,
//! * a genetic-algorithm search over the reduced weight pair `(w_a, w_c)`.
//!
//! Everything here is pure computation over `alloc`; experiment orchestration,
//! file formats and the command-line front end live in the `mccdma-lab` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod airlink;
mod error;
pub mod ga;
pub mod numerics;
pub mod receivers;

pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector, SeededRng, C64};
