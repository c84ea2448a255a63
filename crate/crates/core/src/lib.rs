//! Recoverability analysis for small multi-qubit states.
//!
//! The crate is organised bottom-up:
//!
//! * [`linops`]: Hermitian matrices, spectra, kernels and subspace tests.
//! * [`registers`]: labelled tensor-product registers, density operators,
//!   Choi operators and the built-in states and channels.
//! * [`markov`]: conditional blocks, the kernel-inclusion test, Choi
//!   application and block consistency.
//! * [`conic`]: a small dense SDP engine with recovery-feasibility and
//!   sampling-overhead builders.

pub mod conic;
pub mod error;
pub mod linops;
pub mod markov;
pub mod random;
pub mod registers;

pub use error::{Error, Result};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/linear-algebra.md")]
    mod linear_algebra {}
    #[doc = include_str!("../../../book/src/registers.md")]
    mod registers {}
    #[doc = include_str!("../../../book/src/kernel-inclusion.md")]
    mod kernel_inclusion {}
    #[doc = include_str!("../../../book/src/recovery-maps.md")]
    mod recovery_maps {}
    #[doc = include_str!("../../../book/src/sdp-engine.md")]
    mod sdp_engine {}
    #[doc = include_str!("../../../book/src/sampling-overhead.md")]
    mod sampling_overhead {}
    #[doc = include_str!("../../../book/src/worked-examples.md")]
    mod worked_examples {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../README.md")]
    mod readme {}
}
