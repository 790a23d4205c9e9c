//! Classical and quantum mixture-density networks.
//!
//! The crate contains everything needed to compare a small classical MDN with
//! a quantum MDN whose mixture parameters come from the output probabilities
//! of three parameterized circuits:
//!
//! * [`qsim`]: an exact statevector simulator with adjoint gradients
//! * [`mixture`]: Gaussian mixtures, stable NLL, and the decoding of basis
//!   probabilities into mixture parameters
//! * [`models`]: the two model families with forward and backward passes
//! * [`data`]: the double-slit and logistic-map benchmarks
//! * [`train`]: Adam and ensemble training
//! * [`eval`]: density curves, mode detection, KL, held-out NLL
//! * [`cli`]: the `qmdn` command-line front end
//!
//! ```
//! use qmdn::mixture::mixture_from_state_probs;
//!
//! let uniform = [0.125; 8];
//! let gm = mixture_from_state_probs(&uniform, &uniform, &uniform, 1.0).unwrap();
//! assert_eq!(gm.n_components(), 7);
//! assert_eq!(gm.weights()[0], 1.0 / 7.0);
//! ```

pub mod cli;
pub mod data;
mod error;
pub mod eval;
pub mod mixture;
pub mod models;
pub mod qsim;
pub mod train;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/mixtures.md")]
    mod mixtures {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
