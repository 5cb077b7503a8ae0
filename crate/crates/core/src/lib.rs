//! Power allocation games on the two-user MIMO multiple access channel with
//! a randomly coordinated successive interference canceller.
//!
//! The crate is organised bottom-up:
//!
//! - [`matcore`]: complex Hermitian linear algebra and Kronecker channels.
//! - [`rates`]: Monte Carlo ergodic rates and game utilities.
//! - [`largesys`]: deterministic large-system approximations.
//! - [`games`]: best responses and Nash equilibria for the two games.
//! - [`analysis`]: sum-rate sweeps, Stackelberg choice of the coordination
//!   probability, rate regions and numerical verification of the trace
//!   inequalities behind uniqueness.
//! - [`cli`]: scenario files, result tables and the `macgame` front end.

pub mod analysis;
pub mod cli;
mod error;
pub mod games;
pub mod largesys;
pub mod matcore;
pub mod rates;

pub use error::{Error, Result};
