//! Quasistatic anomalous localized resonance in plasmonic annuli.
//!
//! The concentric core–shell problem is solved exactly mode by mode
//! ([`concentric`]); the Möbius map of [`mobius`] carries that solution to
//! the eccentric superlens of the physical plane ([`eccentric`]), where
//! cloaking and shielding at a distance are decided and measured.
//! [`verification`] holds independent oracles for the solver and [`cli`]
//! the scenario-driven command line front end.

pub mod cli;
pub mod concentric;
pub mod eccentric;
pub mod error;
pub mod mobius;
pub mod verification;

pub use error::{Error, Result};
