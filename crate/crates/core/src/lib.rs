//! Formal and simultaneous linearization of germs of biholomorphisms of
//! `C^n` fixing the origin.
//!
//! The crate is organised bottom-up:
//!
//! * [`scalars`]: exact Gaussian rationals and MPFR-backed complex floats
//!   behind one [`scalars::Scalar`] trait, with the zero policy.
//! * [`series`]: multi-indices, truncated power series, germs and their
//!   composition, inversion and conjugation.
//! * [`resonance`]: resonance sets, small divisors and the omega functions.
//! * [`jordan`]: commutation, (almost) simultaneous Jordan form checks and
//!   simultaneous diagonalization.
//! * [`linearize`]: degree-by-degree formal linearization, single and
//!   simultaneous.
//! * [`brjuno`]: Brjuno-type series, majorant sequences and certification of
//!   coefficient bounds.
//! * [`format`] and [`cli`]: the JSON problem file and the command-line
//!   front end.

pub mod brjuno;
pub mod cli;
pub mod error;
pub mod format;
pub mod jordan;
pub mod linalg;
pub mod linearize;
pub mod resonance;
pub mod scalars;
pub mod series;

pub use error::{Error, Result};
