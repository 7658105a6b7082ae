//! Two bosonic modes sharing a Lorentzian thermal reservoir, driven by
//! piecewise-constant frequency detuning.
//!
//! The dynamics of the mode amplitudes reduce, on every interval of constant
//! detuning, to a pair of coupled second-order ODEs with constant
//! coefficients. Each segment is solved in closed form through the quartic
//! characteristic polynomial ([`quartic`]), the four mode ratios, and a 4x4
//! linear solve for the modal weights ([`propagator`]). Independent numerical
//! engines ([`oracle`]) integrate the unreduced memory-kernel system and a
//! discretized bath for cross-validation. [`schedule`] builds regular and
//! jittered pulse trains and their spectral filter function; [`observables`]
//! maps amplitude trajectories to occupations, coherence, a separability
//! witness, and the suppression factor comparing controlled and free runs.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature
//! (default) only toggles `std::error::Error` integration points and is not
//! needed for any numerics.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod quartic;
pub mod schedule;

mod eig;

pub use error::{Error, Result};

/// Complex double — the scalar type of every amplitude in this crate.
pub type C64 = num_complex::Complex64;

/// i as a `C64`.
pub const IM: C64 = C64::new(0.0, 1.0);
