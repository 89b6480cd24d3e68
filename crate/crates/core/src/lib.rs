//! Jacobi matrices whose essential spectrum is a finite gap set.
//!
//! The crate covers potential theory of the set (equilibrium measure,
//! Green's function, capacity), Jacobi operators and their spectral data,
//! the isospectral torus of periodic operators, the Fuchsian covering map
//! of the set's complement, and tools for Szegő-type asymptotics.

pub mod cli;
pub mod covering;
pub mod error;
pub mod gapset;
pub mod jacobi;
pub mod poly;
pub mod quad;
pub mod szego;
pub mod torus;

pub use error::{Error, Result};
pub use gapset::{Equilibrium, GapSet};
