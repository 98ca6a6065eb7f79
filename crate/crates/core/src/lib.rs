//! Numerical harmonic analysis on the periodic grid: Fourier multiplier
//! operators with sphere symbols, Littlewood-Paley dyadic analysis,
//! Hormander-Mikhlin condition checks, Calderon-Zygmund decompositions, and
//! H-distribution experiments (localization principle, div-curl) on canonical
//! oscillating and concentrating sequences.
//!
//! Everything lives on the unit torus `[0,1)^d`, `d <= 3`, sampled on a
//! power-of-two grid, so the discrete Fourier calculus is exact for
//! band-limited data. All operations are pure; values are immutable after
//! construction and may be shared across threads.

pub mod decomp;
pub mod error;
pub mod fields;
pub mod grid;
pub mod hdist;
pub mod multiplier;
pub mod sequences;
pub mod testutil;

pub use error::{Error, Result};
pub use grid::{dft, idft, lp_norm, pair, GridFunction, SpectralFunction};
pub use num_complex::Complex64;
