//! Monte Carlo laboratory for singular-value statistics of directed random
//! graphs.
//!
//! Randomly weighted adjacency matrices of directed Erdős–Rényi graphs and
//! directed random geometric graphs interpolate between the Poisson ensemble
//! (isolated vertices, diagonal matrices) and the real Ginibre ensemble
//! (complete graphs, i.i.d. Gaussian matrices). The crate generates those
//! matrices ([`models`]), diagonalizes them ([`spectra`]), reduces the spectra
//! to spacing-ratio and minimum-singular-value statistics ([`stats`]) and
//! orchestrates reproducible parallel sweeps over graph parameters
//! ([`ensemble`]). [`report`] holds the CSV and JSON exchange formats.

pub mod ensemble;
pub mod error;
pub mod models;
pub mod report;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};
pub use faer::Mat;
pub use num_complex::Complex64;
