//! Random k-local Lindbladians and the spectral tools used to study how
//! their dissipative hierarchy of relaxation rates responds to a Hamiltonian.

pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod liouvillian;
pub mod pauli;
pub mod perturbation;
pub mod spectral;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
