//! Spectral laboratory for the damped wave equation
//! `∂²ₜu − Δu + ∂ₜu = uᵖ` on a periodic box.
//!
//! The crate provides the exact linear solution operator, Littlewood–Paley
//! blocks with Besov and Lebesgue norms, Bony paraproducts, a Duhamel
//! fixed-point solver with an independent exponential integrator, and an
//! admissibility checker for the parameter conditions of the well-posedness
//! theory. The [`lab`] module drives reproducible experiments from config
//! files.

pub mod admissibility;
pub mod error;
pub mod fit;
pub mod grid;
pub mod lab;
pub mod littlewood_paley;
pub mod norms;
pub mod paraproduct;
pub mod profiles;
pub mod propagator;
pub mod report;
pub mod solver;
pub mod tolerances;

pub use error::{LabError, Result};
pub use grid::{GridField, SpectralField, TorusGrid};
