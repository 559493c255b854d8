//! Spatial degrees of freedom of isotropic scalar fields.
//!
//! The crate builds the discrete wavenumber lattice of a finite aperture,
//! synthesizes random field realizations from it, and measures how many
//! eigenvalues of the sample spatial covariance carry the field energy.
//!
//! ```
//! use holodof::dof::{effective_dof, gram_spectrum, build_ensemble, DofPolicy, Scenario};
//! use holodof::spectral::Aperture;
//!
//! let aperture = Aperture::linear(4.0, 1.0)?;
//! let scenario = Scenario::isotropic(aperture, 0.25);
//! let ensemble = build_ensemble(&scenario, 160, 7)?;
//! let spectrum = gram_spectrum(&ensemble)?;
//! let dof = effective_dof(&spectrum, &DofPolicy::default())?;
//! assert!(dof.relative_floor <= 16);
//! # Ok::<(), holodof::Error>(())
//! ```

pub mod dof;
pub mod error;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod spectral;
pub mod synthesis;

pub use error::{Error, Result};
pub use num_complex::Complex64;
