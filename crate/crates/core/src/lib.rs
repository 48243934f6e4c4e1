//! Adaptive finite element solver for 2-D open cavity electromagnetic
//! scattering (TM and TE polarizations of the Helmholtz equation).
//!
//! The library truncates the upper half-space with a circular perfectly
//! matched layer and drives mesh adaptivity with a residual a posteriori
//! error estimator whose indicators are damped by the PML decay weight.
//! A transparent-boundary-condition (DtN) solver on the inner semicircle is
//! included for cross validation of radar cross section output.
//!
//! Typical use:
//!
//! ```no_run
//! use cavity_scatter::adapt::{adapt_solve, AdaptOptions};
//! use cavity_scatter::scenario::{preset, Preset};
//!
//! let scenario = preset(Preset::Example1Empty);
//! let options = AdaptOptions::with_max_dof(15_000);
//! let run = adapt_solve(&scenario, &options).unwrap();
//! println!("eps_h = {}", run.report.eps_h);
//! ```

pub mod adapt;
pub mod assembly;
pub mod dtn;
pub mod error;
pub mod estimator;
pub mod geom;
pub mod mesh;
pub mod pml;
pub mod postprocess;
pub mod scenario;
pub mod solver;
pub mod specfun;

/// Scalar type used for coordinates, norms and weights.
pub type Real = f64;
/// Complex scalar used for fields, coefficients and matrices.
pub type Cplx = num_complex::Complex64;

pub use error::{Error, Result};
