//! Scattering phase shifts of Schrödinger operators on hyperbolic space,
//! geodesic X-ray transforms, high-energy trace formulas and the inverse
//! problem for monotone radial potentials.

pub mod acceptance;
pub mod error;
pub mod geometry;
pub mod inversion;
pub mod io;
pub mod ode;
pub mod potentials;
pub mod quad;
pub mod radial_scattering;
pub mod specfun;
pub mod spline;
pub mod trace_formula;
pub mod xray;

pub use error::{Error, Result};
