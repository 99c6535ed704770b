//! Information geometry of statistical models and the chaos indicators built
//! on it: geodesic flows, Jacobi-field growth and the volume-based entropy.

pub mod acceptance;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod iho;
pub mod ige;
pub mod models;
pub mod ode;
pub mod quadrature;

pub use error::{Error, Result};
