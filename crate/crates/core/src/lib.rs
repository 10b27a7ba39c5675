//! Complex geometrical optics solutions, DtN maps and logarithmic stability checks
//! for the Schrödinger equation `−Δu + v u = 0` on a disk.

pub mod cgo;
pub mod error;
pub mod fields;
pub mod forward;
pub mod geometry;
pub mod harness;
pub mod reconstruct;
mod linalg;
mod spectral;

pub use error::{Error, Result};
pub use fields::GridFunction;
pub use geometry::DiskGrid;
