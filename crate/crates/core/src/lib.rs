//! Level-set multiscale shape representation.
//!
//! A shape, given as the zero level set of a function on a voxel grid, is
//! smoothed by a curvature-driven flow while tracked surface points record
//! their per-level displacements ("details"). Running the motion backwards
//! through those displacements reconstructs the fine levels; adding a vanishing
//! viscosity and re-imposing known data turns the same machinery into a
//! surface inpainting method for tubular shapes.

pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod inpaint;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod msr;
pub mod phantoms;
pub mod redistance;
pub mod spatial;

pub mod cli;

pub use error::{Error, Result};
pub use grid::{GridGeometry, ScalarGrid, SignField, Vec3, VectorGrid};
