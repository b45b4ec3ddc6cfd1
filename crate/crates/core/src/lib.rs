//! Exact chirotopes of d-dimensional point sets and how they behave under
//! rounding to a grid of step `1/M`.
//!
//! The crate is organised bottom-up:
//!
//! * [`exact`]: signs, rationals, determinant signs and half-integer Gamma
//!   values with symbolic powers of `√π`.
//! * [`geometry`]: points, simplices, facet hyperplanes, the unbounded-cell
//!   arrangement of a simplex and the orientation-preservation certificate.
//! * [`chirotope`]: extraction, comparison and text/packed formats.
//! * [`grid`]: grid selection, nearest-node rounding and the fixed-width
//!   binary encoding of rounded point sets.
//! * [`sampling`]: seeded dyadic sampling in the unit ball and cube, and the
//!   point-set text format.
//! * [`experiments`]: Monte Carlo harnesses and the closed-form bounds they
//!   are compared against.
//!
//! All decisions are exact. Floating point only shows up in reported
//! statistics and bounds.

pub mod chirotope;
mod error;
pub mod exact;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod sampling;

pub use chirotope::{Chirotope, DiffEntry, DiffKind};
pub use error::{Error, Result};
pub use exact::{Rational, ScaledPi, Sign};
pub use geometry::{CellLabel, Hyperplane, Point, SimplexTuple};
pub use grid::{EncodedConfig, GridSpec};
pub use sampling::{Domain, PointConfig, Provenance, SamplerConfig};
