//! Random convex lattice polygonal lines under the negative-binomial
//! family of measures.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] – Möbius sieve, coprime directions, exact slope order.
//! * [`measure`] – the grand-canonical product measure: calibration,
//!   per-direction laws, moment and covariance sums (direct and
//!   Möbius-inverted), partition function, Gaussian density.
//! * [`geometry`] – polygonal lines, tangential profiles, the limit
//!   parabola, tangential and Hausdorff distances.
//! * [`enumerator`] – exact weight tables, enumeration of all lines to a
//!   fixed endpoint, exact conditional law and total variation.
//! * [`sampler`] – free sampling and endpoint-conditioned rejection.
//! * [`verify`] – numerical checks producing CSV reports.
//!
//! Hot loops run on rayon when the `parallel` feature is enabled (default);
//! every reduction is performed in a fixed index order so results do not
//! depend on the thread count.

pub mod enumerator;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod lattice;
pub mod measure;
pub mod sampler;
pub mod stats;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{PlanarPolyline, PolygonalLine, Tangent};
pub use lattice::Direction;
pub use measure::{GCParams, MomentSummary, SumMethod, TruncationWindow};
pub use sampler::RngStream;
