//! Region counting, boundary facets, and compact rectifier-net boundary
//! construction for piecewise-linear classifiers.
//!
//! The crate has five parts:
//!
//! - [`geometry`]: affine units, maxout classifiers, redundancy removal.
//! - [`arrangement`]: hyperplane-arrangement cells, general position,
//!   boundary facet counting for single-hidden-layer rectifier nets.
//! - [`netbuilder`]: layered rectifier networks with skip connections and the
//!   angle-halving norm approximators.
//! - [`bounds`]: exact region-count formulas and closed-form size bounds.
//! - [`verify`]: seeded experiments checking the constructions against the
//!   closed forms (sandwich ratios, Monte Carlo volume excess, segment
//!   counts, end-to-end ball approximation).

pub mod arrangement;
pub mod bounds;
pub mod error;
pub mod fmt;
pub mod geometry;
mod linalg;
pub mod lp;
pub mod netbuilder;
pub mod rng;
pub mod verify;

pub use arrangement::{Cell, ShlNetwork};
pub use error::{Error, Result};
pub use geometry::{AffineUnit, MaxoutClassifier, SignClass};
pub use netbuilder::{build_norm2d, build_norm_nd, BallSide, Evaluator, LayeredNetwork};
