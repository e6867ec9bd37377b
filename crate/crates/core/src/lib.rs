//! Geometry, isoperimetric quotients and bottom-of-spectrum estimates for
//! rotationally symmetric warped-product manifolds `dr² + ψ(r)² g_{S^{n-1}}`.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extrapolate;
pub mod geometry;
pub mod identities;
pub mod isoperimetry;
pub mod numdiff;
pub mod profile;
pub mod quadrature;
pub mod radial_graph;
pub mod spectral;
pub mod sphere;
pub mod tridiag;
pub mod verifier;
pub mod warp;

pub use error::{Error, Result};
pub use warp::{make_preset, CartanHadamard, ManifoldSpec, WarpKind, WarpingFunction};
