//! Geometric core of a multi-view texturing pipeline: fuse per-view images
//! into a UV texture, fill unobserved texels by normal-aware propagation
//! over the surface, then upscale and repair chart seams in 3D.

// `!(x >= y)` is how this crate rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod enhance;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod inpaint3d;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod project;
pub mod raster;
pub mod seam;
pub mod texture;

pub use error::{Error, Result};
