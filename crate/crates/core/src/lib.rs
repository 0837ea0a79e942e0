//! Synthetic nanoparticle micrographs with exact ground truth, and the
//! segmentation metrology to evaluate masks against them.
//!
//! The flow is: [`scene::build_scene`] samples a scene from a recipe,
//! [`render::render_pair`] produces the beauty image and label mask,
//! [`pipeline::degrade`] adds instrument realism, [`segment`] and
//! [`postprocess`] turn images into labeled particles, and [`analyze`]
//! measures them.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod codec;
pub mod error;
pub mod geom;
pub mod mesh;
pub mod pipeline;
pub mod postprocess;
pub mod raster;
pub mod render;
pub mod rng;
pub mod scene;
pub mod segment;
pub mod texture;

pub use error::{Error, Result};
pub use raster::{BinaryMask, GrayImage, LabelMap, PixelScale, ScalarMap};
pub use rng::Rng;
