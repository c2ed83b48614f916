//! Depth-annotated equirectangular panoramas from a LiDAR point cloud and a
//! ring of pinhole cameras.
//!
//! The pipeline for one capture station:
//!
//! 1. project the cloud into every camera ([`depth::project_sparse_depth`])
//!    and densify the result guided by the RGB image ([`depth::densify`]);
//! 2. lift every camera depth pixel onto the panorama sphere and average
//!    overlaps ([`depth::build_pano_depth`]), then fill holes
//!    ([`depth::fill_invalid_depth`]);
//! 3. render each camera onto the panorama by inverse mapping
//!    ([`pipeline::render_camera_to_pano`]);
//! 4. stitch neighbouring renders along graph-cut seams ([`seam`]) and blend
//!    them with Laplacian pyramids ([`blend`]);
//! 5. fill the nadir band from neighbouring stations
//!    ([`pipeline::fill_black_hole`]).
//!
//! Any two pixels of the result can then be measured in meters
//! ([`measure::measure_distance`]).

pub mod blend;
pub mod depth;
mod error;
pub mod geometry;
pub mod io;
pub mod measure;
pub mod pipeline;
pub mod raster;
pub mod seam;
pub mod synth;

pub use error::{Error, Result};
