//! Ray-casting evaluation of semantic and panoptic 3D occupancy grids.
//!
//! Query rays emulating a LiDAR are cast into a predicted and a ground-truth
//! occupancy volume; each ray's first non-free voxel yields a depth and a class
//! label, which are compared under a set of depth thresholds (RayIoU). The same
//! ray records drive a ray-level panoptic quality (RayPQ). The legacy voxel-level
//! mIoU is provided alongside, together with synthetic scenes that exercise the
//! failure modes of voxel-level scoring.
//!
//! Modules:
//! - [`grid`]: voxel grids, class taxonomy, coordinate transforms, the OCCG file format.
//! - [`raygen`]: LiDAR direction patterns, trajectories and query-ray batches.
//! - [`raycast`]: exact grid traversal and a fixed-step marching oracle.
//! - [`metrics`]: RayIoU, RayPQ and voxel-level mIoU.
//! - [`synth`]: deterministic synthetic scenes.

pub mod error;
pub mod grid;
pub mod metrics;
pub mod raycast;
pub mod raygen;
pub mod synth;

pub use error::{FormatError, GridError, MetricsError, RayError, SynthError};

/// 3-vector in meters.
pub type Vec3 = nalgebra::Vector3<f64>;
