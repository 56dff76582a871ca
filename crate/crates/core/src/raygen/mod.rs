//! Query-ray generation: a simulated LiDAR direction pattern with ground-balanced
//! elevation channels, replicated at several ego-path waypoints.

mod pattern;
mod rayset;
mod trajectory;

pub use pattern::{elevation_channels, lidar_pattern, LidarPatternConfig};
pub use rayset::{build_query_rays, read_rays, write_rays, Ray, RaySet, RAYS_MAGIC, RAYS_VERSION};
pub use trajectory::{temporal_indices, temporal_origins, Pose, Trajectory, DEFAULT_WAYPOINTS};
