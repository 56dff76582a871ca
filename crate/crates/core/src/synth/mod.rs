//! Deterministic synthetic scenes for exercising the metrics.

mod instances;
mod thicken;
mod wall;

pub use instances::{drop_instance, instance_scene_geometry, make_instance_scene};
pub use thicken::thicken_behind;
pub use wall::{make_wall_scene, WallSceneSpec};
