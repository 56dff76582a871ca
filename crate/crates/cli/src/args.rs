use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use occray::raycast::DEFAULT_MAX_RANGE;
use occray::raygen::{LidarPatternConfig, DEFAULT_WAYPOINTS};

#[derive(Debug, Parser)]
#[command(
    name = "occray",
    version,
    about = "Ray-based evaluation of 3D occupancy grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predictions against ground truth with RayIoU (and optionally RayPQ, voxel mIoU).
    Eval(EvalArgs),
    /// Write synthetic fixture grids.
    Synth(SynthArgs),
    /// Generate query rays and write them in the RAYS format.
    Rays(RaysArgs),
    /// Print voxel statistics of a grid.
    Stats(StatsArgs),
}

/// Simulated LiDAR layout.
#[derive(Clone, Debug, Args)]
pub struct PatternArgs {
    /// Sensor height above the ground plane z = 0, meters.
    #[arg(long, default_value_t = 2.0)]
    pub sensor_height: f64,
    #[arg(long, default_value_t = 360)]
    pub azimuths: usize,
    /// Spacing of downward channels on the ground, meters.
    #[arg(long, default_value_t = 1.0)]
    pub ground_spacing: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 40.0)]
    pub r_max: f64,
    /// Extra elevations above the horizon, degrees; pass the flag bare for none.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 0..,
        allow_hyphen_values = true,
        default_value = "0,1,2,3,4,5,6,7,8,9,10"
    )]
    pub upper_elevations: Vec<f64>,
}

impl PatternArgs {
    pub fn config(&self) -> LidarPatternConfig {
        LidarPatternConfig {
            sensor_height: self.sensor_height,
            azimuth_count: self.azimuths,
            ground_spacing: self.ground_spacing,
            r_min: self.r_min,
            r_max: self.r_max,
            upper_elevations: self
                .upper_elevations
                .iter()
                .map(|d| d.to_radians())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct EvalArgs {
    /// Predicted grid; repeat once per sample.
    #[arg(long, required = true)]
    pub pred: Vec<PathBuf>,
    /// Ground-truth grid; repeat once per sample, in the same order as --pred.
    #[arg(long, required = true)]
    pub gt: Vec<PathBuf>,
    /// Ego trajectory; give one for all samples or one per sample.
    #[arg(long)]
    pub traj: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_WAYPOINTS)]
    pub n_waypoints: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_RANGE)]
    pub max_range: f64,
    /// Also report voxel-level mIoU.
    #[arg(long)]
    pub voxel_miou: bool,
    /// Restrict voxel mIoU to the ground truth's visible mask.
    #[arg(long)]
    pub use_visible_mask: bool,
    /// Also report RayPQ from instance ids.
    #[arg(long)]
    pub panoptic: bool,
    /// Instance IoU above which a pair matches.
    #[arg(long, default_value_t = 0.5)]
    pub iou_threshold: f64,
    /// Average per-sample scores instead of pooling counts.
    #[arg(long)]
    pub per_sample_mean: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub pattern: PatternArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub kind: SynthKind,
}

#[derive(Clone, Debug, Subcommand)]
pub enum SynthKind {
    /// Wall seen head-on plus a displaced prediction of it.
    Wall {
        /// Distance from the viewpoint to the wall's front face, meters.
        #[arg(long, default_value_t = 10.0)]
        d: f64,
        /// Wall thickness, meters.
        #[arg(long, default_value_t = 0.4)]
        dv: f64,
        /// Displacement of the predicted front face (+ is farther), meters.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        shift: f64,
        /// Fill the prediction from its front face to the far bound.
        #[arg(long)]
        fill_behind: bool,
        /// Far end of the filled prediction, meters from the viewpoint.
        #[arg(long)]
        far_bound: Option<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "0,0,2"
        )]
        viewpoint: Vec<f64>,
        #[arg(long, default_value = "manmade")]
        class: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Seeded boxes of thing classes on a ground layer, with instance ids.
    Instances {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Also write pred.occ: the scene with this instance removed.
        #[arg(long)]
        drop: Option<u16>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Debug, Args)]
pub struct RaysArgs {
    #[arg(long)]
    pub traj: Option<PathBuf>,
    #[arg(long, visible_alias = "n", default_value_t = DEFAULT_WAYPOINTS)]
    pub n_waypoints: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub pattern: PatternArgs,
}

#[derive(Clone, Debug, Args)]
pub struct StatsArgs {
    pub grid: PathBuf,
    /// Also write the statistics as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}
