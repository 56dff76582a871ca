//! Subcommands of the `occray` binary.
//!
//! Every `cmd_*` function takes parsed arguments and returns an [`anyhow::Result`];
//! [`exit_code`] maps an error to the process exit status (1 for an empty
//! evaluation, 2 for bad input).

mod args;
mod eval;
mod report;
mod synth;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use occray::grid::{class_balance_weights, load_grid, sparsity_stats, VoxelGrid};
use occray::raygen::{
    build_query_rays, elevation_channels, lidar_pattern, temporal_indices, write_rays, Pose,
    Trajectory,
};
use serde::Serialize;

pub use args::{Cli, Command, EvalArgs, PatternArgs, RaysArgs, StatsArgs, SynthArgs, SynthKind};
pub use eval::{cmd_eval, EvalOutcome};
pub use report::{EvalConfig, EvalReport};
pub use synth::cmd_synth;

/// Raised when no ray hit anything in any ground truth.
#[derive(Debug)]
pub struct EmptyEvaluation;

impl std::fmt::Display for EmptyEvaluation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("empty evaluation: no query ray hit the ground truth")
    }
}

impl std::error::Error for EmptyEvaluation {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<EmptyEvaluation>().is_some() {
        1
    } else {
        2
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Eval(args) => {
            let outcome = cmd_eval(&args)?;
            print!("{}", outcome.table);
            if outcome.report.is_empty() {
                return Err(EmptyEvaluation.into());
            }
            Ok(())
        }
        Command::Synth(args) => cmd_synth(&args),
        Command::Rays(args) => cmd_rays(&args),
        Command::Stats(args) => cmd_stats(&args),
    }
}

pub(crate) fn load(path: &Path) -> Result<VoxelGrid> {
    load_grid(path).with_context(|| format!("cannot read grid {}", path.display()))
}

pub(crate) fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Trajectory::parse(&text).with_context(|| format!("bad trajectory {}", path.display()))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes the query rays for a trajectory (or the identity pose) and prints a summary.
pub fn cmd_rays(args: &RaysArgs) -> Result<()> {
    let config = args.pattern.config();
    let pattern = lidar_pattern(&config)?;
    let channels = elevation_channels(&config)?;
    let (poses, picked): (Vec<Pose>, Vec<usize>) = match &args.traj {
        Some(path) => {
            let traj = load_trajectory(path)?;
            let idx = temporal_indices(&traj, args.n_waypoints)?;
            (idx.iter().map(|&i| traj.poses()[i]).collect(), idx)
        }
        None => (vec![Pose::identity()], vec![0]),
    };
    let rays = build_query_rays(&pattern, &poses)?;
    let file = fs::File::create(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut w = std::io::BufWriter::new(file);
    write_rays(&mut w, &rays)?;
    std::io::Write::flush(&mut w)?;

    println!("rays      {}", rays.len());
    println!("waypoints {picked:?}");
    println!(
        "channels  {} x {} azimuths, elevation {:.3} to {:.3} deg",
        channels.len(),
        config.azimuth_count,
        channels.first().map_or(0.0, |e| e.to_degrees()),
        channels.last().map_or(0.0, |e| e.to_degrees()),
    );
    Ok(())
}

#[derive(Serialize)]
struct ClassStats<'a> {
    name: &'a str,
    count: u64,
    weight: f64,
}

#[derive(Serialize)]
struct StatsReport<'a> {
    dims: [usize; 3],
    voxel_size: f64,
    total: u64,
    free_fraction: f64,
    classes: Vec<ClassStats<'a>>,
}

/// Prints per-class voxel counts, the free fraction and class-balance weights.
pub fn cmd_stats(args: &StatsArgs) -> Result<()> {
    let grid = load(&args.grid)?;
    let stats = sparsity_stats(&grid);
    let tax = grid.taxonomy();
    let semantic: Vec<usize> = tax.semantic_classes().collect();
    let counts: Vec<u64> = semantic.iter().map(|&c| stats.counts[c]).collect();
    let weights = class_balance_weights(&counts)?;
    let classes: Vec<ClassStats> = semantic
        .iter()
        .zip(counts.iter().zip(&weights))
        .map(|(&c, (&count, &weight))| ClassStats {
            name: tax.name(c).unwrap_or_default(),
            count,
            weight,
        })
        .collect();

    println!("{:<22} {:>12} {:>12}", "class", "voxels", "weight");
    for c in &classes {
        println!("{:<22} {:>12} {:>12.4}", c.name, c.count, c.weight);
    }
    println!("{:<22} {:>12}", "free", stats.counts[tax.free_index()]);
    println!(
        "total {}  free fraction {:.6}",
        stats.total, stats.free_fraction
    );

    if let Some(path) = &args.json {
        let report = StatsReport {
            dims: grid.dims(),
            voxel_size: grid.voxel_size(),
            total: stats.total,
            free_fraction: stats.free_fraction,
            classes,
        };
        write_json(path, &report)?;
    }
    Ok(())
}
