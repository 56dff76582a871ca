use std::fs;

use anyhow::{ensure, Context, Result};
use occray::grid::{save_grid, Box3D, ClassTaxonomy};
use occray::synth::{
    drop_instance, instance_scene_geometry, make_instance_scene, make_wall_scene, WallSceneSpec,
};
use occray::Vec3;
use serde::Serialize;

use crate::args::{SynthArgs, SynthKind};
use crate::write_json;

#[derive(Serialize)]
struct WallManifest<'a> {
    kind: &'static str,
    spec: &'a WallSceneSpec,
    pred_far_bound: f64,
    gt_wall_voxels: usize,
    files: [&'static str; 2],
}

#[derive(Serialize)]
struct InstanceManifest<'a> {
    kind: &'static str,
    seed: u64,
    n_boxes: usize,
    dropped_instance: Option<u16>,
    boxes: &'a [Box3D],
    files: Vec<&'static str>,
}

/// Writes fixture grids and a `manifest.json` into `--out-dir`.
pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    match &args.kind {
        SynthKind::Wall {
            d,
            dv,
            shift,
            fill_behind,
            far_bound,
            viewpoint,
            class,
            out_dir,
        } => {
            ensure!(
                viewpoint.len() == 3,
                "--viewpoint needs three comma-separated values"
            );
            let taxonomy = ClassTaxonomy::default();
            let wall_class = taxonomy
                .index_of(class)
                .with_context(|| format!("unknown class {class:?}"))?;
            let spec = WallSceneSpec {
                viewpoint: Vec3::new(viewpoint[0], viewpoint[1], viewpoint[2]),
                d: *d,
                d_v: *dv,
                shift: *shift,
                fill_behind: *fill_behind,
                pred_far_bound: *far_bound,
                wall_class,
                taxonomy,
                ..WallSceneSpec::default()
            };
            let (gt, pred) = make_wall_scene(&spec)?;
            fs::create_dir_all(out_dir)
                .with_context(|| format!("cannot create {}", out_dir.display()))?;
            save_grid(out_dir.join("gt.occ"), &gt)?;
            save_grid(out_dir.join("pred.occ"), &pred)?;
            let manifest = WallManifest {
                kind: "wall",
                spec: &spec,
                pred_far_bound: spec.resolved_far_bound(),
                gt_wall_voxels: spec.gt_wall_voxel_count()?,
                files: ["gt.occ", "pred.occ"],
            };
            write_json(&out_dir.join("manifest.json"), &manifest)?;
            println!("wrote {}", out_dir.display());
        }
        SynthKind::Instances {
            seed,
            n,
            drop,
            out_dir,
        } => {
            let (gt, boxes) = make_instance_scene(*seed, *n, instance_scene_geometry())?;
            fs::create_dir_all(out_dir)
                .with_context(|| format!("cannot create {}", out_dir.display()))?;
            save_grid(out_dir.join("gt.occ"), &gt)?;
            let mut files = vec!["gt.occ"];
            if let Some(id) = drop {
                ensure!(
                    *id >= 1 && (*id as usize) <= *n,
                    "--drop must name an instance in 1..={n}"
                );
                save_grid(out_dir.join("pred.occ"), &drop_instance(&gt, *id)?)?;
                files.push("pred.occ");
            }
            let manifest = InstanceManifest {
                kind: "instances",
                seed: *seed,
                n_boxes: *n,
                dropped_instance: *drop,
                boxes: &boxes,
                files,
            };
            write_json(&out_dir.join("manifest.json"), &manifest)?;
            println!("wrote {} ({} instances)", out_dir.display(), boxes.len());
        }
    }
    Ok(())
}
