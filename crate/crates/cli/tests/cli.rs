use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use occray::grid::{load_grid, save_grid, ClassTaxonomy, GridGeometry, VoxelGrid};
use occray::Vec3;
use serde_json::Value;
use tempfile::TempDir;

fn occray(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_occray"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn wall(dir: &Path, name: &str, shift: &str) {
    ok(&occray(
        &[
            "synth",
            "wall",
            "--d",
            "10",
            "--dv",
            "0.4",
            "--shift",
            shift,
            "--fill-behind",
            "--out-dir",
            name,
        ],
        dir,
    ));
}

#[test]
fn synth_is_byte_identical_on_rerun() {
    let tmp = TempDir::new().unwrap();
    for name in ["a", "b"] {
        wall(tmp.path(), name, "-0.4");
        ok(&occray(
            &[
                "synth",
                "instances",
                "--seed",
                "7",
                "--n",
                "3",
                "--out-dir",
                &format!("i{name}"),
            ],
            tmp.path(),
        ));
    }
    for f in [
        "a/gt.occ",
        "a/pred.occ",
        "a/manifest.json",
        "ia/gt.occ",
        "ia/manifest.json",
    ] {
        let other = f.replacen('a', "b", 1);
        assert_eq!(
            fs::read(tmp.path().join(f)).unwrap(),
            fs::read(tmp.path().join(other)).unwrap(),
            "{f}"
        );
    }
    let gt = load_grid(tmp.path().join("ia/gt.occ")).unwrap();
    let mut ids: Vec<u16> = gt
        .instances()
        .unwrap()
        .iter()
        .copied()
        .filter(|&i| i != 0)
        .collect();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids, vec![1, 2, 3]);
}

#[test]
fn eval_of_identical_grids_is_perfect() {
    let tmp = TempDir::new().unwrap();
    wall(tmp.path(), "w", "0");
    let stdout = ok(&occray(
        &[
            "eval", "--pred", "w/gt.occ", "--gt", "w/gt.occ", "--out", "r.json",
        ],
        tmp.path(),
    ));
    assert!(stdout.contains("RayIoU 1.0000"), "{stdout}");
    let r = json(&tmp.path().join("r.json"));
    assert_eq!(r["rayiou"], 1.0);
    assert_eq!(r["thresholds_m"], serde_json::json!([1.0, 2.0, 4.0]));
    assert_eq!(r["per_threshold"].as_array().unwrap().len(), 3);
    assert!(r["raypq"].is_null() && r["voxel_miou"].is_null());
    assert_eq!(r["per_threshold"][0]["per_class"]["manmade"]["fn"], 0);
    assert_eq!(r["config"]["origins"], "grid_center");
    assert!(r["config"].get("threads").is_none());
    assert!(r["rays_total"].as_u64().unwrap() > r["rays_excluded"].as_u64().unwrap());
}

#[test]
fn eval_reproduces_the_wall_voxel_ious() {
    let tmp = TempDir::new().unwrap();
    for (shift, expect) in [("0.4", 0.0), ("-0.4", 0.5), ("-0.8", 1.0 / 3.0)] {
        let dir = format!("s{shift}");
        wall(tmp.path(), &dir, shift);
        for masked in [false, true] {
            let pred = format!("{dir}/pred.occ");
            let gt = format!("{dir}/gt.occ");
            let mut args = vec![
                "eval",
                "--pred",
                &pred,
                "--gt",
                &gt,
                "--voxel-miou",
                "--out",
                "r.json",
            ];
            if masked {
                args.push("--use-visible-mask");
            }
            ok(&occray(&args, tmp.path()));
            let r = json(&tmp.path().join("r.json"));
            let iou = r["voxel_miou"]["per_class"]["manmade"]["iou"]
                .as_f64()
                .unwrap();
            assert!(
                (iou - expect).abs() < 1e-12,
                "shift {shift} masked {masked}: {iou}"
            );
            assert_eq!(r["voxel_miou"]["masked"], masked);
        }
    }
}

#[test]
fn panoptic_eval_penalizes_a_dropped_instance() {
    let tmp = TempDir::new().unwrap();
    ok(&occray(
        &[
            "synth",
            "instances",
            "--seed",
            "7",
            "--n",
            "3",
            "--drop",
            "2",
            "--out-dir",
            "s",
        ],
        tmp.path(),
    ));
    ok(&occray(
        &[
            "eval",
            "--pred",
            "s/gt.occ",
            "--gt",
            "s/gt.occ",
            "--panoptic",
            "--out",
            "same.json",
        ],
        tmp.path(),
    ));
    assert_eq!(json(&tmp.path().join("same.json"))["raypq"]["raypq"], 1.0);
    ok(&occray(
        &[
            "eval",
            "--pred",
            "s/pred.occ",
            "--gt",
            "s/gt.occ",
            "--panoptic",
            "--out",
            "drop.json",
        ],
        tmp.path(),
    ));
    let r = json(&tmp.path().join("drop.json"));
    let pq = r["raypq"]["raypq"].as_f64().unwrap();
    assert!(pq < 1.0, "{pq}");
    let fns: u64 = r["raypq"]["per_threshold"][0]["per_class"]
        .as_object()
        .unwrap()
        .values()
        .map(|c| c["fn"].as_u64().unwrap())
        .sum();
    assert_eq!(fns, 1);
}

#[test]
fn input_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    wall(tmp.path(), "w", "0");
    ok(&occray(
        &[
            "synth",
            "instances",
            "--seed",
            "1",
            "--n",
            "2",
            "--out-dir",
            "i",
        ],
        tmp.path(),
    ));

    let out = occray(
        &["eval", "--pred", "missing.occ", "--gt", "w/gt.occ"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.occ"));

    let out = occray(
        &["eval", "--pred", "i/gt.occ", "--gt", "w/gt.occ"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("i/gt.occ"));

    fs::write(tmp.path().join("junk.occ"), b"NOPE").unwrap();
    assert_eq!(
        occray(&["stats", "junk.occ"], tmp.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        occray(
            &[
                "eval",
                "--pred",
                "w/gt.occ",
                "--gt",
                "w/gt.occ",
                "--thresholds",
                "0"
            ],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        occray(
            &["synth", "wall", "--shift", "0.3", "--out-dir", "x"],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        occray(
            &[
                "eval",
                "--pred",
                "i/gt.occ",
                "--gt",
                "i/gt.occ",
                "--voxel-miou",
                "--use-visible-mask"
            ],
            tmp.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn empty_evaluation_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    let g = GridGeometry::new([8, 8, 4], Vec3::new(-1.6, -1.6, -0.4), 0.4).unwrap();
    save_grid(
        tmp.path().join("free.occ"),
        &VoxelGrid::empty(g, ClassTaxonomy::default()).unwrap(),
    )
    .unwrap();
    let out = occray(
        &[
            "eval", "--pred", "free.occ", "--gt", "free.occ", "--out", "r.json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let r = json(&tmp.path().join("r.json"));
    assert_eq!(r["empty"], true);
    assert_eq!(r["rays_total"], r["rays_excluded"]);
}

const IDENTITY_ROW: &str = "1 0 0 0 1 0 0 0 1";

fn straight_trajectory(n: usize, current: usize) -> String {
    let mut s = format!("# straight line\ncurrent {current}\n");
    for i in 0..n {
        s.push_str(&format!(
            "{} {IDENTITY_ROW} {} 0 2\n",
            i as f64 * 0.5,
            i as f64 * 0.25
        ));
    }
    s
}

#[test]
fn rays_follow_the_waypoints() {
    let tmp = TempDir::new().unwrap();
    let one = ok(&occray(
        &[
            "rays",
            "--out",
            "one.rays",
            "--azimuths",
            "4",
            "--r-max",
            "1.5",
            "--upper-elevations",
        ],
        tmp.path(),
    ));
    assert!(one.contains("rays      4\n"), "{one}");
    assert_eq!(
        fs::metadata(tmp.path().join("one.rays")).unwrap().len(),
        16 + 4 * 28
    );

    fs::write(tmp.path().join("t15.txt"), straight_trajectory(15, 14)).unwrap();
    let out = ok(&occray(
        &[
            "rays",
            "--traj",
            "t15.txt",
            "--n",
            "8",
            "--out",
            "t.rays",
            "--azimuths",
            "10",
        ],
        tmp.path(),
    ));
    assert!(
        out.contains("waypoints [0, 2, 4, 6, 8, 10, 12, 14]"),
        "{out}"
    );

    fs::write(tmp.path().join("t8.txt"), straight_trajectory(8, 3)).unwrap();
    let single = ok(&occray(&["rays", "--out", "p.rays"], tmp.path()));
    let eight = ok(&occray(
        &["rays", "--traj", "t8.txt", "--out", "e.rays"],
        tmp.path(),
    ));
    let count = |s: &str| -> u64 {
        s.lines()
            .next()
            .unwrap()
            .split_whitespace()
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(count(&eight), 8 * count(&single));
}

#[test]
fn eval_with_a_trajectory_and_several_samples() {
    let tmp = TempDir::new().unwrap();
    wall(tmp.path(), "a", "-0.4");
    wall(tmp.path(), "b", "-0.8");
    fs::write(tmp.path().join("t.txt"), straight_trajectory(12, 11)).unwrap();
    let base = [
        "eval",
        "--pred",
        "a/pred.occ",
        "--gt",
        "a/gt.occ",
        "--pred",
        "b/pred.occ",
        "--gt",
        "b/gt.occ",
        "--traj",
        "t.txt",
        "--n-waypoints",
        "4",
        "--azimuths",
        "90",
    ];
    let mut pooled = base.to_vec();
    pooled.extend(["--out", "pooled.json"]);
    ok(&occray(&pooled, tmp.path()));
    let mut averaged = base.to_vec();
    averaged.extend(["--per-sample-mean", "--out", "mean.json"]);
    ok(&occray(&averaged, tmp.path()));

    let p = json(&tmp.path().join("pooled.json"));
    let m = json(&tmp.path().join("mean.json"));
    assert_eq!(p["per_sample"].as_array().unwrap().len(), 2);
    assert_eq!(
        p["per_sample"][0]["waypoints"],
        serde_json::json!([0, 4, 7, 11])
    );
    assert_eq!(p["config"]["origins"], "trajectory");
    assert_eq!(m["config"]["aggregation"], "per_sample_mean");
    let s0 = p["per_sample"][0]["rayiou"].as_f64().unwrap();
    let s1 = p["per_sample"][1]["rayiou"].as_f64().unwrap();
    assert!((m["rayiou"].as_f64().unwrap() - (s0 + s1) / 2.0).abs() < 1e-12);
    assert_eq!(p["rays_total"], m["rays_total"]);
}

#[test]
fn stats_reports_sparsity_and_weights() {
    let tmp = TempDir::new().unwrap();
    let g = GridGeometry::new([4, 4, 2], Vec3::zeros(), 0.5).unwrap();
    save_grid(
        tmp.path().join("free.occ"),
        &VoxelGrid::empty(g, ClassTaxonomy::default()).unwrap(),
    )
    .unwrap();
    let out = ok(&occray(
        &["stats", "free.occ", "--json", "free.json"],
        tmp.path(),
    ));
    assert!(out.contains("free fraction 1.000000"), "{out}");
    let s = json(&tmp.path().join("free.json"));
    assert_eq!(s["free_fraction"], 1.0);
    assert!(s["classes"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["weight"] == 0.0));

    wall(tmp.path(), "w", "0");
    ok(&occray(
        &["stats", "w/gt.occ", "--json", "w.json"],
        tmp.path(),
    ));
    let s = json(&tmp.path().join("w.json"));
    let walls = json(&tmp.path().join("w/manifest.json"))["gt_wall_voxels"]
        .as_u64()
        .unwrap();
    assert_eq!(walls, 200 * 16);
    assert_eq!(
        s["free_fraction"].as_f64().unwrap(),
        1.0 - walls as f64 / 640_000.0
    );
    let total = s["total"].as_f64().unwrap();
    for c in s["classes"].as_array().unwrap() {
        let (m, w) = (c["count"].as_f64().unwrap(), c["weight"].as_f64().unwrap());
        if m > 0.0 {
            assert_eq!(w * m, walls as f64);
            assert!(w * m <= total);
        }
    }
}
