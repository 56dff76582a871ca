use std::fmt::Write as _;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::RayError;
use crate::Vec3;

/// Number of waypoints rays are cast from by default.
pub const DEFAULT_WAYPOINTS: usize = 8;

const ROTATION_TOLERANCE: f64 = 1e-6;

/// Sensor pose in the evaluation frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
    /// Seconds.
    pub timestamp: f64,
}

impl Pose {
    pub fn new(
        rotation: Matrix3<f64>,
        translation: Vec3,
        timestamp: f64,
    ) -> Result<Self, RayError> {
        let orthogonality = (rotation.transpose() * rotation - Matrix3::identity())
            .abs()
            .max();
        if !(orthogonality <= ROTATION_TOLERANCE) {
            return Err(RayError::BadPose(format!(
                "rotation is not orthonormal (max |R^T R - I| = {orthogonality:e})"
            )));
        }
        if (rotation.determinant() - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(RayError::BadPose("rotation has determinant != 1".into()));
        }
        if !translation.iter().all(|v| v.is_finite()) || !timestamp.is_finite() {
            return Err(RayError::BadPose(
                "non-finite translation or timestamp".into(),
            ));
        }
        Ok(Self {
            rotation,
            translation,
            timestamp,
        })
    }

    pub fn identity() -> Self {
        Self::at(Vec3::zeros(), 0.0)
    }

    /// Unrotated pose at `translation`.
    pub fn at(translation: Vec3, timestamp: f64) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
            timestamp,
        }
    }

    /// Pose rotated by `yaw` radians about +z.
    pub fn from_yaw(yaw: f64, translation: Vec3, timestamp: f64) -> Self {
        let (s, c) = yaw.sin_cos();
        Self {
            rotation: Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            translation,
            timestamp,
        }
    }
}

/// Time-ordered ego poses plus the index of the evaluated keyframe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    poses: Vec<Pose>,
    current_index: usize,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose>, current_index: usize) -> Result<Self, RayError> {
        if poses.is_empty() {
            return Err(RayError::BadPose("trajectory has no poses".into()));
        }
        if current_index >= poses.len() {
            return Err(RayError::BadPose(format!(
                "current index {current_index} out of range for {} poses",
                poses.len()
            )));
        }
        if let Some(i) = poses
            .windows(2)
            .position(|w| w[1].timestamp <= w[0].timestamp)
        {
            return Err(RayError::BadPose(format!(
                "timestamps not strictly increasing at pose {}",
                i + 1
            )));
        }
        Ok(Self {
            poses,
            current_index,
        })
    }

    pub fn single(pose: Pose) -> Self {
        Self {
            poses: vec![pose],
            current_index: 0,
        }
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn current_index(&self) -> usize {
        self.current_index
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Parses the text format: one pose per line as
    /// `timestamp r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz`, `#` comments, and an
    /// optional `current <index>` line (default 0).
    pub fn parse(text: &str) -> Result<Self, RayError> {
        let mut poses = Vec::new();
        let mut current = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| RayError::BadPose(format!("line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix("current") {
                let idx = rest
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| err(format!("bad current index: {e}")))?;
                if current.replace(idx).is_some() {
                    return Err(err("duplicate current line".into()));
                }
                continue;
            }
            let values = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(format!("bad number: {e}")))?;
            if values.len() != 13 {
                return Err(err(format!("expected 13 values, found {}", values.len())));
            }
            let rotation = Matrix3::from_row_slice(&values[1..10]);
            let translation = Vec3::new(values[10], values[11], values[12]);
            poses
                .push(Pose::new(rotation, translation, values[0]).map_err(|e| err(e.to_string()))?);
        }
        Self::new(poses, current.unwrap_or(0))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("current {}\n", self.current_index);
        for p in &self.poses {
            let r = &p.rotation;
            let _ = write!(out, "{}", p.timestamp);
            for i in 0..3 {
                for j in 0..3 {
                    let _ = write!(out, " {}", r[(i, j)]);
                }
            }
            let t = &p.translation;
            let _ = writeln!(out, " {} {} {}", t.x, t.y, t.z);
        }
        out
    }
}

/// Indices of up to `n` waypoints evenly spaced over the trajectory, always
/// including the current keyframe. Ascending.
pub fn temporal_indices(traj: &Trajectory, n: usize) -> Result<Vec<usize>, RayError> {
    if n == 0 {
        return Err(RayError::Config("waypoint count must be at least 1".into()));
    }
    let len = traj.len();
    if len <= n {
        return Ok((0..len).collect());
    }
    let current = traj.current_index();
    if n == 1 {
        return Ok(vec![current]);
    }
    let span = (len - 1) as f64;
    let mut picks: Vec<usize> = (0..n)
        .map(|i| (i as f64 * span / (n - 1) as f64).round() as usize)
        .collect();
    if !picks.contains(&current) {
        let nearest = picks
            .iter()
            .enumerate()
            .min_by_key(|&(_, &p)| p.abs_diff(current))
            .map(|(i, _)| i)
            .expect("n >= 2");
        picks[nearest] = current;
    }
    picks.sort_unstable();
    picks.dedup();
    Ok(picks)
}

pub fn temporal_origins(traj: &Trajectory, n: usize) -> Result<Vec<Pose>, RayError> {
    Ok(temporal_indices(traj, n)?
        .into_iter()
        .map(|i| traj.poses()[i])
        .collect())
}
