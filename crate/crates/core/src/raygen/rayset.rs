use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::Pose;
use crate::error::{FormatError, RayError};
use crate::Vec3;

pub const RAYS_MAGIC: [u8; 4] = *b"RAYS";
pub const RAYS_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
    /// Position of the originating pose in the waypoint list.
    pub waypoint_id: u32,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3, waypoint_id: u32) -> Self {
        Self {
            origin,
            direction,
            waypoint_id,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RaySet {
    pub rays: Vec<Ray>,
}

impl RaySet {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }
}

/// Replicates the sensor-frame `pattern` at every pose, pose-major.
pub fn build_query_rays(pattern: &[Vec3], origins: &[Pose]) -> Result<RaySet, RayError> {
    if pattern.is_empty() {
        return Err(RayError::Config("direction pattern is empty".into()));
    }
    let mut rays = Vec::with_capacity(pattern.len() * origins.len());
    for (id, pose) in origins.iter().enumerate() {
        let id = u32::try_from(id).map_err(|_| RayError::Config("too many waypoints".into()))?;
        for u in pattern {
            rays.push(Ray::new(pose.translation, pose.rotation * u, id));
        }
    }
    Ok(RaySet { rays })
}

/// Writes the RAYS v1 format: magic, u32 version, u64 count, then per ray
/// 3 x f32 origin, 3 x f32 direction, u32 waypoint id; little-endian.
pub fn write_rays<W: Write>(writer: &mut W, rays: &RaySet) -> Result<(), FormatError> {
    writer.write_all(&RAYS_MAGIC)?;
    writer.write_all(&RAYS_VERSION.to_le_bytes())?;
    writer.write_all(&(rays.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(rays.len() * 28);
    for r in &rays.rays {
        for v in r.origin.iter().chain(r.direction.iter()) {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        buf.extend_from_slice(&r.waypoint_id.to_le_bytes());
    }
    writer.write_all(&buf)?;
    Ok(())
}

pub fn read_rays<R: Read>(reader: &mut R) -> Result<RaySet, FormatError> {
    let mut head = [0u8; 16];
    reader.read_exact(&mut head)?;
    let magic: [u8; 4] = head[0..4].try_into().expect("4 bytes");
    if magic != RAYS_MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
    if version != RAYS_VERSION {
        return Err(FormatError::BadVersion(version));
    }
    let count = u64::from_le_bytes(head[8..16].try_into().expect("8 bytes"));
    let count = usize::try_from(count)
        .map_err(|_| FormatError::Invalid(format!("ray count {count} too large")))?;
    let mut rays = Vec::new();
    let mut rec = [0u8; 28];
    for _ in 0..count {
        reader.read_exact(&mut rec)?;
        let f = |i: usize| {
            f32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().expect("4 bytes")) as f64
        };
        rays.push(Ray::new(
            Vec3::new(f(0), f(1), f(2)),
            Vec3::new(f(3), f(4), f(5)),
            u32::from_le_bytes(rec[24..28].try_into().expect("4 bytes")),
        ));
    }
    Ok(RaySet { rays })
}
