//! The OCCG v1 binary grid format.
//!
//! All integers and floats are little-endian:
//!
//! ```text
//! magic      b"OCCG"
//! version    u32 = 1
//! W, H, D    u32 x 3
//! origin     f32 x 3
//! voxel_size f32
//! flags      u32   bit0: instances present, bit1: visible mask present
//! n_names    u32, then n_names x (u16 length, UTF-8 bytes)
//! free_index u32
//! labels     W*H*D x u8, z fastest
//! instances  W*H*D x u16         (if bit0)
//! visible    W*H*D x u8 (0 / 1)  (if bit1)
//! ```
//!
//! Geometry is stored as f32, so a grid read back carries the f32-rounded origin and
//! voxel size.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ClassTaxonomy, GridGeometry, VoxelGrid};
use crate::error::FormatError;
use crate::Vec3;

pub const MAGIC: [u8; 4] = *b"OCCG";
pub const VERSION: u32 = 1;

const FLAG_INSTANCES: u32 = 1;
const FLAG_VISIBLE: u32 = 1 << 1;

pub fn write_grid<W: Write>(writer: &mut W, grid: &VoxelGrid) -> Result<(), FormatError> {
    let g = grid.geometry();
    writer.write_all(&MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    for &d in &g.dims {
        writer.write_all(&to_u32(d, "dimension")?.to_le_bytes())?;
    }
    for &o in g.origin.iter() {
        writer.write_all(&(o as f32).to_le_bytes())?;
    }
    writer.write_all(&(g.voxel_size as f32).to_le_bytes())?;

    let mut flags = 0;
    if grid.instances().is_some() {
        flags |= FLAG_INSTANCES;
    }
    if grid.visible().is_some() {
        flags |= FLAG_VISIBLE;
    }
    writer.write_all(&flags.to_le_bytes())?;

    let taxonomy = grid.taxonomy();
    writer.write_all(&to_u32(taxonomy.len(), "class count")?.to_le_bytes())?;
    for name in taxonomy.names() {
        let len = u16::try_from(name.len())
            .map_err(|_| FormatError::Invalid(format!("class name {name:?} too long")))?;
        writer.write_all(&len.to_le_bytes())?;
        writer.write_all(name.as_bytes())?;
    }
    writer.write_all(&to_u32(taxonomy.free_index(), "free index")?.to_le_bytes())?;

    writer.write_all(grid.labels())?;
    if let Some(ids) = grid.instances() {
        let mut buf = Vec::with_capacity(ids.len() * 2);
        for id in ids {
            buf.extend_from_slice(&id.to_le_bytes());
        }
        writer.write_all(&buf)?;
    }
    if let Some(mask) = grid.visible() {
        let buf: Vec<u8> = mask.iter().map(|&v| u8::from(v)).collect();
        writer.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_grid<R: Read>(reader: &mut R) -> Result<VoxelGrid, FormatError> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = read_u32(reader)?;
    if version != VERSION {
        return Err(FormatError::BadVersion(version));
    }
    let dims = [
        read_u32(reader)? as usize,
        read_u32(reader)? as usize,
        read_u32(reader)? as usize,
    ];
    let origin = Vec3::new(
        read_f32(reader)? as f64,
        read_f32(reader)? as f64,
        read_f32(reader)? as f64,
    );
    let voxel_size = read_f32(reader)? as f64;
    let geometry = GridGeometry::new(dims, origin, voxel_size)?;
    let flags = read_u32(reader)?;
    if flags & !(FLAG_INSTANCES | FLAG_VISIBLE) != 0 {
        return Err(FormatError::Invalid(format!("unknown flags {flags:#x}")));
    }

    let n_names = read_u32(reader)? as usize;
    if n_names > 256 {
        return Err(FormatError::Invalid(format!(
            "{n_names} classes exceed u8 labels"
        )));
    }
    let mut names = Vec::with_capacity(n_names);
    for _ in 0..n_names {
        let len = read_u16(reader)? as usize;
        let mut bytes = vec![0u8; len];
        reader.read_exact(&mut bytes)?;
        names.push(String::from_utf8(bytes).map_err(|_| FormatError::BadName)?);
    }
    let free_index = read_u32(reader)? as usize;
    let taxonomy = ClassTaxonomy::new(names, free_index)?;

    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| FormatError::Invalid(format!("dims {dims:?} overflow")))?;
    let mut labels = vec![0u8; n];
    reader.read_exact(&mut labels)?;
    let mut grid = VoxelGrid::new(geometry, taxonomy, labels)?;

    if flags & FLAG_INSTANCES != 0 {
        let mut buf = vec![0u8; n * 2];
        reader.read_exact(&mut buf)?;
        let ids = buf
            .chunks_exact(2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
            .collect();
        grid = grid.with_instances(ids)?;
    }
    if flags & FLAG_VISIBLE != 0 {
        let mut buf = vec![0u8; n];
        reader.read_exact(&mut buf)?;
        let mask = buf
            .into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(FormatError::Invalid(format!("visible mask byte {other}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        grid = grid.with_visible(mask)?;
    }
    Ok(grid)
}

pub fn save_grid(path: impl AsRef<Path>, grid: &VoxelGrid) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_grid(&mut w, grid)?;
    w.flush()?;
    Ok(())
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<VoxelGrid, FormatError> {
    read_grid(&mut BufReader::new(File::open(path)?))
}

fn to_u32(v: usize, what: &str) -> Result<u32, FormatError> {
    u32::try_from(v).map_err(|_| FormatError::Invalid(format!("{what} {v} exceeds u32")))
}

fn read_u16<R: Read>(r: &mut R) -> io::Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32<R: Read>(r: &mut R) -> io::Result<f32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(f32::from_le_bytes(b))
}
