use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::VoxelCoord;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredVoxel {
    pub coord: VoxelCoord,
    pub score: f64,
}

/// Voxels carrying an occupancy score, as produced by a coarse-to-fine decoder stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoredVoxelSet {
    pub entries: Vec<ScoredVoxel>,
}

impl ScoredVoxelSet {
    pub fn new(entries: Vec<ScoredVoxel>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Keeps the `k` highest-scoring voxels. Equal scores prefer the smaller linear index,
/// which for the z-fastest layout is the lexicographically smaller `(x, y, z)`.
pub fn prune_topk(set: &ScoredVoxelSet, k: usize) -> ScoredVoxelSet {
    let mut ranked = set.entries.clone();
    ranked.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.coord.cmp(&b.coord))
    });
    ranked.truncate(k);
    ScoredVoxelSet { entries: ranked }
}

/// Keeps voxels scoring at least `theta`, preserving input order.
pub fn prune_threshold(set: &ScoredVoxelSet, theta: f64) -> ScoredVoxelSet {
    ScoredVoxelSet {
        entries: set
            .entries
            .iter()
            .copied()
            .filter(|e| e.score >= theta)
            .collect(),
    }
}
