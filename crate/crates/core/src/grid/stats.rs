use serde::{Deserialize, Serialize};

use super::VoxelGrid;
use crate::error::GridError;

/// Per-class voxel counts of a grid and the share of free voxels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsityStats {
    /// Voxel count per taxonomy class, indexed by label.
    pub counts: Vec<u64>,
    pub total: u64,
    pub free_fraction: f64,
}

pub fn sparsity_stats(grid: &VoxelGrid) -> SparsityStats {
    let mut counts = vec![0u64; grid.taxonomy().len()];
    for &label in grid.labels() {
        counts[label as usize] += 1;
    }
    let total = grid.voxel_count() as u64;
    let free_fraction = counts[grid.taxonomy().free_index()] as f64 / total as f64;
    SparsityStats {
        counts,
        total,
        free_fraction,
    }
}

/// Inverse-frequency class weights `w_c = sum(M) / M_c`; classes with no voxels get 0.
pub fn class_balance_weights(counts: &[u64]) -> Result<Vec<f64>, GridError> {
    if counts.is_empty() {
        return Err(GridError::NoClasses);
    }
    let total: u64 = counts.iter().sum();
    Ok(counts
        .iter()
        .map(|&m| if m == 0 { 0.0 } else { total as f64 / m as f64 })
        .collect())
}
