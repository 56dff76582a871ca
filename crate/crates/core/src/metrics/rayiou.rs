use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_thresholds;
use crate::error::MetricsError;
use crate::grid::ClassTaxonomy;
use crate::raycast::Hit;

/// Depth thresholds (meters) of the standard protocol.
pub const DEFAULT_THRESHOLDS: [f64; 3] = [1.0, 2.0, 4.0];

/// First hits of one query ray in the ground truth and the prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayEvalSample {
    pub gt: Option<Hit>,
    pub pred: Option<Hit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayOutcome {
    /// Ground truth hit nothing; the ray does not count.
    Excluded,
    TruePositive(usize),
    /// Prediction hit nothing.
    FalseNegative(usize),
    /// Wrong class or depth: FN for the ground-truth class and FP for the predicted
    /// one (possibly the same class).
    Mismatch {
        gt: usize,
        pred: usize,
    },
}

/// Depth comparison uses `<=`.
pub fn classify_ray(sample: &RayEvalSample, tau: f64) -> RayOutcome {
    match (&sample.gt, &sample.pred) {
        (None, _) => RayOutcome::Excluded,
        (Some(g), None) => RayOutcome::FalseNegative(g.class_index),
        (Some(g), Some(p)) => {
            if p.class_index == g.class_index && (p.distance - g.distance).abs() <= tau {
                RayOutcome::TruePositive(g.class_index)
            } else {
                RayOutcome::Mismatch {
                    gt: g.class_index,
                    pred: p.class_index,
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ClassCounts {
    pub fn support(&self) -> u64 {
        self.tp + self.fp + self.fn_
    }

    /// `None` when the class never appeared.
    pub fn iou(&self) -> Option<f64> {
        match self.support() {
            0 => None,
            s => Some(self.tp as f64 / s as f64),
        }
    }

    fn add(&mut self, other: &ClassCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

/// Per-threshold, per-class TP/FP/FN tallies. Integer sums, so accumulation order
/// (and therefore parallelism) never changes the result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    thresholds: Vec<f64>,
    /// `counts[threshold][class]`.
    counts: Vec<Vec<ClassCounts>>,
    rays_total: u64,
    rays_excluded: u64,
}

impl ConfusionCounts {
    pub fn new(thresholds: &[f64], n_classes: usize) -> Result<Self, MetricsError> {
        check_thresholds(thresholds)?;
        Ok(Self {
            thresholds: thresholds.to_vec(),
            counts: vec![vec![ClassCounts::default(); n_classes]; thresholds.len()],
            rays_total: 0,
            rays_excluded: 0,
        })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn rays_total(&self) -> u64 {
        self.rays_total
    }

    pub fn rays_excluded(&self) -> u64 {
        self.rays_excluded
    }

    pub fn counts(&self, threshold_index: usize, class: usize) -> ClassCounts {
        self.counts[threshold_index][class]
    }

    pub fn add_sample(&mut self, sample: &RayEvalSample) {
        self.rays_total += 1;
        if sample.gt.is_none() {
            self.rays_excluded += 1;
            return;
        }
        for (ti, &tau) in self.thresholds.iter().enumerate() {
            let row = &mut self.counts[ti];
            match classify_ray(sample, tau) {
                RayOutcome::Excluded => unreachable!("gt hit present"),
                RayOutcome::TruePositive(c) => row[c].tp += 1,
                RayOutcome::FalseNegative(c) => row[c].fn_ += 1,
                RayOutcome::Mismatch { gt, pred } => {
                    row[gt].fn_ += 1;
                    row[pred].fp += 1;
                }
            }
        }
    }

    /// Pools another tally into this one (micro-averaging across samples).
    pub fn merge(&mut self, other: &ConfusionCounts) -> Result<(), MetricsError> {
        let classes = |c: &ConfusionCounts| c.counts.first().map(Vec::len);
        if other.thresholds != self.thresholds || classes(other) != classes(self) {
            return Err(MetricsError::ShapeMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                x.add(y);
            }
        }
        self.rays_total += other.rays_total;
        self.rays_excluded += other.rays_excluded;
        Ok(())
    }

    /// Accumulates a batch of samples, in parallel on the current rayon pool.
    pub fn accumulate(&mut self, samples: &[RayEvalSample]) {
        let n_classes = self.counts.first().map_or(0, Vec::len);
        let thresholds = self.thresholds.clone();
        let empty = || ConfusionCounts {
            thresholds: thresholds.clone(),
            counts: vec![vec![ClassCounts::default(); n_classes]; thresholds.len()],
            rays_total: 0,
            rays_excluded: 0,
        };
        let batch = samples
            .par_chunks(4096)
            .map(|chunk| {
                let mut c = empty();
                for s in chunk {
                    c.add_sample(s);
                }
                c
            })
            .reduce(empty, |mut a, b| {
                a.merge(&b).expect("same shape");
                a
            });
        self.merge(&batch).expect("same shape");
    }

    pub fn report(&self, taxonomy: &ClassTaxonomy) -> RayIoUReport {
        let per_threshold: Vec<ThresholdReport> = self
            .thresholds
            .iter()
            .zip(&self.counts)
            .map(|(&tau, row)| {
                let mut per_class = BTreeMap::new();
                let mut sum = 0.0;
                let mut observed = 0usize;
                for c in taxonomy.semantic_classes() {
                    let counts = row.get(c).copied().unwrap_or_default();
                    let iou = counts.iou();
                    if let Some(v) = iou {
                        sum += v;
                        observed += 1;
                    }
                    let name = taxonomy.name(c).unwrap_or_default().to_string();
                    per_class.insert(name, ClassIou { counts, iou });
                }
                ThresholdReport {
                    tau,
                    per_class,
                    mean: if observed == 0 {
                        0.0
                    } else {
                        sum / observed as f64
                    },
                    classes_evaluated: observed,
                }
            })
            .collect();
        let rayiou = per_threshold.iter().map(|t| t.mean).sum::<f64>() / per_threshold.len() as f64;
        RayIoUReport {
            thresholds_m: self.thresholds.clone(),
            per_threshold,
            rayiou,
            rays_total: self.rays_total,
            rays_excluded: self.rays_excluded,
            empty: self.rays_total == self.rays_excluded,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassIou {
    #[serde(flatten)]
    pub counts: ClassCounts,
    /// `null` for classes with no TP, FP or FN; those are left out of the mean.
    pub iou: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub tau: f64,
    pub per_class: BTreeMap<String, ClassIou>,
    pub mean: f64,
    pub classes_evaluated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayIoUReport {
    pub thresholds_m: Vec<f64>,
    pub per_threshold: Vec<ThresholdReport>,
    /// Mean of the per-threshold means.
    pub rayiou: f64,
    pub rays_total: u64,
    pub rays_excluded: u64,
    /// No ray hit anything in the ground truth; `rayiou` is reported as 0.
    pub empty: bool,
}

impl RayIoUReport {
    pub fn class_iou(&self, threshold_index: usize, class_name: &str) -> Option<f64> {
        self.per_threshold
            .get(threshold_index)?
            .per_class
            .get(class_name)?
            .iou
    }
}

pub fn rayiou(
    samples: &[RayEvalSample],
    thresholds: &[f64],
    taxonomy: &ClassTaxonomy,
) -> Result<RayIoUReport, MetricsError> {
    let mut counts = ConfusionCounts::new(thresholds, taxonomy.len())?;
    counts.accumulate(samples);
    Ok(counts.report(taxonomy))
}
