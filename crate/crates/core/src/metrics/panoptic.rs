use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{check_tau, check_thresholds, RayEvalSample};
use crate::error::MetricsError;
use crate::grid::ClassTaxonomy;
use crate::raycast::Hit;

/// Minimum instance IoU for a prediction to match a ground-truth instance.
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// A ray-level instance segment: all rays whose first hit carries `id` with class
/// `class` in sample `sample`. Instance ID 0 is never a segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceKey {
    pub sample: u32,
    pub class: usize,
    pub id: u16,
}

impl InstanceKey {
    fn of(sample: u32, hit: &Hit) -> Option<Self> {
        (hit.instance_id != 0).then_some(Self {
            sample,
            class: hit.class_index,
            id: hit.instance_id,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstancePairIou {
    pub pred: InstanceKey,
    pub gt: InstanceKey,
    pub iou: f64,
}

pub type MatchedPair = InstancePairIou;

fn is_match(sample: &RayEvalSample, tau: f64) -> bool {
    match (&sample.gt, &sample.pred) {
        (Some(g), Some(p)) => {
            p.class_index == g.class_index && (p.distance - g.distance).abs() <= tau
        }
        _ => false,
    }
}

/// Ray-set IoU of prediction segment `p` and ground-truth segment `g` over the
/// non-excluded rays of one sample: matched rays are those whose hits carry `p` and
/// `g` and count as true positives under `tau`.
pub fn ray_instance_iou(
    samples: &[RayEvalSample],
    p: InstanceKey,
    g: InstanceKey,
    tau: f64,
) -> Result<f64, MetricsError> {
    check_tau(tau)?;
    let (mut n_pred, mut n_gt, mut n_match) = (0u64, 0u64, 0u64);
    for s in samples {
        let Some(gt_hit) = &s.gt else { continue };
        let in_g = InstanceKey::of(g.sample, gt_hit) == Some(g);
        let in_p = s.pred.as_ref().and_then(|h| InstanceKey::of(p.sample, h)) == Some(p);
        n_gt += u64::from(in_g);
        n_pred += u64::from(in_p);
        n_match += u64::from(in_g && in_p && is_match(s, tau));
    }
    let union = n_pred + n_gt - n_match;
    Ok(if union == 0 {
        0.0
    } else {
        n_match as f64 / union as f64
    })
}

/// Selects all pairs with IoU above `iou_threshold`, highest IoU first.
///
/// For thresholds of at least 0.5 such pairs cannot share a segment (two segments
/// each covering more than half of a third are not disjoint), so the greedy choice
/// is also the optimal assignment; a table breaking that is rejected.
pub fn match_instances(
    table: &[InstancePairIou],
    iou_threshold: f64,
) -> Result<Vec<MatchedPair>, MetricsError> {
    if let Some(bad) = table.iter().find(|e| !(0.0..=1.0).contains(&e.iou)) {
        return Err(MetricsError::BadIou(bad.iou));
    }
    let mut candidates: Vec<InstancePairIou> = table
        .iter()
        .copied()
        .filter(|e| e.iou > iou_threshold)
        .collect();
    candidates.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then_with(|| a.pred.cmp(&b.pred))
            .then_with(|| a.gt.cmp(&b.gt))
    });
    let mut used_pred = BTreeSet::new();
    let mut used_gt = BTreeSet::new();
    let mut matched = Vec::new();
    for c in candidates {
        let fresh_p = !used_pred.contains(&c.pred);
        let fresh_g = !used_gt.contains(&c.gt);
        if fresh_p && fresh_g {
            used_pred.insert(c.pred);
            used_gt.insert(c.gt);
            matched.push(c);
        } else if iou_threshold >= 0.5 {
            return Err(MetricsError::NotDisjoint(format!(
                "pair {:?} / {:?} (IoU {}) reuses a matched segment",
                c.pred, c.gt, c.iou
            )));
        }
    }
    Ok(matched)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassPq {
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ClassPq {
    fn from_matches(ious: &[f64], fp: u64, fn_: u64) -> Self {
        let tp = ious.len() as u64;
        let sq = if tp == 0 {
            0.0
        } else {
            ious.iter().sum::<f64>() / tp as f64
        };
        let denom = tp as f64 + 0.5 * fp as f64 + 0.5 * fn_ as f64;
        let rq = if denom == 0.0 { 0.0 } else { tp as f64 / denom };
        Self {
            pq: sq * rq,
            sq,
            rq,
            tp,
            fp,
            fn_,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PqAtThreshold {
    pub tau: f64,
    pub per_class: BTreeMap<String, ClassPq>,
    /// Means over classes with at least one instance segment.
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    pub matches: Vec<MatchedPair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayPqReport {
    pub thresholds_m: Vec<f64>,
    pub iou_threshold: f64,
    pub per_threshold: Vec<PqAtThreshold>,
    /// Mean of the per-threshold class-mean PQ.
    pub raypq: f64,
    pub gt_instances: u64,
    /// The ground truth had no instance segments on evaluated rays.
    pub empty: bool,
}

/// Pools instance segments from any number of samples (micro-average).
#[derive(Clone, Debug, Default)]
pub struct PanopticAccumulator {
    pred_size: BTreeMap<InstanceKey, u64>,
    gt_size: BTreeMap<InstanceKey, u64>,
    /// Per pair, the depth error of every ray hitting both segments with equal class.
    overlaps: BTreeMap<(InstanceKey, InstanceKey), Vec<f64>>,
}

impl PanopticAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sample(&mut self, sample_index: u32, samples: &[RayEvalSample]) {
        for s in samples {
            let Some(g) = &s.gt else { continue };
            let gk = InstanceKey::of(sample_index, g);
            let pk = s
                .pred
                .as_ref()
                .and_then(|p| InstanceKey::of(sample_index, p));
            if let Some(k) = gk {
                *self.gt_size.entry(k).or_default() += 1;
            }
            if let Some(k) = pk {
                *self.pred_size.entry(k).or_default() += 1;
            }
            if let (Some(gk), Some(pk), Some(p)) = (gk, pk, &s.pred) {
                if gk.class == pk.class {
                    self.overlaps
                        .entry((pk, gk))
                        .or_default()
                        .push((p.distance - g.distance).abs());
                }
            }
        }
    }

    pub fn gt_instances(&self) -> u64 {
        self.gt_size.len() as u64
    }

    /// IoU of every overlapping (pred, gt) pair at depth threshold `tau`.
    pub fn pair_ious(&self, tau: f64) -> Vec<InstancePairIou> {
        self.overlaps
            .iter()
            .filter_map(|(&(p, g), errs)| {
                let m = errs.iter().filter(|&&e| e <= tau).count() as u64;
                if m == 0 {
                    return None;
                }
                let union = self.pred_size[&p] + self.gt_size[&g] - m;
                Some(InstancePairIou {
                    pred: p,
                    gt: g,
                    iou: m as f64 / union as f64,
                })
            })
            .collect()
    }

    pub fn at_threshold(
        &self,
        tau: f64,
        taxonomy: &ClassTaxonomy,
        iou_threshold: f64,
    ) -> Result<PqAtThreshold, MetricsError> {
        check_tau(tau)?;
        let matches = match_instances(&self.pair_ious(tau), iou_threshold)?;
        let mut classes: BTreeMap<usize, (Vec<f64>, u64, u64)> = BTreeMap::new();
        let matched_pred: BTreeSet<_> = matches.iter().map(|m| m.pred).collect();
        let matched_gt: BTreeSet<_> = matches.iter().map(|m| m.gt).collect();
        for m in &matches {
            classes.entry(m.gt.class).or_default().0.push(m.iou);
        }
        for k in self.pred_size.keys().filter(|k| !matched_pred.contains(k)) {
            classes.entry(k.class).or_default().1 += 1;
        }
        for k in self.gt_size.keys().filter(|k| !matched_gt.contains(k)) {
            classes.entry(k.class).or_default().2 += 1;
        }

        let mut per_class = BTreeMap::new();
        let (mut pq, mut sq, mut rq) = (0.0, 0.0, 0.0);
        for (&class, (ious, fp, fn_)) in &classes {
            let c = ClassPq::from_matches(ious, *fp, *fn_);
            pq += c.pq;
            sq += c.sq;
            rq += c.rq;
            let name = taxonomy
                .name(class)
                .map_or_else(|| format!("class_{class}"), str::to_string);
            per_class.insert(name, c);
        }
        let n = classes.len().max(1) as f64;
        Ok(PqAtThreshold {
            tau,
            per_class,
            pq: pq / n,
            sq: sq / n,
            rq: rq / n,
            matches,
        })
    }

    pub fn report(
        &self,
        thresholds: &[f64],
        taxonomy: &ClassTaxonomy,
        iou_threshold: f64,
    ) -> Result<RayPqReport, MetricsError> {
        check_thresholds(thresholds)?;
        let per_threshold = thresholds
            .iter()
            .map(|&tau| self.at_threshold(tau, taxonomy, iou_threshold))
            .collect::<Result<Vec<_>, _>>()?;
        let raypq = per_threshold.iter().map(|t| t.pq).sum::<f64>() / per_threshold.len() as f64;
        Ok(RayPqReport {
            thresholds_m: thresholds.to_vec(),
            iou_threshold,
            per_threshold,
            raypq,
            gt_instances: self.gt_instances(),
            empty: self.gt_size.is_empty(),
        })
    }
}

/// RayPQ of a single sample, per threshold and averaged over thresholds.
///
/// Thing classes are the classes that carry instance IDs; classes are averaged per
/// threshold before averaging over thresholds.
pub fn raypq(
    samples: &[RayEvalSample],
    thresholds: &[f64],
    taxonomy: &ClassTaxonomy,
    iou_threshold: f64,
) -> Result<RayPqReport, MetricsError> {
    let mut acc = PanopticAccumulator::new();
    acc.add_sample(0, samples);
    acc.report(thresholds, taxonomy, iou_threshold)
}
