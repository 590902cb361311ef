//! Scores: accuracy, harmonic mean, object-level edit distance, F1,
//! Jaccard and count MSE.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::scene::ObjectKind;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("metric `{0}` is undefined on empty input")]
    EmptyInput(&'static str),
    #[error("length mismatch: {pred} predictions vs {gt} ground-truth values")]
    LengthMismatch { pred: usize, gt: usize },
    #[error("brute-force oracle supports at most {max} objects per side, got {pred} and {gt}")]
    TooLarge { max: usize, pred: usize, gt: usize },
}

/// Fraction of `true` entries.
pub fn accuracy(correct: &[bool]) -> Result<f64, MetricError> {
    if correct.is_empty() {
        return Err(MetricError::EmptyInput("accuracy"));
    }
    Ok(correct.iter().filter(|c| **c).count() as f64 / correct.len() as f64)
}

/// `2vi / (v + i)`, zero when both are zero.
pub fn harmonic_mean(visible: f64, invisible: f64) -> f64 {
    let sum = visible + invisible;
    if sum == 0.0 {
        0.0
    } else {
        2.0 * visible * invisible / sum
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchBreakdown {
    pub n_exact: usize,
    /// Same shape, different color.
    pub n_partial_shape: usize,
    /// Same color, different shape.
    pub n_partial_color: usize,
    pub n_missed_gt: usize,
    pub n_extra_pred: usize,
}

impl MatchBreakdown {
    pub fn n_partial(&self) -> usize {
        self.n_partial_shape + self.n_partial_color
    }

    pub fn cost(&self, penalize_extra: bool) -> u64 {
        let extra = if penalize_extra { self.n_extra_pred } else { 0 };
        (self.n_partial() + 2 * self.n_missed_gt + extra) as u64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EditDistanceOptions {
    /// Charge 1 per unmatched prediction. Off by default: hallucinated
    /// objects are free.
    pub penalize_extra: bool,
}

fn shares_one_feature(a: ObjectKind, b: ObjectKind) -> bool {
    (a.shape == b.shape) != (a.color == b.color)
}

fn counts(items: &[ObjectKind]) -> BTreeMap<ObjectKind, usize> {
    let mut map = BTreeMap::new();
    for k in items {
        *map.entry(*k).or_insert(0) += 1;
    }
    map
}

/// Removes the multiset intersection; returns (exact count, pred rest, gt rest).
fn split_exact(pred: &[ObjectKind], gt: &[ObjectKind]) -> (usize, Vec<ObjectKind>, Vec<ObjectKind>) {
    let mut remaining = counts(pred);
    let mut exact = 0;
    let mut gt_rest = Vec::new();
    for k in gt {
        match remaining.get_mut(k) {
            Some(n) if *n > 0 => {
                *n -= 1;
                exact += 1;
            }
            _ => gt_rest.push(*k),
        }
    }
    let pred_rest = remaining
        .into_iter()
        .flat_map(|(k, n)| std::iter::repeat_n(k, n))
        .collect();
    (exact, pred_rest, gt_rest)
}

/// Maximum bipartite matching (augmenting paths); `match_of_pred[j]` is the
/// gt index matched to prediction `j`.
fn max_matching(gt: &[ObjectKind], pred: &[ObjectKind]) -> Vec<Option<usize>> {
    fn augment(
        g: usize,
        gt: &[ObjectKind],
        pred: &[ObjectKind],
        seen: &mut [bool],
        match_of_pred: &mut [Option<usize>],
    ) -> bool {
        for j in 0..pred.len() {
            if seen[j] || !shares_one_feature(gt[g], pred[j]) {
                continue;
            }
            seen[j] = true;
            let free = match match_of_pred[j] {
                None => true,
                Some(other) => augment(other, gt, pred, seen, match_of_pred),
            };
            if free {
                match_of_pred[j] = Some(g);
                return true;
            }
        }
        false
    }
    let mut match_of_pred = vec![None; pred.len()];
    for g in 0..gt.len() {
        let mut seen = vec![false; pred.len()];
        augment(g, gt, pred, &mut seen, &mut match_of_pred);
    }
    match_of_pred
}

/// Object-level edit distance of `pred` against `gt`.
///
/// Exact matches are removed first. Among the rest, a maximum matching over
/// pairs sharing exactly one feature is taken; each matched pair costs 1 and
/// every unmatched ground-truth object costs 2. This is the minimum cost over
/// all assignments.
pub fn scene_edit_distance(
    pred: &[ObjectKind],
    gt: &[ObjectKind],
    opts: EditDistanceOptions,
) -> (u64, MatchBreakdown) {
    let (n_exact, pred_rest, gt_rest) = split_exact(pred, gt);
    let matching = max_matching(&gt_rest, &pred_rest);
    let mut b = MatchBreakdown {
        n_exact,
        ..MatchBreakdown::default()
    };
    for (j, g) in matching.iter().enumerate() {
        if let Some(g) = g {
            if gt_rest[*g].shape == pred_rest[j].shape {
                b.n_partial_shape += 1;
            } else {
                b.n_partial_color += 1;
            }
        }
    }
    let matched = b.n_partial();
    b.n_missed_gt = gt_rest.len() - matched;
    b.n_extra_pred = pred_rest.len() - matched;
    (b.cost(opts.penalize_extra), b)
}

pub const BRUTE_FORCE_MAX: usize = 8;

/// Exhaustive minimum over all injective partial assignments gt → pred.
/// Test oracle for [`scene_edit_distance`].
///
/// Without the extras penalty removing exact matches first is always
/// optimal. With it, breaking an exact pair into two partial pairs can be
/// cheaper, so exact matches are removed first there too and only the rest
/// is searched.
pub fn brute_force_edit_distance(
    pred: &[ObjectKind],
    gt: &[ObjectKind],
    opts: EditDistanceOptions,
) -> Result<u64, MetricError> {
    if pred.len() > BRUTE_FORCE_MAX || gt.len() > BRUTE_FORCE_MAX {
        return Err(MetricError::TooLarge {
            max: BRUTE_FORCE_MAX,
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    // Only pairs with something in common may be matched; anything else is
    // a miss plus an extra.
    fn pair_cost(g: ObjectKind, p: ObjectKind) -> Option<u64> {
        if g == p {
            Some(0)
        } else if shares_one_feature(g, p) {
            Some(1)
        } else {
            None
        }
    }
    fn go(i: usize, gt: &[ObjectKind], pred: &[ObjectKind], used: &mut [bool], extra_cost: bool) -> u64 {
        if i == gt.len() {
            let extras = used.iter().filter(|u| !**u).count() as u64;
            return if extra_cost { extras } else { 0 };
        }
        let mut best = 2 + go(i + 1, gt, pred, used, extra_cost);
        for j in 0..pred.len() {
            if let (false, Some(c)) = (used[j], pair_cost(gt[i], pred[j])) {
                used[j] = true;
                best = best.min(c + go(i + 1, gt, pred, used, extra_cost));
                used[j] = false;
            }
        }
        best
    }
    if opts.penalize_extra {
        let (_, pred_rest, gt_rest) = split_exact(pred, gt);
        let mut used = vec![false; pred_rest.len()];
        return Ok(go(0, &gt_rest, &pred_rest, &mut used, true));
    }
    let mut used = vec![false; pred.len()];
    Ok(go(0, gt, pred, &mut used, false))
}

/// F1 with true positives counted as multiset exact matches.
pub fn f1(pred: &[ObjectKind], gt: &[ObjectKind]) -> f64 {
    if pred.is_empty() && gt.is_empty() {
        return 1.0;
    }
    let (tp, _, _) = split_exact(pred, gt);
    if tp == 0 {
        return 0.0;
    }
    let precision = tp as f64 / pred.len() as f64;
    let recall = tp as f64 / gt.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Jaccard index over de-duplicated kinds.
pub fn jaccard(pred: &[ObjectKind], gt: &[ObjectKind]) -> f64 {
    let p: BTreeSet<_> = pred.iter().copied().collect();
    let g: BTreeSet<_> = gt.iter().copied().collect();
    let union = p.union(&g).count();
    if union == 0 {
        return 1.0;
    }
    p.intersection(&g).count() as f64 / union as f64
}

pub fn mse(pred: &[f64], gt: &[f64]) -> Result<f64, MetricError> {
    if pred.len() != gt.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    if pred.is_empty() {
        return Err(MetricError::EmptyInput("mse"));
    }
    Ok(pred.iter().zip(gt).map(|(p, g)| (p - g) * (p - g)).sum::<f64>() / pred.len() as f64)
}

/// Scores for one pair of per-row object lists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowScores {
    pub f1: f64,
    pub jaccard: f64,
    pub edit_distance: u64,
}

/// Per-row F1, Jaccard and edit distance; rows missing on one side count as
/// empty.
pub fn per_row_scores(pred_rows: &[Vec<ObjectKind>], gt_rows: &[Vec<ObjectKind>], opts: EditDistanceOptions) -> Vec<RowScores> {
    let empty = Vec::new();
    (0..pred_rows.len().max(gt_rows.len()))
        .map(|i| {
            let p = pred_rows.get(i).unwrap_or(&empty);
            let g = gt_rows.get(i).unwrap_or(&empty);
            RowScores {
                f1: f1(p, g),
                jaccard: jaccard(p, g),
                edit_distance: scene_edit_distance(p, g, opts).0,
            }
        })
        .collect()
}
