//! One-to-one element matching by box overlap.

use crate::layout::LayoutElement;

pub const IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

/// Indices refer to positions in the slices given to [`match_elements`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
}

impl Matching {
    pub fn gt_for_pred(&self, pred: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.pred == pred).map(|p| p.gt)
    }

    pub fn pred_for_gt(&self, gt: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.gt == gt).map(|p| p.pred)
    }
}

/// Greedy matching: candidate pairs with IoU >= 0.5 are taken in order of
/// descending IoU (ties by pred then gt position), skipping any element
/// already used.
pub fn match_elements(pred: &[LayoutElement], gt: &[LayoutElement]) -> Matching {
    let mut candidates = Vec::new();
    for (pi, p) in pred.iter().enumerate() {
        for (gi, g) in gt.iter().enumerate() {
            let iou = p.bbox.iou(&g.bbox);
            if iou >= IOU_THRESHOLD {
                candidates.push(MatchedPair { pred: pi, gt: gi, iou });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.pred.cmp(&b.pred))
            .then(a.gt.cmp(&b.gt))
    });

    let mut pred_used = vec![false; pred.len()];
    let mut gt_used = vec![false; gt.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if pred_used[c.pred] || gt_used[c.gt] {
            continue;
        }
        pred_used[c.pred] = true;
        gt_used[c.gt] = true;
        pairs.push(c);
    }
    pairs.sort_by_key(|p| p.gt);
    Matching {
        pairs,
        unmatched_pred: (0..pred.len()).filter(|&i| !pred_used[i]).collect(),
        unmatched_gt: (0..gt.len()).filter(|&i| !gt_used[i]).collect(),
    }
}
