use serde::Serialize;

use crate::acid::Feature;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    /// Confidence of the tie group that closes this point.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrCurve {
    pub feature_class: Feature,
    pub points: Vec<PrPoint>,
    pub positives: usize,
    pub total: usize,
}

impl PrCurve {
    /// Recall is undefined without positive ground-truth instances.
    pub fn recall_defined(&self) -> bool {
        self.positives > 0
    }

    /// Largest precision among points with recall at least `recall`.
    pub fn interpolated_precision(&self, recall: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.recall >= recall - 1e-12)
            .map(|p| p.precision)
            .max_by(f64::total_cmp)
    }

    /// Points whose threshold is strictly positive.
    pub fn predicted(&self) -> impl Iterator<Item = &PrPoint> {
        self.points.iter().filter(|p| p.threshold > 0.0)
    }
}

/// Precision-recall curve of `(confidence, label)` pairs, swept from the
/// highest confidence down; equal confidences form one point.
pub fn pr_curve_from(feature_class: Feature, scored: &[(f64, bool)]) -> PrCurve {
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let positives = sorted.iter().filter(|s| s.1).count();
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            recall: if positives > 0 {
                tp as f64 / positives as f64
            } else {
                f64::NAN
            },
            precision: tp as f64 / (tp + fp) as f64,
            threshold: t,
        });
    }
    PrCurve {
        feature_class,
        points,
        positives,
        total: sorted.len(),
    }
}

/// Largest shortfall of `a`'s interpolated precision below `b`'s over the
/// recall levels of both curves.
pub fn precision_gap(a: &PrCurve, b: &PrCurve) -> f64 {
    let levels = a
        .points
        .iter()
        .chain(&b.points)
        .map(|p| p.recall)
        .filter(|r| r.is_finite());
    levels
        .map(|r| {
            b.interpolated_precision(r).unwrap_or(0.0) - a.interpolated_precision(r).unwrap_or(0.0)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
