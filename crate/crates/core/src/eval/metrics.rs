//! Confusion-matrix metrics and ROC points with anomalous as the positive
//! class.

use serde::{Deserialize, Serialize};

use crate::detect::ThresholdSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn from_labels(pred: &[bool], truth: &[bool]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::Dimension {
                expected: truth.len(),
                actual: pred.len(),
            });
        }
        let mut c = Self::default();
        for (&p, &t) in pred.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }

    pub fn metrics(&self) -> ConfusionMetrics {
        let (tp, fp, fn_) = (self.tp as f64, self.fp as f64, self.fn_ as f64);
        let ratio = |num: f64, den: f64| {
            if den > 0.0 {
                (num / den, false)
            } else {
                (0.0, true)
            }
        };
        let (precision, precision_undefined) = ratio(tp, tp + fp);
        let (recall, recall_undefined) = ratio(tp, tp + fn_);
        let (f1, f1_undefined) = ratio(2.0 * tp, 2.0 * tp + fp + fn_);
        let (jaccard, jaccard_undefined) = ratio(tp, tp + fp + fn_);
        ConfusionMetrics {
            confusion: *self,
            precision,
            recall,
            f1,
            jaccard,
            precision_undefined,
            recall_undefined,
            f1_undefined,
            jaccard_undefined,
        }
    }
}

/// Metrics with flags marking zero denominators (reported as 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub confusion: Confusion,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub jaccard: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
    pub jaccard_undefined: bool,
}

pub fn confusion_metrics(pred: &[bool], truth: &[bool]) -> Result<ConfusionMetrics> {
    Ok(Confusion::from_labels(pred, truth)?.metrics())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub c: f64,
    /// `None` for pooled points, whose folds use different thresholds.
    pub threshold: Option<f64>,
    pub fpr: f64,
    pub tpr: f64,
    pub confusion: Confusion,
}

impl RocPoint {
    fn from_confusion(c: f64, threshold: Option<f64>, confusion: Confusion) -> Self {
        let rate = |num: u64, den: u64| {
            if den > 0 {
                num as f64 / den as f64
            } else {
                0.0
            }
        };
        Self {
            c,
            threshold,
            fpr: rate(confusion.fp, confusion.fp + confusion.tn),
            tpr: rate(confusion.tp, confusion.tp + confusion.fn_),
            confusion,
        }
    }
}

/// One point per `c` with threshold `mu + c*sigma`, ordered by `c`.
pub fn roc_curve(
    re_totals: &[f64],
    truth: &[bool],
    c_grid: &[f64],
    train_mu: f64,
    train_sigma: f64,
) -> Result<Vec<RocPoint>> {
    if re_totals.is_empty() || c_grid.is_empty() {
        return Err(Error::param("ROC needs errors and at least one c"));
    }
    let mut grid = c_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&c| {
            let spec = ThresholdSpec::new(train_mu, train_sigma, c);
            let pred: Vec<bool> = re_totals.iter().map(|&r| spec.is_anomalous(r)).collect();
            let confusion = Confusion::from_labels(&pred, truth)?;
            Ok(RocPoint::from_confusion(c, Some(spec.value), confusion))
        })
        .collect()
}

/// Sums confusion counts point by point over curves sharing one c grid.
pub fn pool_roc(curves: &[Vec<RocPoint>]) -> Result<Vec<RocPoint>> {
    let Some(first) = curves.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(first.len());
    for (k, p) in first.iter().enumerate() {
        let mut total = Confusion::default();
        for curve in curves {
            let q = curve
                .get(k)
                .filter(|q| q.c == p.c)
                .ok_or_else(|| Error::param("ROC curves use different c grids"))?;
            total.add(&q.confusion);
        }
        out.push(RocPoint::from_confusion(p.c, None, total));
    }
    Ok(out)
}

pub fn roc_to_csv(points: &[RocPoint]) -> String {
    let mut out = String::from("c,threshold,fpr,tpr,tp,fp,tn,fn\n");
    for p in points {
        let c = p.confusion;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.c,
            p.threshold.map(|t| t.to_string()).unwrap_or_default(),
            p.fpr,
            p.tpr,
            c.tp,
            c.fp,
            c.tn,
            c.fn_
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_prediction() {
        let t = [true, false, true, false];
        let m = confusion_metrics(&t, &t).unwrap();
        assert_eq!(
            (m.precision, m.recall, m.f1, m.jaccard),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn all_negative_prediction() {
        let m = confusion_metrics(&[false; 3], &[true, false, true]).unwrap();
        assert_eq!((m.recall, m.f1), (0.0, 0.0));
        assert!(m.precision_undefined);
        assert!(!m.recall_undefined);
    }

    #[test]
    fn counts_example() {
        let c = Confusion {
            tp: 9,
            fp: 5,
            tn: 100,
            fn_: 7,
        };
        let m = c.metrics();
        assert_eq!(m.precision, 9.0 / 14.0);
        assert_eq!(m.recall, 9.0 / 16.0);
        assert_eq!(m.jaccard, 9.0 / 21.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(confusion_metrics(&[true], &[true, false]).is_err());
    }

    #[test]
    fn roc_extremes() {
        let re = [0.1, 0.5, 0.9, 0.3];
        let truth = [false, true, true, false];
        let pts = roc_curve(&re, &truth, &[1e9, -1e9], 0.5, 0.2).unwrap();
        assert_eq!(pts[0].c, -1e9);
        assert_eq!((pts[0].fpr, pts[0].tpr), (1.0, 1.0));
        assert_eq!((pts[1].fpr, pts[1].tpr), (0.0, 0.0));
    }

    #[test]
    fn pooled_roc_sums_counts() {
        let a = roc_curve(&[0.1, 0.9], &[false, true], &[0.0, 1.0], 0.5, 0.1).unwrap();
        let b = roc_curve(&[0.6, 0.2], &[false, true], &[0.0, 1.0], 0.5, 0.1).unwrap();
        let p = pool_roc(&[a, b]).unwrap();
        assert_eq!(
            p[0].confusion,
            Confusion {
                tp: 1,
                fp: 1,
                tn: 1,
                fn_: 1
            }
        );
        assert_eq!((p[0].fpr, p[0].tpr), (0.5, 0.5));
    }

    proptest! {
        #[test]
        fn f1_and_jaccard_identities(tp in 1u64..500, fp in 0u64..500, fn_ in 0u64..500) {
            let m = Confusion { tp, fp, tn: 0, fn_ }.metrics();
            let (p, r) = (m.precision, m.recall);
            prop_assert!((m.f1 - 2.0 * p * r / (p + r)).abs() < 1e-12);
            prop_assert!((m.jaccard - m.f1 / (2.0 - m.f1)).abs() < 1e-12);
        }

        #[test]
        fn roc_monotone_in_c(
            data in prop::collection::vec((0.0f64..2.0, any::<bool>()), 1..80),
            grid in prop::collection::vec(-5.0f64..5.0, 1..20),
            mu in 0.0f64..1.0,
            sigma in 0.0f64..1.0,
        ) {
            let (re, truth): (Vec<f64>, Vec<bool>) = data.into_iter().unzip();
            let pts = roc_curve(&re, &truth, &grid, mu, sigma).unwrap();
            for w in pts.windows(2) {
                prop_assert!(w[0].c <= w[1].c);
                prop_assert!(w[1].fpr <= w[0].fpr);
                prop_assert!(w[1].tpr <= w[0].tpr);
            }
        }
    }
}
