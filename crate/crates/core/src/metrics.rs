//! Temporal IoU and Recall@n at IoU ≥ m.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A time interval in seconds, `start ≤ end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::NonFinite);
        }
        if start > end {
            return Err(Error::InvertedInterval { start, end });
        }
        Ok(Self { start, end })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    /// Ranked, best first.
    pub predictions: Vec<Interval>,
    pub ground_truth: Interval,
}

/// Intersection over union. Two zero-length intervals score 1 only when equal.
pub fn temporal_iou(a: Interval, b: Interval) -> Result<f64> {
    for iv in [a, b] {
        if iv.start > iv.end {
            return Err(Error::InvertedInterval {
                start: iv.start,
                end: iv.end,
            });
        }
    }
    let inter = (a.end.min(b.end) - a.start.max(b.start)).max(0.0);
    let union = (a.end - a.start) + (b.end - b.start) - inter;
    if union <= 0.0 {
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    Ok((inter / union).clamp(0.0, 1.0))
}

/// Fraction of records whose first `n` predictions include one with IoU ≥ `m`.
pub fn recall_at(records: &[EvalRecord], n: usize, m: f64) -> Result<f64> {
    if n == 0 || !(m > 0.0 && m <= 1.0) {
        return Err(Error::InvalidRecallParams { n, m });
    }
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut hits = 0usize;
    for r in records {
        let mut hit = false;
        for p in r.predictions.iter().take(n) {
            if temporal_iou(*p, r.ground_truth)? >= m {
                hit = true;
                break;
            }
        }
        hits += usize::from(hit);
    }
    Ok(hits as f64 / records.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn iou_examples() {
        assert!((temporal_iou(iv(0.0, 10.0), iv(5.0, 15.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(temporal_iou(iv(2.0, 7.5), iv(2.0, 7.5)).unwrap(), 1.0);
        assert_eq!(temporal_iou(iv(0.0, 1.0), iv(2.0, 3.0)).unwrap(), 0.0);
        assert_eq!(temporal_iou(iv(1.0, 1.0), iv(1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(temporal_iou(iv(1.0, 1.0), iv(2.0, 2.0)).unwrap(), 0.0);
        assert_eq!(temporal_iou(iv(1.0, 1.0), iv(0.0, 2.0)).unwrap(), 0.0);
        let bad = Interval {
            start: 3.0,
            end: 1.0,
        };
        assert!(matches!(
            temporal_iou(bad, iv(0.0, 1.0)),
            Err(Error::InvertedInterval { .. })
        ));
        assert!(Interval::new(3.0, 1.0).is_err());
    }

    fn record(id: &str, preds: &[(f64, f64)], truth: (f64, f64)) -> EvalRecord {
        EvalRecord {
            id: id.into(),
            predictions: preds.iter().map(|&(a, b)| iv(a, b)).collect(),
            ground_truth: iv(truth.0, truth.1),
        }
    }

    #[test]
    fn recall_examples() {
        let perfect = vec![
            record("a", &[(1.0, 4.0)], (1.0, 4.0)),
            record("b", &[(0.0, 2.0)], (0.0, 2.0)),
        ];
        assert_eq!(recall_at(&perfect, 1, 0.7).unwrap(), 1.0);
        let miss = vec![record("a", &[(10.0, 12.0)], (1.0, 4.0))];
        assert_eq!(recall_at(&miss, 5, 0.1).unwrap(), 0.0);
        let mixed = vec![
            record("a", &[(1.0, 4.0), (8.0, 9.0)], (1.0, 4.0)),
            record("b", &[(8.0, 9.0), (0.0, 2.0)], (0.0, 2.0)),
        ];
        assert_eq!(recall_at(&mixed, 1, 0.5).unwrap(), 0.5);
        assert_eq!(recall_at(&mixed, 2, 0.5).unwrap(), 1.0);
        assert_eq!(recall_at(&[], 1, 0.5).unwrap_err(), Error::EmptyRecords);
        assert!(recall_at(&mixed, 0, 0.5).is_err());
        assert!(recall_at(&mixed, 1, 0.0).is_err());
    }
}
