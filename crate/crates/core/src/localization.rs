//! Threshold-controlled expansion of per-frame scores into ranked moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Added after shifting non-positive scores so every ratio is defined.
pub const SHIFT_EPSILON: f64 = 1e-6;

/// An inclusive frame interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub start: usize,
    pub end: usize,
    /// Mean of the per-frame scores inside the interval.
    pub score: f64,
    /// Frame the moment was grown from.
    pub seed: usize,
}

impl Moment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, frame: usize) -> bool {
        (self.start..=self.end).contains(&frame)
    }

    pub fn overlaps(&self, other: &Moment) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizerConfig {
    threshold: f64,
    max_moments: usize,
}

impl LocalizerConfig {
    pub fn new(threshold: f64, max_moments: usize) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidThreshold(threshold));
        }
        if max_moments == 0 {
            return Err(Error::ZeroMoments);
        }
        Ok(Self {
            threshold,
            max_moments,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn max_moments(&self) -> usize {
        self.max_moments
    }
}

/// Grows moments from seed frames.
///
/// The first seed is the highest-scoring frame (smallest index on ties). A
/// neighbour joins while its score divided by the score of the adjacent
/// boundary frame is at least the threshold. Further moments are seeded at the
/// best frame not yet covered and never grow into an existing moment. Moments
/// are returned in seeding order, so seed scores are non-increasing and the
/// first moment holds the global maximum.
pub fn localize(scores: &[f64], config: &LocalizerConfig) -> Result<Vec<Moment>> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio_scores: Vec<f64> = if min <= 0.0 {
        scores.iter().map(|s| s - min + SHIFT_EPSILON).collect()
    } else {
        scores.to_vec()
    };
    let t = scores.len();
    let mut covered = vec![false; t];
    let mut moments = Vec::new();
    while moments.len() < config.max_moments {
        let Some(seed) = argmax_uncovered(&ratio_scores, &covered) else {
            break;
        };
        let (mut start, mut end) = (seed, seed);
        loop {
            let mut grew = false;
            if start > 0
                && !covered[start - 1]
                && ratio_scores[start - 1] / ratio_scores[start] >= config.threshold
            {
                start -= 1;
                grew = true;
            }
            if end + 1 < t
                && !covered[end + 1]
                && ratio_scores[end + 1] / ratio_scores[end] >= config.threshold
            {
                end += 1;
                grew = true;
            }
            if !grew {
                break;
            }
        }
        covered[start..=end].iter_mut().for_each(|c| *c = true);
        let score = scores[start..=end].iter().sum::<f64>() / (end - start + 1) as f64;
        moments.push(Moment {
            start,
            end,
            score,
            seed,
        });
    }
    Ok(moments)
}

fn argmax_uncovered(scores: &[f64], covered: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &s) in scores.iter().enumerate() {
        if covered[k] {
            continue;
        }
        match best {
            Some(b) if scores[b] >= s => {}
            _ => best = Some(k),
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedMoment {
    pub start_s: f64,
    pub end_s: f64,
    pub score: f64,
}

/// Frame `k` spans `[k·d/T, (k+1)·d/T)` seconds.
pub fn predictions_to_seconds(
    moments: &[Moment],
    duration_seconds: f64,
    frames: usize,
) -> Result<Vec<TimedMoment>> {
    if !duration_seconds.is_finite() || duration_seconds <= 0.0 {
        return Err(Error::NonPositiveDuration(duration_seconds));
    }
    if frames == 0 {
        return Err(Error::EmptyScores);
    }
    let step = duration_seconds / frames as f64;
    Ok(moments
        .iter()
        .map(|m| TimedMoment {
            start_s: m.start as f64 * step,
            end_s: (m.end + 1) as f64 * step,
            score: m.score,
        })
        .collect())
}
