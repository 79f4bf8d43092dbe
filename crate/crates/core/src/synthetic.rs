//! Seeded planted-moment grounding cases.
//!
//! Each case draws `M` random unit word vectors, `P` random unit phrase
//! vectors and a sentence vector equal to the normalized mean of the words.
//! One word is picked per case; every frame inside the planted moment is
//! `normalize(word + noise)` with isotropic Gaussian noise of per-coordinate
//! standard deviation `σ/√D` (expected noise norm ≈ σ). Frames outside the
//! moment are random unit vectors redrawn until their cosine with every word
//! is below [`OUTSIDE_COSINE_LIMIT`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::embedding::{cosine, l2, EmbeddingSequence};
use crate::error::{Error, Result};
use crate::metrics::Interval;

pub const OUTSIDE_COSINE_LIMIT: f64 = 0.2;
const MAX_REJECTIONS: usize = 100_000;

/// Inclusive frame span of a ground-truth moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpan {
    pub start: usize,
    pub end: usize,
}

impl FrameSpan {
    pub fn contains(&self, frame: usize) -> bool {
        (self.start..=self.end).contains(&frame)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MomentPlacement {
    Fixed(FrameSpan),
    /// Length uniform in `[min(2, T), max(min(2, T), ⌈T/2⌉)]`, start uniform.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub frames: usize,
    pub words: usize,
    pub phrases: usize,
    pub dim: usize,
    pub moment: MomentPlacement,
    pub noise_sigma: f64,
    pub seed: u64,
    pub pairs: usize,
    pub duration_s: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            frames: 6,
            words: 3,
            phrases: 1,
            dim: crate::embedding::DEFAULT_DIM,
            moment: MomentPlacement::Random,
            noise_sigma: 0.05,
            seed: 0,
            pairs: 10,
            duration_s: 30.0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::ConfigInvalid(msg.to_string()));
        if self.frames == 0 || self.words == 0 || self.phrases == 0 {
            return bad("frames, words and phrases must be at least 1");
        }
        if self.dim < 2 {
            return bad("dim must be at least 2");
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return bad("noise_sigma must be a finite non-negative number");
        }
        if !self.duration_s.is_finite() || self.duration_s <= 0.0 {
            return bad("duration_s must be positive");
        }
        if self.pairs == 0 {
            return bad("pairs must be at least 1");
        }
        if let MomentPlacement::Fixed(span) = self.moment {
            if span.start > span.end || span.end >= self.frames {
                return bad("moment must satisfy start <= end < frames");
            }
        }
        Ok(())
    }
}

/// One matched video/query pair with its planted moment.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundingCase {
    pub id: String,
    pub visual: EmbeddingSequence,
    pub words: EmbeddingSequence,
    pub phrases: EmbeddingSequence,
    pub sentence: Vec<f64>,
    pub truth: FrameSpan,
    pub duration_s: f64,
}

impl GroundingCase {
    pub fn new(
        id: String,
        visual: EmbeddingSequence,
        words: EmbeddingSequence,
        phrases: EmbeddingSequence,
        sentence: Vec<f64>,
        truth: FrameSpan,
        duration_s: f64,
    ) -> Result<Self> {
        let dim = visual.dim();
        for (seq, index) in [(&words, 1), (&phrases, 2)] {
            if seq.dim() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: seq.dim(),
                });
            }
        }
        if sentence.len() != dim {
            return Err(Error::DimensionMismatch {
                index: 3,
                expected: dim,
                found: sentence.len(),
            });
        }
        if truth.start > truth.end || truth.end >= visual.len() {
            return Err(Error::ConfigInvalid(format!(
                "truth {truth:?} outside {} frames",
                visual.len()
            )));
        }
        if !duration_s.is_finite() || duration_s <= 0.0 {
            return Err(Error::NonPositiveDuration(duration_s));
        }
        Ok(Self {
            id,
            visual,
            words,
            phrases,
            sentence,
            truth,
            duration_s,
        })
    }

    pub fn frames(&self) -> usize {
        self.visual.len()
    }

    /// The planted span in seconds, frame `k` covering `[k·d/T, (k+1)·d/T)`.
    pub fn truth_interval(&self) -> Interval {
        let step = self.duration_s / self.frames() as f64;
        Interval {
            start: self.truth.start as f64 * step,
            end: (self.truth.end + 1) as f64 * step,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = l2(&v);
    v.into_iter().map(|x| x / n).collect()
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v = gaussian(rng, dim);
        if l2(&v) > 0.0 {
            return normalized(v);
        }
    }
}

pub fn generate(config: &SyntheticConfig) -> Result<Vec<GroundingCase>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (t, d) = (config.frames, config.dim);
    (0..config.pairs)
        .map(|k| {
            let words: Vec<Vec<f64>> = (0..config.words).map(|_| unit(&mut rng, d)).collect();
            let phrases: Vec<Vec<f64>> = (0..config.phrases).map(|_| unit(&mut rng, d)).collect();
            let mut mean = vec![0.0; d];
            for w in &words {
                mean.iter_mut().zip(w).for_each(|(m, x)| *m += x / config.words as f64);
            }
            let sentence = if l2(&mean) > 0.0 { normalized(mean) } else { words[0].clone() };
            let truth = match config.moment {
                MomentPlacement::Fixed(span) => span,
                MomentPlacement::Random => {
                    let min_len = t.min(2);
                    let max_len = min_len.max(t.div_ceil(2));
                    let len = rng.random_range(min_len..=max_len);
                    let start = rng.random_range(0..=t - len);
                    FrameSpan { start, end: start + len - 1 }
                }
            };
            let planted = &words[rng.random_range(0..config.words)];
            let scale = config.noise_sigma / (d as f64).sqrt();
            let mut frames = Vec::with_capacity(t);
            for f in 0..t {
                let v = if truth.contains(f) {
                    loop {
                        let noisy: Vec<f64> =
                            planted.iter().zip(gaussian(&mut rng, d)).map(|(w, z)| w + scale * z).collect();
                        if l2(&noisy) > 0.0 {
                            break normalized(noisy);
                        }
                    }
                } else {
                    let mut attempts = 0;
                    loop {
                        let v = unit(&mut rng, d);
                        if words.iter().all(|w| cosine(&v, w) < OUTSIDE_COSINE_LIMIT) {
                            break v;
                        }
                        attempts += 1;
                        if attempts >= MAX_REJECTIONS {
                            return Err(Error::ConfigInvalid(format!(
                                "could not draw a frame below cosine {OUTSIDE_COSINE_LIMIT} with all words in {d} dimensions"
                            )));
                        }
                    }
                };
                frames.push(v);
            }
            GroundingCase::new(
                format!("syn-{}-{k:05}", config.seed),
                EmbeddingSequence::visual(frames)?,
                EmbeddingSequence::textual(words)?,
                EmbeddingSequence::textual(phrases)?,
                sentence,
                truth,
                config.duration_s,
            )
        })
        .collect()
}
