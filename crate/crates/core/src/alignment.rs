//! Soft targets, feature enhancement, matching scores, and losses.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::embedding::self_modal_game;
use crate::embedding::{EmbeddingSequence, InteractionGrid, Mode};
use crate::error::{Error, Result};
use crate::game::{CharacteristicGame, TableGame};
use crate::sampling::uniform_coalitions;

/// Longest sequence `enhance` will enumerate exactly.
pub const ENHANCE_EXACT_CAP: usize = 16;

pub const DEFAULT_TEMPERATURE: f64 = 0.1;

/// A strictly positive probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Accepts any positive vector that sums to 1 within 1e-9.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyScores);
        }
        if probs.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::NonFinite);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NonFinite);
        }
        Ok(Self { probs })
    }
}

fn log_softmax(values: impl Iterator<Item = f64> + Clone) -> Vec<f64> {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let log_total = values.clone().map(|v| (v - max).exp()).sum::<f64>().ln();
    values.map(|v| v - max - log_total).collect()
}

fn softmax(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter()
        .map(|e| (e / total).max(f64::MIN_POSITIVE))
        .collect()
}

/// Softmax of game values.
pub fn game_distribution(values: &[f64]) -> Result<Distribution> {
    if values.is_empty() {
        return Err(Error::EmptyScores);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(Distribution {
        probs: softmax(values),
    })
}

/// `−(1/k) Σ target_i (ln predicted_i − ln target_i)`, i.e. `KL(target ‖ predicted) / k`.
pub fn kld_loss(predicted: &Distribution, target: &Distribution) -> Result<f64> {
    if predicted.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: target.len(),
        });
    }
    let k = target.len() as f64;
    let sum: f64 = predicted
        .probs
        .iter()
        .zip(&target.probs)
        .map(|(p, t)| t * (p.ln() - t.ln()))
        .sum();
    // `+ 0.0` turns a negated zero sum into positive zero.
    Ok(-sum / k + 0.0)
}

/// Column-wise (per text element) frame distributions of the predicted scores
/// and of the interaction grid, compared as `−(1/TM) Σ p (ln p̂ − ln p)`.
pub fn word_alignment_loss(predicted: &Array2<f64>, interactions: &InteractionGrid) -> Result<f64> {
    let target = &interactions.values;
    if predicted.dim() != target.dim() {
        return Err(Error::ShapeMismatch {
            left: predicted.dim(),
            right: target.dim(),
        });
    }
    if predicted
        .iter()
        .chain(target.iter())
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite);
    }
    let (t, m) = target.dim();
    let mut sum = 0.0;
    for (pc, tc) in predicted.columns().into_iter().zip(target.columns()) {
        let log_p_hat = column_log_softmax(pc);
        let log_p = column_log_softmax(tc);
        sum += log_p
            .iter()
            .zip(&log_p_hat)
            .map(|(lp, lq)| lp.exp() * (lq - lp))
            .sum::<f64>();
    }
    Ok(-sum / (t * m) as f64 + 0.0)
}

fn column_log_softmax(col: ArrayView1<'_, f64>) -> Vec<f64> {
    log_softmax(col.iter().copied())
}

/// Self-modal enhanced features and the number of coalitions each element used.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedSequence {
    pub vectors: Vec<Vec<f64>>,
    pub source: EmbeddingSequence,
    pub subset_budget: usize,
}

impl EnhancedSequence {
    /// The enhanced vectors as a sequence of the source modality.
    pub fn to_sequence(&self) -> Result<EmbeddingSequence> {
        EmbeddingSequence::new(self.vectors.clone(), self.source.modality())
    }
}

/// For every element `i`, softmaxes the marginal contributions
/// `g(S ∪ {i}) − g(S)` of the self-modal game over a coalition collection and
/// adds the weighted mean feature of each `S ∪ {i}` to the raw vector.
///
/// The collection is every `S ⊆ seq ∖ {i}` in exact mode. In sampled mode it is
/// `plan.sample_count` draws with independent 1/2 inclusion (duplicates kept),
/// which approximates the exact collection whatever the plan's kind.
pub fn enhance(seq: &EmbeddingSequence, mode: Mode) -> Result<EnhancedSequence> {
    let n = seq.len();
    let game = self_modal_game(seq)?;
    let budget = match mode {
        Mode::Exact(_) => {
            if n > ENHANCE_EXACT_CAP {
                return Err(Error::CapExceeded {
                    players: n,
                    cap: ENHANCE_EXACT_CAP,
                });
            }
            1usize << (n - 1)
        }
        Mode::Sampled(plan) => plan.sample_count(),
    };
    let table = match mode {
        Mode::Exact(_) => Some(TableGame::tabulate(&game)?),
        Mode::Sampled(_) => None,
    };
    let dim = seq.dim();
    let raw = seq.vectors();
    let mut vectors = Vec::with_capacity(n);
    for i in 0..n {
        let rest = Coalition::full(n)?.without(i);
        let collection: Vec<Coalition> = match mode {
            Mode::Exact(_) => rest.subsets().collect(),
            Mode::Sampled(plan) => uniform_coalitions(&plan, i as u64, rest).collect(),
        };
        let marginals: Vec<f64> = collection
            .iter()
            .map(|&s| match &table {
                Some(t) => t.evaluate(s.with(i)) - t.evaluate(s),
                None => game.evaluate(s.with(i)) - game.evaluate(s),
            })
            .collect();
        let weights = softmax(&marginals);
        let mut coef = vec![0.0; n];
        for (s, w) in collection.iter().zip(&weights) {
            let joined = s.with(i);
            let share = w / joined.len() as f64;
            for k in joined.members() {
                coef[k] += share;
            }
        }
        let mut out = raw[i].clone();
        for (k, c) in coef.iter().enumerate() {
            if *c != 0.0 {
                for d in 0..dim {
                    out[d] += c * raw[k][d];
                }
            }
        }
        vectors.push(out);
    }
    Ok(EnhancedSequence {
        vectors,
        source: seq.clone(),
        subset_budget: budget,
    })
}

/// Per-frame average of sentence, mean word, and mean phrase interactions.
pub fn matching_degree(
    word_grid: &InteractionGrid,
    phrase_grid: &InteractionGrid,
    sentence: &[f64],
) -> Result<Vec<f64>> {
    let t = sentence.len();
    for grid in [word_grid, phrase_grid] {
        if grid.frames() != t || grid.texts() == 0 {
            return Err(Error::ShapeMismatch {
                left: grid.values.dim(),
                right: (t, grid.texts().max(1)),
            });
        }
    }
    let words = word_grid
        .values
        .mean_axis(ndarray::Axis(1))
        .expect("nonempty");
    let phrases = phrase_grid
        .values
        .mean_axis(ndarray::Axis(1))
        .expect("nonempty");
    Ok((0..t)
        .map(|i| (sentence[i] + words[i] + phrases[i]) / 3.0)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchProfile {
    pub per_frame: Vec<f64>,
    pub weights: Distribution,
    pub video_score: f64,
}

/// Sentence-softmax weighted average of per-frame matching degrees.
pub fn video_score(matching: &[f64], sentence: &[f64]) -> Result<MatchProfile> {
    if matching.len() != sentence.len() {
        return Err(Error::LengthMismatch {
            left: matching.len(),
            right: sentence.len(),
        });
    }
    let weights = game_distribution(sentence)?;
    let video_score = weights.probs.iter().zip(matching).map(|(w, m)| w * m).sum();
    Ok(MatchProfile {
        per_frame: matching.to_vec(),
        weights,
        video_score,
    })
}

/// Symmetric InfoNCE over a square score matrix whose diagonal holds the
/// matched pairs; rows index videos, columns index queries.
pub fn contrastive_loss(scores: &Array2<f64>, temperature: f64) -> Result<f64> {
    let (rows, cols) = scores.dim();
    if rows != cols || rows == 0 {
        return Err(Error::NonSquare { rows, cols });
    }
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scaled = scores / temperature;
    let n = rows as f64;
    let row_term: f64 = scaled
        .rows()
        .into_iter()
        .enumerate()
        .map(|(k, row)| log_softmax(row.iter().copied())[k])
        .sum();
    let col_term: f64 = scaled
        .columns()
        .into_iter()
        .enumerate()
        .map(|(k, col)| log_softmax(col.iter().copied())[k])
        .sum();
    Ok(-row_term / n - col_term / n)
}

/// Trade-off weights of the overall objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub self_relevance: f64,
    pub alignment: f64,
    pub contrastive: f64,
    pub reconstruction: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            self_relevance: 1.0,
            alignment: 1.0,
            contrastive: 1.0,
            reconstruction: 10.0,
        }
    }
}

pub fn aggregate_loss(
    l_self: f64,
    l_align: f64,
    l_c: f64,
    l_rec: f64,
    weights: &LossWeights,
) -> Result<f64> {
    let parts = [l_self, l_align, l_c, l_rec];
    let alphas = [
        weights.self_relevance,
        weights.alignment,
        weights.contrastive,
        weights.reconstruction,
    ];
    if parts.iter().chain(&alphas).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(parts.iter().zip(&alphas).map(|(l, a)| l * a).sum())
}

/// Loss summary as emitted by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l_self: f64,
    pub l_align: f64,
    pub l_c: f64,
    pub total: f64,
}

impl LossReport {
    /// Reconstruction is not modelled, so its slot is zero.
    pub fn new(l_self: f64, l_align: f64, l_c: f64, weights: &LossWeights) -> Result<Self> {
        let total = aggregate_loss(l_self, l_align, l_c, 0.0, weights)?;
        Ok(Self {
            l_self,
            l_align,
            l_c,
            total,
        })
    }
}
