//! Games whose payoffs are cosine similarities between pooled embeddings.

use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::exact::Enumerator;
use crate::game::{CharacteristicGame, TableGame, ValueKind};
use crate::sampling::{sampled_interaction, SamplingPlan};

pub const DEFAULT_DIM: usize = 512;

/// Pooled means with a norm below this are treated as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Visual,
    Textual,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Visual => "visual",
            Modality::Textual => "textual",
        }
    }
}

/// An ordered list of nonzero vectors of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    vectors: Vec<Vec<f64>>,
    units: Vec<Vec<f64>>,
    modality: Modality,
}

impl EmbeddingSequence {
    pub fn new(vectors: Vec<Vec<f64>>, modality: Modality) -> Result<Self> {
        let dim = vectors.first().ok_or(Error::EmptySequence)?.len();
        let mut units = Vec::with_capacity(vectors.len());
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
            let norm = l2(v);
            if norm == 0.0 || dim == 0 {
                return Err(Error::ZeroVector { index });
            }
            units.push(v.iter().map(|x| x / norm).collect());
        }
        Ok(Self {
            vectors,
            units,
            modality,
        })
    }

    pub fn visual(vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vectors, Modality::Visual)
    }

    pub fn textual(vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vectors, Modality::Textual)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Unit-normalized copies of the vectors.
    pub fn units(&self) -> &[Vec<f64>] {
        &self.units
    }

    pub fn into_vectors(self) -> Vec<Vec<f64>> {
        self.vectors
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (l2(a) * l2(b))
}

fn gram(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|x| b.iter().map(|y| dot(x, y)).collect())
        .collect()
}

/// Players are the elements of one sequence; `g(S)` is the mean pairwise
/// cosine similarity among members for `|S| ≥ 2` and zero otherwise.
#[derive(Debug, Clone)]
pub struct SelfModalGame {
    cosines: Vec<Vec<f64>>,
}

pub fn self_modal_game(seq: &EmbeddingSequence) -> Result<SelfModalGame> {
    if seq.len() > MAX_PLAYERS {
        return Err(Error::TooManyPlayers {
            players: seq.len(),
            max: MAX_PLAYERS,
        });
    }
    Ok(SelfModalGame {
        cosines: gram(seq.units(), seq.units()),
    })
}

impl CharacteristicGame for SelfModalGame {
    fn players(&self) -> usize {
        self.cosines.len()
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        let k = coalition.len();
        if k < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        let mut rest = coalition.bits();
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let row = &self.cosines[a];
            let mut later = rest;
            while later != 0 {
                let b = later.trailing_zeros() as usize;
                later &= later - 1;
                total += row[b];
            }
        }
        total / (k * (k - 1) / 2) as f64
    }
}

/// How a multi-member coalition's features are pooled before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Aggregation {
    #[default]
    MeanPool,
}

#[derive(Debug, Clone)]
pub struct CrossModalGameSpec {
    visual: EmbeddingSequence,
    textual: EmbeddingSequence,
    aggregation: Aggregation,
}

impl CrossModalGameSpec {
    pub fn new(visual: EmbeddingSequence, textual: EmbeddingSequence) -> Result<Self> {
        if visual.modality() != Modality::Visual {
            return Err(Error::ModalityMismatch {
                expected: "visual",
                found: visual.modality().as_str(),
            });
        }
        if textual.modality() != Modality::Textual {
            return Err(Error::ModalityMismatch {
                expected: "textual",
                found: textual.modality().as_str(),
            });
        }
        if visual.dim() != textual.dim() {
            return Err(Error::DimensionMismatch {
                index: 0,
                expected: visual.dim(),
                found: textual.dim(),
            });
        }
        let players = visual.len() + textual.len();
        if players > MAX_PLAYERS {
            return Err(Error::TooManyPlayers {
                players,
                max: MAX_PLAYERS,
            });
        }
        Ok(Self {
            visual,
            textual,
            aggregation: Aggregation::MeanPool,
        })
    }

    pub fn visual(&self) -> &EmbeddingSequence {
        &self.visual
    }

    pub fn textual(&self) -> &EmbeddingSequence {
        &self.textual
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }

    pub fn players(&self) -> usize {
        self.visual.len() + self.textual.len()
    }
}

/// Players `0..T` are frames and `T..T+M` are words. A coalition scores the
/// cosine between the mean of its frames and the mean of its words when it
/// holds both, and zero when it holds only one modality.
#[derive(Debug)]
pub struct CrossModalGame {
    frames: usize,
    words: usize,
    vv: Vec<Vec<f64>>,
    qq: Vec<Vec<f64>>,
    vq: Vec<Vec<f64>>,
    degenerate: AtomicUsize,
}

pub fn cross_modal_game(spec: &CrossModalGameSpec) -> CrossModalGame {
    let (v, q) = (spec.visual.units(), spec.textual.units());
    CrossModalGame {
        frames: v.len(),
        words: q.len(),
        vv: gram(v, v),
        qq: gram(q, q),
        vq: gram(v, q),
        degenerate: AtomicUsize::new(0),
    }
}

fn quad(m: &[Vec<f64>], bits: u64) -> f64 {
    let mut total = 0.0;
    let mut a_bits = bits;
    while a_bits != 0 {
        let a = a_bits.trailing_zeros() as usize;
        a_bits &= a_bits - 1;
        let mut b_bits = bits;
        while b_bits != 0 {
            let b = b_bits.trailing_zeros() as usize;
            b_bits &= b_bits - 1;
            total += m[a][b];
        }
    }
    total
}

impl CrossModalGame {
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn words(&self) -> usize {
        self.words
    }

    /// Number of evaluations so far whose pooled mean was degenerate (scored 0).
    pub fn degenerate_evaluations(&self) -> usize {
        self.degenerate.load(Ordering::Relaxed)
    }
}

impl CharacteristicGame for CrossModalGame {
    fn players(&self) -> usize {
        self.frames + self.words
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        let frame_mask = crate::coalition::full_mask(self.frames);
        let vbits = coalition.bits() & frame_mask;
        let qbits = coalition.bits() >> self.frames;
        if vbits == 0 || qbits == 0 {
            return 0.0;
        }
        let (nv, nq) = (vbits.count_ones() as f64, qbits.count_ones() as f64);
        let vnorm = quad(&self.vv, vbits).max(0.0).sqrt();
        let qnorm = quad(&self.qq, qbits).max(0.0).sqrt();
        if vnorm / nv < DEGENERATE_NORM || qnorm / nq < DEGENERATE_NORM {
            self.degenerate.fetch_add(1, Ordering::Relaxed);
            return 0.0;
        }
        let mut cross = 0.0;
        let mut a_bits = vbits;
        while a_bits != 0 {
            let a = a_bits.trailing_zeros() as usize;
            a_bits &= a_bits - 1;
            let row = &self.vq[a];
            let mut b_bits = qbits;
            while b_bits != 0 {
                let b = b_bits.trailing_zeros() as usize;
                b_bits &= b_bits - 1;
                cross += row[b];
            }
        }
        cross / (vnorm * qnorm)
    }
}

/// Exact enumeration or seeded sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Exact(ValueKind),
    Sampled(SamplingPlan),
}

impl Mode {
    pub fn kind(&self) -> ValueKind {
        match self {
            Mode::Exact(kind) => *kind,
            Mode::Sampled(plan) => plan.kind,
        }
    }
}

/// Frame-by-text matrix of pairwise interaction indices.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGrid {
    pub values: Array2<f64>,
    pub kind: ValueKind,
}

impl InteractionGrid {
    pub fn frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn texts(&self) -> usize {
        self.values.ncols()
    }
}

/// Interaction index of every (frame, text) pair over the full mixed player set.
pub fn pairwise_interaction_grid(spec: &CrossModalGameSpec, mode: Mode) -> Result<InteractionGrid> {
    let game = cross_modal_game(spec);
    let (t, m) = (game.frames(), game.words());
    let cells: Vec<(usize, usize)> = (0..t).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let values: Vec<f64> = match mode {
        Mode::Exact(kind) => {
            let enumerator = Enumerator::default();
            if game.players() > enumerator.cap() {
                return Err(Error::CapExceeded {
                    players: game.players(),
                    cap: enumerator.cap(),
                });
            }
            let table = TableGame::tabulate(&game)?;
            cells
                .par_iter()
                .map(|&(i, j)| {
                    enumerator
                        .interaction(&table, i, t + j, kind)
                        .map(|r| r.value)
                })
                .collect::<Result<_>>()?
        }
        Mode::Sampled(plan) => cells
            .par_iter()
            .map(|&(i, j)| sampled_interaction(&game, i, t + j, &plan).map(|r| r.estimate))
            .collect::<Result<_>>()?,
    };
    let values = Array2::from_shape_vec((t, m), values).expect("grid shape");
    Ok(InteractionGrid {
        values,
        kind: mode.kind(),
    })
}

/// Per-frame interaction with a single sentence-level textual player.
pub fn sentence_level_interaction(
    visual: &EmbeddingSequence,
    sentence: &[f64],
    mode: Mode,
) -> Result<Vec<f64>> {
    let text = EmbeddingSequence::textual(vec![sentence.to_vec()])?;
    let spec = CrossModalGameSpec::new(visual.clone(), text)?;
    Ok(pairwise_interaction_grid(&spec, mode)?
        .values
        .column(0)
        .to_vec())
}
