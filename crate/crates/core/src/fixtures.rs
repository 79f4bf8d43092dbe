//! Seeded random games used by the test suites, benchmarks and the
//! `bench-sampling` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coalition::Coalition;
use crate::embedding::{self_modal_game, CrossModalGameSpec, EmbeddingSequence, SelfModalGame};
use crate::error::Result;
use crate::game::{AdditiveGame, CharacteristicGame, TableGame};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vectors(rng: &mut impl Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

pub fn unit_vectors(rng: &mut impl Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    gaussian_vectors(rng, count, dim)
        .into_iter()
        .map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect()
}

/// Coalitions score `|S| · cos(mean of S, query)`.
///
/// Members lean towards the query, which keeps every player's value well away
/// from zero; the game is non-additive through the pooled normalization.
#[derive(Debug, Clone)]
pub struct RelevanceGame {
    members: Vec<Vec<f64>>,
    query: Vec<f64>,
}

impl RelevanceGame {
    pub fn new(members: Vec<Vec<f64>>, query: Vec<f64>) -> Self {
        Self { members, query }
    }
}

impl CharacteristicGame for RelevanceGame {
    fn players(&self) -> usize {
        self.members.len()
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        if coalition.is_empty() {
            return 0.0;
        }
        let dim = self.query.len();
        let mut sum = vec![0.0; dim];
        for k in coalition.members() {
            sum.iter_mut()
                .zip(&self.members[k])
                .for_each(|(s, x)| *s += x);
        }
        let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return 0.0;
        }
        let cos = sum.iter().zip(&self.query).map(|(a, b)| a * b).sum::<f64>() / norm;
        coalition.len() as f64 * cos
    }
}

/// `players` unit members `normalize(z/√dim + 0.5·q)` around a random unit query `q`.
pub fn random_relevance_game(players: usize, dim: usize, seed: u64) -> RelevanceGame {
    let mut r = rng(seed);
    let query = unit_vectors(&mut r, 1, dim).remove(0);
    let scale = (dim as f64).sqrt().recip();
    let members = gaussian_vectors(&mut r, players, dim)
        .into_iter()
        .map(|z| {
            let v: Vec<f64> = z
                .iter()
                .zip(&query)
                .map(|(a, q)| a * scale + 0.5 * q)
                .collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();
    RelevanceGame { members, query }
}

pub fn random_self_modal_game(players: usize, dim: usize, seed: u64) -> Result<SelfModalGame> {
    let mut r = rng(seed);
    self_modal_game(&EmbeddingSequence::visual(gaussian_vectors(
        &mut r, players, dim,
    ))?)
}

pub fn random_cross_modal_spec(
    frames: usize,
    words: usize,
    dim: usize,
    seed: u64,
) -> Result<CrossModalGameSpec> {
    let mut r = rng(seed);
    CrossModalGameSpec::new(
        EmbeddingSequence::visual(gaussian_vectors(&mut r, frames, dim))?,
        EmbeddingSequence::textual(gaussian_vectors(&mut r, words, dim))?,
    )
}

/// Payoffs uniform in `[-1, 1)` on every nonempty coalition.
pub fn random_table_game(players: usize, seed: u64) -> Result<TableGame> {
    let mut r = rng(seed);
    let mut payoffs: Vec<f64> = (0..1usize << players)
        .map(|_| r.random_range(-1.0..1.0))
        .collect();
    payoffs[0] = 0.0;
    TableGame::new(players, payoffs)
}

pub fn random_additive_game(players: usize, seed: u64) -> Result<AdditiveGame> {
    let mut r = rng(seed);
    AdditiveGame::new((0..players).map(|_| r.random_range(-1.0..1.0)).collect())
}

/// Adds a player (the last index) that never changes any payoff.
pub struct WithDummy<G>(pub G);

impl<G: CharacteristicGame> CharacteristicGame for WithDummy<G> {
    fn players(&self) -> usize {
        self.0.players() + 1
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        let n = self.0.players();
        let inner = Coalition::from_bits(coalition.without(n).bits(), n).expect("inner range");
        self.0.evaluate(inner)
    }
}

/// `a·g1 + b·g2`.
pub struct Combination<A, B> {
    pub a: f64,
    pub first: A,
    pub b: f64,
    pub second: B,
}

impl<A: CharacteristicGame, B: CharacteristicGame> CharacteristicGame for Combination<A, B> {
    fn players(&self) -> usize {
        self.first.players()
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        self.a * self.first.evaluate(coalition) + self.b * self.second.evaluate(coalition)
    }
}
