//! Exact values and pairwise interaction indices by full coalition enumeration.
//!
//! For a player `i` of an `n`-player game the Banzhaf value is the uniform
//! average of `g(S ∪ {i}) − g(S)` over the `2^(n-1)` coalitions `S` without
//! `i`; the Shapley value weights each term by `|S|!(n−|S|−1)!/n!`.
//!
//! The pairwise interaction index averages the bracket
//! `g(S ∪ {i,j}) + g(S) − g(S ∪ {i}) − g(S ∪ {j})` over coalitions without
//! `i` and `j`, uniformly (`1/2^(n-2)`) for the Banzhaf kind and with weight
//! `|S|!(n−|S|−2)!/(n−1)!` for the Shapley kind.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::game::{check_player, CharacteristicGame, ValueKind};

/// Player count above which exact enumeration is refused.
pub const DEFAULT_ENUMERATION_CAP: usize = 22;

/// Per-player values of one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueVector {
    pub values: Vec<f64>,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionIndexResult {
    pub pair: (usize, usize),
    pub value: f64,
    pub kind: ValueKind,
}

/// Exact solver with a configurable enumeration cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Enumerator {
    cap: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl Enumerator {
    pub fn with_cap(cap: usize) -> Self {
        Self { cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn check_cap(&self, game: &impl CharacteristicGame) -> Result<()> {
        let players = game.players();
        if players > self.cap {
            Err(Error::CapExceeded {
                players,
                cap: self.cap,
            })
        } else {
            Ok(())
        }
    }

    pub fn banzhaf<G: CharacteristicGame>(&self, game: &G, player: usize) -> Result<f64> {
        self.value(game, player, ValueKind::Banzhaf)
    }

    pub fn shapley<G: CharacteristicGame>(&self, game: &G, player: usize) -> Result<f64> {
        self.value(game, player, ValueKind::Shapley)
    }

    pub fn value<G: CharacteristicGame>(
        &self,
        game: &G,
        player: usize,
        kind: ValueKind,
    ) -> Result<f64> {
        self.check_cap(game)?;
        check_player(game, player)?;
        let n = game.players();
        let rest = Coalition::full(n)?.without(player);
        match kind {
            ValueKind::Banzhaf => {
                let total: f64 = rest
                    .subsets()
                    .map(|s| game.evaluate(s.with(player)) - game.evaluate(s))
                    .sum();
                Ok(total * 0.5f64.powi(n as i32 - 1))
            }
            ValueKind::Shapley => {
                let weights = shapley_weights(n);
                Ok(rest
                    .subsets()
                    .map(|s| weights[s.len()] * (game.evaluate(s.with(player)) - game.evaluate(s)))
                    .sum())
            }
        }
    }

    /// Values of every player; players are processed in parallel.
    pub fn values<G>(&self, game: &G, kind: ValueKind) -> Result<ValueVector>
    where
        G: CharacteristicGame + Sync,
    {
        self.check_cap(game)?;
        let values = (0..game.players())
            .into_par_iter()
            .map(|p| self.value(game, p, kind))
            .collect::<Result<Vec<_>>>()?;
        Ok(ValueVector { values, kind })
    }

    pub fn interaction<G: CharacteristicGame>(
        &self,
        game: &G,
        i: usize,
        j: usize,
        kind: ValueKind,
    ) -> Result<InteractionIndexResult> {
        check_player(game, i)?;
        check_player(game, j)?;
        if i == j {
            return Err(Error::SamePlayer(i));
        }
        self.check_cap(game)?;
        let n = game.players();
        let rest = Coalition::full(n)?.without(i).without(j);
        let (lo, hi) = (i.min(j), i.max(j));
        let bracket = |s: Coalition| {
            game.evaluate(s.with(lo).with(hi)) + game.evaluate(s)
                - game.evaluate(s.with(lo))
                - game.evaluate(s.with(hi))
        };
        let value = match kind {
            ValueKind::Banzhaf => {
                rest.subsets().map(bracket).sum::<f64>() * 0.5f64.powi(n as i32 - 2)
            }
            ValueKind::Shapley => {
                let weights = shapley_interaction_weights(n);
                rest.subsets().map(|s| weights[s.len()] * bracket(s)).sum()
            }
        };
        Ok(InteractionIndexResult {
            pair: (i, j),
            value,
            kind,
        })
    }
}

/// `|S|!(n−|S|−1)!/n!` indexed by `|S|`, for `|S|` in `0..n`.
pub fn shapley_weights(n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    binomial_row(n - 1)
        .into_iter()
        .map(|c| 1.0 / (n as f64 * c))
        .collect()
}

/// `|S|!(n−|S|−2)!/(n−1)!` indexed by `|S|`, for `|S|` in `0..n-1`.
pub fn shapley_interaction_weights(n: usize) -> Vec<f64> {
    if n < 2 {
        return Vec::new();
    }
    binomial_row(n - 2)
        .into_iter()
        .map(|c| 1.0 / ((n - 1) as f64 * c))
        .collect()
}

fn binomial_row(m: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(m + 1);
    let mut c = 1.0f64;
    for k in 0..=m {
        row.push(c);
        c = c * (m - k) as f64 / (k + 1) as f64;
    }
    row
}

pub fn exact_banzhaf<G: CharacteristicGame>(game: &G, player: usize) -> Result<f64> {
    Enumerator::default().banzhaf(game, player)
}

pub fn exact_shapley<G: CharacteristicGame>(game: &G, player: usize) -> Result<f64> {
    Enumerator::default().shapley(game, player)
}

pub fn exact_value<G: CharacteristicGame>(game: &G, player: usize, kind: ValueKind) -> Result<f64> {
    Enumerator::default().value(game, player, kind)
}

pub fn exact_values<G: CharacteristicGame + Sync>(
    game: &G,
    kind: ValueKind,
) -> Result<ValueVector> {
    Enumerator::default().values(game, kind)
}

pub fn exact_interaction<G: CharacteristicGame>(
    game: &G,
    i: usize,
    j: usize,
    kind: ValueKind,
) -> Result<InteractionIndexResult> {
    Enumerator::default().interaction(game, i, j, kind)
}

#[cfg(test)]
mod tests {
    use std::cell::Cell;

    use super::*;
    use crate::game::{reduce_with_union, AdditiveGame, FnGame, UnanimityGame};

    fn coalition(members: &[usize], n: usize) -> Coalition {
        Coalition::from_members(members.iter().copied(), n).unwrap()
    }

    fn unanimity(members: &[usize], n: usize) -> UnanimityGame {
        UnanimityGame::new(coalition(members, n)).unwrap()
    }

    struct Counting<G> {
        inner: G,
        calls: Cell<usize>,
    }

    impl<G: CharacteristicGame> CharacteristicGame for Counting<G> {
        fn players(&self) -> usize {
            self.inner.players()
        }

        fn evaluate(&self, c: Coalition) -> f64 {
            self.calls.set(self.calls.get() + 1);
            self.inner.evaluate(c)
        }
    }

    #[test]
    fn additive_values_equal_weights() {
        let g = AdditiveGame::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert!((exact_banzhaf(&g, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((exact_shapley(&g, 2).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn unanimity_values() {
        let g = unanimity(&[0, 1], 3);
        // S ⊆ {1,2}: only S={1} and S={1,2} give marginal 1 -> 2/4
        assert_eq!(exact_banzhaf(&g, 0).unwrap(), 0.5);
        assert_eq!(exact_banzhaf(&g, 2).unwrap(), 0.0);
        assert!((exact_shapley(&g, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((exact_shapley(&g, 1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(exact_shapley(&g, 2).unwrap(), 0.0);
    }

    #[test]
    fn zero_game() {
        let g = FnGame::new(5, |_| 0.0).unwrap();
        for p in 0..5 {
            assert_eq!(exact_banzhaf(&g, p).unwrap(), 0.0);
            assert_eq!(exact_shapley(&g, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn player_zero_dictator_like() {
        // v = 1 on every coalition containing 0
        let g = FnGame::new(3, |c| if c.contains(0) { 1.0 } else { 0.0 }).unwrap();
        assert!((exact_shapley(&g, 0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(exact_shapley(&g, 1).unwrap(), 0.0);
    }

    #[test]
    fn pair_unanimity_interaction() {
        let g = unanimity(&[0, 1], 3);
        let r = exact_interaction(&g, 0, 1, ValueKind::Banzhaf).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.pair, (0, 1));
        let s = exact_interaction(&g, 0, 1, ValueKind::Shapley).unwrap();
        assert!((s.value - 1.0).abs() < 1e-15);
        assert_eq!(
            exact_interaction(&g, 0, 2, ValueKind::Banzhaf)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn constant_game_interaction_matches_double_loop() {
        let c = 0.7;
        let g = FnGame::new(4, move |_| c).unwrap();
        // Independent double loop over the 4-bit masks.
        let v = |m: u32| if m == 0 { 0.0 } else { c };
        let (i, j) = (1u32, 3u32);
        let mut oracle = 0.0;
        for m in 0u32..16 {
            if m & (1 << i) != 0 || m & (1 << j) != 0 {
                continue;
            }
            oracle += v(m | 1 << i | 1 << j) + v(m) - v(m | 1 << i) - v(m | 1 << j);
        }
        oracle /= 4.0;
        // only S = ∅ contributes: c + 0 - c - c
        assert!((oracle + c / 4.0).abs() < 1e-15);
        let got = exact_interaction(&g, 1, 3, ValueKind::Banzhaf)
            .unwrap()
            .value;
        assert!((got - oracle).abs() < 1e-15);
    }

    #[test]
    fn interaction_errors() {
        let g = unanimity(&[0], 3);
        assert_eq!(
            exact_interaction(&g, 1, 1, ValueKind::Banzhaf).unwrap_err(),
            Error::SamePlayer(1)
        );
        assert!(matches!(
            exact_interaction(&g, 0, 3, ValueKind::Banzhaf),
            Err(Error::PlayerOutOfRange { .. })
        ));
    }

    #[test]
    fn cap_exceeded() {
        let g = AdditiveGame::new(vec![1.0; 23]).unwrap();
        assert_eq!(
            exact_banzhaf(&g, 0).unwrap_err(),
            Error::CapExceeded {
                players: 23,
                cap: 22
            }
        );
        assert!(Enumerator::with_cap(4)
            .shapley(&AdditiveGame::new(vec![1.0; 5]).unwrap(), 0)
            .is_err());
    }

    #[test]
    fn banzhaf_visits_every_coalition_once() {
        for n in 1..=10 {
            let g = Counting {
                inner: AdditiveGame::new(vec![1.0; n]).unwrap(),
                calls: Cell::new(0),
            };
            exact_banzhaf(&g, n - 1).unwrap();
            // 2^(n-1) marginal contributions, two evaluations each
            assert_eq!(g.calls.get(), 2 * (1 << (n - 1)));
        }
    }

    #[test]
    fn reduced_unanimity_has_dictator() {
        let g = unanimity(&[0, 1], 3);
        let r = reduce_with_union(&g, coalition(&[0, 1], 3)).unwrap();
        let u = r.union_player();
        assert_eq!(r.evaluate(coalition(&[u], 2)), 1.0);
        assert_eq!(exact_shapley(&r, u).unwrap(), 1.0);
        assert_eq!(exact_banzhaf(&r, 0).unwrap(), 0.0);
    }

    #[test]
    fn shapley_weights_sum_to_one_per_size_class() {
        for n in 1..=20usize {
            let w = shapley_weights(n);
            let total: f64 = (0..n).map(|s| w[s] * binomial_row(n - 1)[s]).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        for n in 2..=20usize {
            let w = shapley_interaction_weights(n);
            let total: f64 = (0..n - 1).map(|s| w[s] * binomial_row(n - 2)[s]).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
