//! Characteristic functions and the union-player reduction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalition::{full_mask, Coalition, MAX_PLAYERS};
use crate::error::{Error, Result};

/// Which weighting of marginal contributions a value or interaction index uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    /// Uniform weight over coalitions.
    Banzhaf,
    /// Permutation weight over coalitions.
    Shapley,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Banzhaf => "banzhaf",
            ValueKind::Shapley => "shapley",
        }
    }
}

/// A set function over players `0..players()`.
///
/// Implementations must return `0.0` for the empty coalition and must be
/// deterministic: equal coalitions give bitwise-equal payoffs.
pub trait CharacteristicGame {
    fn players(&self) -> usize;

    fn evaluate(&self, coalition: Coalition) -> f64;

    /// True when `player` stands for a merged group of players of an underlying game.
    fn is_union_player(&self, _player: usize) -> bool {
        false
    }
}

impl<G: CharacteristicGame + ?Sized> CharacteristicGame for &G {
    fn players(&self) -> usize {
        (**self).players()
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        (**self).evaluate(coalition)
    }

    fn is_union_player(&self, player: usize) -> bool {
        (**self).is_union_player(player)
    }
}

impl<G: CharacteristicGame + ?Sized> CharacteristicGame for Box<G> {
    fn players(&self) -> usize {
        (**self).players()
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        (**self).evaluate(coalition)
    }

    fn is_union_player(&self, player: usize) -> bool {
        (**self).is_union_player(player)
    }
}

pub(crate) fn check_player(game: &impl CharacteristicGame, player: usize) -> Result<()> {
    let players = game.players();
    if player < players {
        Ok(())
    } else {
        Err(Error::PlayerOutOfRange { player, players })
    }
}

/// `g(S) = Σ_{k ∈ S} w_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveGame {
    weights: Vec<f64>,
}

impl AdditiveGame {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() > MAX_PLAYERS {
            return Err(Error::TooManyPlayers {
                players: weights.len(),
                max: MAX_PLAYERS,
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl CharacteristicGame for AdditiveGame {
    fn players(&self) -> usize {
        self.weights.len()
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        coalition.members().map(|k| self.weights[k]).sum()
    }
}

/// Worth 1 exactly when the carrier is contained in the coalition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnanimityGame {
    carrier: Coalition,
}

impl UnanimityGame {
    pub fn new(carrier: Coalition) -> Result<Self> {
        if carrier.is_empty() {
            return Err(Error::EmptyUnion);
        }
        Ok(Self { carrier })
    }

    pub fn carrier(&self) -> Coalition {
        self.carrier
    }
}

impl CharacteristicGame for UnanimityGame {
    fn players(&self) -> usize {
        self.carrier.players()
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        if self.carrier.is_subset_of(coalition) {
            1.0
        } else {
            0.0
        }
    }
}

/// A game backed by an explicit payoff per coalition, indexed by coalition bits.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGame {
    players: usize,
    payoffs: Vec<f64>,
}

impl TableGame {
    /// `payoffs.len()` must be `2^players` and `payoffs[0]` must be zero.
    pub fn new(players: usize, payoffs: Vec<f64>) -> Result<Self> {
        if players >= usize::BITS as usize || players > 30 {
            return Err(Error::TooManyPlayers { players, max: 30 });
        }
        if payoffs.len() != 1 << players {
            return Err(Error::LengthMismatch {
                left: payoffs.len(),
                right: 1 << players,
            });
        }
        if payoffs.iter().any(|p| !p.is_finite()) || payoffs[0] != 0.0 {
            return Err(Error::NonFinite);
        }
        Ok(Self { players, payoffs })
    }

    /// Evaluates every coalition of `game` once.
    pub fn tabulate<G>(game: &G) -> Result<Self>
    where
        G: CharacteristicGame + Sync + ?Sized,
    {
        let players = game.players();
        if players > 30 {
            return Err(Error::TooManyPlayers { players, max: 30 });
        }
        let payoffs = (0..1u64 << players)
            .into_par_iter()
            .map(|bits| game.evaluate(Coalition::from_bits(bits, players).expect("mask in range")))
            .collect();
        Ok(Self { players, payoffs })
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }
}

impl CharacteristicGame for TableGame {
    fn players(&self) -> usize {
        self.players
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        self.payoffs[coalition.bits() as usize]
    }
}

/// Wraps a closure as a game. The closure is trusted to return 0 on the empty coalition.
pub struct FnGame<F> {
    players: usize,
    f: F,
}

impl<F> FnGame<F>
where
    F: Fn(Coalition) -> f64,
{
    pub fn new(players: usize, f: F) -> Result<Self> {
        if players > MAX_PLAYERS {
            return Err(Error::TooManyPlayers {
                players,
                max: MAX_PLAYERS,
            });
        }
        Ok(Self { players, f })
    }
}

impl<F> CharacteristicGame for FnGame<F>
where
    F: Fn(Coalition) -> f64,
{
    fn players(&self) -> usize {
        self.players
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        if coalition.is_empty() {
            return 0.0;
        }
        (self.f)(coalition)
    }
}

/// A reduced game in which one group of players acts as a single hypothetical player.
///
/// Players of the reduced game are the untouched players of the base game in
/// ascending order, followed by the union player at index `players() - 1`.
#[derive(Debug, Clone)]
pub struct UnionGame<G> {
    base: G,
    groups: Vec<u64>,
}

impl<G: CharacteristicGame> UnionGame<G> {
    pub fn base(&self) -> &G {
        &self.base
    }

    pub fn union_player(&self) -> usize {
        self.groups.len() - 1
    }

    /// The base-game players represented by reduced player `player`.
    pub fn group(&self, player: usize) -> Coalition {
        Coalition::from_bits(self.groups[player], self.base.players()).expect("group in range")
    }

    /// Maps a reduced coalition onto the base game's coalition.
    pub fn expand(&self, coalition: Coalition) -> Coalition {
        let bits = coalition
            .members()
            .fold(0u64, |acc, p| acc | self.groups[p]);
        Coalition::from_bits(bits, self.base.players()).expect("group in range")
    }
}

impl<G: CharacteristicGame> CharacteristicGame for UnionGame<G> {
    fn players(&self) -> usize {
        self.groups.len()
    }

    fn evaluate(&self, coalition: Coalition) -> f64 {
        self.base.evaluate(self.expand(coalition))
    }

    fn is_union_player(&self, player: usize) -> bool {
        match self.groups.get(player) {
            Some(_) if player == self.union_player() => true,
            Some(&bits) => self.base.is_union_player(bits.trailing_zeros() as usize),
            None => false,
        }
    }
}

/// Removes `group`'s members as individuals and adds one player whose presence
/// means the whole group is present.
pub fn reduce_with_union<G: CharacteristicGame>(game: G, group: Coalition) -> Result<UnionGame<G>> {
    let players = game.players();
    if group.players() != players {
        return Err(Error::LengthMismatch {
            left: group.players(),
            right: players,
        });
    }
    if group.is_empty() {
        return Err(Error::EmptyUnion);
    }
    if let Some(player) = group.members().find(|&p| game.is_union_player(p)) {
        return Err(Error::OverlappingUnion { player });
    }
    let rest = !group.bits() & full_mask(players);
    let mut groups: Vec<u64> = Coalition::from_bits(rest, players)?
        .members()
        .map(|p| 1 << p)
        .collect();
    groups.push(group.bits());
    Ok(UnionGame { base: game, groups })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(members: &[usize], n: usize) -> Coalition {
        Coalition::from_members(members.iter().copied(), n).unwrap()
    }

    #[test]
    fn additive_evaluates_sum() {
        let g = AdditiveGame::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(g.evaluate(c(&[], 3)), 0.0);
        assert!((g.evaluate(c(&[0, 2], 3)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn union_of_additive_pair() {
        let g = AdditiveGame::new(vec![0.2, 0.5, 0.3]).unwrap();
        let r = reduce_with_union(&g, c(&[0, 1], 3)).unwrap();
        assert_eq!(r.players(), 2);
        assert_eq!(r.union_player(), 1);
        assert_eq!(r.evaluate(c(&[1], 2)), 0.2 + 0.5);
        assert_eq!(r.evaluate(c(&[0], 2)), 0.3);
        assert_eq!(r.evaluate(c(&[], 2)), 0.0);
    }

    #[test]
    fn overlapping_union_rejected() {
        let g = AdditiveGame::new(vec![1.0; 4]).unwrap();
        let r = reduce_with_union(&g, c(&[0, 1], 4)).unwrap();
        // reduced players: 2, 3, [0,1]
        assert_eq!(
            reduce_with_union(&r, c(&[1, 2], 3)).unwrap_err(),
            Error::OverlappingUnion { player: 2 }
        );
        let rr = reduce_with_union(&r, c(&[0, 1], 3)).unwrap();
        assert_eq!(rr.players(), 2);
        assert_eq!(rr.evaluate(c(&[1], 2)), 2.0);
        assert!(rr.is_union_player(0) && rr.is_union_player(1));
        assert_eq!(
            reduce_with_union(&g, c(&[], 4)).unwrap_err(),
            Error::EmptyUnion
        );
    }

    #[test]
    fn table_validation() {
        assert!(TableGame::new(2, vec![0.0; 3]).is_err());
        assert!(TableGame::new(1, vec![1.0, 0.0]).is_err());
        let u = UnanimityGame::new(c(&[0, 1], 3)).unwrap();
        let t = TableGame::tabulate(&u).unwrap();
        assert_eq!(t.payoffs(), &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    }
}
