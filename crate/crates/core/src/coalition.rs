//! Player subsets encoded as 64-bit masks.

use std::fmt;

use crate::error::{Error, Result};

/// Largest player count a single game may have.
pub const MAX_PLAYERS: usize = 64;

/// A subset of the players `0..n` of some game.
///
/// The bit for player `k` is `1 << k`. The player count is carried along so
/// that complements and iteration stay inside the game's index space.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    bits: u64,
    players: u8,
}

impl Coalition {
    pub fn empty(players: usize) -> Result<Self> {
        check_players(players)?;
        Ok(Self {
            bits: 0,
            players: players as u8,
        })
    }

    pub fn full(players: usize) -> Result<Self> {
        check_players(players)?;
        Ok(Self {
            bits: full_mask(players),
            players: players as u8,
        })
    }

    /// Builds a coalition from raw bits; every set bit must be below `players`.
    pub fn from_bits(bits: u64, players: usize) -> Result<Self> {
        check_players(players)?;
        if bits & !full_mask(players) != 0 {
            let player = 63 - (bits & !full_mask(players)).leading_zeros() as usize;
            return Err(Error::PlayerOutOfRange { player, players });
        }
        Ok(Self {
            bits,
            players: players as u8,
        })
    }

    pub fn from_members<I>(members: I, players: usize) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        check_players(players)?;
        let mut bits = 0u64;
        for m in members {
            if m >= players {
                return Err(Error::PlayerOutOfRange { player: m, players });
            }
            bits |= 1 << m;
        }
        Ok(Self {
            bits,
            players: players as u8,
        })
    }

    pub const fn bits(self) -> u64 {
        self.bits
    }

    pub const fn players(self) -> usize {
        self.players as usize
    }

    pub const fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub const fn contains(self, player: usize) -> bool {
        player < self.players as usize && self.bits & (1 << player) != 0
    }

    pub const fn intersects(self, other: Self) -> bool {
        self.bits & other.bits != 0
    }

    pub const fn is_subset_of(self, other: Self) -> bool {
        self.bits & !other.bits == 0
    }

    /// Returns the coalition with `player` added. Panics if `player` is out of range.
    #[must_use]
    pub fn with(self, player: usize) -> Self {
        assert!(player < self.players(), "player {player} out of range");
        Self {
            bits: self.bits | (1 << player),
            ..self
        }
    }

    #[must_use]
    pub fn without(self, player: usize) -> Self {
        if player >= 64 {
            return self;
        }
        Self {
            bits: self.bits & !(1 << player),
            ..self
        }
    }

    #[must_use]
    pub fn union(self, other: Self) -> Self {
        Self {
            bits: self.bits | other.bits,
            ..self
        }
    }

    #[must_use]
    pub fn difference(self, other: Self) -> Self {
        Self {
            bits: self.bits & !other.bits,
            ..self
        }
    }

    #[must_use]
    pub fn complement(self) -> Self {
        Self {
            bits: !self.bits & full_mask(self.players()),
            ..self
        }
    }

    /// Member indices in ascending order.
    pub fn members(self) -> Members {
        Members(self.bits)
    }

    /// Every subset of `self`, each exactly once, starting with `self` and ending with the empty set.
    pub fn subsets(self) -> Subsets {
        Subsets {
            universe: self.bits,
            next: Some(self.bits),
            players: self.players,
        }
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, m) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

pub(crate) const fn full_mask(players: usize) -> u64 {
    if players >= 64 {
        u64::MAX
    } else {
        (1u64 << players) - 1
    }
}

fn check_players(players: usize) -> Result<()> {
    if players > MAX_PLAYERS {
        Err(Error::TooManyPlayers {
            players,
            max: MAX_PLAYERS,
        })
    } else {
        Ok(())
    }
}

pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let k = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(k)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Submask enumeration in decreasing numeric order.
pub struct Subsets {
    universe: u64,
    next: Option<u64>,
    players: u8,
}

impl Iterator for Subsets {
    type Item = Coalition;

    fn next(&mut self) -> Option<Coalition> {
        let bits = self.next?;
        self.next = if bits == 0 {
            None
        } else {
            Some((bits - 1) & self.universe)
        };
        Some(Coalition {
            bits,
            players: self.players,
        })
    }
}
