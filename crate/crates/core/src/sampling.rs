//! Monte Carlo estimators for values and interaction indices.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(plan.seed)`, with the ChaCha stream number selecting the
//! target (player or pair). Coalitions for Banzhaf-kind estimates are taken
//! straight from the raw 64-bit outputs (one bit per player, inclusion
//! probability 1/2); permutations use a Fisher-Yates shuffle driven by
//! unbiased rejection sampling of bounded integers. Nothing depends on
//! platform-specific or version-unstable helpers, so a given
//! `(game, target, plan)` reproduces the same report everywhere.
//!
//! Samples are drawn sequentially from one stream, so the first `k` samples of
//! a larger plan coincide with a `k`-sample plan of the same seed.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coalition::{full_mask, Coalition};
use crate::error::{Error, Result};
use crate::exact::Enumerator;
use crate::game::{check_player, CharacteristicGame, ValueKind};

pub const DEFAULT_SAMPLE_COUNT: usize = 5500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    sample_count: usize,
    pub seed: u64,
    pub kind: ValueKind,
}

impl SamplingPlan {
    pub fn new(sample_count: usize, seed: u64, kind: ValueKind) -> Result<Self> {
        if sample_count == 0 {
            return Err(Error::ZeroSamples);
        }
        Ok(Self {
            sample_count,
            seed,
            kind,
        })
    }

    pub fn with_default_count(seed: u64, kind: ValueKind) -> Self {
        Self {
            sample_count: DEFAULT_SAMPLE_COUNT,
            seed,
            kind,
        }
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    #[must_use]
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn expect_kind(&self, expected: ValueKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected,
                found: self.kind,
            })
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub sample_count: usize,
    /// Sample standard deviation over `sqrt(sample_count)`; zero for a single sample.
    pub standard_error: f64,
}

/// Welford accumulator.
#[derive(Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn report(&self) -> EstimateReport {
        let standard_error = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64).sqrt() / (self.count as f64).sqrt()
        } else {
            0.0
        };
        EstimateReport {
            estimate: self.mean,
            sample_count: self.count,
            standard_error,
        }
    }
}

fn player_stream(player: usize) -> u64 {
    player as u64
}

fn pair_stream(i: usize, j: usize) -> u64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    1 << 32 | (a as u64) << 16 | b as u64
}

/// Uniform integer in `0..bound` by Lemire's multiply-and-reject method.
fn uniform_below(rng: &mut impl RngCore, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let wide = u128::from(rng.next_u64()) * u128::from(bound);
        if (wide as u64) >= threshold {
            return (wide >> 64) as u64;
        }
    }
}

fn shuffle(rng: &mut impl RngCore, items: &mut [usize]) {
    for k in (1..items.len()).rev() {
        let r = uniform_below(rng, k as u64 + 1) as usize;
        items.swap(k, r);
    }
}

fn members_of(c: Coalition) -> Vec<usize> {
    c.members().collect()
}

/// Coalitions `S ⊆ rest` with independent 1/2 inclusion, drawn from the plan's
/// stream number `stream`.
pub(crate) fn uniform_coalitions(
    plan: &SamplingPlan,
    stream: u64,
    rest: Coalition,
) -> impl Iterator<Item = Coalition> {
    let mut rng = plan.rng(stream);
    let (bits, n) = (rest.bits(), rest.players());
    (0..plan.sample_count)
        .map(move |_| Coalition::from_bits(rng.next_u64() & bits, n).expect("subset of rest"))
}

/// Banzhaf value estimate from coalitions drawn with independent 1/2 inclusion.
pub fn sampled_banzhaf<G: CharacteristicGame>(
    game: &G,
    player: usize,
    plan: &SamplingPlan,
) -> Result<EstimateReport> {
    plan.expect_kind(ValueKind::Banzhaf)?;
    check_player(game, player)?;
    let rest = Coalition::full(game.players())?.without(player);
    let mut acc = Moments::default();
    for s in uniform_coalitions(plan, player_stream(player), rest) {
        acc.push(game.evaluate(s.with(player)) - game.evaluate(s));
    }
    Ok(acc.report())
}

/// Shapley value estimate from uniformly random permutations.
pub fn sampled_shapley<G: CharacteristicGame>(
    game: &G,
    player: usize,
    plan: &SamplingPlan,
) -> Result<EstimateReport> {
    plan.expect_kind(ValueKind::Shapley)?;
    check_player(game, player)?;
    let n = game.players();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = plan.rng(player_stream(player));
    let mut acc = Moments::default();
    for _ in 0..plan.sample_count {
        shuffle(&mut rng, &mut order);
        let predecessors = order.iter().take_while(|&&p| p != player).copied();
        let s = Coalition::from_members(predecessors, n)?;
        acc.push(game.evaluate(s.with(player)) - game.evaluate(s));
    }
    Ok(acc.report())
}

/// Dispatches on `plan.kind`.
pub fn sampled_value<G: CharacteristicGame>(
    game: &G,
    player: usize,
    plan: &SamplingPlan,
) -> Result<EstimateReport> {
    match plan.kind {
        ValueKind::Banzhaf => sampled_banzhaf(game, player, plan),
        ValueKind::Shapley => sampled_shapley(game, player, plan),
    }
}

/// Interaction index estimate. Banzhaf kind draws `S ⊆ P∖{i,j}` with 1/2
/// inclusion; Shapley kind draws `|S|` uniformly from `0..=n-2` and then a
/// uniform subset of that size, which reproduces the exact Shapley weights.
pub fn sampled_interaction<G: CharacteristicGame>(
    game: &G,
    i: usize,
    j: usize,
    plan: &SamplingPlan,
) -> Result<EstimateReport> {
    check_player(game, i)?;
    check_player(game, j)?;
    if i == j {
        return Err(Error::SamePlayer(i));
    }
    let (i, j) = (i.min(j), i.max(j));
    let n = game.players();
    let rest = Coalition::from_bits(full_mask(n) & !(1u64 << i) & !(1u64 << j), n)?;
    let mut rng = plan.rng(pair_stream(i, j));
    let mut acc = Moments::default();
    let mut others = members_of(rest);
    let bracket = |s: Coalition| {
        game.evaluate(s.with(i).with(j)) + game.evaluate(s)
            - game.evaluate(s.with(i))
            - game.evaluate(s.with(j))
    };
    for _ in 0..plan.sample_count {
        let s = match plan.kind {
            ValueKind::Banzhaf => Coalition::from_bits(rng.next_u64() & rest.bits(), n)?,
            ValueKind::Shapley => {
                shuffle(&mut rng, &mut others);
                let size = uniform_below(&mut rng, others.len() as u64 + 1) as usize;
                Coalition::from_members(others[..size].iter().copied(), n)?
            }
        };
        acc.push(bracket(s));
    }
    Ok(acc.report())
}

/// What a convergence sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepTarget {
    Player(usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub count: usize,
    pub mean_rel_error: f64,
    pub std_rel_error: f64,
}

/// Floor on `|exact|` in relative errors.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-9;

pub fn relative_error(estimate: f64, exact: f64) -> f64 {
    (estimate - exact).abs() / exact.abs().max(RELATIVE_ERROR_FLOOR)
}

/// Mean and standard deviation, over every target and seed, of the relative
/// error of the sampled estimate against exact enumeration, per sample count.
pub fn convergence_sweep<G>(
    game: &G,
    kind: ValueKind,
    targets: &[SweepTarget],
    counts: &[usize],
    seeds: &[u64],
) -> Result<Vec<SweepRow>>
where
    G: CharacteristicGame + Sync,
{
    use rayon::prelude::*;

    let enumerator = Enumerator::default();
    let exact = targets
        .iter()
        .map(|t| match *t {
            SweepTarget::Player(p) => enumerator.value(game, p, kind),
            SweepTarget::Pair(i, j) => enumerator.interaction(game, i, j, kind).map(|r| r.value),
        })
        .collect::<Result<Vec<_>>>()?;
    counts
        .iter()
        .map(|&count| {
            let base = SamplingPlan::new(count, 0, kind)?;
            let errors = seeds
                .par_iter()
                .map(|&seed| {
                    let plan = base.with_seed(seed);
                    targets
                        .iter()
                        .zip(&exact)
                        .map(|(t, &truth)| {
                            let report = match *t {
                                SweepTarget::Player(p) => sampled_value(game, p, &plan)?,
                                SweepTarget::Pair(i, j) => sampled_interaction(game, i, j, &plan)?,
                            };
                            Ok(relative_error(report.estimate, truth))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?
                .concat();
            let k = errors.len().max(1) as f64;
            let mean = errors.iter().sum::<f64>() / k;
            let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / k;
            Ok(SweepRow {
                count,
                mean_rel_error: mean,
                std_rel_error: var.sqrt(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_banzhaf, exact_interaction, exact_shapley};
    use crate::game::{AdditiveGame, FnGame, UnanimityGame};

    fn unanimity(members: &[usize], n: usize) -> UnanimityGame {
        UnanimityGame::new(Coalition::from_members(members.iter().copied(), n).unwrap()).unwrap()
    }

    #[test]
    fn zero_samples_rejected() {
        assert_eq!(
            SamplingPlan::new(0, 1, ValueKind::Banzhaf),
            Err(Error::ZeroSamples)
        );
    }

    #[test]
    fn kind_mismatch_rejected() {
        let g = AdditiveGame::new(vec![1.0, 2.0]).unwrap();
        let plan = SamplingPlan::new(10, 1, ValueKind::Shapley).unwrap();
        assert!(matches!(
            sampled_banzhaf(&g, 0, &plan),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn zero_game_is_exactly_zero() {
        let g = FnGame::new(6, |_| 0.0).unwrap();
        for kind in [ValueKind::Banzhaf, ValueKind::Shapley] {
            let plan = SamplingPlan::new(200, 3, kind).unwrap();
            let r = sampled_value(&g, 2, &plan).unwrap();
            assert_eq!((r.estimate, r.standard_error), (0.0, 0.0));
            let r = sampled_interaction(&g, 1, 4, &plan).unwrap();
            assert_eq!((r.estimate, r.standard_error), (0.0, 0.0));
        }
    }

    #[test]
    fn additive_game_has_no_variance() {
        let g = AdditiveGame::new(vec![0.2, 0.5, 0.3]).unwrap();
        for seed in 0..5 {
            for kind in [ValueKind::Banzhaf, ValueKind::Shapley] {
                let plan = SamplingPlan::new(100, seed, kind).unwrap();
                let r = sampled_value(&g, 1, &plan).unwrap();
                assert!((r.estimate - 0.5).abs() < 1e-12, "{r:?}");
                assert!(r.standard_error < 1e-12);
                assert_eq!(r.sample_count, 100);
                let r = sampled_interaction(&g, 0, 2, &plan).unwrap();
                assert!(r.estimate.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dummy_player_is_exactly_zero() {
        // player 3 never changes the payoff
        let g = FnGame::new(4, |c| (c.without(3).bits() as f64).sqrt()).unwrap();
        let plan = SamplingPlan::new(500, 9, ValueKind::Shapley).unwrap();
        assert_eq!(sampled_shapley(&g, 3, &plan).unwrap().estimate, 0.0);
    }

    #[test]
    fn pair_unanimity_interaction_is_one() {
        let g = unanimity(&[0, 1], 3);
        for kind in [ValueKind::Banzhaf, ValueKind::Shapley] {
            let r =
                sampled_interaction(&g, 0, 1, &SamplingPlan::new(50, 4, kind).unwrap()).unwrap();
            assert_eq!((r.estimate, r.standard_error), (1.0, 0.0));
        }
    }

    #[test]
    fn unanimity_banzhaf_in_twelve_players() {
        let g = unanimity(&[0, 1], 12);
        let exact = exact_banzhaf(&g, 0).unwrap();
        assert_eq!(exact, 0.5);
        let good = (0..20)
            .filter(|&seed| {
                let plan = SamplingPlan::new(5500, seed, ValueKind::Banzhaf).unwrap();
                (sampled_banzhaf(&g, 0, &plan).unwrap().estimate - exact).abs() <= 0.03
            })
            .count();
        assert!(good >= 19, "{good}");
    }

    #[test]
    fn unanimity_shapley_in_ten_players() {
        let g = unanimity(&[0, 1], 10);
        let exact = exact_shapley(&g, 0).unwrap();
        assert!((exact - 0.5).abs() < 1e-12);
        let plan = SamplingPlan::new(5500, 11, ValueKind::Shapley).unwrap();
        assert!((sampled_shapley(&g, 0, &plan).unwrap().estimate - exact).abs() <= 0.03);
    }

    #[test]
    fn deterministic_per_seed_and_prefix_stable() {
        let g = FnGame::new(7, |c| (c.bits() as f64).ln_1p()).unwrap();
        for kind in [ValueKind::Banzhaf, ValueKind::Shapley] {
            let plan = SamplingPlan::new(300, 42, kind).unwrap();
            let a = sampled_value(&g, 3, &plan).unwrap();
            let b = sampled_value(&g, 3, &plan).unwrap();
            assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
            assert_eq!(a.standard_error.to_bits(), b.standard_error.to_bits());
            let c = sampled_value(&g, 3, &plan.with_seed(43)).unwrap();
            assert_ne!(a.estimate, c.estimate);
            let ij = sampled_interaction(&g, 2, 5, &plan).unwrap();
            let ji = sampled_interaction(&g, 5, 2, &plan).unwrap();
            assert_eq!(ij, ji);
        }
    }

    #[test]
    fn shapley_interaction_sampler_is_unbiased() {
        let g = FnGame::new(6, |c| {
            let k = c.len() as f64;
            k * k.sqrt()
                + if c.contains(1) && c.contains(4) {
                    0.3 * k
                } else {
                    0.0
                }
        })
        .unwrap();
        let exact = exact_interaction(&g, 1, 4, ValueKind::Shapley)
            .unwrap()
            .value;
        let r = sampled_interaction(
            &g,
            1,
            4,
            &SamplingPlan::new(200_000, 5, ValueKind::Shapley).unwrap(),
        )
        .unwrap();
        assert!(
            (r.estimate - exact).abs() < 4.0 * r.standard_error + 1e-12,
            "{r:?} vs {exact}"
        );
    }

    #[test]
    fn uniform_below_covers_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hist = [0usize; 7];
        for _ in 0..7000 {
            hist[uniform_below(&mut rng, 7) as usize] += 1;
        }
        assert!(hist.iter().all(|&h| (850..1150).contains(&h)), "{hist:?}");
    }

    #[test]
    fn sweep_on_zero_game_and_errors() {
        let g = FnGame::new(5, |_| 0.0).unwrap();
        let rows = convergence_sweep(
            &g,
            ValueKind::Banzhaf,
            &[SweepTarget::Player(0)],
            &[10, 20],
            &[1, 2],
        )
        .unwrap();
        assert!(rows
            .iter()
            .all(|r| r.mean_rel_error == 0.0 && r.std_rel_error == 0.0));
        assert_eq!(
            convergence_sweep(
                &g,
                ValueKind::Banzhaf,
                &[SweepTarget::Player(0)],
                &[0],
                &[1]
            )
            .unwrap_err(),
            Error::ZeroSamples
        );
        let big = AdditiveGame::new(vec![1.0; 30]).unwrap();
        assert!(matches!(
            convergence_sweep(
                &big,
                ValueKind::Banzhaf,
                &[SweepTarget::Player(0)],
                &[10],
                &[1]
            ),
            Err(Error::CapExceeded { .. })
        ));
    }
}
