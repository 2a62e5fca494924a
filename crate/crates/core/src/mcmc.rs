//! Seeded Metropolis-Hastings walks on a fiber and the Monte Carlo exact test.
//!
//! Each step proposes one of the `2 * C(n, 2)^2` basis moves uniformly at
//! random. A proposal that would make an entry negative is a self-loop; a
//! valid one is accepted with the Metropolis ratio of the target. Acceptance
//! is decided in exact integer arithmetic, so a trajectory depends only on
//! the seed and the ChaCha20 stream (`rand_chacha::ChaCha20Rng`, seeded with
//! `seed_from_u64`), never on floating point.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::table::{enumerate_basis_moves, ContingencyTable, MarkovMove};
use crate::{Error, Result};

/// Distinct tables tracked exactly before the visit counter switches to a
/// HyperLogLog estimate.
pub const DEFAULT_VISIT_CAP: usize = 100_000;

/// Stationary distribution of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    /// Uniform over the fiber.
    #[default]
    Uniform,
    /// `pi(u)` proportional to `1 / prod u_ij!`, the conditional null
    /// distribution of independence given the margins.
    Hypergeometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub steps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub target: Target,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { steps: 100_000, burn_in: 1_000, thinning: 1, seed: 0, target: Target::Uniform }
    }
}

impl WalkConfig {
    /// `thinning >= 1`, and unless the walk is empty, `burn_in < steps` and
    /// `thinning <= steps - burn_in`.
    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::InvalidConfig("thinning must be at least 1".into()));
        }
        if self.steps == 0 {
            if self.burn_in != 0 {
                return Err(Error::InvalidConfig("burn-in must be 0 when steps is 0".into()));
            }
            return Ok(());
        }
        if self.burn_in >= self.steps {
            return Err(Error::InvalidConfig(format!(
                "burn-in {} must be less than steps {}",
                self.burn_in, self.steps
            )));
        }
        if self.thinning > self.steps - self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "thinning {} exceeds the {} post-burn-in steps",
                self.thinning,
                self.steps - self.burn_in
            )));
        }
        Ok(())
    }

    /// Number of samples a full run emits.
    pub fn sample_count(&self) -> u64 {
        self.steps.saturating_sub(self.burn_in) / self.thinning.max(1)
    }

    /// Whether the state after step `step` (1-based) is emitted.
    fn emits(&self, step: u64) -> bool {
        step > self.burn_in && (step - self.burn_in) % self.thinning == 0
    }
}

/// Number of distinct tables seen so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistinctCount {
    Exact(usize),
    Approximate(f64),
}

impl DistinctCount {
    pub fn is_approximate(&self) -> bool {
        matches!(self, Self::Approximate(_))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Self::Exact(k) => k as f64,
            Self::Approximate(x) => x,
        }
    }
}

/// Per-table visit counts, exact up to `cap` distinct tables and a
/// HyperLogLog distinct-count estimate beyond that.
#[derive(Debug, Clone)]
pub struct VisitCounter {
    cap: usize,
    exact: BTreeMap<Vec<u32>, u64>,
    sketch: Option<HyperLogLog>,
}

impl VisitCounter {
    pub fn new(cap: usize) -> Self {
        Self { cap, exact: BTreeMap::new(), sketch: None }
    }

    pub fn record(&mut self, table: &ContingencyTable) {
        if let Some(sketch) = &mut self.sketch {
            sketch.insert(table.entries());
            return;
        }
        if let Some(count) = self.exact.get_mut(table.entries()) {
            *count += 1;
            return;
        }
        if self.exact.len() < self.cap {
            self.exact.insert(table.entries().to_vec(), 1);
            return;
        }
        let mut sketch = HyperLogLog::new();
        for key in self.exact.keys() {
            sketch.insert(key);
        }
        sketch.insert(table.entries());
        self.exact.clear();
        self.sketch = Some(sketch);
    }

    pub fn is_approximate(&self) -> bool {
        self.sketch.is_some()
    }

    pub fn distinct(&self) -> DistinctCount {
        match &self.sketch {
            Some(s) => DistinctCount::Approximate(s.estimate()),
            None => DistinctCount::Exact(self.exact.len()),
        }
    }

    /// Visits to `table`, or `None` once counting has become approximate.
    pub fn count(&self, table: &ContingencyTable) -> Option<u64> {
        if self.sketch.is_some() {
            return None;
        }
        Some(self.exact.get(table.entries()).copied().unwrap_or(0))
    }

    /// Exact counts keyed by row-major entries; empty once approximate.
    pub fn exact_counts(&self) -> impl Iterator<Item = (&[u32], u64)> {
        self.exact.iter().map(|(k, &v)| (k.as_slice(), v))
    }
}

const HLL_BITS: u32 = 12;
const HLL_REGISTERS: usize = 1 << HLL_BITS;

#[derive(Debug, Clone)]
struct HyperLogLog {
    registers: Vec<u8>,
}

impl HyperLogLog {
    fn new() -> Self {
        Self { registers: vec![0; HLL_REGISTERS] }
    }

    fn insert(&mut self, key: &[u32]) {
        let h = hash_entries(key);
        let index = (h >> (64 - HLL_BITS)) as usize;
        let rest = h << HLL_BITS;
        let rank = (rest.leading_zeros().min(64 - HLL_BITS) + 1) as u8;
        let slot = &mut self.registers[index];
        *slot = (*slot).max(rank);
    }

    fn estimate(&self) -> f64 {
        let m = HLL_REGISTERS as f64;
        let alpha = 0.7213 / (1.0 + 1.079 / m);
        let harmonic: f64 = self.registers.iter().map(|&r| 1.0 / (1u64 << r) as f64).sum();
        let raw = alpha * m * m / harmonic;
        let zeros = self.registers.iter().filter(|&&r| r == 0).count();
        if raw <= 2.5 * m && zeros > 0 {
            m * libm::log(m / zeros as f64)
        } else {
            raw
        }
    }
}

/// SplitMix64 finalizer folded over the entries.
fn hash_entries(key: &[u32]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    key.iter()
        .fold(0x9e37_79b9_7f4a_7c15u64, |h, &x| mix(h.wrapping_add(u64::from(x)).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Running state of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub current: ContingencyTable,
    pub step_index: u64,
    pub accepted_count: u64,
    pub visits: VisitCounter,
    target: Target,
    moves: Vec<MarkovMove>,
    rng: ChaCha20Rng,
}

impl ChainState {
    pub fn new(start: ContingencyTable, config: &WalkConfig) -> Self {
        Self::with_visit_cap(start, config, DEFAULT_VISIT_CAP)
    }

    pub fn with_visit_cap(start: ContingencyTable, config: &WalkConfig, cap: usize) -> Self {
        let moves = if start.n() < 2 {
            Vec::new()
        } else {
            enumerate_basis_moves(start.n()).expect("n >= 2")
        };
        let mut visits = VisitCounter::new(cap);
        visits.record(&start);
        Self {
            current: start,
            step_index: 0,
            accepted_count: 0,
            visits,
            target: config.target,
            moves,
            rng: ChaCha20Rng::seed_from_u64(config.seed),
        }
    }

    /// One Metropolis-Hastings step. Returns whether the table changed.
    pub fn step(&mut self) -> bool {
        self.step_index += 1;
        let moved = self.try_move();
        if moved {
            self.accepted_count += 1;
        }
        debug_assert!(margins_hold(&self.current));
        self.visits.record(&self.current);
        moved
    }

    fn try_move(&mut self) -> bool {
        if self.moves.is_empty() {
            return false;
        }
        let m = self.moves[uniform_index(&mut self.rng, self.moves.len() as u64) as usize];
        if !self.current.is_valid_move(&m) {
            return false;
        }
        let (num, den) = acceptance_ratio(&self.current, &m, self.target);
        if num < den {
            // Accept iff U < num / den with U a 53-bit dyadic uniform.
            let u = self.rng.next_u64() >> 11;
            if u128::from(u) * u128::from(den) >= u128::from(num) << 53 {
                return false;
            }
        }
        self.current.apply_move_in_place(&m).expect("move was checked valid");
        true
    }
}

fn margins_hold(t: &ContingencyTable) -> bool {
    let n = t.n();
    let r = t.r();
    t.rows().all(|row| row.iter().sum::<u32>() == r) && (0..n).all(|j| (0..n).map(|i| t.get(i, j)).sum::<u32>() == r)
}

/// Unbiased draw from `0..bound` (Lemire's multiply-and-reject).
fn uniform_index(rng: &mut ChaCha20Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let product = u128::from(rng.next_u64()) * u128::from(bound);
        if (product as u64) >= threshold {
            return (product >> 64) as u64;
        }
    }
}

/// `pi(u + m) / pi(u)` as a fraction, for a move valid at `u`.
///
/// Under the hypergeometric target this is `u_a u_b / ((u_c + 1)(u_d + 1))`
/// where `a, b` are the cells `m` decreases and `c, d` the cells it
/// increases.
pub fn acceptance_ratio(table: &ContingencyTable, m: &MarkovMove, target: Target) -> (u64, u64) {
    match target {
        Target::Uniform => (1, 1),
        Target::Hypergeometric => {
            let num: u64 = m.subtracted().iter().map(|&(i, j)| u64::from(table.get(i, j))).product();
            let den: u64 = m.added().iter().map(|&(i, j)| u64::from(table.get(i, j)) + 1).product();
            (num, den)
        }
    }
}

/// One off-diagonal entry of the transition matrix:
/// `P(from, to) = numerator / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub to: ContingencyTable,
    pub numerator: u64,
    pub denominator: u64,
}

impl Transition {
    pub fn probability(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// Exact transition probabilities out of `table` to its neighbours, in
/// canonical move order. The self-loop takes the remaining mass.
pub fn transition_probabilities(table: &ContingencyTable, target: Target) -> Vec<Transition> {
    if table.n() < 2 {
        return Vec::new();
    }
    let proposals = 2 * crate::table::binomial2(table.n()).pow(2);
    table
        .valid_moves()
        .into_iter()
        .map(|m| {
            let (num, den) = acceptance_ratio(table, &m, target);
            let (numerator, denominator) = if num >= den { (1, proposals) } else { (num, den * proposals) };
            Transition { to: table.apply_move(&m).expect("valid move"), numerator, denominator }
        })
        .collect()
}

/// Runs `config.steps` steps from `start`, passing every emitted sample to
/// `sink`. Emitted samples are the states after steps `burn_in + thinning`,
/// `burn_in + 2 * thinning`, and so on.
pub fn run_walk<F>(start: ContingencyTable, config: &WalkConfig, mut sink: F) -> Result<ChainState>
where
    F: FnMut(&ContingencyTable),
{
    config.validate()?;
    let mut state = ChainState::new(start, config);
    for step in 1..=config.steps {
        state.step();
        if config.emits(step) {
            sink(&state.current);
        }
    }
    Ok(state)
}

/// Result of a Monte Carlo exact test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactTestResult {
    pub observed_statistic: f64,
    /// Fraction of samples whose statistic is at least the observed one.
    pub p_value_estimate: f64,
    /// Batch-means standard error of the estimate.
    pub standard_error: f64,
    pub samples_used: u64,
}

/// Chi-square exact test of `observed` against samples of the walk started
/// at `observed` itself. Ties with the observed statistic count as extreme.
pub fn exact_test(observed: &ContingencyTable, config: &WalkConfig) -> Result<ExactTestResult> {
    config.validate()?;
    if config.sample_count() == 0 {
        return Err(Error::InvalidConfig("the walk emits no samples".into()));
    }
    let threshold = observed.chi_square_numerator();
    let mut hits: Vec<bool> = Vec::with_capacity(config.sample_count() as usize);
    run_walk(observed.clone(), config, |t| hits.push(t.chi_square_numerator() >= threshold))?;
    let (p_value_estimate, standard_error) = batch_means(&hits);
    Ok(ExactTestResult {
        observed_statistic: observed.chi_square(),
        p_value_estimate,
        standard_error,
        samples_used: hits.len() as u64,
    })
}

/// [`exact_test`] on raw rows, rejecting tables whose margins are not all
/// equal.
pub fn exact_test_rows(rows: &[Vec<i64>], config: &WalkConfig) -> Result<ExactTestResult> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidDimension("table must be square and non-empty".into()));
    }
    let row_sums: Vec<i64> = rows.iter().map(|row| row.iter().sum()).collect();
    let col_sums: Vec<i64> = (0..n).map(|j| rows.iter().map(|row| row[j]).sum()).collect();
    let r = row_sums[0];
    if let Some(s) = row_sums.iter().chain(&col_sums).find(|&&s| s != r) {
        return Err(Error::MarginMismatch(format!("margins {row_sums:?} / {col_sums:?} are not all equal (found {s} and {r})")));
    }
    exact_test(&ContingencyTable::infer(rows)?, config)
}

/// Mean of the indicator sequence and its batch-means standard error, using
/// `floor(sqrt(N))` batches of equal size (trailing remainder dropped from
/// the variance estimate only).
fn batch_means(hits: &[bool]) -> (f64, f64) {
    let total = hits.len();
    let mean = hits.iter().filter(|&&h| h).count() as f64 / total as f64;
    let batches = libm::sqrt(total as f64) as usize;
    if batches < 2 {
        return (mean, libm::sqrt(mean * (1.0 - mean) / total as f64));
    }
    let size = total / batches;
    let used = &hits[..batches * size];
    let grand = used.iter().filter(|&&h| h).count() as f64 / used.len() as f64;
    let spread: f64 = used
        .chunks(size)
        .map(|chunk| {
            let d = chunk.iter().filter(|&&h| h).count() as f64 / size as f64 - grand;
            d * d
        })
        .sum();
    let variance = size as f64 * spread / (batches - 1) as f64;
    (mean, libm::sqrt(variance / used.len() as f64))
}
