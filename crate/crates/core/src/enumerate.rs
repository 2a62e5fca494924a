//! Exhaustive enumeration of fibers.
//!
//! [`enumerate_fiber`] lists every vertex of `G(n, r)` by row-by-row
//! backtracking, [`count_fiber`] counts them by an independent transfer-matrix
//! recursion, and [`enumerate_general_fiber`] lists `{v >= 0 : A v = b}` for
//! an arbitrary integer matrix.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::table::ContingencyTable;
use crate::{Error, Result};

/// Default vertex-count guard for enumeration.
pub const DEFAULT_CAP: usize = 10_000_000;

/// All tables of `F(n, r)`, sorted lexicographically by their row-major entry
/// vectors. A table's position in that order is its vertex id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fiber {
    n: usize,
    r: u32,
    // len() * n * n entries, one table after another.
    flat: Vec<u32>,
}

impl Fiber {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn len(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.flat.len() / (self.n * self.n)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major entries of vertex `id`.
    pub fn entries(&self, id: usize) -> &[u32] {
        let w = self.n * self.n;
        &self.flat[id * w..(id + 1) * w]
    }

    pub fn table(&self, id: usize) -> ContingencyTable {
        ContingencyTable::from_entries_unchecked(self.n, self.r, self.entries(id).to_vec())
    }

    pub fn tables(&self) -> impl Iterator<Item = ContingencyTable> + '_ {
        (0..self.len()).map(|id| self.table(id))
    }

    /// Vertex id of a row-major entry vector.
    pub fn index_of_entries(&self, entries: &[u32]) -> Option<usize> {
        if entries.len() != self.n * self.n {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match self.entries(mid).cmp(entries) {
                core::cmp::Ordering::Less => lo = mid + 1,
                core::cmp::Ordering::Greater => hi = mid,
                core::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn index_of(&self, t: &ContingencyTable) -> Option<usize> {
        if t.n() != self.n || t.r() != self.r {
            return None;
        }
        self.index_of_entries(t.entries())
    }
}

/// Enumerates `F(n, r)` with the default size guard.
pub fn enumerate_fiber(n: usize, r: u32) -> Result<Fiber> {
    enumerate_fiber_capped(n, r, DEFAULT_CAP)
}

/// Enumerates `F(n, r)`, refusing with [`Error::SizeLimitExceeded`] once more
/// than `cap` tables have been produced.
///
/// Each row is a composition of `r` bounded by the remaining column budgets,
/// produced in lexicographic order; the last row is forced. Any non-negative
/// budgets with the right total admit a completion, so no branch dead-ends
/// and the output is already in canonical order.
pub fn enumerate_fiber_capped(n: usize, r: u32, cap: usize) -> Result<Fiber> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let mut search = FiberSearch {
        n,
        r,
        cap,
        current: vec![0; n * n],
        budget: vec![r; n],
        out: Vec::new(),
    };
    search.row(0)?;
    let fiber = Fiber { n, r, flat: search.out };
    debug_assert!((1..fiber.len()).all(|k| fiber.entries(k - 1) < fiber.entries(k)));
    Ok(fiber)
}

struct FiberSearch {
    n: usize,
    r: u32,
    cap: usize,
    current: Vec<u32>,
    budget: Vec<u32>,
    out: Vec<u32>,
}

impl FiberSearch {
    fn row(&mut self, i: usize) -> Result<()> {
        let n = self.n;
        if i + 1 == n {
            self.current[i * n..].copy_from_slice(&self.budget);
            if self.out.len() / (n * n) >= self.cap {
                return Err(Error::SizeLimitExceeded { cap: self.cap });
            }
            self.out.extend_from_slice(&self.current);
            return Ok(());
        }
        self.cell(i, 0, self.r)
    }

    fn cell(&mut self, i: usize, j: usize, left: u32) -> Result<()> {
        let n = self.n;
        if j + 1 == n {
            if left > self.budget[j] {
                return Ok(());
            }
            self.current[i * n + j] = left;
            self.budget[j] -= left;
            let res = self.row(i + 1);
            self.budget[j] += left;
            return res;
        }
        // Columns j+1.. must absorb what this cell leaves.
        let rest: u32 = self.budget[j + 1..].iter().sum();
        let lo = left.saturating_sub(rest);
        let hi = left.min(self.budget[j]);
        for x in lo..=hi {
            self.current[i * n + j] = x;
            self.budget[j] -= x;
            let res = self.cell(i, j + 1, left - x);
            self.budget[j] += x;
            res?;
        }
        Ok(())
    }
}

/// `|F(n, r)|` without enumerating tables: a transfer-matrix recursion over
/// rows whose state is the sorted multiset of residual column margins.
pub fn count_fiber(n: usize, r: u32) -> BigUint {
    if n == 0 {
        return BigUint::zero();
    }
    let mut states: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
    states.insert(vec![r; n], BigUint::one());
    for _ in 0..n {
        let mut next: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
        for (margins, ways) in &states {
            let mut row = vec![0u32; n];
            for_each_bounded_composition(r, margins, &mut row, 0, &mut |row| {
                let mut residual: Vec<u32> = margins.iter().zip(row).map(|(m, x)| m - x).collect();
                residual.sort_unstable();
                *next.entry(residual).or_insert_with(BigUint::zero) += ways;
            });
        }
        states = next;
    }
    states.remove(&vec![0; n]).unwrap_or_default()
}

fn for_each_bounded_composition(
    left: u32,
    bounds: &[u32],
    row: &mut [u32],
    j: usize,
    f: &mut impl FnMut(&[u32]),
) {
    if j == bounds.len() {
        if left == 0 {
            f(row);
        }
        return;
    }
    for x in 0..=left.min(bounds[j]) {
        row[j] = x;
        for_each_bounded_composition(left - x, bounds, row, j + 1, f);
    }
    row[j] = 0;
}

/// Non-negative integer solutions of `A v = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralFiber {
    pub matrix: Vec<Vec<i64>>,
    pub rhs: Vec<i64>,
    /// Sorted lexicographically.
    pub points: Vec<Vec<i64>>,
}

/// Enumerates `{v in N^m : A v = b}` by backtracking with interval
/// propagation. Fails with [`Error::UnboundedFiber`] when propagation from
/// the rows of `A` cannot bound some variable, and with
/// [`Error::SizeLimitExceeded`] beyond `cap` points.
pub fn enumerate_general_fiber(matrix: &[Vec<i64>], rhs: &[i64], cap: usize) -> Result<GeneralFiber> {
    let d = matrix.len();
    if rhs.len() != d {
        return Err(Error::InvalidDimension(format!(
            "matrix has {d} rows but right-hand side has {} entries",
            rhs.len()
        )));
    }
    let m = matrix.first().map_or(0, Vec::len);
    if matrix.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidDimension("matrix rows differ in length".into()));
    }
    let mut upper = propagate_upper_bounds(matrix, rhs, m)?;
    let mut order: Vec<usize> = (0..m).collect();
    // Stable, so ties keep index order.
    order.sort_by_key(|&k| core::cmp::Reverse(matrix.iter().filter(|row| row[k] != 0).count()));

    let mut search = GeneralSearch {
        matrix,
        rhs,
        order: &order,
        lower: vec![0; m],
        upper: core::mem::take(&mut upper),
        value: vec![0; m],
        cap,
        points: Vec::new(),
    };
    if search.feasible(0) {
        search.assign(0)?;
    }
    let mut points = search.points;
    points.sort();
    Ok(GeneralFiber { matrix: matrix.to_vec(), rhs: rhs.to_vec(), points })
}

/// Upper bounds for every variable, from iterating
/// `a_k x_k = b - sum_{l != k} a_l x_l` over the rows until nothing changes.
fn propagate_upper_bounds(matrix: &[Vec<i64>], rhs: &[i64], m: usize) -> Result<Vec<i64>> {
    let mut upper: Vec<Option<i64>> = vec![None; m];
    loop {
        let mut changed = false;
        for (row, &b) in matrix.iter().zip(rhs) {
            for k in 0..m {
                let a = row[k];
                if a == 0 {
                    continue;
                }
                // Range of sum_{l != k} a_l x_l with x_l in [0, upper_l].
                let (mut lo, mut hi) = (Some(0i64), Some(0i64));
                for l in (0..m).filter(|&l| l != k && row[l] != 0) {
                    let c = row[l];
                    match upper[l] {
                        Some(u) => {
                            let ext = c.checked_mul(u).ok_or(Error::Overflow)?;
                            if c > 0 {
                                hi = hi.and_then(|h| h.checked_add(ext));
                            } else {
                                lo = lo.and_then(|v| v.checked_add(ext));
                            }
                        }
                        None if c > 0 => hi = None,
                        None => lo = None,
                    }
                }
                // a x_k = b - rest, rest in [lo, hi].
                let bound = if a > 0 {
                    lo.map(|lo| (b - lo).div_euclid(a))
                } else {
                    hi.map(|hi| (hi - b).div_euclid(-a))
                };
                if let Some(bound) = bound {
                    let bound = bound.max(-1);
                    if upper[k].is_none_or(|u| bound < u) {
                        upper[k] = Some(bound);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    upper
        .into_iter()
        .enumerate()
        .map(|(var, u)| u.ok_or(Error::UnboundedFiber { var }))
        .collect()
}

struct GeneralSearch<'a> {
    matrix: &'a [Vec<i64>],
    rhs: &'a [i64],
    order: &'a [usize],
    lower: Vec<i64>,
    upper: Vec<i64>,
    value: Vec<i64>,
    cap: usize,
    points: Vec<Vec<i64>>,
}

impl GeneralSearch<'_> {
    /// Every row can still hit its target with the first `fixed` variables
    /// of `order` pinned and the rest free within their bounds.
    fn feasible(&self, fixed: usize) -> bool {
        let mut pinned = vec![false; self.value.len()];
        for &k in &self.order[..fixed] {
            pinned[k] = true;
        }
        self.matrix.iter().zip(self.rhs).all(|(row, &b)| {
            let (mut lo, mut hi) = (0i64, 0i64);
            for (k, &a) in row.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                if pinned[k] {
                    lo += a * self.value[k];
                    hi += a * self.value[k];
                } else if a > 0 {
                    lo += a * self.lower[k];
                    hi += a * self.upper[k];
                } else {
                    lo += a * self.upper[k];
                    hi += a * self.lower[k];
                }
            }
            lo <= b && b <= hi
        })
    }

    fn assign(&mut self, depth: usize) -> Result<()> {
        if depth == self.order.len() {
            if self.points.len() >= self.cap {
                return Err(Error::SizeLimitExceeded { cap: self.cap });
            }
            self.points.push(self.value.clone());
            return Ok(());
        }
        let k = self.order[depth];
        for x in self.lower[k]..=self.upper[k] {
            self.value[k] = x;
            if self.feasible(depth + 1) {
                self.assign(depth + 1)?;
            }
        }
        self.value[k] = 0;
        Ok(())
    }
}

/// The `2n x n^2` margin matrix of `n x n` tables: row sums, then column
/// sums, against row-major vectorized tables.
pub fn margin_matrix(n: usize) -> Vec<Vec<i64>> {
    let mut rows = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut row = vec![0; n * n];
        row[i * n..(i + 1) * n].fill(1);
        rows.push(row);
    }
    for j in 0..n {
        let mut row = vec![0; n * n];
        for i in 0..n {
            row[i * n + j] = 1;
        }
        rows.push(row);
    }
    rows
}

/// Hemmecke's `(2k + 1) x (4k + 2)` matrix. For `i < k`, row `i` reads
/// `x_i + x_{k+i} - x_{4k}` and row `k + i` reads `x_{2k+i} + x_{3k+i} -
/// x_{4k+1}` (0-based); the last row is `x_{4k} + x_{4k+1}`. The fiber over
/// `e_{2k+1}` has `2^(k+1)` points forming two `k`-cubes.
pub fn hemmecke_matrix(k: usize) -> Vec<Vec<i64>> {
    let cols = 4 * k + 2;
    let mut rows = Vec::with_capacity(2 * k + 1);
    for half in 0..2 {
        for i in 0..k {
            let mut row = vec![0; cols];
            row[2 * half * k + i] = 1;
            row[2 * half * k + k + i] = 1;
            row[4 * k + half] = -1;
            rows.push(row);
        }
    }
    let mut last = vec![0; cols];
    last[4 * k] = 1;
    last[4 * k + 1] = 1;
    rows.push(last);
    rows
}

/// Right-hand side `e_{2k+1}` for [`hemmecke_matrix`].
pub fn hemmecke_rhs(k: usize) -> Vec<i64> {
    let mut b = vec![0; 2 * k + 1];
    b[2 * k] = 1;
    b
}
