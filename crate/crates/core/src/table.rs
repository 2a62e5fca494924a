//! Contingency tables with equal margins and the 2x2 swap moves between them.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// An `n x n` table of non-negative integers whose row and column sums all
/// equal `r`. Entries are stored row-major; that order is the canonical
/// serialization order everywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContingencyTable {
    n: usize,
    r: u32,
    entries: Vec<u32>,
}

impl ContingencyTable {
    /// Validates a table given as rows of signed integers.
    pub fn validate(n: usize, r: u32, rows: &[Vec<i64>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        if rows.len() != n {
            return Err(Error::InvalidDimension(format!(
                "expected {n} rows, found {}",
                rows.len()
            )));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidDimension(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &value) in row.iter().enumerate() {
                if value < 0 {
                    return Err(Error::NegativeEntry { row: i + 1, col: j + 1, value });
                }
            }
            let sum = row.iter().try_fold(0i64, |acc, &x| acc.checked_add(x)).ok_or(Error::Overflow)?;
            if sum != i64::from(r) {
                return Err(Error::RowSumMismatch { row: i + 1, sum, expected: i64::from(r) });
            }
            // Row sum r bounds every entry by r, so the conversion cannot fail.
            entries.extend(row.iter().map(|&x| x as u32));
        }
        for j in 0..n {
            let sum: i64 = (0..n).map(|i| i64::from(entries[i * n + j])).sum();
            if sum != i64::from(r) {
                return Err(Error::ColumnSumMismatch { col: j + 1, sum, expected: i64::from(r) });
            }
        }
        Ok(Self { n, r, entries })
    }

    /// Validates a square table, taking `r` from the first row sum.
    pub fn infer(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidDimension("table has no rows".into()))?;
        let sum = first.iter().try_fold(0i64, |acc, &x| acc.checked_add(x)).ok_or(Error::Overflow)?;
        let r = u32::try_from(sum).map_err(|_| Error::RowSumMismatch { row: 1, sum, expected: 0 })?;
        Self::validate(n, r, rows)
    }

    /// Validates a row-major entry vector.
    pub fn from_entries(n: usize, r: u32, entries: Vec<u32>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidDimension(format!(
                "{} entries do not form a {n}x{n} table",
                entries.len()
            )));
        }
        let rows: Vec<Vec<i64>> = entries
            .chunks(n)
            .map(|row| row.iter().map(|&x| i64::from(x)).collect())
            .collect();
        Self::validate(n, r, &rows)
    }

    /// Caller guarantees the margins.
    pub(crate) fn from_entries_unchecked(n: usize, r: u32, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        Self { n, r, entries }
    }

    /// `r` times the permutation matrix with a one at `(i, perm[i])`.
    pub fn scaled_permutation(perm: &[usize], r: u32) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &c in perm {
            if c >= n || core::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidDimension("not a permutation".into()));
            }
        }
        let mut entries = vec![0; n * n];
        for (i, &c) in perm.iter().enumerate() {
            entries[i * n + c] = r;
        }
        Ok(Self { n, r, entries })
    }

    /// `r * I`.
    pub fn diagonal(n: usize, r: u32) -> Self {
        let perm: Vec<usize> = (0..n).collect();
        Self::scaled_permutation(&perm, r).expect("identity is a permutation")
    }

    /// `r` on the anti-diagonal, the unique sink of the oriented fiber graph.
    pub fn anti_diagonal(n: usize, r: u32) -> Self {
        let perm: Vec<usize> = (0..n).map(|i| n - 1 - i).collect();
        Self::scaled_permutation(&perm, r).expect("reversal is a permutation")
    }

    /// `r * P` where `P` has its ones at `(1, n)` and `(i, i - 1)` for
    /// `i >= 2` (1-based): the cyclic shift farthest from `r * I`.
    pub fn cyclic_shift(n: usize, r: u32) -> Self {
        let perm: Vec<usize> = (0..n).map(|i| if i == 0 { n - 1 } else { i - 1 }).collect();
        Self::scaled_permutation(&perm, r).expect("cycle is a permutation")
    }

    /// The all-`r/n` table, when `n` divides `r`.
    pub fn uniform(n: usize, r: u32) -> Option<Self> {
        let per = r.checked_div(n as u32)?;
        (per * n as u32 == r).then(|| Self { n, r, entries: vec![per; n * n] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Entry at 0-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.n + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.entries.chunks(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.rows().map(<[u32]>::to_vec).collect()
    }

    pub fn support(&self) -> Support {
        let positions = (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) > 0)
            .collect();
        Support { positions }
    }

    /// True when the only positive entries equal `r`, i.e. the table is `r`
    /// times a permutation matrix.
    pub fn is_scaled_permutation(&self) -> bool {
        self.entries.iter().all(|&x| x == 0 || x == self.r)
    }

    /// True when every entry is 0 or 1.
    pub fn is_zero_one(&self) -> bool {
        self.entries.iter().all(|&x| x <= 1)
    }

    /// Both entries the move subtracts from are positive.
    pub fn is_valid_move(&self, m: &MarkovMove) -> bool {
        debug_assert!(m.i2 < self.n && m.j2 < self.n, "move dimensioned for a larger table");
        let ok = m.subtracted().iter().all(|&(i, j)| self.get(i, j) >= 1);
        if ok {
            // Fixed margins keep the increased entries below r.
            debug_assert!(m.added().iter().all(|&(i, j)| self.get(i, j) < self.r));
        }
        ok
    }

    pub fn apply_move(&self, m: &MarkovMove) -> Result<Self> {
        let mut out = self.clone();
        out.apply_move_in_place(m)?;
        Ok(out)
    }

    pub fn apply_move_in_place(&mut self, m: &MarkovMove) -> Result<()> {
        if m.i2 >= self.n || m.j2 >= self.n || !self.is_valid_move(m) {
            return Err(Error::InvalidMove(m.to_string()));
        }
        let n = self.n;
        for (i, j) in m.subtracted() {
            self.entries[i * n + j] -= 1;
        }
        for (i, j) in m.added() {
            let cell = &mut self.entries[i * n + j];
            *cell = cell.checked_add(1).ok_or(Error::Overflow)?;
        }
        Ok(())
    }

    /// Valid moves in canonical order.
    pub fn valid_moves(&self) -> Vec<MarkovMove> {
        enumerate_moves_unchecked(self.n)
            .filter(|m| self.is_valid_move(m))
            .collect()
    }

    /// Vertex degree in `G(n, r)`, counted move by move.
    pub fn degree(&self) -> usize {
        enumerate_moves_unchecked(self.n)
            .filter(|m| self.is_valid_move(m))
            .count()
    }

    /// Number of unordered pairs of positive entries in distinct rows and
    /// distinct columns. Each such pair is subtracted from by exactly one
    /// valid move, so this equals [`degree`](Self::degree).
    pub fn positive_pair_count(&self) -> usize {
        let support = self.support().positions;
        let mut count = 0;
        for (a, &(i1, j1)) in support.iter().enumerate() {
            for &(i2, j2) in &support[a + 1..] {
                if i1 != i2 && j1 != j2 {
                    count += 1;
                }
            }
        }
        count
    }

    /// The basis move `m` with `self + m == other`, if any.
    pub fn move_to(&self, other: &Self) -> Option<MarkovMove> {
        if self.n != other.n || self.n < 2 {
            return None;
        }
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (k, (&a, &b)) in self.entries.iter().zip(&other.entries).enumerate() {
            match i64::from(b) - i64::from(a) {
                0 => {}
                1 => plus.push((k / self.n, k % self.n)),
                -1 => minus.push((k / self.n, k % self.n)),
                _ => return None,
            }
        }
        if plus.len() != 2 || minus.len() != 2 {
            return None;
        }
        // Cells come out row-major, so plus[0] has the smaller row.
        let (p0, p1) = (plus[0], plus[1]);
        let (i1, i2) = (p0.0, p1.0);
        if i1 == i2 || p0.1 == p1.1 {
            return None;
        }
        let sign = if p0.1 < p1.1 { Sign::Plus } else { Sign::Minus };
        let (j1, j2) = (p0.1.min(p1.1), p0.1.max(p1.1));
        let m = MarkovMove::new(i1, j1, i2, j2, sign).ok()?;
        let mut sub = m.subtracted();
        sub.sort_unstable();
        (sub[..] == minus[..]).then_some(m)
    }

    /// Pearson statistic numerator `sum (n * u_ij - r)^2`; the statistic
    /// itself is this divided by `n * r`. Kept integral so ties compare
    /// exactly.
    pub fn chi_square_numerator(&self) -> u128 {
        let n = self.n as i128;
        let r = i128::from(self.r);
        self.entries
            .iter()
            .map(|&x| {
                let d = n * i128::from(x) - r;
                (d * d) as u128
            })
            .sum()
    }

    /// Pearson chi-square against the equal-margin expectation `r / n`.
    pub fn chi_square(&self) -> f64 {
        if self.r == 0 {
            return 0.0;
        }
        self.chi_square_numerator() as f64 / (self.n as f64 * f64::from(self.r))
    }
}

impl fmt::Display for ContingencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// Validates a table given as rows; see [`ContingencyTable::validate`].
pub fn validate_table(n: usize, r: u32, rows: &[Vec<i64>]) -> Result<ContingencyTable> {
    ContingencyTable::validate(n, r, rows)
}

/// Positions (0-based, row-major order) of the strictly positive entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    pub positions: Vec<(usize, usize)>,
}

impl Support {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, pos: (usize, usize)) -> bool {
        self.positions.binary_search(&pos).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }
}

/// `sign * (e[i1][j1] + e[i2][j2] - e[i1][j2] - e[i2][j1])` with `i1 < i2`
/// and `j1 < j2`. The derived ordering is the canonical move order:
/// lexicographic on `(i1, j1, i2, j2, sign)` with minus before plus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarkovMove {
    i1: usize,
    j1: usize,
    i2: usize,
    j2: usize,
    sign: Sign,
}

impl MarkovMove {
    /// 0-based indices.
    pub fn new(i1: usize, j1: usize, i2: usize, j2: usize, sign: Sign) -> Result<Self> {
        if i1 >= i2 || j1 >= j2 {
            return Err(Error::InvalidDimension(format!(
                "move needs i1 < i2 and j1 < j2, got ({i1}, {j1}, {i2}, {j2})"
            )));
        }
        Ok(Self { i1, j1, i2, j2, sign })
    }

    pub fn rows(&self) -> (usize, usize) {
        (self.i1, self.i2)
    }

    pub fn cols(&self) -> (usize, usize) {
        (self.j1, self.j2)
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn negated(&self) -> Self {
        Self { sign: self.sign.flip(), ..*self }
    }

    /// Cells increased by one.
    pub fn added(&self) -> [(usize, usize); 2] {
        match self.sign {
            Sign::Plus => [(self.i1, self.j1), (self.i2, self.j2)],
            Sign::Minus => [(self.i1, self.j2), (self.i2, self.j1)],
        }
    }

    /// Cells decreased by one.
    pub fn subtracted(&self) -> [(usize, usize); 2] {
        self.negated().added()
    }

    /// Dense row-major `n x n` matrix of the move.
    pub fn to_dense(&self, n: usize) -> Vec<i32> {
        let mut out = vec![0; n * n];
        for (i, j) in self.added() {
            out[i * n + j] += 1;
        }
        for (i, j) in self.subtracted() {
            out[i * n + j] -= 1;
        }
        out
    }
}

impl fmt::Display for MarkovMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        write!(
            f,
            "{s}(e{}{} + e{}{} - e{}{} - e{}{})",
            self.i1 + 1,
            self.j1 + 1,
            self.i2 + 1,
            self.j2 + 1,
            self.i1 + 1,
            self.j2 + 1,
            self.i2 + 1,
            self.j1 + 1
        )
    }
}

fn enumerate_moves_unchecked(n: usize) -> impl Iterator<Item = MarkovMove> {
    (0..n).flat_map(move |i1| {
        (0..n).flat_map(move |j1| {
            (i1 + 1..n).flat_map(move |i2| {
                (j1 + 1..n).flat_map(move |j2| {
                    [Sign::Minus, Sign::Plus]
                        .into_iter()
                        .map(move |sign| MarkovMove { i1, j1, i2, j2, sign })
                })
            })
        })
    })
}

/// All `2 * C(n, 2)^2` basis moves in canonical order.
pub fn enumerate_basis_moves(n: usize) -> Result<Vec<MarkovMove>> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("moves need n >= 2, got {n}")));
    }
    Ok(enumerate_moves_unchecked(n).collect())
}

pub fn binomial2(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Minimum degree of `G(n, r)`: `C(n, 2)`.
pub fn min_degree_value(n: usize) -> u64 {
    binomial2(n)
}

/// Value of `n r (n r - 2 r + 1) / 2` and whether `G(n, r)` actually attains
/// it (which needs a 0/1 vertex, i.e. `n >= r`). Otherwise it is only an
/// upper bound on the degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxDegree {
    pub value: u64,
    pub attained: bool,
}

pub fn max_degree_value(n: usize, r: u32) -> MaxDegree {
    let (n64, r64) = (n as u64, u64::from(r));
    let nr = n64 * r64;
    // n r - 2 r + 1 = r (n - 2) + 1
    let value = nr * (r64 * n64.saturating_sub(2) + 1) / 2;
    MaxDegree { value, attained: n64 >= r64 }
}
