//! Splitting a table into permutation matrices.
//!
//! A table of `F(n, r)` is the biadjacency matrix of an `r`-regular bipartite
//! multigraph (rows on one side, columns on the other), so it is a sum of `r`
//! perfect matchings. [`decompose_constrained`] additionally makes prefix
//! sums of the parts cover a prescribed list of positions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::table::ContingencyTable;
use crate::{Error, Result};

/// A square non-negative matrix with every row and column summing to
/// `degree`, read as a bipartite multigraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMultigraphView {
    n: usize,
    degree: u32,
    entries: Vec<u32>,
}

impl BipartiteMultigraphView {
    pub fn from_table(t: &ContingencyTable) -> Self {
        Self { n: t.n(), degree: t.r(), entries: t.entries().to_vec() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Edge multiplicity between row `i` and column `j`.
    pub fn multiplicity(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.n + j]
    }

    fn is_regular(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| self.entries[i * n..(i + 1) * n].iter().sum::<u32>() == self.degree)
            && (0..n).all(|j| (0..n).map(|i| self.entries[i * n + j]).sum::<u32>() == self.degree)
    }

    /// Removes a perfect matching (`matching[i]` = column of row `i`).
    fn remove(&mut self, matching: &[usize]) {
        for (i, &j) in matching.iter().enumerate() {
            self.entries[i * self.n + j] -= 1;
        }
        self.degree -= 1;
    }
}

/// Kuhn's augmenting-path search for a perfect matching of the rows not yet
/// fixed, restricted to positive entries and to columns not yet taken.
fn completes(view: &BipartiteMultigraphView, fixed_rows: &[bool], taken_cols: &[bool]) -> bool {
    let n = view.n;
    let mut col_owner = vec![usize::MAX; n];
    for i in (0..n).filter(|&i| !fixed_rows[i]) {
        let mut seen = vec![false; n];
        if !augment(view, i, taken_cols, &mut seen, &mut col_owner) {
            return false;
        }
    }
    true
}

fn augment(
    view: &BipartiteMultigraphView,
    row: usize,
    taken_cols: &[bool],
    seen: &mut [bool],
    col_owner: &mut [usize],
) -> bool {
    for j in 0..view.n {
        if taken_cols[j] || seen[j] || view.multiplicity(row, j) == 0 {
            continue;
        }
        seen[j] = true;
        if col_owner[j] == usize::MAX || augment(view, col_owner[j], taken_cols, seen, col_owner) {
            col_owner[j] = row;
            return true;
        }
    }
    false
}

/// The lexicographically least perfect matching (compared as the sequence of
/// matched columns of rows `0, 1, ...`) that uses the `forced` edge, if given.
/// Returns the column matched to each row.
pub fn perfect_matching(view: &BipartiteMultigraphView, forced: Option<(usize, usize)>) -> Result<Vec<usize>> {
    let n = view.n;
    if let Some((i, j)) = forced {
        if i >= n || j >= n || view.multiplicity(i, j) == 0 {
            return Err(Error::ConstraintInfeasible(format!(
                "forced position ({}, {}) has no edge",
                i + 1,
                j + 1
            )));
        }
    }
    let mut fixed_rows = vec![false; n];
    let mut taken_cols = vec![false; n];
    let mut matching = vec![usize::MAX; n];
    if let Some((i, j)) = forced {
        fixed_rows[i] = true;
        taken_cols[j] = true;
        matching[i] = j;
    }
    if !completes(view, &fixed_rows, &taken_cols) {
        return Err(Error::NoPerfectMatching);
    }
    for i in 0..n {
        if fixed_rows[i] {
            continue;
        }
        fixed_rows[i] = true;
        let mut choice = None;
        for j in 0..n {
            if taken_cols[j] || view.multiplicity(i, j) == 0 {
                continue;
            }
            taken_cols[j] = true;
            let ok = completes(view, &fixed_rows, &taken_cols);
            taken_cols[j] = false;
            if ok {
                choice = Some(j);
                break;
            }
        }
        let j = choice.expect("a completion existed before fixing this row");
        taken_cols[j] = true;
        matching[i] = j;
    }
    Ok(matching)
}

fn permutation_table(matching: &[usize]) -> ContingencyTable {
    ContingencyTable::scaled_permutation(matching, 1).expect("a perfect matching is a permutation")
}

/// Ordered parts `u_1, ..., u_r` of a table plus the positions their prefix
/// sums were asked to cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingDecomposition {
    pub parts: Vec<ContingencyTable>,
    /// 0-based positions `(i_1, j_1), ..., (i_k, j_k)`.
    pub constraints: Vec<(usize, usize)>,
}

impl MatchingDecomposition {
    /// Entrywise sum of the parts.
    pub fn sum(&self) -> Option<Vec<u32>> {
        let first = self.parts.first()?;
        let mut acc = vec![0u32; first.entries().len()];
        for p in &self.parts {
            for (a, &x) in acc.iter_mut().zip(p.entries()) {
                *a += x;
            }
        }
        Some(acc)
    }

    /// `u_1 + ... + u_l >= E(i_1, j_1) + ... + E(i_l, j_l)` for every `l`.
    pub fn satisfies_constraints(&self) -> bool {
        let Some(first) = self.parts.first() else {
            return self.constraints.is_empty();
        };
        let n = first.n();
        if self.constraints.len() > self.parts.len() {
            return false;
        }
        let mut covered = vec![0i64; n * n];
        let mut demanded = vec![0i64; n * n];
        for (part, &(i, j)) in self.parts.iter().zip(&self.constraints) {
            for (c, &x) in covered.iter_mut().zip(part.entries()) {
                *c += i64::from(x);
            }
            demanded[i * n + j] += 1;
            if covered.iter().zip(&demanded).any(|(c, d)| c < d) {
                return false;
            }
        }
        true
    }
}

/// Splits `table` into `r` permutation matrices by repeatedly removing the
/// lexicographically least perfect matching.
pub fn decompose(table: &ContingencyTable) -> MatchingDecomposition {
    decompose_constrained(table, &[]).expect("regular bipartite multigraphs always decompose")
}

/// Decomposition whose prefix sums dominate the prefix sums of
/// `E(positions[0]), E(positions[1]), ...`.
///
/// Takes the least matching `u_1` through the first position, lets `u_1`
/// absorb every later position it already contains (scanning in order, one
/// copy per position), then recurses on `table - u_1` with the positions
/// left over.
pub fn decompose_constrained(table: &ContingencyTable, positions: &[(usize, usize)]) -> Result<MatchingDecomposition> {
    let n = table.n();
    if positions.len() > table.r() as usize {
        return Err(Error::ConstraintInfeasible(format!(
            "{} positions exceed r = {}",
            positions.len(),
            table.r()
        )));
    }
    let mut demand = vec![0u32; n * n];
    for &(i, j) in positions {
        if i >= n || j >= n {
            return Err(Error::ConstraintInfeasible(format!(
                "position ({}, {}) is outside a {n}x{n} table",
                i + 1,
                j + 1
            )));
        }
        demand[i * n + j] += 1;
        if demand[i * n + j] > table.get(i, j) {
            return Err(Error::ConstraintInfeasible(format!(
                "entry ({}, {}) is smaller than its demand",
                i + 1,
                j + 1
            )));
        }
    }

    let mut view = BipartiteMultigraphView::from_table(table);
    debug_assert!(view.is_regular());
    let mut parts = Vec::with_capacity(table.r() as usize);
    let mut pending: Vec<(usize, usize)> = positions.to_vec();
    while view.degree > 0 {
        let matching = perfect_matching(&view, pending.first().copied())?;
        if !pending.is_empty() {
            let mut absorbed = vec![false; n];
            pending.retain(|&(i, j)| {
                if matching[i] == j && !absorbed[i] {
                    absorbed[i] = true;
                    false
                } else {
                    true
                }
            });
        }
        view.remove(&matching);
        debug_assert!(view.is_regular());
        parts.push(permutation_table(&matching));
    }
    debug_assert!(pending.is_empty());
    Ok(MatchingDecomposition { parts, constraints: positions.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_fiber;
    use proptest::prelude::*;

    fn t(rows: &[&[i64]]) -> ContingencyTable {
        let rows: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        ContingencyTable::infer(&rows).unwrap()
    }

    /// Every perfect matching of the positive entries, by brute force over
    /// permutations.
    fn all_matchings(view: &BipartiteMultigraphView) -> Vec<Vec<usize>> {
        fn rec(view: &BipartiteMultigraphView, row: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if row == view.n() {
                out.push(cur.clone());
                return;
            }
            for j in 0..view.n() {
                if !used[j] && view.multiplicity(row, j) > 0 {
                    used[j] = true;
                    cur.push(j);
                    rec(view, row + 1, used, cur, out);
                    cur.pop();
                    used[j] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(view, 0, &mut vec![false; view.n()], &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn matching_examples() {
        let j3 = BipartiteMultigraphView::from_table(&ContingencyTable::uniform(3, 3).unwrap());
        assert_eq!(perfect_matching(&j3, Some((0, 0))).unwrap(), vec![0, 1, 2]);

        let d = BipartiteMultigraphView::from_table(&ContingencyTable::diagonal(2, 2));
        assert_eq!(perfect_matching(&d, None).unwrap(), vec![0, 1]);
        assert_eq!(perfect_matching(&d, Some((1, 1))).unwrap(), vec![0, 1]);

        let u = BipartiteMultigraphView::from_table(&t(&[&[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]));
        assert_eq!(perfect_matching(&u, Some((0, 1))).unwrap(), vec![1, 0, 2]);
        assert!(matches!(perfect_matching(&u, Some((0, 2))), Err(Error::ConstraintInfeasible(_))));
    }

    #[test]
    fn matching_is_lexicographically_least() {
        for r in 1..=3 {
            for table in enumerate_fiber(3, r).unwrap().tables() {
                let view = BipartiteMultigraphView::from_table(&table);
                let all = all_matchings(&view);
                assert_eq!(&perfect_matching(&view, None).unwrap(), all.iter().min().unwrap());
                for (i, j) in table.support().positions {
                    let least = all.iter().filter(|m| m[i] == j).min().unwrap();
                    assert_eq!(&perfect_matching(&view, Some((i, j))).unwrap(), least);
                }
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let j3 = ContingencyTable::uniform(3, 3).unwrap();
        let d = decompose(&j3);
        assert_eq!(d.parts.len(), 3);
        assert_eq!(d.sum().unwrap(), j3.entries());

        let d = decompose(&ContingencyTable::diagonal(4, 3));
        assert!(d.parts.iter().all(|p| *p == ContingencyTable::diagonal(4, 1)));
    }

    #[test]
    fn constrained_examples() {
        let j3 = ContingencyTable::uniform(3, 3).unwrap();
        let d = decompose_constrained(&j3, &[(0, 0)]).unwrap();
        assert_eq!(d.parts[0].get(0, 0), 1);

        let d = decompose_constrained(&j3, &[(0, 0), (1, 1), (2, 2)]).unwrap();
        assert!(d.satisfies_constraints());

        let ones = t(&[&[1, 1], &[1, 1]]);
        let d = decompose_constrained(&ones, &[(0, 1), (1, 1)]).unwrap();
        assert_eq!(d.parts[0], ContingencyTable::anti_diagonal(2, 1));
        assert_eq!(d.parts[1], ContingencyTable::diagonal(2, 1));
        assert!(d.satisfies_constraints());
    }

    #[test]
    fn constrained_errors() {
        let ones = t(&[&[1, 1], &[1, 1]]);
        assert!(matches!(
            decompose_constrained(&ones, &[(0, 1), (0, 1)]),
            Err(Error::ConstraintInfeasible(_))
        ));
        assert!(matches!(
            decompose_constrained(&ones, &[(0, 1), (1, 0), (0, 0)]),
            Err(Error::ConstraintInfeasible(_))
        ));
        assert!(matches!(
            decompose_constrained(&ones, &[(2, 0)]),
            Err(Error::ConstraintInfeasible(_))
        ));
    }

    #[test]
    fn violated_prefix_is_detected() {
        let ones = t(&[&[1, 1], &[1, 1]]);
        let d = MatchingDecomposition {
            parts: vec![ContingencyTable::diagonal(2, 1), ContingencyTable::anti_diagonal(2, 1)],
            constraints: vec![(0, 1), (1, 1)],
        };
        assert_eq!(d.sum().unwrap(), ones.entries());
        assert!(!d.satisfies_constraints());
    }

    #[test]
    fn whole_fibers_decompose() {
        for n in 1..=4 {
            for r in 1..=3 {
                for table in enumerate_fiber(n, r).unwrap().tables() {
                    let d = decompose(&table);
                    assert_eq!(d.parts.len(), r as usize);
                    assert_eq!(d.sum().unwrap(), table.entries());
                    assert!(d.parts.iter().all(|p| p.r() == 1 && p.is_scaled_permutation()));
                }
            }
        }
    }

    fn walked_table(n: usize, r: u32, picks: &[u16]) -> ContingencyTable {
        let mut t = ContingencyTable::diagonal(n, r);
        if n < 2 {
            return t;
        }
        for &p in picks {
            let moves = t.valid_moves();
            t.apply_move_in_place(&moves[p as usize % moves.len()]).unwrap();
        }
        t
    }

    proptest! {
        #[test]
        fn constrained_prefixes_hold(
            n in 2usize..=5,
            r in 1u32..=5,
            picks in proptest::collection::vec(any::<u16>(), 0..30),
            choices in proptest::collection::vec(any::<u16>(), 0..5),
        ) {
            let table = walked_table(n, r, &picks);
            // Draw positions from the table's own multiset of units.
            let mut remaining = table.entries().to_vec();
            let mut positions = Vec::new();
            for c in choices.into_iter().take(r as usize) {
                let live: Vec<usize> = (0..n * n).filter(|&k| remaining[k] > 0).collect();
                let k = live[c as usize % live.len()];
                remaining[k] -= 1;
                positions.push((k / n, k % n));
            }
            let d = decompose_constrained(&table, &positions).unwrap();
            prop_assert_eq!(d.sum().unwrap(), table.entries().to_vec());
            prop_assert!(d.satisfies_constraints());
        }

        #[test]
        fn forced_edge_is_used(n in 2usize..=5, r in 1u32..=4, picks in proptest::collection::vec(any::<u16>(), 0..30), pick in any::<u16>()) {
            let table = walked_table(n, r, &picks);
            let support = table.support().positions;
            let (i, j) = support[pick as usize % support.len()];
            let m = perfect_matching(&BipartiteMultigraphView::from_table(&table), Some((i, j))).unwrap();
            prop_assert_eq!(m[i], j);
        }
    }
}
