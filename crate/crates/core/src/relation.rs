use std::fmt;

use crate::data::{Menu, MAX_ALTERNATIVES};

/// A binary relation over alternative ids `0..n`, stored as one bitset row per
/// alternative: `(x, y)` is present when `y` is in row `x`, read "x above y".
///
/// Asymmetry is not enforced on insertion; the raw direct relation of an
/// inconsistent dataset may contain both `(x, y)` and `(y, x)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    rows: Vec<Menu>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_ALTERNATIVES);
        Self {
            rows: vec![Menu::EMPTY; n],
        }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rel = Self::empty(n);
        for (x, y) in pairs {
            rel.insert(x, y);
        }
        rel
    }

    /// The strict linear order listing `ranking` from best to worst.
    pub fn from_ranking(n: usize, ranking: &[usize]) -> Self {
        let mut rel = Self::empty(n);
        for (i, &x) in ranking.iter().enumerate() {
            for &y in &ranking[i + 1..] {
                rel.insert(x, y);
            }
        }
        rel
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn insert(&mut self, x: usize, y: usize) {
        self.rows[x].insert(y);
    }

    pub fn remove(&mut self, x: usize, y: usize) {
        self.rows[x] = self.rows[x].without(y);
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows.get(x).is_some_and(|r| r.contains(y))
    }

    /// Everything `x` is above: its lower contour set.
    pub fn row(&self, x: usize) -> Menu {
        self.rows[x]
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |y| (x, y)))
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows
            .iter()
            .zip(&other.rows)
            .all(|(a, b)| a.is_subset(*b))
    }

    pub fn intersect_with(&mut self, other: &Relation) {
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            *a = a.intersection(*b);
        }
    }

    pub fn is_irreflexive(&self) -> bool {
        self.rows.iter().enumerate().all(|(x, r)| !r.contains(x))
    }

    pub fn is_asymmetric(&self) -> bool {
        self.pairs().all(|(x, y)| !self.contains(y, x))
    }

    pub fn is_transitive(&self) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().all(|y| self.rows[y].is_subset(*row)))
    }

    /// Asymmetric, transitive and total over `0..n`.
    pub fn is_linear_order(&self) -> bool {
        let n = self.n();
        self.is_asymmetric()
            && self.is_transitive()
            && (0..n).all(|x| (0..n).all(|y| x == y || self.contains(x, y) || self.contains(y, x)))
    }

    /// Smallest transitive relation containing `self`.
    pub fn transitive_closure(&self) -> Relation {
        let mut rows = self.rows.clone();
        let n = rows.len();
        for k in 0..n {
            for i in 0..n {
                if rows[i].contains(k) {
                    rows[i] = rows[i].union(rows[k]);
                }
            }
        }
        Relation { rows }
    }

    /// True when the digraph has a directed cycle (a self-loop counts).
    pub fn has_cycle(&self) -> bool {
        self.transitive_closure()
            .rows
            .iter()
            .enumerate()
            .any(|(x, r)| r.contains(x))
    }

    /// Number of unordered pairs `{x, y}` related in at least one direction.
    pub fn comparable_pairs(&self) -> usize {
        let n = self.n();
        let mut count = 0;
        for x in 0..n {
            for y in x + 1..n {
                if self.contains(x, y) || self.contains(y, x) {
                    count += 1;
                }
            }
        }
        count
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

/// Comparable unordered pairs of `rel` divided by `C(n, 2)`.
pub fn density(rel: &Relation, n: usize) -> f64 {
    assert!(n >= 2, "density needs at least two alternatives");
    let total = n * (n - 1) / 2;
    rel.comparable_pairs() as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_order_has_density_one() {
        let rel = Relation::from_pairs(3, [(0, 1), (0, 2), (1, 2)]);
        assert!(rel.is_linear_order());
        assert_eq!(density(&rel, 3), 1.0);
    }

    #[test]
    fn empty_relation_has_density_zero() {
        assert_eq!(density(&Relation::empty(10), 10), 0.0);
    }

    #[test]
    fn twenty_eight_of_forty_five() {
        // chain 0 > 1 > ... > 7 gives C(8,2) = 28 comparable pairs
        let rel = Relation::from_ranking(10, &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(rel.comparable_pairs(), 28);
        let d = density(&rel, 10);
        assert!((d - 28.0 / 45.0).abs() < 1e-12);
        assert!((d - 0.622).abs() < 5e-4);
    }

    #[test]
    fn closure_and_cycles() {
        let rel = Relation::from_pairs(3, [(0, 1), (1, 2)]);
        let closed = rel.transitive_closure();
        assert_eq!(
            closed.pairs().collect::<Vec<_>>(),
            vec![(0, 1), (0, 2), (1, 2)]
        );
        assert!(!rel.has_cycle());
        assert!(Relation::from_pairs(3, [(0, 1), (1, 2), (2, 0)]).has_cycle());
        assert!(!Relation::from_pairs(2, [(0, 1), (1, 0)]).is_asymmetric());
    }
}
