//! Observational diagnostics on a single dataset: the direct revealed
//! relation, WARP/SARP violations, involvement sets, pivots and the
//! rational-choice benchmark.

use std::collections::VecDeque;

use thiserror::Error;

use crate::data::{ChoiceDataset, Menu};
use crate::relation::Relation;

/// A set of alternative ids. Shares the bitset representation of [`Menu`].
pub type AltSet = Menu;

/// Default cap on the number of SARP cycles listed in a [`ViolationReport`].
pub const DEFAULT_CYCLE_CAP: usize = 10_000;

/// `(c(B), y)` for every observation `B` and every unchosen `y` in `B`.
pub fn direct_relation(d: &ChoiceDataset) -> Relation {
    let mut rel = Relation::empty(d.n());
    for obs in d.observations() {
        for y in obs.menu.without(obs.choice) {
            rel.insert(obs.choice, y);
        }
    }
    rel
}

fn is_warp_pair(d: &ChoiceDataset, i: usize, j: usize) -> bool {
    let (a, b) = (d.observations()[i], d.observations()[j]);
    let both = a.menu.intersection(b.menu);
    a.choice != b.choice && both.contains(a.choice) && both.contains(b.choice)
}

/// All unordered pairs of observation indices `(i, j)`, `i < j`, forming a
/// WARP violation.
pub fn find_warp_pairs(d: &ChoiceDataset) -> Vec<(usize, usize)> {
    let m = d.len();
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if is_warp_pair(d, i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Index of the first observation choosing `x` from a menu containing `y`.
fn edge_menu(d: &ChoiceDataset, x: usize, y: usize) -> usize {
    d.observations()
        .iter()
        .position(|o| o.choice == x && o.menu.contains(y))
        .expect("edge of the direct relation has a witnessing menu")
}

/// Turns a cycle of alternatives `x_1 -> x_2 -> ... -> x_k -> x_1` of the
/// direct relation into observation indices `(B_1, ..., B_k)` with
/// `c(B_i) = x_i` and `c(B_{i+1}) ∈ B_i`, rotated to start at the smallest
/// index.
fn cycle_menus(d: &ChoiceDataset, cycle: &[usize]) -> Vec<usize> {
    let k = cycle.len();
    let menus: Vec<usize> = (0..k)
        .map(|i| edge_menu(d, cycle[i], cycle[(i + 1) % k]))
        .collect();
    let start = (0..k).min_by_key(|&i| menus[i]).unwrap_or(0);
    menus[start..]
        .iter()
        .chain(&menus[..start])
        .copied()
        .collect()
}

/// One SARP cycle as observation indices, or `None` when the direct relation
/// is acyclic. Search order is fixed, so the witness is deterministic.
pub fn sarp_witness(d: &ChoiceDataset) -> Option<Vec<usize>> {
    let rel = direct_relation(d);
    let n = d.n();
    // 0 = white, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, crate::data::MenuIter)> = vec![(root, rel.row(root).iter())];
        color[root] = 1;
        while let Some((v, it)) = stack.last_mut() {
            let v = *v;
            match it.next() {
                Some(w) if color[w] == 0 => {
                    color[w] = 1;
                    parent[w] = v;
                    stack.push((w, rel.row(w).iter()));
                }
                Some(w) if color[w] == 1 => {
                    let mut cycle = vec![v];
                    let mut u = v;
                    while u != w {
                        u = parent[u];
                        cycle.push(u);
                    }
                    cycle.reverse();
                    return Some(cycle_menus(d, &cycle));
                }
                Some(_) => {}
                None => {
                    color[v] = 2;
                    stack.pop();
                }
            }
        }
    }
    None
}

pub fn has_sarp_violation(d: &ChoiceDataset) -> bool {
    direct_relation(d).has_cycle()
}

/// Simple cycles of the direct relation, each as observation indices, at most
/// `cap` of them. Every cycle is listed once, rooted at its smallest
/// alternative.
pub fn sarp_cycles(d: &ChoiceDataset, cap: usize) -> Vec<Vec<usize>> {
    let rel = direct_relation(d);
    let n = d.n();
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(n);
    for start in 0..n {
        if out.len() >= cap {
            break;
        }
        path.clear();
        path.push(start);
        let mut on_path = Menu::EMPTY.with(start);
        cycles_from(d, &rel, start, &mut path, &mut on_path, &mut out, cap);
    }
    out
}

fn cycles_from(
    d: &ChoiceDataset,
    rel: &Relation,
    start: usize,
    path: &mut Vec<usize>,
    on_path: &mut Menu,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) {
    let v = *path.last().unwrap();
    for w in rel.row(v) {
        if out.len() >= cap {
            return;
        }
        if w == start {
            out.push(cycle_menus(d, path));
        } else if w > start && !on_path.contains(w) {
            path.push(w);
            on_path.insert(w);
            cycles_from(d, rel, start, path, on_path, out, cap);
            path.pop();
            *on_path = on_path.without(w);
        }
    }
}

/// Alternatives involved in a WARP violation: `x` such that some WARP pair
/// `(T, S)` and some `Q` with `c(Q) = x` have `x ∈ T ∩ S ∩ Q` and `Q` meets
/// `S \ {x}` or `T \ {x}`.
pub fn warp_involved(d: &ChoiceDataset) -> AltSet {
    let pairs = find_warp_pairs(d);
    let obs = d.observations();
    let mut out = AltSet::EMPTY;
    for q in obs {
        let x = q.choice;
        if out.contains(x) {
            continue;
        }
        let hit = pairs.iter().any(|&(t, s)| {
            let (t, s) = (obs[t].menu, obs[s].menu);
            t.contains(x)
                && s.contains(x)
                && (!q.menu.intersection(s.without(x)).is_empty()
                    || !q.menu.intersection(t.without(x)).is_empty())
        });
        if hit {
            out.insert(x);
        }
    }
    out
}

/// Alternatives directly involved in a WARP violation: `x = c(S)` with
/// `x, c(T) ∈ S ∩ T` and `c(T) != x` for some observed `S, T`.
pub fn warp_directly_involved(d: &ChoiceDataset) -> AltSet {
    let mut out = AltSet::EMPTY;
    for (i, j) in find_warp_pairs(d) {
        out.insert(d.observations()[i].choice);
        out.insert(d.observations()[j].choice);
    }
    out
}

/// Chosen alternatives lying on a SARP cycle of length at least three that
/// are not directly involved in any WARP violation.
///
/// `x` lies on a simple cycle of length >= 3 exactly when some out-neighbour
/// `a` and distinct in-neighbour `b` of `x` are joined by a path avoiding `x`.
pub fn pure_sarp_only(d: &ChoiceDataset) -> AltSet {
    let rel = direct_relation(d);
    let n = d.n();
    let direct = warp_directly_involved(d);
    let mut out = AltSet::EMPTY;
    for x in 0..n {
        if direct.contains(x) || rel.row(x).is_empty() {
            continue;
        }
        let preds: Menu = (0..n).filter(|&b| rel.contains(b, x)).collect();
        let on_long_cycle = rel.row(x).iter().any(|a| {
            let targets = preds.without(a);
            !targets.is_empty() && reaches(&rel, a, targets, x)
        });
        if on_long_cycle {
            out.insert(x);
        }
    }
    out
}

fn reaches(rel: &Relation, from: usize, targets: Menu, avoid: usize) -> bool {
    let mut seen = Menu::EMPTY.with(from).with(avoid);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if targets.contains(v) {
            return true;
        }
        for w in rel.row(v).difference(seen) {
            seen.insert(w);
            queue.push_back(w);
        }
    }
    false
}

/// Pivots detectable from the data alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pivots {
    /// Every chosen alternative.
    pub type1: AltSet,
    /// Unchosen `p` in some observed `S` whose removal `S \ {p}` is also
    /// observed with a different choice.
    pub type2: AltSet,
}

pub fn observed_pivots(d: &ChoiceDataset) -> Pivots {
    let mut type1 = AltSet::EMPTY;
    let mut type2 = AltSet::EMPTY;
    for obs in d.observations() {
        type1.insert(obs.choice);
        for p in obs.menu.without(obs.choice) {
            if let Some(c) = d.choice_on(obs.menu.without(p)) {
                if c != obs.choice {
                    type2.insert(p);
                }
            }
        }
    }
    Pivots { type1, type2 }
}

pub fn chosen_set(d: &ChoiceDataset) -> AltSet {
    d.observations().iter().map(|o| o.choice).collect()
}

pub fn distinct_chosen(d: &ChoiceDataset) -> usize {
    chosen_set(d).len()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("choices are not rationalizable by a single preference (SARP cycle through observations {witness:?})")]
pub struct Irrational {
    pub witness: Vec<usize>,
}

/// Transitive closure of the direct relation, if it is acyclic.
pub fn rational_revealed(d: &ChoiceDataset) -> Result<Relation, Irrational> {
    if let Some(witness) = sarp_witness(d) {
        return Err(Irrational { witness });
    }
    Ok(direct_relation(d).transitive_closure())
}

/// Summary of the consistency violations of one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationReport {
    pub warp_pairs: Vec<(usize, usize)>,
    /// Up to the configured cap.
    pub sarp_cycles: Vec<Vec<usize>>,
    pub involved: AltSet,
    pub directly_involved: AltSet,
    pub pure_sarp_only: AltSet,
}

pub fn violation_report(d: &ChoiceDataset, cycle_cap: usize) -> ViolationReport {
    ViolationReport {
        warp_pairs: find_warp_pairs(d),
        sarp_cycles: sarp_cycles(d, cycle_cap),
        involved: warp_involved(d),
        directly_involved: warp_directly_involved(d),
        pure_sarp_only: pure_sarp_only(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{d_rat, d_sarp, d_warp, A, B, C, X, Y, Z};

    fn set(ids: &[usize]) -> AltSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn direct_relation_reads_off_choices() {
        let pairs: Vec<_> = direct_relation(&d_rat()).pairs().collect();
        assert_eq!(pairs, vec![(A, B), (A, C), (B, C)]);
        let rel = direct_relation(&d_warp());
        assert_eq!(rel, Relation::from_pairs(3, [(Y, X), (X, Y), (X, Z)]));
        let empty = ChoiceDataset::from_choices(3, []).unwrap();
        assert!(direct_relation(&empty).is_empty());
    }

    #[test]
    fn warp_pairs() {
        assert_eq!(find_warp_pairs(&d_warp()), vec![(0, 1)]);
        assert!(find_warp_pairs(&d_rat()).is_empty());
        assert!(find_warp_pairs(&d_sarp()).is_empty());
    }

    #[test]
    fn sarp_detection_and_witnesses() {
        assert!(has_sarp_violation(&d_sarp()));
        assert_eq!(sarp_witness(&d_sarp()), Some(vec![0, 1, 2]));
        assert!(!has_sarp_violation(&d_rat()));
        assert_eq!(sarp_witness(&d_rat()), None);
        assert!(has_sarp_violation(&d_warp()));
        assert_eq!(sarp_witness(&d_warp()), Some(vec![0, 1]));
    }

    #[test]
    fn cycle_enumeration_respects_cap() {
        assert_eq!(sarp_cycles(&d_sarp(), 10), vec![vec![0, 1, 2]]);
        assert_eq!(sarp_cycles(&d_warp(), 10), vec![vec![0, 1]]);
        assert!(sarp_cycles(&d_rat(), 10).is_empty());
        assert_eq!(sarp_cycles(&d_sarp(), 0).len(), 0);
    }

    #[test]
    fn involvement_sets() {
        assert_eq!(warp_involved(&d_warp()), set(&[X, Y]));
        assert!(warp_involved(&d_rat()).is_empty());
        assert!(warp_involved(&d_sarp()).is_empty());
        assert_eq!(warp_directly_involved(&d_warp()), set(&[X, Y]));
        assert!(warp_directly_involved(&d_rat()).is_empty());
    }

    #[test]
    fn chosen_over_pivot_outside_warp_intersection_is_not_directly_involved() {
        // 0 = x, 1 = p, 2 = t, 3 = u: x chosen over p; the WARP pair on
        // {p,t,u} / {p,t} does not contain x.
        let d = ChoiceDataset::from_choices(
            4,
            [
                (Menu::from_ids([0, 1]), 0),
                (Menu::from_ids([1, 2, 3]), 1),
                (Menu::from_ids([1, 2]), 2),
            ],
        )
        .unwrap();
        let direct = warp_directly_involved(&d);
        assert!(!direct.contains(0));
        assert_eq!(direct, set(&[1, 2]));
    }

    #[test]
    fn pure_sarp() {
        assert_eq!(pure_sarp_only(&d_sarp()), set(&[X, Y, Z]));
        assert!(pure_sarp_only(&d_warp()).is_empty());
        assert!(pure_sarp_only(&d_rat()).is_empty());
    }

    #[test]
    fn pivots() {
        let p = observed_pivots(&d_warp());
        assert_eq!(p.type1, set(&[X, Y]));
        assert_eq!(p.type2, set(&[Z]));
        let p = observed_pivots(&d_rat());
        assert_eq!(p.type1, set(&[A, B]));
        assert!(p.type2.is_empty());
        let single = ChoiceDataset::from_choices(2, [(Menu::from_ids([0, 1]), 0)]).unwrap();
        let p = observed_pivots(&single);
        assert_eq!(p.type1, set(&[0]));
        assert!(p.type2.is_empty());
    }

    #[test]
    fn distinct_chosen_counts() {
        assert_eq!(distinct_chosen(&d_rat()), 2);
        assert_eq!(distinct_chosen(&d_warp()), 2);
        assert_eq!(
            distinct_chosen(&ChoiceDataset::from_choices(3, []).unwrap()),
            0
        );
    }

    #[test]
    fn rational_benchmark() {
        let rel = rational_revealed(&d_rat()).unwrap();
        assert_eq!(rel, Relation::from_pairs(3, [(A, B), (A, C), (B, C)]));
        assert!(rational_revealed(&d_warp()).is_err());
        let chain = ChoiceDataset::from_choices(
            3,
            [(Menu::from_ids([X, Y]), X), (Menu::from_ids([Y, Z]), Y)],
        )
        .unwrap();
        assert_eq!(
            rational_revealed(&chain).unwrap(),
            Relation::from_pairs(3, [(X, Y), (Y, Z), (X, Z)])
        );
    }

    #[test]
    fn report_collects_everything() {
        let r = violation_report(&d_warp(), DEFAULT_CYCLE_CAP);
        assert_eq!(r.warp_pairs, vec![(0, 1)]);
        assert_eq!(r.sarp_cycles, vec![vec![0, 1]]);
        assert!(r.directly_involved.is_subset(r.involved));
        assert!(r.pure_sarp_only.is_empty());
    }
}
