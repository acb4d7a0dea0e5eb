//! Brute-force ground truth for universes of at most four alternatives.
//!
//! Filters are enumerated over the whole menu lattice, so a rationalization
//! of incomplete data is an honest extension to every menu.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::data::{ChoiceDataset, Menu};
use crate::models::{ModelSpec, Variant};
use crate::relation::Relation;

/// Largest universe the oracle accepts.
pub const MAX_ORACLE_UNIVERSE: usize = 4;

/// Largest choice-function space [`exact_pass_probability`] enumerates.
pub const MAX_CHOICE_SPACE: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("universe of {0} alternatives exceeds the oracle cap of {MAX_ORACLE_UNIVERSE}")]
    UniverseTooLarge(usize),
    #[error("choice-function space of {0} exceeds {MAX_CHOICE_SPACE}")]
    SpaceTooLarge(u128),
    #[error("dataset is not rationalizable by the model")]
    NotRationalizable,
    #[error("menu {0:?} is not a valid menu of the universe")]
    InvalidMenu(Menu),
}

/// A filter on every nonempty menu of `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FilterTable {
    n: usize,
    /// Indexed by menu bitmask; entry 0 is unused.
    sets: Vec<Menu>,
}

impl std::fmt::Debug for FilterTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map()
            .entries((1..self.sets.len()).map(|m| (Menu::from_bits(m as u64), self.sets[m])))
            .finish()
    }
}

impl FilterTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, menu: Menu) -> Menu {
        self.sets[menu.bits() as usize]
    }

    /// Menus with their filtered sets, in bitmask order.
    pub fn entries(&self) -> impl Iterator<Item = (Menu, Menu)> + '_ {
        (1..self.sets.len()).map(|m| (Menu::from_bits(m as u64), self.sets[m]))
    }

    /// Re-checks the defining property of `variant` on every menu pair.
    pub fn satisfies(&self, variant: Variant) -> bool {
        let full = self.sets.len() as u64;
        let basic = (1..full).all(|m| {
            let b = Menu::from_bits(m);
            let f = self.get(b);
            !f.is_empty() && f.is_subset(b)
        });
        if !basic {
            return false;
        }
        match variant {
            Variant::Rational => (1..full).all(|m| self.get(Menu::from_bits(m)).bits() == m),
            Variant::Nc(k) => (1..full).all(|m| {
                let b = Menu::from_bits(m);
                self.get(b).len() >= k.min(b.len())
            }),
            Variant::La => (1..full).all(|m| {
                let b = Menu::from_bits(m);
                let f = self.get(b);
                b.difference(f).iter().all(|x| self.get(b.without(x)) == f)
            }),
            Variant::Lc => (1..full).all(|m| {
                let b = Menu::from_bits(m);
                let f = self.get(b);
                (1..full).all(|m2| {
                    let sub = Menu::from_bits(m2);
                    !sub.is_subset(b) || f.intersection(sub).is_subset(self.get(sub))
                })
            }),
            Variant::Rsm | Variant::Trsm => {
                // the doubletons pin down the only candidate relation
                let mut rel = Relation::empty(self.n);
                for x in 0..self.n {
                    for y in 0..self.n {
                        if x != y && self.get(Menu::from_ids([x, y])) == Menu::from_ids([x]) {
                            rel.insert(x, y);
                        }
                    }
                }
                if rel.has_cycle() || (variant == Variant::Trsm && !rel.is_transitive()) {
                    return false;
                }
                (1..full).all(|m| {
                    let b = Menu::from_bits(m);
                    self.get(b) == maximal(&rel, b)
                })
            }
        }
    }
}

/// Elements of `menu` not beaten by another element of `menu`.
fn maximal(rel: &Relation, menu: Menu) -> Menu {
    menu.iter()
        .filter(|&y| !menu.iter().any(|z| rel.contains(z, y)))
        .collect()
}

fn check_universe(n: usize) -> Result<(), OracleError> {
    if n > MAX_ORACLE_UNIVERSE {
        Err(OracleError::UniverseTooLarge(n))
    } else {
        Ok(())
    }
}

/// Menu bitmasks of `0..n` ordered by size, then value.
fn lattice(n: usize) -> Vec<u64> {
    let mut masks: Vec<u64> = (1..1u64 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

/// A stream of every admissible filter table, each exactly once.
pub struct FilterStream {
    inner: Box<dyn Iterator<Item = FilterTable> + Send>,
}

impl Iterator for FilterStream {
    type Item = FilterTable;

    fn next(&mut self) -> Option<FilterTable> {
        self.inner.next()
    }
}

/// Enumerates the filter family of `variant` on `0..n`.
pub fn enumerate_filters(variant: Variant, n: usize) -> Result<FilterStream, OracleError> {
    check_universe(n)?;
    let inner: Box<dyn Iterator<Item = FilterTable> + Send> = match variant {
        Variant::Rsm | Variant::Trsm => {
            Box::new(RelationalFilters::new(n, variant == Variant::Trsm))
        }
        _ => Box::new(LatticeFilters::new(variant, n)),
    };
    Ok(FilterStream { inner })
}

/// Depth-first construction over the lattice, smallest menus first, pruning
/// with the family property against already assigned submenus.
struct LatticeFilters {
    variant: Variant,
    n: usize,
    order: Vec<u64>,
    current: Vec<Menu>,
    cand: Vec<Vec<Menu>>,
    pos: Vec<usize>,
    started: bool,
    done: bool,
}

impl LatticeFilters {
    fn new(variant: Variant, n: usize) -> Self {
        let order = lattice(n);
        let levels = order.len();
        Self {
            variant,
            n,
            order,
            current: vec![Menu::EMPTY; 1 << n],
            cand: vec![Vec::new(); levels],
            pos: vec![0; levels],
            started: false,
            done: false,
        }
    }

    fn candidates(&self, level: usize) -> Vec<Menu> {
        let b = Menu::from_bits(self.order[level]);
        let mut out = Vec::new();
        let mut sub = b.bits();
        // every nonempty subset of b
        while sub != 0 {
            let f = Menu::from_bits(sub);
            if self.admissible(b, f) {
                out.push(f);
            }
            sub = (sub - 1) & b.bits();
        }
        out.sort();
        out
    }

    fn admissible(&self, b: Menu, f: Menu) -> bool {
        match self.variant {
            Variant::Rational => f == b,
            Variant::Nc(k) => f.len() >= k.min(b.len()),
            Variant::La => b
                .difference(f)
                .iter()
                .all(|x| self.current[b.without(x).bits() as usize] == f),
            Variant::Lc => b.iter().all(|x| {
                let sub = b.without(x);
                sub.is_empty()
                    || f.intersection(sub)
                        .is_subset(self.current[sub.bits() as usize])
            }),
            Variant::Rsm | Variant::Trsm => {
                unreachable!("relational filters are enumerated separately")
            }
        }
    }

    /// Advances to the next complete assignment starting at `level`.
    fn search(&mut self, mut level: usize, mut fresh: bool) -> bool {
        let levels = self.order.len();
        loop {
            if fresh {
                if level == levels {
                    return true;
                }
                self.cand[level] = self.candidates(level);
                self.pos[level] = 0;
            } else {
                self.pos[level] += 1;
            }
            if self.pos[level] < self.cand[level].len() {
                self.current[self.order[level] as usize] = self.cand[level][self.pos[level]];
                level += 1;
                fresh = true;
            } else {
                self.current[self.order[level] as usize] = Menu::EMPTY;
                if level == 0 {
                    return false;
                }
                level -= 1;
                fresh = false;
            }
        }
    }
}

impl Iterator for LatticeFilters {
    type Item = FilterTable;

    fn next(&mut self) -> Option<FilterTable> {
        if self.done {
            return None;
        }
        let levels = self.order.len();
        let found = if !self.started {
            self.started = true;
            self.search(0, true)
        } else if levels == 0 {
            false
        } else {
            self.search(levels - 1, false)
        };
        if !found {
            self.done = true;
            return None;
        }
        Some(FilterTable {
            n: self.n,
            sets: self.current.clone(),
        })
    }
}

/// Acyclic asymmetric relations (or strict partial orders) and their
/// maximal-element filters.
struct RelationalFilters {
    n: usize,
    transitive: bool,
    pairs: Vec<(usize, usize)>,
    /// Base-3 counter over unordered pairs: none, forward, backward.
    code: u64,
    limit: u64,
}

impl RelationalFilters {
    fn new(n: usize, transitive: bool) -> Self {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
            .collect();
        let limit = 3u64.pow(pairs.len() as u32);
        Self {
            n,
            transitive,
            pairs,
            code: 0,
            limit,
        }
    }
}

impl Iterator for RelationalFilters {
    type Item = FilterTable;

    fn next(&mut self) -> Option<FilterTable> {
        while self.code < self.limit {
            let mut rest = self.code;
            self.code += 1;
            let mut rel = Relation::empty(self.n);
            for &(x, y) in &self.pairs {
                match rest % 3 {
                    1 => rel.insert(x, y),
                    2 => rel.insert(y, x),
                    _ => {}
                }
                rest /= 3;
            }
            if rel.has_cycle() || (self.transitive && !rel.is_transitive()) {
                continue;
            }
            let mut sets = vec![Menu::EMPTY; 1 << self.n];
            for (m, slot) in sets.iter_mut().enumerate().skip(1) {
                *slot = maximal(&rel, Menu::from_bits(m as u64));
            }
            return Some(FilterTable { n: self.n, sets });
        }
        None
    }
}

/// All rankings of `0..n`, best first.
fn rankings(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, left: Menu, out: &mut Vec<Vec<usize>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for x in left {
            prefix.push(x);
            go(prefix, left.without(x), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), Menu::full(n), &mut out);
    out
}

/// Best element of `menu` under `ranking`.
fn best(ranking: &[usize], menu: Menu) -> usize {
    *ranking
        .iter()
        .find(|&&x| menu.contains(x))
        .expect("nonempty menu")
}

/// A rationalization: a filter on every menu and a linear order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub filter: FilterTable,
    pub ranking: Vec<usize>,
}

impl Witness {
    pub fn order(&self) -> Relation {
        Relation::from_ranking(self.filter.n(), &self.ranking)
    }
}

/// One (filter, order) combination, with the induced choice and filter size
/// on every menu packed two bits per menu bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Record {
    choices: u32,
    sizes: u32,
    order: u8,
    filter: u32,
}

/// Precomputed ground truth for one filter family on `0..n`.
///
/// Filter families store every distinct (choice function, filter sizes,
/// order) triple over the whole lattice. `Rational` and `Nc` are decided menu
/// by menu, since their filters on different menus are unrelated.
pub struct Oracle {
    variant: Variant,
    n: usize,
    rankings: Vec<Vec<usize>>,
    filters: Vec<FilterTable>,
    records: Vec<Record>,
}

impl Oracle {
    pub fn new(variant: Variant, n: usize) -> Result<Self, OracleError> {
        check_universe(n)?;
        let rankings = rankings(n);
        let mut filters = Vec::new();
        let mut records = Vec::new();
        if matches!(
            variant,
            Variant::La | Variant::Lc | Variant::Rsm | Variant::Trsm
        ) {
            let mut seen: HashMap<(u32, u32, u8), ()> = HashMap::new();
            for table in enumerate_filters(variant, n)? {
                let idx = filters.len() as u32;
                let mut sizes = 0u32;
                for (b, f) in table.entries() {
                    sizes |= ((f.len() - 1) as u32) << (2 * b.bits());
                }
                for (o, ranking) in rankings.iter().enumerate() {
                    let mut choices = 0u32;
                    for (b, f) in table.entries() {
                        choices |= (best(ranking, f) as u32) << (2 * b.bits());
                    }
                    if seen.insert((choices, sizes, o as u8), ()).is_none() {
                        records.push(Record {
                            choices,
                            sizes,
                            order: o as u8,
                            filter: idx,
                        });
                    }
                }
                filters.push(table);
            }
        }
        Ok(Self {
            variant,
            n,
            rankings,
            filters,
            records,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of filter tables in the family (zero for per-menu families).
    pub fn filter_count(&self) -> usize {
        self.filters.len()
    }

    fn check_model(&self, model: ModelSpec) {
        assert_eq!(
            model.variant, self.variant,
            "oracle built for {:?} queried with {model}",
            self.variant
        );
    }

    /// Every rationalization's order, deduplicated, with one witness filter.
    fn witnesses<'a>(
        &'a self,
        model: ModelSpec,
        observed: &'a [(Menu, usize)],
    ) -> Box<dyn Iterator<Item = Witness> + 'a> {
        self.check_model(model);
        let floor = model.floor();
        match self.variant {
            Variant::Rational | Variant::Nc(_) => {
                Box::new(self.rankings.iter().filter_map(move |r| {
                    let mut sets = vec![Menu::EMPTY; 1 << self.n];
                    for (m, slot) in sets.iter_mut().enumerate().skip(1) {
                        *slot = Menu::from_bits(m as u64);
                    }
                    for &(b, c) in observed {
                        let need = floor.min(b.len());
                        let mut found = None;
                        let mut sub = b.bits();
                        while sub != 0 {
                            let s = Menu::from_bits(sub);
                            if s.len() >= need && best(r, s) == c {
                                found = Some(s);
                                break;
                            }
                            sub = (sub - 1) & b.bits();
                        }
                        sets[b.bits() as usize] = found?;
                    }
                    Some(Witness {
                        filter: FilterTable { n: self.n, sets },
                        ranking: r.clone(),
                    })
                }))
            }
            _ => {
                let (mask, want) = pack(observed);
                Box::new(
                    self.records
                        .iter()
                        .filter(move |rec| {
                            rec.choices & mask == want
                                && observed.iter().all(|&(b, _)| {
                                    let size = ((rec.sizes >> (2 * b.bits())) & 3) as usize + 1;
                                    size >= floor.min(b.len())
                                })
                        })
                        .map(|rec| Witness {
                            filter: self.filters[rec.filter as usize].clone(),
                            ranking: self.rankings[rec.order as usize].clone(),
                        }),
                )
            }
        }
    }

    fn observed(&self, d: &ChoiceDataset) -> Result<Vec<(Menu, usize)>, OracleError> {
        if d.n() != self.n {
            return Err(OracleError::UniverseTooLarge(d.n()));
        }
        Ok(d.observations()
            .iter()
            .map(|o| (o.menu, o.choice))
            .collect())
    }

    /// Some rationalization of `d`, if one exists.
    pub fn rationalize(
        &self,
        model: ModelSpec,
        d: &ChoiceDataset,
    ) -> Result<Option<Witness>, OracleError> {
        let observed = self.observed(d)?;
        let found = self.witnesses(model, &observed).next();
        Ok(found)
    }

    /// Intersection of the orders of all rationalizations.
    pub fn revealed(&self, model: ModelSpec, d: &ChoiceDataset) -> Result<Relation, OracleError> {
        let observed = self.observed(d)?;
        let mut seen = HashSet::new();
        let mut acc: Option<Relation> = None;
        for w in self.witnesses(model, &observed) {
            if !seen.insert(w.ranking.clone()) {
                continue;
            }
            let order = w.order();
            match acc.as_mut() {
                Some(r) => r.intersect_with(&order),
                None => acc = Some(order),
            }
        }
        acc.ok_or(OracleError::NotRationalizable)
    }

    /// Share of all choice functions on `menus` that the model rationalizes.
    pub fn pass_probability(&self, model: ModelSpec, menus: &[Menu]) -> Result<f64, OracleError> {
        self.check_model(model);
        let mut space: u128 = 1;
        for &b in menus {
            if b.len() < 2 || b.max_id().is_some_and(|m| m >= self.n) {
                return Err(OracleError::InvalidMenu(b));
            }
            space *= b.len() as u128;
            if space > MAX_CHOICE_SPACE as u128 {
                return Err(OracleError::SpaceTooLarge(space));
            }
        }
        let floor = model.floor();
        let passing = match self.variant {
            Variant::Rational | Variant::Nc(_) => {
                let mut count = 0u64;
                let mut choice: Vec<usize> =
                    menus.iter().map(|b| b.iter().next().unwrap()).collect();
                loop {
                    let observed: Vec<(Menu, usize)> =
                        menus.iter().copied().zip(choice.iter().copied()).collect();
                    if self.witnesses(model, &observed).next().is_some() {
                        count += 1;
                    }
                    if !next_choice(menus, &mut choice) {
                        break;
                    }
                }
                count
            }
            _ => {
                let mut mask = 0u32;
                for &b in menus {
                    mask |= 3 << (2 * b.bits());
                }
                let mut distinct = HashSet::new();
                for rec in &self.records {
                    let ok = menus.iter().all(|&b| {
                        ((rec.sizes >> (2 * b.bits())) & 3) as usize + 1 >= floor.min(b.len())
                    });
                    if ok {
                        distinct.insert(rec.choices & mask);
                    }
                }
                distinct.len() as u64
            }
        };
        Ok(passing as f64 / space as f64)
    }
}

/// Odometer over choice functions; returns false after the last one.
fn next_choice(menus: &[Menu], choice: &mut [usize]) -> bool {
    for (i, &b) in menus.iter().enumerate() {
        let members: Vec<usize> = b.iter().collect();
        let at = members.iter().position(|&x| x == choice[i]).unwrap();
        if at + 1 < members.len() {
            choice[i] = members[at + 1];
            return true;
        }
        choice[i] = members[0];
    }
    false
}

fn pack(observed: &[(Menu, usize)]) -> (u32, u32) {
    let mut mask = 0u32;
    let mut want = 0u32;
    for &(b, c) in observed {
        mask |= 3 << (2 * b.bits());
        want |= (c as u32) << (2 * b.bits());
    }
    (mask, want)
}

/// One-shot [`Oracle::rationalize`].
pub fn brute_rationalizable(
    model: ModelSpec,
    d: &ChoiceDataset,
) -> Result<Option<Witness>, OracleError> {
    Oracle::new(model.variant, d.n())?.rationalize(model, d)
}

/// One-shot [`Oracle::revealed`].
pub fn brute_revealed(model: ModelSpec, d: &ChoiceDataset) -> Result<Relation, OracleError> {
    Oracle::new(model.variant, d.n())?.revealed(model, d)
}

/// One-shot [`Oracle::pass_probability`] on a universe of `n` alternatives.
pub fn exact_pass_probability(
    model: ModelSpec,
    menus: &[Menu],
    n: usize,
) -> Result<f64, OracleError> {
    Oracle::new(model.variant, n)?.pass_probability(model, menus)
}

/// Every menu of `0..n` with at least two members.
pub fn complete_domain(n: usize) -> Vec<Menu> {
    lattice(n)
        .into_iter()
        .filter(|m| m.count_ones() >= 2)
        .map(Menu::from_bits)
        .collect()
}
