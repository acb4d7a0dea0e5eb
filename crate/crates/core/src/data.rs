//! Choice data: alternatives, menus, observations and dataset validation.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// Largest universe a [`Menu`] bitset can address.
pub const MAX_ALTERNATIVES: usize = 64;

/// Default total of a three-installment payment bundle.
pub const DEFAULT_BUNDLE_TOTAL: u32 = 2400;

/// One alternative of the universe.
///
/// `payments` holds the optional installment triple (1, 3 and 5 months out).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub id: usize,
    pub label: String,
    pub payments: Option<[u32; 3]>,
}

impl Alternative {
    pub fn new(id: usize, label: impl Into<String>) -> Self {
        Self {
            id,
            label: label.into(),
            payments: None,
        }
    }

    pub fn with_payments(mut self, payments: [u32; 3]) -> Self {
        self.payments = Some(payments);
        self
    }
}

/// A set of alternative ids, stored as a 64-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Menu(u64);

impl Menu {
    pub const EMPTY: Menu = Menu(0);

    pub fn from_bits(bits: u64) -> Self {
        Menu(bits)
    }

    /// Builds a menu from ids. Panics if an id is `>= MAX_ALTERNATIVES`.
    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        let mut bits = 0u64;
        for id in ids {
            assert!(id < MAX_ALTERNATIVES, "alternative id {id} out of range");
            bits |= 1 << id;
        }
        Menu(bits)
    }

    /// The menu containing every id in `0..n`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_ALTERNATIVES);
        if n == MAX_ALTERNATIVES {
            Menu(u64::MAX)
        } else {
            Menu((1u64 << n) - 1)
        }
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, id: usize) -> bool {
        id < MAX_ALTERNATIVES && self.0 >> id & 1 == 1
    }

    pub fn insert(&mut self, id: usize) {
        self.0 |= 1 << id;
    }

    pub fn without(self, id: usize) -> Self {
        Menu(self.0 & !(1u64 << id))
    }

    pub fn with(self, id: usize) -> Self {
        Menu(self.0 | 1u64 << id)
    }

    pub fn intersection(self, other: Menu) -> Self {
        Menu(self.0 & other.0)
    }

    pub fn union(self, other: Menu) -> Self {
        Menu(self.0 | other.0)
    }

    pub fn difference(self, other: Menu) -> Self {
        Menu(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Menu) -> bool {
        self.0 & !other.0 == 0
    }

    /// Strict subset.
    pub fn is_proper_subset(self, other: Menu) -> bool {
        self.is_subset(other) && self != other
    }

    /// Members in increasing id order.
    pub fn iter(self) -> MenuIter {
        MenuIter(self.0)
    }

    /// Largest id present, if any.
    pub fn max_id(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros() as usize)
        }
    }
}

impl fmt::Debug for Menu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for Menu {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Menu::from_ids(iter)
    }
}

impl IntoIterator for Menu {
    type Item = usize;
    type IntoIter = MenuIter;

    fn into_iter(self) -> MenuIter {
        self.iter()
    }
}

#[derive(Debug, Clone)]
pub struct MenuIter(u64);

impl Iterator for MenuIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let id = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(id)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for MenuIter {}

/// A menu together with the alternative chosen from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Observation {
    pub menu: Menu,
    pub choice: usize,
}

impl Observation {
    pub fn new(menu: Menu, choice: usize) -> Self {
        Self { menu, choice }
    }
}

/// A validated choice dataset: every menu has at least two members, contains
/// its choice, references only known alternatives, and appears at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceDataset {
    universe: Vec<Alternative>,
    observations: Vec<Observation>,
}

impl ChoiceDataset {
    pub fn universe(&self) -> &[Alternative] {
        &self.universe
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Number of alternatives in the universe.
    pub fn n(&self) -> usize {
        self.universe.len()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn label(&self, id: usize) -> &str {
        &self.universe[id].label
    }

    /// Index of the observation on `menu`, if observed.
    pub fn find_menu(&self, menu: Menu) -> Option<usize> {
        self.observations.iter().position(|o| o.menu == menu)
    }

    /// Choice on `menu`, if observed.
    pub fn choice_on(&self, menu: Menu) -> Option<usize> {
        self.find_menu(menu).map(|i| self.observations[i].choice)
    }

    /// Convenience constructor for an unlabelled universe of `n` alternatives
    /// named `0..n`.
    pub fn from_choices(
        n: usize,
        observations: impl IntoIterator<Item = (Menu, usize)>,
    ) -> Result<Self, DataError> {
        let raw = RawDataset {
            alternatives: (0..n)
                .map(|i| RawAlternative {
                    id: i,
                    label: i.to_string(),
                    payments: None,
                })
                .collect(),
            observations: observations
                .into_iter()
                .map(|(m, c)| RawObservation {
                    menu: m.iter().collect(),
                    choice: c,
                })
                .collect(),
        };
        validate_dataset(&raw)
    }

    /// Same universe, different observations (re-validated).
    pub fn with_observations(
        &self,
        observations: impl IntoIterator<Item = Observation>,
    ) -> Result<Self, DataError> {
        let observations: Vec<Observation> = observations.into_iter().collect();
        check_observations(self.universe.len(), &observations)?;
        Ok(Self {
            universe: self.universe.clone(),
            observations,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawAlternative {
    pub id: usize,
    pub label: String,
    pub payments: Option<[u32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawObservation {
    pub menu: Vec<usize>,
    pub choice: usize,
}

/// Dataset as read from an external source, before any invariant is checked.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawDataset {
    pub alternatives: Vec<RawAlternative>,
    pub observations: Vec<RawObservation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("observation {index}: menu has {size} alternative(s), at least 2 required")]
    MenuTooSmall { index: usize, size: usize },
    #[error("observation {index}: choice {choice} is not in the menu")]
    ChoiceNotInMenu { index: usize, choice: usize },
    #[error("observations {first} and {second} share the same menu")]
    DuplicateMenu { first: usize, second: usize },
    #[error("alternative {id} is not part of the universe")]
    UnknownAlternative { id: usize },
    #[error("alternative {id}: installments sum to {sum}, expected {expected}")]
    BundleSumMismatch { id: usize, sum: u64, expected: u32 },
    #[error("alternative ids must be dense 0..{n}; found id {id} at position {position}")]
    NonDenseIds {
        n: usize,
        id: usize,
        position: usize,
    },
    #[error("universe has {0} alternatives, at most {MAX_ALTERNATIVES} supported")]
    UniverseTooLarge(usize),
}

/// Validates with the default bundle total.
pub fn validate_dataset(raw: &RawDataset) -> Result<ChoiceDataset, DataError> {
    validate_dataset_with_total(raw, DEFAULT_BUNDLE_TOTAL)
}

pub fn validate_dataset_with_total(
    raw: &RawDataset,
    bundle_total: u32,
) -> Result<ChoiceDataset, DataError> {
    let n = raw.alternatives.len();
    if n > MAX_ALTERNATIVES {
        return Err(DataError::UniverseTooLarge(n));
    }
    let mut universe = Vec::with_capacity(n);
    for (position, alt) in raw.alternatives.iter().enumerate() {
        if alt.id != position {
            return Err(DataError::NonDenseIds {
                n,
                id: alt.id,
                position,
            });
        }
        if let Some(p) = alt.payments {
            let sum: u64 = p.iter().map(|&v| u64::from(v)).sum();
            if sum != u64::from(bundle_total) {
                return Err(DataError::BundleSumMismatch {
                    id: alt.id,
                    sum,
                    expected: bundle_total,
                });
            }
        }
        universe.push(Alternative {
            id: alt.id,
            label: alt.label.clone(),
            payments: alt.payments,
        });
    }

    let mut observations = Vec::with_capacity(raw.observations.len());
    for obs in &raw.observations {
        let mut menu = Menu::EMPTY;
        for &id in &obs.menu {
            if id >= n {
                return Err(DataError::UnknownAlternative { id });
            }
            menu.insert(id);
        }
        if obs.choice >= n {
            return Err(DataError::UnknownAlternative { id: obs.choice });
        }
        observations.push(Observation::new(menu, obs.choice));
    }
    check_observations(n, &observations)?;
    Ok(ChoiceDataset {
        universe,
        observations,
    })
}

fn check_observations(n: usize, observations: &[Observation]) -> Result<(), DataError> {
    let universe = Menu::full(n);
    let mut seen: HashSet<Menu> = HashSet::with_capacity(observations.len());
    for (index, obs) in observations.iter().enumerate() {
        if let Some(id) = obs.menu.difference(universe).iter().next() {
            return Err(DataError::UnknownAlternative { id });
        }
        if obs.menu.len() < 2 {
            return Err(DataError::MenuTooSmall {
                index,
                size: obs.menu.len(),
            });
        }
        if !obs.menu.contains(obs.choice) {
            return Err(DataError::ChoiceNotInMenu {
                index,
                choice: obs.choice,
            });
        }
        if !seen.insert(obs.menu) {
            let first = observations
                .iter()
                .position(|o| o.menu == obs.menu)
                .unwrap_or(index);
            return Err(DataError::DuplicateMenu {
                first,
                second: index,
            });
        }
    }
    Ok(())
}
