//! Solver-against-oracle verification on small universes.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revpref_core::constraints::SolverConfig;
use revpref_core::data::{ChoiceDataset, Menu};
use revpref_core::models::{revealed_with, ModelError, ModelSpec, RevealOptions, Variant};
use revpref_core::oracle::{complete_domain, Oracle, OracleError};
use revpref_core::relation::Relation;

/// Every choice function on `menus` over `0..n`.
pub fn all_choice_functions(menus: &[Menu], n: usize) -> Vec<ChoiceDataset> {
    let mut out: Vec<Vec<(Menu, usize)>> = vec![Vec::new()];
    for &b in menus {
        out = out
            .iter()
            .flat_map(|prefix| {
                b.iter().map(move |c| {
                    let mut v = prefix.clone();
                    v.push((b, c));
                    v
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|obs| ChoiceDataset::from_choices(n, obs).expect("valid by construction"))
        .collect()
}

/// Between `min_menus` and `max_menus` distinct random menus with uniformly
/// random choices.
pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    n: usize,
    min_menus: usize,
    max_menus: usize,
) -> ChoiceDataset {
    let mut domain = complete_domain(n);
    domain.shuffle(rng);
    let count = rng.gen_range(min_menus..=max_menus).min(domain.len());
    let obs: Vec<(Menu, usize)> = domain[..count]
        .iter()
        .map(|&b| {
            let members: Vec<usize> = b.iter().collect();
            (b, members[rng.gen_range(0..members.len())])
        })
        .collect();
    ChoiceDataset::from_choices(n, obs).expect("valid by construction")
}

/// The datasets checked for a universe: the complete domain for three
/// alternatives plus `samples` random incomplete datasets.
pub fn verification_datasets(universe: usize, samples: usize, seed: u64) -> Vec<ChoiceDataset> {
    let mut out = Vec::new();
    if universe == 3 {
        out = all_choice_functions(&complete_domain(3), 3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.extend((0..samples).map(|_| random_dataset(&mut rng, universe, 3, 8)));
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelTally {
    pub checked: usize,
    pub verdict_mismatches: usize,
    pub revealed_mismatches: usize,
    /// Datasets the solver rejects although the oracle finds a witness.
    pub unsound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifySummary {
    pub universe: usize,
    pub datasets: usize,
    pub tallies: Vec<(ModelSpec, ModelTally)>,
}

impl VerifySummary {
    pub fn base_mismatches(&self) -> usize {
        self.tallies
            .iter()
            .filter(|(m, _)| !m.is_amended())
            .map(|(_, t)| t.verdict_mismatches + t.revealed_mismatches)
            .sum()
    }

    pub fn unsound(&self) -> usize {
        self.tallies.iter().map(|(_, t)| t.unsound).sum()
    }

    pub fn passed(&self) -> bool {
        self.base_mismatches() == 0 && self.unsound() == 0
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Base models and amended (k = 2) models of the study.
pub fn verified_models() -> Vec<ModelSpec> {
    let mut v = vec![
        ModelSpec::RATIONAL,
        ModelSpec::nc(1),
        ModelSpec::nc(2),
        ModelSpec::LA,
        ModelSpec::LC,
        ModelSpec::RSM,
        ModelSpec::TRSM,
    ];
    for var in [Variant::La, Variant::Lc, Variant::Rsm, Variant::Trsm] {
        v.push(ModelSpec::amended(var, 2));
    }
    v
}

fn solver_side(
    model: ModelSpec,
    d: &ChoiceDataset,
    cfg: &SolverConfig,
) -> Result<Option<Relation>, ModelError> {
    let opts = RevealOptions {
        solver: *cfg,
        ..RevealOptions::default()
    };
    match revealed_with(model, d, &opts) {
        Ok(r) => Ok(Some(r.revealed)),
        Err(ModelError::NotRationalizable) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Compares verdicts and revealed relations of the solver and the oracle.
pub fn verify(
    universe: usize,
    samples: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<VerifySummary, VerifyError> {
    let datasets = verification_datasets(universe, samples, seed);
    let mut oracles: HashMap<Variant, Oracle> = HashMap::new();
    let mut tallies = Vec::new();
    for model in verified_models() {
        let variant = model.variant;
        if let std::collections::hash_map::Entry::Vacant(e) = oracles.entry(variant) {
            e.insert(Oracle::new(variant, universe)?);
        }
        let oracle = &oracles[&variant];
        let mut t = ModelTally::default();
        for d in &datasets {
            t.checked += 1;
            let ours = solver_side(model, d, cfg)?;
            let theirs = oracle.rationalize(model, d)?;
            match (&ours, &theirs) {
                (Some(rev), Some(_)) => {
                    if *rev != oracle.revealed(model, d)? {
                        t.revealed_mismatches += 1;
                    }
                }
                (None, None) => {}
                (None, Some(_)) => {
                    t.verdict_mismatches += 1;
                    t.unsound += 1;
                }
                (Some(_), None) => t.verdict_mismatches += 1,
            }
        }
        tallies.push((model, t));
    }
    Ok(VerifySummary {
        universe,
        datasets: datasets.len(),
        tallies,
    })
}
