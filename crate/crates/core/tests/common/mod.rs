#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revpref_core::data::{ChoiceDataset, Menu};
use revpref_core::diagnostics::{find_warp_pairs, has_sarp_violation};
use revpref_core::oracle::complete_domain;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distinct random menus of `0..n` with uniformly random choices.
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
            (b, *members.choose(rng).unwrap())
        })
        .collect();
    ChoiceDataset::from_choices(n, obs).unwrap()
}

/// A dataset with a SARP violation and no WARP violation: a doubleton cycle
/// over `k >= 3` alternatives plus random extra observations that keep WARP.
pub fn pure_sarp_dataset(rng: &mut ChaCha8Rng, n: usize) -> ChoiceDataset {
    loop {
        let k = rng.gen_range(3..=n);
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(rng);
        let cycle = &ids[..k];
        let mut obs: Vec<(Menu, usize)> = (0..k)
            .map(|i| (Menu::from_ids([cycle[i], cycle[(i + 1) % k]]), cycle[i]))
            .collect();
        let extra = rng.gen_range(0..=4);
        let mut domain = complete_domain(n);
        domain.shuffle(rng);
        for b in domain.into_iter().take(extra) {
            if obs.iter().any(|(m, _)| *m == b) {
                continue;
            }
            let members: Vec<usize> = b.iter().collect();
            obs.push((b, *members.choose(rng).unwrap()));
            let d = ChoiceDataset::from_choices(n, obs.clone()).unwrap();
            if !find_warp_pairs(&d).is_empty() {
                obs.pop();
            }
        }
        let d = ChoiceDataset::from_choices(n, obs).unwrap();
        if has_sarp_violation(&d) && find_warp_pairs(&d).is_empty() {
            return d;
        }
    }
}

/// Every choice function on `menus`.
pub fn all_choice_functions(menus: &[Menu], n: usize) -> Vec<ChoiceDataset> {
    let mut out = vec![Vec::new()];
    for &b in menus {
        let mut next = Vec::new();
        for prefix in &out {
            for c in b {
                let mut v: Vec<(Menu, usize)> = Vec::clone(prefix);
                v.push((b, c));
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|obs| ChoiceDataset::from_choices(n, obs).unwrap())
        .collect()
}
