//! Seeded menu collections and synthetic subjects.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revpref_core::data::{Alternative, ChoiceDataset, Menu};
use revpref_core::models::{is_rationalizable, ModelSpec, Variant};
use revpref_core::relation::Relation;

use crate::io::{PoolError, SubjectPool};

/// Menu sizes of the default collection, smallest first:
/// 6 of size 2, 2 of size 3, 3 of size 4, 2 of size 5, 3 of size 6,
/// 3 of size 7 and 1 of size 8.
pub const DEFAULT_MENU_SIZES: [(usize, usize); 7] =
    [(2, 6), (3, 2), (4, 3), (5, 2), (6, 3), (7, 3), (8, 1)];

/// Number of subjects in the default pool.
pub const DEFAULT_POOL_SIZE: usize = 113;

/// The ten payment bundles (installments at 1, 3 and 5 months, summing to 2400).
pub fn table1_alternatives() -> Vec<Alternative> {
    const PAYMENTS: [[u32; 3]; 10] = [
        [450, 800, 1150],
        [800, 800, 800],
        [1150, 800, 450],
        [450, 450, 1500],
        [450, 1500, 450],
        [800, 1150, 450],
        [850, 0, 1550],
        [1200, 0, 1200],
        [1550, 0, 850],
        [500, 0, 1900],
    ];
    PAYMENTS
        .iter()
        .enumerate()
        .map(|(i, p)| Alternative::new(i, format!("x{}", i + 1)).with_payments(*p))
        .collect()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// All subsets of `0..n` with exactly `k` members, in increasing bit order.
fn subsets_of_size(n: usize, k: usize) -> Vec<Menu> {
    (0u64..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(Menu::from_bits)
        .collect()
}

/// Draws menus of the given `(size, count)` classes over `0..n`, distinct
/// within each class, resampling until every alternative appears somewhere.
pub fn menu_collection(n: usize, sizes: &[(usize, usize)], seed: u64) -> Vec<Menu> {
    let mut rng = rng_for(seed, 0);
    let classes: Vec<(Vec<Menu>, usize)> = sizes
        .iter()
        .map(|&(k, count)| {
            let all = subsets_of_size(n, k);
            assert!(
                count <= all.len(),
                "cannot draw {count} menus of size {k} from {n}"
            );
            (all, count)
        })
        .collect();
    loop {
        let mut menus = Vec::new();
        for (all, count) in &classes {
            let mut picked = index::sample(&mut rng, all.len(), *count).into_vec();
            picked.sort_unstable();
            menus.extend(picked.into_iter().map(|i| all[i]));
        }
        let covered = menus.iter().fold(Menu::EMPTY, |acc, m| acc.union(*m));
        if covered == Menu::full(n) {
            return menus;
        }
    }
}

/// Twenty menus over ten alternatives with the default size composition.
pub fn default_menu_collection(seed: u64) -> Vec<Menu> {
    menu_collection(10, &DEFAULT_MENU_SIZES, seed)
}

/// Largest universe for agents that tabulate their filter on every menu.
pub const MAX_TABLED_UNIVERSE: usize = 16;

/// A synthetic decision maker.
#[derive(Debug, Clone)]
pub enum Agent {
    /// Maximizes a linear order.
    Rational { ranking: Vec<usize> },
    /// Uniformly random choice on every menu.
    Random,
    /// Considers a random subset of at least `k` alternatives (all of a
    /// smaller menu) and picks its best element.
    Nc { ranking: Vec<usize>, k: usize },
    /// A filter tabulated on every menu, indexed by menu bits.
    Tabled {
        filter: Vec<Menu>,
        ranking: Vec<usize>,
    },
    /// Maximal elements of an acyclic first-stage relation.
    Sequential {
        stage1: Relation,
        ranking: Vec<usize>,
    },
}

fn best(ranking: &[usize], set: Menu) -> usize {
    *ranking
        .iter()
        .find(|&&x| set.contains(x))
        .expect("nonempty set")
}

fn maximal(rel: &Relation, menu: Menu) -> Menu {
    menu.iter()
        .filter(|&y| !menu.iter().any(|z| rel.contains(z, y)))
        .collect()
}

impl Agent {
    /// The deterministic consideration set, for agents that have one.
    pub fn consideration(&self, menu: Menu) -> Option<Menu> {
        match self {
            Agent::Rational { .. } => Some(menu),
            Agent::Random | Agent::Nc { .. } => None,
            Agent::Tabled { filter, .. } => Some(filter[menu.bits() as usize]),
            Agent::Sequential { stage1, .. } => Some(maximal(stage1, menu)),
        }
    }

    pub fn choose(&self, menu: Menu, rng: &mut ChaCha8Rng) -> usize {
        match self {
            Agent::Random => {
                let members: Vec<usize> = menu.iter().collect();
                members[rng.gen_range(0..members.len())]
            }
            Agent::Nc { ranking, k } => {
                let members: Vec<usize> = menu.iter().collect();
                let low = (*k).min(members.len());
                let size = rng.gen_range(low..=members.len());
                let picked: Menu = members.choose_multiple(rng, size).copied().collect();
                best(ranking, picked)
            }
            Agent::Rational { ranking }
            | Agent::Tabled { ranking, .. }
            | Agent::Sequential { ranking, .. } => best(
                ranking,
                self.consideration(menu).expect("deterministic filter"),
            ),
        }
    }

    /// True when every menu keeps at least `min(floor, |B|)` alternatives.
    fn meets_floor(&self, menus: &[Menu], floor: usize) -> bool {
        menus.iter().all(|&m| {
            self.consideration(m)
                .is_none_or(|f| f.len() >= floor.min(m.len()))
        })
    }
}

fn ranking(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut r: Vec<usize> = (0..n).collect();
    r.shuffle(rng);
    r
}

/// A random acyclic relation: forward pairs of a random ranking kept with
/// probability `density`.
fn random_dag(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Relation {
    let order = ranking(rng, n);
    let mut rel = Relation::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                rel.insert(order[i], order[j]);
            }
        }
    }
    rel
}

fn menus_by_size(n: usize) -> Vec<Menu> {
    assert!(
        n <= MAX_TABLED_UNIVERSE,
        "tabled filters support at most {MAX_TABLED_UNIVERSE} alternatives"
    );
    let mut all: Vec<Menu> = (1u64..1 << n).map(Menu::from_bits).collect();
    all.sort_by_key(|m| (m.len(), m.bits()));
    all
}

fn required(menu: Menu, observed: &[Menu], floor: usize) -> usize {
    if observed.contains(&menu) {
        floor.min(menu.len())
    } else {
        1
    }
}

/// A random attention filter, built from small menus up. A menu either keeps
/// everything or copies `F(B - y)` for every `y` it drops, which is exactly
/// the attention property. `shrink` is the chance of taking such a copy.
fn random_attention_filter(
    n: usize,
    observed: &[Menu],
    floor: usize,
    shrink: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Menu> {
    let mut f = vec![Menu::EMPTY; 1 << n];
    for b in menus_by_size(n) {
        let need = required(b, observed, floor);
        let mut options: Vec<Menu> = b
            .iter()
            .filter(|_| b.len() > 1)
            .map(|y| f[b.without(y).bits() as usize])
            .filter(|t| t.len() >= need)
            .filter(|&t| {
                b.difference(t)
                    .iter()
                    .all(|y| f[b.without(y).bits() as usize] == t)
            })
            .collect();
        options.sort();
        options.dedup();
        f[b.bits() as usize] = if !options.is_empty() && rng.gen_bool(shrink) {
            options[rng.gen_range(0..options.len())]
        } else {
            b
        };
    }
    f
}

/// A random competition filter, built from large menus down. Anything
/// considered in a superset stays considered; other members are added with
/// probability `keep`, then topped up to the required size.
fn random_competition_filter(
    n: usize,
    observed: &[Menu],
    floor: usize,
    keep: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Menu> {
    let mut f = vec![Menu::EMPTY; 1 << n];
    for b in menus_by_size(n).into_iter().rev() {
        let mut kept = Menu::EMPTY;
        for y in Menu::full(n).difference(b) {
            kept = kept.union(f[b.with(y).bits() as usize].intersection(b));
        }
        for x in b.difference(kept) {
            if rng.gen_bool(keep) {
                kept.insert(x);
            }
        }
        let mut rest: Vec<usize> = b.difference(kept).iter().collect();
        rest.shuffle(rng);
        let need = required(b, observed, floor);
        for x in rest.into_iter().take(need.saturating_sub(kept.len())) {
            kept.insert(x);
        }
        f[b.bits() as usize] = kept;
    }
    f
}

/// An agent of `model` whose filters keep at least `model.floor()`
/// alternatives on every menu of `menus`.
pub fn model_agent(model: ModelSpec, n: usize, menus: &[Menu], rng: &mut ChaCha8Rng) -> Agent {
    let floor = model.floor();
    let mut density = 0.35;
    for attempt in 0.. {
        if attempt > 0 && attempt % 50 == 0 {
            density /= 2.0;
        }
        let agent = match model.variant {
            Variant::Rational => Agent::Rational {
                ranking: ranking(rng, n),
            },
            Variant::Nc(k) => Agent::Nc {
                ranking: ranking(rng, n),
                k,
            },
            Variant::La => {
                let shrink = rng.gen_range(0.3..0.9);
                Agent::Tabled {
                    filter: random_attention_filter(n, menus, floor, shrink, rng),
                    ranking: ranking(rng, n),
                }
            }
            Variant::Lc => {
                let keep = rng.gen_range(0.05..0.5);
                Agent::Tabled {
                    filter: random_competition_filter(n, menus, floor, keep, rng),
                    ranking: ranking(rng, n),
                }
            }
            Variant::Rsm | Variant::Trsm => {
                let mut stage1 = random_dag(rng, n, density);
                if model.variant == Variant::Trsm {
                    stage1 = stage1.transitive_closure();
                }
                Agent::Sequential {
                    stage1,
                    ranking: ranking(rng, n),
                }
            }
        };
        if agent.meets_floor(menus, floor) {
            return agent;
        }
    }
    unreachable!()
}

/// Synthetic pool presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Rational,
    Random,
    /// Rational and two-stage agents; see [`mixture_composition`] and
    /// [`MixtureKind::must_fail`].
    Mixture,
    /// Agents of one model.
    Model(ModelSpec),
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Rational => f.write_str("rational"),
            Preset::Random => f.write_str("random"),
            Preset::Mixture => f.write_str("mixture"),
            Preset::Model(m) => write!(f, "model:{m}"),
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Preset::Rational),
            "random" => Ok(Preset::Random),
            "mixture" => Ok(Preset::Mixture),
            _ => match s.strip_prefix("model:") {
                Some(m) => m.parse().map(Preset::Model).map_err(|e| e.to_string()),
                None => Err(format!("unknown preset '{s}'")),
            },
        }
    }
}

/// Agent kinds of the mixture with their weights out of 113. The rational
/// share is 38/113 (34%).
pub fn mixture_composition() -> [(MixtureKind, usize); 7] {
    [
        (MixtureKind::Rational, 38),
        (MixtureKind::Trsm, 28),
        (MixtureKind::Rsm, 1),
        (MixtureKind::Lc, 41),
        (MixtureKind::La, 3),
        (MixtureKind::Nc2, 1),
        (MixtureKind::Random, 1),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixtureKind {
    Rational,
    Trsm,
    Rsm,
    Lc,
    La,
    Nc2,
    Random,
}

/// Splits `count` subjects across the mixture weights by largest remainder.
pub fn mixture_counts(count: usize) -> Vec<(MixtureKind, usize)> {
    let comp = mixture_composition();
    let total: usize = comp.iter().map(|(_, w)| w).sum();
    let mut out: Vec<(MixtureKind, usize, usize)> = comp
        .iter()
        .map(|&(k, w)| (k, w * count / total, w * count % total))
        .collect();
    let assigned: usize = out.iter().map(|(_, c, _)| c).sum();
    let mut by_rest: Vec<usize> = (0..out.len()).collect();
    by_rest.sort_by(|&a, &b| out[b].2.cmp(&out[a].2).then(a.cmp(&b)));
    for &i in by_rest.iter().take(count - assigned) {
        out[i].1 += 1;
    }
    out.into_iter().map(|(k, c, _)| (k, c)).collect()
}

impl MixtureKind {
    /// The stricter model this kind's subjects are conditioned to violate, so
    /// that each kind moves the pass rate of exactly one rung of the ladder
    /// Rational, TRSM, RSM, LC.
    pub fn must_fail(self) -> Option<ModelSpec> {
        match self {
            MixtureKind::Rational => None,
            MixtureKind::Trsm => Some(ModelSpec::RATIONAL),
            MixtureKind::Rsm => Some(ModelSpec::TRSM),
            MixtureKind::Lc => Some(ModelSpec::RSM),
            MixtureKind::La | MixtureKind::Nc2 | MixtureKind::Random => Some(ModelSpec::LC),
        }
    }
}

fn mixture_agent(kind: MixtureKind, n: usize, menus: &[Menu], rng: &mut ChaCha8Rng) -> Agent {
    let amended = |v| ModelSpec::amended(v, 2);
    match kind {
        MixtureKind::Rational => model_agent(ModelSpec::RATIONAL, n, menus, rng),
        MixtureKind::Trsm => model_agent(amended(Variant::Trsm), n, menus, rng),
        MixtureKind::Rsm => model_agent(amended(Variant::Rsm), n, menus, rng),
        MixtureKind::Lc => model_agent(amended(Variant::Lc), n, menus, rng),
        MixtureKind::La => model_agent(amended(Variant::La), n, menus, rng),
        MixtureKind::Nc2 => model_agent(ModelSpec::nc(2), n, menus, rng),
        MixtureKind::Random => Agent::Random,
    }
}

/// Draws agents of `kind` until one produces choices that fail
/// `kind.must_fail()`.
fn mixture_subject(
    kind: MixtureKind,
    n: usize,
    menus: &[Menu],
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    for _ in 0..MAX_MIXTURE_DRAWS {
        let agent = mixture_agent(kind, n, menus, rng);
        let choices: Vec<usize> = menus.iter().map(|&m| agent.choose(m, rng)).collect();
        let Some(model) = kind.must_fail() else {
            return choices;
        };
        let d = ChoiceDataset::from_choices(n, menus.iter().copied().zip(choices.iter().copied()))
            .expect("agents choose from their menus");
        if !is_rationalizable(model, &d).expect("small instances stay within budget") {
            return choices;
        }
    }
    panic!("no {kind:?} subject failing its stricter model after {MAX_MIXTURE_DRAWS} draws");
}

const MAX_MIXTURE_DRAWS: usize = 100_000;

fn pool_from_agents(
    alternatives: Vec<Alternative>,
    menus: Vec<Menu>,
    agents: Vec<(String, Agent)>,
    rng: &mut ChaCha8Rng,
) -> Result<SubjectPool, PoolError> {
    let subjects: Vec<(String, Vec<usize>)> = agents
        .into_iter()
        .map(|(id, agent)| {
            let choices = menus.iter().map(|&m| agent.choose(m, rng)).collect();
            (id, choices)
        })
        .collect();
    SubjectPool::from_choices(alternatives, menus, subjects)
}

/// `count` uniformly random subjects on the given menus.
pub fn simulate_random_subjects(
    alternatives: &[Alternative],
    menus: &[Menu],
    count: usize,
    seed: u64,
) -> SubjectPool {
    let mut rng = rng_for(seed, 2);
    let agents = (0..count)
        .map(|i| (format!("r{:04}", i + 1), Agent::Random))
        .collect();
    pool_from_agents(alternatives.to_vec(), menus.to_vec(), agents, &mut rng)
        .expect("random choices are valid")
}

/// A synthetic pool on the installment universe and the default menus for `seed`.
pub fn generate_pool(preset: Preset, count: usize, seed: u64) -> SubjectPool {
    let alternatives = table1_alternatives();
    let menus = default_menu_collection(seed);
    generate_pool_on(preset, alternatives, menus, count, seed)
}

/// A synthetic pool on a given universe and menu collection.
pub fn generate_pool_on(
    preset: Preset,
    alternatives: Vec<Alternative>,
    menus: Vec<Menu>,
    count: usize,
    seed: u64,
) -> SubjectPool {
    let n = alternatives.len();
    let mut rng = rng_for(seed, 1);
    let kinds: Vec<Option<MixtureKind>> = match preset {
        Preset::Mixture => {
            let mut v: Vec<Option<MixtureKind>> = mixture_counts(count)
                .into_iter()
                .flat_map(|(k, c)| std::iter::repeat_n(Some(k), c))
                .collect();
            v.shuffle(&mut rng);
            v
        }
        _ => vec![None; count],
    };
    let subjects: Vec<(String, Vec<usize>)> = kinds
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            let choices = match (preset, kind) {
                (_, Some(k)) => mixture_subject(k, n, &menus, &mut rng),
                (Preset::Rational | Preset::Model(_), _) => {
                    let model = match preset {
                        Preset::Model(m) => m,
                        _ => ModelSpec::RATIONAL,
                    };
                    let agent = model_agent(model, n, &menus, &mut rng);
                    menus.iter().map(|&m| agent.choose(m, &mut rng)).collect()
                }
                _ => menus
                    .iter()
                    .map(|&m| Agent::Random.choose(m, &mut rng))
                    .collect(),
            };
            (format!("s{:03}", i + 1), choices)
        })
        .collect();
    SubjectPool::from_choices(alternatives, menus, subjects)
        .expect("agents choose from their menus")
}
