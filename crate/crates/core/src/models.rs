//! Two-stage models: constraint construction, rationalizability and revealed
//! preference.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::constraints::{
    Atom, ConstraintError, ConstraintSystem, Literal, SatResult, SolverConfig, SystemSolver,
};
use crate::data::{ChoiceDataset, Menu};
use crate::diagnostics::{find_warp_pairs, warp_directly_involved, warp_involved};
use crate::relation::Relation;

/// The filter family of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Identity filter.
    Rational,
    /// Any filter keeping at least `k` alternatives (or the whole menu when
    /// it is smaller).
    Nc(usize),
    /// Attention filters.
    La,
    /// Competition filters.
    Lc,
    /// Maximal elements of an asymmetric (acyclic) first-stage relation.
    Rsm,
    /// Maximal elements of a strict partial order.
    Trsm,
}

/// A model: a filter family plus an optional minimum consideration-set size
/// imposed on observed menus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    pub variant: Variant,
    pub amended_min_size: Option<usize>,
}

impl ModelSpec {
    pub const RATIONAL: ModelSpec = ModelSpec::base(Variant::Rational);
    pub const LA: ModelSpec = ModelSpec::base(Variant::La);
    pub const LC: ModelSpec = ModelSpec::base(Variant::Lc);
    pub const RSM: ModelSpec = ModelSpec::base(Variant::Rsm);
    pub const TRSM: ModelSpec = ModelSpec::base(Variant::Trsm);

    pub const fn base(variant: Variant) -> Self {
        Self {
            variant,
            amended_min_size: None,
        }
    }

    pub const fn nc(k: usize) -> Self {
        Self::base(Variant::Nc(k))
    }

    /// Adds a minimum consideration-set size. For `Rational` this is a no-op
    /// and for `Nc(j)` it folds into `Nc(max(j, k))`.
    pub fn amended(variant: Variant, k: usize) -> Self {
        match variant {
            Variant::Rational => Self::base(variant),
            Variant::Nc(j) => Self::nc(j.max(k)),
            _ if k <= 1 => Self::base(variant),
            _ => Self {
                variant,
                amended_min_size: Some(k),
            },
        }
    }

    /// The eleven configurations of the replication study.
    pub fn study_configurations() -> [ModelSpec; 11] {
        [
            Self::RATIONAL,
            Self::nc(1),
            Self::nc(2),
            Self::LA,
            Self::LC,
            Self::RSM,
            Self::TRSM,
            Self::amended(Variant::La, 2),
            Self::amended(Variant::Lc, 2),
            Self::amended(Variant::Rsm, 2),
            Self::amended(Variant::Trsm, 2),
        ]
    }

    pub fn is_amended(&self) -> bool {
        self.amended_min_size.is_some()
    }

    /// The unamended model.
    pub fn base_model(&self) -> ModelSpec {
        Self::base(self.variant)
    }

    /// Minimum consideration-set size on observed menus.
    pub fn floor(&self) -> usize {
        match self.variant {
            Variant::Rational => usize::MAX,
            Variant::Nc(k) => k.max(self.amended_min_size.unwrap_or(1)),
            _ => self.amended_min_size.unwrap_or(1),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.variant {
            Variant::Rational => return f.write_str("rational"),
            Variant::Nc(k) => return write!(f, "nc{k}"),
            Variant::La => "la",
            Variant::Lc => "lc",
            Variant::Rsm => "rsm",
            Variant::Trsm => "trsm",
        };
        match self.amended_min_size {
            Some(k) => write!(f, "{name}{k}"),
            None => f.write_str(name),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "rational" {
            return Ok(Self::RATIONAL);
        }
        let split = lower
            .find(|c: char| c.is_ascii_digit())
            .unwrap_or(lower.len());
        let (name, digits) = lower.split_at(split);
        let k = if digits.is_empty() {
            None
        } else {
            match digits.parse::<usize>() {
                Ok(k) if (1..=crate::data::MAX_ALTERNATIVES).contains(&k) => Some(k),
                _ => return Err(ModelError::UnknownModel(s.to_string())),
            }
        };
        let variant = match name {
            "nc" => {
                return k
                    .map(Self::nc)
                    .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
            }
            "la" => Variant::La,
            "lc" => Variant::Lc,
            "rsm" => Variant::Rsm,
            "trsm" => Variant::Trsm,
            _ => return Err(ModelError::UnknownModel(s.to_string())),
        };
        Ok(Self::amended(variant, k.unwrap_or(1)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("dataset is not rationalizable by the model")]
    NotRationalizable,
    #[error("theorem screen does not apply to model {0}")]
    InapplicableModel(ModelSpec),
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

/// Adds clauses stating that at least `m` of `lits` are true: every subset of
/// `lits.len() - m + 1` literals must contain a true one.
fn push_at_least(
    sys: &mut ConstraintSystem,
    lits: &[Literal],
    m: usize,
) -> Result<(), ConstraintError> {
    if m == 0 {
        return Ok(());
    }
    if m > lits.len() {
        // unsatisfiable: force a literal and its negation
        let any = lits.first().copied().expect("non-empty literal set");
        sys.push_clause([any])?;
        return sys.push_clause([!any]);
    }
    let width = lits.len() - m + 1;
    let mut idx: Vec<usize> = (0..width).collect();
    loop {
        sys.push_clause(idx.iter().map(|&i| lits[i]))?;
        // next combination in lexicographic order
        let mut i = width;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] < lits.len() - width + i {
                break;
            }
            if i == 0 {
                return Ok(());
            }
        }
        idx[i] += 1;
        for j in i + 1..width {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `c(menu)` beats at least `floor - 1` of the others in the order.
fn push_floor(
    sys: &mut ConstraintSystem,
    menu: Menu,
    choice: usize,
    floor: usize,
) -> Result<(), ConstraintError> {
    let m = floor.min(menu.len()).saturating_sub(1);
    let lits: Vec<Literal> = menu
        .without(choice)
        .iter()
        .map(|y| Atom::Order(choice, y).pos())
        .collect();
    push_at_least(sys, &lits, m)
}

/// The constraint system whose models are the rationalizations of `d`.
pub fn build_system(model: ModelSpec, d: &ChoiceDataset) -> ConstraintSystem {
    try_build_system(model, d).expect("generated atoms are declared")
}

fn try_build_system(
    model: ModelSpec,
    d: &ChoiceDataset,
) -> Result<ConstraintSystem, ConstraintError> {
    let n = d.n();
    let obs = d.observations();
    let mut sys = ConstraintSystem::with_order(n);
    match model.variant {
        Variant::Rational => {
            for o in obs {
                for y in o.menu.without(o.choice) {
                    sys.push_clause([Atom::Order(o.choice, y).pos()])?;
                }
            }
        }
        Variant::Nc(_) => {
            for o in obs {
                push_floor(&mut sys, o.menu, o.choice, model.floor())?;
            }
        }
        Variant::La => {
            for (i, j) in find_warp_pairs(d) {
                let (s, t) = (obs[i], obs[j]);
                let lits = s
                    .menu
                    .difference(t.menu)
                    .iter()
                    .map(|z| Atom::Order(s.choice, z).pos())
                    .chain(
                        t.menu
                            .difference(s.menu)
                            .iter()
                            .map(|z| Atom::Order(t.choice, z).pos()),
                    );
                sys.push_clause(lits)?;
            }
        }
        Variant::Lc => {
            for s in obs {
                for t in obs {
                    if s.menu.is_proper_subset(t.menu)
                        && s.menu.contains(t.choice)
                        && s.choice != t.choice
                    {
                        sys.push_clause([Atom::Order(s.choice, t.choice).pos()])?;
                    }
                }
            }
        }
        Variant::Rsm | Variant::Trsm => {
            let transitive = model.variant == Variant::Trsm;
            sys.declare_stage1(transitive, true);
            for o in obs {
                let c = o.choice;
                for z in o.menu.without(c) {
                    sys.push_clause([Atom::Stage1(z, c).negative()])?;
                }
                for y in o.menu.without(c) {
                    let filtered = o.menu.without(y).iter().map(|z| Atom::Stage1(z, y).pos());
                    sys.push_clause(filtered.chain([Atom::Order(c, y).pos()]))?;
                }
            }
        }
    }

    if let Some(k) = model.amended_min_size {
        match model.variant {
            Variant::La | Variant::Lc => {
                for o in obs {
                    push_floor(&mut sys, o.menu, o.choice, k)?;
                }
            }
            Variant::Rsm | Variant::Trsm => {
                for o in obs {
                    let idx = sys.declare_consider_menu(o.menu);
                    let consider = |alt| Atom::Consider { menu: idx, alt };
                    for y in o.menu {
                        let blockers: Vec<usize> = o.menu.without(y).iter().collect();
                        sys.push_clause(
                            [consider(y).pos()]
                                .into_iter()
                                .chain(blockers.iter().map(|&z| Atom::Stage1(z, y).pos())),
                        )?;
                        for &z in &blockers {
                            sys.push_clause([consider(y).negative(), Atom::Stage1(z, y).negative()])?;
                        }
                    }
                    sys.push_clause([consider(o.choice).pos()])?;
                    let others: Vec<Literal> = o
                        .menu
                        .without(o.choice)
                        .iter()
                        .map(|y| {
                            sys.push_clause([consider(y).negative(), Atom::Order(o.choice, y).pos()])
                                .map(|_| consider(y).pos())
                        })
                        .collect::<Result<_, _>>()?;
                    push_at_least(&mut sys, &others, k.min(o.menu.len()) - 1)?;
                }
            }
            Variant::Rational | Variant::Nc(_) => {}
        }
    }
    Ok(sys)
}

pub fn is_rationalizable(model: ModelSpec, d: &ChoiceDataset) -> Result<bool, ModelError> {
    is_rationalizable_with(model, d, &SolverConfig::default())
}

pub fn is_rationalizable_with(
    model: ModelSpec,
    d: &ChoiceDataset,
    cfg: &SolverConfig,
) -> Result<bool, ModelError> {
    let sys = build_system(model, d);
    let mut solver = SystemSolver::new(&sys, *cfg);
    Ok(solver.solve(&[])?.is_sat())
}

/// The revealed preference relation and its derived views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevealedResult {
    pub rationalizable: bool,
    pub revealed: Relation,
    /// `lower_contours[x]` is row `x` of `revealed`.
    pub lower_contours: Vec<Menu>,
    /// Alternatives whose lower contour set is still constrained by some
    /// clause after root-level propagation (an over-approximation).
    pub restricted: Menu,
}

/// Options for [`revealed_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RevealOptions {
    pub solver: SolverConfig,
    /// Skip entailment queries for alternatives outside [`theorem_screen`]
    /// for LA, LC and RSM. The TRSM screen is never used for pruning: it
    /// misses revelations that run through transitivity of the first stage
    /// (see `trsm_screen_counterexample` below).
    pub use_screen: bool,
}

impl Default for RevealOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            use_screen: true,
        }
    }
}

pub fn revealed(model: ModelSpec, d: &ChoiceDataset) -> Result<RevealedResult, ModelError> {
    revealed_with(model, d, &RevealOptions::default())
}

/// Computes `x >* y` for every pair as entailment of `Order(x, y)`.
///
/// Only pairs true in every witness found so far are queried, and pairs
/// already implied by transitivity of the entailed ones are not queried.
pub fn revealed_with(
    model: ModelSpec,
    d: &ChoiceDataset,
    opts: &RevealOptions,
) -> Result<RevealedResult, ModelError> {
    let n = d.n();
    let sys = build_system(model, d);
    let mut solver = SystemSolver::new(&sys, opts.solver);
    let first = match solver.solve(&[])? {
        SatResult::Sat(a) => a,
        SatResult::Unsat => return Err(ModelError::NotRationalizable),
    };
    let screen = if opts.use_screen && model.variant != Variant::Trsm {
        theorem_screen(model, d).ok()
    } else {
        None
    };

    let mut candidate = first.order_relation();
    if let Some(allowed) = screen {
        for x in 0..n {
            if !allowed.contains(x) {
                for y in candidate.row(x) {
                    candidate.remove(x, y);
                }
            }
        }
    }

    let mut rev = Relation::empty(n);
    for x in 0..n {
        for y in 0..n {
            if x != y && solver.root_value(Atom::Order(x, y)) == Some(true) {
                rev.insert(x, y);
            }
        }
    }
    // root-forced pairs are already closed under the order axioms
    rev.intersect_with(&candidate);

    let pairs: Vec<(usize, usize)> = candidate.pairs().collect();
    for (x, y) in pairs {
        if !candidate.contains(x, y) || rev.contains(x, y) {
            continue;
        }
        if rev.row(x).iter().any(|z| rev.contains(z, y)) {
            rev.insert(x, y);
            continue;
        }
        match solver.solve(&[Atom::Order(x, y).negative()])? {
            SatResult::Sat(w) => candidate.intersect_with(&w.order_relation()),
            SatResult::Unsat => {
                rev.insert(x, y);
                rev = rev.transitive_closure();
            }
        }
    }

    let restricted = restricted_set(&sys, &solver);
    let lower_contours = (0..n).map(|x| rev.row(x)).collect();
    Ok(RevealedResult {
        rationalizable: true,
        revealed: rev,
        lower_contours,
        restricted,
    })
}

/// Alternatives `x` with a root-forced `Order(x, _)`, or with a positive
/// `Order(x, _)` literal still open in some data clause not satisfied at the
/// root.
fn restricted_set(sys: &ConstraintSystem, solver: &SystemSolver) -> Menu {
    let mut out = Menu::EMPTY;
    let n = sys.n();
    for x in 0..n {
        if (0..n).any(|y| y != x && solver.root_value(Atom::Order(x, y)) == Some(true)) {
            out.insert(x);
        }
    }
    for clause in sys.clauses() {
        let satisfied = clause
            .literals()
            .iter()
            .any(|l| solver.root_value(l.atom) == Some(l.positive));
        if satisfied {
            continue;
        }
        for l in clause.literals() {
            if let (Atom::Order(x, _), true, None) = (l.atom, l.positive, solver.root_value(l.atom))
            {
                out.insert(x);
            }
        }
    }
    out
}

/// Row `x` of the revealed relation.
pub fn lower_contour(model: ModelSpec, d: &ChoiceDataset, x: usize) -> Result<Menu, ModelError> {
    Ok(revealed(model, d)?.revealed.row(x))
}

/// Alternatives that can have a nonempty lower contour set under the model:
/// the directly involved alternatives for LA, LC and RSM, and the involved
/// alternatives for TRSM. Other models are rejected.
pub fn theorem_screen(model: ModelSpec, d: &ChoiceDataset) -> Result<Menu, ModelError> {
    if model.is_amended() {
        return Err(ModelError::InapplicableModel(model));
    }
    match model.variant {
        Variant::La | Variant::Lc | Variant::Rsm => Ok(warp_directly_involved(d)),
        Variant::Trsm => Ok(warp_involved(d)),
        Variant::Rational | Variant::Nc(_) => Err(ModelError::InapplicableModel(model)),
    }
}
