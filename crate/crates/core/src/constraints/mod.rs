//! Boolean constraint systems over comparison atoms.
//!
//! A [`ConstraintSystem`] declares which atom families exist (second-stage
//! order, first-stage relation, linear extension of the first-stage relation,
//! consideration membership), which structural axioms hold over them, and a
//! list of data clauses. Axiom clauses are materialized only when the system
//! is compiled for the solver.

mod dimacs;
mod solver;

use std::fmt;

use thiserror::Error;

use crate::data::Menu;

pub use dimacs::to_dimacs;
pub use solver::{
    entails, satisfiable, Assignment, SatResult, SolverConfig, SystemSolver, DEFAULT_NODE_BUDGET,
};

/// A propositional atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `x` is ranked above `y` by the second-stage preference.
    Order(usize, usize),
    /// `x` filters `y` out in the first stage.
    Stage1(usize, usize),
    /// `x` precedes `y` in a linear extension of the first-stage relation.
    Rank(usize, usize),
    /// Alternative `alt` survives the first stage on consideration menu
    /// `menu` (an index into [`Families::consider`]).
    Consider { menu: usize, alt: usize },
}

impl Atom {
    pub fn pos(self) -> Literal {
        Literal::new(self, true)
    }

    pub fn negative(self) -> Literal {
        Literal::new(self, false)
    }

    fn family(self) -> &'static str {
        match self {
            Atom::Order(..) => "order",
            Atom::Stage1(..) => "stage1",
            Atom::Rank(..) => "rank",
            Atom::Consider { .. } => "consider",
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Atom::Order(x, y) => write!(f, "order({x},{y})"),
            Atom::Stage1(x, y) => write!(f, "stage1({x},{y})"),
            Atom::Rank(x, y) => write!(f, "rank({x},{y})"),
            Atom::Consider { menu, alt } => write!(f, "consider({menu},{alt})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn new(atom: Atom, positive: bool) -> Self {
        Self { atom, positive }
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal::new(self.atom, !self.positive)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "-{}", self.atom)
        }
    }
}

/// A non-empty disjunction of literals, sorted, without duplicates and
/// without complementary pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self, ConstraintError> {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        if literals.is_empty() {
            return Err(ConstraintError::EmptyClause);
        }
        literals.sort();
        literals.dedup();
        if literals.windows(2).any(|w| w[0].atom == w[1].atom) {
            return Err(ConstraintError::Tautology);
        }
        Ok(Self { literals })
    }

    pub fn unit(lit: Literal) -> Self {
        Self {
            literals: vec![lit],
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.literals.len() == 1
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("clause has no literals")]
    EmptyClause,
    #[error("clause contains an atom in both polarities")]
    Tautology,
    #[error("atom {atom} belongs to the undeclared family '{family}'")]
    UnknownAtomFamily { atom: Atom, family: &'static str },
    #[error("atom {0} is malformed for this system")]
    InvalidAtom(Atom),
    #[error("solver budget of {budget} nodes exhausted")]
    BudgetExceeded { budget: u64 },
}

/// Declared atom families.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Families {
    pub order: bool,
    pub stage1: bool,
    pub rank: bool,
    /// One entry per consideration menu; `Consider { menu: i, .. }` ranges
    /// over members of `consider[i]`.
    pub consider: Vec<Menu>,
}

/// Structural axioms materialized at solve time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AxiomFlags {
    /// Exactly one of `order(x,y)`, `order(y,x)` per pair.
    pub order_total: bool,
    pub order_transitive: bool,
    pub stage1_asymmetric: bool,
    pub stage1_transitive: bool,
    /// `rank` is a strict linear order and contains `stage1`, making the
    /// first-stage relation acyclic.
    pub stage1_acyclic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    n: usize,
    families: Families,
    axioms: AxiomFlags,
    clauses: Vec<Clause>,
}

impl ConstraintSystem {
    /// A system over `n` alternatives with no families declared.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            families: Families::default(),
            axioms: AxiomFlags::default(),
            clauses: Vec::new(),
        }
    }

    /// Order family with the strict-linear-order axioms.
    pub fn with_order(n: usize) -> Self {
        let mut sys = Self::new(n);
        sys.declare_order();
        sys
    }

    pub fn declare_order(&mut self) {
        self.families.order = true;
        self.axioms.order_total = true;
        self.axioms.order_transitive = true;
    }

    pub fn declare_stage1(&mut self, transitive: bool, acyclic: bool) {
        self.families.stage1 = true;
        self.axioms.stage1_asymmetric = true;
        self.axioms.stage1_transitive = transitive;
        if acyclic && !transitive {
            self.families.rank = true;
            self.axioms.stage1_acyclic = true;
        }
    }

    /// Declares a consideration menu and returns its index.
    pub fn declare_consider_menu(&mut self, menu: Menu) -> usize {
        self.families.consider.push(menu);
        self.families.consider.len() - 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn families(&self) -> &Families {
        &self.families
    }

    pub fn axioms(&self) -> AxiomFlags {
        self.axioms
    }

    /// Data clauses (axioms excluded).
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    fn check_atom(&self, atom: Atom) -> Result<(), ConstraintError> {
        let declared = match atom {
            Atom::Order(..) => self.families.order,
            Atom::Stage1(..) => self.families.stage1,
            Atom::Rank(..) => self.families.rank,
            Atom::Consider { menu, .. } => menu < self.families.consider.len(),
        };
        if !declared {
            return Err(ConstraintError::UnknownAtomFamily {
                atom,
                family: atom.family(),
            });
        }
        let ok = match atom {
            Atom::Order(x, y) | Atom::Stage1(x, y) | Atom::Rank(x, y) => {
                x != y && x < self.n && y < self.n
            }
            Atom::Consider { menu, alt } => self.families.consider[menu].contains(alt),
        };
        if ok {
            Ok(())
        } else {
            Err(ConstraintError::InvalidAtom(atom))
        }
    }

    /// Appends a clause in place. Tautologies are dropped.
    pub fn push_clause(
        &mut self,
        literals: impl IntoIterator<Item = Literal>,
    ) -> Result<(), ConstraintError> {
        let clause = match Clause::new(literals) {
            Ok(c) => c,
            Err(ConstraintError::Tautology) => return Ok(()),
            Err(e) => return Err(e),
        };
        for lit in clause.literals() {
            self.check_atom(lit.atom)?;
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Returns an extended copy; `self` is left unchanged.
    pub fn add_clause(
        &self,
        literals: impl IntoIterator<Item = Literal>,
    ) -> Result<ConstraintSystem, ConstraintError> {
        let mut next = self.clone();
        next.push_clause(literals)?;
        Ok(next)
    }

    /// Axiom clauses implied by the flags.
    pub fn axiom_clauses(&self) -> Vec<Clause> {
        let mut out = Vec::new();
        let n = self.n;
        if self.axioms.order_total || self.axioms.order_transitive {
            out.extend(relation_axioms(
                n,
                Atom::Order,
                self.axioms.order_total,
                true,
                self.axioms.order_transitive,
            ));
        }
        if self.axioms.stage1_asymmetric || self.axioms.stage1_transitive {
            out.extend(stage1_axioms(n, self.axioms.stage1_transitive));
        }
        if self.axioms.stage1_acyclic {
            out.extend(relation_axioms(n, Atom::Rank, true, true, true));
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        out.push(Clause {
                            literals: sorted(vec![
                                Atom::Stage1(x, y).negative(),
                                Atom::Rank(x, y).pos(),
                            ]),
                        });
                    }
                }
            }
        }
        out
    }

    /// Every declared atom, in solver variable order.
    pub fn atoms(&self) -> Vec<Atom> {
        let n = self.n;
        let mut out = Vec::new();
        let pairs = |make: fn(usize, usize) -> Atom, out: &mut Vec<Atom>| {
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        out.push(make(x, y));
                    }
                }
            }
        };
        if self.families.order {
            pairs(Atom::Order, &mut out);
        }
        if self.families.stage1 {
            pairs(Atom::Stage1, &mut out);
        }
        if self.families.rank {
            pairs(Atom::Rank, &mut out);
        }
        for (menu, m) in self.families.consider.iter().enumerate() {
            out.extend(m.iter().map(|alt| Atom::Consider { menu, alt }));
        }
        out
    }
}

fn sorted(mut lits: Vec<Literal>) -> Vec<Literal> {
    lits.sort();
    lits
}

fn relation_axioms(
    n: usize,
    make: fn(usize, usize) -> Atom,
    total: bool,
    asymmetric: bool,
    transitive: bool,
) -> Vec<Clause> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if total {
                out.push(Clause {
                    literals: sorted(vec![make(x, y).pos(), make(y, x).pos()]),
                });
            }
            if asymmetric {
                out.push(Clause {
                    literals: sorted(vec![make(x, y).negative(), make(y, x).negative()]),
                });
            }
        }
    }
    if transitive {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x != y && y != z && x != z {
                        out.push(Clause {
                            literals: sorted(vec![
                                make(x, y).negative(),
                                make(y, z).negative(),
                                make(x, z).pos(),
                            ]),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Strict linear order axioms on `Order` atoms: totality and asymmetry per
/// unordered pair, transitivity per ordered triple.
pub fn order_axioms(n: usize) -> Vec<Clause> {
    relation_axioms(n, Atom::Order, true, true, true)
}

/// Asymmetry of the first-stage relation, plus transitivity when requested.
pub fn stage1_axioms(n: usize, transitive: bool) -> Vec<Clause> {
    relation_axioms(n, Atom::Stage1, false, true, transitive)
}
