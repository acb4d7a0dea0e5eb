//! Chronological-backtracking DPLL with two-watched-literal propagation.

use std::sync::Arc;

use super::{Atom, Clause, ConstraintError, ConstraintSystem, Literal};
use crate::data::Menu;
use crate::relation::Relation;

/// Default cap on decisions plus conflicts per solve call.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub node_budget: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Maps atoms to dense variable indices.
#[derive(Debug, Clone)]
struct Layout {
    n: usize,
    order: Option<usize>,
    stage1: Option<usize>,
    rank: Option<usize>,
    consider: Vec<(usize, Menu)>,
    num_vars: usize,
}

impl Layout {
    fn new(sys: &ConstraintSystem) -> Self {
        let n = sys.n();
        let pairs = n * n.saturating_sub(1);
        let mut next = 0;
        let mut take = |declared: bool, size: usize| {
            declared.then(|| {
                let base = next;
                next += size;
                base
            })
        };
        let f = sys.families();
        let order = take(f.order, pairs);
        let stage1 = take(f.stage1, pairs);
        let rank = take(f.rank, pairs);
        let mut consider = Vec::with_capacity(f.consider.len());
        for &m in &f.consider {
            consider.push((next, m));
            next += m.len();
        }
        Self {
            n,
            order,
            stage1,
            rank,
            consider,
            num_vars: next,
        }
    }

    fn pair(&self, x: usize, y: usize) -> usize {
        x * (self.n - 1) + if y < x { y } else { y - 1 }
    }

    fn var(&self, atom: Atom) -> Option<usize> {
        match atom {
            Atom::Order(x, y) => self.order.map(|b| b + self.pair(x, y)),
            Atom::Stage1(x, y) => self.stage1.map(|b| b + self.pair(x, y)),
            Atom::Rank(x, y) => self.rank.map(|b| b + self.pair(x, y)),
            Atom::Consider { menu, alt } => self.consider.get(menu).and_then(|&(b, m)| {
                m.contains(alt)
                    .then(|| b + (m.bits() & ((1u64 << alt) - 1)).count_ones() as usize)
            }),
        }
    }
}

/// A complete truth assignment to the declared atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    layout_n: usize,
    atoms: Arc<Vec<Atom>>,
    values: Vec<bool>,
}

impl Assignment {
    /// Value of a declared atom; `None` for atoms outside the system.
    pub fn value(&self, atom: Atom) -> Option<bool> {
        self.atoms
            .binary_search_by(|a| atom_key(*a).cmp(&atom_key(atom)))
            .ok()
            .map(|i| self.values[i])
    }

    pub fn true_atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.atoms
            .iter()
            .zip(&self.values)
            .filter(|(_, &v)| v)
            .map(|(a, _)| *a)
    }

    /// The second-stage order encoded by the `Order` atoms.
    pub fn order_relation(&self) -> Relation {
        let mut rel = Relation::empty(self.layout_n);
        for atom in self.true_atoms() {
            if let Atom::Order(x, y) = atom {
                rel.insert(x, y);
            }
        }
        rel
    }

    /// The first-stage relation encoded by the `Stage1` atoms.
    pub fn stage1_relation(&self) -> Relation {
        let mut rel = Relation::empty(self.layout_n);
        for atom in self.true_atoms() {
            if let Atom::Stage1(x, y) = atom {
                rel.insert(x, y);
            }
        }
        rel
    }
}

/// Sort key matching the layout order (family, then payload).
fn atom_key(a: Atom) -> (u8, usize, usize) {
    match a {
        Atom::Order(x, y) => (0, x, y),
        Atom::Stage1(x, y) => (1, x, y),
        Atom::Rank(x, y) => (2, x, y),
        Atom::Consider { menu, alt } => (3, menu, alt),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Assignment),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn witness(&self) -> Option<&Assignment> {
        match self {
            SatResult::Sat(a) => Some(a),
            SatResult::Unsat => None,
        }
    }
}

/// One solve of the whole system.
pub fn satisfiable(
    sys: &ConstraintSystem,
    cfg: &SolverConfig,
) -> Result<SatResult, ConstraintError> {
    SystemSolver::new(sys, *cfg).solve(&[])
}

/// True when every satisfying assignment makes `atom` true, decided as
/// unsatisfiability of the system with `atom` negated.
pub fn entails(
    sys: &ConstraintSystem,
    atom: Atom,
    cfg: &SolverConfig,
) -> Result<bool, ConstraintError> {
    let mut solver = SystemSolver::new(sys, *cfg);
    solver.entails(atom)
}

type Lit = u32;

#[inline]
fn lit_of(var: usize, positive: bool) -> Lit {
    ((var as u32) << 1) | u32::from(!positive)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Decision {
    First,
    Flipped,
}

/// A compiled system that answers repeated queries under assumptions.
///
/// The root-level propagation of unit clauses is done once at construction
/// and kept across calls.
#[derive(Debug, Clone)]
pub struct SystemSolver {
    layout: Layout,
    atoms: Arc<Vec<Atom>>,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    assign: Vec<i8>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    /// Decision order: variables by static score, best first.
    order: Vec<Lit>,
    root_conflict: bool,
    budget: u64,
}

impl SystemSolver {
    pub fn new(sys: &ConstraintSystem, cfg: SolverConfig) -> Self {
        let layout = Layout::new(sys);
        let mut atoms = sys.atoms();
        atoms.sort_by_key(|a| atom_key(*a));
        debug_assert_eq!(atoms.len(), layout.num_vars);
        let num_vars = layout.num_vars;

        let axioms = sys.axiom_clauses();
        let all: Vec<&Clause> = axioms.iter().chain(sys.clauses()).collect();

        // Jeroslow-Wang style static scores, data clauses weighted double.
        let data_start = axioms.len();
        let mut score = vec![0f64; 2 * num_vars];
        let mut clauses = Vec::with_capacity(all.len());
        let mut units = Vec::new();
        for (i, clause) in all.iter().enumerate() {
            let weight = if i >= data_start { 2.0 } else { 1.0 };
            let w = weight * (0.5f64).powi(clause.len() as i32);
            let lits: Vec<Lit> = clause
                .literals()
                .iter()
                .map(|l| {
                    let v = layout.var(l.atom).expect("atom validated on insertion");
                    lit_of(v, l.positive)
                })
                .collect();
            for &l in &lits {
                score[l as usize] += w;
            }
            if lits.len() == 1 {
                units.push(lits[0]);
            } else {
                clauses.push(lits);
            }
        }

        let mut vars: Vec<usize> = (0..num_vars).collect();
        vars.sort_by(|&a, &b| {
            let sa = score[2 * a] + score[2 * a + 1];
            let sb = score[2 * b] + score[2 * b + 1];
            sb.partial_cmp(&sa).unwrap().then(a.cmp(&b))
        });
        let order = vars
            .into_iter()
            .map(|v| lit_of(v, score[2 * v] >= score[2 * v + 1]))
            .collect();

        let mut watches = vec![Vec::new(); 2 * num_vars];
        for (ci, c) in clauses.iter().enumerate() {
            watches[c[0] as usize].push(ci as u32);
            watches[c[1] as usize].push(ci as u32);
        }

        let mut solver = Self {
            layout,
            atoms: Arc::new(atoms),
            clauses,
            watches,
            assign: vec![0; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            order,
            root_conflict: false,
            budget: cfg.node_budget,
        };
        for u in units {
            match solver.value(u) {
                1 => {}
                -1 => solver.root_conflict = true,
                _ => solver.enqueue(u),
            }
        }
        if !solver.root_conflict && solver.propagate() {
            solver.root_conflict = true;
        }
        solver
    }

    pub fn num_vars(&self) -> usize {
        self.layout.num_vars
    }

    /// Root-level value of `atom` after unit propagation, if forced.
    pub fn root_value(&self, atom: Atom) -> Option<bool> {
        if self.root_conflict {
            return None;
        }
        let v = self.layout.var(atom)?;
        match self.assign[v] {
            1 => Some(true),
            -1 => Some(false),
            _ => None,
        }
    }

    pub fn is_root_conflict(&self) -> bool {
        self.root_conflict
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        let a = self.assign[(l >> 1) as usize];
        if l & 1 == 1 {
            -a
        } else {
            a
        }
    }

    #[inline]
    fn enqueue(&mut self, l: Lit) {
        self.assign[(l >> 1) as usize] = if l & 1 == 1 { -1 } else { 1 };
        self.trail.push(l);
    }

    /// Returns true on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut kept = 0;
            let mut conflict = false;
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                if conflict {
                    ws[kept] = ci;
                    kept += 1;
                    continue;
                }
                let clause = &mut self.clauses[ci as usize];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                let first_val = {
                    let a = self.assign[(first >> 1) as usize];
                    if first & 1 == 1 {
                        -a
                    } else {
                        a
                    }
                };
                if first_val == 1 {
                    ws[kept] = ci;
                    kept += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let a = self.assign[(l >> 1) as usize];
                    let v = if l & 1 == 1 { -a } else { a };
                    if v != -1 {
                        clause.swap(1, k);
                        self.watches[clause[1] as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[kept] = ci;
                kept += 1;
                if first_val == -1 {
                    conflict = true;
                } else {
                    self.enqueue(first);
                }
            }
            ws.truncate(kept);
            self.watches[false_lit as usize] = ws;
            if conflict {
                self.qhead = self.trail.len();
                return true;
            }
        }
        false
    }

    fn new_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn undo_to(&mut self, level: usize) {
        if self.trail_lim.len() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for &l in &self.trail[start..] {
            self.assign[(l >> 1) as usize] = 0;
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = self.trail.len();
    }

    fn pick(&self) -> Option<Lit> {
        self.order
            .iter()
            .copied()
            .find(|&l| self.assign[(l >> 1) as usize] == 0)
    }

    fn model(&self) -> Assignment {
        Assignment {
            layout_n: self.layout.n,
            atoms: Arc::clone(&self.atoms),
            values: self.assign.iter().map(|&a| a == 1).collect(),
        }
    }

    fn literal(&self, lit: Literal) -> Result<Lit, ConstraintError> {
        let v = self
            .layout
            .var(lit.atom)
            .ok_or(ConstraintError::InvalidAtom(lit.atom))?;
        Ok(lit_of(v, lit.positive))
    }

    /// Searches for an assignment extending `assumptions`.
    pub fn solve(&mut self, assumptions: &[Literal]) -> Result<SatResult, ConstraintError> {
        self.undo_to(0);
        if self.root_conflict {
            return Ok(SatResult::Unsat);
        }
        let assumed: Vec<Lit> = assumptions
            .iter()
            .map(|&l| self.literal(l))
            .collect::<Result<_, _>>()?;
        for l in assumed {
            match self.value(l) {
                1 => continue,
                -1 => {
                    self.undo_to(0);
                    return Ok(SatResult::Unsat);
                }
                _ => {
                    self.new_level();
                    self.enqueue(l);
                    if self.propagate() {
                        self.undo_to(0);
                        return Ok(SatResult::Unsat);
                    }
                }
            }
        }
        let base = self.trail_lim.len();
        let mut decisions: Vec<(Lit, Decision)> = Vec::new();
        let mut nodes: u64 = 0;
        loop {
            let Some(lit) = self.pick() else {
                let model = self.model();
                self.undo_to(0);
                return Ok(SatResult::Sat(model));
            };
            nodes += 1;
            if nodes > self.budget {
                self.undo_to(0);
                return Err(ConstraintError::BudgetExceeded {
                    budget: self.budget,
                });
            }
            self.new_level();
            decisions.push((lit, Decision::First));
            self.enqueue(lit);
            while self.propagate() {
                nodes += 1;
                if nodes > self.budget {
                    self.undo_to(0);
                    return Err(ConstraintError::BudgetExceeded {
                        budget: self.budget,
                    });
                }
                loop {
                    let Some((l, kind)) = decisions.pop() else {
                        self.undo_to(0);
                        return Ok(SatResult::Unsat);
                    };
                    self.undo_to(base + decisions.len());
                    if kind == Decision::First {
                        self.new_level();
                        decisions.push((l ^ 1, Decision::Flipped));
                        self.enqueue(l ^ 1);
                        break;
                    }
                }
            }
        }
    }

    /// True when `atom` holds in every model.
    pub fn entails(&mut self, atom: Atom) -> Result<bool, ConstraintError> {
        Ok(!self.solve(&[atom.negative()])?.is_sat())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintSystem;

    fn order_sys(n: usize, units: &[(usize, usize)]) -> ConstraintSystem {
        let mut sys = ConstraintSystem::with_order(n);
        for &(x, y) in units {
            sys.push_clause([Atom::Order(x, y).pos()]).unwrap();
        }
        sys
    }

    #[test]
    fn order_cycle_is_unsat() {
        let sys = order_sys(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(
            satisfiable(&sys, &SolverConfig::default()).unwrap(),
            SatResult::Unsat
        );
    }

    #[test]
    fn single_pair_extends_to_linear_order() {
        let sys = order_sys(3, &[(0, 1)]);
        let res = satisfiable(&sys, &SolverConfig::default()).unwrap();
        let order = res.witness().unwrap().order_relation();
        assert!(order.is_linear_order());
        assert!(order.contains(0, 1));
    }

    #[test]
    fn unconstrained_order_entails_nothing() {
        let sys = ConstraintSystem::with_order(2);
        assert!(!entails(&sys, Atom::Order(0, 1), &SolverConfig::default()).unwrap());
        assert!(!entails(&sys, Atom::Order(1, 0), &SolverConfig::default()).unwrap());
    }

    #[test]
    fn forced_pair_then_reverse_is_unsat() {
        let sys = ConstraintSystem::with_order(2)
            .add_clause([Atom::Order(0, 1).pos()])
            .unwrap();
        assert!(satisfiable(&sys, &SolverConfig::default())
            .unwrap()
            .is_sat());
        let both = sys.add_clause([Atom::Order(1, 0).pos()]).unwrap();
        assert!(!satisfiable(&both, &SolverConfig::default())
            .unwrap()
            .is_sat());
    }

    #[test]
    fn budget_is_enforced() {
        // 6 alternatives with a forced cycle hidden behind wide disjunctions
        let mut sys = ConstraintSystem::with_order(6);
        sys.push_clause([Atom::Order(0, 1).pos(), Atom::Order(0, 2).pos()])
            .unwrap();
        sys.push_clause([Atom::Order(1, 0).pos()]).unwrap();
        sys.push_clause([Atom::Order(2, 0).pos()]).unwrap();
        let cfg = SolverConfig { node_budget: 0 };
        // root propagation alone refutes this one
        assert_eq!(satisfiable(&sys, &cfg).unwrap(), SatResult::Unsat);
        let open = ConstraintSystem::with_order(6);
        assert!(matches!(
            satisfiable(&open, &SolverConfig { node_budget: 0 }),
            Err(ConstraintError::BudgetExceeded { budget: 0 })
        ));
    }

    #[test]
    fn assignments_expose_atoms() {
        let mut sys = ConstraintSystem::with_order(2);
        sys.declare_stage1(false, false);
        sys.push_clause([Atom::Stage1(1, 0).pos()]).unwrap();
        let res = satisfiable(&sys, &SolverConfig::default()).unwrap();
        let a = res.witness().unwrap();
        assert_eq!(a.value(Atom::Stage1(1, 0)), Some(true));
        assert_eq!(a.value(Atom::Stage1(0, 1)), Some(false));
        assert_eq!(a.value(Atom::Rank(0, 1)), None);
        assert!(a.stage1_relation().contains(1, 0));
    }
}
