use proptest::prelude::*;
use revpref_core::constraints::{
    entails, satisfiable, Atom, Clause, ConstraintSystem, Literal, SatResult, SolverConfig,
};
use revpref_core::data::Menu;
use revpref_core::relation::Relation;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// Order atoms on three alternatives (with their axioms) when `with_order`,
/// plus `free` unconstrained consider atoms.
fn base_system(with_order: bool, free: usize) -> ConstraintSystem {
    let mut sys = if with_order {
        ConstraintSystem::with_order(3)
    } else {
        ConstraintSystem::new(3)
    };
    sys.declare_consider_menu(Menu::full(free));
    sys
}

fn holds(clause: &Clause, value: &dyn Fn(Atom) -> bool) -> bool {
    clause
        .literals()
        .iter()
        .any(|l| value(l.atom) == l.positive)
}

fn brute_force_sat(sys: &ConstraintSystem) -> bool {
    let atoms = sys.atoms();
    let clauses: Vec<Clause> = sys
        .axiom_clauses()
        .into_iter()
        .chain(sys.clauses().iter().cloned())
        .collect();
    (0u64..1 << atoms.len()).any(|bits| {
        let value = |a: Atom| bits >> atoms.iter().position(|&b| b == a).unwrap() & 1 == 1;
        clauses.iter().all(|c| holds(c, &value))
    })
}

fn clause_strategy() -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0usize..64, any::<bool>()), 1..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn agrees_with_truth_table(
        with_order in any::<bool>(),
        free in 1usize..=14,
        raw in prop::collection::vec(clause_strategy(), 0..40),
    ) {
        let mut sys = base_system(with_order, free);
        let atoms = sys.atoms();
        prop_assume!(atoms.len() <= 20);
        for clause in raw {
            let lits: Vec<Literal> = clause
                .into_iter()
                .map(|(i, pos)| Literal::new(atoms[i % atoms.len()], pos))
                .collect();
            sys.push_clause(lits).unwrap();
        }
        let res = satisfiable(&sys, &cfg()).unwrap();
        prop_assert_eq!(res.is_sat(), brute_force_sat(&sys));
        if let SatResult::Sat(w) = res {
            let value = |a: Atom| w.value(a).unwrap();
            for c in sys.axiom_clauses().iter().chain(sys.clauses()) {
                prop_assert!(holds(c, &value));
            }
        }
    }

    #[test]
    fn positive_units_match_acyclicity_and_closure(
        n in 2usize..=5,
        raw in prop::collection::vec((0usize..5, 0usize..5), 0..8),
    ) {
        let pairs: Vec<(usize, usize)> = raw
            .into_iter()
            .map(|(x, y)| (x % n, y % n))
            .filter(|(x, y)| x != y)
            .collect();
        let mut sys = ConstraintSystem::with_order(n);
        for &(x, y) in &pairs {
            sys.push_clause([Atom::Order(x, y).pos()]).unwrap();
        }
        let rel = Relation::from_pairs(n, pairs.iter().copied());
        let sat = satisfiable(&sys, &cfg()).unwrap().is_sat();
        prop_assert_eq!(sat, !rel.has_cycle());
        if sat {
            let closure = rel.transitive_closure();
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        let e = entails(&sys, Atom::Order(x, y), &cfg()).unwrap();
                        prop_assert_eq!(e, closure.contains(x, y), "({}, {})", x, y);
                    }
                }
            }
        }
    }

    #[test]
    fn entailment_is_monotone(
        first in prop::collection::vec((0usize..4, 0usize..4), 1..4),
        extra in prop::collection::vec(prop::collection::vec((0usize..4, 0usize..4), 1..3), 0..4),
    ) {
        let n = 4;
        let to_clause = |pairs: &[(usize, usize)]| -> Vec<Literal> {
            pairs.iter().filter(|(x, y)| x != y).map(|&(x, y)| Atom::Order(x, y).pos()).collect()
        };
        let mut sys = ConstraintSystem::with_order(n);
        let c = to_clause(&first);
        prop_assume!(!c.is_empty());
        sys.push_clause(c).unwrap();
        prop_assume!(satisfiable(&sys, &cfg()).unwrap().is_sat());
        let mut bigger = sys.clone();
        for e in &extra {
            let c = to_clause(e);
            if !c.is_empty() {
                bigger.push_clause(c).unwrap();
            }
        }
        prop_assume!(satisfiable(&bigger, &cfg()).unwrap().is_sat());
        for x in 0..n {
            for y in 0..n {
                if x != y && entails(&sys, Atom::Order(x, y), &cfg()).unwrap() {
                    prop_assert!(entails(&bigger, Atom::Order(x, y), &cfg()).unwrap());
                }
            }
        }
    }

    #[test]
    fn solving_is_deterministic(
        free in 1usize..=10,
        raw in prop::collection::vec(clause_strategy(), 0..20),
    ) {
        let mut sys = base_system(true, free);
        let atoms = sys.atoms();
        for clause in raw {
            let lits: Vec<Literal> = clause
                .into_iter()
                .map(|(i, pos)| Literal::new(atoms[i % atoms.len()], pos))
                .collect();
            sys.push_clause(lits).unwrap();
        }
        let a = satisfiable(&sys, &cfg()).unwrap();
        let b = satisfiable(&sys.clone(), &cfg()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn spec_solver_examples() {
    let cyc = ConstraintSystem::with_order(3)
        .add_clause([Atom::Order(0, 1).pos()])
        .and_then(|s| s.add_clause([Atom::Order(1, 2).pos()]))
        .and_then(|s| s.add_clause([Atom::Order(2, 0).pos()]))
        .unwrap();
    assert!(!satisfiable(&cyc, &cfg()).unwrap().is_sat());
    // or-logic: {xyz -> x, yz -> y} under a floor of two
    let stc = ConstraintSystem::with_order(3)
        .add_clause([Atom::Order(0, 1).pos(), Atom::Order(0, 2).pos()])
        .and_then(|s| s.add_clause([Atom::Order(1, 2).pos()]))
        .unwrap();
    assert!(entails(&stc, Atom::Order(0, 2), &cfg()).unwrap());
    assert!(!entails(&stc, Atom::Order(0, 1), &cfg()).unwrap());
}
