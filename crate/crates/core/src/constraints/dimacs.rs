use std::fmt::Write;

use super::ConstraintSystem;

/// Renders the compiled system (axioms and data clauses) in DIMACS CNF.
///
/// Variables are numbered from 1 in [`ConstraintSystem::atoms`] order and
/// listed in `c` comment lines before the header.
pub fn to_dimacs(sys: &ConstraintSystem) -> String {
    let atoms = sys.atoms();
    let index: std::collections::HashMap<_, _> =
        atoms.iter().enumerate().map(|(i, a)| (*a, i + 1)).collect();
    let axioms = sys.axiom_clauses();
    let mut out = String::new();
    for (i, a) in atoms.iter().enumerate() {
        let _ = writeln!(out, "c {} {}", i + 1, a);
    }
    let _ = writeln!(
        out,
        "p cnf {} {}",
        atoms.len(),
        axioms.len() + sys.clauses().len()
    );
    for clause in axioms.iter().chain(sys.clauses()) {
        for lit in clause.literals() {
            let v = index[&lit.atom] as i64;
            let _ = write!(out, "{} ", if lit.positive { v } else { -v });
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Atom;

    #[test]
    fn two_alternatives() {
        let sys = ConstraintSystem::with_order(2)
            .add_clause([Atom::Order(1, 0).pos()])
            .unwrap();
        let text = to_dimacs(&sys);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "c 1 order(0,1)");
        assert_eq!(lines[1], "c 2 order(1,0)");
        assert_eq!(lines[2], "p cnf 2 3");
        assert_eq!(lines[3], "1 2 0");
        assert_eq!(lines[4], "-1 -2 0");
        assert_eq!(lines[5], "2 0");
    }
}
