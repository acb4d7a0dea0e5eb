//! Small named datasets on three alternatives used throughout the docs and
//! tests. Ids: `x = a = 0`, `y = b = 1`, `z = c = 2`.

use crate::data::{ChoiceDataset, Menu};

pub const X: usize = 0;
pub const Y: usize = 1;
pub const Z: usize = 2;
pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;

fn build(obs: &[(&[usize], usize)]) -> ChoiceDataset {
    ChoiceDataset::from_choices(
        3,
        obs.iter()
            .map(|(m, c)| (Menu::from_ids(m.iter().copied()), *c)),
    )
    .expect("fixture is valid")
}

/// `{ab -> a, ac -> a, bc -> b, abc -> a}`: rationalized by `a > b > c`.
pub fn d_rat() -> ChoiceDataset {
    build(&[(&[A, B], A), (&[A, C], A), (&[B, C], B), (&[A, B, C], A)])
}

/// `{xy -> y, xyz -> x}`: a single WARP violation.
pub fn d_warp() -> ChoiceDataset {
    build(&[(&[X, Y], Y), (&[X, Y, Z], X)])
}

/// `{xy -> x, yz -> y, xz -> z}`: a three-cycle with no WARP violation.
pub fn d_sarp() -> ChoiceDataset {
    build(&[(&[X, Y], X), (&[Y, Z], Y), (&[X, Z], Z)])
}

/// `{xyz -> x, yz -> y}`: indirect revelation through or-logic.
pub fn d_stc() -> ChoiceDataset {
    build(&[(&[X, Y, Z], X), (&[Y, Z], Y)])
}
