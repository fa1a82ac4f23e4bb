//! Counting and solubility for ternary linear and diagonal quadratic forms,
//! the congruence counter `rho` and the character sums.

mod characters;
mod conic;
mod lattice;
mod linear;
mod quadratic;

pub use characters::{char_sum, double_char_sum, rho_check, CharSum, DoubleCharSum, RhoCheck};
pub use conic::{
    box_search, conic_solvable, find_conic_point, holzer_search, normalize, ConicCoefficients, ConicPoint, NormalForm,
};
pub use lattice::{delta_exponent, sublattice_cover, Basis, CoverReport};
pub use linear::{count_linear, linear_bound, LinearInstance};
pub use quadratic::{count_diag_quad, d_gh, diag_quad_shape, DiagQuadInstance};

use num_rational::Ratio;

/// Integer part of a positive box bound.
pub(crate) fn box_int(w: Ratio<i64>) -> i64 {
    w.floor().to_integer()
}

pub(crate) fn ratio_f64(w: Ratio<i64>) -> f64 {
    *w.numer() as f64 / *w.denom() as f64
}

/// Values `0, 1, -1, 2, -2, ...` up to `bound` in absolute value.
pub(crate) fn centered(bound: i64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=bound).flat_map(|v| [v, -v]))
}
