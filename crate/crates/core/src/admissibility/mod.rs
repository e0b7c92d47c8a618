//! Sign-pattern criteria that certify the homology of a cubical
//! approximation.
//!
//! In 1D a grid interval is admissible when none of its dyadic subintervals
//! carries a double crossover. In 2D, squares touching the domain boundary
//! must avoid the `B` library on every dyadic subsquare, and interior squares
//! must avoid `I4` and `I5` on every dyadic subsquare and on its four
//! half-side shifts. Dyadic recursion is truncated at a depth `D`, so
//! `Certified` means "no violation down to level `D`".

mod patterns;
mod validate;

pub use patterns::{
    dihedral_perms, forbidden_in_stencil, load_patterns, parse_patterns, stencil_mask, Degenerate,
    Lib, PatternId, PatternLibrary, PatternSet, SignPattern, Survivors, B_SURVIVORS, I4_SURVIVORS,
    I_SURVIVORS,
};
pub use validate::{
    b_admissible, i4_admissible, i5_admissible, i_admissible, interval_admissible, validate_1d,
    validate_2d, Shift, Status, ValidationOutcome, Validator, Violation, DEFAULT_DEPTH,
};

/// `sigma * (left, mid, right)` is `(>= 0, <= 0, >= 0)` for `sigma = 1` or
/// `sigma = -1`.
pub fn double_crossover(v_left: f64, v_mid: f64, v_right: f64) -> bool {
    [1.0, -1.0]
        .iter()
        .any(|s| s * v_left >= 0.0 && s * v_mid <= 0.0 && s * v_right >= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_crossover_examples() {
        assert!(double_crossover(1.0, -1.0, 1.0));
        assert!(!double_crossover(1.0, 1.0, 1.0));
        assert!(double_crossover(-0.2, 0.5, -0.3));
        assert!(double_crossover(0.0, 0.0, 0.0));
        assert!(!double_crossover(1.0, -1.0, -1.0));
    }
}
