//! Window-based analysis of symbolic functions on amenable groups.

pub mod analysis;
pub mod error;
pub mod folner;
pub mod generators;
pub mod group;
pub mod instances;
mod scan;
pub mod tilings;
pub mod symbolic;

pub use analysis::{
    block_complexity, block_normality, classical_normality_along, counting_census,
    entropy_of_counts, eps_complexity, eps_complexity_over, fmt_sig12, orbit_normality,
    preservation_experiment, rate_profile, shannon_entropy, simple_normality, tile_entropy,
    ComplexityProfile, EpsComplexity, NormalityMode, NormalityReport, NormalityTest,
    PreservationBundle, ProfileRow, CENSUS_ENTROPY_GUARD, RATE_LOWER_BOUND_NOTE,
};
pub use error::{Error, Result};
pub use folner::{
    density, int_intervals, invariance_defect, k_core, nat_factorial_intervals, nat_intervals,
    natmul_boxes, perm_symmetric, ratio, vec_cubes, DensityMode, FolnerFlags, FolnerSequence,
    Rational,
};
pub use generators::{
    balanced3_int, balanced3_vec2, bfree_indicator, bind_automaton_int, bind_automaton_vec2,
    bind_word_automaton, constant, digit_reassemble, digit_representation, digit_system_int,
    digit_system_vec2, gp_indicator_nat, gp_indicator_vec, indicator_symbolic,
    lattice_kfree_indicator, mult_automatic, mult_thue_morse, parse_automaton,
    parse_digit_system, perm_center_decompose, perm_incr_indicator, phi, prng_uniform,
    residue_indicator, sqrt2_convergent, sqrt2_halfline_indicator, squarefree_indicator,
    thue_morse_int, thue_morse_nat, vh_automatic, Automaton, AutomatonSpec, DigitSystem,
    DigitSystemSpec, GeneralizedPolynomial, RationalBoxes,
};
pub use group::{FinPerm, FiniteSet, GroupContext, IntAdd, NatAdd, NatMul, Perm, SubsetPredicate, VecAdd};
pub use tilings::{
    cube_tiling, interval_tiling, perm_monotiling, saturation, NestedTilingFamily, Shape,
    ValidationReport, WindowTiling,
};
pub use symbolic::{
    concat, dist, empirical_measure, equal_mod_shift, export_stream, frequency, occurs_at, shift,
    Alphabet, Block, CachedSymbolic, DistCatalog, EmpiricalMeasure, FnSymbolic, MeasureSource,
    Symbolic, SymbolicFunction,
};
