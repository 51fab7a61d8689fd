//! Shipped digit-system and automaton descriptions in the declarative text
//! format (see [`crate::generators::parse_digit_system`] and
//! [`crate::generators::parse_automaton`]). The same files live under
//! `instances/` in the crate source tree and can be loaded at runtime.

/// Balanced base-3 digit system on ℤ.
pub const BALANCED3_Z: &str = include_str!("../instances/balanced3-z.ds");

/// Coordinatewise balanced base-3 digit system on ℤ².
pub const BALANCED3_Z2: &str = include_str!("../instances/balanced3-z2.ds");

/// Two-state parity automaton over the balanced base-3 digits of ℤ.
pub const DIGIT_PARITY: &str = include_str!("../instances/digit-parity.aut");

/// Two-state parity automaton over the balanced base-3 digits of ℤ².
pub const DIGIT_PARITY_2D: &str = include_str!("../instances/digit-parity-2d.aut");

/// Parity-of-ones automaton over binary words (for multiplicative automatic
/// sequences in base 2).
pub const MULT_BINARY_PARITY: &str = include_str!("../instances/mult-binary-parity.aut");
