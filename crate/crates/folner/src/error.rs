//! Error type shared across the crate.

use std::fmt;

/// Errors reported by window, symbolic, tiling, and analysis operations.
///
/// Every fallible operation in this crate returns [`Result`]; panics are
/// reserved for violated internal invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A window, anchor set, catalog, or alphabet that must be nonempty was empty.
    Empty(&'static str),
    /// An input failed a documented precondition (message explains which).
    Invalid(String),
    /// Two inputs that must agree (domains, alphabets, window/block extents) do not.
    Mismatch(String),
    /// Tiles overlap, or blocks being concatenated share domain points.
    Overlap(String),
    /// A set escapes the window it must be contained in.
    EscapesWindow(String),
    /// An iterative process exceeded its hard cap without terminating.
    IterationCap(String),
    /// The request would materialize more state than this crate is willing to hold.
    TooLarge(String),
    /// A structured text input (automaton, digit system, config) failed to parse.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Empty(what) => write!(f, "{what} must be nonempty"),
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::Mismatch(msg) => write!(f, "mismatched inputs: {msg}"),
            Error::Overlap(msg) => write!(f, "overlap: {msg}"),
            Error::EscapesWindow(msg) => write!(f, "escapes window: {msg}"),
            Error::IterationCap(msg) => write!(f, "iteration cap exceeded: {msg}"),
            Error::TooLarge(msg) => write!(f, "request too large: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
