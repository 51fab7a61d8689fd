//! Group carriers, finite sets over them, and subset predicates.
//!
//! Everything downstream (windows, symbolic functions, tilings, analysis) is
//! generic over a [`GroupContext`]: a countable cancellative semigroup with a
//! canonical injective byte encoding and a canonical enumeration. The shipped
//! instances are the additive integers [`IntAdd`], the additive naturals
//! [`NatAdd`] (a semigroup, not a group), integer vectors [`VecAdd`], the
//! positive naturals under multiplication [`NatMul`], and the finitary
//! permutations [`FinPerm`].
//!
//! Multiplication is written left-to-right: `multiply(a, b)` is the word `ab`,
//! and for permutations `ab` means "apply `a` first, then `b`".

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

/// A countable cancellative semigroup with canonical encoding and enumeration.
///
/// Implementations are cheap handles (cloneable, shareable across threads);
/// any interior caches are behind locks.
///
/// # Contract
///
/// * `multiply` is associative and cancellative on both sides.
/// * `encode` is injective, and its lexicographic byte order coincides with
///   the `Ord` order of `Elem` (so sets sorted by `Elem` are sorted by
///   canonical encoding).
/// * `enumerate` is a bijection from `0..` onto the carrier.
/// * `invert` returns `Some` exactly when the instance is a group.
pub trait GroupContext: Clone + Send + Sync + 'static {
    /// Carrier element. `Ord` must agree with the lexicographic order of
    /// [`GroupContext::encode`].
    type Elem: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static;

    /// Neutral element.
    fn identity(&self) -> Self::Elem;

    /// The word `ab` (for permutations: apply `a` first, then `b`).
    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Inverse, when the instance is a group; `None` in proper semigroups.
    fn invert(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// Injective, order-preserving byte encoding.
    fn encode(&self, a: &Self::Elem) -> Vec<u8>;

    /// Canonical enumeration: a bijection from `0..` onto the carrier.
    ///
    /// # Panics
    ///
    /// May panic when the index exceeds what the instance is willing to
    /// materialize (documented per instance).
    fn enumerate(&self, index: u64) -> Self::Elem;

    /// Short human-readable name of the instance.
    fn name(&self) -> String;

    /// Render an element for reports.
    fn show(&self, a: &Self::Elem) -> String {
        format!("{a:?}")
    }

    /// Solve `r · c = d` for `r`, if the solution exists in the carrier.
    fn divide_right(&self, d: &Self::Elem, c: &Self::Elem) -> Option<Self::Elem> {
        // In a group: r = d c⁻¹.
        let c_inv = self.invert(c)?;
        Some(self.multiply(d, &c_inv))
    }

    /// Solve `c · y = d` for `y`, if the solution exists in the carrier.
    fn divide_left(&self, c: &Self::Elem, d: &Self::Elem) -> Option<Self::Elem> {
        // In a group: y = c⁻¹ d.
        let c_inv = self.invert(c)?;
        Some(self.multiply(&c_inv, d))
    }

    /// Dense integer coordinate of an element, for instances whose carrier
    /// embeds order-isomorphically into `i64` (the two interval carriers).
    /// Enables O(1) window scans; `None` elsewhere.
    fn to_index(&self, _a: &Self::Elem) -> Option<i64> {
        None
    }

    /// Inverse of [`GroupContext::to_index`]; `None` when the integer is not
    /// a carrier coordinate.
    fn from_index(&self, _i: i64) -> Option<Self::Elem> {
        None
    }
}

// ---------------------------------------------------------------------------
// (ℤ, +)
// ---------------------------------------------------------------------------

/// The additive integers. Enumeration order: 0, 1, −1, 2, −2, …
#[derive(Clone, Copy, Debug, Default)]
pub struct IntAdd;

impl GroupContext for IntAdd {
    type Elem = i64;

    fn identity(&self) -> i64 {
        0
    }

    fn multiply(&self, a: &i64, b: &i64) -> i64 {
        a.checked_add(*b).expect("integer window arithmetic overflowed i64")
    }

    fn invert(&self, a: &i64) -> Option<i64> {
        Some(-a)
    }

    fn encode(&self, a: &i64) -> Vec<u8> {
        // Flipping the sign bit makes unsigned byte order agree with i64 order.
        ((*a as u64) ^ (1u64 << 63)).to_be_bytes().to_vec()
    }

    fn enumerate(&self, index: u64) -> i64 {
        if index == 0 {
            0
        } else {
            let k = index.div_ceil(2) as i64;
            if index % 2 == 1 {
                k
            } else {
                -k
            }
        }
    }

    fn name(&self) -> String {
        "Z".into()
    }

    fn divide_right(&self, d: &i64, c: &i64) -> Option<i64> {
        Some(d - c)
    }

    fn divide_left(&self, c: &i64, d: &i64) -> Option<i64> {
        Some(d - c)
    }

    fn to_index(&self, a: &i64) -> Option<i64> {
        Some(*a)
    }

    fn from_index(&self, i: i64) -> Option<i64> {
        Some(i)
    }
}

// ---------------------------------------------------------------------------
// (ℕ₀, +)
// ---------------------------------------------------------------------------

/// The additive naturals 0, 1, 2, … — a cancellative semigroup, not a group.
#[derive(Clone, Copy, Debug, Default)]
pub struct NatAdd;

impl GroupContext for NatAdd {
    type Elem = u64;

    fn identity(&self) -> u64 {
        0
    }

    fn multiply(&self, a: &u64, b: &u64) -> u64 {
        a.checked_add(*b).expect("natural window arithmetic overflowed u64")
    }

    fn invert(&self, _a: &u64) -> Option<u64> {
        None
    }

    fn encode(&self, a: &u64) -> Vec<u8> {
        a.to_be_bytes().to_vec()
    }

    fn enumerate(&self, index: u64) -> u64 {
        index
    }

    fn name(&self) -> String {
        "N".into()
    }

    fn divide_right(&self, d: &u64, c: &u64) -> Option<u64> {
        d.checked_sub(*c)
    }

    fn divide_left(&self, c: &u64, d: &u64) -> Option<u64> {
        d.checked_sub(*c)
    }

    fn to_index(&self, a: &u64) -> Option<i64> {
        i64::try_from(*a).ok()
    }

    fn from_index(&self, i: i64) -> Option<u64> {
        u64::try_from(i).ok()
    }
}

// ---------------------------------------------------------------------------
// (ℤ^D, +)
// ---------------------------------------------------------------------------

/// Integer vectors under addition. Enumeration walks sup-norm shells
/// outward, each shell in lexicographic coordinate order.
#[derive(Clone, Debug)]
pub struct VecAdd<const D: usize> {
    shell_cache: Arc<Mutex<Option<(i64, Vec<[i64; D]>)>>>,
}

impl<const D: usize> Default for VecAdd<D> {
    fn default() -> Self {
        Self::new()
    }
}

impl<const D: usize> VecAdd<D> {
    pub fn new() -> Self {
        assert!(D >= 1, "dimension must be positive");
        VecAdd { shell_cache: Arc::new(Mutex::new(None)) }
    }

    /// Number of points with sup-norm ≤ r.
    fn ball_size(r: i64) -> u64 {
        (2 * r as u64 + 1).pow(D as u32)
    }

    /// All points with sup-norm exactly `r`, in lexicographic order.
    fn shell(r: i64) -> Vec<[i64; D]> {
        let mut out = Vec::new();
        let mut point = [-r; D];
        loop {
            if point.iter().map(|c| c.abs()).max() == Some(r) {
                out.push(point);
            }
            // Lexicographic successor within [−r, r]^D.
            let mut axis = D;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if point[axis] < r {
                    point[axis] += 1;
                    for c in point.iter_mut().skip(axis + 1) {
                        *c = -r;
                    }
                    break;
                }
            }
        }
    }
}

impl<const D: usize> GroupContext for VecAdd<D> {
    type Elem = [i64; D];

    fn identity(&self) -> [i64; D] {
        [0; D]
    }

    fn multiply(&self, a: &[i64; D], b: &[i64; D]) -> [i64; D] {
        let mut out = [0; D];
        for i in 0..D {
            out[i] = a[i].checked_add(b[i]).expect("vector window arithmetic overflowed i64");
        }
        out
    }

    fn invert(&self, a: &[i64; D]) -> Option<[i64; D]> {
        Some(a.map(|c| -c))
    }

    fn encode(&self, a: &[i64; D]) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * D);
        for c in a {
            out.extend_from_slice(&((*c as u64) ^ (1u64 << 63)).to_be_bytes());
        }
        out
    }

    fn enumerate(&self, index: u64) -> [i64; D] {
        let mut r = 0;
        while Self::ball_size(r) <= index {
            r += 1;
        }
        let offset = if r == 0 { index } else { index - Self::ball_size(r - 1) };
        let mut cache = self.shell_cache.lock().expect("shell cache poisoned");
        match cache.as_ref() {
            Some((cached_r, shell)) if *cached_r == r => shell[offset as usize],
            _ => {
                let shell = Self::shell(r);
                let elem = shell[offset as usize];
                *cache = Some((r, shell));
                elem
            }
        }
    }

    fn name(&self) -> String {
        format!("Z^{D}")
    }

    fn divide_right(&self, d: &[i64; D], c: &[i64; D]) -> Option<[i64; D]> {
        let mut out = [0; D];
        for i in 0..D {
            out[i] = d[i] - c[i];
        }
        Some(out)
    }

    fn divide_left(&self, c: &[i64; D], d: &[i64; D]) -> Option<[i64; D]> {
        self.divide_right(d, c)
    }
}

// ---------------------------------------------------------------------------
// (ℕ≥1, ×)
// ---------------------------------------------------------------------------

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

/// The multiplicative positive naturals 1, 2, 3, … — a cancellative
/// semigroup. Enumeration order: 1, 2, 3, …
#[derive(Clone, Copy, Debug, Default)]
pub struct NatMul;

impl GroupContext for NatMul {
    type Elem = BigUint;

    fn identity(&self) -> BigUint {
        BigUint::one()
    }

    fn multiply(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b
    }

    fn invert(&self, _a: &BigUint) -> Option<BigUint> {
        None
    }

    fn encode(&self, a: &BigUint) -> Vec<u8> {
        // Length-prefixed big-endian magnitude: byte order agrees with value
        // order because longer magnitudes are strictly larger.
        let bytes = a.to_bytes_be();
        let len = u16::try_from(bytes.len()).expect("multiplicative element exceeds 65535 bytes");
        let mut out = Vec::with_capacity(2 + bytes.len());
        out.extend_from_slice(&len.to_be_bytes());
        out.extend_from_slice(&bytes);
        out
    }

    fn enumerate(&self, index: u64) -> BigUint {
        BigUint::from(index + 1)
    }

    fn name(&self) -> String {
        "Nmul".into()
    }

    fn divide_right(&self, d: &BigUint, c: &BigUint) -> Option<BigUint> {
        if c.is_zero() {
            return None;
        }
        let (q, r) = d.div_rem(c);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    fn divide_left(&self, c: &BigUint, d: &BigUint) -> Option<BigUint> {
        self.divide_right(d, c)
    }
}

// ---------------------------------------------------------------------------
// Finitary permutations
// ---------------------------------------------------------------------------

/// A finitary permutation of {1, 2, 3, …} in minimal one-line form.
///
/// `map[i]` is the image of `i + 1`; positions beyond the stored length are
/// fixed. The stored form is minimal: the last entry (if any) is not a fixed
/// point, which makes the representation — and hence [`GroupContext::encode`]
/// — unique per permutation. The identity is the empty map.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm {
    map: Vec<u8>,
}

impl Perm {
    /// Build from a one-line image list on `1..=len` (1-indexed images).
    pub fn new(one_line: Vec<u8>) -> Result<Perm> {
        let n = one_line.len();
        if n > 0 {
            let mut seen = vec![false; n];
            for &img in &one_line {
                let ok = (1..=n as u8).contains(&img) && !seen[(img - 1) as usize];
                if !ok {
                    return Err(Error::Invalid(format!(
                        "{one_line:?} is not a one-line permutation of 1..={n}"
                    )));
                }
                seen[(img - 1) as usize] = true;
            }
        }
        Ok(Perm::trimmed(one_line))
    }

    /// Identity permutation.
    pub fn id() -> Perm {
        Perm { map: Vec::new() }
    }

    fn trimmed(mut map: Vec<u8>) -> Perm {
        while let Some(&last) = map.last() {
            if last as usize == map.len() {
                map.pop();
            } else {
                break;
            }
        }
        Perm { map }
    }

    /// Image of the 1-indexed point `i`.
    pub fn apply(&self, i: u8) -> u8 {
        match self.map.get(i as usize - 1) {
            Some(&img) => img,
            None => i,
        }
    }

    /// Number of leading points the stored form covers (0 for the identity).
    pub fn degree(&self) -> u8 {
        self.map.len() as u8
    }

    /// The stored one-line images.
    pub fn one_line(&self) -> &[u8] {
        &self.map
    }
}

impl Perm {
    fn fmt_one_line(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, img) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{img}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_one_line(f)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_one_line(f)
    }
}

/// The group of finitary permutations of {1, 2, 3, …}.
///
/// Composition is left-to-right: `multiply(g, h)` applies `g` first.
/// Enumeration lists the identity, then for k = 2, 3, … the permutations
/// moving the point k (i.e. Sym(k) minus Sym(k−1)) in lexicographic one-line
/// order. Enumeration materializes shells lazily and refuses indices beyond
/// Sym(9) (362 880 elements) to bound memory.
#[derive(Clone, Debug)]
pub struct FinPerm {
    shells: Arc<Mutex<Vec<Vec<Perm>>>>,
}

impl Default for FinPerm {
    fn default() -> Self {
        Self::new()
    }
}

impl FinPerm {
    pub fn new() -> FinPerm {
        FinPerm { shells: Arc::new(Mutex::new(Vec::new())) }
    }

    /// All permutations of `1..=k` in lexicographic one-line order.
    pub(crate) fn sym_lex(k: u8) -> Vec<Vec<u8>> {
        let mut line: Vec<u8> = (1..=k).collect();
        let mut out = Vec::new();
        loop {
            out.push(line.clone());
            if !next_permutation(&mut line) {
                return out;
            }
        }
    }

    /// Permutations in Sym(k) but not Sym(k−1), lexicographic, minimal form.
    fn shell(k: u8) -> Vec<Perm> {
        FinPerm::sym_lex(k)
            .into_iter()
            .filter(|line| line[k as usize - 1] != k)
            .map(Perm::trimmed)
            .collect()
    }
}

/// In-place lexicographic successor; false once the sequence is descending.
fn next_permutation(line: &mut [u8]) -> bool {
    if line.len() < 2 {
        return false;
    }
    let mut i = line.len() - 1;
    while i > 0 && line[i - 1] >= line[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = line.len() - 1;
    while line[j] <= line[i - 1] {
        j -= 1;
    }
    line.swap(i - 1, j);
    line[i..].reverse();
    true
}

const MAX_ENUM_DEGREE: u8 = 9;

impl GroupContext for FinPerm {
    type Elem = Perm;

    fn identity(&self) -> Perm {
        Perm::id()
    }

    fn multiply(&self, a: &Perm, b: &Perm) -> Perm {
        let deg = a.degree().max(b.degree());
        Perm::trimmed((1..=deg).map(|i| b.apply(a.apply(i))).collect())
    }

    fn invert(&self, a: &Perm) -> Option<Perm> {
        let deg = a.degree();
        let mut map = vec![0u8; deg as usize];
        for i in 1..=deg {
            map[a.apply(i) as usize - 1] = i;
        }
        Some(Perm::trimmed(map))
    }

    fn encode(&self, a: &Perm) -> Vec<u8> {
        a.map.clone()
    }

    fn enumerate(&self, index: u64) -> Perm {
        if index == 0 {
            return Perm::id();
        }
        // Cumulative count through Sym(k) is k!.
        let mut k: u8 = 2;
        let mut factorial: u64 = 2;
        while factorial <= index {
            k += 1;
            assert!(
                k <= MAX_ENUM_DEGREE,
                "permutation enumeration beyond Sym({MAX_ENUM_DEGREE}) is not materialized"
            );
            factorial *= k as u64;
        }
        let offset = index - factorial / k as u64;
        let mut shells = self.shells.lock().expect("shell cache poisoned");
        while shells.len() < (k - 1) as usize {
            let next_k = shells.len() as u8 + 2;
            shells.push(FinPerm::shell(next_k));
        }
        shells[(k - 2) as usize][offset as usize].clone()
    }

    fn name(&self) -> String {
        "Perm".into()
    }

    fn show(&self, a: &Perm) -> String {
        a.to_string()
    }
}

// ---------------------------------------------------------------------------
// Finite sets
// ---------------------------------------------------------------------------

/// A finite set of carrier elements with canonical (encoding-order) iteration
/// and O(1) membership. Construction deduplicates.
#[derive(Clone)]
pub struct FiniteSet<E: Clone + Eq + Ord + Hash> {
    elems: Vec<E>,
    index: HashSet<E>,
}

impl<E: Clone + Eq + Ord + Hash> FiniteSet<E> {
    /// Build from any element source; sorts canonically and deduplicates.
    pub fn from_elems(elems: impl IntoIterator<Item = E>) -> FiniteSet<E> {
        let mut elems: Vec<E> = elems.into_iter().collect();
        elems.sort_unstable();
        elems.dedup();
        let index = elems.iter().cloned().collect();
        FiniteSet { elems, index }
    }

    /// The empty set.
    pub fn empty() -> FiniteSet<E> {
        FiniteSet { elems: Vec::new(), index: HashSet::new() }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, e: &E) -> bool {
        self.index.contains(e)
    }

    /// Elements in canonical order.
    pub fn elems(&self) -> &[E] {
        &self.elems
    }

    pub fn iter(&self) -> std::slice::Iter<'_, E> {
        self.elems.iter()
    }

    /// Is this set contained in `other`?
    pub fn is_subset_of(&self, other: &FiniteSet<E>) -> bool {
        self.elems.iter().all(|e| other.contains(e))
    }
}

impl<E: Clone + Eq + Ord + Hash> PartialEq for FiniteSet<E> {
    fn eq(&self, other: &Self) -> bool {
        self.elems == other.elems
    }
}

impl<E: Clone + Eq + Ord + Hash> Eq for FiniteSet<E> {}

impl<E: Clone + Eq + Ord + Hash + fmt::Debug> fmt::Debug for FiniteSet<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.elems).finish()
    }
}

impl<E: Clone + Eq + Ord + Hash> FromIterator<E> for FiniteSet<E> {
    fn from_iter<I: IntoIterator<Item = E>>(iter: I) -> Self {
        FiniteSet::from_elems(iter)
    }
}

/// A (possibly infinite) subset of the carrier, given by a membership test.
pub struct SubsetPredicate<G: GroupContext> {
    descriptor: String,
    test: Arc<dyn Fn(&G, &G::Elem) -> bool + Send + Sync>,
}

impl<G: GroupContext> Clone for SubsetPredicate<G> {
    fn clone(&self) -> Self {
        SubsetPredicate { descriptor: self.descriptor.clone(), test: Arc::clone(&self.test) }
    }
}

impl<G: GroupContext> SubsetPredicate<G> {
    pub fn new(
        descriptor: impl Into<String>,
        test: impl Fn(&G, &G::Elem) -> bool + Send + Sync + 'static,
    ) -> SubsetPredicate<G> {
        SubsetPredicate { descriptor: descriptor.into(), test: Arc::new(test) }
    }

    /// The whole carrier.
    pub fn full() -> SubsetPredicate<G> {
        SubsetPredicate::new("all", |_, _| true)
    }

    pub fn contains(&self, ctx: &G, e: &G::Elem) -> bool {
        (self.test)(ctx, e)
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }
}

impl<G: GroupContext> fmt::Debug for SubsetPredicate<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubsetPredicate({})", self.descriptor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_enumeration_zigzags() {
        let ctx = IntAdd;
        let got: Vec<i64> = (0..7).map(|i| ctx.enumerate(i)).collect();
        assert_eq!(got, vec![0, 1, -1, 2, -2, 3, -3]);
    }

    #[test]
    fn int_encode_is_order_preserving() {
        let ctx = IntAdd;
        let mut values = vec![-5i64, 3, 0, -1, 7, i64::MIN / 2, i64::MAX / 2];
        values.sort_unstable();
        let encodings: Vec<Vec<u8>> = values.iter().map(|v| ctx.encode(v)).collect();
        let mut sorted = encodings.clone();
        sorted.sort();
        assert_eq!(encodings, sorted);
    }

    #[test]
    fn natmul_encode_is_order_preserving_across_lengths() {
        let ctx = NatMul;
        let values = [1u64, 2, 255, 256, 65535, 65536, 1 << 40];
        let encodings: Vec<Vec<u8>> = values.iter().map(|v| ctx.encode(&BigUint::from(*v))).collect();
        let mut sorted = encodings.clone();
        sorted.sort();
        assert_eq!(encodings, sorted);
    }

    #[test]
    fn natmul_divides_exactly_or_not_at_all() {
        let ctx = NatMul;
        let twelve = BigUint::from(12u8);
        let three = BigUint::from(3u8);
        let five = BigUint::from(5u8);
        assert_eq!(ctx.divide_right(&twelve, &three), Some(BigUint::from(4u8)));
        assert_eq!(ctx.divide_right(&twelve, &five), None);
    }

    #[test]
    fn vec_enumeration_walks_shells() {
        let ctx: VecAdd<2> = VecAdd::new();
        assert_eq!(ctx.enumerate(0), [0, 0]);
        // Shell r=1 holds 8 points, lexicographically from [-1,-1].
        assert_eq!(ctx.enumerate(1), [-1, -1]);
        assert_eq!(ctx.enumerate(8), [1, 1]);
        assert_eq!(ctx.enumerate(9), [-2, -2]);
        // Bijectivity over a prefix.
        let seen: HashSet<[i64; 2]> = (0..100).map(|i| ctx.enumerate(i)).collect();
        assert_eq!(seen.len(), 100);
    }

    #[test]
    fn perm_multiply_applies_left_factor_first() {
        let ctx = FinPerm::new();
        let swap = Perm::new(vec![2, 1]).unwrap();
        let cycle = Perm::new(vec![2, 3, 1]).unwrap();
        // (swap · cycle)(1) = cycle(swap(1)) = cycle(2) = 3.
        let product = ctx.multiply(&swap, &cycle);
        assert_eq!(product.apply(1), 3);
        assert_eq!(product.apply(2), 2);
        assert_eq!(product.apply(3), 1);
    }

    #[test]
    fn perm_trims_to_minimal_form() {
        let p = Perm::new(vec![2, 1, 3, 4]).unwrap();
        assert_eq!(p.one_line(), &[2, 1]);
        assert_eq!(Perm::new(vec![1, 2, 3]).unwrap(), Perm::id());
        assert_eq!(p.apply(9), 9);
    }

    #[test]
    fn perm_rejects_non_bijections() {
        assert!(Perm::new(vec![1, 1]).is_err());
        assert!(Perm::new(vec![3, 1]).is_err());
    }

    #[test]
    fn perm_enumeration_prefix() {
        let ctx = FinPerm::new();
        // Identity, then Sym(2)∖Sym(1) = {[2,1]}, then the four moving 3.
        assert_eq!(ctx.enumerate(0), Perm::id());
        assert_eq!(ctx.enumerate(1), Perm::new(vec![2, 1]).unwrap());
        let sym3: HashSet<Perm> = (0..6).map(|i| ctx.enumerate(i)).collect();
        assert_eq!(sym3.len(), 6);
        assert!(sym3.iter().all(|p| p.degree() <= 3));
    }

    #[test]
    fn perm_inverse_roundtrips() {
        let ctx = FinPerm::new();
        for i in 0..24u64 {
            let p = ctx.enumerate(i);
            let inv = ctx.invert(&p).unwrap();
            assert_eq!(ctx.multiply(&p, &inv), Perm::id());
            assert_eq!(ctx.multiply(&inv, &p), Perm::id());
        }
    }

    #[test]
    fn finite_set_dedups_and_sorts() {
        let s = FiniteSet::from_elems(vec![3i64, 1, 2, 3, 1]);
        assert_eq!(s.elems(), &[1, 2, 3]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(&2));
        assert!(!s.contains(&4));
    }

    #[test]
    fn divide_right_solves_word_equations() {
        let ctx = IntAdd;
        // r · 5 = 12 with word composition r + 5.
        let r = ctx.divide_right(&12, &5).unwrap();
        assert_eq!(ctx.multiply(&r, &5), 12);

        let perms = FinPerm::new();
        let c = Perm::new(vec![3, 1, 2]).unwrap();
        let d = Perm::new(vec![2, 3, 1]).unwrap();
        let r = perms.divide_right(&d, &c).unwrap();
        assert_eq!(perms.multiply(&r, &c), d);
    }
}
