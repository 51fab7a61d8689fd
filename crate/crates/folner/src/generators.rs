//! Constructions of concrete symbolic functions and subsets: the seeded
//! uniform surrogate stream, Thue–Morse, automatic sequences driven by digit
//! systems, multiplicative automatic sequences via the φ map, B-free and
//! lattice k-free families, generalized polynomials, and permutation sets.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::folner::Rational;
use crate::group::{FinPerm, FiniteSet, GroupContext, IntAdd, NatAdd, NatMul, Perm, SubsetPredicate, VecAdd};
use crate::symbolic::{Alphabet, FnSymbolic, Symbolic, SymbolicFunction};

// ---------------------------------------------------------------------------
// Seeded uniform stream
// ---------------------------------------------------------------------------

struct PrngUniform {
    seed: u64,
    alphabet: Alphabet,
}

impl<G: GroupContext> SymbolicFunction<G> for PrngUniform {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn eval(&self, ctx: &G, g: &G::Elem) -> u8 {
        let k = self.alphabet.size() as u16;
        let limit = (256 / k * k) as u8 as u16; // largest multiple of k ≤ 256
        let limit = if limit == 0 { 256 } else { limit };
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_be_bytes());
        hasher.update(ctx.encode(g));
        let mut block = hasher.finalize();
        loop {
            for &byte in block.iter() {
                if (byte as u16) < limit {
                    return byte % k as u8;
                }
            }
            // All 32 bytes rejected (probability < 2^-160 for any k): chain.
            block = Sha256::digest(block);
        }
    }
}

/// Random-access seeded stream, uniform over the alphabet: the symbol at `g`
/// is drawn by rejection sampling from SHA-256(seed ‖ encode(g)). The same
/// (seed, g) always yields the same symbol, evaluation order is irrelevant,
/// and no sequential state exists — windows can be scanned in parallel.
pub fn prng_uniform<G: GroupContext>(seed: u64, alphabet: Alphabet) -> Symbolic<G> {
    Arc::new(PrngUniform { seed, alphabet })
}

// ---------------------------------------------------------------------------
// Thue–Morse and simple deterministic streams
// ---------------------------------------------------------------------------

/// Thue–Morse on the naturals: t(n) = parity of ones in binary n.
pub fn thue_morse_nat() -> Symbolic<NatAdd> {
    FnSymbolic::new(Alphabet::binary(), |_: &NatAdd, g: &u64| (g.count_ones() % 2) as u8)
}

/// Thue–Morse transported to the integers along the canonical enumeration
/// 0, 1, −1, 2, −2, …: the value at `g` is t(position of g), so reading the
/// carrier in enumeration order reproduces the classical prefix
/// 0110100110010110….
pub fn thue_morse_int() -> Symbolic<IntAdd> {
    FnSymbolic::new(Alphabet::binary(), |_: &IntAdd, g: &i64| {
        let position = if *g > 0 { 2 * (*g as u64) - 1 } else { 2 * g.unsigned_abs() };
        (position.count_ones() % 2) as u8
    })
}

/// The constant stream at a fixed symbol.
pub fn constant<G: GroupContext>(alphabet: Alphabet, symbol: u8) -> Result<Symbolic<G>> {
    if symbol >= alphabet.size() {
        return Err(Error::Invalid(format!(
            "constant symbol {symbol} outside alphabet of size {}",
            alphabet.size()
        )));
    }
    Ok(FnSymbolic::new(alphabet, move |_: &G, _: &G::Elem| symbol))
}

/// Binary indicator stream of a subset: 1 inside, 0 outside.
pub fn indicator_symbolic<G: GroupContext>(set: &SubsetPredicate<G>) -> Symbolic<G> {
    let set = set.clone();
    FnSymbolic::new(Alphabet::binary(), move |ctx: &G, g: &G::Elem| set.contains(ctx, g) as u8)
}

/// Residue class {g ∈ ℕ : g ≡ r (mod m)}.
pub fn residue_indicator(m: u64, r: u64) -> Result<SubsetPredicate<NatAdd>> {
    if m == 0 {
        return Err(Error::Invalid("residue modulus must be positive".into()));
    }
    Ok(SubsetPredicate::new(format!("mod{m}={}", r % m), move |_: &NatAdd, g: &u64| {
        g % m == r % m
    }))
}

// ---------------------------------------------------------------------------
// Digit systems and (V,H)-automatic sequences
// ---------------------------------------------------------------------------

/// An expanding-endomorphism digit system (H, V): every element splits
/// uniquely as `g = v · H(g')` with `v` in the digit set `V`, and iterating
/// the split terminates.
///
/// `endo_inv` must recognize exactly the image of `endo` (returning the
/// preimage); uniqueness of the split is enforced during representation.
pub struct DigitSystem<G: GroupContext> {
    descriptor: String,
    endo: Arc<dyn Fn(&G, &G::Elem) -> G::Elem + Send + Sync>,
    endo_inv: Arc<dyn Fn(&G, &G::Elem) -> Option<G::Elem> + Send + Sync>,
    digits: FiniteSet<G::Elem>,
    good_constant: Option<u32>,
}

impl<G: GroupContext> Clone for DigitSystem<G> {
    fn clone(&self) -> Self {
        DigitSystem {
            descriptor: self.descriptor.clone(),
            endo: Arc::clone(&self.endo),
            endo_inv: Arc::clone(&self.endo_inv),
            digits: self.digits.clone(),
            good_constant: self.good_constant,
        }
    }
}

impl<G: GroupContext> DigitSystem<G> {
    pub fn new(
        ctx: &G,
        descriptor: impl Into<String>,
        endo: impl Fn(&G, &G::Elem) -> G::Elem + Send + Sync + 'static,
        endo_inv: impl Fn(&G, &G::Elem) -> Option<G::Elem> + Send + Sync + 'static,
        digits: FiniteSet<G::Elem>,
        good_constant: Option<u32>,
    ) -> Result<DigitSystem<G>> {
        if !digits.contains(&ctx.identity()) {
            return Err(Error::Invalid("digit set must contain the identity".into()));
        }
        Ok(DigitSystem {
            descriptor: descriptor.into(),
            endo: Arc::new(endo),
            endo_inv: Arc::new(endo_inv),
            digits,
            good_constant,
        })
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn digits(&self) -> &FiniteSet<G::Elem> {
        &self.digits
    }

    /// Empirically measured "good" constant n₀ (growth of representation
    /// order under products), when known for the instance.
    pub fn good_constant(&self) -> Option<u32> {
        self.good_constant
    }

    pub fn apply_endo(&self, ctx: &G, g: &G::Elem) -> G::Elem {
        (self.endo)(ctx, g)
    }

    pub fn invert_endo(&self, ctx: &G, g: &G::Elem) -> Option<G::Elem> {
        (self.endo_inv)(ctx, g)
    }
}

/// Hard cap on digit-representation length.
const DIGIT_ITERATION_CAP: usize = 64;

/// Digit representation of `g`: the unique digits (v₀, v₁, …, v_n) with
/// `g = v₀ · H(v₁) · H²(v₂) ⋯ Hⁿ(v_n)`, together with the order n (0 for the
/// identity, whose digit list is empty).
pub fn digit_representation<G: GroupContext>(
    ctx: &G,
    g: &G::Elem,
    ds: &DigitSystem<G>,
) -> Result<(Vec<G::Elem>, u32)> {
    let identity = ctx.identity();
    let mut digits = Vec::new();
    let mut current = g.clone();
    while current != identity {
        if digits.len() >= DIGIT_ITERATION_CAP {
            return Err(Error::IterationCap("digit system not complete for input".into()));
        }
        let mut split: Option<(G::Elem, G::Elem)> = None;
        for v in ds.digits.iter() {
            let Some(y) = ctx.divide_left(v, &current) else { continue };
            let Some(rest) = ds.invert_endo(ctx, &y) else { continue };
            if split.is_some() {
                return Err(Error::Invalid(format!(
                    "digit system {} is ambiguous at {:?}",
                    ds.descriptor, current
                )));
            }
            split = Some((v.clone(), rest));
        }
        let Some((v, rest)) = split else {
            return Err(Error::Invalid(format!(
                "digit system {} has no digit splitting {:?}",
                ds.descriptor, current
            )));
        };
        digits.push(v);
        current = rest;
    }
    let order = digits.len().saturating_sub(1) as u32;
    Ok((digits, order))
}

/// Reassemble a digit list: `v₀ · H(v₁) · H²(v₂) ⋯ Hⁿ(v_n)`.
pub fn digit_reassemble<G: GroupContext>(
    ctx: &G,
    digits: &[G::Elem],
    ds: &DigitSystem<G>,
) -> G::Elem {
    let mut acc = ctx.identity();
    for (i, v) in digits.iter().enumerate() {
        let mut term = v.clone();
        for _ in 0..i {
            term = ds.apply_endo(ctx, &term);
        }
        acc = ctx.multiply(&acc, &term);
    }
    acc
}

/// The balanced base-3 digit system on ℤ: H(j) = 3j, V = {−1, 0, 1}.
/// Its measured "good" constant is n₀ = 1.
pub fn balanced3_int(ctx: &IntAdd) -> DigitSystem<IntAdd> {
    DigitSystem::new(
        ctx,
        "balanced base-3 on Z",
        |_, g| g.checked_mul(3).expect("digit-system scaling overflowed i64"),
        |_, g| if g % 3 == 0 { Some(g / 3) } else { None },
        FiniteSet::from_elems([-1i64, 0, 1]),
        Some(1),
    )
    .expect("identity is a balanced digit")
}

/// The coordinatewise product of two balanced base-3 systems on ℤ²:
/// H(u) = 3u, V = {−1, 0, 1}².
pub fn balanced3_vec2(ctx: &VecAdd<2>) -> DigitSystem<VecAdd<2>> {
    let mut digits = Vec::new();
    for a in -1i64..=1 {
        for b in -1i64..=1 {
            digits.push([a, b]);
        }
    }
    DigitSystem::new(
        ctx,
        "balanced base-3 on Z^2",
        |_, g: &[i64; 2]| [g[0] * 3, g[1] * 3],
        |_, g: &[i64; 2]| {
            if g[0] % 3 == 0 && g[1] % 3 == 0 {
                Some([g[0] / 3, g[1] / 3])
            } else {
                None
            }
        },
        FiniteSet::from_elems(digits),
        None,
    )
    .expect("identity is a balanced digit")
}

/// A finite-state transducer over digit labels: states, an initial state,
/// total transition maps α_v per digit, and an output map ω into an
/// alphabet. Digit labels are opaque byte keys (the canonical encoding of
/// the digit element, or a single byte for word digits).
#[derive(Clone, Debug)]
pub struct Automaton {
    states: Vec<String>,
    initial: usize,
    table: HashMap<(Vec<u8>, usize), usize>,
    output: Vec<u8>,
    alphabet: Alphabet,
}

impl Automaton {
    pub fn new(
        states: Vec<String>,
        initial: usize,
        table: HashMap<(Vec<u8>, usize), usize>,
        output: Vec<u8>,
        alphabet: Alphabet,
    ) -> Result<Automaton> {
        if states.is_empty() {
            return Err(Error::Empty("automaton state set"));
        }
        if initial >= states.len() || output.len() != states.len() {
            return Err(Error::Mismatch("automaton initial/output indices out of range".into()));
        }
        if let Some(&bad) = output.iter().find(|&&o| o >= alphabet.size()) {
            return Err(Error::Invalid(format!("output symbol {bad} outside the alphabet")));
        }
        if table.values().any(|&s| s >= states.len()) {
            return Err(Error::Invalid("transition into unknown state".into()));
        }
        Ok(Automaton { states, initial, table, output, alphabet })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn step(&self, digit_key: &[u8], state: usize) -> Result<usize> {
        self.table.get(&(digit_key.to_vec(), state)).copied().ok_or_else(|| {
            Error::Invalid(format!(
                "automaton has no transition from state {} on digit key {digit_key:?}",
                self.states[state]
            ))
        })
    }

    /// Check the transition table is total on `digit_keys` × states.
    pub fn validate_total<'a>(&self, digit_keys: impl IntoIterator<Item = &'a [u8]>) -> Result<()> {
        for key in digit_keys {
            for state in 0..self.states.len() {
                self.step(key, state)?;
            }
        }
        Ok(())
    }

    /// Run over digit keys (least-significant digit first) from the initial
    /// state and read the output.
    fn run<'a>(&self, digit_keys: impl IntoIterator<Item = &'a [u8]>) -> Result<u8> {
        let mut state = self.initial;
        for key in digit_keys {
            state = self.step(key, state)?;
        }
        Ok(self.output[state])
    }
}

struct VhAutomatic<G: GroupContext> {
    automaton: Automaton,
    system: DigitSystem<G>,
    digit_keys: HashMap<G::Elem, Vec<u8>>,
}

impl<G: GroupContext> SymbolicFunction<G> for VhAutomatic<G> {
    fn alphabet(&self) -> &Alphabet {
        self.automaton.alphabet()
    }

    fn eval(&self, ctx: &G, g: &G::Elem) -> u8 {
        let (digits, _) = digit_representation(ctx, g, &self.system)
            .expect("digit system incomplete under an automatic sequence");
        let keys = digits.iter().map(|v| {
            self.digit_keys
                .get(v)
                .expect("digit representation produced a digit outside the digit set")
                .as_slice()
        });
        self.automaton.run(keys).expect("automaton validated total over the digit set")
    }
}

/// The (V,H)-automatic sequence of an automaton over a digit system: the
/// value at `g` is ω of the state reached from s₀ by consuming the digit
/// representation of `g`, least-significant digit first. The value at the
/// identity (empty digit list) is ω(s₀).
pub fn vh_automatic<G: GroupContext>(
    ctx: &G,
    automaton: Automaton,
    system: DigitSystem<G>,
) -> Result<Symbolic<G>> {
    let digit_keys: HashMap<G::Elem, Vec<u8>> =
        system.digits().iter().map(|v| (v.clone(), ctx.encode(v))).collect();
    automaton.validate_total(digit_keys.values().map(Vec::as_slice))?;
    Ok(Arc::new(VhAutomatic { automaton, system, digit_keys }))
}

// ---------------------------------------------------------------------------
// φ and multiplicative automatic sequences
// ---------------------------------------------------------------------------

/// Prime factorization by trial division, ascending primes. Desk-scale: cost
/// grows with the square root of the largest prime factor.
pub(crate) fn factorize(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out = Vec::new();
    let mut rest = n.clone();
    let one = BigUint::one();
    let mut d = BigUint::from(2u8);
    while &d * &d <= rest {
        if (&rest % &d).is_zero() {
            let mut exp = 0u32;
            while (&rest % &d).is_zero() {
                rest /= &d;
                exp += 1;
            }
            out.push((d.clone(), exp));
        }
        d += if d == BigUint::from(2u8) { 1u8 } else { 2u8 };
    }
    if rest > one {
        out.push((rest, 1));
    }
    out
}

fn digit_char(d: u32) -> char {
    char::from_digit(d, 36).expect("digit below base 36")
}

/// The φ word of N ≥ 1 in base b: concatenate the base-b expansions of the
/// prime exponents of N in decreasing prime order (most significant digit
/// first within each exponent). φ(1) is the empty word. Bases up to 36 use
/// the digits 0–9, a–z.
pub fn phi(n: &BigUint, base: u32) -> Result<String> {
    if n.is_zero() {
        return Err(Error::Invalid("phi needs a positive integer".into()));
    }
    if !(2..=36).contains(&base) {
        return Err(Error::Invalid(format!("phi base {base} outside 2..=36")));
    }
    let mut factors = factorize(n);
    factors.reverse(); // decreasing prime order
    let mut word = String::new();
    for (_, exp) in factors {
        let mut digits = Vec::new();
        let mut e = exp;
        while e > 0 {
            digits.push(digit_char(e % base));
            e /= base;
        }
        digits.reverse();
        word.extend(digits);
    }
    Ok(word)
}

struct MultAutomatic {
    automaton: Automaton,
    base: u32,
}

impl SymbolicFunction<NatMul> for MultAutomatic {
    fn alphabet(&self) -> &Alphabet {
        self.automaton.alphabet()
    }

    fn eval(&self, _ctx: &NatMul, n: &BigUint) -> u8 {
        let word = phi(n, self.base).expect("carrier of (N,x) is positive");
        let mut state = self.automaton.initial;
        // Consume the word least-significant digit first (rightmost char).
        for ch in word.chars().rev() {
            let d = ch.to_digit(36).expect("phi emits base-36 digits") as u8;
            state = self
                .automaton
                .step(&[d], state)
                .expect("automaton validated total over word digits");
        }
        self.automaton.output[state]
    }
}

/// Multiplicative automatic sequence: evaluate the automaton on φ(N),
/// consuming digits least-significant first; the value at N = 1 (empty
/// word) is ω(s₀).
pub fn mult_automatic(automaton: Automaton, base: u32) -> Result<Symbolic<NatMul>> {
    if !(2..=36).contains(&base) {
        return Err(Error::Invalid(format!("automaton base {base} outside 2..=36")));
    }
    let keys: Vec<Vec<u8>> = (0..base as u8).map(|d| vec![d]).collect();
    automaton.validate_total(keys.iter().map(Vec::as_slice))?;
    Ok(Arc::new(MultAutomatic { automaton, base }))
}

/// The multiplicative Thue–Morse sequence: 1 exactly when φ(N) in base 2
/// contains an odd number of ones.
pub fn mult_thue_morse() -> Symbolic<NatMul> {
    let spec = parse_automaton(crate::instances::MULT_BINARY_PARITY)
        .expect("shipped automaton parses");
    let automaton = bind_word_automaton(&spec, 2).expect("shipped automaton is total on {0,1}");
    mult_automatic(automaton, 2).expect("shipped automaton is total on {0,1}")
}

// ---------------------------------------------------------------------------
// B-free, k-free, generalized polynomials, permutation sets
// ---------------------------------------------------------------------------

/// The B-free numbers: n with no divisor in B. 0 is divisible by
/// everything, so it is never B-free; 1 always is.
pub fn bfree_indicator(b: Vec<u64>) -> Result<SubsetPredicate<NatAdd>> {
    if b.is_empty() {
        return Err(Error::Empty("B-free modulus list"));
    }
    if let Some(&bad) = b.iter().find(|&&m| m < 2) {
        return Err(Error::Invalid(format!("B-free moduli must be >= 2, got {bad}")));
    }
    let shown: Vec<String> = b.iter().take(4).map(u64::to_string).collect();
    let label = if b.len() > 4 {
        format!("bfree{{{},...}}", shown.join(","))
    } else {
        format!("bfree{{{}}}", shown.join(","))
    };
    Ok(SubsetPredicate::new(label, move |_: &NatAdd, n: &u64| {
        if *n == 0 {
            return false;
        }
        b.iter().all(|m| n % m != 0)
    }))
}

/// The square-free numbers: no prime square divides n. Equals the B-free
/// family over all prime squares, but tested by direct trial division so it
/// is exact at every horizon.
pub fn squarefree_indicator() -> SubsetPredicate<NatAdd> {
    SubsetPredicate::new("squarefree", |_: &NatAdd, n: &u64| is_squarefree(*n))
}

fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut rest = n;
    let mut d = 2u64;
    while d * d <= rest {
        if rest % d == 0 {
            rest /= d;
            if rest % d == 0 {
                return false;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    true
}

/// The k-free lattice points of ℤ^D: points whose k-content is 1, i.e. no
/// c ≥ 2 has c^k dividing every coordinate. The origin has infinite content
/// and is never k-free.
pub fn lattice_kfree_indicator<const D: usize>(k: u32) -> Result<SubsetPredicate<VecAdd<D>>> {
    if k < 2 {
        return Err(Error::Invalid(format!("k-free needs k >= 2, got {k}")));
    }
    Ok(SubsetPredicate::new(format!("{k}free^{D}"), move |_: &VecAdd<D>, p: &[i64; D]| {
        let mut gcd = 0u64;
        for c in p {
            gcd = gcd_u64(gcd, c.unsigned_abs());
        }
        if gcd == 0 {
            return false;
        }
        let mut c = 2u64;
        loop {
            let Some(power) = c.checked_pow(k) else { return true };
            if power > gcd {
                return true;
            }
            if gcd % power == 0 {
                return false;
            }
            c += 1;
        }
    }))
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// A generalized polynomial: an expression tree over coordinate
/// projections, rational constants, addition, multiplication, and the floor
/// function, evaluated exactly over the rationals.
#[derive(Clone, Debug)]
pub enum GeneralizedPolynomial {
    /// The i-th coordinate of the input point.
    Coord(usize),
    Const(Rational),
    Add(Box<GeneralizedPolynomial>, Box<GeneralizedPolynomial>),
    Mul(Box<GeneralizedPolynomial>, Box<GeneralizedPolynomial>),
    Floor(Box<GeneralizedPolynomial>),
}

impl GeneralizedPolynomial {
    pub fn coord(i: usize) -> GeneralizedPolynomial {
        GeneralizedPolynomial::Coord(i)
    }

    pub fn constant(r: Rational) -> GeneralizedPolynomial {
        GeneralizedPolynomial::Const(r)
    }

    pub fn add(self, rhs: GeneralizedPolynomial) -> GeneralizedPolynomial {
        GeneralizedPolynomial::Add(Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: GeneralizedPolynomial) -> GeneralizedPolynomial {
        GeneralizedPolynomial::Mul(Box::new(self), Box::new(rhs))
    }

    pub fn floor_of(self) -> GeneralizedPolynomial {
        GeneralizedPolynomial::Floor(Box::new(self))
    }

    /// Largest coordinate index used, if any.
    fn max_coord(&self) -> Option<usize> {
        match self {
            GeneralizedPolynomial::Coord(i) => Some(*i),
            GeneralizedPolynomial::Const(_) => None,
            GeneralizedPolynomial::Add(a, b) | GeneralizedPolynomial::Mul(a, b) => {
                a.max_coord().into_iter().chain(b.max_coord()).max()
            }
            GeneralizedPolynomial::Floor(a) => a.max_coord(),
        }
    }

    /// Exact evaluation at an integer point.
    pub fn eval(&self, point: &[BigInt]) -> Result<Rational> {
        match self {
            GeneralizedPolynomial::Coord(i) => point
                .get(*i)
                .map(|c| Rational::from(c.clone()))
                .ok_or_else(|| Error::Invalid(format!("coordinate {i} beyond point dimension"))),
            GeneralizedPolynomial::Const(r) => Ok(r.clone()),
            GeneralizedPolynomial::Add(a, b) => Ok(a.eval(point)? + b.eval(point)?),
            GeneralizedPolynomial::Mul(a, b) => Ok(a.eval(point)? * b.eval(point)?),
            GeneralizedPolynomial::Floor(a) => Ok(a.eval(point)?.floor()),
        }
    }
}

/// Fractional part {r} = r − ⌊r⌋ ∈ [0, 1).
fn frac(r: Rational) -> Rational {
    let f = r.floor();
    r - f
}

/// A finite union of rational boxes in [0,1)^l: each box is one closed-open
/// interval [lo, hi) per coordinate.
pub type RationalBoxes = Vec<Vec<(Rational, Rational)>>;

fn gp_membership(u: &[GeneralizedPolynomial], w: &RationalBoxes, point: &[BigInt]) -> bool {
    let values: Vec<Rational> = u
        .iter()
        .map(|poly| frac(poly.eval(point).expect("dimension validated at construction")))
        .collect();
    w.iter().any(|boxes| {
        boxes.len() == values.len()
            && values.iter().zip(boxes).all(|(v, (lo, hi))| lo <= v && v < hi)
    })
}

fn validate_gp(u: &[GeneralizedPolynomial], w: &RationalBoxes, dims: usize) -> Result<()> {
    if u.is_empty() {
        return Err(Error::Empty("generalized-polynomial list"));
    }
    if let Some(i) = u.iter().filter_map(GeneralizedPolynomial::max_coord).max() {
        if i >= dims {
            return Err(Error::Invalid(format!(
                "polynomial uses coordinate {i} but points have dimension {dims}"
            )));
        }
    }
    if w.iter().any(|boxes| boxes.len() != u.len()) {
        return Err(Error::Mismatch("box dimension differs from polynomial count".into()));
    }
    Ok(())
}

/// The set {p ∈ ℤ^D : ({u₁(p)}, …, {u_l(p)}) ∈ W} for generalized
/// polynomials u and a finite union of rational boxes W ⊆ [0,1)^l.
/// Fractional parts are taken before membership, and all arithmetic is
/// exact, so floor boundaries are classified deterministically.
pub fn gp_indicator_vec<const D: usize>(
    u: Vec<GeneralizedPolynomial>,
    w: RationalBoxes,
    descriptor: impl Into<String>,
) -> Result<SubsetPredicate<VecAdd<D>>> {
    validate_gp(&u, &w, D)?;
    Ok(SubsetPredicate::new(descriptor, move |_: &VecAdd<D>, p: &[i64; D]| {
        let point: Vec<BigInt> = p.iter().map(|&c| BigInt::from(c)).collect();
        gp_membership(&u, &w, &point)
    }))
}

/// One-dimensional variant on the naturals (the point is [n]).
pub fn gp_indicator_nat(
    u: Vec<GeneralizedPolynomial>,
    w: RationalBoxes,
    descriptor: impl Into<String>,
) -> Result<SubsetPredicate<NatAdd>> {
    validate_gp(&u, &w, 1)?;
    Ok(SubsetPredicate::new(descriptor, move |_: &NatAdd, n: &u64| {
        gp_membership(&u, &w, &[BigInt::from(*n)])
    }))
}

/// A continued-fraction convergent of √2 with error below 5·10⁻¹²:
/// 665857/470832. Adequate for fractional-part tests at desk horizons
/// (n ≤ 10⁵ keeps n·|√2 − p/q| far below box boundaries' resolution).
pub fn sqrt2_convergent() -> Rational {
    Ratio::new(BigInt::from(665_857), BigInt::from(470_832))
}

/// The set {n ∈ ℕ : {n√2} ∈ [0, ½)} via the exact convergent.
pub fn sqrt2_halfline_indicator() -> SubsetPredicate<NatAdd> {
    let u = vec![GeneralizedPolynomial::coord(0)
        .mul(GeneralizedPolynomial::constant(sqrt2_convergent()))];
    let w = vec![vec![(
        Rational::zero(),
        Ratio::new(BigInt::from(1), BigInt::from(2)),
    )]];
    gp_indicator_nat(u, w, "frac-sqrt2-halfline").expect("one coordinate, one box")
}

/// The increasing-prefix permutations C_k = {g : g(1) < g(2) < ⋯ < g(k)}.
pub fn perm_incr_indicator(k: u8) -> Result<SubsetPredicate<FinPerm>> {
    if k < 2 {
        return Err(Error::Invalid(format!("increasing-prefix set needs k >= 2, got {k}")));
    }
    Ok(SubsetPredicate::new(format!("incr{k}"), move |_: &FinPerm, g: &Perm| {
        (1..k).all(|i| g.apply(i) < g.apply(i + 1))
    }))
}

/// Decompose a permutation against the increasing-prefix set: the unique
/// s ∈ Sym(k) (a permutation of the first k points) such that `s·c` has an
/// increasing k-prefix. Returns (s, s·c).
pub fn perm_center_decompose(ctx: &FinPerm, c: &Perm, k: u8) -> Result<(Perm, Perm)> {
    if k < 2 {
        return Err(Error::Invalid(format!("decomposition needs k >= 2, got {k}")));
    }
    // s must order the positions 1..=k by their images under c.
    let mut positions: Vec<u8> = (1..=k).collect();
    positions.sort_by_key(|&i| c.apply(i));
    let s = Perm::new(positions).expect("a sorted position list is a permutation");
    let center = ctx.multiply(&s, c);
    debug_assert!((1..k).all(|i| center.apply(i) < center.apply(i + 1)));
    Ok((s, center))
}

// ---------------------------------------------------------------------------
// Declarative text format for digit systems and automata
// ---------------------------------------------------------------------------

/// Parsed digit-system description (see the shipped files under
/// `instances/` for the format).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitSystemSpec {
    pub group: String,
    pub scale: i64,
    pub digits: Vec<Vec<i64>>,
    pub good_constant: Option<u32>,
}

/// Parsed automaton description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomatonSpec {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    pub output: Vec<(String, String)>,
    pub transitions: Vec<(Vec<i64>, String, String)>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim()
}

fn parse_digit_literal(text: &str) -> Result<Vec<i64>> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("digit literal {text:?} must be bracketed")))?;
    inner
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad integer {part:?} in digit literal")))
        })
        .collect()
}

/// Parse the digit-system text format:
///
/// ```text
/// kind: digit-system
/// group: Z            # or Z^2
/// endo: scale 3
/// digits: [-1] [0] [1]
/// good-constant: 1    # optional
/// ```
pub fn parse_digit_system(text: &str) -> Result<DigitSystemSpec> {
    let mut kind = None;
    let mut group = None;
    let mut scale = None;
    let mut digits = None;
    let mut good_constant = None;
    for raw in text.lines() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected key: value, got {line:?}")))?;
        let value = value.trim();
        match key.trim() {
            "kind" => kind = Some(value.to_string()),
            "group" => group = Some(value.to_string()),
            "endo" => {
                let s = value
                    .strip_prefix("scale")
                    .ok_or_else(|| Error::Parse(format!("unsupported endomorphism {value:?}")))?;
                scale = Some(
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::Parse(format!("bad scale factor {s:?}")))?,
                );
            }
            "digits" => {
                digits = Some(
                    value
                        .split_whitespace()
                        .map(parse_digit_literal)
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            "good-constant" => {
                good_constant = Some(
                    value
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad good-constant {value:?}")))?,
                );
            }
            other => return Err(Error::Parse(format!("unknown digit-system key {other:?}"))),
        }
    }
    if kind.as_deref() != Some("digit-system") {
        return Err(Error::Parse("file must declare kind: digit-system".into()));
    }
    Ok(DigitSystemSpec {
        group: group.ok_or_else(|| Error::Parse("missing group".into()))?,
        scale: scale.ok_or_else(|| Error::Parse("missing endo".into()))?,
        digits: digits.ok_or_else(|| Error::Parse("missing digits".into()))?,
        good_constant,
    })
}

/// Parse the automaton text format:
///
/// ```text
/// kind: automaton
/// alphabet: 0 1
/// states: even odd
/// initial: even
/// output: even=0 odd=1
/// digit [-1]: even->odd odd->even
/// ```
pub fn parse_automaton(text: &str) -> Result<AutomatonSpec> {
    let mut kind = None;
    let mut alphabet = None;
    let mut states = None;
    let mut initial = None;
    let mut output = None;
    let mut transitions = Vec::new();
    for raw in text.lines() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected key: value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "kind" => kind = Some(value.to_string()),
            "alphabet" => {
                alphabet = Some(value.split_whitespace().map(str::to_string).collect::<Vec<_>>())
            }
            "states" => {
                states = Some(value.split_whitespace().map(str::to_string).collect::<Vec<_>>())
            }
            "initial" => initial = Some(value.to_string()),
            "output" => {
                output = Some(
                    value
                        .split_whitespace()
                        .map(|pair| {
                            pair.split_once('=')
                                .map(|(s, o)| (s.to_string(), o.to_string()))
                                .ok_or_else(|| {
                                    Error::Parse(format!("output entry {pair:?} must be state=symbol"))
                                })
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            _ if key.starts_with("digit") => {
                let literal = parse_digit_literal(key["digit".len()..].trim())?;
                for hop in value.split_whitespace() {
                    let (from, to) = hop.split_once("->").ok_or_else(|| {
                        Error::Parse(format!("transition {hop:?} must be from->to"))
                    })?;
                    transitions.push((literal.clone(), from.to_string(), to.to_string()));
                }
            }
            other => return Err(Error::Parse(format!("unknown automaton key {other:?}"))),
        }
    }
    if kind.as_deref() != Some("automaton") {
        return Err(Error::Parse("file must declare kind: automaton".into()));
    }
    Ok(AutomatonSpec {
        alphabet: alphabet.ok_or_else(|| Error::Parse("missing alphabet".into()))?,
        states: states.ok_or_else(|| Error::Parse("missing states".into()))?,
        initial: initial.ok_or_else(|| Error::Parse("missing initial".into()))?,
        output: output.ok_or_else(|| Error::Parse("missing output".into()))?,
        transitions,
    })
}

fn build_automaton(
    spec: &AutomatonSpec,
    mut digit_key: impl FnMut(&[i64]) -> Result<Vec<u8>>,
) -> Result<Automaton> {
    let alphabet = Alphabet::named(spec.alphabet.clone())?;
    let state_index: HashMap<&str, usize> =
        spec.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if state_index.len() != spec.states.len() {
        return Err(Error::Parse("duplicate state names".into()));
    }
    let locate = |name: &str| -> Result<usize> {
        state_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown state {name:?}")))
    };
    let initial = locate(&spec.initial)?;
    let mut output = vec![None; spec.states.len()];
    for (state, symbol) in &spec.output {
        let s = locate(state)?;
        let sym = spec
            .alphabet
            .iter()
            .position(|a| a == symbol)
            .ok_or_else(|| Error::Parse(format!("unknown output symbol {symbol:?}")))?;
        output[s] = Some(sym as u8);
    }
    let output: Vec<u8> = output
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Parse("output map must cover every state".into()))?;
    let mut table = HashMap::new();
    for (literal, from, to) in &spec.transitions {
        let key = digit_key(literal)?;
        if table.insert((key, locate(from)?), locate(to)?).is_some() {
            return Err(Error::Parse(format!(
                "duplicate transition on digit {literal:?} from {from:?}"
            )));
        }
    }
    Automaton::new(spec.states.clone(), initial, table, output, alphabet)
}

/// Bind a parsed automaton over the digits of a digit system on ℤ
/// (1-component digit literals).
pub fn bind_automaton_int(spec: &AutomatonSpec, ctx: &IntAdd) -> Result<Automaton> {
    build_automaton(spec, |literal| match literal {
        [v] => Ok(ctx.encode(v)),
        _ => Err(Error::Parse(format!("expected 1-component digit, got {literal:?}"))),
    })
}

/// Bind a parsed automaton over the digits of a digit system on ℤ²
/// (2-component digit literals).
pub fn bind_automaton_vec2(spec: &AutomatonSpec, ctx: &VecAdd<2>) -> Result<Automaton> {
    build_automaton(spec, |literal| match literal {
        [a, b] => Ok(ctx.encode(&[*a, *b])),
        _ => Err(Error::Parse(format!("expected 2-component digit, got {literal:?}"))),
    })
}

/// Bind a parsed automaton over word digits {0, …, base−1} (for
/// multiplicative automatic sequences).
pub fn bind_word_automaton(spec: &AutomatonSpec, base: u32) -> Result<Automaton> {
    build_automaton(spec, |literal| match literal {
        [d] if (0..base as i64).contains(d) => Ok(vec![*d as u8]),
        _ => Err(Error::Parse(format!("expected a digit in 0..{base}, got {literal:?}"))),
    })
}

/// Load a digit system from its parsed description onto ℤ.
pub fn digit_system_int(spec: &DigitSystemSpec, ctx: &IntAdd) -> Result<DigitSystem<IntAdd>> {
    if spec.group != "Z" {
        return Err(Error::Mismatch(format!("digit system declares group {}", spec.group)));
    }
    let scale = spec.scale;
    if scale.abs() < 2 {
        return Err(Error::Invalid("expanding endomorphism needs |scale| >= 2".into()));
    }
    let digits: Vec<i64> = spec
        .digits
        .iter()
        .map(|d| match d.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::Parse(format!("expected 1-component digit, got {d:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    DigitSystem::new(
        ctx,
        format!("scale-{scale} on Z"),
        move |_, g: &i64| g.checked_mul(scale).expect("digit-system scaling overflowed i64"),
        move |_, g: &i64| if g % scale == 0 { Some(g / scale) } else { None },
        FiniteSet::from_elems(digits),
        spec.good_constant,
    )
}

/// Load a digit system from its parsed description onto ℤ².
pub fn digit_system_vec2(spec: &DigitSystemSpec, ctx: &VecAdd<2>) -> Result<DigitSystem<VecAdd<2>>> {
    if spec.group != "Z^2" {
        return Err(Error::Mismatch(format!("digit system declares group {}", spec.group)));
    }
    let scale = spec.scale;
    if scale.abs() < 2 {
        return Err(Error::Invalid("expanding endomorphism needs |scale| >= 2".into()));
    }
    let digits: Vec<[i64; 2]> = spec
        .digits
        .iter()
        .map(|d| match d.as_slice() {
            [a, b] => Ok([*a, *b]),
            _ => Err(Error::Parse(format!("expected 2-component digit, got {d:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    DigitSystem::new(
        ctx,
        format!("scale-{scale} on Z^2"),
        move |_, g: &[i64; 2]| [g[0] * scale, g[1] * scale],
        move |_, g: &[i64; 2]| {
            if g[0] % scale == 0 && g[1] % scale == 0 {
                Some([g[0] / scale, g[1] / scale])
            } else {
                None
            }
        },
        FiniteSet::from_elems(digits),
        spec.good_constant,
    )
}
