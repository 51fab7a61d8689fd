//! Symbolic functions (elements of Λ^G), blocks, frequencies, empirical
//! measures, and the catalog pseudometric between them.
//!
//! The shift acts on the right: `shift(x, g)` is the function
//! `h ↦ x(h·g)`, and a block `B` on domain `K` occurs in `x` anchored at `g`
//! when `x(h·g) = B(h)` for every `h ∈ K`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::{self, Write};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::folner::{ratio, Rational};
use crate::group::{FiniteSet, GroupContext};
use crate::scan::ValueTable;

// ---------------------------------------------------------------------------
// Alphabets and symbolic functions
// ---------------------------------------------------------------------------

/// A finite, ordered symbol set Λ. Symbols are referred to by their index
/// (a `u8`); names are only used for rendering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    /// Alphabet with explicit symbol names (distinct, nonempty, ≤ 255).
    pub fn named(names: Vec<String>) -> Result<Alphabet> {
        if names.is_empty() {
            return Err(Error::Empty("alphabet"));
        }
        if names.len() > 255 {
            return Err(Error::TooLarge(format!("alphabet of {} symbols", names.len())));
        }
        let mut seen = names.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != names.len() {
            return Err(Error::Invalid("alphabet names must be distinct".into()));
        }
        Ok(Alphabet { names })
    }

    /// The binary alphabet {0, 1}.
    pub fn binary() -> Alphabet {
        Alphabet { names: vec!["0".into(), "1".into()] }
    }

    /// The alphabet {0, 1, …, k−1} with decimal names.
    pub fn of_size(k: u8) -> Result<Alphabet> {
        if k == 0 {
            return Err(Error::Empty("alphabet"));
        }
        Ok(Alphabet { names: (0..k).map(|i| i.to_string()).collect() })
    }

    pub fn size(&self) -> u8 {
        self.names.len() as u8
    }

    pub fn name(&self, symbol: u8) -> &str {
        &self.names[symbol as usize]
    }

    /// Render a symbol word: concatenated when every name is one character,
    /// comma-separated otherwise.
    pub fn render(&self, word: &[u8]) -> String {
        let compact = self.names.iter().all(|n| n.chars().count() == 1);
        let sep = if compact { "" } else { "," };
        word.iter().map(|&s| self.name(s)).collect::<Vec<_>>().join(sep)
    }
}

/// An element of Λ^G: a pure, deterministic map from the carrier to symbol
/// indices. Implementations must be safe under concurrent readers.
pub trait SymbolicFunction<G: GroupContext>: Send + Sync {
    fn alphabet(&self) -> &Alphabet;

    /// The symbol at `g`. Must be pure: equal inputs give equal outputs.
    fn eval(&self, ctx: &G, g: &G::Elem) -> u8;
}

/// Shared handle to a symbolic function.
pub type Symbolic<G> = Arc<dyn SymbolicFunction<G>>;

/// Adapter turning a closure into a [`SymbolicFunction`].
pub struct FnSymbolic<G: GroupContext> {
    alphabet: Alphabet,
    f: Box<dyn Fn(&G, &G::Elem) -> u8 + Send + Sync>,
}

impl<G: GroupContext> FnSymbolic<G> {
    pub fn new(
        alphabet: Alphabet,
        f: impl Fn(&G, &G::Elem) -> u8 + Send + Sync + 'static,
    ) -> Symbolic<G> {
        Arc::new(FnSymbolic { alphabet, f: Box::new(f) })
    }
}

impl<G: GroupContext> SymbolicFunction<G> for FnSymbolic<G> {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn eval(&self, ctx: &G, g: &G::Elem) -> u8 {
        (self.f)(ctx, g)
    }
}

struct Shifted<G: GroupContext> {
    inner: Symbolic<G>,
    by: G::Elem,
}

impl<G: GroupContext> SymbolicFunction<G> for Shifted<G> {
    fn alphabet(&self) -> &Alphabet {
        self.inner.alphabet()
    }

    fn eval(&self, ctx: &G, h: &G::Elem) -> u8 {
        self.inner.eval(ctx, &ctx.multiply(h, &self.by))
    }
}

/// The shift action: `shift(x, g)(h) = x(h·g)`.
pub fn shift<G: GroupContext>(x: &Symbolic<G>, g: G::Elem) -> Symbolic<G> {
    Arc::new(Shifted { inner: Arc::clone(x), by: g })
}

/// Bounded memoization wrapper keyed by canonical encodings, sharded for
/// concurrent readers. Evicts first-in-first-out per shard.
pub struct CachedSymbolic<G: GroupContext> {
    inner: Symbolic<G>,
    shards: Vec<Mutex<CacheShard>>,
    per_shard_capacity: usize,
}

struct CacheShard {
    map: HashMap<Vec<u8>, u8>,
    order: VecDeque<Vec<u8>>,
}

const CACHE_SHARDS: usize = 16;

impl<G: GroupContext> CachedSymbolic<G> {
    pub fn new(inner: Symbolic<G>, capacity: usize) -> Symbolic<G> {
        let per_shard_capacity = capacity.div_ceil(CACHE_SHARDS).max(1);
        let shards = (0..CACHE_SHARDS)
            .map(|_| Mutex::new(CacheShard { map: HashMap::new(), order: VecDeque::new() }))
            .collect();
        Arc::new(CachedSymbolic { inner, shards, per_shard_capacity })
    }
}

impl<G: GroupContext> SymbolicFunction<G> for CachedSymbolic<G> {
    fn alphabet(&self) -> &Alphabet {
        self.inner.alphabet()
    }

    fn eval(&self, ctx: &G, g: &G::Elem) -> u8 {
        let key = ctx.encode(g);
        let shard_idx = key.iter().fold(0usize, |acc, &b| acc.wrapping_mul(31) + b as usize)
            % CACHE_SHARDS;
        let shard = self.shards[shard_idx].lock().expect("cache shard poisoned");
        if let Some(&v) = shard.map.get(&key) {
            return v;
        }
        drop(shard);
        let v = self.inner.eval(ctx, g);
        let mut shard = self.shards[shard_idx].lock().expect("cache shard poisoned");
        if shard.map.len() >= self.per_shard_capacity {
            if let Some(oldest) = shard.order.pop_front() {
                shard.map.remove(&oldest);
            }
        }
        if shard.map.insert(key.clone(), v).is_none() {
            shard.order.push_back(key);
        }
        v
    }
}

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

/// A finite pattern B ∈ Λ^K: symbol values on a finite domain.
///
/// Values are stored parallel to the canonical (encoding) order of the
/// domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block<E: Clone + Eq + Ord + std::hash::Hash> {
    domain: FiniteSet<E>,
    values: Vec<u8>,
    alphabet_size: u8,
}

impl<E: Clone + Eq + Ord + std::hash::Hash> Block<E> {
    /// Build from a domain and values given in the domain's canonical order.
    pub fn new(domain: FiniteSet<E>, values: Vec<u8>, alphabet_size: u8) -> Result<Block<E>> {
        if values.len() != domain.len() {
            return Err(Error::Mismatch(format!(
                "{} values for a domain of {} points",
                values.len(),
                domain.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= alphabet_size) {
            return Err(Error::Invalid(format!(
                "symbol {bad} outside alphabet of size {alphabet_size}"
            )));
        }
        Ok(Block { domain, values, alphabet_size })
    }

    /// Read the restriction of `x` to `domain`.
    pub fn read<G: GroupContext<Elem = E>>(
        ctx: &G,
        x: &dyn SymbolicFunction<G>,
        domain: FiniteSet<E>,
    ) -> Block<E> {
        let values = domain.iter().map(|k| x.eval(ctx, k)).collect();
        Block { domain, values, alphabet_size: x.alphabet().size() }
    }

    pub fn domain(&self) -> &FiniteSet<E> {
        &self.domain
    }

    /// Values in the domain's canonical order.
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn alphabet_size(&self) -> u8 {
        self.alphabet_size
    }

    /// The value at a domain point, `None` outside the domain.
    pub fn value_at(&self, e: &E) -> Option<u8> {
        self.domain
            .elems()
            .binary_search(e)
            .ok()
            .map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Anchored occurrence: does `B` occur in `x` with anchor `g`, i.e. is
/// `x(h·g) = B(h)` for every `h` in the domain?
pub fn occurs_at<G: GroupContext>(
    ctx: &G,
    x: &dyn SymbolicFunction<G>,
    block: &Block<G::Elem>,
    g: &G::Elem,
) -> bool {
    block
        .domain
        .iter()
        .zip(&block.values)
        .all(|(h, &v)| x.eval(ctx, &ctx.multiply(h, g)) == v)
}

/// Equality modulo shift: is there a translate `t` with `C(h·t) = B(h)` for
/// all `h`, i.e. are the two patterns the same up to moving the anchor?
///
/// Candidate translates are solved from pairs of domain points by left
/// division and verified by direct comparison of translated evaluations.
pub fn equal_mod_shift<G: GroupContext>(
    ctx: &G,
    b: &Block<G::Elem>,
    c: &Block<G::Elem>,
) -> bool {
    if b.len() != c.len() {
        return false;
    }
    if b.is_empty() {
        return true;
    }
    let b_first = &b.domain.elems()[0];
    c.domain.iter().any(|c_pt| {
        let Some(t) = ctx.divide_left(b_first, c_pt) else {
            return false;
        };
        b.domain.iter().zip(&b.values).all(|(h, &v)| {
            let translated = ctx.multiply(h, &t);
            c.value_at(&translated) == Some(v)
        })
    })
}

/// Frequency of the pattern `B` inside the block `B0`:
/// |{g in the K-core of K₀ : B occurs in B0 anchored at g}| / |K₀|.
///
/// Returns 0 when the pattern does not fit anywhere (empty core).
pub fn frequency<G: GroupContext>(
    ctx: &G,
    b0: &Block<G::Elem>,
    b: &Block<G::Elem>,
) -> Result<Rational> {
    if b0.is_empty() {
        return Err(Error::Empty("host block"));
    }
    let mut occurrences = 0u64;
    for g in b0.domain.iter() {
        let mut fits = true;
        let mut matches = true;
        for (h, &v) in b.domain.iter().zip(&b.values) {
            match b0.value_at(&ctx.multiply(h, g)) {
                Some(actual) => {
                    if actual != v {
                        matches = false;
                    }
                }
                None => {
                    fits = false;
                    break;
                }
            }
        }
        if fits && matches {
            occurrences += 1;
        }
    }
    Ok(ratio(occurrences, b0.len() as u64))
}

/// Concatenate blocks with pairwise disjoint domains into one block on the
/// union domain.
pub fn concat<E: Clone + Eq + Ord + std::hash::Hash>(blocks: &[Block<E>]) -> Result<Block<E>> {
    let first = blocks.first().ok_or(Error::Empty("block list"))?;
    let alphabet_size = first.alphabet_size;
    if let Some(other) = blocks.iter().find(|b| b.alphabet_size != alphabet_size) {
        return Err(Error::Mismatch(format!(
            "alphabet sizes {alphabet_size} and {} in one concatenation",
            other.alphabet_size
        )));
    }
    let mut pairs: Vec<(E, u8)> = Vec::with_capacity(blocks.iter().map(Block::len).sum());
    for block in blocks {
        pairs.extend(block.domain.iter().cloned().zip(block.values.iter().copied()));
    }
    pairs.sort_unstable_by(|(a, _), (b, _)| a.cmp(b));
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Overlap("concatenated block domains intersect".into()));
    }
    let (domain, values): (Vec<E>, Vec<u8>) = pairs.into_iter().unzip();
    Block::new(FiniteSet::from_elems(domain), values, alphabet_size)
}

// ---------------------------------------------------------------------------
// Empirical measures and the catalog pseudometric
// ---------------------------------------------------------------------------

/// Empirical distribution of K-patterns of a symbolic function over a
/// window: each observed pattern is weighted by
/// (number of core anchors showing it) / |window|.
///
/// Weights sum to the core-coverage fraction `anchor_count / window_size`,
/// which is ≤ 1; callers that need a probability distribution renormalize by
/// the coverage.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure<E: Clone + Eq + Ord + std::hash::Hash> {
    test_domain: FiniteSet<E>,
    weights: BTreeMap<Vec<u8>, Rational>,
    anchor_count: u64,
    window_size: u64,
}

impl<E: Clone + Eq + Ord + std::hash::Hash> EmpiricalMeasure<E> {
    pub fn test_domain(&self) -> &FiniteSet<E> {
        &self.test_domain
    }

    /// Observed pattern weights, keyed by the value word in domain order.
    /// Patterns not present have weight 0.
    pub fn weights(&self) -> &BTreeMap<Vec<u8>, Rational> {
        &self.weights
    }

    pub fn weight_of(&self, pattern: &[u8]) -> Rational {
        self.weights.get(pattern).cloned().unwrap_or_else(Rational::zero)
    }

    /// Number of core anchors the measure was read from.
    pub fn anchor_count(&self) -> u64 {
        self.anchor_count
    }

    pub fn window_size(&self) -> u64 {
        self.window_size
    }

    /// Fraction of the window usable as anchors: anchor_count / window_size.
    pub fn coverage(&self) -> Rational {
        ratio(self.anchor_count, self.window_size)
    }
}

pub(crate) fn measure_from_table<G: GroupContext>(
    ctx: &G,
    table: &ValueTable<G::Elem>,
    window: &FiniteSet<G::Elem>,
    k: &FiniteSet<G::Elem>,
) -> EmpiricalMeasure<G::Elem> {
    let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    let mut anchor_count = 0u64;
    let mut pattern = Vec::with_capacity(k.len());
    for g in window.iter() {
        pattern.clear();
        let mut in_core = true;
        for h in k.iter() {
            match table.get(ctx, &ctx.multiply(h, g)) {
                Some(v) => pattern.push(v),
                None => {
                    in_core = false;
                    break;
                }
            }
        }
        if in_core {
            anchor_count += 1;
            *counts.entry(pattern.clone()).or_insert(0) += 1;
        }
    }
    let window_size = window.len() as u64;
    EmpiricalMeasure {
        test_domain: k.clone(),
        weights: counts.into_iter().map(|(b, c)| (b, ratio(c, window_size))).collect(),
        anchor_count,
        window_size,
    }
}

/// Empirical measure of `x` on `window` with test domain `K`: pattern
/// weights are anchored-occurrence counts over the K-core of the window,
/// divided by |window|.
pub fn empirical_measure<G: GroupContext>(
    ctx: &G,
    x: &(dyn SymbolicFunction<G> + Sync),
    window: &FiniteSet<G::Elem>,
    k: &FiniteSet<G::Elem>,
) -> Result<EmpiricalMeasure<G::Elem>> {
    if window.is_empty() {
        return Err(Error::Empty("window"));
    }
    let table = ValueTable::build(ctx, x, window.elems(), 1);
    Ok(measure_from_table(ctx, &table, window, k))
}

/// The ordered test catalog of the pseudometric: finite sets K_1, …, K_M
/// with geometric weights u(K_i) = 2^{−i} (so the first entry has weight 1).
#[derive(Clone, Debug)]
pub struct DistCatalog<E: Clone + Eq + Ord + std::hash::Hash> {
    test_sets: Vec<FiniteSet<E>>,
}

impl<E: Clone + Eq + Ord + std::hash::Hash> DistCatalog<E> {
    pub fn new(test_sets: Vec<FiniteSet<E>>) -> Result<DistCatalog<E>> {
        if test_sets.is_empty() {
            return Err(Error::Empty("distance catalog"));
        }
        if test_sets.iter().any(FiniteSet::is_empty) {
            return Err(Error::Empty("distance catalog entry"));
        }
        Ok(DistCatalog { test_sets })
    }

    pub fn test_sets(&self) -> &[FiniteSet<E>] {
        &self.test_sets
    }

    /// Weight of the i-th entry (0-based): 2^{−i}.
    pub fn weight(&self, i: usize) -> Rational {
        Ratio::new(BigInt::from(1), BigInt::from(2).pow(i as u32))
    }
}

/// One side of the pseudometric: an empirical window measure or the uniform
/// Bernoulli reference (every K-pattern weighted |Λ|^{−|K|}).
pub enum MeasureSource<'a, G: GroupContext> {
    Empirical { x: &'a (dyn SymbolicFunction<G> + Sync), window: &'a FiniteSet<G::Elem> },
    Bernoulli { alphabet_size: u8 },
}

impl<'a, G: GroupContext> MeasureSource<'a, G> {
    fn alphabet_size(&self) -> u8 {
        match self {
            MeasureSource::Empirical { x, .. } => x.alphabet().size(),
            MeasureSource::Bernoulli { alphabet_size } => *alphabet_size,
        }
    }
}

/// Catalog pseudometric between two measure sources:
/// max over catalog entries K_i of u(K_i) · sup_B |m1(B) − m2(B)|,
/// where B ranges over all K_i-patterns (unobserved patterns count as
/// weight 0). Exact rational; symmetric; zero iff the sources agree on the
/// whole catalog.
pub fn dist<G: GroupContext>(
    ctx: &G,
    m1: &MeasureSource<'_, G>,
    m2: &MeasureSource<'_, G>,
    catalog: &DistCatalog<G::Elem>,
) -> Result<Rational> {
    let alpha = m1.alphabet_size();
    if alpha != m2.alphabet_size() {
        return Err(Error::Mismatch(format!(
            "alphabet sizes {alpha} and {} in one distance",
            m2.alphabet_size()
        )));
    }
    let table_of = |source: &MeasureSource<'_, G>| -> Result<Option<ValueTable<G::Elem>>> {
        match source {
            MeasureSource::Empirical { x, window } => {
                if window.is_empty() {
                    return Err(Error::Empty("window"));
                }
                Ok(Some(ValueTable::build(ctx, *x, window.elems(), 1)))
            }
            MeasureSource::Bernoulli { .. } => Ok(None),
        }
    };
    let t1 = table_of(m1)?;
    let t2 = table_of(m2)?;

    let mut best = Rational::zero();
    for (i, k) in catalog.test_sets().iter().enumerate() {
        let side = |source: &MeasureSource<'_, G>,
                    table: &Option<ValueTable<G::Elem>>|
         -> Option<BTreeMap<Vec<u8>, Rational>> {
            match (source, table) {
                (MeasureSource::Empirical { window, .. }, Some(table)) => {
                    Some(measure_from_table(ctx, table, window, k).weights)
                }
                _ => None,
            }
        };
        let w1 = side(m1, &t1);
        let w2 = side(m2, &t2);
        let reference = Ratio::new(BigInt::from(1), BigInt::from(alpha).pow(k.len() as u32));
        let pattern_space = BigInt::from(alpha).pow(k.len() as u32);

        let mut sup = Rational::zero();
        let mut consider = |d: Rational| {
            if d > sup {
                sup = d;
            }
        };
        match (&w1, &w2) {
            (Some(a), Some(b)) => {
                for (pattern, wa) in a {
                    let wb = b.get(pattern).cloned().unwrap_or_else(Rational::zero);
                    consider((wa - &wb).abs());
                }
                for (pattern, wb) in b {
                    if !a.contains_key(pattern) {
                        consider(wb.abs());
                    }
                }
            }
            (Some(obs), None) | (None, Some(obs)) => {
                for w in obs.values() {
                    consider((w - &reference).abs());
                }
                // Patterns the window never shows sit at |0 − reference|.
                if BigInt::from(obs.len()) < pattern_space {
                    consider(reference.clone());
                }
            }
            (None, None) => {
                // Two references over the same alphabet agree everywhere.
            }
        }
        let weighted = catalog.weight(i) * sup;
        if weighted > best {
            best = weighted;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Raw stream export
// ---------------------------------------------------------------------------

/// Magic bytes opening the raw stream format.
pub const STREAM_MAGIC: [u8; 4] = *b"FSYM";

/// Write `count` symbols of `x` in canonical enumeration order.
///
/// Format: `FSYM`, format version (1), alphabet size, two reserved zero
/// bytes, symbol count as big-endian u64, then one byte per symbol.
pub fn export_stream<G: GroupContext>(
    ctx: &G,
    x: &dyn SymbolicFunction<G>,
    count: u64,
    out: &mut dyn Write,
) -> io::Result<()> {
    out.write_all(&STREAM_MAGIC)?;
    out.write_all(&[1u8, x.alphabet().size(), 0, 0])?;
    out.write_all(&count.to_be_bytes())?;
    let mut buf = Vec::with_capacity(usize::try_from(count.min(1 << 20)).unwrap_or(0));
    for i in 0..count {
        buf.push(x.eval(ctx, &ctx.enumerate(i)));
        if buf.len() == (1 << 20) {
            out.write_all(&buf)?;
            buf.clear();
        }
    }
    out.write_all(&buf)
}
