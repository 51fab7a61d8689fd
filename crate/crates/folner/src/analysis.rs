//! Normality tests along a set (simple, orbit, block flavors), classical
//! normality along a subsequence, block complexity, windowed ε-complexity,
//! rate profiles, Shannon and tile entropy, the exhaustive low-entropy block
//! census, and the normality-preservation experiment.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::folner::{density, DensityMode, FolnerSequence, Rational};
use crate::generators::indicator_symbolic;
use crate::group::{FiniteSet, GroupContext, SubsetPredicate};
use crate::scan::{map_chunks, merge_counts};
use crate::symbolic::{Block, Symbolic, SymbolicFunction};
use crate::tilings::WindowTiling;

// ---------------------------------------------------------------------------
// Numeric formatting shared by every textual report
// ---------------------------------------------------------------------------

/// Fixed-point decimal with 12 significant digits — the one number format
/// used in all reports, so output is reproducible byte-for-byte.
pub fn fmt_sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (11 - exponent).clamp(0, 40) as usize;
    format!("{x:.decimals$}")
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn rational_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

/// Shannon entropy −Σ p log₂ p of a finite distribution, in bits. Weights
/// must be nonnegative and sum to at most 1 + 1e−12; they are renormalized
/// by their sum, and 0·log 0 = 0.
pub fn shannon_entropy(weights: &[f64]) -> Result<f64> {
    if let Some(&bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::Invalid(format!("weight {bad} is not a probability")));
    }
    let total: f64 = weights.iter().sum();
    if total > 1.0 + 1e-12 {
        return Err(Error::Invalid(format!("weights sum to {total} > 1")));
    }
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum())
}

/// Entropy of an integer-count histogram, computed as
/// log₂ m − (Σ nᵢ log₂ nᵢ)/m with m = Σ nᵢ. This form is exact in f64 for
/// the power-of-two histograms the tests pin (it avoids dividing before
/// taking logarithms).
pub fn entropy_of_counts<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    let counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let m = total as f64;
    let weighted: f64 = counts.iter().map(|&c| (c as f64) * (c as f64).log2()).sum();
    m.log2() - weighted / m
}

// ---------------------------------------------------------------------------
// Anchored block counting (shared scan machinery)
// ---------------------------------------------------------------------------

/// Exhaustively tabulated values of a symbolic function over one contiguous
/// index range of a dense carrier.
pub(crate) struct DenseVals {
    base: i64,
    vals: Vec<u8>,
}

const DENSE_SPAN_CAP: i64 = 1 << 27;

/// Tabulate `x` over the index range [lo, hi] when the carrier is densely
/// indexed and the span is affordable; `None` falls back to direct
/// evaluation.
pub(crate) fn build_dense_vals<G: GroupContext>(
    ctx: &G,
    x: &(dyn SymbolicFunction<G> + Sync),
    lo: i64,
    hi: i64,
    workers: usize,
) -> Option<DenseVals> {
    if hi < lo || hi - lo + 1 > DENSE_SPAN_CAP {
        return None;
    }
    ctx.from_index(lo)?;
    ctx.from_index(hi)?;
    let indices: Vec<i64> = (lo..=hi).collect();
    let chunks = map_chunks(&indices, workers, |chunk| {
        chunk
            .iter()
            .map(|&i| {
                let e = ctx.from_index(i).expect("index range validated at both ends");
                x.eval(ctx, &e)
            })
            .collect::<Vec<u8>>()
    });
    let mut vals = Vec::with_capacity(indices.len());
    for chunk in chunks {
        vals.extend_from_slice(&chunk);
    }
    Some(DenseVals { base: lo, vals })
}

/// Counts of anchored blocks over one window scan: how many anchors carry
/// each distinct pattern `g ↦ (x(k·g))_{k∈K}`. Keys are packed into a u64
/// when the pattern fits, sparing per-anchor allocations.
pub(crate) enum BlockCounts {
    Packed { bits: u32, len: usize, map: HashMap<u64, u64> },
    Keyed(HashMap<Vec<u8>, u64>),
}

fn symbol_bits(alphabet_size: u8) -> u32 {
    (8 - (alphabet_size.max(2) - 1).leading_zeros()).max(1)
}

impl BlockCounts {
    pub(crate) fn distinct(&self) -> u64 {
        match self {
            BlockCounts::Packed { map, .. } => map.len() as u64,
            BlockCounts::Keyed(map) => map.len() as u64,
        }
    }

    pub(crate) fn total(&self) -> u64 {
        match self {
            BlockCounts::Packed { map, .. } => map.values().sum(),
            BlockCounts::Keyed(map) => map.values().sum(),
        }
    }

    fn unpack(bits: u32, len: usize, key: u64) -> Vec<u8> {
        (0..len)
            .map(|i| ((key >> (bits as usize * (len - 1 - i))) & ((1 << bits) - 1)) as u8)
            .collect()
    }

    /// All (pattern, count) pairs sorted ascending by count, ties broken by
    /// the canonical pattern — the discard order of the ε-complexity greedy.
    pub(crate) fn sorted_ascending(&self) -> Vec<(Vec<u8>, u64)> {
        let mut rows: Vec<(Vec<u8>, u64)> = match self {
            BlockCounts::Packed { bits, len, map } => map
                .iter()
                .map(|(&key, &cnt)| (BlockCounts::unpack(*bits, *len, key), cnt))
                .collect(),
            BlockCounts::Keyed(map) => map.iter().map(|(k, &c)| (k.clone(), c)).collect(),
        };
        rows.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        rows
    }

    /// sup over all |Λ|^|K| patterns of |observed/N − |Λ|^{−|K|}|, with the
    /// reference itself as the deviation of every unobserved pattern.
    /// Returns (sup, reference); N is the total anchor count.
    fn deviation_sup(&self, alphabet_size: u8, k_len: usize) -> (Rational, Rational) {
        let space = BigUint::from(alphabet_size).pow(k_len as u32);
        let reference = Ratio::new(BigInt::one(), BigInt::from(space.clone()));
        let n = self.total();
        if n == 0 {
            return (Rational::zero(), reference);
        }
        let counts: Vec<u64> = match self {
            BlockCounts::Packed { map, .. } => map.values().copied().collect(),
            BlockCounts::Keyed(map) => map.values().copied().collect(),
        };
        let mut sup = Rational::zero();
        for c in &counts {
            let dev = (Ratio::new(BigInt::from(*c), BigInt::from(n)) - &reference).abs();
            if dev > sup {
                sup = dev;
            }
        }
        if BigUint::from(counts.len() as u64) < space && reference > sup {
            sup = reference.clone();
        }
        (sup, reference)
    }
}

/// A reusable scan over one fixed anchor list: counts anchored blocks for
/// any test domain K, reading values from a shared dense table when one is
/// available and evaluating directly otherwise.
pub(crate) struct AnchorScan<'a, G: GroupContext> {
    ctx: &'a G,
    x: &'a (dyn SymbolicFunction<G> + Sync),
    anchors: Vec<G::Elem>,
    anchor_idx: Option<Vec<i64>>,
    table: Option<&'a DenseVals>,
    workers: usize,
}

impl<'a, G: GroupContext> AnchorScan<'a, G> {
    pub(crate) fn new(
        ctx: &'a G,
        x: &'a (dyn SymbolicFunction<G> + Sync),
        anchors: Vec<G::Elem>,
        table: Option<&'a DenseVals>,
        workers: usize,
    ) -> AnchorScan<'a, G> {
        let anchor_idx = anchors.iter().map(|g| ctx.to_index(g)).collect::<Option<Vec<i64>>>();
        AnchorScan { ctx, x, anchors, anchor_idx, table, workers }
    }

    pub(crate) fn counts(&self, k: &FiniteSet<G::Elem>) -> Result<BlockCounts> {
        if k.is_empty() {
            return Err(Error::Empty("test domain"));
        }
        let k_elems: Vec<&G::Elem> = k.iter().collect();
        let bits = symbol_bits(self.x.alphabet().size());
        let packed = bits as usize * k_elems.len() <= 64;
        let offsets: Option<Vec<i64>> =
            k_elems.iter().map(|e| self.ctx.to_index(e)).collect();
        match (&self.table, &self.anchor_idx, offsets) {
            (Some(table), Some(anchor_idx), Some(offsets)) => {
                let read = |ai: i64, off: i64| -> u8 {
                    let pos = ai + off - table.base;
                    table.vals[pos as usize]
                };
                if packed {
                    let maps = map_chunks(anchor_idx, self.workers, |chunk| {
                        let mut map: HashMap<u64, u64> = HashMap::new();
                        for &ai in chunk {
                            let mut key = 0u64;
                            for &off in &offsets {
                                key = (key << bits) | read(ai, off) as u64;
                            }
                            *map.entry(key).or_insert(0) += 1;
                        }
                        map
                    });
                    Ok(BlockCounts::Packed {
                        bits,
                        len: k_elems.len(),
                        map: merge_counts(maps),
                    })
                } else {
                    let maps = map_chunks(anchor_idx, self.workers, |chunk| {
                        let mut map: HashMap<Vec<u8>, u64> = HashMap::new();
                        for &ai in chunk {
                            let key: Vec<u8> =
                                offsets.iter().map(|&off| read(ai, off)).collect();
                            *map.entry(key).or_insert(0) += 1;
                        }
                        map
                    });
                    Ok(BlockCounts::Keyed(merge_counts(maps)))
                }
            }
            _ => {
                let eval =
                    |g: &G::Elem, k: &G::Elem| self.x.eval(self.ctx, &self.ctx.multiply(k, g));
                if packed {
                    let maps = map_chunks(&self.anchors, self.workers, |chunk| {
                        let mut map: HashMap<u64, u64> = HashMap::new();
                        for g in chunk {
                            let mut key = 0u64;
                            for k in &k_elems {
                                key = (key << bits) | eval(g, k) as u64;
                            }
                            *map.entry(key).or_insert(0) += 1;
                        }
                        map
                    });
                    Ok(BlockCounts::Packed {
                        bits,
                        len: k_elems.len(),
                        map: merge_counts(maps),
                    })
                } else {
                    let maps = map_chunks(&self.anchors, self.workers, |chunk| {
                        let mut map: HashMap<Vec<u8>, u64> = HashMap::new();
                        for g in chunk {
                            let key: Vec<u8> = k_elems.iter().map(|k| eval(g, k)).collect();
                            *map.entry(key).or_insert(0) += 1;
                        }
                        map
                    });
                    Ok(BlockCounts::Keyed(merge_counts(maps)))
                }
            }
        }
    }
}

/// Min and max carrier index over a stream of elements, when every element
/// is densely indexed.
fn index_extent<'e, G: GroupContext>(
    ctx: &G,
    elems: impl IntoIterator<Item = &'e G::Elem>,
) -> Option<(i64, i64)> {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    let mut any = false;
    for e in elems {
        let i = ctx.to_index(e)?;
        lo = lo.min(i);
        hi = hi.max(i);
        any = true;
    }
    any.then_some((lo, hi))
}

/// Human-readable label for a finite test set: an index interval when the
/// set is one, a braced list otherwise.
pub(crate) fn set_label<G: GroupContext>(ctx: &G, set: &FiniteSet<G::Elem>) -> String {
    let elems: Vec<&G::Elem> = set.iter().collect();
    if let (Some(first), Some(last)) = (elems.first(), elems.last()) {
        if let (Some(lo), Some(hi)) = (ctx.to_index(first), ctx.to_index(last)) {
            if hi - lo + 1 == elems.len() as i64 {
                return format!("[{lo},{hi}]");
            }
        }
    }
    let shown: Vec<String> = elems.iter().take(6).map(|e| ctx.show(e)).collect();
    if elems.len() > 6 {
        format!("{{{},…}} ({} elems)", shown.join(","), elems.len())
    } else {
        format!("{{{}}}", shown.join(","))
    }
}

// ---------------------------------------------------------------------------
// Normality reports
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalityMode {
    Simple,
    Orbit,
    Block,
    Classical,
}

impl NormalityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NormalityMode::Simple => "simple",
            NormalityMode::Orbit => "orbit",
            NormalityMode::Block => "block",
            NormalityMode::Classical => "classical",
        }
    }
}

/// One test row: a domain (symbol or test set K), the sup deviation of the
/// observed distribution from the uniform reference |Λ|^{−|K|}, and the
/// anchors that produced it. Block mode adds the visibility ratio and may
/// mark a row skipped (below the visibility floor) rather than failed.
#[derive(Clone, Debug)]
pub struct NormalityTest {
    pub domain: String,
    pub domain_size: usize,
    pub deviation: Rational,
    pub reference: Rational,
    pub anchors: u64,
    pub visibility: Option<Rational>,
    pub skipped: bool,
}

/// Outcome of one normality run: pass iff every non-skipped deviation is
/// within tolerance. Deviations are exact rationals; the tolerance is the
/// dyadic rational of the given f64.
#[derive(Clone, Debug)]
pub struct NormalityReport {
    pub mode: NormalityMode,
    pub window: String,
    pub anchor_count: u64,
    pub tolerance: f64,
    pub tests: Vec<NormalityTest>,
    pub verdict: bool,
}

impl NormalityReport {
    fn assemble(
        mode: NormalityMode,
        window: String,
        anchor_count: u64,
        tolerance: f64,
        tests: Vec<NormalityTest>,
    ) -> Result<NormalityReport> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::Invalid(format!("tolerance {tolerance} must be >= 0")));
        }
        let tol = Rational::from_float(tolerance)
            .ok_or_else(|| Error::Invalid("tolerance out of range".into()))?;
        let verdict = tests.iter().all(|t| t.skipped || t.deviation <= tol);
        Ok(NormalityReport { mode, window, anchor_count, tolerance, tests, verdict })
    }

    /// Largest non-skipped deviation (0 when everything was skipped).
    pub fn max_deviation(&self) -> Rational {
        self.tests
            .iter()
            .filter(|t| !t.skipped)
            .map(|t| t.deviation.clone())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Report as a deterministic JSON object. Always present:
    /// mode, window, anchor_count, tolerance, verdict, and one test row per
    /// domain with {domain, deviation, reference}. Block mode extends each
    /// row with {anchors, visibility, skipped}.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"mode\": \"{}\",\n", self.mode.as_str()));
        out.push_str(&format!("  \"window\": \"{}\",\n", json_escape(&self.window)));
        out.push_str(&format!("  \"anchor_count\": {},\n", self.anchor_count));
        out.push_str(&format!("  \"tolerance\": {},\n", fmt_sig12(self.tolerance)));
        out.push_str("  \"tests\": [\n");
        for (i, t) in self.tests.iter().enumerate() {
            out.push_str(&format!(
                "    {{\"domain\": \"{}\", \"deviation\": {}, \"reference\": {}",
                json_escape(&t.domain),
                fmt_sig12(rational_f64(&t.deviation)),
                fmt_sig12(rational_f64(&t.reference)),
            ));
            if self.mode == NormalityMode::Block {
                let vis = t.visibility.clone().unwrap_or_else(Rational::zero);
                out.push_str(&format!(
                    ", \"anchors\": {}, \"visibility\": {}, \"skipped\": {}",
                    t.anchors,
                    fmt_sig12(rational_f64(&vis)),
                    t.skipped
                ));
            }
            out.push_str(if i + 1 < self.tests.len() { "},\n" } else { "}\n" });
        }
        out.push_str("  ],\n");
        out.push_str(&format!(
            "  \"verdict\": \"{}\"\n",
            if self.verdict { "pass" } else { "fail" }
        ));
        out.push('}');
        out
    }
}

fn window_label<G: GroupContext>(folner: &FolnerSequence<G>, n: u32, size: usize) -> String {
    format!("{}(n={n}), size {size}", folner.descriptor())
}

/// Anchors of the window intersected with A, in canonical window order.
fn window_anchors<G: GroupContext>(
    ctx: &G,
    a: &SubsetPredicate<G>,
    window: &FiniteSet<G::Elem>,
) -> Result<Vec<G::Elem>> {
    let anchors: Vec<G::Elem> =
        window.iter().filter(|g| a.contains(ctx, g)).cloned().collect();
    if anchors.is_empty() {
        return Err(Error::Empty("window-set intersection"));
    }
    Ok(anchors)
}

/// Simple normality along A: symbol frequencies of y over F_n ∩ A against
/// the uniform reference 1/|Λ|, one test row per symbol.
pub fn simple_normality<G: GroupContext>(
    ctx: &G,
    y: &Symbolic<G>,
    a: &SubsetPredicate<G>,
    folner: &FolnerSequence<G>,
    n: u32,
    tol: f64,
    workers: usize,
) -> Result<NormalityReport> {
    let window = folner.at(ctx, n)?;
    let anchors = window_anchors(ctx, a, &window)?;
    let values = crate::scan::window_values(ctx, y.as_ref(), &anchors, workers);
    let size = y.alphabet().size();
    let mut counts = vec![0u64; size as usize];
    for v in values {
        counts[v as usize] += 1;
    }
    let n_anchors = anchors.len() as u64;
    let reference = Ratio::new(BigInt::one(), BigInt::from(size));
    let tests = (0..size)
        .map(|sym| {
            let observed = Ratio::new(BigInt::from(counts[sym as usize]), BigInt::from(n_anchors));
            NormalityTest {
                domain: y.alphabet().name(sym).to_string(),
                domain_size: 1,
                deviation: (observed - &reference).abs(),
                reference: reference.clone(),
                anchors: n_anchors,
                visibility: None,
                skipped: false,
            }
        })
        .collect();
    NormalityReport::assemble(
        NormalityMode::Simple,
        window_label(folner, n, window.len()),
        n_anchors,
        tol,
        tests,
    )
}

/// Orbit normality along A: for every catalog domain K, the distribution of
/// anchored blocks y|_{Kg} over g ∈ F_n ∩ A against the uniform reference
/// |Λ|^{−|K|} (unobserved blocks deviate by the reference itself).
#[allow(clippy::too_many_arguments)]
pub fn orbit_normality<G: GroupContext>(
    ctx: &G,
    y: &Symbolic<G>,
    a: &SubsetPredicate<G>,
    folner: &FolnerSequence<G>,
    n: u32,
    catalog: &[FiniteSet<G::Elem>],
    tol: f64,
    workers: usize,
) -> Result<NormalityReport> {
    if catalog.is_empty() {
        return Err(Error::Empty("test-domain catalog"));
    }
    let window = folner.at(ctx, n)?;
    let anchors = window_anchors(ctx, a, &window)?;
    let n_anchors = anchors.len() as u64;
    let table = match (
        index_extent(ctx, &anchors),
        index_extent(ctx, catalog.iter().flat_map(|k| k.iter())),
    ) {
        (Some((alo, ahi)), Some((klo, khi))) => {
            build_dense_vals(ctx, y.as_ref(), alo + klo, ahi + khi, workers)
        }
        _ => None,
    };
    let scan = AnchorScan::new(ctx, y.as_ref(), anchors, table.as_ref(), workers);
    let mut tests = Vec::with_capacity(catalog.len());
    for k in catalog {
        let counts = scan.counts(k)?;
        let (deviation, reference) = counts.deviation_sup(y.alphabet().size(), k.len());
        tests.push(NormalityTest {
            domain: set_label(ctx, k),
            domain_size: k.len(),
            deviation,
            reference,
            anchors: n_anchors,
            visibility: None,
            skipped: false,
        });
    }
    NormalityReport::assemble(
        NormalityMode::Orbit,
        window_label(folner, n, window.len()),
        n_anchors,
        tol,
        tests,
    )
}

/// Block normality along A: anchors are restricted per domain K to
/// A_K = {g ∈ A : Kg ⊆ A}, whose share of F_n ∩ A is the visibility ratio.
/// Domains whose measured visibility falls below `visibility_floor` are
/// reported as skipped, not failed.
#[allow(clippy::too_many_arguments)]
pub fn block_normality<G: GroupContext>(
    ctx: &G,
    y: &Symbolic<G>,
    a: &SubsetPredicate<G>,
    folner: &FolnerSequence<G>,
    n: u32,
    catalog: &[FiniteSet<G::Elem>],
    tol: f64,
    visibility_floor: f64,
    workers: usize,
) -> Result<NormalityReport> {
    if catalog.is_empty() {
        return Err(Error::Empty("test-domain catalog"));
    }
    if !(visibility_floor.is_finite() && (0.0..=1.0).contains(&visibility_floor)) {
        return Err(Error::Invalid(format!("visibility floor {visibility_floor}")));
    }
    let floor = Rational::from_float(visibility_floor)
        .ok_or_else(|| Error::Invalid("visibility floor out of range".into()))?;
    let window = folner.at(ctx, n)?;
    let anchors = window_anchors(ctx, a, &window)?;
    let n_anchors = anchors.len() as u64;
    let table = match (
        index_extent(ctx, &anchors),
        index_extent(ctx, catalog.iter().flat_map(|k| k.iter())),
    ) {
        (Some((alo, ahi)), Some((klo, khi))) => {
            build_dense_vals(ctx, y.as_ref(), alo + klo, ahi + khi, workers)
        }
        _ => None,
    };
    let mut tests = Vec::with_capacity(catalog.len());
    for k in catalog {
        if k.is_empty() {
            return Err(Error::Empty("test domain"));
        }
        let visible: Vec<G::Elem> = {
            let parts = map_chunks(&anchors, workers, |chunk| {
                chunk
                    .iter()
                    .filter(|g| k.iter().all(|kk| a.contains(ctx, &ctx.multiply(kk, g))))
                    .cloned()
                    .collect::<Vec<_>>()
            });
            parts.into_iter().flatten().collect()
        };
        let visibility = Ratio::new(BigInt::from(visible.len()), BigInt::from(n_anchors));
        if visibility < floor {
            tests.push(NormalityTest {
                domain: set_label(ctx, k),
                domain_size: k.len(),
                deviation: Rational::zero(),
                reference: Ratio::new(
                    BigInt::one(),
                    BigInt::from(BigUint::from(y.alphabet().size()).pow(k.len() as u32)),
                ),
                anchors: visible.len() as u64,
                visibility: Some(visibility),
                skipped: true,
            });
            continue;
        }
        let visible_count = visible.len() as u64;
        let scan = AnchorScan::new(ctx, y.as_ref(), visible, table.as_ref(), workers);
        let counts = scan.counts(k)?;
        let (deviation, reference) = counts.deviation_sup(y.alphabet().size(), k.len());
        tests.push(NormalityTest {
            domain: set_label(ctx, k),
            domain_size: k.len(),
            deviation,
            reference,
            anchors: visible_count,
            visibility: Some(visibility),
            skipped: false,
        });
    }
    NormalityReport::assemble(
        NormalityMode::Block,
        window_label(folner, n, window.len()),
        n_anchors,
        tol,
        tests,
    )
}

/// Classical normality along A ⊆ ℕ: reads y along the increasing
/// enumeration of A up to the horizon and tests the block statistics of the
/// selected word at every length 1..=m_max against 2^{−m}. The selection is
/// extended past the horizon by up to m_max − 1 terms so that every block
/// length is tested over the same anchor count whenever A continues.
pub fn classical_normality_along<G: GroupContext>(
    ctx: &G,
    y: &Symbolic<G>,
    a: &SubsetPredicate<G>,
    m_max: usize,
    horizon: u64,
    tol: f64,
) -> Result<NormalityReport> {
    if m_max == 0 {
        return Err(Error::Invalid("m_max must be >= 1".into()));
    }
    let mut selected: Vec<u8> = Vec::new();
    let mut base_count = 0usize;
    let mut i: u64 = 0;
    loop {
        let g = ctx.from_index(i as i64).ok_or_else(|| {
            Error::Invalid(format!("carrier {} is not indexed by naturals", ctx.name()))
        })?;
        if a.contains(ctx, &g) {
            selected.push(y.eval(ctx, &g));
        }
        if i == horizon {
            base_count = selected.len();
        }
        i += 1;
        // Past the horizon, scan on (bounded) for m_max − 1 extension terms.
        if i > horizon {
            let done = selected.len() >= base_count + m_max - 1;
            let exhausted = i > horizon.saturating_mul(16).saturating_add(65_536);
            if done || exhausted {
                break;
            }
        }
    }
    if base_count < m_max {
        return Err(Error::Invalid(format!(
            "only {base_count} selected terms within the horizon, need m_max = {m_max}"
        )));
    }
    let mut tests = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let anchors = base_count.min(selected.len() + 1 - m);
        let mut map: HashMap<Vec<u8>, u64> = HashMap::new();
        for j in 0..anchors {
            *map.entry(selected[j..j + m].to_vec()).or_insert(0) += 1;
        }
        let counts = BlockCounts::Keyed(map);
        let (deviation, reference) = counts.deviation_sup(y.alphabet().size(), m);
        tests.push(NormalityTest {
            domain: format!("[0,{}]", m - 1),
            domain_size: m,
            deviation,
            reference,
            anchors: anchors as u64,
            visibility: None,
            skipped: false,
        });
    }
    NormalityReport::assemble(
        NormalityMode::Classical,
        format!("selection within [0,{horizon}], {base_count} terms"),
        base_count as u64,
        tol,
        tests,
    )
}

// ---------------------------------------------------------------------------
// Complexity
// ---------------------------------------------------------------------------

/// Number of distinct anchored blocks x|_{Kg} over the given anchors
/// (optionally restricted to anchors inside A). Exact within the window.
pub fn block_complexity<G: GroupContext>(
    ctx: &G,
    x: &Symbolic<G>,
    k: &FiniteSet<G::Elem>,
    anchors: &FiniteSet<G::Elem>,
    a: Option<&SubsetPredicate<G>>,
    workers: usize,
) -> Result<u64> {
    if anchors.is_empty() {
        return Err(Error::Empty("anchor set"));
    }
    let kept: Vec<G::Elem> = match a {
        Some(pred) => anchors.iter().filter(|g| pred.contains(ctx, g)).cloned().collect(),
        None => anchors.iter().cloned().collect(),
    };
    if kept.is_empty() {
        return Ok(0);
    }
    let table = match (index_extent(ctx, &kept), index_extent(ctx, k.iter())) {
        (Some((alo, ahi)), Some((klo, khi))) => {
            build_dense_vals(ctx, x.as_ref(), alo + klo, ahi + khi, workers)
        }
        _ => None,
    };
    let scan = AnchorScan::new(ctx, x.as_ref(), kept, table.as_ref(), workers);
    Ok(scan.counts(k)?.distinct())
}

/// Result of the windowed ε-complexity greedy: surviving distinct-block
/// count after discarding rare blocks whose total anchor mass stays within
/// ε·(window size).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsComplexity {
    pub count: u64,
    pub surviving_density: Rational,
    pub total_anchors: u64,
    pub discarded_anchors: u64,
    pub discarded_blocks: u64,
}

/// ε-complexity over an explicit anchor window (the window itself is the
/// anchor set). Blocks are discarded in ascending (anchor count, canonical
/// pattern) order while the cumulative discarded mass stays ≤ ε·N, stopping
/// at the first block that does not fit. Within the window this greedy is
/// exactly optimal: removing a block always costs its anchor mass and saves
/// exactly one from the count.
pub fn eps_complexity_over<G: GroupContext>(
    ctx: &G,
    x: &Symbolic<G>,
    k: &FiniteSet<G::Elem>,
    window: &FiniteSet<G::Elem>,
    eps: &Rational,
    workers: usize,
) -> Result<EpsComplexity> {
    if eps < &Rational::zero() || eps >= &Rational::one() {
        return Err(Error::Invalid(format!("epsilon {eps} outside [0, 1)")));
    }
    if window.is_empty() {
        return Err(Error::Empty("anchor window"));
    }
    let anchors: Vec<G::Elem> = window.iter().cloned().collect();
    let table = match (index_extent(ctx, window.iter()), index_extent(ctx, k.iter())) {
        (Some((alo, ahi)), Some((klo, khi))) => {
            build_dense_vals(ctx, x.as_ref(), alo + klo, ahi + khi, workers)
        }
        _ => None,
    };
    let scan = AnchorScan::new(ctx, x.as_ref(), anchors, table.as_ref(), workers);
    let counts = scan.counts(k)?;
    let total = counts.total();
    let budget = eps * Rational::from(BigInt::from(total));
    let mut discarded_anchors = 0u64;
    let mut discarded_blocks = 0u64;
    for (_, cnt) in counts.sorted_ascending() {
        let next = Rational::from(BigInt::from(discarded_anchors + cnt));
        if next <= budget {
            discarded_anchors += cnt;
            discarded_blocks += 1;
        } else {
            break;
        }
    }
    Ok(EpsComplexity {
        count: counts.distinct() - discarded_blocks,
        surviving_density: Ratio::new(BigInt::from(total - discarded_anchors), BigInt::from(total)),
        total_anchors: total,
        discarded_anchors,
        discarded_blocks,
    })
}

/// ε-complexity within the Følner window F_n.
pub fn eps_complexity<G: GroupContext>(
    ctx: &G,
    x: &Symbolic<G>,
    k: &FiniteSet<G::Elem>,
    folner: &FolnerSequence<G>,
    n: u32,
    eps: &Rational,
    workers: usize,
) -> Result<EpsComplexity> {
    let window = folner.at(ctx, n)?;
    eps_complexity_over(ctx, x, k, &window, eps, workers)
}

/// One row of a complexity profile.
#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub level: u32,
    pub domain: String,
    pub domain_size: usize,
    pub count: u64,
    pub ratio: f64,
    pub surviving_density: Option<Rational>,
}

/// Complexity counts and log-ratios over a growing chain of test domains.
/// Counts over a fixed window only see blocks the window realizes, so every
/// row is a lower bound for the limit complexity — see
/// [`RATE_LOWER_BOUND_NOTE`], which all renderings carry.
#[derive(Clone, Debug)]
pub struct ComplexityProfile {
    pub rows: Vec<ProfileRow>,
    pub eps: Option<Rational>,
}

/// Caveat attached to every profile rendering.
pub const RATE_LOWER_BOUND_NOTE: &str =
    "block counts over a fixed window are lower bounds for the limit complexity";

impl ComplexityProfile {
    /// CSV with columns m, domain_size, count, ratio (and surviving_density
    /// when ε was set), preceded by the lower-bound note as a comment line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {RATE_LOWER_BOUND_NOTE}\n"));
        if self.eps.is_some() {
            out.push_str("m,domain_size,count,ratio,surviving_density\n");
        } else {
            out.push_str("m,domain_size,count,ratio\n");
        }
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}",
                row.level,
                row.domain_size,
                row.count,
                fmt_sig12(row.ratio)
            ));
            if self.eps.is_some() {
                let d = row.surviving_density.clone().unwrap_or_else(Rational::one);
                out.push_str(&format!(",{}", fmt_sig12(rational_f64(&d))));
            }
            out.push('\n');
        }
        out
    }

    /// Deterministic JSON object with the note, optional ε, and rows.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"note\": \"{}\",\n", json_escape(RATE_LOWER_BOUND_NOTE)));
        if let Some(eps) = &self.eps {
            out.push_str(&format!("  \"epsilon\": {},\n", fmt_sig12(rational_f64(eps))));
        }
        out.push_str("  \"rows\": [\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "    {{\"m\": {}, \"domain\": \"{}\", \"domain_size\": {}, \"count\": {}, \"ratio\": {}",
                row.level,
                json_escape(&row.domain),
                row.domain_size,
                row.count,
                fmt_sig12(row.ratio)
            ));
            if let Some(d) = &row.surviving_density {
                out.push_str(&format!(", \"surviving_density\": {}", fmt_sig12(rational_f64(d))));
            }
            out.push_str(if i + 1 < self.rows.len() { "},\n" } else { "}\n" });
        }
        out.push_str("  ]\n}");
        out
    }
}

/// Complexity profile over a strictly growing chain K_1 ⊂ K_2 ⊂ …: counts
/// per level with ratios log₂C/|K_m|. With ε set, counts come from the
/// windowed ε-complexity greedy over the anchor set.
pub fn rate_profile<G: GroupContext>(
    ctx: &G,
    x: &Symbolic<G>,
    domains: &[FiniteSet<G::Elem>],
    anchors: &FiniteSet<G::Elem>,
    eps: Option<&Rational>,
    workers: usize,
) -> Result<ComplexityProfile> {
    if domains.is_empty() {
        return Err(Error::Empty("domain chain"));
    }
    for pair in domains.windows(2) {
        if !(pair[0].is_subset_of(&pair[1]) && pair[0].len() < pair[1].len()) {
            return Err(Error::Invalid(
                "domain chain must be strictly increasing under inclusion".into(),
            ));
        }
    }
    if anchors.is_empty() {
        return Err(Error::Empty("anchor set"));
    }
    let table = match (
        index_extent(ctx, anchors.iter()),
        index_extent(ctx, domains.iter().flat_map(|k| k.iter())),
    ) {
        (Some((alo, ahi)), Some((klo, khi))) => {
            build_dense_vals(ctx, x.as_ref(), alo + klo, ahi + khi, workers)
        }
        _ => None,
    };
    let anchor_list: Vec<G::Elem> = anchors.iter().cloned().collect();
    let scan = AnchorScan::new(ctx, x.as_ref(), anchor_list, table.as_ref(), workers);
    let mut rows = Vec::with_capacity(domains.len());
    for (i, k) in domains.iter().enumerate() {
        let (count, surviving) = match eps {
            None => (scan.counts(k)?.distinct(), None),
            Some(eps) => {
                let result = eps_complexity_over(ctx, x, k, anchors, eps, workers)?;
                (result.count, Some(result.surviving_density))
            }
        };
        rows.push(ProfileRow {
            level: (i + 1) as u32,
            domain: set_label(ctx, k),
            domain_size: k.len(),
            count,
            ratio: (count as f64).log2() / k.len() as f64,
            surviving_density: surviving,
        });
    }
    Ok(ComplexityProfile { rows, eps: eps.cloned() })
}

// ---------------------------------------------------------------------------
// Tile entropy and the census
// ---------------------------------------------------------------------------

/// Tile entropy of a block against a tiling of its domain, in bits per
/// cell: Σ over shapes S of (tiles of shape S / window size) × entropy of
/// the distribution of sub-block patterns carried by those tiles.
pub fn tile_entropy<G: GroupContext>(
    ctx: &G,
    block: &Block<G::Elem>,
    tiling: &WindowTiling<G>,
) -> Result<f64> {
    if tiling.window() != block.domain() {
        return Err(Error::Mismatch(
            "tiling window differs from the block domain".into(),
        ));
    }
    let mut per_shape: HashMap<usize, HashMap<Vec<u8>, u64>> = HashMap::new();
    for i in 0..tiling.tiles().len() {
        let (shape_idx, _) = tiling.tiles()[i];
        let pattern: Vec<u8> = tiling
            .tile_cells(ctx, i)
            .iter()
            .map(|cell| {
                block
                    .value_at(cell)
                    .ok_or_else(|| Error::Mismatch("tile cell outside the block".into()))
            })
            .collect::<Result<_>>()?;
        *per_shape.entry(shape_idx).or_default().entry(pattern).or_insert(0) += 1;
    }
    let window_size = tiling.window().len() as f64;
    let mut total = 0.0;
    for histogram in per_shape.values() {
        let tiles_of_shape: u64 = histogram.values().sum();
        let weight = tiles_of_shape as f64 / window_size;
        total += weight * entropy_of_counts(histogram.values().copied());
    }
    Ok(total)
}

/// Census guard: a block qualifies when its tile entropy is ≤ c + 1e−9,
/// absorbing the one-ulp noise of f64 logarithms at exact thresholds.
pub const CENSUS_ENTROPY_GUARD: f64 = 1e-9;

/// Exhaustive census of low-tile-entropy blocks: over all |Λ|^size words on
/// an interval, count those whose tile entropy with respect to the
/// length-`subtile` partition is at most c (within the fixed guard).
/// Returns (count, log₂count/size).
pub fn counting_census(
    alphabet_size: u8,
    size: usize,
    subtile: usize,
    c: f64,
) -> Result<(u64, f64)> {
    if alphabet_size < 2 {
        return Err(Error::Invalid("alphabet needs at least 2 symbols".into()));
    }
    if size == 0 || subtile == 0 || size % subtile != 0 {
        return Err(Error::Invalid(format!(
            "subtile length {subtile} must divide the block size {size}"
        )));
    }
    let space = (alphabet_size as u128).checked_pow(size as u32);
    match space {
        Some(s) if s <= 1 << 20 => {}
        _ => {
            return Err(Error::TooLarge(format!(
                "census space {}^{size} exceeds 2^20",
                alphabet_size
            )))
        }
    }
    let tiles = size / subtile;
    let mut word = vec![0u8; size];
    let mut count = 0u64;
    loop {
        // Entropy of the sub-word histogram, scaled to bits per cell.
        let mut subs: Vec<&[u8]> = word.chunks(subtile).collect();
        subs.sort();
        let mut counts: Vec<u64> = Vec::with_capacity(tiles);
        let mut run = 1u64;
        for i in 1..subs.len() {
            if subs[i] == subs[i - 1] {
                run += 1;
            } else {
                counts.push(run);
                run = 1;
            }
        }
        counts.push(run);
        let entropy = entropy_of_counts(counts) / subtile as f64;
        if entropy <= c + CENSUS_ENTROPY_GUARD {
            count += 1;
        }
        // Odometer step over the word space.
        let mut pos = size;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            word[pos] += 1;
            if word[pos] < alphabet_size {
                break;
            }
            word[pos] = 0;
        }
        if pos == 0 && word[0] == 0 {
            break;
        }
    }
    let ratio = (count as f64).log2() / size as f64;
    Ok((count, ratio))
}

// ---------------------------------------------------------------------------
// Preservation experiment
// ---------------------------------------------------------------------------

/// Bundle of the three normality tests of y along A, the lower/upper
/// densities of A, and the complexity profile of A's indicator — the
/// ingredients for eyeballing "low-rate A with positive lower density
/// preserves normality".
#[derive(Clone, Debug)]
pub struct PreservationBundle {
    pub simple: NormalityReport,
    pub orbit: NormalityReport,
    pub block: NormalityReport,
    pub lower_density: Rational,
    pub upper_density: Rational,
    pub profile: ComplexityProfile,
    pub verdict: bool,
}

impl PreservationBundle {
    pub fn to_json(&self) -> String {
        let indent = |s: &str| s.replace('\n', "\n  ");
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"simple\": {},\n", indent(&self.simple.to_json())));
        out.push_str(&format!("  \"orbit\": {},\n", indent(&self.orbit.to_json())));
        out.push_str(&format!("  \"block\": {},\n", indent(&self.block.to_json())));
        out.push_str(&format!(
            "  \"lower_density\": {},\n",
            fmt_sig12(rational_f64(&self.lower_density))
        ));
        out.push_str(&format!(
            "  \"upper_density\": {},\n",
            fmt_sig12(rational_f64(&self.upper_density))
        ));
        out.push_str(&format!("  \"rate_profile\": {},\n", indent(&self.profile.to_json())));
        out.push_str(&format!(
            "  \"verdict\": \"{}\"\n",
            if self.verdict { "pass" } else { "fail" }
        ));
        out.push('}');
        out
    }
}

/// Run simple, orbit, and block normality of y along A over F_n, measure
/// A's lower/upper densities over the Følner tail, and profile the
/// complexity of A's indicator over the same catalog. The verdict is the
/// conjunction of the three normality verdicts.
#[allow(clippy::too_many_arguments)]
pub fn preservation_experiment<G: GroupContext>(
    ctx: &G,
    y: &Symbolic<G>,
    a: &SubsetPredicate<G>,
    folner: &FolnerSequence<G>,
    n: u32,
    catalog: &[FiniteSet<G::Elem>],
    tol: f64,
    visibility_floor: f64,
    workers: usize,
) -> Result<PreservationBundle> {
    let simple = simple_normality(ctx, y, a, folner, n, tol, workers)?;
    let orbit = orbit_normality(ctx, y, a, folner, n, catalog, tol, workers)?;
    let block = block_normality(ctx, y, a, folner, n, catalog, tol, visibility_floor, workers)?;
    let lower_density = density(ctx, a, folner, n, DensityMode::Lower)?;
    let upper_density = density(ctx, a, folner, n, DensityMode::Upper)?;
    let indicator = indicator_symbolic(a);
    let window = folner.at(ctx, n)?;
    let profile = rate_profile(ctx, &indicator, catalog, &window, None, workers)?;
    let verdict = simple.verdict && orbit.verdict && block.verdict;
    Ok(PreservationBundle {
        simple,
        orbit,
        block,
        lower_density,
        upper_density,
        profile,
        verdict,
    })
}
