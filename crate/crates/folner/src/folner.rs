//! Følner sequences, invariance diagnostics, cores, and densities.
//!
//! A Følner sequence assigns to each index `n` a finite window `F_n` in the
//! carrier. Windows are asymptotically invariant: the translate defect
//! |KF △ F| / |F| vanishes as `n` grows, for every fixed finite `K`. All
//! ratios here are exact rationals; no floating point enters membership or
//! counting.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::group::{FinPerm, FiniteSet, GroupContext, IntAdd, NatAdd, NatMul, Perm, SubsetPredicate, VecAdd};

/// Exact rational used for all densities, defects, and frequencies.
pub type Rational = Ratio<BigInt>;

/// Build an exact rational from an integer pair.
pub fn ratio(num: u64, den: u64) -> Rational {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

/// Tri-state structural flags of a Følner sequence (`None` = unknown).
#[derive(Clone, Copy, Debug, Default)]
pub struct FolnerFlags {
    /// Is `F_n ⊆ F_{n+1}` for all n?
    pub nested: Option<bool>,
    /// Does every window contain the identity?
    pub centered: Option<bool>,
    /// Are the windows pairwise disjoint?
    pub disjoint: Option<bool>,
}

type WindowFn<G> =
    dyn Fn(&G, u32) -> Result<FiniteSet<<G as GroupContext>::Elem>> + Send + Sync;

/// An indexed family `n ↦ F_n` of finite windows with invariance
/// diagnostics.
///
/// Windows for carriers that embed in `i64` (see
/// [`GroupContext::to_index`]) may additionally expose their index interval,
/// which lets [`density`] scan a growing family in one pass instead of
/// re-materializing every window.
pub struct FolnerSequence<G: GroupContext> {
    descriptor: String,
    flags: FolnerFlags,
    window: Arc<WindowFn<G>>,
    index_interval: Option<Arc<dyn Fn(u32) -> Result<(i64, i64)> + Send + Sync>>,
}

impl<G: GroupContext> Clone for FolnerSequence<G> {
    fn clone(&self) -> Self {
        FolnerSequence {
            descriptor: self.descriptor.clone(),
            flags: self.flags,
            window: Arc::clone(&self.window),
            index_interval: self.index_interval.as_ref().map(Arc::clone),
        }
    }
}

impl<G: GroupContext> FolnerSequence<G> {
    pub fn new(
        descriptor: impl Into<String>,
        flags: FolnerFlags,
        window: impl Fn(&G, u32) -> Result<FiniteSet<G::Elem>> + Send + Sync + 'static,
    ) -> FolnerSequence<G> {
        FolnerSequence {
            descriptor: descriptor.into(),
            flags,
            window: Arc::new(window),
            index_interval: None,
        }
    }

    /// Declare that `F_n` is exactly the elements with carrier index in the
    /// returned closed interval (dense carriers only). Enables the one-pass
    /// density scan.
    pub fn with_index_interval(
        mut self,
        interval: impl Fn(u32) -> Result<(i64, i64)> + Send + Sync + 'static,
    ) -> FolnerSequence<G> {
        self.index_interval = Some(Arc::new(interval));
        self
    }

    /// The window at index `n`.
    pub fn at(&self, ctx: &G, n: u32) -> Result<FiniteSet<G::Elem>> {
        let w = (self.window)(ctx, n)?;
        if w.is_empty() {
            return Err(Error::Empty("Følner window"));
        }
        Ok(w)
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn flags(&self) -> FolnerFlags {
        self.flags
    }

    fn interval_at(&self, n: u32) -> Option<Result<(i64, i64)>> {
        self.index_interval.as_ref().map(|f| f(n))
    }
}

/// Materialize the window of elements with carrier index in `lo..=hi`.
fn index_window<G: GroupContext>(ctx: &G, lo: i64, hi: i64) -> Result<FiniteSet<G::Elem>> {
    if hi < lo {
        return Err(Error::Empty("Følner window"));
    }
    let size = (hi - lo + 1) as usize;
    const MAX_WINDOW: usize = 1 << 24;
    if size > MAX_WINDOW {
        return Err(Error::TooLarge(format!(
            "window [{lo}, {hi}] holds {size} elements (cap {MAX_WINDOW})"
        )));
    }
    let elems: Option<Vec<G::Elem>> = (lo..=hi).map(|i| ctx.from_index(i)).collect();
    match elems {
        Some(elems) => Ok(FiniteSet::from_elems(elems)),
        None => Err(Error::Invalid(format!("carrier {} has no index {lo}..={hi}", ctx.name()))),
    }
}

/// Intervals `F_n = [1, n]` in the additive naturals.
pub fn nat_intervals() -> FolnerSequence<NatAdd> {
    FolnerSequence::new(
        "intervals [1,n] in N",
        FolnerFlags { nested: Some(true), centered: Some(false), disjoint: Some(false) },
        |ctx: &NatAdd, n| {
            if n == 0 {
                return Err(Error::Invalid("interval window needs n >= 1".into()));
            }
            index_window(ctx, 1, n as i64)
        },
    )
    .with_index_interval(|n| {
        if n == 0 {
            Err(Error::Invalid("interval window needs n >= 1".into()))
        } else {
            Ok((1, n as i64))
        }
    })
}

/// Factorial intervals `F_n = [1, n!]` in the additive naturals.
///
/// Materialization is capped at n = 9 (9! = 362 880 elements); larger
/// factorials would not fit a desk-scale window.
pub fn nat_factorial_intervals() -> FolnerSequence<NatAdd> {
    fn endpoint(n: u32) -> Result<i64> {
        if n == 0 {
            return Err(Error::Invalid("factorial window needs n >= 1".into()));
        }
        if n > 9 {
            return Err(Error::TooLarge(format!("cannot materialize [1, {n}!]")));
        }
        Ok((1..=n as i64).product())
    }
    FolnerSequence::new(
        "factorial intervals [1,n!] in N",
        FolnerFlags { nested: Some(true), centered: Some(false), disjoint: Some(false) },
        |ctx: &NatAdd, n| index_window(ctx, 1, endpoint(n)?),
    )
    .with_index_interval(|n| Ok((1, endpoint(n)?)))
}

/// Centered intervals `F_n = [−n, n]` in the additive integers.
pub fn int_intervals() -> FolnerSequence<IntAdd> {
    FolnerSequence::new(
        "centered intervals [-n,n] in Z",
        FolnerFlags { nested: Some(true), centered: Some(true), disjoint: Some(false) },
        |ctx: &IntAdd, n| index_window(ctx, -(n as i64), n as i64),
    )
    .with_index_interval(|n| Ok((-(n as i64), n as i64)))
}

/// Centered cubes `F_n = [−n, n]^D` in integer vectors.
pub fn vec_cubes<const D: usize>() -> FolnerSequence<VecAdd<D>> {
    FolnerSequence::new(
        format!("centered cubes [-n,n]^{D}"),
        FolnerFlags { nested: Some(true), centered: Some(true), disjoint: Some(false) },
        |_ctx: &VecAdd<D>, n| {
            let side = 2 * n as u64 + 1;
            let size = side.pow(D as u32);
            if size > (1 << 24) {
                return Err(Error::TooLarge(format!("cube side {side} in dimension {D}")));
            }
            let mut elems = Vec::with_capacity(size as usize);
            let mut point = [-(n as i64); D];
            'walk: loop {
                elems.push(point);
                let mut axis = D;
                loop {
                    if axis == 0 {
                        break 'walk;
                    }
                    axis -= 1;
                    if point[axis] < n as i64 {
                        point[axis] += 1;
                        for c in point.iter_mut().skip(axis + 1) {
                            *c = -(n as i64);
                        }
                        break;
                    }
                }
            }
            Ok(FiniteSet::from_elems(elems))
        },
    )
}

/// Symmetric-group windows `F_n = Sym(n)` in the finitary permutations.
///
/// Capped at n = 9 to bound materialized size.
pub fn perm_symmetric() -> FolnerSequence<FinPerm> {
    FolnerSequence::new(
        "symmetric groups Sym(n)",
        FolnerFlags { nested: Some(true), centered: Some(true), disjoint: Some(false) },
        |_ctx: &FinPerm, n| {
            if n == 0 {
                return Err(Error::Invalid("symmetric-group window needs n >= 1".into()));
            }
            if n > 9 {
                return Err(Error::TooLarge(format!("cannot materialize Sym({n})")));
            }
            Ok(FiniteSet::from_elems(sym_window(n as u8)))
        },
    )
}

/// All of Sym(n) as minimal-form permutations.
pub(crate) fn sym_window(n: u8) -> Vec<Perm> {
    FinPerm::sym_lex(n)
        .into_iter()
        .map(|line| Perm::new(line).expect("lexicographic generator yields permutations"))
        .collect()
}

/// Divisor-closed exponent boxes `F_n = {2^a 3^b 5^c : 0 ≤ a,b,c ≤ n}` in the
/// multiplicative naturals.
///
/// A genuine Følner sequence for all of (ℕ,×) would need unboundedly many
/// primes and explodes combinatorially; these boxes are asymptotically
/// invariant for every finite K supported on the primes {2, 3, 5}, which is
/// the invariance catalog this crate tests against.
pub fn natmul_boxes() -> FolnerSequence<NatMul> {
    FolnerSequence::new(
        "exponent boxes on primes {2,3,5}",
        FolnerFlags { nested: Some(true), centered: Some(true), disjoint: Some(false) },
        |_ctx: &NatMul, n| {
            if n > 40 {
                return Err(Error::TooLarge(format!("exponent box n = {n}")));
            }
            let mut elems = Vec::new();
            for a in 0..=n {
                for b in 0..=n {
                    for c in 0..=n {
                        let v = num_bigint::BigUint::from(2u8).pow(a)
                            * num_bigint::BigUint::from(3u8).pow(b)
                            * num_bigint::BigUint::from(5u8).pow(c);
                        elems.push(v);
                    }
                }
            }
            Ok(FiniteSet::from_elems(elems))
        },
    )
}

/// Exact translate defect |KF △ F| / |F|.
///
/// `KF = {k·f : k ∈ K, f ∈ F}`; the defect measures how far `F` is from
/// `K`-invariance. A window is called (K,ε)-invariant when the defect is
/// at most ε.
pub fn invariance_defect<G: GroupContext>(
    ctx: &G,
    f: &FiniteSet<G::Elem>,
    k: &FiniteSet<G::Elem>,
) -> Result<Rational> {
    if f.is_empty() {
        return Err(Error::Empty("window F"));
    }
    if k.is_empty() {
        return Err(Error::Empty("translate set K"));
    }
    let mut kf: HashSet<G::Elem> = HashSet::with_capacity(f.len() * k.len());
    for kk in k.iter() {
        for g in f.iter() {
            kf.insert(ctx.multiply(kk, g));
        }
    }
    let added = kf.iter().filter(|e| !f.contains(e)).count();
    let removed = f.iter().filter(|e| !kf.contains(e)).count();
    Ok(ratio((added + removed) as u64, f.len() as u64))
}

/// The K-core `F_K = {g ∈ F : Kg ⊆ F}` — the anchors at which a K-pattern
/// fits entirely inside the window.
pub fn k_core<G: GroupContext>(
    ctx: &G,
    f: &FiniteSet<G::Elem>,
    k: &FiniteSet<G::Elem>,
) -> FiniteSet<G::Elem> {
    FiniteSet::from_elems(
        f.iter()
            .filter(|g| k.iter().all(|kk| f.contains(&ctx.multiply(kk, g))))
            .cloned(),
    )
}

/// Which end of the density range to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityMode {
    /// Finite-horizon surrogate for the lower (liminf) density.
    Lower,
    /// Finite-horizon surrogate for the upper (limsup) density.
    Upper,
}

/// Exact finite-horizon density of `A` along the sequence: the min
/// (`Lower`) or max (`Upper`) of |F_n ∩ A| / |F_n| over the tail half
/// n ∈ [⌈n_max/2⌉, n_max].
///
/// The tail-half rule is the deterministic surrogate for liminf/limsup: it
/// discards small-n transients while keeping the result exactly computable.
pub fn density<G: GroupContext>(
    ctx: &G,
    a: &SubsetPredicate<G>,
    folner: &FolnerSequence<G>,
    n_max: u32,
    mode: DensityMode,
) -> Result<Rational> {
    if n_max == 0 {
        return Err(Error::Invalid("density needs n_max >= 1".into()));
    }
    let n_tail = n_max.div_ceil(2);
    let ratios = match density_ratios_by_interval(ctx, a, folner, n_tail, n_max)? {
        Some(r) => r,
        None => {
            let mut out = Vec::with_capacity((n_max - n_tail + 1) as usize);
            for n in n_tail..=n_max {
                let window = folner.at(ctx, n)?;
                let hits = window.iter().filter(|g| a.contains(ctx, g)).count();
                out.push(ratio(hits as u64, window.len() as u64));
            }
            out
        }
    };
    let extreme = match mode {
        DensityMode::Lower => ratios.into_iter().min(),
        DensityMode::Upper => ratios.into_iter().max(),
    };
    extreme.ok_or(Error::Empty("density tail"))
}

/// One-pass tail densities for sequences that expose index intervals:
/// evaluates the predicate once per carrier index and reads every window
/// count off a prefix-sum table.
fn density_ratios_by_interval<G: GroupContext>(
    ctx: &G,
    a: &SubsetPredicate<G>,
    folner: &FolnerSequence<G>,
    n_tail: u32,
    n_max: u32,
) -> Result<Option<Vec<Rational>>> {
    let mut intervals = Vec::with_capacity((n_max - n_tail + 1) as usize);
    for n in n_tail..=n_max {
        match folner.interval_at(n) {
            Some(iv) => intervals.push(iv?),
            None => return Ok(None),
        }
    }
    let lo = intervals.iter().map(|&(l, _)| l).min().expect("tail is nonempty");
    let hi = intervals.iter().map(|&(_, h)| h).max().expect("tail is nonempty");
    if hi < lo {
        return Err(Error::Empty("Følner window"));
    }
    let span = usize::try_from(hi - lo + 1)
        .map_err(|_| Error::TooLarge("density scan span exceeds usize".into()))?;
    if span > (1 << 27) {
        return Err(Error::TooLarge(format!("density scan span {span}")));
    }
    // prefix[i] = |A ∩ [lo, lo + i)|.
    let mut prefix = Vec::with_capacity(span + 1);
    prefix.push(0u64);
    let mut acc = 0u64;
    for i in lo..=hi {
        let e = ctx
            .from_index(i)
            .ok_or_else(|| Error::Invalid(format!("carrier {} has no index {i}", ctx.name())))?;
        if a.contains(ctx, &e) {
            acc += 1;
        }
        prefix.push(acc);
    }
    Ok(Some(
        intervals
            .into_iter()
            .map(|(l, h)| {
                let hits = prefix[(h - lo + 1) as usize] - prefix[(l - lo) as usize];
                ratio(hits, (h - l + 1) as u64)
            })
            .collect(),
    ))
}
