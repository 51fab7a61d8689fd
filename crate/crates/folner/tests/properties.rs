//! Cross-module invariants checked through the public API: semigroup laws,
//! shift algebra, complexity monotonicity, census bounds, entropy ranges,
//! and the interplay between window invariance and cores.
//!
//! Unit tests pin down each module in isolation; the tests here combine
//! modules the way downstream callers do and assert relations that must hold
//! for every input, not just golden examples.

use folner::{
    block_complexity, counting_census, density, eps_complexity_over, interval_tiling,
    invariance_defect, k_core, nat_intervals, prng_uniform, ratio, residue_indicator, shift,
    thue_morse_int, thue_morse_nat, tile_entropy, Alphabet, Block, DensityMode, FinPerm,
    FiniteSet, GroupContext, IntAdd, NatAdd, NatMul, Rational, SubsetPredicate, VecAdd,
};

fn interval_u64(lo: u64, hi: u64) -> FiniteSet<u64> {
    FiniteSet::from_elems(lo..=hi)
}

fn interval_i64(lo: i64, hi: i64) -> FiniteSet<i64> {
    FiniteSet::from_elems(lo..=hi)
}

/// Minimal deterministic generator for test case sampling.
struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    fn below(&mut self, bound: u64) -> u64 {
        self.next() % bound
    }
}

// ---------------------------------------------------------------------------
// carrier laws
// ---------------------------------------------------------------------------

fn check_semigroup_laws<G: GroupContext>(ctx: &G, sample: u64) {
    let elems: Vec<G::Elem> = (0..sample).map(|i| ctx.enumerate(i)).collect();
    let e = ctx.identity();
    for a in &elems {
        assert_eq!(&ctx.multiply(a, &e), a, "right identity in {}", ctx.name());
        assert_eq!(&ctx.multiply(&e, a), a, "left identity in {}", ctx.name());
        if let Some(inv) = ctx.invert(a) {
            assert_eq!(ctx.multiply(a, &inv), e, "inverse in {}", ctx.name());
            assert_eq!(ctx.multiply(&inv, a), e, "inverse in {}", ctx.name());
        }
    }
    // Associativity on a coarse triple grid keeps the loop near-linear.
    for (i, a) in elems.iter().enumerate().step_by(7) {
        for (j, b) in elems.iter().enumerate().step_by(5) {
            let c = &elems[(i * 31 + j * 17) % elems.len()];
            assert_eq!(
                ctx.multiply(&ctx.multiply(a, b), c),
                ctx.multiply(a, &ctx.multiply(b, c)),
                "associativity in {}",
                ctx.name()
            );
        }
    }
    // The canonical encoding must sort exactly like the elements themselves.
    let mut sorted = elems.clone();
    sorted.sort();
    let mut encoded: Vec<Vec<u8>> = sorted.iter().map(|a| ctx.encode(a)).collect();
    let already = encoded.clone();
    encoded.sort();
    assert_eq!(encoded, already, "encode is order-preserving in {}", ctx.name());
}

#[test]
fn carrier_laws_hold_on_sampled_elements() {
    check_semigroup_laws(&NatAdd, 64);
    check_semigroup_laws(&IntAdd, 64);
    check_semigroup_laws(&VecAdd::<2>::new(), 64);
    check_semigroup_laws(&VecArr3::new(), 64);
    check_semigroup_laws(&NatMul, 48);
    check_semigroup_laws(&FinPerm::new(), 64);
}

// VecAdd<3> spelled out once so the test above reads uniformly.
type VecArr3 = VecAdd<3>;

// ---------------------------------------------------------------------------
// shift algebra
// ---------------------------------------------------------------------------

#[test]
fn shifts_compose_through_multiplication() {
    let ctx = IntAdd;
    let x = thue_morse_int();
    for g in -6..=6 {
        for k in -6..=6 {
            let twice = shift(&shift(&x, g), k);
            let once = shift(&x, ctx.multiply(&k, &g));
            for h in -40..=40 {
                assert_eq!(
                    twice.eval(&ctx, &h),
                    once.eval(&ctx, &h),
                    "shift composition at g={g}, k={k}, h={h}"
                );
            }
        }
    }
}

#[test]
fn shifting_by_the_identity_changes_nothing() {
    let ctx = NatAdd;
    let x = thue_morse_nat();
    let shifted = shift(&x, ctx.identity());
    for h in 0..256u64 {
        assert_eq!(shifted.eval(&ctx, &h), x.eval(&ctx, &h));
    }
}

// ---------------------------------------------------------------------------
// complexity relations
// ---------------------------------------------------------------------------

#[test]
fn zero_budget_complexity_matches_the_plain_block_count() {
    let ctx = NatAdd;
    let window = interval_u64(0, 4095);
    for (label, x) in [
        ("substitution", thue_morse_nat()),
        ("seeded", prng_uniform::<NatAdd>(77, Alphabet::binary())),
    ] {
        for m in [1u64, 3, 5, 8] {
            let k = interval_u64(0, m - 1);
            let plain = block_complexity(&ctx, &x, &k, &window, None, 1).expect("count");
            let zero =
                eps_complexity_over(&ctx, &x, &k, &window, &ratio(0, 1), 1).expect("eps count");
            assert_eq!(zero.count, plain, "{label} stream, m = {m}");
            assert_eq!(zero.discarded_anchors, 0);
            assert_eq!(zero.surviving_density, ratio(1, 1));
        }
    }
}

#[test]
fn eps_complexity_is_monotone_in_the_budget() {
    let ctx = NatAdd;
    let x = prng_uniform::<NatAdd>(901, Alphabet::binary());
    let k = interval_u64(0, 9);
    let window = interval_u64(0, 8191);
    let budgets = [ratio(0, 1), ratio(1, 64), ratio(1, 16), ratio(1, 8), ratio(1, 4)];
    let mut previous = u64::MAX;
    for eps in &budgets {
        let result = eps_complexity_over(&ctx, &x, &k, &window, eps, 1).expect("eps count");
        assert!(
            result.count <= previous,
            "count must not grow with the budget: {} then {}",
            previous,
            result.count
        );
        // Discards stay within budget: surviving anchors >= (1 - eps) of all.
        let surviving = ratio(result.total_anchors - result.discarded_anchors, 1);
        let floor = (ratio(1, 1) - eps.clone()) * ratio(result.total_anchors, 1);
        assert!(surviving >= floor, "discarded more than the budget allows");
        previous = result.count;
    }
}

#[test]
fn block_counts_are_monotone_under_domain_inclusion() {
    let ctx = NatAdd;
    let window = interval_u64(0, 4095);
    for x in [thue_morse_nat(), prng_uniform::<NatAdd>(13, Alphabet::binary())] {
        let mut previous = 0u64;
        for m in 1..=10u64 {
            let k = interval_u64(0, m - 1);
            let count = block_complexity(&ctx, &x, &k, &window, None, 1).expect("count");
            assert!(count >= previous, "count dropped from {previous} to {count} at m = {m}");
            previous = count;
        }
    }
}

#[test]
fn block_counts_are_submultiplicative_across_domain_unions() {
    let ctx = NatAdd;
    let window = interval_u64(0, 65535);
    let x = thue_morse_nat();
    for split in 1..=6u64 {
        let left = interval_u64(0, split - 1);
        let right = interval_u64(split, 7);
        let both = interval_u64(0, 7);
        let c_left = block_complexity(&ctx, &x, &left, &window, None, 1).expect("count");
        let c_right = block_complexity(&ctx, &x, &right, &window, None, 1).expect("count");
        let c_both = block_complexity(&ctx, &x, &both, &window, None, 1).expect("count");
        assert!(
            c_both <= c_left * c_right,
            "projection bound failed at split {split}: {c_both} > {c_left} * {c_right}"
        );
    }
}

// ---------------------------------------------------------------------------
// census and entropy
// ---------------------------------------------------------------------------

#[test]
fn census_counts_are_monotone_and_hit_both_extremes() {
    // At threshold 0 only blocks whose subtiles all agree survive: one free
    // subtile pattern, hence 2^2 = 4 binary blocks of size 8 in pieces of 2.
    let (at_zero, _) = counting_census(2, 8, 2, 0.0).expect("census");
    assert_eq!(at_zero, 4);
    // Beyond the maximal possible entropy everything survives.
    let (everything, rate) = counting_census(2, 8, 2, 2.0).expect("census");
    assert_eq!(everything, 256);
    assert!((rate - 1.0).abs() < 1e-12, "256 blocks of size 8 give rate 1");
    let thresholds = [0.0, 0.2, 0.5, 0.8, 1.0, 1.5, 2.0];
    let mut previous = 0u64;
    for c in thresholds {
        let (count, _) = counting_census(2, 8, 2, c).expect("census");
        assert!(count >= previous, "census shrank from {previous} to {count} at c = {c}");
        previous = count;
    }
}

#[test]
fn tile_entropy_stays_within_its_natural_range() {
    let ctx = NatAdd;
    let tiling = interval_tiling(&ctx, 0, 239, 4).expect("tiling");
    let domain = interval_u64(0, 239);
    for seed in [5u64, 6, 7, 8] {
        let x = prng_uniform::<NatAdd>(seed, Alphabet::binary());
        let block = Block::read(&ctx, x.as_ref(), domain.clone());
        let h = tile_entropy(&ctx, &block, &tiling).expect("entropy");
        // At most 4 binary cells per tile and at most 60 tiles overall.
        assert!((0.0..=4.0).contains(&h), "entropy {h} escapes [0, 4]");
        assert!(h <= (60f64).log2() + 1e-12, "entropy {h} exceeds log2(#tiles)");
    }
    let flat = Block::new(domain, vec![1; 240], 2).expect("block");
    assert_eq!(tile_entropy(&ctx, &flat, &tiling).expect("entropy"), 0.0);
}

// ---------------------------------------------------------------------------
// invariance, cores, densities
// ---------------------------------------------------------------------------

#[test]
fn interval_windows_have_exact_invariance_defect() {
    // For an interval F and K = [0, r], the difference K·F △ F is exactly
    // the r points hanging off the right end, whatever F's position.
    let ctx = IntAdd;
    for r in 1..=5i64 {
        let k = interval_i64(0, r);
        for (lo, hi) in [(0i64, 99), (-50, 49), (7, 507), (-1000, -1)] {
            let f = interval_i64(lo, hi);
            let defect = invariance_defect(&ctx, &f, &k).expect("defect");
            assert_eq!(defect, ratio(r as u64, f.len() as u64), "K = [0,{r}], F = [{lo},{hi}]");
        }
    }
}

#[test]
fn cores_respect_the_exact_counting_bound() {
    // |F \ F_K| <= |K| * |KF △ F| holds with no smallness assumption, so the
    // random cases need no filtering at all.
    let ctx = IntAdd;
    let mut rng = XorShift(0x5eed_cafe);
    for _ in 0..60 {
        let lo = rng.below(1000) as i64 - 500;
        let len = 20 + rng.below(400) as i64;
        let f = interval_i64(lo, lo + len - 1);
        let mut cells = vec![0i64];
        for _ in 0..rng.below(4) {
            cells.push(rng.below(9) as i64 - 4);
        }
        let k = FiniteSet::from_elems(cells);
        let defect = invariance_defect(&ctx, &f, &k).expect("defect");
        let core = k_core(&ctx, &f, &k);
        assert!(core.is_subset_of(&f), "core escapes its window");
        let missing = ratio((f.len() - core.len()) as u64, 1);
        let bound = ratio(k.len() as u64, 1) * defect * ratio(f.len() as u64, 1);
        assert!(missing <= bound, "counting bound failed: {missing} > {bound}");
    }
}

#[test]
fn densities_bracket_and_saturate_on_the_full_set() {
    let ctx = NatAdd;
    let folner = nat_intervals();
    let full = SubsetPredicate::<NatAdd>::full();
    for mode in [DensityMode::Lower, DensityMode::Upper] {
        assert_eq!(density(&ctx, &full, &folner, 60, mode).expect("density"), ratio(1, 1));
    }
    let thirds = residue_indicator(3, 2).expect("indicator");
    let lower = density(&ctx, &thirds, &folner, 300, DensityMode::Lower).expect("density");
    let upper = density(&ctx, &thirds, &folner, 300, DensityMode::Upper).expect("density");
    assert!(lower <= upper, "lower bound above upper bound");
    assert!(lower > ratio(3, 10) && upper < ratio(2, 5), "residue class strays far from 1/3");
}

#[test]
fn defects_shrink_along_growing_windows() {
    let ctx = NatAdd;
    let folner = nat_intervals();
    let k = interval_u64(0, 3);
    let mut previous = Rational::from_integer(2.into());
    for n in [10u32, 40, 160, 640] {
        let f = folner.at(&ctx, n).expect("window");
        let defect = invariance_defect(&ctx, &f, &k).expect("defect");
        assert!(defect < previous, "defect failed to shrink at n = {n}");
        previous = defect;
    }
    assert!(previous < ratio(1, 100), "defect at n = 640 should be below 1/100");
}
