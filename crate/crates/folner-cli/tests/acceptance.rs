//! Acceptance gate: one test per numbered criterion, each printing a single
//! `ACCEPTANCE <n>: PASS/FAIL — <detail>` line (run with `--nocapture` to
//! see the lines of passing tests). Tolerances and golden values are pinned
//! here; a red line is a real finding, not a flaky bound.

use std::process::Command as Proc;
use std::time::Instant;

use folner::{
    block_complexity, constant, counting_census, density, eps_complexity_over, interval_tiling, invariance_defect, k_core, nat_factorial_intervals, perm_incr_indicator,
    perm_monotiling, perm_symmetric, phi, prng_uniform, ratio, saturation, thue_morse_nat,
    tile_entropy, Alphabet, Block, DensityMode, FinPerm, FiniteSet, FnSymbolic,
    GroupContext, IntAdd, NatAdd, NatMul, SubsetPredicate, Symbolic, VecAdd,
};

const BIN: &str = env!("CARGO_BIN_EXE_folner");

/// Fixed once for every seeded assertion in this file; changing it
/// invalidates all measured bounds below.
const SEED: u64 = 1;

struct Run {
    code: i32,
    stdout: String,
}

fn folner_bin(args: &[&str]) -> Run {
    let out = Proc::new(BIN).args(args).output().expect("CLI binary must run");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
    }
}

fn verdict(criterion: u32, pass: bool, detail: &str) {
    println!("ACCEPTANCE {criterion}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance criterion {criterion} failed — {detail}");
}

/// All numeric values printed for `key` in a report, in document order.
fn json_numbers(body: &str, key: &str) -> Vec<f64> {
    let pat = format!("\"{key}\": ");
    body.match_indices(&pat)
        .map(|(i, _)| {
            let rest = &body[i + pat.len()..];
            let end = rest
                .find(|c: char| !(c.is_ascii_digit() || ".-+e".contains(c)))
                .unwrap_or(rest.len());
            rest[..end].parse::<f64>().expect("numeric field")
        })
        .collect()
}

/// Deterministic xorshift64* for the randomized criteria; fixed seeds keep
/// every run identical.
struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn interval_u64(len: u64) -> FiniteSet<u64> {
    FiniteSet::from_elems(0..len)
}

// ---------------------------------------------------------------------------

#[test]
fn acceptance_01_seeded_stream_is_classically_normal_over_a_million_terms() {
    let started = Instant::now();
    let run = folner_bin(&[
        "normality",
        "--group",
        "n",
        "--gen",
        "prng",
        "--seed",
        &SEED.to_string(),
        "--set",
        "all",
        "--mode",
        "classical",
        "--horizon",
        "999999",
        "--catalog",
        "intervals:8",
        "--tol",
        "0.001",
    ]);
    let secs = started.elapsed().as_secs_f64();
    let deviations = json_numbers(&run.stdout, "deviation");
    let max_dev = deviations.iter().copied().fold(0.0f64, f64::max);
    let pass = run.code == 0 && deviations.len() == 8 && max_dev <= 1e-3 && secs <= 30.0;
    verdict(
        1,
        pass,
        &format!(
            "10^6-term window, block lengths 1..=8: max deviation {max_dev:.2e} (bound 1e-3), \
             single-threaded run {secs:.1}s (bound 30s)"
        ),
    );
}

#[test]
fn acceptance_02_periodic_subsampling_preserves_classical_normality() {
    let mut pass = true;
    let mut details = Vec::new();
    for (set, label) in [("evens", "evens"), ("residue:3,1", "1 mod 3")] {
        let run = folner_bin(&[
            "normality",
            "--group",
            "n",
            "--gen",
            "prng",
            "--seed",
            &SEED.to_string(),
            "--set",
            set,
            "--mode",
            "classical",
            "--horizon",
            "999999",
            "--catalog",
            "intervals:8",
            "--tol",
            "0.002",
        ]);
        let selected = json_numbers(&run.stdout, "anchor_count").first().copied().unwrap_or(0.0);
        pass &= run.code == 0 && selected >= 3e5;
        details.push(format!("{label}: {selected:.0} selected terms, verdict exit {}", run.code));
    }
    verdict(2, pass, &format!("tol 2e-3 along both subsequences — {}", details.join("; ")));
}

#[test]
fn acceptance_03_selecting_the_ones_of_the_stream_fails_with_deviation_one_half() {
    let run = folner_bin(&[
        "normality",
        "--group",
        "n",
        "--gen",
        "prng",
        "--seed",
        &SEED.to_string(),
        "--set",
        "ones",
        "--mode",
        "simple",
        "--n",
        "10000",
    ]);
    let exact_halves =
        run.stdout.matches("\"deviation\": 0.500000000000").count();
    let pass = run.code == 2 && exact_halves == 2;
    verdict(
        3,
        pass,
        &format!(
            "selection along the stream's own ones: exit code {} (want 2), {exact_halves}/2 \
             symbol tests at deviation exactly 1/2",
            run.code
        ),
    );
}

#[test]
fn acceptance_04_increasing_prefix_classes_have_exact_density_in_sym5() {
    let ctx = FinPerm::new();
    let window = perm_symmetric().at(&ctx, 5).expect("Sym(5) window");
    let mut pass = window.len() == 120;
    let mut counts = Vec::new();
    for (k, expected) in [(3u8, 20usize), (4, 5)] {
        let incr = perm_incr_indicator(k).expect("indicator");
        let count = window.iter().filter(|g| incr.contains(&ctx, g)).count();
        counts.push(format!("k={k}: {count} (want {expected})"));
        pass &= count == expected;
    }
    verdict(4, pass, &format!("|Sym(5)| = {}; {}", window.len(), counts.join(", ")));
}

#[test]
fn acceptance_05_symmetric_group_monotilings_validate_with_exact_tile_counts() {
    let ctx = FinPerm::new();
    let mut pass = true;
    let mut details = Vec::new();
    for k in 2u8..=4 {
        let tiling = perm_monotiling(&ctx, k, 5).expect("monotiling");
        let violations = tiling.partition_violations(&ctx);
        let k_factorial: usize = (1..=k as usize).product();
        let expected = 120 / k_factorial;
        let tiles = tiling.tiles().len();
        pass &= violations.is_empty() && tiles == expected;
        details.push(format!(
            "k={k}: {tiles} tiles (want {expected}), {} violations",
            violations.len()
        ));
    }
    verdict(5, pass, &details.join("; "));
}

#[test]
fn acceptance_06_core_of_an_invariant_window_is_a_large_subset() {
    let mut accepted = 0u32;
    let mut pass = true;

    // Integer-line cases: random intervals against random small domains.
    let ctx_z = IntAdd;
    let mut rng = XorShift(0x9E37_79B9_7F4A_7C15);
    let mut attempts = 0u32;
    while accepted < 120 && attempts < 20_000 {
        attempts += 1;
        let len = 256 + rng.below(7_937) as i64;
        let start = rng.below(4_096) as i64 - 2_048;
        let f: FiniteSet<i64> = FiniteSet::from_elems(start..start + len);
        let k_size = 2 + rng.below(5);
        let k: FiniteSet<i64> =
            FiniteSet::from_elems((0..k_size).map(|_| rng.below(9) as i64 - 4));
        if k.len() < 2 {
            continue;
        }
        let eps = [ratio(1, 4), ratio(1, 8), ratio(1, 16)][rng.below(3) as usize].clone();
        let defect = invariance_defect(&ctx_z, &f, &k).expect("defect");
        if defect > eps.clone() * ratio(1, k.len() as u64) {
            continue;
        }
        let core = k_core(&ctx_z, &f, &k);
        pass &= ratio(core.len() as u64, f.len() as u64) >= ratio(1, 1) - eps;
        accepted += 1;
    }

    // Planar cases: random squares against random domains in [-2,2]^2.
    let ctx_z2 = VecAdd::<2>::new();
    let mut attempts2 = 0u32;
    while accepted < 200 && attempts2 < 2_000 {
        attempts2 += 1;
        let side = 192 + rng.below(129) as i64;
        let corner = [rng.below(64) as i64 - 32, rng.below(64) as i64 - 32];
        let f: FiniteSet<[i64; 2]> = FiniteSet::from_elems(
            (0..side).flat_map(|dx| (0..side).map(move |dy| [corner[0] + dx, corner[1] + dy])),
        );
        let k_size = 2 + rng.below(3);
        let k: FiniteSet<[i64; 2]> = FiniteSet::from_elems(
            (0..k_size).map(|_| [rng.below(5) as i64 - 2, rng.below(5) as i64 - 2]),
        );
        if k.len() < 2 {
            continue;
        }
        let eps = [ratio(1, 4), ratio(1, 8)][rng.below(2) as usize].clone();
        let defect = invariance_defect(&ctx_z2, &f, &k).expect("defect");
        if defect > eps.clone() * ratio(1, k.len() as u64) {
            continue;
        }
        let core = k_core(&ctx_z2, &f, &k);
        pass &= ratio(core.len() as u64, f.len() as u64) >= ratio(1, 1) - eps;
        accepted += 1;
    }

    pass &= accepted == 200;
    verdict(
        6,
        pass,
        &format!(
            "{accepted}/200 premise-satisfying (F, K, ε) cases over the line and the plane, \
             all with |F_K| ≥ (1−ε)|F|"
        ),
    );
}

#[test]
fn acceptance_07_complexity_rates_separate_deterministic_from_random() {
    let started = Instant::now();
    let ctx = NatAdd;
    let anchors = interval_u64(1_000_000);

    let tm_count =
        block_complexity(&ctx, &thue_morse_nat(), &interval_u64(32), &anchors, None, 1)
            .expect("count");
    assert_eq!(tm_count, 94, "length-32 block count over the 10^6 prefix is a frozen golden");
    let tm_rate = (tm_count as f64).log2() / 32.0;

    let random: Symbolic<NatAdd> = prng_uniform(SEED, Alphabet::binary());
    let prng_count =
        block_complexity(&ctx, &random, &interval_u64(16), &anchors, None, 1).expect("count");
    let prng_rate = (prng_count as f64).log2() / 16.0;

    let secs = started.elapsed().as_secs_f64();
    let pass = tm_rate <= 0.22 && prng_rate >= 0.95 && secs <= 60.0;
    verdict(
        7,
        pass,
        &format!(
            "over a 10^6 prefix: log2-rate {tm_rate:.4} at m=32 for the substitution stream \
             (bound 0.22, count {tm_count}); {prng_rate:.4} at m=16 for the seeded stream \
             (bound 0.95, count {prng_count}); combined {secs:.1}s (bound 60s)"
        ),
    );
}

#[test]
fn acceptance_08_eps_complexity_of_periodic_input_never_exceeds_the_period() {
    let ctx = NatAdd;
    let window = interval_u64(8_192);
    let mut rng = XorShift(0xD1B5_4A32_D192_ED03);
    let mut pass = true;
    let mut worst = 0u64;
    for &p in &[1u64, 2, 3, 5, 8, 13, 17, 32, 64] {
        let pattern: Vec<u8> = (0..p).map(|_| (rng.next() & 1) as u8).collect();
        let x: Symbolic<NatAdd> =
            FnSymbolic::new(Alphabet::binary(), move |_: &NatAdd, g: &u64| {
                pattern[(g % p) as usize]
            });
        for m in [1u64, 2, 4, 8, 16] {
            for eps in [ratio(0, 1), ratio(1, 100), ratio(1, 10)] {
                let out = eps_complexity_over(&ctx, &x, &interval_u64(m), &window, &eps, 1)
                    .expect("greedy");
                pass &= out.count <= p;
                worst = worst.max(out.count.saturating_sub(p));
            }
        }
    }
    verdict(
        8,
        pass,
        &format!(
            "9 periods ≤ 64 × 5 domains × 3 budgets: every surviving count ≤ p \
             (max excess {worst})"
        ),
    );
}

#[test]
fn acceptance_09_tile_entropy_matches_exact_and_statistical_references() {
    let ctx = NatAdd;
    let mut pass = true;
    let mut details = Vec::new();

    let constant_block = Block::read(
        &ctx,
        constant::<NatAdd>(Alphabet::binary(), 1).expect("constant").as_ref(),
        interval_u64(64),
    );
    let h_const = tile_entropy(&ctx, &constant_block, &interval_tiling(&ctx, 0, 63, 4).unwrap())
        .expect("entropy");
    pass &= h_const == 0.0;
    details.push(format!("constant: {h_const} (want exactly 0)"));

    let hand = Block::new(interval_u64(4), vec![0, 1, 1, 0], 2).expect("block");
    let h_hand =
        tile_entropy(&ctx, &hand, &interval_tiling(&ctx, 0, 3, 2).unwrap()).expect("entropy");
    pass &= h_hand == 0.5;
    details.push(format!("0110 in pairs: {h_hand} (want exactly 0.5)"));

    let random: Symbolic<NatAdd> = prng_uniform(SEED, Alphabet::binary());
    let iid = Block::read(&ctx, random.as_ref(), interval_u64(1_000_000));
    let h_iid = tile_entropy(&ctx, &iid, &interval_tiling(&ctx, 0, 999_999, 4).unwrap())
        .expect("entropy");
    pass &= (h_iid - 1.0).abs() <= 0.02;
    details.push(format!("seeded i.i.d. 10^6 in quadruples: {h_iid:.4} (want 1.0 ± 0.02)"));

    let pattern = [0u8, 1, 0, 0, 1, 1];
    let periodic: Symbolic<NatAdd> =
        FnSymbolic::new(Alphabet::binary(), move |_: &NatAdd, g: &u64| {
            pattern[(g % 6) as usize]
        });
    let block = Block::read(&ctx, periodic.as_ref(), interval_u64(2_400));
    let levels: Vec<f64> = [6u32, 12, 24]
        .iter()
        .map(|&len| {
            tile_entropy(&ctx, &block, &interval_tiling(&ctx, 0, 2_399, len).unwrap())
                .expect("entropy")
        })
        .collect();
    pass &= levels.iter().all(|&h| h == 0.0) && levels.windows(2).all(|w| w[1] <= w[0]);
    details.push(format!("period 6 at tile lengths p,2p,4p: {levels:?} (want all exactly 0)"));

    verdict(9, pass, &details.join("; "));
}

#[test]
fn acceptance_10_low_entropy_census_stays_under_the_claimed_rate() {
    let (count, rate) = counting_census(2, 12, 3, 0.5).expect("census");
    assert_eq!(count, 2_416, "exhaustive census count is a frozen golden");
    verdict(
        10,
        rate <= 0.65,
        &format!(
            "exhaustive count {count} of size-12 binary blocks with tile entropy ≤ 0.5 over \
             length-3 subtiles: log2({count})/12 = {rate:.4}, asserted bound 0.65"
        ),
    );
}

#[test]
fn acceptance_11_interval_saturation_adds_at_most_two_tiles() {
    let ctx = NatAdd;
    let mut pass = true;
    let mut details = Vec::new();
    for n in [100u64, 1_000, 10_000] {
        let hi = (n / 16 + 1) * 16 - 1;
        let tiling = interval_tiling(&ctx, 0, hi as i64, 16).expect("tiling");
        let f: FiniteSet<u64> = FiniteSet::from_elems(1..=n);
        let saturated = saturation(&ctx, &f, &tiling).expect("saturation");
        let excess = saturated.len() - f.len();
        pass &= excess <= 32;
        details.push(format!("n={n}: |F^Θ \\ F| = {excess}"));
    }
    verdict(11, pass, &format!("length-16 tiles over [1,n]: {} (bound 32)", details.join(", ")));
}

/// Membership in ∪_k [(2k)!+1, (2k+1)!]: the factorial level j with
/// j! < m ≤ (j+1)! must be even (and ≥ 2).
fn in_factorial_interval_set(m: u64) -> bool {
    if m < 3 {
        return false;
    }
    let mut j = 1u64;
    let mut fact = 1u64;
    while fact.saturating_mul(j + 1) < m {
        j += 1;
        fact *= j;
    }
    j >= 2 && j % 2 == 0
}

#[test]
fn acceptance_12_factorial_interval_set_spreads_its_density_along_factorial_windows() {
    let ctx = NatAdd;
    let a = SubsetPredicate::new("factorial intervals", |_: &NatAdd, g: &u64| {
        in_factorial_interval_set(*g)
    });
    let folner = nat_factorial_intervals();
    let lower = density(&ctx, &a, &folner, 8, DensityMode::Lower).expect("lower density");
    let upper = density(&ctx, &a, &folner, 8, DensityMode::Upper).expect("upper density");
    assert_eq!(lower, ratio(4_420, 40_320), "lower density over [1,8!] is a frozen exact value");
    assert_eq!(upper, ratio(4_420, 5_040), "upper density over [1,7!] is a frozen exact value");
    let pass = lower < ratio(1, 20) && upper > ratio(19, 20);
    verdict(
        12,
        pass,
        "exact densities over [1,n!] up to n=8: lower = 4420/40320 ≈ 0.1096 (asserted < 0.05), \
         upper = 4420/5040 ≈ 0.8770 (asserted > 0.95)",
    );
}

/// Companion to the criterion above: the same set does reach the claimed
/// density split once the factorial windows grow past n = 20, shown by
/// closed-form interval counting in exact 128-bit arithmetic (the windows
/// [1, 20!] are far beyond enumeration).
#[test]
fn factorial_interval_density_gap_closes_at_larger_horizons() {
    let mut fact = [0u128; 22];
    fact[0] = 1;
    for i in 1..=21 {
        fact[i] = fact[i - 1] * i as u128;
    }
    let count = |n: usize| -> u128 {
        (1..).take_while(|k| 2 * k + 1 <= n).map(|k| fact[2 * k + 1] - fact[2 * k]).sum()
    };
    // Consistency with the enumerated small-horizon values.
    assert_eq!(count(7), 4_420);
    assert_eq!(count(8), 4_420);
    assert_eq!(fact[8], 40_320);
    // The window [1, 20!] lies in the tail half for n_max ∈ {20, 21}, so the
    // lower density is ≤ count(20)/20! < 1/20; the window [1, 21!] gives the
    // upper density ≥ count(21)/21! > 19/20.
    assert!(count(20) * 20 < fact[20]);
    assert!(count(21) * 20 > fact[21] * 19);
}

#[test]
fn acceptance_13_prime_exponent_concatenation_reproduces_the_digit_golden() {
    type Nat = <NatMul as GroupContext>::Elem;
    let mut n = Nat::from(1u64);
    for _ in 0..903 {
        n *= 7u64;
    }
    n *= 25u64;
    n *= 2u64;
    let word = phi(&n, 10).expect("phi");
    verdict(
        13,
        word == "90321",
        &format!("phi(7^903 · 5^2 · 2) in base 10 = {word:?} (want \"90321\")"),
    );
}

#[test]
fn acceptance_14_output_is_byte_identical_across_worker_counts() {
    let dir = std::env::temp_dir().join(format!("folner-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let seed = SEED.to_string();
    let cases: [(&str, Vec<&str>); 4] = [
        ("generate", vec!["generate", "--group", "z", "--gen", "thue-morse", "--horizon", "65536", "--format", "raw"]),
        ("normality", vec!["normality", "--group", "n", "--gen", "prng", "--seed", &seed, "--set", "evens", "--mode", "orbit", "--n", "20000", "--catalog", "intervals:4"]),
        ("complexity", vec!["complexity", "--group", "n", "--gen", "prng", "--seed", &seed, "--catalog", "intervals:8", "--n", "65536", "--eps", "1/50"]),
        ("experiment", vec!["experiment", "--group", "n", "--gen", "prng", "--seed", &seed, "--set", "odds", "--n", "8000", "--catalog", "intervals:3"]),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, args) in &cases {
        let mut outputs: Vec<Vec<u8>> = Vec::new();
        let mut codes = Vec::new();
        for workers in ["1", "2", "4"] {
            let path = dir.join(format!("{name}-{workers}.out"));
            let path_str = path.to_str().expect("utf-8 temp path").to_string();
            let mut full: Vec<&str> = args.clone();
            full.extend_from_slice(&["--workers", workers, "--out", &path_str]);
            let run = folner_bin(&full);
            codes.push(run.code);
            outputs.push(std::fs::read(&path).expect("output file"));
        }
        let identical = outputs.windows(2).all(|w| w[0] == w[1]);
        let same_code = codes.windows(2).all(|w| w[0] == w[1]);
        pass &= identical && same_code;
        details.push(format!(
            "{name}: {} bytes, identical={identical}, exit codes {codes:?}",
            outputs[0].len()
        ));
    }
    let _ = std::fs::remove_dir_all(&dir);
    verdict(14, pass, &details.join("; "));
}
