//! End-to-end behavior tests for the `folner` binary: argument handling,
//! output formats, config-file merging, exit codes, and error reporting.
//!
//! Each test shells out to the compiled binary, so these exercise the real
//! command-line contract rather than the library entry points behind it.

use std::path::PathBuf;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_folner");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn folner(args: &[&str]) -> Run {
    let out = Command::new(BIN).args(args).output().expect("spawn folner");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn folner_raw(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(BIN).args(args).output().expect("spawn folner");
    (out.status.code().unwrap_or(-1), out.stdout)
}

/// Fresh scratch directory unique to one test.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("folner-cli-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

/// First numeric value following `"key": ` in a JSON body.
fn json_number(body: &str, key: &str) -> f64 {
    let pat = format!("\"{key}\": ");
    let at = body.find(&pat).unwrap_or_else(|| panic!("key {key} not found in {body}"));
    let rest = &body[at + pat.len()..];
    let end = rest
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == 'e' || c == '+'))
        .unwrap_or(rest.len());
    rest[..end].parse().unwrap_or_else(|_| panic!("bad number for {key}"))
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[test]
fn generate_renders_the_substitution_stream_prefix() {
    let run = folner(&["generate", "--group", "n", "--gen", "thue-morse", "--horizon", "16"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert_eq!(run.stdout, "0110100110010110\n");
}

#[test]
fn generate_renders_the_multiplicative_stream_prefix() {
    // Mixed-case group name on purpose: names are case-insensitive.
    let run = folner(&["generate", "--group", "Nmul", "--gen", "mult-thue-morse", "--horizon", "8"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert_eq!(run.stdout, "01111010\n");
}

#[test]
fn generate_raw_emits_a_tagged_binary_stream_with_sidecar() {
    let dir = scratch("raw");
    let path = dir.join("stream.fsym");
    let run = folner(&[
        "generate", "--group", "n", "--gen", "thue-morse", "--horizon", "16", "--format", "raw",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let bytes = std::fs::read(&path).expect("read raw stream");
    assert_eq!(&bytes[0..4], b"FSYM", "magic");
    assert_eq!(bytes[4], 1, "container version");
    assert_eq!(bytes[5], 2, "alphabet size");
    assert_eq!(&bytes[6..8], &[0, 0], "reserved bytes");
    assert_eq!(&bytes[8..16], &16u64.to_be_bytes(), "symbol count");
    assert_eq!(&bytes[16..], &[0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0], "payload");
    let sidecar = std::fs::read_to_string(dir.join("stream.fsym.config")).expect("sidecar");
    assert!(sidecar.contains("command = generate"), "sidecar: {sidecar}");
    assert!(sidecar.contains("format = raw"), "sidecar: {sidecar}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn generate_raw_on_stdout_matches_the_file_payload() {
    let (code, bytes) =
        folner_raw(&["generate", "--group", "n", "--gen", "thue-morse", "--horizon", "4", "--format", "raw"]);
    assert_eq!(code, 0);
    assert_eq!(&bytes[0..4], b"FSYM");
    assert_eq!(&bytes[16..], &[0, 1, 1, 0]);
}

#[test]
fn generate_without_horizon_fails_with_usage_error() {
    let run = folner(&["generate", "--group", "n", "--gen", "thue-morse"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("missing --horizon for generate"), "stderr: {}", run.stderr);
}

#[test]
fn generate_rejects_json_output() {
    let run = folner(&["generate", "--group", "n", "--gen", "thue-morse", "--horizon", "4", "--format", "json"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("generate supports text or raw output"), "stderr: {}", run.stderr);
}

#[test]
fn automatic_streams_load_from_instance_files() {
    // Balanced base-3 digit parity along the enumeration 0, 1, -1, 2, -2, ...
    // By hand: -2 = 1 + 3*(-1) has digits [1, -1] (two nonzero -> 0) while
    // 5 = -1 + 3*2 = -1 + 3*(-1 + 3*1) has digits [-1, -1, 1] (three -> 1).
    let inst = concat!(env!("CARGO_MANIFEST_DIR"), "/../folner/instances");
    let run = folner(&[
        "generate", "--group", "z",
        "--gen", &format!("automatic:{inst}/digit-parity.aut,{inst}/balanced3-z.ds"),
        "--horizon", "12",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert_eq!(run.stdout, "011001100110\n");

    let run = folner(&[
        "generate", "--group", "z2",
        "--gen", &format!("automatic:{inst}/digit-parity-2d.aut,{inst}/balanced3-z2.ds"),
        "--horizon", "8",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert_eq!(run.stdout.trim_end().len(), 8);
}

// ---------------------------------------------------------------------------
// normality
// ---------------------------------------------------------------------------

#[test]
fn normality_without_set_fails_with_usage_error() {
    let run = folner(&["normality", "--group", "n", "--gen", "prng", "--seed", "1", "--n", "100"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("missing --set for normality"), "stderr: {}", run.stderr);
}

#[test]
fn normality_rejects_non_json_output() {
    let run = folner(&[
        "normality", "--group", "n", "--gen", "prng", "--seed", "1", "--set", "all", "--n", "100",
        "--format", "csv",
    ]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("normality reports are json"), "stderr: {}", run.stderr);
}

#[test]
fn unknown_mode_is_rejected() {
    let run = folner(&[
        "normality", "--group", "n", "--gen", "prng", "--seed", "1", "--set", "all", "--n", "100",
        "--mode", "warble",
    ]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("unknown mode warble"), "stderr: {}", run.stderr);
}

#[test]
fn constant_stream_fails_the_normality_verdict_with_exit_2() {
    let run = folner(&[
        "normality", "--group", "n", "--gen", "constant:0", "--set", "all", "--mode", "simple",
        "--n", "1000",
    ]);
    assert_eq!(run.code, 2, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("\"verdict\": \"fail\""), "stdout: {}", run.stdout);
    // The absent symbol sits at its full reference probability away.
    assert!(run.stdout.contains("\"deviation\": 0.500000000000"), "stdout: {}", run.stdout);
}

#[test]
fn seeded_stream_passes_simple_normality_with_exit_0() {
    let run = folner(&[
        "normality", "--group", "n", "--gen", "prng", "--seed", "11", "--set", "all",
        "--mode", "simple", "--n", "20000",
    ]);
    assert_eq!(run.code, 0, "stdout: {}\nstderr: {}", run.stdout, run.stderr);
    assert!(run.stdout.contains("\"verdict\": \"pass\""), "stdout: {}", run.stdout);
    assert!(run.stdout.contains("\"mode\": \"simple\""), "stdout: {}", run.stdout);
}

#[test]
fn block_mode_skips_anchor_sets_below_the_visibility_floor() {
    // Along the evens no two consecutive points are both selected, so every
    // block domain of length >= 2 has zero visible anchors and must be
    // reported as skipped without dragging the verdict down.
    let run = folner(&[
        "normality", "--group", "n", "--gen", "prng", "--seed", "5", "--set", "evens",
        "--mode", "block", "--catalog", "intervals:3", "--n", "2000",
    ]);
    assert_eq!(run.code, 0, "stdout: {}\nstderr: {}", run.stdout, run.stderr);
    assert!(run.stdout.contains("\"skipped\": true"), "stdout: {}", run.stdout);
    assert!(run.stdout.contains("\"verdict\": \"pass\""), "stdout: {}", run.stdout);
}

#[test]
fn classical_mode_counts_selected_terms_up_to_the_horizon() {
    let run = folner(&[
        "normality", "--group", "n", "--gen", "prng", "--seed", "9", "--set", "residue:4,1",
        "--mode", "classical", "--horizon", "39999", "--catalog", "intervals:3",
    ]);
    assert_eq!(run.code, 0, "stdout: {}\nstderr: {}", run.stdout, run.stderr);
    assert_eq!(json_number(&run.stdout, "anchor_count") as u64, 10000);
    assert!(run.stdout.contains("\"mode\": \"classical\""), "stdout: {}", run.stdout);
}

// ---------------------------------------------------------------------------
// complexity
// ---------------------------------------------------------------------------

#[test]
fn complexity_csv_leads_with_the_rate_note() {
    let run = folner(&[
        "complexity", "--group", "n", "--gen", "thue-morse", "--catalog", "intervals:6",
        "--n", "4096",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let mut lines = run.stdout.lines();
    assert!(lines.next().unwrap().starts_with("# "), "note line");
    assert_eq!(lines.next().unwrap(), "m,domain_size,count,ratio");
    // The substitution stream counts 2, 4, 6, 10, 12, 16 blocks at m = 1..=6.
    let counts: Vec<&str> =
        lines.map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(counts, ["2", "4", "6", "10", "12", "16"]);
}

#[test]
fn eps_spellings_fraction_and_decimal_agree() {
    let base = [
        "complexity", "--group", "n", "--gen", "thue-morse", "--catalog", "intervals:6",
        "--n", "4096",
    ];
    let mut with_fraction = base.to_vec();
    with_fraction.extend(["--eps", "1/20"]);
    let mut with_decimal = base.to_vec();
    with_decimal.extend(["--eps", "0.05"]);
    let a = folner(&with_fraction);
    let b = folner(&with_decimal);
    assert_eq!(a.code, 0, "stderr: {}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.contains("surviving_density"), "stdout: {}", a.stdout);
}

#[test]
fn complexity_rejects_raw_output() {
    let run = folner(&[
        "complexity", "--group", "n", "--gen", "thue-morse", "--catalog", "intervals:3",
        "--n", "256", "--format", "raw",
    ]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("complexity supports csv or json output"), "stderr: {}", run.stderr);
}

#[test]
fn group_names_are_case_insensitive() {
    let lower = folner(&[
        "complexity", "--group", "z", "--gen", "thue-morse", "--catalog", "intervals:3",
        "--n", "512",
    ]);
    let upper = folner(&[
        "complexity", "--group", "Z", "--gen", "thue-morse", "--catalog", "intervals:3",
        "--n", "512",
    ]);
    assert_eq!(lower.code, 0, "stderr: {}", lower.stderr);
    assert_eq!(upper.code, 0, "stderr: {}", upper.stderr);
    assert_eq!(lower.stdout, upper.stdout);
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

#[test]
fn experiment_reports_density_bounds_with_the_verdict() {
    let run = folner(&[
        "experiment", "--group", "n", "--gen", "prng", "--seed", "3", "--set", "odds",
        "--n", "8000", "--catalog", "intervals:3",
    ]);
    assert_eq!(run.code, 0, "stdout: {}\nstderr: {}", run.stdout, run.stderr);
    let lower = json_number(&run.stdout, "lower_density");
    let upper = json_number(&run.stdout, "upper_density");
    assert!(lower <= upper, "bounds out of order: {lower} > {upper}");
    assert!((lower - 0.5).abs() < 0.01 && (upper - 0.5).abs() < 0.01, "odds have density 1/2");
    assert!(run.stdout.contains("\"verdict\": \"pass\""), "stdout: {}", run.stdout);
}

#[test]
fn experiment_rejects_non_json_output() {
    let run = folner(&[
        "experiment", "--group", "n", "--gen", "prng", "--seed", "3", "--set", "odds",
        "--n", "100", "--catalog", "intervals:2", "--format", "csv",
    ]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("experiment reports are json"), "stderr: {}", run.stderr);
}

// ---------------------------------------------------------------------------
// shared argument handling
// ---------------------------------------------------------------------------

#[test]
fn unknown_group_is_rejected() {
    let run = folner(&["generate", "--group", "q8", "--gen", "prng", "--seed", "1", "--horizon", "4"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("unknown group q8"), "stderr: {}", run.stderr);
}

#[test]
fn unknown_generator_is_rejected() {
    let run = folner(&["generate", "--group", "n", "--gen", "warble", "--horizon", "4"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("unknown generator warble"), "stderr: {}", run.stderr);
}

#[test]
fn seeded_generator_requires_a_seed() {
    let run = folner(&["generate", "--group", "n", "--gen", "prng", "--horizon", "4"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("seed"), "stderr: {}", run.stderr);
}

#[test]
fn zero_workers_is_rejected() {
    let run = folner(&[
        "generate", "--group", "n", "--gen", "thue-morse", "--horizon", "4", "--workers", "0",
    ]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("workers must be at least 1"), "stderr: {}", run.stderr);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = scratch("config");
    let path = dir.join("run.conf");
    std::fs::write(&path, "# stream settings\ngroup = n\ngen = thue-morse\nhorizon = 8\n")
        .expect("write config");
    let from_file = folner(&["generate", "--config", path.to_str().unwrap()]);
    assert_eq!(from_file.code, 0, "stderr: {}", from_file.stderr);
    assert_eq!(from_file.stdout, "01101001\n");
    let overridden = folner(&["generate", "--config", path.to_str().unwrap(), "--horizon", "4"]);
    assert_eq!(overridden.code, 0, "stderr: {}", overridden.stderr);
    assert_eq!(overridden.stdout, "0110\n");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = scratch("badkey");
    let path = dir.join("bad.conf");
    std::fs::write(&path, "wobble = 3\n").expect("write config");
    let run = folner(&["generate", "--config", path.to_str().unwrap()]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("unknown key wobble"), "stderr: {}", run.stderr);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn out_writes_the_report_file_without_a_sidecar() {
    // Config sidecars accompany generated data files, which say nothing
    // about their own provenance; reports are self-describing and get none.
    let dir = scratch("report-out");
    let path = dir.join("report.json");
    let run = folner(&[
        "normality", "--group", "n", "--gen", "prng", "--seed", "11", "--set", "all",
        "--mode", "simple", "--n", "20000", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.is_empty(), "report goes to the file, not stdout");
    let report = std::fs::read_to_string(&path).expect("report file");
    assert!(report.contains("\"verdict\": \"pass\""), "report: {report}");
    assert!(report.contains("\"mode\": \"simple\""), "report: {report}");
    assert!(!dir.join("report.json.config").exists(), "no sidecar for reports");
    std::fs::remove_dir_all(&dir).ok();
}
