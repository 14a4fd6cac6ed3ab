//! End-to-end runs of the `cipherchain` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cipherchain::runner::{run_grid, Grid};
use cipherchain_core::harness::{compare_prngs, HarnessConfig};
use cipherchain_core::{Alphabet, BigramModel, ChainConfig, PrngKind};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn corpus_args() -> Vec<String> {
    ["asyoulik.txt", "lcet10.txt", "plrabn12.txt"]
        .iter()
        .flat_map(|n| ["--corpus".to_string(), data(&format!("corpus/{n}")).display().to_string()])
        .collect()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cipherchain")).args(args).output().unwrap()
}

fn run_with(args: &[&str], extra: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cipherchain"))
        .args(args)
        .args(extra)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn encrypt_then_attack_from_truth_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (ct, key) = (dir.path().join("ct.txt"), dir.path().join("key.txt"));
    let text = s(&data("test/alice_ch1.txt"));
    let o = run(&["encrypt", "--text", &text, "--seed", "9", "--out", &s(&ct), "--key-out", &s(&key)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&key).unwrap().split_whitespace().count(), 26);

    let out = dir.path().join("pt.txt");
    let o = run_with(
        &[
            "attack", "--ciphertext", &s(&ct), "--iterations", "0", "--init", "truth", "--truth-key", &s(&key),
            "--plaintext", &text, "--out", &s(&out),
        ],
        &corpus_args(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let printed = stdout(&o);
    assert!(printed.contains("text_accuracy: 1.000000"), "{printed}");
    assert!(printed.contains("key_accuracy: 1.000000"));
    // with no steps the printed key is the starting key
    let key_text = std::fs::read_to_string(&key).unwrap();
    assert!(printed.contains(&format!("key: {key_text}")));
    let alphabet = Alphabet::latin();
    let original = alphabet.render(&alphabet.normalize(&std::fs::read_to_string(data("test/alice_ch1.txt")).unwrap()));
    assert_eq!(std::fs::read_to_string(&out).unwrap().trim_end(), original);
}

#[test]
fn combined_cipher_round_trips_through_key_files() {
    let dir = tempfile::tempdir().unwrap();
    let (ct, key) = (dir.path().join("ct.txt"), dir.path().join("key.txt"));
    let text = s(&data("test/alice_ch1.txt"));
    let o = run(&[
        "encrypt", "--text", &text, "--cipher", "combined", "--period", "5", "--out", &s(&ct), "--key-out", &s(&key),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&key).unwrap().lines().count(), 2);
    let o = run_with(
        &[
            "attack", "--ciphertext", &s(&ct), "--cipher", "combined", "--period", "5", "--iterations", "0",
            "--init", "truth", "--truth-key", &s(&key), "--plaintext", &text,
        ],
        &corpus_args(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("text_accuracy: 1.000000"));
}

#[test]
fn effective_configuration_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let ct = dir.path().join("ct.txt");
    std::fs::write(&ct, "WKH TXLFN EURZQ IRA").unwrap();
    let o = run_with(&["attack", "--ciphertext", &s(&ct), "--iterations", "50", "--seed", "77"], &corpus_args());
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    for line in ["iterations=50", "seed=77", "p=1", "prng=xorshift128", "delta=1", "track-best=true"] {
        assert!(err.lines().any(|l| l == line), "missing {line} in\n{err}");
    }
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let ct = dir.path().join("ct.txt");
    std::fs::write(&ct, "ABCABCABC").unwrap();
    let cfg = dir.path().join("run.conf");
    let corpus = ["asyoulik.txt", "lcet10.txt"].map(|n| s(&data(&format!("corpus/{n}")))).join(",");
    std::fs::write(&cfg, format!("# attack settings\niterations = 20\np = 0.5\ncorpus = {corpus}\n")).unwrap();
    let o = run(&["--config", &s(&cfg), "attack", "--ciphertext", &s(&ct), "--iterations", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.lines().any(|l| l == "iterations=3"), "flag wins: {err}");
    assert!(err.lines().any(|l| l == "p=0.5"), "file beats default: {err}");
    assert!(err.lines().any(|l| l == "seed=1"), "default when unset: {err}");
    assert!(stdout(&o).contains("accepted: ") && stdout(&o).contains("/3"));
}

#[test]
fn exit_codes_follow_the_documented_table() {
    let dir = tempfile::tempdir().unwrap();
    let ct = dir.path().join("ct.txt");
    std::fs::write(&ct, "HELLO").unwrap();
    let ct = s(&ct);

    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("Exit codes:"));
    assert_eq!(run(&["--version"]).status.code(), Some(0));

    assert_eq!(run(&["attack", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["attack", "--iterations", "many"]).status.code(), Some(2));

    let missing = run(&["attack", "--ciphertext", &ct, "--corpus", "/nonexistent/corpus.txt"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(stderr(&missing).contains("/nonexistent/corpus.txt"));

    let corpus = s(&data("corpus/asyoulik.txt"));
    let both = run(&["attack", "--ciphertext", &ct, "--corpus", &corpus, "--space", "--alphabet", "ABC"]);
    assert_eq!(both.status.code(), Some(4));
    assert_eq!(run(&["attack", "--ciphertext", &ct, "--corpus", &corpus, "--p", "0"]).status.code(), Some(4));
    assert_eq!(run(&["attack", "--ciphertext", &ct]).status.code(), Some(4));
    assert_eq!(run(&["attack", "--ciphertext", &ct, "--corpus", &corpus, "--cipher", "transposition"]).status.code(), Some(4));
    assert_eq!(run(&["compare", "--text", &ct, "--corpus", &corpus, "--runs", "0"]).status.code(), Some(4));
    assert_eq!(run(&["attack", "--ciphertext", &ct, "--corpus", &corpus, "--init", "truth"]).status.code(), Some(4));

    let bad_key = dir.path().join("bad.key");
    std::fs::write(&bad_key, "0 1 2").unwrap();
    let o = run(&["attack", "--ciphertext", &ct, "--corpus", &corpus, "--truth-key", &s(&bad_key)]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "1234 !!").unwrap();
    assert_eq!(run(&["attack", "--ciphertext", &s(&empty), "--corpus", &corpus]).status.code(), Some(5));

    let unknown = dir.path().join("x.conf");
    std::fs::write(&unknown, "iteration = 5\n").unwrap();
    let o = run(&["--config", &s(&unknown), "attack", "--ciphertext", &ct, "--corpus", &corpus]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("unknown config key iteration"));
}

#[test]
fn cached_model_gives_the_same_attack_as_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.csv");
    let o = run_with(&["build-model", "--out", &s(&model)], &corpus_args());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("symbols: 779439"));
    assert!(std::fs::read_to_string(&model).unwrap().starts_with("sym1,sym2,count\n"));

    let ct = dir.path().join("ct.txt");
    let text = s(&data("test/alice_ch1.txt"));
    assert!(run(&["encrypt", "--text", &text, "--out", &s(&ct), "--seed", "4"]).status.success());
    let args = ["attack", "--ciphertext", &s(&ct), "--iterations", "2000", "--seed", "5"];
    let from_corpus = run_with(&args, &corpus_args());
    let from_cache = run_with(&args, &["--model".to_string(), s(&model)]);
    assert!(from_corpus.status.success() && from_cache.status.success());
    assert_eq!(stdout(&from_corpus), stdout(&from_cache));
}

#[test]
fn attack_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let ct = dir.path().join("ct.txt");
    std::fs::write(&ct, "XLI UYMGO FVSAR JSB NYQTW SZIV XLI PEDC HSK").unwrap();
    let trace = dir.path().join("trace.csv");
    let o = run_with(
        &["attack", "--ciphertext", &s(&ct), "--iterations", "100", "--trace", &s(&trace), "--prng", "ci"],
        &corpus_args(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,log_score,accepted"));
    assert_eq!(lines.count(), 100);
}

#[test]
fn compare_outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let text = s(&data("test/alice_ch1.txt"));
    let mut outputs = Vec::new();
    for jobs in ["1", "4"] {
        let (csv, seeds, summary) = (
            dir.path().join(format!("r{jobs}.csv")),
            dir.path().join(format!("s{jobs}.jsonl")),
            dir.path().join(format!("m{jobs}.csv")),
        );
        let o = run_with(
            &[
                "compare", "--text", &text, "--runs", "4", "--experiments", "2", "--iterations", "300", "--jobs", jobs,
                "--out", &s(&csv), "--seeds", &s(&seeds), "--summary", &s(&summary), "--seed", "11",
            ],
            &corpus_args(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("per-generator means"));
        outputs.push((
            std::fs::read(&csv).unwrap(),
            std::fs::read(&seeds).unwrap(),
            std::fs::read(&summary).unwrap(),
            stdout(&o),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(csv.lines().next(), Some("prng,en,ac,ac_support,nsd,runs,iterations,p,threshold,seed"));
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    assert_eq!(String::from_utf8(outputs[0].1.clone()).unwrap().lines().count(), 3 * 2 * 4);
}

#[test]
fn experiment_with_truth_start_scores_perfectly() {
    let text = s(&data("test/alice_ch1.txt"));
    let o = run_with(
        &["experiment", "--text", &text, "--runs", "3", "--experiments", "1", "--iterations", "0", "--init", "truth"],
        &corpus_args(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("xorshift128 prng (3 runs per experiment)"));
    assert!(out.contains("   1    1.0000      1.0000      3"), "{out}");
}

#[test]
fn parallel_grid_equals_sequential_core() {
    let alphabet = Alphabet::latin();
    let corpus = alphabet.normalize(&std::fs::read_to_string(data("corpus/asyoulik.txt")).unwrap());
    let model = BigramModel::build(&corpus, 26, 1.0).unwrap();
    let pt = alphabet.normalize(&std::fs::read_to_string(data("test/alice_ch1.txt")).unwrap()).truncated(400);
    let cfg = HarnessConfig { chain: ChainConfig { iterations: 200, ..ChainConfig::default() }, ..HarnessConfig::default() };
    let grid = Grid { kinds: PrngKind::ALL.to_vec(), experiments: 2, runs: 5, master_seed: 3 };
    let parallel = run_grid(&pt, &model, &cfg, &grid, 8).unwrap();
    let sequential = compare_prngs(&pt, &model, &cfg, 2, 5, 3).unwrap();
    assert_eq!(parallel.reports, sequential);
}
