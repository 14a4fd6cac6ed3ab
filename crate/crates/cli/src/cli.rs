//! Command-line front end.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use cipherchain_core::harness::{self, HarnessConfig};
use cipherchain_core::mcmc::{self, ChainConfig, InitialKey, TraceStep};
use cipherchain_core::{Alphabet, BigramModel, CiParams, Key, KeySpace, NormalizedText, PrngKind, RandomSource};

use crate::config::{ConfigFile, Resolver};
use crate::error::{exit, CliError, Result};
use crate::formats;
use crate::report;
use crate::runner::{self, Grid};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  internal error
  2  usage error (unknown flag, missing argument)
  3  file could not be read or written
  4  invalid configuration or option combination
  5  invalid input data (malformed key or model file, empty ciphertext)

Every option can also be set in a --config file of key=value lines using
the long option name as key. Flags override the file; the file overrides
defaults.";

#[derive(Debug, Parser)]
#[command(name = "cipherchain", version, about = "MCMC attack on classical ciphers with pluggable PRNGs", after_help = EXIT_CODES)]
pub struct Cli {
    /// Flat key=value file supplying option values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count reference bigrams from a corpus and optionally cache them as CSV
    BuildModel(BuildModelArgs),
    /// Encrypt a text with a given or random key
    Encrypt(EncryptArgs),
    /// Attack one ciphertext
    Attack(AttackArgs),
    /// Run an experiment grid with one generator
    Experiment(ExperimentArgs),
    /// Run the same experiment grid with every generator
    Compare(CompareArgs),
}

#[derive(Debug, Args, Default)]
pub struct AlphabetArgs {
    /// Keep word spacing as a 27th symbol
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub space: Option<bool>,
    /// Custom alphabet, one character per symbol
    #[arg(long)]
    pub alphabet: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// Reference corpus file (repeatable)
    #[arg(long, value_name = "FILE")]
    pub corpus: Vec<String>,
    /// Bigram count cache written by build-model
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Additive smoothing for bigram frequencies [default: 1]
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct CipherArgs {
    /// substitution, transposition or combined [default: substitution]
    #[arg(long)]
    pub cipher: Option<CipherKind>,
    /// Transposition block length
    #[arg(long)]
    pub period: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct PrngArgs {
    /// drand48, xorshift128 or ci [default: xorshift128]
    #[arg(long)]
    pub prng: Option<PrngKind>,
    /// Seed (master seed for experiments) [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Chaotic-iteration state width in bits [default: 32]
    #[arg(long)]
    pub ci_bits: Option<u32>,
    /// Chaotic-iteration constant c [default: 1]
    #[arg(long)]
    pub ci_c: Option<u32>,
}

#[derive(Debug, Args, Default)]
pub struct ChainArgs {
    /// Metropolis steps [default: 10000]
    #[arg(long)]
    pub iterations: Option<u64>,
    /// Scaling exponent on the plausibility ratio [default: 1]
    #[arg(long)]
    pub p: Option<f64>,
    /// random, frequency or truth [default: random]
    #[arg(long)]
    pub init: Option<InitKind>,
    /// Report the best key seen instead of the final one [default: true]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub track_best: Option<bool>,
}

#[derive(Debug, Args)]
pub struct BuildModelArgs {
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Where to write the count CSV
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[command(flatten)]
    pub cipher: CipherArgs,
    #[command(flatten)]
    pub prng: PrngArgs,
    /// Plaintext file
    #[arg(long, value_name = "FILE")]
    pub text: Option<PathBuf>,
    /// Key file; a random key is drawn when absent
    #[arg(long, value_name = "FILE")]
    pub key: Option<PathBuf>,
    /// Ciphertext output (stdout when absent)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Where to write the key used
    #[arg(long, value_name = "FILE")]
    pub key_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub cipher: CipherArgs,
    #[command(flatten)]
    pub prng: PrngArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Ciphertext file
    #[arg(long, value_name = "FILE")]
    pub ciphertext: Option<PathBuf>,
    /// True key, for --init truth and key accuracy
    #[arg(long, value_name = "FILE")]
    pub truth_key: Option<PathBuf>,
    /// Known plaintext, for text accuracy
    #[arg(long, value_name = "FILE")]
    pub plaintext: Option<PathBuf>,
    /// Per-step CSV trace output
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// Decrypted text output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Recovered key output
    #[arg(long, value_name = "FILE")]
    pub key_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub cipher: CipherArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Test plaintext, encrypted under a fresh key for every run
    #[arg(long, value_name = "FILE")]
    pub text: Option<PathBuf>,
    /// Use only the first N symbols of the normalized text
    #[arg(long)]
    pub max_symbols: Option<usize>,
    /// Runs per experiment [default: 100]
    #[arg(long)]
    pub runs: Option<u64>,
    /// Number of experiments [default: 5]
    #[arg(long)]
    pub experiments: Option<u32>,
    /// Text accuracy counted as a successful decryption [default: 0.9]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Worker threads, 0 for all cores [default: 0]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Results CSV
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Per-generator means CSV
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
    /// JSON-lines seed ledger
    #[arg(long, value_name = "FILE")]
    pub seeds: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub prng: PrngArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Master seed [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Chaotic-iteration state width in bits [default: 32]
    #[arg(long)]
    pub ci_bits: Option<u32>,
    /// Chaotic-iteration constant c [default: 1]
    #[arg(long)]
    pub ci_c: Option<u32>,
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!("expected one of: {}", [$($text),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }
    };
}

keyword_enum!(CipherKind {
    Substitution => "substitution",
    Transposition => "transposition",
    Combined => "combined",
});

keyword_enum!(InitKind {
    Random => "random",
    Frequency => "frequency",
    Truth => "truth",
});

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut r = Resolver::new(file);
    match cli.command {
        Command::BuildModel(a) => build_model(&mut r, a),
        Command::Encrypt(a) => encrypt(&mut r, a),
        Command::Attack(a) => attack(&mut r, a),
        Command::Experiment(a) => {
            let (kind, seed, ci) = prng_settings(&mut r, &a.prng)?;
            grid_command(&mut r, a.grid, vec![kind], seed, ci)
        }
        Command::Compare(a) => {
            let seed = r.pick("seed", a.seed, 1)?;
            let ci = ci_settings(&mut r, a.ci_bits, a.ci_c)?;
            grid_command(&mut r, a.grid, PrngKind::ALL.to_vec(), seed, ci)
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn require(path: Option<PathBuf>, r: &mut Resolver, key: &str) -> Result<PathBuf> {
    r.pick_opt(key, path.map(|p| p.display().to_string()))?
        .map(PathBuf::from)
        .ok_or_else(|| config_err(format!("--{key} is required")))
}

fn optional_path(path: Option<PathBuf>, r: &mut Resolver, key: &str) -> Result<Option<PathBuf>> {
    Ok(r.pick_opt(key, path.map(|p| p.display().to_string()))?.map(PathBuf::from))
}

fn alphabet_settings(r: &mut Resolver, a: &AlphabetArgs) -> Result<Alphabet> {
    let space = r.pick("space", a.space, false)?;
    let custom = r.pick_opt("alphabet", a.alphabet.clone())?;
    match custom {
        Some(_) if space => Err(config_err("--alphabet and --space cannot be combined")),
        Some(symbols) => Ok(Alphabet::new(symbols.chars())?),
        None if space => Ok(Alphabet::latin_with_space()),
        None => Ok(Alphabet::latin()),
    }
}

enum ModelSource {
    Corpus(Vec<PathBuf>),
    Cache(PathBuf),
}

fn model_settings(r: &mut Resolver, m: &ModelArgs) -> Result<(ModelSource, f64)> {
    let delta = r.pick("delta", m.delta, 1.0)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(config_err(format!("--delta must be >= 0, got {delta}")));
    }
    let corpus = r.pick_list("corpus", m.corpus.clone())?;
    let cache = optional_path(m.model.clone(), r, "model")?;
    let source = match (corpus.is_empty(), cache) {
        (false, Some(_)) => return Err(config_err("--corpus and --model cannot be combined")),
        (false, None) => ModelSource::Corpus(corpus.into_iter().map(PathBuf::from).collect()),
        (true, Some(path)) => ModelSource::Cache(path),
        (true, None) => return Err(config_err("one of --corpus or --model is required")),
    };
    Ok((source, delta))
}

fn load_model(source: &ModelSource, delta: f64, alphabet: &Alphabet) -> Result<BigramModel> {
    match source {
        ModelSource::Corpus(paths) => {
            let corpus = alphabet.normalize(&formats::read_corpus(paths)?);
            Ok(BigramModel::build(&corpus, alphabet.len(), delta)?)
        }
        ModelSource::Cache(path) => formats::read_model(path, alphabet, delta),
    }
}

fn key_space_settings(r: &mut Resolver, c: &CipherArgs, min_period: usize) -> Result<KeySpace> {
    let cipher = r.pick("cipher", c.cipher, CipherKind::Substitution)?;
    let period = r.pick_opt("period", c.period)?;
    match (cipher, period) {
        (CipherKind::Substitution, None) => Ok(KeySpace::Substitution),
        (CipherKind::Substitution, Some(_)) => {
            Err(config_err("--period only applies to transposition and combined ciphers"))
        }
        (_, None) => Err(config_err(format!("--cipher {cipher} needs --period"))),
        (_, Some(k)) if k < min_period => Err(config_err(format!(
            "--period must be at least {min_period}, got {k}"
        ))),
        (CipherKind::Transposition, Some(period)) => Ok(KeySpace::Transposition { period }),
        (CipherKind::Combined, Some(period)) => Ok(KeySpace::Combined { period }),
    }
}

fn ci_settings(r: &mut Resolver, bits: Option<u32>, c: Option<u32>) -> Result<CiParams> {
    let n_bits = r.pick("ci-bits", bits, 32)?;
    let c_iter = r.pick("ci-c", c, 1)?;
    if !(1..=64).contains(&n_bits) {
        return Err(config_err(format!("--ci-bits must be in 1..=64, got {n_bits}")));
    }
    Ok(CiParams { n_bits, c_iter })
}

fn prng_settings(r: &mut Resolver, p: &PrngArgs) -> Result<(PrngKind, u64, CiParams)> {
    let kind = r.pick("prng", p.prng, PrngKind::Xorshift128)?;
    let seed = r.pick("seed", p.seed, 1)?;
    let ci = ci_settings(r, p.ci_bits, p.ci_c)?;
    Ok((kind, seed, ci))
}

fn chain_settings(r: &mut Resolver, c: &ChainArgs, key_space: KeySpace) -> Result<(ChainConfig, InitKind)> {
    let iterations = r.pick("iterations", c.iterations, 10_000)?;
    let p = r.pick("p", c.p, 1.0)?;
    if !(p.is_finite() && p > 0.0) {
        return Err(config_err(format!("--p must be > 0, got {p}")));
    }
    let init = r.pick("init", c.init, InitKind::Random)?;
    let track_best = r.pick("track-best", c.track_best, true)?;
    let cfg = ChainConfig {
        iterations,
        p,
        track_best,
        key_space,
        init: match init {
            InitKind::Frequency => InitialKey::FrequencyRank,
            InitKind::Random | InitKind::Truth => InitialKey::Random,
        },
        ..ChainConfig::default()
    };
    Ok((cfg, init))
}

fn finish_settings(r: &Resolver) -> Result<()> {
    r.check_unused()?;
    eprint!("# effective configuration\n{}", r.render());
    Ok(())
}

fn write_or_print(path: Option<&PathBuf>, contents: &[u8]) -> Result<()> {
    match path {
        Some(p) => formats::write_atomic(p, contents),
        None => std::io::stdout()
            .write_all(contents)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn build_model(r: &mut Resolver, a: BuildModelArgs) -> Result<()> {
    let alphabet = alphabet_settings(r, &a.alphabet)?;
    let (source, delta) = model_settings(r, &a.model)?;
    if matches!(source, ModelSource::Cache(_)) {
        return Err(config_err("build-model reads --corpus, not --model"));
    }
    let out = optional_path(a.out, r, "out")?;
    finish_settings(r)?;

    let model = load_model(&source, delta, &alphabet)?;
    let n = alphabet.len();
    let pairs: u64 = model.counts().iter().sum();
    println!("symbols: {}", model.corpus_len());
    println!("pairs: {pairs}");
    let mut ranked: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    ranked.sort_by_key(|&(a, b)| std::cmp::Reverse(model.count(a, b)));
    println!("top bigrams:");
    for &(x, y) in ranked.iter().take(5) {
        println!(
            "  {}{}  {:>8}  {:.5}",
            alphabet.symbols()[x],
            alphabet.symbols()[y],
            model.count(x, y),
            model.probability(x, y)
        );
    }
    if let Some(path) = out {
        formats::write_atomic(&path, &formats::model_to_csv(&model, &alphabet)?)?;
    }
    Ok(())
}

fn encrypt(r: &mut Resolver, a: EncryptArgs) -> Result<()> {
    let alphabet = alphabet_settings(r, &a.alphabet)?;
    let space = key_space_settings(r, &a.cipher, 1)?;
    let (kind, seed, ci) = prng_settings(r, &a.prng)?;
    let text_path = require(a.text, r, "text")?;
    let key_path = optional_path(a.key, r, "key")?;
    let out = optional_path(a.out, r, "out")?;
    let key_out = optional_path(a.key_out, r, "key-out")?;
    finish_settings(r)?;

    let plaintext = alphabet.normalize(&formats::read_text(&text_path)?);
    let key = match &key_path {
        Some(p) => formats::read_key(p, space, alphabet.len())?,
        None => {
            let mut src = RandomSource::seeded_with(kind, seed, ci)?;
            Key::random(space, alphabet.len(), &mut src)?
        }
    };
    let ciphertext = key.encrypt(&plaintext)?;
    let mut rendered = alphabet.render(&ciphertext);
    rendered.push('\n');
    write_or_print(out.as_ref(), rendered.as_bytes())?;
    let key_text = formats::format_key(&key);
    match key_out {
        Some(p) => formats::write_atomic(&p, key_text.as_bytes())?,
        None if key_path.is_none() => eprint!("key: {key_text}"),
        None => {}
    }
    Ok(())
}

fn attack(r: &mut Resolver, a: AttackArgs) -> Result<()> {
    let alphabet = alphabet_settings(r, &a.alphabet)?;
    let (source, delta) = model_settings(r, &a.model)?;
    let space = key_space_settings(r, &a.cipher, 2)?;
    let (kind, seed, ci) = prng_settings(r, &a.prng)?;
    let (mut chain, init) = chain_settings(r, &a.chain, space)?;
    let ct_path = require(a.ciphertext, r, "ciphertext")?;
    let truth_path = optional_path(a.truth_key, r, "truth-key")?;
    let plain_path = optional_path(a.plaintext, r, "plaintext")?;
    let trace_path = optional_path(a.trace, r, "trace")?;
    let out = optional_path(a.out, r, "out")?;
    let key_out = optional_path(a.key_out, r, "key-out")?;
    if init == InitKind::Truth && truth_path.is_none() {
        return Err(config_err("--init truth needs --truth-key"));
    }
    finish_settings(r)?;

    let model = load_model(&source, delta, &alphabet)?;
    let ciphertext = alphabet.normalize(&formats::read_text(&ct_path)?);
    let truth = truth_path
        .as_ref()
        .map(|p| formats::read_key(p, space, alphabet.len()))
        .transpose()?;
    if init == InitKind::Truth {
        chain.init = InitialKey::Given(truth.clone().expect("checked above"));
    }
    let plaintext = plain_path
        .as_ref()
        .map(|p| formats::read_text(p).map(|t| alphabet.normalize(&t)))
        .transpose()?;

    let mut src = RandomSource::seeded_with(kind, seed, ci)?;
    let mut steps: Vec<TraceStep> = Vec::new();
    let record = trace_path.is_some();
    let state = mcmc::run_chain_traced(&ciphertext, &model, &chain, &mut src, |s| {
        if record {
            steps.push(s);
        }
    })?;

    let found = state.answer();
    let decrypted = found.decrypt(&ciphertext)?;
    let key_text = formats::format_key(found);
    print!("key: {key_text}");
    println!("log_score: {:.6}", state.best_score);
    println!("accepted: {}/{}", state.n_accepted, state.n_proposed);
    if let Some(t) = &truth {
        println!("key_accuracy: {:.6}", harness::key_accuracy_any(found, t)?);
    }
    if let Some(p) = &plaintext {
        println!("text_accuracy: {:.6}", harness::text_accuracy(&decrypted, p)?);
    }
    let mut rendered = alphabet.render(&decrypted);
    rendered.push('\n');
    match &out {
        Some(p) => formats::write_atomic(p, rendered.as_bytes())?,
        None => print!("plaintext: {rendered}"),
    }
    if let Some(p) = key_out {
        formats::write_atomic(&p, key_text.as_bytes())?;
    }
    if let Some(p) = trace_path {
        formats::write_atomic(&p, &report::trace_csv(&steps)?)?;
    }
    Ok(())
}

fn grid_command(r: &mut Resolver, a: GridArgs, kinds: Vec<PrngKind>, seed: u64, ci: CiParams) -> Result<()> {
    let alphabet = alphabet_settings(r, &a.alphabet)?;
    let (source, delta) = model_settings(r, &a.model)?;
    let space = key_space_settings(r, &a.cipher, 2)?;
    let (chain, init) = chain_settings(r, &a.chain, space)?;
    let text_path = require(a.text, r, "text")?;
    let max_symbols = r.pick_opt("max-symbols", a.max_symbols)?;
    let runs = r.pick("runs", a.runs, 100)?;
    let experiments = r.pick("experiments", a.experiments, 5)?;
    let threshold = r.pick("threshold", a.threshold, harness::DEFAULT_SUCCESS_THRESHOLD)?;
    let jobs = r.pick("jobs", a.jobs, 0)?;
    let out = optional_path(a.out, r, "out")?;
    let summary = optional_path(a.summary, r, "summary")?;
    let seeds = optional_path(a.seeds, r, "seeds")?;
    if runs == 0 {
        return Err(config_err("--runs must be at least 1"));
    }
    if experiments == 0 {
        return Err(config_err("--experiments must be at least 1"));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(config_err(format!("--threshold must be in [0, 1], got {threshold}")));
    }
    finish_settings(r)?;

    let model = load_model(&source, delta, &alphabet)?;
    let mut plaintext: NormalizedText = alphabet.normalize(&formats::read_text(&text_path)?);
    if let Some(n) = max_symbols {
        plaintext = plaintext.truncated(n);
    }
    if plaintext.is_empty() {
        return Err(cipherchain_core::Error::EmptyCiphertext.into());
    }
    let cfg = HarnessConfig {
        chain,
        success_threshold: threshold,
        ci,
        start_at_truth: init == InitKind::Truth,
    };
    let grid = Grid {
        kinds,
        experiments,
        runs,
        master_seed: seed,
    };
    let result = runner::run_grid(&plaintext, &model, &cfg, &grid, jobs)?;
    print!("{}", report::render_tables(&result.reports));
    if let Some(p) = out {
        formats::write_atomic(&p, &report::report_csv(&result.reports)?)?;
    }
    if let Some(p) = summary {
        formats::write_atomic(&p, &report::summary_csv(&result.reports)?)?;
    }
    if let Some(p) = seeds {
        formats::write_atomic(&p, &report::seed_ledger(&result.seeds)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn keyword_enums_parse() {
        assert_eq!("combined".parse::<CipherKind>(), Ok(CipherKind::Combined));
        assert!("vigenere".parse::<CipherKind>().is_err());
        assert_eq!(InitKind::Frequency.to_string(), "frequency");
    }
}
