//! Experiment protocol: encrypt one fixed text under many random keys, attack
//! each ciphertext, and summarize the runs as average key correctness (AC)
//! and number of successful decryptions (NSD).
//!
//! Seeds form a tree: master seed -> experiment seed (per experiment number)
//! -> run seed (per run). The true key of a run is drawn from a separate
//! xorshift128 stream keyed by the run seed, so every generator under
//! comparison attacks exactly the same ciphertexts.

use alloc::vec::Vec;

use crate::cipher::{Key, NormalizedText, SubstitutionKey, TranspositionKey};
use crate::error::{Error, Result};
use crate::langmodel::BigramModel;
use crate::mcmc::{run_chain, ChainConfig, InitialKey};
use crate::prng::{derive_seed, CiParams, PrngKind, RandomSource, SplitMix64, Xorshift128};

pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 0.90;

/// Stream label mixed into a run seed to draw that run's true key.
const TRUTH_STREAM: u64 = 0x0074_7275_7468;

/// Fraction of plaintext symbols whose image matches the true key.
pub fn key_accuracy(found: &SubstitutionKey, truth: &SubstitutionKey) -> Result<f64> {
    check_len(found.len(), truth.len())?;
    Ok(fraction_equal(found.images(), truth.images()))
}

/// [`key_accuracy`] restricted to plaintext symbols that occur in
/// `plaintext`, i.e. whose images occur in the ciphertext. Vacuously 1.0
/// when no symbol occurs.
pub fn key_accuracy_on_support(
    found: &SubstitutionKey,
    truth: &SubstitutionKey,
    plaintext: &NormalizedText,
) -> Result<f64> {
    check_len(found.len(), truth.len())?;
    let mut present = alloc::vec![false; truth.len()];
    for &s in plaintext.as_slice() {
        if let Some(slot) = present.get_mut(usize::from(s)) {
            *slot = true;
        }
    }
    let (mut hit, mut total) = (0usize, 0usize);
    for (i, _) in present.iter().enumerate().filter(|(_, &p)| p) {
        total += 1;
        hit += usize::from(found.images()[i] == truth.images()[i]);
    }
    Ok(if total == 0 { 1.0 } else { hit as f64 / total as f64 })
}

/// Fraction of positions where the two texts agree; 1.0 for empty texts.
pub fn text_accuracy(decrypted: &NormalizedText, plaintext: &NormalizedText) -> Result<f64> {
    check_len(decrypted.len(), plaintext.len()).map_err(|_| Error::LengthMismatch {
        left: decrypted.len(),
        right: plaintext.len(),
    })?;
    Ok(fraction_equal(decrypted.as_slice(), plaintext.as_slice()))
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::KeySizeMismatch { expected, found });
    }
    Ok(())
}

fn fraction_equal<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    same as f64 / a.len() as f64
}

fn transposition_accuracy(found: &TranspositionKey, truth: &TranspositionKey) -> Result<f64> {
    check_len(found.period(), truth.period())?;
    Ok(fraction_equal(found.order(), truth.order()))
}

/// Key accuracy for any key family. For combined keys, every substitution
/// image and every column position counts once.
pub fn key_accuracy_any(found: &Key, truth: &Key) -> Result<f64> {
    match (found, truth) {
        (Key::Substitution(f), Key::Substitution(t)) => key_accuracy(f, t),
        (Key::Transposition(f), Key::Transposition(t)) => transposition_accuracy(f, t),
        (Key::Combined(f), Key::Combined(t)) => {
            let n = t.substitution.len() as f64;
            let k = t.transposition.period() as f64;
            let sub = key_accuracy(&f.substitution, &t.substitution)?;
            let trans = transposition_accuracy(&f.transposition, &t.transposition)?;
            Ok((sub * n + trans * k) / (n + k))
        }
        _ => Err(Error::KeySizeMismatch {
            expected: 0,
            found: 0,
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub chain: ChainConfig,
    /// Minimum text accuracy for a run to count as a successful decryption.
    pub success_threshold: f64,
    pub ci: CiParams,
    /// Start every chain at the true key; a sanity mode.
    pub start_at_truth: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            chain: ChainConfig::default(),
            success_threshold: DEFAULT_SUCCESS_THRESHOLD,
            ci: CiParams::default(),
            start_at_truth: false,
        }
    }
}

impl HarnessConfig {
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        if !(0.0..=1.0).contains(&self.success_threshold) {
            return Err(Error::InvalidThreshold(self.success_threshold));
        }
        if self.ci.n_bits == 0 || self.ci.n_bits > 64 {
            return Err(Error::InvalidStateWidth(self.ci.n_bits));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub run: u64,
    pub seed: u64,
    pub key_accuracy: f64,
    pub key_accuracy_support: f64,
    pub text_accuracy: f64,
    pub success: bool,
    pub final_log_score: f64,
    pub best_log_score: f64,
    pub accepted: u64,
}

/// One row of a generator's results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    /// Experiment number, from 1.
    pub en: u32,
    /// Mean key accuracy over all alphabet positions.
    pub ac: f64,
    /// Mean key accuracy over symbols present in the text.
    pub ac_support: f64,
    /// Number of runs meeting the success threshold.
    pub nsd: u64,
    pub runs: u64,
    pub mean_text_accuracy: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub prng: PrngKind,
    pub master_seed: u64,
    pub config: HarnessConfig,
    pub rows: Vec<ExperimentRow>,
}

/// Per-generator means across experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSummary {
    pub prng: PrngKind,
    pub experiments: usize,
    pub mean_ac: f64,
    pub mean_ac_support: f64,
    pub mean_nsd: f64,
    pub mean_text_accuracy: f64,
}

pub fn experiment_seed(master_seed: u64, en: u32) -> u64 {
    derive_seed(master_seed, u64::from(en))
}

pub fn run_seed(experiment_seed: u64, run: u64) -> u64 {
    derive_seed(experiment_seed, run)
}

/// True key of a run, independent of the generator under test.
pub fn truth_key(cfg: &HarnessConfig, alphabet_len: usize, run_seed: u64) -> Result<Key> {
    let mut split = SplitMix64::new(derive_seed(run_seed, TRUTH_STREAM));
    let mut src = RandomSource::Xorshift128(Xorshift128::from_splitter(&mut split));
    Key::random(cfg.chain.key_space, alphabet_len, &mut src)
}

/// One attack: draw the true key, encrypt, run the chain, score the result.
pub fn run_once(
    plaintext: &NormalizedText,
    model: &BigramModel,
    cfg: &HarnessConfig,
    kind: PrngKind,
    run: u64,
    seed: u64,
) -> Result<RunOutcome> {
    let truth = truth_key(cfg, model.alphabet_len(), seed)?;
    let ciphertext = truth.encrypt(plaintext)?;
    let mut chain = cfg.chain.clone();
    if cfg.start_at_truth {
        chain.init = InitialKey::Given(truth.clone());
    }
    let mut src = RandomSource::seeded_with(kind, seed, cfg.ci)?;
    let state = run_chain(&ciphertext, model, &chain, &mut src)?;
    let found = state.answer();
    let key_acc = key_accuracy_any(found, &truth)?;
    let key_acc_support = match (found.substitution(), truth.substitution()) {
        (Some(f), Some(t)) => key_accuracy_on_support(f, t, plaintext)?,
        _ => key_acc,
    };
    let text_acc = text_accuracy(&found.decrypt(&ciphertext)?, plaintext)?;
    Ok(RunOutcome {
        run,
        seed,
        key_accuracy: key_acc,
        key_accuracy_support: key_acc_support,
        text_accuracy: text_acc,
        success: text_acc >= cfg.success_threshold,
        final_log_score: state.log_score,
        best_log_score: state.best_score,
        accepted: state.n_accepted,
    })
}

/// Folds run outcomes into a table row. Outcomes are sorted by run index
/// first, so the result does not depend on completion order.
pub fn aggregate(en: u32, seed: u64, outcomes: &[RunOutcome]) -> Result<ExperimentRow> {
    if outcomes.is_empty() {
        return Err(Error::ZeroRuns);
    }
    let mut sorted: Vec<&RunOutcome> = outcomes.iter().collect();
    sorted.sort_by_key(|o| o.run);
    let runs = sorted.len() as f64;
    let mean = |f: fn(&RunOutcome) -> f64| sorted.iter().map(|o| f(o)).sum::<f64>() / runs;
    Ok(ExperimentRow {
        en,
        ac: mean(|o| o.key_accuracy),
        ac_support: mean(|o| o.key_accuracy_support),
        nsd: sorted.iter().filter(|o| o.success).count() as u64,
        runs: sorted.len() as u64,
        mean_text_accuracy: mean(|o| o.text_accuracy),
        seed,
    })
}

/// Runs `runs` attacks for experiment `en` sequentially.
pub fn run_experiment(
    plaintext: &NormalizedText,
    model: &BigramModel,
    cfg: &HarnessConfig,
    kind: PrngKind,
    runs: u64,
    en: u32,
    experiment_seed: u64,
) -> Result<(ExperimentRow, Vec<RunOutcome>)> {
    if runs == 0 {
        return Err(Error::ZeroRuns);
    }
    cfg.validate()?;
    let outcomes = (0..runs)
        .map(|run| run_once(plaintext, model, cfg, kind, run, run_seed(experiment_seed, run)))
        .collect::<Result<Vec<_>>>()?;
    Ok((aggregate(en, experiment_seed, &outcomes)?, outcomes))
}

/// The same experiment grid for every generator, with matched seeds.
pub fn compare_prngs(
    plaintext: &NormalizedText,
    model: &BigramModel,
    cfg: &HarnessConfig,
    experiments: u32,
    runs: u64,
    master_seed: u64,
) -> Result<Vec<ExperimentReport>> {
    PrngKind::ALL
        .iter()
        .map(|&kind| {
            let rows = (1..=experiments)
                .map(|en| {
                    let seed = experiment_seed(master_seed, en);
                    run_experiment(plaintext, model, cfg, kind, runs, en, seed).map(|(row, _)| row)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ExperimentReport {
                prng: kind,
                master_seed,
                config: cfg.clone(),
                rows,
            })
        })
        .collect()
}

pub fn summarize(report: &ExperimentReport) -> GeneratorSummary {
    let k = report.rows.len().max(1) as f64;
    let mean = |f: fn(&ExperimentRow) -> f64| report.rows.iter().map(f).sum::<f64>() / k;
    GeneratorSummary {
        prng: report.prng,
        experiments: report.rows.len(),
        mean_ac: mean(|r| r.ac),
        mean_ac_support: mean(|r| r.ac_support),
        mean_nsd: mean(|r| r.nsd as f64),
        mean_text_accuracy: mean(|r| r.mean_text_accuracy),
    }
}
