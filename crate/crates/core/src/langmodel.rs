//! Reference bigram model and the log-plausibility score of a candidate key.
//!
//! The plausibility of a key is the product, over ordered symbol pairs, of
//! the reference pair frequency raised to the number of times that pair
//! occurs in the decryption. Everything here works with its natural log.

use alloc::vec;
use alloc::vec::Vec;

use crate::cipher::{Key, NormalizedText, SubstitutionKey};
use crate::error::{Error, Result};

/// Smoothed reference bigram frequencies over an alphabet of `n` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramModel {
    n: usize,
    counts: Vec<u64>,
    log_r: Vec<f64>,
    delta: f64,
    corpus_len: usize,
}

impl BigramModel {
    /// Counts adjacent pairs in `corpus` and smooths them additively:
    /// `r = (count + delta) / (total + delta * n^2)`.
    pub fn build(corpus: &NormalizedText, alphabet_len: usize, delta: f64) -> Result<Self> {
        let mut counts = vec![0u64; alphabet_len * alphabet_len];
        for pair in corpus.as_slice().windows(2) {
            let (a, b) = (usize::from(pair[0]), usize::from(pair[1]));
            if a >= alphabet_len || b >= alphabet_len {
                return Err(Error::ModelAlphabetMismatch {
                    model: alphabet_len,
                    alphabet: a.max(b) + 1,
                });
            }
            counts[a * alphabet_len + b] += 1;
        }
        Self::from_counts(alphabet_len, counts, delta, corpus.len())
    }

    /// Rebuilds a model from a stored count matrix (row-major, `n * n`).
    pub fn from_counts(n: usize, counts: Vec<u64>, delta: f64, corpus_len: usize) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidSmoothing(delta));
        }
        if counts.len() != n * n {
            return Err(Error::ModelAlphabetMismatch {
                model: isqrt(counts.len()),
                alphabet: n,
            });
        }
        let total: u64 = counts.iter().sum();
        if total == 0 && delta == 0.0 {
            return Err(Error::EmptyModel);
        }
        let denom = total as f64 + delta * (n * n) as f64;
        let log_denom = libm::log(denom);
        let log_r = counts
            .iter()
            .map(|&c| {
                let num = c as f64 + delta;
                if num == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    libm::log(num) - log_denom
                }
            })
            .collect();
        Ok(Self {
            n,
            counts,
            log_r,
            delta,
            corpus_len,
        })
    }

    pub fn alphabet_len(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of symbols the model was built from.
    pub fn corpus_len(&self) -> usize {
        self.corpus_len
    }

    /// Raw pair counts, row-major.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.n + b]
    }

    #[inline]
    pub fn log_r(&self, a: usize, b: usize) -> f64 {
        self.log_r[a * self.n + b]
    }

    pub fn probability(&self, a: usize, b: usize) -> f64 {
        libm::exp(self.log_r(a, b))
    }

    /// True when every pair has positive probability.
    pub fn is_smoothed(&self) -> bool {
        self.log_r.iter().all(|v| v.is_finite())
    }

    /// How often each symbol opens a pair; used to rank symbols by frequency.
    pub fn unigram_counts(&self) -> Vec<u64> {
        self.counts.chunks(self.n).map(|row| row.iter().sum()).collect()
    }

    /// Log-plausibility of text that is already plaintext.
    pub fn score_plaintext(&self, text: &NormalizedText) -> f64 {
        BigramCounts::of_text(text, self.n).log_likelihood(self)
    }
}

fn isqrt(v: usize) -> usize {
    let mut r = 0;
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// Pair counts of one text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigramCounts {
    n: usize,
    f: Vec<u32>,
}

impl BigramCounts {
    pub fn of_text(text: &NormalizedText, n: usize) -> Self {
        let mut f = vec![0u32; n * n];
        for pair in text.as_slice().windows(2) {
            f[usize::from(pair[0]) * n + usize::from(pair[1])] += 1;
        }
        Self { n, f }
    }

    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.f[a * self.n + b]
    }

    pub fn total(&self) -> u64 {
        self.f.iter().map(|&c| u64::from(c)).sum()
    }

    /// `sum f(a,b) * log r(a,b)`; pairs with `f = 0` contribute nothing even
    /// when `r = 0`.
    pub fn log_likelihood(&self, model: &BigramModel) -> f64 {
        self.f
            .iter()
            .zip(&model.log_r)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &l)| f64::from(c) * l)
            .sum()
    }
}

/// Log-plausibility of `key` as the decryption key of `text`.
pub fn score_log_pi(text: &NormalizedText, key: &Key, model: &BigramModel) -> Result<f64> {
    let plain = key.decrypt(text)?;
    check_model(model, &plain)?;
    Ok(model.score_plaintext(&plain))
}

/// `score(key with images of i and j exchanged) - score(key)`, touching only
/// the pairs that contain the two affected ciphertext symbols.
pub fn score_delta_on_swap(
    text: &NormalizedText,
    key: &SubstitutionKey,
    model: &BigramModel,
    i: usize,
    j: usize,
) -> Result<f64> {
    let scorer = SubstitutionScorer::new(text, model)?;
    scorer.check_key(key)?;
    Ok(scorer.delta_on_swap(key, i, j))
}

pub(crate) fn check_model(model: &BigramModel, text: &NormalizedText) -> Result<()> {
    match text.as_slice().iter().map(|&s| usize::from(s)).max() {
        Some(m) if m >= model.n => Err(Error::ModelAlphabetMismatch {
            model: model.n,
            alphabet: m + 1,
        }),
        _ => Ok(()),
    }
}

/// Scores substitution keys against one fixed ciphertext.
///
/// Ciphertext pair counts `C` are computed once; the score of a key with
/// preimage map `inv` is `sum C(c1,c2) * log r(inv c1, inv c2)`.
#[derive(Debug, Clone)]
pub struct SubstitutionScorer<'a> {
    model: &'a BigramModel,
    cipher_counts: BigramCounts,
}

impl<'a> SubstitutionScorer<'a> {
    pub fn new(ciphertext: &NormalizedText, model: &'a BigramModel) -> Result<Self> {
        check_model(model, ciphertext)?;
        Ok(Self {
            model,
            cipher_counts: BigramCounts::of_text(ciphertext, model.n),
        })
    }

    /// Replaces the ciphertext counts, e.g. after a transposition move.
    pub fn set_text(&mut self, ciphertext: &NormalizedText) {
        self.cipher_counts = BigramCounts::of_text(ciphertext, self.model.n);
    }

    pub fn model(&self) -> &BigramModel {
        self.model
    }

    pub fn check_key(&self, key: &SubstitutionKey) -> Result<()> {
        if key.len() != self.model.n {
            return Err(Error::KeySizeMismatch {
                expected: self.model.n,
                found: key.len(),
            });
        }
        Ok(())
    }

    pub fn score(&self, key: &SubstitutionKey) -> f64 {
        let n = self.model.n;
        let inv = key.preimages();
        let mut total = 0.0;
        for c1 in 0..n {
            let row = &self.cipher_counts.f[c1 * n..(c1 + 1) * n];
            let p1 = usize::from(inv[c1]);
            for (c2, &count) in row.iter().enumerate() {
                if count > 0 {
                    total += f64::from(count) * self.model.log_r(p1, usize::from(inv[c2]));
                }
            }
        }
        total
    }

    pub fn delta_on_swap(&self, key: &SubstitutionKey, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let n = self.model.n;
        let inv = key.preimages();
        let (ci, cj) = (usize::from(key.images()[i]), usize::from(key.images()[j]));
        let new_inv = |c: usize| -> usize {
            if c == ci {
                j
            } else if c == cj {
                i
            } else {
                usize::from(inv[c])
            }
        };
        let counts = &self.cipher_counts;
        let model = self.model;
        let term = |c1: usize, c2: usize| -> f64 {
            let f = counts.f[c1 * n + c2];
            if f == 0 {
                return 0.0;
            }
            let old = model.log_r(usize::from(inv[c1]), usize::from(inv[c2]));
            let new = model.log_r(new_inv(c1), new_inv(c2));
            f64::from(f) * (new - old)
        };
        let mut delta = 0.0;
        for c in 0..n {
            delta += term(ci, c) + term(cj, c);
            if c != ci && c != cj {
                delta += term(c, ci) + term(c, cj);
            }
        }
        delta
    }
}
