//! Metropolis attack over cipher keys.
//!
//! Each step proposes a symmetric random swap, draws `u` uniform in
//! `[0, 1)` and accepts when `u < (pi(y) / pi(x))^p`. Scores are kept in
//! log space and updated incrementally.

use alloc::vec::Vec;

use crate::cipher::{Key, KeySpace, NormalizedText, SubstitutionKey, TranspositionKey};
use crate::error::{Error, Result};
use crate::langmodel::{BigramModel, SubstitutionScorer};
use crate::prng::RandomSource;

/// Log-ratios below this are clamped before exponentiation.
pub const LOG_RATIO_FLOOR: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Proposal {
    /// Exchange the images of two distinct, uniformly chosen positions.
    #[default]
    RandomSwap,
}

/// How the chain picks its starting key.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum InitialKey {
    /// Uniformly random key drawn from the chain's own source.
    #[default]
    Random,
    /// Map ciphertext symbols to reference symbols by unigram frequency rank.
    /// Any transposition part starts at the identity.
    FrequencyRank,
    Given(Key),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub iterations: u64,
    /// Scaling exponent applied to the plausibility ratio.
    pub p: f64,
    pub proposal: Proposal,
    pub track_best: bool,
    pub key_space: KeySpace,
    pub init: InitialKey,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            p: 1.0,
            proposal: Proposal::RandomSwap,
            track_best: true,
            key_space: KeySpace::Substitution,
            init: InitialKey::Random,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::InvalidScaling(self.p));
        }
        match self.key_space {
            KeySpace::Transposition { period } | KeySpace::Combined { period } if period < 2 => {
                Err(Error::KeySpaceTooSmall(period))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub key: Key,
    pub log_score: f64,
    pub best_key: Key,
    pub best_score: f64,
    pub n_accepted: u64,
    pub n_proposed: u64,
}

impl ChainState {
    /// Best-so-far key when tracking, otherwise the final key.
    pub fn answer(&self) -> &Key {
        &self.best_key
    }
}

/// One Metropolis step as seen by a trace consumer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    /// 1-based step number.
    pub iteration: u64,
    /// Score after the accept/reject decision.
    pub log_score: f64,
    /// Proposed minus current score.
    pub delta: f64,
    pub accepted: bool,
}

/// Draws an unordered pair of distinct indices below `n`, uniformly.
pub fn draw_pair(n: usize, src: &mut RandomSource) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::KeySpaceTooSmall(n));
    }
    let i = src.next_index(n)?;
    let mut j = src.next_index(n - 1)?;
    if j >= i {
        j += 1;
    }
    Ok((i, j))
}

/// Symmetric random-swap proposal on a substitution key.
pub fn propose_swap(
    key: &SubstitutionKey,
    src: &mut RandomSource,
) -> Result<(SubstitutionKey, (usize, usize))> {
    let (i, j) = draw_pair(key.len(), src)?;
    let mut next = key.clone();
    next.swap(i, j);
    Ok((next, (i, j)))
}

/// `u < exp(p * (log_y - log_x))`; a non-negative difference always accepts.
pub fn accept(u: f64, log_score_y: f64, log_score_x: f64, p: f64) -> bool {
    let diff = log_score_y - log_score_x;
    if diff >= 0.0 {
        return true;
    }
    u < libm::exp((p * diff).max(LOG_RATIO_FLOOR))
}

/// A state space the generic Metropolis loop can walk.
pub trait MetropolisTarget {
    type Move;

    fn propose(&mut self, src: &mut RandomSource) -> Result<Self::Move>;

    /// Log-score of the proposed state minus that of the current one.
    fn delta(&mut self, mv: &Self::Move) -> f64;

    fn commit(&mut self, mv: Self::Move);
}

/// Propose, draw `u`, accept or reject. Returns `(delta, accepted)`.
pub fn metropolis_step<T: MetropolisTarget>(
    target: &mut T,
    src: &mut RandomSource,
    p: f64,
) -> Result<(f64, bool)> {
    let mv = target.propose(src)?;
    let delta = target.delta(&mv);
    let u = src.next_uniform();
    let accepted = accept(u, delta, 0.0, p);
    if accepted {
        target.commit(mv);
    }
    Ok((delta, accepted))
}

struct SubstitutionWalk<'a> {
    scorer: SubstitutionScorer<'a>,
    key: SubstitutionKey,
}

impl MetropolisTarget for SubstitutionWalk<'_> {
    type Move = (usize, usize);

    fn propose(&mut self, src: &mut RandomSource) -> Result<Self::Move> {
        draw_pair(self.key.len(), src)
    }

    fn delta(&mut self, &(i, j): &Self::Move) -> f64 {
        self.scorer.delta_on_swap(&self.key, i, j)
    }

    fn commit(&mut self, (i, j): Self::Move) {
        self.key.swap(i, j);
    }
}

struct TranspositionWalk<'a> {
    model: &'a BigramModel,
    ciphertext: &'a NormalizedText,
    key: TranspositionKey,
    score: f64,
    pending: f64,
}

impl MetropolisTarget for TranspositionWalk<'_> {
    type Move = (usize, usize);

    fn propose(&mut self, src: &mut RandomSource) -> Result<Self::Move> {
        draw_pair(self.key.period(), src)
    }

    fn delta(&mut self, &(i, j): &Self::Move) -> f64 {
        let mut candidate = self.key.clone();
        candidate.swap(i, j);
        self.pending = self.model.score_plaintext(&candidate.decrypt(self.ciphertext));
        self.pending - self.score
    }

    fn commit(&mut self, (i, j): Self::Move) {
        self.key.swap(i, j);
        self.score = self.pending;
    }
}

enum CombinedMove {
    Substitution(usize, usize),
    Transposition(usize, usize),
}

/// Product space; each step picks the substitution or transposition part
/// with probability 1/2.
struct CombinedWalk<'a> {
    ciphertext: &'a NormalizedText,
    scorer: SubstitutionScorer<'a>,
    substitution: SubstitutionKey,
    transposition: TranspositionKey,
    score: f64,
    pending_delta: f64,
    pending: Option<(SubstitutionScorer<'a>, f64)>,
}

impl MetropolisTarget for CombinedWalk<'_> {
    type Move = CombinedMove;

    fn propose(&mut self, src: &mut RandomSource) -> Result<Self::Move> {
        Ok(if src.next_below(2)? == 0 {
            let (i, j) = draw_pair(self.substitution.len(), src)?;
            CombinedMove::Substitution(i, j)
        } else {
            let (i, j) = draw_pair(self.transposition.period(), src)?;
            CombinedMove::Transposition(i, j)
        })
    }

    fn delta(&mut self, mv: &Self::Move) -> f64 {
        match *mv {
            CombinedMove::Substitution(i, j) => {
                self.pending_delta = self.scorer.delta_on_swap(&self.substitution, i, j);
                self.pending_delta
            }
            CombinedMove::Transposition(i, j) => {
                let mut candidate = self.transposition.clone();
                candidate.swap(i, j);
                let mut scorer = self.scorer.clone();
                scorer.set_text(&candidate.decrypt(self.ciphertext));
                let new_score = scorer.score(&self.substitution);
                self.pending = Some((scorer, new_score));
                new_score - self.score
            }
        }
    }

    fn commit(&mut self, mv: Self::Move) {
        match mv {
            CombinedMove::Substitution(i, j) => {
                self.substitution.swap(i, j);
                self.score += self.pending_delta;
            }
            CombinedMove::Transposition(i, j) => {
                self.transposition.swap(i, j);
                let (scorer, score) = self.pending.take().expect("delta precedes commit");
                self.scorer = scorer;
                self.score = score;
            }
        }
    }
}

/// Substitution key sending the k-th most frequent reference symbol to the
/// k-th most frequent ciphertext symbol. Ties break toward lower indices.
pub fn frequency_rank_key(ciphertext: &NormalizedText, model: &BigramModel) -> SubstitutionKey {
    let n = model.alphabet_len();
    let mut cipher_freq = alloc::vec![0u64; n];
    for &s in ciphertext.as_slice() {
        cipher_freq[usize::from(s)] += 1;
    }
    let rank = |freq: &[u64]| -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
        order
    };
    let plain_order = rank(&model.unigram_counts());
    let cipher_order = rank(&cipher_freq);
    let mut perm = alloc::vec![0; n];
    for (p, c) in plain_order.into_iter().zip(cipher_order) {
        perm[p] = c;
    }
    SubstitutionKey::new(perm).expect("rank matching is a bijection")
}

fn initial_key(
    ciphertext: &NormalizedText,
    model: &BigramModel,
    cfg: &ChainConfig,
    src: &mut RandomSource,
) -> Result<Key> {
    let n = model.alphabet_len();
    let key = match &cfg.init {
        InitialKey::Random => Key::random(cfg.key_space, n, src)?,
        InitialKey::FrequencyRank => {
            let sub = frequency_rank_key(ciphertext, model);
            match cfg.key_space {
                KeySpace::Substitution => Key::Substitution(sub),
                KeySpace::Transposition { period } => Key::Transposition(TranspositionKey::identity(period)?),
                KeySpace::Combined { period } => Key::Combined(crate::cipher::CombinedKey {
                    substitution: sub,
                    transposition: TranspositionKey::identity(period)?,
                }),
            }
        }
        InitialKey::Given(key) => {
            if key.space() != cfg.key_space {
                return Err(Error::KeySizeMismatch {
                    expected: space_size(cfg.key_space, n),
                    found: space_size(key.space(), n),
                });
            }
            key.clone()
        }
    };
    if let Some(sub) = key.substitution() {
        if sub.len() != n {
            return Err(Error::KeySizeMismatch {
                expected: n,
                found: sub.len(),
            });
        }
    }
    Ok(key)
}

fn space_size(space: KeySpace, n: usize) -> usize {
    match space {
        KeySpace::Substitution => n,
        KeySpace::Transposition { period } => period,
        KeySpace::Combined { period } => n + period,
    }
}

/// Runs the attack. Deterministic given the inputs and the source state.
pub fn run_chain(
    ciphertext: &NormalizedText,
    model: &BigramModel,
    cfg: &ChainConfig,
    src: &mut RandomSource,
) -> Result<ChainState> {
    run_chain_traced(ciphertext, model, cfg, src, |_| {})
}

/// [`run_chain`], reporting every step to `trace`.
pub fn run_chain_traced(
    ciphertext: &NormalizedText,
    model: &BigramModel,
    cfg: &ChainConfig,
    src: &mut RandomSource,
    mut trace: impl FnMut(TraceStep),
) -> Result<ChainState> {
    cfg.validate()?;
    if ciphertext.is_empty() {
        return Err(Error::EmptyCiphertext);
    }
    if !model.is_smoothed() {
        return Err(Error::ModelNotSmoothed);
    }
    let start = initial_key(ciphertext, model, cfg, src)?;
    match start {
        Key::Substitution(key) => {
            let scorer = SubstitutionScorer::new(ciphertext, model)?;
            if cfg.iterations > 0 && key.len() < 2 {
                return Err(Error::KeySpaceTooSmall(key.len()));
            }
            let score = scorer.score(&key);
            let mut walk = SubstitutionWalk { scorer, key };
            drive(&mut walk, score, cfg, src, &mut trace, |w| {
                Key::Substitution(w.key.clone())
            })
        }
        Key::Transposition(key) => {
            crate::langmodel::check_model(model, ciphertext)?;
            let score = model.score_plaintext(&key.decrypt(ciphertext));
            let mut walk = TranspositionWalk {
                model,
                ciphertext,
                key,
                score,
                pending: score,
            };
            drive(&mut walk, score, cfg, src, &mut trace, |w| {
                Key::Transposition(w.key.clone())
            })
        }
        Key::Combined(key) => {
            let mut scorer = SubstitutionScorer::new(ciphertext, model)?;
            scorer.set_text(&key.transposition.decrypt(ciphertext));
            let score = scorer.score(&key.substitution);
            let mut walk = CombinedWalk {
                ciphertext,
                scorer,
                substitution: key.substitution,
                transposition: key.transposition,
                score,
                pending_delta: 0.0,
                pending: None,
            };
            drive(&mut walk, score, cfg, src, &mut trace, |w| {
                Key::Combined(crate::cipher::CombinedKey {
                    substitution: w.substitution.clone(),
                    transposition: w.transposition.clone(),
                })
            })
        }
    }
}

fn drive<T: MetropolisTarget>(
    walk: &mut T,
    start_score: f64,
    cfg: &ChainConfig,
    src: &mut RandomSource,
    trace: &mut impl FnMut(TraceStep),
    snapshot: impl Fn(&T) -> Key,
) -> Result<ChainState> {
    let mut score = start_score;
    let mut best_score = start_score;
    let mut best_key = snapshot(walk);
    let mut n_accepted = 0;
    for iteration in 1..=cfg.iterations {
        let (delta, accepted) = metropolis_step(walk, src, cfg.p)?;
        if accepted {
            score += delta;
            n_accepted += 1;
            if cfg.track_best && score > best_score {
                best_score = score;
                best_key = snapshot(walk);
            }
        }
        trace(TraceStep {
            iteration,
            log_score: score,
            delta,
            accepted,
        });
    }
    let key = snapshot(walk);
    if !cfg.track_best {
        best_key = key.clone();
        best_score = score;
    }
    Ok(ChainState {
        key,
        log_score: score,
        best_key,
        best_score,
        n_accepted,
        n_proposed: cfg.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::Alphabet;
    use crate::langmodel::score_log_pi;
    use crate::prng::PrngKind;

    const CORPUS: &str = "it was the best of times it was the worst of times it was the age of \
        wisdom it was the age of foolishness it was the epoch of belief it was the epoch of \
        incredulity it was the season of light it was the season of darkness";

    fn setup() -> (Alphabet, BigramModel, NormalizedText) {
        let a = Alphabet::latin();
        let m = BigramModel::build(&a.normalize(CORPUS), 26, 1.0).unwrap();
        let pt = a.normalize("it was the spring of hope it was the winter of despair");
        (a, m, pt)
    }

    #[test]
    fn accept_rule() {
        assert!(accept(0.999_999, -5.0, -5.0, 1.0));
        assert!(accept(0.999_999, -4.0, -5.0, 1.0));
        assert!(accept(0.0, -1e6, 0.0, 1.0));
        assert!(!accept(0.5, -1.0, 0.0, 1.0));
        assert!(accept(0.3, -1.0, 0.0, 1.0));
        assert!(!accept(0.3, -1.0, 0.0, 2.0));
    }

    #[test]
    fn pair_needs_two_positions() {
        let mut src = RandomSource::seeded(PrngKind::Xorshift128, 1);
        assert_eq!(draw_pair(1, &mut src), Err(Error::KeySpaceTooSmall(1)));
        for _ in 0..50 {
            let (i, j) = draw_pair(2, &mut src).unwrap();
            assert_eq!((i.min(j), i.max(j)), (0, 1));
        }
    }

    #[test]
    fn swap_is_involution() {
        let mut src = RandomSource::seeded(PrngKind::Lcg48, 8);
        let key = SubstitutionKey::random(26, &mut src);
        let (next, (i, j)) = propose_swap(&key, &mut src).unwrap();
        assert_ne!(next, key);
        let mut back = next.clone();
        back.swap(i, j);
        assert_eq!(back, key);
    }

    #[test]
    fn zero_iterations_keeps_initial_key() {
        let (_, m, pt) = setup();
        let mut src = RandomSource::seeded(PrngKind::Xorshift128, 3);
        let truth = Key::Substitution(SubstitutionKey::random(26, &mut src));
        let ct = truth.encrypt(&pt).unwrap();
        let cfg = ChainConfig {
            iterations: 0,
            init: InitialKey::Given(truth.clone()),
            ..ChainConfig::default()
        };
        let st = run_chain(&ct, &m, &cfg, &mut src).unwrap();
        assert_eq!(st.key, truth);
        assert_eq!(st.best_key, truth);
        assert_eq!(st.n_proposed, 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (_, m, pt) = setup();
        let mut src = RandomSource::seeded(PrngKind::Xorshift128, 3);
        let cfg = ChainConfig::default();
        assert_eq!(
            run_chain(&NormalizedText::default(), &m, &cfg, &mut src),
            Err(Error::EmptyCiphertext)
        );
        let bad_p = ChainConfig { p: 0.0, ..ChainConfig::default() };
        assert_eq!(run_chain(&pt, &m, &bad_p, &mut src), Err(Error::InvalidScaling(0.0)));
        let raw = BigramModel::build(&pt, 26, 0.0).unwrap();
        assert_eq!(run_chain(&pt, &raw, &cfg, &mut src), Err(Error::ModelNotSmoothed));
        let wrong = ChainConfig {
            init: InitialKey::Given(Key::Substitution(SubstitutionKey::identity(5))),
            ..ChainConfig::default()
        };
        assert!(run_chain(&pt, &m, &wrong, &mut src).is_err());
    }

    #[test]
    fn cached_score_matches_rescore_for_every_space() {
        let (_, m, pt) = setup();
        for space in [
            KeySpace::Substitution,
            KeySpace::Transposition { period: 4 },
            KeySpace::Combined { period: 3 },
        ] {
            let mut src = RandomSource::seeded(PrngKind::ChaoticIteration, 21);
            let truth = Key::random(space, 26, &mut src).unwrap();
            let ct = truth.encrypt(&pt).unwrap();
            let cfg = ChainConfig {
                iterations: 3_000,
                key_space: space,
                ..ChainConfig::default()
            };
            let st = run_chain(&ct, &m, &cfg, &mut src).unwrap();
            let rescored = score_log_pi(&ct, &st.key, &m).unwrap();
            assert!((st.log_score - rescored).abs() < 1e-6, "{space:?}");
            let best = score_log_pi(&ct, &st.best_key, &m).unwrap();
            assert!((st.best_score - best).abs() < 1e-6, "{space:?}");
            assert!(st.best_score >= st.log_score);
        }
    }

    #[test]
    fn transposition_attack_recovers_short_period() {
        let (_, m, _) = setup();
        let a = Alphabet::latin();
        let pt = a.normalize(CORPUS);
        let mut src = RandomSource::seeded(PrngKind::Xorshift128, 5);
        let truth = Key::Transposition(TranspositionKey::new(alloc::vec![2, 0, 3, 1]).unwrap());
        let ct = truth.encrypt(&pt).unwrap();
        let cfg = ChainConfig {
            iterations: 2_000,
            // flat enough to leave the local optima of the column landscape
            p: 0.05,
            key_space: KeySpace::Transposition { period: 4 },
            ..ChainConfig::default()
        };
        let st = run_chain(&ct, &m, &cfg, &mut src).unwrap();
        assert_eq!(st.best_key.decrypt(&ct).unwrap(), pt);
    }

    #[test]
    fn frequency_rank_key_matches_most_common_symbol() {
        let a = Alphabet::latin();
        let text = a.normalize("three green trees need deep shade here");
        let m = BigramModel::build(&text, 26, 1.0).unwrap();
        let mut src = RandomSource::seeded(PrngKind::Xorshift128, 2);
        let truth = SubstitutionKey::random(26, &mut src);
        let key = frequency_rank_key(&truth.encrypt(&text).unwrap(), &m);
        let t = usize::from(a.index_of('E').unwrap());
        assert_eq!(key.images()[t], truth.images()[t]);
    }

    #[test]
    fn untracked_answer_is_final_state() {
        let (_, m, pt) = setup();
        let mut src = RandomSource::seeded(PrngKind::Lcg48, 4);
        let cfg = ChainConfig {
            iterations: 200,
            track_best: false,
            ..ChainConfig::default()
        };
        let st = run_chain(&pt, &m, &cfg, &mut src).unwrap();
        assert_eq!(st.best_key, st.key);
        assert_eq!(st.answer(), &st.key);
    }
}
