//! Alphabets, normalized text, and the two classical cipher families whose
//! keys the chain walks over.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::prng::RandomSource;

/// Symbol index into an [`Alphabet`]. Alphabets hold at most 256 symbols.
pub type Symbol = u8;

/// Ordered set of distinct symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
    index: BTreeMap<char, Symbol>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.len() < 2 {
            return Err(Error::AlphabetTooSmall(symbols.len()));
        }
        if symbols.len() > 256 {
            return Err(Error::AlphabetTooLarge(symbols.len()));
        }
        let mut index = BTreeMap::new();
        for (i, &c) in symbols.iter().enumerate() {
            if index.insert(c, i as Symbol).is_some() {
                return Err(Error::DuplicateSymbol(c));
            }
        }
        Ok(Self { symbols, index })
    }

    /// `A`..=`Z`.
    pub fn latin() -> Self {
        Self::new('A'..='Z').expect("26 distinct letters")
    }

    /// `A`..=`Z` followed by a word-space symbol.
    pub fn latin_with_space() -> Self {
        Self::new(('A'..='Z').chain(core::iter::once(' '))).expect("27 distinct symbols")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn symbol(&self, i: Symbol) -> char {
        self.symbols[usize::from(i)]
    }

    pub fn index_of(&self, c: char) -> Option<Symbol> {
        self.index.get(&c).copied()
    }

    /// Maps raw text onto the alphabet.
    ///
    /// Letters are uppercased before lookup and characters outside the
    /// alphabet are dropped. When the alphabet contains `' '`, every run of
    /// whitespace becomes a single space and leading whitespace is dropped.
    pub fn normalize(&self, raw: &str) -> NormalizedText {
        let mut data = Vec::with_capacity(raw.len());
        let space = self.index_of(' ');
        let mut last_space = true;
        for ch in raw.chars() {
            if let (Some(sp), true) = (space, ch.is_whitespace()) {
                if !last_space {
                    data.push(sp);
                    last_space = true;
                }
                continue;
            }
            for up in ch.to_uppercase() {
                if let Some(i) = self.index_of(up) {
                    data.push(i);
                    last_space = false;
                }
            }
        }
        NormalizedText { data }
    }

    pub fn render(&self, text: &NormalizedText) -> String {
        text.data.iter().map(|&i| self.symbol(i)).collect()
    }
}

/// Text as a sequence of alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct NormalizedText {
    data: Vec<Symbol>,
}

impl NormalizedText {
    /// Fails if any index is outside an alphabet of `alphabet_len` symbols.
    pub fn from_indices(data: Vec<Symbol>, alphabet_len: usize) -> Result<Self> {
        if data.iter().any(|&s| usize::from(s) >= alphabet_len) {
            return Err(Error::KeySizeMismatch {
                expected: alphabet_len,
                found: data.iter().map(|&s| usize::from(s) + 1).max().unwrap_or(0),
            });
        }
        Ok(Self { data })
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn into_inner(self) -> Vec<Symbol> {
        self.data
    }

    /// Leading `n` symbols.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            data: self.data[..n.min(self.data.len())].to_vec(),
        }
    }
}

/// Checks that `perm` is a bijection on `0..perm.len()`.
fn check_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = alloc::vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || core::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation);
        }
    }
    Ok(())
}

/// Fisher–Yates shuffle of the identity on `n` points.
pub fn random_permutation(n: usize, src: &mut RandomSource) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = src.next_index(i + 1).expect("bound is positive");
        perm.swap(i, j);
    }
    perm
}

/// Monoalphabetic substitution: `perm[p]` is the ciphertext symbol of
/// plaintext symbol `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubstitutionKey {
    perm: Vec<Symbol>,
    inverse: Vec<Symbol>,
}

impl SubstitutionKey {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        if perm.len() > 256 {
            return Err(Error::AlphabetTooLarge(perm.len()));
        }
        check_permutation(&perm)?;
        let mut inverse = alloc::vec![0; perm.len()];
        for (p, &c) in perm.iter().enumerate() {
            inverse[c] = p as Symbol;
        }
        Ok(Self {
            perm: perm.into_iter().map(|c| c as Symbol).collect(),
            inverse,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect()).expect("identity is a permutation")
    }

    pub fn random(n: usize, src: &mut RandomSource) -> Self {
        Self::new(random_permutation(n, src)).expect("shuffle yields a permutation")
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Ciphertext symbol for each plaintext symbol.
    pub fn images(&self) -> &[Symbol] {
        &self.perm
    }

    /// Plaintext symbol for each ciphertext symbol.
    pub fn preimages(&self) -> &[Symbol] {
        &self.inverse
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.perm.iter().map(|&c| usize::from(c)).collect()
    }

    /// Exchanges the images of plaintext symbols `i` and `j`.
    pub fn swap(&mut self, i: usize, j: usize) {
        self.perm.swap(i, j);
        self.inverse[usize::from(self.perm[i])] = i as Symbol;
        self.inverse[usize::from(self.perm[j])] = j as Symbol;
    }

    fn check_text(&self, text: &NormalizedText) -> Result<()> {
        match text.data.iter().map(|&s| usize::from(s)).max() {
            Some(m) if m >= self.len() => Err(Error::KeySizeMismatch {
                expected: m + 1,
                found: self.len(),
            }),
            _ => Ok(()),
        }
    }

    pub fn encrypt(&self, pt: &NormalizedText) -> Result<NormalizedText> {
        self.check_text(pt)?;
        Ok(NormalizedText {
            data: pt.data.iter().map(|&s| self.perm[usize::from(s)]).collect(),
        })
    }

    pub fn decrypt(&self, ct: &NormalizedText) -> Result<NormalizedText> {
        self.check_text(ct)?;
        Ok(NormalizedText {
            data: ct.data.iter().map(|&s| self.inverse[usize::from(s)]).collect(),
        })
    }

    /// Matches the key's size against an alphabet.
    pub fn check_alphabet(&self, alphabet: &Alphabet) -> Result<()> {
        if self.len() != alphabet.len() {
            return Err(Error::KeySizeMismatch {
                expected: alphabet.len(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// Block columnar transposition with period `k = order.len()`. Within every
/// full block, output position `j` takes input position `order[j]`; a
/// trailing partial block is copied unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TranspositionKey {
    order: Vec<usize>,
}

impl TranspositionKey {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        if order.is_empty() {
            return Err(Error::InvalidPeriod(0));
        }
        check_permutation(&order)?;
        Ok(Self { order })
    }

    pub fn identity(k: usize) -> Result<Self> {
        Self::new((0..k).collect())
    }

    pub fn random(k: usize, src: &mut RandomSource) -> Result<Self> {
        Self::new(random_permutation(k, src))
    }

    pub fn period(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn swap(&mut self, i: usize, j: usize) {
        self.order.swap(i, j);
    }

    pub fn encrypt(&self, pt: &NormalizedText) -> NormalizedText {
        let k = self.period();
        let mut out = pt.data.clone();
        for (dst, src) in out.chunks_exact_mut(k).zip(pt.data.chunks_exact(k)) {
            for (j, &o) in self.order.iter().enumerate() {
                dst[j] = src[o];
            }
        }
        NormalizedText { data: out }
    }

    pub fn decrypt(&self, ct: &NormalizedText) -> NormalizedText {
        let k = self.period();
        let mut out = ct.data.clone();
        for (dst, src) in out.chunks_exact_mut(k).zip(ct.data.chunks_exact(k)) {
            for (j, &o) in self.order.iter().enumerate() {
                dst[o] = src[j];
            }
        }
        NormalizedText { data: out }
    }
}

/// Substitution followed by transposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CombinedKey {
    pub substitution: SubstitutionKey,
    pub transposition: TranspositionKey,
}

impl CombinedKey {
    pub fn encrypt(&self, pt: &NormalizedText) -> Result<NormalizedText> {
        Ok(self.transposition.encrypt(&self.substitution.encrypt(pt)?))
    }

    pub fn decrypt(&self, ct: &NormalizedText) -> Result<NormalizedText> {
        self.substitution.decrypt(&self.transposition.decrypt(ct))
    }
}

/// Which key family a cipher or attack works over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeySpace {
    Substitution,
    Transposition { period: usize },
    Combined { period: usize },
}

/// A key from any [`KeySpace`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Key {
    Substitution(SubstitutionKey),
    Transposition(TranspositionKey),
    Combined(CombinedKey),
}

impl Key {
    /// Uniformly random key; `alphabet_len` sizes the substitution part.
    pub fn random(space: KeySpace, alphabet_len: usize, src: &mut RandomSource) -> Result<Self> {
        Ok(match space {
            KeySpace::Substitution => Key::Substitution(SubstitutionKey::random(alphabet_len, src)),
            KeySpace::Transposition { period } => {
                Key::Transposition(TranspositionKey::random(period, src)?)
            }
            KeySpace::Combined { period } => {
                let substitution = SubstitutionKey::random(alphabet_len, src);
                let transposition = TranspositionKey::random(period, src)?;
                Key::Combined(CombinedKey {
                    substitution,
                    transposition,
                })
            }
        })
    }

    pub fn identity(space: KeySpace, alphabet_len: usize) -> Result<Self> {
        Ok(match space {
            KeySpace::Substitution => Key::Substitution(SubstitutionKey::identity(alphabet_len)),
            KeySpace::Transposition { period } => Key::Transposition(TranspositionKey::identity(period)?),
            KeySpace::Combined { period } => Key::Combined(CombinedKey {
                substitution: SubstitutionKey::identity(alphabet_len),
                transposition: TranspositionKey::identity(period)?,
            }),
        })
    }

    pub fn space(&self) -> KeySpace {
        match self {
            Key::Substitution(_) => KeySpace::Substitution,
            Key::Transposition(t) => KeySpace::Transposition { period: t.period() },
            Key::Combined(c) => KeySpace::Combined {
                period: c.transposition.period(),
            },
        }
    }

    pub fn substitution(&self) -> Option<&SubstitutionKey> {
        match self {
            Key::Substitution(s) => Some(s),
            Key::Combined(c) => Some(&c.substitution),
            Key::Transposition(_) => None,
        }
    }

    pub fn transposition(&self) -> Option<&TranspositionKey> {
        match self {
            Key::Transposition(t) => Some(t),
            Key::Combined(c) => Some(&c.transposition),
            Key::Substitution(_) => None,
        }
    }

    pub fn encrypt(&self, pt: &NormalizedText) -> Result<NormalizedText> {
        match self {
            Key::Substitution(k) => k.encrypt(pt),
            Key::Transposition(k) => Ok(k.encrypt(pt)),
            Key::Combined(k) => k.encrypt(pt),
        }
    }

    pub fn decrypt(&self, ct: &NormalizedText) -> Result<NormalizedText> {
        match self {
            Key::Substitution(k) => k.decrypt(ct),
            Key::Transposition(k) => Ok(k.decrypt(ct)),
            Key::Combined(k) => k.decrypt(ct),
        }
    }
}
