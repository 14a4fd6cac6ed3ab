//! Seedable generators driving the chain: a drand48-compatible 48-bit LCG,
//! Marsaglia's xorshift128, and a chaotic-iteration generator built on two
//! xorshift128 streams.
//!
//! Every generator produces raw words of a fixed width; [`RandomSource`]
//! turns those into uniform reals and unbiased bounded integers so the rest
//! of the crate never depends on which generator is plugged in.

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// POSIX drand48 multiplier.
pub const DRAND48_MULTIPLIER: u64 = 0x5_DEEC_E66D;
/// POSIX drand48 increment.
pub const DRAND48_INCREMENT: u64 = 0xB;
/// Low 16 bits that `srand48` places under the seed.
pub const DRAND48_SEED_LOW: u64 = 0x330E;

const MASK48: u64 = (1 << 48) - 1;

/// `X' = (a X + c) mod 2^48`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lcg48 {
    x: u64,
    a: u64,
    c: u64,
}

impl Lcg48 {
    /// Seeds the POSIX generator the way `srand48(seed)` does: the low 32
    /// bits of `seed` become the high 32 bits of the state.
    pub fn srand48(seed: u64) -> Self {
        Self::with_params(
            ((seed & 0xFFFF_FFFF) << 16) | DRAND48_SEED_LOW,
            DRAND48_MULTIPLIER,
            DRAND48_INCREMENT,
        )
    }

    /// Arbitrary state and constants; all three are reduced mod 2^48.
    pub fn with_params(x: u64, a: u64, c: u64) -> Self {
        Self {
            x: x & MASK48,
            a: a & MASK48,
            c: c & MASK48,
        }
    }

    pub fn state(&self) -> u64 {
        self.x
    }

    pub fn next_u48(&mut self) -> u64 {
        self.x = self.a.wrapping_mul(self.x).wrapping_add(self.c) & MASK48;
        self.x
    }
}

/// Marsaglia's xorshift128 on four 32-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Xorshift128 {
    x: u32,
    y: u32,
    z: u32,
    w: u32,
}

impl Xorshift128 {
    /// Initial words of the reference `xor128` routine.
    pub const REFERENCE_STATE: [u32; 4] = [123_456_789, 362_436_069, 521_288_629, 88_675_123];

    /// Returns `None` for the absorbing all-zero state.
    pub fn from_words(words: [u32; 4]) -> Option<Self> {
        if words == [0; 4] {
            return None;
        }
        let [x, y, z, w] = words;
        Some(Self { x, y, z, w })
    }

    pub fn reference() -> Self {
        let [x, y, z, w] = Self::REFERENCE_STATE;
        Self { x, y, z, w }
    }

    /// Fills the four words from a splitter, redrawing while all-zero.
    pub fn from_splitter(split: &mut SplitMix64) -> Self {
        loop {
            let lo = split.next_u64();
            let hi = split.next_u64();
            let words = [lo as u32, (lo >> 32) as u32, hi as u32, (hi >> 32) as u32];
            if let Some(g) = Self::from_words(words) {
                return g;
            }
        }
    }

    pub fn words(&self) -> [u32; 4] {
        [self.x, self.y, self.z, self.w]
    }

    pub fn next_u32(&mut self) -> u32 {
        let t = self.x ^ (self.x << 11);
        self.x = self.y;
        self.y = self.z;
        self.z = self.w;
        self.w = self.w ^ (self.w >> 19) ^ (t ^ (t >> 8));
        self.w
    }
}

/// Width and iteration constant of the chaotic-iteration generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CiParams {
    /// Number of state bits, `1..=64`.
    pub n_bits: u32,
    /// Added to `a mod 2` to get the last flip index of a step.
    pub c_iter: u32,
}

impl Default for CiParams {
    fn default() -> Self {
        Self {
            n_bits: 32,
            c_iter: 1,
        }
    }
}

/// Chaotic-iteration generator.
///
/// Each output draws `a` from the first xorshift stream, sets
/// `m = (a mod 2) + c_iter`, then performs `m + 1` flips (indices `0..=m`),
/// each flipping bit `b mod N` of the state for a fresh `b` from the second
/// stream. The state read as an `N`-bit integer (bit 0 least significant)
/// is the output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChaoticIteration {
    bits: u64,
    params: CiParams,
    gen1: Xorshift128,
    gen2: Xorshift128,
}

impl ChaoticIteration {
    pub fn new(bits: u64, params: CiParams, gen1: Xorshift128, gen2: Xorshift128) -> Result<Self> {
        if params.n_bits == 0 || params.n_bits > 64 {
            return Err(Error::InvalidStateWidth(params.n_bits));
        }
        Ok(Self {
            bits: bits & width_mask(params.n_bits),
            params,
            gen1,
            gen2,
        })
    }

    /// State bits, then `gen1`, then `gen2`, all drawn from one splitter.
    /// `gen2` is redrawn until it differs from `gen1`.
    pub fn from_seed(seed: u64, params: CiParams) -> Result<Self> {
        let mut split = SplitMix64::new(seed);
        let bits = split.next_u64();
        let gen1 = Xorshift128::from_splitter(&mut split);
        let mut gen2 = Xorshift128::from_splitter(&mut split);
        while gen2 == gen1 {
            gen2 = Xorshift128::from_splitter(&mut split);
        }
        Self::new(bits, params, gen1, gen2)
    }

    pub fn params(&self) -> CiParams {
        self.params
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn gen1(&self) -> &Xorshift128 {
        &self.gen1
    }

    pub fn gen2(&self) -> &Xorshift128 {
        &self.gen2
    }

    pub fn next_bits(&mut self) -> u64 {
        let a = self.gen1.next_u32();
        let m = (a % 2) + self.params.c_iter;
        let n = u64::from(self.params.n_bits);
        for _ in 0..=m {
            let b = self.gen2.next_u32();
            let s = u64::from(b) % n;
            self.bits ^= 1 << s;
        }
        self.bits
    }
}

fn width_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1 << bits) - 1
    }
}

/// SplitMix64, the fixed 64-bit mixer used for all seeding and seed
/// derivation (increment `0x9E3779B97F4A7C15`, Stafford variant 13 finalizer).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Mixes `index` into `seed`; used to derive per-experiment and per-run seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut s = SplitMix64::new(seed ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    s.next_u64()
}

/// Which generator backs a [`RandomSource`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrngKind {
    Lcg48,
    Xorshift128,
    ChaoticIteration,
}

impl PrngKind {
    pub const ALL: [PrngKind; 3] = [
        PrngKind::Lcg48,
        PrngKind::Xorshift128,
        PrngKind::ChaoticIteration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrngKind::Lcg48 => "drand48",
            PrngKind::Xorshift128 => "xorshift128",
            PrngKind::ChaoticIteration => "ci",
        }
    }
}

impl fmt::Display for PrngKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPrng;

impl fmt::Display for UnknownPrng {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown generator; expected one of drand48, xorshift128, ci")
    }
}

impl core::error::Error for UnknownPrng {}

impl FromStr for PrngKind {
    type Err = UnknownPrng;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "drand48" | "lcg48" | "lcg" => Ok(PrngKind::Lcg48),
            "xorshift128" | "xorshift" | "xor128" => Ok(PrngKind::Xorshift128),
            "ci" | "chaotic" | "chaotic-iteration" => Ok(PrngKind::ChaoticIteration),
            _ => Err(UnknownPrng),
        }
    }
}

/// A generator of any supported kind behind one interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RandomSource {
    Lcg48(Lcg48),
    Xorshift128(Xorshift128),
    ChaoticIteration(ChaoticIteration),
}

impl RandomSource {
    /// Seeds `kind` with default chaotic-iteration parameters.
    pub fn seeded(kind: PrngKind, seed: u64) -> Self {
        Self::seeded_with(kind, seed, CiParams::default())
            .expect("default chaotic-iteration parameters are valid")
    }

    /// Seeding rules:
    /// - drand48: `srand48` convention on the low 32 bits of `seed`.
    /// - xorshift128: the reference constants when `seed == 0`, otherwise
    ///   four words from [`SplitMix64`]`(seed)`.
    /// - chaotic iteration: see [`ChaoticIteration::from_seed`].
    pub fn seeded_with(kind: PrngKind, seed: u64, ci: CiParams) -> Result<Self> {
        Ok(match kind {
            PrngKind::Lcg48 => RandomSource::Lcg48(Lcg48::srand48(seed)),
            PrngKind::Xorshift128 if seed == 0 => RandomSource::Xorshift128(Xorshift128::reference()),
            PrngKind::Xorshift128 => {
                RandomSource::Xorshift128(Xorshift128::from_splitter(&mut SplitMix64::new(seed)))
            }
            PrngKind::ChaoticIteration => {
                RandomSource::ChaoticIteration(ChaoticIteration::from_seed(seed, ci)?)
            }
        })
    }

    pub fn kind(&self) -> PrngKind {
        match self {
            RandomSource::Lcg48(_) => PrngKind::Lcg48,
            RandomSource::Xorshift128(_) => PrngKind::Xorshift128,
            RandomSource::ChaoticIteration(_) => PrngKind::ChaoticIteration,
        }
    }

    /// Width of one raw word.
    pub fn word_bits(&self) -> u32 {
        match self {
            RandomSource::Lcg48(_) => 48,
            RandomSource::Xorshift128(_) => 32,
            RandomSource::ChaoticIteration(g) => g.params.n_bits,
        }
    }

    /// Next raw word, `< 2^word_bits()`.
    pub fn next_word(&mut self) -> u64 {
        match self {
            RandomSource::Lcg48(g) => g.next_u48(),
            RandomSource::Xorshift128(g) => u64::from(g.next_u32()),
            RandomSource::ChaoticIteration(g) => g.next_bits(),
        }
    }

    /// One raw word divided by `2^word_bits()`, in `[0, 1)`. Words wider
    /// than 53 bits keep their top 53 bits so the quotient stays below 1.
    pub fn next_uniform(&mut self) -> f64 {
        let bits = self.word_bits();
        let word = self.next_word();
        if bits > 53 {
            (word >> (bits - 53)) as f64 / (1u64 << 53) as f64
        } else {
            word as f64 / (1u64 << bits) as f64
        }
    }

    /// Unbiased integer in `[0, bound)` by multiply-shift rejection on raw
    /// words, so the result comes from the high bits of each word.
    pub fn next_below(&mut self, bound: u64) -> Result<u64> {
        if bound == 0 {
            return Err(Error::ZeroBound);
        }
        let need = (64 - (bound - 1).leading_zeros()).max(1);
        let bound = u128::from(bound);
        loop {
            let (r, width) = self.draw_wide(need);
            let m = r * bound;
            let low = m & ((1u128 << width) - 1);
            let threshold = (1u128 << width) % bound;
            if low >= threshold {
                return Ok((m >> width) as u64);
            }
        }
    }

    pub fn next_index(&mut self, bound: usize) -> Result<usize> {
        self.next_below(bound as u64).map(|v| v as usize)
    }

    /// Concatenates raw words until at least `min_bits` bits are available,
    /// keeping at most the low 64.
    fn draw_wide(&mut self, min_bits: u32) -> (u128, u32) {
        let b = self.word_bits();
        let mut v = 0u128;
        let mut width = 0;
        while width < min_bits {
            v = (v << b) | u128::from(self.next_word());
            width += b;
        }
        if width > 64 {
            v &= u128::from(u64::MAX);
            width = 64;
        }
        (v, width)
    }
}
