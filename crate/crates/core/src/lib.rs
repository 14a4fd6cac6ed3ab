//! Metropolis attack on classical substitution and transposition ciphers.
//!
//! The random source is pluggable among a drand48-compatible LCG,
//! xorshift128 and a chaotic-iteration generator so that the attack's
//! sensitivity to generator quality can be measured. Everything in this
//! crate is `no_std` and depends only on `alloc`; file formats, parallel
//! execution and the command line live in the companion `cipherchain` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cipher;
pub mod error;
pub mod harness;
pub mod langmodel;
pub mod mcmc;
pub mod prng;

pub use cipher::{Alphabet, CombinedKey, Key, KeySpace, NormalizedText, SubstitutionKey, TranspositionKey};
pub use error::{Error, Result};
pub use langmodel::{BigramCounts, BigramModel, SubstitutionScorer};
pub use mcmc::{ChainConfig, ChainState, InitialKey, Proposal};
pub use prng::{CiParams, PrngKind, RandomSource};
