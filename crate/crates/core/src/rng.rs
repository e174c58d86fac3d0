//! Counter-based random numbers.
//!
//! Every random quantity in the crate is addressed by a tuple
//! `(domain, seed, level, index)`. The tuple is hashed into a stream key and
//! the stream produces `mix(key + i·φ)` for `i = 0, 1, …`. Values therefore
//! never depend on the order in which threads visit addresses.

use std::convert::Infallible;

use rand::rand_core::utils::fill_bytes_via_next_word;
use rand::{Rng, TryRng};
use rand_distr::{Distribution, Exp1, StandardNormal};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream domains keep the disorder, cascade and replica-seed families apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Disorder = 0x6469_736f_7264_6572,
    Cascade = 0x6361_7363_6164_6500,
    Replica = 0x7265_706c_6963_6100,
    Reference = 0x7265_6665_7265_6e63,
}

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn stream_key(domain: Domain, seed: u64, level: u64, index: u64) -> u64 {
    let mut k = mix64(domain as u64 ^ GOLDEN);
    k = mix64(k ^ seed);
    k = mix64(k.wrapping_add(GOLDEN) ^ level);
    mix64(k.wrapping_add(GOLDEN) ^ index)
}

/// Counter-mode generator over SplitMix64.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn at(domain: Domain, seed: u64, level: u64, index: u64) -> Self {
        Self::new(stream_key(domain, seed, level, index))
    }
}

impl TryRng for CounterRng {
    type Error = Infallible;

    #[inline]
    fn try_next_u32(&mut self) -> Result<u32, Infallible> {
        Ok((self.try_next_u64()? >> 32) as u32)
    }

    #[inline]
    fn try_next_u64(&mut self) -> Result<u64, Infallible> {
        self.counter = self.counter.wrapping_add(1);
        Ok(mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN))))
    }

    fn try_fill_bytes(&mut self, dst: &mut [u8]) -> Result<(), Infallible> {
        fill_bytes_via_next_word(dst, || self.try_next_u64())
    }
}

/// Location of one Gaussian in the hierarchy: the level and the packed spin
/// prefix `σ^(1)‖…‖σ^(level)` that labels the node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DisorderAddress {
    pub level: usize,
    pub path: u64,
    /// Number of bits in `path`.
    pub len: u32,
}

impl DisorderAddress {
    pub fn new(level: usize, path: u64, len: u32) -> Self {
        debug_assert!(len == 64 || path >> len == 0, "path has bits beyond its length");
        Self { level, path, len }
    }
}

/// Key shared by all nodes of one hierarchy level.
#[inline]
pub fn level_key(seed: u64, level: usize) -> u64 {
    stream_key(Domain::Disorder, seed, level as u64, 0)
}

/// Standard normal for node `path` of the level keyed by `level_key`.
#[inline]
pub fn node_gaussian(level_key: u64, path: u64) -> f64 {
    let mut rng = CounterRng::new(mix64(level_key.wrapping_add(path.wrapping_mul(GOLDEN))));
    StandardNormal.sample(&mut rng)
}

/// Standard normal attached to `(seed, addr)`.
#[inline]
pub fn disorder_gaussian(seed: u64, addr: DisorderAddress) -> f64 {
    node_gaussian(level_key(seed, addr.level), addr.path)
}

/// Independent seed for replica `r` of an experiment seeded with `seed`.
pub fn replica_seed(seed: u64, replica: u64) -> u64 {
    stream_key(Domain::Replica, seed, 0, replica)
}

/// Unit exponential from a generator.
#[inline]
pub fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}
