//! Seeded, splittable random number generation.
//!
//! The stream generator is xoshiro256++ (Blackman & Vigna) seeded through
//! splitmix64. Child streams are derived from the *root seed* of their parent
//! plus a text label, never from the parent's current position, so the order
//! in which a parent draws has no effect on any child. That property is what
//! lets candidate fits run serially or in parallel with identical results.
//!
//! Everything here is implemented directly (no external RNG crate) so the
//! byte streams are pinned by this file alone and cannot drift with a
//! dependency upgrade.

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes; mixes a child label into a 64-bit key.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF29CE484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001B3);
    }
    h
}

/// Deterministic PRNG with reproducible stream splitting.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    state: [u64; 4],
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let state = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { seed, state }
    }

    /// The seed this stream was constructed from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive an independent child stream keyed by `(seed, label)`.
    ///
    /// Depends only on the parent's seed, not on how much the parent has
    /// drawn.
    pub fn child(&self, label: &str) -> Rng {
        let mut key = self.seed ^ fnv1a(label.as_bytes());
        Rng::new(splitmix64(&mut key))
    }

    /// Child stream keyed by `(seed, label, index)`; convenience for loops.
    pub fn child_indexed(&self, label: &str, index: u64) -> Rng {
        let mut key = self.seed ^ fnv1a(label.as_bytes()) ^ index.wrapping_mul(0x9E3779B97F4A7C15);
        Rng::new(splitmix64(&mut key))
    }

    /// xoshiro256++ next value.
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller; consumes exactly two words per call.
    pub fn normal(&mut self) -> f64 {
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform index in [0, n) by 128-bit multiply (bias < 2^-64).
    pub fn index(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.index(i + 1);
            slice.swap(i, j);
        }
    }
}
