//! Reproducible, role-separated random streams.
//!
//! Every replication of an experiment gets its own ChaCha key derived from
//! `(seed, replication)`. Within a replication, each logical source of
//! randomness (arrivals, services, routing, tilted proposals, forward
//! extension, ...) reads from its own ChaCha stream, so replaying one role
//! never perturbs another. ChaCha is counter based: a stream is fully
//! determined by `(key, stream id)` and independent of scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Logical source of randomness inside one sampling run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Arrival,
    Service,
    Routing,
    Proposal,
    Forward,
    Discipline,
    Auxiliary,
}

impl Role {
    fn id(self) -> u64 {
        match self {
            Role::Arrival => 1,
            Role::Service => 2,
            Role::Routing => 3,
            Role::Proposal => 4,
            Role::Forward => 5,
            Role::Discipline => 6,
            Role::Auxiliary => 7,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key for one replication: every stream of the run is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub replication: u64,
}

impl StreamKey {
    pub fn new(seed: u64, replication: u64) -> Self {
        Self { seed, replication }
    }

    fn chacha_seed(&self) -> [u8; 32] {
        let mut state = self.seed ^ 0x5EED_0F_C0FF_EE00;
        let _ = splitmix64(&mut state);
        state ^= self.replication.wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut out = [0u8; 32];
        for chunk in out.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        out
    }

    /// Stream for `role`, sub-indexed (e.g. per server).
    pub fn stream(&self, role: Role, sub: u32) -> Stream {
        let mut rng = ChaCha8Rng::from_seed(self.chacha_seed());
        rng.set_stream((role.id() << 32) | u64::from(sub));
        Stream { rng }
    }
}

/// A single random stream. Thin wrapper so callers never see the backend.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    /// Uniform on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Standard exponential.
    pub fn exp1(&mut self) -> f64 {
        -self.open01().ln()
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
