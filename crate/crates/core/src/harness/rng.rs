//! Deterministic RNG stream derivation.
//!
//! Each consumer gets an independent ChaCha stream keyed by
//! (master seed, agent id, purpose tag), so adding agents or reordering
//! consumers never perturbs unrelated streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Tag value for streams not tied to any one agent.
pub const GLOBAL: u64 = u64::MAX;

/// Derives the stream for (master seed, agent, purpose).
pub fn stream(master_seed: u64, agent: u64, purpose: &str) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&agent.to_le_bytes());
    key[16..24].copy_from_slice(&fnv1a64(purpose).to_le_bytes());
    key[24..32].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

fn fnv1a64(s: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in s.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_independent() {
        let mut a1 = stream(42, 0, "batch-order");
        let mut a2 = stream(42, 0, "batch-order");
        assert_eq!(a1.gen::<u64>(), a2.gen::<u64>());

        let mut by_agent = stream(42, 1, "batch-order");
        let mut by_purpose = stream(42, 0, "model-init");
        let mut by_seed = stream(43, 0, "batch-order");
        let base = stream(42, 0, "batch-order").gen::<u64>();
        assert_ne!(base, by_agent.gen::<u64>());
        assert_ne!(base, by_purpose.gen::<u64>());
        assert_ne!(base, by_seed.gen::<u64>());
    }
}
