//! Seed derivation. Every stochastic draw descends from the campaign seed
//! through stable labels, so results do not depend on scheduling.

use sha2::{Digest, Sha256};

pub fn derive(parent: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(parent.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn game_seed(campaign: u64, setup_key: &str) -> u64 {
    derive(campaign, setup_key)
}

pub fn agent_seed(game: u64, index: usize) -> u64 {
    derive(game, &format!("agent:{index}"))
}

pub fn round_seed(agent: u64, round: u32) -> u64 {
    derive(agent, &format!("round:{round}"))
}

/// Hex SHA-256 of a byte string.
pub fn digest_hex(data: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(data.as_ref()))
}
