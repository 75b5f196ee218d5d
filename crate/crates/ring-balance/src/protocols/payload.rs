//! Message payloads shared by the synchronous and asynchronous protocol
//! agents, plus the bit-size rules used for charging.
//!
//! Sizes follow the semantic content of each message: an agent label is
//! `ceil(log2 n)` bits, a color id `ceil(log2 m)` bits, a counter bounded by
//! `n` takes `ceil(log2 (n+1))` bits, a weight value `v` takes
//! `ceil(log2 (v+1))` bits and a boolean one bit.

use crate::sim::value_bits;

use super::election::ElectMsg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Claim {
    pub color: u32,
    pub weight: u64,
    pub label: u32,
}

#[derive(Debug, Clone)]
pub(crate) enum Payload {
    Elect(ElectMsg),
    /// Accumulating speak-up counter of the estimation phase.
    Counter(u64),
    /// Leader's broadcast of the final estimation stage index.
    StageAnnounce(u32),
    /// Running maximum of the asynchronous estimation pass.
    MaxProbe(u64),
    /// Dissemination of the exact maximum.
    MaxResult(u64),
    /// Step-1 originator label (synchronous).
    Label(u32),
    /// Step-1 boolean, first or second pass (asynchronous).
    Flag { pass2: bool, val: bool },
    /// Growing claim list of the first step-2 circulation.
    Claims(Vec<u32>),
    /// Complete claim list of the second step-2 circulation.
    ClaimsFinal(Vec<u32>),
    /// Weighted claims of the largest-holder variant.
    WeightedClaims(Vec<Claim>),
    /// Resolved (color, winner label) pairs of the largest-holder variant.
    Resolved(Vec<(u32, u32)>),
    /// One agent's full weight column, relayed hop by hop to the leader.
    GatherVector { origin_label: u32, weights: Vec<u64> },
    /// Optimal assignment broadcast by the leader (color -> original agent).
    GatherResult(Vec<u32>),
}

/// `ceil(log2 m)` bits identify one of `m` colors (at least 1).
pub(crate) fn color_bits(m: usize) -> u64 {
    value_bits(m.saturating_sub(1) as u64)
}

/// `ceil(log2 n)` bits identify one of `n` agents (at least 1).
pub(crate) fn label_bits(n: usize) -> u64 {
    value_bits(n.saturating_sub(1) as u64)
}

/// Bits of a counter that can reach `n`.
pub(crate) fn counter_bits(n: usize) -> u64 {
    value_bits(n as u64)
}

/// Bits of a claim list of `k` color ids.
pub(crate) fn claims_bits(k: usize, m: usize) -> u64 {
    ((k as u64) * color_bits(m)).max(1)
}

/// Bits of a weighted claim list: each claim carries a color id and a
/// weight of the agreed fixed width.
pub(crate) fn weighted_claims_bits(k: usize, m: usize, weight_width: u64) -> u64 {
    ((k as u64) * (color_bits(m) + weight_width)).max(1)
}

/// Bits of a resolved list: color id plus winner label per entry.
pub(crate) fn resolved_bits(k: usize, m: usize, n: usize) -> u64 {
    ((k as u64) * (color_bits(m) + label_bits(n))).max(1)
}
