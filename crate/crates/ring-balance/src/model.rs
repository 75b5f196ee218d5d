//! Problem data model: instances, assignments, quotas, cost and feasibility.
//!
//! Colors and agents are 0-indexed. The item-count matrix `Q` is stored
//! dense, indexed `[color][agent]`, with 64-bit non-negative entries so that
//! every cost computation is exact integer arithmetic.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Errors raised while validating or constructing an [`Instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceError {
    /// An item count was negative (only reachable through file input).
    NegativeCount { color: usize, agent: usize },
    /// `m < n`: a balanced coloring needs at least one color per agent.
    FewerColorsThanAgents { n: usize, m: usize },
    /// `n == 0` rings are not a thing.
    NoAgents,
    /// `Q` does not have shape `m x n`.
    BadShape { expected_rows: usize, expected_cols: usize },
    /// The total item count does not fit in 64 bits, so exact cost
    /// arithmetic would overflow.
    CountOverflow,
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::NegativeCount { color, agent } => {
                write!(f, "negative item count at color {color}, agent {agent}")
            }
            InstanceError::FewerColorsThanAgents { n, m } => {
                write!(f, "need m >= n for a balanced coloring, got m={m}, n={n}")
            }
            InstanceError::NoAgents => write!(f, "instance must have at least one agent"),
            InstanceError::BadShape {
                expected_rows,
                expected_cols,
            } => write!(f, "Q must be a {expected_rows} x {expected_cols} matrix"),
            InstanceError::CountOverflow => write!(f, "total item count overflows 64 bits"),
        }
    }
}

impl std::error::Error for InstanceError {}

/// Errors raised while constructing an [`Assignment`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignmentError {
    /// `pi` must have exactly one entry per color.
    WrongLength { expected: usize, got: usize },
    /// An entry referenced a nonexistent agent.
    AgentOutOfRange { color: usize, agent: usize },
}

impl fmt::Display for AssignmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignmentError::WrongLength { expected, got } => {
                write!(f, "assignment must cover {expected} colors, got {got}")
            }
            AssignmentError::AgentOutOfRange { color, agent } => {
                write!(f, "color {color} assigned to nonexistent agent {agent}")
            }
        }
    }
}

impl std::error::Error for AssignmentError {}

/// A problem instance: `n` agents on a ring, `m >= n` colors, and the
/// item-count matrix `Q[color][agent]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    m: usize,
    q: Vec<Vec<u64>>,
}

/// Wire format for instance files: `{"n":…, "m":…, "q":[[…]], "meta":{…}}`.
/// Row `j` of `q` holds color `j`'s per-agent counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub m: usize,
    pub q: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl Instance {
    /// Builds and validates an instance. `q[j][i]` is the number of items of
    /// color `j` held by agent `i`.
    pub fn new(n: usize, m: usize, q: Vec<Vec<u64>>) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::NoAgents);
        }
        if m < n {
            return Err(InstanceError::FewerColorsThanAgents { n, m });
        }
        if q.len() != m || q.iter().any(|row| row.len() != n) {
            return Err(InstanceError::BadShape {
                expected_rows: m,
                expected_cols: n,
            });
        }
        let mut total: u64 = 0;
        for row in &q {
            for &w in row {
                total = total.checked_add(w).ok_or(InstanceError::CountOverflow)?;
            }
        }
        Ok(Instance { n, m, q })
    }

    /// Builds an instance from possibly-negative counts, as read from disk.
    pub fn from_signed(n: usize, m: usize, rows: &[Vec<i64>]) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::NoAgents);
        }
        if m < n {
            return Err(InstanceError::FewerColorsThanAgents { n, m });
        }
        if rows.len() != m || rows.iter().any(|row| row.len() != n) {
            return Err(InstanceError::BadShape {
                expected_rows: m,
                expected_cols: n,
            });
        }
        let mut q = Vec::with_capacity(m);
        for (j, row) in rows.iter().enumerate() {
            let mut out = Vec::with_capacity(n);
            for (i, &w) in row.iter().enumerate() {
                if w < 0 {
                    return Err(InstanceError::NegativeCount { color: j, agent: i });
                }
                out.push(w as u64);
            }
            q.push(out);
        }
        Instance::new(n, m, q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Items of color `j` held by agent `i`.
    pub fn weight(&self, color: usize, agent: usize) -> u64 {
        self.q[color][agent]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.q
    }

    /// `p_i = max_j Q[j][i]`, the largest same-color pile at agent `i`.
    pub fn p_local(&self, agent: usize) -> u64 {
        self.q.iter().map(|row| row[agent]).max().unwrap_or(0)
    }

    /// `p = max_i p_i`, the largest same-color pile anywhere.
    pub fn p(&self) -> u64 {
        (0..self.n).map(|i| self.p_local(i)).max().unwrap_or(0)
    }

    /// Total number of items in the instance.
    pub fn total_items(&self) -> u64 {
        self.q.iter().flatten().sum()
    }

    /// Weight column of one agent, indexed by color.
    pub fn agent_column(&self, agent: usize) -> Vec<u64> {
        self.q.iter().map(|row| row[agent]).collect()
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            n: self.n,
            m: self.m,
            q: self
                .q
                .iter()
                .map(|row| row.iter().map(|&w| w as i64).collect())
                .collect(),
            meta: BTreeMap::new(),
        }
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self, InstanceError> {
        Instance::from_signed(file.n, file.m, &file.q)
    }
}

/// Re-checks the invariants of an already constructed instance. Constructors
/// enforce them, so this mostly serves file round-trips and tests.
pub fn validate_instance(inst: &Instance) -> Result<(), InstanceError> {
    Instance::new(inst.n, inst.m, inst.q.clone()).map(|_| ())
}

/// A total map from colors to agents: `pi[j]` is the agent owning color `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pi: Vec<usize>,
}

impl Assignment {
    pub fn new(pi: Vec<usize>, n: usize, m: usize) -> Result<Self, AssignmentError> {
        if pi.len() != m {
            return Err(AssignmentError::WrongLength {
                expected: m,
                got: pi.len(),
            });
        }
        for (color, &agent) in pi.iter().enumerate() {
            if agent >= n {
                return Err(AssignmentError::AgentOutOfRange { color, agent });
            }
        }
        Ok(Assignment { pi })
    }

    pub fn agent_of(&self, color: usize) -> usize {
        self.pi[color]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.pi
    }

    /// Number of colors assigned to each agent.
    pub fn degrees(&self, n: usize) -> Vec<usize> {
        let mut deg = vec![0usize; n];
        for &agent in &self.pi {
            deg[agent] += 1;
        }
        deg
    }
}

/// Pivot of the quota formula: agents with index below `g` get
/// `floor(m/n)` colors, the rest get one more.
pub fn quota_pivot(n: usize, m: usize) -> usize {
    (m / n + 1) * n - m
}

/// Number of colors agent `i` must end up with.
pub fn quota(i: usize, n: usize, m: usize) -> u64 {
    debug_assert!(i < n && m >= n);
    let floor = (m / n) as u64;
    if i < quota_pivot(n, m) {
        floor
    } else {
        floor + 1
    }
}

/// True iff the per-agent degree multiset matches the balanced coloring
/// definition exactly: `quota_pivot` agents hold `floor(m/n)` colors and the
/// remaining `m - floor(m/n)*n` agents hold one more.
pub fn is_balanced(a: &Assignment, inst: &Instance) -> bool {
    let (n, m) = (inst.n(), inst.m());
    let floor = m / n;
    let g = quota_pivot(n, m);
    let mut at_floor = 0usize;
    let mut at_ceil = 0usize;
    for &d in &a.degrees(n) {
        if d == floor {
            at_floor += 1;
        } else if d == floor + 1 {
            at_ceil += 1;
        } else {
            return false;
        }
    }
    at_floor == g && at_ceil == n - g
}

/// Cost of an assignment: items that must move, i.e.
/// `sum_j sum_{i != pi(j)} Q[j][i]`, evaluated as the literal double sum.
pub fn cost(a: &Assignment, inst: &Instance) -> u64 {
    let mut acc: u64 = 0;
    for (j, row) in inst.rows().iter().enumerate() {
        let keep = a.agent_of(j);
        for (i, &w) in row.iter().enumerate() {
            if i != keep {
                acc += w;
            }
        }
    }
    acc
}

/// Items that stay put under `a`: `sum_j Q[j][pi(j)]`. Together with
/// [`Instance::total_items`] this gives the identity
/// `cost = total - kept`, computed on an independent path from [`cost`].
pub fn kept_items(a: &Assignment, inst: &Instance) -> u64 {
    inst.rows()
        .iter()
        .enumerate()
        .map(|(j, row)| row[a.agent_of(j)])
        .sum()
}

/// Ratio between an algorithm's cost and the optimal cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxRatio {
    Finite(Ratio<u64>),
    /// Positive cost against a zero-cost optimum. Cannot happen for the
    /// protocols in this crate, but the type is honest about it.
    Infinite,
}

impl ApproxRatio {
    pub fn as_f64(&self) -> f64 {
        match self {
            ApproxRatio::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            ApproxRatio::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<Ratio<u64>> {
        match self {
            ApproxRatio::Finite(r) => Some(*r),
            ApproxRatio::Infinite => None,
        }
    }
}

impl fmt::Display for ApproxRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxRatio::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            ApproxRatio::Infinite => write!(f, "inf"),
        }
    }
}

/// `cost_alg / cost_opt`, defined as 1 when both are zero.
pub fn approximation_ratio(cost_alg: u64, cost_opt: u64) -> ApproxRatio {
    match (cost_alg, cost_opt) {
        (0, 0) => ApproxRatio::Finite(Ratio::new(1, 1)),
        (_, 0) => ApproxRatio::Infinite,
        _ => ApproxRatio::Finite(Ratio::new(cost_alg, cost_opt)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{example2_instance, gen_random};
    use proptest::prelude::*;

    #[test]
    fn validate_accepts_example2() {
        let inst = example2_instance();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.m(), 8);
        assert!(validate_instance(&inst).is_ok());
    }

    #[test]
    fn validate_rejects_fewer_colors_than_agents() {
        let err = Instance::new(3, 2, vec![vec![0; 3]; 2]).unwrap_err();
        assert_eq!(err, InstanceError::FewerColorsThanAgents { n: 3, m: 2 });
    }

    #[test]
    fn validate_accepts_degenerate_singleton() {
        let inst = Instance::new(1, 1, vec![vec![0]]).unwrap();
        assert!(validate_instance(&inst).is_ok());
    }

    #[test]
    fn negative_counts_are_rejected_from_signed_input() {
        let err = Instance::from_signed(2, 2, &[vec![1, 0], vec![0, -3]]).unwrap_err();
        assert_eq!(err, InstanceError::NegativeCount { color: 1, agent: 1 });
    }

    #[test]
    fn balanced_equal_split() {
        let inst = Instance::new(3, 6, vec![vec![0; 3]; 6]).unwrap();
        let a = Assignment::new(vec![0, 0, 1, 1, 2, 2], 3, 6).unwrap();
        assert!(is_balanced(&a, &inst));
    }

    #[test]
    fn balanced_with_remainder() {
        // n=3, m=7: two agents at floor(7/3)=2 and one at 3, any order.
        let inst = Instance::new(3, 7, vec![vec![0; 3]; 7]).unwrap();
        for heavy in 0..3 {
            let mut pi = Vec::new();
            for agent in 0..3 {
                let take = if agent == heavy { 3 } else { 2 };
                pi.extend(std::iter::repeat(agent).take(take));
            }
            let a = Assignment::new(pi, 3, 7).unwrap();
            assert!(is_balanced(&a, &inst));
        }
    }

    #[test]
    fn unbalanced_degrees_rejected() {
        let inst = Instance::new(3, 6, vec![vec![0; 3]; 6]).unwrap();
        let a = Assignment::new(vec![0, 1, 1, 2, 2, 2], 3, 6).unwrap();
        assert!(!is_balanced(&a, &inst));
    }

    #[test]
    fn cost_of_example2_optimal_split_is_12() {
        // C' = {1,3,4,7} to the far agent, C'' = {0,2,5,6} kept by a_0.
        let inst = example2_instance();
        let mut pi = vec![0; 8];
        for j in [1, 3, 4, 7] {
            pi[j] = 1;
        }
        let a = Assignment::new(pi, 2, 8).unwrap();
        assert_eq!(cost(&a, &inst), 12);
    }

    #[test]
    fn cost_of_example1_optimal_split_is_16() {
        let inst = crate::instances::example1_instance();
        // C' = {1,3,4,7} stays at a_0, C'' = {0,2,5,6} goes to a_1.
        let mut pi = vec![1; 8];
        for j in [1, 3, 4, 7] {
            pi[j] = 0;
        }
        let a = Assignment::new(pi, 2, 8).unwrap();
        assert_eq!(cost(&a, &inst), 16);
    }

    #[test]
    fn cost_zero_when_single_holder_takes_all() {
        let inst = Instance::new(2, 2, vec![vec![5, 0], vec![3, 0]]).unwrap();
        let a = Assignment::new(vec![0, 0], 2, 2).unwrap();
        // Not balanced, but cost is defined for any total assignment.
        assert_eq!(cost(&a, &inst), 0);
    }

    #[test]
    fn quota_examples() {
        assert_eq!(quota(0, 3, 6), 2);
        assert_eq!(quota(2, 3, 7), 3);
        assert_eq!(quota(0, 3, 7), 2);
    }

    #[test]
    fn quota_sums_to_m() {
        for n in 1..=64usize {
            for m in n..=64usize {
                let sum: u64 = (0..n).map(|i| quota(i, n, m)).sum();
                assert_eq!(sum, m as u64, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(
            approximation_ratio(14, 12),
            ApproxRatio::Finite(Ratio::new(7, 6))
        );
        assert_eq!(
            approximation_ratio(0, 0),
            ApproxRatio::Finite(Ratio::new(1, 1))
        );
        assert_eq!(
            approximation_ratio(17, 16),
            ApproxRatio::Finite(Ratio::new(17, 16))
        );
        assert_eq!(approximation_ratio(3, 0), ApproxRatio::Infinite);
    }

    proptest! {
        #[test]
        fn cost_identity_total_minus_kept(
            n in 1usize..5,
            extra in 0usize..5,
            p_max in 0u64..20,
            seed in 0u64..1000,
        ) {
            let m = n + extra;
            let inst = gen_random(n, m, p_max, 0.7, seed).unwrap();
            // Arbitrary total assignment derived from the seed.
            let pi: Vec<usize> = (0..m).map(|j| (j * 7 + seed as usize) % n).collect();
            let a = Assignment::new(pi, n, m).unwrap();
            prop_assert_eq!(cost(&a, &inst), inst.total_items() - kept_items(&a, &inst));
        }

        #[test]
        fn balanced_degree_multiset(
            n in 1usize..6,
            extra in 0usize..7,
            perm_seed in 0u64..100,
        ) {
            let m = n + extra;
            let inst = Instance::new(n, m, vec![vec![0; n]; m]).unwrap();
            // Build a balanced assignment, then check the degree multiset.
            let mut pi = Vec::new();
            for i in 0..n {
                pi.extend(std::iter::repeat(i).take(quota(i, n, m) as usize));
            }
            // Rotate to shuffle which colors go where (degrees unchanged).
            pi.rotate_left((perm_seed as usize) % m);
            let a = Assignment::new(pi, n, m).unwrap();
            prop_assert!(is_balanced(&a, &inst));
            let degs = a.degrees(n);
            let total: usize = degs.iter().sum();
            prop_assert_eq!(total, m);
            for d in degs {
                prop_assert!(d == m / n || d == m / n + 1);
            }
        }
    }
}
