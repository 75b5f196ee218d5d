//! Stage interval schedules for the staged greedy assignment.
//!
//! The base protocol considers weights in geometrically shrinking half-open
//! intervals `[p'/2, inf), [p'/4, p'/2), ..., [1, 2), [0, 1)` derived from
//! the power-of-two estimate `p'`. The relaxed variant shrinks by `1 + eps`
//! instead, with thresholds `{p'/(1+eps)^k}` rounded by a ceiling rule that
//! keeps them integral. Threshold arithmetic is exact rational arithmetic so
//! stage membership can never drift across a boundary.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// One stage's half-open weight interval `[lo, hi)`. `hi == None` means
/// unbounded above (only ever the first stage).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageInterval {
    /// Stage index within the schedule.
    pub r: usize,
    pub lo: u64,
    pub hi: Option<u64>,
}

impl StageInterval {
    pub fn contains(&self, w: u64) -> bool {
        w >= self.lo && self.hi.map_or(true, |hi| w < hi)
    }
}

impl fmt::Display for StageInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "[{}, {})", self.lo, hi),
            None => write!(f, "[{}, inf)", self.lo),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    /// The shrink base must exceed 1.
    InvalidBase,
    /// With base 2 the estimate must be a power of two, and it must be at
    /// least the base in general.
    BadPHat { p_hat: u64 },
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::InvalidBase => write!(f, "interval shrink base must be > 1"),
            ScheduleError::BadPHat { p_hat } => {
                write!(f, "bad weight estimate p' = {p_hat} for this base")
            }
        }
    }
}

impl std::error::Error for ScheduleError {}

/// Power-of-two estimate used by the protocols: `2^(floor(log2 max(p,1)) + 1)`,
/// i.e. the value the staged counting phase arrives at.
pub fn power_of_two_estimate(p: u64) -> u64 {
    let p = p.max(1);
    let ell = 63 - p.leading_zeros();
    1u64 << (ell + 1)
}

/// Stage index at which an agent with local maximum `p_i` speaks up during
/// the counting phase. Stage 0 covers `p_i <= 1` (the published case split
/// starts the `r > 0` clause at 2, so 1 would otherwise never speak).
pub fn speak_stage(p_local: u64) -> u32 {
    if p_local <= 1 {
        0
    } else {
        63 - p_local.leading_zeros()
    }
}

/// Builds the ordered list of stage intervals for estimate `p_hat` and a
/// rational shrink base (2 for the base protocol, `1 + eps` for the relaxed
/// variant).
///
/// Thresholds are `{p_hat / base^k}` where `{a/b}` is `ceil(a/b)` if
/// `a/b > 1/base` and 0 otherwise. Duplicate thresholds produce empty
/// intervals, which are dropped. The first interval is upper-unbounded and
/// the last is always `[0, 1)`, so integer weights are partitioned exactly.
pub fn stage_intervals(p_hat: u64, base: Ratio<u64>) -> Result<Vec<StageInterval>, ScheduleError> {
    if base <= Ratio::one() {
        return Err(ScheduleError::InvalidBase);
    }
    if base == Ratio::from_integer(2) && !p_hat.is_power_of_two() {
        return Err(ScheduleError::BadPHat { p_hat });
    }
    let big_base = BigRational::new(
        BigInt::from(*base.numer()),
        BigInt::from(*base.denom()),
    );
    if BigRational::from_integer(BigInt::from(p_hat)) < big_base {
        return Err(ScheduleError::BadPHat { p_hat });
    }

    // cut = 1/base: ratios at or below it round to 0.
    let cut = big_base.recip();
    let mut bounds: Vec<u64> = Vec::new();
    let mut x = BigRational::from_integer(BigInt::from(p_hat));
    loop {
        x /= &big_base;
        let b = if x > cut {
            // ceil(x); x > 0 here.
            let c = x.ceil().to_integer();
            debug_assert!(!c.is_negative());
            c.to_u64().expect("threshold bounded by p_hat")
        } else {
            0
        };
        bounds.push(b);
        if b == 0 {
            break;
        }
    }

    // bounds = [{p/base}, {p/base^2}, ..., 1, 0]; build intervals and drop
    // the empty ones arising from repeated thresholds.
    let mut intervals = Vec::new();
    let mut hi: Option<u64> = None;
    for &lo in &bounds {
        if let Some(h) = hi {
            if lo >= h {
                continue;
            }
        }
        intervals.push(StageInterval {
            r: intervals.len(),
            lo,
            hi,
        });
        hi = Some(lo);
    }
    debug_assert_eq!(intervals.last().map(|iv| (iv.lo, iv.hi)), Some((0, Some(1))));
    Ok(intervals)
}

/// Base-2 schedule for a power-of-two estimate, as the protocols use it.
pub fn base2_intervals(p_hat: u64) -> Vec<StageInterval> {
    stage_intervals(p_hat, Ratio::from_integer(2)).expect("p_hat is a power of two >= 2")
}
