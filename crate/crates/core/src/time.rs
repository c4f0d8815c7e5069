use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// Ticks per second at the default granularity (1 ms).
pub const DEFAULT_TICKS_PER_SECOND: u64 = 1_000;

/// Fixed-point time, counted in ticks of the configured granularity.
///
/// Every scheduling decision is made on these integers, so precedence and
/// overlap checks are exact.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TimeUnits(pub u64);

impl TimeUnits {
    pub const ZERO: TimeUnits = TimeUnits(0);

    pub fn new(ticks: u64) -> Self {
        TimeUnits(ticks)
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn saturating_sub(self, rhs: TimeUnits) -> TimeUnits {
        TimeUnits(self.0.saturating_sub(rhs.0))
    }
}

impl From<u64> for TimeUnits {
    fn from(v: u64) -> Self {
        TimeUnits(v)
    }
}

impl From<TimeUnits> for u64 {
    fn from(t: TimeUnits) -> Self {
        t.0
    }
}

impl Add for TimeUnits {
    type Output = TimeUnits;
    fn add(self, rhs: TimeUnits) -> TimeUnits {
        TimeUnits(self.0 + rhs.0)
    }
}

impl AddAssign for TimeUnits {
    fn add_assign(&mut self, rhs: TimeUnits) {
        self.0 += rhs.0;
    }
}

/// Panics on underflow, like the integer subtraction it wraps.
impl Sub for TimeUnits {
    type Output = TimeUnits;
    fn sub(self, rhs: TimeUnits) -> TimeUnits {
        TimeUnits(self.0 - rhs.0)
    }
}

impl Sum for TimeUnits {
    fn sum<I: Iterator<Item = TimeUnits>>(iter: I) -> Self {
        TimeUnits(iter.map(|t| t.0).sum())
    }
}

impl fmt::Display for TimeUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
