use std::time::Duration;

use rand::Rng;

/// Exponential backoff with additive jitter.
///
/// Retry `n` (0-based) waits `min(cap, base · 2ⁿ)` plus a uniform jitter of
/// up to `jitter · that delay`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RetryPolicy {
    /// Retries after the first attempt; total attempts are `budget + 1`.
    pub budget: u32,
    pub base: Duration,
    pub cap: Duration,
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            budget: 5,
            base: Duration::from_secs(1),
            cap: Duration::from_secs(30),
            jitter: 0.2,
        }
    }
}

impl RetryPolicy {
    pub fn with_budget(mut self, budget: u32) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_base(mut self, base: Duration) -> Self {
        self.base = base;
        self
    }

    pub fn max_attempts(&self) -> u32 {
        self.budget.saturating_add(1)
    }

    pub fn delay_before_jitter(&self, retry: u32) -> Duration {
        let factor = 2u32.checked_pow(retry.min(31)).unwrap_or(u32::MAX);
        self.base.checked_mul(factor).unwrap_or(self.cap).min(self.cap)
    }

    pub fn delay<R: Rng + ?Sized>(&self, retry: u32, rng: &mut R) -> Duration {
        let d = self.delay_before_jitter(retry);
        if self.jitter <= 0.0 {
            return d;
        }
        d + d.mul_f64(rng.random_range(0.0..self.jitter))
    }
}
