use std::thread;
use std::time::Duration;

use rand::Rng;

use super::BackendError;

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub factor: f64,
    /// Fraction of each delay added or removed at random.
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 5, base_delay: Duration::from_millis(500), factor: 2.0, jitter: 0.2 }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy { max_attempts: 1, base_delay: Duration::ZERO, factor: 1.0, jitter: 0.0 }
    }

    /// Delay before attempt `attempt + 1`, where `attempt` starts at 1.
    pub fn delay(&self, attempt: u32, unit: f64) -> Duration {
        let base = self.base_delay.as_secs_f64() * self.factor.powi(attempt.saturating_sub(1) as i32);
        let spread = 1.0 + self.jitter * (2.0 * unit - 1.0);
        Duration::from_secs_f64((base * spread).max(0.0))
    }
}

/// Runs `action` until it succeeds, fails with a non-retryable error, or
/// `max_attempts` is spent. The closure receives the 1-based attempt number.
pub fn with_retry<T>(
    policy: &RetryPolicy,
    mut action: impl FnMut(u32) -> Result<T, BackendError>,
) -> Result<T, BackendError> {
    let max = policy.max_attempts.max(1);
    let mut attempt = 1;
    loop {
        match action(attempt) {
            Ok(v) => return Ok(v),
            Err(e) if !e.is_retryable() => return Err(e),
            Err(e) if attempt >= max => {
                return Err(BackendError::Exhausted { attempts: attempt, last: Box::new(e) });
            }
            Err(e) => {
                let wait = policy.delay(attempt, rand::thread_rng().gen());
                log::warn!("attempt {attempt}/{max} failed ({e}); retrying in {wait:?}");
                thread::sleep(wait);
                attempt += 1;
            }
        }
    }
}
