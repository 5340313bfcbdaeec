//! Clocks and the sliding-window request limiter.

use std::collections::VecDeque;
use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::Mutex;

/// Time source for rate limiting and backoff.
pub trait Clock: Send + Sync {
    /// Time elapsed since the clock's origin.
    fn now(&self) -> Duration;
    fn sleep(&self, duration: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

/// Virtual clock: `sleep` advances time instantly. For tests and simulations.
#[derive(Debug, Default)]
pub struct ManualClock {
    now: Mutex<Duration>,
}

impl ManualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, by: Duration) {
        *self.now.lock() += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.now.lock()
    }

    fn sleep(&self, duration: Duration) {
        self.advance(duration);
    }
}

/// Admits at most `limit` acquisitions in any window of length `window`.
///
/// Keeps the admission times of the last `limit` requests; a caller blocks
/// until the oldest of them falls out of the window.
pub struct RateLimiter {
    limit: usize,
    window: Duration,
    clock: Arc<dyn Clock>,
    admitted: Mutex<VecDeque<Duration>>,
}

impl RateLimiter {
    pub fn new(limit: usize, window: Duration, clock: Arc<dyn Clock>) -> Self {
        assert!(limit > 0, "rate limit must be positive");
        RateLimiter { limit, window, clock, admitted: Mutex::new(VecDeque::with_capacity(limit)) }
    }

    pub fn per_minute(limit: usize, clock: Arc<dyn Clock>) -> Self {
        Self::new(limit, Duration::from_secs(60), clock)
    }

    /// Blocks until a request may be sent; returns the admission time.
    /// The lock is held while waiting, so waiters are admitted one at a time.
    pub fn acquire(&self) -> Duration {
        let mut admitted = self.admitted.lock();
        loop {
            let now = self.clock.now();
            while admitted.front().is_some_and(|&t| t + self.window <= now) {
                admitted.pop_front();
            }
            if admitted.len() < self.limit {
                admitted.push_back(now);
                return now;
            }
            let oldest = *admitted.front().expect("window is full");
            self.clock.sleep(oldest + self.window - now);
        }
    }
}
