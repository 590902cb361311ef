use std::sync::Mutex;
use std::time::Duration;

use crate::clock::Clock;

/// Paces requests at most `rpm` per minute.
///
/// Slots are handed out at least `ceil(60 s / rpm)` apart, so any half-open
/// 60 s window holds at most `rpm` of them. No bursts are allowed.
#[derive(Debug)]
pub struct TokenBucket {
    interval: Duration,
    next_free: Mutex<Option<Duration>>,
}

impl TokenBucket {
    /// # Panics
    /// If `rpm` is zero.
    pub fn per_minute(rpm: u32) -> Self {
        assert!(rpm > 0, "rpm must be positive");
        let nanos = 60_000_000_000u64.div_ceil(u64::from(rpm));
        Self {
            interval: Duration::from_nanos(nanos),
            next_free: Mutex::new(None),
        }
    }

    pub fn interval(&self) -> Duration {
        self.interval
    }

    /// Reserves the next slot and waits for it; returns the slot time.
    pub async fn acquire(&self, clock: &dyn Clock) -> Duration {
        let slot = {
            let mut next = self.next_free.lock().expect("bucket lock");
            let now = clock.now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot
        };
        let now = clock.now();
        if slot > now {
            clock.sleep(slot - now).await;
        }
        slot
    }
}
