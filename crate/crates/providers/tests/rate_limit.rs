use std::sync::Arc;
use std::time::Duration;

use bindbench_providers::{Clock, TokenBucket, VirtualClock};

/// Largest number of timestamps inside any half-open window of `width`.
fn max_in_window(times: &[Duration], width: Duration) -> usize {
    let mut best = 0;
    for (i, start) in times.iter().enumerate() {
        let n = times[i..].iter().take_while(|t| **t < *start + width).count();
        best = best.max(n);
    }
    best
}

#[tokio::test]
async fn no_minute_exceeds_rpm() {
    for rpm in [1, 7, 30, 61, 600] {
        let clock = VirtualClock::new();
        let bucket = TokenBucket::per_minute(rpm);
        let mut times = Vec::new();
        for i in 0..(3 * rpm as usize + 5) {
            // Irregular arrivals, including idle gaps.
            if i % 11 == 0 {
                clock.advance(Duration::from_millis(1_300 * i as u64));
            }
            times.push(bucket.acquire(&clock).await);
            assert!(clock.now() >= *times.last().unwrap());
        }
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!(max_in_window(&times, Duration::from_secs(60)) <= rpm as usize, "rpm {rpm}");
    }
}

#[tokio::test]
async fn concurrent_callers_share_one_budget() {
    let clock = Arc::new(VirtualClock::new());
    let bucket = Arc::new(TokenBucket::per_minute(30));
    let mut handles = Vec::new();
    for _ in 0..8 {
        let (clock, bucket) = (clock.clone(), bucket.clone());
        handles.push(tokio::spawn(async move {
            let mut t = Vec::new();
            for _ in 0..10 {
                t.push(bucket.acquire(clock.as_ref()).await);
            }
            t
        }));
    }
    let mut times = Vec::new();
    for h in handles {
        times.extend(h.await.unwrap());
    }
    times.sort();
    assert_eq!(times.len(), 80);
    assert!(max_in_window(&times, Duration::from_secs(60)) <= 30);
    assert!(times.windows(2).all(|w| w[1] - w[0] >= Duration::from_secs(2)));
}
