mod common;

use std::sync::atomic::Ordering;

use bindbench_harness::{aggregate, read_records, Runner};

#[tokio::test]
async fn warm_cache_makes_no_requests() {
    let stub = common::Stub::default();
    let url = common::serve(stub.clone()).await;
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");

    let cold = common::stub_config(&dir.path().join("a"), &cache, &url, 6, 3);
    let s1 = Runner::new(cold).unwrap().run().await.unwrap();
    assert_eq!(s1.grid_size, 12);
    assert_eq!(s1.provider_calls, 12);
    assert_eq!(stub.hits.load(Ordering::SeqCst), 12);
    assert!(s1.is_complete());

    let warm = common::stub_config(&dir.path().join("b"), &cache, &url, 6, 3);
    let s2 = Runner::new(warm.clone()).unwrap().run().await.unwrap();
    assert_eq!(s2.provider_calls, 0);
    assert_eq!(s2.cache_hits, 12);
    assert_eq!(stub.hits.load(Ordering::SeqCst), 12, "no request reaches the endpoint");

    let ra = std::fs::read(dir.path().join("a/records.jsonl")).unwrap();
    let rb = std::fs::read(dir.path().join("b/records.jsonl")).unwrap();
    assert_eq!(ra, rb);
    let agg_a = aggregate(&read_records(&dir.path().join("a/records.jsonl")).unwrap().records, warm.scoring);
    let agg_b = aggregate(&read_records(&dir.path().join("b/records.jsonl")).unwrap().records, warm.scoring);
    assert_eq!(
        serde_json::to_string(&agg_a).unwrap(),
        serde_json::to_string(&agg_b).unwrap()
    );
}

#[tokio::test]
async fn in_flight_requests_respect_the_limit() {
    for limit in [1usize, 2, 4] {
        let stub = common::Stub {
            delay_ms: 15,
            ..Default::default()
        };
        let url = common::serve(stub.clone()).await;
        let dir = tempfile::tempdir().unwrap();
        let cfg = common::stub_config(&dir.path().join("out"), &dir.path().join("cache"), &url, 10, limit);
        let summary = Runner::new(cfg).unwrap().run().await.unwrap();
        assert_eq!(summary.provider_calls, 20);
        let max = stub.max_in_flight.load(Ordering::SeqCst);
        assert!(max <= limit, "limit {limit}, saw {max}");
        if limit > 1 {
            assert!(max > 1, "requests should overlap under limit {limit}");
        }
    }
}

#[tokio::test]
async fn unreachable_endpoint_yields_incomplete_cells() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = common::stub_config(&dir.path().join("out"), &dir.path().join("cache"), "http://127.0.0.1:9", 2, 1);
    cfg.providers[0].max_retries = 0;
    cfg.providers[0].timeout_secs = 2;
    let summary = Runner::new(cfg).unwrap().run().await.unwrap();
    assert_eq!(summary.failures, 4);
    assert_eq!(summary.incomplete_cells.len(), 2);
    let records = read_records(&dir.path().join("out/records.jsonl")).unwrap().records;
    assert!(records.iter().all(|r| r.error.is_some()));
}
