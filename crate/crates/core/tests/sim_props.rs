use m2m_core::analytic::{solve_no_timeout, ModelInputs, Timeout};
use m2m_core::sim::{run_simulation, run_simulation_traced, ScenarioConfig, SizeModel};
use proptest::prelude::*;

const ONE_HOP: f64 = 8000.0 / 512_000.0;

/// One requester with one thread, one idle responder, constant sizes:
/// every fetch takes tp plus four transmission times.
fn lone_fetcher(duration: f64) -> ScenarioConfig {
    ScenarioConfig {
        n_peers: 2,
        thread_overrides: Some(vec![1, 0]),
        size_model: SizeModel::Fixed,
        tout: Timeout::Infinite,
        sim_duration: duration,
        warmup: 0.0,
        ..ScenarioConfig::default()
    }
}

fn small_config(n: usize, m: u32, tp: f64, tout: Option<f64>, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        n_peers: n,
        threads_per_peer: m,
        tp,
        tout: tout.map_or(Timeout::Infinite, Timeout::Finite),
        sim_duration: 20.0,
        warmup: 2.0,
        seed,
        ..ScenarioConfig::default()
    }
}

fn traced(cfg: &ScenarioConfig) -> (m2m_core::SimReport, String) {
    let mut buf = Vec::new();
    let r = run_simulation_traced(cfg, &mut buf).unwrap();
    (r, String::from_utf8(buf).unwrap())
}

#[test]
fn single_thread_round_trip_is_exact() {
    let r = run_simulation(&lone_fetcher(100.0)).unwrap();
    let expected = 0.6 + 4.0 * ONE_HOP;
    assert!((expected - 0.6625).abs() < 1e-15);
    assert!(!r.rtt_samples.is_empty());
    for s in &r.rtt_samples {
        assert!((s - expected).abs() < 1e-9, "rtt sample {s}");
    }
    // floor(100 / 0.6625) fetches complete, the next one is in flight
    assert_eq!(r.data_ontime, 150);
    assert_eq!(r.requests_sent, 151);
    assert_eq!(r.pending_at_end, 1);
    assert_eq!(r.timeouts, 0);
    let per_second = r.data_ontime as f64 / 100.0;
    assert!((per_second - 1.0 / expected).abs() < 1.0 / 100.0);
}

#[test]
fn golden_trace() {
    let (_, trace) = traced(&lone_fetcher(2.0));
    let golden = "\
0.000000000\trequest\t0\t0\t1
0.662500000\tdeliver\t0\t0\t1
0.662500000\trequest\t0\t0\t2
1.325000000\tdeliver\t0\t0\t2
1.325000000\trequest\t0\t0\t3
1.987500000\tdeliver\t0\t0\t3
1.987500000\trequest\t0\t0\t4
";
    assert_eq!(trace, golden);
}

#[test]
fn identical_configs_are_bit_identical() {
    let cfg = small_config(8, 6, 0.6, Some(1.5), 99);
    let (a, ta) = traced(&cfg);
    let (b, tb) = traced(&cfg);
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    let other = run_simulation(&ScenarioConfig { seed: 100, ..cfg }).unwrap();
    assert_ne!(a.rtt_samples, other.rtt_samples);
}

#[test]
fn thread_count_does_not_perturb_other_peers_streams() {
    // Destination and size draws come from per-peer streams, so a peer that
    // never sends leaves the others' first choices untouched.
    let mut cfg = small_config(4, 1, 0.6, None, 5);
    cfg.thread_overrides = Some(vec![1, 1, 1, 1]);
    let (_, full) = traced(&cfg);
    cfg.thread_overrides = Some(vec![1, 0, 1, 1]);
    let (_, partial) = traced(&cfg);
    let first_of = |t: &str, peer: &str| {
        t.lines()
            .find(|l| l.split('\t').nth(2) == Some(peer) && l.contains("\trequest\t"))
            .map(str::to_owned)
    };
    assert_eq!(first_of(&full, "0"), first_of(&partial, "0"));
    assert!(first_of(&partial, "1").is_none());
}

#[test]
fn no_timer_means_no_timeouts() {
    let (r, trace) = traced(&small_config(6, 5, 0.6, None, 3));
    assert_eq!(r.timeouts, 0);
    assert_eq!(r.data_late_dropped, 0);
    assert!(!trace.contains("timeout") && !trace.contains("stale"));
    assert!((r.gamma_good - r.gamma_raw).abs() < 1e-12);
}

#[test]
fn invalid_scenarios_are_rejected() {
    let base = small_config(4, 2, 0.6, Some(2.0), 1);
    let bad = [
        ScenarioConfig { n_peers: 1, ..base.clone() },
        ScenarioConfig { uplink_bps: 0.0, ..base.clone() },
        ScenarioConfig { mean_data_bytes: -1.0, ..base.clone() },
        ScenarioConfig { warmup: 30.0, ..base.clone() },
        ScenarioConfig { tout: Timeout::Finite(0.0), ..base.clone() },
        ScenarioConfig { thread_overrides: Some(vec![1, 2]), ..base.clone() },
    ];
    for cfg in bad {
        assert!(run_simulation(&cfg).is_err(), "{cfg:?}");
    }
}

#[test]
fn queueing_matches_closed_form_without_timer() {
    for m in [10u32, 30, 50] {
        let cfg = ScenarioConfig {
            threads_per_peer: m,
            tout: Timeout::Infinite,
            ..ScenarioConfig::default()
        };
        let r = run_simulation(&cfg).unwrap();
        let theory = solve_no_timeout(&ModelInputs::symmetric(
            cfg.mu_up(),
            cfg.tp,
            Timeout::Infinite,
            m,
        ))
        .unwrap()
        .point()
        .unwrap()
        .rtt;
        let rel = (r.rtt_mean - theory).abs() / theory;
        assert!(rel <= 0.10, "m={m}: sim {} vs model {theory}", r.rtt_mean);
    }
}

/// Outstanding requests per peer, replayed from a trace, never exceed the window.
fn window_respected(trace: &str, n: usize, m: u32) -> bool {
    let mut out = vec![0i64; n];
    for line in trace.lines() {
        let f: Vec<&str> = line.split('\t').collect();
        let peer: usize = f[2].parse().unwrap();
        match f[1] {
            "request" => out[peer] += 1,
            "deliver" | "timeout" => out[peer] -= 1,
            _ => {}
        }
        if out[peer] < 0 || out[peer] > i64::from(m) {
            return false;
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn invariants_hold_on_random_small_scenarios(
        n in 2usize..=10,
        m in 1u32..=8,
        tp in 0.0f64..1.0,
        tout in prop::option::of(0.05f64..3.0),
        seed in any::<u64>(),
    ) {
        let cfg = small_config(n, m, tp, tout, seed);
        let (r, trace) = traced(&cfg);
        prop_assert!(r.conservation_holds(), "{r}");
        prop_assert!(window_respected(&trace, n, m));
        prop_assert!(r.rtt_samples.iter().all(|&s| s >= tp - 1e-12));
        prop_assert!(r.uplink_utilization_max <= 1.0 + 1e-9);
        prop_assert!(r.downlink_utilization_max <= 1.0 + 1e-9);
        prop_assert!(r.data_late_dropped <= r.timeouts);
        prop_assert!(r.gamma_good <= r.gamma_raw + 1e-12);
        prop_assert!((0.0..=1.0).contains(&r.p_timeout_empirical));
        if tout.is_none() {
            prop_assert_eq!(r.timeouts, 0);
        }
    }
}
