//! Simulation estimates against exact values, and reproducibility.

use tripwalk::exact::{
    excursion_stats, expected_hitting_time, greens_matrix, hitting_distribution,
};
use tripwalk::generators::{random_chain, triad};
use tripwalk::monte_carlo::{
    compare, estimate_excursion_events, estimate_green, estimate_hitting_distribution,
    estimate_hitting_time, sample_path, SimConfig, StopReason, Verdict,
};

fn cfg(n_paths: usize, seed: u64) -> SimConfig {
    SimConfig {
        n_paths,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn triad_estimates_are_consistent() {
    let (chain, partition) = triad();
    let g = estimate_green(&chain, &partition.transient(), 0, 0, &cfg(100_000, 7)).unwrap();
    assert_eq!(compare(4.0 / 3.0, &g, 3.0), Verdict::Consistent, "{g:?}");
    let t = estimate_hitting_time(&chain, partition.c(), 0, &cfg(100_000, 8)).unwrap();
    assert_eq!(compare(2.0, &t, 3.0), Verdict::Consistent, "{t:?}");
    assert_eq!(t.n_truncated, 0);
    assert!(compare(2.5, &t, 3.0) == Verdict::Inconsistent);
}

#[test]
fn excursion_events_match_statistics() {
    for seed in 0..6 {
        let (chain, partition) = random_chain(10, 300 + seed, 0.4, (0.35, 0.35, 0.3)).unwrap();
        let s = excursion_stats(&chain, &partition).unwrap();
        for x in partition.transient().iter() {
            let e = estimate_excursion_events(&chain, &partition, x, &cfg(20_000, seed)).unwrap();
            let (reach, round) = if partition.a().contains(x) {
                (s.psi[&x], s.rho[&x])
            } else {
                (s.sigma[&x], s.phi[&x])
            };
            // z = 5 keeps the family-wise false alarm rate negligible.
            assert_eq!(compare(reach, &e.reach, 5.0), Verdict::Consistent);
            assert_eq!(compare(round, &e.round_trip, 5.0), Verdict::Consistent);
            assert!(e.round_trip.mean <= e.reach.mean);
        }
    }
}

#[test]
fn green_time_and_landing_estimates() {
    let (chain, partition) = random_chain(8, 41, 0.3, (0.4, 0.3, 0.3)).unwrap();
    let d = partition.transient();
    let g = greens_matrix(&chain, &d).unwrap();
    let t = expected_hitting_time(&chain, partition.c()).unwrap();
    let x = d.as_slice()[0];
    for y in d.iter() {
        let est = estimate_green(&chain, &d, x, y, &cfg(20_000, y as u64)).unwrap();
        assert_eq!(compare(g.get(x, y), &est, 5.0), Verdict::Consistent);
    }
    let est = estimate_hitting_time(&chain, partition.c(), x, &cfg(20_000, 3)).unwrap();
    assert_eq!(compare(t.get(x), &est, 5.0), Verdict::Consistent);
    let h = hitting_distribution(&chain, partition.c(), x).unwrap();
    let land = estimate_hitting_distribution(&chain, partition.c(), x, &cfg(20_000, 4)).unwrap();
    assert_eq!(land.len(), partition.c().len());
    for (y, e) in &land {
        assert_eq!(compare(h.mass_at(*y), e, 5.0), Verdict::Consistent);
    }
    let total: f64 = land.values().map(|e| e.mean).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let (chain, partition) = random_chain(9, 5, 0.3, (0.4, 0.3, 0.3)).unwrap();
    let run = || estimate_hitting_time(&chain, partition.c(), 0, &cfg(5_000, 11)).unwrap();
    let many = run();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(many, one);
    assert_eq!(many, run());
    assert_ne!(
        many.mean,
        estimate_hitting_time(&chain, partition.c(), 0, &cfg(5_000, 12))
            .unwrap()
            .mean
    );
}

#[test]
fn truncation_marks_estimates_unreliable() {
    let (chain, partition) = triad();
    let config = SimConfig {
        cap: 1,
        ..cfg(2_000, 1)
    };
    let est = estimate_hitting_time(&chain, partition.c(), 0, &config).unwrap();
    assert!(est.n_truncated > 0 && est.unreliable());
    assert_eq!(compare(2.0, &est, 3.0), Verdict::Unreliable);
}

#[test]
fn sample_path_stops_on_target() {
    let (chain, partition) = triad();
    for seed in 0..20 {
        let path = sample_path(&chain, 0, partition.c(), seed, 1000).unwrap();
        assert_eq!(path.stop_reason, StopReason::HitTarget);
        assert_eq!(path.states[0], 0);
        assert_eq!(*path.states.last().unwrap(), 2);
        assert!(path.states[..path.states.len() - 1].iter().all(|&s| s != 2));
        assert_eq!(
            path,
            sample_path(&chain, 0, partition.c(), seed, 1000).unwrap()
        );
    }
    let short = sample_path(&chain, 0, partition.c(), 3, 1).unwrap();
    assert!(short.states.len() <= 2);
}
