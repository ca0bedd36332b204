use metastable_core::landscape::{graph_from_potential, AnalysisParams, AnalyticLandscape, Potential};
use metastable_core::sde::{
    default_valley_depth, empirical_histogram, exit_replica, gibbs_bin_masses, simulate_path, summarize_exits,
    transition_stats, HistogramBins, SamplePath, SimConfig, ValleyMap,
};
use metastable_core::tree::{build_hierarchy, Hierarchy};

fn analyze(u: &Potential) -> (AnalyticLandscape, Hierarchy) {
    let a = graph_from_potential(u, &AnalysisParams::default()).unwrap();
    let h = build_hierarchy(&a.graph).unwrap();
    (a, h)
}

fn long_runs(u: &Potential, eps: f64, horizon: f64, replicas: usize, seed: u64) -> Vec<SamplePath> {
    let config = SimConfig::new(eps, 0.01, horizon, replicas, seed).unwrap().with_thin(10).unwrap();
    // Alternate the starting well so the pooled run is unbiased between wells.
    (0..replicas).map(|r| simulate_path(u, &config, &[if r % 2 == 0 { -1.0 } else { 1.0 }], r).unwrap()).collect()
}

#[test]
fn double_well_exit_time_matches_the_rate() {
    let u = Potential::double_well();
    let (a, h) = analyze(&u);
    let valleys = ValleyMap::new(&a, default_valley_depth(&h), 801).unwrap();
    let config = SimConfig::new(0.15, 0.01, 20_000.0, 200, 2024).unwrap();
    let stats = transition_stats(&a, &h, 1, 0, &valleys, &config).unwrap();
    assert_eq!(stats.exits, 200);
    assert_eq!(stats.frequencies, vec![0.0, 1.0]);
    assert_eq!(stats.expected_frequencies, vec![0.0, 1.0]);
    assert!((0.5..=2.0).contains(&stats.time_ratio), "{stats:?}");

    // Disjoint halves of the replicas agree within two combined standard
    // errors.
    let outcomes: Vec<_> = (0..200).map(|r| exit_replica(&a, &h, 1, 0, &valleys, &config, r).unwrap()).collect();
    let first = summarize_exits(&h, 1, 0, &config, &outcomes[..100]).unwrap();
    let second = summarize_exits(&h, 1, 0, &config, &outcomes[100..]).unwrap();
    let combined = first.std_error.hypot(second.std_error);
    assert!((first.mean_exit_time - second.mean_exit_time).abs() <= 2.0 * combined, "{first:?} {second:?}");
    let whole = summarize_exits(&h, 1, 0, &config, &outcomes).unwrap();
    assert_eq!(whole.mean_exit_time, stats.mean_exit_time);
}

#[test]
fn symmetric_exits_split_evenly() {
    // Three equal wells; the middle one sees two equal barriers.
    let u = Potential::multiwell(&[-1.5, 0.0, 1.5], 0.3, 0.0).unwrap();
    let (a, h) = analyze(&u);
    let valleys = ValleyMap::new(&a, default_valley_depth(&h), 801).unwrap();
    let middle =
        h.levels[0].metastable.iter().position(|s| a.minimum_location(s.members()[0])[0].abs() < 1e-6).unwrap();
    let config = SimConfig::new(0.1, 0.01, 10_000.0, 200, 5).unwrap();
    let stats = transition_stats(&a, &h, 1, middle, &valleys, &config).unwrap();
    let sides: Vec<f64> = (0..3).filter(|&s| s != middle).map(|s| stats.frequencies[s]).collect();
    for (&f, &e) in sides.iter().zip((0..3).filter(|&s| s != middle).map(|s| &stats.expected_frequencies[s])) {
        assert!((e - 0.5).abs() < 1e-9);
        assert!((f - 0.5).abs() <= 0.1, "{stats:?}");
    }
}

#[test]
fn lower_barrier_is_crossed_first() {
    // From the middle well the left barrier is much lower than the right.
    let u = Potential::multiwell(&[-1.0, 0.0, 1.6], 1.0, 0.0).unwrap();
    let (a, h) = analyze(&u);
    let valleys = ValleyMap::new(&a, default_valley_depth(&h), 801).unwrap();
    let loc = |s: usize| a.minimum_location(h.levels[0].metastable[s].members()[0])[0];
    let middle = (0..3).find(|&s| loc(s).abs() < 1e-6).unwrap();
    let left = (0..3).find(|&s| loc(s) < -0.5).unwrap();
    let config = SimConfig::new(0.1, 0.01, 10_000.0, 200, 9).unwrap();
    let stats = transition_stats(&a, &h, 1, middle, &valleys, &config).unwrap();
    assert_eq!(stats.expected_frequencies[left], 1.0);
    assert!(stats.frequencies[left] >= 0.95, "{stats:?}");
}

#[test]
fn long_run_histogram_matches_the_gibbs_measure() {
    let u = Potential::double_well();
    let bins = HistogramBins::new(u.bounds().clone(), 40).unwrap();
    let reference = gibbs_bin_masses(&u, 0.15, &bins, 50).unwrap();
    let a = empirical_histogram(&long_runs(&u, 0.15, 2_000.0, 200, 1), &bins, 5.0).unwrap();
    let b = empirical_histogram(&long_runs(&u, 0.15, 2_000.0, 200, 2), &bins, 5.0).unwrap();
    assert!(a.total_variation(&reference) <= 0.05, "{}", a.total_variation(&reference));
    assert!(a.total_variation(&b) <= 0.05, "{}", a.total_variation(&b));
}

#[test]
fn short_run_stays_in_its_valley() {
    let u = Potential::double_well();
    let bins = HistogramBins::new(u.bounds().clone(), 2).unwrap();
    let config = SimConfig::new(0.1, 0.01, 20.0, 1, 4).unwrap();
    let path = simulate_path(&u, &config, &[1.0], 0).unwrap();
    let hist = empirical_histogram(&[path], &bins, 0.0).unwrap();
    assert!(hist.weights()[1] > 0.99, "{:?}", hist.weights());
}

#[test]
fn bin_fluxes_balance_at_stationarity() {
    let u = Potential::double_well();
    let bins = HistogramBins::new(u.bounds().clone(), 20).unwrap();
    let paths = long_runs(&u, 0.2, 2_000.0, 8, 3);
    let mut up = vec![0.0f64; bins.len()];
    let mut down = vec![0.0f64; bins.len()];
    for path in &paths {
        let idx: Vec<usize> = path.after(5.0).iter().filter_map(|x| bins.index(x)).collect();
        for w in idx.windows(2) {
            if w[1] == w[0] + 1 {
                up[w[0]] += 1.0;
            } else if w[0] == w[1] + 1 {
                down[w[1]] += 1.0;
            }
        }
    }
    for b in 0..bins.len() {
        let total = up[b] + down[b];
        if total > 0.0 {
            assert!((up[b] - down[b]).abs() <= 3.0 * total.sqrt(), "bin {b}: {} vs {}", up[b], down[b]);
        }
    }
}
