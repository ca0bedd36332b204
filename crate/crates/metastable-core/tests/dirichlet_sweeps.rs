use metastable_core::dirichlet::{
    capacity_integral, critical_split, error_trend_ok, metastable_measure, metastable_test_functions,
    partition_function, premetastable_density, test_function_tail, GibbsQuadrature, SaddleGeometry,
};
use metastable_core::landscape::{classify, graph_from_potential, AnalysisParams, AnalyticLandscape, Potential};
use metastable_core::tree::{build_hierarchy, Hierarchy};
use std::f64::consts::{PI, SQRT_2};

const SCHEDULE: [f64; 4] = [0.1, 0.07, 0.05, 0.035];

fn analyze(u: &Potential) -> (AnalyticLandscape, Hierarchy) {
    let a = graph_from_potential(u, &AnalysisParams::default()).unwrap();
    let h = build_hierarchy(&a.graph).unwrap();
    (a, h)
}

fn rel(value: f64, target: f64) -> f64 {
    (value - target).abs() / target.abs()
}

fn tilted() -> Potential {
    Potential::multiwell(&[-1.0, 1.0], 1.0, 0.2).unwrap()
}

#[test]
fn laplace_ratio_of_the_partition_function_tends_to_one() {
    for u in [Potential::double_well(), tilted()] {
        let (_, h) = analyze(&u);
        let ratios: Vec<f64> = [0.1, 0.05, 0.02]
            .iter()
            .map(|&eps| {
                let laplace: f64 = h.graph.minima().iter().map(|m| m.nu * (-m.height / eps).exp()).sum::<f64>()
                    * (2.0 * PI * eps).sqrt();
                partition_function(&u, eps, 2001).unwrap() / laplace
            })
            .collect();
        let errors: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
        assert!(errors[2] < 0.01, "{ratios:?}");
    }
}

#[test]
fn premetastable_sweep_approaches_the_gradient_term() {
    let u = Potential::double_well();
    let errors: Vec<f64> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&eps| {
            let q = GibbsQuadrature::new(&u, eps, 4001).unwrap();
            let pm = premetastable_density(&q, &[0.5]).unwrap();
            assert!(pm.density.normalization_error(&q) < 1e-8);
            assert!(rel(pm.value, pm.exact) < 1e-3);
            rel(pm.value, pm.limit)
        })
        .collect();
    assert!(error_trend_ok(&errors), "{errors:?}");
    assert!(errors[2] <= 0.05, "{errors:?}");
}

#[test]
fn critical_sweep_approaches_zeta() {
    let u = Potential::double_well();
    let saddle = classify(&u, &[0.0], 1e-8).unwrap();
    let splits: Vec<_> =
        [0.02, 0.01, 0.005].iter().map(|&eps| critical_split(&u, &saddle, eps, 0.4, 801).unwrap()).collect();
    let errors: Vec<f64> = splits.iter().map(|s| rel(s.total(), s.zeta)).collect();
    assert!(error_trend_ok(&errors), "{errors:?}");
    assert!(errors[2] <= 0.1, "{errors:?}");
    assert!(splits.windows(2).all(|w| w[1].phi2 < w[0].phi2));
}

#[test]
fn double_well_test_functions_converge() {
    let u = Potential::double_well();
    let (a, h) = analyze(&u);
    let mut errors = Vec::new();
    let mut tails = Vec::new();
    for &eps in &SCHEDULE {
        let q = GibbsQuadrature::new(&u, eps, 2001).unwrap();
        let tf = metastable_test_functions(&a, &h, 1, 0, &q).unwrap();
        assert!(!tf.absorbing);
        assert_eq!(tf.class_states.len(), 2);
        assert_eq!(tf.saddles.len(), 1);
        assert!((tf.energy_target(&h, 0) - SQRT_2 / PI).abs() < 1e-9);
        // Both sets see the same saddle, so the energies agree.
        assert!(rel(tf.energy(&q, 0), tf.energy(&q, 1)) < 1e-9);
        for values in &tf.values {
            assert!(values.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
        }
        errors.push(rel(tf.energy(&q, 0), tf.energy_target(&h, 0)));
        tails.push(test_function_tail(&tf, &q, 0, 0.4 * tf.depth));
    }
    assert!(errors[3] <= 0.15, "{errors:?}");
    assert!(error_trend_ok(&errors), "{errors:?}");
    assert!(tails.windows(2).all(|w| w[1] < w[0]), "{tails:?}");
    assert!(tails[3] <= 0.05, "{tails:?}");
}

#[test]
fn single_well_measure_on_the_double_well() {
    let u = Potential::double_well();
    let (a, h) = analyze(&u);
    let mut errors = Vec::new();
    for &eps in &SCHEDULE {
        let q = GibbsQuadrature::new(&u, eps, 2001).unwrap();
        let m = metastable_measure(&a, &h, 1, 0, &[1.0, 0.0], &q).unwrap();
        assert!((m.algebra.value - m.algebra.target).abs() < 1e-12 * m.algebra.target);
        assert!((m.algebra.target - 2.0 * SQRT_2 / PI).abs() < 1e-9);
        assert!(m.density.normalization_error(&q) < 1e-8);
        for w in &m.well_masses {
            assert!((w.mass - w.expected).abs() <= 0.05, "{w:?}");
        }
        errors.push(rel(m.value, m.algebra.target));
    }
    assert!(errors[3] <= 0.15, "{errors:?}");
    assert!(error_trend_ok(&errors), "{errors:?}");
}

#[test]
fn balanced_weights_cost_nothing() {
    let u = Potential::double_well();
    let (a, h) = analyze(&u);
    let q = GibbsQuadrature::new(&u, 0.05, 2001).unwrap();
    let m = metastable_measure(&a, &h, 1, 0, &[0.5, 0.5], &q).unwrap();
    assert!((m.algebra.a1 - m.algebra.a2).abs() < 1e-12);
    assert_eq!(m.algebra.target, 0.0);
    assert!(m.value < 1e-6, "{}", m.value);
    for w in &m.well_masses {
        assert!((w.mass - 0.5).abs() <= 0.05, "{w:?}");
    }
}

#[test]
fn grid_refinement_leaves_the_energy_unchanged() {
    let u = Potential::double_well();
    let (a, h) = analyze(&u);
    let energy = |n: usize| {
        let q = GibbsQuadrature::new(&u, 0.05, n).unwrap();
        metastable_measure(&a, &h, 1, 0, &[1.0, 0.0], &q).unwrap().value
    };
    let (coarse, fine) = (energy(2001), energy(4001));
    assert!(rel(coarse, fine) < 0.01, "{coarse} vs {fine}");
}

#[test]
fn tilted_well_separates_absorbing_and_transient_classes() {
    let u = tilted();
    let (a, h) = analyze(&u);
    let mut transient = Vec::new();
    let mut absorbing = Vec::new();
    let mut measure = Vec::new();
    for &eps in &SCHEDULE {
        let q = GibbsQuadrature::new(&u, eps, 2001).unwrap();
        let level = h.level(1).unwrap();
        for (c, class) in level.classes.classes.iter().enumerate() {
            let tf = metastable_test_functions(&a, &h, 1, c, &q).unwrap();
            if class.recurrent {
                assert!(tf.absorbing);
                assert_eq!(tf.energy_target(&h, 0), 0.0);
                absorbing.push(tf.energy(&q, 0));
            } else {
                assert!(!tf.absorbing);
                transient.push(rel(tf.energy(&q, 0), tf.energy_target(&h, 0)));
                let m = metastable_measure(&a, &h, 1, c, &[1.0], &q).unwrap();
                assert!((m.algebra.value - m.algebra.target).abs() < 1e-12 * m.algebra.target);
                measure.push(rel(m.value, m.algebra.target));
            }
        }
    }
    assert!(transient[3] <= 0.15 && error_trend_ok(&transient), "{transient:?}");
    assert!(measure[3] <= 0.15 && error_trend_ok(&measure), "{measure:?}");
    assert!(absorbing.windows(2).all(|w| w[1] < w[0]), "{absorbing:?}");
    assert!(absorbing[3] < 0.05, "{absorbing:?}");
}

#[test]
fn two_dimensional_double_well() {
    let u = Potential::double_well_2d();
    let (a, h) = analyze(&u);
    let saddle = classify(&u, &[0.0, 0.0], 1e-8).unwrap();
    let target = SQRT_2 / PI;
    let mut errors = Vec::new();
    for &eps in &[0.1, 0.07, 0.05] {
        let q = GibbsQuadrature::new(&u, eps, 201).unwrap();
        let tf = metastable_test_functions(&a, &h, 1, 0, &q).unwrap();
        assert!((tf.energy_target(&h, 0) - target).abs() < 1e-9);
        errors.push(rel(tf.energy(&q, 0), target));
        let g = SaddleGeometry::new(&saddle, eps).unwrap();
        let cap = capacity_integral(&q, &g, 1.0 / eps, 0.0).unwrap();
        assert!(rel(cap, target) <= 0.1, "{cap}");
    }
    assert!(errors[2] <= 0.15 && error_trend_ok(&errors), "{errors:?}");
}
