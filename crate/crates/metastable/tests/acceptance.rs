//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use metastable::simulation::{histogram_check, parallel_transition_stats};
use metastable::sweep::{run_sweep, Scenario, SweepPlan, SweepReport};
use metastable_core::chain::{
    communicating_classes, dv_rate, dv_rate_sup, trace_process, Ctmc, DvMethod, StateMeasure,
};
use metastable_core::dirichlet::{partition_function, validate_gaussian_quadrature};
use metastable_core::gamma::{consistency_check, MATCH_TOL};
use metastable_core::landscape::{
    graph_from_potential, AnalysisParams, LandscapeGraph, MinId, MinimumNode, Potential, SaddleNode, GRAPH_HEIGHT_TOL,
};
use metastable_core::sde::{default_valley_depth, SimConfig, ValleyMap};
use metastable_core::synthetic::{random_chain, random_graph, HeightMode};
use metastable_core::tree::{
    build_hierarchy, check_hierarchy, check_local_reversibility, Hierarchy, REVERSIBILITY_RESIDUAL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel(value: f64, target: f64) -> f64 {
    (value - target).abs() / target.abs()
}

fn within(start: Instant, budget: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent <= budget, format!("took {spent:.1?}, budget {budget:?}"))
}

fn dv_closed_form() -> Verdict {
    let start = Instant::now();
    let chain = Ctmc::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for k in 1..=9 {
        let p = f64::from(k) / 10.0;
        let exact = 1.0 - 2.0 * (p * (1.0 - p)).sqrt();
        worst = worst.max((dv_rate_sup(&chain, &[p, 1.0 - p]) - exact).abs());
    }
    ensure(worst <= 1e-8, format!("max error {worst:e}"))?;
    within(start, Duration::from_secs(1))?;
    Ok(format!("max error {worst:.1e}"))
}

fn dv_dirac_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut exact_err, mut sup_err) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let chain = random_chain(&mut rng, n, 0.6);
        let x = rng.random_range(0..n);
        let dirac = StateMeasure::dirac(n, x);
        let out = chain.out_rate(x);
        let decomposed = dv_rate(&chain, &dirac, DvMethod::Decomposed).map_err(|e| e.to_string())?;
        let sup = dv_rate(&chain, &dirac, DvMethod::Sup).map_err(|e| e.to_string())?;
        exact_err = exact_err.max((decomposed - out).abs() / out.max(1.0));
        sup_err = sup_err.max((sup - out).abs());
    }
    ensure(exact_err <= 1e-12, format!("closed form off by {exact_err:e}"))?;
    ensure(sup_err <= 1e-6, format!("sup oracle off by {sup_err:e}"))?;
    Ok(format!("closed form {exact_err:.1e}, sup {sup_err:.1e}"))
}

fn trace_composition() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let chain = random_chain(&mut rng, n, 0.5);
        // The trace needs a target meeting every recurrent class; the outer
        // set adds random states to such an inner set.
        let mut inner: Vec<usize> =
            communicating_classes(&chain).recurrent().map(|c| c.states[rng.random_range(0..c.states.len())]).collect();
        for x in 0..n {
            if !inner.contains(&x) && rng.random_bool(0.3) {
                inner.push(x);
            }
        }
        inner.sort_unstable();
        let outer: Vec<usize> = (0..n).filter(|x| inner.contains(x) || rng.random_bool(0.5)).collect();
        let positions: Vec<usize> = inner.iter().map(|x| outer.iter().position(|y| y == x).unwrap()).collect();
        let direct = trace_process(&chain, &inner).map_err(|e| e.to_string())?;
        let first = trace_process(&chain, &outer).map_err(|e| e.to_string())?;
        let twice = trace_process(&first, &positions).map_err(|e| e.to_string())?;
        worst = worst.max(direct.max_rate_difference(&twice));
    }
    ensure(worst <= 1e-10, format!("residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e}"))
}

fn triple_well_graph() -> LandscapeGraph {
    let minima = [("A", 0.0), ("B", 0.0), ("C", 0.1)]
        .iter()
        .map(|&(id, height)| MinimumNode { id: id.into(), height, nu: 1.0 })
        .collect();
    let saddles = [("S_AB", 0.5, 0, 1), ("S_BC", 1.0, 1, 2)]
        .iter()
        .map(|&(id, height, a, b)| SaddleNode { id: id.into(), height, omega: 1.0, connects: [MinId(a), MinId(b)] })
        .collect();
    LandscapeGraph::new(minima, saddles, GRAPH_HEIGHT_TOL).expect("fixture graph is valid")
}

fn tree_construction() -> Verdict {
    let g = triple_well_graph();
    let h = build_hierarchy(&g).map_err(|e| e.to_string())?;
    ensure(h.q() == 2, format!("q = {}", h.q()))?;
    let depths = h.depths();
    ensure((depths[0] - 0.5).abs() < 1e-12 && (depths[1] - 0.9).abs() < 1e-12, format!("depths {depths:?}"))?;
    let top = &h.levels[1];
    let find = |label: &str| {
        let m = g.find_minimum(label).expect("fixture minimum");
        top.metastable.iter().position(|s| s.contains(m)).expect("every minimum is in a set")
    };
    let (c, ab) = (find("C"), find("A"));
    ensure(find("B") == ab, "A and B are not merged")?;
    let expected = g.saddles()[1].omega / g.minimum(MinId(2)).nu;
    ensure(top.chain.rate(c, ab) == expected, format!("rate C→AB = {}", top.chain.rate(c, ab)))?;

    let a = graph_from_potential(&Potential::double_well(), &AnalysisParams::default()).map_err(|e| e.to_string())?;
    let dw = build_hierarchy(&a.graph).map_err(|e| e.to_string())?;
    let rate = dw.levels[0].chain.rate(0, 1);
    let target = 2.0 * SQRT_2 / PI;
    ensure(dw.q() == 1 && (dw.depths()[0] - 1.0).abs() <= 1e-12, format!("double well depths {:?}", dw.depths()))?;
    ensure((rate - target).abs() <= 1e-12, format!("double well rate {rate} vs {target}"))?;
    Ok(format!("triple well d = {depths:?}; double well rate error {:.1e}", (rate - target).abs()))
}

fn random_hierarchies() -> Result<Vec<Hierarchy>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..50)
        .map(|k| {
            let minima = rng.random_range(2..=10);
            let extra = rng.random_range(0..=5);
            let g = random_graph(&mut rng, minima, extra, HeightMode::Generic);
            build_hierarchy(&g).map_err(|e| format!("graph {k}: {e}"))
        })
        .collect()
}

fn structural_invariants(suite: &[Hierarchy], built_in: Duration) -> Verdict {
    let start = Instant::now();
    for (k, h) in suite.iter().enumerate() {
        let failures = check_hierarchy(h);
        ensure(failures.is_empty(), format!("graph {k}: {failures:?}"))?;
    }
    let total = built_in + start.elapsed();
    ensure(total <= Duration::from_secs(10), format!("took {total:.1?}"))?;
    Ok(format!("50 graphs in {total:.1?}"))
}

fn local_reversibility(suite: &[Hierarchy]) -> Verdict {
    let worst =
        suite.iter().flat_map(|h| h.levels.iter().map(|l| check_local_reversibility(l, &h.graph))).fold(0.0, f64::max);
    ensure(worst <= REVERSIBILITY_RESIDUAL, format!("residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e}"))
}

fn gamma_consistency(suite: &[Hierarchy]) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut measures = 0;
    for (k, h) in suite.iter().enumerate() {
        let report = consistency_check(h, 100, &mut rng, MATCH_TOL).map_err(|e| format!("graph {k}: {e}"))?;
        ensure(report.passed(), format!("graph {k}: {:?}", report.failures))?;
        measures += report.measures;
    }
    Ok(format!("{measures} measures over {} hierarchies", suite.len()))
}

fn sweep(
    scenario: Scenario,
    potential: Potential,
    eps: Vec<f64>,
    grid_n: usize,
    tol: f64,
) -> Result<SweepReport, String> {
    let plan =
        SweepPlan::new(scenario, potential, Some(eps), Some(grid_n), Some(tol), true).map_err(|e| e.to_string())?;
    run_sweep(&plan).map_err(|e| e.to_string())
}

fn errors(report: &SweepReport) -> Vec<f64> {
    report.rows.iter().map(|r| r.rel_err).collect()
}

const SCHEDULE: [f64; 4] = [0.1, 0.07, 0.05, 0.035];

fn capacity_sweep() -> Verdict {
    let start = Instant::now();
    let r = sweep(Scenario::Capacity { saddle: vec![0.0] }, Potential::double_well(), SCHEDULE.to_vec(), 40_001, 0.10)?;
    let e = errors(&r);
    ensure(r.rows.iter().all(|row| (row.target - SQRT_2 / PI).abs() < 1e-12), "target is not √2/π")?;
    ensure(e.windows(2).all(|w| w[1] <= w[0]), format!("errors not non-increasing: {e:?}"))?;
    ensure(r.final_rel_err <= 0.10, format!("final error {}", r.final_rel_err))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("errors {e:.4?}"))
}

fn metastable_sweep() -> Verdict {
    let scenario = Scenario::Metastable { level: 1, class: 0, omega: Some(vec![1.0, 0.0]) };
    let r = sweep(scenario, Potential::double_well(), SCHEDULE.to_vec(), 2001, 0.15)?;
    ensure(r.rows.iter().all(|row| (row.target - 2.0 * SQRT_2 / PI).abs() < 1e-12), "target is not 2√2/π")?;
    ensure(r.passed, format!("errors {:?}", errors(&r)))?;
    Ok(format!("errors {:.4?}", errors(&r)))
}

fn premeta_sweep() -> Verdict {
    let r = sweep(Scenario::Premeta { x0: vec![0.5] }, Potential::double_well(), vec![0.01], 4001, 0.05)?;
    let row = &r.rows[0];
    ensure((row.target - 0.5625).abs() < 1e-12, format!("target {}", row.target))?;
    ensure(row.rel_err <= 0.05, format!("error {}", row.rel_err))?;
    Ok(format!("error {:.4} at ε = 0.01", row.rel_err))
}

fn critical_sweep() -> Verdict {
    let scenario = Scenario::Critical { point: vec![0.0], delta_exp: 0.4 };
    let r = sweep(scenario, Potential::double_well(), vec![0.02, 0.01, 0.005], 801, 0.10)?;
    let last = r.rows.last().expect("nonempty sweep");
    ensure((last.target - 4.0).abs() < 1e-9, format!("zeta {}", last.target))?;
    ensure(last.rel_err <= 0.10, format!("error {}", last.rel_err))?;
    let phi2 = r.details.last().and_then(|d| d["phi2"].as_f64()).ok_or("missing phi2")?;
    ensure(phi2 <= 0.1 * last.target, format!("phi2 {phi2}"))?;
    Ok(format!("error {:.4} at ε = 0.005, phi2 = {phi2:.4}", last.rel_err))
}

fn quadrature_validation() -> Verdict {
    let mut eps_used: Vec<f64> = SCHEDULE.iter().copied().chain([0.02, 0.01, 0.005]).collect();
    eps_used.sort_by(|a, b| b.total_cmp(a));
    let mut worst_moment = 0.0f64;
    let mut worst_z = 0.0f64;
    let quadratic = Potential::quadratic(1, 3.0).map_err(|e| e.to_string())?;
    for &eps in &eps_used {
        let delta = eps.powf(0.4);
        for (a, b) in [(vec![2.0], vec![1.0]), (vec![2.0, 3.0], vec![1.0, 0.5])] {
            let check = validate_gaussian_quadrature(&a, &b, delta, eps, 801).map_err(|e| e.to_string())?;
            worst_moment = worst_moment.max(check.error);
        }
        let z = partition_function(&quadratic, eps, 4001).map_err(|e| e.to_string())?;
        worst_z = worst_z.max(rel(z, (PI * eps).sqrt()));
    }
    ensure(worst_moment <= 1e-6, format!("moment error {worst_moment:e}"))?;
    ensure(worst_z <= 1e-6, format!("partition function error {worst_z:e}"))?;
    Ok(format!("{} temperatures; moments {worst_moment:.1e}, Z {worst_z:.1e}", eps_used.len()))
}

fn sde_cross_check() -> Verdict {
    let start = Instant::now();
    let u = Potential::double_well();
    let a = graph_from_potential(&u, &AnalysisParams::default()).map_err(|e| e.to_string())?;
    let h = build_hierarchy(&a.graph).map_err(|e| e.to_string())?;
    let valleys = ValleyMap::new(&a, default_valley_depth(&h), 801).map_err(|e| e.to_string())?;
    let config = SimConfig::new(0.15, 0.01, 20_000.0, 200, 2024).map_err(|e| e.to_string())?;
    let stats = parallel_transition_stats(&a, &h, 1, 0, &valleys, &config).map_err(|e| e.to_string())?;
    ensure(stats.exits == 200, format!("{} of 200 replicas exited", stats.exits))?;
    ensure((0.5..=2.0).contains(&stats.time_ratio), format!("time ratio {}", stats.time_ratio))?;
    let long = SimConfig::new(0.15, 0.01, 2_000.0, 200, 2025).map_err(|e| e.to_string())?;
    let starts = vec![vec![-1.0], vec![1.0]];
    let hist = histogram_check(&u, 0.15, 40, &long, &starts).map_err(|e| e.to_string())?;
    ensure(hist.total_variation <= 0.05, format!("histogram TV {}", hist.total_variation))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("time ratio {:.3}, TV {:.4}, {:.1?}", stats.time_ratio, hist.total_variation, start.elapsed()))
}

fn main() {
    let built = Instant::now();
    let suite = random_hierarchies();
    let built_in = built.elapsed();
    let on_suite = |check: fn(&[Hierarchy]) -> Verdict| -> Verdict { check(suite.as_ref().map_err(Clone::clone)?) };

    let results: Vec<(&str, Verdict)> = vec![
        ("1 dv closed form", dv_closed_form()),
        ("2 dv dirac identity", dv_dirac_identity()),
        ("3 trace composition", trace_composition()),
        ("4 tree construction", tree_construction()),
        (
            "5 structural invariants",
            suite.as_ref().map_err(Clone::clone).and_then(|s| structural_invariants(s, built_in)),
        ),
        ("6 local reversibility", on_suite(local_reversibility)),
        ("7 gamma consistency", on_suite(gamma_consistency)),
        ("8 capacity sweep", capacity_sweep()),
        ("9 metastable dirichlet form", metastable_sweep()),
        ("10 pre-metastable", premeta_sweep()),
        ("11 critical scale", critical_sweep()),
        ("12 quadrature validation", quadrature_validation()),
        ("13 sde cross-check", sde_cross_check()),
    ];
    let mut failed = 0;
    for (name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
