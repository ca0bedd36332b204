use metastable_core::landscape::{LandscapeGraph, MinId, MinimumNode, SaddleNode, GRAPH_HEIGHT_TOL};
use metastable_core::synthetic::{random_graph, HeightMode};
use metastable_core::tree::{build_hierarchy, check_hierarchy, TreeError};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A set's sorted labels with its outgoing rates keyed by target labels.
type LabelledRates = (Vec<String>, Vec<(Vec<String>, f64)>);

fn hierarchy_ok(seed: u64, minima: usize, extra: usize, mode: HeightMode) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(&mut rng, minima, extra, mode);
    let h = match build_hierarchy(&g) {
        Ok(h) => h,
        Err(TreeError::DegenerateLandscape { .. }) => return Ok(()),
        Err(e) => return Err(TestCaseError::fail(format!("construction failed: {e}"))),
    };
    let failures = check_hierarchy(&h);
    prop_assert!(failures.is_empty(), "{failures:#?}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generic_landscapes_satisfy_tree_invariants(seed in any::<u64>(), minima in 2usize..=10, extra in 0usize..6) {
        hierarchy_ok(seed, minima, extra, HeightMode::Generic)?;
    }

    #[test]
    fn tied_landscapes_satisfy_tree_invariants(seed in any::<u64>(), minima in 2usize..=10, extra in 0usize..6) {
        hierarchy_ok(seed, minima, extra, HeightMode::Quantized)?;
    }

    #[test]
    fn relabeling_gives_isomorphic_hierarchy(seed in any::<u64>(), minima in 2usize..=8, extra in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, minima, extra, HeightMode::Quantized);
        let mut min_perm: Vec<usize> = (0..g.min_count()).collect();
        let mut saddle_perm: Vec<usize> = (0..g.saddles().len()).collect();
        use rand::seq::SliceRandom;
        min_perm.shuffle(&mut rng);
        saddle_perm.shuffle(&mut rng);
        let p = g.permuted(&min_perm, &saddle_perm).unwrap();
        let (a, b) = (build_hierarchy(&g).unwrap(), build_hierarchy(&p).unwrap());
        prop_assert_eq!(a.q(), b.q());
        for (la, lb) in a.levels.iter().zip(&b.levels) {
            prop_assert_eq!(la.depth, lb.depth);
            let label = |h: &metastable_core::tree::Hierarchy, l: &metastable_core::tree::TreeLevel| {
                let mut v: Vec<LabelledRates> = l
                    .states()
                    .enumerate()
                    .map(|(i, s)| {
                        let mut out: Vec<(Vec<String>, f64)> = l
                            .states()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(j, t)| {
                                let mut lt = t.labels(&h.graph);
                                lt.sort();
                                (lt, l.hat_chain.rate(i, j))
                            })
                            .collect();
                        out.sort_by(|x, y| x.0.cmp(&y.0));
                        let mut ls = s.labels(&h.graph);
                        ls.sort();
                        (ls, out)
                    })
                    .collect();
                v.sort_by(|x, y| x.0.cmp(&y.0));
                v
            };
            let (ea, eb) = (label(&a, la), label(&b, lb));
            prop_assert_eq!(ea.len(), eb.len());
            for (x, y) in ea.iter().zip(&eb) {
                prop_assert_eq!(&x.0, &y.0);
                for (rx, ry) in x.1.iter().zip(&y.1) {
                    prop_assert_eq!(&rx.0, &ry.0);
                    prop_assert!((rx.1 - ry.1).abs() <= 1e-12 * rx.1.abs().max(1.0));
                }
            }
        }
    }
}

fn graph(minima: &[(&str, f64, f64)], saddles: &[(&str, f64, f64, usize, usize)]) -> LandscapeGraph {
    LandscapeGraph::new(
        minima.iter().map(|&(id, height, nu)| MinimumNode { id: id.into(), height, nu }).collect(),
        saddles
            .iter()
            .map(|&(id, height, omega, a, b)| SaddleNode {
                id: id.into(),
                height,
                omega,
                connects: [MinId(a), MinId(b)],
            })
            .collect(),
        GRAPH_HEIGHT_TOL,
    )
    .unwrap()
}

#[test]
fn tampered_rate_is_detected() {
    let g = graph(
        &[("A", 0.0, 1.0), ("B", 0.0, 1.0), ("C", 0.1, 1.0)],
        &[("S_AB", 0.5, 1.0, 0, 1), ("S_BC", 1.0, 1.0, 1, 2)],
    );
    let mut h = build_hierarchy(&g).unwrap();
    assert!(check_hierarchy(&h).is_empty());
    let mut rows = h.levels[1].hat_chain.rows();
    rows[0][1] = 0.3;
    h.levels[1].hat_chain = metastable_core::chain::Ctmc::from_rows(&rows).unwrap();
    let names: Vec<&str> = check_hierarchy(&h).iter().map(|f| f.invariant).collect();
    assert!(names.contains(&"tree_positive_rates"), "{names:?}");
    assert!(names.contains(&"rebuild_agreement"));
}

#[test]
fn near_tie_is_rejected_as_degenerate() {
    let g = graph(
        &[("A", 0.0, 1.0), ("B", 0.0, 1.0), ("C", 0.0, 1.0)],
        &[("S1", 1.0, 1.0, 0, 1), ("S2", 1.0 + 1e-11, 1.0, 1, 2)],
    );
    assert!(matches!(build_hierarchy(&g), Err(TreeError::DegenerateLandscape { .. })));
}
