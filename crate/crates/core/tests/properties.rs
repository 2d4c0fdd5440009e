mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{conductance, random_connected_graph, random_disjoint_sets};
use modlab::graph::io::{parse_graph, write_graph};
use modlab::graph::{Edge, MetricGraph, NodeSet};
use modlab::modulus::{compute_modulus, CurveFamilySpec};
use modlab::porosity::porosity_check;

const TOL: f64 = 1e-7;

fn instance(seed: u64, max_n: usize) -> (MetricGraph, CurveFamilySpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 + (seed as usize % (max_n - 1));
    let g = random_connected_graph(&mut rng, n, 0.3, false);
    let (e, f) = random_disjoint_sets(&mut rng, n, 2);
    (g, CurveFamilySpec::new(e, f))
}

fn rescaled(g: &MetricGraph, len: f64, sigma: f64) -> MetricGraph {
    let edges = g
        .edges()
        .iter()
        .map(|e| Edge::new(e.a, e.b, e.length * len, e.sigma * sigma))
        .collect();
    MetricGraph::new(g.node_count(), 0, Vec::new(), edges).unwrap()
}

fn modulus(g: &MetricGraph, fam: &CurveFamilySpec, p: f64) -> f64 {
    compute_modulus(g, fam, p, TOL, 1_000_000).unwrap().value
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-5 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measure_scaling_is_linear(seed in any::<u64>(), c in 0.2f64..5.0, p in 1.5f64..3.5) {
        let (g, fam) = instance(seed, 9);
        let base = modulus(&g, &fam, p);
        let scaled = modulus(&rescaled(&g, 1.0, c), &fam, p);
        prop_assert!(close(scaled, c * base), "{scaled} vs {}", c * base);
    }

    #[test]
    fn length_scaling_is_power(seed in any::<u64>(), c in 0.2f64..5.0, p in 1.5f64..3.5) {
        let (g, fam) = instance(seed, 9);
        let base = modulus(&g, &fam, p);
        let scaled = modulus(&rescaled(&g, c, 1.0), &fam, p);
        prop_assert!(close(scaled, c.powf(-p) * base), "{scaled} vs {}", c.powf(-p) * base);
    }

    #[test]
    fn endpoints_are_symmetric(seed in any::<u64>(), p in 1.5f64..3.5) {
        let (g, fam) = instance(seed, 10);
        let back = CurveFamilySpec::new(fam.f.clone(), fam.e.clone());
        prop_assert!(close(modulus(&g, &fam, p), modulus(&g, &back, p)));
    }

    #[test]
    fn quadratic_modulus_is_conductance(seed in any::<u64>()) {
        let (g, fam) = instance(seed, 12);
        let (c, _) = conductance(&g, &fam.e, &fam.f);
        let m = modulus(&g, &fam, 2.0);
        prop_assert!(close(m, c), "{m} vs conductance {c}");
    }

    #[test]
    fn adding_an_edge_never_decreases(seed in any::<u64>(), p in 1.5f64..3.0) {
        let (g, fam) = instance(seed, 9);
        let n = g.node_count();
        let (a, b) = ((seed % n as u64) as usize, ((seed / 7) % n as u64) as usize);
        prop_assume!(a != b);
        let mut edges = g.edges().to_vec();
        edges.push(Edge::new(a, b, 1.0, 1.0));
        let bigger = MetricGraph::new(n, 0, Vec::new(), edges).unwrap();
        prop_assert!(modulus(&g, &fam, p) <= modulus(&bigger, &fam, p) + 1e-6);
    }

    #[test]
    fn graph_text_round_trip(seed in any::<u64>()) {
        let (g, _) = instance(seed, 15);
        let back = parse_graph(&write_graph(&g)).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn porosity_matches_definition(
        pts in prop::collection::vec(-2.0f64..2.0, 1..40),
        x in -2.0f64..2.0,
        t in 1.01f64..3.0,
        scales in prop::collection::vec(0.01f64..2.0, 1..8),
    ) {
        let set: Vec<Vec<f64>> = pts.iter().map(|&p| vec![p]).collect();
        let got = porosity_check(&set, &[x], t, &scales).unwrap();
        for (r, ok) in scales.iter().zip(got) {
            let empty = pts.iter().all(|&p| {
                let d = (p - x).abs();
                !(d >= r / t && d < t * r)
            });
            prop_assert_eq!(ok, empty);
        }
    }

    #[test]
    fn node_set_algebra(a in prop::collection::vec(0usize..50, 0..30), b in prop::collection::vec(0usize..50, 0..30)) {
        let (a, b) = (NodeSet::new(a), NodeSet::new(b));
        let u = a.union(&b);
        let d = a.difference(&b);
        prop_assert!(a.is_subset(&u) && b.is_subset(&u));
        prop_assert!(d.is_disjoint(&b) && d.is_subset(&a));
        prop_assert_eq!(d.union(&b), u);
    }
}
