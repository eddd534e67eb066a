//! Property-based checks of the structural invariants: operator monotonicity
//! and linearity, energy homogeneity, survival-curve shape, graph I/O round
//! trips, normalization row sums, and substream separation.

use proptest::prelude::*;

use gehm_core::diagnostics::{
    energy_p, estimate_survival, EventRow, EventStatus, EventTable, SurvivalEstimator,
};
use gehm_core::graph::{read_graph, write_graph, Normalization, WeightedGraph};
use gehm_core::operators::p_laplacian;
use gehm_core::rng::substream;
use rand::Rng;

/// Random structurally undirected graph with positive symmetric weights.
fn graph_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), pairs),
                proptest::collection::vec(0.1f64..2.0, pairs),
            )
        })
        .prop_map(|(n, mask, weights)| {
            let mut edges = Vec::new();
            let mut idx = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if mask[idx] {
                        edges.push((i, j, weights[idx]));
                    }
                    idx += 1;
                }
            }
            WeightedGraph::from_undirected_edges(n, &edges).expect("valid edges")
        })
}

proptest! {
    /// ⟨Δ_p u − Δ_p v, u − v⟩ ≤ 0 for symmetric weights at eps = 0.
    #[test]
    fn p_laplacian_is_monotone(
        graph in graph_strategy(10),
        seed in 0u64..1000,
        p_idx in 0usize..3,
    ) {
        let p = [2.0, 3.0, 4.0][p_idx];
        let n = graph.n();
        let mut rng = substream(seed, "init", 7);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let du = p_laplacian(&graph, &u, p, 0.0).unwrap();
        let dv = p_laplacian(&graph, &v, p, 0.0).unwrap();
        let pairing: f64 = (0..n).map(|i| (du[i] - dv[i]) * (u[i] - v[i])).sum();
        prop_assert!(pairing <= 1e-9, "pairing = {pairing} at p = {p}");
    }

    /// Δ₂ is linear: Δ₂(a·u + b·v) = a·Δ₂u + b·Δ₂v.
    #[test]
    fn p2_laplacian_is_linear(
        graph in graph_strategy(10),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        seed in 0u64..1000,
    ) {
        let n = graph.n();
        let mut rng = substream(seed, "init", 8);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let combo: Vec<f64> = (0..n).map(|i| a * u[i] + b * v[i]).collect();
        let lhs = p_laplacian(&graph, &combo, 2.0, 0.0).unwrap();
        let du = p_laplacian(&graph, &u, 2.0, 0.0).unwrap();
        let dv = p_laplacian(&graph, &v, 2.0, 0.0).unwrap();
        for i in 0..n {
            let rhs = a * du[i] + b * dv[i];
            prop_assert!((lhs[i] - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }

    /// E_p(c·u) = |c|^p · E_p(u).
    #[test]
    fn energy_is_p_homogeneous(
        graph in graph_strategy(10),
        c in -3.0f64..3.0,
        p_idx in 0usize..3,
        seed in 0u64..1000,
    ) {
        let p = [2.0, 3.0, 4.0][p_idx];
        let n = graph.n();
        let mut rng = substream(seed, "init", 9);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let scaled: Vec<f64> = u.iter().map(|x| c * x).collect();
        let base = energy_p(&graph, &u, p).unwrap();
        let e = energy_p(&graph, &scaled, p).unwrap();
        let expected = c.abs().powf(p) * base;
        prop_assert!((e - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
    }

    /// Survival curves are monotone and bounded whatever the event table.
    #[test]
    fn survival_curves_are_monotone(
        times in proptest::collection::vec(0.0f64..50.0, 1..40),
        censored in proptest::collection::vec(any::<bool>(), 40),
    ) {
        let rows: Vec<EventRow> = times
            .iter()
            .enumerate()
            .map(|(node, &time)| EventRow {
                node,
                time,
                status: if censored[node] {
                    EventStatus::Censored
                } else {
                    EventStatus::Event
                },
            })
            .collect();
        let table = EventTable::new(rows).unwrap();
        for estimator in [SurvivalEstimator::KaplanMeier, SurvivalEstimator::NelsonAalen] {
            let curve = estimate_survival(&table, estimator).unwrap();
            for w in curve.times.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for w in curve.survival.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-15);
            }
            for w in curve.cumulative_hazard.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-15);
            }
            for (s, nk) in curve.survival.iter().zip(&curve.at_risk) {
                prop_assert!((0.0..=1.0).contains(s));
                prop_assert!(*nk >= 1);
            }
        }
    }

    /// Text round trip preserves every edge and weight bit-for-bit.
    #[test]
    fn graph_io_round_trips_exactly(graph in graph_strategy(12)) {
        let mut buf = Vec::new();
        write_graph(&graph, &mut buf).unwrap();
        let back = read_graph(buf.as_slice()).unwrap();
        prop_assert_eq!(graph, back);
    }

    /// Row normalization makes every non-isolated node's out-weights sum to 1.
    #[test]
    fn row_normalization_sums_to_one(graph in graph_strategy(12)) {
        let row = graph.normalize_weights(Normalization::Row);
        for i in 0..row.n() {
            let sum: f64 = row.neighbors(i).map(|(_, w)| w).sum();
            if graph.degree(i) > 0 {
                prop_assert!((sum - 1.0).abs() <= 1e-12, "row {i} sums to {sum}");
            } else {
                prop_assert_eq!(sum, 0.0);
            }
        }
    }

    /// Distinct labels or indices give distinct streams; equal inputs agree.
    #[test]
    fn substreams_separate_cleanly(master in any::<u64>(), index in 0u64..100) {
        let mut a = substream(master, "node-noise", index);
        let mut b = substream(master, "node-noise", index);
        let mut c = substream(master, "ou-noise", index);
        let mut d = substream(master, "node-noise", index + 1);
        let draw = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<u64> {
            (0..4).map(|_| r.gen::<u64>()).collect()
        };
        let (va, vb, vc, vd) = (draw(&mut a), draw(&mut b), draw(&mut c), draw(&mut d));
        prop_assert_eq!(&va, &vb);
        prop_assert_ne!(&va, &vc);
        prop_assert_ne!(&va, &vd);
    }
}
