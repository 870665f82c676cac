use drgcert::certify::{self, Bases, DrgOutcome};
use drgcert::exactlin::{self, GfMatrix, IntPolynomial};
use drgcert::graph::{self, Graph, Side};
use drgcert::zgraph;
use drgcert::{Elem, Field};
use num_bigint::BigInt;
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for v in 1..n {
                for u in 0..v {
                    if bits[k] {
                        edges.push((u, v));
                    }
                    k += 1;
                }
            }
            Graph::new(n, &edges).unwrap()
        })
    })
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn charpoly(g: &Graph) -> IntPolynomial {
    exactlin::charpoly_int(&g.adjacency_matrix())
}

fn is_bipartite(g: &Graph) -> bool {
    g.clone().with_detected_bipartition().is_ok()
}

fn edge_set(g: &Graph) -> Vec<(usize, usize)> {
    g.edges().collect()
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn double_cover_spectrum_laws(g in arb_graph(10)) {
        let n = g.n();
        let cp = charpoly(&g);
        let sign = BigInt::from(if n % 2 == 0 { 1 } else { -1 });
        let ebd = charpoly(&graph::extended_bipartite_double(&g));
        let law = cp.compose_linear(1, -1).mul(&cp.compose_linear(-1, -1)).scale(&sign);
        prop_assert_eq!(ebd, law);
        let bd = charpoly(&graph::bipartite_double(&g));
        let law = cp.mul(&cp.compose_linear(-1, 0)).scale(&sign);
        prop_assert_eq!(bd, law);
    }

    #[test]
    fn double_cover_connectivity(g in arb_graph(10)) {
        let bd = graph::bipartite_double(&g);
        let ebd = graph::extended_bipartite_double(&g);
        prop_assert!(is_bipartite(&bd));
        prop_assert!(is_bipartite(&ebd));
        prop_assert_eq!(bd.is_connected(), g.is_connected() && !is_bipartite(&g));
        prop_assert_eq!(ebd.is_connected(), g.is_connected());
    }

    #[test]
    fn halved_ebd_is_distance_1_or_2(g in arb_graph(10)) {
        prop_assume!(g.is_connected());
        let ebd = graph::extended_bipartite_double(&g);
        let half = graph::halved_graph(&ebd, Side::Plus).unwrap();
        prop_assert_eq!(edge_set(&half), edge_set(&graph::distance_1_or_2(&g)));
    }

    #[test]
    fn bfs_classes_partition(g in arb_graph(10), base in 0usize..10) {
        let base = base % g.n();
        let p = graph::bfs_partition(&g, base);
        prop_assert_eq!(p.class_sizes.iter().sum::<usize>(), p.reached());
        for (u, v) in g.edges() {
            let (a, b) = (p.dist[u], p.dist[v]);
            if a != graph::UNREACHABLE {
                prop_assert!(a.abs_diff(b) <= 1);
            }
        }
    }

    #[test]
    fn refutations_recheck(g in arb_graph(9)) {
        prop_assume!(g.is_connected());
        match certify::check_distance_regular(&g, Bases::All).unwrap() {
            DrgOutcome::Refuted(w) => {
                // Recount from scratch with a fresh BFS.
                let p = graph::bfs_partition(&g, w.base);
                let i = w.distance as u32;
                let count = |d: u32| g
                    .neighbors(w.vertex)
                    .iter()
                    .filter(|&&x| p.dist[x as usize] == d)
                    .count() as u64;
                let c = if i == 0 { 0 } else { count(i - 1) };
                prop_assert_eq!(p.dist[w.vertex], i);
                prop_assert_eq!((c, count(i + 1)), w.found);
                prop_assert!(Some(w.found) != w.expected);
            }
            DrgOutcome::Regular { array, .. } => {
                prop_assert_eq!(array.vertex_count(), g.n() as u64);
                let spec = match certify::drg_spectrum(&array, g.n() as u64) {
                    Ok(s) => s,
                    Err(drgcert::Error::NonIntegralEigenvalue(_)) => {
                        // Then the adjacency matrix must have an irrational eigenvalue too.
                        let roots = exactlin::integer_roots(&charpoly(&g));
                        prop_assert!(roots.remainder.degree() > 0);
                        return Ok(());
                    }
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                };
                prop_assert!(spec.satisfies_trace_identities(g.n() as u64, array.valency()));
                for &(theta, m) in &spec.pairs {
                    prop_assert_eq!(certify::multiplicity_by_rank(&g, theta, 64).unwrap(), m);
                }
            }
        }
    }

    #[test]
    fn srg_parameters_are_feasible(g in arb_graph(9)) {
        prop_assume!(g.n() >= 2);
        if let certify::SrgOutcome::Strong(p) = certify::check_srg(&g) {
            prop_assert!(p.is_feasible());
        }
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn graph6_round_trip(g in arb_graph(70)) {
        let enc = graph::graph6_encode(&g);
        prop_assert!(enc.iter().all(|&b| (63..=126).contains(&b)));
        prop_assert_eq!(graph::graph6_decode(&enc).unwrap(), g);
    }
}

fn arb_matrix() -> impl Strategy<Value = (u64, usize, usize, Vec<u32>)> {
    (prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9]), 1usize..6, 1usize..7).prop_flat_map(
        |(q, r, c)| {
            proptest::collection::vec(0..q as u32, r * c).prop_map(move |xs| (q, r, c, xs))
        },
    )
}

fn build((q, r, c, xs): &(u64, usize, usize, Vec<u32>)) -> GfMatrix {
    let f = Field::new(*q).unwrap();
    let rows: Vec<Vec<Elem>> = xs.chunks(*c).map(|ch| ch.iter().map(|&x| Elem(x)).collect()).collect();
    assert_eq!(rows.len(), *r);
    GfMatrix::from_rows(&f, *c, &rows)
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn rank_nullity_and_kernel(spec in arb_matrix()) {
        let m = build(&spec);
        let k = exactlin::kernel(&m);
        prop_assert_eq!(exactlin::rank(&m) + k.rows(), m.cols());
        for v in k.row_iter() {
            prop_assert!(m.apply(v).iter().all(|x| x.is_zero()));
        }
        let r = exactlin::rref(&m).reduced;
        prop_assert_eq!(exactlin::rref(&r).reduced, r);
    }

    #[test]
    fn square_det_vanishes_iff_singular(
        (q, r, xs) in (prop::sample::select(vec![2u64, 3, 4, 5, 9]), 1usize..6)
            .prop_flat_map(|(q, r)| (Just(q), Just(r), proptest::collection::vec(0..q as u32, r * r)))
    ) {
        let m = build(&(q, r, r, xs));
        prop_assert_eq!(exactlin::det(&m).is_zero(), exactlin::rank(&m) < r);
    }

    #[test]
    fn z_translations_are_automorphisms(a in prop::array::uniform3(0u32..3), b in prop::array::uniform3(0u32..3)) {
        let f = Field::new(3).unwrap();
        let z = zgraph::build_z_over(&f);
        let p = zgraph::z_automorphism(&f, &a.map(Elem), &b.map(Elem));
        prop_assert_eq!(z.maps_onto(&z, &p), Ok(()));
    }
}

#[test]
fn expected_spectra_satisfy_trace_identities() {
    use certify::Family;
    for q in [2, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
        for fam in Family::ALL {
            let e = certify::expected_params(fam, q);
            if let (Some(a), Some(s)) = (&e.array, &e.spectrum) {
                assert!(s.satisfies_trace_identities(e.vertices, a.valency()), "{fam:?} q={q}");
            }
        }
    }
}
