use std::collections::BTreeSet;

use proptest::prelude::*;
use wdrd::arcs::config_exists;
use wdrd::census::{run_census, CensusConfig};
use wdrd::families::enumerate_instances;
use wdrd::iso::{are_isomorphic, canonical_form};
use wdrd::scheme::{self, compute_relations, intersection_tensor};
use wdrd::{AbelianGroup, Digraph, Execution, TwoWayDistance};

/// Distances from boolean matrix powers: `d(x,y)` is the least `k` with
/// `(A^k)_{xy} ≠ 0`.
fn matrix_power_distances(d: &Digraph) -> Vec<Vec<Option<u32>>> {
    let n = d.vertex_count();
    let mut dist = vec![vec![None; n]; n];
    let mut reach: Vec<Vec<bool>> = (0..n).map(|x| (0..n).map(|y| x == y).collect()).collect();
    for k in 0..n as u32 {
        for x in 0..n {
            for y in 0..n {
                if reach[x][y] && dist[x][y].is_none() {
                    dist[x][y] = Some(k);
                }
            }
        }
        let next: Vec<Vec<bool>> = (0..n)
            .map(|x| (0..n).map(|y| (0..n).any(|z| reach[x][z] && d.has_arc(z, y))).collect())
            .collect();
        reach = next;
    }
    dist
}

fn cyclic_cayley(n: usize, set: &[usize]) -> Digraph {
    let g = AbelianGroup::cyclic(n).unwrap();
    let mut elems: Vec<_> = set.iter().map(|&s| g.element(&[s as i64]).unwrap()).collect();
    elems.retain(|e| !e.is_identity());
    elems.sort_by_key(|e| e.coords().to_vec());
    elems.dedup();
    Digraph::from_cayley(&g, &elems).unwrap()
}

fn arb_cayley() -> impl Strategy<Value = Digraph> {
    (4usize..=18)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(1..n, 1..5)))
        .prop_map(|(n, set)| cyclic_cayley(n, &set))
}

fn arb_digraph() -> impl Strategy<Value = Digraph> {
    (3usize..=10).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let arcs = (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v && bits[u * n + v]);
            Digraph::new(n, arcs).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bfs_distances_match_matrix_powers(d in arb_digraph()) {
        let oracle = matrix_power_distances(&d);
        if d.is_strongly_connected() {
            let table = d.distance_table().unwrap();
            for (x, row) in oracle.iter().enumerate() {
                for (y, &expected) in row.iter().enumerate() {
                    prop_assert_eq!(Some(table.get(x, y)), expected);
                }
            }
        } else {
            prop_assert!(d.distance_table().is_err());
            prop_assert!(oracle.iter().flatten().any(|x| x.is_none()));
        }
    }

    #[test]
    fn regularity_routes_and_modes_agree(d in arb_cayley()) {
        prop_assume!(d.is_strongly_connected());
        let seq = d.distance_table_with(Execution::Sequential).unwrap();
        let par = d.distance_table_with(Execution::Parallel).unwrap();
        prop_assert_eq!(&seq, &par);
        let rel = compute_relations(&d, &seq);
        let a = scheme::check_wdrd_with(&rel, Execution::Sequential);
        let b = scheme::check_wdrd_with(&rel, Execution::Parallel);
        let c = scheme::check_wdrd_definitional(&rel);
        prop_assert_eq!(a.is_wdrd, b.is_wdrd);
        prop_assert_eq!(a.is_wdrd, c.is_wdrd);
    }

    #[test]
    fn tensor_invariants_on_regular_cayley_digraphs(d in arb_cayley()) {
        prop_assume!(d.is_strongly_connected());
        let table = d.distance_table().unwrap();
        let rel = compute_relations(&d, &table);
        prop_assume!(scheme::check_wdrd(&rel).is_wdrd);
        let p = intersection_tensor(&rel).unwrap();
        let n = d.vertex_count() as u32;
        prop_assert_eq!(p.valencies().iter().sum::<u32>(), n);
        for i in 0..p.relation_count() {
            prop_assert_eq!(p.k(i), p.k(p.star(i)));
            prop_assert_eq!(rel.size(i) as u32, n * p.k(i));
        }
        prop_assert!(scheme::check_lemma1(&p).all_passed());
    }

    #[test]
    fn canonical_form_ignores_labels(d in arb_digraph(), seed in any::<u64>()) {
        let n = d.vertex_count();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let e = Digraph::new(n, d.arcs().map(|(u, v)| (perm[u], perm[v]))).unwrap();
        prop_assert_eq!(canonical_form(&d), canonical_form(&e));
        prop_assert!(are_isomorphic(&d, &e).is_some());
    }
}

/// Undirected circuits in the `(1,1)` graph: for each cycle
/// `(x_0, ..., x_{m-1})`, `∂(x_0,x_i) = ∂(x_i,x_0) = ∂(x_0,x_{m-i})`.
#[test]
fn undirected_circuits_are_distance_symmetric() {
    let mut cycles_seen = 0;
    for spec in enumerate_instances(120) {
        let d = spec.construct().unwrap().digraph;
        let table = d.distance_table().unwrap();
        let n = d.vertex_count();
        let edges: Vec<Vec<usize>> = (0..n)
            .map(|u| {
                d.out_neighbors(u)
                    .iter()
                    .copied()
                    .filter(|&v| table.get(v, u) == 1)
                    .collect()
            })
            .collect();
        // Quasi-thin forces k_{1,1} ≤ 2, so each component is a path or cycle.
        assert!(edges.iter().all(|e| e.len() <= 2), "{spec}");
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] || edges[start].len() != 2 {
                continue;
            }
            let mut cycle = vec![start];
            let (mut prev, mut cur) = (start, edges[start][0]);
            while cur != start {
                cycle.push(cur);
                let next = edges[cur].iter().copied().find(|&w| w != prev).unwrap_or(prev);
                (prev, cur) = (cur, next);
            }
            for &v in &cycle {
                seen[v] = true;
            }
            let m = cycle.len();
            for r in 0..m {
                let x0 = cycle[r];
                for i in 1..m {
                    let xi = cycle[(r + i) % m];
                    let xmi = cycle[(r + m - i) % m];
                    assert_eq!(table.get(x0, xi), table.get(xi, x0), "{spec}");
                    assert_eq!(table.get(x0, xi), table.get(x0, xmi), "{spec}");
                }
            }
            cycles_seen += 1;
        }
    }
    assert!(cycles_seen > 0);
}

#[test]
fn configurations_on_one_instance_share_h() {
    let mut with_config = 0;
    for spec in enumerate_instances(120) {
        let d = spec.construct().unwrap().digraph;
        let table = d.distance_table().unwrap();
        let p = intersection_tensor(&compute_relations(&d, &table)).unwrap();
        let ks: Vec<u32> = p
            .relations()
            .iter()
            .filter(|t| t.forward == 1)
            .map(|t| t.backward)
            .collect();
        let mut hs = BTreeSet::new();
        for &a in &ks {
            for &b in &ks {
                let (q, h) = (a + 1, b + 1);
                if q > 2 && h > 2 && q != h && config_exists(&p, q, h).unwrap() {
                    hs.insert(h);
                    assert_eq!(p.k_of(TwoWayDistance::new(1, b)), 1, "{spec}");
                    assert_eq!(p.k_of(TwoWayDistance::new(1, a)), 2, "{spec}");
                }
            }
        }
        assert!(hs.len() <= 1, "{spec}: {hs:?}");
        with_config += usize::from(!hs.is_empty());
    }
    assert!(with_config > 0);
}

#[test]
fn census_pruning_keeps_every_class() {
    let full = run_census(&CensusConfig::new(12)).unwrap();
    let mut config = CensusConfig::new(12);
    config.prune_automorphisms = true;
    let pruned = run_census(&config).unwrap();
    assert!(pruned.pruned > 0);
    assert!(pruned.survivors.len() <= full.survivors.len());
    let forms = |r: &wdrd::census::CensusReport| -> BTreeSet<_> {
        r.survivors
            .iter()
            .map(|s| canonical_form(&s.digraph().unwrap()))
            .collect()
    };
    assert_eq!(forms(&full), forms(&pruned));
    assert_eq!(full.dedup_classes, pruned.dedup_classes);
    assert_eq!(full.covered, pruned.covered);
    assert!(full.unmatched.is_empty() && pruned.unmatched.is_empty());
}
