//! Digraph isomorphism by individualisation and refinement.
//!
//! Vertices are coloured by an ordered partition. Refinement splits cells by
//! the multiset of `(colour, d(v,w), d(w,v))` over all `w`, using directed
//! distances (unreachable pairs get a sentinel), so vertex-transitive
//! digraphs still split once a vertex has been individualised.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::digraph::{bfs, Digraph};

/// Relabelled arc list shared by exactly the digraphs isomorphic to the input.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CanonicalForm {
    pub n: usize,
    pub arcs: Vec<(usize, usize)>,
}

/// A vertex bijection `mapping[u]` from the first digraph onto the second.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoCertificate {
    pub mapping: Vec<usize>,
    pub verified: bool,
}

struct Refiner<'a> {
    digraph: &'a Digraph,
    n: usize,
    dist: Vec<u32>,
}

impl<'a> Refiner<'a> {
    fn new(digraph: &'a Digraph) -> Self {
        let n = digraph.vertex_count();
        let mut dist = Vec::with_capacity(n * n);
        for s in 0..n {
            dist.extend(bfs(digraph, s).into_iter().map(|d| d.unwrap_or(n as u32)));
        }
        Refiner { digraph, n, dist }
    }

    fn d(&self, u: usize, v: usize) -> u64 {
        self.dist[u * self.n + v] as u64
    }

    /// Colours from out-degree, in-degree and the two-way distance profile.
    fn initial(&self) -> Vec<u32> {
        let m = self.n as u64 + 1;
        let indeg = self.digraph.in_degrees();
        let keys: Vec<Vec<u64>> = (0..self.n)
            .map(|v| {
                let mut profile: Vec<u64> = (0..self.n).map(|w| self.d(v, w) * m + self.d(w, v)).collect();
                profile.sort_unstable();
                let mut key = vec![self.digraph.out_neighbors(v).len() as u64, indeg[v] as u64];
                key.extend(profile);
                key
            })
            .collect();
        rank(&keys).0
    }

    /// Refines to a stable ordered partition and returns a trace of the
    /// signatures seen, which only depends on the isomorphism type of the
    /// coloured digraph.
    fn refine(&self, colors: &mut Vec<u32>) -> u64 {
        let m = self.n as u64 + 1;
        let mut hasher = DefaultHasher::new();
        let mut cells = distinct(colors);
        loop {
            let keys: Vec<Vec<u64>> = (0..self.n)
                .map(|v| {
                    let mut sig: Vec<u64> = (0..self.n)
                        .map(|w| (colors[w] as u64 * m + self.d(v, w)) * m + self.d(w, v))
                        .collect();
                    sig.sort_unstable();
                    sig.insert(0, colors[v] as u64);
                    sig
                })
                .collect();
            let (next, sorted_keys) = rank(&keys);
            sorted_keys.hash(&mut hasher);
            *colors = next;
            let now = distinct(colors);
            if now == cells {
                break;
            }
            cells = now;
        }
        hasher.finish()
    }
}

/// Dense ranks of `keys` in sorted order, plus the distinct sorted keys.
fn rank(keys: &[Vec<u64>]) -> (Vec<u32>, Vec<&Vec<u64>>) {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut colors = vec![0u32; keys.len()];
    let mut distinct_keys: Vec<&Vec<u64>> = Vec::new();
    for &v in &order {
        if distinct_keys.last().is_none_or(|k| *k != &keys[v]) {
            distinct_keys.push(&keys[v]);
        }
        colors[v] = distinct_keys.len() as u32 - 1;
    }
    (colors, distinct_keys)
}

fn distinct(colors: &[u32]) -> usize {
    colors.iter().max().map_or(0, |&m| m as usize + 1)
}

/// First smallest cell with more than one vertex, as ascending vertex ids.
fn target_cell(colors: &[u32]) -> Option<Vec<usize>> {
    let k = distinct(colors);
    let mut sizes = vec![0usize; k];
    for &c in colors {
        sizes[c as usize] += 1;
    }
    let (c, _) = sizes
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1)
        .min_by_key(|(c, &s)| (s, *c))?;
    Some((0..colors.len()).filter(|&v| colors[v] as usize == c).collect())
}

/// Splits `v` off the front of its cell.
fn individualize(colors: &[u32], v: usize) -> Vec<u32> {
    let c = colors[v];
    colors
        .iter()
        .enumerate()
        .map(|(w, &x)| if x > c || (x == c && w != v) { x + 1 } else { x })
        .collect()
}

fn relabel(d: &Digraph, lab: &[u32]) -> Vec<(usize, usize)> {
    let mut arcs: Vec<(usize, usize)> = d.arcs().map(|(u, v)| (lab[u] as usize, lab[v] as usize)).collect();
    arcs.sort_unstable();
    arcs
}

/// Refinement hashes along a search path.
type Trace = Vec<u32>;

struct Canon<'a> {
    refiner: Refiner<'a>,
    best: Option<(Vec<(usize, usize)>, Trace)>,
    automorphisms: Vec<Vec<usize>>,
}

impl Canon<'_> {
    fn search(&mut self, mut colors: Vec<u32>, prefix: &mut Vec<usize>) {
        self.refiner.refine(&mut colors);
        let Some(cell) = target_cell(&colors) else {
            self.leaf(colors);
            return;
        };
        let mut explored: Vec<usize> = Vec::new();
        for v in cell {
            if !explored.is_empty() && self.same_orbit(prefix, &explored, v) {
                continue;
            }
            prefix.push(v);
            self.search(individualize(&colors, v), prefix);
            prefix.pop();
            explored.push(v);
        }
    }

    fn leaf(&mut self, lab: Vec<u32>) {
        let arcs = relabel(self.refiner.digraph, &lab);
        match &self.best {
            Some((best, _)) if arcs > *best => {}
            Some((best, best_lab)) if arcs == *best => {
                let mut inv = vec![0usize; lab.len()];
                for (v, &p) in best_lab.iter().enumerate() {
                    inv[p as usize] = v;
                }
                let gamma: Vec<usize> = lab.iter().map(|&p| inv[p as usize]).collect();
                if gamma.iter().enumerate().any(|(v, &w)| v != w) {
                    self.automorphisms.push(gamma);
                }
            }
            _ => self.best = Some((arcs, lab)),
        }
    }

    /// Whether `v` shares an orbit with an explored sibling under the known
    /// automorphisms that fix `prefix` pointwise.
    fn same_orbit(&self, prefix: &[usize], explored: &[usize], v: usize) -> bool {
        let n = self.refiner.n;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for g in self.automorphisms.iter().filter(|g| prefix.iter().all(|&x| g[x] == x)) {
            for (a, &b) in g.iter().enumerate() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&u| find(&mut parent, u) == rv)
    }
}

/// The canonical form and the labelling `lab[v]` that produces it.
pub fn canonical_labeling(d: &Digraph) -> (CanonicalForm, Vec<usize>) {
    let refiner = Refiner::new(d);
    let colors = refiner.initial();
    let mut canon = Canon {
        refiner,
        best: None,
        automorphisms: Vec::new(),
    };
    canon.search(colors, &mut Vec::new());
    let (arcs, lab) = canon.best.expect("search reaches at least one leaf");
    (
        CanonicalForm {
            n: d.vertex_count(),
            arcs,
        },
        lab.into_iter().map(|p| p as usize).collect(),
    )
}

pub fn canonical_form(d: &Digraph) -> CanonicalForm {
    canonical_labeling(d).0
}

/// True iff `mapping` is a bijection carrying the arcs of `a` exactly onto
/// the arcs of `b`.
pub fn verify_mapping(a: &Digraph, b: &Digraph, mapping: &[usize]) -> bool {
    let n = a.vertex_count();
    if n != b.vertex_count() || mapping.len() != n || a.arc_count() != b.arc_count() {
        return false;
    }
    let mut seen = vec![false; n];
    for &m in mapping {
        if m >= n || std::mem::replace(&mut seen[m], true) {
            return false;
        }
    }
    a.arcs().all(|(u, v)| b.has_arc(mapping[u], mapping[v]))
}

/// Finds an isomorphism from `a` to `b`, if one exists.
///
/// One root-to-leaf path is fixed in `b`; the search then looks for a path
/// in `a` with the same refinement traces whose leaf induces a valid
/// mapping. Every returned mapping has been checked arc by arc.
pub fn are_isomorphic(a: &Digraph, b: &Digraph) -> Option<IsoCertificate> {
    if a.vertex_count() != b.vertex_count() || a.arc_count() != b.arc_count() {
        return None;
    }
    let (ra, rb) = (Refiner::new(a), Refiner::new(b));
    let (ca, cb) = (ra.initial(), rb.initial());
    let profile = |r: &Refiner, c: &[u32]| {
        let mut keys: Vec<(u32, usize, usize)> = (0..r.n)
            .map(|v| {
                (
                    c[v],
                    r.digraph.out_neighbors(v).len(),
                    r.dist[v * r.n..(v + 1) * r.n].iter().sum::<u32>() as usize,
                )
            })
            .collect();
        keys.sort_unstable();
        keys
    };
    if profile(&ra, &ca) != profile(&rb, &cb) {
        return None;
    }

    // The fixed path in `b`: trace and chosen cell index per level.
    let mut path: Vec<(u64, Option<u32>)> = Vec::new();
    let mut colors = cb;
    let leaf_b = loop {
        let trace = rb.refine(&mut colors);
        match target_cell(&colors) {
            None => {
                path.push((trace, None));
                break colors;
            }
            Some(cell) => {
                path.push((trace, Some(colors[cell[0]])));
                colors = individualize(&colors, cell[0]);
            }
        }
    };
    let mut inv_b = vec![0usize; b.vertex_count()];
    for (v, &p) in leaf_b.iter().enumerate() {
        inv_b[p as usize] = v;
    }

    let mut mapping = None;
    match_path(&ra, ca, &path, 0, &mut |lab: &[u32]| {
        let m: Vec<usize> = lab.iter().map(|&p| inv_b[p as usize]).collect();
        if verify_mapping(a, b, &m) {
            mapping = Some(m);
            true
        } else {
            false
        }
    });
    mapping.map(|mapping| {
        let verified = verify_mapping(a, b, &mapping);
        IsoCertificate { mapping, verified }
    })
}

fn match_path(
    r: &Refiner,
    mut colors: Vec<u32>,
    path: &[(u64, Option<u32>)],
    level: usize,
    accept: &mut dyn FnMut(&[u32]) -> bool,
) -> bool {
    let trace = r.refine(&mut colors);
    let (want, cell_color) = path[level];
    if trace != want {
        return false;
    }
    let Some(c) = cell_color else {
        return target_cell(&colors).is_none() && accept(&colors);
    };
    match target_cell(&colors) {
        Some(cell) if colors[cell[0]] == c => cell
            .into_iter()
            .any(|v| match_path(r, individualize(&colors, v), path, level + 1, accept)),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::AbelianGroup;

    fn cay(group: &str, set: &str) -> Digraph {
        let g: AbelianGroup = group.parse().unwrap();
        Digraph::from_cayley(&g, &g.parse_set(set).unwrap()).unwrap()
    }

    fn cycle(n: usize, shift: usize) -> Digraph {
        Digraph::new(n, (0..n).map(|v| ((v + shift) % n, (v + shift + 1) % n))).unwrap()
    }

    fn permuted(d: &Digraph, perm: &[usize]) -> Digraph {
        Digraph::new(d.vertex_count(), d.arcs().map(|(u, v)| (perm[u], perm[v]))).unwrap()
    }

    #[test]
    fn cycles() {
        assert_eq!(canonical_form(&cycle(7, 0)), canonical_form(&cycle(7, 3)));
        assert!(are_isomorphic(&cycle(5, 0), &cycle(6, 0)).is_none());
        let c = are_isomorphic(&cycle(7, 0), &cycle(7, 3)).unwrap();
        assert!(c.verified);
    }

    #[test]
    fn negated_connection_set() {
        // x -> -x maps Cay(G,S) onto Cay(G,-S).
        let a = cay("Z8", "1,2,3,6");
        let b = cay("Z8", "7,6,5,2");
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert!(are_isomorphic(&a, &b).unwrap().verified);
        let c = cay("Z8", "2,3,6,7");
        assert_eq!(
            are_isomorphic(&a, &c).is_some(),
            canonical_form(&a) == canonical_form(&c)
        );
    }

    #[test]
    fn distinct_order_eight_members() {
        let a = cay("Z8", "1,2,3,6");
        let b = cay("Z8", "1,2,5,6");
        assert_ne!(canonical_form(&a), canonical_form(&b));
        assert!(are_isomorphic(&a, &b).is_none());
    }

    #[test]
    fn relabelled_copies() {
        let d = cay("Z4xZ4", "(0,1),(1,0),(2,0),(0,2)");
        let perm: Vec<usize> = (0..16).map(|v| (v * 7 + 3) % 16).collect();
        let e = permuted(&d, &perm);
        assert_eq!(canonical_form(&d), canonical_form(&e));
        let cert = are_isomorphic(&d, &e).unwrap();
        assert!(verify_mapping(&d, &e, &cert.mapping));
        assert_eq!(canonical_form(&d), canonical_form(&d));
    }

    #[test]
    fn disconnected_inputs() {
        let a = Digraph::new(4, [(0, 1), (2, 3)]).unwrap();
        let b = Digraph::new(4, [(3, 2), (1, 0)]).unwrap();
        let c = Digraph::new(4, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert!(are_isomorphic(&a, &b).is_some());
        assert!(are_isomorphic(&a, &c).is_none());
        assert_ne!(canonical_form(&a), canonical_form(&c));
    }

    #[test]
    fn certificate_json() {
        let c = are_isomorphic(&cycle(3, 0), &cycle(3, 1)).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["verified"], true);
        assert_eq!(v["mapping"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn bad_mappings_rejected() {
        let d = cycle(4, 0);
        assert!(!verify_mapping(&d, &d, &[0, 0, 1, 2]));
        assert!(!verify_mapping(&d, &d, &[1, 0, 2, 3]));
        assert!(verify_mapping(&d, &d, &[1, 2, 3, 0]));
    }
}
