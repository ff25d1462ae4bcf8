//! Two-way distance relations, intersection numbers, and the scheme-level
//! predicates built on them.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, DistanceTable, TwoWayDistance};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// The partition of `V x V` into relations `Γ_ĩ = {(x,y) : ∂̃(x,y) = ĩ}`.
///
/// Relation indices follow the lexicographic order of the two-way distances,
/// so index 0 is always the diagonal `(0,0)`.
#[derive(Clone, Debug)]
pub struct RelationPartition {
    n: usize,
    types: Vec<TwoWayDistance>,
    type_of: Vec<u32>,
    /// `rows[i][x]`: the `y` with `(x,y)` in relation `i`, ascending.
    rows: Vec<Vec<Vec<usize>>>,
    star: Vec<usize>,
    representative: Vec<(usize, usize)>,
}

impl RelationPartition {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn types(&self) -> &[TwoWayDistance] {
        &self.types
    }

    pub fn relation_count(&self) -> usize {
        self.types.len()
    }

    pub fn index_of(&self, t: TwoWayDistance) -> Option<usize> {
        self.types.binary_search(&t).ok()
    }

    pub fn type_of(&self, x: usize, y: usize) -> usize {
        self.type_of[x * self.n + y] as usize
    }

    /// `Γ_i(x)`.
    pub fn neighbors(&self, i: usize, x: usize) -> &[usize] {
        &self.rows[i][x]
    }

    /// Index of the transposed relation `ĩ*`.
    pub fn star(&self, i: usize) -> usize {
        self.star[i]
    }

    /// Number of ordered pairs in relation `i`.
    pub fn size(&self, i: usize) -> usize {
        self.rows[i].iter().map(Vec::len).sum()
    }

    /// Lexicographically first pair in relation `i`.
    pub fn representative(&self, i: usize) -> (usize, usize) {
        self.representative[i]
    }

    /// Dense 0/1 indicator matrix `A_i`.
    pub fn indicator(&self, i: usize) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|x| {
                let mut row = vec![0u8; self.n];
                for &y in &self.rows[i][x] {
                    row[y] = 1;
                }
                row
            })
            .collect()
    }
}

/// Builds the relation partition from a distance table.
pub fn compute_relations(digraph: &Digraph, table: &DistanceTable) -> RelationPartition {
    let n = table.vertex_count();
    debug_assert_eq!(n, digraph.vertex_count());
    let mut set = BTreeSet::new();
    for x in 0..n {
        for y in 0..n {
            set.insert(table.two_way(x, y));
        }
    }
    let types: Vec<TwoWayDistance> = set.into_iter().collect();
    let r = types.len();
    let mut type_of = vec![0u32; n * n];
    let mut rows = vec![vec![Vec::new(); n]; r];
    let mut representative = vec![(usize::MAX, usize::MAX); r];
    for x in 0..n {
        for y in 0..n {
            let i = types.binary_search(&table.two_way(x, y)).expect("collected above");
            type_of[x * n + y] = i as u32;
            rows[i][x].push(y);
            if representative[i].0 == usize::MAX {
                representative[i] = (x, y);
            }
        }
    }
    let star = types
        .iter()
        .map(|t| {
            types
                .binary_search(&t.transpose())
                .expect("transpose of a realised pair")
        })
        .collect();
    RelationPartition {
        n,
        types,
        type_of,
        rows,
        star,
        representative,
    }
}

/// Evidence that a digraph is not weakly distance-regular: two pairs in the
/// same relation `h` with different counts `|P_{i,j}(x,y)|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WdrdWitness {
    pub h: TwoWayDistance,
    pub i: TwoWayDistance,
    pub j: TwoWayDistance,
    pub pair: (usize, usize),
    pub other_pair: (usize, usize),
    pub count: u32,
    pub other_count: u32,
}

impl std::fmt::Display for WdrdWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "pairs {:?} and {:?} both lie in relation {} but |P_{{{},{}}}| is {} vs {}",
            self.pair, self.other_pair, self.h, self.i, self.j, self.count, self.other_count
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WdrdVerdict {
    pub is_wdrd: bool,
    pub witness: Option<WdrdWitness>,
}

/// Checks that every product `A_i A_j` is constant on the support of every
/// `A_h`. The first failure in `(i, j, h)` order is reported.
pub fn check_wdrd(rel: &RelationPartition) -> WdrdVerdict {
    check_wdrd_with(rel, Execution::default())
}

pub fn check_wdrd_with(rel: &RelationPartition, exec: Execution) -> WdrdVerdict {
    let r = rel.relation_count();
    let failures = par::map_range(exec, r, |i| first_failure_for(rel, i));
    let witness = failures.into_iter().flatten().next();
    WdrdVerdict {
        is_wdrd: witness.is_none(),
        witness,
    }
}

fn first_failure_for(rel: &RelationPartition, i: usize) -> Option<WdrdWitness> {
    let n = rel.n;
    let r = rel.relation_count();
    let mut prod = vec![0u32; n * n];
    let mut touched: Vec<usize> = Vec::new();
    let mut value = vec![0u32; r];
    let mut hits = vec![0usize; r];
    let mut bad = vec![false; r];
    let sizes: Vec<usize> = (0..r).map(|h| rel.size(h)).collect();
    for j in 0..r {
        for x in 0..n {
            for &z in rel.neighbors(i, x) {
                for &y in rel.neighbors(j, z) {
                    let cell = x * n + y;
                    if prod[cell] == 0 {
                        touched.push(cell);
                    }
                    prod[cell] += 1;
                }
            }
        }
        let mut hs = Vec::new();
        for &cell in &touched {
            let h = rel.type_of[cell] as usize;
            if hits[h] == 0 {
                value[h] = prod[cell];
                hs.push(h);
            } else if value[h] != prod[cell] {
                bad[h] = true;
            }
            hits[h] += 1;
        }
        let failing = hs.iter().copied().filter(|&h| bad[h] || hits[h] != sizes[h]).min();
        let witness = failing.map(|h| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|x| rel.neighbors(h, x).iter().map(move |&y| (x, y)))
                .collect();
            let first = pairs[0];
            let c0 = prod[first.0 * n + first.1];
            let other = pairs
                .iter()
                .copied()
                .find(|&(x, y)| prod[x * n + y] != c0)
                .expect("a differing pair exists");
            WdrdWitness {
                h: rel.types[h],
                i: rel.types[i],
                j: rel.types[j],
                pair: first,
                other_pair: other,
                count: c0,
                other_count: prod[other.0 * n + other.1],
            }
        });
        for &cell in &touched {
            prod[cell] = 0;
        }
        touched.clear();
        for h in hs {
            hits[h] = 0;
            bad[h] = false;
        }
        if witness.is_some() {
            return witness;
        }
    }
    None
}

/// Reference check straight from the definition: for every ordered pair
/// `(x,y)` count `|P_{i,j}(x,y)|` for all `(i,j)` by looping over `z`, and
/// compare against the first pair seen in the same relation.
pub fn check_wdrd_definitional(rel: &RelationPartition) -> WdrdVerdict {
    let n = rel.n;
    // For each relation h: the first pair seen and its product counts.
    type Counts = BTreeMap<(usize, usize), u32>;
    let mut seen: BTreeMap<usize, ((usize, usize), Counts)> = BTreeMap::new();
    for x in 0..n {
        for y in 0..n {
            let mut counts = BTreeMap::new();
            for z in 0..n {
                *counts.entry((rel.type_of(x, z), rel.type_of(z, y))).or_insert(0u32) += 1;
            }
            let h = rel.type_of(x, y);
            match seen.get(&h) {
                None => {
                    seen.insert(h, ((x, y), counts));
                }
                Some((first, expected)) if *expected != counts => {
                    let (&(i, j), &c) = expected
                        .iter()
                        .find(|(k, v)| counts.get(k) != Some(v))
                        .or_else(|| {
                            counts
                                .iter()
                                .find(|(k, _)| !expected.contains_key(k))
                                .map(|(k, _)| (k, &0))
                        })
                        .expect("maps differ");
                    let other = counts.get(&(i, j)).copied().unwrap_or(0);
                    return WdrdVerdict {
                        is_wdrd: false,
                        witness: Some(WdrdWitness {
                            h: rel.types[h],
                            i: rel.types[i],
                            j: rel.types[j],
                            pair: *first,
                            other_pair: (x, y),
                            count: c,
                            other_count: other,
                        }),
                    };
                }
                Some(_) => {}
            }
        }
    }
    WdrdVerdict {
        is_wdrd: true,
        witness: None,
    }
}

/// Intersection numbers `p^h_{i,j}` stored densely over relation indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionTensor {
    relations: Vec<TwoWayDistance>,
    star: Vec<usize>,
    p: Vec<u32>,
    valencies: Vec<u32>,
    valency: u32,
    /// `support[i*r + j]`: nonzero `(h, p^h_{i,j})`, ascending in `h`.
    support: Vec<Vec<(usize, u32)>>,
}

/// Computes the intersection numbers of a weakly distance-regular digraph,
/// reading each `p^h_{i,j}` off one representative pair of `Γ_h`.
pub fn intersection_tensor(rel: &RelationPartition) -> Result<IntersectionTensor> {
    let verdict = check_wdrd(rel);
    if let Some(w) = verdict.witness {
        return Err(Error::NotWeaklyDistanceRegular(Box::new(w)));
    }
    let r = rel.relation_count();
    let mut p = vec![0u32; r * r * r];
    for h in 0..r {
        let (x, y) = rel.representative(h);
        for z in 0..rel.n {
            let i = rel.type_of(x, z);
            let j = rel.type_of(z, y);
            p[(h * r + i) * r + j] += 1;
        }
    }
    Ok(IntersectionTensor::from_raw(rel.types.clone(), p))
}

impl IntersectionTensor {
    fn from_raw(relations: Vec<TwoWayDistance>, p: Vec<u32>) -> Self {
        let r = relations.len();
        let star: Vec<usize> = relations
            .iter()
            .map(|t| relations.binary_search(&t.transpose()).expect("closed under transpose"))
            .collect();
        let valencies: Vec<u32> = (0..r).map(|i| p[i * r + star[i]]).collect();
        let valency = relations
            .iter()
            .zip(&valencies)
            .filter(|(t, _)| t.forward == 1)
            .map(|(_, k)| k)
            .sum();
        let mut t = IntersectionTensor {
            relations,
            star,
            p,
            valencies,
            valency,
            support: Vec::new(),
        };
        t.rebuild_support();
        t
    }

    fn rebuild_support(&mut self) {
        let r = self.relations.len();
        let mut support = vec![Vec::new(); r * r];
        for h in 0..r {
            for i in 0..r {
                for j in 0..r {
                    let v = self.p[(h * r + i) * r + j];
                    if v != 0 {
                        support[i * r + j].push((h, v));
                    }
                }
            }
        }
        self.support = support;
    }

    pub fn relations(&self) -> &[TwoWayDistance] {
        &self.relations
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn index_of(&self, t: TwoWayDistance) -> Option<usize> {
        self.relations.binary_search(&t).ok()
    }

    /// Like [`index_of`](Self::index_of) but a missing relation is an error.
    pub fn require(&self, t: TwoWayDistance) -> Result<usize> {
        self.index_of(t)
            .ok_or_else(|| Error::Structural(format!("relation {t} does not occur")))
    }

    pub fn star(&self, i: usize) -> usize {
        self.star[i]
    }

    /// `p^h_{i,j}` by relation index.
    pub fn p(&self, h: usize, i: usize, j: usize) -> u32 {
        let r = self.relations.len();
        self.p[(h * r + i) * r + j]
    }

    /// Nonzero `(h, p^h_{i,j})` for fixed `i, j`.
    pub fn support(&self, i: usize, j: usize) -> &[(usize, u32)] {
        &self.support[i * self.relations.len() + j]
    }

    pub fn valencies(&self) -> &[u32] {
        &self.valencies
    }

    /// `k_i`.
    pub fn k(&self, i: usize) -> u32 {
        self.valencies[i]
    }

    /// `k_{a,b}` looked up by pair; zero when the pair does not occur.
    pub fn k_of(&self, t: TwoWayDistance) -> u32 {
        self.index_of(t).map_or(0, |i| self.valencies[i])
    }

    /// Sum of `k_{1,j}` over the arc types.
    pub fn valency(&self) -> u32 {
        self.valency
    }

    /// Overwrites one entry, leaving the stored valencies untouched. Meant for
    /// building negative controls.
    pub fn set_entry(&mut self, h: usize, i: usize, j: usize, value: u32) {
        let r = self.relations.len();
        self.p[(h * r + i) * r + j] = value;
        self.rebuild_support();
    }

    pub fn to_json(&self) -> TensorJson {
        let r = self.relations.len();
        let mut p = Vec::new();
        for h in 0..r {
            for i in 0..r {
                for j in 0..r {
                    let v = self.p(h, i, j);
                    if v != 0 {
                        p.push([h as u32, i as u32, j as u32, v]);
                    }
                }
            }
        }
        TensorJson {
            relations: self.relations.iter().map(|&t| t.into()).collect(),
            valencies: self.valencies.clone(),
            p,
        }
    }
}

/// `{"relations":[[a,b],...],"valencies":[...],"p":[[h,i,j,value],...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorJson {
    pub relations: Vec<[u32; 2]>,
    pub valencies: Vec<u32>,
    pub p: Vec<[u32; 4]>,
}

pub fn is_commutative(t: &IntersectionTensor) -> bool {
    let r = t.relation_count();
    (0..r).all(|h| (0..r).all(|i| (i + 1..r).all(|j| t.p(h, i, j) == t.p(h, j, i))))
}

pub fn max_intersection_number(t: &IntersectionTensor) -> u32 {
    t.p.iter().copied().max().unwrap_or(0)
}

/// Maximum intersection number at most 2. Use
/// [`max_intersection_number`] when the exact maximum matters.
pub fn is_quasi_thin(t: &IntersectionTensor) -> bool {
    max_intersection_number(t) <= 2
}

pub fn is_thin(t: &IntersectionTensor) -> bool {
    max_intersection_number(t) <= 1
}

/// `EF = {Γ_h : Σ_{i∈E, j∈F} p^h_{i,j} ≠ 0}`, as ascending relation indices.
pub fn relation_product(t: &IntersectionTensor, e: &[usize], f: &[usize]) -> Vec<usize> {
    let mut out = BTreeSet::new();
    for &i in e {
        for &j in f {
            out.extend(t.support(i, j).iter().map(|&(h, _)| h));
        }
    }
    out.into_iter().collect()
}

/// Outcome of one of the six standard identities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub passed: bool,
    /// First violating index tuple, in the order the identity names them.
    pub witness: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma1Report {
    pub checks: Vec<IdentityCheck>,
}

impl Lemma1Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, identity: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.identity == identity)
    }
}

fn first_witness(
    exec: Execution,
    r: usize,
    f: impl Fn(usize) -> Option<Vec<usize>> + Sync + Send,
) -> Option<Vec<usize>> {
    par::map_range(exec, r, f).into_iter().flatten().next()
}

/// Verifies the basic intersection-number identities:
///
/// 1. `k_d k_e = Σ_f p^f_{d,e} k_f`
/// 2. `p^f_{d,e} k_f = p^d_{f,e*} k_d = p^e_{d*,f} k_e`
/// 3. `|Γ_d Γ_e| ≤ gcd(k_d, k_e)`
/// 4. `Σ_e p^f_{d,e} = k_d`
/// 5. `lcm(k_d, k_e)` divides `p^f_{d,e} k_f`
/// 6. `Σ_f p^f_{d,e} p^h_{g,f} = Σ_l p^l_{g,d} p^h_{l,e}`
pub fn check_lemma1(t: &IntersectionTensor) -> Lemma1Report {
    check_lemma1_with(t, Execution::default())
}

pub fn check_lemma1_with(t: &IntersectionTensor, exec: Execution) -> Lemma1Report {
    let r = t.relation_count();
    let k = |i: usize| t.k(i) as u64;

    let w1 = first_witness(exec, r, |d| {
        (0..r).find_map(|e| {
            let rhs: u64 = t.support(d, e).iter().map(|&(f, p)| p as u64 * k(f)).sum();
            (k(d) * k(e) != rhs).then(|| vec![d, e])
        })
    });

    let w2 = first_witness(exec, r, |d| {
        for e in 0..r {
            for f in 0..r {
                let a = t.p(f, d, e) as u64 * k(f);
                let b = t.p(d, f, t.star(e)) as u64 * k(d);
                let c = t.p(e, t.star(d), f) as u64 * k(e);
                if a != b || a != c {
                    return Some(vec![d, e, f]);
                }
            }
        }
        None
    });

    let w3 = first_witness(exec, r, |d| {
        (0..r).find_map(|e| {
            let g = t.k(d).gcd(&t.k(e)) as usize;
            (t.support(d, e).len() > g).then(|| vec![d, e])
        })
    });

    let w4 = first_witness(exec, r, |d| {
        (0..r).find_map(|f| {
            let s: u64 = (0..r).map(|e| t.p(f, d, e) as u64).sum();
            (s != k(d)).then(|| vec![d, f])
        })
    });

    let w5 = first_witness(exec, r, |d| {
        for e in 0..r {
            if t.k(d) == 0 || t.k(e) == 0 {
                return Some(vec![d, e]);
            }
            let l = k(d).lcm(&k(e));
            for f in 0..r {
                let v = t.p(f, d, e) as u64 * k(f);
                if !v.is_multiple_of(l) {
                    return Some(vec![d, e, f]);
                }
            }
        }
        None
    });

    let w6 = first_witness(exec, r, |d| {
        let collect = |pairs: &mut Vec<(usize, u64)>| {
            pairs.sort_unstable();
            let mut out: Vec<(usize, u64)> = Vec::with_capacity(pairs.len());
            for &(h, v) in pairs.iter() {
                match out.last_mut() {
                    Some(last) if last.0 == h => last.1 += v,
                    _ => out.push((h, v)),
                }
            }
            out
        };
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for e in 0..r {
            for g in 0..r {
                lhs.clear();
                rhs.clear();
                for &(f, pf) in t.support(d, e) {
                    for &(h, ph) in t.support(g, f) {
                        lhs.push((h, pf as u64 * ph as u64));
                    }
                }
                for &(l, pl) in t.support(g, d) {
                    for &(h, ph) in t.support(l, e) {
                        rhs.push((h, pl as u64 * ph as u64));
                    }
                }
                let (a, b) = (collect(&mut lhs), collect(&mut rhs));
                if a != b {
                    let h = a
                        .iter()
                        .zip(&b)
                        .find(|(x, y)| x != y)
                        .map_or_else(|| a.get(b.len()).or(b.get(a.len())).map_or(0, |x| x.0), |(x, _)| x.0);
                    return Some(vec![d, e, g, h]);
                }
            }
        }
        None
    });

    let checks = [("i", w1), ("ii", w2), ("iii", w3), ("iv", w4), ("v", w5), ("vi", w6)]
        .into_iter()
        .map(|(identity, witness)| IdentityCheck {
            identity,
            passed: witness.is_none(),
            witness,
        })
        .collect();
    Lemma1Report { checks }
}
