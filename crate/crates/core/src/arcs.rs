//! Arc types, pure and mixed arcs, configurations, the six structural cases,
//! closed subsets, `Δ` subdigraphs and quotient digraphs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use serde_json::{json, Value};

use crate::digraph::{Digraph, DistanceTable, TwoWayDistance};
use crate::error::{Error, Result};
use crate::scheme::{self, IntersectionTensor, RelationPartition};

/// Default cap on search-state expansions per arc in
/// [`is_pure_definitional`].
pub const DEFAULT_PATH_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Purity {
    Pure,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArcType {
    /// The `r` of type `(1, r)`.
    pub r: u32,
    pub purity: Purity,
    pub arcs: Vec<(usize, usize)>,
}

/// The set `K` of arc types together with their arcs and purity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArcTypeProfile {
    pub types: Vec<ArcType>,
}

impl ArcTypeProfile {
    /// The `r` values of `K = {(1,r)}`, ascending.
    pub fn k_set(&self) -> Vec<u32> {
        self.types.iter().map(|t| t.r).collect()
    }

    pub fn get(&self, r: u32) -> Option<&ArcType> {
        self.types.iter().find(|t| t.r == r)
    }
}

/// `(1, ∂(v,u))` for an arc `(u,v)`.
pub fn arc_type(digraph: &Digraph, table: &DistanceTable, u: usize, v: usize) -> Result<TwoWayDistance> {
    if u >= digraph.vertex_count() || v >= digraph.vertex_count() || !digraph.has_arc(u, v) {
        return Err(Error::Structural(format!("({u}, {v}) is not an arc")));
    }
    Ok(TwoWayDistance::new(1, table.get(v, u)))
}

fn arcs_by_type(digraph: &Digraph, table: &DistanceTable) -> BTreeMap<u32, Vec<(usize, usize)>> {
    let mut map: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for (u, v) in digraph.arcs() {
        map.entry(table.get(v, u)).or_default().push((u, v));
    }
    map
}

/// The `r` values of the arc types present, ascending.
pub fn k_set(digraph: &Digraph, table: &DistanceTable) -> Vec<u32> {
    arcs_by_type(digraph, table).into_keys().collect()
}

/// Builds the arc-type profile, deciding purity from the definition.
pub fn arc_profile(digraph: &Digraph, table: &DistanceTable, budget: u64) -> Result<ArcTypeProfile> {
    let types = arcs_by_type(digraph, table)
        .into_iter()
        .map(|(r, arcs)| {
            let verdict = is_pure_definitional(digraph, table, r + 1, budget)?;
            Ok(ArcType {
                r,
                purity: if verdict.pure { Purity::Pure } else { Purity::Mixed },
                arcs,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ArcTypeProfile { types })
}

/// A circuit through an arc of the tested type that also uses some other type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircuitWitness {
    /// `(w_0, ..., w_{q-1})`; the closing arc is `w_{q-1} -> w_0`.
    pub vertices: Vec<usize>,
    /// `r` of each arc `(w_t, w_{t+1})`, closing arc last.
    pub arc_types: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PurityVerdict {
    pub pure: bool,
    pub witness: Option<CircuitWitness>,
}

/// Decides whether `(1, q-1)` is pure by looking at every circuit of length
/// `q` through every arc `(u,v)` of that type.
///
/// Such a circuit is the arc followed by a path of length `q-1 = ∂(v,u)` back
/// to `u`, i.e. a shortest path. The search walks shortest paths from `v` to
/// `u` depth first, memoising vertices from which every remaining shortest
/// path is clean, and stops at the first arc of a different type. `budget`
/// caps the number of vertex expansions per arc.
pub fn is_pure_definitional(digraph: &Digraph, table: &DistanceTable, q: u32, budget: u64) -> Result<PurityVerdict> {
    if q < 2 {
        return Err(Error::Contract(format!("q must be at least 2, got {q}")));
    }
    let target = q - 1;
    let arcs: Vec<(usize, usize)> = digraph.arcs().filter(|&(u, v)| table.get(v, u) == target).collect();
    if arcs.is_empty() {
        return Err(Error::Contract(format!("(1,{target}) is not an arc type")));
    }
    let n = digraph.vertex_count();
    let mut clean = vec![u32::MAX; n];
    for (stamp, &(u, v)) in arcs.iter().enumerate() {
        let mut search = PathSearch {
            digraph,
            table,
            target,
            goal: u,
            clean: &mut clean,
            stamp: stamp as u32,
            expansions: 0,
            budget,
        };
        match search.find_bad_path(v) {
            Ok(None) => {}
            Ok(Some(path)) => {
                let mut vertices = vec![u];
                vertices.extend_from_slice(&path[..path.len() - 1]);
                let k = vertices.len();
                let arc_types = (0..k)
                    .map(|t| {
                        let (a, b) = (vertices[t], vertices[(t + 1) % k]);
                        table.get(b, a)
                    })
                    .collect();
                return Ok(PurityVerdict {
                    pure: false,
                    witness: Some(CircuitWitness { vertices, arc_types }),
                });
            }
            Err(()) => return Err(Error::BudgetExceeded { budget, u, v }),
        }
    }
    Ok(PurityVerdict {
        pure: true,
        witness: None,
    })
}

struct PathSearch<'a> {
    digraph: &'a Digraph,
    table: &'a DistanceTable,
    target: u32,
    goal: usize,
    /// `clean[w] == stamp` once every shortest `w -> goal` path is known clean.
    clean: &'a mut [u32],
    stamp: u32,
    expansions: u64,
    budget: u64,
}

impl PathSearch<'_> {
    /// A shortest path from `w` to the goal (inclusive) containing an arc of
    /// another type, if any.
    fn find_bad_path(&mut self, w: usize) -> std::result::Result<Option<Vec<usize>>, ()> {
        if w == self.goal || self.clean[w] == self.stamp {
            return Ok(None);
        }
        self.expansions += 1;
        if self.expansions > self.budget {
            return Err(());
        }
        let remaining = self.table.get(w, self.goal);
        for &next in self.digraph.out_neighbors(w) {
            if self.table.get(next, self.goal) + 1 != remaining {
                continue;
            }
            if self.table.get(next, w) != self.target {
                let mut path = vec![w, next];
                path.extend(self.any_shortest_path(next).into_iter().skip(1));
                return Ok(Some(path));
            }
            if let Some(rest) = self.find_bad_path(next)? {
                let mut path = vec![w];
                path.extend(rest);
                return Ok(Some(path));
            }
        }
        self.clean[w] = self.stamp;
        Ok(None)
    }

    fn any_shortest_path(&self, mut w: usize) -> Vec<usize> {
        let mut path = vec![w];
        while w != self.goal {
            let d = self.table.get(w, self.goal);
            w = *self
                .digraph
                .out_neighbors(w)
                .iter()
                .find(|&&x| self.table.get(x, self.goal) + 1 == d)
                .expect("distance decreases along some arc");
            path.push(w);
        }
        path
    }
}

fn require_commutative_quasi_thin(p: &IntersectionTensor) -> Result<()> {
    if !scheme::is_commutative(p) {
        return Err(Error::Contract("intersection numbers are not commutative".into()));
    }
    if !scheme::is_quasi_thin(p) {
        return Err(Error::Contract(format!(
            "not quasi-thin: maximum intersection number is {}",
            scheme::max_intersection_number(p)
        )));
    }
    Ok(())
}

/// True iff `p^{(1,s-1)}_{(1,q-1),(1,q-1)} ≠ 0` for some `s`, which in a
/// commutative quasi-thin weakly distance-regular digraph characterises
/// mixed arc types when `q ≥ 3`.
///
/// For `q = 2` the value is still computed but says nothing about purity:
/// `(1,1)` is always pure, while `(Γ_{1,1})²` meets `Γ_{1,1}` whenever the
/// undirected part contains triangles.
pub fn is_mixed_via_tensor(p: &IntersectionTensor, q: u32) -> Result<bool> {
    require_commutative_quasi_thin(p)?;
    mixed_unchecked(p, q)
}

fn mixed_unchecked(p: &IntersectionTensor, q: u32) -> Result<bool> {
    if q < 2 {
        return Err(Error::Contract(format!("q must be at least 2, got {q}")));
    }
    let a = p.require(TwoWayDistance::new(1, q - 1))?;
    Ok(p.support(a, a).iter().any(|&(h, _)| p.relations()[h].forward == 1))
}

/// The configuration `C_{q,h}`: `(Γ_{1,q-1})² = {Γ_{2,q-2}}` and
/// `(Γ_{1,h-1})² ⊆ Γ_{1,q-1} Γ_{q-1,1}`.
pub fn config_exists(p: &IntersectionTensor, q: u32, h: u32) -> Result<bool> {
    if q <= 2 || h <= 2 || q == h {
        return Err(Error::Contract(format!(
            "configuration needs distinct q, h > 2 (got q={q}, h={h})"
        )));
    }
    let a = p.require(TwoWayDistance::new(1, q - 1))?;
    let b = p.require(TwoWayDistance::new(1, h - 1))?;
    let Some(two) = p.index_of(TwoWayDistance::new(2, q - 2)) else {
        return Ok(false);
    };
    if scheme::relation_product(p, &[a], &[a]) != [two] {
        return Ok(false);
    }
    let span: BTreeSet<usize> = scheme::relation_product(p, &[a], &[p.star(a)]).into_iter().collect();
    Ok(scheme::relation_product(p, &[b], &[b]).iter().all(|x| span.contains(x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CaseId {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseId::C1 => "C1",
            CaseId::C2 => "C2",
            CaseId::C3 => "C3",
            CaseId::C4 => "C4",
            CaseId::C5 => "C5",
            CaseId::C6 => "C6",
            CaseId::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseVerdict {
    pub case: CaseId,
    pub q: Option<u32>,
    /// `r` values of `K`.
    pub k_set: Vec<u32>,
    pub facts: BTreeMap<String, Value>,
}

impl CaseVerdict {
    /// `{"case":..,"q":..,"K":[[1,r],..],"facts":{..}}`.
    pub fn to_json(&self) -> Value {
        json!({
            "case": self.case.to_string(),
            "q": self.q,
            "K": self.k_set.iter().map(|r| [1, *r]).collect::<Vec<_>>(),
            "facts": self.facts,
        })
    }
}

/// Matches `K` against the six structural shapes and their side conditions.
///
/// Requires a commutative quasi-thin weakly distance-regular digraph of
/// valency greater than 3. All six cases are checked; more than one match is
/// reported as an error.
pub fn classify_case(p: &IntersectionTensor) -> Result<CaseVerdict> {
    require_commutative_quasi_thin(p)?;
    if p.valency() <= 3 {
        return Err(Error::Contract(format!(
            "valency {} is not greater than 3",
            p.valency()
        )));
    }
    let k: Vec<u32> = p
        .relations()
        .iter()
        .filter(|t| t.forward == 1)
        .map(|t| t.backward)
        .collect();
    // (1,1) is always pure; the tensor criterion only speaks for q ≥ 3.
    let mut mixed = BTreeSet::new();
    for &r in k.iter().filter(|&&r| r >= 2) {
        if mixed_unchecked(p, r + 1)? {
            mixed.insert(r);
        }
    }
    let is_mixed = |q: u32| mixed.contains(&(q - 1));
    let config = |q: u32, h: u32| config_exists(p, q, h);

    let mut matches: Vec<(CaseId, u32)> = Vec::new();
    match *k.as_slice() {
        [1, 2, r] if config(r + 1, 3)? => matches.push((CaseId::C1, r + 1)),
        [3, a, b] if b == a + 1 && config(b, 4)? && is_mixed(b + 1) => matches.push((CaseId::C2, b)),
        _ => {}
    }
    if let &[1, 2, a, b] = k.as_slice() {
        if b == a + 1 && config(b, 3)? && is_mixed(b + 1) {
            matches.push((CaseId::C3, b));
        }
    }
    if let &[1, r] = k.as_slice() {
        if !is_mixed(r + 1) {
            matches.push((CaseId::C4, r + 1));
        }
    }
    if let &[a, b] = k.as_slice() {
        if b == a + 1 && is_mixed(b + 1) {
            matches.push((CaseId::C5, b));
        }
    }
    if let &[1, a, b] = k.as_slice() {
        if a >= 2 && b == a + 1 && is_mixed(b + 1) {
            matches.push((CaseId::C6, b));
        }
    }

    let mut facts = BTreeMap::new();
    facts.insert("mixed".into(), json!(mixed.iter().collect::<Vec<_>>()));
    facts.insert(
        "pure".into(),
        json!(k.iter().filter(|r| !mixed.contains(r)).collect::<Vec<_>>()),
    );
    let mut configs = Vec::new();
    for &a in &k {
        for &b in &k {
            let (q, h) = (a + 1, b + 1);
            if q > 2 && h > 2 && q != h && config(q, h)? {
                configs.push([q, h]);
            }
        }
    }
    facts.insert("configurations".into(), json!(configs));
    facts.insert(
        "arc_valencies".into(),
        json!(k
            .iter()
            .map(|&r| [r, p.k_of(TwoWayDistance::new(1, r))])
            .collect::<Vec<_>>()),
    );

    match matches.as_slice() {
        [] => Ok(CaseVerdict {
            case: CaseId::Unclassified,
            q: None,
            k_set: k,
            facts,
        }),
        [(case, q)] => Ok(CaseVerdict {
            case: *case,
            q: Some(*q),
            k_set: k,
            facts,
        }),
        many => Err(Error::Consistency(format!(
            "K = {k:?} satisfies several cases: {}",
            many.iter()
                .map(|(c, q)| format!("{c} (q={q})"))
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

/// A closed set of relations, as ascending relation indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosedSubset {
    pub relations: Vec<usize>,
    pub generators: Vec<usize>,
}

impl ClosedSubset {
    pub fn contains(&self, i: usize) -> bool {
        self.relations.binary_search(&i).is_ok()
    }
}

/// Least set containing `generators` and the diagonal with
/// `Γ_{i*} Γ_j` inside it for all members `i, j`.
pub fn closed_subset(p: &IntersectionTensor, generators: &[usize]) -> Result<ClosedSubset> {
    if generators.is_empty() {
        return Err(Error::Contract("closed subset needs at least one generator".into()));
    }
    let r = p.relation_count();
    if let Some(&bad) = generators.iter().find(|&&g| g >= r) {
        return Err(Error::Structural(format!("relation index {bad} out of range")));
    }
    let mut set: BTreeSet<usize> = generators.iter().copied().collect();
    set.insert(0);
    loop {
        let members: Vec<usize> = set.iter().copied().collect();
        let mut grew = false;
        for &i in &members {
            for &j in &members {
                for h in scheme::relation_product(p, &[p.star(i)], &[j]) {
                    grew |= set.insert(h);
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut gens = generators.to_vec();
    gens.sort_unstable();
    gens.dedup();
    Ok(ClosedSubset {
        relations: set.into_iter().collect(),
        generators: gens,
    })
}

/// Vertices of `Δ_{q_1..q_l}(x)`: everything reachable from `x` along arcs of
/// types `(1, q_i - 1)`. The forward closure is checked against the weakly
/// connected component and a mismatch is a consistency error.
pub fn delta_vertices(digraph: &Digraph, table: &DistanceTable, x: usize, qs: &[u32]) -> Result<Vec<usize>> {
    if x >= digraph.vertex_count() {
        return Err(Error::Structural(format!("vertex {x} out of range")));
    }
    let present = k_set(digraph, table);
    let mut allowed = BTreeSet::new();
    for &q in qs {
        if q < 2 || !present.contains(&(q - 1)) {
            return Err(Error::Contract(format!(
                "(1,{}) is not an arc type",
                q.saturating_sub(1)
            )));
        }
        allowed.insert(q - 1);
    }
    let keep = |u: usize, v: usize| allowed.contains(&table.get(v, u));
    let n = digraph.vertex_count();

    let mut forward = vec![false; n];
    forward[x] = true;
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        for &v in digraph.out_neighbors(u) {
            if !forward[v] && keep(u, v) {
                forward[v] = true;
                queue.push_back(v);
            }
        }
    }

    let mut undirected = vec![Vec::new(); n];
    for (u, v) in digraph.arcs().filter(|&(u, v)| keep(u, v)) {
        undirected[u].push(v);
        undirected[v].push(u);
    }
    let mut weak = vec![false; n];
    weak[x] = true;
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        for &v in &undirected[u] {
            if !weak[v] {
                weak[v] = true;
                queue.push_back(v);
            }
        }
    }
    if forward != weak {
        let extra = (0..n).find(|&v| weak[v] && !forward[v]).unwrap_or_default();
        return Err(Error::Consistency(format!(
            "forward closure of {x} misses vertex {extra} of its weak component"
        )));
    }
    Ok((0..n).filter(|&v| forward[v]).collect())
}

/// `Δ_{q_1..q_l}(x)` as a digraph on its own vertices (ascending original
/// ids), keeping only arcs of the selected types.
pub fn delta_component(digraph: &Digraph, table: &DistanceTable, x: usize, qs: &[u32]) -> Result<Digraph> {
    let vertices = delta_vertices(digraph, table, x, qs)?;
    let allowed: BTreeSet<u32> = qs.iter().map(|q| q - 1).collect();
    digraph.sub_digraph(&vertices, |u, v| allowed.contains(&table.get(v, u)))
}

/// The classes `F(x)` of a closed subset, ordered by their smallest vertex.
pub fn blocks(rel: &RelationPartition, f: &ClosedSubset) -> Result<Vec<Vec<usize>>> {
    let n = rel.vertex_count();
    let mut block_of = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        if block_of[x] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&y| f.contains(rel.type_of(x, y))).collect();
        for &y in &members {
            if block_of[y] != usize::MAX {
                return Err(Error::Consistency(format!(
                    "relations {:?} do not partition the vertices",
                    f.relations
                )));
            }
            block_of[y] = out.len();
        }
        out.push(members);
    }
    Ok(out)
}

/// `Γ/F`: one vertex per class `F(x)`, with an arc between distinct classes
/// whenever some arc of the digraph runs from one to the other.
pub fn quotient(digraph: &Digraph, rel: &RelationPartition, f: &ClosedSubset) -> Result<Digraph> {
    let classes = blocks(rel, f)?;
    let mut block_of = vec![0usize; digraph.vertex_count()];
    for (b, members) in classes.iter().enumerate() {
        for &v in members {
            block_of[v] = b;
        }
    }
    let arcs: BTreeSet<(usize, usize)> = digraph
        .arcs()
        .map(|(u, v)| (block_of[u], block_of[v]))
        .filter(|(a, b)| a != b)
        .collect();
    Digraph::new(classes.len(), arcs)
}
