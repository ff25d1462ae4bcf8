//! Simple finite digraphs, Cayley digraphs, and (two-way) distances.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GroupElement};
use crate::par::{self, Execution};

/// A finite simple digraph: no loops, no repeated arcs.
///
/// Out-neighbour lists are kept sorted so that iteration order, JSON and DOT
/// output are deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    out: Vec<Vec<usize>>,
    labels: Option<Vec<GroupElement>>,
}

impl Digraph {
    pub fn new(vertex_count: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Structural("a digraph needs at least one vertex".into()));
        }
        let mut out = vec![Vec::new(); vertex_count];
        for (u, v) in arcs {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::Structural(format!(
                    "arc ({u}, {v}) references a vertex outside 0..{vertex_count}"
                )));
            }
            if u == v {
                return Err(Error::Structural(format!("loop at vertex {u}")));
            }
            out[u].push(v);
        }
        for (u, list) in out.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Structural(format!("duplicate arc ({u}, {})", w[0])));
            }
        }
        Ok(Digraph { out, labels: None })
    }

    /// Attaches one label per vertex.
    pub fn with_labels(mut self, labels: Vec<GroupElement>) -> Result<Self> {
        if labels.len() != self.out.len() {
            return Err(Error::Structural(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.out.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// `Cay(G, S)`: vertices are the elements of `G` in lexicographic order,
    /// with an arc `x -> x + s` for every `s` in `S`.
    pub fn from_cayley(group: &AbelianGroup, set: &[GroupElement]) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::Structural("connection set is empty".into()));
        }
        let mut idx = Vec::with_capacity(set.len());
        for s in set {
            if s.is_identity() {
                return Err(Error::IdentityInConnectionSet);
            }
            let i = group.index_of(s)?;
            if idx.contains(&i) {
                return Err(Error::Structural(format!("connection set repeats element {s}")));
            }
            idx.push(i);
        }
        let table = group.addition_table();
        let n = group.order();
        let arcs = (0..n)
            .flat_map(|x| idx.iter().map(move |&s| (x, s)))
            .map(|(x, s)| (x, table[x][s]));
        Digraph::new(n, arcs)?.with_labels(group.elements().collect())
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    /// All arcs, sorted lexicographically.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
    }

    pub fn labels(&self) -> Option<&[GroupElement]> {
        self.labels.as_deref()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count()];
        for (_, v) in self.arcs() {
            deg[v] += 1;
        }
        deg
    }

    /// Reverse digraph: every arc flipped.
    pub fn reversed(&self) -> Digraph {
        let mut out = vec![Vec::new(); self.vertex_count()];
        for (u, v) in self.arcs() {
            out[v].push(u);
        }
        for list in &mut out {
            list.sort_unstable();
        }
        Digraph {
            out,
            labels: self.labels.clone(),
        }
    }

    /// Subdigraph induced on `vertices` (in the given order) keeping only the
    /// arcs accepted by `keep`. Labels are carried over.
    pub fn sub_digraph(&self, vertices: &[usize], keep: impl Fn(usize, usize) -> bool) -> Result<Digraph> {
        let mut pos = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        let arcs = vertices
            .iter()
            .flat_map(|&u| self.out[u].iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| pos[v] != usize::MAX && keep(u, v))
            .map(|(u, v)| (pos[u], pos[v]));
        let d = Digraph::new(vertices.len(), arcs)?;
        match &self.labels {
            Some(l) => d.with_labels(vertices.iter().map(|&v| l[v].clone()).collect()),
            None => Ok(d),
        }
    }

    pub fn is_strongly_connected(&self) -> bool {
        let fwd = reachable_count(self, 0);
        fwd == self.vertex_count() && reachable_count(&self.reversed(), 0) == self.vertex_count()
    }

    /// All-pairs distances by one breadth-first search per source.
    pub fn distance_table(&self) -> Result<DistanceTable> {
        self.distance_table_with(Execution::default())
    }

    pub fn distance_table_with(&self, exec: Execution) -> Result<DistanceTable> {
        let n = self.vertex_count();
        let rows = par::map_range(exec, n, |s| bfs(self, s));
        let mut dist = Vec::with_capacity(n * n);
        for (x, row) in rows.into_iter().enumerate() {
            if let Some(y) = row.iter().position(|d| d.is_none()) {
                return Err(Error::Unreachable { from: x, to: y });
            }
            dist.extend(row.into_iter().map(|d| d.unwrap_or_default()));
        }
        Ok(DistanceTable { n, dist })
    }

    /// Deterministic Graphviz text.
    pub fn export_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for v in 0..self.vertex_count() {
            let label = match &self.labels {
                Some(l) => l[v].to_string(),
                None => v.to_string(),
            };
            let _ = writeln!(s, "  {v} [label=\"{label}\"];");
        }
        for (u, v) in self.arcs() {
            let _ = writeln!(s, "  {u} -> {v};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> DigraphJson {
        DigraphJson {
            n: self.vertex_count(),
            arcs: self.arcs().map(|(u, v)| [u, v]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| l.iter().map(ToString::to_string).collect())
                .unwrap_or_default(),
        }
    }

    /// Rebuilds a digraph from its JSON mirror. Labels are re-parsed against
    /// `group` when one is supplied and dropped otherwise.
    pub fn from_json(json: &DigraphJson, group: Option<&AbelianGroup>) -> Result<Digraph> {
        let d = Digraph::new(json.n, json.arcs.iter().map(|a| (a[0], a[1])))?;
        match group {
            Some(g) if !json.labels.is_empty() => {
                let labels = json
                    .labels
                    .iter()
                    .map(|t| g.parse_element(t))
                    .collect::<Result<Vec<_>>>()?;
                d.with_labels(labels)
            }
            _ => Ok(d),
        }
    }
}

/// JSON mirror: `{"n": int, "arcs": [[u,v],...], "labels": [text,...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigraphJson {
    pub n: usize,
    pub arcs: Vec<[usize; 2]>,
    #[serde(default)]
    pub labels: Vec<String>,
}

fn reachable_count(d: &Digraph, start: usize) -> usize {
    bfs(d, start).iter().filter(|x| x.is_some()).count()
}

/// Breadth-first distances from `source`; `None` where unreachable.
pub(crate) fn bfs(d: &Digraph, source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; d.vertex_count()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or_default();
        for &v in d.out_neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// `dist[x][y]` is the length of a shortest path from `x` to `y`. Only exists
/// for strongly connected digraphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceTable {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceTable {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.dist[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    pub fn two_way(&self, x: usize, y: usize) -> TwoWayDistance {
        two_way(self, x, y)
    }
}

/// The pair `(d(x,y), d(y,x))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct TwoWayDistance {
    pub forward: u32,
    pub backward: u32,
}

impl TwoWayDistance {
    pub const ZERO: TwoWayDistance = TwoWayDistance {
        forward: 0,
        backward: 0,
    };

    pub fn new(forward: u32, backward: u32) -> Self {
        TwoWayDistance { forward, backward }
    }

    /// `(a,b) -> (b,a)`.
    pub fn transpose(self) -> Self {
        TwoWayDistance::new(self.backward, self.forward)
    }
}

impl From<[u32; 2]> for TwoWayDistance {
    fn from(p: [u32; 2]) -> Self {
        TwoWayDistance::new(p[0], p[1])
    }
}

impl From<TwoWayDistance> for [u32; 2] {
    fn from(t: TwoWayDistance) -> Self {
        [t.forward, t.backward]
    }
}

impl std::fmt::Display for TwoWayDistance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.forward, self.backward)
    }
}

pub fn two_way(table: &DistanceTable, x: usize, y: usize) -> TwoWayDistance {
    TwoWayDistance::new(table.get(x, y), table.get(y, x))
}
