//! The ten quasi-thin Cayley families, their parameter rules, enumeration up
//! to a vertex bound, and closed-form two-way distances for families iv to x.

use std::fmt;
use std::str::FromStr;

use num_integer::{gcd, Integer};
use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, TwoWayDistance};
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GroupElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyId {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
    Vii,
    Viii,
    Ix,
    X,
}

impl FamilyId {
    pub const ALL: [FamilyId; 10] = [
        FamilyId::I,
        FamilyId::Ii,
        FamilyId::Iii,
        FamilyId::Iv,
        FamilyId::V,
        FamilyId::Vi,
        FamilyId::Vii,
        FamilyId::Viii,
        FamilyId::Ix,
        FamilyId::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::I => "i",
            FamilyId::Ii => "ii",
            FamilyId::Iii => "iii",
            FamilyId::Iv => "iv",
            FamilyId::V => "v",
            FamilyId::Vi => "vi",
            FamilyId::Vii => "vii",
            FamilyId::Viii => "viii",
            FamilyId::Ix => "ix",
            FamilyId::X => "x",
        }
    }

    /// Which of `p`, `q`, `n`, `i` the family takes.
    fn params(self) -> &'static [char] {
        match self {
            FamilyId::I | FamilyId::Iii => &[],
            FamilyId::Ii => &['p', 'i'],
            FamilyId::Iv | FamilyId::Vi | FamilyId::Vii => &['q', 'i'],
            FamilyId::V => &['q'],
            FamilyId::Viii | FamilyId::Ix | FamilyId::X => &['q', 'n'],
        }
    }

    /// Families with a closed-form distance table.
    pub fn has_distance_formula(self) -> bool {
        self >= FamilyId::Iv
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Structural(format!("unknown family id {s:?}")))
    }
}

/// A family with its parameters. Unused parameters are `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<u32>,
}

impl FamilySpec {
    fn bare(family: FamilyId) -> Self {
        FamilySpec {
            family,
            p: None,
            q: None,
            n: None,
            i: None,
        }
    }

    pub fn i() -> Self {
        Self::bare(FamilyId::I)
    }
    pub fn ii(p: u32, i: u32) -> Self {
        FamilySpec {
            p: Some(p),
            i: Some(i),
            ..Self::bare(FamilyId::Ii)
        }
    }
    pub fn iii() -> Self {
        Self::bare(FamilyId::Iii)
    }
    pub fn iv(q: u32, i: u32) -> Self {
        Self::qi(FamilyId::Iv, q, i)
    }
    pub fn v(q: u32) -> Self {
        FamilySpec {
            q: Some(q),
            ..Self::bare(FamilyId::V)
        }
    }
    pub fn vi(q: u32, i: u32) -> Self {
        Self::qi(FamilyId::Vi, q, i)
    }
    pub fn vii(q: u32, i: u32) -> Self {
        Self::qi(FamilyId::Vii, q, i)
    }
    pub fn viii(q: u32, n: u32) -> Self {
        Self::qn(FamilyId::Viii, q, n)
    }
    pub fn ix(q: u32, n: u32) -> Self {
        Self::qn(FamilyId::Ix, q, n)
    }
    pub fn x(q: u32, n: u32) -> Self {
        Self::qn(FamilyId::X, q, n)
    }

    fn qi(family: FamilyId, q: u32, i: u32) -> Self {
        FamilySpec {
            q: Some(q),
            i: Some(i),
            ..Self::bare(family)
        }
    }

    fn qn(family: FamilyId, q: u32, n: u32) -> Self {
        FamilySpec {
            q: Some(q),
            n: Some(n),
            ..Self::bare(family)
        }
    }

    fn get(&self, key: char) -> Option<u32> {
        match key {
            'p' => self.p,
            'q' => self.q,
            'n' => self.n,
            'i' => self.i,
            _ => None,
        }
    }

    /// `c = n / gcd(q, n)`, for families viii to x.
    pub fn c(&self) -> Option<u32> {
        Some(self.n? / gcd(self.q?, self.n?))
    }

    /// `t = q / gcd(q, n)`, for families viii to x.
    pub fn t(&self) -> Option<u32> {
        Some(self.q? / gcd(self.q?, self.n?))
    }

    /// Every violated parameter rule, empty when the spec is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let wanted = self.family.params();
        for key in ['p', 'q', 'n', 'i'] {
            match (wanted.contains(&key), self.get(key)) {
                (true, None) => out.push(format!("missing parameter {key}")),
                (false, Some(_)) => out.push(format!("unexpected parameter {key}")),
                _ => {}
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut check = |ok: bool, rule: &str| {
            if !ok {
                out.push(rule.to_string());
            }
        };
        if let Some(i) = self.i {
            check(i <= 1, "i∈{0,1}");
        }
        let i = self.i.unwrap_or(0);
        match self.family {
            FamilyId::I | FamilyId::Iii => {}
            FamilyId::Ii => {
                let p = self.p.unwrap_or(0);
                check(p >= 2, "p≥2");
                check(p + i != 2, "p≠2−i");
            }
            FamilyId::Iv => {
                let q = self.q.unwrap_or(0);
                check(q >= 3, "q≥3");
                check(q != 3 + i, "q≠3+i");
            }
            FamilyId::V => check(self.q.unwrap_or(0) >= 3, "q≥3"),
            FamilyId::Vi | FamilyId::Vii => {
                let q = self.q.unwrap_or(0);
                check(q >= 3, "q≥3");
                check(q != 3 && q != 3 + i, "q∉{3,3+i}");
            }
            FamilyId::Viii | FamilyId::Ix | FamilyId::X => {
                let (q, n) = (self.q.unwrap_or(0), self.n.unwrap_or(0));
                check(q >= 3, "q≥3");
                check(n >= 3, "n≥3");
                let in_range = q >= 3 && n >= 3 && n <= q - (q + 1) % 2;
                check(n <= q.saturating_sub((q + 1) % 2), "n≤q−(1+(−1)^q)/2");
                // Only the parameter halved in the connection set must be odd.
                if in_range && self.family == FamilyId::Ix {
                    check(self.c().unwrap_or(0) % 2 == 1, "c odd");
                }
                if in_range && self.family == FamilyId::X {
                    check(self.t().unwrap_or(0) % 2 == 1, "t odd");
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidFamily(v))
        }
    }

    /// Number of vertices of the constructed digraph, for a valid spec.
    pub fn order(&self) -> usize {
        let (p, q, n) = (
            self.p.unwrap_or(0) as usize,
            self.q.unwrap_or(0) as usize,
            self.n.unwrap_or(0) as usize,
        );
        match self.family {
            FamilyId::I => 8,
            FamilyId::Ii => 4 * p,
            FamilyId::Iii => 16,
            FamilyId::Iv | FamilyId::V => 4 * q,
            FamilyId::Vi | FamilyId::Vii => 8 * q,
            FamilyId::Viii | FamilyId::Ix | FamilyId::X => 2 * q * n,
        }
    }

    /// Group moduli and connection set, with coordinates before reduction.
    fn raw(&self) -> Result<(Vec<usize>, Vec<Vec<i64>>)> {
        let p = self.p.unwrap_or(0) as i64;
        let q = self.q.unwrap_or(0) as i64;
        let n = self.n.unwrap_or(0) as i64;
        let i = self.i.unwrap_or(0) as i64;
        let half = |x: i64| -> Result<i64> {
            if x % 2 != 0 {
                return Err(Error::Contract(format!("{x}/2 is not an integer")));
            }
            Ok(x / 2)
        };
        let m = |v: &[i64]| v.iter().map(|&x| x as usize).collect::<Vec<_>>();
        Ok(match self.family {
            FamilyId::I => (vec![8], vec![vec![1], vec![2], vec![3], vec![6]]),
            FamilyId::Ii => (
                m(&[4 * p]),
                vec![vec![1], vec![2], vec![2 * p + i], vec![2 * p + 1], vec![2 * p + 2]],
            ),
            FamilyId::Iii => (vec![4, 4], vec![vec![0, 1], vec![1, 0], vec![2, 0], vec![0, 2]]),
            FamilyId::Iv => (m(&[q, 4]), vec![vec![0, 1], vec![1, 0], vec![1, 2], vec![0, 2 + i]]),
            FamilyId::V => (m(&[2 * q, 2]), vec![vec![0, 1], vec![1, 0], vec![2, 0], vec![1, 1]]),
            FamilyId::Vi => (
                m(&[4 * q, 2]),
                vec![
                    vec![0, 1],
                    vec![1, 0],
                    vec![2, 0],
                    vec![2 * q + 1, 0],
                    vec![2 * q + 2, 0],
                    vec![2 * q * i, 1],
                ],
            ),
            FamilyId::Vii => (
                m(&[2 * q, 4]),
                vec![
                    vec![0, 1],
                    vec![1, 0],
                    vec![1, 2],
                    vec![0, 2 - i],
                    vec![2, 0],
                    vec![2, 2],
                ],
            ),
            FamilyId::Viii => (m(&[2 * q, n]), vec![vec![0, 1], vec![1, 0], vec![2, 0], vec![0, -1]]),
            FamilyId::Ix => {
                let c = self.c().unwrap_or(0) as i64;
                (
                    m(&[2 * q, n]),
                    vec![
                        vec![0, 1],
                        vec![1, half(c + 1)?],
                        vec![1, half(c - 1)?],
                        vec![2, c],
                        vec![0, -1],
                    ],
                )
            }
            FamilyId::X => {
                let t = self.t().unwrap_or(0) as i64;
                (
                    m(&[2 * n, q]),
                    vec![
                        vec![0, 1],
                        vec![1, half(t + 1)?],
                        vec![-1, half(1 - t)?],
                        vec![2, t],
                        vec![-2, -t],
                    ],
                )
            }
        })
    }

    /// The group and the connection set (ascending, duplicates collapsed).
    pub fn cayley_data(&self) -> Result<(AbelianGroup, Vec<GroupElement>)> {
        self.validate()?;
        let (moduli, raw) = self.raw()?;
        let group = AbelianGroup::new(moduli)?;
        let mut set = raw.iter().map(|c| group.element(c)).collect::<Result<Vec<_>>>()?;
        set.sort_by_key(|g| group.index_of(g).unwrap_or(usize::MAX));
        set.dedup();
        Ok((group, set))
    }

    pub fn construct(&self) -> Result<FamilyInstance> {
        let (group, set) = self.cayley_data()?;
        let digraph = Digraph::from_cayley(&group, &set)?;
        Ok(FamilyInstance {
            spec: *self,
            group,
            set,
            digraph,
        })
    }
}

impl fmt::Display for FamilySpec {
    /// `ix(q=9,n=3)`, `ii(p=3,i=0)`, `i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        let parts: Vec<String> = ['p', 'q', 'n', 'i']
            .into_iter()
            .filter_map(|k| self.get(k).map(|v| format!("{k}={v}")))
            .collect();
        if !parts.is_empty() {
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    /// Parses the text form. Parameter rules are not checked here.
    fn from_str(s: &str) -> Result<Self> {
        let (head, rest, rest_at) = match s.find('(') {
            Some(open) => (&s[..open], Some(&s[open + 1..]), open + 1),
            None => (s, None, s.len()),
        };
        let head = head.trim();
        if head.is_empty() {
            return Err(Error::parse(0, "missing family id"));
        }
        let mut spec = FamilySpec::bare(head.parse()?);
        let Some(rest) = rest else {
            return Ok(spec);
        };
        let Some(close) = rest.find(')') else {
            return Err(Error::parse(s.len(), "missing ')'"));
        };
        if !rest[close + 1..].trim().is_empty() {
            return Err(Error::parse(rest_at + close + 1, "trailing text after ')'"));
        }
        let mut col = rest_at;
        for item in rest[..close].split(',') {
            let at = col;
            col += item.len() + 1;
            if item.trim().is_empty() {
                continue;
            }
            let Some((key, value)) = item.split_once('=') else {
                return Err(Error::parse(at, format!("expected key=value, found {:?}", item.trim())));
            };
            let value: u32 = value.trim().parse().map_err(|_| {
                Error::parse(
                    at + key.len() + 1,
                    format!("{:?} is not a nonnegative integer", value.trim()),
                )
            })?;
            let slot = match key.trim() {
                "p" => &mut spec.p,
                "q" => &mut spec.q,
                "n" => &mut spec.n,
                "i" => &mut spec.i,
                other => return Err(Error::parse(at, format!("unknown parameter {other:?}"))),
            };
            if slot.replace(value).is_some() {
                return Err(Error::parse(at, format!("parameter {} given twice", key.trim())));
            }
        }
        Ok(spec)
    }
}

/// A constructed family member.
#[derive(Clone, Debug)]
pub struct FamilyInstance {
    pub spec: FamilySpec,
    pub group: AbelianGroup,
    pub set: Vec<GroupElement>,
    pub digraph: Digraph,
}

/// Every valid spec whose digraph has at most `max_vertices` vertices, in
/// family order and then by parameters.
pub fn enumerate_instances(max_vertices: usize) -> Vec<FamilySpec> {
    let mut out = Vec::new();
    let mut push = |s: FamilySpec| {
        if s.is_valid() && s.order() <= max_vertices {
            out.push(s);
        }
    };
    let bound = max_vertices as u32;
    push(FamilySpec::i());
    for i in 0..2 {
        for p in 2..=bound / 4 {
            push(FamilySpec::ii(p, i));
        }
    }
    push(FamilySpec::iii());
    for i in 0..2 {
        for q in 3..=bound / 4 {
            push(FamilySpec::iv(q, i));
        }
    }
    for q in 3..=bound / 4 {
        push(FamilySpec::v(q));
    }
    for make in [FamilySpec::vi as fn(u32, u32) -> FamilySpec, FamilySpec::vii] {
        for i in 0..2 {
            for q in 3..=bound / 8 {
                push(make(q, i));
            }
        }
    }
    for make in [
        FamilySpec::viii as fn(u32, u32) -> FamilySpec,
        FamilySpec::ix,
        FamilySpec::x,
    ] {
        for q in 3..=bound / 6 {
            for n in 3..=q {
                push(make(q, n));
            }
        }
    }
    out
}

/// A row of the closed form: its condition and its lazily evaluated value.
type Row<'a> = (bool, Box<dyn Fn() -> (i64, i64) + 'a>);

fn beta(x: i64) -> i64 {
    x & 1
}

/// Exact `x / 2` for even `x`.
fn half(x: i64) -> i64 {
    debug_assert!(x % 2 == 0, "{x} is odd");
    x / 2
}

fn ceil_half(x: i64) -> i64 {
    Integer::div_ceil(&x, &2)
}

/// The closed-form two-way distance from the identity to `g`, for families
/// iv to x.
///
/// Every row whose condition holds is evaluated; anything other than
/// exactly one matching row is a consistency error. For family x the
/// residue `u_{a,b}` is taken in `[0, 2q)`.
pub fn table1_distance(spec: &FamilySpec, g: &GroupElement) -> Result<TwoWayDistance> {
    if !spec.family.has_distance_formula() {
        return Err(Error::UnsupportedFamily(spec.family.to_string()));
    }
    spec.validate()?;
    let (moduli, _) = spec.raw()?;
    if g.coords().len() != 2 || g.coords().iter().zip(&moduli).any(|(&x, &m)| x >= m) {
        return Err(Error::Domain(format!(
            "{g} is not an element of Z{}xZ{}",
            moduli[0], moduli[1]
        )));
    }
    if g.is_identity() {
        return Err(Error::Domain("closed-form distances exclude the identity".into()));
    }
    let (a, b) = (g.coords()[0] as i64, g.coords()[1] as i64);
    let q = spec.q.unwrap_or(0) as i64;
    let n = spec.n.unwrap_or(0) as i64;
    let i = spec.i.unwrap_or(0) as i64;
    let sign = |x: i64| if x % 2 == 0 { 1 } else { -1 };

    let rows: Vec<Row> = match spec.family {
        FamilyId::Iv => vec![
            (a != 0, Box::new(|| (beta(b) + a, q + beta(b) - a))),
            (
                a == 0,
                Box::new(|| {
                    (
                        ceil_half(b) + sign(b) * ceil_half(b - 1) * i,
                        ceil_half(4 - b) + sign(b) * ceil_half(3 - b) * i,
                    )
                }),
            ),
        ],
        FamilyId::V => vec![
            (a % 2 == 1, Box::new(|| (half(a + 1), q - half(a - 1)))),
            ((a, b) != (0, 1) && a % 2 == 0, Box::new(|| (b + a / 2, q + b - a / 2))),
            ((a, b) == (0, 1), Box::new(|| (1, 1))),
        ],
        FamilyId::Vi => {
            let base = q.pow((1 - i) as u32) + b + sign(b) * i;
            vec![
                (
                    0 < a && a < 2 * q,
                    Box::new(|| (half(a + 2 * b + beta(a)), q - half(a - 2 * b - beta(a)))),
                ),
                (
                    a > 2 * q,
                    Box::new(|| (half(a + 2 * b + beta(a)) - q, 2 * q - half(a - 2 * b - beta(a)))),
                ),
                (a == 2 * q, Box::new(move || (base, base))),
                ((a, b) == (0, 1), Box::new(|| (1, 1))),
            ]
        }
        FamilyId::Vii => vec![
            (
                a != 0,
                Box::new(|| (beta(b) + half(a + beta(a)), q + beta(b) - half(a - beta(a)))),
            ),
            (
                a == 0,
                Box::new(|| {
                    (
                        ceil_half(b) + ceil_half(b - 1) * i,
                        ceil_half(4 - b) + ceil_half(3 - b) * i,
                    )
                }),
            ),
        ],
        FamilyId::Viii => {
            let (up, down) = (half(a + beta(a)), half(a - beta(a)));
            vec![
                (a == 0 && 2 * b <= n, Box::new(|| (b, b))),
                (a == 0 && 2 * b > n, Box::new(|| (n - b, n - b))),
                (a != 0 && 2 * b <= n, Box::new(move || (b + up, b + q - down))),
                (a != 0 && 2 * b > n, Box::new(move || (n - b + up, n - b + q - down))),
            ]
        }
        FamilyId::Ix => {
            let c = spec.c().unwrap_or(0) as i64;
            let v = (b - half(a * c + beta(a))).rem_euclid(n);
            let (up, down) = (half(a + beta(a)), half(a - beta(a)));
            vec![
                (a == 0 && 2 * v <= n, Box::new(move || (v, v))),
                (a == 0 && 2 * v > n, Box::new(move || (n - v, n - v))),
                (a != 0 && 2 * v <= n - beta(a), Box::new(move || (v + up, v + q - down))),
                (
                    a != 0 && 2 * v > n - beta(a),
                    Box::new(move || (n - v + down, n - v + q - up)),
                ),
            ]
        }
        FamilyId::X => {
            let t = spec.t().unwrap_or(0) as i64;
            let va = half(a - beta(a));
            let u = (2 * b - beta(a) * t - 2 * t * va).rem_euclid(2 * q);
            let (up, down) = (half(u + beta(u)), half(u - beta(u)));
            vec![
                (u == 0 && 2 * va <= n, Box::new(move || (va, va))),
                (u == 0 && 2 * va > n, Box::new(move || (n - va, n - va))),
                (
                    u != 0 && 2 * va <= n - beta(u),
                    Box::new(move || (va + up, va + q - down)),
                ),
                (
                    u != 0 && 2 * va > n - beta(u),
                    Box::new(move || (n - va + down, n - va + q - up)),
                ),
            ]
        }
        _ => unreachable!("families i to iii rejected above"),
    };

    let hits: Vec<(i64, i64)> = rows.into_iter().filter(|r| r.0).map(|r| (r.1)()).collect();
    match hits.as_slice() {
        [(f, b)] if *f >= 0 && *b >= 0 => Ok(TwoWayDistance::new(*f as u32, *b as u32)),
        [(f, b)] => Err(Error::Consistency(format!(
            "negative distance ({f},{b}) for {g} in {spec}"
        ))),
        _ => Err(Error::Consistency(format!(
            "{} distance rows match {g} in {spec}",
            hits.len()
        ))),
    }
}

/// One element's closed-form and breadth-first distances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table1Row {
    pub element: String,
    pub formula: TwoWayDistance,
    pub bfs: TwoWayDistance,
    pub equal: bool,
}

/// Compares the closed form with breadth-first distances for every
/// non-identity element, in element order.
pub fn table1_compare(spec: &FamilySpec) -> Result<Vec<Table1Row>> {
    if !spec.family.has_distance_formula() {
        return Err(Error::UnsupportedFamily(spec.family.to_string()));
    }
    let inst = spec.construct()?;
    let table = inst.digraph.distance_table()?;
    inst.group
        .elements()
        .enumerate()
        .skip(1)
        .map(|(idx, g)| {
            let formula = table1_distance(spec, &g)?;
            let bfs = table.two_way(0, idx);
            Ok(Table1Row {
                element: g.to_string(),
                formula,
                bfs,
                equal: formula == bfs,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> FamilySpec {
        text.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        for text in [
            "i",
            "ii(p=3,i=0)",
            "iii",
            "iv(q=5,i=1)",
            "v(q=3)",
            "ix(q=9,n=3)",
            "x(q=9,n=3)",
        ] {
            assert_eq!(s(text).to_string(), text);
        }
        assert_eq!(s(" IX ( q = 9 , n = 3 ) "), FamilySpec::ix(9, 3));
        assert!(matches!("xi".parse::<FamilySpec>(), Err(Error::Structural(_))));
        assert!(matches!("ii(p=x)".parse::<FamilySpec>(), Err(Error::Parse { .. })));
        assert!(matches!("ii(p=2".parse::<FamilySpec>(), Err(Error::Parse { .. })));
        assert!(matches!("ii(p=2,p=3)".parse::<FamilySpec>(), Err(Error::Parse { .. })));
        let json = serde_json::to_string(&FamilySpec::ii(3, 0)).unwrap();
        assert_eq!(json, r#"{"family":"ii","p":3,"i":0}"#);
        assert_eq!(serde_json::from_str::<FamilySpec>(&json).unwrap(), FamilySpec::ii(3, 0));
    }

    #[test]
    fn validation() {
        assert_eq!(FamilySpec::ii(2, 0).violations(), ["p≠2−i"]);
        assert!(FamilySpec::viii(5, 4).is_valid());
        assert_eq!(FamilySpec::iv(3, 0).violations(), ["q≠3+i"]);
        assert_eq!(FamilySpec::iv(4, 1).violations(), ["q≠3+i"]);
        assert_eq!(FamilySpec::viii(4, 4).violations(), ["n≤q−(1+(−1)^q)/2"]);
        assert_eq!(FamilySpec::vi(4, 1).violations(), ["q∉{3,3+i}"]);
        assert!(FamilySpec::ix(9, 3).is_valid());
        assert_eq!(FamilySpec::ix(6, 4).violations(), ["c odd"]);
        assert!(FamilySpec::x(6, 4).is_valid());
        assert!(FamilySpec::ix(4, 3).is_valid());
        assert_eq!(FamilySpec::x(4, 3).violations(), ["t odd"]);
        assert_eq!(s("v").violations(), ["missing parameter q"]);
        assert_eq!(s("i(q=3)").violations(), ["unexpected parameter q"]);
        assert!(matches!(FamilySpec::ii(2, 0).construct(), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn constructions() {
        let i = FamilySpec::i().construct().unwrap();
        assert_eq!(i.digraph.vertex_count(), 8);
        assert_eq!(i.set.len(), 4);

        let ii = FamilySpec::ii(2, 1).construct().unwrap();
        let g = AbelianGroup::cyclic(8).unwrap();
        assert_eq!(ii.set, g.parse_set("1,2,5,6").unwrap());

        let vi = FamilySpec::vi(4, 0).construct().unwrap();
        assert_eq!(vi.group.to_string(), "Z16xZ2");
        assert_eq!(vi.set, vi.group.parse_set("(0,1),(1,0),(2,0),(9,0),(10,0)").unwrap());
        assert!((0..32).all(|v| vi.digraph.out_neighbors(v).len() == 5));

        let x = FamilySpec::x(9, 3).construct().unwrap();
        assert_eq!(x.group.to_string(), "Z6xZ9");
        assert_eq!(x.digraph.vertex_count(), 54);
    }

    #[test]
    fn enumeration() {
        assert!(enumerate_instances(7).is_empty());
        let eight = enumerate_instances(8);
        assert_eq!(eight, [FamilySpec::i(), FamilySpec::ii(2, 1)]);
        let all = enumerate_instances(48);
        assert!(all.iter().all(|s| s.is_valid() && s.order() <= 48));
        assert!(all.contains(&FamilySpec::vi(4, 0)));
        assert!(all.contains(&FamilySpec::viii(4, 3)));
        assert!(!all.contains(&FamilySpec::vi(4, 1)));
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
    }

    #[test]
    fn distance_rows() {
        let viii = FamilySpec::viii(3, 3);
        let g: AbelianGroup = "Z6xZ3".parse().unwrap();
        let d = |t: &str| table1_distance(&viii, &g.parse_element(t).unwrap()).unwrap();
        assert_eq!(d("(0,1)"), TwoWayDistance::new(1, 1));
        assert_eq!(d("(1,0)"), TwoWayDistance::new(1, 3));
        assert!(matches!(table1_distance(&viii, &g.identity()), Err(Error::Domain(_))));
        assert!(matches!(
            table1_distance(&FamilySpec::i(), &g.identity()),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn distance_rows_match_bfs_on_examples() {
        for spec in [
            FamilySpec::iv(4, 0),
            FamilySpec::iv(5, 1),
            FamilySpec::iv(5, 0),
            FamilySpec::viii(3, 3),
            FamilySpec::x(9, 3),
            FamilySpec::ix(9, 3),
            FamilySpec::vi(4, 0),
            FamilySpec::vii(5, 1),
        ] {
            let rows = table1_compare(&spec).unwrap();
            assert_eq!(rows.len(), spec.order() - 1);
            assert!(rows.iter().all(|r| r.equal), "{spec}");
        }
        assert_eq!(table1_compare(&FamilySpec::viii(3, 3)).unwrap().len(), 17);
    }
    /// Row x with `u_{a,b}` reduced modulo `q` into `[0, q)`, as the rows are
    /// sometimes printed. Returns `None` unless exactly one row matches.
    fn row_x_mod_q(spec: &FamilySpec, a: i64, b: i64) -> Option<(i64, i64)> {
        let (q, n, t) = (spec.q? as i64, spec.n? as i64, spec.t()? as i64);
        let va = (a - beta(a)) / 2;
        let u = (2 * b - beta(a) * t - 2 * t * va).rem_euclid(q);
        let (up, down) = ((u + beta(u)) / 2, (u - beta(u)) / 2);
        let rows = [
            (u == 0 && 2 * va <= n, (va, va)),
            (u == 0 && 2 * va > n, (n - va, n - va)),
            (u != 0 && 2 * va <= n - beta(u), (va + up, va + q - down)),
            (u != 0 && 2 * va > n - beta(u), (n - va + down, n - va + q - up)),
        ];
        let hits: Vec<_> = rows.iter().filter(|r| r.0).map(|r| r.1).collect();
        (hits.len() == 1).then(|| hits[0])
    }

    #[test]
    fn row_x_needs_residues_modulo_2q() {
        let spec = FamilySpec::x(9, 3);
        let inst = spec.construct().unwrap();
        let table = inst.digraph.distance_table().unwrap();
        let mut disagreements = 0;
        for (idx, g) in inst.group.elements().enumerate().skip(1) {
            let (a, b) = (g.coords()[0] as i64, g.coords()[1] as i64);
            let bfs = table.two_way(0, idx);
            assert_eq!(table1_distance(&spec, &g).unwrap(), bfs);
            let printed = row_x_mod_q(&spec, a, b);
            if printed != Some((bfs.forward as i64, bfs.backward as i64)) {
                disagreements += 1;
            }
        }
        assert!(disagreements > 0);
    }
}
