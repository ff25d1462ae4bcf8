//! Finite abelian groups presented as products of cyclic factors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Z_{n1} x ... x Z_{nk}`, with the factor order kept exactly as given.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AbelianGroup {
    moduli: Vec<usize>,
}

/// An element of an [`AbelianGroup`], one canonical residue per factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<usize>,
}

impl GroupElement {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.coords.as_slice() {
            [c] => write!(f, "{c}"),
            cs => {
                f.write_str("(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl TryFrom<Vec<usize>> for AbelianGroup {
    type Error = Error;

    fn try_from(moduli: Vec<usize>) -> Result<Self> {
        AbelianGroup::new(moduli)
    }
}

impl From<AbelianGroup> for Vec<usize> {
    fn from(g: AbelianGroup) -> Self {
        g.moduli
    }
}

impl AbelianGroup {
    pub fn new(moduli: Vec<usize>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::Structural("a group needs at least one cyclic factor".into()));
        }
        if let Some(pos) = moduli.iter().position(|&m| m == 0) {
            return Err(Error::Structural(format!("factor {pos} has modulus 0")));
        }
        Ok(AbelianGroup { moduli })
    }

    /// The cyclic group `Z_n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.moduli.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.moduli.len()],
        }
    }

    /// Builds an element from arbitrary integers, reducing each coordinate to
    /// its minimum nonnegative residue.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        self.check_len(coords.len())?;
        Ok(GroupElement {
            coords: coords
                .iter()
                .zip(&self.moduli)
                .map(|(&c, &m)| c.rem_euclid(m as i64) as usize)
                .collect(),
        })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.moduli.len() {
            return Err(Error::Structural(format!(
                "element has {len} coordinates but group {self} has {} factors",
                self.moduli.len()
            )));
        }
        Ok(())
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        self.check_len(g.coords.len())?;
        for (c, m) in g.coords.iter().zip(&self.moduli) {
            if c >= m {
                return Err(Error::Structural(format!("coordinate {c} is not reduced modulo {m}")));
            }
        }
        Ok(())
    }

    pub fn add(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        Ok(GroupElement {
            coords: g
                .coords
                .iter()
                .zip(&h.coords)
                .zip(&self.moduli)
                .map(|((a, b), m)| (a + b) % m)
                .collect(),
        })
    }

    pub fn negate(&self, g: &GroupElement) -> GroupElement {
        GroupElement {
            coords: g
                .coords
                .iter()
                .zip(&self.moduli)
                .map(|(&a, &m)| (m - a % m) % m)
                .collect(),
        }
    }

    /// Position of `g` in the lexicographic order of coordinate vectors.
    pub fn index_of(&self, g: &GroupElement) -> Result<usize> {
        self.check(g)?;
        Ok(g.coords.iter().zip(&self.moduli).fold(0, |acc, (&c, &m)| acc * m + c))
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut coords = vec![0; self.moduli.len()];
        for (slot, &m) in coords.iter_mut().zip(&self.moduli).rev() {
            *slot = index % m;
            index /= m;
        }
        GroupElement { coords }
    }

    /// All elements in lexicographic coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order()).map(|i| self.element_at(i))
    }

    /// `table[x][y]` is the index of `x + y`, over element indices.
    pub fn addition_table(&self) -> Vec<Vec<usize>> {
        let elems: Vec<GroupElement> = self.elements().collect();
        elems
            .iter()
            .map(|x| {
                elems
                    .iter()
                    .map(|y| {
                        let s = self.add(x, y).expect("elements of the same group");
                        self.index_of(&s).expect("reduced element")
                    })
                    .collect()
            })
            .collect()
    }

    /// `table[x]` is the index of `-x`.
    pub fn negation_table(&self) -> Vec<usize> {
        self.elements()
            .map(|x| self.index_of(&self.negate(&x)).expect("reduced element"))
            .collect()
    }

    /// Parses an element written as `3`, `-1` or `(5,2)`.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let ints = parse_int_tuple(text, 0)?;
        self.element(&ints)
    }

    /// Parses a set written as `1,2,3,6` or `(0,1),(1,0)`, optionally in braces.
    pub fn parse_set(&self, text: &str) -> Result<Vec<GroupElement>> {
        let trimmed = text.trim();
        let (body, offset) = match trimmed.strip_prefix('{') {
            Some(rest) => match rest.strip_suffix('}') {
                Some(inner) => (inner, 1),
                None => return Err(Error::parse(trimmed.len(), "missing closing '}'")),
            },
            None => (trimmed, 0),
        };
        let mut out = Vec::new();
        let mut depth = 0usize;
        let mut start = 0usize;
        for (i, ch) in body.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => {
                    depth = depth
                        .checked_sub(1)
                        .ok_or_else(|| Error::parse(offset + i, "unbalanced ')'"))?
                }
                ',' if depth == 0 => {
                    out.push(self.element(&parse_int_tuple(&body[start..i], offset + start)?)?);
                    start = i + 1;
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err(Error::parse(offset + body.len(), "unbalanced '('"));
        }
        if !body[start..].trim().is_empty() || !out.is_empty() {
            out.push(self.element(&parse_int_tuple(&body[start..], offset + start)?)?);
        }
        Ok(out)
    }
}

fn parse_int_tuple(text: &str, offset: usize) -> Result<Vec<i64>> {
    let lead = text.len() - text.trim_start().len();
    let t = text.trim();
    let (inner, base) = match t.strip_prefix('(') {
        Some(rest) => match rest.strip_suffix(')') {
            Some(inner) => (inner, offset + lead + 1),
            None => return Err(Error::parse(offset + lead + t.len(), "missing closing ')'")),
        },
        None => (t, offset + lead),
    };
    let mut pos = base;
    inner
        .split(',')
        .map(|part| {
            let col = pos + (part.len() - part.trim_start().len());
            pos += part.len() + 1;
            part.trim()
                .parse::<i64>()
                .map_err(|_| Error::parse(col, format!("expected an integer, found {:?}", part.trim())))
        })
        .collect()
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.moduli.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "Z{m}")?;
        }
        Ok(())
    }
}

impl FromStr for AbelianGroup {
    type Err = Error;

    /// Accepts `Z8`, `Z6xZ3`, `z12XZ2`.
    fn from_str(s: &str) -> Result<Self> {
        let mut moduli = Vec::new();
        let mut pos = 0;
        for part in s.split(['x', 'X']) {
            let t = part.trim();
            let digits = t
                .strip_prefix('Z')
                .or_else(|| t.strip_prefix('z'))
                .ok_or_else(|| Error::parse(pos, format!("expected 'Z<n>', found {t:?}")))?;
            let m = digits
                .parse::<usize>()
                .map_err(|_| Error::parse(pos + 1, format!("bad modulus {digits:?}")))?;
            moduli.push(m);
            pos += part.len() + 1;
        }
        AbelianGroup::new(moduli)
    }
}

/// True iff `set` generates the whole group, by closing the identity under
/// addition of the given elements.
pub fn generates_group(set: &[GroupElement], group: &AbelianGroup) -> Result<bool> {
    let idx: Vec<usize> = set.iter().map(|g| group.index_of(g)).collect::<Result<_>>()?;
    let table = group.addition_table();
    let n = group.order();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &s in &idx {
            let y = table[x][s];
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    Ok(count == n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(moduli: &[usize]) -> AbelianGroup {
        AbelianGroup::new(moduli.to_vec()).unwrap()
    }

    #[test]
    fn addition_examples() {
        let g = z(&[8]);
        let s = g.add(&g.element(&[3]).unwrap(), &g.element(&[6]).unwrap()).unwrap();
        assert_eq!(s, g.element(&[1]).unwrap());

        let g = z(&[6, 3]);
        let s = g
            .add(&g.element(&[5, 2]).unwrap(), &g.element(&[1, 1]).unwrap())
            .unwrap();
        assert!(s.is_identity());

        let x = g.element(&[4, 1]).unwrap();
        assert_eq!(g.add(&x, &g.identity()).unwrap(), x);
    }

    #[test]
    fn add_rejects_mismatched_arity() {
        let g = z(&[6, 3]);
        let bad = z(&[6]).element(&[1]).unwrap();
        assert!(matches!(g.add(&bad, &g.identity()), Err(Error::Structural(_))));
    }

    #[test]
    fn negation_examples() {
        let g = z(&[8]);
        assert_eq!(g.negate(&g.element(&[1]).unwrap()), g.element(&[7]).unwrap());
        let g = z(&[6, 3]);
        assert_eq!(g.negate(&g.element(&[0, 1]).unwrap()), g.element(&[0, 2]).unwrap());
        assert!(g.negate(&g.identity()).is_identity());
        assert_eq!(g.element(&[0, -1]).unwrap(), g.element(&[0, 2]).unwrap());
    }

    #[test]
    fn generation_examples() {
        let g = z(&[8]);
        let s = g.parse_set("1,2,3,6").unwrap();
        assert!(generates_group(&s, &g).unwrap());
        assert!(!generates_group(&g.parse_set("2").unwrap(), &g).unwrap());
        let g = z(&[4, 4]);
        assert!(!generates_group(&g.parse_set("(1,0)").unwrap(), &g).unwrap());
        assert!(generates_group(&g.parse_set("(1,0),(0,1)").unwrap(), &g).unwrap());
    }

    #[test]
    fn text_formats() {
        let g: AbelianGroup = "Z6xZ3".parse().unwrap();
        assert_eq!(g.moduli(), &[6, 3]);
        assert_eq!(g.to_string(), "Z6xZ3");
        let g: AbelianGroup = "z12XZ2".parse().unwrap();
        assert_eq!(g.moduli(), &[12, 2]);
        assert!(matches!(
            "Y8".parse::<AbelianGroup>(),
            Err(Error::Parse { column: 0, .. })
        ));
        assert!(matches!(
            "Z8xZq".parse::<AbelianGroup>(),
            Err(Error::Parse { column: 4, .. })
        ));

        let g = z(&[6, 3]);
        assert_eq!(g.parse_element("(5,2)").unwrap().to_string(), "(5,2)");
        assert_eq!(z(&[8]).parse_element("3").unwrap().to_string(), "3");
        let set = g.parse_set("{(0,1), (1,0),(0,-1)}").unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set[2], g.element(&[0, 2]).unwrap());
        assert!(matches!(z(&[8]).parse_set("1,x"), Err(Error::Parse { column: 2, .. })));
    }

    #[test]
    fn indexing_is_lexicographic() {
        let g = z(&[2, 3]);
        let all: Vec<String> = g.elements().map(|e| e.to_string()).collect();
        assert_eq!(all, ["(0,0)", "(0,1)", "(0,2)", "(1,0)", "(1,1)", "(1,2)"]);
        for (i, e) in g.elements().enumerate() {
            assert_eq!(g.index_of(&e).unwrap(), i);
        }
    }

    fn orbit_closure(g: &AbelianGroup, set: &[GroupElement]) -> usize {
        // Breadth-first orbit of the identity, using only element arithmetic.
        let mut seen = vec![g.identity()];
        let mut frontier = vec![g.identity()];
        while let Some(x) = frontier.pop() {
            for s in set {
                let y = g.add(&x, s).unwrap();
                if !seen.contains(&y) {
                    seen.push(y.clone());
                    frontier.push(y);
                }
            }
        }
        seen.len()
    }

    fn group_and_elements() -> impl Strategy<Value = (AbelianGroup, Vec<Vec<i64>>)> {
        prop::collection::vec(1usize..7, 1..4).prop_flat_map(|moduli| {
            let k = moduli.len();
            (
                Just(AbelianGroup::new(moduli).unwrap()),
                prop::collection::vec(prop::collection::vec(-20i64..20, k), 1..5),
            )
        })
    }

    proptest! {
        #[test]
        fn group_axioms((g, raw) in group_and_elements()) {
            let xs: Vec<GroupElement> = raw.iter().map(|c| g.element(c).unwrap()).collect();
            let a = &xs[0];
            let b = &xs[xs.len() / 2];
            let c = &xs[xs.len() - 1];
            let ab_c = g.add(&g.add(a, b).unwrap(), c).unwrap();
            let a_bc = g.add(a, &g.add(b, c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            prop_assert_eq!(g.add(a, b).unwrap(), g.add(b, a).unwrap());
            prop_assert_eq!(&g.negate(&g.negate(a)), a);
            prop_assert!(g.add(a, &g.negate(a)).unwrap().is_identity());
        }

        #[test]
        fn generation_matches_orbit((g, raw) in group_and_elements()) {
            let xs: Vec<GroupElement> = raw.iter().map(|c| g.element(c).unwrap()).collect();
            prop_assert_eq!(generates_group(&xs, &g).unwrap(), orbit_closure(&g, &xs) == g.order());
        }
    }
}
