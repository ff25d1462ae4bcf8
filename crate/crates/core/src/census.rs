//! Exhaustive search over abelian Cayley digraphs for commutative quasi-thin
//! weakly distance-regular digraphs of valency greater than 3, matched
//! against the family instances of the same order range.
//!
//! This only covers Cayley digraphs on abelian groups, so it is a partial
//! check of the classification: non-Cayley digraphs are never generated.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use log::info;
use serde::Serialize;

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::families::{enumerate_instances, FamilySpec};
use crate::group::{AbelianGroup, GroupElement};
use crate::iso::{are_isomorphic, canonical_form, CanonicalForm, IsoCertificate};
use crate::par::{self, Execution};
use crate::scheme;

/// Largest group order the bitmask scan supports.
pub const MAX_CENSUS_ORDER: usize = 32;

const SCOPE_NOTE: &str = "partial check: only Cayley digraphs on abelian groups are enumerated";

/// One invariant-factor presentation `Z_{d1} x ... x Z_{dk}` with
/// `d_{i+1} | d_i`, for every abelian group of order at most `max_order`.
/// Ordered by order, then by factor list descending. Order 1 gives `Z1`.
pub fn enumerate_abelian_groups(max_order: usize) -> Vec<AbelianGroup> {
    let mut out = Vec::new();
    for m in 1..=max_order {
        let mut lists = Vec::new();
        if m == 1 {
            lists.push(vec![1]);
        } else {
            invariant_factors(m, usize::MAX, &mut Vec::new(), &mut lists);
        }
        lists.sort_by(|a, b| b.cmp(a));
        out.extend(
            lists
                .into_iter()
                .map(|l| AbelianGroup::new(l).expect("nonzero factors")),
        );
    }
    out
}

fn invariant_factors(rest: usize, bound: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if rest == 1 {
        out.push(prefix.clone());
        return;
    }
    for d in (2..=rest).filter(|d| rest.is_multiple_of(*d)) {
        let divides_previous = bound == usize::MAX || bound.is_multiple_of(d);
        if !divides_previous {
            continue;
        }
        // Later factors divide `d`, so `d` must absorb every prime of `rest`.
        let mut r = rest / d;
        let mut g = num_integer::gcd(r, d);
        while g > 1 {
            while r.is_multiple_of(g) {
                r /= g;
            }
            g = num_integer::gcd(r, d);
        }
        if r != 1 {
            continue;
        }
        prefix.push(d);
        invariant_factors(rest / d, d, prefix, out);
        prefix.pop();
    }
}

#[derive(Clone, Debug)]
pub struct CensusConfig {
    pub max_order: usize,
    pub min_valency: usize,
    /// Skip connection sets that are not the smallest in their orbit under
    /// the automorphism group of the group.
    pub prune_automorphisms: bool,
    /// Wall-clock budget; when exceeded the report is flagged incomplete.
    pub budget: Option<Duration>,
    pub exec: Execution,
}

impl CensusConfig {
    pub fn new(max_order: usize) -> Self {
        CensusConfig {
            max_order,
            min_valency: 4,
            prune_automorphisms: false,
            budget: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Survivor {
    pub group: String,
    pub set: Vec<String>,
    pub class: usize,
    pub matched: Option<FamilySpec>,
    pub certificate: Option<IsoCertificate>,
}

impl Survivor {
    /// Rebuilds the Cayley digraph.
    pub fn digraph(&self) -> Result<Digraph> {
        let group: AbelianGroup = self.group.parse()?;
        let set = self
            .set
            .iter()
            .map(|s| group.parse_element(s))
            .collect::<Result<Vec<_>>>()?;
        Digraph::from_cayley(&group, &set)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusClass {
    pub order: usize,
    pub group: String,
    pub set: Vec<String>,
    pub members: usize,
    pub matched: Vec<FamilySpec>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub max_order: usize,
    pub min_valency: usize,
    pub scope: &'static str,
    /// `(group, connection set)` pairs with at least `min_valency` elements
    /// that were examined.
    pub searched: u64,
    /// Pairs skipped as non-minimal in their automorphism orbit.
    pub pruned: u64,
    pub survivors: Vec<Survivor>,
    pub unmatched: Vec<Survivor>,
    pub dedup_classes: usize,
    pub classes: Vec<CensusClass>,
    pub covered: Vec<FamilySpec>,
    pub uncovered: Vec<FamilySpec>,
    pub incomplete: bool,
}

impl CensusReport {
    /// A survivor matched no family: a potential counterexample.
    pub fn has_discrepancy(&self) -> bool {
        !self.unmatched.is_empty()
    }
}

/// Flat tables for the inner loop. Element `0` is the identity.
struct Tables {
    m: usize,
    add: Vec<u8>,
    neg: Vec<u8>,
    automorphisms: Vec<Vec<u8>>,
}

impl Tables {
    fn new(group: &AbelianGroup, with_automorphisms: bool) -> Self {
        let m = group.order();
        let add = group
            .addition_table()
            .into_iter()
            .flat_map(|row| row.into_iter().map(|x| x as u8))
            .collect();
        let neg = group.negation_table().into_iter().map(|x| x as u8).collect();
        let automorphisms = if with_automorphisms {
            automorphisms(group)
        } else {
            Vec::new()
        };
        Tables {
            m,
            add,
            neg,
            automorphisms,
        }
    }

    fn is_orbit_minimal(&self, mask: u32) -> bool {
        self.automorphisms.iter().all(|perm| {
            let mut image = 0u32;
            let mut bits = mask;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                image |= 1 << (perm[b + 1] - 1);
            }
            image >= mask
        })
    }

    /// Generation plus the exact bound that every two-way distance class
    /// from the identity has at most two elements. In a quasi-thin weakly
    /// distance-regular digraph each `k_h = p^{(0,0)}_{h,h*}` is at most 2.
    fn prefilter(&self, mask: u32) -> bool {
        let m = self.m;
        let k = mask.count_ones() as usize;
        // With |S| > m/2 every element is within distance 2, leaving at
        // most two arc types of two arcs each.
        if k > 4 && 2 * k > m {
            return false;
        }
        let mut set = [0u8; MAX_CENSUS_ORDER];
        let mut bits = mask;
        for slot in set.iter_mut().take(k) {
            *slot = bits.trailing_zeros() as u8 + 1;
            bits &= bits - 1;
        }
        let set = &set[..k];
        let mut dist = [u8::MAX; MAX_CENSUS_ORDER];
        let mut queue = [0u8; MAX_CENSUS_ORDER];
        dist[0] = 0;
        let (mut head, mut tail) = (0, 1);
        while head < tail {
            let u = queue[head] as usize;
            head += 1;
            let row = &self.add[u * m..(u + 1) * m];
            for &s in set {
                let v = row[s as usize] as usize;
                if dist[v] == u8::MAX {
                    dist[v] = dist[u] + 1;
                    queue[tail] = v as u8;
                    tail += 1;
                }
            }
        }
        if tail < m {
            return false;
        }
        let mut counts = [0u8; MAX_CENSUS_ORDER * MAX_CENSUS_ORDER];
        for g in 1..m {
            let key = dist[g] as usize * MAX_CENSUS_ORDER + dist[self.neg[g] as usize] as usize;
            counts[key] += 1;
            if counts[key] > 2 {
                return false;
            }
        }
        true
    }
}

/// Every automorphism as a permutation of element indices, found by sending
/// the standard generators to all admissible image tuples.
fn automorphisms(group: &AbelianGroup) -> Vec<Vec<u8>> {
    let m = group.order();
    let table = group.addition_table();
    let elements: Vec<GroupElement> = group.elements().collect();
    let order_divides = |g: usize, k: usize| {
        let mut x = 0;
        for _ in 0..k {
            x = table[x][g];
        }
        x == 0
    };
    let candidates: Vec<Vec<usize>> = group
        .moduli()
        .iter()
        .map(|&k| (0..m).filter(|&g| order_divides(g, k)).collect())
        .collect();
    let mut out = Vec::new();
    let mut images = vec![0usize; group.rank()];
    fn walk(level: usize, candidates: &[Vec<usize>], images: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
        if level == candidates.len() {
            visit(images);
            return;
        }
        for &g in &candidates[level] {
            images[level] = g;
            walk(level + 1, candidates, images, visit);
        }
    }
    walk(0, &candidates, &mut images, &mut |imgs| {
        let mut perm = vec![0u8; m];
        let mut seen = vec![false; m];
        for (idx, e) in elements.iter().enumerate() {
            let mut x = 0;
            for (&c, &img) in e.coords().iter().zip(imgs) {
                for _ in 0..c {
                    x = table[x][img];
                }
            }
            if seen[x] {
                return;
            }
            seen[x] = true;
            perm[idx] = x as u8;
        }
        if perm.iter().enumerate().any(|(i, &p)| i != p as usize) {
            out.push(perm);
        }
    });
    out
}

struct ChunkResult {
    searched: u64,
    pruned: u64,
    candidates: Vec<u32>,
    finished: bool,
}

const CHUNK_BITS: u32 = 16;

fn scan_group(tables: &Tables, config: &CensusConfig, start: Instant, stop: &AtomicBool) -> (u64, u64, Vec<u32>, bool) {
    let bits = (tables.m - 1) as u32;
    let total: u64 = 1 << bits;
    let chunk = 1u64 << CHUNK_BITS.min(bits);
    let chunks = total.div_ceil(chunk) as usize;
    let results = par::map_range(config.exec, chunks, |c| {
        if stop.load(Ordering::Relaxed) || config.budget.is_some_and(|b| start.elapsed() > b) {
            stop.store(true, Ordering::Relaxed);
            return ChunkResult {
                searched: 0,
                pruned: 0,
                candidates: Vec::new(),
                finished: false,
            };
        }
        let mut r = ChunkResult {
            searched: 0,
            pruned: 0,
            candidates: Vec::new(),
            finished: true,
        };
        let lo = c as u64 * chunk;
        for mask in lo..(lo + chunk).min(total) {
            let mask = mask as u32;
            if (mask.count_ones() as usize) < config.min_valency {
                continue;
            }
            r.searched += 1;
            if config.prune_automorphisms && !tables.is_orbit_minimal(mask) {
                r.pruned += 1;
                continue;
            }
            if tables.prefilter(mask) {
                r.candidates.push(mask);
            }
        }
        r
    });
    let mut searched = 0;
    let mut pruned = 0;
    let mut candidates = Vec::new();
    let mut finished = true;
    for r in results {
        searched += r.searched;
        pruned += r.pruned;
        candidates.extend(r.candidates);
        finished &= r.finished;
    }
    (searched, pruned, candidates, finished)
}

/// The full predicate chain. `None` when any predicate fails.
fn full_check(group: &AbelianGroup, set: &[GroupElement]) -> Result<Option<Digraph>> {
    let d = Digraph::from_cayley(group, set)?;
    let Ok(table) = d.distance_table_with(Execution::Sequential) else {
        return Ok(None);
    };
    let rel = scheme::compute_relations(&d, &table);
    if !scheme::check_wdrd_with(&rel, Execution::Sequential).is_wdrd {
        return Ok(None);
    }
    let p = scheme::intersection_tensor(&rel)?;
    let ok = scheme::is_commutative(&p) && scheme::is_quasi_thin(&p) && p.valency() > 3;
    Ok(ok.then_some(d))
}

pub fn run_census(config: &CensusConfig) -> Result<CensusReport> {
    if config.max_order < 8 {
        return Err(Error::Contract(format!(
            "max_order must be at least 8, got {}",
            config.max_order
        )));
    }
    if config.max_order > MAX_CENSUS_ORDER {
        return Err(Error::Contract(format!(
            "max_order {} exceeds the supported {MAX_CENSUS_ORDER}",
            config.max_order
        )));
    }
    let start = Instant::now();
    let stop = AtomicBool::new(false);
    let mut searched = 0;
    let mut pruned = 0;
    let mut incomplete = false;
    let mut found: Vec<(AbelianGroup, Vec<GroupElement>, Digraph)> = Vec::new();

    for group in enumerate_abelian_groups(config.max_order) {
        let m = group.order();
        if m <= config.min_valency || m < 2 {
            continue;
        }
        let tables = Tables::new(&group, config.prune_automorphisms);
        let (s, p, candidates, finished) = scan_group(&tables, config, start, &stop);
        searched += s;
        pruned += p;
        incomplete |= !finished;
        let checked = par::map_slice(config.exec, &candidates, |&mask| {
            let set: Vec<GroupElement> = (0..m - 1)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| group.element_at(b + 1))
                .collect();
            full_check(&group, &set).map(|d| d.map(|d| (set, d)))
        });
        let before = found.len();
        for r in checked {
            if let Some((set, d)) = r? {
                found.push((group.clone(), set, d));
            }
        }
        info!(
            "census {group}: {s} sets, {} after prefilter, {} survivors{}",
            candidates.len(),
            found.len() - before,
            if finished { "" } else { " (budget exhausted)" }
        );
        if stop.load(Ordering::Relaxed) {
            incomplete = true;
            break;
        }
    }

    let forms = par::map_slice(config.exec, &found, |(_, _, d)| canonical_form(d));
    let specs = enumerate_instances(config.max_order);
    let family_digraphs = specs
        .iter()
        .map(|s| s.construct().map(|i| i.digraph))
        .collect::<Result<Vec<_>>>()?;
    let family_forms = par::map_slice(config.exec, &family_digraphs, canonical_form);
    let mut by_form: BTreeMap<&CanonicalForm, Vec<usize>> = BTreeMap::new();
    for (i, f) in family_forms.iter().enumerate() {
        by_form.entry(f).or_default().push(i);
    }

    let mut class_of_form: BTreeMap<&CanonicalForm, usize> = BTreeMap::new();
    let mut classes: Vec<CensusClass> = Vec::new();
    let mut survivors = Vec::with_capacity(found.len());
    for ((group, set, d), form) in found.iter().zip(&forms) {
        let set_text: Vec<String> = set.iter().map(ToString::to_string).collect();
        let class = *class_of_form.entry(form).or_insert_with(|| {
            classes.push(CensusClass {
                order: group.order(),
                group: group.to_string(),
                set: set_text.clone(),
                members: 0,
                matched: by_form
                    .get(form)
                    .map_or_else(Vec::new, |ix| ix.iter().map(|&i| specs[i]).collect()),
            });
            classes.len() - 1
        });
        classes[class].members += 1;
        let (matched, certificate) = match by_form.get(form) {
            Some(ix) => {
                let cert = are_isomorphic(d, &family_digraphs[ix[0]]).ok_or_else(|| {
                    Error::Consistency(format!(
                        "canonical forms agree but no isomorphism found for {group} {set_text:?}"
                    ))
                })?;
                (Some(specs[ix[0]]), Some(cert))
            }
            None => (None, None),
        };
        survivors.push(Survivor {
            group: group.to_string(),
            set: set_text,
            class,
            matched,
            certificate,
        });
    }
    let unmatched: Vec<Survivor> = survivors.iter().filter(|s| s.matched.is_none()).cloned().collect();
    let (covered, uncovered): (Vec<usize>, Vec<usize>) =
        (0..specs.len()).partition(|&i| class_of_form.contains_key(&family_forms[i]));
    if !unmatched.is_empty() {
        log::warn!("{} census survivors match no family instance", unmatched.len());
    }
    info!(
        "census done in {:.1}s: {searched} sets, {} survivors in {} classes",
        start.elapsed().as_secs_f64(),
        survivors.len(),
        classes.len()
    );
    Ok(CensusReport {
        max_order: config.max_order,
        min_valency: config.min_valency,
        scope: SCOPE_NOTE,
        searched,
        pruned,
        dedup_classes: classes.len(),
        survivors,
        unmatched,
        classes,
        covered: covered.into_iter().map(|i| specs[i]).collect(),
        uncovered: uncovered.into_iter().map(|i| specs[i]).collect(),
        incomplete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(max: usize) -> Vec<String> {
        enumerate_abelian_groups(max).iter().map(ToString::to_string).collect()
    }

    #[test]
    fn groups() {
        assert_eq!(names(1), ["Z1"]);
        let eight = names(8);
        for g in ["Z8", "Z4xZ2", "Z2xZ2xZ2"] {
            assert!(eight.contains(&g.to_string()));
        }
        let twelve: Vec<String> = enumerate_abelian_groups(12)
            .into_iter()
            .filter(|g| g.order() == 12)
            .map(|g| g.to_string())
            .collect();
        assert_eq!(twelve, ["Z12", "Z6xZ2"]);
        let counts: Vec<usize> = (1..=16)
            .map(|m| enumerate_abelian_groups(16).iter().filter(|g| g.order() == m).count())
            .collect();
        assert_eq!(counts, [1, 1, 1, 2, 1, 1, 1, 3, 2, 1, 1, 2, 1, 1, 1, 5]);
    }

    #[test]
    fn automorphism_counts() {
        let count = |g: &str| automorphisms(&g.parse().unwrap()).len() + 1;
        assert_eq!(count("Z8"), 4);
        assert_eq!(count("Z2xZ2"), 6);
        assert_eq!(count("Z2xZ2xZ2"), 168);
        assert_eq!(count("Z4xZ2"), 8);
    }

    #[test]
    fn order_eight() {
        let r = run_census(&CensusConfig::new(8)).unwrap();
        assert!(r.unmatched.is_empty());
        assert!(r.uncovered.is_empty());
        assert_eq!(r.dedup_classes, 2);
        assert!(!r.incomplete);
        let mut config = CensusConfig::new(8);
        config.min_valency = 8;
        assert!(run_census(&config).unwrap().survivors.is_empty());
        assert!(run_census(&CensusConfig::new(7)).is_err());
    }

    #[test]
    fn survivors_rebuild() {
        let r = run_census(&CensusConfig::new(8)).unwrap();
        for s in &r.survivors {
            let d = s.digraph().unwrap();
            let cert = s.certificate.as_ref().unwrap();
            let family = s.matched.unwrap().construct().unwrap().digraph;
            assert!(crate::iso::verify_mapping(&d, &family, &cert.mapping));
        }
    }
}
