//! Minimal access structures as hypergraphs: validation, the quantum
//! condition, region decomposition, hyperstar/hypercycle/hyperpath
//! predicates, classification of 3-edge quantum hypercycles into the
//! twelve isomorphism classes, and the 83-row catalog of 7-participant
//! structures.
//!
//! A structure is a set of minimal authorized subsets (hyperedges) over a
//! participant universe. For three edges the Venn decomposition has seven
//! cells ("regions"), indexed here by a 3-bit mask whose bit `i` means
//! membership in edge `i`. Each of the twelve classes is determined by
//! which regions are occupied, up to permutation of the edges.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod catalog;

pub type Participant = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AccessError {
    #[error("edge {child} is contained in edge {parent}; not an antichain")]
    NotAntichain { child: String, parent: String },
    #[error("participant {0} appears in no edge")]
    UncoveredParticipant(Participant),
    #[error("edge is empty")]
    EmptyEdge,
    #[error("cannot parse access structure from {0:?}")]
    Parse(String),
    #[error("occupancy pattern matches none of the 12 hypercycle classes")]
    NotClassifiable,
    #[error("classification requires exactly 3 edges, got {0}")]
    WrongEdgeCount(usize),
    #[error("structure is not a quantum access structure (disjoint edges)")]
    NotQuantum,
}

/// A minimal access structure: ordered universe plus hyperedges.
///
/// Edges are kept in input order; duplicates can arise from `remove` and
/// are reported by `validate`, matching the definition of Rem(H, Z).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessStructure {
    pub universe: BTreeSet<Participant>,
    pub edges: Vec<BTreeSet<Participant>>,
}

impl AccessStructure {
    /// Build from edges; the universe is their union.
    pub fn from_edges(edges: Vec<BTreeSet<Participant>>) -> Self {
        let universe = edges.iter().flatten().copied().collect();
        AccessStructure { universe, edges }
    }

    /// Parse either the brace text form `{1234,1267,456}` (participants
    /// are single digits) or the JSON object form.
    pub fn parse(s: &str) -> Result<Self, AccessError> {
        let t = s.trim();
        if t.starts_with('{') && t.contains("universe") {
            return serde_json::from_str(t).map_err(|_| AccessError::Parse(s.into()));
        }
        let inner = t
            .strip_prefix('{')
            .and_then(|x| x.strip_suffix('}'))
            .ok_or_else(|| AccessError::Parse(s.into()))?;
        let mut edges = Vec::new();
        for part in inner.split(',') {
            let part = part.trim();
            if part.is_empty() {
                return Err(AccessError::Parse(s.into()));
            }
            let mut edge = BTreeSet::new();
            for ch in part.chars() {
                let d = ch.to_digit(10).filter(|&d| d >= 1).ok_or_else(|| AccessError::Parse(s.into()))?;
                edge.insert(d);
            }
            edges.push(edge);
        }
        Ok(AccessStructure::from_edges(edges))
    }

    /// Antichain and coverage checks from the definition of a minimal
    /// access structure.
    pub fn validate(&self) -> Result<(), AccessError> {
        for e in &self.edges {
            if e.is_empty() {
                return Err(AccessError::EmptyEdge);
            }
        }
        for (i, a) in self.edges.iter().enumerate() {
            for (j, b) in self.edges.iter().enumerate() {
                if i != j && a.is_subset(b) {
                    return Err(AccessError::NotAntichain {
                        child: edge_string(a),
                        parent: edge_string(b),
                    });
                }
            }
        }
        let covered: BTreeSet<_> = self.edges.iter().flatten().copied().collect();
        for &p in &self.universe {
            if !covered.contains(&p) {
                return Err(AccessError::UncoveredParticipant(p));
            }
        }
        Ok(())
    }

    /// Quantum condition: every two authorized sets intersect.
    pub fn is_quantum(&self) -> bool {
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                if self.edges[i].is_disjoint(&self.edges[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// A subset is authorized iff it contains some edge.
    pub fn is_authorized(&self, subset: &BTreeSet<Participant>) -> bool {
        self.edges.iter().any(|e| e.is_subset(subset))
    }

    /// Maximal unauthorized subsets: complements of the minimal hitting
    /// sets of the edge family.
    pub fn maximal_unauthorized(&self) -> Vec<BTreeSet<Participant>> {
        let universe: Vec<Participant> = self.universe.iter().copied().collect();
        let n = universe.len();
        assert!(n <= 20, "exhaustive hitting-set search kept to small universes");
        let mut hitting: Vec<BTreeSet<Participant>> = Vec::new();
        for code in 1u32..(1 << n) {
            let z: BTreeSet<Participant> = (0..n)
                .filter(|&i| code >> i & 1 == 1)
                .map(|i| universe[i])
                .collect();
            if self.edges.iter().all(|e| !e.is_disjoint(&z)) {
                hitting.push(z);
            }
        }
        let minimal: Vec<_> = hitting
            .iter()
            .filter(|z| !hitting.iter().any(|w| w.len() < z.len() && w.is_subset(z)))
            .cloned()
            .collect();
        let mut out: Vec<BTreeSet<Participant>> = minimal
            .iter()
            .map(|z| self.universe.difference(z).copied().collect())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Rem(H, Z): drop Z from the universe and intersect every edge.
    /// Now-empty edges vanish; duplicates and dominated edges remain.
    pub fn remove(&self, z: &BTreeSet<Participant>) -> AccessStructure {
        let universe: BTreeSet<_> = self.universe.difference(z).copied().collect();
        let edges: Vec<BTreeSet<Participant>> = self
            .edges
            .iter()
            .map(|e| e.difference(z).copied().collect::<BTreeSet<_>>())
            .filter(|e: &BTreeSet<Participant>| !e.is_empty())
            .collect();
        AccessStructure { universe, edges }
    }

    /// Region occupancy for a 3-edge structure (general edge counts are
    /// served by `regions`).
    pub fn region_occupancy(&self) -> RegionOccupancy {
        assert_eq!(self.edges.len(), 3, "occupancy is defined for 3 edges here");
        let mut bits = [false; 8];
        let mut members: BTreeMap<u8, BTreeSet<Participant>> = BTreeMap::new();
        for &p in &self.universe {
            let mut mask = 0u8;
            for (i, e) in self.edges.iter().enumerate() {
                if e.contains(&p) {
                    mask |= 1 << i;
                }
            }
            if mask != 0 {
                bits[mask as usize] = true;
                members.entry(mask).or_default().insert(p);
            }
        }
        RegionOccupancy { bits, members }
    }

    /// All non-empty regions of a hypergraph with any number of edges,
    /// keyed by the set of edge indices.
    pub fn regions(&self) -> BTreeMap<Vec<usize>, BTreeSet<Participant>> {
        let mut map: BTreeMap<Vec<usize>, BTreeSet<Participant>> = BTreeMap::new();
        for &p in &self.universe {
            let idx: Vec<usize> = self
                .edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.contains(&p))
                .map(|(i, _)| i)
                .collect();
            if !idx.is_empty() {
                map.entry(idx).or_default().insert(p);
            }
        }
        map
    }

    /// Hyperstar / hypercycle / hyperpath flags per the definitions,
    /// searching edge orderings where the definition requires one.
    pub fn kind_predicates(&self) -> KindFlags {
        let m = self.edges.len();
        let hyperstar = m >= 1 && {
            let mut core = self.edges[0].clone();
            for e in &self.edges[1..] {
                core = core.intersection(e).copied().collect();
            }
            !core.is_empty()
                && self.edges.iter().enumerate().all(|(i, e)| {
                    e.iter().any(|v| {
                        self.edges
                            .iter()
                            .enumerate()
                            .all(|(j, f)| j == i || !f.contains(v))
                    })
                })
        };
        let hypercycle = self.exists_ordering(|order, i, j| {
            let m = order.len();
            let adjacent = j == (i + 1) % m || i == (j + 1) % m || i == j;
            let meets = !self.edges[order[i]].is_disjoint(&self.edges[order[j]]);
            if adjacent { meets || i == j } else { !meets }
        });
        let hyperpath = m >= 2
            && self.exists_ordering(|order, i, j| {
                let adjacent = i.abs_diff(j) <= 1;
                let meets = !self.edges[order[i]].is_disjoint(&self.edges[order[j]]);
                if adjacent { meets || i == j } else { !meets }
            });
        KindFlags { hyperstar, hypercycle, hyperpath }
    }

    fn exists_ordering(&self, ok: impl Fn(&[usize], usize, usize) -> bool) -> bool {
        let m = self.edges.len();
        let mut order: Vec<usize> = (0..m).collect();
        permute(&mut order, 0, &mut |ord| {
            (0..m).all(|i| (0..m).all(|j| ok(ord, i, j)))
        })
    }

    /// Classify a validated 3-edge quantum hypercycle into its class.
    pub fn classify(&self) -> Result<HypercycleClass, AccessError> {
        if self.edges.len() != 3 {
            return Err(AccessError::WrongEdgeCount(self.edges.len()));
        }
        self.validate().map_err(|e| e)?;
        if !self.is_quantum() {
            return Err(AccessError::NotQuantum);
        }
        let occ = self.region_occupancy();
        let (canon, perm) = canonical_pattern(&occ.pattern());
        let id = ClassId::from_pattern(canon).ok_or(AccessError::NotClassifiable)?;
        // Both the structure and the template are sent to the shared
        // canonical pattern; composing the two permutations aligns each
        // occupied region with the template block living there.
        let template = id.template();
        let (_, tperm) = canonical_pattern(&template.pattern());
        let mut blocks: BTreeMap<usize, BTreeSet<Participant>> = BTreeMap::new();
        for (&mask, members) in &occ.members {
            let aligned = permute_mask(mask, &perm);
            let tmask = (1u8..8)
                .find(|&m| permute_mask(m, &tperm) == aligned)
                .expect("canonical masks are in bijection");
            let block = template
                .block_at(tmask)
                .expect("occupied region must be a template block");
            blocks.insert(block, members.clone());
        }
        let nblocks = template.block_count();
        let block_sizes: Vec<usize> =
            (1..=nblocks).map(|b| blocks.get(&b).map_or(0, |s| s.len())).collect();
        Ok(HypercycleClass { id, block_sizes, blocks })
    }
}

fn edge_string(e: &BTreeSet<Participant>) -> String {
    e.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("")
}

impl fmt::Display for AccessStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.universe.iter().all(|&p| p <= 9) {
            let body: Vec<String> = self.edges.iter().map(|e| edge_string(e)).collect();
            write!(f, "{{{}}}", body.join(","))
        } else {
            write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
        }
    }
}

fn permute(order: &mut Vec<usize>, k: usize, check: &mut impl FnMut(&[usize]) -> bool) -> bool {
    if k == order.len() {
        return check(order);
    }
    for i in k..order.len() {
        order.swap(k, i);
        if permute(order, k + 1, check) {
            order.swap(k, i);
            return true;
        }
        order.swap(k, i);
    }
    false
}

/// Occupancy of the seven Venn regions of a 3-edge hypergraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionOccupancy {
    /// Indexed by region mask 1..=7; bit i of the mask = edge i membership.
    pub bits: [bool; 8],
    pub members: BTreeMap<u8, BTreeSet<Participant>>,
}

impl RegionOccupancy {
    pub fn pattern(&self) -> [bool; 8] {
        self.bits
    }

    /// Members of the region whose edge-index set is exactly `mask`.
    pub fn region(&self, mask: u8) -> BTreeSet<Participant> {
        self.members.get(&mask).cloned().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KindFlags {
    pub hyperstar: bool,
    pub hypercycle: bool,
    pub hyperpath: bool,
}

/// One of the twelve hypercycle classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassId(u8);

impl ClassId {
    pub fn new(i: u8) -> Option<ClassId> {
        (1..=12).contains(&i).then_some(ClassId(i))
    }

    pub fn index(&self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = ClassId> {
        (1..=12).map(ClassId)
    }

    /// Region-mask -> template-block-number map defining the class.
    pub fn template(&self) -> Template {
        // Masks: bit0 = edge 1, bit1 = edge 2, bit2 = edge 3.
        const R1: u8 = 0b001;
        const R2: u8 = 0b010;
        const R3: u8 = 0b100;
        const R12: u8 = 0b011;
        const R13: u8 = 0b101;
        const R23: u8 = 0b110;
        const R123: u8 = 0b111;
        let map: &[(u8, usize)] = match self.0 {
            1 => &[(R123, 1), (R1, 2), (R2, 3), (R3, 4)],
            2 => &[(R123, 1), (R12, 2), (R3, 3), (R1, 4), (R2, 5)],
            3 => &[(R123, 1), (R12, 2), (R23, 3), (R1, 4), (R2, 5), (R3, 6)],
            4 => &[(R123, 1), (R12, 2), (R23, 3), (R1, 4), (R2, 5), (R3, 6), (R13, 7)],
            5 => &[(R12, 1), (R13, 2), (R23, 3)],
            6 => &[(R12, 1), (R13, 2), (R23, 3), (R123, 4)],
            7 => &[(R12, 1), (R13, 2), (R23, 3), (R1, 4)],
            8 => &[(R12, 1), (R13, 2), (R23, 3), (R1, 4), (R3, 5)],
            9 => &[(R12, 1), (R13, 2), (R23, 3), (R1, 4), (R3, 5), (R2, 6)],
            10 => &[(R12, 1), (R13, 2), (R23, 3), (R123, 4), (R3, 5)],
            11 => &[(R12, 1), (R13, 2), (R23, 3), (R123, 4), (R3, 5), (R2, 6)],
            12 => &[(R12, 1), (R123, 2), (R13, 3), (R2, 4), (R3, 5)],
            _ => unreachable!(),
        };
        Template { regions: map }
    }

    fn from_pattern(canon: [bool; 8]) -> Option<ClassId> {
        ClassId::all().find(|id| canonical_pattern(&id.template().pattern()).0 == canon)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}", self.0)
    }
}

/// The algebraic template of a class: which region holds which block.
#[derive(Debug, Clone)]
pub struct Template {
    regions: &'static [(u8, usize)],
}

impl Template {
    pub fn pattern(&self) -> [bool; 8] {
        let mut bits = [false; 8];
        for &(mask, _) in self.regions {
            bits[mask as usize] = true;
        }
        bits
    }

    pub fn block_at(&self, mask: u8) -> Option<usize> {
        self.regions.iter().find(|&&(m, _)| m == mask).map(|&(_, b)| b)
    }

    pub fn region_of_block(&self, block: usize) -> Option<u8> {
        self.regions.iter().find(|&&(_, b)| b == block).map(|&(m, _)| m)
    }

    pub fn block_count(&self) -> usize {
        self.regions.len()
    }

    /// Edges as sets of template block numbers, in edge-index order.
    pub fn edges(&self) -> [BTreeSet<usize>; 3] {
        let mut edges: [BTreeSet<usize>; 3] = Default::default();
        for &(mask, block) in self.regions {
            for (i, edge) in edges.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    edge.insert(block);
                }
            }
        }
        edges
    }

    /// The template as an access structure over block numbers.
    pub fn as_structure(&self) -> AccessStructure {
        let edges = self
            .edges()
            .into_iter()
            .map(|e| e.into_iter().map(|b| b as Participant).collect())
            .collect();
        AccessStructure::from_edges(edges)
    }
}

/// Classification result: class plus block decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct HypercycleClass {
    pub id: ClassId,
    /// Sizes by template block number (index 0 = block 1).
    pub block_sizes: Vec<usize>,
    /// Participants of each template block.
    pub blocks: BTreeMap<usize, BTreeSet<Participant>>,
}

/// Apply an edge permutation to a region mask: bit `i` of the result is
/// bit `perm[i]` of the input.
fn permute_mask(mask: u8, perm: &[usize; 3]) -> u8 {
    let mut out = 0u8;
    for (i, &src) in perm.iter().enumerate() {
        if mask >> src & 1 == 1 {
            out |= 1 << i;
        }
    }
    out
}

const PERMS: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Lexicographically minimal occupancy pattern over the six edge
/// permutations, together with a permutation achieving it.
pub fn canonical_pattern(bits: &[bool; 8]) -> ([bool; 8], [usize; 3]) {
    let mut best: Option<([bool; 8], [usize; 3])> = None;
    for perm in PERMS {
        let mut cand = [false; 8];
        for mask in 1u8..8 {
            if bits[mask as usize] {
                cand[permute_mask(mask, &perm) as usize] = true;
            }
        }
        let key: Vec<bool> = (1..8).map(|m| cand[m as usize]).collect();
        match &best {
            Some((b, _)) => {
                let bkey: Vec<bool> = (1..8).map(|m| b[m as usize]).collect();
                if key < bkey {
                    best = Some((cand, perm));
                }
            }
            None => best = Some((cand, perm)),
        }
    }
    best.unwrap()
}

/// Brute-force enumeration of all realizable 3-edge quantum hypercycle
/// occupancy patterns. A pattern is admissible when every edge is
/// non-empty, every pair of edges meets, and no edge is contained in
/// another (regions being occupied or not is all that matters for these).
/// Used by the acceptance suite to re-derive the count of 12 classes.
pub fn enumerate_quantum_hypercycle_patterns() -> Vec<[bool; 8]> {
    let mut canon: BTreeSet<Vec<bool>> = BTreeSet::new();
    for code in 1u16..128 {
        let mut bits = [false; 8];
        for mask in 1u8..8 {
            bits[mask as usize] = code >> (mask - 1) & 1 == 1;
        }
        let edge_nonempty =
            |i: usize| (1u8..8).any(|m| bits[m as usize] && m >> i & 1 == 1);
        if !(0..3).all(edge_nonempty) {
            continue;
        }
        let pair_meets = |i: usize, j: usize| {
            (1u8..8).any(|m| bits[m as usize] && m >> i & 1 == 1 && m >> j & 1 == 1)
        };
        if !(pair_meets(0, 1) && pair_meets(0, 2) && pair_meets(1, 2)) {
            continue;
        }
        // Edge i inside edge j iff every occupied region containing i also
        // contains j.
        let contained = |i: usize, j: usize| {
            (1u8..8).all(|m| !(bits[m as usize] && m >> i & 1 == 1) || m >> j & 1 == 1)
        };
        if (0..3).any(|i| (0..3).any(|j| i != j && contained(i, j))) {
            continue;
        }
        canon.insert(canonical_pattern(&bits).0.to_vec());
    }
    canon
        .into_iter()
        .map(|v| {
            let mut bits = [false; 8];
            bits[1..8].copy_from_slice(&v[1..8]);
            bits
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> AccessStructure {
        AccessStructure::parse(text).unwrap()
    }

    #[test]
    fn validate_flags_subset_edges() {
        assert!(s("{12,13,14}").validate().is_ok());
        assert!(matches!(
            s("{12,123}").validate(),
            Err(AccessError::NotAntichain { .. })
        ));
        assert!(s("{12,34,56}").validate().is_ok());
    }

    #[test]
    fn quantum_condition() {
        assert!(!s("{12,34}").is_quantum());
        assert!(s("{12,13,14}").is_quantum());
        // 4-edge hypercycle of disjoint 2-regions is never quantum.
        assert!(!s("{12,23,34,41}").is_quantum());
    }

    #[test]
    fn occupancy_row57() {
        let occ = s("{1234,1267,456}").region_occupancy();
        assert_eq!(occ.region(0b001), [3].into()); // only edge 1
        assert_eq!(occ.region(0b010), [7].into());
        assert_eq!(occ.region(0b100), [5].into());
        assert_eq!(occ.region(0b011), [1, 2].into());
        assert_eq!(occ.region(0b101), [4].into());
        assert_eq!(occ.region(0b110), [6].into());
        assert!(occ.region(0b111).is_empty());
    }

    #[test]
    fn occupancy_row7() {
        let occ = s("{12345,12346,12347}").region_occupancy();
        assert_eq!(occ.region(0b111), [1, 2, 3, 4].into());
        assert_eq!(occ.region(0b001), [5].into());
        assert_eq!(occ.region(0b010), [6].into());
        assert_eq!(occ.region(0b100), [7].into());
        assert!(occ.region(0b011).is_empty());
    }

    #[test]
    fn kind_flags() {
        let f = s("{12,13,14}").kind_predicates();
        assert!(f.hyperstar && f.hypercycle);
        let f = s("{12,23,34}").kind_predicates();
        assert!(f.hyperpath && !f.hypercycle);
        let f = s("{12,23,13}").kind_predicates();
        assert!(f.hypercycle && !f.hyperstar);
    }

    #[test]
    fn remove_matches_paper_examples() {
        // Rem(G12 template, A2) drops the 3-region core and leaves a path.
        let g12 = ClassId::new(12).unwrap().template().as_structure();
        let rem = g12.remove(&[2].into());
        let f = rem.kind_predicates();
        assert!(f.hyperpath && !f.hypercycle);
        // Rem(G10 template, A4) is isomorphic to G7.
        let g10 = ClassId::new(10).unwrap().template().as_structure();
        let rem = g10.remove(&[4].into());
        assert_eq!(rem.classify().unwrap().id, ClassId::new(7).unwrap());
        // Rem(H, empty) is H.
        let h = s("{1234,1267,456}");
        assert_eq!(h.remove(&BTreeSet::new()), h);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(s("{1234,1267,456}").classify().unwrap().id.index(), 9);
        assert_eq!(s("{12,13,23}").classify().unwrap().id.index(), 5);
        assert_eq!(s("{124,136,235}").classify().unwrap().id.index(), 9);
        assert_eq!(s("{12,13,14}").classify().unwrap().id.index(), 1);
    }

    #[test]
    fn classify_invariant_under_relabeling() {
        let base = s("{1234,1267,456}");
        let id = base.classify().unwrap().id;
        // A few hand-picked relabelings and edge orders.
        for text in ["{456,1234,1267}", "{1267,456,1234}", "{2341,2176,465}"] {
            assert_eq!(s(text).classify().unwrap().id, id);
        }
        // Swap labels 1 <-> 7 everywhere.
        let swapped: Vec<BTreeSet<Participant>> = base
            .edges
            .iter()
            .map(|e| e.iter().map(|&p| match p { 1 => 7, 7 => 1, x => x }).collect())
            .collect();
        let sw = AccessStructure::from_edges(swapped);
        assert_eq!(sw.classify().unwrap().id, id);
    }

    #[test]
    fn twelve_patterns_exactly() {
        let patterns = enumerate_quantum_hypercycle_patterns();
        assert_eq!(patterns.len(), 12);
        // And they are exactly the twelve template patterns.
        let mut templates: Vec<[bool; 8]> = ClassId::all()
            .map(|id| canonical_pattern(&id.template().pattern()).0)
            .collect();
        templates.sort();
        let mut got = patterns.clone();
        got.sort();
        assert_eq!(got, templates);
    }

    #[test]
    fn templates_are_quantum_hypercycles() {
        for id in ClassId::all() {
            let st = id.template().as_structure();
            st.validate().unwrap();
            assert!(st.is_quantum(), "{id}");
            assert!(st.kind_predicates().hypercycle, "{id}");
            assert_eq!(st.classify().unwrap().id, id);
        }
    }

    #[test]
    fn hyperstars_with_three_edges_are_hypercycles() {
        for id in [1u8, 2, 3, 4] {
            let st = ClassId::new(id).unwrap().template().as_structure();
            let f = st.kind_predicates();
            assert!(f.hyperstar && f.hypercycle);
        }
        for id in 5u8..=12 {
            let st = ClassId::new(id).unwrap().template().as_structure();
            assert!(!st.kind_predicates().hyperstar, "G{id}");
        }
    }

    #[test]
    fn maximal_unauthorized_gamma9() {
        let st = ClassId::new(9).unwrap().template().as_structure();
        let maxu = st.maximal_unauthorized();
        let expect: Vec<BTreeSet<Participant>> = vec![
            [1, 2, 3].into(),
            [1, 2, 5, 6].into(),
            [1, 3, 4, 5].into(),
            [1, 4, 5, 6].into(),
            [2, 3, 4, 6].into(),
            [2, 4, 5, 6].into(),
            [3, 4, 5, 6].into(),
        ];
        assert_eq!(maxu, expect);
    }

    #[test]
    fn parse_roundtrip_and_json() {
        let st = s("{1234,1267,456}");
        assert_eq!(st.to_string(), "{1234,1267,456}");
        let json = serde_json::to_string(&st).unwrap();
        let back = AccessStructure::parse(&json).unwrap();
        assert_eq!(st, back);
    }
}
