//! Classical perfect secret sharing on the hypercycle classes: Shamir
//! threshold and additive primitives, the Simmons geometric layer, and the
//! per-class two-layer recipes achieving the optimal information rates
//! (1 on G5/G6, 2/3 on G7..G12).
//!
//! The overall shape follows the decomposition construction: a first layer
//! of ideal components (threshold edges and two-edge hyperstars) carries
//! one secret element, a second layer carries the other. For G7..G9 the
//! second layer is a single Simmons configuration over all three edges; a
//! participant's shares are the per-block values split additively inside
//! the block, so every member of a block holds the same number of field
//! elements and the rate is read off the largest slot count.
//!
//! Two repairs over the bare geometric layer are baked in (see
//! `simmons`): the recombination vectors are sampled under explicit
//! coupling constraints, and the edge-private Simmons slots are masked
//! with first-layer polynomial coefficients that only the owning edge can
//! remove. `verify_perfect` is the oracle that gates all of it: it
//! enumerates or samples the dealer randomness and checks recovery and
//! secrecy subset by subset.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::access::{AccessStructure, AccessError, ClassId, HypercycleClass, Participant};
use crate::ffield::{Elem, FieldCtx, FieldError};

pub mod simmons;
pub mod verify;

pub use simmons::SimmonsSetup;
pub use verify::{verify_perfect, PerfectnessReport, VerifyMode};

#[derive(Debug, Error)]
pub enum CssError {
    #[error("class {0} has no optimal-rate construction here (hyperstar classes G1..G4); pass allow_hyperstar_fallback to build a no-rate-claim scheme")]
    UnsupportedClass(ClassId),
    #[error("block sizes must be positive and match the class template ({expected} blocks)")]
    BadBlockSizes { expected: usize },
    #[error("p={p} too small: need {needed} distinct nonzero identities")]
    FieldTooSmall { p: u64, needed: usize },
    #[error("simmons sampling exhausted {0} attempts")]
    ExhaustedAttempts(usize),
    #[error("direction row must satisfy A.eps = 1")]
    BadDirection,
    #[error("secret length {got}, descriptor expects {expected}")]
    SecretLength { got: usize, expected: usize },
    #[error("subset is unauthorized: {0}")]
    Unauthorized(UnauthorizedReport),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Access(#[from] AccessError),
}

/// Which layer blocked each edge for an unauthorized subset.
#[derive(Debug, Clone, Serialize)]
pub struct UnauthorizedReport {
    pub missing: Vec<String>,
}

impl fmt::Display for UnauthorizedReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.missing.join("; "))
    }
}

// ---------------------------------------------------------------------
// Basic primitives
// ---------------------------------------------------------------------

/// Split `secret` into `m` additive shares; the first `m-1` are uniform.
pub fn additive_split(secret: Elem, m: usize, tape: &mut dyn Tape, ctx: &FieldCtx) -> Vec<Elem> {
    assert!(m >= 1);
    let mut shares = Vec::with_capacity(m);
    let mut acc = 0u64;
    for _ in 0..m - 1 {
        let v = tape.draw();
        acc = ctx.add(acc, v);
        shares.push(v);
    }
    shares.push(ctx.sub(secret, acc));
    shares
}

pub fn additive_reconstruct(shares: &[Elem], ctx: &FieldCtx) -> Elem {
    shares.iter().fold(0, |acc, &v| ctx.add(acc, v))
}

/// Evaluate `f(x) = secret + sum coeffs[i] x^{i+1}` at the given points.
pub fn shamir_deal(secret: Elem, coeffs: &[Elem], points: &[Elem], ctx: &FieldCtx) -> Vec<Elem> {
    let mut poly = Vec::with_capacity(coeffs.len() + 1);
    poly.push(secret);
    poly.extend_from_slice(coeffs);
    points.iter().map(|&x| ctx.poly_eval(&poly, x)).collect()
}

/// Solve the Vandermonde system for the full coefficient vector
/// `(secret, a_1, ..., a_d)` from `d+1` point/value pairs.
pub fn shamir_solve(pairs: &[(Elem, Elem)], ctx: &FieldCtx) -> Result<Vec<Elem>, CssError> {
    let n = pairs.len();
    let mut seen = BTreeSet::new();
    for &(x, _) in pairs {
        if !seen.insert(x % ctx.p()) {
            return Err(CssError::Field(FieldError::SingularSystem));
        }
    }
    let a: Vec<Vec<Elem>> = pairs
        .iter()
        .map(|&(x, _)| {
            let mut row = Vec::with_capacity(n);
            let mut pw = 1u64;
            for _ in 0..n {
                row.push(pw);
                pw = ctx.mul(pw, x);
            }
            row
        })
        .collect();
    let b: Vec<Elem> = pairs.iter().map(|&(_, y)| y).collect();
    crate::ffield::solve_linear(&a, &b, ctx).ok_or(CssError::Field(FieldError::SingularSystem))
}

/// Constant term only.
pub fn shamir_combine(pairs: &[(Elem, Elem)], ctx: &FieldCtx) -> Result<Elem, CssError> {
    Ok(shamir_solve(pairs, ctx)?[0])
}

// ---------------------------------------------------------------------
// Randomness tape
// ---------------------------------------------------------------------

/// Source of dealer randomness. A tape abstraction (rather than an `Rng`
/// bound) lets the perfectness oracle enumerate the whole randomness
/// space deterministically.
pub trait Tape {
    fn draw(&mut self) -> Elem;
}

pub struct RngTape<'a, R: Rng> {
    pub rng: &'a mut R,
    pub p: u64,
}

impl<R: Rng> Tape for RngTape<'_, R> {
    fn draw(&mut self) -> Elem {
        self.rng.gen_range(0..self.p)
    }
}

/// Fixed tape for enumeration; the dimension probe guarantees length.
pub struct VecTape<'a> {
    pub values: &'a [Elem],
    pub idx: usize,
}

impl Tape for VecTape<'_> {
    fn draw(&mut self) -> Elem {
        let v = self.values[self.idx];
        self.idx += 1;
        v
    }
}

struct CountTape {
    count: usize,
}

impl Tape for CountTape {
    fn draw(&mut self) -> Elem {
        self.count += 1;
        0
    }
}

// ---------------------------------------------------------------------
// Share tags and descriptors
// ---------------------------------------------------------------------

/// Identifies one block-level share slot, following the superscript
/// convention of the two-layer construction: `F1` is the threshold layer
/// y^(1,1), `Star` the hyperstar layer y^(1,2), `Lam(j)` the geometric
/// layer y^(2,1) with point index j. Masked reductions add `Mask(h)` on
/// the common block; the path decomposition of G12 uses the `Path*`
/// slots of its two layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    F1,
    Star,
    Lam(u8),
    Mask(u8),
    PathShamir(u8),
    PathStar(u8),
    EdgeAdd(u8),
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::F1 => write!(f, "y^(1,1)"),
            Tag::Star => write!(f, "y^(1,2)"),
            Tag::Lam(j) => write!(f, "y^(2,1)_{j}"),
            Tag::Mask(h) => write!(f, "mask_{h}"),
            Tag::PathShamir(h) => write!(f, "path{h}.shamir"),
            Tag::PathStar(h) => write!(f, "path{h}.star"),
            Tag::EdgeAdd(e) => write!(f, "edge{e}.add"),
        }
    }
}

/// One block-level slot: the block's value for this tag is split
/// additively among the block's members.
pub type Slot = (usize, Tag);

/// The per-class wiring behind a descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SchemeKind {
    /// G5: one degree-1 threshold over the three block identities.
    IdealTriangle,
    /// G6: additive mask on the 3-region block over an inner G5.
    MaskedTriangle,
    /// G7/G8/G9: ideal first layer plus a Simmons second layer.
    TwoLayer { simmons: SimmonsSetup, xi: Elem },
    /// G10/G11: two masks on the 3-region block over a G7/G8 scheme on
    /// the removed structure. `block_map[inner] = outer`,
    /// `edge_map[outer] = inner`.
    MaskedReduction {
        inner: Box<SchemeDescriptor>,
        block_map: BTreeMap<usize, usize>,
        edge_map: [usize; 3],
    },
    /// G12: two masks on the 3-region block over the two ideal path
    /// decompositions.
    DoublePath,
    /// G1..G4 behind an explicit flag: additive core plus per-edge
    /// additive remainder; perfect, no optimality claim.
    HyperstarFallback,
}

/// A fully built scheme: class, field, blocks, identities, and wiring.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    pub class: ClassId,
    pub p: u64,
    /// Participants of each template block.
    pub blocks: BTreeMap<usize, Vec<Participant>>,
    /// Public identity x_b of each template block.
    pub identities: BTreeMap<usize, Elem>,
    pub secret_len: usize,
    pub kind: SchemeKind,
}

/// Slot values at block level, before the additive split.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BlockValues(pub BTreeMap<Slot, Elem>);

/// Participant shares with their slot tags (the Eq. 17/18 layout).
#[derive(Debug, Clone, Default, Serialize)]
pub struct ShareBundle(pub BTreeMap<Participant, Vec<(Tag, Elem)>>);

impl SchemeDescriptor {
    pub fn ctx(&self) -> FieldCtx {
        FieldCtx::new(self.p).expect("descriptor field is valid")
    }

    /// The access structure over actual participants.
    pub fn structure(&self) -> AccessStructure {
        let template = self.class.template();
        let edges = template
            .edges()
            .into_iter()
            .map(|blocks| {
                blocks
                    .into_iter()
                    .flat_map(|b| self.blocks[&b].iter().copied())
                    .collect::<BTreeSet<Participant>>()
            })
            .collect();
        AccessStructure::from_edges(edges)
    }

    /// Template blocks of edge `e`.
    pub fn edge_blocks(&self, e: usize) -> BTreeSet<usize> {
        self.class.template().edges()[e].clone()
    }

    pub fn block_of(&self, participant: Participant) -> Option<usize> {
        self.blocks
            .iter()
            .find(|(_, members)| members.contains(&participant))
            .map(|(&b, _)| b)
    }

    /// All block-level slots, sorted.
    pub fn slots(&self) -> Vec<Slot> {
        let mut slots = match &self.kind {
            SchemeKind::IdealTriangle => {
                vec![(1, Tag::F1), (2, Tag::F1), (3, Tag::F1)]
            }
            SchemeKind::MaskedTriangle => {
                vec![(1, Tag::F1), (2, Tag::F1), (3, Tag::F1), (4, Tag::Mask(1))]
            }
            SchemeKind::TwoLayer { simmons, .. } => {
                let mut v = vec![
                    (1, Tag::F1),
                    (2, Tag::F1),
                    (4, Tag::F1),
                    (1, Tag::Star),
                    (2, Tag::Star),
                    (3, Tag::Star),
                ];
                match self.class.index() {
                    8 => v.push((5, Tag::Star)),
                    9 => {
                        v.push((5, Tag::Star));
                        v.push((6, Tag::Star));
                    }
                    _ => {}
                }
                for pt in &simmons.points {
                    v.push((pt.block, Tag::Lam(pt.j)));
                }
                v
            }
            SchemeKind::MaskedReduction { inner, block_map, .. } => {
                let mut v = vec![(4, Tag::Mask(1)), (4, Tag::Mask(2))];
                for (b, tag) in inner.slots() {
                    v.push((block_map[&b], tag));
                }
                v
            }
            SchemeKind::DoublePath => vec![
                (2, Tag::Mask(1)),
                (2, Tag::Mask(2)),
                (1, Tag::PathShamir(1)),
                (4, Tag::PathShamir(1)),
                (3, Tag::PathStar(1)),
                (1, Tag::PathStar(1)),
                (5, Tag::PathStar(1)),
                (3, Tag::PathShamir(2)),
                (5, Tag::PathShamir(2)),
                (1, Tag::PathStar(2)),
                (3, Tag::PathStar(2)),
                (4, Tag::PathStar(2)),
            ],
            SchemeKind::HyperstarFallback => {
                let template = self.class.template();
                let mut v = vec![(1, Tag::Star)];
                for (e, blocks) in template.edges().iter().enumerate() {
                    for &b in blocks {
                        if b != 1 {
                            v.push((b, Tag::EdgeAdd(e as u8)));
                        }
                    }
                }
                v
            }
        };
        slots.sort();
        slots
    }

    /// Slots of one block, sorted; its per-member share count is the
    /// length of this list.
    pub fn block_slots(&self, block: usize) -> Vec<Tag> {
        self.slots()
            .into_iter()
            .filter(|&(b, _)| b == block)
            .map(|(_, t)| t)
            .collect()
    }

    /// Largest per-member share count over all blocks.
    pub fn max_share_count(&self) -> usize {
        self.blocks
            .keys()
            .map(|&b| self.block_slots(b).len())
            .max()
            .unwrap_or(0)
    }

    /// Exact information rate: secret length over largest share count.
    pub fn classical_rate(&self) -> num_rational::Rational64 {
        num_rational::Rational64::new(self.secret_len as i64, self.max_share_count() as i64)
    }

    /// Number of tape draws one block-level deal consumes.
    pub fn randomness_dim(&self) -> usize {
        let mut tape = CountTape { count: 0 };
        let secret = vec![0; self.secret_len];
        deal_block_values_internal(self, &secret, &mut tape, &self.ctx());
        tape.count
    }

    /// Tape draws for a full participant-level deal (block values plus
    /// the additive splits).
    pub fn full_randomness_dim(&self) -> usize {
        let extra: usize = self
            .slots()
            .iter()
            .map(|&(b, _)| self.blocks[&b].len() - 1)
            .sum();
        self.randomness_dim() + extra
    }
}

// ---------------------------------------------------------------------
// Building descriptors
// ---------------------------------------------------------------------

pub struct BuildOptions {
    pub allow_hyperstar_fallback: bool,
    /// Attempt budget for the Simmons sampler.
    pub attempts: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { allow_hyperstar_fallback: false, attempts: 4000 }
    }
}

/// Build the optimal-rate scheme for a class with the given block sizes
/// (indexed by template block number). Participants are numbered
/// consecutively block by block.
pub fn build_scheme(
    class: ClassId,
    block_sizes: &[usize],
    p: u64,
    rng: &mut impl Rng,
    opts: &BuildOptions,
) -> Result<SchemeDescriptor, CssError> {
    let template = class.template();
    let nblocks = template.block_count();
    if block_sizes.len() != nblocks || block_sizes.iter().any(|&s| s == 0) {
        return Err(CssError::BadBlockSizes { expected: nblocks });
    }
    let mut blocks = BTreeMap::new();
    let mut next = 1u32;
    for b in 1..=nblocks {
        let members: Vec<Participant> = (next..next + block_sizes[b - 1] as u32).collect();
        next += block_sizes[b - 1] as u32;
        blocks.insert(b, members);
    }
    build_scheme_on_blocks(class, blocks, p, rng, opts)
}

/// Classify a structure and build the scheme over its own participants.
pub fn build_scheme_for_structure(
    structure: &AccessStructure,
    p: u64,
    rng: &mut impl Rng,
    opts: &BuildOptions,
) -> Result<(HypercycleClass, SchemeDescriptor), CssError> {
    let class = structure.classify()?;
    let blocks: BTreeMap<usize, Vec<Participant>> = class
        .blocks
        .iter()
        .map(|(&b, members)| (b, members.iter().copied().collect()))
        .collect();
    let desc = build_scheme_on_blocks(class.id, blocks, p, rng, opts)?;
    Ok((class, desc))
}

fn build_scheme_on_blocks(
    class: ClassId,
    blocks: BTreeMap<usize, Vec<Participant>>,
    p: u64,
    rng: &mut impl Rng,
    opts: &BuildOptions,
) -> Result<SchemeDescriptor, CssError> {
    let nblocks = blocks.len();
    if p <= nblocks as u64 {
        return Err(CssError::FieldTooSmall { p, needed: nblocks });
    }
    let ctx = FieldCtx::new(p)?;
    let identities: BTreeMap<usize, Elem> = (1..=nblocks).map(|b| (b, b as Elem)).collect();
    let idx = class.index();
    let (secret_len, kind) = match idx {
        1..=4 => {
            if !opts.allow_hyperstar_fallback {
                return Err(CssError::UnsupportedClass(class));
            }
            (1, SchemeKind::HyperstarFallback)
        }
        5 => (1, SchemeKind::IdealTriangle),
        6 => (1, SchemeKind::MaskedTriangle),
        7 | 8 | 9 => {
            let (setup, xi) =
                simmons::sample_for_class(class, &identities, &ctx, rng, opts.attempts)?;
            (2, SchemeKind::TwoLayer { simmons: setup, xi })
        }
        10 | 11 => {
            // Removing the 3-region block 4 leaves G7 (from G10) or G8
            // (from G11) over the remaining blocks; map[inner] = outer.
            let (inner_class, map_pairs, edge_map): (u8, &[(usize, usize)], [usize; 3]) =
                if idx == 10 {
                    (7, &[(1, 2), (2, 3), (3, 1), (4, 5)], [1, 2, 0])
                } else {
                    (8, &[(1, 1), (2, 3), (3, 2), (4, 6), (5, 5)], [1, 0, 2])
                };
            let block_map: BTreeMap<usize, usize> = map_pairs.iter().copied().collect();
            let inner_blocks: BTreeMap<usize, Vec<Participant>> = block_map
                .iter()
                .map(|(&ib, &ob)| (ib, blocks[&ob].clone()))
                .collect();
            // Inner identities follow the outer blocks they stand for so
            // evaluation points stay distinct across the reduction.
            let inner_identities: BTreeMap<usize, Elem> =
                block_map.iter().map(|(&ib, &ob)| (ib, ob as Elem)).collect();
            let inner_cls = ClassId::new(inner_class).unwrap();
            let (setup, xi) =
                simmons::sample_for_class(inner_cls, &inner_identities, &ctx, rng, opts.attempts)?;
            let inner = SchemeDescriptor {
                class: inner_cls,
                p,
                blocks: inner_blocks,
                identities: inner_identities,
                secret_len: 2,
                kind: SchemeKind::TwoLayer { simmons: setup, xi },
            };
            (2, SchemeKind::MaskedReduction { inner: Box::new(inner), block_map, edge_map })
        }
        12 => (2, SchemeKind::DoublePath),
        _ => unreachable!(),
    };
    let _ = &ctx;
    Ok(SchemeDescriptor { class, p, blocks, identities, secret_len, kind })
}

// ---------------------------------------------------------------------
// Dealing
// ---------------------------------------------------------------------

/// Deal at block level. Exposed for the protocol and the oracle; the
/// participant-level API is `deal_secret`.
pub fn deal_block_values(
    desc: &SchemeDescriptor,
    secret: &[Elem],
    tape: &mut dyn Tape,
) -> Result<BlockValues, CssError> {
    if secret.len() != desc.secret_len {
        return Err(CssError::SecretLength { got: secret.len(), expected: desc.secret_len });
    }
    let ctx = desc.ctx();
    Ok(deal_block_values_internal(desc, secret, tape, &ctx))
}

fn deal_block_values_internal(
    desc: &SchemeDescriptor,
    secret: &[Elem],
    tape: &mut dyn Tape,
    ctx: &FieldCtx,
) -> BlockValues {
    let mut out = BlockValues::default();
    let x = |b: usize| desc.identities[&b];
    match &desc.kind {
        SchemeKind::IdealTriangle => {
            let a = tape.draw();
            for b in 1..=3 {
                let v = ctx.add(secret[0], ctx.mul(a, x(b)));
                out.0.insert((b, Tag::F1), v);
            }
        }
        SchemeKind::MaskedTriangle => {
            let s1 = tape.draw();
            let s2 = ctx.sub(secret[0], s1);
            out.0.insert((4, Tag::Mask(1)), s1);
            let a = tape.draw();
            for b in 1..=3 {
                out.0.insert((b, Tag::F1), ctx.add(s2, ctx.mul(a, x(b))));
            }
        }
        SchemeKind::TwoLayer { simmons, xi } => {
            let (s, k) = (secret[0], secret[1]);
            // First layer: f1 over the threshold edge {1,2,4} ...
            let a1 = tape.draw();
            let b1 = tape.draw();
            for b in [1usize, 2, 4] {
                let v = ctx.add(s, ctx.add(ctx.mul(a1, x(b)), ctx.mul(b1, ctx.mul(x(b), x(b)))));
                out.0.insert((b, Tag::F1), v);
            }
            // ... and the two-edge hyperstar with core block 3.
            let s1 = tape.draw();
            let s2 = ctx.sub(s, s1);
            out.0.insert((3, Tag::Star), s1);
            let idx = desc.class.index();
            let a2 = if idx == 9 { tape.draw() } else { 0 };
            let a3 = if idx >= 8 { tape.draw() } else { 0 };
            match idx {
                7 => {
                    out.0.insert((1, Tag::Star), s2);
                    out.0.insert((2, Tag::Star), s2);
                }
                8 => {
                    out.0.insert((1, Tag::Star), s2);
                    out.0.insert((2, Tag::Star), ctx.add(s2, ctx.mul(a3, x(2))));
                    out.0.insert((5, Tag::Star), ctx.add(s2, ctx.mul(a3, x(5))));
                }
                9 => {
                    out.0.insert((1, Tag::Star), ctx.add(s2, ctx.mul(a2, x(1))));
                    out.0.insert((6, Tag::Star), ctx.add(s2, ctx.mul(a2, x(6))));
                    out.0.insert((2, Tag::Star), ctx.add(s2, ctx.mul(a3, x(2))));
                    out.0.insert((5, Tag::Star), ctx.add(s2, ctx.mul(a3, x(5))));
                }
                _ => unreachable!(),
            }
            // Second layer: lambda values, with the slot masks.
            let row: Vec<Elem> = (0..simmons.coord_dim()).map(|_| tape.draw()).collect();
            for pt in &simmons.points {
                let mut lam = ctx.sub(k, ctx.dot(&row, &pt.coords));
                match (idx, pt.block, pt.j) {
                    (8, 4, 1) | (9, 4, 1) => {
                        let w = ctx.add(a1, ctx.mul(*xi, b1));
                        lam = ctx.add(lam, w);
                    }
                    (9, 5, 1) => lam = ctx.add(lam, a3),
                    (9, 6, 1) => lam = ctx.add(lam, a2),
                    _ => {}
                }
                out.0.insert((pt.block, Tag::Lam(pt.j)), lam);
            }
        }
        SchemeKind::MaskedReduction { inner, block_map, .. } => {
            let m1 = tape.draw();
            let m2 = tape.draw();
            out.0.insert((4, Tag::Mask(1)), m1);
            out.0.insert((4, Tag::Mask(2)), m2);
            let inner_secret = [ctx.sub(secret[0], m1), ctx.sub(secret[1], m2)];
            let inner_vals = deal_block_values_internal(inner, &inner_secret, tape, ctx);
            for ((b, tag), v) in inner_vals.0 {
                out.0.insert((block_map[&b], tag), v);
            }
        }
        SchemeKind::DoublePath => {
            let m1 = tape.draw();
            let m2 = tape.draw();
            out.0.insert((2, Tag::Mask(1)), m1);
            out.0.insert((2, Tag::Mask(2)), m2);
            let s21 = ctx.sub(secret[0], m1);
            let s22 = ctx.sub(secret[1], m2);
            // Layer 1 on the removed path: shamir over {1,4} and a
            // hyperstar with core 3 over {{1,3},{3,5}}.
            let alpha1 = tape.draw();
            out.0.insert((1, Tag::PathShamir(1)), ctx.add(s21, ctx.mul(alpha1, x(1))));
            out.0.insert((4, Tag::PathShamir(1)), ctx.add(s21, ctx.mul(alpha1, x(4))));
            let u = tape.draw();
            let v = ctx.sub(s21, u);
            out.0.insert((3, Tag::PathStar(1)), u);
            out.0.insert((1, Tag::PathStar(1)), v);
            out.0.insert((5, Tag::PathStar(1)), v);
            // Layer 2: shamir over {3,5} and a hyperstar with core 1.
            let alpha2 = tape.draw();
            out.0.insert((3, Tag::PathShamir(2)), ctx.add(s22, ctx.mul(alpha2, x(3))));
            out.0.insert((5, Tag::PathShamir(2)), ctx.add(s22, ctx.mul(alpha2, x(5))));
            let u2 = tape.draw();
            let v2 = ctx.sub(s22, u2);
            out.0.insert((1, Tag::PathStar(2)), u2);
            out.0.insert((3, Tag::PathStar(2)), v2);
            out.0.insert((4, Tag::PathStar(2)), v2);
        }
        SchemeKind::HyperstarFallback => {
            let s1 = tape.draw();
            let s2 = ctx.sub(secret[0], s1);
            out.0.insert((1, Tag::Star), s1);
            let template = desc.class.template();
            for (e, blocks) in template.edges().iter().enumerate() {
                let others: Vec<usize> = blocks.iter().copied().filter(|&b| b != 1).collect();
                let pieces = additive_split(s2, others.len(), tape, ctx);
                for (b, piece) in others.into_iter().zip(pieces) {
                    out.0.insert((b, Tag::EdgeAdd(e as u8)), piece);
                }
            }
        }
    }
    out
}

/// Deal to participants: every block value is split additively among the
/// block's members.
pub fn deal_secret(
    desc: &SchemeDescriptor,
    secret: &[Elem],
    tape: &mut dyn Tape,
) -> Result<(BlockValues, ShareBundle), CssError> {
    let ctx = desc.ctx();
    let values = deal_block_values(desc, secret, tape)?;
    let mut bundle = ShareBundle::default();
    for (&(block, tag), &v) in &values.0 {
        let members = &desc.blocks[&block];
        let pieces = additive_split(v, members.len(), tape, &ctx);
        for (&m, piece) in members.iter().zip(pieces) {
            bundle.0.entry(m).or_default().push((tag, piece));
        }
    }
    for shares in bundle.0.values_mut() {
        shares.sort_by_key(|&(t, _)| t);
    }
    Ok((values, bundle))
}

// ---------------------------------------------------------------------
// Recovery
// ---------------------------------------------------------------------

/// Recover the secret from block-level values along edge `e`.
/// `values` may be a subset; missing slots surface as layer errors.
pub fn recover_from_block_values(
    desc: &SchemeDescriptor,
    e: usize,
    values: &BTreeMap<Slot, Elem>,
) -> Result<Vec<Elem>, CssError> {
    let ctx = desc.ctx();
    let x = |b: usize| desc.identities[&b];
    let get = |slot: Slot| -> Result<Elem, CssError> {
        values.get(&slot).copied().ok_or_else(|| {
            CssError::Unauthorized(UnauthorizedReport {
                missing: vec![format!("edge {e}: missing block {} slot {}", slot.0, slot.1)],
            })
        })
    };
    match &desc.kind {
        SchemeKind::IdealTriangle => {
            let blocks: Vec<usize> = desc.edge_blocks(e).into_iter().collect();
            let pairs: Vec<(Elem, Elem)> = blocks
                .iter()
                .map(|&b| Ok((x(b), get((b, Tag::F1))?)))
                .collect::<Result<_, CssError>>()?;
            Ok(vec![shamir_combine(&pairs, &ctx)?])
        }
        SchemeKind::MaskedTriangle => {
            let s1 = get((4, Tag::Mask(1)))?;
            let blocks: Vec<usize> =
                desc.edge_blocks(e).into_iter().filter(|&b| b != 4).collect();
            let pairs: Vec<(Elem, Elem)> = blocks
                .iter()
                .map(|&b| Ok((x(b), get((b, Tag::F1))?)))
                .collect::<Result<_, CssError>>()?;
            Ok(vec![ctx.add(s1, shamir_combine(&pairs, &ctx)?)])
        }
        SchemeKind::TwoLayer { simmons, xi } => {
            let idx = desc.class.index();
            // s, and the mask ingredient this edge must peel off the
            // geometric layer: (slot, value) of the correction.
            let (s, corr): (Elem, Option<((usize, u8), Elem)>) = match e {
                0 => {
                    let pairs = [
                        (x(1), get((1, Tag::F1))?),
                        (x(2), get((2, Tag::F1))?),
                        (x(4), get((4, Tag::F1))?),
                    ];
                    let sol = shamir_solve(&pairs, &ctx)?;
                    let (s, a1, b1) = (sol[0], sol[1], sol[2]);
                    let corr = if idx >= 8 {
                        Some(((4, 1), ctx.add(a1, ctx.mul(*xi, b1))))
                    } else {
                        None
                    };
                    (s, corr)
                }
                1 => {
                    let s1 = get((3, Tag::Star))?;
                    match idx {
                        7 | 8 => (ctx.add(s1, get((1, Tag::Star))?), None),
                        _ => {
                            let pairs =
                                [(x(1), get((1, Tag::Star))?), (x(6), get((6, Tag::Star))?)];
                            let sol = shamir_solve(&pairs, &ctx)?;
                            (ctx.add(s1, sol[0]), Some(((6, 1), sol[1])))
                        }
                    }
                }
                _ => {
                    let s1 = get((3, Tag::Star))?;
                    match idx {
                        7 => (ctx.add(s1, get((2, Tag::Star))?), None),
                        _ => {
                            let pairs =
                                [(x(2), get((2, Tag::Star))?), (x(5), get((5, Tag::Star))?)];
                            let sol = shamir_solve(&pairs, &ctx)?;
                            let corr =
                                if idx == 9 { Some(((5, 1), sol[1])) } else { None };
                            (ctx.add(s1, sol[0]), corr)
                        }
                    }
                }
            };
            // k by mu-recombination, minus the peeled mask.
            let mu = &simmons.edge_mus[e];
            let mut k = 0u64;
            for (q, pt) in simmons.points.iter().enumerate() {
                if mu[q] == 0 {
                    continue;
                }
                let lam = get((pt.block, Tag::Lam(pt.j)))?;
                k = ctx.add(k, ctx.mul(mu[q], lam));
            }
            if let Some(((cb, cj), cval)) = corr {
                if let Some(q) = simmons.point_index(cb, cj) {
                    k = ctx.sub(k, ctx.mul(mu[q], cval));
                }
            }
            Ok(vec![s, k])
        }
        SchemeKind::MaskedReduction { inner, block_map, edge_map } => {
            let m1 = get((4, Tag::Mask(1)))?;
            let m2 = get((4, Tag::Mask(2)))?;
            let inv_map: BTreeMap<usize, usize> =
                block_map.iter().map(|(&ib, &ob)| (ob, ib)).collect();
            let inner_vals: BTreeMap<Slot, Elem> = values
                .iter()
                .filter_map(|(&(ob, tag), &v)| inv_map.get(&ob).map(|&ib| ((ib, tag), v)))
                .collect();
            let sub = recover_from_block_values(inner, edge_map[e], &inner_vals)?;
            Ok(vec![ctx.add(m1, sub[0]), ctx.add(m2, sub[1])])
        }
        SchemeKind::DoublePath => {
            let m1 = get((2, Tag::Mask(1)))?;
            let m2 = get((2, Tag::Mask(2)))?;
            let (s21, s22) = match e {
                0 => {
                    // Edge {1,2,3}: both layers through their hyperstars.
                    let s21 =
                        ctx.add(get((3, Tag::PathStar(1)))?, get((1, Tag::PathStar(1)))?);
                    let s22 =
                        ctx.add(get((1, Tag::PathStar(2)))?, get((3, Tag::PathStar(2)))?);
                    (s21, s22)
                }
                1 => {
                    // Edge {1,2,4}: layer-1 shamir over {1,4}, layer-2 star.
                    let pairs = [
                        (x(1), get((1, Tag::PathShamir(1)))?),
                        (x(4), get((4, Tag::PathShamir(1)))?),
                    ];
                    let s21 = shamir_combine(&pairs, &ctx)?;
                    let s22 =
                        ctx.add(get((1, Tag::PathStar(2)))?, get((4, Tag::PathStar(2)))?);
                    (s21, s22)
                }
                _ => {
                    // Edge {2,3,5}: layer-1 star, layer-2 shamir over {3,5}.
                    let s21 =
                        ctx.add(get((3, Tag::PathStar(1)))?, get((5, Tag::PathStar(1)))?);
                    let pairs = [
                        (x(3), get((3, Tag::PathShamir(2)))?),
                        (x(5), get((5, Tag::PathShamir(2)))?),
                    ];
                    let s22 = shamir_combine(&pairs, &ctx)?;
                    (s21, s22)
                }
            };
            Ok(vec![ctx.add(m1, s21), ctx.add(m2, s22)])
        }
        SchemeKind::HyperstarFallback => {
            let s1 = get((1, Tag::Star))?;
            let template = desc.class.template();
            let blocks = &template.edges()[e];
            let mut s2 = 0u64;
            for &b in blocks {
                if b != 1 {
                    s2 = ctx.add(s2, get((b, Tag::EdgeAdd(e as u8)))?);
                }
            }
            Ok(vec![ctx.add(s1, s2)])
        }
    }
}

/// Block-level slots edge `e`'s recovery consumes (the protocol's
/// delivery set).
pub fn edge_required_slots(desc: &SchemeDescriptor, e: usize) -> Vec<Slot> {
    let edge_blocks = desc.edge_blocks(e);
    desc.slots()
        .into_iter()
        .filter(|&(b, tag)| {
            edge_blocks.contains(&b)
                && match (&desc.kind, tag) {
                    (SchemeKind::TwoLayer { .. }, Tag::F1) => e == 0,
                    (SchemeKind::TwoLayer { .. }, Tag::Star) => e != 0,
                    (SchemeKind::DoublePath, Tag::PathShamir(h)) => match e {
                        0 => false,
                        1 => h == 1,
                        _ => h == 2,
                    },
                    (SchemeKind::DoublePath, Tag::PathStar(h)) => match e {
                        0 => true,
                        1 => h == 2,
                        _ => h == 1,
                    },
                    (SchemeKind::HyperstarFallback, Tag::EdgeAdd(ea)) => ea as usize == e,
                    (SchemeKind::MaskedReduction { inner, block_map, edge_map }, tag) => {
                        if matches!(tag, Tag::Mask(_)) {
                            true
                        } else {
                            let inv: BTreeMap<usize, usize> =
                                block_map.iter().map(|(&i, &o)| (o, i)).collect();
                            match inv.get(&b) {
                                Some(&ib) => edge_required_slots(inner, edge_map[e])
                                    .contains(&(ib, tag)),
                                None => false,
                            }
                        }
                    }
                    _ => true,
                }
        })
        .collect()
}

/// Recover from participant shares. Blocks fully contained in `subset`
/// contribute their additive sums; any edge whose blocks are all present
/// is recovered and cross-checked against the others.
pub fn recover_secret(
    desc: &SchemeDescriptor,
    subset: &BTreeSet<Participant>,
    bundle: &ShareBundle,
) -> Result<Vec<Elem>, CssError> {
    let ctx = desc.ctx();
    let mut values: BTreeMap<Slot, Elem> = BTreeMap::new();
    let full_blocks: BTreeSet<usize> = desc
        .blocks
        .iter()
        .filter(|(_, members)| members.iter().all(|m| subset.contains(m)))
        .map(|(&b, _)| b)
        .collect();
    for &b in &full_blocks {
        for tag in desc.block_slots(b) {
            let mut acc = 0u64;
            for m in &desc.blocks[&b] {
                let piece = bundle
                    .0
                    .get(m)
                    .and_then(|shares| shares.iter().find(|&&(t, _)| t == tag))
                    .map(|&(_, v)| v)
                    .unwrap_or(0);
                acc = ctx.add(acc, piece);
            }
            values.insert((b, tag), acc);
        }
    }
    let template = desc.class.template();
    let mut result: Option<Vec<Elem>> = None;
    let mut missing = Vec::new();
    for (e, blocks) in template.edges().iter().enumerate() {
        if blocks.iter().all(|b| full_blocks.contains(b)) {
            let got = recover_from_block_values(desc, e, &values)?;
            if let Some(prev) = &result {
                debug_assert_eq!(prev, &got, "edges disagree");
            }
            result = Some(got);
        } else {
            let absent: Vec<String> = blocks
                .iter()
                .filter(|b| !full_blocks.contains(b))
                .map(|b| format!("block {b}"))
                .collect();
            missing.push(format!("edge {e}: missing {}", absent.join(", ")));
        }
    }
    result.ok_or(CssError::Unauthorized(UnauthorizedReport { missing }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn build(class: u8, sizes: &[usize], p: u64, seed: u64) -> SchemeDescriptor {
        let mut r = rng(seed);
        build_scheme(ClassId::new(class).unwrap(), sizes, p, &mut r, &BuildOptions::default())
            .unwrap_or_else(|e| panic!("G{class}: {e}"))
    }

    #[test]
    fn additive_and_shamir_basics() {
        let ctx = FieldCtx::new(11).unwrap();
        let mut r = rng(1);
        let mut tape = RngTape { rng: &mut r, p: 11 };
        let shares = additive_split(5, 3, &mut tape, &ctx);
        assert_eq!(shares.len(), 3);
        assert_eq!(additive_reconstruct(&shares, &ctx), 5);
        assert_eq!(additive_split(7, 1, &mut tape, &ctx), vec![7]);
        assert_eq!(additive_reconstruct(&[2, 9, 5], &ctx), 5);

        // f(x) = 4 + 3x at 1,2,3 over F_11.
        let evals = shamir_deal(4, &[3], &[1, 2, 3], &ctx);
        assert_eq!(evals, vec![7, 10, 2]);
        assert_eq!(shamir_combine(&[(1, 7), (2, 10)], &ctx).unwrap(), 4);
        // Degree-2 roundtrip with random coefficients.
        for _ in 0..50 {
            let (s, a, b) = (tape.draw(), tape.draw(), tape.draw());
            let ev = shamir_deal(s, &[a, b], &[1, 2, 4], &ctx);
            let got = shamir_combine(&[(1, ev[0]), (2, ev[1]), (4, ev[2])], &ctx).unwrap();
            assert_eq!(got, s);
        }
        assert!(shamir_combine(&[(1, 7), (1, 9)], &ctx).is_err());
    }

    #[test]
    fn rates_and_layout() {
        use num_rational::Rational64;
        let d5 = build(5, &[2, 2, 2], 11, 1);
        assert_eq!(d5.secret_len, 1);
        assert_eq!(d5.max_share_count(), 1);
        assert_eq!(d5.classical_rate(), Rational64::new(1, 1));

        let d6 = build(6, &[1, 1, 1, 2], 11, 2);
        assert_eq!(d6.classical_rate(), Rational64::new(1, 1));

        for class in 7u8..=12 {
            let sizes = vec![1; ClassId::new(class).unwrap().template().block_count()];
            let d = build(class, &sizes, 11, class as u64);
            assert_eq!(d.secret_len, 2, "G{class}");
            assert_eq!(d.max_share_count(), 3, "G{class}");
            assert_eq!(d.classical_rate(), Rational64::new(2, 3), "G{class}");
        }

        // Eq. 18 layout for G9 singleton blocks: counts (3,3,3,3,2,2).
        let d9 = build(9, &[1; 6], 11, 9);
        let counts: Vec<usize> = (1..=6).map(|b| d9.block_slots(b).len()).collect();
        assert_eq!(counts, vec![3, 3, 3, 3, 2, 2]);
        assert_eq!(
            d9.block_slots(1),
            vec![Tag::F1, Tag::Star, Tag::Lam(1)]
        );
        assert_eq!(
            d9.block_slots(3),
            vec![Tag::Star, Tag::Lam(1), Tag::Lam(2)]
        );
        assert_eq!(
            d9.block_slots(4),
            vec![Tag::F1, Tag::Lam(1), Tag::Lam(2)]
        );
    }

    #[test]
    fn roundtrip_all_classes() {
        for class in 5u8..=12 {
            let nblocks = ClassId::new(class).unwrap().template().block_count();
            // Mix of singleton and larger blocks.
            let sizes: Vec<usize> = (0..nblocks).map(|i| 1 + (i % 2)).collect();
            let desc = build(class, &sizes, 11, 100 + class as u64);
            let st = desc.structure();
            let mut r = rng(7 * class as u64 + 1);
            for _ in 0..200 {
                let secret: Vec<Elem> =
                    (0..desc.secret_len).map(|_| r.gen_range(0..11)).collect();
                let mut tape = RngTape { rng: &mut r, p: 11 };
                let (_, bundle) = deal_secret(&desc, &secret, &mut tape).unwrap();
                for edge in &st.edges {
                    let got = recover_secret(&desc, edge, &bundle).unwrap();
                    assert_eq!(got, secret, "G{class}");
                }
                for sub in st.maximal_unauthorized() {
                    assert!(
                        matches!(
                            recover_secret(&desc, &sub, &bundle),
                            Err(CssError::Unauthorized(_))
                        ),
                        "G{class} subset {sub:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_secret_zero_randomness() {
        let desc = build(5, &[1, 1, 1], 11, 3);
        let tape_vals = vec![0u64; desc.full_randomness_dim()];
        let mut tape = VecTape { values: &tape_vals, idx: 0 };
        let (values, _) = deal_secret(&desc, &[0], &mut tape).unwrap();
        assert!(values.0.values().all(|&v| v == 0));
    }

    #[test]
    fn gamma6_mask_sums() {
        let desc = build(6, &[1, 1, 1, 3], 11, 4);
        let mut r = rng(5);
        let secret = vec![8];
        let mut tape = RngTape { rng: &mut r, p: 11 };
        let (values, bundle) = deal_secret(&desc, &secret, &mut tape).unwrap();
        let ctx = desc.ctx();
        // A4's members' mask pieces sum to s1, and s1 + s2 = s.
        let s1 = values.0[&(4, Tag::Mask(1))];
        let sum: Elem = desc.blocks[&4]
            .iter()
            .map(|m| bundle.0[m].iter().find(|&&(t, _)| t == Tag::Mask(1)).unwrap().1)
            .fold(0, |acc, v| ctx.add(acc, v));
        assert_eq!(sum, s1);
        let f_at_x1 = values.0[&(1, Tag::F1)];
        let f_at_x2 = values.0[&(2, Tag::F1)];
        let s2 = shamir_combine(&[(1, f_at_x1), (2, f_at_x2)], &ctx).unwrap();
        assert_eq!(ctx.add(s1, s2), 8);
    }

    #[test]
    fn unsupported_hyperstar_classes_without_flag() {
        let mut r = rng(6);
        let err = build_scheme(
            ClassId::new(1).unwrap(),
            &[1, 1, 1, 1],
            11,
            &mut r,
            &BuildOptions::default(),
        );
        assert!(matches!(err, Err(CssError::UnsupportedClass(_))));
        let opts = BuildOptions { allow_hyperstar_fallback: true, ..Default::default() };
        let desc =
            build_scheme(ClassId::new(1).unwrap(), &[1, 1, 1, 1], 11, &mut r, &opts).unwrap();
        assert_eq!(desc.secret_len, 1);
        let st = desc.structure();
        let mut tape = RngTape { rng: &mut r, p: 11 };
        let (_, bundle) = deal_secret(&desc, &[4], &mut tape).unwrap();
        for edge in &st.edges {
            assert_eq!(recover_secret(&desc, edge, &bundle).unwrap(), vec![4]);
        }
    }

    #[test]
    fn edge_required_slots_cover_recovery() {
        for class in 5u8..=12 {
            let nblocks = ClassId::new(class).unwrap().template().block_count();
            let desc = build(class, &vec![1; nblocks], 11, 40 + class as u64);
            let mut r = rng(class as u64);
            let secret: Vec<Elem> = (0..desc.secret_len).map(|_| r.gen_range(0..11)).collect();
            let mut tape = RngTape { rng: &mut r, p: 11 };
            let (values, _) = deal_block_values(&desc, &secret, &mut tape)
                .map(|v| (v, ()))
                .unwrap();
            for e in 0..3 {
                let needed = edge_required_slots(&desc, e);
                let sub: BTreeMap<Slot, Elem> = needed
                    .iter()
                    .map(|slot| (*slot, values.0[slot]))
                    .collect();
                let got = recover_from_block_values(&desc, e, &sub)
                    .unwrap_or_else(|err| panic!("G{class} edge {e}: {err}"));
                assert_eq!(got, secret, "G{class} edge {e}");
            }
        }
    }
}
