//! The Simmons geometric layer: public points K_{i,j} in the hyperplane
//! V_I, a secret-bearing line V_D through K_0 = 0 in the direction of the
//! last coordinate axis, and shares lambda_{i,j} = k - A.K_{i,j} for a
//! random row A with A.eps = 1. A subset recovers k exactly when K_0 lies
//! in the affine span of its points: with coefficients mu summing to 1,
//! sum mu lambda = k.
//!
//! Random points never satisfy the authorized-solvable condition, so the
//! sampler works backwards: it draws the recombination vectors mu first
//! (one per edge, under the coupling constraints below), then draws every
//! V_I coordinate row uniformly from the kernel of the mu matrix,
//! insisting the rows span that kernel. This pins the full space of
//! affine relations among the points to exactly the span of the three
//! edge relations, which makes the secrecy analysis of the sampled
//! configuration a finite combinatorial check instead of a generic-position
//! hope. The constraints:
//!
//! * shared single points carry equal mu coefficients in both of their
//!   edges (kills the cancellation relations of subsets missing exactly
//!   one shared block),
//! * the two coefficients of the doubled block must not be proportional
//!   across its two edges,
//! * class-specific couplings tie the edge-private coefficients to the
//!   block identities so that the residual functionals exposed by the
//!   slot masks are either removable or already known to the subsets
//!   that see them.
//!
//! One relation per class (none for G7) survives by necessity: the
//! subset holding everything but the two single shared blocks can always
//! cancel them and represent K_0. Its recombination output is therefore
//! masked at the dealing layer (see the module docs of `css`); here the
//! setup records the subset as `forced_open` and the validator checks it
//! is the only one.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::access::ClassId;
use crate::ffield::{nullspace, rank, solve_affine_combination, Elem, FVector, FieldCtx};

use super::CssError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimmonsPoint {
    pub block: usize,
    pub j: u8,
    /// Coordinates inside V_I (the last ambient coordinate is 0).
    pub coords: Vec<Elem>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimmonsSetup {
    /// Ambient dimension m; points carry m-1 stored coordinates.
    pub m: usize,
    pub points: Vec<SimmonsPoint>,
    /// Per-edge recombination coefficients aligned with `points`
    /// (zero where a point does not belong to the edge).
    pub edge_mus: Vec<Vec<Elem>>,
    /// Maximal unauthorized block subsets whose affine system is
    /// necessarily solvable; their output is neutralized by slot masks.
    pub forced_open: Vec<BTreeSet<usize>>,
}

impl SimmonsSetup {
    pub fn coord_dim(&self) -> usize {
        self.m - 1
    }

    pub fn point_index(&self, block: usize, j: u8) -> Option<usize> {
        self.points.iter().position(|pt| pt.block == block && pt.j == j)
    }

    pub fn points_of_blocks(&self, blocks: &BTreeSet<usize>) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&q| blocks.contains(&self.points[q].block))
            .collect()
    }

    /// Multiplicity R_b of each block.
    pub fn multiplicities(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for pt in &self.points {
            *out.entry(pt.block).or_insert(0) += 1;
        }
        out
    }
}

/// Deal: lambda_q = k - A.K_q for every point. `a_row` is the full
/// m-dimensional row; its last coordinate must be 1 (A.eps = 1).
pub fn simmons_deal(
    setup: &SimmonsSetup,
    k: Elem,
    a_row: &[Elem],
    ctx: &FieldCtx,
) -> Result<Vec<Elem>, CssError> {
    if a_row.len() != setup.m || a_row[setup.m - 1] % ctx.p() != 1 {
        return Err(CssError::BadDirection);
    }
    Ok(setup
        .points
        .iter()
        .map(|pt| ctx.sub(k, ctx.dot(&a_row[..setup.m - 1], &pt.coords)))
        .collect())
}

/// Recover k from a subset's lambda values: solve for mu, then sum.
/// `lambdas` maps point index -> lambda.
pub fn simmons_recover(
    setup: &SimmonsSetup,
    blocks: &BTreeSet<usize>,
    lambdas: &BTreeMap<usize, Elem>,
    ctx: &FieldCtx,
) -> Result<Elem, CssError> {
    let idxs = setup.points_of_blocks(blocks);
    let pts: Vec<FVector> =
        idxs.iter().map(|&q| FVector(setup.points[q].coords.clone())).collect();
    let target = FVector::zeros(setup.coord_dim());
    let mu = solve_affine_combination(&pts, &target, ctx)?;
    let mut k = 0u64;
    for (pos, &q) in idxs.iter().enumerate() {
        k = ctx.add(k, ctx.mul(mu[pos], lambdas[&q]));
    }
    Ok(k)
}

/// Template edges of the geometric layer for a class, as block sets.
pub fn class_edges(class: ClassId) -> [BTreeSet<usize>; 3] {
    class
        .template()
        .edges()
}

fn point_list(class: ClassId) -> Vec<(usize, u8)> {
    let mut pts = vec![(1, 1), (2, 1), (3, 1), (3, 2), (4, 1), (4, 2)];
    match class.index() {
        7 => {}
        8 => pts.push((5, 1)),
        9 => {
            pts.push((5, 1));
            pts.push((6, 1));
        }
        _ => panic!("simmons layer only backs G7..G9"),
    }
    pts
}

struct MuDraw {
    mus: Vec<Vec<Elem>>,
    xi: Elem,
}

fn nonzero(rng: &mut impl Rng, p: u64) -> Elem {
    rng.gen_range(1..p)
}

/// Draw the three constrained recombination vectors. Returns None when a
/// derived coefficient lands on zero; the caller just redraws.
fn draw_mus(
    class: ClassId,
    ids: &BTreeMap<usize, Elem>,
    ctx: &FieldCtx,
    rng: &mut impl Rng,
) -> Option<MuDraw> {
    let p = ctx.p();
    let pts = point_list(class);
    let n = pts.len();
    let at = |block: usize, j: u8| pts.iter().position(|&(b, jj)| (b, jj) == (block, j)).unwrap();
    let mut mus = vec![vec![0u64; n]; 3];
    let x = |b: usize| ids[&b];

    let (a, a2, b, b2, xi) = match class.index() {
        7 => {
            // mu0/mu1 agree on nothing; instead the ratio identity
            // a/a' + b/b' = 1 blocks the {3,4} cancellation subset.
            let a_e1 = nonzero(rng, p);
            let ra = rng.gen_range(2..p); // ratio a/a', avoiding 0 and 1
            let a_e0 = ctx.mul(ra, a_e1);
            let b_e2 = nonzero(rng, p);
            let b_e0 = ctx.mul(ctx.sub(1, ra), b_e2);
            (a_e0, a_e1, b_e0, b_e2, 0)
        }
        8 => {
            let a = nonzero(rng, p);
            let b = nonzero(rng, p);
            let b2 = nonzero(rng, p);
            let xi = ctx.add(x(2), x(4));
            (a, a, b, b2, xi)
        }
        9 => {
            let a = nonzero(rng, p);
            let b = nonzero(rng, p);
            // xi must keep the coupled coefficients nonzero and differ
            // from x4; scan the field deterministically.
            let xi = (0..p).find(|&cand| {
                cand != x(4)
                    && ctx.sub(ctx.add(x(1), x(4)), cand) != 0
                    && ctx.sub(ctx.add(x(2), x(4)), cand) != 0
            })?;
            (a, a, b, b, xi)
        }
        _ => unreachable!(),
    };

    // Edge 0 = {1,2,4}: coefficients a, b, m41, m42.
    let m41 = nonzero(rng, p);
    let m42 = ctx.sub(ctx.sub(ctx.sub(1, a), b), m41);
    if m42 == 0 {
        return None;
    }
    mus[0][at(1, 1)] = a;
    mus[0][at(2, 1)] = b;
    mus[0][at(4, 1)] = m41;
    mus[0][at(4, 2)] = m42;

    // Edge 1: {1,3} or {1,3,6}.
    let mut fixed1 = a2;
    if class.index() == 9 {
        // Coupling: mu1 at (6,1) = m41 (x2+x4-xi) x6 / (x2 x4).
        let num = ctx.mul(ctx.mul(m41, ctx.sub(ctx.add(x(2), x(4)), xi)), x(6));
        let den = ctx.mul(x(2), x(4));
        let v = ctx.div(num, den).ok()?;
        if v == 0 {
            return None;
        }
        mus[1][at(6, 1)] = v;
        fixed1 = ctx.add(fixed1, v);
    }
    let g1 = nonzero(rng, p);
    let g2 = ctx.sub(ctx.sub(1, fixed1), g1);
    if g2 == 0 {
        return None;
    }
    mus[1][at(1, 1)] = a2;
    mus[1][at(3, 1)] = g1;
    mus[1][at(3, 2)] = g2;

    // Edge 2: {2,3}, {2,3,5} or {2,3,5}.
    let mut fixed2 = b2;
    match class.index() {
        8 => {
            let w = nonzero(rng, p);
            mus[2][at(5, 1)] = w;
            fixed2 = ctx.add(fixed2, w);
        }
        9 => {
            // Coupling: mu2 at (5,1) = m41 (x1+x4-xi) x5 / (x1 x4).
            let num = ctx.mul(ctx.mul(m41, ctx.sub(ctx.add(x(1), x(4)), xi)), x(5));
            let den = ctx.mul(x(1), x(4));
            let v = ctx.div(num, den).ok()?;
            if v == 0 {
                return None;
            }
            mus[2][at(5, 1)] = v;
            fixed2 = ctx.add(fixed2, v);
        }
        _ => {}
    }
    let h1 = nonzero(rng, p);
    let h2 = ctx.sub(ctx.sub(1, fixed2), h1);
    if h2 == 0 {
        return None;
    }
    mus[2][at(2, 1)] = b2;
    mus[2][at(3, 1)] = h1;
    mus[2][at(3, 2)] = h2;

    // The doubled block's coefficients must not be proportional across
    // its two edges, or its cancellation space gains a dimension.
    let det = ctx.sub(ctx.mul(g1, h2), ctx.mul(g2, h1));
    if det == 0 {
        return None;
    }
    Some(MuDraw { mus, xi })
}

/// The subsets that can cancel every point they are missing; exactly
/// these must remain solvable.
fn forced_open(class: ClassId) -> Vec<BTreeSet<usize>> {
    match class.index() {
        7 => vec![],
        8 => vec![[3, 4, 5].into()],
        9 => vec![[3, 4, 5, 6].into()],
        _ => unreachable!(),
    }
}

/// Sample a full Simmons configuration for G7/G8/G9: constrained mu
/// vectors, kernel-spanning coordinate rows, then semantic validation
/// (edges solvable, maximal unauthorized subsets unsolvable except the
/// forced one, general position including K_0).
pub fn sample_for_class(
    class: ClassId,
    ids: &BTreeMap<usize, Elem>,
    ctx: &FieldCtx,
    rng: &mut impl Rng,
    attempts: usize,
) -> Result<(SimmonsSetup, Elem), CssError> {
    let pts = point_list(class);
    let n = pts.len();
    let m = 6usize; // largest edge has 4 points; 4 + 2 headroom
    let dim = m - 1;
    let template = class.template().as_structure();
    let max_unauth = template.maximal_unauthorized();
    let open = forced_open(class);

    for _ in 0..attempts {
        let Some(MuDraw { mus, xi }) = draw_mus(class, ids, ctx, rng) else {
            continue;
        };
        // Coordinate rows from the kernel of the mu matrix; they must
        // span it so the relation space is exactly span(mu0,mu1,mu2).
        let kernel = nullspace(&mus, n, ctx);
        debug_assert_eq!(kernel.len(), n - 3);
        let rows: Vec<Vec<Elem>> = (0..dim)
            .map(|_| {
                let mut row = vec![0u64; n];
                for basis in &kernel {
                    let c = rng.gen_range(0..ctx.p());
                    for q in 0..n {
                        row[q] = ctx.add(row[q], ctx.mul(c, basis[q]));
                    }
                }
                row
            })
            .collect();
        if rank(&rows, n, ctx) != n - 3 {
            continue;
        }
        let points: Vec<SimmonsPoint> = pts
            .iter()
            .enumerate()
            .map(|(q, &(block, j))| SimmonsPoint {
                block,
                j,
                coords: rows.iter().map(|r| r[q]).collect(),
            })
            .collect();
        let setup = SimmonsSetup {
            m,
            points,
            edge_mus: mus,
            forced_open: open.clone(),
        };
        if validate_setup(&setup, class, &max_unauth, ctx) {
            return Ok((setup, xi));
        }
    }
    Err(CssError::ExhaustedAttempts(attempts))
}

fn validate_setup(
    setup: &SimmonsSetup,
    class: ClassId,
    max_unauth: &[BTreeSet<u32>],
    ctx: &FieldCtx,
) -> bool {
    let n = setup.points.len();
    let zero = FVector::zeros(setup.coord_dim());
    let fv: Vec<FVector> =
        setup.points.iter().map(|pt| FVector(pt.coords.clone())).collect();
    // Distinct points, none at K_0, no 3 collinear including K_0.
    for q in 0..n {
        if fv[q] == zero {
            return false;
        }
        for r in q + 1..n {
            if fv[q] == fv[r] {
                return false;
            }
        }
    }
    let mut all = fv.clone();
    all.push(zero.clone());
    for a in 0..all.len() {
        for b in a + 1..all.len() {
            for c in b + 1..all.len() {
                let d1: Vec<Elem> = all[b]
                    .0
                    .iter()
                    .zip(&all[a].0)
                    .map(|(&x, &y)| ctx.sub(x, y))
                    .collect();
                let d2: Vec<Elem> = all[c]
                    .0
                    .iter()
                    .zip(&all[a].0)
                    .map(|(&x, &y)| ctx.sub(x, y))
                    .collect();
                if rank(&[d1, d2], setup.coord_dim(), ctx) < 2 {
                    return false;
                }
            }
        }
    }
    // Every edge's mu really represents K_0, and the solver agrees.
    for (e, blocks) in class_edges(class).iter().enumerate() {
        let mu = &setup.edge_mus[e];
        let mut sum = 0u64;
        let mut acc = vec![0u64; setup.coord_dim()];
        for q in 0..n {
            sum = ctx.add(sum, mu[q]);
            for d in 0..setup.coord_dim() {
                acc[d] = ctx.add(acc[d], ctx.mul(mu[q], setup.points[q].coords[d]));
            }
        }
        if sum != 1 || acc.iter().any(|&v| v != 0) {
            return false;
        }
        let idxs = setup.points_of_blocks(blocks);
        let pts: Vec<FVector> = idxs.iter().map(|&q| fv[q].clone()).collect();
        if solve_affine_combination(&pts, &zero, ctx).is_err() {
            return false;
        }
    }
    // Maximal unauthorized subsets: unsolvable except the forced one.
    for b in max_unauth {
        let blocks: BTreeSet<usize> = b.iter().map(|&x| x as usize).collect();
        let idxs = setup.points_of_blocks(&blocks);
        let pts: Vec<FVector> = idxs.iter().map(|&q| fv[q].clone()).collect();
        let solvable = solve_affine_combination(&pts, &zero, ctx).is_ok();
        let expected = setup.forced_open.contains(&blocks);
        if solvable != expected {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn ids(n: usize) -> BTreeMap<usize, Elem> {
        (1..=n).map(|b| (b, b as Elem)).collect()
    }

    #[test]
    fn sampler_produces_valid_setups() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for (class, nblocks, p) in [(7u8, 4usize, 5u64), (7, 4, 11), (8, 5, 11), (9, 6, 11)] {
            let ctx = FieldCtx::new(p).unwrap();
            let (setup, _) = sample_for_class(
                ClassId::new(class).unwrap(),
                &ids(nblocks),
                &ctx,
                &mut rng,
                4000,
            )
            .unwrap_or_else(|e| panic!("G{class} p={p}: {e}"));
            assert_eq!(setup.m, 6);
            let mult = setup.multiplicities();
            assert_eq!(mult[&3], 2);
            assert_eq!(mult[&4], 2);
            assert_eq!(mult[&1], 1);
        }
    }

    #[test]
    fn deal_and_recover_roundtrip() {
        let ctx = FieldCtx::new(11).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (setup, _) =
            sample_for_class(ClassId::new(7).unwrap(), &ids(4), &ctx, &mut rng, 4000).unwrap();
        for trial in 0..50 {
            let k = rng.gen_range(0..11);
            let mut a_row: Vec<Elem> = (0..5).map(|_| rng.gen_range(0..11)).collect();
            a_row.push(1);
            let lambdas = simmons_deal(&setup, k, &a_row, &ctx).unwrap();
            let map: BTreeMap<usize, Elem> = lambdas.iter().copied().enumerate().collect();
            for blocks in class_edges(ClassId::new(7).unwrap()) {
                let got = simmons_recover(&setup, &blocks, &map, &ctx).unwrap();
                assert_eq!(got, k, "trial {trial}");
            }
            // Unauthorized pair {1,2} has no affine representation.
            let err = simmons_recover(&setup, &[1, 2].into(), &map, &ctx);
            assert!(err.is_err());
        }
    }

    #[test]
    fn zero_randomness_row_gives_plain_k() {
        let ctx = FieldCtx::new(11).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let (setup, _) =
            sample_for_class(ClassId::new(7).unwrap(), &ids(4), &ctx, &mut rng, 4000).unwrap();
        let mut a_row = vec![0u64; 5];
        a_row.push(1);
        let lambdas = simmons_deal(&setup, 6, &a_row, &ctx).unwrap();
        assert!(lambdas.iter().all(|&l| l == 6));
        let bad = simmons_deal(&setup, 6, &[0, 0, 0, 0, 0, 2], &ctx);
        assert!(matches!(bad, Err(CssError::BadDirection)));
    }
}
