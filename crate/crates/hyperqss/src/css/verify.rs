//! The perfectness oracle: recovery and secrecy checks driven by the
//! actual dealt shares, independent of how the construction was derived.
//!
//! Exhaustive mode enumerates every (secret, dealer-randomness) pair and
//! counts, per maximal unauthorized subset, how often each secret
//! co-occurs with each observable share tuple; perfect secrecy means the
//! counts are exactly uniform. Sampled mode draws deals and runs
//! chi-square independence tests between the secret and (a) each single
//! share a subset holds and (b) the value of the affine-recombination
//! attack wherever a subset's Simmons system is solvable. Both modes
//! check that every edge recovers the dealt secret on every deal seen.
//!
//! As a third, exact barrier the oracle derives the linear model of the
//! dealer by probing and certifies span secrecy: a subset's share rows
//! must be spanned by the randomness columns alone. Everything the
//! schemes in this crate do is F_p-linear with zero offset, which the
//! model verifies against the dealer on random inputs before relying on
//! it.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::access::Participant;
use crate::ffield::{rank, solve_affine_combination, Elem, FVector, FieldCtx};

use super::{
    deal_secret, recover_secret, CssError, SchemeDescriptor, SchemeKind, ShareBundle, Slot, Tag,
    VecTape,
};

#[derive(Debug, Clone, Copy)]
pub enum VerifyMode {
    /// Enumerate when the joint space p^(secret+randomness) fits the
    /// budget, otherwise sample.
    Auto { budget: u64, samples: usize, seed: u64 },
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetFinding {
    pub subset: BTreeSet<Participant>,
    pub secrecy_ok: bool,
    pub span_ok: bool,
    /// Smallest chi-square p-value over this subset's tests (sampled
    /// mode), with the Bonferroni-adjusted acceptance threshold.
    pub min_p_value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerfectnessReport {
    pub mode: String,
    pub deals: u64,
    pub recover_ok: bool,
    pub secrecy_ok: bool,
    /// Exact linear certificate over all subsets (colspace(S) inside
    /// colspace(T)); independent of the statistical arms.
    pub span_ok: bool,
    pub findings: Vec<SubsetFinding>,
}

/// Linear model of the dealer: shares = columns * (secret || tape).
struct LinearModel {
    layout: Vec<(Participant, Tag)>,
    secret_len: usize,
    tape_dim: usize,
    /// columns[c][r]: row r of column c; secret columns first.
    columns: Vec<Vec<Elem>>,
}

fn bundle_to_vec(layout: &[(Participant, Tag)], bundle: &ShareBundle) -> Vec<Elem> {
    layout
        .iter()
        .map(|&(pt, tag)| {
            bundle.0[&pt]
                .iter()
                .find(|&&(t, _)| t == tag)
                .map(|&(_, v)| v)
                .expect("layout matches bundle")
        })
        .collect()
}

fn deal_vec(desc: &SchemeDescriptor, secret: &[Elem], tape_vals: &[Elem]) -> ShareBundle {
    let mut tape = VecTape { values: tape_vals, idx: 0 };
    let (_, bundle) = deal_secret(desc, secret, &mut tape).expect("probe deal");
    bundle
}

fn build_model(desc: &SchemeDescriptor) -> LinearModel {
    let secret_len = desc.secret_len;
    let tape_dim = desc.full_randomness_dim();
    let zero_secret = vec![0u64; secret_len];
    let zero_tape = vec![0u64; tape_dim];
    let base = deal_vec(desc, &zero_secret, &zero_tape);
    let mut layout = Vec::new();
    for (&pt, shares) in &base.0 {
        for &(tag, _) in shares {
            layout.push((pt, tag));
        }
    }
    let mut columns = Vec::with_capacity(secret_len + tape_dim);
    for c in 0..secret_len {
        let mut secret = zero_secret.clone();
        secret[c] = 1;
        columns.push(bundle_to_vec(&layout, &deal_vec(desc, &secret, &zero_tape)));
    }
    for c in 0..tape_dim {
        let mut tape = zero_tape.clone();
        tape[c] = 1;
        columns.push(bundle_to_vec(&layout, &deal_vec(desc, &zero_secret, &tape)));
    }
    let model = LinearModel { layout, secret_len, tape_dim, columns };
    // The model only holds if dealing is linear with zero offset; verify
    // against the dealer on random inputs.
    let ctx = desc.ctx();
    let mut rng = ChaCha20Rng::seed_from_u64(0x6d6f64656c);
    let zero = bundle_to_vec(&model.layout, &deal_vec(desc, &zero_secret, &zero_tape));
    assert!(zero.iter().all(|&v| v == 0), "dealer has a nonzero offset");
    for _ in 0..8 {
        let secret: Vec<Elem> = (0..secret_len).map(|_| rng.gen_range(0..desc.p)).collect();
        let tape: Vec<Elem> = (0..tape_dim).map(|_| rng.gen_range(0..desc.p)).collect();
        let got = bundle_to_vec(&model.layout, &deal_vec(desc, &secret, &tape));
        let mut want = vec![0u64; model.layout.len()];
        for (c, x) in secret.iter().chain(tape.iter()).enumerate() {
            for r in 0..want.len() {
                want[r] = ctx.add(want[r], ctx.mul(*x, model.columns[c][r]));
            }
        }
        assert_eq!(got, want, "dealer is not linear");
    }
    model
}

/// Exact certificate: for each subset, the secret columns restricted to
/// its rows must lie in the span of the tape columns.
fn span_secrecy(
    model: &LinearModel,
    rows: &[usize],
    ctx: &FieldCtx,
) -> bool {
    let tape_rows: Vec<Vec<Elem>> = (0..model.tape_dim)
        .map(|c| rows.iter().map(|&r| model.columns[model.secret_len + c][r]).collect())
        .collect();
    let mut all_rows = tape_rows.clone();
    for c in 0..model.secret_len {
        all_rows.push(rows.iter().map(|&r| model.columns[c][r]).collect());
    }
    rank(&tape_rows, rows.len(), ctx) == rank(&all_rows, rows.len(), ctx)
}

fn chi_square_p(table: &BTreeMap<(u64, u64), u64>, n: u64) -> Option<f64> {
    let mut row_tot: BTreeMap<u64, u64> = BTreeMap::new();
    let mut col_tot: BTreeMap<u64, u64> = BTreeMap::new();
    for (&(r, c), &v) in table {
        *row_tot.entry(r).or_default() += v;
        *col_tot.entry(c).or_default() += v;
    }
    let rows = row_tot.len();
    let cols = col_tot.len();
    if rows < 2 || cols < 2 {
        return None; // degenerate table carries no evidence either way
    }
    let mut stat = 0.0f64;
    for (&r, &rt) in &row_tot {
        for (&c, &ct) in &col_tot {
            let expect = rt as f64 * ct as f64 / n as f64;
            if expect <= 0.0 {
                continue;
            }
            let obs = table.get(&(r, c)).copied().unwrap_or(0) as f64;
            stat += (obs - expect) * (obs - expect) / expect;
        }
    }
    let df = ((rows - 1) * (cols - 1)) as f64;
    let dist = ChiSquared::new(df).ok()?;
    Some(1.0 - dist.cdf(stat))
}

/// The affine-recombination attack a subset can mount on the geometric
/// layer: present when its points span K_0. Returns the lambda slots and
/// mu coefficients of one solution.
fn simmons_attack(
    desc: &SchemeDescriptor,
    full_blocks: &BTreeSet<usize>,
) -> Option<Vec<(Slot, Elem)>> {
    match &desc.kind {
        SchemeKind::TwoLayer { simmons, .. } => {
            let idxs = simmons.points_of_blocks(full_blocks);
            if idxs.is_empty() {
                return None;
            }
            let ctx = desc.ctx();
            let pts: Vec<FVector> =
                idxs.iter().map(|&q| FVector(simmons.points[q].coords.clone())).collect();
            let mu =
                solve_affine_combination(&pts, &FVector::zeros(simmons.coord_dim()), &ctx).ok()?;
            Some(
                idxs.iter()
                    .zip(mu)
                    .map(|(&q, c)| {
                        let pt = &simmons.points[q];
                        ((pt.block, Tag::Lam(pt.j)), c)
                    })
                    .collect(),
            )
        }
        SchemeKind::MaskedReduction { inner, block_map, .. } => {
            let inv: BTreeMap<usize, usize> =
                block_map.iter().map(|(&i, &o)| (o, i)).collect();
            let inner_blocks: BTreeSet<usize> =
                full_blocks.iter().filter_map(|b| inv.get(b).copied()).collect();
            let attack = simmons_attack(inner, &inner_blocks)?;
            Some(
                attack
                    .into_iter()
                    .map(|((ib, tag), c)| ((block_map[&ib], tag), c))
                    .collect(),
            )
        }
        _ => None,
    }
}

/// Check recovery and secrecy of a descriptor. See the module docs for
/// what each mode does.
pub fn verify_perfect(desc: &SchemeDescriptor, mode: VerifyMode) -> Result<PerfectnessReport, CssError> {
    let ctx = desc.ctx();
    let model = build_model(desc);
    let structure = desc.structure();
    let max_unauth = structure.maximal_unauthorized();
    let p = desc.p;

    // Row indices each subset can see.
    let subset_rows: Vec<Vec<usize>> = max_unauth
        .iter()
        .map(|sub| {
            model
                .layout
                .iter()
                .enumerate()
                .filter(|(_, &(pt, _))| sub.contains(&pt))
                .map(|(r, _)| r)
                .collect()
        })
        .collect();
    let span_flags: Vec<bool> =
        subset_rows.iter().map(|rows| span_secrecy(&model, rows, &ctx)).collect();

    let total_dims = (model.secret_len + model.tape_dim) as u32;
    let joint_space = (p as f64).powi(total_dims as i32);
    let exhaustive = match mode {
        VerifyMode::Exhaustive => true,
        VerifyMode::Sampled { .. } => false,
        VerifyMode::Auto { budget, .. } => joint_space <= budget as f64,
    };

    if exhaustive {
        verify_exhaustive(desc, &model, &max_unauth, &subset_rows, &span_flags, &ctx)
    } else {
        let (samples, seed) = match mode {
            VerifyMode::Sampled { samples, seed } => (samples, seed),
            VerifyMode::Auto { samples, seed, .. } => (samples, seed),
            VerifyMode::Exhaustive => unreachable!(),
        };
        verify_sampled(desc, &model, &max_unauth, &subset_rows, &span_flags, &ctx, samples, seed)
    }
}

fn secret_index(secret: &[Elem], p: u64) -> u64 {
    secret.iter().fold(0, |acc, &s| acc * p + s)
}

#[allow(clippy::too_many_arguments)]
fn verify_exhaustive(
    desc: &SchemeDescriptor,
    model: &LinearModel,
    max_unauth: &[BTreeSet<Participant>],
    subset_rows: &[Vec<usize>],
    span_flags: &[bool],
    ctx: &FieldCtx,
) -> Result<PerfectnessReport, CssError> {
    let p = desc.p;
    let nrows = model.layout.len();
    let structure = desc.structure();
    let template = desc.class.template();

    // Per-edge recovery functionals over the share vector, by probing.
    let edges: Vec<BTreeSet<Participant>> = structure.edges.clone();
    let mut edge_cols: Vec<Vec<Vec<Elem>>> = Vec::new(); // [edge][row] -> secret_len
    for e in 0..template.edges().len() {
        let subset = &edges[e];
        let mut cols = Vec::with_capacity(nrows);
        for r in 0..nrows {
            let mut bundle = ShareBundle::default();
            for (i, &(pt, tag)) in model.layout.iter().enumerate() {
                bundle.0.entry(pt).or_default().push((tag, if i == r { 1 } else { 0 }));
            }
            let rec = recover_secret(desc, subset, &bundle)?;
            cols.push(rec);
        }
        edge_cols.push(cols);
    }

    // Count tables: per subset, per share-tuple key, per secret index.
    let nsecrets = (p as usize).pow(model.secret_len as u32);
    let mut counts: Vec<Vec<u32>> = subset_rows
        .iter()
        .map(|rows| vec![0u32; (p as usize).pow(rows.len() as u32) * nsecrets])
        .collect();

    let tape_dim = model.tape_dim;
    let mut deals = 0u64;
    let mut recover_ok = true;
    let mut secret = vec![0u64; model.secret_len];
    loop {
        // Share vector and per-edge estimates for this secret at tape=0.
        let mut v = vec![0u64; nrows];
        for c in 0..model.secret_len {
            for r in 0..nrows {
                v[r] = ctx.add(v[r], ctx.mul(secret[c], model.columns[c][r]));
            }
        }
        let mut estimates: Vec<Vec<Elem>> = edge_cols
            .iter()
            .map(|cols| {
                let mut est = vec![0u64; model.secret_len];
                for r in 0..nrows {
                    for s in 0..model.secret_len {
                        est[s] = ctx.add(est[s], ctx.mul(v[r], cols[r][s]));
                    }
                }
                est
            })
            .collect();
        // Odometer over the tape; each step adds one model column (and
        // its pre-multiplied recovery contribution) per digit carry.
        let mut digits = vec![0u64; tape_dim];
        let sidx = secret_index(&secret, p) as usize;
        loop {
            deals += 1;
            for e in 0..estimates.len() {
                if estimates[e] != secret {
                    recover_ok = false;
                }
            }
            for (bi, rows) in subset_rows.iter().enumerate() {
                let mut key = 0usize;
                for &r in rows {
                    key = key * p as usize + v[r] as usize;
                }
                counts[bi][key * nsecrets + sidx] += 1;
            }
            // Advance the odometer.
            let mut t = 0;
            loop {
                if t == tape_dim {
                    break;
                }
                let col = &model.columns[model.secret_len + t];
                for r in 0..nrows {
                    v[r] = ctx.add(v[r], col[r]);
                }
                for (e, cols) in edge_cols.iter().enumerate() {
                    for s in 0..model.secret_len {
                        let mut delta = 0u64;
                        for r in 0..nrows {
                            delta = ctx.add(delta, ctx.mul(col[r], cols[r][s]));
                        }
                        estimates[e][s] = ctx.add(estimates[e][s], delta);
                    }
                }
                digits[t] += 1;
                if digits[t] < p {
                    break;
                }
                digits[t] = 0;
                t += 1;
            }
            if t == tape_dim {
                break;
            }
        }
        // Next secret.
        let mut c = 0;
        loop {
            if c == model.secret_len {
                break;
            }
            secret[c] += 1;
            if secret[c] < p {
                break;
            }
            secret[c] = 0;
            c += 1;
        }
        if c == model.secret_len {
            break;
        }
    }

    // Uniformity: within every observable key, all secrets equally often.
    let mut findings = Vec::new();
    let mut secrecy_ok = true;
    for (bi, subset) in max_unauth.iter().enumerate() {
        let nkeys = (p as usize).pow(subset_rows[bi].len() as u32);
        let mut ok = true;
        'keys: for key in 0..nkeys {
            let base = key * nsecrets;
            let first = counts[bi][base];
            for s in 1..nsecrets {
                if counts[bi][base + s] != first {
                    ok = false;
                    break 'keys;
                }
            }
        }
        secrecy_ok &= ok;
        findings.push(SubsetFinding {
            subset: subset.clone(),
            secrecy_ok: ok,
            span_ok: span_flags[bi],
            min_p_value: None,
            threshold: None,
            detail: if ok {
                "exact conditional uniformity".into()
            } else {
                "conditional secret distribution is not uniform".into()
            },
        });
    }
    Ok(PerfectnessReport {
        mode: "exhaustive".into(),
        deals,
        recover_ok,
        secrecy_ok,
        span_ok: span_flags.iter().all(|&b| b),
        findings,
    })
}

#[allow(clippy::too_many_arguments)]
fn verify_sampled(
    desc: &SchemeDescriptor,
    model: &LinearModel,
    max_unauth: &[BTreeSet<Participant>],
    subset_rows: &[Vec<usize>],
    span_flags: &[bool],
    ctx: &FieldCtx,
    samples: usize,
    seed: u64,
) -> Result<PerfectnessReport, CssError> {
    let p = desc.p;
    let structure = desc.structure();
    let template = desc.class.template();
    let nedges = template.edges().len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    // Per-subset attack functionals (affine recombination where the
    // subset's Simmons system is solvable).
    let attacks: Vec<Option<Vec<(usize, Elem)>>> = max_unauth
        .iter()
        .map(|sub| {
            let full_blocks: BTreeSet<usize> = desc
                .blocks
                .iter()
                .filter(|(_, members)| members.iter().all(|m| sub.contains(m)))
                .map(|(&b, _)| b)
                .collect();
            simmons_attack(desc, &full_blocks).map(|slots| {
                slots
                    .into_iter()
                    .map(|((block, tag), c)| {
                        // Sum of the members' rows reconstructs the block
                        // value; all members of a full block are present.
                        let rows: Vec<usize> = model
                            .layout
                            .iter()
                            .enumerate()
                            .filter(|(_, &(pt, t))| {
                                t == tag && desc.blocks[&block].contains(&pt)
                            })
                            .map(|(r, _)| r)
                            .collect();
                        (rows, c)
                    })
                    .flat_map(|(rows, c)| rows.into_iter().map(move |r| (r, c)))
                    .collect()
            })
        })
        .collect();

    // Contingency tables: per subset, per single-share row (share value x
    // secret) and the attack value table.
    let mut share_tables: Vec<Vec<BTreeMap<(u64, u64), u64>>> = subset_rows
        .iter()
        .map(|rows| vec![BTreeMap::new(); rows.len()])
        .collect();
    let mut attack_tables: Vec<BTreeMap<(u64, u64), u64>> =
        max_unauth.iter().map(|_| BTreeMap::new()).collect();

    let mut recover_ok = true;
    for _ in 0..samples {
        let secret: Vec<Elem> = (0..model.secret_len).map(|_| rng.gen_range(0..p)).collect();
        let tape_vals: Vec<Elem> =
            (0..model.tape_dim).map(|_| rng.gen_range(0..p)).collect();
        let bundle = deal_vec(desc, &secret, &tape_vals);
        let v = bundle_to_vec(&model.layout, &bundle);
        for e in 0..nedges {
            let rec = recover_secret(desc, &structure.edges[e], &bundle)?;
            if rec != secret {
                recover_ok = false;
            }
        }
        let sidx = secret_index(&secret, p);
        for (bi, rows) in subset_rows.iter().enumerate() {
            for (pos, &r) in rows.iter().enumerate() {
                *share_tables[bi][pos].entry((v[r], sidx)).or_default() += 1;
            }
            if let Some(attack) = &attacks[bi] {
                let mut val = 0u64;
                for &(r, c) in attack {
                    val = ctx.add(val, ctx.mul(c, v[r]));
                }
                *attack_tables[bi].entry((val, sidx)).or_default() += 1;
            }
        }
    }

    let mut findings = Vec::new();
    let mut secrecy_ok = true;
    for (bi, subset) in max_unauth.iter().enumerate() {
        let mut pvals = Vec::new();
        for table in &share_tables[bi] {
            if let Some(pv) = chi_square_p(table, samples as u64) {
                pvals.push(pv);
            }
        }
        if attacks[bi].is_some() {
            if let Some(pv) = chi_square_p(&attack_tables[bi], samples as u64) {
                pvals.push(pv);
            }
        }
        let ntests = pvals.len().max(1);
        let threshold = 0.01 / ntests as f64;
        let min_p = pvals.iter().cloned().fold(f64::INFINITY, f64::min);
        let ok = pvals.iter().all(|&pv| pv > threshold);
        secrecy_ok &= ok;
        findings.push(SubsetFinding {
            subset: subset.clone(),
            secrecy_ok: ok,
            span_ok: span_flags[bi],
            min_p_value: if pvals.is_empty() { None } else { Some(min_p) },
            threshold: Some(threshold),
            detail: format!(
                "{} single-share tests{}",
                share_tables[bi].len(),
                if attacks[bi].is_some() { " + recombination attack" } else { "" }
            ),
        });
    }
    Ok(PerfectnessReport {
        mode: format!("sampled({samples})"),
        deals: samples as u64,
        recover_ok,
        secrecy_ok,
        span_ok: span_flags.iter().all(|&b| b),
        findings,
    })
}
