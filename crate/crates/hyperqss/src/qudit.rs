//! Single p-dimensional quantum systems: the p+1 mutually unbiased bases
//! of a prime-dimensional space, the diagonal shift unitaries, and
//! Born-rule measurement with collapse.
//!
//! The MUB vectors are `|e_l^(j)> = p^{-1/2} sum_k w^{k(l+jk)} |k>` with
//! `w = exp(2 pi i / p)`. The shift `U_{x,y} = X^x Y^y` multiplies the
//! k-th amplitude by `w^{xk + yk^2}` and moves `|e_l^(j)>` to
//! `|e_{l+x}^(j+y)>` with no residual phase, which is what lets the
//! protocol accumulate a sub-key level by level as a particle circulates.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Tolerance for state comparisons; roundoff at these dimensions stays
/// orders of magnitude below it.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuditError {
    #[error("basis or level index out of range for dimension {p}: {index}")]
    BadIndex { p: u64, index: u64 },
}

/// Which orthonormal basis a preparation or measurement refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisId {
    Computational,
    /// The j-th of the p unbiased bases, j in F_p.
    Mub(u64),
}

/// A pure state of one p-level system, as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    amps: Vec<Complex64>,
}

impl QuditState {
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// Computational basis state |k>.
    pub fn computational(p: u64, k: u64) -> Result<Self, QuditError> {
        if k >= p {
            return Err(QuditError::BadIndex { p, index: k });
        }
        let mut amps = vec![Complex64::ZERO; p as usize];
        amps[k as usize] = Complex64::ONE;
        Ok(QuditState { amps })
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn omega_pow(p: u64, e: u64) -> Complex64 {
    let angle = TAU * (e % p) as f64 / p as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// The l-th vector of the j-th unbiased basis.
pub fn mub_state(p: u64, j: u64, l: u64) -> Result<QuditState, QuditError> {
    if j >= p {
        return Err(QuditError::BadIndex { p, index: j });
    }
    if l >= p {
        return Err(QuditError::BadIndex { p, index: l });
    }
    let scale = 1.0 / (p as f64).sqrt();
    let amps = (0..p)
        .map(|k| omega_pow(p, k * (l + j * k) % p) * scale)
        .collect();
    Ok(QuditState { amps })
}

/// Basis vector for any `BasisId`.
pub fn basis_state(p: u64, basis: BasisId, l: u64) -> Result<QuditState, QuditError> {
    match basis {
        BasisId::Computational => QuditState::computational(p, l),
        BasisId::Mub(j) => mub_state(p, j, l),
    }
}

/// `|<a|b>|`.
pub fn overlap(a: &QuditState, b: &QuditState) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm()
}

/// Apply `U_{x,y} = X^x Y^y`: amplitude k picks up `w^{xk + yk^2}`.
pub fn apply_shift(x: u64, y: u64, state: &QuditState) -> QuditState {
    let p = state.dim() as u64;
    let amps = state
        .amps
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let k = k as u64;
            a * omega_pow(p, (x % p * k + y % p * (k * k % p)) % p)
        })
        .collect();
    QuditState { amps }
}

/// Born-rule measurement in the given basis: samples an outcome level and
/// collapses the state onto the measured basis vector.
pub fn measure(state: &QuditState, basis: BasisId, rng: &mut impl Rng) -> (u64, QuditState) {
    let p = state.dim() as u64;
    let mut probs = Vec::with_capacity(p as usize);
    for l in 0..p {
        let b = basis_state(p, basis, l).expect("level in range");
        probs.push(overlap(&b, state).powi(2));
    }
    let total: f64 = probs.iter().sum();
    let mut draw = rng.gen::<f64>() * total;
    let mut outcome = p - 1;
    for (l, &pr) in probs.iter().enumerate() {
        if draw < pr {
            outcome = l as u64;
            break;
        }
        draw -= pr;
    }
    let collapsed = basis_state(p, basis, outcome).expect("level in range");
    (outcome, collapsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn states_equal(a: &QuditState, b: &QuditState) -> bool {
        a.amps
            .iter()
            .zip(b.amps())
            .all(|(x, y)| (x - y).norm() <= STATE_TOL)
    }

    #[test]
    fn mub_small_cases() {
        let s = mub_state(3, 0, 0).unwrap();
        let r = 1.0 / 3f64.sqrt();
        for a in s.amps() {
            assert!((a - Complex64::new(r, 0.0)).norm() < 1e-12);
        }
        let s = mub_state(3, 0, 1).unwrap();
        assert!((s.amps()[0] - Complex64::new(r, 0.0)).norm() < 1e-12);
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        assert!((s.amps()[1] - w * r).norm() < 1e-12);
        assert!((s.amps()[2] - w * w * r).norm() < 1e-12);
        assert!(close(mub_state(11, 7, 4).unwrap().norm(), 1.0, 1e-12));
        assert_eq!(mub_state(3, 3, 0), Err(QuditError::BadIndex { p: 3, index: 3 }));
    }

    #[test]
    fn unbiasedness_and_orthonormality() {
        for p in [3u64, 5, 7, 11] {
            let target = 1.0 / (p as f64).sqrt();
            let bases: Vec<BasisId> = std::iter::once(BasisId::Computational)
                .chain((0..p).map(BasisId::Mub))
                .collect();
            for (bi, &ba) in bases.iter().enumerate() {
                for (bj, &bb) in bases.iter().enumerate() {
                    for l in 0..p {
                        for m in 0..p {
                            let sa = basis_state(p, ba, l).unwrap();
                            let sb = basis_state(p, bb, m).unwrap();
                            let ov = overlap(&sa, &sb);
                            let expect = if bi == bj {
                                if l == m { 1.0 } else { 0.0 }
                            } else {
                                target
                            };
                            assert!(
                                close(ov, expect, STATE_TOL),
                                "p={p} bases {bi},{bj} levels {l},{m}: {ov} vs {expect}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn shift_law_exhaustive_small_p() {
        for p in [3u64, 5, 7] {
            for j in 0..p {
                for l in 0..p {
                    let base = mub_state(p, j, l).unwrap();
                    for x in 0..p {
                        for y in 0..p {
                            let shifted = apply_shift(x, y, &base);
                            let expect = mub_state(p, (j + y) % p, (l + x) % p).unwrap();
                            assert!(
                                states_equal(&shifted, &expect),
                                "p={p} j={j} l={l} x={x} y={y}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn shift_law_sampled_p11() {
        let p = 11u64;
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (j, l, x, y) = (
                rng.gen_range(0..p),
                rng.gen_range(0..p),
                rng.gen_range(0..p),
                rng.gen_range(0..p),
            );
            let got = apply_shift(x, y, &mub_state(p, j, l).unwrap());
            let expect = mub_state(p, (j + y) % p, (l + x) % p).unwrap();
            assert!(states_equal(&got, &expect));
            assert!(close(got.norm(), 1.0, 1e-12));
        }
    }

    #[test]
    fn shifts_compose_additively() {
        let p = 7u64;
        let psi = mub_state(p, 3, 2).unwrap();
        let a = apply_shift(2, 4, &apply_shift(5, 6, &psi));
        let b = apply_shift(0, 3, &psi); // (2+5, 4+6) mod 7
        assert!(states_equal(&a, &b));
        assert!(states_equal(&apply_shift(0, 0, &psi), &psi));
    }

    #[test]
    fn measurement_eigenstate_and_uniform() {
        let p = 11u64;
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let psi = mub_state(p, 4, 9).unwrap();
        for _ in 0..20 {
            let (l, collapsed) = measure(&psi, BasisId::Mub(4), &mut rng);
            assert_eq!(l, 9);
            assert!(states_equal(&collapsed, &psi));
        }
        let (k, _) = measure(&QuditState::computational(p, 6).unwrap(), BasisId::Computational, &mut rng);
        assert_eq!(k, 6);

        // Mismatched basis: frequencies within 4 sigma of 1/p.
        let n = 10_000usize;
        let mut counts = vec![0usize; p as usize];
        for _ in 0..n {
            let (l, _) = measure(&psi, BasisId::Mub(5), &mut rng);
            counts[l as usize] += 1;
        }
        let mean = n as f64 / p as f64;
        let sigma = (n as f64 * (1.0 / p as f64) * (1.0 - 1.0 / p as f64)).sqrt();
        for (l, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - mean).abs() < 4.0 * sigma,
                "level {l}: {c} vs mean {mean:.1}"
            );
        }
    }
}
