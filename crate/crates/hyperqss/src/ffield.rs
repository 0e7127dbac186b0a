//! Exact arithmetic and small linear algebra over the prime field F_p.
//!
//! Everything downstream (scheme construction, share recombination, the
//! protocol's basis indices) runs on `FieldCtx`: a prime modulus together
//! with a primitive element and its power/log tables. Elements are kept as
//! canonical residues in `[0, p-1]` so equality is plain `==`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A field element, stored as a canonical residue in `[0, p-1]`.
pub type Elem = u64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("cannot invert zero")]
    ZeroInverse,
    #[error("discrete log of zero is undefined")]
    ZeroArgument,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is too small; the constructions need p >= 5")]
    TooSmall(u64),
    #[error("affine system has no solution")]
    NoSolution,
    #[error("singular system: repeated evaluation points")]
    SingularSystem,
}

/// Prime field context: modulus, primitive element, and lookup tables.
///
/// `pow_table[e] = c^e mod p` for `e` in `[0, p-2]`, and `log_table` is its
/// inverse on the nonzero residues. Immutable after construction and safe
/// to share across threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldCtx {
    p: u64,
    c: Elem,
    pow_table: Vec<Elem>,
    log_table: Vec<u64>,
}

/// Deterministic trial-division primality check; p stays small here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest primitive element of F_p, by brute-force order check.
pub fn find_primitive(p: u64) -> Result<Elem, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    'cand: for c in 2..p {
        let mut x = 1u64;
        for _ in 0..p - 2 {
            x = x * c % p;
            if x == 1 {
                continue 'cand;
            }
        }
        return Ok(c);
    }
    // p = 2 or 3 fall out of the loop; the callers require p >= 5 anyway.
    Err(FieldError::TooSmall(p))
}

impl FieldCtx {
    /// Build the context for an odd prime `p >= 5`.
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p < 5 {
            return Err(FieldError::TooSmall(p));
        }
        let c = find_primitive(p)?;
        let mut pow_table = Vec::with_capacity((p - 1) as usize);
        let mut log_table = vec![0u64; p as usize];
        let mut x = 1u64;
        for e in 0..p - 1 {
            pow_table.push(x);
            log_table[x as usize] = e;
            x = x * c % p;
        }
        Ok(FieldCtx { p, c, pow_table, log_table })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The primitive element the tables are built on.
    pub fn primitive(&self) -> Elem {
        self.c
    }

    /// Reduce a signed integer to its canonical residue.
    pub fn elem(&self, v: i64) -> Elem {
        v.rem_euclid(self.p as i64) as Elem
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        (a + b) % self.p
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        (a + self.p - b % self.p) % self.p
    }

    pub fn neg(&self, a: Elem) -> Elem {
        (self.p - a % self.p) % self.p
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        a * b % self.p
    }

    /// Multiplicative inverse via the log tables.
    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        let a = a % self.p;
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let e = self.log_table[a as usize];
        Ok(self.pow_table[((self.p - 1 - e) % (self.p - 1)) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `c^e mod p` for any exponent.
    pub fn pow_primitive(&self, e: u64) -> Elem {
        self.pow_table[(e % (self.p - 1)) as usize]
    }

    /// Exponent `e` in `[0, p-2]` with `c^e = v`, by table lookup.
    pub fn discrete_log(&self, v: Elem) -> Result<u64, FieldError> {
        let v = v % self.p;
        if v == 0 {
            return Err(FieldError::ZeroArgument);
        }
        Ok(self.log_table[v as usize])
    }

    /// Evaluate a polynomial given by coefficients `[c0, c1, ...]` at `x`.
    pub fn poly_eval(&self, coeffs: &[Elem], x: Elem) -> Elem {
        let mut acc = 0u64;
        for &c in coeffs.iter().rev() {
            acc = (acc * x + c) % self.p;
        }
        acc
    }

    /// Dot product of two equal-length vectors.
    pub fn dot(&self, a: &[Elem], b: &[Elem]) -> Elem {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = 0u64;
        for (&x, &y) in a.iter().zip(b) {
            acc = (acc + x * y) % self.p;
        }
        acc
    }
}

/// A point of the affine space AG(m, F_p), as a fixed-length coordinate row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FVector(pub Vec<Elem>);

impl FVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn zeros(m: usize) -> Self {
        FVector(vec![0; m])
    }

    /// Parse signed literals (the papers write -1 for p-1) into residues.
    pub fn from_signed(v: &[i64], ctx: &FieldCtx) -> Self {
        FVector(v.iter().map(|&x| ctx.elem(x)).collect())
    }
}

/// Reduced row echelon form of an augmented matrix, in place.
///
/// Columns are eliminated left to right with the first nonzero pivot row,
/// which pins down a unique representative when the system is
/// underdetermined. Returns the pivot column of each pivot row.
fn rref(rows: &mut Vec<Vec<Elem>>, ncols: usize, ctx: &FieldCtx) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = ctx.inv(rows[r][col]).expect("pivot nonzero");
        for v in rows[r].iter_mut() {
            *v = ctx.mul(*v, inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let f = rows[i][col];
                for c in 0..rows[i].len() {
                    let t = ctx.mul(f, rows[r][c]);
                    rows[i][c] = ctx.sub(rows[i][c], t);
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Solve `A x = b` over F_p with the deterministic pivoting above; free
/// variables are set to zero. `None` when inconsistent.
pub fn solve_linear(a: &[Vec<Elem>], b: &[Elem], ctx: &FieldCtx) -> Option<Vec<Elem>> {
    let nrows = a.len();
    let ncols = if nrows == 0 { 0 } else { a[0].len() };
    let mut rows: Vec<Vec<Elem>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r: Vec<Elem> = row.iter().map(|&v| v % ctx.p()).collect();
            r.push(rhs % ctx.p());
            r
        })
        .collect();
    let pivots = rref(&mut rows, ncols, ctx);
    // A pivot in the augmented column means 0 = 1.
    for row in rows.iter() {
        if row[..ncols].iter().all(|&v| v == 0) && row[ncols] != 0 {
            return None;
        }
    }
    let mut x = vec![0u64; ncols];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = rows[r][ncols];
    }
    Some(x)
}

/// Nullspace basis of the matrix with the given rows (vectors x with
/// `rows · x = 0`), using the same deterministic elimination.
pub fn nullspace(rows_in: &[Vec<Elem>], ncols: usize, ctx: &FieldCtx) -> Vec<Vec<Elem>> {
    let mut rows: Vec<Vec<Elem>> = rows_in
        .iter()
        .map(|r| {
            let mut r: Vec<Elem> = r.iter().map(|&v| v % ctx.p()).collect();
            r.push(0);
            r
        })
        .collect();
    let pivots = rref(&mut rows, ncols, ctx);
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; ncols];
        v[free] = 1;
        for (r, &col) in pivots.iter().enumerate() {
            v[col] = ctx.neg(rows[r][free]);
        }
        basis.push(v);
    }
    basis
}

/// Rank of the matrix with the given rows.
pub fn rank(rows_in: &[Vec<Elem>], ncols: usize, ctx: &FieldCtx) -> usize {
    let mut rows: Vec<Vec<Elem>> = rows_in
        .iter()
        .map(|r| r.iter().map(|&v| v % ctx.p()).collect())
        .collect();
    rref(&mut rows, ncols, ctx).len()
}

/// Coefficients mu with `sum mu_i * points_i = target` and `sum mu_i = 1`.
///
/// This is the recombination step of the Simmons geometric scheme: an
/// authorized subset's points admit such a representation of K_0, an
/// unauthorized one's must not. Inconsistency comes back as `NoSolution`.
pub fn solve_affine_combination(
    points: &[FVector],
    target: &FVector,
    ctx: &FieldCtx,
) -> Result<Vec<Elem>, FieldError> {
    let n = points.len();
    let m = target.dim();
    debug_assert!(points.iter().all(|p| p.dim() == m));
    // m coordinate equations, then the affine sum row.
    let mut a = Vec::with_capacity(m + 1);
    let mut b = Vec::with_capacity(m + 1);
    for coord in 0..m {
        a.push((0..n).map(|q| points[q].0[coord]).collect::<Vec<_>>());
        b.push(target.0[coord]);
    }
    a.push(vec![1; n]);
    b.push(1);
    solve_linear(&a, &b, ctx).ok_or(FieldError::NoSolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx11() -> FieldCtx {
        FieldCtx::new(11).unwrap()
    }

    #[test]
    fn inverse_basics() {
        let ctx = ctx11();
        assert_eq!(ctx.inv(3), Ok(4));
        assert_eq!(ctx.inv(1), Ok(1));
        assert_eq!(ctx.inv(0), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn primitive_elements() {
        assert_eq!(find_primitive(11), Ok(2));
        assert_eq!(find_primitive(7), Ok(3));
        assert_eq!(find_primitive(5), Ok(2));
        assert_eq!(find_primitive(10), Err(FieldError::NotPrime(10)));
    }

    #[test]
    fn discrete_log_table() {
        let ctx = ctx11();
        assert_eq!(ctx.discrete_log(8), Ok(3)); // 2^3 = 8
        assert_eq!(ctx.discrete_log(1), Ok(0));
        assert_eq!(ctx.discrete_log(7), Ok(7)); // 2^7 = 128 = 7 mod 11
        assert_eq!(ctx.discrete_log(0), Err(FieldError::ZeroArgument));
        for e in 0..10 {
            assert_eq!(ctx.discrete_log(ctx.pow_primitive(e)), Ok(e));
        }
    }

    /// Example 1, subset 1234: the printed mu vector is reproduced exactly.
    #[test]
    fn affine_combination_example1_1234() {
        let ctx = ctx11();
        let pts = [
            FVector::from_signed(&[1, 2, 2, 4, 5], &ctx),
            FVector::from_signed(&[2, 1, 2, 2, 4], &ctx),
            FVector::from_signed(&[3, 0, 1, 4, 3], &ctx),
            FVector::from_signed(&[4, -1, 0, 1, 1], &ctx),
            FVector::from_signed(&[5, 5, -1, 0, 1], &ctx),
        ];
        let mu = solve_affine_combination(&pts, &FVector::zeros(5), &ctx).unwrap();
        assert_eq!(mu, vec![4, 8, 7, 6, 9]);
    }

    /// Example III.1, subset 124: (-1,-6,2,-5) normalizes to (10,5,2,6).
    #[test]
    fn affine_combination_example3_124() {
        let ctx = ctx11();
        let pts = [
            FVector::from_signed(&[1, 2, 1, 4, 0], &ctx),
            FVector::from_signed(&[2, 1, 3, 2, 4], &ctx),
            FVector::from_signed(&[5, 1, -1, 0, 1], &ctx),
            FVector::from_signed(&[6, 1, -2, -1, 0], &ctx),
        ];
        let mu = solve_affine_combination(&pts, &FVector::zeros(5), &ctx).unwrap();
        assert_eq!(mu, vec![10, 5, 2, 6]);
    }

    #[test]
    fn affine_combination_degenerate() {
        let ctx = ctx11();
        let p = FVector::from_signed(&[1, 1, 0], &ctx);
        let q = p.clone();
        let off = FVector::from_signed(&[0, 0, 1], &ctx);
        assert_eq!(
            solve_affine_combination(&[p, q], &off, &ctx),
            Err(FieldError::NoSolution)
        );
    }

    /// Brute-force oracle: elimination agrees with exhaustive search on
    /// small systems (dimension <= 3, p <= 7).
    #[test]
    fn elimination_matches_exhaustive_search() {
        for p in [5u64, 7] {
            let ctx = FieldCtx::new(p).unwrap();
            let mut lcg = 0x2545f4914f6cdd1du64;
            let mut next = move || {
                lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (lcg >> 33) % p
            };
            for _ in 0..50 {
                let n = 3usize;
                let a: Vec<Vec<Elem>> =
                    (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
                let b: Vec<Elem> = (0..n).map(|_| next()).collect();
                let got = solve_linear(&a, &b, &ctx);
                // Exhaustive: does any assignment satisfy the system?
                let mut found = None;
                let total = p.pow(n as u32);
                for code in 0..total {
                    let mut x = vec![0u64; n];
                    let mut c = code;
                    for v in x.iter_mut() {
                        *v = c % p;
                        c /= p;
                    }
                    let ok = (0..n).all(|r| ctx.dot(&a[r], &x) == b[r] % p);
                    if ok {
                        found = Some(x);
                        break;
                    }
                }
                match (got, found) {
                    (Some(x), Some(_)) => {
                        for r in 0..n {
                            assert_eq!(ctx.dot(&a[r], &x), b[r] % p);
                        }
                    }
                    (None, None) => {}
                    (g, f) => panic!("solver {g:?} vs oracle {f:?}"),
                }
            }
        }
    }

    proptest! {
        #[test]
        fn inv_is_involutive(a in 1u64..11) {
            let ctx = ctx11();
            let inv = ctx.inv(a).unwrap();
            prop_assert_eq!(ctx.mul(a, inv), 1);
            prop_assert_eq!(ctx.inv(inv).unwrap(), a);
        }

        /// Any solvable affine system verifies on substitution.
        #[test]
        fn affine_solution_substitutes(seed in 0u64..1000) {
            let ctx = ctx11();
            let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 33) % 11 };
            let m = 3usize;
            let pts: Vec<FVector> = (0..4).map(|_| FVector((0..m).map(|_| next()).collect())).collect();
            let target = FVector((0..m).map(|_| next()).collect());
            if let Ok(mu) = solve_affine_combination(&pts, &target, &ctx) {
                let mut sum = 0u64;
                let mut acc = vec![0u64; m];
                for (q, pt) in pts.iter().enumerate() {
                    sum = ctx.add(sum, mu[q]);
                    for c in 0..m {
                        acc[c] = ctx.add(acc[c], ctx.mul(mu[q], pt.0[c]));
                    }
                }
                prop_assert_eq!(sum, 1);
                prop_assert_eq!(acc, target.0);
            }
        }
    }
}
