//! Exact simplex for the fractional edge cover LP.
//!
//! The objective `Σ_F x_F · ln|R_F|` is irrational in general, so reduced
//! costs are kept symbolically as rational coefficients on `ln|R_F|` and their
//! sign is decided by comparing integer products. A second, strictly
//! subordinate objective `(x_1, x_2, ...)` makes the optimum unique: the
//! lexicographically smallest weight vector among all optimal covers.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::VarSet;

/// Exact sign of `Σ_i coefs[i] · ln(sizes[i])`. Sizes below 1 count as 1.
pub fn log_sign(coefs: &[BigRational], sizes: &[u64]) -> Ordering {
    let denom = coefs
        .iter()
        .filter(|c| !c.is_zero())
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut pos = BigUint::one();
    let mut neg = BigUint::one();
    for (c, &n) in coefs.iter().zip(sizes) {
        if c.is_zero() || n <= 1 {
            continue;
        }
        let p = c.numer() * (&denom / c.denom());
        let e = p.abs().to_u32().expect("exponent fits in u32");
        if p.is_positive() {
            pos *= BigUint::from(n).pow(e);
        } else {
            neg *= BigUint::from(n).pow(e);
        }
    }
    pos.cmp(&neg)
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Optimal fractional edge cover of the attributes in `scope` by `edges`,
/// minimizing `Σ x_F ln sizes[F]` with the lexicographic tie-break.
/// Every attribute of `scope` must lie in some edge.
pub fn lex_min_cover(edges: &[VarSet], scope: VarSet, sizes: &[u64]) -> Vec<BigRational> {
    let m = edges.len();
    let verts: Vec<usize> = scope.iter().collect();
    let n = verts.len();
    let cols = 2 * m + n;
    // Columns: x_F (0..m), surplus per vertex (m..m+n), slack x_F + u_F = 1.
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(n + m);
    for (i, &v) in verts.iter().enumerate() {
        let mut row = vec![BigRational::zero(); cols + 1];
        for (f, e) in edges.iter().enumerate() {
            if e.contains(v) {
                row[f] = rat(1);
            }
        }
        row[m + i] = rat(-1);
        row[cols] = rat(1);
        t.push(row);
    }
    for f in 0..m {
        let mut row = vec![BigRational::zero(); cols + 1];
        row[f] = rat(1);
        row[m + n + f] = rat(1);
        row[cols] = rat(1);
        t.push(row);
    }
    assert!(
        verts.iter().all(|&v| edges.iter().any(|e| e.contains(v))),
        "every attribute must be covered by some edge"
    );

    // Start from x = 1: all x and surplus columns basic.
    let mut basis = vec![usize::MAX; n + m];
    for col in 0..m + n {
        let r = (0..n + m)
            .find(|&r| basis[r] == usize::MAX && !t[r][col].is_zero())
            .expect("initial basis is nonsingular");
        pivot(&mut t, r, col);
        basis[r] = col;
    }

    loop {
        let entering = (0..cols)
            .filter(|j| !basis.contains(j))
            .find(|&j| lex_negative(&reduced_cost(&t, &basis, j, m), sizes, m));
        let Some(j) = entering else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..n + m {
            if t[r][j].is_positive() {
                let ratio = &t[r][cols] / &t[r][j];
                let better = match &leave {
                    None => true,
                    Some((lr, lratio)) => ratio < *lratio || (ratio == *lratio && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let (r, _) = leave.expect("the cover polytope is bounded");
        pivot(&mut t, r, j);
        basis[r] = j;
    }

    let mut x = vec![BigRational::zero(); m];
    for (r, &b) in basis.iter().enumerate() {
        if b < m {
            x[b] = t[r][cols].clone();
        }
    }
    x
}

fn pivot(t: &mut [Vec<BigRational>], r: usize, col: usize) {
    let p = t[r][col].clone();
    for v in t[r].iter_mut() {
        *v /= &p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[col].is_zero() {
            continue;
        }
        let factor = row[col].clone();
        for (v, pv) in row.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &factor * pv;
            }
        }
    }
}

/// `c_j - c_B B⁻¹ A_j` as `2m` coefficients: `m` on `ln|R_F|`, then `m` on
/// the tie-break objective.
fn reduced_cost(t: &[Vec<BigRational>], basis: &[usize], j: usize, m: usize) -> Vec<BigRational> {
    let mut d = vec![BigRational::zero(); 2 * m];
    if j < m {
        d[j] = rat(1);
        d[m + j] = rat(1);
    }
    for (r, &b) in basis.iter().enumerate() {
        if b < m && !t[r][j].is_zero() {
            d[b] -= &t[r][j];
            d[m + b] -= &t[r][j];
        }
    }
    d
}

fn lex_negative(d: &[BigRational], sizes: &[u64], m: usize) -> bool {
    match log_sign(&d[..m], sizes) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => d[m..]
            .iter()
            .find(|c| !c.is_zero())
            .is_some_and(|c| c.is_negative()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sign_is_exact() {
        // 3·ln 2 - 2·ln 3 = ln(8/9) < 0
        assert_eq!(log_sign(&[q(3, 1), q(-2, 1)], &[2, 3]), Ordering::Less);
        // ½ ln 4 - ln 2 = 0
        assert_eq!(log_sign(&[q(1, 2), q(-1, 1)], &[4, 2]), Ordering::Equal);
    }

    #[test]
    fn triangle_is_half_everywhere() {
        let e = |a: usize, b: usize| VarSet::single(a).union(VarSet::single(b));
        let x = lex_min_cover(&[e(0, 1), e(1, 2), e(0, 2)], VarSet::first(3), &[9, 9, 9]);
        assert_eq!(x, vec![q(1, 2), q(1, 2), q(1, 2)]);
    }

    #[test]
    fn unit_sizes_tie_break_prefers_later_edges() {
        // Every cover costs zero; the lexicographically smallest is (0, 1).
        let x = lex_min_cover(&[VarSet::first(2), VarSet::first(2)], VarSet::first(2), &[1, 1]);
        assert_eq!(x, vec![q(0, 1), q(1, 1)]);
    }
}
