//! Exact integer lattice routines: kernels via unimodular column reduction,
//! Hermite normal form of row bases, and the normal form of an integer
//! skew-symmetric matrix under unimodular congruence.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn to_big(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn to_i64(rows: &IntMatrix) -> Option<Vec<Vec<i64>>> {
    rows.iter().map(|r| r.iter().map(|x| x.to_i64()).collect()).collect()
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Row Hermite normal form of the row lattice (rows kept nonzero, pivots positive,
/// entries above each pivot reduced into `[0, pivot)`).
pub fn hermite_rows(rows: &IntMatrix) -> IntMatrix {
    let mut m: IntMatrix = rows.to_vec();
    if m.is_empty() {
        return m;
    }
    let ncols = m[0].len();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        // Euclid down the column until a single nonzero remains at row r
        loop {
            let pivot = (r..m.len())
                .filter(|&i| !m[i][c].is_zero())
                .min_by(|&i, &j| m[i][c].abs().cmp(&m[j][c].abs()));
            let Some(p) = pivot else { break };
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let q = m[i][c].div_floor(&m[r][c]);
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !m[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < m.len() && !m[r][c].is_zero() {
            if m[r][c].is_negative() {
                m[r].iter_mut().for_each(|x| *x = -x.clone());
            }
            for i in 0..r {
                let q = m[i][c].div_floor(&m[r][c]);
                if !q.is_zero() {
                    let pivot_row = m[r].clone();
                    for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                        *x -= &q * y;
                    }
                }
            }
            r += 1;
        }
    }
    m.truncate(r);
    m
}

/// Z-basis of `{x : A x = 0}` for an `m x n` integer matrix, in row Hermite form.
pub fn integer_kernel(a: &IntMatrix, n: usize) -> IntMatrix {
    // Work on the transpose augmented with the identity: row operations on
    // [A^T | I] are unimodular column operations on A.
    let mut aug: IntMatrix = (0..n)
        .map(|j| {
            let mut row: Vec<BigInt> = a.iter().map(|r| r[j].clone()).collect();
            row.extend((0..n).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let m = a.len();
    let mut r = 0;
    for c in 0..m {
        loop {
            let pivot = (r..n)
                .filter(|&i| !aug[i][c].is_zero())
                .min_by(|&i, &j| aug[i][c].abs().cmp(&aug[j][c].abs()));
            let Some(p) = pivot else { break };
            aug.swap(r, p);
            let mut done = true;
            for i in r + 1..n {
                if aug[i][c].is_zero() {
                    continue;
                }
                let q = aug[i][c].div_floor(&aug[r][c]);
                let pivot_row = aug[r].clone();
                for (x, y) in aug[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !aug[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                r += 1;
                break;
            }
        }
    }
    let kernel: IntMatrix = aug[r..].iter().map(|row| row[m..].to_vec()).collect();
    hermite_rows(&kernel)
}

pub fn mat_vec(a: &IntMatrix, x: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|r| r.iter().zip(x).map(|(u, v)| u * v).sum()).collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|r| (0..cols).map(|j| (0..inner).map(|k| &r[k] * &b[k][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &IntMatrix) -> IntMatrix {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Rank of an integer matrix over `Z/p` for a prime `p`.
pub fn rank_mod_prime(a: &IntMatrix, p: u64) -> usize {
    let p = p as i64;
    let mut m: Vec<Vec<i64>> = a
        .iter()
        .map(|r| r.iter().map(|x| (x % BigInt::from(p)).to_i64().unwrap().rem_euclid(p)).collect())
        .collect();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let inv = |x: i64| -> i64 {
        // Fermat inverse
        let mut acc = 1i64;
        let (mut b, mut e) = (x, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        let iv = inv(m[rank][c]);
        for i in 0..rows {
            if i != rank && m[i][c] != 0 {
                let f = m[i][c] * iv % p;
                for j in 0..cols {
                    m[i][j] = (m[i][j] - f * m[rank][j]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Unimodular congruence normal form of an integer skew-symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewNormalForm {
    /// Rows are the new basis, expressed in the old one: `U Ω Uᵀ` is block diagonal.
    pub u: IntMatrix,
    /// Block sizes `d_k > 0`; block `k` occupies rows `2k, 2k+1` as `[[0, d], [-d, 0]]`.
    pub blocks: Vec<BigInt>,
    /// Number of trailing zero rows (radical rank).
    pub radical: usize,
}

fn congruent_swap(w: &mut IntMatrix, u: &mut IntMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    w.swap(i, j);
    for row in w.iter_mut() {
        row.swap(i, j);
    }
    u.swap(i, j);
}

/// row_k += q row_l, col_k += q col_l.
fn congruent_add(w: &mut IntMatrix, u: &mut IntMatrix, k: usize, l: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let rl = w[l].clone();
    for (x, y) in w[k].iter_mut().zip(&rl) {
        *x += q * y;
    }
    for row in w.iter_mut() {
        let v = &row[l] * q;
        row[k] += v;
    }
    let ul = u[l].clone();
    for (x, y) in u[k].iter_mut().zip(&ul) {
        *x += q * y;
    }
}

pub fn skew_normal_form(omega: &IntMatrix) -> SkewNormalForm {
    let n = omega.len();
    let mut w = omega.clone();
    let mut u = identity(n);
    let mut blocks = Vec::new();
    let mut s = 0;
    while s + 1 < n {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in s..n {
            for j in s..n {
                if !w[i][j].is_zero() && best.is_none_or(|(bi, bj)| w[i][j].abs() < w[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((i, j)) = best else { break };
        congruent_swap(&mut w, &mut u, s, i);
        let j = if j == s { i } else { j };
        congruent_swap(&mut w, &mut u, s + 1, j);
        if w[s][s + 1].is_negative() {
            congruent_swap(&mut w, &mut u, s, s + 1);
        }
        let d = w[s][s + 1].clone();
        let mut clean = true;
        for k in s + 2..n {
            // kill w[s][k] using row s+1 (w[s][s+1] = d)
            let q = -w[s][k].div_floor(&d);
            congruent_add(&mut w, &mut u, k, s + 1, &q);
            // kill w[s+1][k] using row s (w[s+1][s] = -d)
            let q = w[s + 1][k].div_floor(&d);
            congruent_add(&mut w, &mut u, k, s, &q);
            if !w[s][k].is_zero() || !w[s + 1][k].is_zero() {
                clean = false;
            }
        }
        if clean {
            blocks.push(d);
            s += 2;
        }
    }
    let radical = n - 2 * blocks.len();
    SkewNormalForm { u, blocks, radical }
}

/// Solves `Σ c_i basis_i = w` over the integers by exact rational elimination.
pub fn solve_integer(basis: &[Vec<i64>], w: &[i64]) -> Option<Vec<i64>> {
    let k = basis.len();
    let n = w.len();
    // augmented system: n equations, k unknowns
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|j| {
            let mut row: Vec<BigRational> = (0..k).map(|i| BigRational::from_integer(basis[i][j].into())).collect();
            row.push(BigRational::from_integer(w[j].into()));
            row
        })
        .collect();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| m[i][c] != BigRational::zero()) else { continue };
        m.swap(r, p);
        let inv = BigRational::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != r && m[i][c] != BigRational::zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| row[k] != BigRational::zero()) || pivots.len() != k {
        return None;
    }
    let mut out = vec![0i64; k];
    for (row, &c) in pivots.iter().enumerate() {
        let v = &m[row][k];
        if !v.is_integer() {
            return None;
        }
        out[c] = v.to_integer().to_i64()?;
    }
    Some(out)
}
