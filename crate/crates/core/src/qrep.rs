//! Finite-dimensional representations of the quantum torus at odd roots of unity.
//!
//! Basis monomials satisfy `b_i b_j = A^{Ω_ij} b_j b_i`. A general lattice vector
//! `v = Σ c_i b_i` acts by the Weyl-ordered product
//! `ρ(v) = A^{-½ Σ_{i<j} c_i c_j Ω_ij} ρ(b_1)^{c_1} ··· ρ(b_k)^{c_k}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkeinError};
use crate::exactalg::{LaurentHalf, RootOfUnity};
use crate::lattice::{skew_normal_form, solve_integer, to_big, to_i64};
use crate::traintrack::{TrainTrack, WeightVector};

pub type CMatrix = DMatrix<Complex64>;

pub const RELATION_TOL: f64 = 1e-10;
pub const SCHUR_TOL: f64 = 1e-8;

pub fn omega_matrix(tt: &TrainTrack, basis: &[WeightVector]) -> Result<Vec<Vec<i64>>> {
    tt.form_matrix(basis)
}

/// Values of a character on the center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralCharacter {
    /// `χ(N·b_i)` for every basis vector.
    pub nth_powers: Vec<Complex64>,
    /// Central lattice vectors (in basis coordinates) with prescribed values.
    #[serde(default)]
    pub kernel_vectors: Vec<Vec<i64>>,
    #[serde(default)]
    pub kernel_values: Vec<Complex64>,
}

impl CentralCharacter {
    pub fn generic<R: Rng>(rank: usize, rng: &mut R) -> Self {
        let nth_powers = (0..rank)
            .map(|_| Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        Self { nth_powers, kernel_vectors: vec![], kernel_values: vec![] }
    }
}

fn cpow(z: Complex64, k: i64) -> Complex64 {
    if k >= 0 {
        z.powu(k as u32)
    } else {
        z.inv().powu((-k) as u32)
    }
}

/// Principal `n`-th root.
pub fn principal_root(z: Complex64, n: u64) -> Complex64 {
    Complex64::from_polar(z.norm().powf(1.0 / n as f64), z.arg() / n as f64)
}

/// Monomial matrix `e_j -> A^{exps[j]} e_{perm[j]}` with exact exponents mod `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialMatrix {
    pub n: u64,
    pub perm: Vec<usize>,
    pub exps: Vec<u64>,
}

impl MonomialMatrix {
    pub fn clock(n: u64, size: usize, step: u64) -> Self {
        Self { n, perm: (0..size).collect(), exps: (0..size as u64).map(|j| (j * step) % n).collect() }
    }

    pub fn shift(n: u64, size: usize) -> Self {
        Self { n, perm: (0..size).map(|j| (j + 1) % size).collect(), exps: vec![0; size] }
    }

    /// `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        let size = self.perm.len();
        let mut perm = vec![0; size];
        let mut exps = vec![0; size];
        for j in 0..size {
            let mid = other.perm[j];
            perm[j] = self.perm[mid];
            exps[j] = (other.exps[j] + self.exps[mid]) % self.n;
        }
        Self { n: self.n, perm, exps }
    }

    pub fn scaled(&self, e: u64) -> Self {
        Self { n: self.n, perm: self.perm.clone(), exps: self.exps.iter().map(|x| (x + e) % self.n).collect() }
    }

    pub fn to_matrix(&self, root: &RootOfUnity) -> CMatrix {
        let size = self.perm.len();
        let mut m = CMatrix::zeros(size, size);
        for j in 0..size {
            m[(self.perm[j], j)] = root.power(self.exps[j] as i64);
        }
        m
    }
}

/// Exact check that clock and shift for step `d` satisfy `C S = A^d S C`.
pub fn exact_block_check(root: &RootOfUnity, d: i64) -> bool {
    let n = root.order();
    let step = d.rem_euclid(n as i64) as u64;
    let size = block_size(n, d);
    let c = MonomialMatrix::clock(n, size, step);
    let s = MonomialMatrix::shift(n, size);
    c.mul(&s) == s.mul(&c).scaled(step)
}

fn block_size(n: u64, d: i64) -> usize {
    let g = num_integer::gcd(d.unsigned_abs(), n);
    (n / g) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixRep {
    pub root: RootOfUnity,
    pub dimension: usize,
    pub omega: Vec<Vec<i64>>,
    /// Rows: normal-form generators in basis coordinates.
    pub u: Vec<Vec<i64>>,
    pub blocks: Vec<i64>,
    /// Scalar parameter of each normal-form generator.
    pub scalars: Vec<Complex64>,
    /// Images of the basis vectors.
    pub images: Vec<CMatrix>,
}

fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors.iter().fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Doubled exponent of the Weyl phase for coordinates `c` under form `omega`.
fn weyl_phase_doubled(omega: &[Vec<i64>], c: &[i64]) -> i64 {
    let mut e = 0;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            e -= c[i] * c[j] * omega[i][j];
        }
    }
    e
}

fn weyl_product(root: &RootOfUnity, omega: &[Vec<i64>], images: &[CMatrix], inverses: &[CMatrix], c: &[i64]) -> CMatrix {
    let d = images[0].nrows();
    let mut acc = CMatrix::identity(d, d);
    for (i, &ci) in c.iter().enumerate() {
        let m = if ci >= 0 { &images[i] } else { &inverses[i] };
        for _ in 0..ci.unsigned_abs() {
            acc = &acc * m;
        }
    }
    let phase = root.power(root.reduce_half_exponent(weyl_phase_doubled(omega, c)));
    acc * phase
}

pub fn build_rep(omega: &[Vec<i64>], root: &RootOfUnity, character: &CentralCharacter) -> Result<MatrixRep> {
    let k = omega.len();
    let n = root.order();
    if character.nth_powers.len() != k {
        return Err(SkeinError::LengthMismatch { expected: k, got: character.nth_powers.len() });
    }
    if character.kernel_vectors.len() != character.kernel_values.len() {
        return Err(SkeinError::LengthMismatch {
            expected: character.kernel_vectors.len(),
            got: character.kernel_values.len(),
        });
    }
    for (i, z) in character.nth_powers.iter().chain(&character.kernel_values).enumerate() {
        if z.norm() < 1e-300 || !z.is_finite() {
            return Err(SkeinError::ZeroScalar(format!("character value {i} is {z}")));
        }
    }
    for i in 0..k {
        for j in 0..k {
            if omega[i][j] != -omega[j][i] {
                return Err(SkeinError::Validation("form matrix is not antisymmetric".into()));
            }
        }
    }
    let nf = skew_normal_form(&to_big(omega));
    let u = to_i64(&nf.u).ok_or_else(|| SkeinError::NormalFormFailure("entries overflow".into()))?;
    let blocks: Vec<i64> = nf.blocks.iter().map(|b| b.to_i64().unwrap_or(0)).collect();
    // certify U Ω Uᵀ
    let reduced = congruence(&u, omega);
    for i in 0..k {
        for j in 0..k {
            let want = match (i / 2, j / 2) {
                (p, q) if p == q && p < blocks.len() && i + 1 == j => blocks[p],
                (p, q) if p == q && p < blocks.len() && j + 1 == i => -blocks[p],
                _ => 0,
            };
            if reduced[i][j] != want {
                return Err(SkeinError::NormalFormFailure(format!("entry ({i},{j}) is {}", reduced[i][j])));
            }
        }
    }
    // χ(N g) for each normal-form generator: the character is multiplicative on N·Λ
    let chi_n: Vec<Complex64> = u
        .iter()
        .map(|row| row.iter().zip(&character.nth_powers).map(|(&c, &z)| cpow(z, c)).product())
        .collect();
    let mut scalars: Vec<Complex64> = chi_n.iter().map(|&z| principal_root(z, n)).collect();
    // radical generators take their values from the prescribed kernel vectors when possible
    let radical_start = 2 * blocks.len();
    if !character.kernel_vectors.is_empty() {
        let radical: Vec<Vec<i64>> = u[radical_start..].to_vec();
        for (v, &val) in character.kernel_vectors.iter().zip(&character.kernel_values) {
            let Some(coef) = solve_integer(&radical, v) else {
                return Err(SkeinError::Validation(format!("kernel vector {v:?} is not central")));
            };
            // consistency: χ(v)^N must equal the product of N-th powers
            let from_powers: Complex64 =
                v.iter().zip(&character.nth_powers).map(|(&c, &z)| cpow(z, c)).product();
            if (val.powu(n as u32) - from_powers).norm() > 1e-8 * from_powers.norm().max(1.0) {
                return Err(SkeinError::Validation(format!(
                    "value on kernel vector {v:?} is inconsistent with the N-th powers"
                )));
            }
            if let Some(pos) = unit_position(&coef) {
                scalars[radical_start + pos.0] = if pos.1 > 0 { val } else { val.inv() };
            }
        }
    }
    // generator images
    let mut factors_per_gen: Vec<CMatrix> = Vec::with_capacity(k);
    let sizes: Vec<usize> = blocks.iter().map(|&d| block_size(n, d)).collect();
    let dimension: usize = sizes.iter().product();
    for (p, &d) in blocks.iter().enumerate() {
        let size = sizes[p];
        let step = d.rem_euclid(n as i64) as u64;
        let clock = MonomialMatrix::clock(n, size, step).to_matrix(root);
        let shift = MonomialMatrix::shift(n, size).to_matrix(root);
        for local in [clock, shift] {
            let factors: Vec<CMatrix> = (0..blocks.len())
                .map(|q| if q == p { local.clone() } else { CMatrix::identity(sizes[q], sizes[q]) })
                .collect();
            factors_per_gen.push(kron_all(&factors));
        }
    }
    for _ in radical_start..k {
        factors_per_gen.push(CMatrix::identity(dimension, dimension));
    }
    let gen_images: Vec<CMatrix> = factors_per_gen.iter().zip(&scalars).map(|(m, &s)| m * s).collect();
    let gen_inverses: Vec<CMatrix> = gen_images
        .iter()
        .map(|m| m.clone().try_inverse().ok_or_else(|| SkeinError::ZeroScalar("singular image".into())))
        .collect::<Result<_>>()?;
    let reduced_omega = reduced;
    // b_j in terms of the generators
    let images: Vec<CMatrix> = (0..k)
        .map(|j| {
            let mut e = vec![0; k];
            e[j] = 1;
            let c = solve_integer(&u, &e).ok_or_else(|| SkeinError::NormalFormFailure("U not unimodular".into()))?;
            Ok(weyl_product(root, &reduced_omega, &gen_images, &gen_inverses, &c))
        })
        .collect::<Result<_>>()?;
    Ok(MatrixRep { root: *root, dimension, omega: omega.to_vec(), u, blocks, scalars, images })
}

fn unit_position(c: &[i64]) -> Option<(usize, i64)> {
    let nz: Vec<(usize, i64)> = c.iter().copied().enumerate().filter(|(_, x)| *x != 0).collect();
    match nz.as_slice() {
        [(i, x)] if x.abs() == 1 => Some((*i, *x)),
        _ => None,
    }
}

fn congruence(u: &[Vec<i64>], omega: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let k = omega.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mut s = 0;
                    for a in 0..k {
                        for b in 0..k {
                            s += u[i][a] * omega[a][b] * u[j][b];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

impl MatrixRep {
    pub fn inverses(&self) -> Vec<CMatrix> {
        self.images.iter().map(|m| m.clone().try_inverse().expect("invertible image")).collect()
    }

    /// Image of the lattice vector with basis coordinates `c`.
    pub fn monomial(&self, c: &[i64]) -> CMatrix {
        weyl_product(&self.root, &self.omega, &self.images, &self.inverses(), c)
    }

    /// Image of `Σ coeff · v`, with Laurent coefficients evaluated at the root.
    pub fn element(&self, terms: &[(Vec<i64>, LaurentHalf)]) -> CMatrix {
        let inv = self.inverses();
        let mut acc = CMatrix::zeros(self.dimension, self.dimension);
        for (c, coeff) in terms {
            acc += weyl_product(&self.root, &self.omega, &self.images, &inv, c) * coeff.eval_at_root(&self.root);
        }
        acc
    }
}

/// Largest Frobenius norm of `ρ(b_i)ρ(b_j) - A^{Ω_ij} ρ(b_j)ρ(b_i)`.
pub fn verify_rep(rep: &MatrixRep) -> f64 {
    let k = rep.images.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let lhs = &rep.images[i] * &rep.images[j];
            let rhs = &rep.images[j] * &rep.images[i] * rep.root.power(rep.omega[i][j]);
            (lhs - rhs).norm()
        })
        .reduce(|| 0.0, f64::max)
}

fn flatten(m: &CMatrix) -> Vec<Complex64> {
    m.iter().copied().collect()
}

/// Dimension of the algebra generated by the images (span closure under
/// right multiplication by each image until stable).
pub fn irreducibility_rank(rep: &MatrixRep) -> usize {
    let d = rep.dimension;
    let tol = 1e-9;
    let mut ortho: Vec<Vec<Complex64>> = Vec::new();
    let mut members: Vec<CMatrix> = Vec::new();
    let try_add = |m: &CMatrix, ortho: &mut Vec<Vec<Complex64>>| -> bool {
        let mut v = flatten(m);
        let scale = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if scale == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for q in ortho.iter() {
                let dot: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= dot * y;
                }
            }
        }
        let rest = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if rest <= tol * scale {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= rest);
        ortho.push(v);
        true
    };
    let id = CMatrix::identity(d, d);
    try_add(&id, &mut ortho);
    members.push(id);
    let mut frontier = 0;
    while frontier < members.len() && ortho.len() < d * d {
        let m = members[frontier].clone();
        frontier += 1;
        for g in &rep.images {
            let p = &m * g;
            if try_add(&p, &mut ortho) {
                members.push(p);
            }
        }
    }
    ortho.len()
}

/// Schur scalars of central lattice vectors (basis coordinates).
pub fn central_character(rep: &MatrixRep, central: &[Vec<i64>]) -> Result<Vec<Complex64>> {
    let inv = rep.inverses();
    central
        .iter()
        .map(|c| {
            let m = weyl_product(&rep.root, &rep.omega, &rep.images, &inv, c);
            scalar_value(&m)
        })
        .collect()
}

/// Returns the scalar `s` if `m` is within tolerance of `s·I`.
pub fn scalar_value(m: &CMatrix) -> Result<Complex64> {
    let d = m.nrows();
    let s = m.trace() / d as f64;
    let off = (m - CMatrix::identity(d, d) * s).norm();
    if off > SCHUR_TOL * s.norm().max(1.0) {
        return Err(SkeinError::NotScalar(off));
    }
    Ok(s)
}

pub fn off_scalar_residual(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let s = m.trace() / d as f64;
    (m - CMatrix::identity(d, d) * s).norm() / s.norm().max(1.0)
}

/// Serializable form of a representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepBundle {
    pub n: u64,
    pub k: i64,
    pub dimension: usize,
    pub omega: Vec<Vec<i64>>,
    pub u: Vec<Vec<i64>>,
    pub blocks: Vec<i64>,
    pub scalars: Vec<[f64; 2]>,
    /// Row-major entries `[re, im]` of each basis image.
    pub images: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&MatrixRep> for RepBundle {
    fn from(r: &MatrixRep) -> Self {
        RepBundle {
            n: r.root.order(),
            k: r.root.index(),
            dimension: r.dimension,
            omega: r.omega.clone(),
            u: r.u.clone(),
            blocks: r.blocks.clone(),
            scalars: r.scalars.iter().map(|z| [z.re, z.im]).collect(),
            images: r
                .images
                .iter()
                .map(|m| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
                .collect(),
        }
    }
}

impl TryFrom<RepBundle> for MatrixRep {
    type Error = SkeinError;
    fn try_from(b: RepBundle) -> Result<Self> {
        let root = RootOfUnity::new(b.n, b.k)?;
        let d = b.dimension;
        let images = b
            .images
            .iter()
            .map(|rows| {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(SkeinError::Schema("image has the wrong shape".into()));
                }
                Ok(CMatrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
            })
            .collect::<Result<Vec<_>>>()?;
        if images.len() != b.omega.len() {
            return Err(SkeinError::LengthMismatch { expected: b.omega.len(), got: images.len() });
        }
        if images.iter().any(|m| m.clone().try_inverse().is_none()) {
            return Err(SkeinError::Validation("image matrix is not invertible".into()));
        }
        Ok(MatrixRep {
            root,
            dimension: d,
            omega: b.omega,
            u: b.u,
            blocks: b.blocks,
            scalars: b.scalars.iter().map(|z| Complex64::new(z[0], z[1])).collect(),
            images,
        })
    }
}

pub fn is_zero_matrix(m: &[Vec<i64>]) -> bool {
    m.iter().flatten().all(Zero::is_zero)
}
