//! SL2(C) representations of free groups, trace functions and sign twists.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SkeinError};

pub type Mat2 = Matrix2<Complex64>;

const DET_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn mat2(a: f64, b: f64, cc: f64, d: f64) -> Mat2 {
    Mat2::new(c(a), c(b), c(cc), c(d))
}

/// Inverse of a unimodular 2x2 matrix (adjugate).
pub fn sl2_inverse(m: &Mat2) -> Mat2 {
    Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// Random matrix with determinant exactly 1 up to rounding, entries of moderate size.
pub fn random_sl2<R: Rng>(rng: &mut R) -> Mat2 {
    let mut z = || Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
    loop {
        let (a, b, cc) = (z(), z(), z());
        if a.norm() > 0.25 {
            let d = (c(1.0) + b * cc) / a;
            return Mat2::new(a, b, cc, d);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SL2Rep {
    matrices: Vec<Mat2>,
}

impl SL2Rep {
    pub fn new(matrices: Vec<Mat2>) -> Result<Self> {
        for (i, m) in matrices.iter().enumerate() {
            let det = m.determinant();
            if (det - c(1.0)).norm() >= DET_TOL {
                return Err(SkeinError::Validation(format!(
                    "generator {i} has determinant {det}, expected 1"
                )));
            }
        }
        Ok(Self { matrices })
    }

    pub fn random<R: Rng>(rank: usize, rng: &mut R) -> Self {
        Self { matrices: (0..rank).map(|_| random_sl2(rng)).collect() }
    }

    pub fn rank(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[Mat2] {
        &self.matrices
    }

    pub fn conjugate(&self, g: &Mat2) -> SL2Rep {
        let gi = sl2_inverse(g);
        SL2Rep { matrices: self.matrices.iter().map(|m| g * m * gi).collect() }
    }

    pub fn eval_word(&self, w: &GroupWord) -> Result<Mat2> {
        let mut acc = Mat2::identity();
        for &(g, e) in &w.letters {
            let m = self.matrices.get(g).ok_or(SkeinError::Index { index: g, len: self.rank() })?;
            acc *= if e > 0 { *m } else { sl2_inverse(m) };
        }
        Ok(acc)
    }
}

type Quad = [[f64; 2]; 4];

impl Serialize for SL2Rep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let quads: Vec<Quad> = self
            .matrices
            .iter()
            .map(|m| {
                let e = |i, j| {
                    let z: Complex64 = m[(i, j)];
                    [z.re, z.im]
                };
                [e(0, 0), e(0, 1), e(1, 0), e(1, 1)]
            })
            .collect();
        quads.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SL2Rep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let quads = Vec::<Quad>::deserialize(d)?;
        let z = |p: [f64; 2]| Complex64::new(p[0], p[1]);
        let mats = quads.into_iter().map(|q| Mat2::new(z(q[0]), z(q[1]), z(q[2]), z(q[3]))).collect();
        SL2Rep::new(mats).map_err(serde::de::Error::custom)
    }
}

/// Word in free generators; each letter is `(generator, ±1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GroupWord {
    pub letters: Vec<(usize, i8)>,
}

impl GroupWord {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn generator(g: usize) -> Self {
        Self { letters: vec![(g, 1)] }
    }

    pub fn inverse(&self) -> Self {
        Self { letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    pub fn concat(&self, other: &GroupWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self { letters }
    }

    /// Sum of the cocycle over the letters, mod 2.
    pub fn z2_degree(&self, alpha: &Z2Cocycle) -> u8 {
        self.letters.iter().map(|&(g, _)| alpha.signs.get(g).copied().unwrap_or(0)).sum::<u8>() % 2
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Letters `a`..`z` are generators 0..25, upper case their inverses.
impl FromStr for GroupWord {
    type Err = SkeinError;
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for ch in s.trim().chars() {
            match ch {
                'a'..='z' => letters.push((ch as usize - 'a' as usize, 1)),
                'A'..='Z' => letters.push((ch as usize - 'A' as usize, -1)),
                '1' if s.trim() == "1" => {}
                _ => return Err(SkeinError::Parse(format!("bad letter {ch:?} in word {s:?}"))),
            }
        }
        Ok(Self { letters })
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for &(g, e) in &self.letters {
            let base = if e > 0 { b'a' } else { b'A' };
            write!(f, "{}", (base + g as u8) as char)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Z2Cocycle {
    pub signs: Vec<u8>,
}

pub fn trace_word(w: &GroupWord, r: &SL2Rep) -> Result<Complex64> {
    Ok(r.eval_word(w)?.trace())
}

/// `|Tr(MN) + Tr(MN^-1) - Tr(M)Tr(N)|`.
pub fn trace_identity_check(m: &Mat2, n: &Mat2) -> Result<f64> {
    let det = n.determinant();
    if det.norm() < 1e-12 {
        return Err(SkeinError::SingularMatrix(1));
    }
    let ninv = n.try_inverse().ok_or(SkeinError::SingularMatrix(1))?;
    Ok(((m * n).trace() + (m * ninv).trace() - m.trace() * n.trace()).norm())
}

/// `(-1)^n ∏ Tr r(K_i)` over the components.
pub fn bullock_value(components: &[GroupWord], r: &SL2Rep) -> Result<Complex64> {
    let mut acc = c(1.0);
    for w in components {
        acc *= -trace_word(w, r)?;
    }
    Ok(acc)
}

pub fn twist_rep(r: &SL2Rep, alpha: &Z2Cocycle) -> Result<SL2Rep> {
    if alpha.signs.len() != r.rank() {
        return Err(SkeinError::LengthMismatch { expected: r.rank(), got: alpha.signs.len() });
    }
    Ok(SL2Rep {
        matrices: r
            .matrices
            .iter()
            .zip(&alpha.signs)
            .map(|(m, &s)| if s % 2 == 1 { -m } else { *m })
            .collect(),
    })
}

fn check_slope(p: i64, q: i64) -> Result<()> {
    if p.gcd(&q) != 1 {
        return Err(SkeinError::NotCoprime { p, q });
    }
    Ok(())
}

/// Word of the `(p,q)` curve on the punctured torus with `π₁ = <a, b>`:
/// the lower Christoffel word for `p, q >= 0`, with `b -> b^-1` when `pq < 0`.
pub fn slope_word(p: i64, q: i64) -> Result<GroupWord> {
    check_slope(p, q)?;
    let (p, q) = if p < 0 || (p == 0 && q < 0) { (-p, -q) } else { (p, q) };
    let (pu, qu) = (p as u64, q.unsigned_abs());
    let n = pu + qu;
    let b = if q < 0 { -1 } else { 1 };
    let letters = (1..=n)
        .map(|i| if (i * qu) / n == ((i - 1) * qu) / n { (0, 1) } else { (1, b) })
        .collect();
    Ok(GroupWord { letters })
}

/// Trace of the `(p,q)` curve from `x = Tr a`, `y = Tr b`, `z = Tr ab` by
/// Farey descent, using `Tr(uv) = Tr(u)Tr(v) - Tr(uv^-1)`.
pub fn fricke_from_traces(p: i64, q: i64, x: Complex64, y: Complex64, z: Complex64) -> Result<Complex64> {
    check_slope(p, q)?;
    let (p, q) = if p < 0 || (p == 0 && q < 0) { (-p, -q) } else { (p, q) };
    if q == 0 {
        return Ok(x);
    }
    if p == 0 {
        return Ok(y);
    }
    // with b replaced by b^-1 the roles of Tr ab and Tr ab^-1 swap
    let z_inv = if q < 0 { z } else { x * y - z };
    let q = q.abs();
    let (mut l, mut r) = ((1i64, 0i64), (0i64, 1i64));
    let (mut tl, mut tr, mut tlr_inv) = (x, y, z_inv);
    loop {
        let m = (l.0 + r.0, l.1 + r.1);
        let tm = tl * tr - tlr_inv;
        if m == (p, q) {
            return Ok(tm);
        }
        // compare slopes q/p against m.1/m.0
        if q * m.0 < m.1 * p {
            // target lies between l and m
            tlr_inv = tr;
            r = m;
            tr = tm;
        } else {
            tlr_inv = tl;
            l = m;
            tl = tm;
        }
    }
}

pub fn fricke_trace(p: i64, q: i64, r: &SL2Rep) -> Result<Complex64> {
    if r.rank() != 2 {
        return Err(SkeinError::LengthMismatch { expected: 2, got: r.rank() });
    }
    let (a, b) = (r.matrices[0], r.matrices[1]);
    fricke_from_traces(p, q, a.trace(), b.trace(), (a * b).trace())
}

/// All freely reduced words of length at most `max_len` in `rank` generators.
pub fn reduced_words(rank: usize, max_len: usize) -> Vec<GroupWord> {
    let mut out = vec![GroupWord::empty()];
    let mut frontier = vec![GroupWord::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for g in 0..rank {
                for e in [1i8, -1] {
                    if w.letters.last() == Some(&(g, -e)) {
                        continue;
                    }
                    let mut l = w.letters.clone();
                    l.push((g, e));
                    next.push(GroupWord { letters: l });
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Character equivalence tested on the reduced-word corpus of length <= 6.
pub fn same_character(r1: &SL2Rep, r2: &SL2Rep, tol: f64) -> Result<bool> {
    if r1.rank() != r2.rank() {
        return Err(SkeinError::LengthMismatch { expected: r1.rank(), got: r2.rank() });
    }
    for w in reduced_words(r1.rank(), 6) {
        if (trace_word(&w, r1)? - trace_word(&w, r2)?).norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unipotent_pair() -> SL2Rep {
        SL2Rep::new(vec![mat2(1.0, 1.0, 0.0, 1.0), mat2(1.0, 0.0, 1.0, 1.0)]).unwrap()
    }

    fn w(s: &str) -> GroupWord {
        s.parse().unwrap()
    }

    #[test]
    fn trace_examples() {
        let r = unipotent_pair();
        assert_eq!(trace_word(&GroupWord::empty(), &r).unwrap(), c(2.0));
        assert_eq!(trace_word(&w("a"), &r).unwrap(), c(2.0));
        assert_eq!(trace_word(&w("ab"), &r).unwrap(), c(3.0));
        assert!(matches!(trace_word(&w("c"), &r), Err(SkeinError::Index { .. })));
    }

    #[test]
    fn identity_examples() {
        let id = Mat2::identity();
        assert_eq!(trace_identity_check(&id, &id).unwrap(), 0.0);
        let r = unipotent_pair();
        assert!(trace_identity_check(&r.matrices()[0], &r.matrices()[1]).unwrap() < 1e-12);
        assert!(matches!(
            trace_identity_check(&id, &Mat2::zeros()),
            Err(SkeinError::SingularMatrix(_))
        ));
    }

    #[test]
    fn bullock_examples() {
        let r = unipotent_pair();
        assert_eq!(bullock_value(&[], &r).unwrap(), c(1.0));
        let id = SL2Rep::new(vec![Mat2::identity()]).unwrap();
        assert_eq!(bullock_value(&[w("a")], &id).unwrap(), c(-2.0));
        assert_eq!(bullock_value(&[w("a"), w("b")], &r).unwrap(), c(4.0));
    }

    #[test]
    fn twist_examples() {
        let r = unipotent_pair();
        let zero = Z2Cocycle { signs: vec![0, 0] };
        assert_eq!(twist_rep(&r, &zero).unwrap(), r);
        let alpha = Z2Cocycle { signs: vec![1, 0] };
        let t = twist_rep(&r, &alpha).unwrap();
        assert_eq!(trace_word(&w("a"), &t).unwrap(), c(-2.0));
        assert_eq!(trace_word(&w("ab"), &t).unwrap(), c(-3.0));
        assert_eq!(trace_word(&w("aab"), &t).unwrap(), trace_word(&w("aab"), &r).unwrap());
        assert_eq!(twist_rep(&t, &alpha).unwrap(), r);
        assert!(matches!(
            twist_rep(&r, &Z2Cocycle { signs: vec![1] }),
            Err(SkeinError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn fricke_examples() {
        let r = unipotent_pair();
        assert_eq!(fricke_trace(1, 0, &r).unwrap(), c(2.0));
        assert_eq!(fricke_trace(1, 1, &r).unwrap(), c(3.0));
        assert_eq!(fricke_trace(2, 1, &r).unwrap(), c(4.0));
        assert_eq!(trace_word(&w("aab"), &r).unwrap(), c(4.0));
        assert!(matches!(fricke_trace(2, 4, &r), Err(SkeinError::NotCoprime { .. })));
        assert!(matches!(fricke_trace(0, 0, &r), Err(SkeinError::NotCoprime { .. })));
    }

    #[test]
    fn slope_words() {
        assert_eq!(slope_word(2, 1).unwrap().to_string(), "aab");
        assert_eq!(slope_word(1, 1).unwrap().to_string(), "ab");
        assert_eq!(slope_word(0, 1).unwrap().to_string(), "b");
        assert_eq!(slope_word(1, -1).unwrap().to_string(), "aB");
        assert_eq!(slope_word(-1, -2).unwrap().to_string(), "abb");
    }

    #[test]
    fn word_parse_roundtrip() {
        for s in ["1", "a", "aBcA", "ab"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert!("a1".parse::<GroupWord>().is_err());
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = SL2Rep::random(3, &mut rng);
        let s = serde_json::to_string(&r).unwrap();
        let back: SL2Rep = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<SL2Rep>("[[[2,0],[0,0],[0,0],[2,0]]]").is_err());
    }

    #[test]
    fn reduced_word_counts() {
        // 1 + 4 + 4*3 + 4*9 for rank 2, length <= 3
        assert_eq!(reduced_words(2, 3).len(), 53);
    }

    #[test]
    fn conjugate_has_same_character() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = SL2Rep::random(2, &mut rng);
        let g = random_sl2(&mut rng);
        assert!(same_character(&r, &r.conjugate(&g), 1e-7).unwrap());
        let t = twist_rep(&r, &Z2Cocycle { signs: vec![1, 0] }).unwrap();
        assert!(!same_character(&r, &t, 1e-7).unwrap());
    }
}
