//! Pleated-surface holonomy from shear weights, trace polynomials, the quantum
//! trace of the once-punctured torus, and the classical-shadow pipeline.
//!
//! Holonomy convention: crossing edge `e` contributes `[[0, -s_e], [1/s_e, 0]]`,
//! turning inside a triangle from side `i` to side `j` contributes
//! `L^{(j-i) mod 3}` with `L = [[1, 1], [-1, 0]]`. Paths start in triangle 0 in
//! the frame of side 0 and matrices multiply left to right along the path.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charvar::{slope_word, GroupWord, Mat2, SL2Rep};
use crate::error::{Result, SkeinError};
use crate::exactalg::{chebyshev, LaurentHalf, RootOfUnity};
use crate::qrep::{build_rep, irreducibility_rank, off_scalar_residual, omega_matrix, principal_root, verify_rep, CentralCharacter, MatrixRep, SCHUR_TOL};
use crate::traintrack::{build_train_track, punctured_torus, qt_multiply, QTorusElement, TrainTrack, Triangulation};

pub const SQRT_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-8;
pub const SHADOW_TOL: f64 = 1e-6;

/// Complex edge weights with chosen square roots.
#[derive(Clone, Debug, PartialEq)]
pub struct ShearData {
    pub triangulation: Triangulation,
    pub x: Vec<Complex64>,
    pub s: Vec<Complex64>,
}

impl ShearData {
    pub fn new(triangulation: Triangulation, x: Vec<Complex64>, s: Vec<Complex64>) -> Result<Self> {
        let ne = triangulation.num_edges;
        if x.len() != ne || s.len() != ne {
            return Err(SkeinError::LengthMismatch { expected: ne, got: x.len().min(s.len()) });
        }
        for e in 0..ne {
            if x[e].norm() == 0.0 || s[e].norm() == 0.0 {
                return Err(SkeinError::ZeroWeight(e));
            }
            if (s[e] * s[e] - x[e]).norm() > SQRT_TOL * x[e].norm().max(1.0) {
                return Err(SkeinError::Validation(format!("s_{e}^2 != x_{e}")));
            }
        }
        Ok(Self { triangulation, x, s })
    }

    /// Weights from square roots alone.
    pub fn from_roots(triangulation: Triangulation, s: Vec<Complex64>) -> Result<Self> {
        if let Some(e) = s.iter().position(|z| z.norm() == 0.0) {
            return Err(SkeinError::ZeroWeight(e));
        }
        let x = s.iter().map(|z| z * z).collect();
        Self::new(triangulation, x, s)
    }

    pub fn random<R: Rng>(triangulation: Triangulation, rng: &mut R) -> Self {
        let s = (0..triangulation.num_edges)
            .map(|_| Complex64::from_polar(rng.gen_range(0.6..1.6), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        Self::from_roots(triangulation, s).expect("nonzero roots")
    }

    /// Flips the sign of one square root.
    pub fn negate_root(&self, e: usize) -> Self {
        let mut out = self.clone();
        out.s[e] = -out.s[e];
        out
    }

    pub fn monomial(&self, m: &[i64]) -> Complex64 {
        m.iter().zip(&self.s).map(|(&k, &z)| cpow(z, k)).product()
    }
}

fn cpow(z: Complex64, k: i64) -> Complex64 {
    if k >= 0 {
        z.powu(k as u32)
    } else {
        z.inv().powu((-k) as u32)
    }
}

fn edge_matrix(s: Complex64) -> Mat2 {
    Mat2::new(Complex64::zero(), -s, s.inv(), Complex64::zero())
}

fn turn_power(from: usize, to: usize) -> usize {
    (to + 3 - from) % 3
}

fn turn_matrix(k: usize) -> Mat2 {
    let l = Mat2::new(1.0.into(), 1.0.into(), (-1.0).into(), 0.0.into());
    match k {
        0 => Mat2::identity(),
        1 => l,
        _ => l * l,
    }
}

/// A closed path in the dual graph: start triangle, side it is entered through,
/// and the sequence of exit sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualPath {
    pub start: usize,
    pub entry: usize,
    pub exits: Vec<usize>,
}

impl DualPath {
    /// Triangle/side sequence; fails if the path does not close up.
    fn steps(&self, tri: &Triangulation) -> Result<Vec<(usize, usize, usize)>> {
        let (mut t, mut side) = (self.start, self.entry);
        let mut out = Vec::with_capacity(self.exits.len());
        for &j in &self.exits {
            if t >= tri.num_triangles() || j > 2 {
                return Err(SkeinError::Validation(format!("bad step ({t}, {j})")));
            }
            out.push((t, side, j));
            (t, side) = tri.partner[t][j];
        }
        if (t, side) != (self.start, self.entry) {
            return Err(SkeinError::Validation("dual path does not close".into()));
        }
        Ok(out)
    }
}

/// Generic walk: multiplies turn and crossing factors along a path.
fn path_product<M: Clone>(
    tri: &Triangulation,
    start: (usize, usize),
    exits: &[usize],
    close_to: Option<usize>,
    one: M,
    cross: &dyn Fn(usize) -> M,
    turn: &dyn Fn(usize) -> M,
    mul: &dyn Fn(&M, &M) -> M,
) -> (M, (usize, usize)) {
    let (mut t, mut side) = start;
    let mut acc = one;
    for &j in exits {
        acc = mul(&mul(&acc, &turn(turn_power(side, j))), &cross(tri.triangles[t][j]));
        (t, side) = tri.partner[t][j];
    }
    if let Some(f) = close_to {
        acc = mul(&acc, &turn(turn_power(side, f)));
    }
    (acc, (t, side))
}

/// Holonomy along a closed dual path, read cyclically.
pub fn cyclic_holonomy(sd: &ShearData, path: &DualPath) -> Result<Mat2> {
    path.steps(&sd.triangulation)?;
    let (m, _) = path_product(
        &sd.triangulation,
        (path.start, path.entry),
        &path.exits,
        Some(path.entry),
        Mat2::identity(),
        &|e| edge_matrix(sd.s[e]),
        &turn_matrix,
        &|a, b| a * b,
    );
    Ok(m)
}

/// Spanning tree of the dual graph and the free generators of π₁ it induces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualTree {
    /// `(parent triangle, exit side from parent)` for each triangle but the root.
    parent: Vec<Option<(usize, usize)>>,
    tree_edge: Vec<bool>,
    /// Non-tree edges in order, each oriented out of its first side.
    pub generators: Vec<(usize, (usize, usize))>,
}

impl DualTree {
    pub fn new(tri: &Triangulation) -> Self {
        let nt = tri.num_triangles();
        let mut parent = vec![None; nt];
        let mut seen = vec![false; nt];
        let mut tree_edge = vec![false; tri.num_edges];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(t) = queue.pop_front() {
            for j in 0..3 {
                let (t2, _) = tri.partner[t][j];
                if !seen[t2] {
                    seen[t2] = true;
                    parent[t2] = Some((t, j));
                    tree_edge[tri.triangles[t][j]] = true;
                    queue.push_back(t2);
                }
            }
        }
        let mut generators = Vec::new();
        let mut done = vec![false; tri.num_edges];
        for t in 0..nt {
            for j in 0..3 {
                let e = tri.triangles[t][j];
                if !tree_edge[e] && !done[e] {
                    done[e] = true;
                    generators.push((e, (t, j)));
                }
            }
        }
        Self { parent, tree_edge, generators }
    }

    /// Exit sides leading from the root to triangle `t`.
    fn path_to(&self, t: usize) -> Vec<usize> {
        let mut rev = Vec::new();
        let mut cur = t;
        while let Some((p, j)) = self.parent[cur] {
            rev.push(j);
            cur = p;
        }
        rev.reverse();
        rev
    }

    /// Exit sides leading from triangle `t` back to the root.
    fn path_from(&self, tri: &Triangulation, t: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = t;
        while let Some((p, j)) = self.parent[cur] {
            let back = tri.partner[p][j];
            debug_assert_eq!(back.0, cur);
            out.push(back.1);
            cur = p;
        }
        out
    }

    /// Based loop (exit sides from the root frame) of generator `g`.
    pub fn generator_loop(&self, tri: &Triangulation, g: usize) -> Vec<usize> {
        let (_, (t, j)) = self.generators[g];
        let (t2, _) = tri.partner[t][j];
        let mut exits = self.path_to(t);
        exits.push(j);
        exits.extend(self.path_from(tri, t2));
        exits
    }

    /// Element of π₁ traced by a based loop.
    pub fn word_of_loop(&self, tri: &Triangulation, exits: &[usize]) -> Result<GroupWord> {
        let mut t = 0;
        let mut letters = Vec::new();
        for &j in exits {
            let e = tri.triangles[t][j];
            if !self.tree_edge[e] {
                let g = self.generators.iter().position(|&(ge, _)| ge == e).expect("non-tree edge");
                let first = self.generators[g].1;
                letters.push((g, if (t, j) == first { 1 } else { -1 }));
            }
            t = tri.partner[t][j].0;
        }
        if t != 0 {
            return Err(SkeinError::Validation("loop does not return to the base triangle".into()));
        }
        // free reduction
        let mut out: Vec<(usize, i8)> = Vec::new();
        for l in letters {
            if out.last().is_some_and(|&(g, e)| g == l.0 && e == -l.1) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(GroupWord { letters: out })
    }

    /// Based loop around puncture `i`, plus its cyclic part.
    pub fn peripheral_loop(&self, tri: &Triangulation, i: usize) -> Result<(Vec<usize>, DualPath)> {
        if i >= tri.punctures {
            return Err(SkeinError::Index { index: i, len: tri.punctures });
        }
        let (t0, c0) = (0..tri.num_triangles())
            .flat_map(|t| (0..3).map(move |c| (t, c)))
            .find(|&(t, c)| tri.corner_puncture[t][c] == i)
            .expect("every puncture has a corner");
        // circle the corner V_c: enter through side c-1, leave through side c
        let cycle = peripheral_cycle(tri, t0, c0);
        let mut exits = self.path_to(t0);
        exits.extend(&cycle.exits);
        exits.extend(self.path_from(tri, t0));
        Ok((exits, cycle))
    }
}

fn peripheral_cycle(tri: &Triangulation, t0: usize, c0: usize) -> DualPath {
    let entry = (c0 + 2) % 3;
    let (mut t, mut c) = (t0, c0);
    let mut exits = Vec::new();
    loop {
        exits.push(c);
        let (t2, j) = tri.partner[t][c];
        (t, c) = (t2, (j + 1) % 3);
        if (t, c) == (t0, c0) {
            break;
        }
    }
    DualPath { start: t0, entry, exits }
}

fn based_matrix(sd: &ShearData, exits: &[usize]) -> Mat2 {
    path_product(
        &sd.triangulation,
        (0, 0),
        exits,
        Some(0),
        Mat2::identity(),
        &|e| edge_matrix(sd.s[e]),
        &turn_matrix,
        &|a, b| a * b,
    )
    .0
}

/// The `SL₂` lift of the holonomy on the spanning-tree generators.
pub fn holonomy(sd: &ShearData) -> Result<SL2Rep> {
    let tri = &sd.triangulation;
    let tree = DualTree::new(tri);
    let mats = (0..tree.generators.len()).map(|g| based_matrix(sd, &tree.generator_loop(tri, g))).collect();
    SL2Rep::new(mats)
}

/// Curves on the once-punctured torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveLabel {
    Slope(i64, i64),
    Puncture(usize),
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveLabel::Slope(p, q) => write!(f, "{p}/{q}"),
            CurveLabel::Puncture(i) => write!(f, "P{i}"),
        }
    }
}

impl std::str::FromStr for CurveLabel {
    type Err = SkeinError;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix('P') {
            return rest.parse().map(CurveLabel::Puncture).map_err(|_| SkeinError::Parse(format!("bad curve {s:?}")));
        }
        let (p, q) = s.split_once('/').ok_or_else(|| SkeinError::Parse(format!("bad curve {s:?}")))?;
        let p = p.trim().parse().map_err(|_| SkeinError::Parse(format!("bad curve {s:?}")))?;
        let q = q.trim().parse().map_err(|_| SkeinError::Parse(format!("bad curve {s:?}")))?;
        Ok(CurveLabel::Slope(p, q))
    }
}

fn is_punctured_torus(tri: &Triangulation) -> bool {
    tri.genus == 1 && tri.punctures == 1 && (0..3).all(|s| tri.partner[0][s] == (1, s))
}

/// Standard curves `a`, `b` of the punctured torus as based loops.
const LOOP_A: [usize; 2] = [0, 1];
const LOOP_B: [usize; 2] = [1, 2];

/// Cyclic dual paths of the curves carried by the quantum-trace generators.
fn standard_cycle(k: CurveLabel) -> Option<DualPath> {
    match k {
        CurveLabel::Slope(1, 0) | CurveLabel::Slope(-1, 0) => Some(DualPath { start: 0, entry: 1, exits: vec![0, 1] }),
        CurveLabel::Slope(0, 1) | CurveLabel::Slope(0, -1) => Some(DualPath { start: 0, entry: 2, exits: vec![1, 2] }),
        CurveLabel::Slope(1, 1) | CurveLabel::Slope(-1, -1) => Some(DualPath { start: 0, entry: 2, exits: vec![0, 2] }),
        _ => None,
    }
}

fn require_torus(tri: &Triangulation, k: CurveLabel) -> Result<()> {
    if is_punctured_torus(tri) {
        Ok(())
    } else {
        Err(SkeinError::UnsupportedCurve(format!("{k} needs the once-punctured torus layout")))
    }
}

/// Word in the spanning-tree generators for a supported curve.
pub fn curve_word(tri: &Triangulation, k: CurveLabel) -> Result<GroupWord> {
    let tree = DualTree::new(tri);
    match k {
        CurveLabel::Puncture(i) => Ok(tree.word_of_loop(tri, &tree.peripheral_loop(tri, i)?.0)?),
        CurveLabel::Slope(p, q) => {
            require_torus(tri, k)?;
            let a = tree.word_of_loop(tri, &LOOP_A)?;
            let b = tree.word_of_loop(tri, &LOOP_B)?;
            let w = slope_word(p, q)?;
            let mut out = GroupWord::empty();
            for &(g, e) in &w.letters {
                let piece = if g == 0 { &a } else { &b };
                out = out.concat(&if e > 0 { piece.clone() } else { piece.inverse() });
            }
            Ok(out)
        }
    }
}

/// `Tr r(K)` for the holonomy lift.
pub fn holonomy_trace(sd: &ShearData, k: CurveLabel) -> Result<Complex64> {
    let r = holonomy(sd)?;
    Ok(r.eval_word(&curve_word(&sd.triangulation, k)?)?.trace())
}

/// Eigenvalue of the holonomy around a puncture, read along the peripheral
/// dual path, computed from the matrix and from the product of square roots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PunctureEigen {
    pub from_matrix: Complex64,
    pub from_roots: Complex64,
    /// Trace along the peripheral path.
    pub trace: Complex64,
    /// Trace of the image of the peripheral loop under the generator lift.
    pub lift_trace: Complex64,
}

pub fn puncture_eigenvalue(sd: &ShearData, i: usize) -> Result<PunctureEigen> {
    let tri = &sd.triangulation;
    let tree = DualTree::new(tri);
    let (exits, cycle) = tree.peripheral_loop(tri, i)?;
    let from_roots: Complex64 = cycle.steps(tri)?.iter().map(|&(t, _, j)| sd.s[tri.triangles[t][j]]).product();
    let m = cyclic_holonomy(sd, &cycle)?;
    let tr = m.trace();
    let disc = (tr * tr - m.determinant() * 4.0).sqrt();
    let ev = [(tr + disc) / 2.0, (tr - disc) / 2.0];
    let from_matrix = if (ev[0] - from_roots).norm() <= (ev[1] - from_roots).norm() { ev[0] } else { ev[1] };
    if (from_matrix - from_roots).norm() > EIGEN_TOL * from_roots.norm().max(1.0) {
        return Err(SkeinError::ConventionMismatch(format!(
            "puncture {i}: matrix eigenvalues {ev:?}, root product {from_roots}"
        )));
    }
    let lift = holonomy(sd)?.eval_word(&tree.word_of_loop(tri, &exits)?)?;
    Ok(PunctureEigen { from_matrix, from_roots, trace: tr, lift_trace: lift.trace() })
}

/// Laurent polynomial in the edge square roots with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TracePoly {
    pub terms: BTreeMap<Vec<i64>, BigInt>,
    vars: usize,
}

impl TracePoly {
    fn zero(vars: usize) -> Self {
        Self { terms: BTreeMap::new(), vars }
    }

    fn constant(vars: usize, c: i64) -> Self {
        let mut p = Self::zero(vars);
        if c != 0 {
            p.terms.insert(vec![0; vars], c.into());
        }
        p
    }

    fn var(vars: usize, e: usize, k: i64) -> Self {
        let mut m = vec![0; vars];
        m[e] = k;
        Self { terms: BTreeMap::from([(m, BigInt::one())]), vars }
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            let slot = out.terms.entry(m.clone()).or_default();
            *slot += c;
            if slot.is_zero() {
                out.terms.remove(m);
            }
        }
        out
    }

    fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(), vars: self.vars }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m: Vec<i64> = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                let slot = out.terms.entry(m.clone()).or_default();
                *slot += c1 * c2;
                if slot.is_zero() {
                    out.terms.remove(&m);
                }
            }
        }
        out
    }

    pub fn eval(&self, s: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| m.iter().zip(s).map(|(&k, &z)| cpow(z, k)).product::<Complex64>() * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    pub fn num_vars(&self) -> usize {
        self.vars
    }
}

impl fmt::Display for TracePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(e, &k)| if k == 1 { format!("s{e}") } else { format!("s{e}^{k}") })
                .collect();
            let mag = c.abs();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for TracePoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            exps: &'a [i64],
            coeff: String,
        }
        let v: Vec<Term> = self.terms.iter().map(|(m, c)| Term { exps: m, coeff: c.to_string() }).collect();
        v.serialize(s)
    }
}

type SymMat = [TracePoly; 4];

fn sym_mul(a: &SymMat, b: &SymMat) -> SymMat {
    let e = |i: usize, j: usize| a[2 * i].mul(&b[j]).add(&a[2 * i + 1].mul(&b[2 + j]));
    [e(0, 0), e(0, 1), e(1, 0), e(1, 1)]
}

fn sym_identity(n: usize) -> SymMat {
    [TracePoly::constant(n, 1), TracePoly::zero(n), TracePoly::zero(n), TracePoly::constant(n, 1)]
}

fn sym_inverse(a: &SymMat) -> SymMat {
    [a[3].clone(), a[1].neg(), a[2].neg(), a[0].clone()]
}

fn sym_turn(n: usize, k: usize) -> SymMat {
    let c = |x| TracePoly::constant(n, x);
    match k {
        0 => sym_identity(n),
        1 => [c(1), c(1), c(-1), c(0)],
        _ => [c(0), c(1), c(-1), c(-1)],
    }
}

fn sym_cross(n: usize, e: usize) -> SymMat {
    [TracePoly::zero(n), TracePoly::var(n, e, 1).neg(), TracePoly::var(n, e, -1), TracePoly::zero(n)]
}

/// `Tr r(K)` as a Laurent polynomial in the square roots `s_e`.
pub fn classical_trace_poly(k: CurveLabel, tri: &Triangulation) -> Result<TracePoly> {
    let n = tri.num_edges;
    let tree = DualTree::new(tri);
    let gens: Vec<SymMat> = (0..tree.generators.len())
        .map(|g| {
            path_product(
                tri,
                (0, 0),
                &tree.generator_loop(tri, g),
                Some(0),
                sym_identity(n),
                &|e| sym_cross(n, e),
                &|k| sym_turn(n, k),
                &sym_mul,
            )
            .0
        })
        .collect();
    let word = curve_word(tri, k)?;
    let mut acc = sym_identity(n);
    for &(g, e) in &word.letters {
        let m = if e > 0 { gens[g].clone() } else { sym_inverse(&gens[g]) };
        acc = sym_mul(&acc, &m);
    }
    Ok(acc[0].add(&acc[3]))
}

/// Trace of the holonomy read cyclically along the curve; this is the
/// comparison target `-Tr` of the spinned representation.
pub fn spinned_target(sd: &ShearData, k: CurveLabel) -> Result<Complex64> {
    let tri = &sd.triangulation;
    let path = match k {
        CurveLabel::Puncture(i) => DualTree::new(tri).peripheral_loop(tri, i)?.1,
        CurveLabel::Slope(..) => {
            require_torus(tri, k)?;
            standard_cycle(k).ok_or_else(|| SkeinError::UnsupportedCurve(format!("no cyclic path for {k}")))?
        }
    };
    Ok(cyclic_holonomy(sd, &path)?.trace())
}

/// Curves carried by the three quantum-trace generators.
pub const GENERATOR_CURVES: [CurveLabel; 3] = [CurveLabel::Slope(1, 0), CurveLabel::Slope(0, 1), CurveLabel::Slope(1, 1)];

/// Bound on candidate supports in the quantum-trace search.
pub const SEARCH_MAX_TERMS: usize = 4;
const SEARCH_EXPONENTS: [i64; 5] = [0, -1, 1, -2, 2];

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumTraces {
    pub track: TrainTrack,
    pub y: [QTorusElement; 3],
    /// Image of the boundary-parallel skein.
    pub puncture: QTorusElement,
}

/// Quantum trace of a classical support: lattice vectors with `A=1` coefficients.
fn classical_support(tt: &TrainTrack, k: CurveLabel) -> Result<Vec<(Vec<i64>, BigInt)>> {
    let poly = classical_trace_poly(k, &tt.triangulation)?;
    if poly.terms.len() > SEARCH_MAX_TERMS {
        return Err(SkeinError::SearchExhausted(format!("{k}: {} terms exceed the bound", poly.terms.len())));
    }
    poly.terms
        .iter()
        .map(|(m, c)| {
            let w = tt
                .from_edge_coords(m)
                .ok_or_else(|| SkeinError::SearchExhausted(format!("{k}: monomial {m:?} is not a lattice point")))?;
            if w.iter().any(|x| x.abs() > 1) {
                return Err(SkeinError::SearchExhausted(format!("{k}: monomial {m:?} has branch weights beyond 1")));
            }
            Ok((w, c.clone()))
        })
        .collect()
}

fn candidates(support: &[(Vec<i64>, BigInt)]) -> Vec<QTorusElement> {
    let mut out = vec![QTorusElement::default()];
    for (w, c) in support {
        let mut next = Vec::with_capacity(out.len() * SEARCH_EXPONENTS.len());
        for base in &out {
            for &k in &SEARCH_EXPONENTS {
                next.push(base.add(&QTorusElement::term(w.clone(), LaurentHalf::monomial(c.clone(), k))));
            }
        }
        out = next;
    }
    // fewest and smallest twists first
    out.sort_by_key(|y| y.terms.values().map(|c| c.min_exponent().unwrap_or(0).abs()).sum::<i64>());
    out
}

fn relation_residual(tt: &TrainTrack, a: &QTorusElement, b: &QTorusElement, c: &QTorusElement) -> Result<QTorusElement> {
    let ab = qt_multiply(tt, a, b)?;
    let ba = qt_multiply(tt, b, a)?;
    let lhs = ab.scale(&LaurentHalf::a_pow(1)).sub(&ba.scale(&LaurentHalf::a_pow(-1)));
    Ok(lhs.sub(&c.scale(&(LaurentHalf::a_pow(2) - LaurentHalf::a_pow(-2)))))
}

fn divide_by_quantum_two(u: &QTorusElement) -> Option<QTorusElement> {
    let d = LaurentHalf::a_pow(2) - LaurentHalf::a_pow(-2);
    let mut out = QTorusElement::default();
    for (w, c) in &u.terms {
        out = out.add(&QTorusElement::term(w.clone(), c.div_exact(&d)?));
    }
    Some(out)
}

fn search_quantum_traces() -> Result<QuantumTraces> {
    let tt = punctured_torus();
    let supports: Vec<Vec<(Vec<i64>, BigInt)>> =
        GENERATOR_CURVES.iter().map(|&k| classical_support(&tt, k)).collect::<Result<_>>()?;
    let target3: BTreeMap<Vec<i64>, BigInt> = supports[2].iter().cloned().collect();
    let c1 = candidates(&supports[0]);
    let c2 = candidates(&supports[1]);
    for y1 in &c1 {
        for y2 in &c2 {
            let lhs = qt_multiply(&tt, y1, y2)?
                .scale(&LaurentHalf::a_pow(1))
                .sub(&qt_multiply(&tt, y2, y1)?.scale(&LaurentHalf::a_pow(-1)));
            let Some(y3) = divide_by_quantum_two(&lhs) else { continue };
            if y3.classical_limit() != target3 || y3.terms.len() < 2 {
                continue;
            }
            if !relation_residual(&tt, y2, &y3, y1)?.is_zero() || !relation_residual(&tt, &y3, y1, y2)?.is_zero() {
                continue;
            }
            let y = [y1.clone(), y2.clone(), y3];
            let puncture = puncture_element(&tt, &y)?;
            return Ok(QuantumTraces { track: tt, y, puncture });
        }
    }
    Err(SkeinError::SearchExhausted(format!(
        "no Y1, Y2 among {} x {} candidates satisfy both constraints",
        c1.len(),
        c2.len()
    )))
}

/// `A·Y1Y2Y3 - A²Y1² - A⁻²Y2² - A²Y3² + A² + A⁻²`.
fn puncture_element(tt: &TrainTrack, y: &[QTorusElement; 3]) -> Result<QTorusElement> {
    let m = |a: &QTorusElement, b: &QTorusElement| qt_multiply(tt, a, b);
    let y123 = m(&m(&y[0], &y[1])?, &y[2])?;
    let unit = QTorusElement::unit(tt.num_branches());
    Ok(y123
        .scale(&LaurentHalf::a_pow(1))
        .sub(&m(&y[0], &y[0])?.scale(&LaurentHalf::a_pow(2)))
        .sub(&m(&y[1], &y[1])?.scale(&LaurentHalf::a_pow(-2)))
        .sub(&m(&y[2], &y[2])?.scale(&LaurentHalf::a_pow(2)))
        .add(&unit.scale(&(LaurentHalf::a_pow(2) + LaurentHalf::a_pow(-2)))))
}

/// The certified quantum traces, computed once.
pub fn quantum_traces() -> Result<&'static QuantumTraces> {
    static CELL: OnceLock<Result<QuantumTraces>> = OnceLock::new();
    CELL.get_or_init(search_quantum_traces).as_ref().map_err(Clone::clone)
}

/// `Y_i` for `i` in `1..=3`.
pub fn quantum_trace_pt(i: usize) -> Result<QTorusElement> {
    if !(1..=3).contains(&i) {
        return Err(SkeinError::Index { index: i, len: 3 });
    }
    Ok(quantum_traces()?.y[i - 1].clone())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub curve: String,
    pub lambda: Complex64,
    pub schur_residual: f64,
    pub holonomy_trace: Complex64,
    /// `σ(K)`: the target is `(-1)^{σ+1}` times the holonomy trace.
    pub sigma: u8,
    pub target: Complex64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PunctureRecord {
    pub puncture: usize,
    pub h: Complex64,
    pub p: Complex64,
    pub schur_residual: f64,
    pub t_n_p: Complex64,
    /// `|T_N(p) - (h^N + h^-N)|` with `h^N` read off the central character.
    pub bookkeeping_residual: f64,
    pub eigenvalue: PunctureEigen,
    pub holonomy_trace: Complex64,
    pub sigma: u8,
    pub target: Complex64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowReport {
    pub n: u64,
    pub k: i64,
    pub roots: Vec<Complex64>,
    pub dimension: usize,
    pub relation_residual: f64,
    pub irreducibility_rank: usize,
    pub blocks_tested: usize,
    pub curves: Vec<CurveRecord>,
    pub punctures: Vec<PunctureRecord>,
}

impl ShadowReport {
    pub fn max_curve_error(&self) -> f64 {
        self.curves.iter().map(|c| c.error).fold(0.0, f64::max)
    }

    pub fn max_puncture_error(&self) -> f64 {
        self.punctures.iter().map(|p| p.error).fold(0.0, f64::max)
    }

    pub fn max_schur_residual(&self) -> f64 {
        self.curves.iter().map(|c| c.schur_residual).chain(self.punctures.iter().map(|p| p.schur_residual)).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_schur_residual() < SCHUR_TOL && self.max_curve_error() < SHADOW_TOL && self.max_puncture_error() < SHADOW_TOL
    }
}

fn sign_exponent(target: Complex64, trace: Complex64) -> u8 {
    // target = (-1)^{σ+1} Tr
    if (target + trace).norm() <= (target - trace).norm() {
        0
    } else {
        1
    }
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Rejects puncture traces at the branch points `±2`.
pub fn check_generic(sd: &ShearData) -> Result<()> {
    for i in 0..sd.triangulation.punctures {
        let ev = puncture_eigenvalue(sd, i)?;
        for b in [2.0, -2.0] {
            if (ev.trace - b).norm() < 1e-6 {
                return Err(SkeinError::Validation(format!("puncture {i} has trace {}, not generic", ev.trace)));
            }
        }
    }
    Ok(())
}

fn scalar_of(m: &crate::qrep::CMatrix) -> (Complex64, f64) {
    (m.trace() / m.nrows() as f64, off_scalar_residual(m))
}

fn element_image(rep: &MatrixRep, tt: &TrainTrack, basis: &[Vec<i64>], y: &QTorusElement) -> Result<crate::qrep::CMatrix> {
    let terms = y
        .terms
        .iter()
        .map(|(w, c)| {
            let coords = tt.coordinates(basis, w).ok_or_else(|| SkeinError::Validation(format!("{w:?} is not in the lattice")))?;
            Ok((coords, c.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rep.element(&terms))
}

/// Builds the representation with classical shadow given by `sd` and compares
/// Chebyshev images of the quantum traces with the holonomy.
pub fn shadow_pipeline(sd: &ShearData, root: &RootOfUnity, h_twist: i64) -> Result<ShadowReport> {
    let tri = &sd.triangulation;
    require_torus(tri, CurveLabel::Puncture(0))?;
    check_generic(sd)?;
    let qt = quantum_traces()?;
    let tt = build_train_track(tri);
    let n = root.order();
    let basis = tt.weight_basis()?;
    let omega = omega_matrix(&tt, &basis)?;
    let nth_powers = basis.iter().map(|b| sd.monomial(&tt.edge_coords(b))).collect();
    let pv = tt.puncture_vector(0)?;
    let mu = sd.monomial(&tt.edge_coords(&pv));
    let h = root.power(h_twist) * principal_root(mu, n);
    let pcoords = tt.coordinates(&basis, &pv).ok_or_else(|| SkeinError::Validation("puncture vector off lattice".into()))?;
    let character = CentralCharacter { nth_powers, kernel_vectors: vec![pcoords], kernel_values: vec![h] };
    let rep = build_rep(&omega, root, &character)?;
    let relation_residual = verify_rep(&rep);
    let irr = irreducibility_rank(&rep);
    let tn = chebyshev(n as usize);
    let r = holonomy(sd)?;
    let mut curves = Vec::new();
    for (i, &k) in GENERATOR_CURVES.iter().enumerate() {
        let y = element_image(&rep, &tt, &basis, &qt.y[i])?;
        let (lambda, res) = scalar_of(&tn.evaluate(&y));
        if res >= SCHUR_TOL {
            return Err(SkeinError::NonScalar(res));
        }
        let tr = r.eval_word(&curve_word(tri, k)?)?.trace();
        let target = spinned_target(sd, k)?;
        curves.push(CurveRecord {
            curve: k.to_string(),
            lambda,
            schur_residual: res,
            holonomy_trace: tr,
            sigma: sign_exponent(target, tr),
            target,
            error: rel_err(lambda, target),
        });
    }
    let pm = element_image(&rep, &tt, &basis, &qt.puncture)?;
    let (p, pres) = scalar_of(&pm);
    if pres >= SCHUR_TOL {
        return Err(SkeinError::NonScalar(pres));
    }
    let t_n_p = tn.evaluate(&p);
    let h_n = h.powu(n as u32);
    let bookkeeping = rel_err(t_n_p, h_n + h_n.inv());
    if bookkeeping > 1e-8 {
        return Err(SkeinError::ConventionMismatch(format!("T_N(p) bookkeeping residual {bookkeeping}")));
    }
    let ev = puncture_eigenvalue(sd, 0)?;
    let target = spinned_target(sd, CurveLabel::Puncture(0))?;
    let punctures = vec![PunctureRecord {
        puncture: 0,
        h,
        p,
        schur_residual: pres,
        t_n_p,
        bookkeeping_residual: bookkeeping,
        eigenvalue: ev,
        holonomy_trace: ev.lift_trace,
        sigma: sign_exponent(target, ev.lift_trace),
        target,
        error: rel_err(t_n_p, target),
    }];
    Ok(ShadowReport {
        n,
        k: root.index(),
        roots: sd.s.clone(),
        dimension: rep.dimension,
        relation_residual,
        irreducibility_rank: irr,
        blocks_tested: 1,
        curves,
        punctures,
    })
}

/// Seeded batch run over random generic shear data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowBatch {
    pub n: u64,
    pub seed: u64,
    pub samples: Vec<ShadowReport>,
    pub max_curve_error: f64,
    pub max_puncture_error: f64,
    pub max_schur_residual: f64,
    pub passed: bool,
}

/// Draws generic shear data for sample `index` of a seeded run.
pub fn sample_shear(tri: &Triangulation, seed: u64, index: u64) -> ShearData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    loop {
        let sd = ShearData::random(tri.clone(), &mut rng);
        if check_generic(&sd).is_ok() {
            return sd;
        }
    }
}

pub fn shadow_batch(tri: &Triangulation, root: &RootOfUnity, samples: usize, seed: u64) -> Result<ShadowBatch> {
    quantum_traces()?;
    let reports = (0..samples as u64)
        .into_par_iter()
        .map(|i| shadow_pipeline(&sample_shear(tri, seed, i), root, -1))
        .collect::<Result<Vec<_>>>()?;
    let max_curve_error = reports.iter().map(ShadowReport::max_curve_error).fold(0.0, f64::max);
    let max_puncture_error = reports.iter().map(ShadowReport::max_puncture_error).fold(0.0, f64::max);
    let max_schur_residual = reports.iter().map(ShadowReport::max_schur_residual).fold(0.0, f64::max);
    Ok(ShadowBatch {
        n: root.order(),
        seed,
        passed: reports.iter().all(ShadowReport::passed),
        samples: reports,
        max_curve_error,
        max_puncture_error,
        max_schur_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charvar::sl2_inverse;
    use crate::traintrack::{by_name, corpus};

    fn torus() -> Triangulation {
        by_name("punctured_torus").unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn unit_weights() {
        let sd = ShearData::from_roots(torus(), vec![Complex64::one(); 3]).unwrap();
        let ev = puncture_eigenvalue(&sd, 0).unwrap();
        assert!((ev.from_roots - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // parabolic, not central
        assert!((ev.trace - 2.0).norm() < 1e-10);
        assert!((ev.lift_trace + 2.0).norm() < 1e-10);
        let r = holonomy(&sd).unwrap();
        let m = r.eval_word(&curve_word(&sd.triangulation, CurveLabel::Puncture(0)).unwrap()).unwrap();
        assert!((m + Mat2::identity()).norm() > 0.5);
        assert!(check_generic(&sd).is_err());
    }

    #[test]
    fn commutator_matches_puncture() {
        let mut g = rng(5);
        for _ in 0..50 {
            let sd = ShearData::random(torus(), &mut g);
            let r = holonomy(&sd).unwrap();
            let (a, b) = (r.eval_word(&curve_word(&sd.triangulation, CurveLabel::Slope(1, 0)).unwrap()).unwrap(), r
                .eval_word(&curve_word(&sd.triangulation, CurveLabel::Slope(0, 1)).unwrap())
                .unwrap());
            let comm = a * b * sl2_inverse(&a) * sl2_inverse(&b);
            let ev = puncture_eigenvalue(&sd, 0).unwrap();
            assert!((comm.trace() - ev.lift_trace).norm() < 1e-9);
            assert!((ev.lift_trace + ev.trace).norm() < 1e-9);
            assert!((ev.trace - (ev.from_matrix + ev.from_matrix.inv())).norm() < 1e-8);
        }
    }

    #[test]
    fn eigenvalue_law_on_corpus() {
        let mut g = rng(6);
        for (name, tri) in corpus().unwrap() {
            for _ in 0..20 {
                let sd = ShearData::random(tri.clone(), &mut g);
                for i in 0..tri.punctures {
                    puncture_eigenvalue(&sd, i).unwrap_or_else(|e| panic!("{name}: {e}"));
                }
            }
        }
    }

    #[test]
    fn bad_puncture_index() {
        let sd = ShearData::from_roots(torus(), vec![Complex64::one(); 3]).unwrap();
        assert!(matches!(puncture_eigenvalue(&sd, 1), Err(SkeinError::Index { .. })));
    }

    #[test]
    fn zero_weight_rejected() {
        let s = vec![Complex64::one(), Complex64::zero(), Complex64::one()];
        assert!(matches!(ShearData::from_roots(torus(), s), Err(SkeinError::ZeroWeight(1))));
    }

    #[test]
    fn negated_root_changes_signs_only() {
        let mut g = rng(7);
        let sd = ShearData::random(torus(), &mut g);
        let r1 = holonomy(&sd).unwrap();
        let r2 = holonomy(&sd.negate_root(0)).unwrap();
        for (m1, m2) in r1.matrices().iter().zip(r2.matrices()) {
            assert!((m1 - m2).norm() < 1e-12 || (m1 + m2).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_polys_match_holonomy() {
        let tri = torus();
        let mut g = rng(8);
        let labels = [
            CurveLabel::Slope(1, 0),
            CurveLabel::Slope(0, 1),
            CurveLabel::Slope(1, 1),
            CurveLabel::Slope(2, 1),
            CurveLabel::Slope(1, -1),
            CurveLabel::Slope(3, 2),
            CurveLabel::Puncture(0),
        ];
        let polys: Vec<TracePoly> = labels.iter().map(|&k| classical_trace_poly(k, &tri).unwrap()).collect();
        for _ in 0..200 {
            let sd = ShearData::random(tri.clone(), &mut g);
            for (k, p) in labels.iter().zip(&polys) {
                let want = holonomy_trace(&sd, *k).unwrap();
                assert!((p.eval(&sd.s) - want).norm() < 1e-8 * want.norm().max(1.0), "{k}");
            }
        }
        assert_eq!(polys[0].to_string(), "s0*s1 + s0^-1*s1 + s0^-1*s1^-1");
    }

    #[test]
    fn puncture_poly_is_eigenvalue_law() {
        let tri = torus();
        let p = classical_trace_poly(CurveLabel::Puncture(0), &tri).unwrap();
        assert_eq!(p.to_string(), "-s0^2*s1^2*s2^2 - s0^-2*s1^-2*s2^-2");
    }

    #[test]
    fn unsupported_curves() {
        let tri = by_name("four_punctured_sphere").unwrap();
        assert!(matches!(classical_trace_poly(CurveLabel::Slope(1, 0), &tri), Err(SkeinError::UnsupportedCurve(_))));
        assert!(classical_trace_poly(CurveLabel::Puncture(2), &tri).is_ok());
    }

    #[test]
    fn quantum_traces_certified() {
        let qt = quantum_traces().unwrap();
        let tt = &qt.track;
        for i in 0..3 {
            let (a, b, c) = (&qt.y[i], &qt.y[(i + 1) % 3], &qt.y[(i + 2) % 3]);
            assert!(relation_residual(tt, a, b, c).unwrap().is_zero());
            assert!(a.terms.len() >= 2);
            for coeff in a.terms.values() {
                assert_eq!(coeff.eval_at_one(), BigInt::one());
            }
        }
        // puncture skein is H + H^-1
        let pv = tt.puncture_vector(0).unwrap();
        let neg: Vec<i64> = pv.iter().map(|x| -x).collect();
        let want = QTorusElement::monomial(pv).add(&QTorusElement::monomial(neg));
        assert_eq!(qt.puncture, want);
    }

    #[test]
    fn pipeline_small_run() {
        let tri = torus();
        for n in [3u64, 5] {
            let root = RootOfUnity::new(n, 1).unwrap();
            let batch = shadow_batch(&tri, &root, 4, 11).unwrap();
            assert!(batch.passed, "{batch:?}");
            for s in &batch.samples {
                assert_eq!(s.dimension, n as usize);
                assert!(s.relation_residual < 1e-10);
                assert!(s.curves.iter().all(|c| c.sigma == 1));
                assert!(s.punctures.iter().all(|p| p.sigma == 0));
            }
        }
    }

    #[test]
    fn sign_covariance() {
        let tri = torus();
        let root = RootOfUnity::new(3, 1).unwrap();
        let sd = sample_shear(&tri, 3, 0);
        let a = shadow_pipeline(&sd, &root, -1).unwrap();
        for e in 0..3 {
            let b = shadow_pipeline(&sd.negate_root(e), &root, -1).unwrap();
            for (ca, cb) in a.curves.iter().zip(&b.curves) {
                let flip_l = (ca.lambda + cb.lambda).norm() < 1e-8;
                let flip_t = (ca.target + cb.target).norm() < 1e-8;
                assert_eq!(flip_l, flip_t);
                assert!(flip_l || (ca.lambda - cb.lambda).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn other_twists_keep_t_n_p() {
        let tri = torus();
        let root = RootOfUnity::new(5, 1).unwrap();
        let sd = sample_shear(&tri, 9, 1);
        let base = shadow_pipeline(&sd, &root, -1).unwrap();
        for twist in 0..5 {
            let r = shadow_pipeline(&sd, &root, twist).unwrap();
            assert!((r.punctures[0].t_n_p - base.punctures[0].t_n_p).norm() < 1e-8);
        }
    }

    #[test]
    fn batch_is_deterministic() {
        let tri = torus();
        let root = RootOfUnity::new(3, 1).unwrap();
        let a = serde_json::to_string(&shadow_batch(&tri, &root, 3, 7).unwrap()).unwrap();
        let b = serde_json::to_string(&shadow_batch(&tri, &root, 3, 7).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
