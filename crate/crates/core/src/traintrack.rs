//! Ideal triangulations, their train tracks, the weight lattice and the
//! Chekhov–Fock quantum torus.
//!
//! Conventions: triangle `t` has corners `V0, V1, V2` counterclockwise and side
//! `s` runs from `V_s` to `V_{s+1}`. Gluing sides `(t,s)` and `(t',s')` identifies
//! `V_s ~ V'_{s'+1}` and `V_{s+1} ~ V'_{s'}`. Branch `3t + k` joins the midpoints
//! of sides `k` and `k+1`, turning around corner `V_{k+1}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkeinError};
use crate::exactalg::LaurentHalf;
use crate::lattice::{integer_kernel, solve_integer, IntMatrix};

pub const CORPUS: [(&str, &str); 4] = [
    ("punctured_torus", include_str!("../../../data/triangulations/punctured_torus.json")),
    ("three_punctured_sphere", include_str!("../../../data/triangulations/three_punctured_sphere.json")),
    ("four_punctured_sphere", include_str!("../../../data/triangulations/four_punctured_sphere.json")),
    ("two_punctured_torus", include_str!("../../../data/triangulations/two_punctured_torus.json")),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulationFile {
    pub genus: usize,
    pub punctures: usize,
    pub triangles: Vec<[usize; 3]>,
    pub gluings: Vec<[usize; 4]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    pub genus: usize,
    pub punctures: usize,
    pub triangles: Vec<[usize; 3]>,
    /// For each side `(t, s)`, the side it is glued to.
    pub partner: Vec<[(usize, usize); 3]>,
    /// Puncture index of each corner `(t, v)`.
    pub corner_puncture: Vec<[usize; 3]>,
    pub num_edges: usize,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn load_triangulation(text: &str) -> Result<Triangulation> {
    let f: TriangulationFile = serde_json::from_str(text).map_err(|e| SkeinError::Schema(e.to_string()))?;
    Triangulation::from_file(f)
}

impl Triangulation {
    pub fn from_file(f: TriangulationFile) -> Result<Self> {
        let nt = f.triangles.len();
        let num_edges = f.triangles.iter().flatten().copied().max().map_or(0, |m| m + 1);
        let mut occurrences = vec![0usize; num_edges];
        for &e in f.triangles.iter().flatten() {
            occurrences[e] += 1;
        }
        if let Some(e) = occurrences.iter().position(|&c| c != 2) {
            return Err(SkeinError::Schema(format!(
                "edge {e} appears on {} triangle sides, expected 2",
                occurrences[e]
            )));
        }
        let mut partner = vec![[(usize::MAX, usize::MAX); 3]; nt];
        for &[t, s, t2, s2] in &f.gluings {
            if t >= nt || t2 >= nt || s > 2 || s2 > 2 {
                return Err(SkeinError::Schema(format!("gluing {:?} out of range", [t, s, t2, s2])));
            }
            if f.triangles[t][s] != f.triangles[t2][s2] {
                return Err(SkeinError::Schema(format!(
                    "gluing {:?} joins sides carrying different edges",
                    [t, s, t2, s2]
                )));
            }
            if (t, s) == (t2, s2) {
                return Err(SkeinError::SelfLoopEdge(f.triangles[t][s]));
            }
            for (a, b) in [((t, s), (t2, s2)), ((t2, s2), (t, s))] {
                if partner[a.0][a.1].0 != usize::MAX {
                    return Err(SkeinError::Schema(format!("side {a:?} glued twice")));
                }
                partner[a.0][a.1] = b;
            }
        }
        if partner.iter().flatten().any(|p| p.0 == usize::MAX) {
            return Err(SkeinError::Schema("some triangle side is not glued".into()));
        }
        // two sides of one triangle folded around their common corner
        for (t, sides) in partner.iter().enumerate() {
            for (s, &(t2, s2)) in sides.iter().enumerate() {
                if t2 == t && (s2 + 1) % 3 == s {
                    return Err(SkeinError::SelfLoopEdge(f.triangles[t][s]));
                }
            }
        }
        let g = f.genus as i64;
        let p = f.punctures as i64;
        if nt as i64 != 4 * g + 2 * p - 4 || num_edges as i64 != 6 * g + 3 * p - 6 {
            return Err(SkeinError::EulerMismatch(format!(
                "g={g}, p={p} needs {} triangles and {} edges, got {nt} and {num_edges}",
                4 * g + 2 * p - 4,
                6 * g + 3 * p - 6
            )));
        }
        let mut dsu = Dsu((0..3 * nt).collect());
        for (t, sides) in partner.iter().enumerate() {
            for (s, &(t2, s2)) in sides.iter().enumerate() {
                dsu.union(3 * t + s, 3 * t2 + (s2 + 1) % 3);
                dsu.union(3 * t + (s + 1) % 3, 3 * t2 + s2);
            }
        }
        let mut label: BTreeMap<usize, usize> = BTreeMap::new();
        let mut corner_puncture = vec![[0usize; 3]; nt];
        for t in 0..nt {
            for v in 0..3 {
                let r = dsu.find(3 * t + v);
                let next = label.len();
                corner_puncture[t][v] = *label.entry(r).or_insert(next);
            }
        }
        if label.len() != f.punctures {
            return Err(SkeinError::EulerMismatch(format!(
                "gluings produce {} punctures, file declares {}",
                label.len(),
                f.punctures
            )));
        }
        Ok(Self { genus: f.genus, punctures: f.punctures, triangles: f.triangles, partner, corner_puncture, num_edges })
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Punctures at the two ends of every edge.
    pub fn edge_endpoints(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(0, 0); self.num_edges];
        for (t, tri) in self.triangles.iter().enumerate() {
            for (s, &e) in tri.iter().enumerate() {
                out[e] = (self.corner_puncture[t][s], self.corner_puncture[t][(s + 1) % 3]);
            }
        }
        out
    }

    pub fn has_distinct_endpoints(&self) -> bool {
        self.edge_endpoints().iter().all(|(a, b)| a != b)
    }

    /// `a_ef`: number of corners where side `e` is followed counterclockwise by side `f`.
    pub fn corner_counts(&self) -> Vec<Vec<i64>> {
        let mut a = vec![vec![0i64; self.num_edges]; self.num_edges];
        for tri in &self.triangles {
            for s in 0..3 {
                a[tri[s]][tri[(s + 1) % 3]] += 1;
            }
        }
        a
    }

    /// `σ_ef = a_ef - a_fe`.
    pub fn corner_sigma(&self) -> Vec<Vec<i64>> {
        let a = self.corner_counts();
        let n = self.num_edges;
        (0..n).map(|e| (0..n).map(|f| a[e][f] - a[f][e]).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Switch {
    pub edge: usize,
    /// Branch ends on each side of the switch.
    pub sides: [[usize; 2]; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainTrack {
    pub triangulation: Triangulation,
    pub switches: Vec<Switch>,
}

pub type WeightVector = Vec<i64>;

pub fn build_train_track(t: &Triangulation) -> TrainTrack {
    let mut seen = vec![false; t.num_edges];
    let mut switches = Vec::with_capacity(t.num_edges);
    for (ti, tri) in t.triangles.iter().enumerate() {
        for (s, &e) in tri.iter().enumerate() {
            if seen[e] {
                continue;
            }
            seen[e] = true;
            let (t2, s2) = t.partner[ti][s];
            switches.push(Switch { edge: e, sides: [side_branches(ti, s), side_branches(t2, s2)] });
        }
    }
    switches.sort_by_key(|sw| sw.edge);
    TrainTrack { triangulation: t.clone(), switches }
}

/// The two branches ending on side `(t, s)`.
fn side_branches(t: usize, s: usize) -> [usize; 2] {
    [3 * t + s, 3 * t + (s + 2) % 3]
}

impl TrainTrack {
    pub fn num_branches(&self) -> usize {
        3 * self.triangulation.num_triangles()
    }

    pub fn expected_rank(&self) -> usize {
        6 * self.triangulation.genus + 3 * self.triangulation.punctures - 6
    }

    pub fn switch_matrix(&self) -> IntMatrix {
        let nb = self.num_branches();
        self.switches
            .iter()
            .map(|sw| {
                let mut row = vec![BigInt::from(0); nb];
                for &b in &sw.sides[0] {
                    row[b] += 1;
                }
                for &b in &sw.sides[1] {
                    row[b] -= 1;
                }
                row
            })
            .collect()
    }

    pub fn satisfies_switch(&self, w: &[i64]) -> bool {
        w.len() == self.num_branches()
            && self.switches.iter().all(|sw| {
                let l: i64 = sw.sides[0].iter().map(|&b| w[b]).sum();
                let r: i64 = sw.sides[1].iter().map(|&b| w[b]).sum();
                l == r
            })
    }

    fn check(&self, w: &[i64]) -> Result<()> {
        if self.satisfies_switch(w) {
            Ok(())
        } else {
            Err(SkeinError::TrackMismatch)
        }
    }

    /// Switch totals, one per edge.
    pub fn edge_coords(&self, w: &[i64]) -> Vec<i64> {
        self.switches.iter().map(|sw| sw.sides[0].iter().map(|&b| w[b]).sum()).collect()
    }

    /// Inverse of [`edge_coords`](Self::edge_coords); `None` unless every triangle has even total.
    pub fn from_edge_coords(&self, m: &[i64]) -> Option<WeightVector> {
        let mut w = vec![0; self.num_branches()];
        for (t, tri) in self.triangulation.triangles.iter().enumerate() {
            for k in 0..3 {
                let v = m[tri[k]] + m[tri[(k + 1) % 3]] - m[tri[(k + 2) % 3]];
                if v % 2 != 0 {
                    return None;
                }
                w[3 * t + k] = v / 2;
            }
        }
        Some(w)
    }

    /// The vector with edge coordinates `2 δ_e`.
    pub fn edge_vector(&self, e: usize) -> WeightVector {
        let mut m = vec![0; self.triangulation.num_edges];
        m[e] = 2;
        self.from_edge_coords(&m).expect("even coordinates")
    }

    /// True when the two weights on each side of every switch have equal parity.
    pub fn is_even_parity(&self, w: &[i64]) -> bool {
        self.switches
            .iter()
            .all(|sw| sw.sides.iter().all(|side| (w[side[0]] - w[side[1]]) % 2 == 0))
    }

    /// Thurston form by the switch rule: at each side of each switch, with the
    /// two branch ends `(t,s)` and `(t,s-1)`, add `a(t,s) b(t,s-1) - a(t,s-1) b(t,s)`.
    pub fn thurston_form(&self, a: &[i64], b: &[i64]) -> Result<i64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self
            .switches
            .iter()
            .flat_map(|sw| sw.sides.iter())
            .map(|&[l, r]| a[l] * b[r] - a[r] * b[l])
            .sum())
    }

    pub fn weight_basis(&self) -> Result<Vec<WeightVector>> {
        let k = integer_kernel(&self.switch_matrix(), self.num_branches());
        if k.len() != self.expected_rank() {
            return Err(SkeinError::RankMismatch { expected: self.expected_rank(), got: k.len() });
        }
        Ok(k.iter().map(|r| r.iter().map(|x| x.to_i64().expect("small basis entries")).collect()).collect())
    }

    /// Gram matrix of the Thurston form on the given vectors.
    pub fn form_matrix(&self, basis: &[WeightVector]) -> Result<Vec<Vec<i64>>> {
        basis.iter().map(|a| basis.iter().map(|b| self.thurston_form(a, b)).collect()).collect()
    }

    /// Weight 1 on every branch turning around a corner at puncture `i`.
    pub fn puncture_vector(&self, i: usize) -> Result<WeightVector> {
        let p = self.triangulation.punctures;
        if i >= p {
            return Err(SkeinError::Index { index: i, len: p });
        }
        let mut w = vec![0; self.num_branches()];
        for (t, corners) in self.triangulation.corner_puncture.iter().enumerate() {
            for k in 0..3 {
                if corners[(k + 1) % 3] == i {
                    w[3 * t + k] += 1;
                }
            }
        }
        Ok(w)
    }

    /// Coordinates of `w` in `basis` (rows must be a Z-basis of the lattice).
    pub fn coordinates(&self, basis: &[WeightVector], w: &[i64]) -> Option<Vec<i64>> {
        solve_integer(basis, w)
    }
}

/// Element of the quantum torus: lattice vectors with Laurent coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QTorusElement {
    pub terms: BTreeMap<WeightVector, LaurentHalf>,
}

impl QTorusElement {
    pub fn monomial(w: WeightVector) -> Self {
        Self::term(w, LaurentHalf::one())
    }

    pub fn term(w: WeightVector, c: LaurentHalf) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        Self { terms }
    }

    pub fn unit(branches: usize) -> Self {
        Self::monomial(vec![0; branches])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, w: WeightVector, c: &LaurentHalf) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(w.clone()).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), &-c);
        }
        out
    }

    pub fn scale(&self, c: &LaurentHalf) -> Self {
        let mut out = Self::default();
        for (w, x) in &self.terms {
            out.add_term(w.clone(), &(x * c));
        }
        out
    }

    /// Coefficients at `A = 1`.
    pub fn classical_limit(&self) -> BTreeMap<WeightVector, BigInt> {
        self.terms.iter().map(|(w, c)| (w.clone(), c.eval_at_one())).collect()
    }
}

/// `α·β = A^{ω(α,β)/2} (α+β)`, extended bilinearly.
pub fn qt_multiply(tt: &TrainTrack, u: &QTorusElement, v: &QTorusElement) -> Result<QTorusElement> {
    let pairs: Vec<(&WeightVector, &LaurentHalf, &WeightVector, &LaurentHalf)> = u
        .terms
        .iter()
        .flat_map(|(a, ca)| v.terms.iter().map(move |(b, cb)| (a, ca, b, cb)))
        .collect();
    let products: Vec<Result<(WeightVector, LaurentHalf)>> = pairs
        .par_iter()
        .map(|(a, ca, b, cb)| {
            let w = tt.thurston_form(a, b)?;
            let sum: WeightVector = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
            Ok((sum, (*ca * *cb).shift(w)))
        })
        .collect();
    let mut out = QTorusElement::default();
    for p in products {
        let (w, c) = p?;
        out.add_term(w, &c);
    }
    Ok(out)
}

/// Loads every corpus surface, keyed by name.
pub fn corpus() -> Result<Vec<(&'static str, Triangulation)>> {
    CORPUS.iter().map(|(name, text)| Ok((*name, load_triangulation(text)?))).collect()
}

pub fn by_name(name: &str) -> Option<Triangulation> {
    CORPUS.iter().find(|(n, _)| *n == name).and_then(|(_, text)| load_triangulation(text).ok())
}

pub fn punctured_torus() -> TrainTrack {
    build_train_track(&by_name("punctured_torus").expect("bundled punctured torus"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(name: &str) -> Triangulation {
        by_name(name).unwrap()
    }

    #[test]
    fn load_examples() {
        let t = load("punctured_torus");
        assert_eq!((t.genus, t.punctures, t.num_edges, t.num_triangles()), (1, 1, 3, 2));
        let s = load("four_punctured_sphere");
        assert_eq!((s.num_edges, s.num_triangles()), (6, 4));
        assert!(s.has_distinct_endpoints());
        assert!(load("three_punctured_sphere").has_distinct_endpoints());
        assert!(!t.has_distinct_endpoints());
        let folded = include_str!("../../../data/triangulations/self_folded.json");
        assert!(matches!(load_triangulation(folded), Err(SkeinError::SelfLoopEdge(_))));
    }

    #[test]
    fn rejects_bad_files() {
        let one = r#"{"genus":0,"punctures":3,"triangles":[[0,1,2]],"gluings":[]}"#;
        assert!(matches!(load_triangulation(one), Err(SkeinError::Schema(_))));
        let wrong_p = r#"{"genus":1,"punctures":2,"triangles":[[0,1,2],[0,1,2]],"gluings":[[0,0,1,0],[0,1,1,1],[0,2,1,2]]}"#;
        assert!(matches!(load_triangulation(wrong_p), Err(SkeinError::EulerMismatch(_))));
        let self_glued = r#"{"genus":0,"punctures":3,"triangles":[[0,0,1],[1,2,2]],"gluings":[[0,0,0,0]]}"#;
        assert!(load_triangulation(self_glued).is_err());
        assert!(matches!(load_triangulation("{}"), Err(SkeinError::Schema(_))));
    }

    #[test]
    fn track_sizes() {
        let tt = punctured_torus();
        assert_eq!((tt.num_branches(), tt.switches.len()), (6, 3));
        let s = build_train_track(&load("four_punctured_sphere"));
        assert_eq!((s.num_branches(), s.switches.len()), (12, 6));
        for sw in &s.switches {
            assert_eq!(sw.sides.len() * 2, 4);
        }
    }

    #[test]
    fn basis_ranks() {
        for (name, want) in [
            ("punctured_torus", 3),
            ("three_punctured_sphere", 3),
            ("four_punctured_sphere", 6),
            ("two_punctured_torus", 6),
        ] {
            let tt = build_train_track(&load(name));
            let b = tt.weight_basis().unwrap();
            assert_eq!(b.len(), want, "{name}");
            assert!(b.iter().all(|v| tt.satisfies_switch(v)));
        }
    }

    #[test]
    fn edge_vectors_pair_to_corner_counts() {
        let tt = punctured_torus();
        let sigma = tt.triangulation.corner_sigma();
        assert_eq!(sigma[0][1], 2);
        for e in 0..3 {
            for f in 0..3 {
                let w = tt.thurston_form(&tt.edge_vector(e), &tt.edge_vector(f)).unwrap();
                assert_eq!(w, -4 * sigma[e][f]);
            }
        }
    }

    #[test]
    fn puncture_vector_is_central() {
        let tt = punctured_torus();
        let p = tt.puncture_vector(0).unwrap();
        assert_eq!(p, vec![1; 6]);
        assert_eq!(tt.edge_coords(&p), vec![2, 2, 2]);
        for b in tt.weight_basis().unwrap() {
            assert_eq!(tt.thurston_form(&p, &b).unwrap(), 0);
        }
        assert!(matches!(tt.puncture_vector(1), Err(SkeinError::Index { .. })));
    }

    #[test]
    fn form_rejects_foreign_vectors() {
        let tt = punctured_torus();
        assert_eq!(tt.thurston_form(&[1, 0, 0, 0, 0, 0], &[0; 6]), Err(SkeinError::TrackMismatch));
        assert_eq!(tt.thurston_form(&[0; 12], &[0; 6]), Err(SkeinError::TrackMismatch));
    }

    #[test]
    fn quantum_torus_products() {
        let tt = punctured_torus();
        let a = QTorusElement::monomial(tt.edge_vector(0));
        let b = QTorusElement::monomial(tt.edge_vector(1));
        let one = QTorusElement::unit(6);
        assert_eq!(qt_multiply(&tt, &one, &a).unwrap(), a);
        let ab = qt_multiply(&tt, &a, &b).unwrap();
        let ba = qt_multiply(&tt, &b, &a).unwrap();
        let w = tt.thurston_form(&tt.edge_vector(0), &tt.edge_vector(1)).unwrap();
        assert_eq!(ab, ba.scale(&LaurentHalf::a_half_pow(2 * w)));
    }

    #[test]
    fn coordinates_in_basis() {
        let tt = punctured_torus();
        let basis = tt.weight_basis().unwrap();
        let p = tt.puncture_vector(0).unwrap();
        let c = tt.coordinates(&basis, &p).unwrap();
        let back: Vec<i64> = (0..6).map(|j| basis.iter().zip(&c).map(|(b, k)| b[j] * k).sum()).collect();
        assert_eq!(back, p);
    }
}
