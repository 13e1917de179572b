//! Framed link diagrams in PD form and the Kauffman bracket state sum.
//!
//! A crossing `[a, b, c, d]` lists its four arcs clockwise, starting from the
//! incoming under-strand. The ZERO smoothing (weight `A^-1`) joins `a`-`d` and
//! `b`-`c`; the INFINITY smoothing (weight `A`) joins `a`-`b` and `c`-`d`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkeinError};
use crate::exactalg::LaurentHalf;

pub const MAX_STATE_SUM_CROSSINGS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Smoothing {
    Zero,
    Infinity,
}

impl Smoothing {
    /// Index pairs joined by this smoothing.
    pub fn pairs(self) -> [(usize, usize); 2] {
        match self {
            Smoothing::Zero => [(0, 3), (1, 2)],
            Smoothing::Infinity => [(0, 1), (2, 3)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDiagram {
    pub crossings: Vec<[u64; 4]>,
    #[serde(default)]
    pub free_loops: usize,
}

pub fn parse_pd(text: &str) -> Result<LinkDiagram> {
    let d: LinkDiagram = serde_json::from_str(text).map_err(|e| SkeinError::Schema(e.to_string()))?;
    d.validate()?;
    Ok(d)
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

impl LinkDiagram {
    pub fn unknot() -> Self {
        Self { crossings: vec![], free_loops: 1 }
    }

    pub fn crossingless(loops: usize) -> Self {
        Self { crossings: vec![], free_loops: loops }
    }

    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }

    /// Arc labels in first-appearance order, with dense indices.
    fn arc_index(&self) -> (Vec<u64>, HashMap<u64, usize>) {
        let mut labels = Vec::new();
        let mut index = HashMap::new();
        for c in &self.crossings {
            for &a in c {
                index.entry(a).or_insert_with(|| {
                    labels.push(a);
                    labels.len() - 1
                });
            }
        }
        (labels, index)
    }

    pub fn validate(&self) -> Result<()> {
        let mut count: BTreeMap<u64, usize> = BTreeMap::new();
        for c in &self.crossings {
            for &a in c {
                if a == 0 {
                    return Err(SkeinError::Schema("arc labels must be positive".into()));
                }
                *count.entry(a).or_default() += 1;
            }
        }
        if let Some((a, n)) = count.iter().find(|(_, n)| **n != 2) {
            return Err(SkeinError::MalformedPd(format!("arc {a} appears {n} times")));
        }
        self.check_strands_close()?;
        Ok(())
    }

    /// Walks every strand through its crossings. Along one component the under
    /// passages must all be entered at position 0 and left at position 2, so
    /// that the first slot really is the incoming under-strand.
    fn check_strands_close(&self) -> Result<()> {
        let slots = self.slot_pairing();
        let n = self.crossings.len();
        let mut seen = vec![false; 4 * n];
        for start in 0..4 * n {
            if seen[start] {
                continue;
            }
            let (mut forward, mut backward) = (false, false);
            let mut h = start;
            while !seen[h] {
                let out = 4 * (h / 4) + (h % 4 + 2) % 4;
                seen[h] = true;
                seen[out] = true;
                match h % 4 {
                    0 => forward = true,
                    2 => backward = true,
                    _ => {}
                }
                h = slots[out];
            }
            if forward && backward {
                return Err(SkeinError::MalformedPd(format!(
                    "under-strands through crossing {} run against the tuple order",
                    start / 4
                )));
            }
        }
        Ok(())
    }

    /// For each slot `4*crossing + position`, the slot at the other end of its arc.
    fn slot_pairing(&self) -> Vec<usize> {
        let mut first: HashMap<u64, usize> = HashMap::new();
        let mut pair = vec![usize::MAX; 4 * self.crossings.len()];
        for (ci, c) in self.crossings.iter().enumerate() {
            for (p, &a) in c.iter().enumerate() {
                let s = 4 * ci + p;
                if let Some(o) = first.remove(&a) {
                    pair[s] = o;
                    pair[o] = s;
                } else {
                    first.insert(a, s);
                }
            }
        }
        pair
    }

    /// Sum of the genera of the connected pieces of the diagram graph, from the
    /// face count of the rotation system. Zero exactly when the diagram is planar.
    pub fn genus(&self) -> usize {
        let n = self.crossings.len();
        if n == 0 {
            return 0;
        }
        let pair = self.slot_pairing();
        let mut dsu = Dsu::new(n);
        for (s, &o) in pair.iter().enumerate() {
            dsu.union(s / 4, o / 4);
        }
        let mut faces: HashMap<usize, usize> = HashMap::new();
        let mut seen = vec![false; 4 * n];
        for s in 0..4 * n {
            if seen[s] {
                continue;
            }
            let root = dsu.find(s / 4);
            *faces.entry(root).or_default() += 1;
            let mut h = s;
            while !seen[h] {
                seen[h] = true;
                let o = pair[h];
                h = 4 * (o / 4) + (o % 4 + 1) % 4;
            }
        }
        let mut verts: HashMap<usize, usize> = HashMap::new();
        for c in 0..n {
            *verts.entry(dsu.find(c)).or_default() += 1;
        }
        verts
            .iter()
            .map(|(r, v)| {
                // V - E + F = 2 - 2g with E = 2V
                let f = faces[r] as i64;
                ((2 + *v as i64 - f) / 2) as usize
            })
            .sum()
    }

    pub fn is_planar(&self) -> bool {
        self.genus() == 0
    }

    /// Number of link components, free loops included.
    pub fn components(&self) -> usize {
        let (labels, index) = self.arc_index();
        let mut dsu = Dsu::new(labels.len());
        let mut classes = labels.len();
        for c in &self.crossings {
            for (i, j) in [(0, 2), (1, 3)] {
                if dsu.union(index[&c[i]], index[&c[j]]) {
                    classes -= 1;
                }
            }
        }
        classes + self.free_loops
    }

    pub fn resolve_crossing(&self, c: usize, mode: Smoothing) -> Result<LinkDiagram> {
        if c >= self.crossings.len() {
            return Err(SkeinError::Index { index: c, len: self.crossings.len() });
        }
        let removed = self.crossings[c];
        let mut rest: Vec<[u64; 4]> = self
            .crossings
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != c)
            .map(|(_, x)| *x)
            .collect();
        let mut free_loops = self.free_loops;
        let mut pending: Vec<(u64, u64)> =
            mode.pairs().iter().map(|&(i, j)| (removed[i], removed[j])).collect();
        while let Some((x, y)) = pending.pop() {
            if x == y {
                free_loops += 1;
                continue;
            }
            let relabel = |v: &mut u64| {
                if *v == y {
                    *v = x;
                }
            };
            rest.iter_mut().for_each(|t| t.iter_mut().for_each(relabel));
            pending.iter_mut().for_each(|(a, b)| {
                relabel(a);
                relabel(b);
            });
        }
        Ok(LinkDiagram { crossings: rest, free_loops })
    }

    /// Disjoint union, with the second diagram's arcs relabeled.
    pub fn disjoint_union(&self, other: &LinkDiagram) -> LinkDiagram {
        let offset = self.crossings.iter().flatten().copied().max().unwrap_or(0);
        let mut crossings = self.crossings.clone();
        crossings.extend(other.crossings.iter().map(|c| c.map(|a| a + offset)));
        LinkDiagram { crossings, free_loops: self.free_loops + other.free_loops }
    }

    /// Rewrites every crossing with its tuple rotated by two positions, which
    /// swaps the roles of the two strands without changing the smoothings.
    pub fn rotate_tuples(&self) -> LinkDiagram {
        LinkDiagram {
            crossings: self.crossings.iter().map(|c| [c[2], c[3], c[0], c[1]]).collect(),
            free_loops: self.free_loops,
        }
    }
}

/// Histogram of states keyed by (number of INFINITY smoothings, loop count).
fn state_histogram(d: &LinkDiagram) -> BTreeMap<(usize, usize), u64> {
    let n = d.crossings.len();
    let (labels, index) = d.arc_index();
    let dense: Vec<[usize; 4]> = d.crossings.iter().map(|c| c.map(|a| index[&a])).collect();
    let arcs = labels.len();
    let total: u64 = 1 << n;
    let chunk = 1u64 << n.saturating_sub(8).min(12);
    let chunks: Vec<u64> = (0..total.div_ceil(chunk)).collect();
    chunks
        .par_iter()
        .map(|&ci| {
            let mut hist: BTreeMap<(usize, usize), u64> = BTreeMap::new();
            let mut dsu = Dsu::new(arcs);
            let lo = ci * chunk;
            let hi = (lo + chunk).min(total);
            for state in lo..hi {
                dsu.parent.iter_mut().enumerate().for_each(|(i, p)| *p = i);
                let mut loops = arcs;
                for (k, c) in dense.iter().enumerate() {
                    let mode = if state >> k & 1 == 1 { Smoothing::Infinity } else { Smoothing::Zero };
                    for (i, j) in mode.pairs() {
                        if dsu.union(c[i], c[j]) {
                            loops -= 1;
                        }
                    }
                }
                *hist.entry((state.count_ones() as usize, loops)).or_default() += 1;
            }
            hist
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

/// Kauffman bracket by full state sum. The empty diagram has bracket 1.
pub fn kauffman_bracket(d: &LinkDiagram) -> Result<LaurentHalf> {
    let n = d.crossings.len();
    if n > MAX_STATE_SUM_CROSSINGS {
        return Err(SkeinError::Capacity(n));
    }
    let delta = LaurentHalf::delta();
    let mut delta_pows = vec![LaurentHalf::one()];
    let mut out = LaurentHalf::zero();
    for ((inf, loops), count) in state_histogram(d) {
        let m = loops + d.free_loops;
        while delta_pows.len() <= m {
            let next = delta_pows.last().unwrap() * &delta;
            delta_pows.push(next);
        }
        let weight = LaurentHalf::monomial(BigInt::from(count), 2 * (2 * inf as i64 - n as i64));
        out += &(&weight * &delta_pows[m]);
    }
    if n == 0 {
        return Ok(delta.pow(d.free_loops as u32));
    }
    Ok(out)
}

/// Braid word letters: `+i` is `σ_i`, `-i` is `σ_i^{-1}`, with `1 <= i < strands`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Braid {
    pub strands: usize,
    pub word: Vec<i32>,
}

impl Braid {
    pub fn new(strands: usize, word: Vec<i32>) -> Result<Self> {
        for &g in &word {
            let i = g.unsigned_abs() as usize;
            if g == 0 || i >= strands {
                return Err(SkeinError::Validation(format!("braid letter {g} out of range")));
            }
        }
        Ok(Self { strands, word })
    }

    /// PD code of the braid closure. Strands run upward; the four slots of a
    /// crossing are SW, NW, NE, SE (clockwise).
    pub fn closure(&self) -> LinkDiagram {
        let n = self.strands;
        let bottom: Vec<u64> = (1..=n as u64).collect();
        let mut pos = bottom.clone();
        let mut next = n as u64 + 1;
        let mut crossings = Vec::with_capacity(self.word.len());
        for &g in &self.word {
            let i = g.unsigned_abs() as usize - 1;
            let (sw, se) = (pos[i], pos[i + 1]);
            let (nw, ne) = (next, next + 1);
            next += 2;
            crossings.push(if g > 0 { [sw, nw, ne, se] } else { [se, sw, nw, ne] });
            pos[i] = nw;
            pos[i + 1] = ne;
        }
        let mut free_loops = 0;
        let mut alias: HashMap<u64, u64> = HashMap::new();
        for j in 0..n {
            if pos[j] == bottom[j] {
                free_loops += 1;
            } else {
                alias.insert(pos[j], bottom[j]);
            }
        }
        for c in crossings.iter_mut() {
            for a in c.iter_mut() {
                if let Some(b) = alias.get(a) {
                    *a = *b;
                }
            }
        }
        LinkDiagram { crossings, free_loops }
    }

    pub fn insert_r2(&self, at: usize, i: i32) -> Braid {
        let mut word = self.word.clone();
        word.splice(at..at, [i, -i]);
        Braid { strands: self.strands, word }
    }

    /// Position of the first same-sign triple `σ_i σ_{i±1} σ_i`.
    pub fn find_r3(&self) -> Option<usize> {
        self.word.windows(3).position(|w| {
            w[0] == w[2] && (w[0].signum() == w[1].signum()) && (w[0].abs() - w[1].abs()).abs() == 1
        })
    }

    pub fn apply_r3(&self, at: usize) -> Option<Braid> {
        let w = self.word.get(at..at + 3)?;
        if !(w[0] == w[2] && w[0].signum() == w[1].signum() && (w[0].abs() - w[1].abs()).abs() == 1) {
            return None;
        }
        let mut word = self.word.clone();
        word[at] = w[1];
        word[at + 1] = w[0];
        word[at + 2] = w[1];
        Some(Braid { strands: self.strands, word })
    }
}
