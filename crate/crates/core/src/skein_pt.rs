//! The skein algebra of the once-punctured torus, presented by three
//! generators with ordered monomials `X1^a X2^b X3^c` as a normal-form basis.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkeinError};
use crate::exactalg::{chebyshev, Algebra, LaurentHalf, RootOfUnity};

pub type Mono = (u32, u32, u32);

#[derive(Clone, PartialEq, Eq, Default)]
pub struct SkeinPTElement {
    terms: BTreeMap<Mono, LaurentHalf>,
}

fn a(k: i64) -> LaurentHalf {
    LaurentHalf::a_pow(k)
}

// X2 X1 -> A^2 X1 X2 - A(A^2 - A^-2) X3, and cyclically; X3 X1 has the A^-1 form.
thread_local! {
    static SWAP_21: (LaurentHalf, LaurentHalf) = (a(2), a(1) * (a(2) - a(-2)));
    static SWAP_31: (LaurentHalf, LaurentHalf) = (a(-2), a(-1) * (a(2) - a(-2)));
    static GEN_CACHE: RefCell<HashMap<(Mono, u8), SkeinPTElement>> = RefCell::new(HashMap::new());
}

fn swap21() -> (LaurentHalf, LaurentHalf) {
    SWAP_21.with(|s| s.clone())
}

fn swap31() -> (LaurentHalf, LaurentHalf) {
    SWAP_31.with(|s| s.clone())
}

impl SkeinPTElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(LaurentHalf::one())
    }

    pub fn scalar(c: LaurentHalf) -> Self {
        Self::term((0, 0, 0), c)
    }

    pub fn term(m: Mono, c: LaurentHalf) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn monomial(m: Mono) -> Self {
        Self::term(m, LaurentHalf::one())
    }

    /// Generator `X_i`, `i` in 1..=3.
    pub fn generator(i: u8) -> Self {
        match i {
            1 => Self::monomial((1, 0, 0)),
            2 => Self::monomial((0, 1, 0)),
            3 => Self::monomial((0, 0, 1)),
            _ => panic!("generator index {i} out of range"),
        }
    }

    pub fn x1() -> Self {
        Self::generator(1)
    }
    pub fn x2() -> Self {
        Self::generator(2)
    }
    pub fn x3() -> Self {
        Self::generator(3)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &LaurentHalf)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: Mono) -> LaurentHalf {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(a, b, c)| a + b + c).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Mono, c: &LaurentHalf) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&LaurentHalf::constant(-1)))
    }

    pub fn scale(&self, c: &LaurentHalf) -> Self {
        let mut out = Self::zero();
        for (m, x) in &self.terms {
            out.add_term(*m, &(x * c));
        }
        out
    }

    fn shift_x3(&self) -> Self {
        Self { terms: self.terms.iter().map(|((a, b, c), x)| ((*a, *b, c + 1), x.clone())).collect() }
    }

    fn times_gen(&self, g: u8) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (m2, c2) in &mono_times_gen(*m, g).terms {
                out.add_term(*m2, &(c * c2));
            }
        }
        out
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m2, c2) in &other.terms {
            let mut acc = self.clone();
            for _ in 0..m2.0 {
                acc = acc.times_gen(1);
            }
            for _ in 0..m2.1 {
                acc = acc.times_gen(2);
            }
            for _ in 0..m2.2 {
                acc = acc.times_gen(3);
            }
            out = out.add(&acc.scale(c2));
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.multiply(other).sub(&other.multiply(self))
    }

    pub fn map_coeffs(&self, f: impl Fn(&LaurentHalf) -> LaurentHalf) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, &f(c));
        }
        out
    }

    /// Coefficients specialized at `A = 1`, or `A = -1` when `minus` is set.
    pub fn eval_at_sign(&self, minus: bool) -> BTreeMap<Mono, BigInt> {
        self.terms
            .iter()
            .map(|(m, c)| {
                let v = if minus {
                    c.eval_at_minus_one().expect("integer exponents")
                } else {
                    c.eval_at_one()
                };
                (*m, v)
            })
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    pub fn eval_at_root(&self, root: &RootOfUnity) -> BTreeMap<Mono, Complex64> {
        self.terms.iter().map(|(m, c)| (*m, c.eval_at_root(root))).collect()
    }
}

/// Normal form of `X1^a X2^b X3^c · X_g`.
fn mono_times_gen(m: Mono, g: u8) -> SkeinPTElement {
    if let Some(hit) = GEN_CACHE.with(|c| c.borrow().get(&(m, g)).cloned()) {
        return hit;
    }
    let (x, y, z) = m;
    let out = match g {
        3 => SkeinPTElement::monomial((x, y, z + 1)),
        2 if z == 0 => SkeinPTElement::monomial((x, y + 1, 0)),
        2 => {
            // X3 X2 -> A^2 X2 X3 - A(A^2 - A^-2) X1
            let (s, t) = swap21();
            let head = (x, y, z - 1);
            mono_times_gen(head, 2).shift_x3().scale(&s).sub(&mono_times_gen(head, 1).scale(&t))
        }
        1 if z > 0 => {
            // X3 X1 -> A^-2 X1 X3 + A^-1(A^2 - A^-2) X2
            let (s, t) = swap31();
            let head = (x, y, z - 1);
            mono_times_gen(head, 1).shift_x3().scale(&s).add(&mono_times_gen(head, 2).scale(&t))
        }
        1 if y > 0 => {
            // X2 X1 -> A^2 X1 X2 - A(A^2 - A^-2) X3
            let (s, t) = swap21();
            let head = (x, y - 1, 0);
            mono_times_gen(head, 1).times_gen(2).scale(&s).sub(&mono_times_gen(head, 3).scale(&t))
        }
        1 => SkeinPTElement::monomial((x + 1, 0, 0)),
        _ => panic!("generator index {g} out of range"),
    };
    GEN_CACHE.with(|c| c.borrow_mut().insert((m, g), out.clone()));
    out
}

pub fn multiply(u: &SkeinPTElement, v: &SkeinPTElement) -> SkeinPTElement {
    u.multiply(v)
}

impl Algebra for SkeinPTElement {
    fn one_like(&self) -> Self {
        Self::one()
    }
    fn scale_int(&self, c: &BigInt) -> Self {
        self.scale(&LaurentHalf::constant(c.clone()))
    }
    fn add(&self, other: &Self) -> Self {
        SkeinPTElement::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.multiply(other)
    }
}

/// `T_n(X_j)` in normal form.
pub fn chebyshev_of_generator(n: usize, j: u8) -> SkeinPTElement {
    chebyshev(n).evaluate(&SkeinPTElement::generator(j))
}

/// Largest absolute integer coefficient among the cyclotomic residues of the
/// commutator `uv - vu`. Zero certifies commutation at every primitive `N`-th root.
pub fn commutator_at_root(u: &SkeinPTElement, v: &SkeinPTElement, root: &RootOfUnity) -> f64 {
    u.commutator(v)
        .terms
        .values()
        .flat_map(|c| c.cyclotomic_residue(root).coeffs().to_vec())
        .map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// `A X1X2X3 - A^2 X1^2 - A^-2 X2^2 - A^2 X3^2 + A^2 + A^-2`, the loop around the puncture.
pub fn puncture_element() -> SkeinPTElement {
    closed_torus_candidate((a(2), a(-2), a(2)))
        .scale(&LaurentHalf::constant(-1))
        .sub(&SkeinPTElement::scalar(a(2) + a(-2)))
}

/// `q1 X1^2 + q2 X2^2 + q3 X3^2 - A X1X2X3 - 2A^2 - 2A^-2`.
pub fn closed_torus_candidate(q: (LaurentHalf, LaurentHalf, LaurentHalf)) -> SkeinPTElement {
    let mut e = SkeinPTElement::zero();
    e.add_term((2, 0, 0), &q.0);
    e.add_term((0, 2, 0), &q.1);
    e.add_term((0, 0, 2), &q.2);
    e.add_term((1, 1, 1), &-a(1));
    e.add_term((0, 0, 0), &(a(2).scale(&BigInt::from(-2)) + a(-2).scale(&BigInt::from(-2))));
    e
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CandidateVerdict {
    pub name: String,
    pub element: String,
    /// Normal forms of `[E, X1]`, `[E, X2]`, `[E, X3]`.
    pub commutators: [String; 3],
    pub central: bool,
    /// Per root order: largest cyclotomic residue of the three commutators.
    pub residues_at_roots: BTreeMap<u64, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CentralReport {
    pub candidates: Vec<CandidateVerdict>,
    pub central_candidates: Vec<String>,
    pub verbatim_central: bool,
}

pub fn closed_torus_central_check(orders: &[u64]) -> Result<CentralReport> {
    let named = [
        ("verbatim", (a(2), a(-2), a(2))),
        ("symmetric_A2", (a(2), a(2), a(2))),
        ("symmetric_A-2", (a(-2), a(-2), a(-2))),
    ];
    let gens = [SkeinPTElement::x1(), SkeinPTElement::x2(), SkeinPTElement::x3()];
    let mut candidates = Vec::new();
    for (name, q) in named {
        let e = closed_torus_candidate(q);
        let comms: Vec<SkeinPTElement> = gens.iter().map(|g| e.commutator(g)).collect();
        let mut residues = BTreeMap::new();
        for &n in orders {
            let root = RootOfUnity::new(n, 1)?;
            let r = gens.iter().map(|g| commutator_at_root(&e, g, &root)).fold(0.0, f64::max);
            residues.insert(n, r);
        }
        candidates.push(CandidateVerdict {
            name: name.to_string(),
            element: e.to_string(),
            commutators: [comms[0].to_string(), comms[1].to_string(), comms[2].to_string()],
            central: comms.iter().all(SkeinPTElement::is_zero),
            residues_at_roots: residues,
        });
    }
    Ok(CentralReport {
        central_candidates: candidates.iter().filter(|c| c.central).map(|c| c.name.clone()).collect(),
        verbatim_central: candidates[0].central,
        candidates,
    })
}

fn fmt_mono(f: &mut fmt::Formatter<'_>, m: &Mono) -> fmt::Result {
    let mut parts = Vec::new();
    for (i, e) in [m.0, m.1, m.2].iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("X{}", i + 1)),
            _ => parts.push(format!("X{}^{}", i + 1, e)),
        }
    }
    write!(f, "{}", parts.join("*"))
}

impl fmt::Display for SkeinPTElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let constant = *m == (0, 0, 0);
            if constant {
                write!(f, "({c})")?;
            } else if c.is_one() {
                fmt_mono(f, m)?;
            } else {
                write!(f, "({c})*")?;
                fmt_mono(f, m)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SkeinPTElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    mono: [u32; 3],
    coeff: LaurentHalf,
}

impl Serialize for SkeinPTElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(m, c)| TermRepr { mono: [m.0, m.1, m.2], coeff: c.clone() })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SkeinPTElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<TermRepr>::deserialize(d)?;
        let mut e = SkeinPTElement::zero();
        for t in v {
            e.add_term((t.mono[0], t.mono[1], t.mono[2]), &t.coeff);
        }
        Ok(e)
    }
}

/// Parses expressions such as `A^{1/2}*X2*X1 - (A^2 - 3)*X3^2`.
///
/// Products are normal-formed in the order written.
pub fn parse_expr(text: &str) -> Result<SkeinPTElement> {
    let mut p = ExprParser { s: text.as_bytes(), i: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct ExprParser<'a> {
    s: &'a [u8],
    i: usize,
}

impl ExprParser<'_> {
    fn err(&self, msg: &str) -> SkeinError {
        SkeinError::Parse(format!("{msg} at offset {}", self.i))
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<SkeinPTElement> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SkeinPTElement> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.multiply(&self.factor()?);
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let neg = self.eat(b'-');
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        let v: i64 = std::str::from_utf8(&self.s[start..self.i])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("expected integer"))?;
        Ok(if neg { -v } else { v })
    }

    /// Exponent of `A`, returned doubled: `k`, `{k}`, `{p/2}` or `(p/2)`.
    fn a_exponent(&mut self) -> Result<i64> {
        let close = if self.eat(b'{') {
            Some(b'}')
        } else if self.eat(b'(') {
            Some(b')')
        } else {
            None
        };
        let num = self.integer()?;
        let doubled = if close.is_some() && self.eat(b'/') {
            if self.integer()? != 2 {
                return Err(self.err("only halves are allowed as fractional exponents"));
            }
            num
        } else {
            2 * num
        };
        if let Some(c) = close {
            if !self.eat(c) {
                return Err(self.err("unclosed exponent"));
            }
        }
        Ok(doubled)
    }

    fn power(&mut self, base: SkeinPTElement) -> Result<SkeinPTElement> {
        if !self.eat(b'^') {
            return Ok(base);
        }
        let n = self.integer()?;
        if n < 0 {
            return Err(self.err("negative power"));
        }
        let mut acc = SkeinPTElement::one();
        for _ in 0..n {
            acc = acc.multiply(&base);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<SkeinPTElement> {
        match self.peek() {
            Some(b'-') => {
                self.i += 1;
                Ok(self.factor()?.scale(&LaurentHalf::constant(-1)))
            }
            Some(b'(') => {
                self.i += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.power(e)
            }
            Some(b'A') => {
                self.i += 1;
                let e = if self.eat(b'^') { self.a_exponent()? } else { 2 };
                Ok(SkeinPTElement::scalar(LaurentHalf::a_half_pow(e)))
            }
            Some(b'X') => {
                self.i += 1;
                let g = match self.s.get(self.i) {
                    Some(b'1') => 1,
                    Some(b'2') => 2,
                    Some(b'3') => 3,
                    _ => return Err(self.err("expected X1, X2 or X3")),
                };
                self.i += 1;
                self.power(SkeinPTElement::generator(g))
            }
            Some(ch) if ch.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(SkeinPTElement::scalar(LaurentHalf::constant(n)))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Sphere,
    Disk,
    Annulus,
    ThreePuncturedSphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallSurfaceAlgebra {
    pub kind: SurfaceKind,
}

impl SmallSurfaceAlgebra {
    pub fn new(kind: SurfaceKind) -> Self {
        Self { kind }
    }

    pub fn generator_count(&self) -> usize {
        match self.kind {
            SurfaceKind::Sphere | SurfaceKind::Disk => 0,
            SurfaceKind::Annulus => 1,
            SurfaceKind::ThreePuncturedSphere => 3,
        }
    }
}

/// One-dimensional representation of a commutative small-surface algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallIrrep {
    pub algebra: SmallSurfaceAlgebra,
    pub values: Vec<Complex64>,
}

impl SmallIrrep {
    /// Two such representations are isomorphic exactly when their values agree.
    pub fn isomorphic(&self, other: &SmallIrrep) -> bool {
        self.algebra == other.algebra && self.values == other.values
    }
}

pub fn small_irrep(alg: SmallSurfaceAlgebra, values: &[Complex64]) -> Result<SmallIrrep> {
    if values.len() != alg.generator_count() {
        return Err(SkeinError::ArityMismatch(format!(
            "{:?} has {} generators, got {} values",
            alg.kind,
            alg.generator_count(),
            values.len()
        )));
    }
    Ok(SmallIrrep { algebra: alg, values: values.to_vec() })
}
