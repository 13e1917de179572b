use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use super::poly::{cyclotomic, IntPoly};
use super::root::RootOfUnity;
use super::Algebra;

/// Laurent polynomial in a formal square root of the quantum parameter `A`.
///
/// Exponents are stored doubled: the key `e` stands for `A^{e/2}`. Zero
/// coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentHalf {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentHalf {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant<C: Into<BigInt>>(c: C) -> Self {
        Self::monomial(c, 0)
    }

    /// `c · A^{doubled_exp/2}`.
    pub fn monomial<C: Into<BigInt>>(c: C, doubled_exp: i64) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(doubled_exp, c);
        }
        Self { terms }
    }

    /// `A^k` for an integer `k`.
    pub fn a_pow(k: i64) -> Self {
        Self::monomial(1, 2 * k)
    }

    /// `A^{k/2}`.
    pub fn a_half_pow(k: i64) -> Self {
        Self::monomial(1, k)
    }

    /// The loop value `-A^2 - A^{-2}`.
    pub fn delta() -> Self {
        Self::monomial(-1, 4) + Self::monomial(-1, -4)
    }

    pub fn from_pairs<I, C>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut out = Self::zero();
        for (e, c) in pairs {
            out.add_term(e, c.into());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Iterates `(doubled_exponent, coefficient)` in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, doubled_exp: i64) -> BigInt {
        self.terms.get(&doubled_exp).cloned().unwrap_or_default()
    }

    pub fn has_integer_exponents(&self) -> bool {
        self.terms.keys().all(|e| e % 2 == 0)
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    fn add_term(&mut self, e: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    /// Multiplies by `A^{doubled_shift/2}`.
    pub fn shift(&self, doubled_shift: i64) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (e + doubled_shift, c.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes `A -> A^{-1}`.
    pub fn bar(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    /// Value at `A = 1` (every half power taken as 1).
    pub fn eval_at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Value at `A = -1`. Only defined when all exponents are integers.
    pub fn eval_at_minus_one(&self) -> Option<BigInt> {
        if !self.has_integer_exponents() {
            return None;
        }
        Some(
            self.terms
                .iter()
                .map(|(e, c)| if (e / 2) % 2 == 0 { c.clone() } else { -c })
                .sum(),
        )
    }

    /// Complex value at `A = exp(2πik/N)` with `A^{1/2} := A^{(N+1)/2}`.
    pub fn eval_at_root(&self, root: &RootOfUnity) -> Complex64 {
        let n = root.order() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let k = root.reduce_half_exponent(*e);
            let c = c.to_f64().unwrap_or(f64::NAN);
            acc += root.power(k) * c;
        }
        debug_assert!(n >= 3);
        acc
    }

    /// Complex value at an arbitrary nonzero `A` with a caller-supplied square root.
    pub fn eval_with_sqrt(&self, sqrt_a: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| sqrt_a.powi(*e as i32) * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    /// Residue in `Z[A]/(Φ_N(A))` after `A^{1/2} := A^{(N+1)/2}`.
    ///
    /// Returned as coefficients of `1, A, ..., A^{φ(N)-1}`. The residue is zero
    /// exactly when the polynomial vanishes at every primitive `N`-th root.
    pub fn cyclotomic_residue(&self, root: &RootOfUnity) -> IntPoly {
        let n = root.order() as usize;
        let mut folded = vec![BigInt::zero(); n];
        for (e, c) in &self.terms {
            let k = root.reduce_half_exponent(*e) as usize;
            folded[k] += c;
        }
        IntPoly::from_coeffs(folded).rem_monic(&cyclotomic(n as u64))
    }

    pub fn vanishes_at_root(&self, root: &RootOfUnity) -> bool {
        self.cyclotomic_residue(root).is_zero()
    }

    /// Exact division; `None` if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut quot = Self::zero();
        let (dlead_e, dlead_c) = divisor.terms.iter().next_back().map(|(e, c)| (*e, c.clone()))?;
        let qmin = self.min_exponent().unwrap_or(0) - divisor.min_exponent()?;
        while let Some((re, rc)) = rem.terms.iter().next_back().map(|(e, c)| (*e, c.clone())) {
            let (q, r) = rc.div_rem(&dlead_c);
            if !r.is_zero() {
                return None;
            }
            let shift = re - dlead_e;
            if shift < qmin {
                return None;
            }
            let step = Self::monomial(q, shift);
            rem = &rem - &(&step * divisor);
            quot = &quot + &step;
        }
        Some(quot)
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_default()
    }
}

impl fmt::Debug for LaurentHalf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, e: i64) -> fmt::Result {
    if e % 2 == 0 {
        match e / 2 {
            1 => write!(f, "A"),
            k => write!(f, "A^{k}"),
        }
    } else {
        write!(f, "A^({e}/2)")
    }
}

impl fmt::Display for LaurentHalf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if *e == 0 {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                write_power(f, *e)?;
            }
        }
        Ok(())
    }
}

impl Add<&LaurentHalf> for &LaurentHalf {
    type Output = LaurentHalf;
    fn add(self, rhs: &LaurentHalf) -> LaurentHalf {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LaurentHalf {
    type Output = LaurentHalf;
    fn add(mut self, rhs: LaurentHalf) -> LaurentHalf {
        self += &rhs;
        self
    }
}

impl AddAssign<&LaurentHalf> for LaurentHalf {
    fn add_assign(&mut self, rhs: &LaurentHalf) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl SubAssign<&LaurentHalf> for LaurentHalf {
    fn sub_assign(&mut self, rhs: &LaurentHalf) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, -c);
        }
    }
}

impl Sub<&LaurentHalf> for &LaurentHalf {
    type Output = LaurentHalf;
    fn sub(self, rhs: &LaurentHalf) -> LaurentHalf {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for LaurentHalf {
    type Output = LaurentHalf;
    fn sub(mut self, rhs: LaurentHalf) -> LaurentHalf {
        self -= &rhs;
        self
    }
}

impl Neg for &LaurentHalf {
    type Output = LaurentHalf;
    fn neg(self) -> LaurentHalf {
        LaurentHalf {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Neg for LaurentHalf {
    type Output = LaurentHalf;
    fn neg(self) -> LaurentHalf {
        -&self
    }
}

impl Mul<&LaurentHalf> for &LaurentHalf {
    type Output = LaurentHalf;
    fn mul(self, rhs: &LaurentHalf) -> LaurentHalf {
        let mut out = LaurentHalf::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Mul for LaurentHalf {
    type Output = LaurentHalf;
    fn mul(self, rhs: LaurentHalf) -> LaurentHalf {
        &self * &rhs
    }
}

impl Algebra for LaurentHalf {
    fn one_like(&self) -> Self {
        Self::one()
    }
    fn scale_int(&self, c: &BigInt) -> Self {
        self.scale(c)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

// JSON form: array of [doubled_exponent, coefficient] pairs sorted by exponent.
// Coefficients that do not fit in i64 are written as decimal strings.
impl Serialize for LaurentHalf {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.terms.len()))?;
        for (e, c) in &self.terms {
            match c.to_i64() {
                Some(v) => seq.serialize_element(&(e, v))?,
                None => seq.serialize_element(&(e, c.to_string()))?,
            }
        }
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoeffRepr {
    Int(i64),
    Text(String),
}

impl<'de> Deserialize<'de> for LaurentHalf {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairsVisitor;
        impl<'de> Visitor<'de> for PairsVisitor {
            type Value = LaurentHalf;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "an array of [doubled_exponent, coefficient] pairs")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<LaurentHalf, A::Error> {
                let mut out = LaurentHalf::zero();
                let mut last: Option<i64> = None;
                while let Some((e, c)) = seq.next_element::<(i64, CoeffRepr)>()? {
                    if last.is_some_and(|l| l >= e) {
                        return Err(de::Error::custom("exponents must be strictly increasing"));
                    }
                    last = Some(e);
                    let c = match c {
                        CoeffRepr::Int(v) => BigInt::from(v),
                        CoeffRepr::Text(s) => s.parse().map_err(de::Error::custom)?,
                    };
                    if c.is_zero() {
                        return Err(de::Error::custom("zero coefficients are not stored"));
                    }
                    out.add_term(e, c);
                }
                Ok(out)
            }
        }
        deserializer.deserialize_seq(PairsVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(k: i64) -> LaurentHalf {
        LaurentHalf::a_pow(k)
    }

    #[test]
    fn half_powers_square_to_a() {
        let h = LaurentHalf::a_half_pow(1);
        assert_eq!(&h * &h, a(1));
    }

    #[test]
    fn unit_and_difference_of_squares() {
        let p = &a(1) + &a(-1);
        assert_eq!(&p * &LaurentHalf::one(), p);
        let m = &a(1) - &a(-1);
        assert_eq!(&m * &p, &a(2) - &a(-2));
    }

    #[test]
    fn no_zero_coefficients_survive() {
        let p = &a(3) - &a(3);
        assert!(p.is_zero());
        assert_eq!(p.len(), 0);
    }

    #[test]
    fn display() {
        assert_eq!(LaurentHalf::delta().to_string(), "-A^-2 - A^2");
        assert_eq!(LaurentHalf::one().to_string(), "1");
        assert_eq!(LaurentHalf::monomial(3, 1).to_string(), "3*A^(1/2)");
    }

    #[test]
    fn json_pairs_sorted() {
        let p = LaurentHalf::from_pairs([(4, -1), (-4, -1), (1, 7)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[-4,-1],[1,7],[4,-1]]");
        let back: LaurentHalf = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<LaurentHalf>("[[2,1],[0,1]]").is_err());
    }

    #[test]
    fn exact_division() {
        let d = &a(2) - &a(-2);
        let q = &(&a(3) + &LaurentHalf::constant(5)) * &d;
        assert_eq!(q.div_exact(&d), Some(&a(3) + &LaurentHalf::constant(5)));
        assert_eq!(a(1).div_exact(&d), None);
    }

    #[test]
    fn evaluations_at_signs() {
        assert_eq!(LaurentHalf::delta().eval_at_one(), BigInt::from(-2));
        assert_eq!(LaurentHalf::delta().eval_at_minus_one(), Some(BigInt::from(-2)));
        assert_eq!(a(1).eval_at_minus_one(), Some(BigInt::from(-1)));
        assert_eq!(LaurentHalf::a_half_pow(1).eval_at_minus_one(), None);
    }
}
