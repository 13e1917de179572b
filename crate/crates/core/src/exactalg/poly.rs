use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::Algebra;

/// Univariate integer polynomial, coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_coeffs<C: Into<BigInt>>(coeffs: impl IntoIterator<Item = C>) -> Self {
        let mut p = Self {
            coeffs: coeffs.into_iter().map(Into::into).collect(),
        };
        p.trim();
        p
    }

    pub fn x() -> Self {
        Self::from_coeffs([0, 1])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) + other.coeff(i)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) - other.coeff(i)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    /// Remainder modulo a monic polynomial.
    pub fn rem_monic(&self, m: &Self) -> Self {
        let dm = m.degree().expect("modulus must be nonzero");
        assert!(m.coeffs[dm].is_one(), "modulus must be monic");
        let mut r = self.coeffs.clone();
        while r.len() > dm {
            let top = r.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let shift = r.len() - dm;
            for (i, c) in m.coeffs[..dm].iter().enumerate() {
                r[shift + i] -= &top * c;
            }
        }
        Self::from_coeffs(r)
    }

    /// Exact quotient by a monic divisor; `None` if there is a remainder.
    pub fn div_monic(&self, m: &Self) -> Option<Self> {
        let dm = m.degree()?;
        if !m.coeffs[dm].is_one() {
            return None;
        }
        let Some(ds) = self.degree() else {
            return Some(Self::zero());
        };
        if ds < dm {
            return None;
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); ds - dm + 1];
        for k in (0..=ds - dm).rev() {
            let top = r[k + dm].clone();
            q[k] = top.clone();
            for (i, c) in m.coeffs.iter().enumerate() {
                r[k + i] -= &top * c;
            }
        }
        r.iter().all(Zero::is_zero).then(|| Self::from_coeffs(q))
    }

    /// Horner evaluation in any unital algebra over the integers.
    pub fn evaluate<T: Algebra>(&self, x: &T) -> T {
        let one = x.one_like();
        let mut acc = one.scale_int(&BigInt::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&one.scale_int(c));
        }
        acc
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (deg, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let abs = c.abs();
            match (first, c.is_negative()) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            match deg {
                0 => write!(f, "{abs}")?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{abs}*")?;
                    }
                    if deg == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{deg}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Normalized first-kind Chebyshev polynomial: `T_0 = 2`, `T_1 = x`,
/// `T_{n+1} = x T_n - T_{n-1}`.
pub fn chebyshev(n: usize) -> IntPoly {
    let x = IntPoly::x();
    let mut prev = IntPoly::from_coeffs([2]);
    if n == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for _ in 1..n {
        let next = x.mul(&cur).sub(&prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// The `n`-th cyclotomic polynomial, by dividing `x^n - 1` by `Φ_d` for proper divisors `d`.
pub fn cyclotomic(n: u64) -> IntPoly {
    assert!(n >= 1);
    let mut p = {
        let mut c = vec![BigInt::zero(); n as usize + 1];
        c[0] = BigInt::from(-1);
        c[n as usize] = BigInt::one();
        IntPoly::from_coeffs(c)
    };
    for d in 1..n {
        if n % d == 0 {
            p = p.div_monic(&cyclotomic(d)).expect("cyclotomic factor divides");
        }
    }
    p
}
