use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::SkeinError;

/// Primitive root `exp(2πik/N)` with `N` odd and at least 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RootRaw")]
pub struct RootOfUnity {
    n: u64,
    k: i64,
}

#[derive(Deserialize)]
struct RootRaw {
    n: u64,
    k: i64,
}

impl TryFrom<RootRaw> for RootOfUnity {
    type Error = SkeinError;
    fn try_from(r: RootRaw) -> Result<Self, SkeinError> {
        RootOfUnity::new(r.n, r.k)
    }
}

impl RootOfUnity {
    pub fn new(n: u64, k: i64) -> Result<Self, SkeinError> {
        if n % 2 == 0 {
            return Err(SkeinError::EvenN(n));
        }
        if n < 3 {
            return Err(SkeinError::Validation(format!("root order must be at least 3, got {n}")));
        }
        if (k.rem_euclid(n as i64)).gcd(&(n as i64)) != 1 {
            return Err(SkeinError::Validation(format!("gcd({k}, {n}) != 1")));
        }
        Ok(Self { n, k: k.rem_euclid(n as i64) })
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn index(&self) -> i64 {
        self.k
    }

    /// The value of `A`.
    pub fn a(&self) -> Complex64 {
        self.power(1)
    }

    /// `A^j` for any integer `j`.
    pub fn power(&self, j: i64) -> Complex64 {
        let n = self.n as i64;
        let m = (j.rem_euclid(n) * self.k).rem_euclid(n);
        Complex64::from_polar(1.0, TAU * m as f64 / n as f64)
    }

    /// Integer exponent of `A` (mod N) representing `A^{e/2}`, using `A^{1/2} := A^{(N+1)/2}`.
    pub fn reduce_half_exponent(&self, doubled: i64) -> i64 {
        let n = self.n as i64;
        let half = (n + 1) / 2;
        (doubled.rem_euclid(n) * half).rem_euclid(n)
    }

    /// The canonical square root `A^{(N+1)/2}`.
    pub fn sqrt_a(&self) -> Complex64 {
        self.power((self.n as i64 + 1) / 2)
    }

    /// All admissible roots of order `n`.
    pub fn all_primitive(n: u64) -> Vec<Self> {
        (1..n as i64).filter_map(|k| Self::new(n, k).ok()).collect()
    }
}
