//! Exact coefficient arithmetic.

mod laurent;
mod poly;
mod root;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

pub use laurent::LaurentHalf;
pub use poly::{chebyshev, cyclotomic, IntPoly};
pub use root::RootOfUnity;

/// Unital ring with an integer action, enough for Horner evaluation.
pub trait Algebra: Clone {
    fn one_like(&self) -> Self;
    fn scale_int(&self, c: &BigInt) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

impl Algebra for Complex64 {
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn scale_int(&self, c: &BigInt) -> Self {
        self * c.to_f64().unwrap_or(f64::NAN)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl Algebra for f64 {
    fn one_like(&self) -> Self {
        1.0
    }
    fn scale_int(&self, c: &BigInt) -> Self {
        self * c.to_f64().unwrap_or(f64::NAN)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl Algebra for nalgebra::DMatrix<Complex64> {
    fn one_like(&self) -> Self {
        nalgebra::DMatrix::identity(self.nrows(), self.ncols())
    }
    fn scale_int(&self, c: &BigInt) -> Self {
        self * Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl Algebra for nalgebra::Matrix2<Complex64> {
    fn one_like(&self) -> Self {
        nalgebra::Matrix2::identity()
    }
    fn scale_int(&self, c: &BigInt) -> Self {
        self * Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

pub fn poly_mul(p: &LaurentHalf, q: &LaurentHalf) -> LaurentHalf {
    p * q
}

pub fn eval_at_root(p: &LaurentHalf, root: &RootOfUnity) -> Complex64 {
    p.eval_at_root(root)
}

/// Residue of `p` modulo the `N`-th cyclotomic polynomial, in the basis `1, A, ..`.
pub fn residue_at_root(p: &LaurentHalf, root: &RootOfUnity) -> IntPoly {
    p.cyclotomic_residue(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn eval_examples() {
        let r3 = RootOfUnity::new(3, 1).unwrap();
        assert!(close(eval_at_root(&LaurentHalf::a_pow(3), &r3), Complex64::new(1.0, 0.0), 1e-12));
        let expect = Complex64::from_polar(1.0, 4.0 * PI / 3.0);
        assert!(close(eval_at_root(&LaurentHalf::a_half_pow(1), &r3), expect, 1e-12));
        let r5 = RootOfUnity::new(5, 1).unwrap();
        let p = LaurentHalf::a_pow(2) + LaurentHalf::a_pow(-2);
        let v = eval_at_root(&p, &r5);
        assert!(close(v, Complex64::new(2.0 * (4.0 * PI / 5.0).cos(), 0.0), 1e-12));
    }

    #[test]
    fn residue_detects_vanishing() {
        // 1 + A + A^2 vanishes at primitive cube roots
        let p = LaurentHalf::from_pairs([(0, 1), (2, 1), (4, 1)]);
        let r3 = RootOfUnity::new(3, 2).unwrap();
        assert!(p.vanishes_at_root(&r3));
        assert!(eval_at_root(&p, &r3).norm() < 1e-12);
        assert!(!LaurentHalf::a_pow(1).vanishes_at_root(&r3));
        // A^N - 1 vanishes, and so does A^{N/2} - A^{1/2 * N}
        let r7 = RootOfUnity::new(7, 3).unwrap();
        assert!((LaurentHalf::a_pow(7) - LaurentHalf::one()).vanishes_at_root(&r7));
        assert!((LaurentHalf::a_half_pow(7) - LaurentHalf::one()).vanishes_at_root(&r7));
    }

    #[test]
    fn half_power_squared_is_a_everywhere() {
        for n in [3u64, 5, 7, 9, 11, 13, 15] {
            for r in RootOfUnity::all_primitive(n) {
                let h = eval_at_root(&LaurentHalf::a_half_pow(1), &r);
                assert!(close(h * h, eval_at_root(&LaurentHalf::a_pow(1), &r), 1e-12));
            }
        }
    }

    fn random_sl2(rng: &mut ChaCha8Rng) -> Matrix2<Complex64> {
        let mut c = || Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        loop {
            let (a, b, cc) = (c(), c(), c());
            if a.norm() > 0.2 {
                let d = (Complex64::new(1.0, 0.0) + b * cc) / a;
                return Matrix2::new(a, b, cc, d);
            }
        }
    }

    #[test]
    fn chebyshev_trace_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = random_sl2(&mut rng);
            let tr = m.trace();
            let mut pw = Matrix2::<Complex64>::identity();
            for n in 0..=12usize {
                let lhs = chebyshev(n).evaluate(&tr);
                let rhs = pw.trace();
                assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()), "n={n}");
                pw *= m;
            }
        }
    }

    #[test]
    fn chebyshev_of_matrix_matches_trace_law() {
        // T_n(M) = M^n + M^{-n} for unimodular M
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_sl2(&mut rng);
        let inv = m.try_inverse().unwrap();
        let t = chebyshev(4).evaluate(&(m + inv));
        let direct = m.pow(4) + inv.pow(4);
        assert!((t - direct).norm() < 1e-9);
    }

    fn arb_laurent() -> impl Strategy<Value = LaurentHalf> {
        prop::collection::vec((-12i64..12, -20i64..20), 0..6).prop_map(LaurentHalf::from_pairs)
    }

    proptest! {
        #[test]
        fn eval_is_multiplicative(p in arb_laurent(), q in arb_laurent(), n in prop::sample::select(vec![3u64, 5, 7, 9, 11]), k in 1i64..20) {
            prop_assume!(RootOfUnity::new(n, k).is_ok());
            let r = RootOfUnity::new(n, k).unwrap();
            let lhs = eval_at_root(&poly_mul(&p, &q), &r);
            let rhs = eval_at_root(&p, &r) * eval_at_root(&q, &r);
            prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()).max(1.0) * 100.0);
        }

        #[test]
        fn residue_is_multiplicative(p in arb_laurent(), q in arb_laurent(), n in prop::sample::select(vec![3u64, 5, 9, 15])) {
            let r = RootOfUnity::new(n, 1).unwrap();
            let phi = cyclotomic(n);
            let lhs = residue_at_root(&(&p * &q), &r);
            let rhs = residue_at_root(&p, &r).mul(&residue_at_root(&q, &r)).rem_monic(&phi);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ring_axioms(p in arb_laurent(), q in arb_laurent(), s in arb_laurent()) {
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&(&p * &q) * &s, &p * &(&q * &s));
            prop_assert_eq!(&p * &(&q + &s), &(&p * &q) + &(&p * &s));
        }

        #[test]
        fn json_roundtrip(p in arb_laurent()) {
            let s = serde_json::to_string(&p).unwrap();
            let back: LaurentHalf = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
