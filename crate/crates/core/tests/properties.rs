use num_complex::Complex64;
use num_integer::Integer;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use skein_core::bracket::{kauffman_bracket, Braid, Smoothing};
use skein_core::charvar::{fricke_trace, random_sl2, reduced_words, slope_word, trace_word, twist_rep, SL2Rep, Z2Cocycle};
use skein_core::qrep::{build_rep, central_character, omega_matrix, verify_rep, CentralCharacter, RELATION_TOL};
use skein_core::shadow::{classical_trace_poly, holonomy_trace, puncture_eigenvalue, CurveLabel, ShearData};
use skein_core::skein_pt::SkeinPTElement;
use skein_core::traintrack::{build_train_track, by_name, CORPUS};
use skein_core::{LaurentHalf, RootOfUnity};

fn braid() -> impl Strategy<Value = Braid> {
    (2usize..=4).prop_flat_map(|n| {
        prop::collection::vec((1..n as i32, any::<bool>()), 0..=8)
            .prop_map(move |w| Braid::new(n, w.into_iter().map(|(g, s)| if s { g } else { -g }).collect()).unwrap())
    })
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-8 * b.norm().max(1.0)
}

fn element() -> impl Strategy<Value = SkeinPTElement> {
    prop::collection::vec(((0u32..3, 0u32..3, 0u32..2), -2i64..=2, -3i64..=3), 1..4).prop_map(|ts| {
        ts.into_iter().fold(SkeinPTElement::zero(), |acc, (m, c, k)| {
            acc.add(&SkeinPTElement::term(m, LaurentHalf::monomial(c, 2 * k)))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_obeys_skein_relation(b in braid()) {
        let d = b.closure();
        let k = kauffman_bracket(&d).unwrap();
        for c in 0..d.num_crossings() {
            let k0 = kauffman_bracket(&d.resolve_crossing(c, Smoothing::Zero).unwrap()).unwrap();
            let ki = kauffman_bracket(&d.resolve_crossing(c, Smoothing::Infinity).unwrap()).unwrap();
            prop_assert_eq!(&k, &(&LaurentHalf::a_pow(-1) * &k0 + &LaurentHalf::a_pow(1) * &ki));
        }
    }

    #[test]
    fn bracket_ignores_tuple_rotation_and_r2(b in braid(), at in 0usize..9, sign in any::<bool>()) {
        let k = kauffman_bracket(&b.closure()).unwrap();
        prop_assert_eq!(&kauffman_bracket(&b.closure().rotate_tuples()).unwrap(), &k);
        let at = at.min(b.word.len());
        let g = if sign { 1 } else { -1 };
        prop_assert_eq!(&kauffman_bracket(&b.insert_r2(at, g).closure()).unwrap(), &k);
    }

    #[test]
    fn union_commutes(b1 in braid(), b2 in braid()) {
        let (d1, d2) = (b1.closure(), b2.closure());
        prop_assert_eq!(kauffman_bracket(&d1.disjoint_union(&d2)).unwrap(), kauffman_bracket(&d2.disjoint_union(&d1)).unwrap());
    }

    #[test]
    fn traces_are_conjugation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = SL2Rep::random(2, &mut rng);
        let g = random_sl2(&mut rng);
        let rc = r.conjugate(&g);
        for w in reduced_words(2, 4) {
            prop_assert!(close(trace_word(&w, &rc).unwrap(), trace_word(&w, &r).unwrap()));
        }
    }

    #[test]
    fn fricke_matches_slope_word(seed in any::<u64>(), p in -5i64..=5, q in -5i64..=5) {
        prop_assume!(p.gcd(&q) == 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = SL2Rep::random(2, &mut rng);
        let direct = trace_word(&slope_word(p, q).unwrap(), &r).unwrap();
        prop_assert!(close(fricke_trace(p, q, &r).unwrap(), direct));
    }

    #[test]
    fn sign_twist_scales_traces(seed in any::<u64>(), s0 in 0u8..2, s1 in 0u8..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = SL2Rep::random(2, &mut rng);
        let alpha = Z2Cocycle { signs: vec![s0, s1] };
        let t = twist_rep(&r, &alpha).unwrap();
        for w in reduced_words(2, 4) {
            let sign = if w.z2_degree(&alpha) == 1 { -1.0 } else { 1.0 };
            prop_assert!(close(trace_word(&w, &t).unwrap(), trace_word(&w, &r).unwrap() * sign));
        }
    }

    #[test]
    fn skein_product_is_associative(u in element(), v in element(), w in element()) {
        prop_assert_eq!(u.multiply(&v).multiply(&w), u.multiply(&v.multiply(&w)));
    }

    #[test]
    fn skein_product_distributes(u in element(), v in element(), w in element()) {
        prop_assert_eq!(u.multiply(&v.add(&w)), u.multiply(&v).add(&u.multiply(&w)));
    }

    #[test]
    fn thurston_form_is_antisymmetric(idx in 0usize..CORPUS.len(), c1 in prop::collection::vec(-3i64..=3, 6), c2 in prop::collection::vec(-3i64..=3, 6)) {
        let tri = by_name(CORPUS[idx].0).unwrap();
        let tt = build_train_track(&tri);
        let basis = tt.weight_basis().unwrap();
        let combo = |c: &[i64]| -> Vec<i64> {
            (0..tt.num_branches()).map(|j| basis.iter().zip(c).map(|(b, k)| b[j] * k).sum()).collect()
        };
        let (a, b) = (combo(&c1), combo(&c2));
        prop_assert_eq!(tt.thurston_form(&a, &b).unwrap(), -tt.thurston_form(&b, &a).unwrap());
        for i in 0..tri.punctures {
            prop_assert_eq!(tt.thurston_form(&tt.puncture_vector(i).unwrap(), &a).unwrap(), 0);
        }
    }

    #[test]
    fn qrep_returns_its_character(seed in any::<u64>(), n in prop::sample::select(vec![3u64, 5, 7])) {
        let tt = skein_core::traintrack::punctured_torus();
        let basis = tt.weight_basis().unwrap();
        let omega = omega_matrix(&tt, &basis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = CentralCharacter::generic(basis.len(), &mut rng);
        let root = RootOfUnity::new(n, 1).unwrap();
        let rep = build_rep(&omega, &root, &chi).unwrap();
        prop_assert!(verify_rep(&rep) < RELATION_TOL);
        let central: Vec<Vec<i64>> = (0..basis.len()).map(|j| (0..basis.len()).map(|i| if i == j { n as i64 } else { 0 }).collect()).collect();
        let got = central_character(&rep, &central).unwrap();
        for (g, want) in got.iter().zip(&chi.nth_powers) {
            prop_assert!(close(*g, *want));
        }
    }

    #[test]
    fn puncture_eigenvalue_conventions_agree(seed in any::<u64>(), idx in 0usize..CORPUS.len()) {
        let tri = by_name(CORPUS[idx].0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = ShearData::random(tri.clone(), &mut rng);
        for i in 0..tri.punctures {
            let ev = puncture_eigenvalue(&sd, i).unwrap();
            prop_assert!((ev.from_matrix - ev.from_roots).norm() < 1e-8 * ev.from_roots.norm().max(1.0));
        }
    }

    #[test]
    fn trace_polynomials_match_holonomy(seed in any::<u64>(), p in 0i64..=3, q in -3i64..=3) {
        prop_assume!(p.gcd(&q) == 1);
        let tri = by_name("punctured_torus").unwrap();
        let k = CurveLabel::Slope(p, q);
        let poly = classical_trace_poly(k, &tri).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = ShearData::random(tri, &mut rng);
        prop_assert!(close(poly.eval(&sd.s), holonomy_trace(&sd, k).unwrap()));
    }
}
