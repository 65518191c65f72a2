//! Formal group law identities, inverses and n-series.

use std::collections::BTreeMap;
use std::sync::Arc;

use orient_core::algebra::*;
use orient_core::fgl::*;
use orient_core::Error;
use proptest::prelude::*;

const KINDS: [TheoryKind; 3] = [TheoryKind::Additive, TheoryKind::Multiplicative, TheoryKind::Universal];

fn compose(f: &FormalGroupLaw, a: &TruncatedSeries, b: &TruncatedSeries, t: &Arc<VariableTable>, p: &Profile) -> TruncatedSeries {
    series_substitute(
        f.law(),
        &BTreeMap::from([("u".to_string(), a.clone()), ("v".to_string(), b.clone())]),
        t,
        p,
    )
    .unwrap()
}

#[test]
fn group_axioms_up_to_order_twelve() {
    for kind in KINDS {
        for n in 2..=12 {
            let f = make_fgl(kind, n).unwrap();
            let t = f.coefficient_table().extended([("u", 1), ("v", 1), ("w", 1)]).unwrap();
            let p = Profile::degree(t.len(), n);
            let var = |s: &str| TruncatedSeries::var(&t, &p, s).unwrap();
            let zero = TruncatedSeries::zero(&t, &p);
            let (u, v, w) = (var("u"), var("v"), var("w"));
            assert!(compose(&f, &u, &zero, &t, &p).equals(&u), "{kind} {n} unit");
            assert!(compose(&f, &u, &v, &t, &p).equals(&compose(&f, &v, &u, &t, &p)), "{kind} {n} comm");
            let l = compose(&f, &u, &compose(&f, &v, &w, &t, &p), &t, &p);
            let r = compose(&f, &compose(&f, &u, &v, &t, &p), &w, &t, &p);
            assert!(l.equals(&r), "{kind} {n} assoc");
        }
    }
}

#[test]
fn built_in_laws() {
    assert_eq!(make_fgl(TheoryKind::Additive, 7).unwrap().law().to_string(), "u + v");
    assert_eq!(make_fgl(TheoryKind::Multiplicative, 3).unwrap().law().to_string(), "u + v - beta*u*v");
    assert!(matches!(make_fgl(TheoryKind::Additive, 1), Err(Error::OrderTooSmall(1))));

    // ℓ(u) + ℓ(v) = u + v + m1(u² + v²), ℓ⁻¹(y) = y - m1 y² + …: degree two
    // of the composite is m1(u² + v²) - m1(u + v)² = -2 m1 uv.
    let f = make_fgl(TheoryKind::Universal, 3).unwrap();
    let t = f.law_table();
    let i = |s: &str| t.index_of(s).unwrap();
    let mut m = vec![0; t.len()];
    m[i("m1")] = 1;
    m[i("u")] = 1;
    m[i("v")] = 1;
    assert_eq!(f.law().coefficient(&m).unwrap(), int(-2));
}

#[test]
fn inverse_examples() {
    let add = make_fgl(TheoryKind::Additive, 6).unwrap();
    assert_eq!(add.inverse().g.to_string(), "-1");
    let k = make_fgl(TheoryKind::Multiplicative, 5).unwrap();
    // Multiply-back oracle: (u + u g - β u·u g) vanishes for g = -1/(1-βu).
    let g = &k.inverse().g;
    assert_eq!(g.to_string(), "-1 - beta*u - beta^2*u^2 - beta^3*u^3");
    assert!(inverse_identity_holds(&k, g).unwrap());
    for kind in KINDS {
        for n in 2..=12 {
            let f = make_fgl(kind, n).unwrap();
            assert_eq!(f.inverse().g.constant_term(), int(-1));
            assert!(f.inverse().verified);
            assert!(inverse_identity_holds(&f, &f.inverse().g).unwrap());
        }
    }
}

#[test]
fn perturbed_inverse_fails() {
    for kind in KINDS {
        let f = make_fgl(kind, 8).unwrap();
        let g = &f.inverse().g;
        let t = g.table().clone();
        let ui = t.index_of("u").unwrap();
        for k in 0..(f.order() - 1) {
            let mut e = vec![0; t.len()];
            e[ui] = k;
            let bump = TruncatedSeries::monomial(&t, g.profile(), e, int(1));
            assert!(!inverse_identity_holds(&f, &(g + &bump)).unwrap(), "{kind} u^{k}");
        }
    }
}

#[test]
fn n_series_examples() {
    let add = make_fgl(TheoryKind::Additive, 6).unwrap();
    assert_eq!(add.n_series(7).unwrap().to_string(), "7*u");
    let k = make_fgl(TheoryKind::Multiplicative, 6).unwrap();
    assert_eq!(k.n_series(2).unwrap().to_string(), "2*u - beta*u^2");
    assert!(k.n_series(0).unwrap().is_zero());
    let k4 = make_fgl(TheoryKind::Multiplicative, 4).unwrap();
    assert_eq!(k4.n_series(-1).unwrap().to_string(), "-u - beta*u^2 - beta^2*u^3");
}

#[test]
fn n_series_is_a_homomorphism() {
    for kind in KINDS {
        let f = make_fgl(kind, 7).unwrap();
        let t = f.series_table();
        let p = Profile::degree(t.len(), f.order());
        let ui = t.index_of("u").unwrap();
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                let lhs = compose(&f, &f.n_series(a).unwrap(), &f.n_series(b).unwrap(), t, &p);
                let rhs = f.n_series(a + b).unwrap();
                assert!(lhs.equals(&rhs), "{kind} [{a}] + [{b}]");
                let mut e = vec![0; t.len()];
                e[ui] = 1;
                assert_eq!(rhs.coefficient(&e).unwrap(), int(a + b));
            }
        }
    }
}

#[test]
fn specialization_examples() {
    let u = make_fgl(TheoryKind::Universal, 4).unwrap();
    let add = specialize_universal(u.law(), TheoryKind::Additive).unwrap();
    assert_eq!(add.to_string(), "u + v");
    // exp/log oracle: ℓ(u) = -log(1-βu)/β has exponential (1-e^{-βy})/β, and
    // (1-(1-βu)(1-βv))/β = u + v - βuv.
    let mult = specialize_universal(u.law(), TheoryKind::Multiplicative).unwrap();
    assert_eq!(mult.to_string(), "u + v - beta*u*v");

    let t = u.coefficient_table();
    let m1 = TruncatedSeries::var(t, &Profile::exact(t.len()), "m1").unwrap();
    assert_eq!(specialize_universal(&m1, TheoryKind::Multiplicative).unwrap().to_string(), "1/2*beta");

    let clash = t.extended([(BETA, -1)]).unwrap();
    let x = TruncatedSeries::one(&clash, &Profile::exact(clash.len()));
    assert!(matches!(
        specialize_universal(&x, TheoryKind::Multiplicative),
        Err(Error::TableCollision(_))
    ));
}

#[test]
fn specialization_commutes_with_inverse() {
    for n in 2..=10 {
        let u = make_fgl(TheoryKind::Universal, n).unwrap();
        for target in [TheoryKind::Additive, TheoryKind::Multiplicative] {
            let f = make_fgl(target, n).unwrap();
            let s = specialize_universal(&u.inverse().g, target).unwrap();
            assert!(s.equals(&f.inverse().g.reprofile(s.profile())), "{target} {n}");
            let law = specialize_universal(u.law(), target).unwrap();
            assert!(law.equals(&f.law().reprofile(law.profile())), "{target} {n}");
        }
    }
}

fn arb_nilpotent() -> impl Strategy<Value = Vec<((u32, u32), i64)>> {
    prop::collection::vec(((0u32..3, 0u32..3), -3i64..=3), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn specialization_commutes_with_fgl_add(a in arb_nilpotent(), b in arb_nilpotent(), n in 3u32..8) {
        let u = make_fgl(TheoryKind::Universal, n).unwrap();
        let ut = u.coefficient_table().extended([("x", 1), ("y", 1)]).unwrap();
        let up = Profile::degree(ut.len(), n);
        let build = |terms: &[((u32, u32), i64)]| {
            let mut s = TruncatedSeries::zero(&ut, &up);
            for ((i, j), c) in terms {
                if i + j == 0 {
                    continue;
                }
                let mut e = vec![0; ut.len()];
                e[ut.len() - 2] = *i;
                e[ut.len() - 1] = *j;
                s.add_term(e, int(*c));
            }
            s
        };
        let (a, b) = (build(&a), build(&b));
        let sum = u.fgl_add(&a, &b).unwrap();
        for target in [TheoryKind::Additive, TheoryKind::Multiplicative] {
            let f = make_fgl(target, n).unwrap();
            let lhs = specialize_universal(&sum, target).unwrap();
            let sa = specialize_universal(&a, target).unwrap();
            let sb = specialize_universal(&b, target).unwrap();
            let rhs = f.fgl_add(&sa, &sb).unwrap();
            prop_assert!(lhs.equals(&rhs.reprofile(lhs.profile())));
        }
    }

    #[test]
    fn fgl_add_of_dual_vanishes(k in 1u32..4, kind_ix in 0usize..3) {
        let f = make_fgl(KINDS[kind_ix], 6).unwrap();
        let t = f.coefficient_table().extended([("x", 1)]).unwrap();
        let p = Profile::exact(t.len()).with_cap(t.len() - 1, Some(k + 1));
        let x = TruncatedSeries::var(&t, &p, "x").unwrap();
        let x = x.pow(k);
        let zero = TruncatedSeries::zero(&t, &p);
        prop_assert!(f.fgl_add(&x, &zero).unwrap().equals(&x));
        let d = f.dual(&x).unwrap();
        prop_assert!(f.fgl_add(&x, &d).unwrap().is_zero());
    }
}
