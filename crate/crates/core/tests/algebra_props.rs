//! Ring laws and kernel operations on small random series.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use orient_core::algebra::*;
use orient_core::Error;
use proptest::prelude::*;

fn uvw() -> Arc<VariableTable> {
    VariableTable::new([("u", 1), ("v", 1), ("w", 1)]).unwrap()
}

fn series(t: &Arc<VariableTable>, p: &Profile, terms: &[(Vec<u32>, i64)]) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(t, p);
    for (m, c) in terms {
        s.add_term(m.clone(), int(*c));
    }
    s
}

fn arb_terms(nvars: usize, max_exp: u32) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    prop::collection::vec((prop::collection::vec(0..=max_exp, nvars), -4i64..=4), 0..6)
}

/// Schoolbook product on plain maps, then dropped by the profile.
fn schoolbook(
    t: &VariableTable,
    p: &Profile,
    a: &[(Vec<u32>, i64)],
    b: &[(Vec<u32>, i64)],
) -> BTreeMap<Vec<u32>, i64> {
    let mut out: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Vec<u32> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            if p.admits(t, &m) {
                *out.entry(m).or_insert(0) += ca * cb;
            }
        }
    }
    out.retain(|m, c| *c != 0 && p.admits(t, m));
    out
}

fn collapse(t: &VariableTable, p: &Profile, a: &[(Vec<u32>, i64)]) -> Vec<(Vec<u32>, i64)> {
    let mut out: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
    for (m, c) in a {
        if p.admits(t, m) {
            *out.entry(m.clone()).or_insert(0) += c;
        }
    }
    out.into_iter().filter(|(_, c)| *c != 0).collect()
}

#[test]
fn difference_of_squares() {
    let t = uvw();
    let p = Profile::exact(3);
    let u = TruncatedSeries::var(&t, &p, "u").unwrap();
    let v = TruncatedSeries::var(&t, &p, "v").unwrap();
    let got = poly_mul(&(&u + &v), &(&u - &v)).unwrap();
    assert!(got.equals(&(&(&u * &u) - &(&v * &v))));
}

#[test]
fn geometric_product_truncates_to_one() {
    let t = VariableTable::new([("u", 1)]).unwrap();
    let p = Profile::degree(1, 3);
    let a = series(&t, &p, &[(vec![0], 1), (vec![1], 1)]);
    let b = series(&t, &p, &[(vec![0], 1), (vec![1], -1), (vec![2], 1)]);
    assert!(poly_mul(&a, &b).unwrap().equals(&TruncatedSeries::one(&t, &p)));
}

#[test]
fn cap_annihilates() {
    let t = VariableTable::new([("z1", 1)]).unwrap();
    let p = Profile::exact(1).with_cap(0, Some(3));
    let z2 = series(&t, &p, &[(vec![2], 1)]);
    let z = series(&t, &p, &[(vec![1], 1)]);
    assert!(poly_mul(&z2, &z).unwrap().is_zero());
}

#[test]
fn mismatched_tables_are_rejected() {
    let a = TruncatedSeries::one(&uvw(), &Profile::exact(3));
    let t2 = VariableTable::new([("x", 1)]).unwrap();
    let b = TruncatedSeries::one(&t2, &Profile::exact(1));
    assert!(matches!(poly_mul(&a, &b), Err(Error::TableMismatch)));
}

#[test]
fn substitution_examples() {
    let t = VariableTable::new([("u", 1), ("v", 1)]).unwrap();
    let p = Profile::exact(2);
    let u = TruncatedSeries::var(&t, &p, "u").unwrap();
    let v = TruncatedSeries::var(&t, &p, "v").unwrap();
    let f = &u * &u;
    let got = series_substitute(&f, &BTreeMap::from([("u".into(), &u + &v)]), &t, &p).unwrap();
    let want = series(&t, &p, &[(vec![2, 0], 1), (vec![1, 1], 2), (vec![0, 2], 1)]);
    assert!(got.equals(&want));
    let same = series_substitute(&f, &BTreeMap::from([("u".into(), u.clone())]), &t, &p).unwrap();
    assert!(same.equals(&f));

    // F(x, 0) = x for the multiplicative law.
    let bt = VariableTable::new([("beta", -1), ("u", 1), ("v", 1), ("x", 1)]).unwrap();
    let bp = Profile::exact(4);
    let var = |n: &str| TruncatedSeries::var(&bt, &bp, n).unwrap();
    let law = &(&var("u") + &var("v")) - &(&(&var("beta") * &var("u")) * &var("v"));
    let got = series_substitute(
        &law,
        &BTreeMap::from([("u".into(), var("x")), ("v".into(), TruncatedSeries::zero(&bt, &bp))]),
        &bt,
        &bp,
    )
    .unwrap();
    assert!(got.equals(&var("x")));
}

#[test]
fn unit_constant_required_for_truncated_substitution() {
    let t = VariableTable::new([("u", 1)]).unwrap();
    let p = Profile::degree(1, 4);
    let f = series(&t, &p, &[(vec![1], 1), (vec![2], 1)]);
    let one = TruncatedSeries::one(&t, &p);
    assert!(matches!(
        series_substitute(&f, &BTreeMap::from([("u".into(), one)]), &t, &p),
        Err(Error::NonNilpotentSubstitution(_))
    ));
}

#[test]
fn inversion_examples() {
    let t = VariableTable::new([("beta", -1), ("u", 1)]).unwrap();
    let p = Profile::degree(2, 4);
    let f = series(&t, &p, &[(vec![0, 0], 1), (vec![1, 1], -1)]);
    let g = invert_unit_series(&f).unwrap();
    assert_eq!(g.to_string(), "1 + beta*u + beta^2*u^2 + beta^3*u^3");
    assert!((&f * &g).equals(&TruncatedSeries::one(&t, &p)));

    let two = TruncatedSeries::constant(&t, &p, int(2));
    assert_eq!(invert_unit_series(&two).unwrap().constant_term(), frac(1, 2));

    let xt = VariableTable::new([("x", 1)]).unwrap();
    let xp = Profile::exact(1).with_cap(0, Some(2));
    let f = series(&xt, &xp, &[(vec![0], 1), (vec![1], 1)]);
    let g = invert_unit_series(&f).unwrap();
    assert!(g.equals(&series(&xt, &xp, &[(vec![0], 1), (vec![1], -1)])));

    let z = series(&xt, &xp, &[(vec![1], 1)]);
    assert!(matches!(invert_unit_series(&z), Err(Error::NotAUnit)));
}

#[test]
fn coefficient_lookup() {
    let t = VariableTable::new([("u", 1), ("v", 1)]).unwrap();
    let p = Profile::degree(2, 4);
    let f = series(&t, &p, &[(vec![2, 0], 1), (vec![1, 1], 3)]);
    assert_eq!(f.coefficient(&[1, 1]).unwrap(), int(3));
    assert_eq!(TruncatedSeries::zero(&t, &p).coefficient(&[1, 0]).unwrap(), int(0));
    assert!(matches!(f.coefficient(&[4, 0]), Err(Error::OutsideProfile(_))));
    let one_plus_u = series(&t, &p, &[(vec![0, 0], 1), (vec![1, 0], 1)]);
    // binomial oracle: C(3, 2)
    assert_eq!(one_plus_u.pow(3).coefficient(&[2, 0]).unwrap(), binomial(3, 2));
}

#[test]
fn rational_normal_form() {
    let r = frac(6, -4);
    assert_eq!(to_pair_string(&r), "-3/2");
    assert_eq!(parse_rational("10/-4").unwrap(), frac(-5, 2));
    assert!(parse_rational("1/0").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_schoolbook(a in arb_terms(3, 3), b in arb_terms(3, 3), n in 2u32..8) {
        let t = uvw();
        let p = Profile::degree(3, n).with_cap(2, Some(2));
        let want = schoolbook(&t, &p, &collapse(&t, &p, &a), &collapse(&t, &p, &b));
        let got = poly_mul(&series(&t, &p, &a), &series(&t, &p, &b)).unwrap();
        let got: BTreeMap<Vec<u32>, i64> = got
            .terms()
            .map(|(m, c)| (m.clone(), c.to_integer().try_into().unwrap()))
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn ring_axioms(a in arb_terms(3, 3), b in arb_terms(3, 3), c in arb_terms(3, 3), n in 2u32..7) {
        let t = uvw();
        let p = Profile::degree(3, n);
        let (a, b, c) = (series(&t, &p, &a), series(&t, &p, &b), series(&t, &p, &c));
        prop_assert!((&(&a * &b) * &c).equals(&(&a * &(&b * &c))));
        prop_assert!((&a * &b).equals(&(&b * &a)));
        prop_assert!((&a * &(&b + &c)).equals(&(&(&a * &b) + &(&a * &c))));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn inverse_multiplies_back(a in arb_terms(3, 3), c0 in prop::sample::select(vec![-3i64, -1, 1, 2, 5]), n in 2u32..7) {
        let t = uvw();
        let p = Profile::degree(3, n);
        let mut f = series(&t, &p, &a);
        let k = f.constant_term();
        f.add_term(vec![0, 0, 0], int(c0) - k);
        let g = invert_unit_series(&f).unwrap();
        prop_assert!((&f * &g).equals(&TruncatedSeries::one(&t, &p)));
    }

    #[test]
    fn substitution_is_associative(
        f in arb_terms(1, 6), g in arb_terms(1, 6), h in arb_terms(1, 6),
    ) {
        let t = VariableTable::new([("u", 1)]).unwrap();
        let p = Profile::degree(1, 7);
        let nil = |terms: &[(Vec<u32>, i64)]| {
            let mut s = series(&t, &p, terms);
            let k = s.constant_term();
            s.add_term(vec![0], -k);
            s
        };
        let (f, g, h) = (series(&t, &p, &f), nil(&g), nil(&h));
        let sub = |x: &TruncatedSeries, y: &TruncatedSeries| {
            series_substitute(x, &BTreeMap::from([("u".into(), y.clone())]), &t, &p).unwrap()
        };
        prop_assert!(sub(&sub(&f, &g), &h).equals(&sub(&f, &sub(&g, &h))));
    }
}

#[test]
fn zero_coefficients_are_not_stored() {
    let t = uvw();
    let p = Profile::exact(3);
    let mut s = TruncatedSeries::zero(&t, &p);
    s.add_term(vec![1, 0, 0], int(2));
    s.add_term(vec![1, 0, 0], int(-2));
    assert!(s.is_zero());
    assert!(s.terms().all(|(_, c)| !c.is_zero()));
}
