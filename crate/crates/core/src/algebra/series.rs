//! Sparse multivariate series with exact rational coefficients.
//!
//! A [`TruncatedSeries`] is a polynomial over a [`VariableTable`] read modulo
//! its [`Profile`]. Binary operations work modulo the coarser of the two
//! profiles; nothing outside a profile is ever stored.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::rational::{abs, int, is_negative, Rational};
use super::table::{same_table, Profile, VariableTable};
use crate::error::{Error, Result};

pub type Monomial = Vec<u32>;

#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    table: Arc<VariableTable>,
    profile: Profile,
    terms: BTreeMap<Monomial, Rational>,
}

impl TruncatedSeries {
    pub fn zero(table: &Arc<VariableTable>, profile: &Profile) -> Self {
        debug_assert_eq!(profile.caps.len(), table.len());
        Self {
            table: table.clone(),
            profile: profile.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(table: &Arc<VariableTable>, profile: &Profile, c: Rational) -> Self {
        Self::monomial(table, profile, vec![0; table.len()], c)
    }

    pub fn one(table: &Arc<VariableTable>, profile: &Profile) -> Self {
        Self::constant(table, profile, Rational::one())
    }

    pub fn monomial(
        table: &Arc<VariableTable>,
        profile: &Profile,
        exps: Monomial,
        c: Rational,
    ) -> Self {
        let mut s = Self::zero(table, profile);
        s.add_term(exps, c);
        s
    }

    /// The single variable `name`.
    pub fn var(table: &Arc<VariableTable>, profile: &Profile, name: &str) -> Result<Self> {
        let i = table
            .index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        let mut exps = vec![0; table.len()];
        exps[i] = 1;
        Ok(Self::monomial(table, profile, exps, Rational::one()))
    }

    pub fn from_terms(
        table: &Arc<VariableTable>,
        profile: &Profile,
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Self {
        let mut s = Self::zero(table, profile);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        &self.table
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c` times the monomial, dropping it if the profile excludes it.
    pub fn add_term(&mut self, exps: Monomial, c: Rational) {
        if c.is_zero() || !self.profile.admits(&self.table, &exps) {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&vec![0; self.table.len()])
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Coefficient of a monomial; distinguishes "outside the profile" from 0.
    pub fn coefficient(&self, exps: &[u32]) -> Result<Rational> {
        if exps.len() != self.table.len() || !self.profile.admits(&self.table, exps) {
            return Err(Error::OutsideProfile(exps.to_vec()));
        }
        Ok(self.terms.get(exps).cloned().unwrap_or_else(Rational::zero))
    }

    /// Smallest degree among the stored terms (`None` for zero).
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| self.table.degree(m)).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| self.table.degree(m)).max()
    }

    pub fn max_codegree(&self) -> Option<i64> {
        self.terms.keys().map(|m| self.table.codegree_of(m)).max()
    }

    pub fn min_codegree(&self) -> Option<i64> {
        self.terms.keys().map(|m| self.table.codegree_of(m)).min()
    }

    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(|m| self.table.weight(m)).max()
    }

    /// Drops every term the (coarsened) profile excludes.
    pub fn restrict(&self, profile: &Profile) -> Self {
        let profile = self.profile.coarsen(profile);
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| profile.admits(&self.table, m))
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Self {
            table: self.table.clone(),
            profile,
            terms,
        }
    }

    /// Replaces the profile outright. Widening a profile is only honest when
    /// the caller knows no term was lost to the old one.
    pub fn reprofile(&self, profile: &Profile) -> Self {
        Self::from_terms(
            &self.table,
            profile,
            self.terms.iter().map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Equality modulo the coarser of the two profiles.
    pub fn equals(&self, other: &Self) -> bool {
        if !same_table(&self.table, &other.table) {
            return false;
        }
        let p = self.profile.coarsen(&other.profile);
        let lhs = self.terms.iter().filter(|(m, _)| p.admits(&self.table, m));
        let rhs = other.terms.iter().filter(|(m, _)| p.admits(&self.table, m));
        lhs.eq(rhs)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.table, &self.profile);
        }
        Self {
            table: self.table.clone(),
            profile: self.profile.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    /// Multiplies by `c * x^exps`.
    pub fn mul_monomial(&self, exps: &[u32], c: &Rational) -> Self {
        let mut out = Self::zero(&self.table, &self.profile);
        for (m, x) in &self.terms {
            let e: Monomial = m.iter().zip(exps).map(|(a, b)| a + b).collect();
            out.add_term(e, x * c);
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_tables(self, other)?;
        let profile = self.profile.coarsen(&other.profile);
        let mut out = self.restrict(&profile);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.table, &self.profile);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Maps a monomial of this table to the same-named variables of `target`.
    pub(crate) fn rename_into(&self, target: &Arc<VariableTable>, profile: &Profile) -> Result<Self> {
        let map = self
            .table
            .vars()
            .iter()
            .map(|v| {
                target
                    .index_of(&v.name)
                    .ok_or_else(|| Error::UnknownVariable(v.name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::zero(target, profile);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.len()];
            for (i, &x) in m.iter().enumerate() {
                e[map[i]] += x;
            }
            out.add_term(e, c.clone());
        }
        Ok(out)
    }
}

fn check_tables(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<()> {
    if same_table(&a.table, &b.table) {
        Ok(())
    } else {
        Err(Error::TableMismatch)
    }
}

/// Exact product reduced by the coarser profile.
pub fn poly_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_tables(a, b)?;
    let profile = a.profile.coarsen(&b.profile);
    let table = &a.table;
    fn graded<'s>(
        s: &'s TruncatedSeries,
        table: &VariableTable,
    ) -> Vec<(&'s Monomial, &'s Rational, u32, u32)> {
        s.terms
            .iter()
            .map(|(m, c)| (m, c, table.degree(m), table.weight(m)))
            .collect()
    }
    let (lhs, rhs) = (graded(a, table), graded(b, table));
    let mut acc: HashMap<Monomial, Rational> = HashMap::new();
    for &(ma, ca, da, wa) in &lhs {
        for &(mb, cb, db, wb) in &rhs {
            if profile.degree_bound.is_some_and(|n| da + db >= n)
                || profile.weight_bound.is_some_and(|w| wa + wb > w)
            {
                continue;
            }
            let mut ok = true;
            let e: Monomial = ma
                .iter()
                .zip(mb.iter())
                .zip(&profile.caps)
                .map(|((x, y), cap)| {
                    let s = x + y;
                    if cap.is_some_and(|c| s >= c) {
                        ok = false;
                    }
                    s
                })
                .collect();
            if !ok {
                continue;
            }
            let p = ca * cb;
            match acc.get_mut(&e) {
                Some(v) => *v += p,
                None => {
                    acc.insert(e, p);
                }
            }
        }
    }
    let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    Ok(TruncatedSeries {
        table: table.clone(),
        profile,
        terms,
    })
}

/// Composes `f` with the given bindings, producing a series over `target`
/// read modulo `profile`.
///
/// Variables of `f` without a binding map to the same-named variable of
/// `target`. The caller declares the result profile; when `f` is itself
/// truncated every bound series must have zero constant term so that the
/// dropped tail of `f` cannot leak into low degrees.
pub fn series_substitute(
    f: &TruncatedSeries,
    bindings: &BTreeMap<String, TruncatedSeries>,
    target: &Arc<VariableTable>,
    profile: &Profile,
) -> Result<TruncatedSeries> {
    enum Slot<'a> {
        Bound(&'a TruncatedSeries),
        Renamed(usize),
    }
    let finite = f.profile.is_exact();
    let slots = f
        .table
        .vars()
        .iter()
        .map(|v| match bindings.get(&v.name) {
            Some(s) => {
                if !same_table(&s.table, target) {
                    return Err(Error::TableMismatch);
                }
                if !finite && !s.constant_term().is_zero() {
                    return Err(Error::NonNilpotentSubstitution(v.name.clone()));
                }
                Ok(Slot::Bound(s))
            }
            None => target
                .index_of(&v.name)
                .map(Slot::Renamed)
                .ok_or_else(|| Error::UnknownVariable(v.name.clone())),
        })
        .collect::<Result<Vec<_>>>()?;
    for name in bindings.keys() {
        if f.table.index_of(name).is_none() {
            return Err(Error::UnknownVariable(name.clone()));
        }
    }

    // Group the terms of f by their exponents on the bound variables, so each
    // product of powers is formed once.
    let mut groups: BTreeMap<Vec<u32>, TruncatedSeries> = BTreeMap::new();
    for (m, c) in &f.terms {
        let key: Vec<u32> = slots
            .iter()
            .zip(m)
            .map(|(s, &e)| if matches!(s, Slot::Bound(_)) { e } else { 0 })
            .collect();
        let mut rest = vec![0; target.len()];
        for (s, &e) in slots.iter().zip(m) {
            if let Slot::Renamed(j) = s {
                rest[*j] += e;
            }
        }
        groups
            .entry(key)
            .or_insert_with(|| TruncatedSeries::zero(target, profile))
            .add_term(rest, c.clone());
    }

    let mut powers: HashMap<(usize, u32), TruncatedSeries> = HashMap::new();
    let mut power = |i: usize, e: u32, base: &TruncatedSeries| -> TruncatedSeries {
        let mut k = e;
        while k > 0 && !powers.contains_key(&(i, k)) {
            k -= 1;
        }
        let mut acc = if k == 0 {
            TruncatedSeries::one(target, profile)
        } else {
            powers[&(i, k)].clone()
        };
        let base = base.restrict(profile);
        while k < e {
            acc = &acc * &base;
            k += 1;
            powers.insert((i, k), acc.clone());
        }
        acc
    };

    let mut out = TruncatedSeries::zero(target, profile);
    for (key, coeff) in groups {
        let mut prod = coeff;
        for (i, (&e, slot)) in key.iter().zip(&slots).enumerate() {
            if e == 0 {
                continue;
            }
            if let Slot::Bound(s) = slot {
                if prod.is_zero() {
                    break;
                }
                let p = power(i, e, s);
                prod = &prod * &p;
            }
        }
        out = &out + &prod;
    }
    Ok(out)
}

/// Multiplicative inverse of a series with nonzero constant term, by the
/// geometric series in its nilpotent part.
pub fn invert_unit_series(f: &TruncatedSeries) -> Result<TruncatedSeries> {
    let c0 = f.constant_term();
    if c0.is_zero() {
        return Err(Error::NotAUnit);
    }
    let inv0 = c0.recip();
    let one = TruncatedSeries::one(&f.table, &f.profile);
    // f = c0 (1 + r)
    let r = &f.scale(&inv0) - &one;
    let p = &f.profile;
    let progresses = |m: &Monomial| {
        (p.degree_bound.is_some() && f.table.degree(m) > 0)
            || (p.weight_bound.is_some() && f.table.weight(m) > 0)
            || p.caps.iter().zip(m).any(|(c, &e)| c.is_some() && e > 0)
    };
    if let Some((m, _)) = r.terms.iter().find(|(m, _)| !progresses(m)) {
        return Err(Error::NotNilpotent(format!(
            "term {m:?} does not move toward the truncation"
        )));
    }
    let limit = p.degree_bound.unwrap_or(0) as usize
        + p.weight_bound.map_or(0, |w| w as usize + 1)
        + p.caps.iter().flatten().map(|&c| c as usize).sum::<usize>()
        + 1;
    let minus_r = -&r;
    let mut g = one.clone();
    let mut term = one;
    for _ in 0..limit {
        term = &term * &minus_r;
        if term.is_zero() {
            return Ok(g.scale(&inv0));
        }
        g = &g + &term;
    }
    Err(Error::NotNilpotent("geometric series did not terminate".into()))
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        self.try_add(rhs).expect("series over different tables")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.try_sub(rhs).expect("series over different tables")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        poly_mul(self, rhs).expect("series over different tables")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(&int(-1))
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Ascending degree, then descending lexicographic exponents, so that
        // `u` prints before `v`.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            (self.table.degree(a), self.table.weight(a))
                .cmp(&(self.table.degree(b), self.table.weight(b)))
                .then_with(|| b.cmp(a))
        });
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let neg = is_negative(c);
            let mag = abs(c);
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| {
                    let n = self.table.name(j);
                    if e == 1 {
                        n.to_string()
                    } else {
                        format!("{n}^{e}")
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::frac;

    fn uv(n: Option<u32>) -> (Arc<VariableTable>, Profile) {
        let t = VariableTable::new([("beta", -1), ("u", 1), ("v", 1)]).unwrap();
        let p = Profile::exact(3).with_degree_bound(n);
        (t, p)
    }

    #[test]
    fn difference_of_squares() {
        let (t, p) = uv(None);
        let u = TruncatedSeries::var(&t, &p, "u").unwrap();
        let v = TruncatedSeries::var(&t, &p, "v").unwrap();
        let lhs = &(&u + &v) * &(&u - &v);
        let rhs = &(&u * &u) - &(&v * &v);
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.to_string(), "u^2 - v^2");
    }

    #[test]
    fn geometric_product_truncates_to_one() {
        let (t, p) = uv(Some(3));
        let one = TruncatedSeries::one(&t, &p);
        let u = TruncatedSeries::var(&t, &p, "u").unwrap();
        let a = &one + &u;
        let b = &(&one - &u) + &(&u * &u);
        let prod = poly_mul(&a, &b).unwrap();
        assert_eq!(prod, one);
        assert_eq!(prod.len(), 1);
    }

    #[test]
    fn cap_annihilates() {
        let t = VariableTable::new([("z1", 1)]).unwrap();
        let p = Profile::exact(1).with_cap(0, Some(3));
        let z = TruncatedSeries::var(&t, &p, "z1").unwrap();
        assert!((&(&z * &z) * &z).is_zero());
    }

    #[test]
    fn table_mismatch_is_an_error() {
        let (t, p) = uv(None);
        let t2 = VariableTable::new([("x", 1)]).unwrap();
        let a = TruncatedSeries::one(&t, &p);
        let b = TruncatedSeries::one(&t2, &Profile::exact(1));
        assert_eq!(poly_mul(&a, &b).unwrap_err(), Error::TableMismatch);
    }

    #[test]
    fn substitution_examples() {
        let (t, p) = uv(None);
        let u = TruncatedSeries::var(&t, &p, "u").unwrap();
        let v = TruncatedSeries::var(&t, &p, "v").unwrap();
        let f = &u * &u;
        let b = BTreeMap::from([("u".to_string(), &u + &v)]);
        let g = series_substitute(&f, &b, &t, &p).unwrap();
        assert_eq!(g.to_string(), "u^2 + 2*u*v + v^2");

        let b = BTreeMap::from([("u".to_string(), u.clone())]);
        assert_eq!(series_substitute(&f, &b, &t, &p).unwrap(), f);
    }

    #[test]
    fn substituting_zero_into_multiplicative_law() {
        let (t, p) = uv(Some(6));
        let beta = TruncatedSeries::var(&t, &p, "beta").unwrap();
        let u = TruncatedSeries::var(&t, &p, "u").unwrap();
        let v = TruncatedSeries::var(&t, &p, "v").unwrap();
        let f = &(&u + &v) - &(&(&beta * &u) * &v);
        let x_table = VariableTable::new([("beta", -1), ("x", 1)]).unwrap();
        let xp = Profile::degree(2, 6);
        let x = TruncatedSeries::var(&x_table, &xp, "x").unwrap();
        let b = BTreeMap::from([
            ("u".to_string(), x.clone()),
            ("v".to_string(), TruncatedSeries::zero(&x_table, &xp)),
        ]);
        assert_eq!(series_substitute(&f, &b, &x_table, &xp).unwrap(), x);
    }

    #[test]
    fn truncated_series_rejects_unit_substitution() {
        let (t, p) = uv(Some(4));
        let u = TruncatedSeries::var(&t, &p, "u").unwrap();
        let one = TruncatedSeries::one(&t, &p);
        let b = BTreeMap::from([("u".to_string(), &one + &u)]);
        assert_eq!(
            series_substitute(&u, &b, &t, &p).unwrap_err(),
            Error::NonNilpotentSubstitution("u".into())
        );
    }

    #[test]
    fn inversion_examples() {
        let (t, p) = uv(Some(4));
        let one = TruncatedSeries::one(&t, &p);
        let beta = TruncatedSeries::var(&t, &p, "beta").unwrap();
        let u = TruncatedSeries::var(&t, &p, "u").unwrap();
        let bu = &beta * &u;
        let g = invert_unit_series(&(&one - &bu)).unwrap();
        let expected = &(&(&one + &bu) + &bu.pow(2)) + &bu.pow(3);
        assert_eq!(g, expected);

        let two = TruncatedSeries::constant(&t, &p, int(2));
        assert_eq!(
            invert_unit_series(&two).unwrap().constant_term(),
            frac(1, 2)
        );

        let xt = VariableTable::new([("x", 1)]).unwrap();
        let xp = Profile::exact(1).with_cap(0, Some(2));
        let x = TruncatedSeries::var(&xt, &xp, "x").unwrap();
        let one = TruncatedSeries::one(&xt, &xp);
        assert_eq!(invert_unit_series(&(&one + &x)).unwrap(), &one - &x);

        assert_eq!(invert_unit_series(&x).unwrap_err(), Error::NotAUnit);
    }

    #[test]
    fn inversion_needs_a_truncation_to_terminate() {
        let t = VariableTable::new([("x", 1)]).unwrap();
        let p = Profile::exact(1);
        let one = TruncatedSeries::one(&t, &p);
        let x = TruncatedSeries::var(&t, &p, "x").unwrap();
        assert!(matches!(
            invert_unit_series(&(&one + &x)),
            Err(Error::NotNilpotent(_))
        ));
    }

    #[test]
    fn coefficient_lookup() {
        let (t, p) = uv(Some(4));
        let u = TruncatedSeries::var(&t, &p, "u").unwrap();
        let v = TruncatedSeries::var(&t, &p, "v").unwrap();
        let f = &(&u * &u) + &(&u * &v).scale(&int(3));
        assert_eq!(f.coefficient(&[0, 1, 1]).unwrap(), int(3));
        let zero = TruncatedSeries::zero(&t, &p);
        assert_eq!(zero.coefficient(&[0, 2, 0]).unwrap(), int(0));
        let one = TruncatedSeries::one(&t, &p);
        let cube = (&one + &u).pow(3);
        assert_eq!(cube.coefficient(&[0, 2, 0]).unwrap(), int(3));
        assert_eq!(
            cube.coefficient(&[0, 4, 0]).unwrap_err(),
            Error::OutsideProfile(vec![0, 4, 0])
        );
    }
}
