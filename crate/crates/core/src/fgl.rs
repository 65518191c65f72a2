//! Formal group laws: the additive (Chow), multiplicative (K-theory) and
//! universal rational laws, their formal inverses and n-series, and FGL sums
//! of nilpotent ring elements.
//!
//! A law of order `N` is known modulo total degree `N` in `u, v`. Every law
//! here is homogeneous of codegree 1, so a dropped term `a·uⁱvʲ` with
//! `i + j >= N` has a coefficient of weight `i + j - 1 >= N - 1`. That is
//! what lets substitution into a truncated law be read exactly modulo
//! coefficient weight above `N - 2`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{frac, int, series_substitute, Profile, TruncatedSeries, VariableTable};
use crate::error::{Error, Result};

pub const BETA: &str = "beta";

pub fn universal_coefficient_name(i: u32) -> String {
    format!("m{i}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryKind {
    /// Chow groups: F(u,v) = u + v.
    #[serde(alias = "chow")]
    Additive,
    /// K-theory with the Bott element β: F(u,v) = u + v - βuv.
    #[serde(alias = "ktheory", alias = "k")]
    Multiplicative,
    /// The universal law over Q[m₁, m₂, …].
    #[serde(alias = "cobordism")]
    Universal,
}

impl TheoryKind {
    pub const ALL: [TheoryKind; 3] = [
        TheoryKind::Additive,
        TheoryKind::Multiplicative,
        TheoryKind::Universal,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TheoryKind::Additive => "chow",
            TheoryKind::Multiplicative => "ktheory",
            TheoryKind::Universal => "universal",
        }
    }
}

impl fmt::Display for TheoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TheoryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chow" | "additive" => Ok(TheoryKind::Additive),
            "ktheory" | "k" | "multiplicative" => Ok(TheoryKind::Multiplicative),
            "universal" | "cobordism" => Ok(TheoryKind::Universal),
            other => Err(Error::Parse(format!("unknown theory `{other}`"))),
        }
    }
}

/// The series g(u) with F(u, u·g(u)) = 0.
#[derive(Clone, Debug)]
pub struct InverseSeries {
    pub g: TruncatedSeries,
    pub kind: TheoryKind,
    pub order: u32,
    /// Whether F(u, u·g(u)) ≡ 0 mod uᴺ was confirmed after solving.
    pub verified: bool,
}

#[derive(Debug)]
pub struct FormalGroupLaw {
    kind: TheoryKind,
    order: u32,
    coeffs: Arc<VariableTable>,
    law_table: Arc<VariableTable>,
    law: TruncatedSeries,
    series_table: Arc<VariableTable>,
    inverse: InverseSeries,
    n_cache: RwLock<HashMap<i64, TruncatedSeries>>,
}

/// Builds the law of the given kind, truncated at total degree `order`.
pub fn make_fgl(kind: TheoryKind, order: u32) -> Result<Arc<FormalGroupLaw>> {
    if order < 2 {
        return Err(Error::OrderTooSmall(order));
    }
    let coeffs = match kind {
        TheoryKind::Additive => VariableTable::empty(),
        TheoryKind::Multiplicative => VariableTable::new([(BETA, -1)])?,
        TheoryKind::Universal => VariableTable::new(
            (1..order).map(|i| (universal_coefficient_name(i), -(i as i32))),
        )?,
    };
    let law_table = coeffs.extended([("u", 1), ("v", 1)])?;
    let series_table = coeffs.extended([("u", 1)])?;
    let nl = law_table.len();
    let law = match kind {
        TheoryKind::Additive => {
            let p = Profile::exact(nl);
            let u = TruncatedSeries::var(&law_table, &p, "u")?;
            let v = TruncatedSeries::var(&law_table, &p, "v")?;
            &u + &v
        }
        TheoryKind::Multiplicative => {
            let p = Profile::exact(nl);
            let u = TruncatedSeries::var(&law_table, &p, "u")?;
            let v = TruncatedSeries::var(&law_table, &p, "v")?;
            let b = TruncatedSeries::var(&law_table, &p, BETA)?;
            &(&u + &v) - &(&(&b * &u) * &v)
        }
        TheoryKind::Universal => universal_law(&law_table, &series_table, order)?,
    };
    let mut fgl = FormalGroupLaw {
        kind,
        order,
        coeffs,
        law_table,
        law,
        series_table,
        inverse: InverseSeries {
            g: TruncatedSeries::zero(&VariableTable::empty(), &Profile::exact(0)),
            kind,
            order,
            verified: false,
        },
        n_cache: RwLock::new(HashMap::new()),
    };
    fgl.inverse = formal_inverse(&fgl)?;
    Ok(Arc::new(fgl))
}

/// ℓ⁻¹(ℓ(u) + ℓ(v)) with ℓ(u) = u + m₁u² + … over the free coefficients.
fn universal_law(
    law_table: &Arc<VariableTable>,
    series_table: &Arc<VariableTable>,
    order: u32,
) -> Result<TruncatedSeries> {
    let sp = Profile::degree(series_table.len(), order);
    let u = TruncatedSeries::var(series_table, &sp, "u")?;
    let coeff = |i: u32| TruncatedSeries::var(series_table, &sp, &universal_coefficient_name(i));

    // Reversion of ℓ by the fixed point r = u - Σ mᵢ r^{i+1}; each pass fixes
    // one more degree.
    let mut rev = u.clone();
    for _ in 0..order {
        let mut next = u.clone();
        let mut power = rev.clone();
        for i in 1..order.saturating_sub(1) {
            power = &power * &rev;
            if power.is_zero() {
                break;
            }
            next = &next - &(&coeff(i)? * &power);
        }
        rev = next;
    }

    let lp = Profile::degree(law_table.len(), order);
    let log_of = |name: &str| -> Result<TruncatedSeries> {
        let x = TruncatedSeries::var(law_table, &lp, name)?;
        let mut acc = x.clone();
        let mut power = x.clone();
        for i in 1..order {
            power = &power * &x;
            if power.is_zero() {
                break;
            }
            let m = TruncatedSeries::var(law_table, &lp, &universal_coefficient_name(i))?;
            acc = &acc + &(&m * &power);
        }
        Ok(acc)
    };
    let sum = &log_of("u")? + &log_of("v")?;
    series_substitute(&rev, &BTreeMap::from([("u".to_string(), sum)]), law_table, &lp)
}

/// Solves F(u, u·g(u)) = 0 degree by degree and checks the result.
pub fn formal_inverse(fgl: &FormalGroupLaw) -> Result<InverseSeries> {
    let n = fgl.order;
    let st = &fgl.series_table;
    let sp = Profile::degree(st.len(), n);
    let u = TruncatedSeries::var(st, &sp, "u")?;
    let lt = &fgl.law_table;
    let lp = fgl.law.profile().clone();
    let uu = TruncatedSeries::var(lt, &lp, "u")?;
    let vv = TruncatedSeries::var(lt, &lp, "v")?;
    // Higher part H = F - u - v; the inverse y = u·g(u) solves y = -u - H(u, y).
    let higher = &(&fgl.law - &uu) - &vv;
    let mut y = -&u;
    for _ in 0..n {
        let h = series_substitute(
            &higher,
            &BTreeMap::from([("u".to_string(), u.clone()), ("v".to_string(), y.clone())]),
            st,
            &sp,
        )?;
        y = &(-&u) - &h;
    }
    let g = divide_by_u(&y, st, n - 1)?;
    let verified = inverse_identity_holds(fgl, &g)?;
    if !verified {
        return Err(Error::InverseVerification(
            "F(u, u g(u)) is not zero modulo the truncation".into(),
        ));
    }
    if g.constant_term() != int(-1) {
        return Err(Error::InverseVerification("g(0) != -1".into()));
    }
    Ok(InverseSeries {
        g,
        kind: fgl.kind,
        order: n,
        verified,
    })
}

/// Checks F(u, u·g(u)) ≡ 0 mod uᴺ for a candidate `g`.
pub fn inverse_identity_holds(fgl: &FormalGroupLaw, g: &TruncatedSeries) -> Result<bool> {
    let st = &fgl.series_table;
    let sp = Profile::degree(st.len(), fgl.order);
    let u = TruncatedSeries::var(st, &sp, "u")?;
    let ug = &u * &g.reprofile(&sp);
    let val = series_substitute(
        &fgl.law,
        &BTreeMap::from([("u".to_string(), u), ("v".to_string(), ug)]),
        st,
        &sp,
    )?;
    Ok(val.is_zero())
}

fn divide_by_u(y: &TruncatedSeries, st: &Arc<VariableTable>, bound: u32) -> Result<TruncatedSeries> {
    let ui = st.len() - 1;
    let p = Profile::degree(st.len(), bound);
    let mut g = TruncatedSeries::zero(st, &p);
    for (m, c) in y.terms() {
        if m[ui] == 0 {
            return Err(Error::InverseVerification("u does not divide u g(u)".into()));
        }
        let mut e = m.clone();
        e[ui] -= 1;
        g.add_term(e, c.clone());
    }
    Ok(g)
}

impl FormalGroupLaw {
    pub fn kind(&self) -> TheoryKind {
        self.kind
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// The coefficient variables: none, {β}, or {m₁, …, m_{N-1}}.
    pub fn coefficient_table(&self) -> &Arc<VariableTable> {
        &self.coeffs
    }

    /// Table of F: coefficients, then `u`, `v`.
    pub fn law_table(&self) -> &Arc<VariableTable> {
        &self.law_table
    }

    /// Table of one-variable series: coefficients, then `u`.
    pub fn series_table(&self) -> &Arc<VariableTable> {
        &self.series_table
    }

    pub fn law(&self) -> &TruncatedSeries {
        &self.law
    }

    pub fn inverse(&self) -> &InverseSeries {
        &self.inverse
    }

    /// Whether F itself is a polynomial (no truncated tail).
    pub fn law_is_exact(&self) -> bool {
        self.kind != TheoryKind::Universal
    }

    /// Weight above which FGL-derived series are unreliable, when the
    /// target truncation does not already hide the dropped tail.
    pub fn weight_horizon(&self) -> Option<u32> {
        match self.kind {
            TheoryKind::Additive => None,
            _ => Some(self.order - 2),
        }
    }

    /// [n]_F(u) as a series in `u` modulo uᴺ.
    pub fn n_series(&self, n: i64) -> Result<TruncatedSeries> {
        if let Some(s) = self.n_cache.read().unwrap().get(&n) {
            return Ok(s.clone());
        }
        let st = &self.series_table;
        let sp = Profile::degree(st.len(), self.order);
        let u = TruncatedSeries::var(st, &sp, "u")?;
        let s = if n == 0 {
            TruncatedSeries::zero(st, &sp)
        } else if n > 0 {
            let prev = self.n_series(n - 1)?;
            if n == 1 {
                u
            } else {
                self.substitute_law(&prev, &u, st, &sp)?
            }
        } else {
            // [-n](u) = [n](u g(u))
            let ug = &u * &self.inverse.g.reprofile(&sp);
            let pos = self.n_series(-n)?;
            series_substitute(&pos, &BTreeMap::from([("u".to_string(), ug)]), st, &sp)?
        };
        self.n_cache.write().unwrap().insert(n, s.clone());
        Ok(s)
    }

    fn substitute_law(
        &self,
        a: &TruncatedSeries,
        b: &TruncatedSeries,
        target: &Arc<VariableTable>,
        profile: &Profile,
    ) -> Result<TruncatedSeries> {
        series_substitute(
            &self.law,
            &BTreeMap::from([("u".to_string(), a.clone()), ("v".to_string(), b.clone())]),
            target,
            profile,
        )
    }

    /// Whether an n-series is a polynomial rather than a truncated tail.
    pub(crate) fn n_series_is_exact(&self, n: i64) -> bool {
        match self.kind {
            TheoryKind::Additive => true,
            TheoryKind::Multiplicative => n >= 0 && n < self.order as i64,
            TheoryKind::Universal => n == 0 || n == 1,
        }
    }

    /// Profile for the result of pushing arguments through a law-derived
    /// series: if the arguments' degrees push the dropped tail past the
    /// target's own degree bound nothing is lost, otherwise results are
    /// exact only modulo weight above N - 2.
    pub(crate) fn precision(&self, base: &Profile, args: &[&TruncatedSeries], exact: bool) -> Profile {
        if exact {
            return base.clone();
        }
        let d = args.iter().filter_map(|a| a.min_degree()).min();
        match (base.degree_bound, d) {
            (_, None) => base.clone(),
            (Some(b), Some(d)) if d >= 1 && b <= self.order * d => base.clone(),
            _ => {
                let horizon = self.weight_horizon();
                let w = match (base.weight_bound, horizon) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, None) => a,
                    (None, b) => b,
                };
                base.clone().with_weight_bound(w)
            }
        }
    }

    /// F(a, b) for elements with zero constant term.
    pub fn fgl_add(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        for (name, s) in [("a", a), ("b", b)] {
            if !s.constant_term().is_zero() {
                return Err(Error::NonNilpotentSubstitution(name.into()));
            }
        }
        let base = a.profile().coarsen(b.profile());
        let profile = self.precision(&base, &[a, b], self.law_is_exact());
        self.substitute_law(a, b, a.table(), &profile)
    }

    /// Evaluates a one-variable law-derived series (over [`Self::series_table`])
    /// at `x`.
    pub fn apply(&self, s: &TruncatedSeries, x: &TruncatedSeries, exact: bool) -> Result<TruncatedSeries> {
        if !x.constant_term().is_zero() {
            return Err(Error::NonNilpotentSubstitution("u".into()));
        }
        let profile = self.precision(x.profile(), &[x], exact);
        series_substitute(s, &BTreeMap::from([("u".to_string(), x.clone())]), x.table(), &profile)
    }

    /// [n]_F(x), the first Chern class of the n-th tensor power.
    pub fn apply_n_series(&self, n: i64, x: &TruncatedSeries) -> Result<TruncatedSeries> {
        if n == 1 {
            return Ok(x.clone());
        }
        let s = self.n_series(n)?;
        self.apply(&s, x, self.n_series_is_exact(n))
    }

    /// x·g(x), the first Chern class of the dual line.
    pub fn dual(&self, x: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.apply_n_series(-1, x)
    }

    /// g(x) itself.
    pub fn apply_inverse_factor(&self, x: &TruncatedSeries) -> Result<TruncatedSeries> {
        let exact = self.kind == TheoryKind::Additive;
        self.apply(&self.inverse.g, x, exact)
    }
}

/// Pushes a series over the universal coefficients to the additive or
/// multiplicative law: mᵢ ↦ 0, respectively mᵢ ↦ βⁱ/(i+1), the
/// coefficients of -log(1-βu)/β.
pub fn specialize_universal(x: &TruncatedSeries, target: TheoryKind) -> Result<TruncatedSeries> {
    let table = x.table();
    let is_m = |name: &str| {
        name.strip_prefix('m')
            .and_then(|d| d.parse::<u32>().ok())
            .filter(|&i| i >= 1)
    };
    let keep: Vec<(String, i32)> = table
        .vars()
        .iter()
        .filter(|v| is_m(&v.name).is_none())
        .map(|v| (v.name.clone(), v.codegree))
        .collect();
    let mut target_vars = Vec::new();
    match target {
        TheoryKind::Additive => {}
        TheoryKind::Multiplicative => {
            if keep.iter().any(|(n, _)| n == BETA) {
                return Err(Error::TableCollision(BETA.into()));
            }
            target_vars.push((BETA.to_string(), -1));
        }
        TheoryKind::Universal => {
            return Err(Error::TheoryMismatch(
                "specialization target must be additive or multiplicative".into(),
            ))
        }
    }
    target_vars.extend(keep);
    let target_table = VariableTable::new(target_vars)?;
    let mut caps = vec![None; target_table.len()];
    for (i, v) in table.vars().iter().enumerate() {
        if let Some(j) = target_table.index_of(&v.name) {
            caps[j] = x.profile().caps[i];
        }
    }
    let profile = Profile {
        degree_bound: x.profile().degree_bound,
        weight_bound: x.profile().weight_bound,
        caps,
    };
    let beta_index = target_table.index_of(BETA);
    let mut out = TruncatedSeries::zero(&target_table, &profile);
    'terms: for (m, c) in x.terms() {
        let mut e = vec![0; target_table.len()];
        let mut coeff = c.clone();
        for (i, &k) in m.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let name = table.name(i);
            match is_m(name) {
                Some(idx) => match beta_index {
                    None => continue 'terms,
                    Some(b) => {
                        e[b] += idx * k;
                        for _ in 0..k {
                            coeff *= frac(1, idx as i64 + 1);
                        }
                    }
                },
                None => {
                    let j = target_table.index_of(name).expect("kept variable");
                    e[j] += k;
                }
            }
        }
        out.add_term(e, coeff);
    }
    Ok(out)
}

/// Convenience: F(u, 0) for checking the unit axiom.
pub fn law_with_zero(fgl: &FormalGroupLaw) -> Result<TruncatedSeries> {
    let st = &fgl.series_table;
    let sp = Profile::degree(st.len(), fgl.order);
    let u = TruncatedSeries::var(st, &sp, "u")?;
    let zero = TruncatedSeries::zero(st, &sp);
    fgl.substitute_law(&u, &zero, st, &sp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rational;

    fn coeffs_in_u(s: &TruncatedSeries) -> BTreeMap<u32, String> {
        // u-exponent -> printed coefficient
        let ui = s.table().len() - 1;
        let mut out: BTreeMap<u32, Vec<(Vec<u32>, Rational)>> = BTreeMap::new();
        for (m, c) in s.terms() {
            let mut rest = m.clone();
            rest[ui] = 0;
            out.entry(m[ui]).or_default().push((rest, c.clone()));
        }
        out.into_iter()
            .map(|(k, v)| {
                let p = Profile::exact(s.table().len());
                let t = TruncatedSeries::from_terms(s.table(), &p, v);
                (k, t.to_string())
            })
            .collect()
    }

    #[test]
    fn order_below_two_rejected() {
        assert_eq!(
            make_fgl(TheoryKind::Additive, 1).unwrap_err(),
            Error::OrderTooSmall(1)
        );
    }

    #[test]
    fn built_in_laws() {
        for n in [2, 5, 9] {
            assert_eq!(make_fgl(TheoryKind::Additive, n).unwrap().law().to_string(), "u + v");
        }
        let k = make_fgl(TheoryKind::Multiplicative, 3).unwrap();
        assert_eq!(k.law().to_string(), "u + v - beta*u*v");
    }

    #[test]
    fn universal_uv_coefficient_is_minus_two_m1() {
        let f = make_fgl(TheoryKind::Universal, 3).unwrap();
        // table: m1, m2, u, v
        assert_eq!(f.law().coefficient(&[1, 0, 1, 1]).unwrap(), int(-2));
    }

    #[test]
    fn inverse_series_examples() {
        let add = make_fgl(TheoryKind::Additive, 6).unwrap();
        assert_eq!(add.inverse().g.to_string(), "-1");

        let k = make_fgl(TheoryKind::Multiplicative, 5).unwrap();
        let g = &k.inverse().g;
        assert_eq!(g.to_string(), "-1 - beta*u - beta^2*u^2 - beta^3*u^3");
        assert!(g.coefficient(&[4, 4]).is_err());
        assert!(k.inverse().verified);

        let uni = make_fgl(TheoryKind::Universal, 6).unwrap();
        assert_eq!(uni.inverse().g.constant_term(), int(-1));
    }

    #[test]
    fn n_series_examples() {
        let add = make_fgl(TheoryKind::Additive, 5).unwrap();
        assert_eq!(add.n_series(7).unwrap().to_string(), "7*u");
        let k = make_fgl(TheoryKind::Multiplicative, 5).unwrap();
        assert_eq!(k.n_series(2).unwrap().to_string(), "2*u - beta*u^2");
        let k4 = make_fgl(TheoryKind::Multiplicative, 4).unwrap();
        assert_eq!(
            k4.n_series(-1).unwrap().to_string(),
            "-u - beta*u^2 - beta^2*u^3"
        );
        assert!(k.n_series(0).unwrap().is_zero());
        let m = coeffs_in_u(&k.n_series(3).unwrap());
        assert_eq!(m[&1], "3");
    }

    #[test]
    fn specialization_of_a_coefficient() {
        let f = make_fgl(TheoryKind::Universal, 4).unwrap();
        let st = f.coefficient_table().clone();
        let p = Profile::exact(st.len());
        let m1 = TruncatedSeries::var(&st, &p, "m1").unwrap();
        let k = specialize_universal(&m1, TheoryKind::Multiplicative).unwrap();
        assert_eq!(k.to_string(), "1/2*beta");
        let a = specialize_universal(&m1, TheoryKind::Additive).unwrap();
        assert!(a.is_zero());
    }

    #[test]
    fn specialization_collides_with_existing_beta() {
        let t = VariableTable::new([("beta", -1), ("m1", -1)]).unwrap();
        let x = TruncatedSeries::one(&t, &Profile::exact(2));
        assert_eq!(
            specialize_universal(&x, TheoryKind::Multiplicative).unwrap_err(),
            Error::TableCollision(BETA.into())
        );
    }
}
