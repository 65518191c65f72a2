//! Fractions with symbolic character denominators.
//!
//! An element is `num / Π [μ]_F(ζ)^e` where every μ is a canonical nonzero
//! character. The numerator lives in a truncated equivariant ring, so a
//! verdict about the value is only trustworthy while no relevant term has been
//! lost to the ζ caps. Every element therefore carries a bound on the
//! codegree of its value, and an element is *sound* when
//!
//! ```text
//! codegree + W + (total denominator exponent) + 1 <= cap
//! ```
//!
//! with `W` the ring's coefficient-weight horizon. Then the numerator has
//! ζ-degree below the cap and is exact modulo weight above `W`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{invert_unit_series, same_table, Profile, Rational, TruncatedSeries};
use crate::error::{Error, Result};
use crate::fgl::{make_fgl, specialize_universal, TheoryKind};
use crate::space::{BundleSpec, IntersectionRing, LineSummand};

use super::torus::Character;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocOp {
    Add,
    Mul,
}

#[derive(Clone, Debug)]
pub struct LocalizedElement {
    ring: Arc<IntersectionRing>,
    num: TruncatedSeries,
    den: BTreeMap<Character, u32>,
    /// Bound on the codegree of the value; `None` for zero.
    codeg: Option<i64>,
    /// Unchecked elements skip the soundness bookkeeping in
    /// [`loc_combine`]; used to compare raw computations across caps.
    checked: bool,
}

fn check_equivariant(ring: &IntersectionRing) -> Result<()> {
    if ring.torus().is_none() {
        return Err(Error::InvalidTask("localized elements need an equivariant ring".into()));
    }
    Ok(())
}

/// c₁ᵀ(k(λ)) in an equivariant ring.
pub fn char_c1(lambda: &Character, ring: &IntersectionRing) -> Result<TruncatedSeries> {
    ring.character_class(lambda)
}

impl LocalizedElement {
    /// A polynomial element of value codegree at most `codeg`.
    pub fn new(ring: &Arc<IntersectionRing>, num: TruncatedSeries, codeg: i64) -> Result<Self> {
        check_equivariant(ring)?;
        if !same_table(num.table(), ring.table()) {
            return Err(Error::TableMismatch);
        }
        let codeg = if num.is_zero() { None } else { Some(codeg) };
        Ok(Self {
            ring: ring.clone(),
            num: num.reprofile(ring.profile()),
            den: BTreeMap::new(),
            codeg,
            checked: true,
        })
    }

    /// The same element with soundness checks and cap raising disabled.
    pub fn unchecked(mut self) -> Self {
        self.checked = false;
        self
    }

    pub fn is_checked(&self) -> bool {
        self.checked
    }

    pub fn zero(ring: &Arc<IntersectionRing>) -> Result<Self> {
        Self::new(ring, ring.zero(), 0)
    }

    pub fn one(ring: &Arc<IntersectionRing>) -> Result<Self> {
        Self::new(ring, ring.one(), 0)
    }

    /// `num / Π [λ]^e` for arbitrary nonzero λ; negative representatives are
    /// rewritten through [−μ](ζ) = [μ](ζ)·g([μ](ζ)).
    pub fn with_denominator(
        ring: &Arc<IntersectionRing>,
        num: TruncatedSeries,
        den: impl IntoIterator<Item = (Character, u32)>,
        codeg: i64,
    ) -> Result<Self> {
        let mut out = Self::new(ring, num, codeg)?;
        let mut value_codeg = codeg;
        for (lambda, e) in den {
            if e == 0 {
                continue;
            }
            if lambda.is_zero() {
                return Err(Error::ZeroCharacter);
            }
            let (mu, flipped) = lambda.canonical();
            if flipped {
                let unit = flip_unit(ring, &mu)?;
                let u = ring.pow(&unit, e)?;
                out.num = ring.mul(&out.num, &u)?;
            }
            *out.den.entry(mu).or_insert(0) += e;
            value_codeg -= e as i64;
        }
        if out.codeg.is_some() {
            out.codeg = Some(value_codeg);
        }
        Ok(out)
    }

    /// 1/[λ]_F(ζ).
    pub fn inverse_character(ring: &Arc<IntersectionRing>, lambda: &Character) -> Result<Self> {
        Self::with_denominator(ring, ring.one(), [(lambda.clone(), 1)], 0)
    }

    pub fn ring(&self) -> &Arc<IntersectionRing> {
        &self.ring
    }

    pub fn numerator(&self) -> &TruncatedSeries {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<Character, u32> {
        &self.den
    }

    pub fn codegree(&self) -> Option<i64> {
        self.codeg
    }

    pub fn den_degree(&self) -> u32 {
        self.den.values().sum()
    }

    pub fn cap(&self) -> u32 {
        self.ring.cap().expect("equivariant ring")
    }

    /// Smallest cap at which this element would be sound.
    pub fn required_cap(&self) -> u32 {
        match self.codeg {
            None => 0,
            Some(c) => {
                let need = c + self.ring.weight_horizon() as i64 + self.den_degree() as i64 + 1;
                need.max(0) as u32
            }
        }
    }

    pub fn is_sound(&self) -> bool {
        self.required_cap() <= self.cap()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Π [μ]_F(ζ)^e as a ring element.
    pub fn denominator_series(&self) -> Result<TruncatedSeries> {
        let mut acc = self.ring.one();
        for (mu, &e) in &self.den {
            let c = self.ring.character_class(mu)?;
            acc = self.ring.mul(&acc, &self.ring.pow(&c, e)?)?;
        }
        Ok(acc)
    }

    /// Moves a sound element to an equivalent ring with a larger cap.
    pub fn move_to(&self, ring: &Arc<IntersectionRing>) -> Result<Self> {
        if Arc::ptr_eq(ring, &self.ring) {
            return Ok(self.clone());
        }
        if !same_table(ring.table(), self.ring.table()) {
            return Err(Error::TableMismatch);
        }
        if ring.cap() < self.ring.cap() {
            return Err(Error::InvalidTask("cannot move an element to a smaller cap".into()));
        }
        if !self.is_sound() {
            return Err(Error::InsufficientTruncation(format!(
                "element needs cap {} but was computed at cap {}",
                self.required_cap(),
                self.cap()
            )));
        }
        Ok(Self {
            ring: ring.clone(),
            num: self.num.reprofile(ring.profile()),
            den: self.den.clone(),
            codeg: self.codeg,
            checked: self.checked,
        })
    }

    /// Multiplies the numerator by [μ]^k for each missing denominator power.
    fn expand_to(&self, den: &BTreeMap<Character, u32>) -> Result<TruncatedSeries> {
        let mut num = self.num.clone();
        for (mu, &e) in den {
            let have = self.den.get(mu).copied().unwrap_or(0);
            if e > have {
                let c = self.ring.character_class(mu)?;
                num = self.ring.mul(&num, &self.ring.pow(&c, e - have)?)?;
            }
        }
        Ok(num)
    }

    fn combine_in_place(op: LocOp, a: &Self, b: &Self) -> Result<Self> {
        let ring = &a.ring;
        match op {
            LocOp::Add => {
                let mut den = a.den.clone();
                for (mu, &e) in &b.den {
                    let slot = den.entry(mu.clone()).or_insert(0);
                    *slot = (*slot).max(e);
                }
                let num = &a.expand_to(&den)? + &b.expand_to(&den)?;
                let codeg = match (a.codeg, b.codeg) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, None) => x,
                    (None, y) => y,
                };
                Ok(Self {
                    ring: ring.clone(),
                    num,
                    den,
                    codeg,
                    checked: a.checked && b.checked,
                })
            }
            LocOp::Mul => {
                let mut den = a.den.clone();
                for (mu, &e) in &b.den {
                    *den.entry(mu.clone()).or_insert(0) += e;
                }
                let codeg = match (a.codeg, b.codeg) {
                    (Some(x), Some(y)) => Some(x + y),
                    _ => None,
                };
                let num = if codeg.is_none() {
                    ring.zero()
                } else {
                    ring.mul(&a.num, &b.num)?
                };
                let den = if codeg.is_none() { BTreeMap::new() } else { den };
                Ok(Self {
                    ring: ring.clone(),
                    num,
                    den,
                    codeg,
                    checked: a.checked && b.checked,
                })
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        loc_combine(LocOp::Add, self, other)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        loc_combine(LocOp::Mul, self, other)
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -&self.num,
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Multiplies the numerator by a ring element of codegree at most `codeg`.
    pub fn mul_series(&self, s: &TruncatedSeries, codeg: i64) -> Result<Self> {
        let other = Self::new(&self.ring, s.clone(), codeg)?;
        self.mul(&other)
    }

    /// Integrates the numerator over the ring's space, landing in `point`,
    /// the equivariant ring of a point with the same torus.
    pub fn push_to_point(&self, point: &Arc<IntersectionRing>) -> Result<Self> {
        let scalar = self.ring.integrate(&self.num)?;
        let num = point.scalar_into_ring(&scalar.reprofile(point.scalar_profile()))?;
        let dim = self.ring.dim() as i64;
        Ok(Self {
            ring: point.clone(),
            num: num.reprofile(point.profile()),
            den: self.den.clone(),
            codeg: if num.is_zero() { None } else { self.codeg.map(|c| c - dim) },
            checked: self.checked,
        })
    }

    /// The numerator with every ζ exponent below `cap`.
    pub fn numerator_below(&self, cap: u32) -> TruncatedSeries {
        let mut p: Profile = self.ring.profile().clone();
        let ring = &self.ring;
        let k = ring.generator_count();
        let ncoeff = ring.table().len() - k - ring.torus_rank();
        for l in 0..ring.torus_rank() {
            p.caps[ncoeff + k + l] = Some(cap);
        }
        self.num.restrict(&p)
    }

    /// Agreement after writing both over a common denominator and cutting
    /// the numerators down to `cap`. A numerator that truncated to zero has
    /// lost its denominator, hence the common one.
    pub fn agrees_below(&self, other: &Self, cap: u32) -> bool {
        if !same_table(self.ring.table(), other.ring.table()) {
            return false;
        }
        let mut den = self.den.clone();
        for (mu, &e) in &other.den {
            let slot = den.entry(mu.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        let cut = |x: &Self| -> Result<TruncatedSeries> {
            let num = x.expand_to(&den)?;
            Ok(Self { num, ..x.clone() }.numerator_below(cap))
        };
        match (cut(self), cut(other)) {
            (Ok(a), Ok(b)) => a.equals(&b),
            _ => false,
        }
    }

    /// The polynomial this element equals, if the denominator divides the
    /// numerator exactly. Only defined on the ring of a point.
    pub fn polynomial_value(&self) -> Result<Option<TruncatedSeries>> {
        let ring = &self.ring;
        if ring.generator_count() > 0 {
            return Err(Error::InvalidTask(
                "push the element to a point before reading off its value".into(),
            ));
        }
        if self.checked && !self.is_sound() {
            return Err(Error::InsufficientTruncation(format!(
                "element needs cap {} but was computed at cap {}",
                self.required_cap(),
                self.cap()
            )));
        }
        let z0 = ring.table().len() - ring.torus_rank();
        let mut q = self.num.clone();
        for (mu, &e) in &self.den {
            let s = ring.character_class(mu)?;
            for _ in 0..e {
                match divide_by_character(ring, &q, &s, mu.coords(), z0)? {
                    Some(x) => q = x,
                    None => return Ok(None),
                }
            }
        }
        let value = ring.integrate(&q)?;
        if !self.checked {
            return Ok(Some(value));
        }
        Ok(assert_constant(self, &value)?.then_some(value))
    }

    /// Reads off the constant this element equals, if it is denominator-free
    /// and has no torus-parameter dependence.
    pub fn constant_value(&self) -> Result<Option<TruncatedSeries>> {
        let zr = self.ring.scalar_zeta_range();
        Ok(self
            .polynomial_value()?
            .filter(|q| q.terms().all(|(m, _)| m[zr.clone()].iter().all(|&e| e == 0))))
    }

    /// The part of a scalar with no torus parameters, i.e. its restriction
    /// along ζ = 0.
    pub fn non_equivariant_part(&self, s: &TruncatedSeries) -> TruncatedSeries {
        let zr = self.ring.scalar_zeta_range();
        let mut out = self.ring.scalar_zero();
        for (m, c) in s.terms() {
            if m[zr.clone()].iter().all(|&e| e == 0) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Pushes a universal-theory element to the additive or multiplicative
    /// theory along mᵢ ↦ 0, resp. mᵢ ↦ βⁱ/(i+1).
    pub fn specialize(&self, target: TheoryKind) -> Result<Self> {
        let ring = &self.ring;
        if ring.kind() != TheoryKind::Universal {
            return Err(Error::TheoryMismatch(format!(
                "specialization starts from the universal theory, not {}",
                ring.kind()
            )));
        }
        let fgl = make_fgl(target, ring.fgl().order())?;
        let tring = IntersectionRing::build(
            &fgl,
            ring.model(),
            ring.torus().cloned(),
            ring.profile().weight_bound,
        )?;
        let num = specialize_universal(&self.num, target)?;
        if !same_table(num.table(), tring.table()) {
            return Err(Error::TableMismatch);
        }
        Ok(Self {
            num: num.reprofile(tring.profile()),
            ring: tring,
            den: self.den.clone(),
            codeg: self.codeg,
            checked: self.checked,
        })
    }
}

/// Exact quotient `x / s` where `s = [μ](ζ)` has linear part `Σ μ_l ζ_l`,
/// or `None` if `s` does not divide `x`. Works upward in ζ-degree, dividing
/// each lowest part by the linear form.
fn divide_by_character(
    ring: &IntersectionRing,
    x: &TruncatedSeries,
    s: &TruncatedSeries,
    mu: &[i64],
    z0: usize,
) -> Result<Option<TruncatedSeries>> {
    let Some(p) = mu.iter().position(|&a| a != 0) else {
        return Err(Error::ZeroCharacter);
    };
    let zdeg = |m: &[u32]| -> u32 { m[z0..].iter().sum() };
    let lead = Rational::from_integer(mu[p].into());
    let mut q = ring.zero();
    let mut r = x.clone();
    while let Some(d) = r.terms().map(|(m, _)| zdeg(m)).min() {
        let mut part: BTreeMap<Vec<u32>, Rational> = r
            .terms()
            .filter(|(m, _)| zdeg(m) == d)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        let mut quot = ring.zero();
        while let Some((m, c)) = part
            .iter()
            .filter(|(m, _)| m[z0 + p] > 0)
            .max_by_key(|(m, _)| m[z0 + p])
            .map(|(m, c)| (m.clone(), c.clone()))
        {
            let mut base = m;
            base[z0 + p] -= 1;
            let a = &c / &lead;
            for (l, &w) in mu.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                let mut t = base.clone();
                t[z0 + l] += 1;
                let slot = part.entry(t.clone()).or_insert_with(Rational::zero);
                *slot -= &a * Rational::from_integer(w.into());
                if slot.is_zero() {
                    part.remove(&t);
                }
            }
            quot.add_term(base, a);
        }
        if !part.is_empty() {
            return Ok(None);
        }
        r = &r - &ring.mul(&quot, s)?;
        q = &q + &quot;
        if r.terms().any(|(m, _)| zdeg(m) <= d) {
            return Ok(None);
        }
    }
    Ok(Some(q))
}

/// `g([μ](ζ))⁻¹`, the correction for writing 1/[−μ] over [μ].
fn flip_unit(ring: &IntersectionRing, mu: &Character) -> Result<TruncatedSeries> {
    let c = ring.character_class(mu)?;
    let g = ring.inverse_factor(&c)?;
    invert_unit_series(&g)
}

/// Sum or product in R[𝒬⁻¹], raising the cap when the inputs are sound but
/// the result would not be.
pub fn loc_combine(op: LocOp, a: &LocalizedElement, b: &LocalizedElement) -> Result<LocalizedElement> {
    if a.ring.kind() != b.ring.kind() || !same_table(a.ring.table(), b.ring.table()) {
        return Err(Error::TheoryMismatch("operands live in different rings".into()));
    }
    let (a, b) = match a.cap().cmp(&b.cap()) {
        std::cmp::Ordering::Less => (a.move_to(&b.ring)?, b.clone()),
        std::cmp::Ordering::Greater => (a.clone(), b.move_to(&a.ring)?),
        std::cmp::Ordering::Equal => (a.clone(), b.clone()),
    };
    let out = LocalizedElement::combine_in_place(op, &a, &b)?;
    if out.is_sound() || !out.checked {
        return Ok(out);
    }
    let needed = out.required_cap();
    if !(a.is_sound() && b.is_sound()) {
        return Err(Error::InsufficientTruncation(format!(
            "result needs cap {needed}, operands were computed at cap {} without headroom",
            a.cap()
        )));
    }
    let max = a.ring.torus().map_or(0, |t| t.max_cap);
    if needed > max {
        return Err(Error::TruncationCeiling {
            needed,
            ceiling: max,
        });
    }
    let ring = a.ring.with_cap(needed)?;
    let a = a.move_to(&ring)?;
    let b = b.move_to(&ring)?;
    LocalizedElement::combine_in_place(op, &a, &b)
}

/// e(N)⁻¹ for a bundle whose summands all carry nonzero characters.
///
/// Each factor (c +_F x)⁻¹ with c = [λ]_F(ζ) is written as
/// Σ_{k≤K} (−1)ᵏ nᵏ c^{K−k} / c^{K+1}, where n = (c +_F x) − c is nilpotent
/// with n^{K+1} = 0.
pub fn invert_equivariant_euler(n: &BundleSpec, ring: &Arc<IntersectionRing>) -> Result<LocalizedElement> {
    invert_euler_with(n, ring, true)
}

pub(crate) fn invert_euler_with(
    n: &BundleSpec,
    ring: &Arc<IntersectionRing>,
    checked: bool,
) -> Result<LocalizedElement> {
    let mut acc = LocalizedElement::one(ring)?;
    acc.checked = checked;
    for s in &n.summands {
        let lambda = Character::new(s.character.clone());
        if lambda.is_zero() {
            return Err(Error::ZeroCharacter);
        }
        let c = ring.character_class(&lambda)?;
        let total = ring.line_class(s)?;
        let nil = &total - &c;
        let k = match ring.nilpotency_of(&nil) {
            Ok(k) => k - 1,
            Err(Error::NotNilpotent(m)) => {
                return Err(Error::NotNilpotent(format!("nilpotency bound not established for {m}")))
            }
            Err(e) => return Err(e),
        };
        let mut num = ring.zero();
        let mut npow = ring.one();
        for i in 0..=k {
            let t = ring.mul(&npow, &ring.pow(&c, k - i)?)?;
            num = if i % 2 == 0 { &num + &t } else { &num - &t };
            npow = ring.mul(&npow, &nil)?;
        }
        let mut factor = LocalizedElement::with_denominator(ring, num, [(lambda, k + 1)], k as i64)?;
        factor.checked = checked;
        acc = acc.mul(&factor)?;
    }
    Ok(acc)
}

/// Whether `a` equals the scalar `c`, decided by cross-multiplication.
pub fn assert_constant(a: &LocalizedElement, c: &TruncatedSeries) -> Result<bool> {
    let ring = &a.ring;
    let cr = if same_table(c.table(), ring.scalar_table()) {
        ring.scalar_into_ring(c)?
    } else if same_table(c.table(), ring.table()) {
        c.clone()
    } else {
        return Err(Error::TableMismatch);
    };
    for (m, _) in cr.terms() {
        if !ring.profile().admits(ring.table(), m) {
            return Err(Error::InsufficientTruncation(format!(
                "constant {c} is not representable at this truncation"
            )));
        }
    }
    if c.terms().count() != cr.terms().count() {
        return Err(Error::InsufficientTruncation(format!(
            "constant {c} is not representable at this truncation"
        )));
    }
    let c_codeg = cr.max_codegree();
    let codeg = match (a.codeg, c_codeg) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    };
    if let Some(v) = codeg {
        let need = v + ring.weight_horizon() as i64 + a.den_degree() as i64 + 1;
        if need > a.cap() as i64 {
            return Err(Error::InsufficientTruncation(format!(
                "verdict needs cap {need}, element was computed at cap {}",
                a.cap()
            )));
        }
    }
    let rhs = ring.mul(&cr, &a.denominator_series()?)?;
    Ok(a.num.equals(&rhs))
}

impl fmt::Display for LocalizedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({}) / ", self.num)?;
        let parts: Vec<String> = self
            .den
            .iter()
            .map(|(mu, &e)| {
                if e == 1 {
                    format!("[{mu}]")
                } else {
                    format!("[{mu}]^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Convenience: the line summand of a bare character.
pub fn character_line(lambda: &Character) -> LineSummand {
    LineSummand::weight(lambda.coords().to_vec())
}
