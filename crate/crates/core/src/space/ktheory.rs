//! K-theory of products of projective spaces in the basis of powers of
//! X = [O(-1)].
//!
//! A ring element α is sent to the class κ with ∫α = χ(κ): substitute
//! h = (1 - X)/β in each factor and multiply by β^dim, which clears every
//! negative power of β because hⁿ⁺¹ = 0. Euler characteristics then come from
//! χ(Pⁿ, O(-m)) = C(n - m, n).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{binomial, int, Monomial, Profile, Rational, TruncatedSeries, VariableTable};
use crate::error::{Error, Result};
use crate::fgl::{TheoryKind, BETA};

use super::ring::IntersectionRing;

/// Σ_x c_x Π_f X_f^{x_f} with 0 ≤ x_f ≤ n_f and scalar coefficients c_x.
#[derive(Clone, Debug)]
pub struct KClass {
    dims: Vec<u32>,
    table: Arc<VariableTable>,
    profile: Profile,
    beta: usize,
    terms: BTreeMap<Vec<u32>, TruncatedSeries>,
}

fn context(ring: &IntersectionRing) -> Result<(Vec<u32>, usize)> {
    if ring.kind() != TheoryKind::Multiplicative {
        return Err(Error::TheoryMismatch(format!(
            "the [O(-1)] basis needs K-theory, ring is {}",
            ring.kind()
        )));
    }
    let dims = ring.model().proj_factors().ok_or_else(|| {
        Error::UnsupportedIntegration("the tower contains a projective bundle level".into())
    })?;
    let beta = ring
        .scalar_table()
        .index_of(BETA)
        .ok_or_else(|| Error::UnknownVariable(BETA.into()))?;
    Ok((dims, beta))
}

/// Coefficients of (1 - X)ᵏ in the X basis of Pⁿ.
fn y_power(k: u32) -> Vec<Rational> {
    (0..=k)
        .map(|j| {
            let c = binomial(k as i64, j);
            if j % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect()
}

/// Coefficients of Xᵃ = (1 - Y)ᵃ in the X basis of Pⁿ, for any integer a.
fn x_power_coeffs(a: i64, n: u32) -> Vec<Rational> {
    let mut out = vec![int(0); n as usize + 1];
    for k in 0..=n {
        let mut c = binomial(a, k);
        if k % 2 == 1 {
            c = -c;
        }
        for (j, y) in y_power(k).into_iter().enumerate() {
            out[j] += &c * y;
        }
    }
    out
}

fn tensor(per_factor: &[Vec<Rational>]) -> Vec<(Vec<u32>, Rational)> {
    let mut acc: Vec<(Vec<u32>, Rational)> = vec![(Vec::new(), int(1))];
    for coeffs in per_factor {
        let mut next = Vec::new();
        for (x, c) in &acc {
            for (j, d) in coeffs.iter().enumerate() {
                if d == &int(0) {
                    continue;
                }
                let mut x = x.clone();
                x.push(j as u32);
                next.push((x, c * d));
            }
        }
        acc = next;
    }
    acc
}

impl KClass {
    pub fn zero(ring: &IntersectionRing) -> Result<Self> {
        let (dims, beta) = context(ring)?;
        Ok(Self {
            dims,
            table: ring.scalar_table().clone(),
            profile: ring.scalar_profile().clone(),
            beta,
            terms: BTreeMap::new(),
        })
    }

    /// Π_f X_f^{a_f}, i.e. the class of O(-a).
    pub fn x_power(ring: &IntersectionRing, a: &[i64]) -> Result<Self> {
        let mut out = Self::zero(ring)?;
        let per: Vec<Vec<Rational>> = out
            .dims
            .iter()
            .enumerate()
            .map(|(f, &n)| x_power_coeffs(a.get(f).copied().unwrap_or(0), n))
            .collect();
        for (x, c) in tensor(&per) {
            out.add_scalar(x, TruncatedSeries::constant(&out.table, &out.profile, c));
        }
        Ok(out)
    }

    pub fn one(ring: &IntersectionRing) -> Result<Self> {
        Self::x_power(ring, &[])
    }

    fn add_scalar(&mut self, x: Vec<u32>, s: TruncatedSeries) {
        let slot = self
            .terms
            .entry(x.clone())
            .or_insert_with(|| TruncatedSeries::zero(&self.table, &self.profile));
        *slot = &*slot + &s;
        if slot.is_zero() {
            self.terms.remove(&x);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, TruncatedSeries> {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, s) in &other.terms {
            out.add_scalar(x.clone(), s.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&TruncatedSeries::constant(&self.table, &self.profile, int(-1))))
    }

    pub fn scale(&self, s: &TruncatedSeries) -> Self {
        let mut out = self.clone();
        out.terms.clear();
        for (x, c) in &self.terms {
            out.add_scalar(x.clone(), c * s);
        }
        out
    }

    pub fn mul_beta(&self, k: u32) -> Self {
        let mut e = vec![0; self.table.len()];
        e[self.beta] = k;
        let b = TruncatedSeries::monomial(&self.table, &self.profile, e, int(1));
        self.scale(&b)
    }

    /// χ(κ) = Σ c_x Π C(n_f - x_f, n_f).
    pub fn euler_characteristic(&self) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(&self.table, &self.profile);
        for (x, c) in &self.terms {
            let w: Rational = x
                .iter()
                .zip(&self.dims)
                .map(|(&m, &n)| binomial(n as i64 - m as i64, n))
                .product();
            out = &out + &c.scale(&w);
        }
        out
    }
}

impl PartialEq for KClass {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|((x, a), (y, b))| x == y && a.equals(b))
    }
}

/// The class κ with ∫α = χ(κ).
pub fn to_k_basis(ring: &IntersectionRing, alpha: &TruncatedSeries) -> Result<KClass> {
    let mut out = KClass::zero(ring)?;
    for (m, c) in alpha.terms() {
        let (gens, mut s) = ring.split_monomial(m);
        let mut shift = 0;
        for (&k, &n) in gens.iter().zip(&out.dims) {
            if k > n {
                return Err(Error::OutsideProfile(m.clone()));
            }
            shift += n - k;
        }
        s[out.beta] += shift;
        let scalar = TruncatedSeries::monomial(&out.table, &out.profile, s, c.clone());
        let per: Vec<Vec<Rational>> = gens.iter().map(|&k| y_power(k)).collect();
        for (x, w) in tensor(&per) {
            out.add_scalar(x, scalar.scale(&w));
        }
    }
    Ok(out)
}

/// Inverse of [`to_k_basis`]: X_f = 1 - βh_f, then divide by β^dim.
pub fn from_k_basis(ring: &IntersectionRing, k: &KClass) -> Result<TruncatedSeries> {
    let (dims, _) = context(ring)?;
    if dims != k.dims {
        return Err(Error::TableMismatch);
    }
    let beta = ring.beta()?;
    let x_of = |f: usize| -> Result<TruncatedSeries> {
        let t = ring.mul(&beta, &ring.generator(f))?;
        Ok(&ring.one() - &t)
    };
    let xs: Vec<TruncatedSeries> = (0..dims.len()).map(x_of).collect::<Result<_>>()?;
    let mut acc = ring.zero();
    for (x, s) in &k.terms {
        let mut t = ring.scalar_into_ring(s)?;
        for (f, &e) in x.iter().enumerate() {
            t = ring.mul(&t, &ring.pow(&xs[f], e)?)?;
        }
        acc = &acc + &t;
    }
    let dim = ring.dim();
    let bi = ring.table().index_of(BETA).expect("K-theory ring has beta");
    let mut out = ring.zero();
    for (m, c) in acc.terms() {
        if m[bi] < dim {
            return Err(Error::BasisConversion(format!(
                "term {c} at {m:?} is not divisible by beta^{dim}"
            )));
        }
        let mut e: Monomial = m.clone();
        e[bi] -= dim;
        out.add_term(e, c.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::make_fgl;
    use crate::space::{build_space, SpaceModel};

    #[test]
    fn o1_on_p2_has_three_sections() {
        let f = make_fgl(TheoryKind::Multiplicative, 6).unwrap();
        let r = build_space(&f, &SpaceModel::proj(2)).unwrap();
        // [O(1)] = 1/(1 - βh) = 1 + βh + β²h²
        let b = r.beta().unwrap();
        let bh = r.mul(&b, &r.generator(0)).unwrap();
        let alpha = &(&r.one() + &bh) + &r.mul(&bh, &bh).unwrap();
        let chi = r.integrate(&alpha).unwrap();
        assert_eq!(chi.to_string(), "3*beta^2");
    }

    #[test]
    fn x_power_negative_exponent() {
        let f = make_fgl(TheoryKind::Multiplicative, 6).unwrap();
        let r = build_space(&f, &SpaceModel::proj(3)).unwrap();
        let a = KClass::x_power(&r, &[-2]).unwrap();
        let b = KClass::x_power(&r, &[2]).unwrap();
        let one = KClass::one(&r).unwrap();
        // X² · X⁻² = 1 via the functional on O(d): χ(O(2)) = 10.
        assert_eq!(a.euler_characteristic().constant_term(), int(10));
        assert_eq!(b.euler_characteristic().constant_term(), int(0));
        assert_eq!(one.euler_characteristic().constant_term(), int(1));
    }
}
