//! Intersection rings of model spaces.
//!
//! Elements are [`TruncatedSeries`] over the ring's table: the coefficient
//! variables of the theory, one generator per projective level (named
//! `h1, h2, …` in post-order), then the torus parameters `z1, …, zr` when the
//! ring is equivariant. Trivial levels are handled by exponent caps, other
//! levels by rewriting `ξʳ` with the projective bundle relation.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{Monomial, Profile, Rational, TruncatedSeries, VariableTable};
use crate::equivariant::{Character, TorusContext};
use crate::error::{Error, Result};
use crate::fgl::{FormalGroupLaw, TheoryKind, BETA};

use super::ktheory;
use super::model::{BundleSpec, LineSummand, SpaceModel};

#[derive(Debug)]
struct Level {
    name: String,
    rank: usize,
    /// Summands over the global generator list, for non-trivial levels.
    summands: Vec<LineSummand>,
    /// `ξʳ = Σᵢ relation[i-1] ξ^{r-i}`; `None` when ξ is simply capped.
    relation: Option<Vec<TruncatedSeries>>,
}

#[derive(Debug)]
pub struct IntersectionRing {
    fgl: Arc<FormalGroupLaw>,
    model: SpaceModel,
    torus: Option<TorusContext>,
    weight_override: Option<u32>,
    table: Arc<VariableTable>,
    profile: Profile,
    scalar_table: Arc<VariableTable>,
    scalar_profile: Profile,
    ncoeff: usize,
    levels: Vec<Level>,
    dim: u32,
}

/// Builds the (non-equivariant) ring of a model.
pub fn build_space(fgl: &Arc<FormalGroupLaw>, model: &SpaceModel) -> Result<Arc<IntersectionRing>> {
    IntersectionRing::build(fgl, model, None, None)
}

/// Builds the equivariant ring with torus parameters adjoined. `weight_bound`
/// may lower the coefficient-weight truncation below the theory's default.
pub fn build_equivariant_space(
    fgl: &Arc<FormalGroupLaw>,
    model: &SpaceModel,
    torus: &TorusContext,
    weight_bound: Option<u32>,
) -> Result<Arc<IntersectionRing>> {
    IntersectionRing::build(fgl, model, Some(torus.clone()), weight_bound)
}

fn collect_levels(
    model: &SpaceModel,
    levels: &mut Vec<(usize, Vec<LineSummand>)>,
) -> Result<()> {
    match model {
        SpaceModel::Point => {}
        SpaceModel::Proj { n } => levels.push((*n as usize + 1, Vec::new())),
        SpaceModel::Bundle { base, bundle } => {
            let start = levels.len();
            collect_levels(base, levels)?;
            let nb = levels.len() - start;
            if bundle.rank() == 0 {
                return Err(Error::MalformedTower("projective bundle of a rank-0 bundle".into()));
            }
            let mut mapped = Vec::with_capacity(bundle.rank());
            for s in &bundle.summands {
                if s.degrees.iter().skip(nb).any(|&a| a != 0) {
                    return Err(Error::MalformedTower(format!(
                        "summand refers to generator {} but the base has {nb}",
                        s.degrees.len()
                    )));
                }
                let mut degrees = vec![0; start + nb];
                for (j, &a) in s.degrees.iter().take(nb).enumerate() {
                    degrees[start + j] = a;
                }
                mapped.push(LineSummand::new(degrees, s.character.clone()));
            }
            let nontrivial = mapped.iter().any(|s| !s.is_trivial());
            levels.push((bundle.rank(), if nontrivial { mapped } else { Vec::new() }));
        }
        SpaceModel::Product { left, right } => {
            collect_levels(left, levels)?;
            collect_levels(right, levels)?;
        }
    }
    Ok(())
}

impl IntersectionRing {
    pub fn build(
        fgl: &Arc<FormalGroupLaw>,
        model: &SpaceModel,
        torus: Option<TorusContext>,
        weight_override: Option<u32>,
    ) -> Result<Arc<Self>> {
        let mut raw = Vec::new();
        collect_levels(model, &mut raw)?;
        let r = torus.as_ref().map_or(0, |t| t.rank);
        for (_, summands) in &raw {
            for s in summands {
                if s.has_character() {
                    if torus.is_none() {
                        return Err(Error::MalformedTower(
                            "torus character on a non-equivariant space".into(),
                        ));
                    }
                    if s.character.iter().skip(r).any(|&a| a != 0) {
                        return Err(Error::RankMismatch(format!(
                            "character has {} entries, torus rank is {r}",
                            s.character.len()
                        )));
                    }
                }
            }
        }
        let dim = model.dim();
        let coeffs = fgl.coefficient_table();
        let ncoeff = coeffs.len();
        let k = raw.len();
        let table = coeffs.extended(
            (0..k)
                .map(|j| (format!("h{}", j + 1), 1))
                .chain((0..r).map(|l| (TorusContext::zeta_name(l), 1))),
        )?;
        let scalar_table = coeffs.extended((0..r).map(|l| (TorusContext::zeta_name(l), 1)))?;

        let n = fgl.order();
        let natural = match fgl.kind() {
            TheoryKind::Additive => None,
            _ if torus.is_none() && dim < n => None,
            _ => Some(n - 2),
        };
        let weight_bound = match (natural, weight_override) {
            (_, _) if fgl.kind() == TheoryKind::Additive => None,
            (Some(a), Some(b)) => Some(a.min(b)),
            (None, b) => b,
            (a, None) => a,
        };
        let degree_bound = match &torus {
            Some(t) => dim + r as u32 * (t.cap - 1) + 1,
            None => dim + 1,
        };
        let mut profile = Profile::exact(table.len())
            .with_degree_bound(Some(degree_bound))
            .with_weight_bound(weight_bound);
        for (j, (rank, summands)) in raw.iter().enumerate() {
            if summands.is_empty() {
                profile.caps[ncoeff + j] = Some(*rank as u32);
            }
        }
        let mut scalar_profile = Profile::exact(scalar_table.len())
            .with_degree_bound(Some(degree_bound))
            .with_weight_bound(weight_bound);
        if let Some(t) = &torus {
            for l in 0..r {
                profile.caps[ncoeff + k + l] = Some(t.cap);
                scalar_profile.caps[ncoeff + l] = Some(t.cap);
            }
        }

        let mut ring = IntersectionRing {
            fgl: fgl.clone(),
            model: model.clone(),
            torus,
            weight_override,
            table,
            profile,
            scalar_table,
            scalar_profile,
            ncoeff,
            levels: Vec::with_capacity(k),
            dim,
        };
        for (j, (rank, summands)) in raw.into_iter().enumerate() {
            let relation = if summands.is_empty() {
                None
            } else {
                // ξʳ = Σ_{i≥1} (-1)^{i+1} cᵢ(E^∨) ξ^{r-i}, with the lower levels
                // already in place.
                let dual = BundleSpec::new(summands.iter().map(LineSummand::dual).collect());
                let c = ring.total_chern(&dual)?;
                Some(
                    (1..=rank)
                        .map(|i| if i % 2 == 1 { c[i].clone() } else { -&c[i] })
                        .collect(),
                )
            };
            ring.levels.push(Level {
                name: format!("h{}", j + 1),
                rank,
                summands,
                relation,
            });
        }
        for j in 0..k {
            let residual = ring.pb_relation_residual(j)?;
            if !residual.is_zero() {
                return Err(Error::MalformedTower(format!(
                    "projective bundle relation fails at level {}: {residual}",
                    j + 1
                )));
            }
        }
        Ok(Arc::new(ring))
    }

    /// The same space with a different torus cap.
    pub fn with_cap(&self, cap: u32) -> Result<Arc<Self>> {
        let torus = self
            .torus
            .as_ref()
            .ok_or_else(|| Error::InvalidTask("ring is not equivariant".into()))?
            .with_cap(cap)?;
        Self::build(&self.fgl, &self.model, Some(torus), self.weight_override)
    }

    pub fn fgl(&self) -> &Arc<FormalGroupLaw> {
        &self.fgl
    }

    pub fn kind(&self) -> TheoryKind {
        self.fgl.kind()
    }

    pub fn model(&self) -> &SpaceModel {
        &self.model
    }

    pub fn torus(&self) -> Option<&TorusContext> {
        self.torus.as_ref()
    }

    pub fn cap(&self) -> Option<u32> {
        self.torus.as_ref().map(|t| t.cap)
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        &self.table
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Table of "scalars": coefficient variables and torus parameters.
    pub fn scalar_table(&self) -> &Arc<VariableTable> {
        &self.scalar_table
    }

    pub fn scalar_profile(&self) -> &Profile {
        &self.scalar_profile
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn generator_count(&self) -> usize {
        self.levels.len()
    }

    pub fn generator_name(&self, j: usize) -> &str {
        &self.levels[j].name
    }

    pub fn level_rank(&self, j: usize) -> usize {
        self.levels[j].rank
    }

    pub fn torus_rank(&self) -> usize {
        self.torus.as_ref().map_or(0, |t| t.rank)
    }

    /// Coefficient weight above which values are not tracked; 0 when the
    /// theory has no weighted coefficients.
    pub fn weight_horizon(&self) -> u32 {
        self.profile.weight_bound.unwrap_or(0)
    }

    fn gen_index(&self, j: usize) -> usize {
        self.ncoeff + j
    }

    fn zeta_index(&self, l: usize) -> usize {
        self.ncoeff + self.levels_len() + l
    }

    // During construction `levels` is still filling up, so generator
    // positions come from the table instead.
    fn levels_len(&self) -> usize {
        self.table.len() - self.ncoeff - self.torus_rank()
    }

    pub fn zero(&self) -> TruncatedSeries {
        TruncatedSeries::zero(&self.table, &self.profile)
    }

    pub fn one(&self) -> TruncatedSeries {
        TruncatedSeries::one(&self.table, &self.profile)
    }

    pub fn constant(&self, c: Rational) -> TruncatedSeries {
        TruncatedSeries::constant(&self.table, &self.profile, c)
    }

    pub fn variable(&self, name: &str) -> Result<TruncatedSeries> {
        TruncatedSeries::var(&self.table, &self.profile, name)
    }

    pub fn generator(&self, j: usize) -> TruncatedSeries {
        let mut e = vec![0; self.table.len()];
        e[self.gen_index(j)] = 1;
        TruncatedSeries::monomial(&self.table, &self.profile, e, Rational::from_integer(1.into()))
    }

    pub fn zeta(&self, l: usize) -> Result<TruncatedSeries> {
        if l >= self.torus_rank() {
            return Err(Error::RankMismatch(format!(
                "torus parameter {} requested, rank is {}",
                l + 1,
                self.torus_rank()
            )));
        }
        let mut e = vec![0; self.table.len()];
        e[self.zeta_index(l)] = 1;
        Ok(TruncatedSeries::monomial(&self.table, &self.profile, e, Rational::from_integer(1.into())))
    }

    /// β for K-theory.
    pub fn beta(&self) -> Result<TruncatedSeries> {
        self.variable(BETA)
    }

    pub fn add(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        a.try_add(b)
    }

    pub fn sub(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        a.try_sub(b)
    }

    pub fn mul(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        let p = crate::algebra::poly_mul(a, b)?;
        Ok(self.reduce(p))
    }

    pub fn pow(&self, a: &TruncatedSeries, k: u32) -> Result<TruncatedSeries> {
        let mut acc = self.one();
        for _ in 0..k {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    pub fn product<'a>(&self, xs: impl IntoIterator<Item = &'a TruncatedSeries>) -> Result<TruncatedSeries> {
        let mut acc = self.one();
        for x in xs {
            acc = self.mul(&acc, x)?;
        }
        Ok(acc)
    }

    /// Rewrites every `ξʳ` at non-trivial levels, top level first.
    pub(crate) fn reduce(&self, s: TruncatedSeries) -> TruncatedSeries {
        let mut s = s;
        for j in (0..self.levels.len()).rev() {
            let Some(rel) = &self.levels[j].relation else {
                continue;
            };
            let r = self.levels[j].rank as u32;
            let gi = self.gen_index(j);
            if s.terms().all(|(m, _)| m[gi] < r) {
                continue;
            }
            let mut buckets: BTreeMap<u32, TruncatedSeries> = BTreeMap::new();
            for (m, c) in s.terms() {
                let mut e = m.clone();
                let k = e[gi];
                e[gi] = 0;
                buckets
                    .entry(k)
                    .or_insert_with(|| TruncatedSeries::zero(&self.table, s.profile()))
                    .add_term(e, c.clone());
            }
            let top = *buckets.keys().next_back().unwrap();
            for e in (r..=top).rev() {
                let Some(b) = buckets.remove(&e) else {
                    continue;
                };
                for i in 1..=r {
                    let t = &b * &rel[i as usize - 1];
                    let slot = buckets
                        .entry(e - i)
                        .or_insert_with(|| TruncatedSeries::zero(&self.table, s.profile()));
                    *slot = &*slot + &t;
                }
            }
            let mut out = TruncatedSeries::zero(&self.table, s.profile());
            for (e, b) in buckets {
                let mut exps = vec![0; self.table.len()];
                exps[gi] = e;
                out = &out + &b.mul_monomial(&exps, &Rational::from_integer(1.into()));
            }
            s = out;
        }
        s
    }

    /// Σᵢ (-1)ⁱ cᵢ(E^∨) ξ^{r-i} at level `j`, which must vanish.
    pub fn pb_relation_residual(&self, j: usize) -> Result<TruncatedSeries> {
        let level = &self.levels[j];
        let r = level.rank;
        let xi = self.generator(j);
        let dual = if level.summands.is_empty() {
            BundleSpec::trivial(r)
        } else {
            BundleSpec::new(level.summands.iter().map(LineSummand::dual).collect())
        };
        let c = self.total_chern(&dual)?;
        let mut acc = self.zero();
        let mut power = self.one();
        // Accumulate from ξ⁰ upward: term i pairs with ξ^{r-i}.
        let mut powers = vec![self.one()];
        for _ in 0..r {
            power = self.mul(&power, &xi)?;
            powers.push(power.clone());
        }
        for (i, ci) in c.iter().enumerate() {
            let t = self.mul(ci, &powers[r - i])?;
            acc = if i % 2 == 0 { &acc + &t } else { &acc - &t };
        }
        Ok(acc)
    }

    /// Embeds a series over the coefficient variables (and `u`, which must not
    /// occur) into the ring.
    fn coefficient_into_ring(&self, m: &[u32], c: &Rational) -> TruncatedSeries {
        let mut e = vec![0; self.table.len()];
        e[..self.ncoeff].copy_from_slice(&m[..self.ncoeff]);
        TruncatedSeries::monomial(&self.table, &self.profile, e, c.clone())
    }

    fn check_nilpotent(&self, x: &TruncatedSeries, what: &str) -> Result<()> {
        if !x.constant_term().is_zero() {
            return Err(Error::NonNilpotentSubstitution(what.into()));
        }
        Ok(())
    }

    /// Evaluates a one-variable series of the theory (over
    /// [`FormalGroupLaw::series_table`]) at a ring element, by Horner's rule.
    pub fn eval_series(&self, s: &TruncatedSeries, x: &TruncatedSeries, exact: bool) -> Result<TruncatedSeries> {
        self.check_nilpotent(x, "u")?;
        let profile = self.fgl.precision(&self.profile, &[x], exact);
        let ui = self.ncoeff;
        let mut by_power: BTreeMap<u32, TruncatedSeries> = BTreeMap::new();
        for (m, c) in s.terms() {
            let t = self.coefficient_into_ring(m, c);
            let slot = by_power.entry(m[ui]).or_insert_with(|| self.zero());
            *slot = &*slot + &t;
        }
        let Some(&top) = by_power.keys().next_back() else {
            return Ok(self.zero());
        };
        let x = x.restrict(&profile);
        let mut acc = by_power.remove(&top).unwrap().restrict(&profile);
        for k in (0..top).rev() {
            acc = self.mul(&acc, &x)?;
            if let Some(c) = by_power.get(&k) {
                acc = &acc + c;
            }
        }
        Ok(acc.restrict(&profile))
    }

    /// F(a, b).
    pub fn fgl_add(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check_nilpotent(a, "a")?;
        self.check_nilpotent(b, "b")?;
        if self.kind() == TheoryKind::Additive {
            return a.try_add(b);
        }
        let profile = self.fgl.precision(&self.profile, &[a, b], self.fgl.law_is_exact());
        let ui = self.ncoeff;
        let vi = ui + 1;
        let law = self.fgl.law();
        let max_i = law.terms().map(|(m, _)| m[ui]).max().unwrap_or(0);
        let max_j = law.terms().map(|(m, _)| m[vi]).max().unwrap_or(0);
        let powers = |x: &TruncatedSeries, k: u32| -> Result<Vec<TruncatedSeries>> {
            let x = x.restrict(&profile);
            let mut out = vec![self.one().restrict(&profile)];
            for _ in 0..k {
                let next = self.mul(out.last().unwrap(), &x)?;
                out.push(next);
            }
            Ok(out)
        };
        let pa = powers(a, max_i)?;
        let pb = powers(b, max_j)?;
        let mut grouped: BTreeMap<(u32, u32), TruncatedSeries> = BTreeMap::new();
        for (m, c) in law.terms() {
            let t = self.coefficient_into_ring(m, c);
            let slot = grouped.entry((m[ui], m[vi])).or_insert_with(|| self.zero());
            *slot = &*slot + &t;
        }
        let mut acc = self.zero().restrict(&profile);
        for ((i, j), c) in grouped {
            if pa[i as usize].is_zero() || pb[j as usize].is_zero() {
                continue;
            }
            let t = self.mul(&self.mul(&c, &pa[i as usize])?, &pb[j as usize])?;
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// [n]_F(x).
    pub fn apply_n_series(&self, n: i64, x: &TruncatedSeries) -> Result<TruncatedSeries> {
        match n {
            0 => Ok(self.zero()),
            1 => Ok(x.clone()),
            _ => {
                let s = self.fgl.n_series(n)?;
                self.eval_series(&s, x, self.fgl.n_series_is_exact(n))
            }
        }
    }

    /// c₁ of the dual line: x·g(x).
    pub fn dual_class(&self, x: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.apply_n_series(-1, x)
    }

    /// g(x) for the formal inverse series g.
    pub fn inverse_factor(&self, x: &TruncatedSeries) -> Result<TruncatedSeries> {
        let exact = self.kind() == TheoryKind::Additive;
        self.eval_series(&self.fgl.inverse().g, x, exact)
    }

    /// c₁ᵀ(k(λ)): the F-sum of [aₗ]_F(ζₗ).
    pub fn character_class(&self, lambda: &Character) -> Result<TruncatedSeries> {
        let r = self.torus_rank();
        if lambda.coords().iter().skip(r).any(|&a| a != 0) {
            return Err(Error::RankMismatch(format!(
                "character {lambda} does not fit a rank-{r} torus"
            )));
        }
        let mut acc: Option<TruncatedSeries> = None;
        for (l, &a) in lambda.coords().iter().enumerate() {
            if a == 0 {
                continue;
            }
            let t = self.apply_n_series(a, &self.zeta(l)?)?;
            acc = Some(match acc {
                None => t,
                Some(prev) => self.fgl_add(&prev, &t)?,
            });
        }
        Ok(acc.unwrap_or_else(|| self.zero()))
    }

    /// c₁ of a line summand: F-sum of [aⱼ]_F(ξⱼ), then F-added to the
    /// character class.
    pub fn line_class(&self, line: &LineSummand) -> Result<TruncatedSeries> {
        let k = self.levels_len();
        if line.degrees.iter().skip(k).any(|&a| a != 0) {
            return Err(Error::MalformedTower(format!(
                "line refers to generator {} but the ring has {k}",
                line.degrees.len()
            )));
        }
        let mut acc: Option<TruncatedSeries> = None;
        for (j, &a) in line.degrees.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let mut e = vec![0; self.table.len()];
            e[self.gen_index(j)] = 1;
            let xi = TruncatedSeries::monomial(&self.table, &self.profile, e, Rational::from_integer(1.into()));
            let t = self.apply_n_series(a, &xi)?;
            acc = Some(match acc {
                None => t,
                Some(prev) => self.fgl_add(&prev, &t)?,
            });
        }
        if line.has_character() {
            let c = self.character_class(&Character::new(line.character.clone()))?;
            acc = Some(match acc {
                None => c,
                Some(prev) => self.fgl_add(&prev, &c)?,
            });
        }
        Ok(acc.unwrap_or_else(|| self.zero()))
    }

    /// c₀, …, c_r of a split bundle.
    pub fn total_chern(&self, e: &BundleSpec) -> Result<Vec<TruncatedSeries>> {
        let mut c = vec![self.one()];
        for s in &e.summands {
            let x = self.line_class(s)?;
            let mut next = c.clone();
            next.push(self.zero());
            for i in 1..next.len() {
                let t = self.mul(&c[i - 1], &x)?;
                next[i] = &next[i] + &t;
            }
            c = next;
        }
        Ok(c)
    }

    pub fn chern(&self, e: &BundleSpec, i: usize) -> Result<TruncatedSeries> {
        if i > e.rank() {
            return Err(Error::ChernIndex {
                index: i,
                rank: e.rank(),
            });
        }
        Ok(self.total_chern(e)?.swap_remove(i))
    }

    /// Product of the summands' first Chern classes.
    pub fn euler(&self, e: &BundleSpec) -> Result<TruncatedSeries> {
        let mut acc = self.one();
        for s in &e.summands {
            acc = self.mul(&acc, &self.line_class(s)?)?;
        }
        Ok(acc)
    }

    /// c₁(L₁ ⊗ L₂) from the two first Chern classes.
    pub fn c1_tensor(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.fgl_add(a, b)
    }

    /// ι_* ∘ (-D)· applied to `alpha`: g(c₁L)·c₁L·α.
    pub fn minus_divisor_pushed(&self, alpha: &TruncatedSeries, line: &LineSummand) -> Result<TruncatedSeries> {
        let x = self.line_class(line)?;
        let g = self.inverse_factor(&x)?;
        self.mul(&self.mul(&g, &x)?, alpha)
    }

    /// Smallest k ≥ 1 with c₁(L)ᵏ = 0.
    pub fn nilpotency_index(&self, line: &LineSummand) -> Result<u32> {
        self.nilpotency_of(&self.line_class(line)?)
    }

    pub fn nilpotency_of(&self, x: &TruncatedSeries) -> Result<u32> {
        let limit = self.profile.degree_bound.unwrap_or(self.dim + 1) + 1;
        let mut k = 1;
        let mut p = x.clone();
        while !p.is_zero() {
            if k > limit {
                return Err(Error::NotNilpotent(x.to_string()));
            }
            p = self.mul(&p, x)?;
            k += 1;
        }
        Ok(k)
    }

    /// The monomial basis over the scalars: ξ-exponents below each level rank.
    pub fn basis(&self) -> Vec<TruncatedSeries> {
        let mut exps: Vec<Vec<u32>> = vec![Vec::new()];
        for level in &self.levels {
            exps = exps
                .into_iter()
                .flat_map(|e| {
                    (0..level.rank as u32).map(move |k| {
                        let mut e = e.clone();
                        e.push(k);
                        e
                    })
                })
                .collect();
        }
        exps.into_iter()
            .map(|g| {
                let mut e = vec![0; self.table.len()];
                for (j, k) in g.into_iter().enumerate() {
                    e[self.gen_index(j)] = k;
                }
                TruncatedSeries::monomial(&self.table, &self.profile, e, Rational::from_integer(1.into()))
            })
            .collect()
    }

    /// Splits a ring monomial into generator exponents and a scalar monomial.
    pub(crate) fn split_monomial(&self, m: &[u32]) -> (Vec<u32>, Monomial) {
        let k = self.levels.len();
        let gens = m[self.ncoeff..self.ncoeff + k].to_vec();
        let mut s = m[..self.ncoeff].to_vec();
        s.extend_from_slice(&m[self.ncoeff + k..]);
        (gens, s)
    }

    pub(crate) fn join_monomial(&self, gens: &[u32], scalar: &[u32]) -> Monomial {
        let mut m = scalar[..self.ncoeff].to_vec();
        m.extend_from_slice(gens);
        m.extend_from_slice(&scalar[self.ncoeff..]);
        m
    }

    /// A scalar (coefficients and torus parameters) as a ring element.
    pub fn scalar_into_ring(&self, s: &TruncatedSeries) -> Result<TruncatedSeries> {
        if !crate::algebra::same_table(s.table(), &self.scalar_table) {
            return Err(Error::TableMismatch);
        }
        let zeros = vec![0; self.levels.len()];
        let mut out = self.zero();
        for (m, c) in s.terms() {
            out.add_term(self.join_monomial(&zeros, m), c.clone());
        }
        Ok(out)
    }

    pub fn scalar_zero(&self) -> TruncatedSeries {
        TruncatedSeries::zero(&self.scalar_table, &self.scalar_profile)
    }

    /// Indices of the scalar table's torus parameters.
    pub(crate) fn scalar_zeta_range(&self) -> std::ops::Range<usize> {
        self.ncoeff..self.scalar_table.len()
    }

    /// Pushforward to a point, coefficient-wise in the torus parameters.
    pub fn integrate(&self, alpha: &TruncatedSeries) -> Result<TruncatedSeries> {
        if self.levels.is_empty() {
            let mut out = self.scalar_zero();
            for (m, c) in alpha.terms() {
                out.add_term(self.split_monomial(m).1, c.clone());
            }
            return Ok(out);
        }
        let factors = self.model.proj_factors().ok_or_else(|| {
            Error::UnsupportedIntegration("the tower contains a projective bundle level".into())
        })?;
        match self.kind() {
            TheoryKind::Universal => Err(Error::UnsupportedIntegration(
                "direct integration in the universal theory".into(),
            )),
            TheoryKind::Additive => {
                let mut out = self.scalar_zero();
                for (m, c) in alpha.terms() {
                    let (gens, s) = self.split_monomial(m);
                    if gens == factors {
                        out.add_term(s, c.clone());
                    }
                }
                Ok(out)
            }
            TheoryKind::Multiplicative => {
                let k = ktheory::to_k_basis(self, alpha)?;
                Ok(k.euler_characteristic())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;
    use crate::fgl::make_fgl;

    fn chow() -> Arc<FormalGroupLaw> {
        make_fgl(TheoryKind::Additive, 6).unwrap()
    }

    #[test]
    fn point_has_rank_one() {
        let r = build_space(&chow(), &SpaceModel::Point).unwrap();
        assert_eq!(r.basis().len(), 1);
        assert_eq!(r.integrate(&r.constant(int(5))).unwrap().constant_term(), int(5));
    }

    #[test]
    fn p2_cube_vanishes() {
        let r = build_space(&chow(), &SpaceModel::proj(2)).unwrap();
        let h = r.generator(0);
        assert_eq!(r.basis().len(), 3);
        assert!(r.pow(&h, 3).unwrap().is_zero());
        assert!(!r.pow(&h, 2).unwrap().is_zero());
    }

    #[test]
    fn p1_times_p1_square() {
        let r = build_space(&chow(), &SpaceModel::proj_product(&[1, 1])).unwrap();
        let s = &r.generator(0) + &r.generator(1);
        let sq = r.mul(&s, &s).unwrap();
        let expect = r.mul(&r.generator(0), &r.generator(1)).unwrap().scale(&int(2));
        assert_eq!(sq, expect);
        assert_eq!(r.basis().len(), 4);
    }

    #[test]
    fn hirzebruch_relation() {
        // P(O ⊕ O(1)) over P¹: ξ² = -h ξ in Chow.
        let e = BundleSpec::new(vec![LineSummand::trivial(), LineSummand::line(vec![1])]);
        let r = build_space(&chow(), &SpaceModel::bundle(SpaceModel::proj(1), e)).unwrap();
        let (h, xi) = (r.generator(0), r.generator(1));
        let sq = r.mul(&xi, &xi).unwrap();
        assert_eq!(sq, -&r.mul(&h, &xi).unwrap());
        assert!(r.integrate(&xi).is_err());
    }

    #[test]
    fn malformed_towers() {
        let bad = SpaceModel::bundle(SpaceModel::proj(1), BundleSpec::new(vec![LineSummand::line(vec![0, 1])]));
        assert!(matches!(build_space(&chow(), &bad), Err(Error::MalformedTower(_))));
        let empty = SpaceModel::bundle(SpaceModel::Point, BundleSpec::default());
        assert!(matches!(build_space(&chow(), &empty), Err(Error::MalformedTower(_))));
        let charged = SpaceModel::bundle(SpaceModel::Point, BundleSpec::new(vec![LineSummand::weight(vec![1])]));
        assert!(matches!(build_space(&chow(), &charged), Err(Error::MalformedTower(_))));
    }

    #[test]
    fn chern_examples() {
        let r = build_space(&chow(), &SpaceModel::proj(1)).unwrap();
        let e = BundleSpec::new(vec![LineSummand::line(vec![1]), LineSummand::line(vec![1])]);
        assert_eq!(r.chern(&e, 1).unwrap(), r.generator(0).scale(&int(2)));
        assert!(r.chern(&BundleSpec::trivial(2), 1).unwrap().is_zero());
        assert_eq!(
            r.chern(&e, 3).unwrap_err(),
            Error::ChernIndex { index: 3, rank: 2 }
        );
        assert_eq!(r.euler(&BundleSpec::default()).unwrap(), r.one());
    }

    #[test]
    fn euler_of_o_d_on_p1() {
        for kind in [TheoryKind::Additive, TheoryKind::Multiplicative] {
            let f = make_fgl(kind, 5).unwrap();
            let r = build_space(&f, &SpaceModel::proj(1)).unwrap();
            let e = r.euler(&BundleSpec::new(vec![LineSummand::line(vec![4])])).unwrap();
            assert_eq!(e, r.generator(0).scale(&int(4)), "{kind}");
        }
    }

    #[test]
    fn k_theory_minus_divisor_on_p1() {
        let f = make_fgl(TheoryKind::Multiplicative, 5).unwrap();
        let r = build_space(&f, &SpaceModel::proj(1)).unwrap();
        let out = r.minus_divisor_pushed(&r.one(), &LineSummand::line(vec![1])).unwrap();
        assert_eq!(out, -&r.generator(0));
    }

    #[test]
    fn nilpotency_examples() {
        let r = build_space(&chow(), &SpaceModel::proj(3)).unwrap();
        assert_eq!(r.nilpotency_index(&LineSummand::line(vec![1])).unwrap(), 4);
        assert_eq!(r.nilpotency_index(&LineSummand::trivial()).unwrap(), 1);
        let q = build_space(&chow(), &SpaceModel::proj_product(&[1, 1])).unwrap();
        assert_eq!(q.nilpotency_index(&LineSummand::line(vec![1, 1])).unwrap(), 3);
    }

    #[test]
    fn integration_examples() {
        let r = build_space(&chow(), &SpaceModel::proj(2)).unwrap();
        let h = r.generator(0);
        let a = r.mul(&h.scale(&int(2)), &h.scale(&int(3))).unwrap();
        assert_eq!(r.integrate(&a).unwrap().constant_term(), int(6));
        let u = build_space(&make_fgl(TheoryKind::Universal, 4).unwrap(), &SpaceModel::proj(1)).unwrap();
        assert!(matches!(u.integrate(&u.one()), Err(Error::UnsupportedIntegration(_))));
    }
}
