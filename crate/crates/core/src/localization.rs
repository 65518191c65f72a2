//! Virtual torus localization.
//!
//! A problem lists the fixed components of a torus action. Each component is a
//! trivially-acted model space F with moving bundles N₀, N₁ (the virtual
//! normal bundle is N₀ − N₁), a fixed obstruction bundle, and the integrand
//! restricted to F. Localization evaluates
//!
//! ```text
//! Σ_F ∫_F integrand|_F · e(Ob_F) · e(N₁) / e(N₀)
//! ```
//!
//! in the localized coefficient ring, and the result is compared with direct
//! integration on the global model when one is given.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{same_table, TruncatedSeries};
use crate::equivariant::localized::invert_euler_with;
use crate::equivariant::{Character, LocalizedElement, TorusContext};
use crate::error::{Error, Result};
use crate::expr::{ClassEnv, ClassExpr};
use crate::fgl::{make_fgl, FormalGroupLaw, TheoryKind};
use crate::space::{build_equivariant_space, build_space, BundleSpec, IntersectionRing, LineSummand, SpaceModel};

/// An expression together with the names it may use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Integrand {
    pub expr: ClassExpr,
    pub env: ClassEnv,
}

impl Integrand {
    pub fn new(expr: ClassExpr, env: ClassEnv) -> Self {
        Self { expr, env }
    }

    pub fn codegree_range(&self) -> Result<Option<(i64, i64)>> {
        self.expr.codegree_range(&self.env)
    }

    pub fn eval(&self, ring: &IntersectionRing) -> Result<TruncatedSeries> {
        self.expr.eval(ring, &self.env)
    }

    fn map_lines(&self, f: &impl Fn(&LineSummand) -> LineSummand) -> Self {
        let env = ClassEnv {
            lines: self.env.lines.iter().map(|(k, l)| (k.clone(), f(l))).collect(),
            bundles: self
                .env
                .bundles
                .iter()
                .map(|(k, b)| (k.clone(), b.summands.iter().map(f).collect()))
                .collect(),
        };
        Self::new(self.expr.clone(), env)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedComponentSpec {
    pub base: SpaceModel,
    /// Moving part of the tangent space; its Euler class divides.
    pub n0: BundleSpec,
    /// Moving part of the obstruction space; its Euler class multiplies.
    pub n1: BundleSpec,
    /// Fixed part of the obstruction bundle.
    pub obstruction: BundleSpec,
    pub integrand: Integrand,
}

impl FixedComponentSpec {
    pub fn virtual_dim(&self) -> i64 {
        self.base.dim() as i64 + self.n0.rank() as i64
            - self.n1.rank() as i64
            - self.obstruction.rank() as i64
    }
}

/// Global model for the non-equivariant side of the comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectReference {
    pub model: SpaceModel,
    pub obstruction: BundleSpec,
    pub integrand: Integrand,
}

#[derive(Clone, Debug)]
pub struct VirtualLocalizationProblem {
    pub fgl: Arc<FormalGroupLaw>,
    pub torus: TorusContext,
    pub components: Vec<FixedComponentSpec>,
    pub direct: Option<DirectReference>,
}

/// Truncation chosen before running the sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalizationPlan {
    pub virtual_dim: i64,
    /// Codegree range of the integrand, `None` if it is zero.
    pub integrand_codegree: Option<(i64, i64)>,
    /// Coefficient weight tracked exactly.
    pub weight: u32,
    /// Cap asked for.
    pub requested_cap: u32,
    /// Cap the computation runs at.
    pub cap: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CapMode {
    /// Start from the requested cap and raise it to what soundness needs.
    #[default]
    Auto,
    /// Use exactly this cap, with no soundness checks; for comparing raw
    /// computations across caps.
    Raw(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalizeOptions {
    pub cap: CapMode,
    pub parallel: bool,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self {
            cap: CapMode::Auto,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalizationOutcome {
    pub element: LocalizedElement,
    pub plan: LocalizationPlan,
}

/// [F]^vir ∩ for smooth F with obstruction bundle Ob: e(Ob).
pub fn virtual_class_smooth(ring: &IntersectionRing, obstruction: &BundleSpec) -> Result<TruncatedSeries> {
    ring.euler(obstruction)
}

fn add_den(den: &mut BTreeMap<Character, u32>, lambda: &[i64], e: u32) -> Result<()> {
    let c = Character::new(lambda.to_vec());
    if c.is_zero() {
        return Err(Error::ZeroCharacter);
    }
    *den.entry(c.canonical().0).or_insert(0) += e;
    Ok(())
}

impl VirtualLocalizationProblem {
    pub fn kind(&self) -> TheoryKind {
        self.fgl.kind()
    }

    pub fn plan(&self) -> Result<LocalizationPlan> {
        let Some(first) = self.components.first() else {
            return Err(Error::InvalidTask("localization problem has no fixed components".into()));
        };
        let vd = first.virtual_dim();
        let mut range: Option<(i64, i64)> = None;
        for c in &self.components {
            if c.virtual_dim() != vd {
                return Err(Error::RankMismatch(format!(
                    "fixed components have virtual dimensions {vd} and {}",
                    c.virtual_dim()
                )));
            }
            for s in c.n0.summands.iter().chain(&c.n1.summands) {
                if !s.has_character() {
                    return Err(Error::ZeroCharacter);
                }
            }
            if let Some((a, b)) = c.integrand.codegree_range()? {
                range = Some(match range {
                    None => (a, b),
                    Some((x, y)) => (x.min(a), y.max(b)),
                });
            }
        }
        let requested = self.torus.cap;
        let Some((cmin, cmax)) = range else {
            return Ok(LocalizationPlan {
                virtual_dim: vd,
                integrand_codegree: None,
                weight: 0,
                requested_cap: requested,
                cap: requested,
            });
        };
        let weight = match self.kind() {
            TheoryKind::Additive => 0,
            _ => (vd - cmin).max(0) as u32,
        };
        if self.kind() != TheoryKind::Additive && self.fgl.order() < weight + 2 {
            return Err(Error::InsufficientTruncation(format!(
                "answers carry coefficient weight up to {weight}; FGL order must be at least {}, got {}",
                weight + 2,
                self.fgl.order()
            )));
        }
        let mut total: BTreeMap<Character, u32> = BTreeMap::new();
        let mut need: i64 = 2;
        for c in &self.components {
            let dim = c.base.dim();
            let mut den = BTreeMap::new();
            for s in &c.n0.summands {
                let k = if s.has_root() { dim } else { 0 };
                add_den(&mut den, &s.character, k + 1)?;
            }
            let den_c: u32 = den.values().sum();
            let pre = cmax + c.obstruction.rank() as i64 + c.n1.rank() as i64 - c.n0.rank() as i64;
            need = need.max(pre + weight as i64 + den_c as i64 + 1);
            for (mu, e) in den {
                let slot = total.entry(mu).or_insert(0);
                *slot = (*slot).max(e);
            }
        }
        let den_total: u32 = total.values().sum();
        need = need.max(cmax - vd + weight as i64 + den_total as i64 + 1);
        let cap = (need as u32).max(requested);
        if cap > self.torus.max_cap {
            return Err(Error::TruncationCeiling {
                needed: cap,
                ceiling: self.torus.max_cap,
            });
        }
        Ok(LocalizationPlan {
            virtual_dim: vd,
            integrand_codegree: range,
            weight,
            requested_cap: requested,
            cap,
        })
    }

    /// Applies a map to every character in the problem, landing in a torus of
    /// rank `rank`.
    pub fn map_characters(&self, rank: usize, f: impl Fn(&[i64]) -> Vec<i64>) -> Result<Self> {
        let g = |s: &LineSummand| -> LineSummand {
            let character = if s.has_character() {
                f(&s.character)
            } else {
                Vec::new()
            };
            LineSummand::new(s.degrees.clone(), character)
        };
        let mb = |b: &BundleSpec| -> BundleSpec { b.summands.iter().map(g).collect() };
        let torus = TorusContext::with_ceiling(rank, self.torus.cap, self.torus.max_cap)?;
        Ok(Self {
            fgl: self.fgl.clone(),
            torus,
            components: self
                .components
                .iter()
                .map(|c| FixedComponentSpec {
                    base: c.base.clone(),
                    n0: mb(&c.n0),
                    n1: mb(&c.n1),
                    obstruction: mb(&c.obstruction),
                    integrand: c.integrand.map_lines(&g),
                })
                .collect(),
            direct: self.direct.clone(),
        })
    }

    /// Appends the same moving character to N₀ and N₁ of every component.
    pub fn with_shift(&self, mu: &Character) -> Result<Self> {
        if mu.is_zero() {
            return Err(Error::ZeroCharacter);
        }
        let mut out = self.clone();
        for c in &mut out.components {
            c.n0.summands.push(LineSummand::weight(mu.coords().to_vec()));
            c.n1.summands.push(LineSummand::weight(mu.coords().to_vec()));
        }
        Ok(out)
    }

    /// The same problem in another theory of the same order.
    pub fn in_theory(&self, kind: TheoryKind) -> Result<Self> {
        Ok(Self {
            fgl: make_fgl(kind, self.fgl.order())?,
            ..self.clone()
        })
    }
}

/// Fixed-point data of a product of projective spaces under the standard
/// torus, which acts on the f-th factor through its own block of
/// coordinates tₒ…tₒ₊ₙ.
///
/// At the fixed point picking coordinate i in each factor, the tangent
/// characters are {t_j − t_i}_{j≠i}, and O(d) restricts to the character
/// −d·t_i. Obstruction summands with nonzero restricted character become
/// moving (N₁); the others stay as fixed obstruction.
pub fn standard_product_fixed_data(
    fgl: &Arc<FormalGroupLaw>,
    dims: &[u32],
    integrand: &Integrand,
    obstruction: &BundleSpec,
    torus: &TorusContext,
) -> Result<VirtualLocalizationProblem> {
    let rank: usize = dims.iter().map(|&n| n as usize + 1).sum();
    if torus.rank != rank {
        return Err(Error::RankMismatch(format!(
            "the standard action on these factors needs a rank-{rank} torus, got {}",
            torus.rank
        )));
    }
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0usize, |acc, &n| {
            let o = *acc;
            *acc += n as usize + 1;
            Some(o)
        })
        .collect();
    let mut points: Vec<Vec<usize>> = vec![Vec::new()];
    for &n in dims {
        points = points
            .into_iter()
            .flat_map(|p| {
                (0..=n as usize).map(move |i| {
                    let mut p = p.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    let mut components = Vec::with_capacity(points.len());
    for p in points {
        let restrict = |s: &LineSummand| -> LineSummand {
            let mut ch = vec![0i64; rank];
            for (l, &a) in s.character.iter().enumerate() {
                ch[l] += a;
            }
            for (f, &i) in p.iter().enumerate() {
                ch[offsets[f] + i] -= s.degree(f);
            }
            LineSummand::weight(ch)
        };
        let mut n0 = Vec::new();
        for (f, &n) in dims.iter().enumerate() {
            for j in 0..=n as usize {
                if j != p[f] {
                    let mut ch = vec![0i64; rank];
                    ch[offsets[f] + j] += 1;
                    ch[offsets[f] + p[f]] -= 1;
                    n0.push(LineSummand::weight(ch));
                }
            }
        }
        let mut n1 = Vec::new();
        let mut fixed = Vec::new();
        for s in &obstruction.summands {
            let r = restrict(s);
            if r.has_character() {
                n1.push(r);
            } else {
                fixed.push(LineSummand::trivial());
            }
        }
        components.push(FixedComponentSpec {
            base: SpaceModel::Point,
            n0: BundleSpec::new(n0),
            n1: BundleSpec::new(n1),
            obstruction: BundleSpec::new(fixed),
            integrand: integrand.map_lines(&restrict),
        });
    }
    Ok(VirtualLocalizationProblem {
        fgl: fgl.clone(),
        torus: torus.clone(),
        components,
        direct: Some(DirectReference {
            model: SpaceModel::proj_product(dims),
            obstruction: obstruction.clone(),
            integrand: integrand.clone(),
        }),
    })
}

/// [`standard_product_fixed_data`] for a single Pⁿ with a rank n+1 torus.
pub fn standard_pn_fixed_data(
    fgl: &Arc<FormalGroupLaw>,
    n: u32,
    integrand: &Integrand,
    obstruction: &BundleSpec,
    torus: &TorusContext,
) -> Result<VirtualLocalizationProblem> {
    standard_product_fixed_data(fgl, &[n], integrand, obstruction, torus)
}

/// Integrand c₁(O(1))ᵏ on a product of projective spaces, with the line
/// named `h`.
pub fn hyperplane_power(k: u32) -> Integrand {
    let mut env = ClassEnv::default();
    env.lines.insert("h".into(), LineSummand::line(vec![1]));
    Integrand::new(ClassExpr::c1("h").pow(k), env)
}

fn component_contribution(
    c: &FixedComponentSpec,
    point: &Arc<IntersectionRing>,
    fgl: &Arc<FormalGroupLaw>,
    weight: u32,
    cmax: i64,
    checked: bool,
) -> Result<LocalizedElement> {
    let torus = point.torus().expect("equivariant point").clone();
    let ring = if c.base == SpaceModel::Point {
        point.clone()
    } else {
        build_equivariant_space(fgl, &c.base, &torus, Some(weight))?
    };
    let integrand = c.integrand.eval(&ring)?;
    let ob = virtual_class_smooth(&ring, &c.obstruction)?;
    let e1 = ring.euler(&c.n1)?;
    let num = ring.mul(&ring.mul(&integrand, &ob)?, &e1)?;
    let codeg = cmax + c.obstruction.rank() as i64 + c.n1.rank() as i64;
    let mut el = LocalizedElement::new(&ring, num, codeg)?;
    if !checked {
        el = el.unchecked();
    }
    let inv = invert_euler_with(&c.n0, &ring, checked)?;
    el.mul(&inv)?.push_to_point(point)
}

/// Evaluates the localization sum.
pub fn localize(problem: &VirtualLocalizationProblem) -> Result<LocalizationOutcome> {
    localize_with(problem, &LocalizeOptions::default())
}

pub fn localize_with(problem: &VirtualLocalizationProblem, opts: &LocalizeOptions) -> Result<LocalizationOutcome> {
    let mut plan = problem.plan()?;
    let checked = matches!(opts.cap, CapMode::Auto);
    if let CapMode::Raw(cap) = opts.cap {
        plan.cap = cap;
    }
    let torus = TorusContext::with_ceiling(problem.torus.rank, plan.cap, problem.torus.max_cap.max(plan.cap))?;
    let weight = Some(plan.weight);
    let point = build_equivariant_space(&problem.fgl, &SpaceModel::Point, &torus, weight)?;
    let Some((_, cmax)) = plan.integrand_codegree else {
        let element = LocalizedElement::zero(&point)?;
        return Ok(LocalizationOutcome { element, plan });
    };
    let run = |c: &FixedComponentSpec| component_contribution(c, &point, &problem.fgl, plan.weight, cmax, checked);
    let parts: Vec<LocalizedElement> = if opts.parallel {
        problem.components.par_iter().map(run).collect::<Result<_>>()?
    } else {
        problem.components.iter().map(run).collect::<Result<_>>()?
    };
    let mut acc = LocalizedElement::zero(&point)?;
    if !checked {
        acc = acc.unchecked();
    }
    for p in &parts {
        acc = acc.add(p)?;
    }
    if acc.cap() > plan.cap {
        plan.cap = acc.cap();
    }
    Ok(LocalizationOutcome { element: acc, plan })
}

/// ∫_X integrand · e(Ob) on the global model.
pub fn direct_integral(fgl: &Arc<FormalGroupLaw>, direct: &DirectReference) -> Result<TruncatedSeries> {
    let ring = build_space(fgl, &direct.model)?;
    let integrand = direct.integrand.eval(&ring)?;
    let ob = virtual_class_smooth(&ring, &direct.obstruction)?;
    ring.integrate(&ring.mul(&integrand, &ob)?)
}

/// Outcome of one localized-versus-direct comparison.
#[derive(Clone, Debug)]
pub struct TheoryVerdict {
    pub kind: TheoryKind,
    pub localized: LocalizedElement,
    /// The polynomial in ζ the localized sum equals, when it is
    /// denominator-free.
    pub polynomial: Option<TruncatedSeries>,
    /// The same, when it does not depend on ζ.
    pub constant: Option<TruncatedSeries>,
    pub direct: Option<TruncatedSeries>,
    /// `None` when there is nothing to compare against.
    pub verdict: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub plan: LocalizationPlan,
    pub localized: LocalizedElement,
    /// One entry for Chow or K-theory; two (additive, multiplicative) for the
    /// universal theory.
    pub verdicts: Vec<TheoryVerdict>,
}

impl ComparisonReport {
    pub fn passed(&self) -> Option<bool> {
        let vs: Vec<bool> = self.verdicts.iter().filter_map(|v| v.verdict).collect();
        if vs.is_empty() {
            None
        } else {
            Some(vs.iter().all(|&b| b))
        }
    }
}

/// Moves a non-equivariant scalar into the scalar table of `ring`.
fn scalar_into(ring: &IntersectionRing, s: &TruncatedSeries) -> Result<TruncatedSeries> {
    if same_table(s.table(), ring.scalar_table()) {
        return Ok(s.clone());
    }
    s.rename_into(ring.scalar_table(), ring.scalar_profile())
}

fn verdict_for(
    kind: TheoryKind,
    localized: LocalizedElement,
    direct: Option<&DirectReference>,
    order: u32,
) -> Result<TheoryVerdict> {
    let polynomial = localized.polynomial_value()?;
    let constant = localized.constant_value()?;
    let (direct, verdict) = match direct {
        None => (None, None),
        Some(d) => {
            let fgl = make_fgl(kind, order)?;
            let value = direct_integral(&fgl, d)?;
            let value = scalar_into(localized.ring(), &value)?;
            let ok = match &polynomial {
                None => false,
                Some(q) => localized.non_equivariant_part(q).equals(&value),
            };
            (Some(value), Some(ok))
        }
    };
    Ok(TheoryVerdict {
        kind,
        localized,
        polynomial,
        constant,
        direct,
        verdict,
    })
}

/// Localizes and checks the result against direct integration.
pub fn compare_with_direct(problem: &VirtualLocalizationProblem) -> Result<ComparisonReport> {
    let outcome = localize(problem)?;
    let order = problem.fgl.order();
    let direct = problem.direct.as_ref();
    let verdicts = match problem.kind() {
        TheoryKind::Universal => [TheoryKind::Additive, TheoryKind::Multiplicative]
            .into_iter()
            .map(|k| verdict_for(k, outcome.element.specialize(k)?, direct, order))
            .collect::<Result<Vec<_>>>()?,
        k => vec![verdict_for(k, outcome.element.clone(), direct, order)?],
    };
    Ok(ComparisonReport {
        plan: outcome.plan,
        localized: outcome.element,
        verdicts,
    })
}
