//! Descriptions of model spaces and split bundles on them.
//!
//! These are plain data; [`super::build_space`] turns them into rings.

use serde::{Deserialize, Serialize};

/// A projective-bundle tower.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceModel {
    Point,
    Proj {
        n: u32,
    },
    /// P(E) over `base`, with `ξ = c₁(O(1))` as a new generator.
    Bundle {
        base: Box<SpaceModel>,
        bundle: BundleSpec,
    },
    Product {
        left: Box<SpaceModel>,
        right: Box<SpaceModel>,
    },
}

impl SpaceModel {
    pub fn proj(n: u32) -> Self {
        SpaceModel::Proj { n }
    }

    pub fn bundle(base: SpaceModel, bundle: BundleSpec) -> Self {
        SpaceModel::Bundle {
            base: Box::new(base),
            bundle,
        }
    }

    pub fn product(left: SpaceModel, right: SpaceModel) -> Self {
        SpaceModel::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Product of projective spaces of the given dimensions; a point if empty.
    pub fn proj_product(dims: &[u32]) -> Self {
        let mut it = dims.iter().map(|&n| SpaceModel::proj(n));
        match it.next() {
            None => SpaceModel::Point,
            Some(first) => it.fold(first, SpaceModel::product),
        }
    }

    pub fn dim(&self) -> u32 {
        match self {
            SpaceModel::Point => 0,
            SpaceModel::Proj { n } => *n,
            SpaceModel::Bundle { base, bundle } => {
                base.dim() + (bundle.rank() as u32).saturating_sub(1)
            }
            SpaceModel::Product { left, right } => left.dim() + right.dim(),
        }
    }

    /// Number of ring generators (one per projective level).
    pub fn generator_count(&self) -> usize {
        match self {
            SpaceModel::Point => 0,
            SpaceModel::Proj { .. } => 1,
            SpaceModel::Bundle { base, .. } => base.generator_count() + 1,
            SpaceModel::Product { left, right } => {
                left.generator_count() + right.generator_count()
            }
        }
    }

    /// Dimensions of the projective factors when the tower is a product of
    /// projective spaces (points allowed), in generator order.
    pub fn proj_factors(&self) -> Option<Vec<u32>> {
        match self {
            SpaceModel::Point => Some(Vec::new()),
            SpaceModel::Proj { n } => Some(vec![*n]),
            SpaceModel::Bundle { .. } => None,
            SpaceModel::Product { left, right } => {
                let mut l = left.proj_factors()?;
                l.extend(right.proj_factors()?);
                Some(l)
            }
        }
    }
}

/// A line bundle ⊗ⱼ O_j(aⱼ) ⊗ k(λ), where O_j(1) is the tautological line of
/// the j-th generator and λ a torus character.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineSummand {
    /// Exponents over the generators of the ring the line lives on; missing
    /// trailing entries are zero.
    #[serde(default)]
    pub degrees: Vec<i64>,
    /// Character coordinates; empty means trivial.
    #[serde(default)]
    pub character: Vec<i64>,
}

impl LineSummand {
    pub fn new(degrees: Vec<i64>, character: Vec<i64>) -> Self {
        Self { degrees, character }
    }

    pub fn line(degrees: Vec<i64>) -> Self {
        Self::new(degrees, Vec::new())
    }

    pub fn weight(character: Vec<i64>) -> Self {
        Self::new(Vec::new(), character)
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn degree(&self, j: usize) -> i64 {
        self.degrees.get(j).copied().unwrap_or(0)
    }

    pub fn has_root(&self) -> bool {
        self.degrees.iter().any(|&a| a != 0)
    }

    pub fn has_character(&self) -> bool {
        self.character.iter().any(|&a| a != 0)
    }

    pub fn is_trivial(&self) -> bool {
        !self.has_root() && !self.has_character()
    }

    pub fn dual(&self) -> Self {
        Self {
            degrees: self.degrees.iter().map(|a| -a).collect(),
            character: self.character.iter().map(|a| -a).collect(),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
            (0..a.len().max(b.len()))
                .map(|i| a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0))
                .collect()
        }
        Self {
            degrees: add(&self.degrees, &other.degrees),
            character: add(&self.character, &other.character),
        }
    }
}

/// A formal direct sum of lines.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BundleSpec {
    pub summands: Vec<LineSummand>,
}

impl BundleSpec {
    pub fn new(summands: Vec<LineSummand>) -> Self {
        Self { summands }
    }

    pub fn trivial(rank: usize) -> Self {
        Self::new(vec![LineSummand::trivial(); rank])
    }

    pub fn rank(&self) -> usize {
        self.summands.len()
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut s = self.summands.clone();
        s.extend(other.summands.iter().cloned());
        Self::new(s)
    }

    pub fn dual(&self) -> Self {
        Self::new(self.summands.iter().map(LineSummand::dual).collect())
    }

    pub fn is_trivial(&self) -> bool {
        self.summands.iter().all(LineSummand::is_trivial)
    }
}

impl FromIterator<LineSummand> for BundleSpec {
    fn from_iter<I: IntoIterator<Item = LineSummand>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_is_additive() {
        let e = BundleSpec::new(vec![LineSummand::line(vec![1]), LineSummand::trivial()]);
        let m = SpaceModel::product(SpaceModel::bundle(SpaceModel::proj(2), e), SpaceModel::proj(3));
        assert_eq!(m.dim(), 6);
        assert_eq!(m.generator_count(), 3);
        assert_eq!(m.proj_factors(), None);
        assert_eq!(SpaceModel::proj_product(&[1, 2]).proj_factors(), Some(vec![1, 2]));
    }

    #[test]
    fn toml_round_trip() {
        let m = SpaceModel::bundle(
            SpaceModel::proj(1),
            BundleSpec::new(vec![LineSummand::line(vec![2]), LineSummand::new(vec![], vec![1, 0])]),
        );
        #[derive(Serialize, Deserialize)]
        struct Wrap {
            space: SpaceModel,
        }
        let s = toml::to_string(&Wrap { space: m.clone() }).unwrap();
        let back: Wrap = toml::from_str(&s).unwrap();
        assert_eq!(back.space, m);
    }
}
