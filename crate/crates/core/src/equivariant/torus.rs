//! Torus parameters and characters.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A split torus of rank `rank` with parameters ζ₁…ζ_r, each truncated by
/// ζₗ^cap = 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusContext {
    pub rank: usize,
    pub cap: u32,
    /// Largest cap automatic raising may reach.
    pub max_cap: u32,
}

pub const DEFAULT_MAX_CAP: u32 = 48;

impl TorusContext {
    pub fn new(rank: usize, cap: u32) -> Result<Self> {
        Self::with_ceiling(rank, cap, DEFAULT_MAX_CAP.max(cap))
    }

    pub fn with_ceiling(rank: usize, cap: u32, max_cap: u32) -> Result<Self> {
        if cap < 2 {
            return Err(Error::InvalidTask(format!("torus cap must be at least 2, got {cap}")));
        }
        if max_cap < cap {
            return Err(Error::TruncationCeiling {
                needed: cap,
                ceiling: max_cap,
            });
        }
        Ok(Self { rank, cap, max_cap })
    }

    pub fn with_cap(&self, cap: u32) -> Result<Self> {
        if cap > self.max_cap {
            return Err(Error::TruncationCeiling {
                needed: cap,
                ceiling: self.max_cap,
            });
        }
        Self::with_ceiling(self.rank, cap, self.max_cap)
    }

    pub fn zeta_name(l: usize) -> String {
        format!("z{}", l + 1)
    }
}

/// λ = Σ aₗ tₗ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Character(pub Vec<i64>);

impl Character {
    pub fn new(coords: Vec<i64>) -> Self {
        Character(coords)
    }

    pub fn basis(rank: usize, l: usize) -> Self {
        let mut v = vec![0; rank];
        v[l] = 1;
        Character(v)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Canonical representatives have their first nonzero entry positive.
    pub fn is_canonical(&self) -> bool {
        self.0.iter().find(|&&a| a != 0).is_some_and(|&a| a > 0)
    }

    /// The canonical representative of ±λ and whether a sign flip was needed.
    pub fn canonical(&self) -> (Character, bool) {
        if self.is_canonical() || self.is_zero() {
            (self.trimmed(), false)
        } else {
            (self.neg().trimmed(), true)
        }
    }

    fn trimmed(&self) -> Character {
        let mut v = self.0.clone();
        while v.last() == Some(&0) {
            v.pop();
        }
        Character(v)
    }

    pub fn neg(&self) -> Character {
        Character(self.0.iter().map(|a| -a).collect())
    }

    pub fn add(&self, other: &Character) -> Character {
        let n = self.0.len().max(other.0.len());
        Character(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&0) + other.0.get(i).unwrap_or(&0))
                .collect(),
        )
    }

    pub fn scale(&self, k: i64) -> Character {
        Character(self.0.iter().map(|a| a * k).collect())
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (l, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let mag = a.unsigned_abs();
            match (first, a < 0) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            if mag != 1 {
                write!(f, "{mag}")?;
            }
            write!(f, "t{}", l + 1)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sign() {
        let (c, flipped) = Character::new(vec![0, -2, 1]).canonical();
        assert_eq!(c, Character::new(vec![0, 2, -1]));
        assert!(flipped);
        assert_eq!(Character::new(vec![1, -1, 0]).canonical(), (Character::new(vec![1, -1]), false));
    }

    #[test]
    fn display() {
        assert_eq!(Character::new(vec![-1, 0, 2]).to_string(), "-t1 + 2t3");
        assert_eq!(Character::new(vec![0, 0]).to_string(), "0");
    }

    #[test]
    fn cap_must_fit_ceiling() {
        let t = TorusContext::with_ceiling(2, 4, 6).unwrap();
        assert!(t.with_cap(6).is_ok());
        assert_eq!(
            t.with_cap(7).unwrap_err(),
            Error::TruncationCeiling { needed: 7, ceiling: 6 }
        );
        assert!(TorusContext::new(1, 1).is_err());
    }
}
