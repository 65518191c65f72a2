//! Variable tables and truncation profiles.
//!
//! Every variable carries a cohomological codegree. Variables of positive
//! codegree (Chern roots, hyperplane classes, torus parameters) make up the
//! *degree* of a monomial; variables of negative codegree (β, the universal
//! coefficients mᵢ) make up its *weight*. Both are additive, so bounding
//! either one cuts out an ideal and the quotient is again a ring.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    pub codegree: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariableTable {
    vars: Vec<Variable>,
}

impl VariableTable {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = (S, i32)>) -> Result<Arc<Self>> {
        let vars: Vec<Variable> = vars
            .into_iter()
            .map(|(name, codegree)| Variable {
                name: name.into(),
                codegree,
            })
            .collect();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(Arc::new(Self { vars }))
    }

    pub fn empty() -> Arc<Self> {
        Arc::new(Self { vars: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn name(&self, i: usize) -> &str {
        &self.vars[i].name
    }

    pub fn codegree(&self, i: usize) -> i32 {
        self.vars[i].codegree
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Appends variables; fails on a name clash.
    pub fn extended<S: Into<String>>(
        &self,
        more: impl IntoIterator<Item = (S, i32)>,
    ) -> Result<Arc<Self>> {
        let all = self
            .vars
            .iter()
            .map(|v| (v.name.clone(), v.codegree))
            .chain(more.into_iter().map(|(n, c)| (n.into(), c)));
        Self::new(all)
    }

    /// Positive-codegree part of a monomial.
    pub fn degree(&self, exps: &[u32]) -> u32 {
        exps.iter()
            .zip(&self.vars)
            .filter(|(_, v)| v.codegree > 0)
            .map(|(&e, v)| e * v.codegree as u32)
            .sum()
    }

    /// Negative-codegree part of a monomial, as a nonnegative number.
    pub fn weight(&self, exps: &[u32]) -> u32 {
        exps.iter()
            .zip(&self.vars)
            .filter(|(_, v)| v.codegree < 0)
            .map(|(&e, v)| e * (-v.codegree) as u32)
            .sum()
    }

    pub fn codegree_of(&self, exps: &[u32]) -> i64 {
        exps.iter()
            .zip(&self.vars)
            .map(|(&e, v)| e as i64 * v.codegree as i64)
            .sum()
    }
}

pub fn same_table(a: &Arc<VariableTable>, b: &Arc<VariableTable>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// What a series is known modulo.
///
/// A monomial survives iff its degree is below `degree_bound`, its weight is
/// at most `weight_bound`, and every capped exponent is below its cap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Profile {
    pub degree_bound: Option<u32>,
    pub weight_bound: Option<u32>,
    pub caps: Vec<Option<u32>>,
}

impl Profile {
    /// No truncation at all: the series is an honest polynomial.
    pub fn exact(nvars: usize) -> Self {
        Self {
            degree_bound: None,
            weight_bound: None,
            caps: vec![None; nvars],
        }
    }

    /// Truncation at total degree `n` (monomials of degree `>= n` vanish).
    pub fn degree(nvars: usize, n: u32) -> Self {
        Self {
            degree_bound: Some(n),
            ..Self::exact(nvars)
        }
    }

    pub fn with_degree_bound(mut self, n: Option<u32>) -> Self {
        self.degree_bound = n;
        self
    }

    pub fn with_weight_bound(mut self, w: Option<u32>) -> Self {
        self.weight_bound = w;
        self
    }

    pub fn with_cap(mut self, var: usize, cap: Option<u32>) -> Self {
        self.caps[var] = cap;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.degree_bound.is_none()
            && self.weight_bound.is_none()
            && self.caps.iter().all(Option::is_none)
    }

    pub fn admits(&self, table: &VariableTable, exps: &[u32]) -> bool {
        if let Some(n) = self.degree_bound {
            if table.degree(exps) >= n {
                return false;
            }
        }
        if let Some(w) = self.weight_bound {
            if table.weight(exps) > w {
                return false;
            }
        }
        self.caps
            .iter()
            .zip(exps)
            .all(|(cap, &e)| cap.is_none_or(|c| e < c))
    }

    /// The coarser of two profiles: each bound is the tighter one.
    pub fn coarsen(&self, other: &Profile) -> Profile {
        fn min_opt(a: Option<u32>, b: Option<u32>) -> Option<u32> {
            match (a, b) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) => x,
                (None, y) => y,
            }
        }
        Profile {
            degree_bound: min_opt(self.degree_bound, other.degree_bound),
            weight_bound: min_opt(self.weight_bound, other.weight_bound),
            caps: self
                .caps
                .iter()
                .zip(&other.caps)
                .map(|(&a, &b)| min_opt(a, b))
                .collect(),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(n) = self.degree_bound {
            parts.push(format!("degree<{n}"));
        }
        if let Some(w) = self.weight_bound {
            parts.push(format!("weight<={w}"));
        }
        for (i, c) in self.caps.iter().enumerate() {
            if let Some(c) = c {
                parts.push(format!("x{i}^{c}=0"));
            }
        }
        if parts.is_empty() {
            write!(f, "exact")
        } else {
            write!(f, "{}", parts.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        assert_eq!(
            VariableTable::new([("u", 1), ("u", 1)]).unwrap_err(),
            Error::DuplicateVariable("u".into())
        );
    }

    #[test]
    fn degree_and_weight_split_by_sign() {
        let t = VariableTable::new([("beta", -1), ("u", 1), ("m2", -2)]).unwrap();
        assert_eq!(t.degree(&[3, 2, 1]), 2);
        assert_eq!(t.weight(&[3, 2, 1]), 5);
        assert_eq!(t.codegree_of(&[3, 2, 1]), -3);
    }

    #[test]
    fn coarsen_takes_tighter_bounds() {
        let a = Profile::degree(2, 5).with_cap(0, Some(3));
        let b = Profile::degree(2, 4).with_weight_bound(Some(2));
        let c = a.coarsen(&b);
        assert_eq!(c.degree_bound, Some(4));
        assert_eq!(c.weight_bound, Some(2));
        assert_eq!(c.caps, vec![Some(3), None]);
    }
}
