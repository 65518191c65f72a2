//! Exact rational arithmetic and truncated multivariate series.

pub mod rational;
pub mod series;
pub mod table;

pub use rational::{binomial, frac, int, parse_rational, to_pair_string, Rational};
pub use series::{invert_unit_series, poly_mul, series_substitute, Monomial, TruncatedSeries};
pub use table::{same_table, Profile, Variable, VariableTable};
